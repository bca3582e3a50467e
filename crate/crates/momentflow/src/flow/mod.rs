//! Eigenvalue/eigenvector SDE integration and Monte Carlo estimation of
//! colored eigenvector moments.

mod moments;
mod see;
mod validate;

pub use moments::{
    estimate_moment, moment_samples, moment_value, sample_overlaps, summarize, BaseMatrix, MomentRequest,
    OverlapSamples,
};
pub use see::{align_frames, integrate_see, integrate_see_with, orthonormalize, EigenPath, SeeOptions, GAP_FLOOR};
pub use validate::{see_coefficients, validate_generator, GeneratorCheck};
