//! Even configuration spaces, the colored moment flow generator and the
//! operators built around it.
//!
//! Sites and labels are 0-based. Functions over a space are plain slices in
//! enumeration order.

mod colorblind;
mod generator;
mod kernel;
mod local;
mod matching;
mod operator;
mod partition;
mod space;

pub use colorblind::{colorblind_transport, ColorblindSpace, Transport};
pub use generator::{assemble_generator, pair_generator, GeneratorPart, PairCoefficients};
pub use kernel::{
    chi_indicator, haar_kernel_entries, haar_kernel_entry, kernel_pairing, kernel_projection, sample_haar,
};
pub use local::{
    av_value, averaging_coefficients, config_distance, local_neighborhood, local_projection, LocalRelation,
};
pub use matching::{matchings, PerfectMatching};
pub use operator::WeightedOperator;
pub use partition::{conditional_expectation, set_partitions, Partition};
pub use space::{df, jump, space_size_estimate, Configuration, ConfigurationSpace, JumpKind, SPACE_GUARD};
