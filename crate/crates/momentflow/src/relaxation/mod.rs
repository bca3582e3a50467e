//! Propagation of functions under the moment flow and numerical measurement
//! of its relaxation inequalities.

mod inequalities;
mod propagate;
mod schedule;

pub use inequalities::{
    dirichlet_form, dirichlet_pair_form, fsp_profile, l1_growth, local_generator, nash_ratio, poincare_constant,
    ultracontractivity_curve, Curve, FspEntry, FspProfile, DENSE_GUARD,
};
pub use propagate::{
    norm_1_1, norm_2_inf, propagate, propagate_with, propagator, ConstantPropagator, Integrator, Norms,
    PropagationResult,
};
pub use schedule::{CoefficientSchedule, ScheduleTag};
