//! Experiment configuration, suite orchestration and report files.

mod config;
mod report;
mod suites;

use std::time::Instant;

pub use config::{ExperimentConfig, ExperimentKind, Scales};
pub use report::{emit_report, num, Check, ExperimentReport, ReportFormat, Table};
pub use suites::{field, orthonormal_pairs};

use crate::error::Result;

/// Run the suite selected by `config.kind`. Configuration errors and size
/// guards abort; failing checks are recorded in the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut resolved = config.clone();
    if resolved.kind == ExperimentKind::Mixing || resolved.scale_chain {
        resolved.scales = Some(resolved.scales());
    }
    let started = Instant::now();
    let mut report = ExperimentReport::new(resolved);
    suites::run_suite(config, &mut report)?;
    log::info!("{} finished in {:.2?}", config.kind, started.elapsed());
    Ok(report)
}

/// Like [`run_experiment`], recording wall-clock seconds in the report.
pub fn run_timed(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut report = run_experiment(config)?;
    report.runtime = Some(started.elapsed().as_secs_f64());
    Ok(report)
}

/// CSV files written for each experiment, as `(table, columns)`. Every kind
/// also writes `checks` with columns `name,value,target,tol,pass`, and
/// `scales` (`name,value`) when the scale chain is checked.
pub fn csv_tables(kind: ExperimentKind) -> &'static [(&'static str, &'static str)] {
    match kind {
        ExperimentKind::Assumptions => &[
            ("scales", "name,value"),
            ("window", "energies,scales,im_m_min,im_m_max,green_sup,green_bound"),
        ],
        ExperimentKind::GeneratorValidate => &[("drift", "configuration,initial,exact,mean,stderr,z")],
        ExperimentKind::OperatorSuite => &[("l1", "case,configuration,s,pieces,value")],
        ExperimentKind::Mixing => &[
            ("scales", "name,value"),
            ("poincare", "ell,constant,ratio"),
            ("ultracontractivity", "s,value,N,n,ell,upsilon,schedule"),
            ("l1", "s,value,N,n,ell,upsilon,schedule"),
            ("nash", "sample,ratio"),
        ],
        ExperimentKind::Fsp => &[("profile", "dist,value,configuration"), ("envelope", "dist,max")],
        ExperimentKind::JointNormality => &[("overlaps", "trial,u<i>_v<a>...,u<j>_v<a>...")],
        ExperimentKind::AnsatzCompare => &[("wick", "configuration,ansatz,wick")],
    }
}
