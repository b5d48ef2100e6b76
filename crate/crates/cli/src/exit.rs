//! Exit status for each failure class.

use tvbayes::distributions::DistError;
use tvbayes::estimators::EstimatorError;
use tvbayes::harness::HarnessError;
use tvbayes::model::ModelError;
use tvbayes::operators::OperatorError;
use tvbayes::solvers::SolverError;

pub const VALIDATION: u8 = 2;
pub const IO: u8 = 3;
pub const RANK: u8 = 4;
pub const CAPACITY: u8 = 5;
pub const DIVERGENCE: u8 = 6;
pub const NUMERIC: u8 = 7;

/// Marker for argument combinations rejected by the front end itself.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn operator(e: &OperatorError) -> u8 {
    match e {
        OperatorError::RankCondition { .. } => RANK,
        OperatorError::Capacity { .. } => CAPACITY,
        OperatorError::NonFinite { .. } => NUMERIC,
        _ => VALIDATION,
    }
}

fn solver(e: &SolverError) -> u8 {
    match e {
        SolverError::Capacity { .. } => CAPACITY,
        SolverError::DimensionMismatch { .. } => VALIDATION,
        _ => NUMERIC,
    }
}

fn distribution(e: &DistError) -> u8 {
    match e {
        DistError::Inadmissible { .. } | DistError::Domain { .. } | DistError::Dimension { .. } => VALIDATION,
        _ => NUMERIC,
    }
}

fn model(e: &ModelError) -> u8 {
    match e {
        ModelError::Operator(o) => operator(o),
        ModelError::Solver(s) => solver(s),
        ModelError::Distribution(d) => distribution(d),
        ModelError::NonFinite { .. } | ModelError::DegenerateLatent { .. } => NUMERIC,
        _ => VALIDATION,
    }
}

fn estimator(e: &EstimatorError) -> u8 {
    match e {
        EstimatorError::Model(m) => model(m),
        EstimatorError::Operator(o) => operator(o),
        EstimatorError::Solver(s) => solver(s),
        EstimatorError::Distribution(d) => distribution(d),
        EstimatorError::Options(_) => VALIDATION,
        EstimatorError::Divergence { .. } => DIVERGENCE,
        EstimatorError::NonFinite { .. } => NUMERIC,
    }
}

fn harness(e: &HarnessError) -> u8 {
    match e {
        HarnessError::Invalid(_) => VALIDATION,
        _ => IO,
    }
}

pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<EstimatorError>() {
            return estimator(e);
        }
        if let Some(e) = cause.downcast_ref::<ModelError>() {
            return model(e);
        }
        if let Some(e) = cause.downcast_ref::<OperatorError>() {
            return operator(e);
        }
        if let Some(e) = cause.downcast_ref::<SolverError>() {
            return solver(e);
        }
        if let Some(e) = cause.downcast_ref::<DistError>() {
            return distribution(e);
        }
        if let Some(e) = cause.downcast_ref::<HarnessError>() {
            return harness(e);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return IO;
        }
        if cause.downcast_ref::<Usage>().is_some() {
            return VALIDATION;
        }
    }
    NUMERIC
}
