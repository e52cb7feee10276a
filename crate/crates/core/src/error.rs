use thiserror::Error;

use crate::diffgeo::ChartId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The chart is too close to its pole at this point; switch charts.
    #[error("chart {chart:?} is degenerate at u1 = {u1} (sin u1 below {threshold}); switch charts")]
    Domain {
        chart: ChartId,
        u1: f64,
        threshold: f64,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate geometry: {0}")]
    Geometry(String),
    #[error("invalid surface parameters: {0}")]
    Surface(String),
    #[error("step size underflow at s = {s} (h = {h:e})")]
    StepUnderflow { s: f64, h: f64 },
    #[error("unit-speed drift {drift:e} at s = {s} exceeds tolerance")]
    SpeedDrift { s: f64, drift: f64 },
    #[error("step limit of {0} reached")]
    MaxSteps(usize),
    #[error("no conjugate point found before s = {s_max}")]
    NoConjugatePoint { s_max: f64 },
    #[error("the xi2 = 0 contour is undefined (xi2 vanishes identically)")]
    ContourUndefined,
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures caused by the absence of a conjugate point rather
    /// than by the numerics.
    pub fn is_missing_conjugate(&self) -> bool {
        matches!(self, Error::NoConjugatePoint { .. })
    }
}
