use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },
    #[error("resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("map header: {0}")]
    Header(String),
    #[error("map row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("grids differ in shape or resolution")]
    ShapeMismatch,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeuristicError {
    #[error("goal blocked")]
    GoalBlocked,
    #[error("goal outside the grid")]
    GoalOutside,
    #[error("no 2D route")]
    NoRoute,
    #[error("path too short for waypose")]
    PathTooShort,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no path")]
    NoPath,
    #[error("budget exceeded")]
    BudgetExceeded,
    #[error("start in collision")]
    StartInCollision,
    #[error("goal in collision")]
    GoalInCollision,
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MissionError {
    #[error("nothing to replan from")]
    NothingToReplan,
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("path too short")]
    PathTooShort,
}

/// Invalid configuration value, reported with the offending field name.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid {field}: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
