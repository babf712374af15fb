use thiserror::Error;

/// Rejected model inputs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("speed bounds inverted: v_min {v_min} > v_max {v_max}")]
    InvertedSpeedBounds { v_min: f64, v_max: f64 },
    #[error("speed variance must be non-negative and finite, got {0}")]
    BadVariance(f64),
    #[error("zero-variance speed distribution has mean {mean} outside [{v_min}, {v_max}]")]
    DegenerateMeanOutside { mean: f64, v_min: f64, v_max: f64 },
    #[error("vehicle speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("position {position} outside coverage span [0, {span}]")]
    PositionOutsideSpan { position: f64, span: f64 },
    #[error("shadow-fading correlation base must lie in (0, 1], got {0}")]
    BadCorrelationBase(f64),
}

/// Errors raised while loading or validating a [`crate::SimConfig`].
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("constraint `{0}` violated")]
    Constraint(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
