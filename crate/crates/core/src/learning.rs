//! Learning-curve surrogate for model accuracy.
//!
//! Expected accuracy after training on `x` MB is `1 - l_rate * x^d_rate`.
//! Below 1 MB the curve is clamped to 0 so that "no data" has zero utility
//! instead of the curve's singularity at the origin.

/// Which data volume the per-slot utility is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UtilityBasis {
    /// Only the data uploaded this slot.
    #[default]
    Slot,
    /// Data trained so far plus this slot's uploads.
    Cumulative,
}

impl UtilityBasis {
    pub fn as_str(&self) -> &'static str {
        match self {
            UtilityBasis::Slot => "slot",
            UtilityBasis::Cumulative => "cumulative",
        }
    }
}

impl std::str::FromStr for UtilityBasis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "slot" => Ok(Self::Slot),
            "cumulative" => Ok(Self::Cumulative),
            other => Err(format!("expected `slot` or `cumulative`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub learning_rate: f64,
    pub decay_rate: f64,
    pub cumulative_data_mb: f64,
}

impl LearningCurve {
    pub fn new(learning_rate: f64, decay_rate: f64) -> Self {
        Self {
            learning_rate,
            decay_rate,
            cumulative_data_mb: 0.0,
        }
    }

    pub fn expected_accuracy(&self, x_mb: f64) -> f64 {
        if x_mb < 1.0 {
            0.0
        } else {
            1.0 - self.learning_rate * x_mb.powf(self.decay_rate)
        }
    }

    /// Utility of admitting `n` batches of `batch_mb` this slot.
    pub fn slot_utility(&self, n: usize, batch_mb: f64, basis: UtilityBasis) -> f64 {
        let x = batch_mb * n as f64;
        match basis {
            UtilityBasis::Slot => self.expected_accuracy(x),
            UtilityBasis::Cumulative => self.expected_accuracy(self.cumulative_data_mb + x),
        }
    }

    /// Adds `trained_mb` to the training set; returns `(accuracy, loss)`.
    pub fn record_training(&mut self, trained_mb: f64) -> (f64, f64) {
        self.cumulative_data_mb += trained_mb;
        let acc = self.accuracy();
        (acc, 1.0 - acc)
    }

    pub fn accuracy(&self) -> f64 {
        self.expected_accuracy(self.cumulative_data_mb)
    }
}
