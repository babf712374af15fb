//! Vehicle kinematics inside one edge server's coverage.
//!
//! The road is one-dimensional: positions run from 0 to the coverage span `D`
//! and the server sits at the midpoint. Vehicles keep the speed they were
//! drawn with for their whole stay.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::ModelError;

/// Survivability below this many seconds is treated as exhausted. Repeated
/// subtraction of the slot length otherwise leaves ~1e-15 residues.
const SURVIVABILITY_EPS: f64 = 1e-9;

/// Gaussian speed distribution truncated to `[v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedDistribution {
    mean_mps: f64,
    variance: f64,
    v_min: f64,
    v_max: f64,
}

impl SpeedDistribution {
    pub fn new(mean_mps: f64, variance: f64, v_min: f64, v_max: f64) -> Result<Self, ModelError> {
        if v_min > v_max || v_min.is_nan() || v_max.is_nan() {
            return Err(ModelError::InvertedSpeedBounds { v_min, v_max });
        }
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(ModelError::BadVariance(variance));
        }
        if variance == 0.0 && v_min < v_max && !(v_min..=v_max).contains(&mean_mps) {
            return Err(ModelError::DegenerateMeanOutside {
                mean: mean_mps,
                v_min,
                v_max,
            });
        }
        Ok(Self {
            mean_mps,
            variance,
            v_min,
            v_max,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean_mps
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.v_min, self.v_max)
    }

    /// Draws one speed by rejection from the parent Gaussian.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.v_min == self.v_max {
            return self.v_min;
        }
        if self.variance == 0.0 {
            return self.mean_mps;
        }
        let parent =
            Normal::new(self.mean_mps, self.variance.sqrt()).expect("validated standard deviation");
        loop {
            let v = parent.sample(rng);
            if (self.v_min..=self.v_max).contains(&v) {
                return v;
            }
        }
    }
}

/// Free-function form of [`SpeedDistribution::sample`].
pub fn sample_speed<R: Rng + ?Sized>(dist: &SpeedDistribution, rng: &mut R) -> f64 {
    dist.sample(rng)
}

/// Coverage of one edge server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageGeometry {
    /// Coverage span `D` in meters; equals twice the radius.
    pub span_d: f64,
    pub radius_r: f64,
    pub server_height: f64,
    /// Floor on the vehicle-to-server distance, keeps the log and the
    /// shadow-correlation exponent finite.
    pub min_distance: f64,
}

impl CoverageGeometry {
    pub fn new(radius_r: f64, server_height: f64) -> Self {
        Self {
            span_d: 2.0 * radius_r,
            radius_r,
            server_height,
            min_distance: 1.0,
        }
    }

    pub fn server_position(&self) -> f64 {
        self.span_d / 2.0
    }

    /// Horizontal separation from the server, clamped below at `min_distance`.
    pub fn distance_to_server(&self, position: f64) -> f64 {
        (position - self.server_position())
            .abs()
            .max(self.min_distance)
    }
}

pub fn distance_to_server(geom: &CoverageGeometry, position: f64) -> f64 {
    geom.distance_to_server(position)
}

/// Seconds a vehicle entering at `initial_position` spends before leaving the
/// coverage span.
pub fn initial_survivability(
    geom: &CoverageGeometry,
    initial_position: f64,
    speed: f64,
) -> Result<f64, ModelError> {
    if speed.is_nan() || speed <= 0.0 {
        return Err(ModelError::NonPositiveSpeed(speed));
    }
    if !(0.0..=geom.span_d).contains(&initial_position) {
        return Err(ModelError::PositionOutsideSpan {
            position: initial_position,
            span: geom.span_d,
        });
    }
    Ok((geom.span_d - initial_position) / speed)
}

/// One vehicle's state as seen by its edge server.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: usize,
    pub position: f64,
    pub speed: f64,
    /// Remaining data items.
    pub remaining_data: u64,
    pub remaining_energy: f64,
    /// Seconds left inside coverage.
    pub survivability: f64,
    pub active: bool,
}

impl VehicleState {
    /// A vehicle entering at `position` with full stock.
    pub fn enter(
        id: usize,
        geom: &CoverageGeometry,
        position: f64,
        speed: f64,
        data_items: u64,
        energy: f64,
    ) -> Result<Self, ModelError> {
        let survivability = initial_survivability(geom, position, speed)?;
        let mut v = Self {
            id,
            position,
            speed,
            remaining_data: data_items,
            remaining_energy: energy,
            survivability,
            active: false,
        };
        v.refresh_active(geom);
        Ok(v)
    }

    fn refresh_active(&mut self, geom: &CoverageGeometry) {
        self.active =
            self.survivability > 0.0 && self.remaining_energy > 0.0 && self.position <= geom.span_d;
    }

    /// Moves the vehicle forward by one slot and counts down survivability.
    pub fn advance_slot(&mut self, geom: &CoverageGeometry, slot_seconds: f64) {
        self.position += self.speed * slot_seconds;
        self.survivability -= slot_seconds;
        if self.survivability < SURVIVABILITY_EPS {
            self.survivability = 0.0;
        }
        self.refresh_active(geom);
    }

    /// Re-evaluates activity after an external change such as an energy debit.
    pub fn recheck(&mut self, geom: &CoverageGeometry) {
        self.refresh_active(geom);
    }
}

/// Value-returning form of [`VehicleState::advance_slot`].
pub fn advance_slot(v: &VehicleState, geom: &CoverageGeometry, slot_seconds: f64) -> VehicleState {
    let mut next = v.clone();
    next.advance_slot(geom, slot_seconds);
    next
}
