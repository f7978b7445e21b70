//! The scalar objective over metric reports. Lower is better.
//!
//! fitness = 480*dead_ends + 300*(components - 1) + 150*boundary
//!         + 100*bridges + 100*crossing_adjacency + 80*turn_adjacency
//!         - 2*cyclomatic - 2*straight_runs
//!
//! A grid with no network at all cannot be scored; it maps to an invalid
//! sentinel that compares worse than every valid value.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::metrics::{full_report, MetricReport};
use crate::num::Scalar;

/// Per-term weights of the objective. Penalty weights add, bonus weights
/// subtract.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitnessWeights<R> {
    pub dead_ends: R,
    pub components: R,
    pub boundary: R,
    pub bridges: R,
    pub adjacent_crossings: R,
    pub adjacent_turns: R,
    pub cyclomatic_bonus: R,
    pub straight_bonus: R,
}

impl<R: Scalar> Default for FitnessWeights<R> {
    fn default() -> Self {
        FitnessWeights {
            dead_ends: R::from_f64_lossy(480.0),
            components: R::from_f64_lossy(300.0),
            boundary: R::from_f64_lossy(150.0),
            bridges: R::from_f64_lossy(100.0),
            adjacent_crossings: R::from_f64_lossy(100.0),
            adjacent_turns: R::from_f64_lossy(80.0),
            cyclomatic_bonus: R::from_f64_lossy(2.0),
            straight_bonus: R::from_f64_lossy(2.0),
        }
    }
}

impl<R: Scalar + for<'de> Deserialize<'de>> FitnessWeights<R> {
    /// Parses a `{"weights": {...}}` config document; omitted fields keep
    /// their defaults.
    pub fn from_config_json(text: &str) -> Result<Self, serde_json::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "R: Scalar + for<'d> Deserialize<'d>")]
        struct Config<R> {
            weights: FitnessWeights<R>,
        }
        serde_json::from_str::<Config<R>>(text).map(|c| c.weights)
    }
}

/// A computed fitness. Invalid values flag degenerate (empty) grids and
/// compare worse than any valid value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessValue<R> {
    value: R,
    valid: bool,
}

impl<R: Scalar> FitnessValue<R> {
    pub fn new(value: R) -> Self {
        FitnessValue { value, valid: true }
    }

    /// Sentinel for unscorable grids.
    pub fn invalid() -> Self {
        FitnessValue {
            value: R::infinity(),
            valid: false,
        }
    }

    pub fn value(self) -> R {
        self.value
    }

    pub fn is_valid(self) -> bool {
        self.valid
    }

    /// Strictly-better comparison used by every solver (minimization).
    pub fn better_than(self, other: FitnessValue<R>) -> bool {
        self.value < other.value
    }
}

/// Scores a metric report.
pub fn fitness<R: Scalar>(report: &MetricReport, weights: &FitnessWeights<R>) -> FitnessValue<R> {
    if report.connected_components == 0 {
        return FitnessValue::invalid();
    }
    let n = R::from_count;
    let penalties = weights.dead_ends * n(report.dead_ends)
        + weights.components * n(report.connected_components - 1)
        + weights.boundary * n(report.boundary_violations)
        + weights.bridges * n(report.bridges)
        + weights.adjacent_crossings
            * R::from_u64(report.adjacent_crossing_violation_score).expect("score fits scalar")
        + weights.adjacent_turns * n(report.adjacent_turns);
    let bonuses = weights.cyclomatic_bonus
        * R::from_i64(report.cyclomatic_complexity).expect("cyclomatic fits scalar")
        + weights.straight_bonus
            * R::from_u64(report.straight_run_score).expect("score fits scalar");
    FitnessValue::new(penalties - bonuses)
}

/// Computes the report and fitness of `grid` in one call.
pub fn evaluate<R: Scalar>(
    grid: &Grid,
    weights: &FitnessWeights<R>,
) -> (MetricReport, FitnessValue<R>) {
    let report = full_report(grid);
    let value = fitness(&report, weights);
    (report, value)
}
