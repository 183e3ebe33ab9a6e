//! Side-by-side check that the block machine and Grover's iteration trace
//! out the same rotation.
//!
//! Three angle sequences are built for `t = 1..=T` (one per block
//! collision):
//!
//! * machine: polar angle of `(√m2·v2, √m1·v1)` from the exact simulation,
//! * grover: `G` applied `t` times to the machine's starting vector,
//! * search: `G` applied `t` times to the uniform search state, which starts
//!   at angle θ* instead of π.
//!
//! The first two must coincide and step by `2θ*`. The third must sit a
//! constant θ* ahead of the machine's angle measured from its start.

use std::f64::consts::{PI, TAU};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::angle::{self, AngleError};
use crate::grover::{g_matrix, TwoDimState};
use crate::machine::{CollisionTrace, Event, Events, MachineConfig, MachineError, MachineState};
use crate::serde_rational;

/// Angles are reconstructed from exact rationals in double precision.
pub const ANGLE_TOLERANCE: f64 = 1e-9;

/// Above this many events only counts are compared.
pub const FULL_TRACE_EVENT_LIMIT: u64 = 100_000;

#[derive(Debug, Error)]
pub enum EquivalenceError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Angle(#[from] AngleError),
}

/// Lifts `atan2` output onto a continuous increasing branch.
///
/// Each step advances by `2θ* < π`, so the next angle is the unique
/// representative in `(prev, prev + 2π]`.
#[derive(Clone, Copy, Debug)]
struct Lifter {
    prev: f64,
}

impl Lifter {
    fn lift(&mut self, raw: f64) -> f64 {
        let turns = ((self.prev - raw) / TAU).floor() + 1.0;
        let mut lifted = raw + turns * TAU;
        if lifted - TAU > self.prev {
            lifted -= TAU;
        }
        self.prev = lifted;
        lifted
    }
}

fn weighted_angle(state: &MachineState, mass_scale: f64) -> f64 {
    let (v1, v2) = state.velocities_f64();
    (mass_scale * v1).atan2(v2)
}

/// `√(m1/m2)`: the weighted vector is `√m2·(v2, √(m1/m2)·v1)`.
fn mass_scale(config: &MachineConfig) -> f64 {
    (config.m1() / config.m2())
        .to_f64()
        .unwrap_or(f64::NAN)
        .sqrt()
}

/// Reference angle θ₀ in `[0, 2π)`: the mirror image under the wall
/// reflection of the state just before the first block collision.
///
/// With block 1 at rest this is π.
pub fn initial_angle(config: &MachineConfig) -> f64 {
    let mut state = config.initial_state();
    if state.next_event() == Event::WallBounce {
        state = crate::machine::step_wall_bounce(&state).expect("phase checked");
    }
    (-weighted_angle(&state, mass_scale(config))).rem_euclid(TAU)
}

/// Angle after each block collision in a full trace, on the continuous
/// branch starting at [`initial_angle`].
///
/// Index `i` holds `θ_{i+1}`. A count-only trace yields an empty sequence.
pub fn machine_angle_trace(trace: &CollisionTrace, config: &MachineConfig) -> Vec<f64> {
    if trace.states.is_empty() {
        return Vec::new();
    }
    let scale = mass_scale(config);
    let mut lifter = Lifter {
        prev: initial_angle(config),
    };
    trace
        .states
        .windows(2)
        .filter(|w| w[0].next_event() == Event::BlockBlock)
        .map(|w| lifter.lift(weighted_angle(&w[1], scale)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MismatchKind {
    /// Machine angle off `θ₀ + 2tθ*`.
    MachineAngle,
    /// Grover 2-D angle off the machine angle.
    GroverAngle,
    /// Search probability off `sin²(θ_t - θ₀ + θ*)`.
    Probability,
    /// Fitted search offset off θ*.
    Offset,
    /// Machine angles not strictly increasing.
    NotIncreasing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mismatch {
    pub kind: MismatchKind,
    /// Zero-based position in the angle sequences.
    pub index: usize,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    #[serde(with = "serde_rational")]
    pub mass_ratio: BigRational,
    pub theta_star: f64,
    pub initial_angle: f64,
    pub machine_angles: Vec<f64>,
    pub grover_angles: Vec<f64>,
    pub search_angles: Vec<f64>,
    pub max_angle_deviation: f64,
    pub max_probability_deviation: f64,
    /// Mean of `search_t - (machine_t - θ₀)`.
    pub offset_used: f64,
    pub machine_count: u64,
    pub closed_form_count: Option<u64>,
    pub counts_match: bool,
    /// False when the run was too long for angle comparison.
    pub angles_compared: bool,
    pub failure: Option<Mismatch>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.counts_match && self.failure.is_none()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CompareLimits {
    pub max_events: u64,
    pub max_precision_bits: u32,
    pub full_trace_events: u64,
}

impl Default for CompareLimits {
    fn default() -> Self {
        Self {
            max_events: crate::machine::DEFAULT_MAX_EVENTS,
            max_precision_bits: angle::DEFAULT_MAX_PRECISION_BITS,
            full_trace_events: FULL_TRACE_EVENT_LIMIT,
        }
    }
}

pub fn compare(config: &MachineConfig) -> Result<ComparisonReport, EquivalenceError> {
    compare_with_limits(config, CompareLimits::default())
}

pub fn compare_with_limits(
    config: &MachineConfig,
    limits: CompareLimits,
) -> Result<ComparisonReport, EquivalenceError> {
    let closed =
        angle::collision_count_with_ceiling(config.m1(), config.m2(), limits.max_precision_bits)?;
    let with_angles = closed.count.is_some_and(|c| c <= limits.full_trace_events);

    let theta_star = angle::theta_star_f64_exact(config.m1(), config.m2());
    let theta0 = initial_angle(config);
    let scale = mass_scale(config);

    let mut machine_angles = Vec::new();
    let mut events = Events::new(config, limits.max_events);
    let mut lifter = Lifter { prev: theta0 };
    let mut pending_block = events.current().next_event() == Event::BlockBlock;
    for state in events.by_ref() {
        let state = state?;
        if with_angles && pending_block {
            machine_angles.push(lifter.lift(weighted_angle(&state, scale)));
        }
        pending_block = state.next_event() == Event::BlockBlock;
    }
    let machine_count = events.current().collisions();

    let mut report = ComparisonReport {
        mass_ratio: config.mass_ratio(),
        theta_star,
        initial_angle: theta0,
        machine_angles,
        grover_angles: Vec::new(),
        search_angles: Vec::new(),
        max_angle_deviation: 0.0,
        max_probability_deviation: 0.0,
        offset_used: f64::NAN,
        machine_count,
        closed_form_count: closed.count,
        counts_match: closed.count == Some(machine_count),
        angles_compared: with_angles,
        failure: None,
    };
    if with_angles {
        check_angles(&mut report);
    }
    Ok(report)
}

fn check_angles(report: &mut ComparisonReport) {
    let theta_star = report.theta_star;
    let theta0 = report.initial_angle;
    let g = g_matrix(theta_star);
    let steps = report.machine_angles.len();

    let mut grover = TwoDimState::from_angle(theta0, 1.0).0;
    let mut grover_lift = Lifter { prev: theta0 };
    let mut search = TwoDimState::from_angle(theta_star, 1.0).0;
    let mut search_lift = Lifter { prev: theta_star };
    for _ in 0..steps {
        grover = g * grover;
        search = g * search;
        report
            .grover_angles
            .push(grover_lift.lift(TwoDimState(grover).angle()));
        report
            .search_angles
            .push(search_lift.lift(TwoDimState(search).angle()));
    }

    let mut failure: Option<Mismatch> = None;
    let mut note = |kind, index, deviation: f64| {
        if deviation > ANGLE_TOLERANCE && failure.is_none() {
            failure = Some(Mismatch {
                kind,
                index,
                deviation,
            });
        }
    };

    let mut offset_sum = 0.0;
    let mut prev = theta0;
    for i in 0..steps {
        let t = (i + 1) as f64;
        let machine = report.machine_angles[i];
        let expected = theta0 + 2.0 * t * theta_star;
        let d_machine = (machine - expected).abs();
        let d_grover = (report.grover_angles[i] - machine).abs();
        report.max_angle_deviation = report.max_angle_deviation.max(d_machine).max(d_grover);
        note(MismatchKind::MachineAngle, i, d_machine);
        note(MismatchKind::GroverAngle, i, d_grover);
        if machine <= prev {
            note(
                MismatchKind::NotIncreasing,
                i,
                prev - machine + f64::MIN_POSITIVE,
            );
        }
        prev = machine;

        let search = report.search_angles[i];
        let p_search = search.sin().powi(2);
        let p_machine = (machine - theta0 + theta_star).sin().powi(2);
        let d_p = (p_search - p_machine).abs();
        report.max_probability_deviation = report.max_probability_deviation.max(d_p);
        note(MismatchKind::Probability, i, d_p);
        offset_sum += search - (machine - theta0);
    }
    if steps > 0 {
        report.offset_used = offset_sum / steps as f64;
        note(
            MismatchKind::Offset,
            steps - 1,
            (report.offset_used - theta_star).abs(),
        );
    }
    report.failure = failure;
}

/// Fraction of a turn swept by the machine, `(θ_T - θ₀) / π`. Just under 1
/// for a run that ends on a block collision.
pub fn swept_half_turns(report: &ComparisonReport) -> Option<f64> {
    report
        .machine_angles
        .last()
        .map(|last| (last - report.initial_angle) / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{parse_rational, run_machine, TraceMode};
    use std::f64::consts::FRAC_PI_2;

    fn cfg(ratio: &str) -> MachineConfig {
        MachineConfig::from_ratio(parse_rational(ratio).unwrap()).unwrap()
    }

    #[test]
    fn lifter_unwraps() {
        let mut l = Lifter { prev: PI };
        assert!((l.lift(-FRAC_PI_2) - 1.5 * PI).abs() < 1e-15);
        assert!((l.lift(-0.1) - (TAU - 0.1)).abs() < 1e-15);
        assert!((l.lift(0.2) - (TAU + 0.2)).abs() < 1e-15);
    }

    #[test]
    fn angle_trace_examples() {
        let c = cfg("1");
        assert!((initial_angle(&c) - PI).abs() < 1e-15);
        let trace = run_machine(&c, TraceMode::FullTrace).unwrap();
        let angles = machine_angle_trace(&trace, &c);
        assert_eq!(angles.len(), 2);
        assert!((angles[0] - 1.5 * PI).abs() < 1e-12);

        let c = cfg("3");
        let trace = run_machine(&c, TraceMode::FullTrace).unwrap();
        let angles = machine_angle_trace(&trace, &c);
        assert!((angles[0] - (PI + PI / 3.0)).abs() < 1e-12);

        let count_only = run_machine(&c, TraceMode::CountOnly).unwrap();
        assert!(machine_angle_trace(&count_only, &c).is_empty());
    }

    #[test]
    fn compare_examples() {
        for (ratio, count, len) in [("1", 3, 2), ("100", 31, 16), ("10000", 314, 157)] {
            let r = compare(&cfg(ratio)).unwrap();
            assert!(r.passed(), "{ratio}: {:?}", r.failure);
            assert_eq!(r.machine_count, count);
            assert_eq!(r.machine_angles.len(), len);
            assert!(r.max_angle_deviation < ANGLE_TOLERANCE);
            assert!((r.offset_used - r.theta_star).abs() < ANGLE_TOLERANCE);
            assert!((r.machine_angles[0] - (PI + 2.0 * r.theta_star)).abs() < ANGLE_TOLERANCE);
        }
    }

    #[test]
    fn long_runs_compare_counts_only() {
        let limits = CompareLimits {
            full_trace_events: 100,
            ..CompareLimits::default()
        };
        let r = compare_with_limits(&cfg("10000"), limits).unwrap();
        assert!(!r.angles_compared);
        assert!(r.machine_angles.is_empty());
        assert!(r.counts_match);
    }

    #[test]
    fn event_limit_propagates() {
        let limits = CompareLimits {
            max_events: 10,
            ..CompareLimits::default()
        };
        let err = compare_with_limits(&cfg("100"), limits).unwrap_err();
        assert!(matches!(
            err,
            EquivalenceError::Machine(MachineError::EventLimit { limit: 10 })
        ));
    }

    #[test]
    fn moving_light_block_start() {
        let q = |s| parse_rational(s).unwrap();
        let c = MachineConfig::with_velocities(q("1"), q("50"), q("1/3"), q("-1")).unwrap();
        let r = compare(&c).unwrap();
        assert!(r.failure.is_none(), "{:?}", r.failure);
        let c = MachineConfig::with_velocities(q("1"), q("50"), q("-2"), q("-1")).unwrap();
        let r = compare(&c).unwrap();
        assert!(r.failure.is_none(), "{:?}", r.failure);
    }

    #[test]
    fn sweep_is_at_most_half_turn() {
        let r = compare(&cfg("10000")).unwrap();
        let s = swept_half_turns(&r).unwrap();
        assert!(s <= 1.0 && s > 0.99, "{s}");
    }
}
