//! Exact event-driven simulation of two blocks and a wall.
//!
//! Block 1 (mass `m1`) sits between the wall and block 2 (mass `m2`).
//! Negative velocity points toward the wall. Only velocities are tracked:
//! with block 1 at rest and block 2 approaching, the order of events is
//! fixed by the velocity signs alone, so positions never enter the count.
//!
//! Velocities are held as integer numerators over a shared positive
//! denominator. A block collision is then two small-by-big multiplications
//! and no gcd, which keeps the mass ratio `10^6` run (3141 events) cheap.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Events are capped at this count unless the caller raises it.
pub const DEFAULT_MAX_EVENTS: u64 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("mass {name} must be positive, got {value}")]
    NonPositiveMass {
        name: &'static str,
        value: BigRational,
    },
    #[error("block 2 must approach block 1 (v2_initial < 0), got {0}")]
    NotApproaching(BigRational),
    #[error("{attempted:?} requested but the next event is {actual:?}")]
    WrongPhase { attempted: Event, actual: Event },
    #[error("event limit of {limit} exceeded before the blocks separated")]
    EventLimit { limit: u64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational `{input}`: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses an integer or `num/den` string into an exact rational.
///
/// Decimal points and exponents are rejected so that no float ever
/// reaches a mass or velocity.
pub fn parse_rational(input: &str) -> Result<BigRational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        input: input.to_string(),
        reason,
    };
    let trimmed = input.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let is_int = |s: &str| {
        let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !is_int(num) || !is_int(den) {
        return Err(err("expected an integer or num/den with integer parts"));
    }
    let num = BigInt::from_str(num).map_err(|_| err("bad numerator"))?;
    let den = BigInt::from_str(den).map_err(|_| err("bad denominator"))?;
    if den.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

/// Formats a rational the way [`parse_rational`] reads it back.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Event {
    BlockBlock,
    WallBounce,
    Terminated,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Event::BlockBlock => "BlockBlock",
            Event::WallBounce => "WallBounce",
            Event::Terminated => "Terminated",
        };
        f.write_str(s)
    }
}

/// Masses and initial velocities, all exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineConfig {
    m1: BigRational,
    m2: BigRational,
    v1_initial: BigRational,
    v2_initial: BigRational,
}

impl MachineConfig {
    /// Block 1 at rest, block 2 moving toward it with unit speed.
    pub fn new(m1: BigRational, m2: BigRational) -> Result<Self, MachineError> {
        Self::with_velocities(m1, m2, BigRational::zero(), -BigRational::one())
    }

    /// Shorthand for `m1 = 1`, `m2 = ratio`.
    pub fn from_ratio(ratio: BigRational) -> Result<Self, MachineError> {
        Self::new(BigRational::one(), ratio)
    }

    pub fn with_velocities(
        m1: BigRational,
        m2: BigRational,
        v1_initial: BigRational,
        v2_initial: BigRational,
    ) -> Result<Self, MachineError> {
        if !m1.is_positive() {
            return Err(MachineError::NonPositiveMass {
                name: "m1",
                value: m1,
            });
        }
        if !m2.is_positive() {
            return Err(MachineError::NonPositiveMass {
                name: "m2",
                value: m2,
            });
        }
        if !v2_initial.is_negative() {
            return Err(MachineError::NotApproaching(v2_initial));
        }
        Ok(Self {
            m1,
            m2,
            v1_initial,
            v2_initial,
        })
    }

    pub fn m1(&self) -> &BigRational {
        &self.m1
    }

    pub fn m2(&self) -> &BigRational {
        &self.m2
    }

    pub fn v1_initial(&self) -> &BigRational {
        &self.v1_initial
    }

    pub fn v2_initial(&self) -> &BigRational {
        &self.v2_initial
    }

    /// `m2 / m1`.
    pub fn mass_ratio(&self) -> BigRational {
        &self.m2 / &self.m1
    }

    /// Coprime positive integers with the same ratio as `(m1, m2)`.
    ///
    /// The collision update is homogeneous in the masses, so these can
    /// stand in for the rationals.
    pub fn integer_masses(&self) -> (BigInt, BigInt) {
        let a = self.m1.numer() * self.m2.denom();
        let b = self.m2.numer() * self.m1.denom();
        let g = a.gcd(&b);
        (a / &g, b / g)
    }

    pub fn initial_state(&self) -> MachineState {
        MachineState::from_velocities(&self.v1_initial, &self.v2_initial, 0)
    }

    /// `m1·v1² + m2·v2²` at the start.
    pub fn initial_energy(&self) -> BigRational {
        self.initial_state().kinetic_energy(self)
    }
}

/// Velocities after some number of events.
///
/// `v1 = num1 / den` and `v2 = num2 / den` with `den > 0`. The pair is not
/// kept in lowest terms; use [`MachineState::v1`] and [`MachineState::v2`]
/// for reduced values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    num1: BigInt,
    num2: BigInt,
    den: BigInt,
    collisions: u64,
    next_event: Event,
}

impl MachineState {
    pub fn from_velocities(v1: &BigRational, v2: &BigRational, collisions: u64) -> Self {
        let den = v1.denom().lcm(v2.denom());
        let num1 = v1.numer() * (&den / v1.denom());
        let num2 = v2.numer() * (&den / v2.denom());
        let next_event = classify(&num1, &num2);
        Self {
            num1,
            num2,
            den,
            collisions,
            next_event,
        }
    }

    pub fn v1(&self) -> BigRational {
        BigRational::new(self.num1.clone(), self.den.clone())
    }

    pub fn v2(&self) -> BigRational {
        BigRational::new(self.num2.clone(), self.den.clone())
    }

    /// Unreduced `(num1, num2, den)`.
    pub fn raw_parts(&self) -> (&BigInt, &BigInt, &BigInt) {
        (&self.num1, &self.num2, &self.den)
    }

    pub fn collisions(&self) -> u64 {
        self.collisions
    }

    pub fn next_event(&self) -> Event {
        self.next_event
    }

    pub fn kinetic_energy(&self, config: &MachineConfig) -> BigRational {
        // Sum over the common denominator and reduce once; the velocity
        // denominators can run to thousands of bits.
        let (m1, m2) = (config.m1(), config.m2());
        let numer = m1.numer() * m2.denom() * &self.num1 * &self.num1
            + m2.numer() * m1.denom() * &self.num2 * &self.num2;
        BigRational::new(numer, m1.denom() * m2.denom() * &self.den * &self.den)
    }

    pub fn momentum(&self, config: &MachineConfig) -> BigRational {
        let (m1, m2) = (config.m1(), config.m2());
        let numer = m1.numer() * m2.denom() * &self.num1 + m2.numer() * m1.denom() * &self.num2;
        BigRational::new(numer, m1.denom() * m2.denom() * &self.den)
    }

    /// Velocities as `f64`, accurate relative to the larger of the two.
    pub fn velocities_f64(&self) -> (f64, f64) {
        let top = self.num1.bits().max(self.num2.bits()).max(self.den.bits());
        let shift = top.saturating_sub(96);
        let to_f64 = |x: &BigInt| num_traits::ToPrimitive::to_f64(&(x >> shift)).unwrap_or(0.0);
        let den = to_f64(&self.den);
        (to_f64(&self.num1) / den, to_f64(&self.num2) / den)
    }

    fn strip_common_twos(&mut self) {
        let tz = [&self.num1, &self.num2, &self.den]
            .iter()
            .filter_map(|x| x.trailing_zeros())
            .min()
            .unwrap_or(0);
        if tz > 0 {
            self.num1 >>= tz;
            self.num2 >>= tz;
            self.den >>= tz;
        }
    }
}

/// Phase of a state given its velocity numerators over a positive denominator.
///
/// When block 2 is overtaking block 1 while block 1 also heads for the wall,
/// the block collision is taken first: the blocks are treated as touching,
/// as in the initial configuration.
fn classify(num1: &BigInt, num2: &BigInt) -> Event {
    if !num1.is_negative() && num1 <= num2 {
        Event::Terminated
    } else if num2 < num1 {
        Event::BlockBlock
    } else {
        Event::WallBounce
    }
}

fn block_collision(state: &MachineState, m1: &BigInt, m2: &BigInt) -> MachineState {
    let diff = m1 - m2;
    let num1 = &diff * &state.num1 + (m2 << 1) * &state.num2;
    let num2 = -&diff * &state.num2 + (m1 << 1) * &state.num1;
    let den = (m1 + m2) * &state.den;
    let next_event = classify(&num1, &num2);
    let mut next = MachineState {
        num1,
        num2,
        den,
        collisions: state.collisions + 1,
        next_event,
    };
    next.strip_common_twos();
    next
}

fn wall_bounce(state: &MachineState) -> MachineState {
    let num1 = -&state.num1;
    let next_event = classify(&num1, &state.num2);
    MachineState {
        num1,
        num2: state.num2.clone(),
        den: state.den.clone(),
        collisions: state.collisions + 1,
        next_event,
    }
}

/// Elastic collision between the two blocks.
pub fn step_block_collision(
    state: &MachineState,
    config: &MachineConfig,
) -> Result<MachineState, MachineError> {
    if state.next_event != Event::BlockBlock {
        return Err(MachineError::WrongPhase {
            attempted: Event::BlockBlock,
            actual: state.next_event,
        });
    }
    let (m1, m2) = config.integer_masses();
    Ok(block_collision(state, &m1, &m2))
}

/// Block 1 reflects off the wall.
pub fn step_wall_bounce(state: &MachineState) -> Result<MachineState, MachineError> {
    if state.next_event != Event::WallBounce {
        return Err(MachineError::WrongPhase {
            attempted: Event::WallBounce,
            actual: state.next_event,
        });
    }
    Ok(wall_bounce(state))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TraceMode {
    #[default]
    CountOnly,
    FullTrace,
}

/// Streaming event loop. Yields the state after each event.
///
/// Yields an [`MachineError::EventLimit`] error once if the limit is hit,
/// then stops.
#[derive(Clone, Debug)]
pub struct Events {
    m1: BigInt,
    m2: BigInt,
    state: MachineState,
    max_events: u64,
    done: bool,
}

impl Events {
    pub fn new(config: &MachineConfig, max_events: u64) -> Self {
        let (m1, m2) = config.integer_masses();
        Self {
            m1,
            m2,
            state: config.initial_state(),
            max_events,
            done: false,
        }
    }

    /// The most recent state (the initial state before the first call to `next`).
    pub fn current(&self) -> &MachineState {
        &self.state
    }
}

impl Iterator for Events {
    type Item = Result<MachineState, MachineError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let next = match self.state.next_event {
            Event::Terminated => {
                self.done = true;
                return None;
            }
            _ if self.state.collisions >= self.max_events => {
                self.done = true;
                return Some(Err(MachineError::EventLimit {
                    limit: self.max_events,
                }));
            }
            Event::BlockBlock => block_collision(&self.state, &self.m1, &self.m2),
            Event::WallBounce => wall_bounce(&self.state),
        };
        self.state = next.clone();
        Some(Ok(next))
    }
}

/// Result of a full run.
///
/// In [`TraceMode::FullTrace`] `states` holds the initial state followed by
/// the state after every event; in [`TraceMode::CountOnly`] it is empty.
#[derive(Clone, Debug)]
pub struct CollisionTrace {
    pub states: Vec<MachineState>,
    pub total_collisions: u64,
    pub final_state: MachineState,
}

impl CollisionTrace {
    /// Event performed at each transition, in order.
    pub fn events(&self) -> impl Iterator<Item = Event> + '_ {
        let n = self.states.len().saturating_sub(1);
        self.states[..n].iter().map(|s| s.next_event)
    }
}

pub fn run_machine(
    config: &MachineConfig,
    mode: TraceMode,
) -> Result<CollisionTrace, MachineError> {
    run_machine_with_limit(config, mode, DEFAULT_MAX_EVENTS)
}

pub fn run_machine_with_limit(
    config: &MachineConfig,
    mode: TraceMode,
    max_events: u64,
) -> Result<CollisionTrace, MachineError> {
    let mut events = Events::new(config, max_events);
    let mut states = Vec::new();
    if mode == TraceMode::FullTrace {
        states.push(events.current().clone());
    }
    for state in events.by_ref() {
        let state = state?;
        if mode == TraceMode::FullTrace {
            states.push(state);
        }
    }
    let final_state = events.current().clone();
    Ok(CollisionTrace {
        states,
        total_collisions: final_state.collisions,
        final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn state(v1: &str, v2: &str) -> MachineState {
        MachineState::from_velocities(&q(v1), &q(v2), 0)
    }

    #[test]
    fn equal_masses_exchange_velocities() {
        let cfg = MachineConfig::new(q("1"), q("1")).unwrap();
        let next = step_block_collision(&cfg.initial_state(), &cfg).unwrap();
        assert_eq!(next.v1(), q("-1"));
        assert_eq!(next.v2(), q("0"));
        assert_eq!(next.collisions(), 1);
        assert_eq!(next.next_event(), Event::WallBounce);
    }

    #[test]
    fn ratio_three_collision() {
        let cfg = MachineConfig::new(q("1"), q("3")).unwrap();
        let s0 = cfg.initial_state();
        let next = step_block_collision(&s0, &cfg).unwrap();
        assert_eq!(next.v1(), q("-3/2"));
        assert_eq!(next.v2(), q("-1/2"));
        assert_eq!(next.kinetic_energy(&cfg), s0.kinetic_energy(&cfg));
        assert_eq!(next.momentum(&cfg), s0.momentum(&cfg));
    }

    #[test]
    fn co_moving_blocks_cannot_collide() {
        let cfg = MachineConfig::new(q("1"), q("1")).unwrap();
        for v in ["-1", "0", "2"] {
            let s = state(v, v);
            assert_ne!(s.next_event(), Event::BlockBlock);
            assert!(matches!(
                step_block_collision(&s, &cfg),
                Err(MachineError::WrongPhase {
                    attempted: Event::BlockBlock,
                    ..
                })
            ));
        }
    }

    #[test]
    fn wall_bounce_flips_sign() {
        let s = step_wall_bounce(&state("-3/2", "-1/2")).unwrap();
        assert_eq!((s.v1(), s.v2()), (q("3/2"), q("-1/2")));
        let s = step_wall_bounce(&state("-1", "0")).unwrap();
        assert_eq!((s.v1(), s.v2()), (q("1"), q("0")));
        assert_eq!(s.next_event(), Event::BlockBlock);
    }

    #[test]
    fn wall_bounce_without_approach_is_rejected() {
        let err = step_wall_bounce(&state("0", "1")).unwrap_err();
        assert_eq!(
            err,
            MachineError::WrongPhase {
                attempted: Event::WallBounce,
                actual: Event::Terminated
            }
        );
    }

    #[test]
    fn small_counts() {
        for (ratio, expected) in [("1", 3), ("3", 5), ("1/3", 2), ("100", 31), ("10000", 314)] {
            let cfg = MachineConfig::from_ratio(q(ratio)).unwrap();
            let trace = run_machine(&cfg, TraceMode::CountOnly).unwrap();
            assert_eq!(trace.total_collisions, expected, "ratio {ratio}");
            assert!(trace.states.is_empty());
        }
    }

    #[test]
    fn full_trace_alternates() {
        let cfg = MachineConfig::from_ratio(q("100")).unwrap();
        let trace = run_machine(&cfg, TraceMode::FullTrace).unwrap();
        assert_eq!(trace.states.len() as u64, trace.total_collisions + 1);
        for (i, e) in trace.events().enumerate() {
            let expected = if i % 2 == 0 {
                Event::BlockBlock
            } else {
                Event::WallBounce
            };
            assert_eq!(e, expected, "event {i}");
        }
        assert_eq!(trace.final_state.next_event(), Event::Terminated);
    }

    #[test]
    fn event_limit_is_an_error() {
        let cfg = MachineConfig::from_ratio(q("100")).unwrap();
        let err = run_machine_with_limit(&cfg, TraceMode::CountOnly, 30).unwrap_err();
        assert_eq!(err, MachineError::EventLimit { limit: 30 });
        assert!(run_machine_with_limit(&cfg, TraceMode::CountOnly, 31).is_ok());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(MachineConfig::new(q("0"), q("1")).is_err());
        assert!(MachineConfig::new(q("1"), q("-2")).is_err());
        assert!(MachineConfig::with_velocities(q("1"), q("1"), q("0"), q("0")).is_err());
    }

    #[test]
    fn parse_rejects_floats() {
        assert_eq!(q("6/4"), BigRational::new(3.into(), 2.into()));
        assert_eq!(q(" -7 "), BigRational::from_integer((-7).into()));
        for bad in ["1.5", "1e3", "", "1/0", "a/2", "1/", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
        assert_eq!(format_rational(&q("10/4")), "5/2");
        assert_eq!(format_rational(&q("8/4")), "2");
    }

    #[test]
    fn velocities_f64_survive_huge_denominators() {
        let cfg = MachineConfig::from_ratio(q("1000000")).unwrap();
        let trace = run_machine(&cfg, TraceMode::CountOnly).unwrap();
        assert_eq!(trace.total_collisions, 3141);
        let (v1, v2) = trace.final_state.velocities_f64();
        let energy = v1 * v1 / 1e6 + v2 * v2;
        assert!((energy - 1.0).abs() < 1e-12, "{energy}");
    }
}
