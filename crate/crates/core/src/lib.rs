//! Two blocks, a wall, and Grover's algorithm.
//!
//! The number of elastic collisions between a light block, a heavy block
//! and a wall spells out digits of π when the mass ratio is `100^n`. In the
//! mass-weighted velocity plane every wall bounce plus block collision is a
//! rotation by `2θ*`, the same rotation a Grover iteration performs on the
//! marked/unmarked plane. This crate simulates both and checks that they
//! agree.
//!
//! * [`machine`]: exact rational event simulation, the ground-truth count.
//! * [`angle`]: θ* and the certified closed-form count via [`interval`].
//! * [`grover`]: state-vector and 2-D rotation models of Grover search.
//! * [`equivalence`]: angle-by-angle comparison of the two.
//! * [`export`]: CSV/JSON record layouts.

pub mod angle;
pub mod equivalence;
pub mod export;
pub mod grover;
pub mod interval;
pub mod machine;

pub use angle::{
    angle_at, collision_count_closed_form, collision_count_with_ceiling, pi_digits, theta_star,
    AngleError, AngleModel, CertifiedCount,
};
pub use equivalence::{
    compare, compare_with_limits, machine_angle_trace, CompareLimits, ComparisonReport,
};
pub use grover::{
    evolve_two_dim, g_matrix, instance_from_ratio, success_probability_closed_form, GroverError,
    GroverInstance, StateVector, TwoDimState,
};
pub use interval::Interval;
pub use machine::{
    parse_rational, run_machine, run_machine_with_limit, step_block_collision, step_wall_bounce,
    CollisionTrace, Event, MachineConfig, MachineError, MachineState, TraceMode,
};

/// Exact rationals as `"num/den"` (or `"num"`) strings in serialized output.
pub(crate) mod serde_rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::machine::{format_rational, parse_rational};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    #[allow(dead_code)]
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
