//! Closed-form angle dynamics and the certified collision count.
//!
//! In the weighted velocity plane `(√m2·v2, √m1·v1)` each wall bounce
//! followed by a block collision rotates the state by `2θ*`, where
//! `sin θ* = √(m1 / (m1 + m2))`. Starting from angle π, the blocks separate
//! once the angle reaches 2π, giving `⌈π/θ*⌉ - 1` events.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::interval::{self, Interval};
use crate::serde_rational;

pub const MIN_PRECISION_BITS: u32 = 64;
pub const DEFAULT_MAX_PRECISION_BITS: u32 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AngleError {
    #[error("masses must be positive")]
    NonPositiveMass,
    #[error("precision must be at least {MIN_PRECISION_BITS} bits, got {0}")]
    PrecisionTooLow(u32),
    #[error("count not certified within {max_bits} bits")]
    Uncertified { max_bits: u32 },
    #[error("collision count does not fit in 64 bits")]
    CountOverflow,
}

fn check_masses(m1: &BigRational, m2: &BigRational) -> Result<(), AngleError> {
    if m1.is_positive() && m2.is_positive() {
        Ok(())
    } else {
        Err(AngleError::NonPositiveMass)
    }
}

/// Extra fractional bits so that the returned enclosure of θ* is narrow
/// relative to θ* itself, which shrinks like `√(m1/m2)`.
fn guard_bits(m1: &BigRational, m2: &BigRational) -> u32 {
    let ratio = (m2 / m1).ceil().to_integer();
    40 + (ratio.bits() as u32).div_ceil(2)
}

fn theta_star_at_scale(m1: &BigRational, m2: &BigRational, bits: u32) -> Interval {
    if m1 <= m2 {
        let tangent = Interval::from_rational(&(m1 / m2), bits)
            .sqrt()
            .expect("positive ratio");
        interval::atan(&tangent)
    } else {
        let cotangent = Interval::from_rational(&(m2 / m1), bits)
            .sqrt()
            .expect("positive ratio");
        let half_pi = interval::pi(bits).div_int(&BigInt::from(2));
        half_pi.sub(&interval::atan(&cotangent))
    }
}

/// Encloses `θ* = arcsin √(m1/(m1+m2))`.
///
/// Computed as `arctan √(m1/m2)` (or its complement when `m1 > m2`) so the
/// series argument never exceeds 1. The enclosure's width is below
/// `2^(1-bits)·θ*`.
pub fn theta_star(m1: &BigRational, m2: &BigRational, bits: u32) -> Result<Interval, AngleError> {
    check_masses(m1, m2)?;
    if bits < MIN_PRECISION_BITS {
        return Err(AngleError::PrecisionTooLow(bits));
    }
    Ok(theta_star_at_scale(m1, m2, bits + guard_bits(m1, m2)))
}

/// `θ_t = 2tθ* + π`, with π taken at the same scale as `theta_star`.
pub fn angle_at(t: u64, theta_star: &Interval) -> Interval {
    let pi = interval::pi(theta_star.bits());
    theta_star.scale_by(&BigInt::from(t)).shl(1).add(&pi)
}

/// θ* together with the data it was derived from.
#[derive(Clone, Debug)]
pub struct AngleModel {
    theta_star: Interval,
    pi: Interval,
    mass_ratio: BigRational,
    precision_bits: u32,
}

impl AngleModel {
    pub fn new(
        m1: &BigRational,
        m2: &BigRational,
        precision_bits: u32,
    ) -> Result<Self, AngleError> {
        let theta_star = theta_star(m1, m2, precision_bits)?;
        let pi = interval::pi(theta_star.bits());
        Ok(Self {
            theta_star,
            pi,
            mass_ratio: m2 / m1,
            precision_bits,
        })
    }

    pub fn theta_star(&self) -> &Interval {
        &self.theta_star
    }

    pub fn pi(&self) -> &Interval {
        &self.pi
    }

    pub fn mass_ratio(&self) -> &BigRational {
        &self.mass_ratio
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn angle_at(&self, t: u64) -> Interval {
        self.theta_star
            .scale_by(&BigInt::from(t))
            .shl(1)
            .add(&self.pi)
    }

    /// Angles `θ_0 ..= θ_len-1`.
    pub fn angles(&self, len: u64) -> Vec<Interval> {
        (0..len).map(|t| self.angle_at(t)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertifiedCount {
    /// `None` when the count could not be certified.
    pub count: Option<u64>,
    pub certified: bool,
    /// Bits at which the count was settled (or the last bits tried); 0 when
    /// decided by the exact boundary rule or when nothing was tried.
    pub precision_used: u32,
    #[serde(with = "serde_rational")]
    pub mass_ratio: BigRational,
}

/// Mass ratios with `π/θ*` an exact integer, keyed by `m1/(m1+m2) = sin²θ*`.
///
/// `sin²θ* = 1/2, 1/4, 3/4` give `θ* = π/4, π/6, π/3`. The `sin θ* = 1`
/// case needs `m2 = 0` and cannot occur.
fn exact_boundary(m1: &BigRational, m2: &BigRational) -> Option<u64> {
    let sin2 = m1 / (m1 + m2);
    let quarter = |k: i64| BigRational::new(k.into(), 4.into());
    [(quarter(2), 4), (quarter(1), 6), (quarter(3), 3)]
        .into_iter()
        .find(|(s, _)| *s == sin2)
        .map(|(_, turns)| turns - 1)
}

pub fn collision_count_closed_form(
    m1: &BigRational,
    m2: &BigRational,
) -> Result<CertifiedCount, AngleError> {
    collision_count_with_ceiling(m1, m2, DEFAULT_MAX_PRECISION_BITS)
}

/// Certified `⌈π/θ*⌉ - 1`.
///
/// Precision starts at 64 bits and doubles until the enclosure of `π/θ*`
/// is narrower than 1/4 and free of integers. Past `max_bits` the result
/// is returned with `certified: false` and no count.
pub fn collision_count_with_ceiling(
    m1: &BigRational,
    m2: &BigRational,
    max_bits: u32,
) -> Result<CertifiedCount, AngleError> {
    check_masses(m1, m2)?;
    let mass_ratio = m2 / m1;
    if let Some(count) = exact_boundary(m1, m2) {
        return Ok(CertifiedCount {
            count: Some(count),
            certified: true,
            precision_used: 0,
            mass_ratio,
        });
    }
    let quarter = BigRational::new(BigInt::one(), 4.into());
    let mut bits = MIN_PRECISION_BITS;
    let mut tried = 0;
    while bits <= max_bits {
        tried = bits;
        let theta = theta_star(m1, m2, bits)?;
        let quotient = interval::pi(theta.bits()).div(&theta).expect("θ* > 0");
        if quotient.width() < quarter && !quotient.contains_integer() {
            let (floor, _) = quotient.floor_bounds();
            let count = floor.to_u64().ok_or(AngleError::CountOverflow)?;
            return Ok(CertifiedCount {
                count: Some(count),
                certified: true,
                precision_used: bits,
                mass_ratio,
            });
        }
        bits = match bits.checked_mul(2) {
            Some(b) => b,
            None => break,
        };
    }
    Ok(CertifiedCount {
        count: None,
        certified: false,
        precision_used: tried,
        mass_ratio,
    })
}

/// Collision count for `m2/m1 = 10^(2n)`, as a decimal string.
pub fn pi_digits(n: u32) -> Result<String, AngleError> {
    pi_digits_with_ceiling(n, DEFAULT_MAX_PRECISION_BITS)
}

pub fn pi_digits_with_ceiling(n: u32, max_bits: u32) -> Result<String, AngleError> {
    let m2 = BigRational::from_integer(BigInt::from(10).pow(2 * n));
    let result = collision_count_with_ceiling(&BigRational::one(), &m2, max_bits)?;
    result
        .count
        .map(|c| c.to_string())
        .ok_or(AngleError::Uncertified { max_bits })
}

/// `θ*` in double precision, `atan2(√m1, √m2)`.
pub fn theta_star_f64(m1: f64, m2: f64) -> f64 {
    m1.sqrt().atan2(m2.sqrt())
}

/// `θ*` in double precision from exact masses.
pub fn theta_star_f64_exact(m1: &BigRational, m2: &BigRational) -> f64 {
    let ratio = m1 / m2;
    if ratio.is_zero() {
        return 0.0;
    }
    ratio.to_f64().unwrap_or(f64::INFINITY).sqrt().atan()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn one() -> BigRational {
        BigRational::one()
    }

    #[test]
    fn theta_star_exact_angles() {
        let quarter = theta_star(&one(), &one(), 64).unwrap();
        assert!((quarter.mid_f64() - PI / 4.0).abs() < 1e-16);
        let quarter_pi = interval::pi(quarter.bits()).div_int(&4.into());
        assert!(quarter.overlaps(&quarter_pi));
        let sixth = theta_star(&one(), &q(3, 1), 64).unwrap();
        assert!(sixth.overlaps(&interval::pi(sixth.bits()).div_int(&6.into())));
        let third = theta_star(&q(3, 1), &one(), 64).unwrap();
        assert!(third.overlaps(&interval::pi(third.bits()).div_int(&3.into())));
    }

    #[test]
    fn theta_star_ratio_hundred() {
        // arcsin(√(1/101)) = 0.0996686524911620273784... (mpmath, 50 digits)
        let t = theta_star(&one(), &q(100, 1), 64).unwrap();
        assert!(t.lo_f64() >= 0.0996686 && t.hi_f64() <= 0.0996687);
        assert!((t.mid_f64() - 0.099_668_652_491_162_03).abs() < 1e-17);
    }

    #[test]
    fn theta_star_width_is_relative() {
        for (m1, m2) in [(1, 1), (1, 100), (1, 100_000_000), (7, 2)] {
            let bits = 80;
            let t = theta_star(&q(m1, 1), &q(m2, 1), bits).unwrap();
            let bound = t.lo() * BigRational::new(2.into(), BigInt::one() << bits);
            assert!(t.width() < bound, "{m1}/{m2}");
        }
    }

    #[test]
    fn precision_and_mass_preconditions() {
        assert_eq!(
            theta_star(&one(), &one(), 32),
            Err(AngleError::PrecisionTooLow(32))
        );
        assert_eq!(
            theta_star(&q(0, 1), &one(), 64),
            Err(AngleError::NonPositiveMass)
        );
        assert_eq!(
            collision_count_closed_form(&one(), &q(-1, 1)),
            Err(AngleError::NonPositiveMass)
        );
    }

    #[test]
    fn angle_at_examples() {
        let theta = theta_star(&one(), &q(3, 1), 64).unwrap();
        let pi = interval::pi(theta.bits());
        assert!(angle_at(0, &theta).overlaps(&pi));
        let two_pi = pi.shl(1);
        // θ_3 sits on 2π; θ_4 is past it.
        assert!(angle_at(3, &theta).overlaps(&two_pi));
        assert!(angle_at(4, &theta).lo() > two_pi.hi());
        let tenth = Interval::from_rational(&q(1, 10), 64);
        let a = angle_at(5, &tenth);
        assert!(a.overlaps(&interval::pi(64).add(&Interval::from_integer(1, 64))));
    }

    #[test]
    fn closed_form_counts() {
        let count = |m1: BigRational, m2: BigRational| {
            collision_count_closed_form(&m1, &m2)
                .unwrap()
                .count
                .unwrap()
        };
        assert_eq!(count(one(), one()), 3);
        assert_eq!(count(one(), q(3, 1)), 5);
        assert_eq!(count(q(3, 1), one()), 2);
        assert_eq!(count(one(), q(100, 1)), 31);
        assert_eq!(count(one(), q(1_000_000, 1)), 3141);
        assert_eq!(count(q(2, 1), q(200, 1)), 31);
    }

    #[test]
    fn boundary_cases_skip_intervals() {
        let c = collision_count_closed_form(&q(5, 1), &q(5, 1)).unwrap();
        assert_eq!(
            c,
            CertifiedCount {
                count: Some(3),
                certified: true,
                precision_used: 0,
                mass_ratio: one()
            }
        );
    }

    #[test]
    fn ceiling_below_start_is_uncertified() {
        let c = collision_count_with_ceiling(&one(), &q(100, 1), 32).unwrap();
        assert!(!c.certified);
        assert_eq!(c.count, None);
        assert_eq!(
            pi_digits_with_ceiling(1, 32),
            Err(AngleError::Uncertified { max_bits: 32 })
        );
    }

    #[test]
    fn digits() {
        assert_eq!(pi_digits(0).unwrap(), "3");
        assert_eq!(pi_digits(1).unwrap(), "31");
        assert_eq!(pi_digits(2).unwrap(), "314");
        assert_eq!(pi_digits(4).unwrap(), "31415");
        assert_eq!(pi_digits(8).unwrap(), "314159265");
    }

    #[test]
    fn model_angles() {
        let model = AngleModel::new(&one(), &q(100, 1), 64).unwrap();
        assert_eq!(model.mass_ratio(), &q(100, 1));
        let angles = model.angles(3);
        assert_eq!(angles.len(), 3);
        let step = angles[1].sub(&angles[0]);
        assert!((step.mid_f64() - 2.0 * 0.099_668_652_491_162_03).abs() < 1e-15);
        let s = model.theta_star().mid_f64().sin();
        assert!((s - (1.0f64 / 101.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn f64_theta() {
        assert!((theta_star_f64(1.0, 3.0) - PI / 6.0).abs() < 1e-15);
        assert!((theta_star_f64_exact(&one(), &q(3, 1)) - PI / 6.0).abs() < 1e-15);
    }
}
