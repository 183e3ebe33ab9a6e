//! Outward-rounded fixed-point interval arithmetic on big integers.
//!
//! An [`Interval`] at scale `bits` is the closed set `[lo, hi]·2^-bits`.
//! Every operation rounds its lower endpoint toward -∞ and its upper
//! endpoint toward +∞, so the true real value is always enclosed.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
}

fn ceil_shr(x: &BigInt, shift: u32) -> BigInt {
    -((-x) >> shift)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn ceil_sqrt(x: &BigInt) -> BigInt {
    let r = x.sqrt();
    if &r * &r == *x {
        r
    } else {
        r + 1
    }
}

impl Interval {
    /// Builds `[lo, hi]·2^-bits`. Panics if `lo > hi`.
    pub fn from_raw(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        assert!(lo <= hi, "empty interval");
        Self { lo, hi, bits }
    }

    pub fn zero(bits: u32) -> Self {
        Self::from_raw(BigInt::zero(), BigInt::zero(), bits)
    }

    pub fn from_integer(n: impl Into<BigInt>, bits: u32) -> Self {
        let v = n.into() << bits;
        Self::from_raw(v.clone(), v, bits)
    }

    /// Tightest enclosure of an exact rational at this scale.
    pub fn from_rational(r: &BigRational, bits: u32) -> Self {
        let scaled = r.numer() << bits;
        let lo = scaled.div_floor(r.denom());
        let hi = ceil_div(&scaled, r.denom());
        Self::from_raw(lo, hi, bits)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn lo_raw(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi_raw(&self) -> &BigInt {
        &self.hi
    }

    pub fn lo(&self) -> BigRational {
        BigRational::new(self.lo.clone(), BigInt::one() << self.bits)
    }

    pub fn hi(&self) -> BigRational {
        BigRational::new(self.hi.clone(), BigInt::one() << self.bits)
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(&self.hi - &self.lo, BigInt::one() << self.bits)
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo().to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi().to_f64().unwrap_or(f64::NAN)
    }

    pub fn mid_f64(&self) -> f64 {
        BigRational::new(&self.lo + &self.hi, BigInt::one() << (self.bits + 1))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo() <= x && x <= &self.hi()
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        match BigRational::from_float(x) {
            Some(x) => self.contains(&x),
            None => false,
        }
    }

    /// True if `other` lies entirely inside `self`.
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lo() <= other.lo() && other.hi() <= self.hi()
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }

    /// `(floor(lo), floor(hi))` of the real endpoints.
    pub fn floor_bounds(&self) -> (BigInt, BigInt) {
        (&self.lo >> self.bits, &self.hi >> self.bits)
    }

    /// True if some integer lies in the closed interval.
    pub fn contains_integer(&self) -> bool {
        let ceil_lo = ceil_shr(&self.lo, self.bits);
        ceil_lo <= (&self.hi >> self.bits)
    }

    /// Re-expresses the interval at another scale, rounding outward.
    pub fn rescale(&self, bits: u32) -> Self {
        if bits >= self.bits {
            let s = bits - self.bits;
            Self::from_raw(&self.lo << s, &self.hi << s, bits)
        } else {
            let s = self.bits - bits;
            Self::from_raw(&self.lo >> s, ceil_shr(&self.hi, s), bits)
        }
    }

    fn check_scale(&self, other: &Self) {
        assert_eq!(self.bits, other.bits, "interval scale mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_scale(other);
        Self::from_raw(&self.lo + &other.lo, &self.hi + &other.hi, self.bits)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_scale(other);
        Self::from_raw(&self.lo - &other.hi, &self.hi - &other.lo, self.bits)
    }

    pub fn neg(&self) -> Self {
        Self::from_raw(-&self.hi, -&self.lo, self.bits)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_scale(other);
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let min = products.iter().min().unwrap();
        let max = products.iter().max().unwrap();
        Self::from_raw(min >> self.bits, ceil_shr(max, self.bits), self.bits)
    }

    /// Multiplication by an exact integer.
    pub fn scale_by(&self, k: &BigInt) -> Self {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if a <= b {
            Self::from_raw(a, b, self.bits)
        } else {
            Self::from_raw(b, a, self.bits)
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn shl(&self, k: u32) -> Self {
        Self::from_raw(&self.lo << k, &self.hi << k, self.bits)
    }

    /// Division by a positive integer.
    pub fn div_int(&self, k: &BigInt) -> Self {
        assert!(k.is_positive(), "divisor must be positive");
        Self::from_raw(self.lo.div_floor(k), ceil_div(&self.hi, k), self.bits)
    }

    /// Division by an interval that excludes zero; `None` otherwise.
    pub fn div(&self, other: &Self) -> Option<Self> {
        self.check_scale(other);
        if !other.lo.is_positive() && !other.hi.is_negative() {
            return None;
        }
        let a = [&self.lo << self.bits, &self.hi << self.bits];
        let b = [&other.lo, &other.hi];
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for x in &a {
            for y in b {
                let f = x.div_floor(y);
                let c = ceil_div(x, y);
                lo = Some(match lo {
                    Some(l) if l <= f => l,
                    _ => f,
                });
                hi = Some(match hi {
                    Some(h) if h >= c => h,
                    _ => c,
                });
            }
        }
        Some(Self::from_raw(lo.unwrap(), hi.unwrap(), self.bits))
    }

    /// Square root of a non-negative interval; `None` if `lo < 0`.
    pub fn sqrt(&self) -> Option<Self> {
        if self.lo.is_negative() {
            return None;
        }
        let lo = (&self.lo << self.bits).sqrt();
        let hi = ceil_sqrt(&(&self.hi << self.bits));
        Some(Self::from_raw(lo, hi, self.bits))
    }

    /// The degenerate interval at the lower endpoint.
    fn lower_point(&self) -> Self {
        Self::from_raw(self.lo.clone(), self.lo.clone(), self.bits)
    }

    fn upper_point(&self) -> Self {
        Self::from_raw(self.hi.clone(), self.hi.clone(), self.bits)
    }

    /// Encloses `f(self)` for a non-decreasing `f` by evaluating it at the endpoints.
    fn map_monotone(&self, f: impl Fn(&Self) -> Self) -> Self {
        let lo = f(&self.lower_point()).lo;
        let hi = f(&self.upper_point()).hi;
        Self::from_raw(lo, hi, self.bits)
    }
}

/// Enclosure of π at scale `bits`, from Machin's formula.
pub fn pi(bits: u32) -> Interval {
    let work = bits + 16;
    let fifth = Interval::from_rational(&BigRational::new(1.into(), 5.into()), work);
    let inv239 = Interval::from_rational(&BigRational::new(1.into(), 239.into()), work);
    let a = fifth.map_monotone(atan_series);
    let b = inv239.map_monotone(atan_series);
    a.scale_by(&16.into())
        .sub(&b.scale_by(&4.into()))
        .rescale(bits)
}

/// Enclosure of `arctan(x)` for an interval inside `[0, 1]`.
///
/// The argument is first halved in angle `r` times with
/// `x -> x / (1 + sqrt(1 + x²))`, then the Taylor series is summed.
/// Both steps are monotone, so each endpoint is evaluated separately.
pub fn atan(x: &Interval) -> Interval {
    assert!(!x.lo.is_negative(), "atan argument must be non-negative");
    assert!(
        x.hi <= (BigInt::one() << x.bits),
        "atan argument must be at most 1"
    );
    let halvings = ((x.bits / 2).sqrt()).max(2);
    let work = x.bits + halvings + 24;
    let xw = x.rescale(work);
    let reduced = xw.map_monotone(|p| {
        let one = Interval::from_integer(1, work);
        let mut y = p.clone();
        for _ in 0..halvings {
            let root = one.add(&y.mul(&y)).sqrt().expect("1 + y² is positive");
            y = y.div(&one.add(&root)).expect("denominator exceeds 1");
        }
        y
    });
    reduced
        .map_monotone(atan_series)
        .shl(halvings)
        .rescale(x.bits)
}

/// Alternating Taylor series for `arctan` on a non-negative interval below 1.
///
/// The sum stops once the next power no longer registers at this scale and
/// the remaining tail, bounded by that power, is added as slack.
fn atan_series(x: &Interval) -> Interval {
    let x2 = x.mul(x);
    let mut power = x.clone();
    let mut sum = x.clone();
    let mut k: u64 = 1;
    loop {
        power = power.mul(&x2);
        if power.hi <= BigInt::one() {
            let slack = power.hi.clone();
            return Interval::from_raw(&sum.lo - &slack, &sum.hi + &slack, sum.bits);
        }
        let term = power.div_int(&BigInt::from(2 * k + 1));
        sum = if k % 2 == 1 {
            sum.sub(&term)
        } else {
            sum.add(&term)
        };
        k += 1;
    }
}
