//! Grover search: a dense state-vector simulator and the two-dimensional
//! rotation picture it reduces to.

use nalgebra::{Matrix2, Vector2};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

/// Dense state vectors above this size are refused.
pub const MAX_STATE_QUBITS: u32 = 26;

/// Instances (without a state vector) are limited to indices that fit in `u64`.
pub const MAX_INSTANCE_QUBITS: u32 = 63;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroverError {
    #[error("mass ratio m2/m1 = {0} is below 1")]
    RatioBelowOne(BigRational),
    #[error("masses must be positive")]
    NonPositiveMass,
    #[error("qubit count must be positive")]
    NoQubits,
    #[error("{n} qubits exceeds the limit of {max}")]
    TooManyQubits { n: u32, max: u32 },
    #[error("marked index {k} out of range for {size} states")]
    IndexOutOfRange { k: u64, size: u64 },
    #[error("amplitude count {0} is not a positive power of two")]
    BadLength(usize),
}

/// A search problem over `N = 2^n` items with one marked index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroverInstance {
    n: u32,
    #[serde(rename = "N")]
    size: u64,
    k: u64,
    theta: f64,
    #[serde(skip)]
    mass_ratio: Option<BigRational>,
}

impl GroverInstance {
    pub fn new(n: u32, k: u64) -> Result<Self, GroverError> {
        if n == 0 {
            return Err(GroverError::NoQubits);
        }
        if n > MAX_INSTANCE_QUBITS {
            return Err(GroverError::TooManyQubits {
                n,
                max: MAX_INSTANCE_QUBITS,
            });
        }
        let size = 1u64 << n;
        if k >= size {
            return Err(GroverError::IndexOutOfRange { k, size });
        }
        let theta = (1.0 / size as f64).sqrt().asin();
        Ok(Self {
            n,
            size,
            k,
            theta,
            mass_ratio: None,
        })
    }

    pub fn with_marked(self, k: u64) -> Result<Self, GroverError> {
        let mass_ratio = self.mass_ratio.clone();
        let mut inst = Self::new(self.n, k)?;
        inst.mass_ratio = mass_ratio;
        Ok(inst)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `N = 2^n`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `arcsin √(1/N)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The exact `m2/m1` this instance was padded from, if any.
    pub fn mass_ratio(&self) -> Option<&BigRational> {
        self.mass_ratio.as_ref()
    }

    /// `⌊π/(4θ)⌋`, the iteration count nearest the first probability peak.
    pub fn optimal_iterations(&self) -> u64 {
        (std::f64::consts::FRAC_PI_4 / self.theta).floor() as u64
    }

    pub fn uniform_state(&self) -> Result<StateVector, GroverError> {
        StateVector::uniform(self.n)
    }
}

/// Qubits needed for a machine with this mass ratio: `⌈log₂(1 + m2/m1)⌉`.
///
/// Evaluated exactly as the least `n` with `2^n·m1 ≥ m1 + m2`.
pub fn instance_from_ratio(
    m1: &BigRational,
    m2: &BigRational,
) -> Result<GroverInstance, GroverError> {
    if !m1.is_positive() || !m2.is_positive() {
        return Err(GroverError::NonPositiveMass);
    }
    let ratio = m2 / m1;
    if ratio < BigRational::one() {
        return Err(GroverError::RatioBelowOne(ratio));
    }
    let target = BigRational::one() + &ratio;
    let mut n = 0u32;
    let mut power = BigInt::one();
    while BigRational::from_integer(power.clone()) < target {
        power <<= 1;
        n += 1;
    }
    let mut inst = GroverInstance::new(n, 0)?;
    inst.mass_ratio = Some(ratio);
    Ok(inst)
}

/// `2^n` complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn uniform(n: u32) -> Result<Self, GroverError> {
        let size = Self::checked_size(n)?;
        let a = Complex64::new(1.0 / (size as f64).sqrt(), 0.0);
        Ok(Self {
            amplitudes: vec![a; size],
        })
    }

    pub fn basis(n: u32, k: u64) -> Result<Self, GroverError> {
        let size = Self::checked_size(n)?;
        if k >= size as u64 {
            return Err(GroverError::IndexOutOfRange {
                k,
                size: size as u64,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); size];
        amplitudes[k as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, GroverError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(GroverError::BadLength(len));
        }
        Ok(Self { amplitudes })
    }

    fn checked_size(n: u32) -> Result<usize, GroverError> {
        if n == 0 {
            return Err(GroverError::NoQubits);
        }
        if n > MAX_STATE_QUBITS {
            return Err(GroverError::TooManyQubits {
                n,
                max: MAX_STATE_QUBITS,
            });
        }
        Ok(1usize << n)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn num_qubits(&self) -> u32 {
        self.amplitudes.len().trailing_zeros()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn index(&self, k: u64) -> Result<usize, GroverError> {
        let size = self.amplitudes.len() as u64;
        if k >= size {
            Err(GroverError::IndexOutOfRange { k, size })
        } else {
            Ok(k as usize)
        }
    }

    pub fn probability(&self, k: u64) -> Result<f64, GroverError> {
        Ok(self.amplitudes[self.index(k)?].norm_sqr())
    }

    /// `|k⟩ → -|k⟩`.
    pub fn apply_oracle(&mut self, k: u64) -> Result<(), GroverError> {
        let i = self.index(k)?;
        self.amplitudes[i] = -self.amplitudes[i];
        Ok(())
    }

    /// Reflection about the uniform superposition, `2|u⟩⟨u| - I`.
    ///
    /// The uniform state is fixed, not negated.
    pub fn apply_phase_shift_about_start(&mut self) {
        let mean = self.amplitudes.iter().sum::<Complex64>() / self.amplitudes.len() as f64;
        let twice = mean * 2.0;
        for a in &mut self.amplitudes {
            *a = twice - *a;
        }
    }

    /// `t` rounds of oracle followed by the phase shift.
    pub fn grover_iterate(&mut self, k: u64, t: u64) -> Result<(), GroverError> {
        self.index(k)?;
        for _ in 0..t {
            self.apply_oracle(k)?;
            self.apply_phase_shift_about_start();
        }
        Ok(())
    }

    /// Norm of the part of the state outside `span{|k⟩, uniform over the rest}`.
    pub fn off_subspace_norm(&self, k: u64) -> Result<f64, GroverError> {
        let i = self.index(k)?;
        let rest = self.amplitudes.len() - 1;
        let mean = (self.amplitudes.iter().sum::<Complex64>() - self.amplitudes[i]) / rest as f64;
        let dev: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, a)| (a - mean).norm_sqr())
            .sum();
        Ok(dev.sqrt())
    }
}

/// A vector in the weighted velocity plane, `(√m2·v2, √m1·v1)`; in search
/// terms, the (unmarked, marked) components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoDimState(pub Vector2<f64>);

impl TwoDimState {
    pub fn new(x: f64, y: f64) -> Self {
        Self(Vector2::new(x, y))
    }

    pub fn from_angle(angle: f64, radius: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    /// Polar angle in `(-π, π]`.
    pub fn angle(&self) -> f64 {
        self.0.y.atan2(self.0.x)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

fn reflect_vertical() -> Matrix2<f64> {
    Matrix2::new(1.0, 0.0, 0.0, -1.0)
}

/// Basis change `U = [[cos θ, sin θ], [-sin θ, cos θ]]`.
pub fn basis_rotation(theta_star: f64) -> Matrix2<f64> {
    let (s, c) = theta_star.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// `G = Uᵀ Z U Z`: the wall reflection followed by the block-collision
/// reflection. Equal to a counter-clockwise rotation by `2θ*`.
pub fn g_matrix(theta_star: f64) -> Matrix2<f64> {
    let u = basis_rotation(theta_star);
    let z = reflect_vertical();
    u.transpose() * z * u * z
}

/// Applies `G` to `initial` `t` times.
pub fn evolve_two_dim(initial: TwoDimState, theta_star: f64, t: u64) -> TwoDimState {
    let g = g_matrix(theta_star);
    let mut v = initial.0;
    for _ in 0..t {
        v = g * v;
    }
    TwoDimState(v)
}

/// `sin²((2t+1)θ*)`.
pub fn success_probability_closed_form(t: u64, theta_star: f64) -> f64 {
    ((2 * t + 1) as f64 * theta_star).sin().powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityRow {
    pub t: u64,
    #[serde(rename = "P_statevector")]
    pub p_statevector: f64,
    #[serde(rename = "P_closed_form")]
    pub p_closed_form: f64,
    pub theta_t: f64,
}

/// Marked-state probability after `0..=steps` iterations from uniform,
/// alongside the closed form.
pub fn probability_trace(
    instance: &GroverInstance,
    steps: u64,
) -> Result<Vec<ProbabilityRow>, GroverError> {
    let mut state = instance.uniform_state()?;
    let k = instance.k();
    let theta = instance.theta();
    let mut rows = Vec::with_capacity(steps as usize + 1);
    for t in 0..=steps {
        if t > 0 {
            state.grover_iterate(k, 1)?;
        }
        rows.push(ProbabilityRow {
            t,
            p_statevector: state.probability(k)?,
            p_closed_form: success_probability_closed_form(t, theta),
            theta_t: (2 * t + 1) as f64 * theta,
        });
    }
    Ok(rows)
}
