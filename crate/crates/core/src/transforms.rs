//! Clarke transformation between phase quantities and the stationary αβ frame.
//!
//! The transform is amplitude invariant (scaled by 2/3): a balanced set of
//! peak amplitude `A` maps onto an αβ vector of length `A`. The β axis is
//! oriented so that the balanced set `a = A sin(ωt)`, `b` and `c` lagging by
//! 120° and 240°, maps onto `(A sin(ωt), -A cos(ωt))`. Instantaneous power
//! computed from these components carries an explicit factor of 3/2.
//!
//! The scaling is not stated alongside the line equations this crate
//! implements; it is inferred from the 3/2 factor in the power expression.
//! The zero-sequence component is discarded.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Instantaneous per-phase values (V or A).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThreePhaseSample {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ThreePhaseSample {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite()
    }

    pub fn sum(&self) -> f64 {
        self.a + self.b + self.c
    }
}

/// A sample in the stationary αβ frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AlphaBetaPair {
    pub alpha: f64,
    pub beta: f64,
}

impl AlphaBetaPair {
    pub const ZERO: Self = Self {
        alpha: 0.0,
        beta: 0.0,
    };

    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite()
    }

    pub fn magnitude(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.alpha * other.alpha + self.beta * other.beta
    }

    /// Rotates the vector by `angle` radians (counter-clockwise).
    ///
    /// A positive-sequence signal at ω evolves as `x(t) = x(0).rotate(ω t)`.
    pub fn rotate(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            alpha: self.alpha * c - self.beta * s,
            beta: self.alpha * s + self.beta * c,
        }
    }

    /// 90° rotation, `(α, β) -> (-β, α)`. For a positive-sequence signal at
    /// ω the time derivative is `ω · x.quadrature()`.
    pub fn quadrature(&self) -> Self {
        Self {
            alpha: -self.beta,
            beta: self.alpha,
        }
    }

    /// `α + jβ`. For positive-sequence signals this is also the phasor of
    /// the α channel (and of phase a).
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.alpha, self.beta)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self {
            alpha: z.re,
            beta: z.im,
        }
    }
}

impl Add for AlphaBetaPair {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.alpha + rhs.alpha, self.beta + rhs.beta)
    }
}

impl Sub for AlphaBetaPair {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.alpha - rhs.alpha, self.beta - rhs.beta)
    }
}

impl Neg for AlphaBetaPair {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.alpha, -self.beta)
    }
}

impl Mul<f64> for AlphaBetaPair {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.alpha * k, self.beta * k)
    }
}

pub fn clarke(x: ThreePhaseSample) -> AlphaBetaPair {
    AlphaBetaPair {
        alpha: (2.0 / 3.0) * (x.a - 0.5 * x.b - 0.5 * x.c),
        beta: (x.b - x.c) / SQRT_3,
    }
}

/// Returns the zero-sum phase triple with the given αβ components.
pub fn inverse_clarke(x: AlphaBetaPair) -> ThreePhaseSample {
    let half_alpha = -0.5 * x.alpha;
    let k = 0.5 * SQRT_3 * x.beta;
    ThreePhaseSample {
        a: x.alpha,
        b: half_alpha + k,
        c: half_alpha - k,
    }
}

/// αβ sample of a balanced positive-sequence set with peak `amplitude` at
/// electrical angle `phase`: `(A sin φ, -A cos φ)`.
pub fn balanced_phasor(amplitude: f64, phase: f64) -> AlphaBetaPair {
    let (s, c) = phase.sin_cos();
    AlphaBetaPair {
        alpha: amplitude * s,
        beta: -amplitude * c,
    }
}
