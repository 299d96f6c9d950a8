//! Univariate profiles `A(x)`, `B(y)`, `f(z)` composed with jets.

use std::sync::Arc;

use crate::jet::{Func, Jet2, JetError};

/// A smooth function of one variable, applied to a jet argument.
pub trait Profile1: Send + Sync {
    fn eval_jet(&self, t: &Jet2) -> Result<Jet2, JetError>;

    /// `[p, p', p'', p''']` at `t`.
    fn derivatives(&self, t: f64) -> Result<[f64; 4], JetError> {
        let j = self.eval_jet(&Jet2::var_x(t))?;
        Ok([j.value, j.d10, j.d20, j.d30])
    }

    fn value(&self, t: f64) -> Result<f64, JetError> {
        Ok(self.eval_jet(&Jet2::constant(t))?.value)
    }

    /// True when the profile is constant everywhere.
    fn is_constant(&self) -> bool {
        false
    }
}

impl<P: Profile1 + ?Sized> Profile1 for Arc<P> {
    fn eval_jet(&self, t: &Jet2) -> Result<Jet2, JetError> {
        (**self).eval_jet(t)
    }
    fn is_constant(&self) -> bool {
        (**self).is_constant()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantProfile(pub f64);

impl Profile1 for ConstantProfile {
    fn eval_jet(&self, _t: &Jet2) -> Result<Jet2, JetError> {
        Ok(Jet2::constant(self.0))
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// `c₀ + c₁t + c₂t² + …`, coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval_f64(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn degree(&self) -> usize {
        self.0
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }
}

impl Profile1 for Polynomial {
    fn eval_jet(&self, t: &Jet2) -> Result<Jet2, JetError> {
        // Horner in jet arithmetic.
        let mut acc = Jet2::ZERO;
        for &c in self.0.iter().rev() {
            acc = acc * *t + c;
        }
        Ok(acc)
    }
    fn is_constant(&self) -> bool {
        self.0.iter().skip(1).all(|&c| c == 0.0)
    }
}

/// `scale·inner(σt + τ)`: the translate-and-rescale freedom of a profile.
#[derive(Clone)]
pub struct Affine {
    pub inner: Arc<dyn Profile1>,
    pub sigma: f64,
    pub tau: f64,
    pub scale: f64,
}

impl Profile1 for Affine {
    fn eval_jet(&self, t: &Jet2) -> Result<Jet2, JetError> {
        let arg = t.scale(self.sigma) + self.tau;
        Ok(self.inner.eval_jet(&arg)?.scale(self.scale))
    }
    fn is_constant(&self) -> bool {
        self.inner.is_constant() || self.sigma == 0.0 || self.scale == 0.0
    }
}

/// A single library function as a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuncProfile(pub Func);

impl Profile1 for FuncProfile {
    fn eval_jet(&self, t: &Jet2) -> Result<Jet2, JetError> {
        t.apply(self.0)
    }
}

/// `F(t) = c t² + k t^e` with `e = 2α²/(2α − 1) + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyProfile {
    pub alpha: f64,
    pub c: f64,
    pub k: f64,
}

impl SteadyProfile {
    pub fn exponent(alpha: f64) -> f64 {
        2.0 * alpha * alpha / (2.0 * alpha - 1.0) + 1.0
    }
}

impl Profile1 for SteadyProfile {
    fn eval_jet(&self, t: &Jet2) -> Result<Jet2, JetError> {
        let quad = t.powi(2)?.scale(self.c);
        if self.k == 0.0 {
            return Ok(quad);
        }
        Ok(quad + t.powf(Self::exponent(self.alpha))?.scale(self.k))
    }
    fn is_constant(&self) -> bool {
        self.c == 0.0 && self.k == 0.0
    }
}
