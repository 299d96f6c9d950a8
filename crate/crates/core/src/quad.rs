//! Composite Simpson quadrature and tabulated antiderivatives.

use crate::error::{Error, Result};

/// `∫ₐᵇ f` by composite Simpson with panels no wider than `max_step`.
/// Works for `b < a` (negative orientation) and returns 0 for `a == b`.
pub fn simpson<F>(f: F, a: f64, b: f64, max_step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let pairs = ((b - a).abs() / (2.0 * max_step)).ceil().max(1.0) as usize;
    let n = 2 * pairs;
    let h = (b - a) / n as f64;
    let mut sum = f(a)? + f(b)?;
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h)?;
    }
    Ok(sum * h / 3.0)
}

/// An antiderivative `F` with `F(t0) = 0`, tabulated on a uniform grid
/// together with its derivative, and interpolated by cubic Hermite.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    t0: f64,
    step: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl Antiderivative {
    /// Tabulates `∫_{t0}^{t} f` on `[t0, t1]` using `2n + 1` samples.
    pub fn tabulate<F>(f: F, t0: f64, t1: f64, n: usize) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let m = 2 * n.max(1);
        let step = (t1 - t0) / m as f64;
        let derivs = (0..=m)
            .map(|i| f(t0 + i as f64 * step))
            .collect::<Result<Vec<_>>>()?;
        Self::from_samples(t0, step, derivs)
    }

    /// Builds the table from integrand samples at `t0 + i·step`; the sample
    /// count must be odd and at least 3.
    pub fn from_samples(t0: f64, step: f64, derivs: Vec<f64>) -> Result<Self> {
        let m = derivs.len();
        if m < 3 || m % 2 == 0 || step == 0.0 {
            return Err(Error::Parameter(format!(
                "antiderivative table needs an odd sample count >= 3, got {m}"
            )));
        }
        let f = &derivs;
        let mut values = vec![0.0; m];
        let mut k = 0;
        while k + 2 < m {
            let base = values[k];
            // Simpson over the pair, and the quadratic-exact half step.
            values[k + 1] = base + step / 12.0 * (5.0 * f[k] + 8.0 * f[k + 1] - f[k + 2]);
            values[k + 2] = base + step / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
            k += 2;
        }
        Ok(Antiderivative {
            t0,
            step,
            values,
            derivs,
        })
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let last = self.values.len() - 1;
        let s = (t - self.t0) / self.step;
        let tol = 1e-9;
        if !(s >= -tol && s <= last as f64 + tol) {
            return Err(Error::Parameter(format!(
                "antiderivative evaluated outside its table at {t}"
            )));
        }
        let i = (s.floor().max(0.0) as usize).min(last - 1);
        Ok((i, s - i as f64))
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        let (i, u) = self.locate(t)?;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.derivs[i] * self.step, self.derivs[i + 1] * self.step);
        let u2 = u * u;
        let u3 = u2 * u;
        Ok((2.0 * u3 - 3.0 * u2 + 1.0) * p0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * p1
            + (u3 - u2) * m1)
    }

    /// The tabulated integrand, interpolated by the derivative of the
    /// Hermite cubic.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        let (i, u) = self.locate(t)?;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.derivs[i] * self.step, self.derivs[i + 1] * self.step);
        let u2 = u * u;
        let d = (6.0 * u2 - 6.0 * u) * p0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * p1
            + (3.0 * u2 - 2.0 * u) * m1;
        Ok(d / self.step)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.t0 + i as f64 * self.step)
    }
}
