//! Curvature of metrics whose coefficients depend on the first two coordinates.
//!
//! Coordinates are ordered `(x, y, s, t)` for four-dimensional metrics and
//! `(x, y)` for base metrics. Metric derivatives come from exact jets; the
//! only differentiated quantities are the metric components themselves.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::{Field, ScalarField2};
use crate::grid::Box2;
use crate::jet::Jet2;

pub type Mat<const N: usize> = [[f64; N]; N];
pub type Arr3<const N: usize> = [[[f64; N]; N]; N];
pub type Arr4<const N: usize> = [[[[f64; N]; N]; N]; N];

/// Number of coordinates the metric may depend on.
pub const BASE_DIM: usize = 2;

/// Anything that can produce all metric component jets at a base point.
pub trait MetricSource<const N: usize>: Send + Sync {
    fn components(&self, x: f64, y: f64) -> Result<[[Jet2; N]; N]>;
}

/// A metric given by independent component fields; only the upper triangle
/// is stored, so symmetry is structural.
pub struct ComponentMetric<const N: usize> {
    upper: Vec<Option<Field>>,
}

impl<const N: usize> ComponentMetric<N> {
    /// Unset components are identically zero.
    pub fn new() -> Self {
        ComponentMetric {
            upper: vec![None; N * (N + 1) / 2],
        }
    }

    fn slot(i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * N - i * (i + 1) / 2 + j
    }

    pub fn set(mut self, i: usize, j: usize, f: Field) -> Self {
        self.upper[Self::slot(i, j)] = Some(f);
        self
    }
}

impl<const N: usize> Default for ComponentMetric<N> {
    fn default() -> Self {
        Self::new()
    }
}

impl<const N: usize> MetricSource<N> for ComponentMetric<N> {
    fn components(&self, x: f64, y: f64) -> Result<[[Jet2; N]; N]> {
        let mut out = [[Jet2::ZERO; N]; N];
        for i in 0..N {
            for j in i..N {
                if let Some(f) = &self.upper[Self::slot(i, j)] {
                    let v = f.eval(x, y)?;
                    out[i][j] = v;
                    out[j][i] = v;
                }
            }
        }
        Ok(out)
    }
}

/// A Riemannian metric on a box of the base.
#[derive(Clone)]
pub struct MetricField<const N: usize> {
    source: Arc<dyn MetricSource<N>>,
    domain: Box2,
}

impl<const N: usize> MetricField<N> {
    pub fn new(source: Arc<dyn MetricSource<N>>, domain: Box2) -> Self {
        MetricField { source, domain }
    }

    pub fn domain(&self) -> Box2 {
        self.domain
    }

    pub fn with_domain(&self, domain: Box2) -> Self {
        MetricField {
            source: self.source.clone(),
            domain,
        }
    }

    /// Component jets, with the point checked against the validity domain.
    pub fn jets(&self, x: f64, y: f64) -> Result<[[Jet2; N]; N]> {
        if !self.domain.contains(x, y) {
            return Err(Error::OutsideDomain {
                x,
                y,
                domain: self.domain,
            });
        }
        self.source.components(x, y)
    }
}

/// Vector field `Vˣ∂ₓ + Vʸ∂ᵧ` tangent to the base.
#[derive(Clone)]
pub struct BaseVectorField {
    pub vx: Field,
    pub vy: Field,
}

impl BaseVectorField {
    pub fn zero() -> Self {
        BaseVectorField {
            vx: crate::field::constant(0.0),
            vy: crate::field::constant(0.0),
        }
    }

    pub fn new(vx: Field, vy: Field) -> Self {
        BaseVectorField { vx, vy }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<[Jet2; 2]> {
        Ok([self.vx.eval(x, y)?, self.vy.eval(x, y)?])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Rank2 {
    /// `(0,2)`: lower indices.
    Covariant,
    /// `(2,0)`: upper indices.
    Contravariant,
    /// `(1,1)`: first index up.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor2<const N: usize> {
    pub rank: Rank2,
    pub c: Mat<N>,
}

impl<const N: usize> Tensor2<N> {
    pub fn max_abs(&self) -> f64 {
        self.c.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..N {
            for j in 0..N {
                d = d.max((self.c[i][j] - self.c[j][i]).abs());
            }
        }
        d
    }

    /// Largest entrywise difference from `other`.
    pub fn max_abs_diff(&self, other: &Mat<N>) -> f64 {
        let mut d = 0.0f64;
        for i in 0..N {
            for j in 0..N {
                d = d.max((self.c[i][j] - other[i][j]).abs());
            }
        }
        d
    }

    /// `‖self − λI‖∞`, entrywise.
    pub fn distance_to_scalar(&self, lambda: f64) -> f64 {
        let mut d = 0.0f64;
        for i in 0..N {
            for j in 0..N {
                let target = if i == j { lambda } else { 0.0 };
                d = d.max((self.c[i][j] - target).abs());
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank4 {
    /// `R^a_{bcd}`.
    Riemann13,
    /// `R_{abcd}`, fully covariant.
    Covariant04,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor4<const N: usize> {
    pub rank: Rank4,
    pub c: Arr4<N>,
}

impl<const N: usize> Tensor4<N> {
    pub fn max_abs(&self) -> f64 {
        self.c.iter().flatten().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Everything the engine knows at one base point.
#[derive(Debug, Clone)]
pub struct Geometry<const N: usize> {
    pub point: (f64, f64),
    pub g: Mat<N>,
    /// `dg[c][i][j] = ∂_c g_ij` for base directions `c`.
    pub dg: [Mat<N>; BASE_DIM],
    /// `ddg[c][d][i][j] = ∂_c ∂_d g_ij`.
    pub ddg: [[Mat<N>; BASE_DIM]; BASE_DIM],
    pub ginv: Mat<N>,
    /// `Γ^a_{bc}`.
    pub gamma: Arr3<N>,
    /// `dgamma[e][a][b][c] = ∂_e Γ^a_{bc}`.
    pub dgamma: [Arr3<N>; BASE_DIM],
    /// `R^a_{bcd}`.
    pub riemann: Arr4<N>,
    pub ricci: Mat<N>,
    pub scalar: f64,
}

fn leading_minors<const N: usize>(g: &Mat<N>) -> Vec<f64> {
    (1..=N)
        .map(|k| DMatrix::from_fn(k, k, |i, j| g[i][j]).determinant())
        .collect()
}

fn invert<const N: usize>(g: &Mat<N>, p: (f64, f64)) -> Result<Mat<N>> {
    let m = DMatrix::from_fn(N, N, |i, j| g[i][j]);
    let inv = m.try_inverse().ok_or(Error::SingularMetric { x: p.0, y: p.1 })?;
    let mut out = [[0.0; N]; N];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = inv[(i, j)];
        }
    }
    if out.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::SingularMetric { x: p.0, y: p.1 });
    }
    Ok(out)
}

impl<const N: usize> Geometry<N> {
    /// Metric values, inverse, connection and curvature at `(x, y)`.
    pub fn at(metric: &MetricField<N>, x: f64, y: f64) -> Result<Self> {
        let jets = metric.jets(x, y)?;
        Self::from_jets(&jets, (x, y))
    }

    pub fn from_jets(jets: &[[Jet2; N]; N], point: (f64, f64)) -> Result<Self> {
        let (x, y) = point;
        let mut g = [[0.0; N]; N];
        let mut dg = [[[0.0; N]; N]; BASE_DIM];
        let mut ddg = [[[[0.0; N]; N]; BASE_DIM]; BASE_DIM];
        for i in 0..N {
            for j in 0..N {
                let c = &jets[i][j];
                g[i][j] = c.value;
                dg[0][i][j] = c.d10;
                dg[1][i][j] = c.d01;
                ddg[0][0][i][j] = c.d20;
                ddg[0][1][i][j] = c.d11;
                ddg[1][0][i][j] = c.d11;
                ddg[1][1][i][j] = c.d02;
            }
        }
        for (k, &m) in leading_minors(&g).iter().enumerate() {
            if !(m > 0.0) {
                return Err(Error::NotPositiveDefinite {
                    x,
                    y,
                    minor: k + 1,
                    value: m,
                });
            }
        }
        let ginv = invert(&g, point)?;

        // ∂_e g^{ad} = −g^{af} ∂_e g_{fh} g^{hd}
        let mut dginv = [[[0.0; N]; N]; BASE_DIM];
        for (e, out) in dginv.iter_mut().enumerate() {
            let t = matmul(&ginv, &dg[e]);
            let t = matmul(&t, &ginv);
            for a in 0..N {
                for d in 0..N {
                    out[a][d] = -t[a][d];
                }
            }
        }

        let d = |c: usize, i: usize, j: usize| if c < BASE_DIM { dg[c][i][j] } else { 0.0 };
        let dd = |e: usize, c: usize, i: usize, j: usize| {
            if c < BASE_DIM {
                ddg[e][c][i][j]
            } else {
                0.0
            }
        };

        // Christoffel symbols of the first kind and their base derivatives.
        let mut first = [[[0.0; N]; N]; N];
        let mut dfirst = [[[[0.0; N]; N]; N]; BASE_DIM];
        for k in 0..N {
            for b in 0..N {
                for c in b..N {
                    let v = 0.5 * (d(b, k, c) + d(c, k, b) - d(k, b, c));
                    first[k][b][c] = v;
                    first[k][c][b] = v;
                    for e in 0..BASE_DIM {
                        let w = 0.5 * (dd(e, b, k, c) + dd(e, c, k, b) - dd(e, k, b, c));
                        dfirst[e][k][b][c] = w;
                        dfirst[e][k][c][b] = w;
                    }
                }
            }
        }

        let mut gamma = [[[0.0; N]; N]; N];
        let mut dgamma = [[[[0.0; N]; N]; N]; BASE_DIM];
        for a in 0..N {
            for b in 0..N {
                for c in b..N {
                    let mut v = 0.0;
                    let mut dv = [0.0; BASE_DIM];
                    for k in 0..N {
                        v += ginv[a][k] * first[k][b][c];
                        for e in 0..BASE_DIM {
                            dv[e] += dginv[e][a][k] * first[k][b][c] + ginv[a][k] * dfirst[e][k][b][c];
                        }
                    }
                    gamma[a][b][c] = v;
                    gamma[a][c][b] = v;
                    for e in 0..BASE_DIM {
                        dgamma[e][a][b][c] = dv[e];
                        dgamma[e][a][c][b] = dv[e];
                    }
                }
            }
        }

        // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
        let dgam = |c: usize, a: usize, b: usize, k: usize| {
            if c < BASE_DIM {
                dgamma[c][a][b][k]
            } else {
                0.0
            }
        };
        let mut riemann = [[[[0.0; N]; N]; N]; N];
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for dd_ in (c + 1)..N {
                        let mut quad = 0.0;
                        for e in 0..N {
                            quad += gamma[a][c][e] * gamma[e][dd_][b] - gamma[a][dd_][e] * gamma[e][c][b];
                        }
                        let v = dgam(c, a, dd_, b) - dgam(dd_, a, c, b) + quad;
                        riemann[a][b][c][dd_] = v;
                        riemann[a][b][dd_][c] = -v;
                    }
                }
            }
        }

        let mut ricci = [[0.0; N]; N];
        for b in 0..N {
            for dd_ in 0..N {
                ricci[b][dd_] = (0..N).map(|a| riemann[a][b][a][dd_]).sum();
            }
        }
        let mut scalar = 0.0;
        for a in 0..N {
            for b in 0..N {
                scalar += ginv[a][b] * ricci[a][b];
            }
        }

        Ok(Geometry {
            point,
            g,
            dg,
            ddg,
            ginv,
            gamma,
            dgamma,
            riemann,
            ricci,
            scalar,
        })
    }

    /// `R_{abcd} = g_{ae} R^e_{bcd}`.
    pub fn riemann_lowered(&self) -> Arr4<N> {
        let mut out = [[[[0.0; N]; N]; N]; N];
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        out[a][b][c][d] = (0..N).map(|e| self.g[a][e] * self.riemann[e][b][c][d]).sum();
                    }
                }
            }
        }
        out
    }

    /// Weyl tensor `C_{abcd}` (all indices down).
    pub fn weyl(&self) -> Arr4<N> {
        let n = N as f64;
        let r = self.riemann_lowered();
        let (g, ric, s) = (&self.g, &self.ricci, self.scalar);
        let mut out = [[[[0.0; N]; N]; N]; N];
        if N < 3 {
            return out;
        }
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        let ricci_part = (g[a][c] * ric[b][d] - g[a][d] * ric[b][c] - g[b][c] * ric[a][d]
                            + g[b][d] * ric[a][c])
                            / (n - 2.0);
                        let scalar_part =
                            s * (g[a][c] * g[b][d] - g[a][d] * g[b][c]) / ((n - 1.0) * (n - 2.0));
                        out[a][b][c][d] = r[a][b][c][d] - ricci_part + scalar_part;
                    }
                }
            }
        }
        out
    }

    /// `(𝓛_V g)_ij = Vᵏ∂ₖg_ij + g_kj ∂ᵢVᵏ + g_ik ∂ⱼVᵏ` for a base field `V`.
    pub fn lie_derivative(&self, v: &[Jet2; 2]) -> Mat<N> {
        let vv = [v[0].value, v[1].value];
        // dv[i][k] = ∂_i V^k
        let dv = |i: usize, k: usize| -> f64 {
            match i {
                0 => v[k].d10,
                1 => v[k].d01,
                _ => 0.0,
            }
        };
        let mut out = [[0.0; N]; N];
        for i in 0..N {
            for j in 0..N {
                let mut s = 0.0;
                for k in 0..BASE_DIM {
                    s += vv[k] * self.dg[k][i][j] + self.g[k][j] * dv(i, k) + self.g[i][k] * dv(j, k);
                }
                out[i][j] = s;
            }
        }
        out
    }

    /// `Λ = g⁻¹(Ric + ½𝓛_V g)` as a mixed tensor.
    pub fn lambda(&self, v: &[Jet2; 2]) -> Mat<N> {
        let lie = self.lie_derivative(v);
        let mut m = self.ricci;
        for i in 0..N {
            for j in 0..N {
                m[i][j] += 0.5 * lie[i][j];
            }
        }
        matmul(&self.ginv, &m)
    }
}

fn matmul<const N: usize>(a: &Mat<N>, b: &Mat<N>) -> Mat<N> {
    let mut out = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            out[i][j] = (0..N).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn metric_at<const N: usize>(m: &MetricField<N>, p: (f64, f64)) -> Result<Tensor2<N>> {
    let geo = Geometry::at(m, p.0, p.1)?;
    Ok(Tensor2 {
        rank: Rank2::Covariant,
        c: geo.g,
    })
}

pub fn inverse_metric_at<const N: usize>(m: &MetricField<N>, p: (f64, f64)) -> Result<Tensor2<N>> {
    let geo = Geometry::at(m, p.0, p.1)?;
    Ok(Tensor2 {
        rank: Rank2::Contravariant,
        c: geo.ginv,
    })
}

/// `Γ^a_{bc}`, exactly symmetric in `b, c`.
pub fn christoffel<const N: usize>(m: &MetricField<N>, p: (f64, f64)) -> Result<Arr3<N>> {
    Ok(Geometry::at(m, p.0, p.1)?.gamma)
}

pub fn riemann<const N: usize>(m: &MetricField<N>, p: (f64, f64)) -> Result<Tensor4<N>> {
    Ok(Tensor4 {
        rank: Rank4::Riemann13,
        c: Geometry::at(m, p.0, p.1)?.riemann,
    })
}

pub fn ricci<const N: usize>(m: &MetricField<N>, p: (f64, f64)) -> Result<Tensor2<N>> {
    Ok(Tensor2 {
        rank: Rank2::Covariant,
        c: Geometry::at(m, p.0, p.1)?.ricci,
    })
}

pub fn scalar_curvature<const N: usize>(m: &MetricField<N>, p: (f64, f64)) -> Result<f64> {
    Ok(Geometry::at(m, p.0, p.1)?.scalar)
}

pub fn weyl<const N: usize>(m: &MetricField<N>, p: (f64, f64)) -> Result<Tensor4<N>> {
    Ok(Tensor4 {
        rank: Rank4::Covariant04,
        c: Geometry::at(m, p.0, p.1)?.weyl(),
    })
}

pub fn lie_derivative_metric<const N: usize>(
    m: &MetricField<N>,
    v: &BaseVectorField,
    p: (f64, f64),
) -> Result<Tensor2<N>> {
    let geo = Geometry::at(m, p.0, p.1)?;
    Ok(Tensor2 {
        rank: Rank2::Covariant,
        c: geo.lie_derivative(&v.eval(p.0, p.1)?),
    })
}

pub fn lambda_tensor<const N: usize>(
    m: &MetricField<N>,
    v: &BaseVectorField,
    p: (f64, f64),
) -> Result<Tensor2<N>> {
    let geo = Geometry::at(m, p.0, p.1)?;
    Ok(Tensor2 {
        rank: Rank2::Mixed,
        c: geo.lambda(&v.eval(p.0, p.1)?),
    })
}

/// Step of the difference stencil in [`contracted_bianchi_defect`].
pub const BIANCHI_STEP: f64 = 1e-3;

/// Worst component of `∇ⁱR_ij − ½∂_jR`, with the derivatives of the engine's
/// Ricci tensor and scalar taken by a sixth-order central stencil of step
/// `h`. The stencil reaches `3h` from `p` and must stay in the domain.
pub fn contracted_bianchi_defect<const N: usize>(m: &MetricField<N>, p: (f64, f64), h: f64) -> Result<f64> {
    let geo = Geometry::at(m, p.0, p.1)?;
    let mut d_ric = [[[0.0; N]; N]; BASE_DIM];
    let mut d_scalar = [0.0; BASE_DIM];
    for c in 0..BASE_DIM {
        let at = |k: f64| {
            let (dx, dy) = if c == 0 { (k * h, 0.0) } else { (0.0, k * h) };
            Geometry::at(m, p.0 + dx, p.1 + dy)
        };
        let side = [at(1.0)?, at(2.0)?, at(3.0)?, at(-1.0)?, at(-2.0)?, at(-3.0)?];
        let stencil = |f: &dyn Fn(&Geometry<N>) -> f64| {
            let d: Vec<f64> = (0..3).map(|k| f(&side[k]) - f(&side[k + 3])).collect();
            (45.0 * d[0] - 9.0 * d[1] + d[2]) / (60.0 * h)
        };
        for i in 0..N {
            for j in 0..N {
                d_ric[c][i][j] = stencil(&|g| g.ricci[i][j]);
            }
        }
        d_scalar[c] = stencil(&|g| g.scalar);
    }
    let partial = |k: usize, i: usize, j: usize| if k < BASE_DIM { d_ric[k][i][j] } else { 0.0 };
    let mut worst = 0.0f64;
    for j in 0..N {
        let mut div = 0.0;
        for i in 0..N {
            for k in 0..N {
                let mut cov = partial(k, i, j);
                for l in 0..N {
                    cov -= geo.gamma[l][k][i] * geo.ricci[l][j] + geo.gamma[l][k][j] * geo.ricci[i][l];
                }
                div += geo.ginv[i][k] * cov;
            }
        }
        let dr = if j < BASE_DIM { d_scalar[j] } else { 0.0 };
        worst = worst.max((div - 0.5 * dr).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{constant, from_jet_fn};

    fn flat4() -> MetricField<4> {
        let mut m = ComponentMetric::<4>::new();
        for i in 0..4 {
            m = m.set(i, i, constant(1.0));
        }
        MetricField::new(Arc::new(m), Box2::everywhere())
    }

    /// (dx² + dy² + ds² + dt²)/x²
    fn hyperbolic4() -> MetricField<4> {
        let c = from_jet_fn(|x, _| x.powi(-2));
        let mut m = ComponentMetric::<4>::new();
        for i in 0..4 {
            m = m.set(i, i, c.clone());
        }
        MetricField::new(Arc::new(m), Box2::new(0.1, 10.0, -10.0, 10.0).unwrap())
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let m = flat4();
        let geo = Geometry::at(&m, 0.3, -1.2).unwrap();
        assert!(geo.gamma.iter().flatten().flatten().all(|&v| v == 0.0));
        assert_eq!(riemann(&m, (0.3, -1.2)).unwrap().max_abs(), 0.0);
        assert_eq!(geo.scalar, 0.0);
        assert_eq!(weyl(&m, (0.0, 0.0)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn hyperbolic_christoffel() {
        let gam = christoffel(&hyperbolic4(), (1.0, 0.0)).unwrap();
        // Γˣ_ss = 1/x
        assert!((gam[0][2][2] - 1.0).abs() < 1e-14);
        // Γˣ_xx = -1/x
        assert!((gam[0][0][0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_space_form() {
        let m = hyperbolic4();
        for &(x, y) in &[(1.0, 0.0), (0.7, 2.0), (3.0, -1.0)] {
            let geo = Geometry::at(&m, x, y).unwrap();
            let r = geo.riemann_lowered();
            let g = geo.g;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            let expected = -(g[a][c] * g[b][d] - g[a][d] * g[b][c]);
                            assert!((r[a][b][c][d] - expected).abs() < 1e-9);
                        }
                    }
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    assert!((geo.ricci[i][j] + 3.0 * g[i][j]).abs() < 1e-9);
                }
            }
            assert!((geo.scalar + 12.0).abs() < 1e-8);
        }
    }

    #[test]
    fn outside_domain_and_indefinite() {
        let m = hyperbolic4();
        assert!(matches!(
            metric_at(&m, (-1.0, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
        let bad = ComponentMetric::<2>::new()
            .set(0, 0, constant(1.0))
            .set(1, 1, constant(-1.0));
        let bad = MetricField::new(Arc::new(bad), Box2::everywhere());
        assert!(matches!(
            metric_at(&bad, (0.0, 0.0)),
            Err(Error::NotPositiveDefinite { minor: 2, .. })
        ));
    }

    #[test]
    fn lie_derivative_of_dilation() {
        let v = BaseVectorField::new(from_jet_fn(|x, _| Ok(x)), constant(0.0));
        let l = lie_derivative_metric(&flat4(), &v, (0.4, 0.9)).unwrap();
        let mut expected = [[0.0; 4]; 4];
        expected[0][0] = 2.0;
        assert_eq!(l.c, expected);
        assert_eq!(lie_derivative_metric(&flat4(), &BaseVectorField::zero(), (0.4, 0.9)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn rotation_is_killing_for_flat_base() {
        let v = BaseVectorField::new(from_jet_fn(|_, y| Ok(-y)), from_jet_fn(|x, _| Ok(x)));
        let l = lie_derivative_metric(&flat4(), &v, (0.4, 0.9)).unwrap();
        assert!(l.max_abs() < 1e-12);
    }
}
