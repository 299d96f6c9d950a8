//! Reduced soliton systems, auxiliary potentials and the off-diagonal
//! obstruction.
//!
//! With the auxiliary functions `Sˣ = 2qqₓ + Vˣ/A`, `Sʸ = 2qq_y + Vʸ/B` the
//! soliton equation `Ric + ½𝓛_V g = λg` of a toric metric reduces to
//!
//! ```text
//! ∂_y Sˣ + ∂ₓ Sʸ = 4qₓq_y,   ∂ₓSˣ = 2qₓ²,   ∂_ySʸ = 2q_y²,
//! A'' − Sˣ A'/q² = B'' − Sʸ B'/q²   (both sides equal w),
//! ```
//!
//! plus one scalar equation fixing `λ`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Axis, Field, ScalarField2};
use crate::grid::{max_mean, Box2, Grid};
use crate::jet::Jet2;
use crate::quad::{simpson, Antiderivative};
use crate::tensor::{BaseVectorField, Geometry, MetricField};
use crate::zoo::{SpecJets, SurfaceKind, ToricMetricSpec};

/// The pair `(Sˣ, Sʸ)` as fields on the base.
#[derive(Clone)]
pub struct AuxPotentials {
    pub sx: Field,
    pub sy: Field,
}

impl AuxPotentials {
    pub fn eval(&self, x: f64, y: f64) -> Result<[Jet2; 2]> {
        Ok([self.sx.eval(x, y)?, self.sy.eval(x, y)?])
    }

    pub fn zero() -> Self {
        AuxPotentials {
            sx: crate::field::constant(0.0),
            sy: crate::field::constant(0.0),
        }
    }
}

fn nonzero_profiles(j: &SpecJets, x: f64, y: f64) -> Result<()> {
    for (what, v) in [("A", j.a.value), ("B", j.b.value)] {
        if v == 0.0 {
            return Err(Error::NonPositive { what, x, y, value: v });
        }
    }
    Ok(())
}

/// `Sˣ = 2qqₓ + Vˣ/A`, `Sʸ = 2qq_y + Vʸ/B` as jets; entries of order 3 are
/// not available and read zero.
pub fn aux_from_v(spec: &ToricMetricSpec, v: &[Jet2; 2], p: (f64, f64)) -> Result<[Jet2; 2]> {
    let (x, y) = p;
    let j = spec.jets(x, y)?;
    nonzero_profiles(&j, x, y)?;
    let sx = (j.q * j.q.shift_x()).scale(2.0) + v[0].checked_div(&j.a).map_err(Error::domain(x, y))?;
    let sy = (j.q * j.q.shift_y()).scale(2.0) + v[1].checked_div(&j.b).map_err(Error::domain(x, y))?;
    Ok([sx, sy])
}

/// Inverse of [`aux_from_v`]: `Vˣ = A(Sˣ − 2qqₓ)`, `Vʸ = B(Sʸ − 2qq_y)`.
pub fn v_from_aux(spec: &ToricMetricSpec, s: &[Jet2; 2], p: (f64, f64)) -> Result<[Jet2; 2]> {
    let (x, y) = p;
    let j = spec.jets(x, y)?;
    nonzero_profiles(&j, x, y)?;
    let vx = j.a * (s[0] - (j.q * j.q.shift_x()).scale(2.0));
    let vy = j.b * (s[1] - (j.q * j.q.shift_y()).scale(2.0));
    Ok([vx, vy])
}

/// [`aux_from_v`] as a pair of fields.
pub fn aux_field_from_v(spec: &ToricMetricSpec, v: &BaseVectorField) -> AuxPotentials {
    let make = |k: usize| -> Field {
        let (spec, v) = (spec.clone(), v.clone());
        Arc::new(AuxComponent {
            f: Box::new(move |x, y| Ok(aux_from_v(&spec, &v.eval(x, y)?, (x, y))?[k])),
        })
    };
    AuxPotentials { sx: make(0), sy: make(1) }
}

/// [`v_from_aux`] as a base vector field.
pub fn v_field_from_aux(spec: &ToricMetricSpec, s: &AuxPotentials) -> BaseVectorField {
    let make = |k: usize| -> Field {
        let (spec, s) = (spec.clone(), s.clone());
        Arc::new(AuxComponent {
            f: Box::new(move |x, y| Ok(v_from_aux(&spec, &s.eval(x, y)?, (x, y))?[k])),
        })
    };
    BaseVectorField::new(make(0), make(1))
}

type PointFn = Box<dyn Fn(f64, f64) -> Result<Jet2> + Send + Sync>;

struct AuxComponent {
    f: PointFn,
}

impl ScalarField2 for AuxComponent {
    fn eval(&self, x: f64, y: f64) -> Result<Jet2> {
        (self.f)(x, y)
    }
}

/// How the scalar `λ` equation is read.
///
/// `N0` takes the displayed equations literally; `N1` multiplies them
/// through by `q`. Only `N1` reproduces `Λ = λI` from the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    N0,
    N1,
}

impl Normalization {
    pub const ALL: [Normalization; 2] = [Normalization::N0, Normalization::N1];

    pub fn name(self) -> &'static str {
        match self {
            Normalization::N0 => "n0",
            Normalization::N1 => "n1",
        }
    }
}

/// Residuals of the reduced system at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedResiduals {
    /// `∂_y Sˣ + ∂ₓ Sʸ − 4qₓq_y`
    pub r_mixed: f64,
    /// `∂ₓSˣ − 2qₓ²`
    pub r_xx: f64,
    /// `∂_ySʸ − 2q_y²`
    pub r_yy: f64,
    /// Gap between the two expressions for `w`.
    pub r_w: f64,
    /// `λ` minus the value the `λ` equation predicts.
    pub r_lambda: f64,
    pub lambda_used: f64,
    pub lambda_predicted: f64,
}

impl ReducedResiduals {
    pub fn max_abs(&self) -> f64 {
        [self.r_mixed, self.r_xx, self.r_yy, self.r_w, self.r_lambda]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn slots(&self) -> [(&'static str, f64); 5] {
        [
            ("r_mixed", self.r_mixed),
            ("r_xx", self.r_xx),
            ("r_yy", self.r_yy),
            ("r_w", self.r_w),
            ("r_lambda", self.r_lambda),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reading {
    Axisymmetric,
    ConstantAngle,
}

fn reduced(j: &SpecJets, s: &[Jet2; 2], lambda: f64, norm: Normalization, reading: Reading) -> ReducedResiduals {
    let (q, qx, qy, qxx, qyy) = (j.q.value, j.q.d10, j.q.d01, j.q.d20, j.q.d02);
    let (a, a1, a2) = (j.a.value, j.a.d10, j.a.d20);
    let (b, b1, b2) = (j.b.value, j.b.d01, j.b.d02);
    let (sx, sy) = (s[0].value, s[1].value);
    let q2 = q * q;
    let w_x = a2 - sx * a1 / q2;
    let w_y = b2 - sy * b1 / q2;
    let quad = (qx * qx * a + qy * qy * b) / q2;
    let transport = (sx * qx * a + sy * qy * b) / (q2 * q);
    let lambda_predicted = match reading {
        Reading::Axisymmetric => {
            // −λ/q = ½w − (qₓA' + qₓₓA + q_yB' + q_yyB)/q + (qₓ²A + q_y²B)/q² + (SˣqₓA + Sʸq_yB)/q³
            let rhs = 0.5 * w_x - (qx * a1 + qxx * a + qy * b1 + qyy * b) / q + quad + transport;
            match norm {
                Normalization::N0 => -q * rhs,
                Normalization::N1 => -q2 * rhs,
            }
        }
        Reading::ConstantAngle => {
            // λ = qₓₓA + q_yyB − (qₓ²A + q_y²B)/q − (SˣqₓA + Sʸq_yB)/q²
            let rhs = qxx * a + qyy * b - q * quad - q * transport;
            match norm {
                Normalization::N0 => rhs,
                Normalization::N1 => q * rhs,
            }
        }
    };
    ReducedResiduals {
        r_mixed: s[0].d01 + s[1].d10 - 4.0 * qx * qy,
        r_xx: s[0].d10 - 2.0 * qx * qx,
        r_yy: s[1].d01 - 2.0 * qy * qy,
        r_w: match reading {
            Reading::Axisymmetric => w_x - w_y,
            Reading::ConstantAngle => 0.0,
        },
        r_lambda: lambda - lambda_predicted,
        lambda_used: lambda,
        lambda_predicted,
    }
}

fn check_q(j: &SpecJets, p: (f64, f64)) -> Result<()> {
    if j.q.value == 0.0 {
        return Err(Error::NonPositive {
            what: "q",
            x: p.0,
            y: p.1,
            value: 0.0,
        });
    }
    Ok(())
}

/// Residuals of the diagonal-metric system, with `A`, `B` arbitrary.
pub fn reduced_residuals_axisym(
    spec: &ToricMetricSpec,
    s: &[Jet2; 2],
    lambda: f64,
    p: (f64, f64),
    norm: Normalization,
) -> Result<ReducedResiduals> {
    let j = spec.jets(p.0, p.1)?;
    check_q(&j, p)?;
    Ok(reduced(&j, s, lambda, norm, Reading::Axisymmetric))
}

/// Residuals of the constant-angle system, which needs constant `A`, `B`.
pub fn reduced_residuals_nonaxisym(
    spec: &ToricMetricSpec,
    s: &[Jet2; 2],
    lambda: f64,
    p: (f64, f64),
    norm: Normalization,
) -> Result<ReducedResiduals> {
    if !spec.has_constant_profiles() {
        return Err(Error::Parameter(
            "constant-angle reduced system needs constant A and B".into(),
        ));
    }
    let j = spec.jets(p.0, p.1)?;
    check_q(&j, p)?;
    Ok(reduced(&j, s, lambda, norm, Reading::ConstantAngle))
}

/// Dispatches on the angle of `spec`.
pub fn reduced_residuals(
    spec: &ToricMetricSpec,
    s: &[Jet2; 2],
    lambda: f64,
    p: (f64, f64),
    norm: Normalization,
) -> Result<ReducedResiduals> {
    if spec.is_axisymmetric() {
        reduced_residuals_axisym(spec, s, lambda, p, norm)
    } else {
        reduced_residuals_nonaxisym(spec, s, lambda, p, norm)
    }
}

/// The two expressions whose vanishing is equivalent to `Λˢₜ = 0` and
/// `Λᵗₛ = 0`, and the identity obtained by subtracting them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub e1: f64,
    pub e2: f64,
    /// `(e1 − e2)/(2q²AB)`
    pub normalized_difference: f64,
    /// `A'²/A + B'²/B`
    pub predicted: f64,
}

impl ObstructionReport {
    pub fn identity_defect(&self) -> f64 {
        (self.normalized_difference - self.predicted).abs() / self.predicted.abs().max(1.0)
    }
}

pub fn rigidity_obstruction(spec: &ToricMetricSpec, v: &[Jet2; 2], p: (f64, f64)) -> Result<ObstructionReport> {
    if spec.is_axisymmetric() {
        return Err(Error::Parameter(
            "obstruction needs 0 < theta < pi/2".into(),
        ));
    }
    let j = spec.jets(p.0, p.1)?;
    let (x, y) = p;
    for (what, value) in [("A", j.a.value), ("B", j.b.value)] {
        if !(value > 0.0) {
            return Err(Error::NonPositive { what, x, y, value });
        }
    }
    Ok(obstruction_from_jets(&j, v))
}

fn obstruction_from_jets(j: &SpecJets, v: &[Jet2; 2]) -> ObstructionReport {
    let (q, qx, qy) = (j.q.value, j.q.d10, j.q.d01);
    let (a, a1, a2) = (j.a.value, j.a.d10, j.a.d20);
    let (b, b1, b2) = (j.b.value, j.b.d01, j.b.d02);
    let common = 2.0 * (a1 * b * v[0].value - a * b1 * v[1].value) + 4.0 * q * a * b * (a1 * qx - b1 * qy);
    let squares = a1 * a1 * b + a * b1 * b1;
    let curv = 2.0 * a * b * (a2 - b2);
    let e1 = common + q * q * (squares - curv);
    let e2 = common - q * q * (squares + curv);
    ObstructionReport {
        e1,
        e2,
        normalized_difference: (e1 - e2) / (2.0 * q * q * a * b),
        predicted: a1 * a1 / a + b1 * b1 / b,
    }
}

/// `(Λˢₜ, Λᵗₛ)` from the generic engine.
pub fn lambda_st_vanishing(metric: &MetricField<4>, v: &BaseVectorField, p: (f64, f64)) -> Result<(f64, f64)> {
    let geo = Geometry::at(metric, p.0, p.1)?;
    let l = geo.lambda(&v.eval(p.0, p.1)?);
    Ok((l[2][3], l[3][2]))
}

/// Einstein test: `λ = R/4` at the domain centre, then the worst entrywise
/// `|Ric − λg|` and `|R/4 − λ|` over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EinsteinReport {
    pub lambda: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub max_tensor_residual: f64,
    pub max_trace_residual: f64,
    pub worst_point: (f64, f64),
}

pub fn einstein_residual(metric: &MetricField<4>, grid: &Grid) -> Result<EinsteinReport> {
    let (cx, cy) = grid.domain.center();
    let lambda = Geometry::at(metric, cx, cy)?.scalar / 4.0;
    let per_point = grid.sweep(|x, y| {
        let geo = Geometry::at(metric, x, y)?;
        let mut tensor = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                tensor = tensor.max((geo.ricci[i][j] - lambda * geo.g[i][j]).abs());
            }
        }
        Ok((tensor, (geo.scalar / 4.0 - lambda).abs()))
    })?;
    let combined: Vec<f64> = per_point.iter().map(|(t, s)| t.max(*s)).collect();
    let (max_residual, mean_residual) = max_mean(&combined);
    let worst = combined
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v > combined[best] { k } else { best });
    Ok(EinsteinReport {
        lambda,
        max_residual,
        mean_residual,
        max_tensor_residual: per_point.iter().fold(0.0f64, |m, p| m.max(p.0)),
        max_trace_residual: per_point.iter().fold(0.0f64, |m, p| m.max(p.1)),
        worst_point: grid.point(worst),
    })
}

/// Flat and Einstein conditions for a product of two conformal surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFactor {
    /// `q q_yy − q_y²` (the flat factor must make this vanish).
    pub flat_residual: f64,
    /// `q q_xx − q_x²`, which must equal `λ/A` on the Einstein factor.
    pub lambda_over_a: f64,
}

/// `curved` names the coordinate of the Einstein factor; the other one is
/// the flat factor.
pub fn surface_factor_conditions(q: &dyn ScalarField2, p: (f64, f64), curved: Axis) -> Result<SurfaceFactor> {
    let j = q.eval(p.0, p.1)?;
    let (along, across) = match curved {
        Axis::X => ((j.d10, j.d20), (j.d01, j.d02)),
        Axis::Y => ((j.d01, j.d02), (j.d10, j.d20)),
    };
    Ok(SurfaceFactor {
        flat_residual: j.value * across.1 - across.0 * across.0,
        lambda_over_a: j.value * along.1 - along.0 * along.0,
    })
}

/// Grid version: worst flat residual, the value of `λ/A` at the centre and
/// its worst deviation elsewhere (nonzero when the factor is not Einstein).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFactorReport {
    pub max_flat_residual: f64,
    pub lambda_over_a: f64,
    pub max_einstein_residual: f64,
}

pub fn surface_factor_report(q: &dyn ScalarField2, grid: &Grid, curved: Axis) -> Result<SurfaceFactorReport> {
    let centre = surface_factor_conditions(q, grid.domain.center(), curved)?;
    let all = grid.sweep(|x, y| surface_factor_conditions(q, (x, y), curved))?;
    Ok(SurfaceFactorReport {
        max_flat_residual: all.iter().fold(0.0f64, |m, f| m.max(f.flat_residual.abs())),
        lambda_over_a: centre.lambda_over_a,
        max_einstein_residual: all
            .iter()
            .fold(0.0f64, |m, f| m.max((f.lambda_over_a - centre.lambda_over_a).abs())),
    })
}

/// Max of `|h h'' − h'² − λ/A|` for `h = √|λ/A|·f` over `points`.
pub fn verify_h_ode(kind: SurfaceKind, lambda: f64, a: f64, points: &[f64]) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Parameter(format!("A must be positive, got {a}")));
    }
    let compatible = match kind {
        SurfaceKind::Cosh => lambda >= 0.0,
        SurfaceKind::Sinh | SurfaceKind::Sin => lambda <= 0.0,
    };
    if !compatible {
        return Err(Error::Parameter(format!(
            "{kind:?} solutions need lambda {} 0, got {lambda}",
            if kind == SurfaceKind::Cosh { ">=" } else { "<=" }
        )));
    }
    let target = lambda / a;
    let scale = target.abs().sqrt();
    let mut worst = 0.0f64;
    for &x in points {
        let [f0, f1, f2, _] = kind.func().derivatives(x).map_err(Error::domain(x, 0.0))?;
        let (h, h1, h2) = (scale * f0, scale * f1, scale * f2);
        worst = worst.max((h * h2 - h1 * h1 - target).abs());
    }
    Ok(worst)
}

/// Result of integrating the first-order equations for `(Sˣ, Sʸ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    /// Worst `|r(x,y) − r(x₀,y) − r(x,y₀) + r(x₀,y₀)|` over the grid, where
    /// `r = 4qₓq_y − ∂_y Sˣ₀ − ∂ₓ Sʸ₀`; zero exactly when the mixed equation
    /// can be split as `φ'(y) + ψ'(x)`.
    pub max_mixed_residual: f64,
    pub mean_mixed_residual: f64,
    /// Worst `|∂ₓ∂_y r|` over the grid, by central differences.
    pub max_separability_defect: f64,
    pub separable: bool,
}

/// Threshold on the separability defect.
pub const SEPARABILITY_TOL: f64 = 1e-7;

struct QuadratureState {
    q: Field,
    x0: f64,
    y0: f64,
    step: f64,
    /// `φ` with `φ' = r(x₀, ·)`.
    phi: Antiderivative,
    /// `ψ` with `ψ' = r(·, y₀) − r(x₀, y₀)`.
    psi: Antiderivative,
}

impl QuadratureState {
    fn qjet(&self, x: f64, y: f64) -> Result<Jet2> {
        self.q.eval(x, y)
    }

    /// `(∫ₓ₀ˣ 2qₓ² du, ∫ₓ₀ˣ 4qₓqₓᵧ du)`
    fn sx0(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let v = simpson(|u| Ok(2.0 * self.qjet(u, y)?.d10.powi(2)), self.x0, x, self.step)?;
        let d = simpson(
            |u| {
                let j = self.qjet(u, y)?;
                Ok(4.0 * j.d10 * j.d11)
            },
            self.x0,
            x,
            self.step,
        )?;
        Ok((v, d))
    }

    /// `(∫_{y₀}^y 2q_y² dv, ∫_{y₀}^y 4q_y qₓᵧ dv)`
    fn sy0(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let v = simpson(|t| Ok(2.0 * self.qjet(x, t)?.d01.powi(2)), self.y0, y, self.step)?;
        let d = simpson(
            |t| {
                let j = self.qjet(x, t)?;
                Ok(4.0 * j.d01 * j.d11)
            },
            self.y0,
            y,
            self.step,
        )?;
        Ok((v, d))
    }

    fn sx(&self, x: f64, y: f64) -> Result<Jet2> {
        let j = self.qjet(x, y)?;
        let (v, dy) = self.sx0(x, y)?;
        Ok(Jet2 {
            value: v + self.phi.value(y)?,
            d10: 2.0 * j.d10 * j.d10,
            d01: dy + self.phi.derivative(y)?,
            d20: 4.0 * j.d10 * j.d20,
            d11: 4.0 * j.d10 * j.d11,
            ..Jet2::ZERO
        })
    }

    fn sy(&self, x: f64, y: f64) -> Result<Jet2> {
        let j = self.qjet(x, y)?;
        let (v, dx) = self.sy0(x, y)?;
        Ok(Jet2 {
            value: v + self.psi.value(x)?,
            d10: dx + self.psi.derivative(x)?,
            d01: 2.0 * j.d01 * j.d01,
            d11: 4.0 * j.d01 * j.d11,
            d02: 4.0 * j.d01 * j.d02,
            ..Jet2::ZERO
        })
    }

    /// `r = 4qₓq_y − ∂_y Sˣ₀ − ∂ₓ Sʸ₀`
    fn mixed(&self, x: f64, y: f64) -> Result<f64> {
        let j = self.qjet(x, y)?;
        Ok(4.0 * j.d10 * j.d01 - self.sx0(x, y)?.1 - self.sy0(x, y)?.1)
    }
}

struct QuadratureComponent {
    state: Arc<QuadratureState>,
    axis: Axis,
}

impl ScalarField2 for QuadratureComponent {
    fn eval(&self, x: f64, y: f64) -> Result<Jet2> {
        match self.axis {
            Axis::X => self.state.sx(x, y),
            Axis::Y => self.state.sy(x, y),
        }
    }
}

/// Constructs `(Sˣ, Sʸ)` from `q` alone by quadrature, anchored at the
/// lower-left corner of `domain`.
///
/// `resolution` is the number of grid points per side used both for the
/// compatibility report and, times 16, for the edge tables of `φ` and `ψ`.
/// Only the value and first partials of the returned jets are meaningful;
/// the second partials that need an integral, and all third partials, read
/// zero.
///
/// The result solves the three first-order equations. The remaining gauge
/// `Sˣ += c₁ + κy`, `Sʸ += c₂ − κx` preserves them and is fixed by
/// [`fit_gauge`].
pub fn solve_aux_potentials(q: Field, domain: Box2, resolution: usize) -> Result<(AuxPotentials, CompatibilityReport)> {
    let grid = Grid::new(domain, resolution, resolution)?;
    let step = (domain.x1 - domain.x0).max(domain.y1 - domain.y0) / (16.0 * resolution as f64);
    let (x0, y0) = (domain.x0, domain.y0);
    let mut state = QuadratureState {
        q,
        x0,
        y0,
        step,
        phi: Antiderivative::from_samples(0.0, 1.0, vec![0.0; 3])?,
        psi: Antiderivative::from_samples(0.0, 1.0, vec![0.0; 3])?,
    };
    let n_edge = 8 * resolution;
    let ys = edge_nodes(y0, domain.y1, n_edge);
    let xs = edge_nodes(x0, domain.x1, n_edge);
    let phi_prime = par_map(&ys, |y| state.mixed(x0, y))?;
    let r00 = state.mixed(x0, y0)?;
    let psi_prime = par_map(&xs, |x| Ok(state.mixed(x, y0)? - r00))?;
    state.phi = Antiderivative::from_samples(y0, ys[1] - ys[0], phi_prime)?;
    state.psi = Antiderivative::from_samples(x0, xs[1] - xs[0], psi_prime)?;
    let state = Arc::new(state);

    let r = grid.sweep(|x, y| state.mixed(x, y))?;
    let (nx, ny) = (grid.nx, grid.ny);
    let at = |i: usize, j: usize| r[j * nx + i];
    let mut split = Vec::with_capacity(r.len());
    for j in 0..ny {
        for i in 0..nx {
            split.push(at(i, j) - at(0, j) - at(i, 0) + at(0, 0));
        }
    }
    let (max_mixed_residual, mean_mixed_residual) = max_mean(&split);
    let (hx, hy) = (
        (domain.x1 - domain.x0) / (nx - 1) as f64,
        (domain.y1 - domain.y0) / (ny - 1) as f64,
    );
    let mut max_separability_defect = 0.0f64;
    for j in 1..ny.saturating_sub(1) {
        for i in 1..nx.saturating_sub(1) {
            let d = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4.0 * hx * hy);
            max_separability_defect = max_separability_defect.max(d.abs());
        }
    }
    let report = CompatibilityReport {
        max_mixed_residual,
        mean_mixed_residual,
        max_separability_defect,
        separable: max_separability_defect <= SEPARABILITY_TOL,
    };
    let potentials = AuxPotentials {
        sx: Arc::new(QuadratureComponent {
            state: state.clone(),
            axis: Axis::X,
        }),
        sy: Arc::new(QuadratureComponent { state, axis: Axis::Y }),
    };
    Ok((potentials, report))
}

fn edge_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    crate::grid::linspace(a, b, 2 * n + 1)
}

fn par_map<F>(ts: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync + Send,
{
    use rayon::prelude::*;
    ts.par_iter().map(|&t| f(t)).collect::<Vec<_>>().into_iter().collect()
}

/// The three-parameter shift `Sˣ += c₁ + κy`, `Sʸ += c₂ − κx`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Gauge {
    pub c1: f64,
    pub c2: f64,
    pub kappa: f64,
}

impl Gauge {
    pub fn apply(&self, s: &[Jet2; 2], p: (f64, f64)) -> [Jet2; 2] {
        let mut out = *s;
        out[0].value += self.c1 + self.kappa * p.1;
        out[0].d01 += self.kappa;
        out[1].value += self.c2 - self.kappa * p.0;
        out[1].d10 -= self.kappa;
        out
    }

    pub fn shift(&self, s: &AuxPotentials) -> AuxPotentials {
        let g = *self;
        let (sx, sy) = (s.sx.clone(), s.sy.clone());
        AuxPotentials {
            sx: Arc::new(AuxComponent {
                f: Box::new(move |x, y| {
                    let mut j = sx.eval(x, y)?;
                    j.value += g.c1 + g.kappa * y;
                    j.d01 += g.kappa;
                    Ok(j)
                }),
            }),
            sy: Arc::new(AuxComponent {
                f: Box::new(move |x, y| {
                    let mut j = sy.eval(x, y)?;
                    j.value += g.c2 - g.kappa * x;
                    j.d10 -= g.kappa;
                    Ok(j)
                }),
            }),
        }
    }
}

/// Least-squares choice of the gauge that minimises the `w` and `λ`
/// residuals over the sampled points. `samples` holds each point with the
/// potentials there.
pub fn fit_gauge(
    spec: &ToricMetricSpec,
    samples: &[((f64, f64), [Jet2; 2])],
    lambda: f64,
    norm: Normalization,
) -> Result<Gauge> {
    let units = [
        Gauge::default(),
        Gauge { c1: 1.0, ..Gauge::default() },
        Gauge { c2: 1.0, ..Gauge::default() },
        Gauge { kappa: 1.0, ..Gauge::default() },
    ];
    let mut rows = Vec::with_capacity(2 * samples.len());
    for (p, s) in samples {
        let r: Vec<ReducedResiduals> = units
            .iter()
            .map(|g| reduced_residuals(spec, &g.apply(s, *p), lambda, *p, norm))
            .collect::<Result<_>>()?;
        for pick in [|r: &ReducedResiduals| r.r_w, |r: &ReducedResiduals| r.r_lambda] {
            let base = pick(&r[0]);
            let row = [base, pick(&r[1]) - base, pick(&r[2]) - base, pick(&r[3]) - base];
            if row.iter().any(|v| *v != 0.0) {
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return Ok(Gauge::default());
    }
    let m = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j + 1]);
    let rhs = DVector::from_fn(rows.len(), |i, _| -rows[i][0]);
    let svd = m.clone().svd(true, true);
    let cutoff = 1e-10 * svd.singular_values.max();
    let solve = |b: &DVector<f64>| {
        svd.solve(b, cutoff)
            .map_err(|e| Error::Parameter(format!("gauge fit failed: {e}")))
    };
    // One step of iterative refinement.
    let mut c = solve(&rhs)?;
    c += solve(&(&rhs - &m * &c))?;
    Ok(Gauge {
        c1: c[0],
        c2: c[1],
        kappa: c[2],
    })
}
