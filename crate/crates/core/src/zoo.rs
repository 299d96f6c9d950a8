//! Constructors for the explicit toric metric families.
//!
//! Every family is an instance of
//!
//! ```text
//! g = q⁻² ( dx²/A(x) + dy²/B(y) + A ds² + B dt² + 2√(AB) cos θ ds dt )
//! ```
//!
//! with `θ = π/2` giving the axisymmetric (diagonal) metric.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{from_jet_fn, Axis, Field, ProfileField, ScalarField2};
use crate::grid::{max_mean, Box2, Grid};
use crate::jet::{Func, Jet2};
use crate::profile::{Affine, ConstantProfile, FuncProfile, Polynomial, Profile1, SteadyProfile};
use crate::tensor::{MetricField, MetricSource};

/// Resolution of the spot-check grid used by every constructor.
const SPOT_CHECK_POINTS: usize = 9;

/// The data `(q, A, B, θ)` of a toric metric.
#[derive(Clone)]
pub struct ToricMetricSpec {
    pub q: Field,
    pub a: Arc<dyn Profile1>,
    pub b: Arc<dyn Profile1>,
    pub theta: f64,
}

/// Jets of `q`, `A(x)` and `B(y)` at one base point.
#[derive(Debug, Clone, Copy)]
pub struct SpecJets {
    pub q: Jet2,
    pub a: Jet2,
    pub b: Jet2,
}

impl ToricMetricSpec {
    pub fn new(q: Field, a: Arc<dyn Profile1>, b: Arc<dyn Profile1>, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= FRAC_PI_2) {
            return Err(Error::Parameter(format!(
                "theta must lie in (0, pi/2], got {theta}"
            )));
        }
        Ok(ToricMetricSpec { q, a, b, theta })
    }

    pub fn is_axisymmetric(&self) -> bool {
        self.theta == FRAC_PI_2
    }

    /// `cos θ`, exactly zero in the axisymmetric case.
    pub fn cos_theta(&self) -> f64 {
        if self.is_axisymmetric() {
            0.0
        } else {
            self.theta.cos()
        }
    }

    pub fn jets(&self, x: f64, y: f64) -> Result<SpecJets> {
        let q = self.q.eval(x, y)?;
        let a = self
            .a
            .eval_jet(&Jet2::var_x(x))
            .map_err(Error::domain(x, y))?;
        let b = self
            .b
            .eval_jet(&Jet2::var_y(y))
            .map_err(Error::domain(x, y))?;
        Ok(SpecJets { q, a, b })
    }

    pub fn a_field(&self) -> Field {
        Arc::new(ProfileField {
            profile: self.a.clone(),
            axis: Axis::X,
        })
    }

    pub fn b_field(&self) -> Field {
        Arc::new(ProfileField {
            profile: self.b.clone(),
            axis: Axis::Y,
        })
    }

    pub fn has_constant_profiles(&self) -> bool {
        self.a.is_constant() && self.b.is_constant()
    }

    /// Fails unless `q ≠ 0` without sign change and `A, B > 0` on a
    /// `9 × 9` spot grid of `domain`.
    pub fn spot_check(&self, domain: &Box2) -> Result<()> {
        let grid = Grid::new(*domain, SPOT_CHECK_POINTS, SPOT_CHECK_POINTS)?;
        let mut q_sign = 0.0;
        for (x, y) in grid.points() {
            let j = self.jets(x, y)?;
            let nonpositive = |what, value: f64| Error::NonPositive { what, x, y, value };
            if !(j.a.value > 0.0) {
                return Err(nonpositive("A", j.a.value));
            }
            if !(j.b.value > 0.0) {
                return Err(nonpositive("B", j.b.value));
            }
            let s = j.q.value.signum();
            if j.q.value == 0.0 || !j.q.value.is_finite() || (q_sign != 0.0 && s != q_sign) {
                return Err(nonpositive("q (must not vanish)", j.q.value));
            }
            q_sign = s;
        }
        Ok(())
    }
}

struct ToricSource {
    spec: ToricMetricSpec,
    cos_theta: f64,
}

impl MetricSource<4> for ToricSource {
    fn components(&self, x: f64, y: f64) -> Result<[[Jet2; 4]; 4]> {
        let SpecJets { q, a, b } = self.spec.jets(x, y)?;
        let at = Error::domain(x, y);
        let inv_q2 = q.powi(-2).map_err(at)?;
        let mut g = [[Jet2::ZERO; 4]; 4];
        g[0][0] = inv_q2.checked_div(&a).map_err(Error::domain(x, y))?;
        g[1][1] = inv_q2.checked_div(&b).map_err(Error::domain(x, y))?;
        g[2][2] = inv_q2 * a;
        g[3][3] = inv_q2 * b;
        if self.cos_theta != 0.0 {
            let cross = (a * b).apply(Func::Sqrt).map_err(Error::domain(x, y))? * inv_q2;
            g[2][3] = cross.scale(self.cos_theta);
            g[3][2] = g[2][3];
        }
        Ok(g)
    }
}

struct BaseSource {
    spec: ToricMetricSpec,
}

impl MetricSource<2> for BaseSource {
    fn components(&self, x: f64, y: f64) -> Result<[[Jet2; 2]; 2]> {
        let SpecJets { q, a, b } = self.spec.jets(x, y)?;
        let inv_q2 = q.powi(-2).map_err(Error::domain(x, y))?;
        let mut g = [[Jet2::ZERO; 2]; 2];
        g[0][0] = inv_q2.checked_div(&a).map_err(Error::domain(x, y))?;
        g[1][1] = inv_q2.checked_div(&b).map_err(Error::domain(x, y))?;
        Ok(g)
    }
}

/// The metric with fibres at constant angle `θ`.
pub fn build_general(spec: &ToricMetricSpec, domain: Box2) -> Result<MetricField<4>> {
    spec.spot_check(&domain)?;
    Ok(MetricField::new(
        Arc::new(ToricSource {
            spec: spec.clone(),
            cos_theta: spec.cos_theta(),
        }),
        domain,
    ))
}

/// The diagonal metric; `spec.theta` must be `π/2`.
pub fn build_axisymmetric(spec: &ToricMetricSpec, domain: Box2) -> Result<MetricField<4>> {
    if !spec.is_axisymmetric() {
        return Err(Error::Parameter(format!(
            "axisymmetric metric needs theta = pi/2, got {}",
            spec.theta
        )));
    }
    build_general(spec, domain)
}

/// `q⁻²(dx²/A + dy²/B)` on the base.
pub fn base_block(spec: &ToricMetricSpec, domain: Box2) -> Result<MetricField<2>> {
    spec.spot_check(&domain)?;
    Ok(MetricField::new(
        Arc::new(BaseSource { spec: spec.clone() }),
        domain,
    ))
}

/// Euler-identity defect `|x qₓ + y q_y − q|` over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub max: f64,
    pub mean: f64,
}

pub fn check_homogeneous_degree1(q: &dyn ScalarField2, grid: &Grid) -> Result<HomogeneityReport> {
    let defects = grid.sweep(|x, y| {
        let j = q.eval(x, y)?;
        Ok(x * j.d10 + y * j.d01 - j.value)
    })?;
    let (max, mean) = max_mean(&defects);
    Ok(HomogeneityReport { max, mean })
}

/// Expected type of a family, where the construction determines it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolitonKind {
    Einstein,
    Steady,
    Soliton,
    Unknown,
}

/// A constructed metric with its metadata.
#[derive(Clone)]
pub struct Family {
    pub name: &'static str,
    pub spec: ToricMetricSpec,
    pub metric: MetricField<4>,
    pub domain: Box2,
    pub kind: SolitonKind,
    /// λ where a closed formula is known.
    pub expected_lambda: Option<f64>,
}

fn family(
    name: &'static str,
    spec: ToricMetricSpec,
    domain: Box2,
    kind: SolitonKind,
    expected_lambda: Option<f64>,
) -> Result<Family> {
    let metric = build_general(&spec, domain)?;
    Ok(Family {
        name,
        spec,
        metric,
        domain,
        kind,
        expected_lambda,
    })
}

fn constant_profile(v: f64) -> Arc<dyn Profile1> {
    Arc::new(ConstantProfile(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EinsteinParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    pub theta: f64,
}

impl EinsteinParams {
    /// `λ = −3(a²A + b²B)`.
    pub fn expected_lambda(&self) -> f64 {
        -3.0 * (self.a * self.a * self.big_a + self.b * self.b * self.big_b)
    }
}

/// Affine `q = ax + by + c` with constant `A`, `B`.
pub fn build_einstein(params: &EinsteinParams, domain: Box2) -> Result<Family> {
    let EinsteinParams { a, b, c, .. } = *params;
    let q = from_jet_fn(move |x, y| Ok(x.scale(a) + y.scale(b) + c));
    let spec = ToricMetricSpec::new(
        q,
        constant_profile(params.big_a),
        constant_profile(params.big_b),
        params.theta,
    )?;
    family(
        "einstein",
        spec,
        domain,
        SolitonKind::Einstein,
        Some(params.expected_lambda()),
    )
}

/// `q = x`, cubic `A`, quadratic `B`, diagonal. Coefficients ascending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildParams {
    pub a_coeffs: [f64; 4],
    pub b_coeffs: [f64; 3],
}

impl SchwarzschildParams {
    /// `A = x² − 2m x³`, `B = 1 − y²`: the Ricci-flat instance in inverse
    /// radius `x = 1/r` and `y = cos ϑ`.
    pub fn verified(m: f64) -> Self {
        SchwarzschildParams {
            a_coeffs: [0.0, 0.0, 1.0, -2.0 * m],
            b_coeffs: [1.0, 0.0, -1.0],
        }
    }
}

/// Accepts any coefficients; whether the result is Einstein is decided by
/// verification, not assumed.
pub fn build_schwarzschild(params: &SchwarzschildParams, domain: Box2) -> Result<Family> {
    build_schwarzschild_profiles(
        Arc::new(Polynomial(params.a_coeffs.to_vec())),
        Arc::new(Polynomial(params.b_coeffs.to_vec())),
        domain,
    )
}

/// Same family with arbitrary profile expressions.
pub fn build_schwarzschild_profiles(
    a: Arc<dyn Profile1>,
    b: Arc<dyn Profile1>,
    domain: Box2,
) -> Result<Family> {
    let q = from_jet_fn(|x, _| Ok(x));
    let spec = ToricMetricSpec::new(q, a, b, FRAC_PI_2)?;
    family("schwarzschild", spec, domain, SolitonKind::Einstein, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdSign {
    Plus,
    Minus,
}

/// `q = x ± y`, `A = a₀ − P(x)`, `B = b₀ + P(y)` with cubic `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdParams {
    pub a0: f64,
    pub b0: f64,
    /// Coefficients of `P`, ascending.
    pub p: [f64; 4],
    pub sign: PdSign,
}

pub fn build_plebanski_demianski(params: &PdParams, domain: Box2) -> Result<Family> {
    let p = params.p;
    let a = Polynomial(vec![params.a0 - p[0], -p[1], -p[2], -p[3]]);
    let b = Polynomial(vec![params.b0 + p[0], p[1], p[2], p[3]]);
    let sign = match params.sign {
        PdSign::Plus => 1.0,
        PdSign::Minus => -1.0,
    };
    let q = from_jet_fn(move |x, y| Ok(x + y.scale(sign)));
    let spec = ToricMetricSpec::new(q, Arc::new(a), Arc::new(b), FRAC_PI_2)?;
    let grid = Grid::new(domain, SPOT_CHECK_POINTS, SPOT_CHECK_POINTS)?;
    for (x, y) in grid.points() {
        let qv = x + sign * y;
        if !(qv > 0.0) {
            return Err(Error::NonPositive {
                what: "x ± y",
                x,
                y,
                value: qv,
            });
        }
    }
    family(
        "plebanski_demianski",
        spec,
        domain,
        SolitonKind::Einstein,
        None,
    )
}

/// `F_{α,c,k}(t) = c t² + k t^{2α²/(2α−1)+1}`; `α = 1/2` is excluded.
pub fn steady_profile(alpha: f64, c: f64, k: f64) -> Result<SteadyProfile> {
    if alpha == 0.5 {
        return Err(Error::Parameter("alpha = 1/2 excluded".into()));
    }
    if !(alpha.is_finite() && c.is_finite() && k.is_finite()) {
        return Err(Error::Parameter("non-finite steady profile parameter".into()));
    }
    Ok(SteadyProfile { alpha, c, k })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseVParams {
    pub alpha: f64,
    pub c: f64,
    pub k1: f64,
    pub k2: f64,
}

/// The steady singular soliton: `q = x^α y^{1−α}`,
/// `A = F_{α,c,k₁}`, `B = F_{1−α,−c,k₂}`, on `x, y > 0`.
pub fn build_case_v(params: &CaseVParams, domain: Box2) -> Result<Family> {
    let CaseVParams { alpha, c, k1, k2 } = *params;
    let a = steady_profile(alpha, c, k1)?;
    let b = steady_profile(1.0 - alpha, -c, k2)?;
    if !(domain.x0 > 0.0 && domain.y0 > 0.0) {
        return Err(Error::Parameter(format!(
            "steady soliton needs x, y > 0, domain is {domain}"
        )));
    }
    let q = from_jet_fn(move |x, y| Ok(x.powf(alpha)? * y.powf(1.0 - alpha)?));
    let spec = ToricMetricSpec::new(q, Arc::new(a), Arc::new(b), FRAC_PI_2)?;
    family("case_v", spec, domain, SolitonKind::Steady, Some(0.0))
}

/// `q = y f(x/y)`, `A = a₀ − x²`, `B = b₀ + y²`.
#[derive(Clone)]
pub struct CaseIVParams {
    pub a0: f64,
    pub b0: f64,
    pub f: Arc<dyn Profile1>,
    pub lambda: f64,
}

pub fn case_iv_q(f: Arc<dyn Profile1>) -> Field {
    from_jet_fn(move |x, y| Ok(y * f.eval_jet(&x.checked_div(&y)?)?))
}

pub fn build_case_iv(params: &CaseIVParams, domain: Box2) -> Result<Family> {
    if !(domain.y0 > 0.0) {
        return Err(Error::Parameter(format!(
            "case (iv) uses z = x/y and needs y > 0, domain is {domain}"
        )));
    }
    let a = Polynomial(vec![params.a0, 0.0, -1.0]);
    let b = Polynomial(vec![params.b0, 0.0, 1.0]);
    let spec = ToricMetricSpec::new(case_iv_q(params.f.clone()), Arc::new(a), Arc::new(b), FRAC_PI_2)?;
    family(
        "case_iv",
        spec,
        domain,
        SolitonKind::Soliton,
        Some(params.lambda),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Cosh,
    Sinh,
    Sin,
}

impl SurfaceKind {
    pub fn func(self) -> Func {
        match self {
            SurfaceKind::Cosh => Func::Cosh,
            SurfaceKind::Sinh => Func::Sinh,
            SurfaceKind::Sin => Func::Sin,
        }
    }

    /// `f f'' − f'²`, constant for each kind.
    pub fn curvature_sign(self) -> f64 {
        match self {
            SurfaceKind::Cosh => 1.0,
            SurfaceKind::Sinh | SurfaceKind::Sin => -1.0,
        }
    }
}

/// Product of a flat surface with an Einstein surface, `q = f(σx + τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSurfaceParams {
    pub kind: SurfaceKind,
    #[serde(rename = "A")]
    pub big_a: f64,
    #[serde(rename = "B")]
    pub big_b: f64,
    /// Exchange the roles of `(x, s)` and `(y, t)`.
    pub swap_xy: bool,
    pub sigma: f64,
    pub tau: f64,
}

impl ProductSurfaceParams {
    pub fn new(kind: SurfaceKind, big_a: f64, big_b: f64) -> Self {
        ProductSurfaceParams {
            kind,
            big_a,
            big_b,
            swap_xy: false,
            sigma: 1.0,
            tau: 0.0,
        }
    }

    /// `λ` of the Einstein factor: `σ²·(f f'' − f'²)` times the constant
    /// profile along the curved direction.
    pub fn expected_lambda(&self) -> f64 {
        let along = if self.swap_xy { self.big_b } else { self.big_a };
        self.kind.curvature_sign() * self.sigma * self.sigma * along
    }
}

pub fn build_product_surface(params: &ProductSurfaceParams, domain: Box2) -> Result<Family> {
    let profile: Arc<dyn Profile1> = Arc::new(Affine {
        inner: Arc::new(FuncProfile(params.kind.func())),
        sigma: params.sigma,
        tau: params.tau,
        scale: 1.0,
    });
    let axis = if params.swap_xy { Axis::Y } else { Axis::X };
    let q: Field = Arc::new(ProfileField { profile, axis });
    let spec = ToricMetricSpec::new(
        q,
        constant_profile(params.big_a),
        constant_profile(params.big_b),
        FRAC_PI_2,
    )?;
    family(
        "product_surface",
        spec,
        domain,
        SolitonKind::Unknown,
        Some(params.expected_lambda()),
    )
}

/// Shrinks `search` so that it stays `margin` away from every root or
/// singularity of `A` (along x), `B` (along y) and `q` (along the centre
/// lines), sampled at spacing `resolution`. The kept interval on each axis is
/// the root-free piece containing the centre of `search`.
pub fn guarded_domain(spec: &ToricMetricSpec, search: Box2, margin: f64, resolution: f64) -> Result<Box2> {
    let (cx, cy) = search.center();
    let x_ok = |x: f64| -> bool {
        let a = spec.a.value(x).ok().filter(|v| *v > 0.0);
        let q = spec.q.value(x, cy).ok().filter(|v| *v != 0.0 && v.is_finite());
        a.is_some() && q.is_some()
    };
    let y_ok = |y: f64| -> bool {
        let b = spec.b.value(y).ok().filter(|v| *v > 0.0);
        let q = spec.q.value(cx, y).ok().filter(|v| *v != 0.0 && v.is_finite());
        b.is_some() && q.is_some()
    };
    let (x0, x1) = guard_interval(search.x0, search.x1, cx, margin, resolution, x_ok)
        .ok_or_else(|| Error::Parameter(format!("no root-free x-interval in {search}")))?;
    let (y0, y1) = guard_interval(search.y0, search.y1, cy, margin, resolution, y_ok)
        .ok_or_else(|| Error::Parameter(format!("no root-free y-interval in {search}")))?;
    Box2::new(x0, x1, y0, y1)
}

fn guard_interval(
    lo: f64,
    hi: f64,
    center: f64,
    margin: f64,
    step: f64,
    ok: impl Fn(f64) -> bool,
) -> Option<(f64, f64)> {
    if !ok(center) {
        return None;
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let walk = |dir: f64, limit: f64| -> f64 {
        let mut last_good = center;
        for k in 1..=n {
            let t = center + dir * k as f64 * step;
            if (dir > 0.0 && t > limit) || (dir < 0.0 && t < limit) {
                return limit;
            }
            if !ok(t) {
                return last_good - dir * margin;
            }
            last_good = t;
        }
        limit
    };
    let a = walk(-1.0, lo);
    let b = walk(1.0, hi);
    (a < b).then_some((a, b))
}
