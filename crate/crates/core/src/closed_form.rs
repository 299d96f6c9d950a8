//! Closed-form Ricci and Lie-derivative components of the toric metric.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Mat, Rank2, Tensor2};
use crate::zoo::{SpecJets, ToricMetricSpec};

/// Which reading of the component formulas to use.
///
/// The two readings differ in two places:
/// - the `q_xx A` coefficient inside `Ric_ss` (and `q_yy B` inside `Ric_tt`)
///   is 3 as printed and 1 in the corrected form;
/// - the angle factor of the `A'B'/(8AB)` term in `Ric_xy` is `cot θ` as
///   printed and `cot²θ` in the corrected form.
///
/// The corrected form is the one the generic engine reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RicciVariant {
    AsPrinted,
    Corrected,
}

struct Local {
    q: f64,
    qx: f64,
    qy: f64,
    qxx: f64,
    qxy: f64,
    qyy: f64,
    a: f64,
    a1: f64,
    a2: f64,
    b: f64,
    b1: f64,
    b2: f64,
}

impl Local {
    fn new(j: &SpecJets) -> Self {
        Local {
            q: j.q.value,
            qx: j.q.d10,
            qy: j.q.d01,
            qxx: j.q.d20,
            qxy: j.q.d11,
            qyy: j.q.d02,
            a: j.a.value,
            a1: j.a.d10,
            a2: j.a.d20,
            b: j.b.value,
            b1: j.b.d01,
            b2: j.b.d02,
        }
    }

    /// The `(x, A) ↔ (y, B)` mirror.
    fn swapped(&self) -> Self {
        Local {
            q: self.q,
            qx: self.qy,
            qy: self.qx,
            qxx: self.qyy,
            qxy: self.qxy,
            qyy: self.qxx,
            a: self.b,
            a1: self.b1,
            a2: self.b2,
            b: self.a,
            b1: self.a1,
            b2: self.a2,
        }
    }

    /// `A''/2 − (2qₓA' + k qₓₓA + q_yB' + q_yyB)/q + 3(qₓ²A + q_y²B)/q²`.
    fn bracket(&self, k: f64) -> f64 {
        let l = self;
        l.a2 / 2.0 - (2.0 * l.qx * l.a1 + k * l.qxx * l.a + l.qy * l.b1 + l.qyy * l.b) / l.q
            + 3.0 * (l.qx * l.qx * l.a + l.qy * l.qy * l.b) / (l.q * l.q)
    }

    fn ric_xx(&self, cot2: f64) -> f64 {
        -(self.bracket(3.0) + self.a1 * self.a1 * cot2 / (8.0 * self.a)) / self.a
    }

    fn ric_ss(&self, cot2: f64, k: f64) -> f64 {
        let l = self;
        let cross = (l.b * l.a1 * l.a1 + l.a * l.b1 * l.b1) * cot2 / (8.0 * l.a * l.b);
        -l.a * (l.bracket(k) - cross)
    }
}

fn check_positive(l: &Local, p: (f64, f64)) -> Result<()> {
    let (x, y) = p;
    if l.q == 0.0 {
        return Err(Error::NonPositive { what: "q", x, y, value: l.q });
    }
    if !(l.a > 0.0) {
        return Err(Error::NonPositive { what: "A", x, y, value: l.a });
    }
    if !(l.b > 0.0) {
        return Err(Error::NonPositive { what: "B", x, y, value: l.b });
    }
    Ok(())
}

fn symmetric(entries: &[((usize, usize), f64)]) -> Tensor2<4> {
    let mut c: Mat<4> = [[0.0; 4]; 4];
    for &((i, j), v) in entries {
        c[i][j] = v;
        c[j][i] = v;
    }
    Tensor2 {
        rank: Rank2::Covariant,
        c,
    }
}

fn ricci_with_angle(spec: &ToricMetricSpec, p: (f64, f64), theta: f64, variant: RicciVariant) -> Result<Tensor2<4>> {
    let l = Local::new(&spec.jets(p.0, p.1)?);
    check_positive(&l, p)?;
    let m = l.swapped();
    let (cos, sin) = if theta == FRAC_PI_2 { (0.0, 1.0) } else { (theta.cos(), theta.sin()) };
    let cot = cos / sin;
    let cot2 = cot * cot;
    let (xy_angle, k) = match variant {
        RicciVariant::AsPrinted => (cot, 3.0),
        RicciVariant::Corrected => (cot2, 1.0),
    };
    let ric_xy = 2.0 * l.qxy / l.q + l.a1 * l.b1 * xy_angle / (8.0 * l.a * l.b);
    let sq = (l.a * l.b).sqrt();
    let ric_st = -sq * cos
        * ((l.a2 + l.b2) / 4.0
            - (3.0 * (l.qx * l.a1 + l.qy * l.b1) + 2.0 * (l.qxx * l.a + l.qyy * l.b)) / (2.0 * l.q)
            + 3.0 * (l.qx * l.qx * l.a + l.qy * l.qy * l.b) / (l.q * l.q))
        + (l.b * l.a1 * l.a1 + l.a * l.b1 * l.b1) * cos / (8.0 * sq * sin * sin);
    Ok(symmetric(&[
        ((0, 0), l.ric_xx(cot2)),
        ((1, 1), m.ric_xx(cot2)),
        ((2, 2), l.ric_ss(cot2, k)),
        ((3, 3), m.ric_ss(cot2, k)),
        ((0, 1), ric_xy),
        ((2, 3), ric_st),
    ]))
}

/// Ricci tensor of the constant-angle metric from its component formulas;
/// requires `0 < θ < π/2`.
pub fn closed_form_ricci_nonaxisym(spec: &ToricMetricSpec, p: (f64, f64), variant: RicciVariant) -> Result<Tensor2<4>> {
    if spec.is_axisymmetric() {
        return Err(Error::Parameter(
            "theta = pi/2: use the axisymmetric closed form".into(),
        ));
    }
    ricci_with_angle(spec, p, spec.theta, variant)
}

/// Ricci tensor of the diagonal metric from its component formulas.
pub fn closed_form_ricci_axisym(spec: &ToricMetricSpec, p: (f64, f64), variant: RicciVariant) -> Result<Tensor2<4>> {
    if !spec.is_axisymmetric() {
        return Err(Error::Parameter(format!(
            "axisymmetric closed form needs theta = pi/2, got {}",
            spec.theta
        )));
    }
    ricci_with_angle(spec, p, FRAC_PI_2, variant)
}

/// Lie derivative of the toric metric along a base field `V`, from the
/// component formulas. `v` holds the jets of `Vˣ`, `Vʸ`.
pub fn closed_form_lie(spec: &ToricMetricSpec, v: &[crate::jet::Jet2; 2], p: (f64, f64)) -> Result<Tensor2<4>> {
    let l = Local::new(&spec.jets(p.0, p.1)?);
    check_positive(&l, p)?;
    let (vx, vy) = (v[0].value, v[1].value);
    let (q2, q3) = (l.q * l.q, l.q * l.q * l.q);
    let transport = vx * l.qx + vy * l.qy;
    let xx = (2.0 * v[0].d10 * l.a - vx * l.a1) / (q2 * l.a * l.a) - 2.0 * transport / (q3 * l.a);
    let yy = (2.0 * v[1].d01 * l.b - vy * l.b1) / (q2 * l.b * l.b) - 2.0 * transport / (q3 * l.b);
    let xy = (v[1].d10 * l.a + v[0].d01 * l.b) / (q2 * l.a * l.b);
    let ss = vx * l.a1 / q2 - 2.0 * l.a * transport / q3;
    let tt = vy * l.b1 / q2 - 2.0 * l.b * transport / q3;
    let st = spec.cos_theta() / (l.a * l.b).sqrt()
        * ((vx * l.a1 * l.b + vy * l.b1 * l.a) / (2.0 * q2) - 2.0 * l.a * l.b * transport / q3);
    Ok(symmetric(&[
        ((0, 0), xx),
        ((1, 1), yy),
        ((2, 2), ss),
        ((3, 3), tt),
        ((0, 1), xy),
        ((2, 3), st),
    ]))
}
