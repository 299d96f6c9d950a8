//! The third-order ODE for the profile `f(z)` of the conformally
//! cylindrical family `q = y f(x/y)`, `A = a₀ − x²`, `B = b₀ + y²`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Box2;
use crate::jet::{Jet2, JetError};
use crate::profile::Profile1;
use crate::zoo::CaseIVParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeParamsIV {
    pub a0: f64,
    pub b0: f64,
    pub lambda: f64,
    #[serde(default)]
    pub form: OdeForm,
}

impl OdeParamsIV {
    pub fn new(a0: f64, b0: f64, lambda: f64) -> Self {
        OdeParamsIV {
            a0,
            b0,
            lambda,
            form: OdeForm::default(),
        }
    }

    pub fn with_form(self, form: OdeForm) -> Self {
        OdeParamsIV { form, ..self }
    }
}

/// Which version of the ODE to integrate.
///
/// `AsPrinted` is [`ode_iv_residual`] verbatim. Its solutions generally do
/// not give solitons: eliminating `Sˣ = y·P(x/y)` from the reduced system
/// yields the printed equation plus `−b₀ z f² f'' (b₀ z f − (a₀ + b₀z²) f')`,
/// which is what `Consistent` adds. Both agree on the constant and linear
/// solutions and share the `f'''` coefficient.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeForm {
    AsPrinted,
    #[default]
    Consistent,
}

/// `(z, f, f', f'')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeStateIV {
    pub z: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
}

/// Below this magnitude the `f'''` coefficient is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-8;

/// The ODE's right-hand side, evaluated term by term:
///
/// ```text
/// −3(a₀f'² + b₀(f − zf')²)² − λ(a₀f'² + b₀(f − zf')²)
///   + (4a₀ − b₀z²) b₀ f³ f'' + (a₀ + b₀z²)² f f'' (f'² − f f'') + λ(a₀ + b₀z²) f f''
///   − (a₀ + b₀z²)(b₀ z f − (a₀ + b₀z²) f') f² f'''
/// ```
pub fn ode_iv_residual(p: &OdeParamsIV, z: f64, f: f64, f1: f64, f2: f64, f3: f64) -> f64 {
    let OdeParamsIV { a0, b0, lambda, .. } = *p;
    let m = f - z * f1;
    let k = a0 * f1 * f1 + b0 * m * m;
    let s = a0 + b0 * z * z;
    -3.0 * k * k - lambda * k + (4.0 * a0 - b0 * z * z) * b0 * f.powi(3) * f2 + s * s * f * f2 * (f1 * f1 - f * f2)
        + lambda * s * f * f2
        - s * (b0 * z * f - s * f1) * f * f * f3
}

/// [`ode_iv_residual`] plus the term that makes it the compatibility
/// condition of the reduced soliton system.
pub fn ode_iv_residual_consistent(p: &OdeParamsIV, z: f64, f: f64, f1: f64, f2: f64, f3: f64) -> f64 {
    let d = p.b0 * z * f - (p.a0 + p.b0 * z * z) * f1;
    ode_iv_residual(p, z, f, f1, f2, f3) - p.b0 * z * f * f * f2 * d
}

/// The residual of the form selected by `p.form`.
pub fn ode_residual(p: &OdeParamsIV, z: f64, f: f64, f1: f64, f2: f64, f3: f64) -> f64 {
    match p.form {
        OdeForm::AsPrinted => ode_iv_residual(p, z, f, f1, f2, f3),
        OdeForm::Consistent => ode_iv_residual_consistent(p, z, f, f1, f2, f3),
    }
}

/// Coefficient of `f'''`, the same in both forms.
pub fn f3_coefficient(p: &OdeParamsIV, z: f64, f: f64, f1: f64) -> f64 {
    let s = p.a0 + p.b0 * z * z;
    -s * (p.b0 * z * f - s * f1) * f * f
}

/// Solves the selected form for `f'''`.
pub fn ode_iv_rhs(p: &OdeParamsIV, st: &OdeStateIV) -> Result<f64> {
    let c3 = f3_coefficient(p, st.z, st.f, st.f1);
    if !(c3.abs() > SINGULAR_TOL) {
        return Err(Error::Singularity {
            z: st.z,
            coefficient: c3,
        });
    }
    let r0 = ode_residual(p, st.z, st.f, st.f1, st.f2, 0.0);
    Ok(-r0 / c3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Local error target per unit of `z`.
    pub tol: f64,
    /// `Some(h)` switches to fixed steps of size `h`.
    pub fixed_step: Option<f64>,
    pub initial_step: f64,
    /// Cap on adaptive steps; keeps dense output accurate enough for curvature.
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            tol: 1e-10,
            fixed_step: None,
            initial_step: 1e-3,
            max_step: 5e-3,
            min_step: 1e-12,
        }
    }
}

/// Why integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    Singular { z: f64, coefficient: f64 },
    NonPositive { z: f64, f: f64 },
    StepUnderflow { z: f64, step: f64 },
}

/// A stored node: state plus `f'''`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeNode {
    pub z: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryIV {
    pub params: OdeParamsIV,
    pub nodes: Vec<OdeNode>,
    pub termination: Termination,
}

type Y = [f64; 3];

fn deriv(p: &OdeParamsIV, z: f64, y: &Y) -> Result<Y> {
    let f3 = ode_iv_rhs(
        p,
        &OdeStateIV {
            z,
            f: y[0],
            f1: y[1],
            f2: y[2],
        },
    )?;
    Ok([y[1], y[2], f3])
}

fn axpy(y: &Y, h: f64, k: &Y) -> Y {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

fn rk4_step(p: &OdeParamsIV, z: f64, y: &Y, h: f64) -> Result<Y> {
    let k1 = deriv(p, z, y)?;
    let k2 = deriv(p, z + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = deriv(p, z + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = deriv(p, z + h, &axpy(y, h, &k3))?;
    Ok([
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ])
}

/// Classical RK4 from `init` to `z_end` (either direction).
///
/// Adaptive mode compares one step with two half steps and keeps the
/// two-half-step result, so the method stays plain fourth-order RK.
/// A singular coefficient or `f <= 0` ends integration early; the
/// trajectory up to that point is returned with the reason.
pub fn integrate_iv(p: &OdeParamsIV, init: &OdeStateIV, z_end: f64, cfg: &IntegratorConfig) -> Result<TrajectoryIV> {
    let y0 = [init.f, init.f1, init.f2];
    let f3 = ode_iv_rhs(p, init)?;
    if !(init.f > 0.0) {
        return Err(Error::Parameter(format!("initial f must be positive, got {}", init.f)));
    }
    if !(cfg.tol > 0.0) || cfg.fixed_step.is_some_and(|h| !(h > 0.0)) {
        return Err(Error::Parameter("integrator tolerance and step must be positive".into()));
    }
    let mut nodes = vec![OdeNode {
        z: init.z,
        f: y0[0],
        f1: y0[1],
        f2: y0[2],
        f3,
    }];
    let dir = if z_end >= init.z { 1.0 } else { -1.0 };
    let (mut z, mut y) = (init.z, y0);
    let mut h = cfg.fixed_step.unwrap_or(cfg.initial_step.min(cfg.max_step));
    let mut termination = Termination::Completed;
    while dir * (z_end - z) > 0.0 {
        let remaining = (z_end - z).abs();
        // Absorb a sliver of leftover interval into the current step.
        let hs = if remaining <= h * (1.0 + 1e-6) { remaining } else { h };
        let attempt = match cfg.fixed_step {
            Some(_) => rk4_step(p, z, &y, dir * hs).map(|y1| (y1, true, hs)),
            None => adaptive_attempt(p, z, &y, dir * hs, cfg.tol).map(|(y1, ok, err_ratio)| {
                // Standard step controller for a fourth-order error estimate.
                let factor = if err_ratio == 0.0 { 2.0 } else { (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 2.0) };
                h = (hs * factor).min(cfg.max_step);
                (y1, ok, hs)
            }),
        };
        match attempt {
            Err(Error::Singularity { z: zs, coefficient }) => {
                termination = Termination::Singular { z: zs, coefficient };
                break;
            }
            Err(e) => return Err(e),
            Ok((y1, accepted, step)) => {
                if !accepted {
                    if h < cfg.min_step {
                        termination = Termination::StepUnderflow { z, step: h };
                        break;
                    }
                    continue;
                }
                let z1 = if step == remaining { z_end } else { z + dir * step };
                if !(y1[0] > 0.0) {
                    termination = Termination::NonPositive { z: z1, f: y1[0] };
                    break;
                }
                let f3 = match deriv(p, z1, &y1) {
                    Ok(d) => d[2],
                    Err(Error::Singularity { z: zs, coefficient }) => {
                        termination = Termination::Singular { z: zs, coefficient };
                        break;
                    }
                    Err(e) => return Err(e),
                };
                z = z1;
                y = y1;
                nodes.push(OdeNode {
                    z,
                    f: y[0],
                    f1: y[1],
                    f2: y[2],
                    f3,
                });
            }
        }
    }
    Ok(TrajectoryIV {
        params: *p,
        nodes,
        termination,
    })
}

/// Returns the two-half-step result, whether it is accepted, and the ratio
/// of the error estimate to its allowance.
fn adaptive_attempt(p: &OdeParamsIV, z: f64, y: &Y, h: f64, tol: f64) -> Result<(Y, bool, f64)> {
    let full = rk4_step(p, z, y, h)?;
    let half = rk4_step(p, z, y, 0.5 * h)?;
    let two = rk4_step(p, z + 0.5 * h, &half, 0.5 * h)?;
    let err = (0..3)
        .map(|i| (two[i] - full[i]).abs() / 15.0)
        .fold(0.0f64, f64::max);
    let allowance = tol * h.abs();
    let ratio = err / allowance;
    Ok((two, ratio <= 1.0, ratio))
}

impl TrajectoryIV {
    pub fn is_complete(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn z_range(&self) -> (f64, f64) {
        let a = self.nodes.first().map_or(0.0, |n| n.z);
        let b = self.nodes.last().map_or(0.0, |n| n.z);
        (a.min(b), a.max(b))
    }

    pub fn end(&self) -> &OdeNode {
        self.nodes.last().expect("trajectory has at least one node")
    }

    fn segment(&self, z: f64) -> Option<(usize, f64)> {
        let n = self.nodes.len();
        if n < 2 {
            return (n == 1 && z == self.nodes[0].z).then_some((0, 0.0));
        }
        let (lo, hi) = self.z_range();
        if !(z >= lo && z <= hi) {
            return None;
        }
        let ascending = self.nodes[1].z > self.nodes[0].z;
        // Index of the first node past z in the direction of travel.
        let k = self.nodes.partition_point(|node| if ascending { node.z <= z } else { node.z >= z });
        let i = k.clamp(1, n - 1) - 1;
        let (a, b) = (self.nodes[i].z, self.nodes[i + 1].z);
        Some((i, (z - a) / (b - a)))
    }

    /// `[f, f', f'', f''']` at `z` from the quintic Hermite interpolant of
    /// `(f, f', f'')` at the nodes. The interpolant is C² and its derivatives
    /// are exact, so the four entries form the jet of a single function.
    pub fn sample(&self, z: f64) -> Option<[f64; 4]> {
        let (i, u) = self.segment(z)?;
        if self.nodes.len() == 1 {
            let n = self.nodes[0];
            return Some([n.f, n.f1, n.f2, n.f3]);
        }
        let (mut a, mut b) = (self.nodes[i], self.nodes[i + 1]);
        let mut u = u;
        // Expand about the nearer node; cancellation near u = 1 otherwise
        // costs digits in the higher derivatives.
        if u > 0.5 {
            std::mem::swap(&mut a, &mut b);
            u = 1.0 - u;
        }
        let h = b.z - a.z;
        let weights = [a.f, h * a.f1, h * h * a.f2, b.f, h * b.f1, h * h * b.f2];
        let mut c = [0.0; 6];
        for (w, basis) in weights.iter().zip(&QUINTIC_HERMITE) {
            for (ck, bk) in c.iter_mut().zip(basis) {
                *ck += w * bk;
            }
        }
        let mut out = [0.0; 4];
        let mut scale = 1.0;
        for (order, slot) in out.iter_mut().enumerate() {
            // Horner on the order-th derivative of Σ c_k u^k.
            let mut acc = 0.0;
            for k in (order..6).rev() {
                let falling: f64 = (0..order).map(|j| (k - j) as f64).product();
                acc = acc * u + falling * c[k];
            }
            *slot = acc / scale;
            scale *= h;
        }
        Some(out)
    }
}

/// Quintic Hermite basis on `[0, 1]`, coefficients of `u⁰ … u⁵`, for the
/// weights `f_a, h f'_a, h² f''_a, f_b, h f'_b, h² f''_b`.
const QUINTIC_HERMITE: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
    [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
    [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
    [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
    [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
    [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
];

/// A trajectory used as the profile `f(z)`.
#[derive(Debug, Clone)]
pub struct TrajectoryProfile(pub Arc<TrajectoryIV>);

impl Profile1 for TrajectoryProfile {
    fn eval_jet(&self, t: &Jet2) -> Result<Jet2, JetError> {
        let d = self.0.sample(t.value).ok_or(JetError::Domain {
            func: "trajectory",
            value: t.value,
        })?;
        Ok(t.chain(d))
    }
}

/// The case-(iv) data whose `f` interpolates `traj`; every `x/y` of
/// `window` must lie in the trajectory's range with `f > 0` there.
pub fn metric_from_trajectory(traj: Arc<TrajectoryIV>, a0: f64, b0: f64, window: &Box2) -> Result<CaseIVParams> {
    if !(window.y0 > 0.0) {
        return Err(Error::Parameter(format!("window needs y > 0, got {window}")));
    }
    let zs = [
        window.x0 / window.y0,
        window.x0 / window.y1,
        window.x1 / window.y0,
        window.x1 / window.y1,
    ];
    let zmin = zs.iter().cloned().fold(f64::INFINITY, f64::min);
    let zmax = zs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = traj.z_range();
    if zmin < lo || zmax > hi {
        return Err(Error::Parameter(format!(
            "window needs z in [{zmin}, {zmax}] but the trajectory covers [{lo}, {hi}]"
        )));
    }
    if let Some(bad) = traj.nodes.iter().find(|n| n.z >= zmin && n.z <= zmax && !(n.f > 0.0)) {
        return Err(Error::NonPositive {
            what: "f",
            x: bad.z,
            y: 1.0,
            value: bad.f,
        });
    }
    let lambda = traj.params.lambda;
    Ok(CaseIVParams {
        a0,
        b0,
        f: Arc::new(TrajectoryProfile(traj)),
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_have_zero_residual() {
        let p = OdeParamsIV::new(4.0, 1.0, -12.0);
        assert_eq!(ode_iv_residual(&p, 1.3, 2.0, 0.0, 0.0, 0.0), 0.0);
        let p = OdeParamsIV::new(2.0, 0.7, -6.0);
        assert_eq!(ode_iv_residual(&p, 0.6, 0.6, 1.0, 0.0, 0.0), 0.0);
        let st = OdeStateIV {
            z: 0.6,
            f: 0.6,
            f1: 1.0,
            f2: 0.0,
        };
        assert_eq!(ode_iv_rhs(&p, &st).unwrap(), 0.0);
    }

    #[test]
    fn rhs_solves_residual() {
        let p = OdeParamsIV::new(1.5, 0.4, -0.7);
        let st = OdeStateIV {
            z: 0.3,
            f: 1.2,
            f1: 0.3,
            f2: -0.2,
        };
        let f3 = ode_iv_rhs(&p, &st).unwrap();
        assert!(ode_residual(&p, st.z, st.f, st.f1, st.f2, f3).abs() < 1e-12);
        let printed = p.with_form(OdeForm::AsPrinted);
        let f3 = ode_iv_rhs(&printed, &st).unwrap();
        assert!(ode_iv_residual(&printed, st.z, st.f, st.f1, st.f2, f3).abs() < 1e-12);
    }

    #[test]
    fn singular_locus() {
        // b₀zf = (a₀ + b₀z²)f' makes the coefficient vanish.
        let p = OdeParamsIV::new(1.0, 1.0, 0.0);
        let st = OdeStateIV {
            z: 1.0,
            f: 2.0,
            f1: 1.0,
            f2: 0.0,
        };
        assert!(matches!(ode_iv_rhs(&p, &st), Err(Error::Singularity { .. })));
    }

    #[test]
    fn constant_solution_is_kept() {
        let p = OdeParamsIV::new(4.0, 1.0, -12.0);
        let init = OdeStateIV {
            z: 1.0,
            f: 2.0,
            f1: 0.0,
            f2: 0.0,
        };
        let t = integrate_iv(&p, &init, 2.0, &IntegratorConfig::default()).unwrap();
        assert!(t.is_complete());
        assert!(t.nodes.iter().all(|n| (n.f - 2.0).abs() < 1e-8));
        assert_eq!(t.end().z, 2.0);
        let back = integrate_iv(&p, &init, 0.5, &IntegratorConfig::default()).unwrap();
        assert_eq!(back.end().z, 0.5);
        assert!(back.sample(0.77).is_some() && back.sample(1.2).is_none());
    }

    #[test]
    fn hermite_reproduces_nodes() {
        let p = OdeParamsIV::new(4.0, 1.0, -12.0);
        let init = OdeStateIV {
            z: 1.0,
            f: 2.0,
            f1: 0.01,
            f2: 0.0,
        };
        let t = integrate_iv(&p, &init, 1.2, &IntegratorConfig::default()).unwrap();
        for n in &t.nodes {
            let [f, f1, f2, f3] = t.sample(n.z).unwrap();
            assert!((f - n.f).abs() < 1e-14 && (f1 - n.f1).abs() < 1e-12 && (f2 - n.f2).abs() < 1e-10, "{:e} {:e} {:e}", f - n.f, f1 - n.f1, f2 - n.f2);
            // The interpolant's f''' is its own derivative, not the solved value.
            assert!((f3 - n.f3).abs() < 1e-2 * n.f3.abs().max(1.0), "{f3} vs {}", n.f3);
        }
    }

    #[test]
    fn window_checks() {
        let p = OdeParamsIV::new(4.0, 1.0, -12.0);
        let init = OdeStateIV {
            z: 0.8,
            f: 2.0,
            f1: 0.0,
            f2: 0.0,
        };
        let t = Arc::new(integrate_iv(&p, &init, 1.2, &IntegratorConfig::default()).unwrap());
        let ok = Box2::new(0.9, 1.1, 0.95, 1.05).unwrap();
        assert!(metric_from_trajectory(t.clone(), 4.0, 1.0, &ok).is_ok());
        let wide = Box2::new(0.5, 1.1, 0.95, 1.05).unwrap();
        assert!(metric_from_trajectory(t, 4.0, 1.0, &wide).is_err());
    }

    fn generic() -> (OdeParamsIV, OdeStateIV) {
        (
            OdeParamsIV::new(4.0, 1.0, -12.0),
            OdeStateIV {
                z: 1.0,
                f: 2.001,
                f1: 0.001,
                f2: 0.001,
            },
        )
    }

    #[test]
    fn refinement_changes_endpoint_little() {
        let (p, init) = generic();
        let cfg = IntegratorConfig::default();
        let a = integrate_iv(&p, &init, 2.0, &cfg).unwrap();
        let b = integrate_iv(&p, &init, 2.0, &IntegratorConfig { tol: cfg.tol / 2.0, ..cfg }).unwrap();
        assert!((a.end().f - b.end().f).abs() < 1e-7);
    }

    #[test]
    fn fixed_step_order_is_four() {
        let (p, init) = generic();
        let ends: Vec<f64> = [0.1, 0.05, 0.025, 0.0125, 0.00625]
            .iter()
            .map(|&h| {
                let cfg = IntegratorConfig {
                    fixed_step: Some(h),
                    ..Default::default()
                };
                integrate_iv(&p, &init, 2.0, &cfg).unwrap().end().f2
            })
            .collect();
        for w in ends.windows(3) {
            let order = ((w[0] - w[1]) / (w[1] - w[2])).abs().log2();
            assert!((order - 4.0).abs() < 0.3, "{order}");
        }
    }
}
