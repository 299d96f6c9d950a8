//! Shared generators for the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use toric_core::expr::{compile_expression, compile_profile};
use toric_core::field::ScalarField2;
use toric_core::grid::Box2;
use toric_core::tensor::BaseVectorField;
use toric_core::zoo::ToricMetricSpec;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The base square every random spec is positive on.
pub fn unit_window() -> Box2 {
    Box2::new(0.5, 1.5, 0.5, 1.5).unwrap()
}

/// Sample window for points whose difference stencils must stay inside
/// [`unit_window`].
pub fn inner_window() -> Box2 {
    Box2::new(0.51, 1.49, 0.51, 1.49).unwrap()
}

pub fn random_point(rng: &mut TestRng, d: &Box2) -> (f64, f64) {
    (rng.random_range(d.x0..d.x1), rng.random_range(d.y0..d.y1))
}

fn num(rng: &mut TestRng, lo: f64, hi: f64) -> String {
    format!("{:.4}", rng.random_range(lo..hi))
}

/// A random expression in `x`, `y` that is smooth and moderate in size near
/// `[0.5, 1.5]²`. Every function of the grammar appears, with its argument
/// wrapped so that it stays inside the function's smooth domain.
pub fn random_expression(rng: &mut TestRng, depth: u32) -> String {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..3) {
            0 => "x".into(),
            1 => "y".into(),
            _ => num(rng, -2.0, 2.0),
        };
    }
    let mut sub = || random_expression(rng, depth - 1);
    let (a, b) = (sub(), sub());
    match rng.random_range(0..16) {
        0 => format!("({a} + {b})"),
        1 => format!("({a} - {b})"),
        2 | 3 => format!("({a} * {b})"),
        4 => format!("({a} / (1.5 + ({b})^2))"),
        5 => format!("({a})^{}", rng.random_range(2..4)),
        6 => format!("(1 + ({a})^2)^{}", num(rng, -1.5, 1.5)),
        7 => format!("sin({a})"),
        8 => format!("cos({a})"),
        9 => format!("tan(0.5 * tanh({a}))"),
        10 => format!("sinh(0.5 * tanh({a}))"),
        11 => format!("cosh(tanh({a}))"),
        12 => format!("tanh({a})"),
        13 => format!("exp(0.5 * tanh({a}))"),
        14 => format!("log(1 + ({a})^2)"),
        _ => match rng.random_range(0..2) {
            0 => format!("sqrt(1 + ({a})^2)"),
            _ => format!("abs(2 + tanh({a}))"),
        },
    }
}

/// Random expression whose jet at `p` stays below `bound` in every entry, so
/// that central differences are well conditioned there.
pub fn tame_expression(rng: &mut TestRng, p: (f64, f64), bound: f64) -> String {
    loop {
        let src = random_expression(rng, 4);
        let jet = compile_expression(&src).unwrap().eval(p.0, p.1);
        if let Ok(j) = jet {
            if j.to_array().iter().all(|v| v.is_finite() && v.abs() < bound) {
                return src;
            }
        }
    }
}

/// Sources of a random spec, kept for failure messages.
#[derive(Debug, Clone)]
pub struct SpecSource {
    pub q: String,
    pub a: String,
    pub b: String,
    pub theta: f64,
}

impl SpecSource {
    pub fn build(&self) -> ToricMetricSpec {
        ToricMetricSpec::new(
            Arc::new(compile_expression(&self.q).unwrap()),
            Arc::new(compile_profile(&self.a).unwrap()),
            Arc::new(compile_profile(&self.b).unwrap()),
            self.theta,
        )
        .unwrap()
    }
}

/// `q` positive on the window: a dominant constant plus small polynomial and
/// trigonometric terms.
pub fn random_q(rng: &mut TestRng) -> String {
    format!(
        "{} + {}*x + {}*y + {}*x*y + {}*x^2 + {}*y^2 + {}*sin(x - y)",
        num(rng, 1.0, 2.0),
        num(rng, 0.0, 0.5),
        num(rng, 0.0, 0.5),
        num(rng, -0.1, 0.1),
        num(rng, -0.1, 0.1),
        num(rng, -0.1, 0.1),
        num(rng, -0.1, 0.1),
    )
}

/// A profile positive on `[0.5, 1.5]`.
pub fn random_profile(rng: &mut TestRng) -> String {
    format!(
        "{} + {}*t + {}*t^2 + {}*exp(-t)",
        num(rng, 1.0, 2.0),
        num(rng, -0.2, 0.2),
        num(rng, -0.2, 0.2),
        num(rng, -0.2, 0.2),
    )
}

pub fn random_theta(rng: &mut TestRng) -> f64 {
    rng.random_range(0.3..1.4)
}

/// Random spec; axisymmetric with probability one half.
pub fn random_spec(rng: &mut TestRng) -> SpecSource {
    let theta = if rng.random_bool(0.5) { FRAC_PI_2 } else { random_theta(rng) };
    SpecSource {
        q: random_q(rng),
        a: random_profile(rng),
        b: random_profile(rng),
        theta,
    }
}

pub fn random_vector_field(rng: &mut TestRng) -> (BaseVectorField, [String; 2]) {
    let mut comp = || {
        format!(
            "{} + {}*x + {}*y + {}*x*y + {}*cos(x + y)",
            num(rng, -1.0, 1.0),
            num(rng, -1.0, 1.0),
            num(rng, -1.0, 1.0),
            num(rng, -0.5, 0.5),
            num(rng, -0.5, 0.5),
        )
    };
    let src = [comp(), comp()];
    let field = BaseVectorField::new(
        Arc::new(compile_expression(&src[0]).unwrap()),
        Arc::new(compile_expression(&src[1]).unwrap()),
    );
    (field, src)
}

/// Entrywise `|a − b| / max(1, |b|)`.
pub fn scaled_diff(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> (f64, (usize, usize)) {
    let mut worst = (0.0, (0, 0));
    for i in 0..4 {
        for j in 0..4 {
            let d = (a[i][j] - b[i][j]).abs() / b[i][j].abs().max(1.0);
            if d > worst.0 {
                worst = (d, (i, j));
            }
        }
    }
    worst
}

pub fn sup_scalar_diff(m: &[[f64; 4]; 4], lambda: f64) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { lambda } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
    }
    worst
}
