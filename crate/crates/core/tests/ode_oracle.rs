//! The profile ODE against an expanded transcription, and the integrator
//! against exact solutions.

mod common;

use common::rng;
use proptest::prelude::*;
use rand::Rng;
use toric_core::ode::{
    f3_coefficient, integrate_iv, ode_iv_residual, ode_iv_residual_consistent, ode_iv_rhs, ode_residual,
    IntegratorConfig, OdeForm, OdeParamsIV, OdeStateIV, SINGULAR_TOL,
};

/// Monomials `c · a₀^i b₀^j λ^k z^l f^m f'^n f''^o f'''^p` of the fully
/// expanded printed equation.
const PRINTED: [(f64, [i32; 8]); 28] = [
    (1.0, [2, 0, 0, 0, 2, 1, 0, 1]),
    (-1.0, [2, 0, 0, 0, 2, 0, 2, 0]),
    (1.0, [2, 0, 0, 0, 1, 2, 1, 0]),
    (-3.0, [2, 0, 0, 0, 0, 4, 0, 0]),
    (2.0, [1, 1, 0, 2, 2, 1, 0, 1]),
    (-2.0, [1, 1, 0, 2, 2, 0, 2, 0]),
    (2.0, [1, 1, 0, 2, 1, 2, 1, 0]),
    (-6.0, [1, 1, 0, 2, 0, 4, 0, 0]),
    (-1.0, [1, 1, 0, 1, 3, 0, 0, 1]),
    (12.0, [1, 1, 0, 1, 1, 3, 0, 0]),
    (4.0, [1, 1, 0, 0, 3, 0, 1, 0]),
    (-6.0, [1, 1, 0, 0, 2, 2, 0, 0]),
    (1.0, [1, 0, 1, 0, 1, 0, 1, 0]),
    (-1.0, [1, 0, 1, 0, 0, 2, 0, 0]),
    (1.0, [0, 2, 0, 4, 2, 1, 0, 1]),
    (-1.0, [0, 2, 0, 4, 2, 0, 2, 0]),
    (1.0, [0, 2, 0, 4, 1, 2, 1, 0]),
    (-3.0, [0, 2, 0, 4, 0, 4, 0, 0]),
    (-1.0, [0, 2, 0, 3, 3, 0, 0, 1]),
    (12.0, [0, 2, 0, 3, 1, 3, 0, 0]),
    (-1.0, [0, 2, 0, 2, 3, 0, 1, 0]),
    (-18.0, [0, 2, 0, 2, 2, 2, 0, 0]),
    (12.0, [0, 2, 0, 1, 3, 1, 0, 0]),
    (-3.0, [0, 2, 0, 0, 4, 0, 0, 0]),
    (1.0, [0, 1, 1, 2, 1, 0, 1, 0]),
    (-1.0, [0, 1, 1, 2, 0, 2, 0, 0]),
    (2.0, [0, 1, 1, 1, 1, 1, 0, 0]),
    (-1.0, [0, 1, 1, 0, 2, 0, 0, 0]),
];

/// Monomials by which the consistent form differs from the printed one.
const CONSISTENT_EXTRA: [(f64, [i32; 8]); 3] = [
    (1.0, [1, 1, 0, 1, 2, 1, 1, 0]),
    (1.0, [0, 2, 0, 3, 2, 1, 1, 0]),
    (-1.0, [0, 2, 0, 2, 3, 0, 1, 0]),
];

fn expanded(table: &[(f64, [i32; 8])], vars: [f64; 8]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut scale = 0.0f64;
    for (c, e) in table {
        let term = c * vars.iter().zip(e).map(|(v, k)| v.powi(*k)).product::<f64>();
        sum += term;
        scale = scale.max(term.abs());
    }
    (sum, scale)
}

fn arb_args() -> impl Strategy<Value = [f64; 8]> {
    (0.1f64..5.0, 0.1f64..5.0, -20.0f64..5.0, -2.0f64..2.0, 0.1f64..3.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
        .prop_map(|(a, b, l, z, f, f1, f2, f3)| [a, b, l, z, f, f1, f2, f3])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn printed_residual_matches_expanded_transcription(v in arb_args()) {
        let p = OdeParamsIV::new(v[0], v[1], v[2]);
        let got = ode_iv_residual(&p, v[3], v[4], v[5], v[6], v[7]);
        let (want, scale) = expanded(&PRINTED, v);
        prop_assert!((got - want).abs() <= 1e-12 * scale.max(1.0), "{got} vs {want}");
    }

    #[test]
    fn consistent_residual_matches_expanded_transcription(v in arb_args()) {
        let p = OdeParamsIV::new(v[0], v[1], v[2]);
        let got = ode_iv_residual_consistent(&p, v[3], v[4], v[5], v[6], v[7]);
        let all: Vec<_> = PRINTED.iter().chain(&CONSISTENT_EXTRA).cloned().collect();
        let (want, scale) = expanded(&all, v);
        prop_assert!((got - want).abs() <= 1e-12 * scale.max(1.0), "{got} vs {want}");
    }

    #[test]
    fn third_derivative_coefficient_matches_expansion(v in arb_args()) {
        let p = OdeParamsIV::new(v[0], v[1], v[2]);
        let mut unit = v;
        unit[7] = 1.0;
        let mut none = v;
        none[7] = 0.0;
        let all: Vec<_> = PRINTED.iter().chain(&CONSISTENT_EXTRA).cloned().collect();
        for table in [&PRINTED[..], &all[..]] {
            let (with, scale) = expanded(table, unit);
            let (without, _) = expanded(table, none);
            let c3 = f3_coefficient(&p, v[3], v[4], v[5]);
            prop_assert!((with - without - c3).abs() <= 1e-12 * scale.max(1.0));
        }
    }
}

#[test]
fn solved_third_derivative_zeroes_the_residual_for_random_states() {
    let mut r = rng(7);
    let mut checked = 0;
    while checked < 1000 {
        let p = OdeParamsIV::new(r.random_range(0.1..5.0), r.random_range(0.1..5.0), r.random_range(-20.0..5.0));
        let st = OdeStateIV {
            z: r.random_range(-2.0..2.0),
            f: r.random_range(0.1..3.0),
            f1: r.random_range(-2.0..2.0),
            f2: r.random_range(-2.0..2.0),
        };
        if f3_coefficient(&p, st.z, st.f, st.f1).abs() <= 1e3 * SINGULAR_TOL {
            continue;
        }
        for form in [OdeForm::AsPrinted, OdeForm::Consistent] {
            let p = p.with_form(form);
            let f3 = ode_iv_rhs(&p, &st).unwrap();
            let all: Vec<_> = PRINTED.iter().chain(&CONSISTENT_EXTRA).cloned().collect();
            let table = if form == OdeForm::AsPrinted { &PRINTED[..] } else { &all[..] };
            let (_, scale) = expanded(table, [p.a0, p.b0, p.lambda, st.z, st.f, st.f1, st.f2, f3]);
            let res = ode_residual(&p, st.z, st.f, st.f1, st.f2, f3);
            assert!(res.abs() <= 1e-12 * scale.max(1.0), "{p:?} {st:?}: {res:e}");
        }
        checked += 1;
    }
}

#[test]
fn singular_locus_is_reported() {
    // b₀zf = (a₀ + b₀z²)f' makes the f''' coefficient vanish.
    let p = OdeParamsIV::new(2.0, 1.0, -6.0);
    let (z, f) = (1.0, 1.5);
    let st = OdeStateIV {
        z,
        f,
        f1: z * f / 3.0,
        f2: 0.2,
    };
    assert!(ode_iv_rhs(&p, &st).is_err());
}

#[test]
fn exact_solutions_survive_integration_in_both_forms() {
    let cases = [
        // f = 2, λ = −3b₀f².
        (OdeParamsIV::new(4.0, 1.0, -12.0), OdeStateIV { z: 0.5, f: 2.0, f1: 0.0, f2: 0.0 }, (|_| (2.0, 0.0)) as fn(f64) -> (f64, f64)),
        // f = z, λ = −3a₀.
        (OdeParamsIV::new(2.0, 0.7, -6.0), OdeStateIV { z: 0.5, f: 0.5, f1: 1.0, f2: 0.0 }, |z: f64| (z, 1.0)),
    ];
    for (p, init, exact) in cases {
        for form in [OdeForm::AsPrinted, OdeForm::Consistent] {
            let p = p.with_form(form);
            let t = integrate_iv(&p, &init, init.z + 1.0, &IntegratorConfig::default()).unwrap();
            assert!(t.is_complete(), "{:?}", t.termination);
            for n in &t.nodes {
                let (f, f1) = exact(n.z);
                assert!((n.f - f).abs() <= 1e-8 && (n.f1 - f1).abs() <= 1e-8 && n.f2.abs() <= 1e-8, "{n:?}");
            }
        }
    }
}

#[test]
fn integrating_back_returns_to_the_start() {
    let p = OdeParamsIV::new(4.0, 1.0, -12.0);
    let init = OdeStateIV { z: 0.8, f: 2.0, f1: 0.05, f2: 0.02 };
    let cfg = IntegratorConfig::default();
    let fwd = integrate_iv(&p, &init, 1.2, &cfg).unwrap();
    let e = fwd.end();
    let back = integrate_iv(&p, &OdeStateIV { z: e.z, f: e.f, f1: e.f1, f2: e.f2 }, 0.8, &cfg).unwrap();
    let b = back.end();
    assert!((b.z - 0.8).abs() < 1e-12);
    for (got, want) in [(b.f, init.f), (b.f1, init.f1), (b.f2, init.f2)] {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn adaptive_trajectory_converges_under_refinement() {
    let p = OdeParamsIV::new(4.0, 1.0, -12.0);
    let init = OdeStateIV { z: 0.8, f: 2.0, f1: 0.05, f2: 0.02 };
    let run = |tol: f64| {
        let cfg = IntegratorConfig { tol, ..Default::default() };
        *integrate_iv(&p, &init, 1.2, &cfg).unwrap().end()
    };
    let (coarse, fine) = (run(1e-8), run(1e-12));
    assert!((coarse.f2 - fine.f2).abs() < 1e-7);
}

#[test]
fn trajectory_profile_reproduces_nodes() {
    use std::sync::Arc;
    use toric_core::jet::Jet2;
    use toric_core::ode::TrajectoryProfile;
    use toric_core::profile::Profile1;
    let p = OdeParamsIV::new(4.0, 1.0, -12.0);
    let init = OdeStateIV { z: 0.8, f: 2.0, f1: 0.05, f2: 0.02 };
    let t = Arc::new(integrate_iv(&p, &init, 1.2, &IntegratorConfig::default()).unwrap());
    let prof = TrajectoryProfile(t.clone());
    for n in t.nodes.iter().step_by(7) {
        let j = prof.eval_jet(&Jet2::var_x(n.z)).unwrap();
        assert!((j.value - n.f).abs() < 1e-14);
        assert!((j.d10 - n.f1).abs() < 1e-12);
        assert!((j.d20 - n.f2).abs() < 1e-12);
    }
    assert!(prof.value(1.3).is_err());
}
