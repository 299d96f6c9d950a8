//! The component formulas against the generic curvature engine, and the
//! engine's own identities on random toric metrics.

mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use toric_core::closed_form::{closed_form_lie, closed_form_ricci_axisym, closed_form_ricci_nonaxisym, RicciVariant};
use toric_core::soliton::{lambda_st_vanishing, rigidity_obstruction};
use toric_core::tensor::{contracted_bianchi_defect, BaseVectorField, Geometry, BIANCHI_STEP};
use toric_core::zoo::{build_general, ToricMetricSpec};

fn closed_ricci(spec: &ToricMetricSpec, p: (f64, f64), v: RicciVariant) -> [[f64; 4]; 4] {
    if spec.is_axisymmetric() {
        closed_form_ricci_axisym(spec, p, v).unwrap().c
    } else {
        closed_form_ricci_nonaxisym(spec, p, v).unwrap().c
    }
}

fn setup(seed: u64) -> (SpecSource, ToricMetricSpec, (f64, f64), TestRng) {
    let mut r = rng(seed);
    let src = random_spec(&mut r);
    let spec = src.build();
    let p = random_point(&mut r, &inner_window());
    (src, spec, p, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn corrected_ricci_formulas_match_the_engine(seed in any::<u64>()) {
        let (src, spec, p, _) = setup(seed);
        let m = build_general(&spec, unit_window()).unwrap();
        let engine = Geometry::at(&m, p.0, p.1).unwrap().ricci;
        let (d, at) = scaled_diff(&closed_ricci(&spec, p, RicciVariant::Corrected), &engine);
        prop_assert!(d <= 1e-9, "{src:?} at {p:?}: component {at:?} off by {d:e}");
    }

    #[test]
    fn printed_ricci_formulas_differ_only_in_ss_tt_and_xy(seed in any::<u64>()) {
        let (_, spec, p, _) = setup(seed);
        let printed = closed_ricci(&spec, p, RicciVariant::AsPrinted);
        let corrected = closed_ricci(&spec, p, RicciVariant::Corrected);
        for i in 0..4 {
            for j in 0..4 {
                let allowed = matches!((i, j), (2, 2) | (3, 3) | (0, 1) | (1, 0));
                if !allowed {
                    prop_assert_eq!(printed[i][j], corrected[i][j]);
                }
            }
        }
        // The ss entry differs by the q_xx A coefficient (3 against 1).
        let j = spec.jets(p.0, p.1).unwrap();
        let expected = -2.0 * j.a.value * j.a.value * j.q.d20 / j.q.value;
        let diff = corrected[2][2] - printed[2][2];
        prop_assert!((diff - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{diff} vs {expected}");
    }

    #[test]
    fn lie_derivative_formulas_match_the_engine(seed in any::<u64>()) {
        let (src, spec, p, mut r) = setup(seed);
        let (v, vsrc) = random_vector_field(&mut r);
        let m = build_general(&spec, unit_window()).unwrap();
        let jets = v.eval(p.0, p.1).unwrap();
        let engine = Geometry::at(&m, p.0, p.1).unwrap().lie_derivative(&jets);
        let closed = closed_form_lie(&spec, &jets, p).unwrap().c;
        let (d, at) = scaled_diff(&closed, &engine);
        prop_assert!(d <= 1e-9, "{src:?} V={vsrc:?}: component {at:?} off by {d:e}");
    }

    #[test]
    fn obstruction_difference_equals_profile_identity(seed in any::<u64>()) {
        let (src, mut spec, p, mut r) = setup(seed);
        spec.theta = random_theta(&mut r);
        let (v, _) = random_vector_field(&mut r);
        let o = rigidity_obstruction(&spec, &v.eval(p.0, p.1).unwrap(), p).unwrap();
        prop_assert!(o.identity_defect() <= 1e-11, "{src:?}: {o:?}");
    }

    #[test]
    fn off_diagonal_fibre_soliton_entries_are_proportional_to_obstruction(seed in any::<u64>()) {
        let (src, mut spec, p, mut r) = setup(seed);
        spec.theta = random_theta(&mut r);
        let (v, _) = random_vector_field(&mut r);
        let m = build_general(&spec, unit_window()).unwrap();
        let (l_st, l_ts) = lambda_st_vanishing(&m, &v, p).unwrap();
        let o = rigidity_obstruction(&spec, &v.eval(p.0, p.1).unwrap(), p).unwrap();
        let j = spec.jets(p.0, p.1).unwrap();
        let (a, b) = (j.a.value, j.b.value);
        let (c, s2) = (spec.theta.cos(), spec.theta.sin().powi(2));
        let want_st = o.e1 * c * (b / a).sqrt() / (8.0 * a * b * s2);
        let want_ts = -o.e2 * c * (a / b).sqrt() / (8.0 * a * b * s2);
        prop_assert!((l_st - want_st).abs() <= 1e-9 * want_st.abs().max(1.0), "{src:?}: {l_st} vs {want_st}");
        prop_assert!((l_ts - want_ts).abs() <= 1e-9 * want_ts.abs().max(1.0), "{src:?}: {l_ts} vs {want_ts}");
    }

    #[test]
    fn constant_profiles_make_the_fibre_entries_vanish(seed in any::<u64>()) {
        let mut r = rng(seed);
        let src = SpecSource {
            q: random_q(&mut r),
            a: format!("{:.3}", r.random_range(0.5..2.0)),
            b: format!("{:.3}", r.random_range(0.5..2.0)),
            theta: random_theta(&mut r),
        };
        let spec = src.build();
        let (v, _) = random_vector_field(&mut r);
        let p = random_point(&mut r, &unit_window());
        let m = build_general(&spec, unit_window()).unwrap();
        let (l_st, l_ts) = lambda_st_vanishing(&m, &v, p).unwrap();
        prop_assert!(l_st.abs() <= 1e-10 && l_ts.abs() <= 1e-10, "{src:?}: {l_st:e} {l_ts:e}");
    }

    #[test]
    fn engine_identities_hold(seed in any::<u64>()) {
        let (src, spec, p, _) = setup(seed);
        let m = build_general(&spec, unit_window()).unwrap();
        let geo = Geometry::at(&m, p.0, p.1).unwrap();
        let scale = geo.riemann.iter().flatten().flatten().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((geo.ricci[i][j] - geo.ricci[j][i]).abs() <= 1e-12 * scale);
                for k in 0..4 {
                    for l in 0..4 {
                        let r = &geo.riemann;
                        let cyc = r[l][i][j][k] + r[l][j][k][i] + r[l][k][i][j];
                        prop_assert!(cyc.abs() <= 1e-10 * scale, "{src:?}: first Bianchi {cyc:e}");
                        prop_assert_eq!(r[l][i][j][k], -r[l][i][k][j]);
                    }
                }
            }
        }
        let w = geo.weyl();
        for b in 0..4 {
            for d in 0..4 {
                let trace: f64 = (0..4).flat_map(|a| (0..4).map(move |c| (a, c))).map(|(a, c)| geo.ginv[a][c] * w[a][b][c][d]).sum();
                prop_assert!(trace.abs() <= 1e-9 * scale, "{src:?}: Weyl trace {trace:e}");
            }
        }
        let defect = contracted_bianchi_defect(&m, p, BIANCHI_STEP).unwrap();
        prop_assert!(defect <= 1e-5, "{src:?}: contracted Bianchi {defect:e}");
    }

    #[test]
    fn constant_rescaling_scales_lambda_and_weyl(seed in any::<u64>(), c in 0.5f64..2.0) {
        let (src, spec, p, _) = setup(seed);
        let scaled = SpecSource { q: format!("({}) / {c:?}", src.q), ..src.clone() }.build();
        let g1 = Geometry::at(&build_general(&spec, unit_window()).unwrap(), p.0, p.1).unwrap();
        let g2 = Geometry::at(&build_general(&scaled, unit_window()).unwrap(), p.0, p.1).unwrap();
        let zero = BaseVectorField::zero().eval(p.0, p.1).unwrap();
        let (l1, l2) = (g1.lambda(&zero), g2.lambda(&zero));
        let (w1, w2) = (g1.weyl(), g2.weyl());
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((l2[i][j] - l1[i][j] / (c * c)).abs() <= 1e-9 * l1[i][j].abs().max(1.0));
                for k in 0..4 {
                    for l in 0..4 {
                        let want = c * c * w1[i][j][k][l];
                        prop_assert!((w2[i][j][k][l] - want).abs() <= 1e-9 * want.abs().max(1.0));
                    }
                }
            }
        }
    }
}

#[test]
fn non_constant_profile_witness_breaks_fibre_entries() {
    let src = SpecSource {
        q: "1".into(),
        a: "2 + t".into(),
        b: "1".into(),
        theta: std::f64::consts::FRAC_PI_4,
    };
    let m = build_general(&src.build(), unit_window()).unwrap();
    let (l_st, l_ts) = lambda_st_vanishing(&m, &BaseVectorField::zero(), (1.0, 1.0)).unwrap();
    assert!(l_st.abs().max(l_ts.abs()) > 1e-4, "{l_st} {l_ts}");
}
