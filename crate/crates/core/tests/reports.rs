//! End-to-end verification runs from config text to serialized reports.

use toric_core::config::parse_config;
use toric_core::verify::{emit_report, run_verification, write_report, ReportFormat, ResidualReport, Verdict};

fn run(text: &str) -> ResidualReport {
    run_verification(&parse_config(text).unwrap()).unwrap()
}

fn render(report: &ResidualReport, format: ReportFormat) -> Vec<u8> {
    let mut out = Vec::new();
    write_report(report, format, &mut out).unwrap();
    out
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

const HYPERBOLIC: &str = "domain = [0.5, 1.5, 0.5, 1.5]\n[axisymmetric]\nq = \"x\"\nA = \"1\"\nB = \"1\"\n";

const CASE_V: &str = "domain = [0.5, 1.5, 0.5, 1.5]\n[case_v]\nalpha = 1.0\nc = 0.5\nk1 = 0.1\nk2 = 1.0\n";

#[test]
fn hyperbolic_space_passes_with_lambda_minus_three() {
    let r = run(HYPERBOLIC);
    assert_eq!(r.verdict, Verdict::Pass, "{r:#?}");
    assert!((r.lambda_extracted.unwrap() + 3.0).abs() < 1e-9);
    assert!(r.equation("einstein").unwrap().max < 1e-9);
}

#[test]
fn affine_einstein_family_passes_with_its_predicted_lambda() {
    let r = run("domain = [0.5, 1.5, 0.5, 1.5]\n[einstein]\na = 1.0\nb = 0.5\nc = 0.2\nA = 1.3\nB = 0.7\ntheta = 1.0\n");
    assert_eq!(r.verdict, Verdict::Pass, "{:#?}", r.equations);
    let want = -3.0 * (1.3 + 0.25 * 0.7);
    assert!((r.lambda_extracted.unwrap() - want).abs() < 1e-9);
}

#[test]
fn schwarzschild_with_flat_b_profile_fails() {
    let r = run("domain = [0.5, 1.5, -0.5, 0.5]\n[schwarzschild]\nA = \"t^2 + 1\"\nB = \"1\"\n");
    assert_eq!(r.verdict, Verdict::Fail);
    assert!(r.equation("einstein").unwrap().max > 1e-3);
}

#[test]
fn schwarzschild_mass_form_passes() {
    let r = run("domain = [0.5, 1.5, -0.5, 0.5]\n[schwarzschild]\nm = 0.1\n");
    assert_eq!(r.verdict, Verdict::Pass, "{:#?}", r.equations);
    assert!(r.lambda_extracted.unwrap().abs() < 1e-9);
}

#[test]
fn sine_product_surface_passes_on_factor_conditions() {
    let r = run("domain = [0.2, 1.3, 0.2, 1.3]\n[product_surface]\nkind = \"sin\"\n");
    assert_eq!(r.verdict, Verdict::Pass, "{:#?}", r.equations);
    for name in ["surface_flat", "surface_einstein", "h_ode"] {
        let e = r.equation(name).unwrap();
        assert!(e.checked && e.max <= 1e-10, "{e:?}");
    }
}

#[test]
fn steady_soliton_passes_and_matches_engine() {
    let r = run(CASE_V);
    assert_eq!(r.verdict, Verdict::Pass, "{:#?}", r.equations);
    assert!(r.equation("soliton_engine").unwrap().max < 1e-7);
}

#[test]
fn case_iv_forms_disagree() {
    let base = "domain = [0.9, 1.1, 0.95, 1.05]\n[case_iv]\na0 = 4\nb0 = 1\nlambda = -12\ninit = [0.8, 2.0, 0.05, 0.02]\nz_range = [0.8, 1.2]\n";
    let consistent = run(base);
    assert_eq!(consistent.verdict, Verdict::Pass, "{:#?}", consistent.equations);
    let printed = run(&format!("{base}form = \"as_printed\"\n"));
    assert_eq!(printed.verdict, Verdict::Fail);
}

#[test]
fn non_constant_profiles_at_oblique_angle_fail() {
    let r = run("domain = [0.5, 1.5, 0.5, 1.5]\n[general]\nq = \"x\"\nA = \"2 + t\"\nB = \"1\"\ntheta = 0.785398\n");
    assert_eq!(r.verdict, Verdict::Fail);
}

#[test]
fn json_round_trips_exactly() {
    let r = run(CASE_V);
    let text = render(&r, ReportFormat::Json);
    let back: ResidualReport = serde_json::from_slice(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(render(&back, ReportFormat::Json), text);
}

#[test]
fn csv_has_header_and_one_row_per_point() {
    let r = run(HYPERBOLIC);
    let text = String::from_utf8(render(&r, ReportFormat::Csv)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + r.grid.0 * r.grid.1);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(&header[..2], &["x", "y"]);
    assert_eq!(header.len(), 2 + r.columns.len());
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    for text in [HYPERBOLIC, CASE_V] {
        let reference = in_pool(1, || render(&run(text), ReportFormat::Json));
        for threads in [1, 2, 4, 7] {
            let again = in_pool(threads, || render(&run(text), ReportFormat::Json));
            assert!(again == reference, "report differs with {threads} threads");
        }
    }
}

#[test]
fn emitted_file_matches_in_memory_rendering() {
    let r = run(HYPERBOLIC);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    emit_report(&r, ReportFormat::Csv, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), render(&r, ReportFormat::Csv));
}

#[test]
fn config_errors_name_the_field() {
    let err = parse_config("domain = [0.5, 1.5, 0.5, 1.5]\ngrid = [1, 5]\n[einstein]\na = 1.0\n").unwrap_err();
    assert!(err.is_configuration() && err.to_string().contains("grid"), "{err}");
    let err = parse_config("domain = [0.5, 1.5, 0.5, 1.5]\n[einstein]\nbogus = 1\n").unwrap_err();
    assert!(err.to_string().contains("bogus"), "{err}");
}

#[test]
fn non_positive_profile_is_a_construction_error() {
    let cfg = parse_config("domain = [0.5, 1.5, 0.5, 1.5]\n[einstein]\na = 1.0\nA = -1.0\nB = 1.0\n").unwrap();
    let err = run_verification(&cfg).unwrap_err();
    assert!(!err.is_configuration(), "{err}");
}
