//! Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gbc_core::confgeom::CurvatureFrame;
use gbc_core::horizon::{boundary_flux, excised_surfaces, horizon_residual, penrose_check, StarSurface};
use gbc_core::mass::{
    default_schedule, evaluate, mass_lower_bound, spherical_flux, volume_grid_degree, Evaluator, MassReport,
    DEFAULT_R_MAX,
};
use gbc_core::profile::{expr, schwarzschild_profile, Field, MetricSpec};
use gbc_core::quadrature::{default_degree, SphereGrid};
use gbc_core::report::to_json;
use gbc_core::verify::{self, VerifyOptions, VerifyReport, DEFAULT_SEED};

const CASES: [(usize, usize, f64); 6] = [(5, 1, 1.0), (5, 1, 2.0), (5, 2, 1.0), (6, 2, 1.0), (7, 2, 1.0), (7, 3, 1.0)];

struct Outcome {
    failed: Vec<usize>,
}

impl Outcome {
    fn report(&mut self, id: usize, pass: bool, detail: String) {
        println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

struct Run {
    report: MassReport,
    elapsed: Duration,
}

fn catalog() -> Vec<MetricSpec> {
    CASES.iter().map(|&(n, k, m)| schwarzschild_profile(n, k, m).unwrap()).collect()
}

fn run_evaluators(spec: &MetricSpec) -> Vec<Run> {
    let grid = SphereGrid::new(spec.n, default_degree(spec.n)).unwrap();
    let schedule = default_schedule(spec);
    Evaluator::ALL
        .iter()
        .filter(|e| e.applicable(spec))
        .map(|&e| {
            let t = Instant::now();
            let report = evaluate(spec, e, &grid, &schedule).unwrap();
            Run { report, elapsed: t.elapsed() }
        })
        .collect()
}

fn suites(names: &[&str]) -> VerifyReport {
    let opts = VerifyOptions { seed: DEFAULT_SEED, suites: names.iter().map(|s| s.to_string()).collect(), inject_fault: false };
    verify::run(&opts).unwrap()
}

fn suite_summary(report: &VerifyReport) -> String {
    report
        .suites
        .iter()
        .flat_map(|s| s.identities.iter())
        .map(|i| format!("[{}: {} cases, max {:.2e} <= {:.0e}]", i.identity, i.cases, i.max_violation, i.tolerance))
        .collect::<Vec<_>>()
        .join(" ")
}

fn criterion_1(out: &mut Outcome, runs: &[(MetricSpec, Vec<Run>)]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, rs) in runs {
        let want = spec.catalog.as_ref().unwrap().expected_mass;
        for r in rs {
            let rel = (r.report.mass - want).abs() / want;
            let budget = if r.report.evaluator == "spherical" { 1.0 } else { 60.0 };
            let secs = r.elapsed.as_secs_f64();
            let ok = rel <= 0.01 && secs < budget;
            pass &= ok;
            parts.push(format!(
                "({},{},{}) {} rel {:.1e} {:.2}s{}",
                spec.n,
                spec.k,
                spec.catalog.as_ref().unwrap().mass_param,
                r.report.evaluator,
                rel,
                secs,
                if ok { "" } else { " !" }
            ));
        }
    }
    out.report(1, pass, parts.join("; "));
}

fn criterion_2(out: &mut Outcome, runs: &[(MetricSpec, Vec<Run>)]) {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (spec, rs) in runs {
        let mk = spec.catalog.as_ref().unwrap().expected_mass;
        for (i, a) in rs.iter().enumerate() {
            for b in &rs[i + 1..] {
                let d = (a.report.mass - b.report.mass).abs();
                let combined = a.report.error + b.report.error;
                let ok = d <= combined && d <= 1e-3 * (1.0 + mk);
                worst = worst.max(d);
                pass &= ok;
                if !ok {
                    parts.push(format!(
                        "({},{}) {}/{} diff {d:.2e} combined error {combined:.2e}",
                        spec.n, spec.k, a.report.evaluator, b.report.evaluator
                    ));
                }
            }
        }
    }
    out.report(2, pass, format!("largest pairwise discrepancy {worst:.2e} {}", parts.join("; ")));
}

fn random_field(rng: &mut ChaCha8Rng, n: usize) -> Field {
    match rng.gen_range(0..3) {
        0 => Field::random_trig(rng, n, 3),
        1 => Field::random_quadratic(rng, n),
        _ => Field::Gaussian {
            amp: rng.gen_range(-0.5..0.5),
            center: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            weights: (0..n).map(|_| rng.gen_range(0.3..1.5)).collect(),
        },
    }
}

fn criterion_3(out: &mut Outcome) {
    let pairs: Vec<(usize, usize)> =
        [5, 6, 7].iter().flat_map(|&n| (1..=3).filter(move |&k| 2 * k < n).map(move |k| (n, k))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 3);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let (n, k) = pairs[i % pairs.len()];
        let spec = MetricSpec::custom(n, k, random_field(&mut rng, n), 0.0, "oracle").unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let frame = CurvatureFrame::at(&spec, &x).unwrap();
        let a = frame.lk_contract(k).unwrap();
        let b = frame.lk_conformal(k).unwrap();
        let scale = a.abs().max(b.abs());
        let rel = if scale < 1e-14 { (a - b).abs() } else { (a - b).abs() / scale };
        worst = worst.max(rel);
    }
    out.report(3, worst <= 1e-8, format!("200 points over {pairs:?}, max relative difference {worst:.2e}"));
}

fn criterion_4(out: &mut Outcome) {
    let rep = suites(&["divergence"]);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut cases = usize::MAX;
    for i in rep.suites.iter().flat_map(|s| s.identities.iter()) {
        if let Some([a, b]) = i.observed {
            lo = lo.min(a);
            hi = hi.max(b);
        }
        cases = cases.min(i.cases);
    }
    let pass = rep.passed && cases >= 20 && (3.5..=4.5).contains(&lo) && (3.5..=4.5).contains(&hi);
    out.report(4, pass, format!("ratios in [{lo:.4}, {hi:.4}] over {cases} profile/point pairs per identity"));
}

fn random_radial(rng: &mut ChaCha8Rng, n: usize, k: usize) -> MetricSpec {
    let params = [("a", rng.gen_range(-1.0..1.0)), ("b", rng.gen_range(0.2..2.0)), ("c", rng.gen_range(0.5..3.0))];
    let e = expr::parse_with_params("a*exp(-b*r^2) + 1/(1+r^2)^c", &params).unwrap();
    MetricSpec::custom(n, k, Field::Radial(e), 0.0, "radial").unwrap()
}

fn criterion_5(out: &mut Outcome, specs: &[MetricSpec]) {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 5);
    let mut flux_worst: f64 = 0.0;
    let mut tested = 0;
    for &(n, k, _) in &CASES {
        let grid = SphereGrid::new(n, 7).unwrap();
        for _ in 0..3 {
            let spec = random_radial(&mut rng, n, k);
            let radius = rng.gen_range(0.3..3.0);
            let sphere = StarSurface::sphere(vec![0.0; n], radius).unwrap();
            let f = boundary_flux(&spec, &sphere, k, &grid).unwrap();
            let rel = (f.hessian_route - f.curvature_route).abs() / f.hessian_route.abs().max(1e-300);
            flux_worst = flux_worst.max(rel).max(f.max_pointwise_defect);
            tested += 1;
        }
    }
    let mut horizon_worst: f64 = 0.0;
    for spec in specs {
        let grid = SphereGrid::new(spec.n, 7).unwrap();
        let r0 = spec.catalog.as_ref().unwrap().horizon_radii[0];
        let sphere = StarSurface::sphere(vec![0.0; spec.n], r0).unwrap();
        for v in horizon_residual(spec, &sphere, &grid).unwrap() {
            horizon_worst = horizon_worst.max(v.abs());
        }
    }
    out.report(
        5,
        flux_worst <= 1e-8 && horizon_worst <= 1e-10,
        format!("flux routes max relative {flux_worst:.2e} on {tested} spheres; horizon residual max {horizon_worst:.2e}"),
    );
}

fn criterion_6(out: &mut Outcome, specs: &[MetricSpec]) {
    let mut pass = true;
    let mut parts = Vec::new();
    for spec in specs {
        let grid = SphereGrid::new(spec.n, default_degree(spec.n)).unwrap();
        let rep = penrose_check(spec, &excised_surfaces(spec).unwrap(), &grid, DEFAULT_R_MAX).unwrap();
        let both = rep.verdicts.area.passed() && rep.verdicts.scalar.passed();
        pass &= both;
        if (spec.n, spec.k) == (6, 2) {
            let r2 = rep.rhs_scalar_total.unwrap_or(f64::NAN);
            let ok = (rep.rhs_area_total - 0.25).abs() <= 1e-6
                && (r2 - 0.25).abs() <= 1e-6
                && (rep.ratio_area - 4.0).abs() <= 0.04
                && rep.ratio_scalar.is_some_and(|r| (r - 4.0).abs() <= 0.04);
            pass &= ok;
            parts.push(format!(
                "(6,2,1) RHS1 {:.9} RHS2 {:.9} ratio {:.5}",
                rep.rhs_area_total, r2, rep.ratio_area
            ));
        }
        parts.push(format!(
            "({},{},{}) {:?}/{:?}",
            spec.n,
            spec.k,
            spec.catalog.as_ref().unwrap().mass_param,
            rep.verdicts.area.status,
            rep.verdicts.scalar.status
        ));
    }
    out.report(6, pass, parts.join("; "));
}

fn criterion_7(out: &mut Outcome) {
    let rep = suites(&["newton_maclaurin", "superadditivity"]);
    let enough = rep.suites.iter().flat_map(|s| s.identities.iter()).all(|i| i.cases >= 1000);
    out.report(7, rep.passed && enough, suite_summary(&rep));
}

fn criterion_8(out: &mut Outcome, runs: &[(MetricSpec, Vec<Run>)]) {
    let mut pass = true;
    let mut checked = 0;
    let mut parts = Vec::new();
    for (spec, rs) in runs {
        let grid = SphereGrid::new(spec.n, volume_grid_degree(spec.n)).unwrap();
        let lb = mass_lower_bound(spec, DEFAULT_R_MAX, &grid).unwrap();
        if !lb.guaranteed {
            parts.push(format!("({},{}) hypotheses fail, skipped", spec.n, spec.k));
            continue;
        }
        checked += 1;
        for r in rs {
            let ok = lb.sum() <= r.report.mass + r.report.error + 1e-12;
            pass &= ok;
            if !ok {
                parts.push(format!("({},{}) {} bound {} > mass {}", spec.n, spec.k, r.report.evaluator, lb.sum(), r.report.mass));
            }
        }
        parts.push(format!("({},{}) bound {:.6} mass {:.6}", spec.n, spec.k, lb.sum(), rs[0].report.mass));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 8);
    let mut most_negative: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(5..=8);
        let spec = random_radial(&mut rng, n, 2);
        for i in 0..40 {
            let r = 0.05 * 1.2f64.powi(i);
            most_negative = most_negative.min(spherical_flux(&spec, r).unwrap());
        }
    }
    pass &= checked > 0 && most_negative >= 0.0;
    out.report(
        8,
        pass,
        format!("{}; smallest k=2 spherical flux over 50 profiles {most_negative:e}", parts.join("; ")),
    );
}

fn criterion_9(out: &mut Outcome, specs: &[MetricSpec]) {
    let spec = gbc_core::profile::builtin("gaussian_bump", 5, 2).unwrap();
    let grid = SphereGrid::new(5, 9).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
    let once = || {
        pool.install(|| {
            let mass = evaluate(&spec, Evaluator::Equivalent, &grid, &default_schedule(&spec)).unwrap();
            let s = &specs[3];
            let g = SphereGrid::new(s.n, 7).unwrap();
            let pen = penrose_check(s, &excised_surfaces(s).unwrap(), &g, 40.0).unwrap();
            let ver = verify::run(&VerifyOptions {
                seed: 7,
                suites: vec!["symfun".into(), "oracle".into()],
                inject_fault: false,
            })
            .unwrap();
            let cfg = serde_json::json!({"seed": 7, "threads": 2});
            [to_json(&cfg, &vec![mass]).unwrap(), to_json(&cfg, &pen).unwrap(), to_json(&cfg, &ver).unwrap()]
        })
    };
    let a = once();
    let b = once();
    let bytes: usize = a.iter().map(String::len).sum();
    out.report(9, a == b, format!("mass, penrose and verify reports compared over {bytes} bytes"));
}

fn main() {
    let mut out = Outcome { failed: Vec::new() };
    let specs = catalog();
    let runs: Vec<(MetricSpec, Vec<Run>)> = specs.iter().map(|s| (s.clone(), run_evaluators(s))).collect();
    criterion_1(&mut out, &runs);
    criterion_2(&mut out, &runs);
    criterion_3(&mut out);
    criterion_4(&mut out);
    criterion_5(&mut out, &specs);
    criterion_6(&mut out, &specs);
    criterion_7(&mut out);
    criterion_8(&mut out, &runs);
    criterion_9(&mut out, &specs);
    if !out.failed.is_empty() {
        eprintln!("failed criteria {:?}", out.failed);
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
