//! One line per acceptance criterion. Runs without the libtest harness so
//! the lines show up in plain `cargo test` output; exits non-zero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use blab::config::Config;
use blab::fft::RustFft2d;
use blab::scenarios::{self, Report, Settings, Status};
use blab_core::beltrami::{delta, teichmuller_form, BeltramiField, Disk, QuadraticDifferential, SupportMask};
use blab_core::cantor::{cantor_stage, to_f64, Scheme};
use blab_core::quadrature::QuadratureRule;
use blab_core::solver::{inverse_dilatation, solve_beltrami, SolverConfig, Support};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn settings(overrides: &[&str]) -> Settings {
    let mut cfg = Config::default();
    for o in overrides {
        cfg.set(o).unwrap();
    }
    Settings::from_config(&cfg).unwrap()
}

fn check<'a>(r: &'a Report, id: &str) -> &'a scenarios::Check {
    r.checks.iter().find(|c| c.id == id).unwrap_or_else(|| panic!("{}: no check {id}", r.scenario))
}

fn holds(r: &Report, id: &str) -> bool {
    matches!(check(r, id).status, Status::Holds | Status::HoldsWithinError)
}

fn num(r: &Report, id: &str, key: &str) -> f64 {
    match check(r, id).data.get(key) {
        Some(blab::json::J::Num(x)) => *x,
        Some(blab::json::J::Int(i)) => *i as f64,
        other => panic!("{id}.{key}: {other:?}"),
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn ensure(ok: bool, what: String) -> Outcome {
    if ok {
        Ok(what)
    } else {
        Err(what)
    }
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let m = cantor_stage(30, Scheme::AbsoluteFifth).map_err(|e| e.to_string())?.measure();
    let two_fifths = q(2, 5);
    let mut tail = q(1, 3);
    for _ in 0..30 {
        tail *= &two_fifths;
    }
    let exact = q(2, 3) + &tail;
    let dec = to_f64(&m);
    let secs = t.elapsed().as_secs_f64();
    ensure(
        m == exact && (dec - to_f64(&exact)).abs() <= 1e-12 && secs < 1.0,
        format!("measure = 2/3 + (1/3)(2/5)^30 exactly, decimal {dec:.17}, {secs:.3} s"),
    )
}

fn criterion_2() -> Outcome {
    let lists = |k| -> Vec<(BigRational, BigRational)> {
        cantor_stage(k, Scheme::ProportionalFifth)
            .unwrap()
            .intervals()
            .unwrap()
            .into_iter()
            .map(|i| (i.lo, i.hi))
            .collect()
    };
    let c1 = vec![(q(0, 1), q(2, 5)), (q(3, 5), q(1, 1))];
    let c2 = vec![(q(0, 1), q(4, 25)), (q(6, 25), q(2, 5)), (q(3, 5), q(19, 25)), (q(21, 25), q(1, 1))];
    let r = scenarios::run_cantor(&settings(&["cantor.scheme=proportional-fifth", "cantor.stage=2"]))
        .map_err(|e| e.to_string())?;
    let reported = check(&r, "scheme-discrepancy").status == Status::Evidence
        && r.notes.iter().any(|n| n.contains("[21/25,1]"));
    let absolute_differs = cantor_stage(2, Scheme::AbsoluteFifth).unwrap().measure() != q(16, 25);
    ensure(
        lists(1) == c1 && lists(2) == c2 && reported && absolute_differs,
        "C_1, C_2 match; the absolute scheme differs from stage 2 and the report says so".into(),
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let r = scenarios::run_moments(&settings(&["cantor.stage=8", "cantor.lambda=0.8", "field.m=1,2,3", "battery.moments=10"]))
        .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let ids = ["moments-quadrature", "moments-ring-closed-form", "moments-paths-agree"];
    let ok = ids.iter().all(|id| check(&r, id).status == Status::Holds) && secs < 30.0;
    ensure(
        ok,
        format!(
            "max |quadrature| {:.1e}, max |ring| {:.1e}, {secs:.2} s",
            num(&r, ids[0], "max_abs"),
            num(&r, ids[1], "max_abs")
        ),
    )
}

fn criterion_4() -> Outcome {
    let rule = QuadratureRule::disk();
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut phis: Vec<_> = [0usize, 1, 2, 3, 4, 5, 7].iter().map(|&n| QuadraticDifferential::monomial(n)).collect();
    phis.push(QuadraticDifferential::polynomial(vec![c(1.0), c(0.0), c(2.0)]));
    phis.push(QuadraticDifferential::polynomial(vec![c(1.0), c(3.0), c(3.0), c(1.0)]));
    phis.push(QuadraticDifferential::kernel(0.5, 2.0, 4.0, 0.0).unwrap());
    let mut worst = 0.0f64;
    let mut members = 0;
    for k in [0.5, 0.9] {
        for phi in &phis {
            let d = delta(&teichmuller_form(k, phi.clone()).unwrap(), phi, &rule).map_err(|e| e.to_string())?;
            worst = worst.max(d.delta.abs() / d.norm);
            members += 1;
        }
    }
    ensure(members == 20 && worst <= 1e-8, format!("{members} members, max |δ|/‖φ‖ = {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let r = scenarios::run_inequality_audit(&settings(&["battery.pairs=100", "battery.phis=10"]))
        .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let rejected = r.checks.iter().filter(|c| c.id.starts_with("reject-")).collect::<Vec<_>>();
    let rejections_hold = !rejected.is_empty() && rejected.iter().all(|c| c.status == Status::Holds);
    ensure(
        r.violations() == 0 && holds(&r, "false-violations") && rejections_hold && secs < 180.0,
        format!("{} checks, {} violated, {} rejection checks hold, {secs:.1} s", r.checks.len(), r.violations(), rejected.len()),
    )
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let r = scenarios::run_hamilton_sweep(&settings(&[
        "scenario.k=0.5",
        "cantor.stage=6",
        "field.kappa=0.5",
        "battery.x=0.9,0.99,0.999",
    ]))
    .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let ids = [
        "sweep/functional-reaches",
        "sweep/delta-decreasing",
        "sweep/mass-fraction-decreasing",
    ];
    let ok = ids.iter().all(|id| holds(&r, id)) && secs < 120.0;
    ensure(ok, format!("best functional {:.6}, {secs:.2} s", num(&r, ids[0], "best")))
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let fft = RustFft2d::new();
    let cfg = SolverConfig { n: 512, ..SolverConfig::default() };
    let err = |e: blab_core::Error| e.to_string();

    let id = solve_beltrami(&BeltramiField::Zero, &cfg, &fft).map_err(err)?;
    let identity = id.iterations == 0 && id.f.values().iter().enumerate().all(|(i, v)| *v == id.f.point(i / 512, i % 512));

    let sq = SolverConfig { support: Support::Square, ..cfg };
    let k = Complex64::new(0.3, 0.0);
    let a = solve_beltrami(&BeltramiField::Constant(k), &sq, &fft).map_err(err)?;
    let affine = a
        .f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let z = a.f.point(i / 512, i % 512);
            (v - (z + k * z.conj())).norm()
        })
        .fold(0.0, f64::max);

    let mu = BeltramiField::Masked {
        base: Box::new(BeltramiField::Constant(Complex64::new(0.5, 0.0))),
        mask: SupportMask::Disk(Disk::new(Complex64::new(0.1, -0.2), 0.6)),
    };
    let d = solve_beltrami(&mu, &cfg, &fft).map_err(err)?;
    let alpha = inverse_dilatation(&d).map_err(err)?;
    let modulus = alpha
        .values()
        .iter()
        .zip(d.mu.values())
        .map(|(a, m)| (a.norm() - m.norm()).abs())
        .fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64();
    ensure(
        identity && affine <= 1e-9 && d.residual <= 1e-3 && d.iterations <= 60 && modulus <= 4.0 * f64::EPSILON && secs < 60.0,
        format!(
            "identity exact, affine error {affine:.1e}, disk residual {:.1e} in {} iterations, max ||α|−|μ|| {modulus:.1e}, {secs:.1} s",
            d.residual, d.iterations
        ),
    )
}

fn criterion_8() -> Outcome {
    let s = settings(&[
        "scenario.k=0.5",
        "field.kappa=0.5",
        "battery.disks=100",
        "battery.disk_radius=0.05",
        "battery.iterations=100",
        "battery.starts=0",
        "solver.enabled=false",
    ]);
    let r = scenarios::run_construction_i(&s).map_err(|e| e.to_string())?;
    ensure(
        holds(&r, "landslide-probe") && holds(&r, "landslide-control"),
        format!(
            "{} of 100 disks show a gap; control gap {:.4} vs expected {:.4}",
            num(&r, "landslide-probe", "gaps_detected"),
            num(&r, "landslide-control", "gap"),
            num(&r, "landslide-control", "expected_gap")
        ),
    )
}

fn criterion_9() -> Outcome {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut files = Vec::new();
    for d in &dirs {
        let out = d.path().to_str().unwrap();
        let code = blab::cli::main_with(
            [
                "blab", "construct-i", "--quiet", "--seed", "17", "--out", out,
                "--set", "cantor.stage=3",
                "--set", "battery.pairs=5",
                "--set", "battery.disks=10",
                "--set", "battery.iterations=100",
                "--set", "battery.starts=0",
                "--set", "battery.degree=8",
                "--set", "solver.n=64",
                "--set", "solver.image_samples=2000",
            ],
            &mut std::io::sink(),
            &mut std::io::sink(),
        );
        if code == blab::cli::EXIT_ERROR {
            return Err("construct-i failed to run".into());
        }
        let mut names: Vec<_> = std::fs::read_dir(d.path())
            .map_err(|e| e.to_string())?
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        files.push(names);
    }
    if files[0] != files[1] || files[0].is_empty() {
        return Err("the two runs wrote different file sets".into());
    }
    for name in &files[0] {
        let a = std::fs::read(dirs[0].path().join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].path().join(name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{} differs between runs", name.to_string_lossy()));
        }
    }
    Ok(format!("{} files byte-identical across two seeded runs", files[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("stage-30 measure", criterion_1),
        ("proportional-fifth stages", criterion_2),
        ("perturbation moments", criterion_3),
        ("delta of the form against its own phi", criterion_4),
        ("randomized inequality audit", criterion_5),
        ("kernel sweep", criterion_6),
        ("Beltrami solver", criterion_7),
        ("landslide probe and control", criterion_8),
        ("reproducible reports", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of 9 criteria pass", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
