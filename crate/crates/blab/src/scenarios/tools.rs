use blab_core::beltrami::{BeltramiField, SupportMask};
use blab_core::cantor::{cantor_stage, to_f64, Scheme, ENUMERATION_LIMIT};
use blab_core::solver::{inverse_dilatation, solve_beltrami, Support};
use num_complex::Complex64;

use super::construction::{cantor_checks, moment_checks, solver_checks, sweep_checks};
use super::{claims, Check, Report, Settings, Status, Table};
use crate::error::{BlabError, Result};
use crate::fft::RustFft2d;
use crate::json::Obj;
use crate::output::{interval_rows, num};

const SCHEME_NOTE: &str = "The two 1/5 schemes agree at stage 1. From stage 2 on, \
    absolute-fifth removes 5^-k per interval and keeps measure tending to 2/3, \
    while proportional-fifth removes the middle fifth of each interval, gives \
    C_2 = [0,4/25] ∪ [6/25,2/5] ∪ [3/5,19/25] ∪ [21/25,1] and tends to measure 0.";

pub fn run_cantor(s: &Settings) -> Result<Report> {
    let mut r = Report::new("cantor", s);
    let base = cantor_stage(s.stage, s.scheme)?;
    let set = s.radial_set()?;
    r.lines.push(format!("scheme {}, stage {}", s.scheme.name(), s.stage));
    if s.stage <= ENUMERATION_LIMIT {
        r.lines.push(format!("C_{} = {}", s.stage, base));
        r.tables.push(Table {
            name: "intervals".into(),
            header: vec!["lo_num", "lo_den", "hi_num", "hi_den"],
            rows: interval_rows(&base)?,
        });
        let rings = set.ring_system()?;
        r.tables.push(Table {
            name: "rings".into(),
            header: vec!["lo", "hi", "lo_decimal", "hi_decimal"],
            rows: rings
                .rings
                .iter()
                .map(|g| vec![g.lo.to_string(), g.hi.to_string(), num(to_f64(&g.lo)), num(to_f64(&g.hi))])
                .collect(),
        });
    } else {
        r.lines.push(format!("{} intervals of length {}", base.count(), base.interval_length()));
    }
    let m = base.measure();
    r.lines.push(format!("measure {} ({})", m, num(to_f64(&m))));
    r.lines.push(format!("removed length {}", base.removed_length()));
    r.lines.push(format!(
        "radial set at lambda = {}: area/pi = {}, radial moment/pi = {}",
        set.lambda(),
        set.area_over_pi(),
        set.radial_moment_over_pi()
    ));
    cantor_checks(&mut r, &set)?;
    let other = match s.scheme {
        Scheme::AbsoluteFifth => Scheme::ProportionalFifth,
        Scheme::ProportionalFifth => Scheme::AbsoluteFifth,
    };
    let alt = cantor_stage(s.stage, other)?;
    r.push(Check::new(
        "scheme-discrepancy",
        claims::CANTOR_LISTS,
        Status::Evidence,
        Obj::new()
            .with("scheme", s.scheme.name())
            .with("measure", m.to_string())
            .with("other_scheme", other.name())
            .with("other_measure", alt.measure().to_string())
            .with("lists_agree", s.stage <= 1),
    ));
    r.notes.push(SCHEME_NOTE.into());
    r.lines.push(SCHEME_NOTE.into());
    Ok(r)
}

pub fn run_moments(s: &Settings) -> Result<Report> {
    let mut r = Report::new("moments", s);
    let set = s.radial_set()?;
    r.lines.push(format!(
        "gamma_m = z^m on the stage-{} {} set, lambda = {}",
        s.stage,
        s.scheme.name(),
        s.lambda
    ));
    moment_checks(&mut r, &set, &s.ms, s.moments)?;
    Ok(r)
}

pub fn run_hamilton_sweep(s: &Settings) -> Result<Report> {
    let mut r = Report::new("hamilton-sweep", s);
    let mu = s.mu()?;
    r.lines.push(format!("mu = {}", mu.label()));
    sweep_checks(&mut r, s, &mu)?;
    Ok(r)
}

fn parse_coefficient(spec: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|c| c.is_finite() && c.abs() < 1.0)
        .ok_or_else(|| BlabError::Config(format!("solver.mu = `{spec}`: coefficient must be a number with |C| < 1")))
}

pub fn run_solve(s: &Settings) -> Result<Report> {
    let mut r = Report::new("solve", s);
    let spec = s.solver_mu.as_str();
    let (mu, constant) = if let Some(c) = spec.strip_prefix("constant:") {
        let c = parse_coefficient(spec, c)?;
        (BeltramiField::Constant(Complex64::new(c, 0.0)), Some(c))
    } else if let Some(c) = spec.strip_prefix("disk:") {
        let c = parse_coefficient(spec, c)?;
        let field = BeltramiField::Masked {
            base: Box::new(BeltramiField::Constant(Complex64::new(c, 0.0))),
            mask: SupportMask::Disk(s.disk),
        };
        (field, None)
    } else if spec == "construction" {
        (s.mu()?, None)
    } else {
        return Err(BlabError::Config(format!(
            "solver.mu = `{spec}`: expected constant:C, disk:C or construction"
        )));
    };
    r.lines.push(format!("mu = {}", mu.label()));
    if spec == "construction" {
        solver_checks(&mut r, s, &mu)?;
        return Ok(r);
    }
    let fft = RustFft2d::new();
    let map = solve_beltrami(&mu, &s.solver, &fft)?;
    r.push(Check::new(
        "solver/residual",
        claims::SOLVER,
        Status::from_bool(map.residual <= 1e-3),
        Obj::new()
            .with("n", s.solver.n)
            .with("residual", map.residual)
            .with("iterations", map.iterations)
            .with("increments", map.increments.clone())
            .with("normalization", map.normalization()),
    ));
    let alpha = inverse_dilatation(&map)?;
    let worst = alpha
        .values()
        .iter()
        .zip(map.mu.values())
        .map(|(a, m)| (a.norm() - m.norm()).abs() / m.norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    r.push(Check::new(
        "solver/alpha-modulus",
        claims::SOLVER,
        Status::from_bool(worst <= 4.0 * f64::EPSILON),
        Obj::new().with("max_relative_difference", worst),
    ));
    if let Some(c) = constant {
        // the exact solution is known only when μ fills the computational domain
        let exact = c == 0.0 || s.solver.support == Support::Square;
        let n = map.f.n();
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let z = map.f.point(i, j);
                err = err.max((map.f.get(i, j) - (z + c * z.conj())).norm());
            }
        }
        r.push(Check::new(
            "solver/affine-exact",
            claims::SOLVER,
            if exact { Status::from_bool(err <= 1e-9) } else { Status::Evidence },
            Obj::new().with("coefficient", c).with("max_error", err),
        ));
    }
    r.lines.push(format!(
        "residual {:.3e} after {} iterations ({})",
        map.residual,
        map.iterations,
        map.normalization()
    ));
    if s.grid {
        r.grids.push(("mu".into(), map.mu.clone()));
        r.grids.push(("f".into(), map.f.clone()));
    }
    Ok(r)
}
