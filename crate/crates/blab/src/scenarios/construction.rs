use blab_core::beltrami::{
    deform, landslide_probe, perturbation, random_disks, ring_moment, BeltramiField, Disk, SupportMask,
};
use blab_core::cantor::{to_f64, RadialCantorSet, ENUMERATION_LIMIT};
use blab_core::hamilton::{
    kernel_sweep, local_extremality_probe, local_family, maximize, reich_sequence_check, sweep_exponent,
    sweep_kernel, BasisFamily, SearchOptions, SweepPoint,
};
use blab_core::inequalities::{
    aligned_perturbation_pair, audit_infinitesimal, InfinitesimalPair, PairAudit,
};
use blab_core::quadrature::QuadratureRule;
use blab_core::sampling::stratified_disk;
use blab_core::solver::{image_of_set, inverse_dilatation, solve_beltrami};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{claims, phi_battery, Check, Report, SetKind, Settings, Status, Table, ASSUMED};
use crate::error::Result;
use crate::fft::RustFft2d;
use crate::json::Obj;
use crate::output::num;

pub fn run_construction_i(s: &Settings) -> Result<Report> {
    if s.set_kind != SetKind::Cantor {
        return Err(crate::error::BlabError::Config(
            "construct-i needs field.set = cantor".into(),
        ));
    }
    let mut r = Report::new("construct-i", s);
    r.assumed = ASSUMED.to_vec();
    let set = s.radial_set()?;
    let eta = s.eta()?;
    let mu = s.mu()?;
    describe(&mut r, s, &mu);
    cantor_checks(&mut r, &set)?;
    moment_checks(&mut r, &set, &s.ms, s.moments)?;
    infinitesimal_checks(&mut r, s, &mu, &eta, &set)?;
    landslide_checks(&mut r, s, &mu, true)?;
    hamilton_checks(&mut r, s, &mu)?;
    if s.solver_enabled {
        solver_checks(&mut r, s, &mu)?;
    }
    Ok(r)
}

pub fn run_construction_ii(s: &Settings) -> Result<Report> {
    let mut r = Report::new("construct-ii", s);
    r.assumed = ASSUMED.to_vec();
    let eta = s.eta()?;
    let mu = s.mu()?;
    describe(&mut r, s, &mu);
    if s.set_kind == SetKind::Cantor {
        let set = s.radial_set()?;
        cantor_checks(&mut r, &set)?;
        infinitesimal_checks(&mut r, s, &mu, &eta, &set)?;
    } else {
        r.notes.push("E is not a radial Cantor set: no perturbation certificates".into());
    }
    landslide_checks(&mut r, s, &mu, false)?;
    local_checks(&mut r, s, &mu)?;
    hamilton_checks(&mut r, s, &mu)?;
    if s.solver_enabled {
        solver_checks(&mut r, s, &mu)?;
    }
    Ok(r)
}

fn describe(r: &mut Report, s: &Settings, mu: &BeltramiField) {
    r.lines.push(format!("mu = {}", mu.label()));
    r.lines.push(format!("k = {}, kappa = {}, phi = {}", s.k, s.kappa, s.phi.label));
}

pub(crate) fn cantor_checks(r: &mut Report, set: &RadialCantorSet) -> Result<()> {
    let base = set.base();
    let measure = base.measure();
    let area = set.area_over_pi();
    r.push(Check::new(
        "cantor-measure",
        claims::CANTOR_MEASURE,
        Status::Evidence,
        Obj::new()
            .with("stage", base.stage())
            .with("measure", measure.to_string())
            .with("measure_decimal", to_f64(&measure))
            .with("area_over_pi", area.to_string()),
    ));
    if base.stage() <= ENUMERATION_LIMIT {
        let rings = set.ring_system()?;
        let ok = rings.tiles(set)?;
        r.push(Check::new(
            "ring-tiling",
            claims::RING_TILING,
            Status::from_bool(ok),
            Obj::new().with("rings", rings.rings.len()).with("total_width", rings.total_width().to_string()),
        ));
    }
    Ok(())
}

/// Quadrature and ring closed form of ∬ γ_m z^n, side by side.
pub(crate) fn moment_checks(r: &mut Report, set: &RadialCantorSet, ms: &[u32], nmax: u32) -> Result<()> {
    let rule = QuadratureRule::disk().with_circles(set.circles_f64()?);
    let gammas = ms
        .iter()
        .map(|&m| perturbation(m, set.clone()))
        .collect::<blab_core::Result<Vec<_>>>()?;
    let per = nmax as usize + 1;
    let ints = rule.integrate_many(ms.len() * per, |p, out| {
        for (i, g) in gammas.iter().enumerate() {
            let v = g.value(p);
            let mut zn = Complex64::new(1.0, 0.0);
            for o in &mut out[i * per..(i + 1) * per] {
                *o = v * zn;
                zn *= p.z;
            }
        }
    })?;
    let mut rows = Vec::new();
    let (mut worst_q, mut worst_c, mut worst_d) = (0.0f64, 0.0f64, 0.0f64);
    for (i, &m) in ms.iter().enumerate() {
        for n in 0..=nmax {
            let q = ints[i * per + n as usize];
            let c = ring_moment(set, m, n)?;
            let d = (q.value - c.value).norm();
            worst_q = worst_q.max(q.value.norm());
            worst_c = worst_c.max(c.value.norm());
            worst_d = worst_d.max(d);
            rows.push(vec![
                m.to_string(),
                n.to_string(),
                num(q.value.re),
                num(q.value.im),
                num(q.error),
                num(c.value.re),
                num(c.value.im),
                c.radial.to_string(),
                num(d),
            ]);
        }
    }
    let data = || {
        Obj::new()
            .with("m", ms.to_vec())
            .with("n_max", nmax)
            .with("nodes", rule.node_count())
    };
    r.push(Check::new(
        "moments-quadrature",
        claims::MOMENTS,
        Status::from_bool(worst_q <= 1e-6),
        data().with("max_abs", worst_q).with("tolerance", 1e-6),
    ));
    r.push(Check::new(
        "moments-ring-closed-form",
        claims::MOMENTS,
        Status::from_bool(worst_c <= 1e-12),
        data().with("max_abs", worst_c).with("tolerance", 1e-12),
    ));
    r.push(Check::new(
        "moments-paths-agree",
        claims::MOMENTS,
        Status::from_bool(worst_d <= 1e-8),
        data().with("max_difference", worst_d).with("tolerance", 1e-8),
    ));
    r.lines.push(format!(
        "moments: max |quadrature| {worst_q:.3e}, max |ring| {worst_c:.3e}, max difference {worst_d:.3e}"
    ));
    r.tables.push(Table {
        name: "moments".into(),
        header: vec!["m", "n", "quad_re", "quad_im", "quad_error", "ring_re", "ring_im", "ring_radial", "difference"],
        rows,
    });
    Ok(())
}

fn push_audit(r: &mut Report, id: &str, audit: &PairAudit, rows: &mut Vec<Vec<String>>, note: &str) {
    for rep in &audit.reports {
        let claim = if rep.check == "inf-main" {
            claims::INF_MAIN
        } else {
            claims::LEMMA_INF
        };
        rows.push(vec![
            note.to_string(),
            rep.check.to_string(),
            rep.phi_id.clone(),
            num(rep.lhs),
            num(rep.rhs),
            num(rep.slack),
            num(rep.budget),
            rep.verdict.as_str().to_string(),
        ]);
        r.push(Check::inequality(
            format!("{id}/{}/{}", rep.check, rep.phi_id),
            claim,
            rep,
            Obj::new().with("pair", note),
        ));
    }
    if let Some(e) = &audit.lemma_precondition {
        r.push(Check::new(
            format!("{id}/lemma-inf"),
            claims::LEMMA_INF,
            Status::NotApplicable,
            Obj::new().with("pair", note).with("reason", e.to_string()),
        ));
    }
}

/// Certificates for μ + tγ_m, the infinitesimal suite on them, and the same
/// suite on aligned pairs where the Lemma precondition holds.
fn infinitesimal_checks(
    r: &mut Report,
    s: &Settings,
    mu: &BeltramiField,
    eta: &BeltramiField,
    set: &RadialCantorSet,
) -> Result<()> {
    let rule = QuadratureRule::disk().with_circles(mu.circles());
    let phis = phi_battery(s.phis);
    let mut ts = s.ts.clone();
    if !ts.contains(&0.0) {
        ts.push(0.0);
    }
    let jobs: Vec<(u32, f64)> = s.ms.iter().flat_map(|&m| ts.iter().map(move |&t| (m, t))).collect();
    let certified: Vec<Result<(InfinitesimalPair, PairAudit)>> = jobs
        .par_iter()
        .map(|&(m, t)| {
            let nu = mu.clone().plus(Complex64::new(t, 0.0), perturbation(m, set.clone())?);
            let pair = InfinitesimalPair::certify(mu.clone(), nu, &format!("mu+{t}*gamma_{m}"), &rule, s.degree)?;
            let audit = audit_infinitesimal(&pair, &phis, &rule)?;
            Ok((pair, audit))
        })
        .collect();
    let mut rows = Vec::new();
    for (i, res) in certified.into_iter().enumerate() {
        let (pair, audit) = res?;
        let cert = pair.certificate().expect("certified pair");
        r.push(Check::new(
            format!("certificate/{}", pair.note()),
            claims::CERTIFICATE,
            Status::Holds,
            Obj::new()
                .with("degree", cert.degree)
                .with("max_disagreement", cert.max_disagreement)
                .with("tolerance", cert.tolerance),
        ));
        push_audit(r, &format!("perturbed-{i}"), &audit, &mut rows, pair.note());
    }

    // μ on 𝒮 replaced by κk·sgn(z)^m, so |μ + tγ_m| ≤ |μ| for t of the
    // opposite sign
    let c = s.kappa * s.k;
    if c > 0.0 {
        let aligned: Vec<Result<PairAudit>> = jobs
            .par_iter()
            .filter(|(_, t)| *t != 0.0)
            .map(|&(m, t)| {
                let t = -t.abs().min(c);
                let pair = aligned_perturbation_pair(eta.clone(), set.clone(), m, c, t, &rule, s.degree)?;
                Ok(audit_infinitesimal(&pair, &phis, &rule)?)
            })
            .collect();
        for (i, (res, &(m, t))) in aligned.into_iter().zip(jobs.iter().filter(|(_, t)| *t != 0.0)).enumerate() {
            let audit = res?;
            let note = format!("aligned(m={m},c={c},t={})", -t.abs().min(c));
            push_audit(r, &format!("aligned-{i}"), &audit, &mut rows, &note);
        }
    }
    r.tables.push(Table {
        name: "infinitesimal".into(),
        header: vec!["pair", "check", "phi_id", "lhs", "rhs", "slack", "budget", "verdict"],
        rows,
    });
    Ok(())
}

/// Random-disk landslide probe and, for Construction I, the open-disk control.
fn landslide_checks(r: &mut Report, s: &Settings, mu: &BeltramiField, claim_non_landslide: bool) -> Result<()> {
    let disks = random_disks(s.disks, s.disk_radius, 0.9, s.seed);
    let probe = landslide_probe(mu, &disks, s.samples, s.seed)?;
    let detected = probe.probes.iter().filter(|p| p.gap_detected).count();
    let max_gap = probe.probes.iter().map(|p| p.gap).fold(f64::NEG_INFINITY, f64::max);
    let rows = probe
        .probes
        .iter()
        .map(|p| {
            vec![
                num(p.disk.center.re),
                num(p.disk.center.im),
                num(p.disk.radius),
                num(p.ess_sup.value),
                num(p.ess_sup.sigma),
                p.ess_sup.samples.to_string(),
                num(p.gap),
                p.gap_detected.to_string(),
            ]
        })
        .collect();
    r.tables.push(Table {
        name: "landslide".into(),
        header: vec!["center_re", "center_im", "radius", "ess_sup", "sigma", "samples", "gap", "gap_detected"],
        rows,
    });
    let data = Obj::new()
        .with("k", probe.k)
        .with("disks", disks.len())
        .with("gaps_detected", detected)
        .with("max_gap", max_gap)
        .with("verdict", probe.verdict());
    let status = if claim_non_landslide {
        Status::from_bool(!probe.landslide_evidence)
    } else {
        Status::Evidence
    };
    r.push(Check::new("landslide-probe", claims::NON_LANDSLIDE, status, data));
    r.lines.push(format!("landslide: {} ({detected} of {} disks show a gap)", probe.verdict(), disks.len()));

    if claim_non_landslide {
        // same η, but κ on an open disk: the sup on that disk drops to κk
        let control = deform(s.eta()?, s.kappa, SupportMask::Disk(s.disk))?;
        let p = landslide_probe(&control, &[s.disk], s.samples, s.seed)?;
        let d = &p.probes[0];
        let expected = (1.0 - s.kappa) * s.k;
        let ok = d.gap >= expected - 3.0 * d.ess_sup.sigma - 1e-12;
        r.push(Check::new(
            "landslide-control",
            claims::LANDSLIDE_CONTROL,
            Status::from_bool(ok && d.gap_detected),
            Obj::new()
                .with("disk", vec![s.disk.center.re, s.disk.center.im, s.disk.radius])
                .with("gap", d.gap)
                .with("expected_gap", expected)
                .with("sigma", d.ess_sup.sigma),
        ));
    }
    Ok(())
}

/// Fraction of stratified samples of `g` lying in E.
fn density(mask: &SupportMask, g: Disk, seed: u64) -> f64 {
    let pts = stratified_disk(g.center, g.radius, 2000, seed);
    let hit = pts.iter().filter(|z| mask.contains(**z)).count();
    hit as f64 / pts.len() as f64
}

fn local_checks(r: &mut Report, s: &Settings, mu: &BeltramiField) -> Result<()> {
    let mask = s.mask()?;
    let opts = SearchOptions {
        random_starts: s.starts,
        iterations: s.iterations,
        seed: s.seed,
        rho: s.rho,
        ..SearchOptions::default()
    };
    let mut candidates: Vec<(f64, Disk)> = random_disks(s.disks, s.disk_radius, 0.9, s.seed ^ 0x5eed)
        .into_iter()
        .map(|d| (density(&mask, d, s.seed), d))
        .collect();
    // a disk inside E sees a Teichmüller form again, so only disks that
    // meet both E and its complement can show a gap
    candidates.retain(|(f, _)| *f > 0.0 && *f < 1.0);
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    let dense: Vec<(f64, Disk)> = candidates.into_iter().take(3).collect();
    let avoiding = [Disk::new(Complex64::new(0.9, 0.0), 0.05), Disk::new(Complex64::new(-0.9, 0.0), 0.05)];
    let avoiding: Vec<(f64, Disk)> = avoiding
        .into_iter()
        .map(|d| (density(&mask, d, s.seed), d))
        .filter(|(f, _)| *f == 0.0)
        .collect();
    let probes: Vec<Result<_>> = dense
        .iter()
        .chain(avoiding.iter())
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(_, d)| {
            let family = local_family(&s.phi.phi, *d, s.local_degree)?;
            Ok(local_extremality_probe(mu, *d, &family, &opts, s.samples, (8, 64))?)
        })
        .collect();
    let mut rows = Vec::new();
    let mut any_positive = false;
    for (i, res) in probes.into_iter().enumerate() {
        let p = res?;
        let in_e = i < dense.len();
        let frac = if in_e { dense[i].0 } else { 0.0 };
        let margin = 3.0 * (p.ess_sup.sigma + p.search.error) + 1e-6;
        let positive = p.gap > margin;
        rows.push(vec![
            num(p.disk.center.re),
            num(p.disk.center.im),
            num(p.disk.radius),
            num(frac),
            num(p.ess_sup.value),
            num(p.search.value),
            num(p.gap),
            num(margin),
        ]);
        let data = Obj::new()
            .with("disk", vec![p.disk.center.re, p.disk.center.im, p.disk.radius])
            .with("density_of_e", frac)
            .with("ess_sup", p.ess_sup.value)
            .with("best_functional", p.search.value)
            .with("gap", p.gap)
            .with("margin", margin);
        if in_e {
            any_positive |= positive;
            r.push(Check::new(format!("local-probe/dense-{i}"), claims::LOCAL, Status::Evidence, data));
        } else {
            r.push(Check::new(
                format!("local-probe/avoiding-{}", i - dense.len()),
                claims::LOCAL,
                Status::from_bool(p.gap <= margin),
                data,
            ));
        }
    }
    if dense.is_empty() {
        r.push(Check::new(
            "local-probe/positive-gap",
            claims::LOCAL,
            Status::NotApplicable,
            Obj::new().with("reason", "no probe disk meets E"),
        ));
    } else {
        r.push(Check::new(
            "local-probe/positive-gap",
            claims::LOCAL,
            Status::from_bool(any_positive),
            Obj::new().with("disks", dense.len()),
        ));
    }
    r.tables.push(Table {
        name: "local".into(),
        header: vec!["center_re", "center_im", "radius", "density_of_e", "ess_sup", "best_functional", "gap", "margin"],
        rows,
    });
    Ok(())
}

pub(crate) fn sweep_table(points: &[SweepPoint]) -> Table {
    Table {
        name: "sweep".into(),
        header: vec!["x", "s", "functional", "delta", "normalized_delta", "mass_fraction", "error", "norm"],
        rows: points
            .iter()
            .map(|p| {
                vec![
                    num(p.x),
                    num(p.s),
                    num(p.functional),
                    num(p.delta),
                    num(p.normalized_delta),
                    num(p.mass_fraction),
                    num(p.error),
                    num(p.norm),
                ]
            })
            .collect(),
    }
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Kernel sweep trend checks plus a search over the kernel family.
pub(crate) fn sweep_checks(r: &mut Report, s: &Settings, mu: &BeltramiField) -> Result<Vec<SweepPoint>> {
    let mut xs = s.xs.clone();
    xs.sort_by(f64::total_cmp);
    let pts = kernel_sweep(mu, &xs, s.rho, &QuadratureRule::disk())?;
    let k = mu.sup_bound();
    let best = pts.iter().map(|p| p.functional).fold(f64::NEG_INFINITY, f64::max);
    let series = |f: fn(&SweepPoint) -> f64| pts.iter().map(f).collect::<Vec<f64>>();
    let base = || Obj::new().with("x", xs.clone());
    r.push(Check::new(
        "sweep/functional-reaches",
        claims::HAMILTON,
        Status::from_bool(best >= 0.98 * k),
        base().with("best", best).with("threshold", 0.98 * k).with("k", k),
    ));
    let functional = series(|p| p.functional);
    r.push(Check::new(
        "sweep/functional-non-decreasing",
        claims::HAMILTON,
        Status::from_bool(functional.windows(2).all(|w| w[1] >= w[0])),
        base().with("values", functional),
    ));
    for (id, values) in [
        ("sweep/delta-decreasing", series(|p| p.delta)),
        ("sweep/normalized-delta-decreasing", series(|p| p.normalized_delta)),
        ("sweep/mass-fraction-decreasing", series(|p| p.mass_fraction)),
    ] {
        r.push(Check::new(
            id,
            claims::HAMILTON,
            Status::from_bool(decreasing(&values)),
            base().with("values", values).with("rho", s.rho),
        ));
    }
    for p in &pts {
        r.lines.push(format!(
            "x = {}: functional {:.6}, delta {:.6}, mass fraction {:.4}",
            p.x, p.functional, p.delta, p.mass_fraction
        ));
    }
    r.tables.push(sweep_table(&pts));
    Ok(pts)
}

fn hamilton_checks(r: &mut Report, s: &Settings, mu: &BeltramiField) -> Result<()> {
    let pts = sweep_checks(r, s, mu)?;

    let mut fx = s.family_x.clone();
    fx.sort_by(f64::total_cmp);
    let members = fx.iter().map(|&x| sweep_kernel(x)).collect::<blab_core::Result<Vec<_>>>()?;
    let family = BasisFamily::new(members.clone())?;
    let s_min = sweep_exponent(*fx.last().expect("nonempty family"))?;
    let rule = QuadratureRule::disk()
        .with_circles(mu.circles())
        .with_circles(vec![s.rho])
        .refine_near(Complex64::new(1.0, 0.0), (12.0 / s_min).clamp(8.0, 150.0))?;
    let opts = SearchOptions {
        random_starts: s.starts,
        iterations: s.iterations,
        seed: s.seed,
        rho: s.rho,
        ..SearchOptions::default()
    };
    let res = maximize(mu, &family, &rule, &opts)?;
    let sweep_best = pts.iter().map(|p| p.functional).fold(f64::NEG_INFINITY, f64::max);
    let data = Obj::new()
        .with("family_x", fx.clone())
        .with("value", res.value)
        .with("error", res.error)
        .with("k", res.k)
        .with("starts", res.starts)
        .with("iterations", res.iterations)
        .with("best_start", res.best_start)
        .with("budget_exhausted", res.budget_exhausted)
        .with("degeneration", res.degeneration.clone())
        .with("verdict", res.verdict());
    r.push(Check::new("search/hamilton-bound", claims::HAMILTON_BOUND, Status::from_bool(res.respects_hamilton_bound()), data));
    r.push(Check::new(
        "search/at-least-sweep",
        claims::HAMILTON,
        Status::Evidence,
        Obj::new()
            .with("search_value", res.value)
            .with("sweep_best", sweep_best)
            .with("difference", res.value - sweep_best),
    ));

    let sequence: Vec<_> = s.xs.iter().map(|&x| sweep_kernel(x)).collect::<blab_core::Result<_>>()?;
    let samples = stratified_disk(Complex64::new(0.0, 0.0), 0.95, 1000, s.seed);
    let reich = reich_sequence_check(mu, &sequence, &samples, &rule, 0.0)?;
    r.push(Check::new(
        "reich-sequence",
        claims::REICH,
        Status::Evidence,
        Obj::new()
            .with("deltas", reich.deltas.clone())
            .with("normalized_deltas", reich.normalized_deltas.clone())
            .with("liminf_proxy", reich.liminf_proxy)
            .with("verdict", reich.verdict),
    ));
    Ok(())
}

/// Solves the Beltrami equation for μ and reports residual, |α| = |μ| and
/// image statistics of E.
pub(crate) fn solver_checks(r: &mut Report, s: &Settings, mu: &BeltramiField) -> Result<()> {
    let fft = RustFft2d::new();
    let map = solve_beltrami(mu, &s.solver, &fft)?;
    r.push(Check::new(
        "solver/residual",
        claims::SOLVER,
        Status::from_bool(map.residual <= 1e-3),
        Obj::new()
            .with("n", s.solver.n)
            .with("residual", map.residual)
            .with("iterations", map.iterations)
            .with("contraction_ratio", map.contraction_ratio())
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
    let mask = s.mask()?;
    let count = s.image_samples.max(1);
    let samples = stratified_disk(Complex64::new(0.0, 0.0), 1.0, count, s.seed);
    let cloud = image_of_set(&map, &mask, &samples, std::f64::consts::PI / count as f64, 1.0 / 64.0);
    r.push(Check::new(
        "solver/image-of-e",
        claims::IMAGE,
        Status::Evidence,
        Obj::new()
            .with("samples_in_e", cloud.sources.len())
            .with("covered_area", cloud.covered_area)
            .with("box_count", cloud.box_count)
            .with("box_size", cloud.box_size)
            .with("outside_image_of_disk", cloud.outside_image_of_disk),
    ));
    r.lines.push(format!(
        "solver: residual {:.3e} after {} iterations; image of E covers area {:.4}",
        map.residual, map.iterations, cloud.covered_area
    ));
    if s.grid {
        r.grids.push(("mu".into(), map.mu.clone()));
        r.grids.push(("f".into(), map.f.clone()));
    }
    Ok(())
}
