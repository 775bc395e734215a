use std::collections::BTreeMap;

use blab_core::beltrami::{delta, teichmuller_form, BeltramiField, QuadraticDifferential, StretchTwist};
use blab_core::cantor::{cantor_stage, RadialCantorSet};
use blab_core::inequalities::{
    aligned_perturbation_pair, audit_global, audit_infinitesimal, constants, modulus_identity,
    random_aligned_draw, twist_battery, GlobalPair, InequalityReport, InfinitesimalPair, PairAudit, Verdict,
};
use blab_core::quadrature::QuadratureRule;
use blab_core::sampling::rng;
use blab_core::Error as CoreError;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;

use super::{claims, phi_battery, Check, Report, Settings, Status, Table};
use crate::error::Result;
use crate::json::Obj;
use crate::output::num;

pub fn run_inequality_audit(s: &Settings) -> Result<Report> {
    let mut r = Report::new("inequality-audit", s);
    let phis = phi_battery(s.phis);
    constant_checks(&mut r);
    modulus_checks(&mut r, s.seed);
    delta_checks(&mut r, s)?;

    let mut batch = Batch::default();
    let rule = QuadratureRule::disk();

    let self_pairs: Vec<(String, GlobalPair)> = phis
        .iter()
        .map(|(id, phi)| Ok((format!("self({id})"), GlobalPair::self_pair(teichmuller_form(s.k, phi.clone())?))))
        .collect::<Result<_>>()?;
    let audits: Vec<Result<PairAudit>> = self_pairs.par_iter().map(|(_, p)| Ok(audit_global(p, &phis, &rule)?)).collect();
    for ((note, _), a) in self_pairs.iter().zip(audits) {
        batch.add("self", note, &a?);
    }

    let twin: Vec<GlobalPair> = (0..10)
        .map(|i| {
            let f = StretchTwist::new(0.8 + 0.05 * i as f64, -1.0 + 0.2 * i as f64)?;
            Ok(GlobalPair::stretch_twist(f, f))
        })
        .collect::<Result<_>>()?;
    let audits: Vec<Result<PairAudit>> = twin.par_iter().map(|p| Ok(audit_global(p, &phis, &rule)?)).collect();
    for (p, a) in twin.iter().zip(audits) {
        batch.add("self-twist", p.note(), &a?);
    }

    let twists = twist_battery(s.pairs, s.seed);
    let audits: Vec<Result<PairAudit>> = twists.par_iter().map(|p| Ok(audit_global(p, &phis, &rule)?)).collect();
    for (p, a) in twists.iter().zip(audits) {
        batch.add("twist", p.note(), &a?);
    }

    let aligned = aligned_jobs(s, &phis);
    let audits: Vec<Result<(String, PairAudit)>> = aligned
        .par_iter()
        .map(|job| {
            let rule = QuadratureRule::disk().with_circles(job.set.circles_f64()?);
            let pair = aligned_perturbation_pair(job.off.clone(), job.set.clone(), job.m, job.c, job.t, &rule, s.degree)?;
            let note = format!("{} stage={} lambda={} off={}", pair.note(), job.set.base().stage(), job.set.lambda(), job.off_label);
            Ok((note, audit_infinitesimal(&pair, &phis, &rule)?))
        })
        .collect();
    for a in audits {
        let (note, a) = a?;
        batch.add("aligned", &note, &a);
    }

    batch.finish(&mut r);
    rejection_checks(&mut r, s, &phis)?;
    let violated = r.violations();
    r.push(Check::new(
        "false-violations",
        claims::MAIN,
        Status::from_bool(violated == 0),
        Obj::new().with("count", violated),
    ));
    r.lines.push(format!("false violations: {violated}"));
    Ok(r)
}

fn constant_checks(r: &mut Report) {
    let ks: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
    let cs: Vec<_> = ks.iter().map(|&k| constants(k).expect("k in (0,1)")).collect();
    let increasing = |f: fn(&blab_core::inequalities::Constants) -> f64| cs.windows(2).all(|w| f(&w[1]) > f(&w[0]));
    let ok = increasing(|c| c.cprime) && increasing(|c| c.ctilde) && increasing(|c| c.uniform);
    r.push(Check::new(
        "constants-monotone",
        claims::CONSTANTS,
        Status::from_bool(ok),
        Obj::new()
            .with("k", ks.clone())
            .with("cprime", cs.iter().map(|c| c.cprime).collect::<Vec<_>>())
            .with("ctilde", cs.iter().map(|c| c.ctilde).collect::<Vec<_>>())
            .with("uniform", cs.iter().map(|c| c.uniform).collect::<Vec<_>>()),
    ));
}

fn modulus_checks(r: &mut Report, seed: u64) {
    let mut g = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let w = Complex64::from_polar(g.gen_range(0.0..10.0), g.gen_range(-3.2..3.2));
        let (a, b) = modulus_identity(w);
        worst = worst.max((a - b).abs() / (1.0 + w.norm_sqr()));
    }
    r.push(Check::new(
        "modulus-identity",
        claims::MODULUS_IDENTITY,
        Status::from_bool(worst <= 1e-12),
        Obj::new().with("samples", 100_000usize).with("max_relative_difference", worst),
    ));
}

/// δ of a Teichmüller form against its own φ.
fn delta_checks(r: &mut Report, s: &Settings) -> Result<()> {
    let rule = QuadratureRule::disk();
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for k in [s.k, 0.9] {
        for (_, phi) in phi_battery(super::PHI_BATTERY_SIZE) {
            let d = delta(&teichmuller_form(k, phi.clone())?, &phi, &rule)?;
            worst = worst.max(d.delta.abs() / d.norm);
            count += 1;
        }
    }
    r.push(Check::new(
        "delta-own-phi",
        claims::DELTA,
        Status::from_bool(worst <= 1e-8),
        Obj::new().with("members", count).with("max_relative_delta", worst).with("tolerance", 1e-8),
    ));
    Ok(())
}

struct AlignedJob {
    set: RadialCantorSet,
    off: BeltramiField,
    off_label: String,
    m: u32,
    c: f64,
    t: f64,
}

/// Random stage in 2..=4, λ in {1/2, ..., 9/10}, off-field teich(k', φ)
/// with k' ∈ [0.2, 0.8] and φ from the battery.
fn aligned_jobs(s: &Settings, phis: &[(String, QuadraticDifferential)]) -> Vec<AlignedJob> {
    let mut g = rng(s.seed.wrapping_add(1));
    (0..s.pairs)
        .map(|_| {
            let stage = g.gen_range(2..=4);
            let lambda = BigRational::new(BigInt::from(g.gen_range(5..=9)), BigInt::from(10));
            let set = RadialCantorSet::new(cantor_stage(stage, s.scheme).expect("stage in range"), lambda)
                .expect("lambda in range");
            let k = g.gen_range(0.2..=0.8);
            let (id, phi) = &phis[g.gen_range(0..phis.len())];
            let d = random_aligned_draw(&mut g, k);
            AlignedJob {
                set,
                off: teichmuller_form(k, phi.clone()).expect("k in range"),
                off_label: format!("teich({k:.4},{id})"),
                m: d.m,
                c: d.c,
                t: d.t,
            }
        })
        .collect()
}

/// Pairs that are not equivalent must not pass certification, and the
/// checked evaluators must refuse uncertified pairs.
fn rejection_checks(r: &mut Report, s: &Settings, phis: &[(String, QuadraticDifferential)]) -> Result<()> {
    let set = RadialCantorSet::new(cantor_stage(3, s.scheme)?, BigRational::new(4.into(), 5.into()))?;
    let rule = QuadratureRule::disk().with_circles(set.circles_f64()?);
    let mu = teichmuller_form(s.k, QuadraticDifferential::monomial(2))?;
    let candidates = [
        ("half", mu.clone().scaled(Complex64::new(0.5, 0.0))),
        ("shifted", mu.clone().plus(Complex64::new(0.1, 0.0), BeltramiField::Constant(Complex64::new(1.0, 0.0)))),
    ];
    for (name, nu) in candidates {
        let res = InfinitesimalPair::certify(mu.clone(), nu, name, &rule, s.degree);
        let rejected = matches!(res, Err(CoreError::Uncertified(_)));
        r.push(Check::new(
            format!("reject-certificate/{name}"),
            claims::REJECTION,
            Status::from_bool(rejected),
            Obj::new().with("pair", name).with("rejected", rejected),
        ));
    }
    let raw = InfinitesimalPair::uncertified(mu.clone(), mu.scaled(Complex64::new(0.5, 0.0)), "half, uncertified");
    let refused = matches!(audit_infinitesimal(&raw, phis, &rule), Err(CoreError::Uncertified(_)));
    r.push(Check::new(
        "reject-audit/uncertified",
        claims::REJECTION,
        Status::from_bool(refused),
        Obj::new().with("refused", refused),
    ));
    Ok(())
}

/// Per-pair results collapsed to one check per (kind, inequality), with the
/// full list in a CSV table.
#[derive(Default)]
struct Batch {
    rows: Vec<Vec<String>>,
    groups: BTreeMap<(&'static str, &'static str), Group>,
    pairs: BTreeMap<&'static str, usize>,
    preconditions: BTreeMap<&'static str, usize>,
}

#[derive(Default)]
struct Group {
    reports: usize,
    holds: usize,
    within: usize,
    violated: usize,
    worst_slack: Option<InequalityReport>,
}

fn claim_of(check: &str) -> &'static str {
    match check {
        "main" | "maineq" => claims::MAIN,
        "lemma-global" => claims::LEMMA_GLOBAL,
        "inf-main" => claims::INF_MAIN,
        _ => claims::LEMMA_INF,
    }
}

impl Batch {
    fn add(&mut self, kind: &'static str, note: &str, audit: &PairAudit) {
        let id = *self.pairs.entry(kind).and_modify(|n| *n += 1).or_insert(1) - 1;
        if audit.lemma_precondition.is_some() {
            *self.preconditions.entry(kind).or_insert(0) += 1;
        }
        for rep in &audit.reports {
            self.rows.push(vec![
                format!("{kind}-{id}"),
                kind.to_string(),
                note.to_string(),
                rep.check.to_string(),
                rep.phi_id.clone(),
                num(rep.lhs),
                num(rep.rhs),
                num(rep.slack),
                num(rep.budget),
                rep.verdict.as_str().to_string(),
            ]);
            let g = self.groups.entry((kind, rep.check)).or_default();
            g.reports += 1;
            match rep.verdict {
                Verdict::Holds => g.holds += 1,
                Verdict::HoldsWithinError => g.within += 1,
                Verdict::Violated => g.violated += 1,
            }
            let rel = |x: &InequalityReport| x.slack / x.rhs.abs().max(f64::MIN_POSITIVE);
            if g.worst_slack.as_ref().is_none_or(|w| rel(rep) < rel(w)) {
                g.worst_slack = Some(rep.clone());
            }
        }
    }

    fn finish(self, r: &mut Report) {
        for ((kind, check), g) in &self.groups {
            let status = if g.violated > 0 {
                Status::Violated
            } else if g.within > 0 {
                Status::HoldsWithinError
            } else {
                Status::Holds
            };
            let mut data = Obj::new()
                .with("kind", *kind)
                .with("check", *check)
                .with("pairs", self.pairs.get(kind).copied().unwrap_or(0))
                .with("reports", g.reports)
                .with("holds", g.holds)
                .with("holds_within_error", g.within)
                .with("violated", g.violated);
            if let Some(w) = &g.worst_slack {
                data.push("tightest_phi", w.phi_id.as_str());
                data.push("tightest_lhs", w.lhs);
                data.push("tightest_rhs", w.rhs);
                data.push("tightest_slack", w.slack);
                data.push("tightest_budget", w.budget);
            }
            r.lines.push(format!(
                "{kind}/{check}: {} reports, {} violated",
                g.reports, g.violated
            ));
            r.push(Check::new(format!("{kind}/{check}"), claim_of(check), status, data));
        }
        for (kind, n) in &self.preconditions {
            r.notes.push(format!("{kind}: Lemma precondition failed for {n} pairs; their Lemma rows are absent"));
        }
        r.tables.push(Table {
            name: "batch".into(),
            header: vec!["pair_id", "kind", "note", "check", "phi_id", "lhs", "rhs", "slack", "budget", "verdict"],
            rows: self.rows,
        });
    }
}
