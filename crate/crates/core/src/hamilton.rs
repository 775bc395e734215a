//! Hamilton functional `Re ∬μφ / ‖φ‖` and its maximisation over finite
//! families of quadratic differentials.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // resolved inherently once std is in the graph
use num_traits::Float;
use rand::Rng;

use crate::beltrami::{ess_sup_on, l1_norm, Disk, EssSup, QuadraticDifferential, SupportMask};
use crate::beltrami::{delta, BeltramiField};
use crate::error::{Error, Result};
use crate::quadrature::{Point, QuadratureRule};
use crate::sampling::rng;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Nonempty list of integrable quadratic differentials.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFamily {
    members: Vec<QuadraticDifferential>,
}

impl BasisFamily {
    pub fn new(members: Vec<QuadraticDifferential>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::domain("empty family"));
        }
        if let Some(bad) = members.iter().find(|m| !m.is_integrable()) {
            return Err(Error::InfiniteNorm(format!("family member {} is not integrable", bad.label())));
        }
        Ok(Self { members })
    }

    /// Members only need to be integrable over the disk `g`, so forms with a
    /// boundary singularity are allowed when it stays off the closure of `g`.
    pub fn restricted(members: Vec<QuadraticDifferential>, g: Disk) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::domain("empty family"));
        }
        for m in &members {
            if let Some(p) = m.singular_point() {
                if (p - g.center).norm() <= g.radius {
                    return Err(Error::InfiniteNorm(format!(
                        "family member {} is singular on the closure of the probe disk",
                        m.label()
                    )));
                }
            }
        }
        Ok(Self { members })
    }

    /// z^0, …, z^degree.
    pub fn monomials(degree: usize) -> Self {
        Self {
            members: (0..=degree).map(QuadraticDifferential::monomial).collect(),
        }
    }

    pub fn members(&self) -> &[QuadraticDifferential] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Number of members linearly independent on a coarse sample, by
    /// Gram-Schmidt with relative threshold 1e-10.
    pub fn span_dimension(&self) -> usize {
        let pts: Vec<Point> = crate::sampling::stratified_disk(ZERO, 0.95, 400, 11)
            .into_iter()
            .map(Point::new)
            .collect();
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        for m in &self.members {
            let mut v: Vec<Complex64> = pts.iter().map(|p| m.value(p)).collect();
            let n0 = norm(&v);
            for b in &basis {
                let d: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
            let n = norm(&v);
            if n > 1e-10 * n0 && n > 0.0 {
                v.iter_mut().for_each(|x| *x /= n);
                basis.push(v);
            }
        }
        basis.len()
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Re ∬μφ / ‖φ‖.
pub fn hamilton_functional(mu: &BeltramiField, phi: &QuadraticDifferential, rule: &QuadratureRule) -> Result<f64> {
    let d = delta(mu, phi, rule)?;
    if !(d.norm > 0.0) {
        return Err(Error::domain(format!("‖{}‖ = 0", phi.label())));
    }
    Ok(d.pairing.re / d.norm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Random starts in addition to one start per family member.
    pub random_starts: usize,
    pub iterations: usize,
    pub seed: u64,
    /// c₀ in the step size c₀/√iter.
    pub step0: f64,
    /// Radius for the degeneration profile.
    pub rho: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            random_starts: 8,
            iterations: 200,
            seed: 1,
            step0: 0.5,
            rho: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Re⟨μ, φ*⟩/‖φ*‖ on the full rule.
    pub value: f64,
    pub error: f64,
    /// Coefficients of φ* relative to the unit-norm family members.
    pub coefficients: Vec<Complex64>,
    pub member_norms: Vec<f64>,
    pub starts: usize,
    pub iterations: usize,
    pub best_start: usize,
    /// Running best of the winning start, one entry per iteration.
    pub trace: Vec<f64>,
    /// Mass fraction within |z| ≤ ρ of the winning start's iterates, at nine
    /// evenly spaced checkpoints.
    pub degeneration: Vec<f64>,
    /// Still improving in the last tenth of the budget.
    pub budget_exhausted: bool,
    /// ‖μ‖∞ bound used for the Hamilton bound.
    pub k: f64,
}

impl SearchResult {
    pub fn respects_hamilton_bound(&self) -> bool {
        self.value <= self.k + 3.0 * self.error + 1e-12
    }

    pub fn verdict(&self) -> &'static str {
        if self.respects_hamilton_bound() {
            "hamilton-bound-respected"
        } else {
            "hamilton-bound-violated"
        }
    }
}

struct Table {
    // node weights (coarse rule) and member values, member-major
    w: Vec<f64>,
    inner: Vec<bool>,
    vals: Vec<Vec<Complex64>>,
    b: Vec<Complex64>,
}

impl Table {
    fn eval(&self, c: &[Complex64]) -> (f64, f64, Vec<Complex64>, f64) {
        let d = c.len();
        let num: Complex64 = c.iter().zip(&self.b).map(|(cj, bj)| cj * bj).sum();
        let mut nsum = crate::CompensatedSum::new();
        let mut inner = crate::CompensatedSum::new();
        let mut grad_n = vec![ZERO; d];
        for i in 0..self.w.len() {
            let v: Complex64 = c.iter().zip(&self.vals).map(|(cj, col)| cj * col[i]).sum();
            let a = v.norm();
            nsum.add(self.w[i] * a);
            if self.inner[i] {
                inner.add(self.w[i] * a);
            }
            if a > 0.0 {
                let s = v / a * self.w[i];
                for (g, col) in grad_n.iter_mut().zip(&self.vals) {
                    *g += s * col[i].conj();
                }
            }
        }
        let n = nsum.value();
        (num.re, n, grad_n, inner.value())
    }
}

/// Seeded multi-start normalised subgradient ascent of Re⟨μ, φ_c⟩/‖φ_c‖ over
/// φ_c = Σ c_j φ_j.
///
/// The search runs on the coarse level of `rule`; the returned value is then
/// recomputed on the full rule.
pub fn maximize(
    mu: &BeltramiField,
    family: &BasisFamily,
    rule: &QuadratureRule,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    if opts.iterations < 100 {
        return Err(Error::domain(format!("iteration budget {} below 100", opts.iterations)));
    }
    let d = family.len();
    let members = family.members();
    let rho = opts.rho;

    let mut w = Vec::new();
    let mut inner = Vec::new();
    let mut vals: Vec<Vec<Complex64>> = vec![Vec::new(); d];
    let mut bsum = vec![crate::ComplexSum::new(); d];
    let mut bad = None;
    rule.for_each(|p, _, wl| {
        if wl == 0.0 || bad.is_some() {
            return;
        }
        let m = mu.value(p);
        w.push(wl);
        inner.push(p.z.norm() <= rho);
        for j in 0..d {
            let v = members[j].value(p);
            if !(v.re.is_finite() && v.im.is_finite()) {
                bad = Some(*p);
            }
            vals[j].push(v);
            bsum[j].add(m * v * wl);
        }
    });
    if let Some(p) = bad {
        return Err(Error::SingularSample { re: p.z.re, im: p.z.im });
    }
    // unit-norm members
    let mut member_norms = Vec::with_capacity(d);
    for j in 0..d {
        let n: f64 = vals[j].iter().zip(&w).map(|(v, w)| v.norm() * w).sum();
        if !(n > 0.0) {
            return Err(Error::domain(format!("member {} has zero norm", members[j].label())));
        }
        vals[j].iter_mut().for_each(|v| *v /= n);
        member_norms.push(n);
    }
    let b: Vec<Complex64> = bsum.iter().zip(&member_norms).map(|(s, n)| s.value() / *n).collect();
    let table = Table { w, inner, vals, b };

    let mut g = rng(opts.seed);
    let mut starts: Vec<Vec<Complex64>> = (0..d)
        .map(|j| {
            let mut c = vec![ZERO; d];
            c[j] = Complex64::new(1.0, 0.0);
            c
        })
        .collect();
    for _ in 0..opts.random_starts {
        starts.push(
            (0..d)
                .map(|_| Complex64::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)))
                .collect(),
        );
    }

    let checkpoints: Vec<usize> = (0..=8).map(|i| i * (opts.iterations - 1) / 8).collect();
    // (value, start, coefficients, trace, degeneration, still improving late)
    type Best = (f64, usize, Vec<Complex64>, Vec<f64>, Vec<f64>, bool);
    let mut best: Option<Best> = None;
    for (si, start) in starts.iter().enumerate() {
        let mut c = start.clone();
        let mut local_best = f64::NEG_INFINITY;
        let mut local_c = c.clone();
        let mut trace = Vec::with_capacity(opts.iterations);
        let mut degeneration = Vec::with_capacity(9);
        let late_start = opts.iterations - opts.iterations / 10;
        let mut before_late = f64::NEG_INFINITY;
        for it in 0..opts.iterations {
            let (num, n, grad_n, inn) = table.eval(&c);
            if !(n > 0.0) {
                break;
            }
            let val = num / n;
            if it == late_start {
                before_late = local_best;
            }
            if val > local_best {
                local_best = val;
                local_c = c.iter().map(|x| x / n).collect();
            }
            trace.push(local_best);
            if checkpoints.contains(&it) {
                degeneration.push(inn / n);
            }
            let grad: Vec<Complex64> = (0..d)
                .map(|j| table.b[j].conj() / n - grad_n[j] * (num / (n * n)))
                .collect();
            let gn = norm(&grad);
            if !(gn > 0.0) {
                continue;
            }
            let cn = norm(&c) / n;
            let step = opts.step0 / ((it + 1) as f64).sqrt();
            c = c
                .iter()
                .zip(&grad)
                .map(|(x, gr)| x / n + gr * (step * cn / gn))
                .collect();
        }
        let better = match &best {
            None => true,
            Some((v, ..)) => local_best > *v,
        };
        if better {
            best = Some((local_best, si, local_c, trace, degeneration, local_best - before_late > 1e-6 * local_best.abs()));
        }
    }
    let (_, best_start, coefficients, trace, degeneration, exhausted) =
        best.ok_or_else(|| Error::domain("no start produced a finite objective"))?;

    // full-rule value of the winner
    let ints = rule.integrate_many(2, |p, out| {
        let mut v = ZERO;
        for j in 0..d {
            v += coefficients[j] * members[j].value(p) / member_norms[j];
        }
        out[0] = mu.value(p) * v;
        out[1] = Complex64::new(v.norm(), 0.0);
    })?;
    let n = ints[1].value.re;
    let k = mu.sup_bound();
    Ok(SearchResult {
        value: ints[0].value.re / n,
        error: (ints[0].error + k * ints[1].error) / n,
        coefficients,
        member_norms,
        starts: starts.len(),
        iterations: opts.iterations,
        best_start,
        trace,
        degeneration,
        budget_exhausted: exhausted,
        k,
    })
}

/// Mass fraction ∬_{|z|≤ρ}|φ_n| / ‖φ_n‖ for each member of the sequence.
pub fn degeneration_profile(sequence: &[QuadraticDifferential], rho: f64, rule: &QuadratureRule) -> Result<Vec<f64>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::domain(format!("ρ = {rho} outside (0, 1]")));
    }
    let rule = rule.clone().with_circles(vec![rho]);
    sequence
        .iter()
        .map(|phi| {
            if !phi.is_integrable() {
                return Err(Error::InfiniteNorm(phi.label()));
            }
            let r = rule.integrate_many(2, |p, out| {
                let a = phi.value(p).norm();
                out[0] = Complex64::new(a, 0.0);
                if p.z.norm() <= rho {
                    out[1] = Complex64::new(a, 0.0);
                }
            })?;
            Ok(r[1].value.re / r[0].value.re)
        })
        .collect()
}

/// Exponent of the sweep kernel ψ_x = (1 − z)^{s−2}: s = 2(1 − x)^{2/3}.
pub fn sweep_exponent(x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::domain(format!("sweep parameter x = {x} outside [0, 1)")));
    }
    Ok(2.0 * (1.0 - x).powf(2.0 / 3.0))
}

pub fn sweep_kernel(x: f64) -> Result<QuadraticDifferential> {
    QuadraticDifferential::boundary_power(sweep_exponent(x)?)
}

/// Deepest grading used by the sweep; |1 − z|^{s−2} overflows well past it.
const SWEEP_MAX_STRENGTH: f64 = 150.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub x: f64,
    pub s: f64,
    pub functional: f64,
    pub delta: f64,
    /// δ/‖ψ‖.
    pub normalized_delta: f64,
    pub norm: f64,
    /// Quadrature estimate plus the mass below the grading floor.
    pub error: f64,
    /// ∬_{|z|≤ρ}|ψ| / ‖ψ‖.
    pub mass_fraction: f64,
    pub strength: f64,
}

/// Hamilton functional, δ and mass fraction of ψ_x for each x, on `rule`
/// refined towards z = 1 as deep as the exponent needs.
pub fn kernel_sweep(mu: &BeltramiField, xs: &[f64], rho: f64, rule: &QuadratureRule) -> Result<Vec<SweepPoint>> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::domain(format!("ρ = {rho} outside (0, 1)")));
    }
    let k = mu.sup_bound();
    let base = rule.clone().with_circles(mu.circles()).with_circles(vec![rho]);
    xs.iter()
        .map(|&x| {
            let s = sweep_exponent(x)?;
            let psi = QuadraticDifferential::boundary_power(s)?;
            let strength = (12.0 / s).clamp(8.0, SWEEP_MAX_STRENGTH);
            let r = base.refine_near(Complex64::new(1.0, 0.0), strength)?;
            let ints = r.integrate_many(3, |p, out| {
                let v = psi.value(p);
                let a = v.norm();
                out[0] = mu.value(p) * v;
                out[1] = Complex64::new(a, 0.0);
                if p.z.norm() <= rho {
                    out[2] = Complex64::new(a, 0.0);
                }
            })?;
            let norm = ints[1].value.re;
            let pair = ints[0].value.re;
            // ∬_{|1−z|<ε} |1 − z|^{s−2} ≤ π ε^s / s
            let tail = PI * 10f64.powf(-strength * s) / s;
            let error = ints[0].error + k * ints[1].error + (1.0 + k) * tail;
            let delta = k * norm - pair;
            Ok(SweepPoint {
                x,
                s,
                functional: pair / norm,
                delta,
                normalized_delta: delta / norm,
                norm,
                error,
                mass_fraction: ints[2].value.re / norm,
                strength,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReichReport {
    pub deltas: Vec<f64>,
    /// δ[φ_n]/‖φ_n‖.
    pub normalized_deltas: Vec<f64>,
    pub errors: Vec<f64>,
    /// min over the samples of min_n |φ_n(z)|.
    pub liminf_proxy: f64,
    pub threshold: f64,
    pub verdict: &'static str,
}

/// δ-trend (condition (a)) and the pointwise lower-bound proxy (condition (b))
/// for a candidate Reich sequence. Necessary conditions only.
pub fn reich_sequence_check(
    mu: &BeltramiField,
    sequence: &[QuadraticDifferential],
    samples: &[Complex64],
    rule: &QuadratureRule,
    threshold: f64,
) -> Result<ReichReport> {
    let mut deltas = Vec::new();
    let mut normalized = Vec::new();
    let mut errors = Vec::new();
    for phi in sequence {
        let d = delta(mu, phi, rule)?;
        deltas.push(d.delta);
        normalized.push(d.delta / d.norm);
        errors.push(d.error / d.norm);
    }
    let mut proxy = f64::INFINITY;
    for &z in samples {
        let p = Point::new(z);
        for phi in sequence {
            proxy = proxy.min(phi.value(&p).norm());
        }
    }
    let verdict = if mu.sup_bound() == 0.0 {
        "vacuous-consistent"
    } else {
        let trend_ok = normalized
            .windows(2)
            .zip(errors.windows(2))
            .all(|(d, e)| d[1] <= d[0] + 3.0 * (e[0] + e[1]) + 1e-12);
        if !trend_ok {
            "fails at (a)"
        } else if !(proxy > threshold) {
            "fails at (b)"
        } else {
            "consistent with Reich sequence"
        }
    };
    Ok(ReichReport {
        deltas,
        normalized_deltas: normalized,
        errors,
        liminf_proxy: proxy,
        threshold,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalProbe {
    pub disk: Disk,
    pub ess_sup: EssSup,
    pub search: SearchResult,
    /// essSup over G minus the best functional value over G.
    pub gap: f64,
}

/// Members of the form φ0·((z − c)/ρ)^j, j ≤ degree, for the disk G.
pub fn local_family(phi0: &QuadraticDifferential, g: Disk, degree: usize) -> Result<BasisFamily> {
    BasisFamily::restricted(
        (0..=degree)
            .map(|j| phi0.clone().times(QuadraticDifferential::local_monomial(g.center, g.radius, j)))
            .collect(),
        g,
    )
}

/// Compares the sampled sup of |μ| over G with the best Hamilton functional
/// over G. A clearly positive gap is evidence against extremality on G.
pub fn local_extremality_probe(
    mu: &BeltramiField,
    g: Disk,
    family: &BasisFamily,
    opts: &SearchOptions,
    sample_budget: usize,
    rule_resolution: (usize, usize),
) -> Result<LocalProbe> {
    if !(g.radius > 0.0) {
        return Err(Error::domain("empty probe disk"));
    }
    if !g.compactly_inside() {
        return Err(Error::domain("probe disk must lie inside the open unit disk"));
    }
    let rule = QuadratureRule::subdisk(g.center, g.radius)?
        .with_resolution(rule_resolution.0, rule_resolution.1);
    let ess = ess_sup_on(mu, &SupportMask::Whole, g, sample_budget, opts.seed)?;
    let search = if ess.value == 0.0 {
        // μ vanishes on G: every functional value is 0
        zero_search(family, opts)
    } else {
        maximize(mu, family, &rule, opts)?
    };
    Ok(LocalProbe {
        disk: g,
        gap: ess.value - search.value,
        ess_sup: ess,
        search,
    })
}

fn zero_search(family: &BasisFamily, opts: &SearchOptions) -> SearchResult {
    let mut c = vec![ZERO; family.len()];
    c[0] = Complex64::new(1.0, 0.0);
    SearchResult {
        value: 0.0,
        error: 0.0,
        coefficients: c,
        member_norms: vec![1.0; family.len()],
        starts: family.len() + opts.random_starts,
        iterations: 0,
        best_start: 0,
        trace: Vec::new(),
        degeneration: Vec::new(),
        budget_exhausted: false,
        k: 0.0,
    }
}

/// Label of a family, for reports.
pub fn family_label(family: &BasisFamily) -> String {
    let mut s = String::new();
    for (i, m) in family.members().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&m.label());
    }
    s
}

/// ‖φ‖ on the rule, re-exported here for callers of the functional.
pub fn norm_of(phi: &QuadraticDifferential, rule: &QuadratureRule) -> Result<f64> {
    Ok(l1_norm(phi, rule)?.value.re)
}

