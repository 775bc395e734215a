//! Reich-Strebel type inequalities for equivalent pairs of Beltrami
//! differentials, with explicit constants.
//!
//! Pairs can only be built through constructors that certify equivalence:
//! the self pair, pairs of stretch-twist maps (all equal to the identity on the
//! circle), and infinitesimal pairs whose pairings against z^n agree.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // resolved inherently once std is in the graph
use num_traits::Float;
use rand::Rng;

use crate::beltrami::{perturbation, sgn, BeltramiField, QuadraticDifferential, StretchTwist, SupportMask};
use crate::cantor::RadialCantorSet;
use crate::error::{Error, Result};
use crate::quadrature::{Point, QuadratureRule};
use crate::sampling::rng;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Closed-form constants of the two Lemma bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// C'(k) = 2√2·k(1 + k²)/((1 + k)(1 − k)³); the global bound uses C'².
    pub cprime: f64,
    /// C̃(k) = 2√2·k(1 + k²)/(1 − k²)²; the sharp infinitesimal bound uses C̃².
    pub ctilde: f64,
    /// 8k², valid for every k ≥ 0.
    pub uniform: f64,
}

pub fn uniform_constant(k: f64) -> f64 {
    8.0 * k * k
}

pub fn constants(k: f64) -> Result<Constants> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::domain(format!("k = {k} outside [0, 1)")));
    }
    let a = 2.0 * core::f64::consts::SQRT_2 * k * (1.0 + k * k);
    Ok(Constants {
        cprime: a / ((1.0 + k) * (1.0 - k).powi(3)),
        ctilde: a / (1.0 - k * k).powi(2),
        uniform: uniform_constant(k),
    })
}

/// ||w| − w|² = 2|w|(|w| − Re w); returns both sides.
pub fn modulus_identity(w: Complex64) -> (f64, f64) {
    let r = w.norm();
    ((Complex64::new(r, 0.0) - w).norm_sqr(), 2.0 * r * (r - w.re))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    HoldsWithinError,
    Violated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsWithinError => "holds-within-error",
            Verdict::Violated => "violated",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub check: &'static str,
    pub phi_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub budget: f64,
    pub verdict: Verdict,
}

impl InequalityReport {
    /// `errors` are the quadrature error estimates of every integral involved;
    /// the budget is three times their sum.
    pub fn new(check: &'static str, phi_id: &str, lhs: f64, rhs: f64, errors: &[f64]) -> Self {
        let slack = rhs - lhs;
        let budget = 3.0 * errors.iter().sum::<f64>();
        let verdict = if slack >= 0.0 {
            Verdict::Holds
        } else if slack >= -budget {
            Verdict::HoldsWithinError
        } else {
            Verdict::Violated
        };
        Self {
            check,
            phi_id: phi_id.into(),
            lhs,
            rhs,
            slack,
            budget,
            verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum GlobalKind {
    SelfPair(BeltramiField),
    Twist { f: StretchTwist, g: StretchTwist },
}

/// Two Teichmüller-equivalent dilatations μ ~ ν, with α = μ̃∘f, β = ν̃∘f and
/// τ = conj(f_z)/f_z available pointwise.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalPair {
    kind: GlobalKind,
    note: String,
}

#[derive(Debug, Clone, Copy)]
struct GlobalSample {
    mu: Complex64,
    alpha: Complex64,
    beta: Complex64,
    tau: Complex64,
}

impl GlobalPair {
    /// ν = μ for a bare μ. The map f is not known, so τ is not either: the
    /// τ-free checks run (with α = β = −μ) and the μ/α form is skipped. A
    /// stretch-twist paired with itself gives a self pair with exact τ.
    pub fn self_pair(mu: BeltramiField) -> Self {
        Self {
            note: format!("self pair of {}", mu.label()),
            kind: GlobalKind::SelfPair(mu),
        }
    }

    /// f and g stretch-twists; both fix the unit circle pointwise, so they
    /// are equivalent.
    pub fn stretch_twist(f: StretchTwist, g: StretchTwist) -> Self {
        Self {
            note: format!(
                "stretch-twists f(p={}, t={}), g(p={}, t={}); both are the identity on the circle",
                f.p, f.t, g.p, g.t
            ),
            kind: GlobalKind::Twist { f, g },
        }
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    /// Whether τ = conj(f_z)/f_z is available, which the μ/α form needs.
    pub fn has_tau(&self) -> bool {
        matches!(self.kind, GlobalKind::Twist { .. })
    }

    pub fn mu(&self) -> BeltramiField {
        match &self.kind {
            GlobalKind::SelfPair(m) => m.clone(),
            GlobalKind::Twist { f, .. } => BeltramiField::StretchTwist(*f),
        }
    }

    /// ‖μ‖∞ from the construction.
    pub fn k(&self) -> f64 {
        self.mu().sup_bound()
    }

    fn sample(&self, p: &Point) -> GlobalSample {
        match &self.kind {
            GlobalKind::SelfPair(m) => {
                let mu = m.value(p);
                GlobalSample {
                    mu,
                    alpha: -mu,
                    beta: -mu,
                    tau: ONE,
                }
            }
            GlobalKind::Twist { f, g } => {
                let mu = f.dilatation(p.z);
                let fz = f.fz(p.z);
                let tau = if fz == ZERO { ONE } else { fz.conj() / fz };
                GlobalSample {
                    mu,
                    alpha: -mu / tau,
                    beta: g.inverse_dilatation(f.map(p.z)),
                    tau,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub degree: usize,
    /// max_n |∬ (μ − ν) z^n|.
    pub max_disagreement: f64,
    pub tolerance: f64,
}

/// μ ≈ ν: equal pairings against every integrable holomorphic φ, certified
/// on z^0..z^degree.
#[derive(Debug, Clone, PartialEq)]
pub struct InfinitesimalPair {
    mu: BeltramiField,
    nu: BeltramiField,
    note: String,
    certificate: Option<Certificate>,
}

impl InfinitesimalPair {
    /// Accepts the pair only if |∬(μ − ν)z^n| ≤ 1e-6·sup|μ − ν| for n ≤ `degree`.
    pub fn certify(
        mu: BeltramiField,
        nu: BeltramiField,
        note: &str,
        rule: &QuadratureRule,
        degree: usize,
    ) -> Result<Self> {
        let mut sup = 0.0f64;
        let ints = rule.integrate_many(degree + 1, |p, out| {
            let d = mu.value(p) - nu.value(p);
            sup = sup.max(d.norm());
            let mut zn = ONE;
            for o in out.iter_mut() {
                *o = d * zn;
                zn *= p.z;
            }
        })?;
        let max_disagreement = ints.iter().map(|i| i.value.norm()).fold(0.0, f64::max);
        let tolerance = 1e-6 * sup;
        if max_disagreement > tolerance {
            return Err(Error::Uncertified(format!(
                "{note}: pairings against z^n (n ≤ {degree}) differ by {max_disagreement:e} > {tolerance:e}"
            )));
        }
        Ok(Self {
            mu,
            nu,
            note: note.into(),
            certificate: Some(Certificate {
                degree,
                max_disagreement,
                tolerance,
            }),
        })
    }

    /// Builds a pair without any certificate. The checks refuse it; only the
    /// `*_unchecked` evaluators accept it.
    pub fn uncertified(mu: BeltramiField, nu: BeltramiField, note: &str) -> Self {
        Self {
            mu,
            nu,
            note: note.into(),
            certificate: None,
        }
    }

    pub fn mu(&self) -> &BeltramiField {
        &self.mu
    }

    pub fn nu(&self) -> &BeltramiField {
        &self.nu
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    fn require_certificate(&self) -> Result<()> {
        match self.certificate {
            Some(_) => Ok(()),
            None => Err(Error::Uncertified(format!(
                "{}: no pairing-agreement certificate",
                self.note
            ))),
        }
    }
}

fn precondition(check: &'static str, z: Complex64, detail: String) -> Error {
    Error::Precondition {
        check,
        re: z.re,
        im: z.im,
        detail,
    }
}

/// All global checks for one pair against a battery of φ, in a single pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PairAudit {
    pub reports: Vec<InequalityReport>,
    /// Set when |β| ≤ |α| fails somewhere; the Lemma report is then absent.
    pub lemma_precondition: Option<Error>,
}

const GLOBAL_TERMS: usize = 7;

/// Main Inequality in both forms and the global Lemma bound, for each φ.
pub fn audit_global(pair: &GlobalPair, phis: &[(String, QuadraticDifferential)], rule: &QuadratureRule) -> Result<PairAudit> {
    for (id, phi) in phis {
        if !phi.is_integrable() {
            return Err(Error::InfiniteNorm(format!("{id} is not integrable")));
        }
    }
    let k = pair.k();
    let c = constants(k)?.cprime.powi(2);
    let mut domain: Option<Error> = None;
    let mut hypothesis: Option<Error> = None;
    let ints = rule.integrate_many(GLOBAL_TERMS * phis.len(), |p, out| {
        let s = pair.sample(p);
        let nb = s.beta.norm();
        let na = s.alpha.norm();
        if nb >= 1.0 {
            if domain.is_none() {
                domain = Some(Error::domain(format!(
                    "|β| = {nb} ≥ 1 at ({}, {})",
                    p.z.re, p.z.im
                )));
            }
            return;
        }
        if hypothesis.is_none() && nb > na * (1.0 + 1e-12) + 1e-300 {
            hypothesis = Some(precondition(
                "lemma-global",
                p.z,
                format!("|β| = {nb:e} exceeds |α| = {na:e}"),
            ));
        }
        let mu = s.mu;
        let in_lambda = mu != ZERO;
        let sm = sgn(mu);
        let one_b = 1.0 - nb * nb;
        let one_a = 1.0 - na * na;
        let one_m = 1.0 - mu.norm_sqr();
        // μ/α = −τ
        let ratio = -s.tau;
        let dab = s.alpha - s.beta;
        for (i, (_, phi)) in phis.iter().enumerate() {
            let v = phi.value(p);
            let av = v.norm();
            let ph = phi.phase(p);
            let o = &mut out[i * GLOBAL_TERMS..(i + 1) * GLOBAL_TERMS];
            o[0] = v;
            if av > 0.0 {
                let a = ONE - mu * ph;
                let b = ONE - mu.conj() * ph.conj();
                let corr = ONE + s.beta * ratio * b / a;
                o[1] = Complex64::new(av * a.norm_sqr() / one_m * corr.norm_sqr() / one_b, 0.0);
            }
            o[2] = (s.beta - s.alpha) * (ONE - s.alpha * s.beta.conj()) * s.tau / (one_a * one_b) * v;
            o[3] = Complex64::new(dab.norm_sqr() / (one_a * one_b) * av, 0.0);
            // α − β is only known to ε(|α| + |β|) at each node, which bounds
            // the rounding in the maineq left side
            let lhs_abs = (ONE - s.alpha * s.beta.conj()).norm() / (one_a * one_b) * av;
            o[6] = Complex64::new(4.0 * f64::EPSILON * (na + nb) * lhs_abs, 0.0);
            if in_lambda {
                o[4] = Complex64::new(dab.norm_sqr() * av, 0.0);
                // nonnegative pointwise; clamp the rounding
                o[5] = Complex64::new((av - (v * sm).re).max(0.0), 0.0);
            }
        }
    })?;
    if let Some(e) = domain {
        return Err(e);
    }
    let mut reports = Vec::with_capacity(3 * phis.len());
    for (i, (id, _)) in phis.iter().enumerate() {
        let t = &ints[i * GLOBAL_TERMS..(i + 1) * GLOBAL_TERMS];
        if pair.has_tau() {
            reports.push(InequalityReport::new("main", id, t[0].value.re, t[1].value.re, &[t[0].error, t[1].error]));
        }
        reports.push(InequalityReport::new(
            "maineq",
            id,
            t[2].value.re,
            t[3].value.re,
            &[t[2].error, t[3].error, t[6].value.re],
        ));
        if hypothesis.is_none() {
            reports.push(InequalityReport::new(
                "lemma-global",
                id,
                t[4].value.re,
                c * t[5].value.re,
                &[t[4].error, c * t[5].error],
            ));
        }
    }
    Ok(PairAudit {
        reports,
        lemma_precondition: hypothesis,
    })
}

fn single(audit: PairAudit, check: &str) -> InequalityReport {
    audit
        .reports
        .into_iter()
        .find(|r| r.check == check)
        .expect("check present in audit")
}

fn one_phi(phi: &QuadraticDifferential) -> Vec<(String, QuadraticDifferential)> {
    vec![(phi.label(), phi.clone())]
}

/// Main Inequality, `Re ∬φ ≤ ∬|φ|·|1 − μφ/|φ||²/(1 − |μ|²)·|1 + β(μ/α)…|²/(1 − |β|²)`.
pub fn main_inequality_check(pair: &GlobalPair, phi: &QuadraticDifferential, rule: &QuadratureRule) -> Result<InequalityReport> {
    if !pair.has_tau() {
        return Err(Error::Contract(format!("{}: τ is unknown, the μ/α form needs it", pair.note())));
    }
    Ok(single(audit_global(pair, &one_phi(phi), rule)?, "main"))
}

/// The Main Inequality in its α, β, τ form.
pub fn main_inequality_alpha_form(pair: &GlobalPair, phi: &QuadraticDifferential, rule: &QuadratureRule) -> Result<InequalityReport> {
    Ok(single(audit_global(pair, &one_phi(phi), rule)?, "maineq"))
}

/// ∬_Λ |α − β|²|φ| ≤ C'(k)²·∬_Λ (|φ| − Re(φ sgn μ)), requiring |β| ≤ |α|.
pub fn lemma_global_bound(pair: &GlobalPair, phi: &QuadraticDifferential, rule: &QuadratureRule) -> Result<InequalityReport> {
    let a = audit_global(pair, &one_phi(phi), rule)?;
    if let Some(e) = a.lemma_precondition {
        return Err(e);
    }
    Ok(single(a, "lemma-global"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaVariant {
    /// C̃(k)².
    Sharp,
    /// 8k².
    Uniform,
}

const INF_TERMS: usize = 4;

/// Infinitesimal Main Inequality and both infinitesimal Lemma bounds.
pub fn audit_infinitesimal(
    pair: &InfinitesimalPair,
    phis: &[(String, QuadraticDifferential)],
    rule: &QuadratureRule,
) -> Result<PairAudit> {
    pair.require_certificate()?;
    audit_infinitesimal_unchecked(pair, phis, rule)
}

/// As [`audit_infinitesimal`] but without requiring a certificate; for
/// demonstrating what happens with non-equivalent pairs.
pub fn audit_infinitesimal_unchecked(
    pair: &InfinitesimalPair,
    phis: &[(String, QuadraticDifferential)],
    rule: &QuadratureRule,
) -> Result<PairAudit> {
    for (id, phi) in phis {
        if !phi.is_integrable() {
            return Err(Error::InfiniteNorm(format!("{id} is not integrable")));
        }
    }
    let k = pair.mu.sup_bound();
    let sharp = constants(k)?.ctilde.powi(2);
    let uniform = uniform_constant(k);
    let mut domain: Option<Error> = None;
    let mut hypothesis: Option<Error> = None;
    let ints = rule.integrate_many(INF_TERMS * phis.len(), |p, out| {
        let mu = pair.mu.value(p);
        let nu = pair.nu.value(p);
        let nn = nu.norm();
        if nn >= 1.0 {
            if domain.is_none() {
                domain = Some(Error::domain(format!("|ν| = {nn} ≥ 1 at ({}, {})", p.z.re, p.z.im)));
            }
            return;
        }
        let nm = mu.norm();
        if hypothesis.is_none() && nn > nm * (1.0 + 1e-12) + 1e-300 {
            hypothesis = Some(precondition(
                "lemma-inf",
                p.z,
                format!("|ν| = {nn:e} exceeds |μ| = {nm:e}"),
            ));
        }
        let d = mu - nu;
        let one_n = 1.0 - nn * nn;
        let lhs_factor = d * (ONE - mu * nu.conj()) / one_n;
        let rhs_factor = d.norm_sqr() * nn / one_n;
        let sm = sgn(mu);
        for (i, (_, phi)) in phis.iter().enumerate() {
            let v = phi.value(p);
            let av = v.norm();
            let o = &mut out[i * INF_TERMS..(i + 1) * INF_TERMS];
            o[0] = lhs_factor * v;
            o[1] = Complex64::new(rhs_factor * av, 0.0);
            if mu != ZERO {
                o[2] = Complex64::new(d.norm_sqr() * av, 0.0);
                // nonnegative pointwise; clamp the rounding
                o[3] = Complex64::new((av - (v * sm).re).max(0.0), 0.0);
            }
        }
    })?;
    if let Some(e) = domain {
        return Err(e);
    }
    let mut reports = Vec::new();
    for (i, (id, _)) in phis.iter().enumerate() {
        let t = &ints[i * INF_TERMS..(i + 1) * INF_TERMS];
        reports.push(InequalityReport::new("inf-main", id, t[0].value.re, t[1].value.re, &[t[0].error, t[1].error]));
        if hypothesis.is_none() {
            for (name, c) in [("lemma-inf-sharp", sharp), ("lemma-inf-uniform", uniform)] {
                reports.push(InequalityReport::new(
                    name,
                    id,
                    t[2].value.re,
                    c * t[3].value.re,
                    &[t[2].error, c * t[3].error],
                ));
            }
        }
    }
    Ok(PairAudit {
        reports,
        lemma_precondition: hypothesis,
    })
}

/// Re ∬ (μ − ν)(1 − μν̄)/(1 − |ν|²)·φ ≤ ∬ |μ − ν|²|ν|/(1 − |ν|²)·|φ|.
pub fn inf_main_inequality_check(
    pair: &InfinitesimalPair,
    phi: &QuadraticDifferential,
    rule: &QuadratureRule,
) -> Result<InequalityReport> {
    Ok(single(audit_infinitesimal(pair, &one_phi(phi), rule)?, "inf-main"))
}

/// ∬_Λ |μ − ν|²|φ| ≤ C·∬_Λ (|φ| − Re(φ sgn μ)), requiring |ν| ≤ |μ|.
pub fn lemma_inf_bound(
    pair: &InfinitesimalPair,
    phi: &QuadraticDifferential,
    rule: &QuadratureRule,
    variant: LemmaVariant,
) -> Result<InequalityReport> {
    let a = audit_infinitesimal(pair, &one_phi(phi), rule)?;
    lemma_inf_from(a, variant)
}

/// [`lemma_inf_bound`] without the certificate requirement.
pub fn lemma_inf_bound_unchecked(
    pair: &InfinitesimalPair,
    phi: &QuadraticDifferential,
    rule: &QuadratureRule,
    variant: LemmaVariant,
) -> Result<InequalityReport> {
    let a = audit_infinitesimal_unchecked(pair, &one_phi(phi), rule)?;
    lemma_inf_from(a, variant)
}

fn lemma_inf_from(a: PairAudit, variant: LemmaVariant) -> Result<InequalityReport> {
    if let Some(e) = a.lemma_precondition {
        return Err(e);
    }
    Ok(single(
        a,
        match variant {
            LemmaVariant::Sharp => "lemma-inf-sharp",
            LemmaVariant::Uniform => "lemma-inf-uniform",
        },
    ))
}

/// Random stretch-twist pair with equal stretch and |t_g| ≤ |t_f|, which
/// makes |β| ≤ |α| hold everywhere.
pub fn random_twist_pair<R: Rng>(g: &mut R) -> GlobalPair {
    let p = g.gen_range(0.7..1.4);
    let t1 = g.gen_range(-1.5..1.5);
    let t2 = t1 * g.gen_range(-1.0..1.0);
    GlobalPair::stretch_twist(
        StretchTwist { p, t: t1 },
        StretchTwist { p, t: t2 },
    )
}

/// Seeded battery of stretch-twist pairs.
pub fn twist_battery(count: usize, seed: u64) -> Vec<GlobalPair> {
    let mut g = rng(seed);
    (0..count).map(|_| random_twist_pair(&mut g)).collect()
}

/// The Construction-I shape of an infinitesimal pair: μ = `off` outside 𝒮
/// and c·sgn(z)^m on 𝒮, ν = μ + t·γ_m. For real c, t of opposite signs with
/// |t| ≤ |c| this gives |ν| ≤ |μ| pointwise, and the vanishing moments of γ_m
/// make the pair certifiable.
pub fn aligned_perturbation_pair(
    off: BeltramiField,
    set: RadialCantorSet,
    m: u32,
    c: f64,
    t: f64,
    rule: &QuadratureRule,
    degree: usize,
) -> Result<InfinitesimalPair> {
    let mu = BeltramiField::Split {
        mask: SupportMask::Radial(set.clone()),
        inside: Box::new(BeltramiField::PhasePower {
            c: Complex64::new(c, 0.0),
            m: m as i32,
        }),
        outside: Box::new(off),
    };
    let nu = mu.clone().plus(Complex64::new(t, 0.0), perturbation(m, set)?);
    let note = format!("aligned(m={m},c={c},t={t})");
    InfinitesimalPair::certify(mu, nu, &note, rule, degree)
}

/// Parameters of a random aligned pair; the set and the off-field are chosen
/// by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedDraw {
    pub m: u32,
    pub c: f64,
    pub t: f64,
}

/// m ∈ {1, 2, 3}, |c| ∈ [0.2k, k] with random sign, t = −sign(c)·|c|·u,
/// u ∈ (0, 1].
pub fn random_aligned_draw<R: Rng>(g: &mut R, k: f64) -> AlignedDraw {
    let m = g.gen_range(1..=3);
    let mag = k * g.gen_range(0.2..=1.0);
    let c = if g.gen_bool(0.5) { mag } else { -mag };
    let u = 1.0 - g.gen_range(0.0..1.0);
    AlignedDraw { m, c, t: -c * u }
}
