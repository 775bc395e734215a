use blab_core::beltrami::{teichmuller_form, BeltramiField, QuadraticDifferential, SupportMask};
use blab_core::cantor::{cantor_stage, RadialCantorSet, Scheme};
use blab_core::inequalities::{
    aligned_perturbation_pair, audit_global, audit_infinitesimal, audit_infinitesimal_unchecked, constants,
    lemma_global_bound, lemma_inf_bound, main_inequality_alpha_form, main_inequality_check, modulus_identity,
    twist_battery, uniform_constant, GlobalPair, InfinitesimalPair, LemmaVariant, Verdict,
};
use blab_core::quadrature::QuadratureRule;
use blab_core::Error;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn battery() -> Vec<(String, QuadraticDifferential)> {
    let mut v: Vec<_> = [0usize, 1, 2, 3, 5]
        .iter()
        .map(|&n| (format!("z^{n}"), QuadraticDifferential::monomial(n)))
        .collect();
    v.push(("1+2z^2".into(), QuadraticDifferential::polynomial(vec![c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)])));
    v
}

fn small_set() -> RadialCantorSet {
    let l = BigRational::new(BigInt::from(4), BigInt::from(5));
    RadialCantorSet::new(cantor_stage(3, Scheme::AbsoluteFifth).unwrap(), l).unwrap()
}

#[test]
fn constant_ratios() {
    for i in 1..20 {
        let k = i as f64 / 20.0;
        let cs = constants(k).unwrap();
        // C'/C̃ = (1 + k)/(1 − k) straight from the two closed forms
        assert!((cs.cprime / cs.ctilde - (1.0 + k) / (1.0 - k)).abs() < 1e-12 * cs.cprime / cs.ctilde);
        assert!(cs.ctilde * cs.ctilde >= uniform_constant(k));
        assert_eq!(cs.uniform, 8.0 * k * k);
    }
    assert!(constants(1.0).is_err());
    assert!(constants(-0.1).is_err());
}

#[test]
fn self_pairs_hold_and_skip_the_tau_form() {
    let rule = QuadratureRule::disk();
    for k in [0.3, 0.7] {
        for (_, phi) in battery() {
            let pair = GlobalPair::self_pair(teichmuller_form(k, phi.clone()).unwrap());
            assert!(!pair.has_tau());
            let a = audit_global(&pair, &battery(), &rule).unwrap();
            assert!(a.reports.iter().all(|r| r.check != "main"));
            for r in &a.reports {
                assert_ne!(r.verdict, Verdict::Violated, "{} {}: slack {}", r.check, r.phi_id, r.slack);
            }
            assert!(matches!(main_inequality_check(&pair, &phi, &rule), Err(Error::Contract(_))));
        }
    }
}

#[test]
fn twist_pairs_satisfy_every_global_check() {
    let rule = QuadratureRule::disk();
    for pair in twist_battery(12, 11) {
        assert!(pair.has_tau());
        let a = audit_global(&pair, &battery(), &rule).unwrap();
        assert!(a.lemma_precondition.is_none(), "{}", pair.note());
        assert!(a.reports.iter().any(|r| r.check == "main"));
        for r in &a.reports {
            assert_ne!(r.verdict, Verdict::Violated, "{}: {} {} slack {}", pair.note(), r.check, r.phi_id, r.slack);
        }
    }
}

#[test]
fn single_check_entry_points_agree_with_the_audit() {
    let rule = QuadratureRule::disk();
    let pair = &twist_battery(1, 3)[0];
    let phi = QuadraticDifferential::monomial(2);
    let a = audit_global(pair, &[("z^2".into(), phi.clone())], &rule).unwrap();
    let find = |name: &str| a.reports.iter().find(|r| r.check == name).unwrap().clone();
    assert_eq!(main_inequality_check(pair, &phi, &rule).unwrap().lhs, find("main").lhs);
    assert_eq!(main_inequality_alpha_form(pair, &phi, &rule).unwrap().rhs, find("maineq").rhs);
    assert_eq!(lemma_global_bound(pair, &phi, &rule).unwrap().slack, find("lemma-global").slack);
}

#[test]
fn lemma_rhs_over_constant_is_delta_over_k() {
    // |μ| ≡ k gives ∬(|φ| − Re φ sgn μ) = δ[φ]/k
    let rule = QuadratureRule::disk();
    let k = 0.4;
    let mu = teichmuller_form(k, QuadraticDifferential::monomial(2)).unwrap();
    let pair = GlobalPair::self_pair(mu.clone());
    let cp = constants(k).unwrap().cprime;
    for (id, phi) in battery() {
        let r = lemma_global_bound(&pair, &phi, &rule).unwrap();
        let d = blab_core::beltrami::delta(&mu, &phi, &rule).unwrap();
        assert!((r.rhs / (cp * cp) - d.delta / k).abs() < 1e-8 * d.norm, "{id}");
    }
}

#[test]
fn aligned_pairs_certify_and_hold() {
    let set = small_set();
    let rule = QuadratureRule::disk().with_circles(set.circles_f64().unwrap());
    let off = teichmuller_form(0.5, QuadraticDifferential::monomial(1)).unwrap();
    for (m, cc, t) in [(1u32, 0.4, -0.2), (2, -0.3, 0.3), (3, 0.5, -0.05)] {
        let pair = aligned_perturbation_pair(off.clone(), set.clone(), m, cc, t, &rule, 12).unwrap();
        let cert = pair.certificate().unwrap();
        assert!(cert.max_disagreement <= cert.tolerance);
        let a = audit_infinitesimal(&pair, &battery(), &rule).unwrap();
        assert!(a.lemma_precondition.is_none());
        for r in &a.reports {
            assert_ne!(r.verdict, Verdict::Violated, "m = {m}: {} {} slack {}", r.check, r.phi_id, r.slack);
        }
        // the two Lemma variants share one integral and differ only in the constant
        let k = pair.mu().sup_bound();
        let ct = constants(k).unwrap().ctilde;
        for (_, phi) in battery() {
            let sharp = lemma_inf_bound(&pair, &phi, &rule, LemmaVariant::Sharp).unwrap();
            let uni = lemma_inf_bound(&pair, &phi, &rule, LemmaVariant::Uniform).unwrap();
            assert_eq!(sharp.lhs, uni.lhs);
            let (x, y) = (sharp.rhs / (ct * ct), uni.rhs / (8.0 * k * k));
            assert!((x - y).abs() <= 1e-14 * x.abs().max(1e-300));
        }
    }
}

#[test]
fn uncertified_pairs_are_rejected() {
    let rule = QuadratureRule::disk();
    let mu = teichmuller_form(0.5, QuadraticDifferential::monomial(0)).unwrap();
    let half = BeltramiField::Constant(c(0.25, 0.0));
    let certified = InfinitesimalPair::certify(mu.clone(), half.clone(), "half", &rule, 8);
    assert!(matches!(certified, Err(Error::Uncertified(_))));
    let shifted = mu.clone().plus(c(0.1, 0.0), BeltramiField::Masked {
        base: Box::new(BeltramiField::Constant(c(1.0, 0.0))),
        mask: SupportMask::Annulus { inner: 0.2, outer: 0.6 },
    });
    assert!(matches!(
        InfinitesimalPair::certify(mu.clone(), shifted, "shifted", &rule, 8),
        Err(Error::Uncertified(_))
    ));
    let raw = InfinitesimalPair::uncertified(mu, half, "raw");
    assert!(raw.certificate().is_none());
    assert!(matches!(audit_infinitesimal(&raw, &battery(), &rule), Err(Error::Uncertified(_))));
    assert!(audit_infinitesimal_unchecked(&raw, &battery(), &rule).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn modulus_identity_holds(re in -1e3..1e3f64, im in -1e3..1e3f64) {
        let (lhs, rhs) = modulus_identity(c(re, im));
        let scale = c(re, im).norm_sqr().max(f64::MIN_POSITIVE);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        prop_assert!(rhs >= 0.0);
    }
}
