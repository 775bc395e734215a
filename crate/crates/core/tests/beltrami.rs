use blab_core::beltrami::{
    delta, deform, pairing, perturbation, ring_moment, teichmuller_form, BeltramiField, Disk, QuadraticDifferential,
    StretchTwist, SupportMask,
};
use blab_core::cantor::{cantor_stage, to_f64, RadialCantorSet, Scheme};
use blab_core::quadrature::{Point, QuadratureRule};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn set(stage: u32, lambda: (i64, i64)) -> RadialCantorSet {
    let l = BigRational::new(BigInt::from(lambda.0), BigInt::from(lambda.1));
    RadialCantorSet::new(cantor_stage(stage, Scheme::AbsoluteFifth).unwrap(), l).unwrap()
}

fn battery() -> Vec<QuadraticDifferential> {
    let mut v: Vec<_> = [0usize, 1, 2, 3, 4, 5, 7].iter().map(|&n| QuadraticDifferential::monomial(n)).collect();
    v.push(QuadraticDifferential::polynomial(vec![c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]));
    v.push(QuadraticDifferential::polynomial(vec![c(1.0, 0.0), c(3.0, 0.0), c(3.0, 0.0), c(1.0, 0.0)]));
    v.push(QuadraticDifferential::kernel(0.5, 2.0, 4.0, 0.0).unwrap());
    v
}

/// ∫ r^{p−1} dr over the radii of the set, from the interval list directly.
fn radial_oracle(s: &RadialCantorSet, p: u32) -> f64 {
    let lambda = s.lambda_f64();
    let mut total = 0.0;
    for iv in s.base().intervals().unwrap() {
        let (a, b) = (to_f64(&iv.lo) * lambda, to_f64(&iv.hi) * lambda);
        assert!(s.contains_radius(0.5 * (a + b)));
        total += (b.powi(p as i32) - a.powi(p as i32)) / p as f64;
    }
    total
}

#[test]
fn perturbation_moments_vanish() {
    let s = set(8, (4, 5));
    let rule = QuadratureRule::disk().with_circles(s.circles_f64().unwrap());
    for m in 1..=3u32 {
        let gamma = perturbation(m, s.clone()).unwrap();
        for n in 0..=10usize {
            let q = pairing(&gamma, &QuadraticDifferential::monomial(n), &rule).unwrap();
            assert!(q.value.norm() <= 1e-6, "m = {m}, n = {n}: {}", q.value);
            let ring = ring_moment(&s, m, n as u32).unwrap();
            assert!(ring.value.norm() <= 1e-12);
            assert!((ring.value - q.value).norm() <= 1e-8);
        }
    }
}

#[test]
fn ring_radial_part_matches_interval_sum() {
    let s = set(5, (9, 10));
    for (m, n) in [(0u32, 0u32), (1, 0), (2, 3), (3, 10)] {
        let ring = ring_moment(&s, m, n).unwrap();
        let oracle = radial_oracle(&s, m + n + 2);
        assert!((to_f64(&ring.radial) - oracle).abs() < 1e-13, "m = {m}, n = {n}");
    }
    let area = ring_moment(&s, 0, 0).unwrap();
    assert_eq!(area.radial * BigInt::from(2), s.area_over_pi());
}

#[test]
fn perturbation_is_invisible_to_holomorphic_pairings() {
    let s = set(6, (4, 5));
    let mut circles = s.circles_f64().unwrap();
    let eta = teichmuller_form(0.6, QuadraticDifferential::monomial(2)).unwrap();
    let mu = deform(eta, 0.5, SupportMask::Radial(s.clone())).unwrap();
    circles.extend(mu.circles());
    let rule = QuadratureRule::disk().with_circles(circles);
    for m in 1..=3 {
        for t in [0.1, 0.01] {
            let moved = mu.clone().plus(c(t, 0.0), perturbation(m, s.clone()).unwrap());
            for n in 0..=15 {
                let phi = QuadraticDifferential::monomial(n);
                let a = pairing(&mu, &phi, &rule).unwrap().value;
                let b = pairing(&moved, &phi, &rule).unwrap().value;
                assert!((a - b).norm() <= 1e-6 * t, "m = {m}, t = {t}, n = {n}");
            }
        }
    }
}

#[test]
fn teichmuller_form_has_zero_delta_against_its_own_phi() {
    let rule = QuadratureRule::disk();
    let mut members = 0;
    for k in [0.5, 0.9] {
        for phi in battery() {
            let d = delta(&teichmuller_form(k, phi.clone()).unwrap(), &phi, &rule).unwrap();
            assert!(d.delta.abs() <= 1e-8 * d.norm, "k = {k}, {}: {}", phi.label(), d.delta);
            members += 1;
        }
    }
    assert_eq!(members, 20);
}

#[test]
fn delta_is_positive_for_a_different_phi() {
    let rule = QuadratureRule::disk();
    let mu = teichmuller_form(0.5, QuadraticDifferential::monomial(1)).unwrap();
    let d = delta(&mu, &QuadraticDifferential::monomial(0), &rule).unwrap();
    // ∬ z̄/|z| = 0, so δ = k‖1‖ = kπ
    assert!((d.delta - 0.5 * std::f64::consts::PI).abs() < 1e-10);
}

#[test]
fn stretch_twist_dilatation_matches_finite_differences() {
    let f = StretchTwist::new(1.3, 0.7).unwrap();
    let h = 1e-6;
    for z in [c(0.3, 0.1), c(-0.5, 0.4), c(0.05, -0.8)] {
        let dx = (f.map(z + h) - f.map(z - h)) / (2.0 * h);
        let dy = (f.map(z + c(0.0, h)) - f.map(z - c(0.0, h))) / (2.0 * h);
        let fz = (dx - c(0.0, 1.0) * dy) * 0.5;
        let fzbar = (dx + c(0.0, 1.0) * dy) * 0.5;
        assert!((fz - f.fz(z)).norm() < 1e-7);
        assert!((fzbar - f.fzbar(z)).norm() < 1e-7);
        assert!((fzbar / fz - f.dilatation(z)).norm() < 1e-7);
        assert!(f.dilatation(z).norm() <= f.k());
    }
    // boundary fixed pointwise
    let w = Complex64::from_polar(1.0, 2.1);
    assert!((f.map(w) - w).norm() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deform_never_increases_modulus(
        kappa in 0.0..=1.0f64,
        k in 0.01..0.99f64,
        n in 0usize..6,
        r in 0.0..0.999f64,
        theta in -std::f64::consts::PI..std::f64::consts::PI,
        cx in -0.5..0.5f64,
        rad in 0.05..0.4f64,
    ) {
        let eta = teichmuller_form(k, QuadraticDifferential::monomial(n)).unwrap();
        let mu = deform(eta.clone(), kappa, SupportMask::Disk(Disk::new(c(cx, 0.0), rad))).unwrap();
        let p = Point::new(Complex64::from_polar(r, theta));
        prop_assert!(mu.value(&p).norm() <= eta.value(&p).norm() + 1e-15);
        prop_assert!(mu.value(&p).norm() <= mu.sup_bound() + 1e-15);
    }

    #[test]
    fn deform_rejects_kappa_outside_unit_interval(kappa in 1.0001..5.0f64) {
        let eta = BeltramiField::Constant(c(0.2, 0.0));
        prop_assert!(deform(eta.clone(), kappa, SupportMask::Whole).is_err());
        prop_assert!(deform(eta, -kappa, SupportMask::Whole).is_err());
    }
}
