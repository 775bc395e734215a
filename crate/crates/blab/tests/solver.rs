use blab::fft::RustFft2d;
use blab_core::beltrami::{deform, teichmuller_form, BeltramiField, Disk, QuadraticDifferential, SupportMask};
use blab_core::cantor::{cantor_stage, RadialCantorSet, Scheme};
use blab_core::solver::{
    beurling_transform, cauchy_transform, inverse_dilatation, solve_beltrami, GridField, SolverConfig, Support,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;

const N: usize = 512;
const A: f64 = 0.05;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gaussian(z: Complex64) -> Complex64 {
    c((-z.norm_sqr() / A).exp(), 0.0)
}

// h = ∂z̄ F for F = e^{−|z|²/a}; then T h = F and S h = ∂z F
fn h_of(z: Complex64) -> Complex64 {
    -z / A * gaussian(z)
}

fn sh_of(z: Complex64) -> Complex64 {
    -z.conj() / A * gaussian(z)
}

fn max_diff(a: &GridField, f: impl Fn(Complex64) -> Complex64, within: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.n() {
        for j in 0..a.n() {
            let z = a.point(i, j);
            if z.norm() < within {
                worst = worst.max((a.get(i, j) - f(z)).norm());
            }
        }
    }
    worst
}

fn grid_max(g: &GridField) -> f64 {
    g.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn beurling_of_a_derivative_is_the_other_derivative() {
    let fft = RustFft2d::new();
    let h = GridField::from_fn(N, 2.0, h_of).unwrap();
    let s = beurling_transform(&h, &fft, 2).unwrap();
    assert!(max_diff(&s, sh_of, 1.9) <= 1e-3 * grid_max(&h));
    // |S h| = |h| pointwise here, so the L² norms agree
    assert!((s.l2_norm() - h.l2_norm()).abs() <= 1e-6 * h.l2_norm());
}

#[test]
fn beurling_matches_finite_differences_of_cauchy() {
    let fft = RustFft2d::new();
    let h = GridField::from_fn(N, 2.0, h_of).unwrap();
    let t = cauchy_transform(&h, &fft).unwrap();
    assert!(max_diff(&t, gaussian, 1.9) <= 1e-3, "cauchy {}", max_diff(&t, gaussian, 1.9));
    let s = beurling_transform(&h, &fft, 2).unwrap();
    let d = t.spacing();
    let mut worst = 0.0f64;
    // fourth-order central differences; second order leaves O(d²) at the 1e-3 level
    let diff = |m2: Complex64, m1: Complex64, p1: Complex64, p2: Complex64| (m2 - p2 + (p1 - m1) * 8.0) / (12.0 * d);
    for i in 2..N - 2 {
        for j in 2..N - 2 {
            if t.point(i, j).norm() > 1.0 {
                continue;
            }
            let dx = diff(t.get(i, j - 2), t.get(i, j - 1), t.get(i, j + 1), t.get(i, j + 2));
            let dy = diff(t.get(i - 2, j), t.get(i - 1, j), t.get(i + 1, j), t.get(i + 2, j));
            let dz = (dx - c(0.0, 1.0) * dy) * 0.5;
            worst = worst.max((dz - s.get(i, j)).norm());
        }
    }
    assert!(worst <= 1e-3 * grid_max(&h), "S vs ∂z T: {worst}");
}

#[test]
fn beurling_never_increases_l2_norm() {
    let fft = RustFft2d::new();
    let mut g = blab_core::sampling::rng(3);
    let h = GridField::from_fn(64, 2.0, |_| c(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0))).unwrap();
    for padding in [1, 2, 4] {
        let s = beurling_transform(&h, &fft, padding).unwrap();
        assert!(s.l2_norm() <= h.l2_norm() * (1.0 + 1e-12));
    }
}

#[test]
fn zero_field_gives_identity() {
    let cfg = SolverConfig { n: N, ..SolverConfig::default() };
    let map = solve_beltrami(&BeltramiField::Zero, &cfg, &RustFft2d::new()).unwrap();
    assert_eq!(map.iterations, 0);
    assert_eq!(map.residual, 0.0);
    for i in (0..N).step_by(7) {
        for j in (0..N).step_by(5) {
            assert_eq!(map.f.get(i, j), map.f.point(i, j));
        }
    }
}

#[test]
fn constant_on_square_is_affine() {
    let cfg = SolverConfig { n: N, support: Support::Square, ..SolverConfig::default() };
    let k = c(0.3, 0.0);
    let map = solve_beltrami(&BeltramiField::Constant(k), &cfg, &RustFft2d::new()).unwrap();
    assert!(max_diff(&map.f, |z| z + k * z.conj(), f64::INFINITY) <= 1e-9);
    assert!(map.residual <= 1e-12);
}

fn disk_fields() -> Vec<BeltramiField> {
    let l = BigRational::new(BigInt::from(4), BigInt::from(5));
    let set = RadialCantorSet::new(cantor_stage(4, Scheme::AbsoluteFifth).unwrap(), l).unwrap();
    vec![
        BeltramiField::Masked {
            base: Box::new(BeltramiField::Constant(c(0.5, 0.0))),
            mask: SupportMask::Disk(Disk::new(c(0.1, 0.2), 0.5)),
        },
        deform(teichmuller_form(0.5, QuadraticDifferential::BoundarySingular).unwrap(), 0.5, SupportMask::Radial(set))
            .unwrap(),
        teichmuller_form(0.35, QuadraticDifferential::monomial(2)).unwrap(),
    ]
}

#[test]
fn disk_fields_converge_fast() {
    let cfg = SolverConfig { n: N, ..SolverConfig::default() };
    let fft = RustFft2d::new();
    for mu in disk_fields() {
        let k = mu.sup_bound();
        assert!(k <= 0.5);
        let map = solve_beltrami(&mu, &cfg, &fft).unwrap();
        assert!(map.residual <= 1e-3, "{}: residual {}", mu.label(), map.residual);
        assert!(map.iterations <= 60, "{}: {} iterations", mu.label(), map.iterations);
        // the iteration is a contraction with constant at most k
        assert!(map.contraction_ratio() <= k + 1e-6, "{}: ratio {}", mu.label(), map.contraction_ratio());
        let alpha = inverse_dilatation(&map).unwrap();
        for (a, m) in alpha.values().iter().zip(map.mu.values()) {
            assert!((a.norm() - m.norm()).abs() <= 4.0 * f64::EPSILON * m.norm().max(f64::MIN_POSITIVE));
        }
    }
}
