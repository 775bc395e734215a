//! Seeded stratified sampling of disks and squares.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // resolved inherently once std is in the graph
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// About `budget` jittered-grid points in the open disk `|z − center| < radius`,
/// in row-major cell order.
pub fn stratified_disk(center: Complex64, radius: f64, budget: usize, seed: u64) -> Vec<Complex64> {
    let cells_inside = budget.max(1) as f64;
    // the disk covers π/4 of its bounding square
    let per_side = ((cells_inside * 4.0 / core::f64::consts::PI).sqrt().ceil() as usize).max(1);
    let side = 2.0 * radius / per_side as f64;
    let mut g = rng(seed);
    let mut out = Vec::with_capacity(budget + per_side);
    for i in 0..per_side {
        for j in 0..per_side {
            let x = -radius + (j as f64 + g.gen::<f64>()) * side;
            let y = -radius + (i as f64 + g.gen::<f64>()) * side;
            if x * x + y * y < radius * radius {
                out.push(center + Complex64::new(x, y));
            }
        }
    }
    out
}

/// `per_side²` jittered points in the square `[-half, half]²`.
pub fn stratified_square(half: f64, per_side: usize, seed: u64) -> Vec<Complex64> {
    let side = 2.0 * half / per_side as f64;
    let mut g = rng(seed);
    let mut out = Vec::with_capacity(per_side * per_side);
    for i in 0..per_side {
        for j in 0..per_side {
            let x = -half + (j as f64 + g.gen::<f64>()) * side;
            let y = -half + (i as f64 + g.gen::<f64>()) * side;
            out.push(Complex64::new(x, y));
        }
    }
    out
}

/// Uniform point of the disk `|z| < radius`.
pub fn uniform_in_disk<R: Rng>(g: &mut R, radius: f64) -> Complex64 {
    let r = radius * g.gen::<f64>().sqrt();
    let th = 2.0 * core::f64::consts::PI * g.gen::<f64>();
    Complex64::from_polar(r, th)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_samples_are_inside_and_reproducible() {
        let c = Complex64::new(0.2, -0.1);
        let a = stratified_disk(c, 0.3, 1000, 7);
        let b = stratified_disk(c, 0.3, 1000, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|z| (z - c).norm() < 0.3));
        assert!(a.len() > 900 && a.len() < 1150, "{}", a.len());
    }
}
