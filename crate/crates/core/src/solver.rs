//! Beltrami equation `f_z̄ = μ f_z` on a uniform grid by Neumann iteration
//! `h ← μ·S h + μ`, with `f = z + T h`, `f_z = 1 + S h`, `f_z̄ = h`.
//!
//! T is the Cauchy transform (convolution with 1/(πz)) and S the Beurling
//! transform (Fourier multiplier conj(ξ)/ξ). The FFT is supplied by the caller
//! through [`Fft2d`], so this module stays free of `std`.
//!
//! Two boundary treatments exist:
//! * `Support::Disk`: μ is extended by zero off the unit disk, S acts on a
//!   zero-padded torus and T is the free-space convolution, giving the
//!   solution normalised by f(z) − z → 0 at infinity;
//! * `Support::Square`: μ fills the grid square and the problem is posed on
//!   the square torus, with f = z + mean(h)·z̄ + T(h − mean(h)). A constant μ
//!   is then an exact fixed point.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // resolved inherently once std is in the graph
use num_traits::Float;

use crate::beltrami::{BeltramiField, SupportMask};
use crate::error::{Error, Result};
use crate::quadrature::Point;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square 2-D discrete Fourier transform on row-major `m × m` data.
pub trait Fft2d {
    /// Unnormalised forward transform, e^{−2πi(jk)/m} convention.
    fn forward(&self, data: &mut [Complex64], m: usize);
    /// Inverse transform including the 1/m² factor.
    fn inverse(&self, data: &mut [Complex64], m: usize);
}

/// Complex values at the cell centres of an `n × n` grid on `[−L, L]²`,
/// row-major with rows along increasing imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    n: usize,
    half_width: f64,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(n: usize, half_width: f64, values: Vec<Complex64>) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid size {n} is not a power of two")));
        }
        if !(half_width > 0.0) {
            return Err(Error::Config(format!("grid half-width {half_width}")));
        }
        if values.len() != n * n {
            return Err(Error::Config(format!(
                "grid of size {n} needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(Self {
            n,
            half_width,
            values,
        })
    }

    pub fn from_fn(n: usize, half_width: f64, mut f: impl FnMut(Complex64) -> Complex64) -> Result<Self> {
        let h = 2.0 * half_width / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(cell_center(half_width, h, i, j)));
            }
        }
        Self::new(n, half_width, values)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            values: vec![ZERO; self.values.len()],
            ..self.clone()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Centre of cell (row `i`, column `j`).
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        cell_center(self.half_width, self.spacing(), i, j)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n + j]
    }

    /// Value of the cell containing `z`; 0 outside the square.
    pub fn lookup(&self, z: Complex64) -> Complex64 {
        let h = self.spacing();
        let u = ((z.re + self.half_width) / h).floor();
        let v = ((z.im + self.half_width) / h).floor();
        if u < 0.0 || v < 0.0 || u >= self.n as f64 || v >= self.n as f64 {
            return ZERO;
        }
        self.get(v as usize, u as usize)
    }

    /// Bilinear interpolation between cell centres, clamped at the edges.
    pub fn interpolate(&self, z: Complex64) -> Complex64 {
        let h = self.spacing();
        let last = (self.n - 1) as f64;
        let u = ((z.re + self.half_width) / h - 0.5).clamp(0.0, last);
        let v = ((z.im + self.half_width) / h - 0.5).clamp(0.0, last);
        let (j0, i0) = ((u.floor() as usize).min(self.n - 2), (v.floor() as usize).min(self.n - 2));
        let (a, b) = (u - j0 as f64, v - i0 as f64);
        let f00 = self.get(i0, j0);
        let f01 = self.get(i0, j0 + 1);
        let f10 = self.get(i0 + 1, j0);
        let f11 = self.get(i0 + 1, j0 + 1);
        f00 * ((1.0 - a) * (1.0 - b)) + f01 * (a * (1.0 - b)) + f10 * ((1.0 - a) * b) + f11 * (a * b)
    }

    /// Grid L² norm, √(Σ|v|²)·spacing.
    pub fn l2_norm(&self) -> f64 {
        l2(&self.values, self.spacing())
    }
}

fn cell_center(half_width: f64, h: f64, i: usize, j: usize) -> Complex64 {
    Complex64::new(-half_width + (j as f64 + 0.5) * h, -half_width + (i as f64 + 0.5) * h)
}

fn l2(v: &[Complex64], h: f64) -> f64 {
    let mut s = crate::sum::CompensatedSum::new();
    for x in v {
        s.add(x.norm_sqr());
    }
    s.value().sqrt() * h
}

fn signed_index(j: usize, m: usize) -> f64 {
    if j < m / 2 {
        j as f64
    } else {
        j as f64 - m as f64
    }
}

/// Precomputed multipliers for one grid geometry.
pub struct Transforms<'a, F: Fft2d + ?Sized> {
    fft: &'a F,
    n: usize,
    spacing: f64,
    padded: usize,
    beurling: Vec<Complex64>,
    cauchy_hat: Vec<Complex64>,
}

impl<'a, F: Fft2d + ?Sized> Transforms<'a, F> {
    /// `padding` is the torus size for S in units of the grid size (1, 2, 4...).
    pub fn new(fft: &'a F, n: usize, half_width: f64, padding: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!("grid size {n} is not a power of two")));
        }
        if padding == 0 || !padding.is_power_of_two() {
            return Err(Error::Config(format!("padding factor {padding} is not a power of two")));
        }
        let spacing = 2.0 * half_width / n as f64;
        let padded = n * padding;
        let beurling = multiplier(padded, spacing, |k| k.conj() / k);

        // free-space kernel Δ²/(πw) on offsets −n..n−1, zero at the origin
        let m = 2 * n;
        let mut kernel = vec![ZERO; m * m];
        for a in 0..m {
            for b in 0..m {
                if a == 0 && b == 0 {
                    continue;
                }
                let w = Complex64::new(signed_index(b, m), signed_index(a, m)) * spacing;
                kernel[a * m + b] = ONE / (w * PI) * (spacing * spacing);
            }
        }
        fft.forward(&mut kernel, m);
        Ok(Self {
            fft,
            n,
            spacing,
            padded,
            beurling,
            cauchy_hat: kernel,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn embed(&self, h: &[Complex64], m: usize) -> Vec<Complex64> {
        let n = self.n;
        let mut buf = vec![ZERO; m * m];
        for i in 0..n {
            buf[i * m..i * m + n].copy_from_slice(&h[i * n..(i + 1) * n]);
        }
        buf
    }

    fn crop(&self, buf: &[Complex64], m: usize) -> Vec<Complex64> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            out.extend_from_slice(&buf[i * m..i * m + n]);
        }
        out
    }

    fn apply_multiplier(&self, h: &[Complex64], mult: &[Complex64], m: usize) -> Vec<Complex64> {
        let mut buf = self.embed(h, m);
        self.fft.forward(&mut buf, m);
        for (b, k) in buf.iter_mut().zip(mult) {
            *b *= k;
        }
        self.fft.inverse(&mut buf, m);
        self.crop(&buf, m)
    }

    /// Beurling transform on the padded torus.
    pub fn beurling(&self, h: &[Complex64]) -> Vec<Complex64> {
        self.apply_multiplier(h, &self.beurling, self.padded)
    }

    /// Free-space Cauchy transform of compactly supported data.
    pub fn cauchy(&self, h: &[Complex64]) -> Vec<Complex64> {
        self.apply_multiplier(h, &self.cauchy_hat, 2 * self.n)
    }

    /// Mean-free periodic antiderivative on the unpadded square torus.
    pub fn cauchy_periodic(&self, h: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mult = multiplier(n, self.spacing, |k| Complex64::new(0.0, -2.0) / k);
        self.apply_multiplier(h, &mult, n)
    }
}

/// Fourier multiplier `m(k)` with k = kx + i·ky; zero at the zero frequency.
fn multiplier(m: usize, spacing: f64, f: impl Fn(Complex64) -> Complex64) -> Vec<Complex64> {
    let scale = 2.0 * PI / (m as f64 * spacing);
    let mut out = vec![ZERO; m * m];
    for a in 0..m {
        for b in 0..m {
            if a == 0 && b == 0 {
                continue;
            }
            let k = Complex64::new(signed_index(b, m), signed_index(a, m)) * scale;
            out[a * m + b] = f(k);
        }
    }
    out
}

/// Cauchy transform of `h` (free space).
pub fn cauchy_transform<F: Fft2d + ?Sized>(h: &GridField, fft: &F) -> Result<GridField> {
    let t = Transforms::new(fft, h.n, h.half_width, 1)?;
    GridField::new(h.n, h.half_width, t.cauchy(&h.values))
}

/// Beurling transform of `h` on a torus `padding` times the grid size.
pub fn beurling_transform<F: Fft2d + ?Sized>(h: &GridField, fft: &F, padding: usize) -> Result<GridField> {
    let t = Transforms::new(fft, h.n, h.half_width, padding)?;
    GridField::new(h.n, h.half_width, t.beurling(&h.values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Support {
    /// μ on the unit disk, zero outside.
    #[default]
    Disk,
    /// μ on the whole grid square, periodic boundary treatment.
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub n: usize,
    pub half_width: f64,
    pub padding: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub support: Support,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n: 512,
            half_width: 2.0,
            padding: 2,
            tol: 1e-9,
            max_iter: 100,
            support: Support::Disk,
        }
    }
}

/// Sampled quasiconformal map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapData {
    pub mu: GridField,
    pub f: GridField,
    pub fz: GridField,
    pub fzbar: GridField,
    /// ‖f_z̄ − μ f_z‖ / ‖f_z‖ over cells in the open unit disk.
    pub residual: f64,
    pub iterations: usize,
    /// Grid L² norms of successive iteration increments.
    pub increments: Vec<f64>,
    pub support: Support,
}

impl MapData {
    pub fn normalization(&self) -> &'static str {
        match self.support {
            Support::Disk => "plane-normalised: f(z) - z -> 0 at infinity",
            Support::Square => "square-periodic: f(z) - z - mean(mu) conj(z) periodic",
        }
    }

    /// Largest ratio of consecutive increments, ignoring increments already
    /// at round-off level.
    pub fn contraction_ratio(&self) -> f64 {
        let floor = 1e-13 * self.increments.first().copied().unwrap_or(0.0);
        self.increments
            .windows(2)
            .filter(|w| w[1] > floor)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }
}

/// Samples μ at the cell centres of the configured grid.
pub fn sample_field(mu: &BeltramiField, cfg: &SolverConfig) -> Result<GridField> {
    GridField::from_fn(cfg.n, cfg.half_width, |z| match cfg.support {
        Support::Disk if z.norm() >= 1.0 => ZERO,
        _ => mu.value(&Point::new(z)),
    })
}

pub fn solve_beltrami<F: Fft2d + ?Sized>(mu: &BeltramiField, cfg: &SolverConfig, fft: &F) -> Result<MapData> {
    solve_sampled(sample_field(mu, cfg)?, cfg, fft)
}

pub fn solve_sampled<F: Fft2d + ?Sized>(mu: GridField, cfg: &SolverConfig, fft: &F) -> Result<MapData> {
    let n = mu.n;
    let hsp = mu.spacing();
    let k = mu.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(k < 1.0) {
        return Err(Error::domain(format!("sup |μ| = {k} is not below 1")));
    }
    let z: Vec<Complex64> = (0..n * n).map(|idx| mu.point(idx / n, idx % n)).collect();
    let mk = |v: Vec<Complex64>| GridField::new(n, mu.half_width, v);
    if k == 0.0 {
        return Ok(MapData {
            f: mk(z)?,
            fz: mk(vec![ONE; n * n])?,
            fzbar: mk(vec![ZERO; n * n])?,
            mu,
            residual: 0.0,
            iterations: 0,
            increments: Vec::new(),
            support: cfg.support,
        });
    }
    let padding = match cfg.support {
        Support::Disk => cfg.padding.max(2),
        Support::Square => 1,
    };
    let tr = Transforms::new(fft, n, mu.half_width, padding)?;
    let m = &mu.values;
    let mut h = vec![ZERO; n * n];
    let mut increments = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let sh = tr.beurling(&h);
        let next: Vec<Complex64> = (0..n * n).map(|i| m[i] * sh[i] + m[i]).collect();
        let diff: Vec<Complex64> = next.iter().zip(&h).map(|(a, b)| a - b).collect();
        let inc = l2(&diff, hsp);
        h = next;
        iterations += 1;
        increments.push(inc);
        if inc < cfg.tol {
            converged = true;
            break;
        }
    }
    let sh = tr.beurling(&h);
    let fz: Vec<Complex64> = sh.iter().map(|s| ONE + s).collect();
    let residual = disk_residual(&mu, &h, &fz);
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            residual,
        });
    }
    let f: Vec<Complex64> = match cfg.support {
        Support::Disk => {
            let th = tr.cauchy(&h);
            z.iter().zip(th).map(|(z, t)| z + t).collect()
        }
        Support::Square => {
            let mean = h.iter().sum::<Complex64>() / (n * n) as f64;
            let centred: Vec<Complex64> = h.iter().map(|v| v - mean).collect();
            let th = tr.cauchy_periodic(&centred);
            z.iter().zip(th).map(|(z, t)| z + mean * z.conj() + t).collect()
        }
    };
    Ok(MapData {
        f: mk(f)?,
        fz: mk(fz)?,
        fzbar: mk(h)?,
        mu,
        residual,
        iterations,
        increments,
        support: cfg.support,
    })
}

fn disk_residual(mu: &GridField, fzbar: &[Complex64], fz: &[Complex64]) -> f64 {
    let n = mu.n;
    let mut num = crate::sum::CompensatedSum::new();
    let mut den = crate::sum::CompensatedSum::new();
    for i in 0..n {
        for j in 0..n {
            if mu.point(i, j).norm() >= 1.0 {
                continue;
            }
            let idx = i * n + j;
            num.add((fzbar[idx] - mu.values[idx] * fz[idx]).norm_sqr());
            den.add(fz[idx].norm_sqr());
        }
    }
    if den.value() == 0.0 {
        return 0.0;
    }
    (num.value() / den.value()).sqrt()
}

/// α = −μ/τ = −μ·f_z / conj(f_z), the dilatation of f⁻¹ carried back by f.
pub fn inverse_dilatation(map: &MapData) -> Result<GridField> {
    let mut out = Vec::with_capacity(map.mu.values.len());
    for (idx, (m, fz)) in map.mu.values.iter().zip(&map.fz.values).enumerate() {
        if *fz == ZERO || !fz.re.is_finite() || !fz.im.is_finite() {
            return Err(Error::SingularDerivative { index: idx });
        }
        out.push(-m * (fz / fz.conj()));
    }
    GridField::new(map.mu.n, map.mu.half_width, out)
}

/// Image of sample points of a set under the solved map.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageCloud {
    pub sources: Vec<Complex64>,
    pub images: Vec<Complex64>,
    /// Σ J·(area per sample) over the samples, J = |f_z|² − |f_z̄|²: an
    /// estimate of the area of f(E).
    pub covered_area: f64,
    /// Boxes of side `box_size` containing at least one image point.
    pub box_count: usize,
    pub box_size: f64,
    /// Images lying outside the polygon f(∂𝔻).
    pub outside_image_of_disk: usize,
}

/// Pushes the samples of `mask` among `samples` (points of the unit disk,
/// each standing for `area_per_sample`) through the map.
pub fn image_of_set(
    map: &MapData,
    mask: &SupportMask,
    samples: &[Complex64],
    area_per_sample: f64,
    box_size: f64,
) -> ImageCloud {
    let boundary: Vec<Complex64> = (0..1024)
        .map(|j| map.f.interpolate(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 1024.0)))
        .collect();
    let mut sources = Vec::new();
    let mut images = Vec::new();
    let mut area = crate::sum::CompensatedSum::new();
    let mut boxes: Vec<(i64, i64)> = Vec::new();
    let mut outside = 0;
    for &z in samples {
        if z.norm() >= 1.0 || !mask.contains(z) {
            continue;
        }
        let w = map.f.interpolate(z);
        let j = map.fz.interpolate(z).norm_sqr() - map.fzbar.interpolate(z).norm_sqr();
        area.add(j * area_per_sample);
        boxes.push(((w.re / box_size).floor() as i64, (w.im / box_size).floor() as i64));
        if winding_number(&boundary, w) == 0 {
            outside += 1;
        }
        sources.push(z);
        images.push(w);
    }
    boxes.sort_unstable();
    boxes.dedup();
    ImageCloud {
        sources,
        images,
        covered_area: area.value(),
        box_count: boxes.len(),
        box_size,
        outside_image_of_disk: outside,
    }
}

fn winding_number(poly: &[Complex64], w: Complex64) -> i32 {
    let mut wn = 0;
    for i in 0..poly.len() {
        let a = poly[i] - w;
        let b = poly[(i + 1) % poly.len()] - w;
        if a.im <= 0.0 {
            if b.im > 0.0 && (a.re * b.im - b.re * a.im) > 0.0 {
                wn += 1;
            }
        } else if b.im <= 0.0 && (a.re * b.im - b.re * a.im) < 0.0 {
            wn -= 1;
        }
    }
    wn
}
