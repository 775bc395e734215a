//! Polar tensor-product quadrature on the unit disk and its subdisks.
//!
//! A rule is a chart plus resolution parameters; nodes are generated on the fly
//! in a fixed order, so every sum is reproducible. Each node carries two
//! weights: the full rule (Gauss-Kronrod 21 in radius) and an embedded coarser
//! rule (Gauss 10 in radius, half the angles). Their difference is the error
//! estimate.
//!
//! The boundary chart `z = p(1 − ρe^{iθ})`, |θ| < π/2, 0 < ρ < 2cos θ, covers
//! the disk by rays leaving the boundary point `p`, with radial panels graded
//! geometrically towards `p`. Nodes keep `1 − z` to full relative precision,
//! which is what keeps forms like `(1 − z)^-2` finite and accurate down to
//! distances of 1e-150 from the boundary.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)] // resolved inherently once std is in the graph
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sum::{CompensatedSum, ComplexSum};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// The 21 Kronrod abscissae on [-1, 1] in increasing order with the Kronrod
/// weight and the embedded Gauss weight (zero for Kronrod-only points).
fn gk21() -> [(f64, f64, f64); 21] {
    let mut out = [(0.0, 0.0, 0.0); 21];
    for i in 0..11 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[i] = (-XGK[i], WGK[i], wg);
        out[20 - i] = (XGK[i], WGK[i], wg);
    }
    out
}

/// Ratio between consecutive graded panels in the boundary chart.
const GRADING: f64 = 0.25;

/// A sample location. `one_minus_z` is carried separately because near the
/// boundary point 1 it cannot be recovered from `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub z: Complex64,
    pub one_minus_z: Complex64,
}

impl Point {
    pub fn new(z: Complex64) -> Self {
        Self {
            z,
            one_minus_z: Complex64::new(1.0, 0.0) - z,
        }
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::new(z)
    }
}

/// A complex-valued integrand on the disk.
pub trait Field {
    fn eval(&self, p: &Point) -> Complex64;

    /// Known bound on |value|, if any.
    fn sup_bound(&self) -> Option<f64> {
        None
    }

    fn at(&self, z: Complex64) -> Complex64 {
        self.eval(&Point::new(z))
    }
}

impl<F: Fn(&Point) -> Complex64> Field for F {
    fn eval(&self, p: &Point) -> Complex64 {
        self(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    /// Polar coordinates about `center` out to `radius`.
    Centered { center: Complex64, radius: f64 },
    /// Rays from the unit-modulus `anchor`, graded down to `10^-strength`.
    Boundary { anchor: Complex64, strength: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    chart: Chart,
    radial_panels: usize,
    angular_nodes: usize,
    angular_panels: usize,
    circles: Vec<f64>,
    tol: f64,
}

/// Value of an integral with the two-level error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::disk()
    }
}

impl QuadratureRule {
    /// Full-disk rule: 16 radial GK21 panels and 256 angles.
    pub fn disk() -> Self {
        Self {
            chart: Chart::Centered {
                center: Complex64::new(0.0, 0.0),
                radius: 1.0,
            },
            radial_panels: 16,
            angular_nodes: 256,
            angular_panels: 12,
            circles: Vec::new(),
            tol: 1e-8,
        }
    }

    /// Rule on the disk of given centre and radius, which must lie in the
    /// closed unit disk.
    pub fn subdisk(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || center.norm() + radius > 1.0 + 1e-12 {
            return Err(Error::domain(format!(
                "disk |z − ({}, {})| < {} is empty or leaves the unit disk",
                center.re, center.im, radius
            )));
        }
        Ok(Self {
            chart: Chart::Centered { center, radius },
            ..Self::disk()
        })
    }

    pub fn with_resolution(mut self, radial_panels: usize, angular_nodes: usize) -> Self {
        self.radial_panels = radial_panels.max(1);
        self.angular_nodes = (angular_nodes.max(4) + 1) & !1;
        self
    }

    /// Number of angular GK21 panels used by the boundary chart.
    pub fn with_angular_panels(mut self, panels: usize) -> Self {
        self.angular_panels = panels.max(1);
        self
    }

    /// Circles |z| = r across which integrands may jump; radial panels are
    /// split there.
    pub fn with_circles(mut self, mut radii: Vec<f64>) -> Self {
        radii.retain(|r| r.is_finite() && *r > 0.0 && *r < 1.0);
        self.circles.extend(radii);
        self.circles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.circles.dedup();
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Area of the covered region.
    pub fn region_area(&self) -> f64 {
        match self.chart {
            Chart::Centered { radius, .. } => PI * radius * radius,
            Chart::Boundary { .. } => PI,
        }
    }

    pub fn covers_unit_disk(&self) -> bool {
        match self.chart {
            Chart::Centered { center, radius } => center == Complex64::new(0.0, 0.0) && radius == 1.0,
            Chart::Boundary { .. } => true,
        }
    }

    /// Refinement points of this rule with their strengths.
    pub fn refinement_hints(&self) -> Vec<(Complex64, f64)> {
        match self.chart {
            Chart::Boundary { anchor, strength } => vec![(anchor, strength)],
            Chart::Centered { .. } => Vec::new(),
        }
    }

    /// Grades node density geometrically towards the boundary point `point`,
    /// down to distances `10^-strength`. Strength 0 returns the rule unchanged.
    /// A rule carries at most one refinement point; refining again at the same
    /// point keeps the larger strength.
    pub fn refine_near(&self, point: Complex64, strength: f64) -> Result<Self> {
        if (point.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "refinement point ({}, {}) is not on the unit circle",
                point.re, point.im
            )));
        }
        if !(strength >= 0.0) || !strength.is_finite() {
            return Err(Error::domain(format!("refinement strength {strength}")));
        }
        if strength == 0.0 {
            return Ok(self.clone());
        }
        let chart = match self.chart {
            Chart::Centered { center, radius } => {
                if center != Complex64::new(0.0, 0.0) || radius != 1.0 {
                    return Err(Error::domain("only full-disk rules can be refined"));
                }
                Chart::Boundary {
                    anchor: point,
                    strength,
                }
            }
            Chart::Boundary {
                anchor,
                strength: s,
            } => {
                if (anchor - point).norm() > 1e-12 {
                    return Err(Error::domain(
                        "rule is already refined towards a different boundary point",
                    ));
                }
                Chart::Boundary {
                    anchor,
                    strength: s.max(strength),
                }
            }
        };
        Ok(Self {
            chart,
            ..self.clone()
        })
    }

    /// Visits every node with its full-rule and coarse-rule weights.
    pub fn for_each(&self, mut visit: impl FnMut(&Point, f64, f64)) {
        let gk = gk21();
        match self.chart {
            Chart::Centered { center, radius } => {
                let mut breaks: Vec<f64> = (0..=self.radial_panels)
                    .map(|i| radius * i as f64 / self.radial_panels as f64)
                    .collect();
                if center == Complex64::new(0.0, 0.0) {
                    breaks.extend(self.circles.iter().copied().filter(|&r| r < radius));
                }
                let breaks = clean_breaks(breaks, radius);
                let m = self.angular_nodes;
                let dth = 2.0 * PI / m as f64;
                let dirs: Vec<Complex64> = (0..m)
                    .map(|j| Complex64::from_polar(1.0, (j as f64 + 0.5) * dth))
                    .collect();
                for w in breaks.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let h = 0.5 * (b - a);
                    let mid = 0.5 * (a + b);
                    for &(x, wk, wg) in &gk {
                        let rho = mid + h * x;
                        let jac = rho * h;
                        for (j, d) in dirs.iter().enumerate() {
                            let off = d * rho;
                            let p = Point {
                                z: center + off,
                                one_minus_z: (Complex64::new(1.0, 0.0) - center) - off,
                            };
                            let lo = if j % 2 == 0 { wg * jac * 2.0 * dth } else { 0.0 };
                            visit(&p, wk * jac * dth, lo);
                        }
                    }
                }
            }
            Chart::Boundary { anchor, strength } => {
                let floor = 10f64.powf(-strength);
                let np = self.angular_panels;
                let width = PI / np as f64;
                let one = Complex64::new(1.0, 0.0);
                for panel in 0..np {
                    let a = -FRAC_PI_2 + panel as f64 * width;
                    let mid = a + 0.5 * width;
                    let half = 0.5 * width;
                    for &(x, wkt, wgt) in &gk {
                        let th = mid + half * x;
                        let c = th.cos();
                        let dir = Complex64::from_polar(1.0, th);
                        let rmax = 2.0 * c;
                        let breaks = self.ray_breaks(c, rmax, floor);
                        for w in breaks.windows(2) {
                            let (a, b) = (w[0], w[1]);
                            let h = 0.5 * (b - a);
                            let m = 0.5 * (a + b);
                            for &(y, wk, wg) in &gk {
                                let rho = m + h * y;
                                let jac = rho * h * half;
                                let step = dir * rho;
                                let p = Point {
                                    z: anchor * (one - step),
                                    one_minus_z: (one - anchor) + anchor * step,
                                };
                                visit(&p, wkt * wk * jac, wgt * wg * jac);
                            }
                        }
                    }
                }
            }
        }
    }

    fn ray_breaks(&self, c: f64, rmax: f64, floor: f64) -> Vec<f64> {
        let n = self.radial_panels;
        let mut breaks: Vec<f64> = (0..=n).map(|i| rmax * i as f64 / n as f64).collect();
        let mut g = rmax / n as f64 * GRADING;
        while g > floor {
            breaks.push(g);
            g *= GRADING;
        }
        for &r in &self.circles {
            // |1 − ρe^{iθ}| = r  ⇔  ρ² − 2ρc + (1 − r²) = 0
            let q = 1.0 - r * r;
            let disc = c * c - q;
            if disc <= 0.0 {
                continue;
            }
            let s = disc.sqrt();
            let small = q / (c + s);
            breaks.push(small);
            breaks.push(c + s);
        }
        clean_breaks(breaks, rmax)
    }

    /// Materialised node list with full-rule weights.
    pub fn nodes(&self) -> Vec<(Point, f64)> {
        let mut out = Vec::new();
        self.for_each(|p, w, _| out.push((*p, w)));
        out
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.for_each(|_, _, _| n += 1);
        n
    }

    pub fn total_weight(&self) -> f64 {
        let mut s = CompensatedSum::new();
        self.for_each(|_, w, _| s.add(w));
        s.value()
    }

    /// Integrates `n` integrands at once; `eval` fills one value per integrand.
    pub fn integrate_many(
        &self,
        n: usize,
        mut eval: impl FnMut(&Point, &mut [Complex64]),
    ) -> Result<Vec<Integral>> {
        let mut hi = vec![ComplexSum::new(); n];
        let mut lo = vec![ComplexSum::new(); n];
        let mut mass = vec![CompensatedSum::new(); n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut bad: Option<Point> = None;
        self.for_each(|p, wh, wl| {
            if bad.is_some() {
                return;
            }
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            eval(p, &mut buf);
            for i in 0..n {
                let v = buf[i];
                if !(v.re.is_finite() && v.im.is_finite()) {
                    bad = Some(*p);
                    return;
                }
                hi[i].add(v * wh);
                if wl != 0.0 {
                    lo[i].add(v * wl);
                }
                mass[i].add(v.norm() * wh);
            }
        });
        if let Some(p) = bad {
            return Err(Error::SingularSample {
                re: p.z.re,
                im: p.z.im,
            });
        }
        Ok((0..n)
            .map(|i| {
                let value = hi[i].value();
                let error = (value - lo[i].value()).norm() + 8.0 * f64::EPSILON * mass[i].value();
                Integral { value, error }
            })
            .collect())
    }

    pub fn integrate<F: Field + ?Sized>(&self, f: &F) -> Result<Integral> {
        let r = self.integrate_many(1, |p, out| out[0] = f.eval(p))?;
        Ok(r[0])
    }
}

fn clean_breaks(mut breaks: Vec<f64>, top: f64) -> Vec<f64> {
    breaks.retain(|&b| (0.0..=top).contains(&b));
    breaks.push(0.0);
    breaks.push(top);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(breaks.len());
    for b in breaks {
        match out.last() {
            Some(&last) if b - last <= 1e-13 * b && b != top => {}
            Some(&last) if b == top && b - last <= 1e-13 * top => {
                *out.last_mut().unwrap() = top;
            }
            _ => out.push(b),
        }
    }
    out
}

/// Convenience wrapper matching the free-function style used elsewhere.
pub fn integrate_disk<F: Field + ?Sized>(f: &F, rule: &QuadratureRule) -> Result<Integral> {
    rule.integrate(f)
}
