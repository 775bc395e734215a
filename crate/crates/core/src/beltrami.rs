//! Beltrami differentials, holomorphic quadratic differentials and the
//! operations pairing them.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, ToPrimitive};

use crate::cantor::RadialCantorSet;
use crate::error::{Error, Result};
use crate::quadrature::{Field, Integral, Point, QuadratureRule};
use crate::sampling::stratified_disk;
use crate::solver::GridField;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `z/|z|`, and exactly 0 at 0.
pub fn sgn(z: Complex64) -> Complex64 {
    if z == ZERO {
        return ZERO;
    }
    let r = z.norm();
    if r.is_finite() {
        z / r
    } else {
        Complex64::from_polar(1.0, z.arg())
    }
}

fn powr(base: Complex64, e: f64) -> Complex64 {
    if e == 0.0 {
        ONE
    } else if e.fract() == 0.0 && e.abs() <= 64.0 {
        base.powi(e as i32)
    } else {
        base.powf(e)
    }
}

/// Holomorphic quadratic differential on the disk.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadraticDifferential {
    /// Σ c_j ((z − center)/radius)^j.
    Polynomial {
        coeffs: Vec<Complex64>,
        center: Complex64,
        radius: f64,
    },
    /// (1 − x²)^a / ((1 − xz)^b (1 − z)^c).
    Kernel { x: f64, a: f64, b: f64, c: f64 },
    /// (1 − z)^(s − 2); integrable for s > 0.
    BoundaryPower { s: f64 },
    /// 1/(1 − z)², which is not integrable.
    BoundarySingular,
    Product(Box<QuadraticDifferential>, Box<QuadraticDifferential>),
}

impl QuadraticDifferential {
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![ZERO; n + 1];
        coeffs[n] = ONE;
        Self::polynomial(coeffs)
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        Self::Polynomial {
            coeffs,
            center: ZERO,
            radius: 1.0,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::polynomial(vec![c])
    }

    /// ((z − center)/radius)^j.
    pub fn local_monomial(center: Complex64, radius: f64, j: usize) -> Self {
        let mut coeffs = vec![ZERO; j + 1];
        coeffs[j] = ONE;
        Self::Polynomial {
            coeffs,
            center,
            radius,
        }
    }

    pub fn kernel(x: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::domain(format!("kernel parameter x = {x} outside [0, 1)")));
        }
        Ok(Self::Kernel { x, a, b, c })
    }

    pub fn boundary_power(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("boundary power s = {s} must be positive")));
        }
        Ok(Self::BoundaryPower { s })
    }

    pub fn times(self, other: QuadraticDifferential) -> Self {
        Self::Product(Box::new(self), Box::new(other))
    }

    /// Whether ∬_𝔻 |φ| < ∞.
    pub fn is_integrable(&self) -> bool {
        match self {
            Self::Polynomial { .. } => true,
            Self::Kernel { c, .. } => *c < 2.0,
            Self::BoundaryPower { s } => *s > 0.0,
            Self::BoundarySingular => false,
            Self::Product(a, b) => {
                a.is_integrable() && b.is_integrable() && (a.is_bounded() || b.is_bounded())
            }
        }
    }

    fn is_bounded(&self) -> bool {
        match self {
            Self::Polynomial { .. } => true,
            Self::Kernel { c, .. } => *c <= 0.0,
            Self::BoundaryPower { s } => *s >= 2.0,
            Self::BoundarySingular => false,
            Self::Product(a, b) => a.is_bounded() && b.is_bounded(),
        }
    }

    /// Boundary point where the form blows up, if any.
    pub fn singular_point(&self) -> Option<Complex64> {
        match self {
            Self::Polynomial { .. } => None,
            Self::Kernel { c, .. } if *c <= 0.0 => None,
            Self::Kernel { .. } | Self::BoundarySingular => Some(ONE),
            Self::BoundaryPower { s } if *s >= 2.0 => None,
            Self::BoundaryPower { .. } => Some(ONE),
            Self::Product(a, b) => a.singular_point().or(b.singular_point()),
        }
    }

    pub fn value(&self, p: &Point) -> Complex64 {
        match self {
            Self::Polynomial {
                coeffs,
                center,
                radius,
            } => {
                let w = (p.z - center) / radius;
                coeffs.iter().rev().fold(ZERO, |acc, c| acc * w + c)
            }
            Self::Kernel { x, a, b, c } => {
                let one_minus_xz = Complex64::new(1.0 - x, 0.0) + p.one_minus_z * x;
                let num = (1.0 - x * x).powf(*a);
                powr(one_minus_xz, -b) * powr(p.one_minus_z, -c) * num
            }
            Self::BoundaryPower { s } => powr(p.one_minus_z, s - 2.0),
            Self::BoundarySingular => powr(p.one_minus_z, -2.0),
            Self::Product(f, g) => f.value(p) * g.value(p),
        }
    }

    /// sgn φ(z), evaluated without forming φ where that could overflow.
    pub fn phase(&self, p: &Point) -> Complex64 {
        match self {
            Self::BoundaryPower { s } => {
                if p.one_minus_z == ZERO {
                    return ZERO;
                }
                Complex64::from_polar(1.0, (s - 2.0) * p.one_minus_z.arg())
            }
            Self::BoundarySingular => {
                if p.one_minus_z == ZERO {
                    return ZERO;
                }
                Complex64::from_polar(1.0, -2.0 * p.one_minus_z.arg())
            }
            Self::Product(f, g) => f.phase(p) * g.phase(p),
            _ => sgn(self.value(p)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Polynomial {
                coeffs,
                center,
                radius,
            } => {
                let nz: Vec<usize> = (0..coeffs.len()).filter(|&j| coeffs[j] != ZERO).collect();
                let var = if *center == ZERO && *radius == 1.0 {
                    String::from("z")
                } else {
                    format!("((z-({},{}))/{})", center.re, center.im, radius)
                };
                if nz.len() == 1 && coeffs[nz[0]] == ONE {
                    format!("{var}^{}", nz[0])
                } else {
                    format!("poly{}({var})", coeffs.len().saturating_sub(1))
                }
            }
            Self::Kernel { x, a, b, c } => format!("kernel(x={x},a={a},b={b},c={c})"),
            Self::BoundaryPower { s } => format!("(1-z)^({}-2)", s),
            Self::BoundarySingular => String::from("(1-z)^-2"),
            Self::Product(a, b) => format!("{}*{}", a.label(), b.label()),
        }
    }
}

impl Field for QuadraticDifferential {
    fn eval(&self, p: &Point) -> Complex64 {
        self.value(p)
    }
}

fn require_integrable(phi: &QuadraticDifferential) -> Result<()> {
    if phi.is_integrable() {
        Ok(())
    } else {
        Err(Error::InfiniteNorm(format!("{} is not integrable on the disk", phi.label())))
    }
}

/// ‖φ‖ = ∬ |φ| over the region of the rule.
pub fn l1_norm(phi: &QuadraticDifferential, rule: &QuadratureRule) -> Result<Integral> {
    require_integrable(phi)?;
    rule.integrate(&|p: &Point| Complex64::new(phi.value(p).norm(), 0.0))
}

/// Open disk `|z − center| < radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }

    /// Whether the closure lies inside the open unit disk.
    pub fn compactly_inside(&self) -> bool {
        self.radius > 0.0 && self.center.norm() + self.radius < 1.0
    }
}

/// Measurable subset of the disk given by a predicate.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportMask {
    Empty,
    Whole,
    Radial(RadialCantorSet),
    Disk(Disk),
    /// inner ≤ |z| ≤ outer
    Annulus { inner: f64, outer: f64 },
    /// inner ≤ |z| ≤ outer and start ≤ arg z ≤ end (radians, in (−π, π])
    Sector {
        inner: f64,
        outer: f64,
        start: f64,
        end: f64,
    },
    Complement(Box<SupportMask>),
    Union(Vec<SupportMask>),
}

impl SupportMask {
    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Self::Empty => false,
            Self::Whole => true,
            Self::Radial(s) => s.contains(z),
            Self::Disk(d) => d.contains(z),
            Self::Annulus { inner, outer } => {
                let r = z.norm();
                *inner <= r && r <= *outer
            }
            Self::Sector {
                inner,
                outer,
                start,
                end,
            } => {
                let r = z.norm();
                let a = z.arg();
                *inner <= r && r <= *outer && *start <= a && a <= *end
            }
            Self::Complement(m) => !m.contains(z),
            Self::Union(ms) => ms.iter().any(|m| m.contains(z)),
        }
    }

    pub fn complement(&self) -> Self {
        match self {
            Self::Complement(m) => (**m).clone(),
            other => Self::Complement(Box::new(other.clone())),
        }
    }

    /// Radii of centred circles across which membership can change.
    pub fn circles(&self) -> Vec<f64> {
        match self {
            Self::Radial(s) => s.circles_f64().unwrap_or_default(),
            Self::Annulus { inner, outer } | Self::Sector { inner, outer, .. } => {
                vec![*inner, *outer]
            }
            Self::Complement(m) => m.circles(),
            Self::Union(ms) => ms.iter().flat_map(|m| m.circles()).collect(),
            _ => Vec::new(),
        }
    }
}

/// The radial stretch-twist `r e^{iθ} ↦ r^p e^{i(θ + t(1 − r))}`, a
/// quasiconformal self-map of the disk equal to the identity on the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchTwist {
    pub p: f64,
    pub t: f64,
}

impl StretchTwist {
    pub fn new(p: f64, t: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() || !t.is_finite() {
            return Err(Error::domain(format!("stretch-twist p = {p}, t = {t}")));
        }
        Ok(Self { p, t })
    }

    pub fn map(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        if r == 0.0 {
            return ZERO;
        }
        let rot = Complex64::from_polar(1.0, self.t * (1.0 - r));
        sgn(z) * rot * r.powf(self.p)
    }

    fn q(&self, r: f64) -> Complex64 {
        Complex64::new(self.p - 1.0, -self.t * r)
    }

    pub fn dilatation(&self, z: Complex64) -> Complex64 {
        let q = self.q(z.norm());
        let s = sgn(z);
        s * s * q / (q + 2.0)
    }

    /// ∂f/∂z.
    pub fn fz(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        let g = Complex64::from_polar(r.powf(self.p - 1.0), self.t * (1.0 - r));
        g * (ONE + self.q(r) * 0.5)
    }

    /// ∂f/∂z̄.
    pub fn fzbar(&self, z: Complex64) -> Complex64 {
        let r = z.norm();
        let g = Complex64::from_polar(r.powf(self.p - 1.0), self.t * (1.0 - r));
        let s = sgn(z);
        g * s * s * self.q(r) * 0.5
    }

    /// Beltrami coefficient of the inverse map, evaluated at `w`.
    pub fn inverse_dilatation(&self, w: Complex64) -> Complex64 {
        let s_abs = w.norm();
        let u = s_abs.powf(1.0 / self.p);
        let q = Complex64::new(1.0 / self.p - 1.0, self.t / self.p * u);
        let s = sgn(w);
        s * s * q / (q + 2.0)
    }

    /// ‖μ‖∞, attained on the unit circle.
    pub fn k(&self) -> f64 {
        let (p, t) = (self.p, self.t);
        (((p - 1.0) * (p - 1.0) + t * t) / ((p + 1.0) * (p + 1.0) + t * t)).sqrt()
    }
}

/// Complex dilatation on the disk, described structurally so that reports can
/// say what was built.
#[derive(Debug, Clone, PartialEq)]
pub enum BeltramiField {
    Zero,
    Constant(Complex64),
    /// k·conj(φ)/|φ|.
    Teichmuller { k: f64, phi: QuadraticDifferential },
    /// κ·η on `set`, η elsewhere.
    Deformed {
        eta: Box<BeltramiField>,
        kappa: f64,
        set: SupportMask,
    },
    /// z^m on 𝒮, 0 elsewhere.
    Perturbation { m: u32, set: RadialCantorSet },
    /// c·sgn(z)^m.
    PhasePower { c: Complex64, m: i32 },
    StretchTwist(StretchTwist),
    /// `base` on `mask`, 0 elsewhere.
    Masked {
        base: Box<BeltramiField>,
        mask: SupportMask,
    },
    /// Σ c_j μ_j.
    Combination(Vec<(Complex64, BeltramiField)>),
    /// `inside` on `mask`, `outside` elsewhere.
    Split {
        mask: SupportMask,
        inside: Box<BeltramiField>,
        outside: Box<BeltramiField>,
    },
    /// Nearest-cell lookup in a grid; 0 outside the grid square.
    Grid(GridField),
}

/// η = k·conj(φ)/|φ|, and 0 on the zero set of φ.
pub fn teichmuller_form(k: f64, phi: QuadraticDifferential) -> Result<BeltramiField> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::domain(format!("k = {k} outside (0, 1)")));
    }
    Ok(BeltramiField::Teichmuller { k, phi })
}

/// μ = κη with κ constant on `set` and κ = 1 off it.
pub fn deform(eta: BeltramiField, kappa: f64, set: SupportMask) -> Result<BeltramiField> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Contract(format!(
            "κ = {kappa} on E; the deformation needs 0 ≤ κ ≤ 1"
        )));
    }
    Ok(BeltramiField::Deformed {
        eta: Box::new(eta),
        kappa,
        set,
    })
}

/// γ = z^m on 𝒮, 0 elsewhere.
pub fn perturbation(m: u32, set: RadialCantorSet) -> Result<BeltramiField> {
    if m == 0 {
        return Err(Error::domain("perturbation power m must be positive"));
    }
    Ok(BeltramiField::Perturbation { m, set })
}

impl BeltramiField {
    pub fn value(&self, p: &Point) -> Complex64 {
        match self {
            Self::Zero => ZERO,
            Self::Constant(c) => *c,
            Self::Teichmuller { k, phi } => phi.phase(p).conj() * *k,
            Self::Deformed { eta, kappa, set } => {
                let v = eta.value(p);
                if set.contains(p.z) {
                    v * *kappa
                } else {
                    v
                }
            }
            Self::Perturbation { m, set } => {
                if set.contains(p.z) {
                    p.z.powi(*m as i32)
                } else {
                    ZERO
                }
            }
            Self::PhasePower { c, m } => {
                let s = sgn(p.z);
                if s == ZERO {
                    ZERO
                } else {
                    c * s.powi(*m)
                }
            }
            Self::StretchTwist(f) => f.dilatation(p.z),
            Self::Masked { base, mask } => {
                if mask.contains(p.z) {
                    base.value(p)
                } else {
                    ZERO
                }
            }
            Self::Combination(terms) => terms.iter().map(|(c, f)| c * f.value(p)).sum(),
            Self::Split {
                mask,
                inside,
                outside,
            } => {
                if mask.contains(p.z) {
                    inside.value(p)
                } else {
                    outside.value(p)
                }
            }
            Self::Grid(g) => g.lookup(p.z),
        }
    }

    /// Upper bound for ‖μ‖∞ known from the construction.
    pub fn sup_bound(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(c) => c.norm(),
            Self::Teichmuller { k, .. } => *k,
            Self::Deformed { eta, .. } => eta.sup_bound(),
            Self::Perturbation { m, set } => set.lambda_f64().powi(*m as i32),
            Self::PhasePower { c, .. } => c.norm(),
            Self::StretchTwist(f) => f.k(),
            Self::Masked { base, .. } => base.sup_bound(),
            Self::Combination(terms) => terms.iter().map(|(c, f)| c.norm() * f.sup_bound()).sum(),
            Self::Split { inside, outside, .. } => inside.sup_bound().max(outside.sup_bound()),
            Self::Grid(g) => g.values().iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// Radii of centred circles where the field may jump.
    pub fn circles(&self) -> Vec<f64> {
        let mut out = match self {
            Self::Deformed { eta, set, .. } => {
                let mut v = eta.circles();
                v.extend(set.circles());
                v
            }
            Self::Perturbation { set, .. } => set.circles_f64().unwrap_or_default(),
            Self::Masked { base, mask } => {
                let mut v = base.circles();
                v.extend(mask.circles());
                v
            }
            Self::Combination(terms) => terms.iter().flat_map(|(_, f)| f.circles()).collect(),
            Self::Split {
                mask,
                inside,
                outside,
            } => {
                let mut v = mask.circles();
                v.extend(inside.circles());
                v.extend(outside.circles());
                v
            }
            _ => Vec::new(),
        };
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    pub fn scaled(self, c: Complex64) -> Self {
        Self::Combination(vec![(c, self)])
    }

    pub fn plus(self, c: Complex64, other: BeltramiField) -> Self {
        Self::Combination(vec![(ONE, self), (c, other)])
    }

    pub fn label(&self) -> String {
        match self {
            Self::Zero => String::from("0"),
            Self::Constant(c) => format!("const({},{})", c.re, c.im),
            Self::Teichmuller { k, phi } => format!("teich(k={k},{})", phi.label()),
            Self::Deformed { eta, kappa, .. } => format!("deform({},kappa={kappa})", eta.label()),
            Self::Perturbation { m, .. } => format!("gamma(m={m})"),
            Self::PhasePower { c, m } => format!("({},{})*sgn^{m}", c.re, c.im),
            Self::StretchTwist(f) => format!("stretch-twist(p={},t={})", f.p, f.t),
            Self::Masked { base, .. } => format!("masked({})", base.label()),
            Self::Combination(t) => format!("combination[{}]", t.len()),
            Self::Split { inside, outside, .. } => format!("split({} | {})", inside.label(), outside.label()),
            Self::Grid(g) => format!("grid({})", g.n()),
        }
    }
}

impl Field for BeltramiField {
    fn eval(&self, p: &Point) -> Complex64 {
        self.value(p)
    }

    fn sup_bound(&self) -> Option<f64> {
        Some(BeltramiField::sup_bound(self))
    }
}

/// ∬ μφ.
pub fn pairing(mu: &BeltramiField, phi: &QuadraticDifferential, rule: &QuadratureRule) -> Result<Integral> {
    require_integrable(phi)?;
    rule.integrate(&|p: &Point| mu.value(p) * phi.value(p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaValue {
    pub delta: f64,
    pub norm: f64,
    pub pairing: Complex64,
    pub error: f64,
}

/// Reich functional δ[φ] = k‖φ‖ − Re ∬ μφ with k = ‖μ‖∞ from the construction.
pub fn delta(mu: &BeltramiField, phi: &QuadraticDifferential, rule: &QuadratureRule) -> Result<DeltaValue> {
    require_integrable(phi)?;
    let k = mu.sup_bound();
    let r = rule.integrate_many(2, |p, out| {
        let v = phi.value(p);
        out[0] = mu.value(p) * v;
        out[1] = Complex64::new(v.norm(), 0.0);
    })?;
    let norm = r[1].value.re;
    Ok(DeltaValue {
        delta: k * norm - r[0].value.re,
        norm,
        pairing: r[0].value,
        error: r[0].error + k * r[1].error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssSup {
    pub value: f64,
    /// |max over even-indexed samples − max over odd-indexed samples|.
    pub sigma: f64,
    pub samples: usize,
}

/// Max of |μ| over stratified samples of `region ∩ mask`.
pub fn ess_sup_on(
    mu: &BeltramiField,
    mask: &SupportMask,
    region: Disk,
    budget: usize,
    seed: u64,
) -> Result<EssSup> {
    if budget < 1000 {
        return Err(Error::domain(format!("sample budget {budget} below 1000")));
    }
    let pts = stratified_disk(region.center, region.radius, budget, seed);
    let mut maxes = [f64::NEG_INFINITY; 2];
    let mut n = 0;
    for z in pts {
        if z.norm() >= 1.0 || !mask.contains(z) {
            continue;
        }
        let v = mu.value(&Point::new(z)).norm();
        maxes[n % 2] = maxes[n % 2].max(v);
        n += 1;
    }
    if n == 0 {
        return Err(Error::RegionNotHit { samples: budget });
    }
    let value = maxes[0].max(maxes[1]);
    let sigma = if n > 1 { (maxes[0] - maxes[1]).abs() } else { value };
    Ok(EssSup {
        value,
        sigma,
        samples: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiskProbe {
    pub disk: Disk,
    pub ess_sup: EssSup,
    pub gap: f64,
    pub gap_detected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandslideReport {
    pub k: f64,
    pub probes: Vec<DiskProbe>,
    pub landslide_evidence: bool,
}

impl LandslideReport {
    pub fn verdict(&self) -> &'static str {
        if self.landslide_evidence {
            "landslide evidence"
        } else {
            "no gap vs global k"
        }
    }
}

/// Compares the sampled sup of |μ| on each disk with the global bound k.
pub fn landslide_probe(mu: &BeltramiField, disks: &[Disk], budget: usize, seed: u64) -> Result<LandslideReport> {
    let k = mu.sup_bound();
    let mut probes = Vec::with_capacity(disks.len());
    for (i, d) in disks.iter().enumerate() {
        if !d.compactly_inside() {
            return Err(Error::domain(format!(
                "probe disk {i} is not inside the open unit disk"
            )));
        }
        let es = ess_sup_on(mu, &SupportMask::Whole, *d, budget, seed.wrapping_add(i as u64))?;
        let gap = k - es.value;
        let gap_detected = gap > 3.0 * es.sigma + 1e-9 * k;
        probes.push(DiskProbe {
            disk: *d,
            ess_sup: es,
            gap,
            gap_detected,
        });
    }
    let landslide_evidence = probes.iter().any(|p| p.gap_detected);
    Ok(LandslideReport {
        k,
        probes,
        landslide_evidence,
    })
}

/// Disk of radius `radius` with uniformly random centre in |c| < `within` − radius.
pub fn random_disks(count: usize, radius: f64, within: f64, seed: u64) -> Vec<Disk> {
    let mut g = crate::sampling::rng(seed);
    (0..count)
        .map(|_| Disk::new(crate::sampling::uniform_in_disk(&mut g, within - radius), radius))
        .collect()
}

/// |μ| at a point, as used by pointwise modulus comparisons.
pub fn modulus_at(mu: &BeltramiField, z: Complex64) -> f64 {
    mu.value(&Point::new(z)).norm()
}

/// ∬_𝒮 z^m z^n dxdy through the ring decomposition of 𝒮.
#[derive(Debug, Clone, PartialEq)]
pub struct RingMoment {
    /// ∫ r^{m+n+1} dr over the radii of 𝒮, exact.
    pub radial: BigRational,
    /// ∫_0^{2π} e^{i(m+n)θ} dθ.
    pub angular: Complex64,
    pub value: Complex64,
    pub rings: usize,
}

/// Closed form of the perturbation moment: the disk of radius λ minus every
/// ring, each factored into an exact radial integral and an angular one.
pub fn ring_moment(set: &RadialCantorSet, m: u32, n: u32) -> Result<RingMoment> {
    let rings = set.ring_system()?;
    let q = m + n;
    let p = q + 2;
    let pw = |x: &BigRational| -> BigRational {
        let mut out = BigRational::one();
        for _ in 0..p {
            out *= x;
        }
        out
    };
    let scale = BigRational::new(BigInt::one(), BigInt::from(p));
    let mut radial = pw(&rings.outer) * &scale;
    if let Some(c) = &rings.central {
        radial -= pw(c) * &scale;
    }
    for ring in &rings.rings {
        radial -= (pw(&ring.hi) - pw(&ring.lo)) * &scale;
    }
    // e^{iqθ} has a whole number of periods on [0, 2π] unless q = 0
    let angular = if q == 0 { Complex64::new(2.0 * PI, 0.0) } else { ZERO };
    let value = angular * radial.to_f64().unwrap_or(f64::NAN);
    Ok(RingMoment {
        radial,
        angular,
        value,
        rings: rings.rings.len(),
    })
}

/// Area of the unit disk, for readability at call sites.
pub const DISK_AREA: f64 = PI;
