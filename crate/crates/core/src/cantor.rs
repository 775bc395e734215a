//! Finite stages of the 1/5-Cantor set, its radial rotation in the disk and the
//! complementary ring system. Endpoints are exact rationals.
//!
//! Every interval of a given stage has the same length, so a stage is stored as
//! the per-level lengths and child offsets rather than as an interval list. The
//! list is produced on demand, up to [`ENUMERATION_LIMIT`] levels.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const MAX_STAGE: u32 = 64;
/// Largest stage whose interval list may be materialised (2^20 intervals).
pub const ENUMERATION_LIMIT: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Scheme {
    /// Removes a centred open interval of length 5^-k from every interval at
    /// step k. The limit set has measure 2/3.
    #[default]
    AbsoluteFifth,
    /// Removes the open middle fifth of every interval. The limit set is null.
    ProportionalFifth,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::AbsoluteFifth => "absolute-fifth",
            Scheme::ProportionalFifth => "proportional-fifth",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "absolute-fifth" | "absolutefifth" | "absolute" => Ok(Scheme::AbsoluteFifth),
            "proportional-fifth" | "proportionalfifth" | "proportional" => {
                Ok(Scheme::ProportionalFifth)
            }
            other => Err(Error::Config(format!("unknown Cantor scheme `{other}`"))),
        }
    }
}

/// A closed interval `[lo, hi]` (or an open gap, depending on context).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow_rat(base: &BigRational, e: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= base;
    }
    out
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Stage `k` of the 1/5-Cantor construction on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    scheme: Scheme,
    stage: u32,
    // len[j]: common interval length after j steps.
    len: Vec<BigRational>,
    // gap[j-1]: length removed from each interval at step j.
    gap: Vec<BigRational>,
    len_f: Vec<f64>,
    step_f: Vec<f64>,
}

pub fn cantor_stage(k: u32, scheme: Scheme) -> Result<IntervalSet> {
    if k > MAX_STAGE {
        return Err(Error::Resource(format!(
            "stage {k} exceeds the rational-arithmetic budget of {MAX_STAGE}"
        )));
    }
    let two = rat(2, 1);
    let fifth = rat(1, 5);
    let mut len = vec![BigRational::one()];
    let mut gap = Vec::with_capacity(k as usize);
    let mut absolute = BigRational::one();
    for _ in 0..k {
        let prev = len.last().unwrap();
        absolute *= &fifth;
        let g = match scheme {
            Scheme::AbsoluteFifth => absolute.clone(),
            Scheme::ProportionalFifth => prev * &fifth,
        };
        let next = (prev - &g) / &two;
        len.push(next);
        gap.push(g);
    }
    let len_f = len.iter().map(to_f64).collect();
    let step_f = (0..k as usize)
        .map(|j| to_f64(&(&len[j + 1] + &gap[j])))
        .collect();
    Ok(IntervalSet {
        scheme,
        stage: k,
        len,
        gap,
        len_f,
        step_f,
    })
}

impl IntervalSet {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn count(&self) -> u128 {
        1u128 << self.stage
    }

    /// Common length of the stage intervals.
    pub fn interval_length(&self) -> &BigRational {
        &self.len[self.stage as usize]
    }

    /// Offset of the right child from its parent's left end at step `j` (1-based).
    fn step(&self, j: usize) -> BigRational {
        &self.len[j] + &self.gap[j - 1]
    }

    pub fn measure(&self) -> BigRational {
        self.interval_length() * BigRational::from_integer(BigInt::one() << self.stage)
    }

    /// Total length removed through this stage.
    pub fn removed_length(&self) -> BigRational {
        let mut total = BigRational::zero();
        for (j, g) in self.gap.iter().enumerate() {
            total += g * BigRational::from_integer(BigInt::one() << j);
        }
        total
    }

    fn check_enumerable(&self) -> Result<()> {
        if self.stage > ENUMERATION_LIMIT {
            return Err(Error::Resource(format!(
                "stage {} has 2^{} intervals; listing is limited to stage {}",
                self.stage, self.stage, ENUMERATION_LIMIT
            )));
        }
        Ok(())
    }

    fn left_ends(&self) -> Vec<BigRational> {
        let mut los = vec![BigRational::zero()];
        for j in 1..=self.stage as usize {
            let d = self.step(j);
            los = los
                .into_iter()
                .flat_map(|lo| {
                    let right = &lo + &d;
                    [lo, right]
                })
                .collect();
        }
        los
    }

    /// The sorted interval list.
    pub fn intervals(&self) -> Result<Vec<Interval>> {
        self.check_enumerable()?;
        let l = self.interval_length();
        Ok(self
            .left_ends()
            .into_iter()
            .map(|lo| {
                let hi = &lo + l;
                Interval { lo, hi }
            })
            .collect())
    }

    /// The open gaps between consecutive intervals, sorted.
    pub fn gaps(&self) -> Result<Vec<Interval>> {
        let iv = self.intervals()?;
        Ok(iv
            .windows(2)
            .map(|w| Interval {
                lo: w[0].hi.clone(),
                hi: w[1].lo.clone(),
            })
            .collect())
    }

    /// Interval endpoints as floats, sorted and without duplicates.
    pub fn endpoints_f64(&self) -> Result<Vec<f64>> {
        self.check_enumerable()?;
        let l = self.len_f[self.stage as usize];
        let mut los = vec![0.0f64];
        for j in 0..self.stage as usize {
            let d = self.step_f[j];
            los = los.into_iter().flat_map(|lo| [lo, lo + d]).collect();
        }
        let mut out = Vec::with_capacity(2 * los.len());
        for lo in los {
            out.push(lo);
            out.push(lo + l);
        }
        out.dedup();
        Ok(out)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        if x.is_negative() || *x > BigRational::one() {
            return false;
        }
        let mut pos = x.clone();
        for j in 1..=self.stage as usize {
            if pos <= self.len[j] {
                continue;
            }
            let d = self.step(j);
            if pos >= d {
                pos -= d;
            } else {
                return false;
            }
        }
        true
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        if !(0.0..=1.0).contains(&x) {
            return false;
        }
        let mut pos = x;
        for j in 0..self.stage as usize {
            if pos <= self.len_f[j + 1] {
                continue;
            }
            let d = self.step_f[j];
            if pos >= d {
                pos -= d;
            } else {
                return false;
            }
        }
        true
    }

    /// Sums of `lo^p` over the left endpoints for p = 0..=3, by recursion on
    /// the stage instead of enumeration.
    pub fn left_power_sums(&self) -> [BigRational; 4] {
        let two = rat(2, 1);
        let three = rat(3, 1);
        let mut s = [
            BigRational::one(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ];
        for j in 1..=self.stage as usize {
            let d = self.step(j);
            let d2 = &d * &d;
            let d3 = &d2 * &d;
            let [s0, s1, s2, s3] = s;
            let n3 = &two * &s3 + &three * &d * &s2 + &three * &d2 * &s1 + &d3 * &s0;
            let n2 = &two * &s2 + &two * &d * &s1 + &d2 * &s0;
            let n1 = &two * &s1 + &d * &s0;
            let n0 = &two * &s0;
            s = [n0, n1, n2, n3];
        }
        s
    }

    /// Σ (hi^p − lo^p) over the intervals, for p ∈ {1, 2, 3}.
    pub fn endpoint_power_difference(&self, p: u32) -> BigRational {
        let l = self.interval_length();
        let [s0, s1, s2, _] = self.left_power_sums();
        match p {
            1 => l * s0,
            2 => rat(2, 1) * l * &s1 + l * l * &s0,
            3 => {
                rat(3, 1) * l * &s2 + rat(3, 1) * l * l * &s1 + pow_rat(l, 3) * &s0
            }
            _ => panic!("endpoint_power_difference supports p in 1..=3"),
        }
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.intervals() {
            Ok(iv) => {
                for (i, it) in iv.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ∪ ")?;
                    }
                    write!(f, "[{},{}]", it.lo, it.hi)?;
                }
                Ok(())
            }
            Err(_) => write!(
                f,
                "<{} stage {}: {} intervals of length {}>",
                self.scheme.name(),
                self.stage,
                self.count(),
                self.interval_length()
            ),
        }
    }
}

/// Parses `0.8`, `-1.25e-3`, `4/5` or an integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot read `{s}` as an exact number"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut all = String::from(int);
    all.push_str(frac);
    let num: BigInt = all.parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(num);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// 𝒮 = { r e^{iθ} : r ∈ λ·base }.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCantorSet {
    base: IntervalSet,
    lambda: BigRational,
    lambda_f: f64,
}

impl RadialCantorSet {
    /// λ must lie in (0, 1]; λ = 1 is accepted so that area identities of the
    /// unscaled set can be stated directly.
    pub fn new(base: IntervalSet, lambda: BigRational) -> Result<Self> {
        if !lambda.is_positive() || lambda > BigRational::one() {
            return Err(Error::domain(format!("λ = {lambda} outside (0, 1]")));
        }
        let lambda_f = to_f64(&lambda);
        Ok(Self {
            base,
            lambda,
            lambda_f,
        })
    }

    pub fn base(&self) -> &IntervalSet {
        &self.base
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda_f
    }

    pub fn contains_radius(&self, r: f64) -> bool {
        r <= self.lambda_f && self.base.contains_f64(r / self.lambda_f)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.contains_radius(z.norm())
    }

    /// Area divided by π: λ² Σ (hi² − lo²).
    pub fn area_over_pi(&self) -> BigRational {
        &self.lambda * &self.lambda * self.base.endpoint_power_difference(2)
    }

    /// ∬_𝒮 |z| dxdy divided by π: (2/3) λ³ Σ (hi³ − lo³).
    pub fn radial_moment_over_pi(&self) -> BigRational {
        rat(2, 3) * pow_rat(&self.lambda, 3) * self.base.endpoint_power_difference(3)
    }

    /// Radii of all circles bounding 𝒮, sorted.
    pub fn circles_f64(&self) -> Result<Vec<f64>> {
        Ok(self
            .base
            .endpoints_f64()?
            .into_iter()
            .map(|x| x * self.lambda_f)
            .collect())
    }

    pub fn ring_system(&self) -> Result<RingSystem> {
        let rings = self
            .base
            .gaps()?
            .into_iter()
            .map(|g| Interval {
                lo: &g.lo * &self.lambda,
                hi: &g.hi * &self.lambda,
            })
            .collect();
        Ok(RingSystem {
            rings,
            central: None,
            outer: self.lambda.clone(),
        })
    }
}

/// Open annuli `{lo < |z| < hi}` filling {|z| ≤ λ} minus 𝒮.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSystem {
    pub rings: Vec<Interval>,
    /// Radius of a central disk when 0 is not in the set. The 1/5 schemes
    /// always keep 0, so this stays `None` for them.
    pub central: Option<BigRational>,
    pub outer: BigRational,
}

impl RingSystem {
    pub fn total_width(&self) -> BigRational {
        let mut w = self.central.clone().unwrap_or_else(BigRational::zero);
        for r in &self.rings {
            w += r.length();
        }
        w
    }

    /// True when the rings and the radii of `set` tile [0, λ] with disjoint
    /// interiors, checked in exact arithmetic.
    pub fn tiles(&self, set: &RadialCantorSet) -> Result<bool> {
        let iv = set.base.intervals()?;
        if iv.len() != self.rings.len() + 1 {
            return Ok(false);
        }
        let l = &set.lambda;
        if !(&iv[0].lo * l).is_zero() || iv.last().unwrap().hi.clone() * l != self.outer {
            return Ok(false);
        }
        for (i, ring) in self.rings.iter().enumerate() {
            if &iv[i].hi * l != ring.lo || &iv[i + 1].lo * l != ring.hi || ring.lo >= ring.hi {
                return Ok(false);
            }
        }
        Ok(self.total_width() + &set.base.measure() * l == self.outer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        rat(n, d)
    }

    fn brute_power_diff(s: &IntervalSet, p: u32) -> BigRational {
        s.intervals()
            .unwrap()
            .iter()
            .map(|i| pow_rat(&i.hi, p) - pow_rat(&i.lo, p))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    #[test]
    fn stage_one_is_the_same_for_both_schemes() {
        for scheme in [Scheme::AbsoluteFifth, Scheme::ProportionalFifth] {
            let s = cantor_stage(1, scheme).unwrap();
            let iv = s.intervals().unwrap();
            assert_eq!(iv.len(), 2);
            assert_eq!((iv[0].lo.clone(), iv[0].hi.clone()), (r(0, 1), r(2, 5)));
            assert_eq!((iv[1].lo.clone(), iv[1].hi.clone()), (r(3, 5), r(1, 1)));
            assert_eq!(s.measure(), r(4, 5));
        }
    }

    #[test]
    fn absolute_stage_two() {
        let s = cantor_stage(2, Scheme::AbsoluteFifth).unwrap();
        let ends: Vec<_> = s
            .intervals()
            .unwrap()
            .into_iter()
            .flat_map(|i| [i.lo, i.hi])
            .collect();
        let want = [(0, 1), (9, 50), (11, 50), (2, 5), (3, 5), (39, 50), (41, 50), (1, 1)];
        assert_eq!(ends, want.iter().map(|&(n, d)| r(n, d)).collect::<Vec<_>>());
    }

    #[test]
    fn stage_zero_is_unit_interval() {
        let s = cantor_stage(0, Scheme::AbsoluteFifth).unwrap();
        assert_eq!(s.to_string(), "[0,1]");
        assert!(s.gaps().unwrap().is_empty());
    }

    #[test]
    fn stage_over_budget() {
        assert!(matches!(
            cantor_stage(65, Scheme::AbsoluteFifth),
            Err(Error::Resource(_))
        ));
        let s = cantor_stage(64, Scheme::AbsoluteFifth).unwrap();
        assert!(matches!(s.intervals(), Err(Error::Resource(_))));
        assert!(s.contains_f64(0.0));
    }

    #[test]
    fn power_sums_match_enumeration() {
        for scheme in [Scheme::AbsoluteFifth, Scheme::ProportionalFifth] {
            for k in 0..=9 {
                let s = cantor_stage(k, scheme).unwrap();
                for p in 1..=3 {
                    assert_eq!(s.endpoint_power_difference(p), brute_power_diff(&s, p));
                }
            }
        }
    }

    #[test]
    fn float_and_exact_membership_agree() {
        let s = cantor_stage(6, Scheme::AbsoluteFifth).unwrap();
        let ends: Vec<f64> = s.endpoints_f64().unwrap();
        let mut on_boundary = 0;
        for i in 0..=2000 {
            let x = r(i, 2000);
            let xf = to_f64(&x);
            // float descent may round either way exactly at an endpoint
            if ends.iter().any(|e| (e - xf).abs() < 1e-12) {
                on_boundary += 1;
                assert!(s.contains(&x));
                continue;
            }
            assert_eq!(s.contains(&x), s.contains_f64(xf), "x = {x}");
        }
        assert!(on_boundary >= 2);
    }

    #[test]
    fn parses_exact_decimals() {
        assert_eq!(parse_rational("0.8").unwrap(), r(4, 5));
        assert_eq!(parse_rational("4/5").unwrap(), r(4, 5));
        assert_eq!(parse_rational("-1.5e-1").unwrap(), r(-3, 20));
        assert_eq!(parse_rational("2").unwrap(), r(2, 1));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn lambda_range() {
        let base = cantor_stage(1, Scheme::AbsoluteFifth).unwrap();
        assert!(RadialCantorSet::new(base.clone(), r(0, 1)).is_err());
        assert!(RadialCantorSet::new(base.clone(), r(3, 2)).is_err());
        assert!(RadialCantorSet::new(base, r(1, 1)).is_ok());
    }
}
