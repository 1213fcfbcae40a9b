//! Exact finite sums of `coef * r^alpha * {cos|sin}(beta * theta)`.
//!
//! Every field in the crate is carried in this form, so differentiation,
//! products and integrals are exact up to floating-point rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{NotchError, Result};

/// Exponents and frequencies closer than this are treated as equal.
pub const MERGE_TOL: f64 = 1e-12;
/// Terms smaller than this fraction of the largest coefficient are dropped.
pub const PRUNE_REL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Trig {
    Cos,
    Sin,
}

impl Trig {
    fn eval(self, x: f64) -> f64 {
        match self {
            Trig::Cos => x.cos(),
            Trig::Sin => x.sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub r_exp: f64,
    pub freq: f64,
    pub kind: Trig,
}

impl Term {
    pub fn new(coef: f64, r_exp: f64, freq: f64, kind: Trig) -> Self {
        Self { coef, r_exp, freq, kind }
    }

    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        self.coef * r.powf(self.r_exp) * self.kind.eval(self.freq * theta)
    }

    /// `∫_lo^hi trig(beta θ) dθ` without cancellation for small `beta`.
    fn angular_integral(&self, lo: f64, hi: f64) -> f64 {
        let b = self.freq;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        // sin(b*half)/b, continuous at b = 0
        let s = if b == 0.0 { half } else { (b * half).sin() / b };
        match self.kind {
            Trig::Cos => 2.0 * (b * mid).cos() * s,
            Trig::Sin => 2.0 * (b * mid).sin() * s,
        }
    }

    fn matches(&self, other: &Term) -> bool {
        self.kind == other.kind
            && (self.r_exp - other.r_exp).abs() <= MERGE_TOL
            && (self.freq - other.freq).abs() <= MERGE_TOL
    }

    fn sort_key(&self, other: &Term) -> Ordering {
        self.kind.cmp(&other.kind).then(self.r_exp.total_cmp(&other.r_exp)).then(self.freq.total_cmp(&other.freq))
    }
}

/// Canonical sum of polar terms. Construction always canonicalizes, so two
/// series built from the same terms compare equal term-for-term.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolarSeries {
    terms: Vec<Term>,
}

impl PolarSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = Term>>(terms: I) -> Self {
        Self { terms: canonicalize(terms) }
    }

    pub fn cos(coef: f64, r_exp: f64, freq: f64) -> Self {
        Self::from_terms([Term::new(coef, r_exp, freq, Trig::Cos)])
    }

    pub fn sin(coef: f64, r_exp: f64, freq: f64) -> Self {
        Self::from_terms([Term::new(coef, r_exp, freq, Trig::Sin)])
    }

    pub fn constant(c: f64) -> Self {
        Self::cos(c, 0.0, 0.0)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Re-runs canonicalization. A no-op on any constructed series.
    pub fn canonical(&self) -> Self {
        Self::from_terms(self.terms.iter().copied())
    }

    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(r, theta)).sum()
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.coef.abs()))
    }

    /// Common r-exponent if every term shares it.
    pub fn homogeneous_degree(&self) -> Option<f64> {
        let first = self.terms.first()?.r_exp;
        self.terms.iter().all(|t| (t.r_exp - first).abs() <= MERGE_TOL).then_some(first)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| Term { coef: k * t.coef, ..*t }))
    }

    pub fn d_dr(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|t| Term { coef: t.coef * t.r_exp, r_exp: t.r_exp - 1.0, ..*t }))
    }

    pub fn d_dtheta(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|t| match t.kind {
            Trig::Cos => Term { coef: -t.coef * t.freq, kind: Trig::Sin, ..*t },
            Trig::Sin => Term { coef: t.coef * t.freq, kind: Trig::Cos, ..*t },
        }))
    }

    /// Multiplies by `r^k`.
    pub fn mul_r_pow(&self, k: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|t| Term { r_exp: t.r_exp + k, ..*t }))
    }

    pub fn div_r(&self) -> Self {
        self.mul_r_pow(-1.0)
    }

    /// Exact product via the trig product-to-sum identities.
    pub fn product(&self, other: &PolarSeries) -> Self {
        let mut out = Vec::with_capacity(2 * self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let c = 0.5 * a.coef * b.coef;
                let e = a.r_exp + b.r_exp;
                let (dif, sum) = (a.freq - b.freq, a.freq + b.freq);
                let pair = match (a.kind, b.kind) {
                    (Trig::Cos, Trig::Cos) => [(c, dif, Trig::Cos), (c, sum, Trig::Cos)],
                    (Trig::Sin, Trig::Sin) => [(c, dif, Trig::Cos), (-c, sum, Trig::Cos)],
                    (Trig::Sin, Trig::Cos) => [(c, sum, Trig::Sin), (c, dif, Trig::Sin)],
                    (Trig::Cos, Trig::Sin) => [(c, sum, Trig::Sin), (-c, dif, Trig::Sin)],
                };
                out.extend(pair.iter().map(|&(k, f, kind)| Term::new(k, e, f, kind)));
            }
        }
        Self::from_terms(out)
    }

    pub fn square(&self) -> Self {
        self.product(self)
    }

    /// Exact `∫_lo^hi s(r, θ) dθ` at fixed `r`.
    pub fn integrate_theta(&self, r: f64, lo: f64, hi: f64) -> f64 {
        self.terms.iter().map(|t| t.coef * r.powf(t.r_exp) * t.angular_integral(lo, hi)).sum()
    }

    /// Exact `∫_lo^hi ∫_0^r0 s(r, θ) r dr dθ` (area integral over a sector).
    ///
    /// Fails with [`NotchError::DivergentEnergy`] when a term has
    /// `r_exp <= -2`, because the radial integral is then unbounded at 0.
    pub fn integrate_sector(&self, r0: f64, lo: f64, hi: f64) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            let k = t.r_exp + 2.0;
            if k <= MERGE_TOL {
                return Err(NotchError::DivergentEnergy { exponent: t.r_exp });
            }
            acc += t.coef * r0.powf(k) / k * t.angular_integral(lo, hi);
        }
        Ok(acc)
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_coef_diff(&self, other: &PolarSeries) -> f64 {
        let diff = raw_sum(self.terms.iter().copied().chain(other.terms.iter().map(|t| Term { coef: -t.coef, ..*t })));
        diff.iter().fold(0.0, |m, t| m.max(t.coef.abs()))
    }
}

/// Merge and sort without the relative pruning step.
fn raw_sum<I: IntoIterator<Item = Term>>(terms: I) -> Vec<Term> {
    let mut groups: Vec<Term> = Vec::new();
    for mut t in terms {
        if t.freq.abs() <= MERGE_TOL {
            if t.kind == Trig::Sin {
                continue;
            }
            t.freq = 0.0;
        } else if t.freq < 0.0 {
            t.freq = -t.freq;
            if t.kind == Trig::Sin {
                t.coef = -t.coef;
            }
        }
        match groups.iter_mut().find(|g| g.matches(&t)) {
            Some(g) => g.coef += t.coef,
            None => groups.push(t),
        }
    }
    groups.sort_by(|a, b| a.sort_key(b));
    groups
}

fn canonicalize<I: IntoIterator<Item = Term>>(terms: I) -> Vec<Term> {
    let mut groups = raw_sum(terms);
    let max = groups.iter().fold(0.0_f64, |m, t| m.max(t.coef.abs()));
    let cut = PRUNE_REL * max;
    groups.retain(|t| t.coef != 0.0 && !(t.coef.abs() <= cut));
    groups
}

impl fmt::Display for PolarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let sign = if t.coef < 0.0 {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            if i > 0 {
                f.write_str(" ")?;
            }
            let trig = match t.kind {
                Trig::Cos => "cos",
                Trig::Sin => "sin",
            };
            write!(f, "{sign}{}*r^{}*{trig}({}θ)", t.coef.abs(), t.r_exp, t.freq)?;
        }
        Ok(())
    }
}

impl Add for &PolarSeries {
    type Output = PolarSeries;
    fn add(self, rhs: &PolarSeries) -> PolarSeries {
        PolarSeries::from_terms(self.terms.iter().chain(rhs.terms.iter()).copied())
    }
}

impl Add for PolarSeries {
    type Output = PolarSeries;
    fn add(self, rhs: PolarSeries) -> PolarSeries {
        &self + &rhs
    }
}

impl Add<&PolarSeries> for PolarSeries {
    type Output = PolarSeries;
    fn add(self, rhs: &PolarSeries) -> PolarSeries {
        &self + rhs
    }
}

impl Sub<&PolarSeries> for PolarSeries {
    type Output = PolarSeries;
    fn sub(self, rhs: &PolarSeries) -> PolarSeries {
        &self - rhs
    }
}

impl AddAssign<&PolarSeries> for PolarSeries {
    fn add_assign(&mut self, rhs: &PolarSeries) {
        *self = &*self + rhs;
    }
}

impl Sub for &PolarSeries {
    type Output = PolarSeries;
    fn sub(self, rhs: &PolarSeries) -> PolarSeries {
        self + &(-rhs)
    }
}

impl Sub for PolarSeries {
    type Output = PolarSeries;
    fn sub(self, rhs: PolarSeries) -> PolarSeries {
        &self - &rhs
    }
}

impl Neg for &PolarSeries {
    type Output = PolarSeries;
    fn neg(self) -> PolarSeries {
        self.scale(-1.0)
    }
}

impl Neg for PolarSeries {
    type Output = PolarSeries;
    fn neg(self) -> PolarSeries {
        -&self
    }
}

impl Mul<&PolarSeries> for f64 {
    type Output = PolarSeries;
    fn mul(self, rhs: &PolarSeries) -> PolarSeries {
        rhs.scale(self)
    }
}

impl Mul<PolarSeries> for f64 {
    type Output = PolarSeries;
    fn mul(self, rhs: PolarSeries) -> PolarSeries {
        rhs.scale(self)
    }
}

impl std::iter::Sum for PolarSeries {
    fn sum<I: Iterator<Item = PolarSeries>>(iter: I) -> Self {
        PolarSeries::from_terms(iter.flat_map(|s| s.terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn negative_frequency_is_folded() {
        let s = PolarSeries::sin(2.0, 1.0, -0.5) + PolarSeries::cos(3.0, 1.0, -0.5);
        assert!(s.terms().iter().all(|t| t.freq > 0.0));
        assert!(close(s.eval(1.3, 0.7), -2.0 * 1.3 * (0.35f64).sin() + 3.0 * 1.3 * (0.35f64).cos(), 1e-15));
    }

    #[test]
    fn sine_of_zero_frequency_vanishes() {
        assert!(PolarSeries::sin(5.0, 2.0, 0.0).is_empty());
    }

    #[test]
    fn near_equal_exponents_merge() {
        let s = PolarSeries::cos(1.0, 0.5, 1.0) + PolarSeries::cos(1.0, 0.5 + 1e-14, 1.0 - 1e-14);
        assert_eq!(s.len(), 1);
        assert_eq!(s.terms()[0].coef, 2.0);
    }

    #[test]
    fn cancellation_yields_empty() {
        let s = PolarSeries::cos(1.0, 1.5, 0.5);
        assert!((&s - &s).is_empty());
    }

    #[test]
    fn tiny_relative_terms_pruned() {
        let s = PolarSeries::cos(1.0, 0.0, 1.0) + PolarSeries::cos(1e-16, 1.0, 1.0);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn derivative_of_power() {
        let s = PolarSeries::cos(2.0, 1.5, 0.5).d_dr();
        assert_eq!(s.terms()[0], Term::new(3.0, 0.5, 0.5, Trig::Cos));
        assert!(PolarSeries::constant(4.0).d_dr().is_empty());
    }

    #[test]
    fn theta_derivative_swaps_kind() {
        let s = PolarSeries::cos(2.0, 1.0, 3.0).d_dtheta();
        assert_eq!(s.terms()[0], Term::new(-6.0, 1.0, 3.0, Trig::Sin));
        let s = PolarSeries::sin(2.0, 1.0, 3.0).d_dtheta();
        assert_eq!(s.terms()[0], Term::new(6.0, 1.0, 3.0, Trig::Cos));
    }

    #[test]
    fn sector_integral_of_constant_is_area() {
        let a = 2.0;
        let u = PolarSeries::constant(1.0).integrate_sector(3.0, -a, a).unwrap();
        assert!(close(u, 2.0 * a * 4.5, 1e-15));
    }

    #[test]
    fn divergent_sector_integral_detected() {
        let err = PolarSeries::cos(1.0, -2.0, 1.0).integrate_sector(1.0, -PI, PI).unwrap_err();
        assert_eq!(err, NotchError::DivergentEnergy { exponent: -2.0 });
    }

    #[test]
    fn small_frequency_integral_is_stable() {
        let s = PolarSeries::cos(1.0, 0.0, 1e-11);
        assert!(close(s.integrate_theta(1.0, -1.0, 1.0), 2.0, 1e-15));
    }

    #[test]
    fn homogeneity_detection() {
        let s = PolarSeries::cos(1.0, 0.5, 1.0) + PolarSeries::sin(1.0, 0.5, 2.0);
        assert_eq!(s.homogeneous_degree(), Some(0.5));
        let s = &s + &PolarSeries::constant(1.0);
        assert_eq!(s.homogeneous_degree(), None);
        assert_eq!(PolarSeries::zero().homogeneous_degree(), None);
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        (
            -5.0..5.0f64,
            prop::sample::select(vec![-1.5, -0.5, 0.0, 0.5, 1.0, 1.37, 2.0]),
            prop::sample::select(vec![-3.5, -1.0, 0.0, 0.5, 1.0, 2.37, 4.0]),
            prop::bool::ANY,
        )
            .prop_map(|(c, e, f, s)| Term::new(c, e, f, if s { Trig::Sin } else { Trig::Cos }))
    }

    fn arb_series() -> impl Strategy<Value = PolarSeries> {
        prop::collection::vec(arb_term(), 0..8).prop_map(PolarSeries::from_terms)
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(s in arb_series()) {
            prop_assert_eq!(s.canonical(), s);
        }

        #[test]
        fn radial_derivative_matches_central_difference(s in arb_series(), r in 0.3..3.0f64, th in -3.0..3.0f64) {
            let h = 1e-5 * r;
            let fd = (s.eval(r + h, th) - s.eval(r - h, th)) / (2.0 * h);
            let scale = s.max_abs_coef() * r.powf(-2.5).max(r.powf(2.0)).max(1.0);
            prop_assert!((s.d_dr().eval(r, th) - fd).abs() <= 1e-6 * (1.0 + scale));
        }

        #[test]
        fn angular_derivative_matches_central_difference(s in arb_series(), r in 0.3..3.0f64, th in -3.0..3.0f64) {
            let h = 1e-5;
            let fd = (s.eval(r, th + h) - s.eval(r, th - h)) / (2.0 * h);
            let scale = s.max_abs_coef() * r.powf(-1.5).max(r.powf(2.0)).max(1.0);
            prop_assert!((s.d_dtheta().eval(r, th) - fd).abs() <= 1e-6 * (1.0 + scale));
        }

        #[test]
        fn product_evaluates_pointwise(a in arb_series(), b in arb_series(), r in 0.3..3.0f64, th in -3.0..3.0f64) {
            let lhs = a.product(&b).eval(r, th);
            let rhs = a.eval(r, th) * b.eval(r, th);
            let mag = |s: &PolarSeries| s.terms().iter().map(|t| t.coef.abs() * r.powf(t.r_exp)).sum::<f64>();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + mag(&a) * mag(&b)));
        }

        #[test]
        fn addition_is_linear(a in arb_series(), b in arb_series(), k in -3.0..3.0f64, r in 0.3..3.0f64, th in -3.0..3.0f64) {
            let lhs = (&a + &b.scale(k)).eval(r, th);
            let rhs = a.eval(r, th) + k * b.eval(r, th);
            let scale = (a.max_abs_coef() + k.abs() * b.max_abs_coef()) * r.powf(-1.5).max(r.powf(2.0));
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + scale));
        }

        #[test]
        fn theta_integral_matches_trapezoid(s in arb_series(), r in 0.5..2.0f64) {
            let (lo, hi) = (-2.5, 2.5);
            let n = 20000;
            let h = (hi - lo) / n as f64;
            let mut acc = 0.5 * (s.eval(r, lo) + s.eval(r, hi));
            for i in 1..n {
                acc += s.eval(r, lo + i as f64 * h);
            }
            acc *= h;
            let scale = s.max_abs_coef() * r.powf(-1.5).max(r.powf(2.0));
            prop_assert!((s.integrate_theta(r, lo, hi) - acc).abs() <= 1e-5 * (1.0 + scale));
        }
    }
}
