//! Real roots of the bracket functions and the admissible exponent set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::{bracket, bracket_dp};
use crate::error::{NotchError, Result};
use crate::model::{MaterialParams, Mode, WedgeCase};

/// Grid points closer than this to a local minimum count toward its scale.
const SCALE_WINDOW: f64 = 0.1;
/// `|f| / max(1, scale)` below which a touching minimum is an even root.
const EVEN_ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootScanOptions {
    pub p_min: f64,
    pub p_max: f64,
    pub grid_step: f64,
    pub refine_tol: f64,
    pub cluster_merge: f64,
}

impl Default for RootScanOptions {
    fn default() -> Self {
        Self { p_min: 1.0 + 1e-6, p_max: 4.0, grid_step: 1e-3, refine_tol: 1e-12, cluster_merge: 1e-9 }
    }
}

impl RootScanOptions {
    pub fn with_p_max(p_max: f64) -> Self {
        Self { p_max, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_min < self.p_max) {
            return Err(NotchError::OutOfRange { field: "p_max", value: self.p_max, allowed: "p_max > p_min" });
        }
        for (field, value) in
            [("grid_step", self.grid_step), ("refine_tol", self.refine_tol), ("cluster_merge", self.cluster_merge)]
        {
            if !(value > 0.0 && value.is_finite()) {
                return Err(NotchError::OutOfRange { field, value, allowed: "> 0" });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    /// Located from a sign change of the bracket.
    SignChange,
    /// Tangential (even-multiplicity) root located at an extremum.
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoundRoot {
    pub p: f64,
    pub kind: RootKind,
    /// `|bracket(p)|`.
    pub residual: f64,
    /// Largest `|bracket|` on the grid within 0.1 of `p`.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScanWarning {
    /// `|f|` has a strictly positive local minimum with no sign change:
    /// either a near-miss even root or a complex-conjugate pair.
    NoSignChange { p_lo: f64, p_hi: f64, min_abs: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RootScan {
    pub roots: Vec<FoundRoot>,
    pub warnings: Vec<ScanWarning>,
}

impl RootScan {
    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.p).collect()
    }
}

/// Brent's bracketed root finder. Requires `f(a)` and `f(b)` of opposite
/// sign (or one of them zero).
pub fn brent<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    b
}

/// Locates an extremum of `f` in `[lo, hi]` from the sign change of `df`.
fn extremum<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: &F, df: &G, lo: f64, hi: f64, xtol: f64) -> f64 {
    const SUB: usize = 16;
    let xs: Vec<f64> = (0..=SUB).map(|k| lo + (hi - lo) * k as f64 / SUB as f64).collect();
    let gs: Vec<f64> = xs.iter().map(|&x| df(x)).collect();
    let mut best: Option<(f64, f64)> = None;
    for k in 0..SUB {
        if gs[k] == 0.0 || gs[k] * gs[k + 1] < 0.0 {
            let x = brent(df, xs[k], xs[k + 1], xtol);
            let v = f(x).abs();
            if best.is_none_or(|(_, bv)| v < bv) {
                best = Some((x, v));
            }
        }
    }
    best.map(|(x, _)| x)
        .unwrap_or_else(|| xs.iter().copied().min_by(|a, b| f(*a).abs().total_cmp(&f(*b).abs())).unwrap_or(lo))
}

/// All real roots of the mode's bracket function in `(p_min, p_max]`.
pub fn find_roots(case: &WedgeCase, nu: f64, opts: &RootScanOptions) -> Result<RootScan> {
    case.validate()?;
    opts.validate()?;
    let f = |p: f64| bracket(p, case, nu);
    let df = |p: f64| bracket_dp(p, case, nu);

    let h = opts.grid_step;
    let n = ((opts.p_max - opts.p_min) / h).ceil() as usize + 2;
    let ps: Vec<f64> = (0..n).map(|i| opts.p_min + i as f64 * h).collect();
    let fs: Vec<f64> = ps.iter().map(|&p| f(p)).collect();
    let half_window = (SCALE_WINDOW / h).round() as usize;
    let scale_at = |i: usize| {
        let lo = i.saturating_sub(half_window);
        let hi = (i + half_window).min(n - 1);
        fs[lo..=hi].iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    };

    let mut found = Vec::new();
    let mut warnings = Vec::new();
    let mut push = |p: f64, kind: RootKind, scale: f64| {
        found.push(FoundRoot { p, kind, residual: f(p).abs(), scale });
    };

    for i in 0..n - 1 {
        if fs[i] == 0.0 {
            push(ps[i], RootKind::SignChange, scale_at(i));
        } else if fs[i] * fs[i + 1] < 0.0 {
            push(brent(f, ps[i], ps[i + 1], opts.refine_tol), RootKind::SignChange, scale_at(i));
        }
    }

    for i in 1..n - 1 {
        let (l, m, r) = (fs[i - 1], fs[i], fs[i + 1]);
        let same_sign = l * m > 0.0 && m * r > 0.0;
        if !(same_sign && m.abs() < l.abs() && m.abs() <= r.abs()) {
            continue;
        }
        let scale = scale_at(i);
        let e = extremum(&f, &df, ps[i - 1], ps[i + 1], opts.refine_tol);
        let fe = f(e);
        if fe.abs() <= EVEN_ROOT_TOL * scale.max(1.0) {
            push(e, RootKind::Even, scale);
        } else if fe * m < 0.0 {
            push(brent(f, ps[i - 1], e, opts.refine_tol), RootKind::SignChange, scale);
            push(brent(f, e, ps[i + 1], opts.refine_tol), RootKind::SignChange, scale);
        } else {
            warnings.push(ScanWarning::NoSignChange { p_lo: ps[i - 1], p_hi: ps[i + 1], min_abs: fe.abs() });
        }
    }

    found.retain(|r| r.p > opts.p_min && r.p <= opts.p_max + opts.cluster_merge);
    found.sort_by(|a, b| a.p.total_cmp(&b.p));
    let mut roots: Vec<FoundRoot> = Vec::with_capacity(found.len());
    for r in found {
        match roots.last_mut() {
            Some(prev) if r.p - prev.p <= opts.cluster_merge => {
                if r.kind == RootKind::Even && prev.kind != RootKind::Even
                    || r.residual < prev.residual && r.kind == prev.kind
                {
                    *prev = r;
                }
            }
            _ => roots.push(r),
        }
    }
    warnings.retain(|ScanWarning::NoSignChange { p_hi, p_lo, .. }| *p_hi > opts.p_min && *p_lo <= opts.p_max);
    Ok(RootScan { roots, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenKind {
    SpecialP1,
    BracketRoot,
}

/// Candidate exponent with its admissibility verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenStub {
    pub p: f64,
    pub kind: EigenKind,
    pub admissible: bool,
    pub reason: String,
}

/// `p = 1` followed by every bracket root, each labeled by the bounded
/// energy criterion (`p > 1`, or the constant-strain solution at `p = 1`).
pub fn admissible_eigenvalues(case: &WedgeCase, nu: f64, opts: &RootScanOptions) -> Result<Vec<EigenStub>> {
    let scan = find_roots(case, nu, opts)?;
    let mut out = vec![EigenStub {
        p: 1.0,
        kind: EigenKind::SpecialP1,
        admissible: true,
        reason: "constant-strain solution".into(),
    }];
    for r in scan.roots {
        if (r.p - 1.0).abs() <= opts.cluster_merge {
            continue;
        }
        let admissible = r.p > 1.0;
        out.push(EigenStub {
            p: r.p,
            kind: EigenKind::BracketRoot,
            admissible,
            reason: if admissible { "bounded energy" } else { "unbounded energy" }.into(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSummary {
    pub p: f64,
    pub exp_monopolar: f64,
    pub exp_dipolar: f64,
    pub exp_total: f64,
}

impl ExponentSummary {
    pub fn from_p(p: f64) -> Self {
        Self { p, exp_monopolar: p - 1.0, exp_dipolar: p - 2.0, exp_total: p - 3.0 }
    }
}

pub fn smallest_exponents(case: &WedgeCase, nu: f64) -> Result<ExponentSummary> {
    smallest_exponents_with(case, nu, &RootScanOptions::default())
}

pub fn smallest_exponents_with(case: &WedgeCase, nu: f64, opts: &RootScanOptions) -> Result<ExponentSummary> {
    let scan = find_roots(case, nu, opts)?;
    scan.roots
        .iter()
        .find(|r| r.p > 1.0)
        .map(|r| ExponentSummary::from_p(r.p))
        .ok_or(NotchError::NoRootFound { p_min: opts.p_min, p_max: opts.p_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub angle_deg: f64,
    pub nu: f64,
    pub mode: Mode,
    pub p: f64,
    pub exp_monopolar: f64,
    pub exp_total: f64,
}

/// Smallest exponent at each angle, computed in parallel; rows keep the
/// order of `angles_deg`.
pub fn sweep(
    mode: Mode,
    material: &MaterialParams,
    angles_deg: &[f64],
    opts: &RootScanOptions,
) -> Result<Vec<SweepRow>> {
    material.validate()?;
    angles_deg
        .par_iter()
        .map(|&deg| {
            let s = smallest_exponents_with(&WedgeCase::from_degrees(deg, mode), material.nu, opts)?;
            Ok(SweepRow {
                angle_deg: deg,
                nu: material.nu,
                mode,
                p: s.p,
                exp_monopolar: s.exp_monopolar,
                exp_total: s.exp_total,
            })
        })
        .collect()
}

/// `from, from + step, ...` up to and including `to` (within rounding).
pub fn angle_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(to >= from) {
        return Err(NotchError::OutOfRange { field: "step", value: step, allowed: "step > 0 and to >= from" });
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + k as f64 * step).collect())
}
