//! General-solution bases, the displacement-form boundary operators and
//! null-space extraction of the eigenfunctions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eigensolver::EigenKind;
use crate::error::{NotchError, Result};
use crate::model::{MaterialParams, Mode, WedgeCase};
use crate::series::PolarSeries;

/// Relative singular-value threshold used by [`eigenfield`].
pub const NULL_TOL: f64 = 1e-8;
/// `|p - 7 + 8 nu|` below which the third plane member is rescaled.
pub const POLE_TOL: f64 = 1e-6;
/// Relative threshold for amplitude combinations that assemble to zero.
const FIELD_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DisplacementField {
    Plane { u_r: PolarSeries, u_t: PolarSeries },
    Anti { w: PolarSeries },
}

impl DisplacementField {
    pub fn zero(mode: Mode) -> Self {
        if mode.is_plane() {
            DisplacementField::Plane { u_r: PolarSeries::zero(), u_t: PolarSeries::zero() }
        } else {
            DisplacementField::Anti { w: PolarSeries::zero() }
        }
    }

    pub fn components(&self) -> Vec<&PolarSeries> {
        match self {
            DisplacementField::Plane { u_r, u_t } => vec![u_r, u_t],
            DisplacementField::Anti { w } => vec![w],
        }
    }

    pub fn is_plane(&self) -> bool {
        matches!(self, DisplacementField::Plane { .. })
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|s| s.is_empty())
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|s| s.scale(k))
    }

    pub fn map<F: Fn(&PolarSeries) -> PolarSeries>(&self, f: F) -> Self {
        match self {
            DisplacementField::Plane { u_r, u_t } => DisplacementField::Plane { u_r: f(u_r), u_t: f(u_t) },
            DisplacementField::Anti { w } => DisplacementField::Anti { w: f(w) },
        }
    }

    /// Component-wise sum. Panics if the kinds differ.
    pub fn plus(&self, other: &DisplacementField) -> Self {
        match (self, other) {
            (DisplacementField::Plane { u_r, u_t }, DisplacementField::Plane { u_r: a, u_t: b }) => {
                DisplacementField::Plane { u_r: u_r + a, u_t: u_t + b }
            }
            (DisplacementField::Anti { w }, DisplacementField::Anti { w: v }) => DisplacementField::Anti { w: w + v },
            _ => panic!("cannot add plane and anti-plane displacement fields"),
        }
    }

    /// Linear combination `Σ c_k f_k`.
    pub fn combine(mode: Mode, coeffs: &[f64], fields: &[DisplacementField]) -> Self {
        coeffs.iter().zip(fields).fold(DisplacementField::zero(mode), |acc, (c, f)| acc.plus(&f.scale(*c)))
    }

    pub fn eval(&self, r: f64, theta: f64) -> Vec<f64> {
        self.components().iter().map(|s| s.eval(r, theta)).collect()
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.components().iter().fold(0.0, |m, s| m.max(s.max_abs_coef()))
    }

    pub fn homogeneous_degree(&self) -> Option<f64> {
        let degs: Vec<f64> = self.components().iter().filter_map(|s| s.homogeneous_degree()).collect();
        let first = *degs.first()?;
        degs.iter().all(|d| (d - first).abs() < 1e-12).then_some(first)
    }
}

pub fn member_names(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::PlaneSym => &["A1", "A2", "A3", "A4"],
        Mode::PlaneAnti => &["B1", "B2", "B3", "B4"],
        Mode::AntiplaneOdd => &["D1", "D2"],
    }
}

/// `(p + 5 - 8 nu) / (p - 7 + 8 nu)` split into numerator and denominator.
fn k_parts(p: f64, nu: f64) -> (f64, f64) {
    (p + 5.0 - 8.0 * nu, p - 7.0 + 8.0 * nu)
}

/// Literal general-solution members.
fn raw_members(mode: Mode, p: f64, nu: f64) -> Vec<DisplacementField> {
    let (num, den) = k_parts(p, nu);
    let plane = |ur: PolarSeries, ut: PolarSeries| DisplacementField::Plane { u_r: ur, u_t: ut };
    let z = PolarSeries::zero;
    let c = |k: f64, f: f64| PolarSeries::cos(k, p, f);
    let s = |k: f64, f: f64| PolarSeries::sin(k, p, f);
    match mode {
        Mode::PlaneSym => vec![
            plane(c(1.0, p - 1.0), z()),
            plane(c(1.0, p + 1.0), s(-1.0, p + 1.0)),
            plane(c(1.0, p - 3.0), s(-num / den, p - 3.0)),
            plane(z(), s(1.0, p - 1.0)),
        ],
        Mode::PlaneAnti => vec![
            plane(s(1.0, p - 1.0), z()),
            plane(s(1.0, p + 1.0), c(1.0, p + 1.0)),
            plane(s(1.0, p - 3.0), c(num / den, p - 3.0)),
            plane(z(), c(1.0, p - 1.0)),
        ],
        Mode::AntiplaneOdd => {
            vec![DisplacementField::Anti { w: s(1.0, p) }, DisplacementField::Anti { w: s(1.0, p - 2.0) }]
        }
    }
}

/// Column scale applied to the third plane member near the pole of `k`.
fn pole_scale(mode: Mode, p: f64, nu: f64) -> f64 {
    let (_, den) = k_parts(p, nu);
    if mode.is_plane() && den.abs() < POLE_TOL {
        den
    } else {
        1.0
    }
}

/// Finite basis: the literal members, except that near `p = 7 - 8 nu` the
/// third plane member is multiplied by `p - 7 + 8 nu`. Returns the members
/// and the per-member scale factors.
fn scaled_members(mode: Mode, p: f64, nu: f64) -> (Vec<DisplacementField>, Vec<f64>) {
    let s3 = pole_scale(mode, p, nu);
    let members = if s3 == 1.0 {
        raw_members(mode, p, nu)
    } else {
        let (num, den) = k_parts(p, nu);
        let mut m = raw_members(mode, p, nu);
        let c = |k: f64, f: f64| PolarSeries::cos(k, p, f);
        let s = |k: f64, f: f64| PolarSeries::sin(k, p, f);
        m[2] = match mode {
            Mode::PlaneSym => DisplacementField::Plane { u_r: c(den, p - 3.0), u_t: s(-num, p - 3.0) },
            _ => DisplacementField::Plane { u_r: s(den, p - 3.0), u_t: c(num, p - 3.0) },
        };
        m
    };
    let mut scales = vec![1.0; mode.basis_len()];
    if mode.is_plane() {
        scales[2] = s3;
    }
    (members, scales)
}

/// General-solution members for exponent `p` (A1..A4, B1..B4 or D1, D2).
pub fn basis_fields(case: &WedgeCase, p: f64, nu: f64) -> Result<Vec<DisplacementField>> {
    let mode = case.mode;
    let (_, den) = k_parts(p, nu);
    if mode.is_plane() && den == 0.0 {
        return Err(NotchError::Unsupported(format!("third basis member has a pole at p = {p} (p = 7 - 8 nu)")));
    }
    let members = raw_members(mode, p, nu);
    if let Some(i) = members.iter().position(|m| m.is_zero()) {
        return Err(NotchError::DegenerateBasis { member: member_names(mode)[i], p });
    }
    Ok(members)
}

fn rk_dr(s: &PolarSeries, k: u32) -> PolarSeries {
    let mut d = s.clone();
    for _ in 0..k {
        d = d.d_dr();
    }
    d.mul_r_pow(k as f64)
}

fn dth(s: &PolarSeries, k: u32) -> PolarSeries {
    let mut d = s.clone();
    for _ in 0..k {
        d = d.d_dtheta();
    }
    d
}

/// Left-hand sides of the traction-free conditions written in terms of
/// displacements, most singular order only. Plane: `[t_θr, t_θθ, m_θθr,
/// m_θθθ]` up to constant factors; anti-plane: `[t_θz, m_θθz]`.
pub fn apply_bc_operators(field: &DisplacementField, nu: f64) -> Vec<PolarSeries> {
    match field {
        DisplacementField::Plane { u_r: u, u_t: v } => {
            let t_tr = (3.0 - 4.0 * nu) * -&dth(&rk_dr(u, 2), 1)
                + (3.0 - 2.0 * nu) * &dth(u, 1)
                + (5.0 - 6.0 * nu) * &dth(v, 2)
                - dth(&rk_dr(v, 1), 2)
                + (1.0 - 2.0 * nu)
                    * (-rk_dr(v, 3) + 2.0 * rk_dr(v, 2) + dth(&rk_dr(u, 1), 1) - rk_dr(v, 1) - dth(u, 3) + v.clone());
            let t_tt = (3.0 - 4.0 * nu) * &dth(&rk_dr(v, 2), 1)
                + 2.0 * (2.0 - 3.0 * nu) * &dth(u, 2)
                + 2.0 * nu * &rk_dr(u, 3)
                + 2.0 * nu * &dth(v, 1)
                + dth(&rk_dr(u, 1), 2)
                + (1.0 - nu)
                    * (4.0 * rk_dr(u, 2) + 2.0 * dth(v, 3) - 2.0 * dth(&rk_dr(v, 1), 1) - 2.0 * rk_dr(u, 1)
                        + 2.0 * u.clone());
            let two_u_vt = 2.0 * u.clone() + dth(v, 1);
            let m_ttr = two_u_vt.div_r().d_dr() + dth(&(dth(u, 1) - 2.0 * v.clone()), 1).mul_r_pow(-2.0);
            let m_ttt = (1.0 - nu) * (v.div_r().d_dr() + dth(&two_u_vt, 1).mul_r_pow(-2.0))
                + nu * (dth(u, 1) - v.clone()).div_r().d_dr();
            vec![t_tr, t_tt, m_ttr, m_ttt]
        }
        DisplacementField::Anti { w } => {
            let t_tz = 2.0 * dth(&rk_dr(w, 2), 1) + 2.0 * dth(w, 1) + dth(w, 3) - dth(&rk_dr(w, 1), 1);
            let m_ttz = rk_dr(w, 1) + dth(w, 2);
            vec![t_tz, m_ttz]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BCMatrix {
    pub entries: DMatrix<f64>,
    pub mode: Mode,
    pub p: f64,
    pub a: f64,
    pub nu: f64,
    /// Factor each basis column was multiplied by (1 except near the pole).
    pub col_scales: Vec<f64>,
    /// Size of the operator series independent of where they are
    /// evaluated; floors `σ_max` so an all-small matrix is not "regular".
    pub scale: f64,
}

impl BCMatrix {
    /// Singular values, largest first.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.entries.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// `σ_min / σ_max`.
    pub fn sigma_ratio(&self) -> f64 {
        let s = self.entries.singular_values();
        let max = s.max().max(self.scale);
        if max == 0.0 {
            0.0
        } else {
            s.min() / max
        }
    }

    pub fn det(&self) -> f64 {
        self.entries.determinant()
    }
}

/// BC matrix of the members and the largest column coefficient norm.
fn matrix_of(members: &[DisplacementField], a: f64, nu: f64) -> (DMatrix<f64>, f64) {
    let mut scale = 0.0_f64;
    let cols: Vec<Vec<f64>> = members
        .iter()
        .map(|m| {
            let ops = apply_bc_operators(m, nu);
            let norm = ops.iter().map(|s| s.max_abs_coef().powi(2)).sum::<f64>().sqrt();
            scale = scale.max(norm);
            ops.iter().map(|s| s.eval(1.0, a)).collect()
        })
        .collect();
    let rows = cols.first().map_or(0, |c| c.len());
    (DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i]), scale)
}

/// BC operators applied to each basis member at `θ = +a`, `r = 1`.
pub fn bc_matrix(case: &WedgeCase, p: f64, nu: f64) -> Result<BCMatrix> {
    basis_fields(case, p, nu).or_else(|e| match e {
        NotchError::Unsupported(_) => Ok(Vec::new()),
        other => Err(other),
    })?;
    let (members, col_scales) = scaled_members(case.mode, p, nu);
    let (entries, scale) = matrix_of(&members, case.half_angle, nu);
    Ok(BCMatrix { entries, scale, mode: case.mode, p, a: case.half_angle, nu, col_scales })
}

/// Flips the sign so that the first entry of largest magnitude is positive,
/// after scaling to unit norm.
pub fn normalize_amplitudes(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    let big = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let lead = v.iter().find(|x| x.abs() >= big * (1.0 - 1e-12)).copied().unwrap_or(1.0);
    let k = lead.signum() / norm;
    v.iter_mut().for_each(|x| *x *= k);
}

/// Right singular vectors with `σ < tol σ_max`, plus `σ_min / σ_max`.
/// `floor` is a lower bound for `σ_max`.
fn null_vectors(m: &DMatrix<f64>, tol: f64, floor: f64) -> (Vec<DVector<f64>>, f64) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.max().max(floor);
    let n = m.ncols();
    let mut out = Vec::new();
    let mut min_ratio = f64::INFINITY;
    // wide matrices have implicit zero singular values
    let rank_slots = svd.singular_values.len();
    for i in 0..n {
        let sigma = if i < rank_slots { svd.singular_values[i] } else { 0.0 };
        let ratio = if max > 0.0 { sigma / max } else { 0.0 };
        min_ratio = min_ratio.min(ratio);
        if ratio < tol && i < v_t.nrows() {
            out.push(v_t.row(i).transpose());
        }
    }
    if rank_slots < n {
        // complete the basis of the kernel for wide matrices
        let full = m.transpose() * m;
        let eig = full.symmetric_eigen();
        out.clear();
        for (i, val) in eig.eigenvalues.iter().enumerate() {
            if val.abs().sqrt() < tol * max.max(f64::MIN_POSITIVE) {
                out.push(eig.eigenvectors.column(i).into_owned());
            }
        }
    }
    (out, min_ratio)
}

/// Null space of the BC matrix, mapped back to the literal basis
/// amplitudes and normalized (unit norm, leading entry positive).
pub fn null_space(m: &BCMatrix, tol: f64) -> Result<Vec<Vec<f64>>> {
    let (vecs, ratio) = null_vectors(&m.entries, tol, m.scale);
    if vecs.is_empty() {
        return Err(NotchError::EmptyNullSpace { tol, smallest: ratio });
    }
    Ok(vecs
        .into_iter()
        .map(|y| {
            let mut x: Vec<f64> = y.iter().zip(&m.col_scales).map(|(v, s)| v * s).collect();
            normalize_amplitudes(&mut x);
            x
        })
        .collect())
}

/// Orthonormal basis of amplitude combinations whose assembled field is
/// not identically zero. Equal to the identity unless members coincide
/// or vanish (e.g. `p = 2`).
fn field_quotient(members: &[DisplacementField], a: f64) -> DMatrix<f64> {
    const SAMPLES: usize = 12;
    let n = members.len();
    let comps = members[0].components().len();
    let rows = SAMPLES * comps * 2;
    let f = DMatrix::from_fn(rows, n, |i, j| {
        let k = i / (comps * 2);
        let c = i % comps;
        let r = if (i / comps).is_multiple_of(2) { 1.0 } else { 1.7 };
        let th = -a + 2.0 * a * (k as f64 + 0.5) / SAMPLES as f64;
        members[j].components()[c].eval(r, th)
    });
    let svd = f.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.max();
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > FIELD_RANK_TOL * max).collect();
    if keep.len() == n {
        return DMatrix::identity(n, n);
    }
    DMatrix::from_fn(n, keep.len(), |i, j| v_t[(keep[j], i)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub case: WedgeCase,
    pub material: MaterialParams,
    pub p: f64,
    pub kind: EigenKind,
    pub nullity: usize,
    /// One unit vector per independent eigenfunction, in member order.
    pub amplitudes: Vec<Vec<f64>>,
    /// Assembled eigenfunction for each amplitude vector.
    pub fields: Vec<DisplacementField>,
    /// `σ_min / σ_max` of the (reduced) BC matrix.
    pub sigma_ratio: f64,
    /// Constants of the `p = 1` part (C1, C3 / C2 / E) when attached.
    pub p1_constants: Option<Vec<f64>>,
}

impl EigenSolution {
    pub fn includes_p1_part(&self) -> bool {
        self.p1_constants.is_some()
    }

    pub fn with_p1(mut self, constants: Vec<f64>) -> Result<Self> {
        let want = self.case.mode.p1_len();
        if constants.len() != want {
            return Err(NotchError::AmplitudeCount { expected: want, got: constants.len() });
        }
        self.p1_constants = Some(constants);
        Ok(self)
    }

    pub fn eigenpart(&self, index: usize) -> Result<&DisplacementField> {
        self.fields.get(index).ok_or(NotchError::IndexOutOfRange { index, len: self.fields.len() })
    }

    fn p1_part(&self) -> Result<Option<DisplacementField>> {
        self.p1_constants.as_ref().map(|c| special_p1_field(self.case.mode, c)).transpose()
    }

    /// Eigenfunction `index` plus the attached `p = 1` part, if any.
    pub fn field(&self, index: usize) -> Result<DisplacementField> {
        let base = self.eigenpart(index)?.clone();
        Ok(match self.p1_part()? {
            Some(p1) => base.plus(&p1),
            None => base,
        })
    }

    /// `Σ coeffs_k · eigenfunction_k` plus the `p = 1` part, if any.
    pub fn combination(&self, coeffs: &[f64]) -> Result<DisplacementField> {
        if coeffs.len() != self.nullity {
            return Err(NotchError::AmplitudeCount { expected: self.nullity, got: coeffs.len() });
        }
        let base = DisplacementField::combine(self.case.mode, coeffs, &self.fields);
        Ok(match self.p1_part()? {
            Some(p1) => base.plus(&p1),
            None => base,
        })
    }
}

/// Eigenfunctions at `p` with the default null-space tolerance.
pub fn eigenfield(case: &WedgeCase, material: &MaterialParams, p: f64) -> Result<EigenSolution> {
    eigenfield_with_tol(case, material, p, NULL_TOL)
}

/// Eigenfunctions at `p`. At `p = 1` this is the constant-strain solution;
/// otherwise the null space is taken on the BC matrix restricted to
/// amplitude combinations with a nonzero field.
pub fn eigenfield_with_tol(case: &WedgeCase, material: &MaterialParams, p: f64, tol: f64) -> Result<EigenSolution> {
    material.validate()?;
    case.validate()?;
    let mode = case.mode;
    if p == 1.0 {
        let n = mode.p1_len();
        let amplitudes: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        return Ok(EigenSolution {
            case: *case,
            material: *material,
            p,
            kind: EigenKind::SpecialP1,
            nullity: n,
            fields: special_p1_members(mode),
            amplitudes,
            sigma_ratio: 0.0,
            p1_constants: None,
        });
    }
    let nu = material.nu;
    let (members, scales) = scaled_members(mode, p, nu);
    let q = field_quotient(&members, case.half_angle);
    let (m, scale) = matrix_of(&members, case.half_angle, nu);
    let (ys, ratio) = null_vectors(&(m * &q), tol, scale);
    if ys.is_empty() {
        return Err(NotchError::EmptyNullSpace { tol, smallest: ratio });
    }
    let mut amplitudes = Vec::new();
    let mut fields = Vec::new();
    for y in ys {
        let x = &q * y;
        let mut amps: Vec<f64> = x.iter().zip(&scales).map(|(v, s)| v * s).collect();
        let raw: Vec<f64> = amps.clone();
        normalize_amplitudes(&mut amps);
        // same normalization factor applied to the scaled-basis coefficients
        let idx = raw.iter().position(|v| *v != 0.0).unwrap_or(0);
        let k = if raw[idx] != 0.0 { amps[idx] / raw[idx] } else { 1.0 };
        let coeffs: Vec<f64> = x.iter().map(|v| v * k).collect();
        fields.push(DisplacementField::combine(mode, &coeffs, &members));
        amplitudes.push(amps);
    }
    Ok(EigenSolution {
        case: *case,
        material: *material,
        p,
        kind: EigenKind::BracketRoot,
        nullity: amplitudes.len(),
        amplitudes,
        fields,
        sigma_ratio: ratio,
        p1_constants: None,
    })
}

/// Unit members of the `p = 1` solution: `[C1, C3]`, `[C2]` or `[E]`.
pub fn special_p1_members(mode: Mode) -> Vec<DisplacementField> {
    let plane = |ur: PolarSeries, ut: PolarSeries| DisplacementField::Plane { u_r: ur, u_t: ut };
    match mode {
        Mode::PlaneSym => vec![
            plane(PolarSeries::cos(1.0, 1.0, 0.0), PolarSeries::zero()),
            plane(PolarSeries::cos(1.0, 1.0, 2.0), PolarSeries::sin(-1.0, 1.0, 2.0)),
        ],
        Mode::PlaneAnti => vec![plane(PolarSeries::sin(1.0, 1.0, 2.0), PolarSeries::cos(1.0, 1.0, 2.0))],
        Mode::AntiplaneOdd => vec![DisplacementField::Anti { w: PolarSeries::sin(1.0, 1.0, 1.0) }],
    }
}

/// Constant-strain field with the given constants.
pub fn special_p1_field(mode: Mode, constants: &[f64]) -> Result<DisplacementField> {
    if constants.len() != mode.p1_len() {
        return Err(NotchError::AmplitudeCount { expected: mode.p1_len(), got: constants.len() });
    }
    Ok(DisplacementField::combine(mode, constants, &special_p1_members(mode)))
}
