//! Physical fields of a displacement field: strains, monopolar, dipolar and
//! total stresses, and the strain-energy density, all carried as exact
//! [`PolarSeries`].
//!
//! Total stresses hold only their dominant (dipolar) part; the monopolar
//! contribution `τ` is lower order by two powers of `r` and is left out.
//!
//! Two independent constructions live here as well: the closed-form
//! general-exponent expressions ([`closed_form_fields`]) and the crack-tip
//! forms for modes I, II and III ([`crack_reference_fields`]).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{DisplacementField, EigenSolution};
use crate::error::{NotchError, Result};
use crate::model::{MaterialParams, Mode, PolarPoint};
use crate::series::PolarSeries;

pub const PLANE_COLUMNS: [&str; 20] = [
    "u_r", "u_t", "eps_rr", "eps_tt", "eps_rt", "tau_rr", "tau_tt", "tau_rt", "tau_zz", "m_rrr", "m_rrt", "m_rtt",
    "m_trr", "m_ttr", "m_ttt", "t_tr", "t_tt", "t_rr", "t_rt", "W",
];

pub const ANTI_COLUMNS: [&str; 11] =
    ["w", "eps_rz", "eps_tz", "tau_rz", "tau_tz", "m_rrz", "m_rtz", "m_trz", "m_ttz", "t_tz", "W"];

/// Named series, used for the closed forms.
pub type NamedSeries = Vec<(&'static str, PolarSeries)>;

/// Every field quantity of one displacement field, in CSV column order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet {
    plane: bool,
    material: MaterialParams,
    series: Vec<PolarSeries>,
}

impl FieldSet {
    pub fn from_displacement(field: &DisplacementField, material: &MaterialParams) -> Self {
        let series = match field {
            DisplacementField::Plane { u_r, u_t } => plane_pipeline(u_r, u_t, material),
            DisplacementField::Anti { w } => anti_pipeline(w, material),
        };
        Self { plane: field.is_plane(), material: *material, series }
    }

    /// Eigenfunction `index` of `sol`, including the `p = 1` part if attached.
    pub fn for_solution(sol: &EigenSolution, index: usize) -> Result<Self> {
        Ok(Self::from_displacement(&sol.field(index)?, &sol.material))
    }

    /// Eigenfunction `index` of `sol` without the `p = 1` part.
    pub fn for_eigenpart(sol: &EigenSolution, index: usize) -> Result<Self> {
        Ok(Self::from_displacement(sol.eigenpart(index)?, &sol.material))
    }

    pub fn is_plane(&self) -> bool {
        self.plane
    }

    pub fn material(&self) -> &MaterialParams {
        &self.material
    }

    pub fn names(&self) -> &'static [&'static str] {
        if self.plane {
            &PLANE_COLUMNS
        } else {
            &ANTI_COLUMNS
        }
    }

    pub fn get(&self, name: &str) -> Option<&PolarSeries> {
        self.names().iter().position(|n| *n == name).map(|i| &self.series[i])
    }

    /// Like [`get`](Self::get) for names known to exist. Panics otherwise.
    pub fn series(&self, name: &str) -> &PolarSeries {
        self.get(name).unwrap_or_else(|| panic!("no field named {name}"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &PolarSeries)> {
        self.names().iter().copied().zip(self.series.iter())
    }

    /// All columns at one point. `W` is evaluated as a sum of squares, so it
    /// is never negative.
    pub fn eval(&self, pt: PolarPoint) -> Vec<(&'static str, f64)> {
        self.iter()
            .map(|(n, s)| {
                let v = if n == "W" { self.energy_density_at(pt) } else { s.eval(pt.r, pt.theta) };
                (n, v)
            })
            .collect()
    }

    pub fn value(&self, name: &str, pt: PolarPoint) -> Option<f64> {
        self.get(name).map(|s| s.eval(pt.r, pt.theta))
    }

    fn at(&self, name: &str, pt: PolarPoint) -> f64 {
        self.series(name).eval(pt.r, pt.theta)
    }

    /// Strain-energy density at a point from the strain and its gradient.
    pub fn energy_density_at(&self, pt: PolarPoint) -> f64 {
        let (r, t) = (pt.r, pt.theta);
        let MaterialParams { mu, c, .. } = self.material;
        let lambda = self.material.lambda();
        let ev = |s: &PolarSeries| s.eval(r, t);
        let dr = |s: &PolarSeries| s.d_dr().eval(r, t);
        let dt = |s: &PolarSeries| s.d_dtheta().eval(r, t);
        if self.plane {
            let (err, ett, ert) = (self.series("eps_rr"), self.series("eps_tt"), self.series("eps_rt"));
            let (e_rr, e_tt, e_rt) = (ev(err), ev(ett), ev(ert));
            let e = e_rr + e_tt;
            let (de_r, de_t) = (dr(err) + dr(ett), (dt(err) + dt(ett)) / r);
            let g_rr = (dt(err) - 2.0 * e_rt) / r;
            let g_tt = (dt(ett) + 2.0 * e_rt) / r;
            let g_rt = (dt(ert) + e_rr - e_tt) / r;
            let grad2 = dr(err).powi(2)
                + dr(ett).powi(2)
                + 2.0 * dr(ert).powi(2)
                + g_rr * g_rr
                + g_tt * g_tt
                + 2.0 * g_rt * g_rt;
            0.5 * lambda * e * e
                + mu * (e_rr * e_rr + e_tt * e_tt + 2.0 * e_rt * e_rt)
                + 0.5 * lambda * c * (de_r * de_r + de_t * de_t)
                + mu * c * grad2
        } else {
            let (erz, etz) = (self.series("eps_rz"), self.series("eps_tz"));
            let (e_rz, e_tz) = (ev(erz), ev(etz));
            let g_r = (dt(erz) - e_tz) / r;
            let g_t = (dt(etz) + e_rz) / r;
            2.0 * mu * (e_rz * e_rz + e_tz * e_tz)
                + 2.0 * mu * c * (dr(erz).powi(2) + dr(etz).powi(2) + g_r * g_r + g_t * g_t)
        }
    }

    pub fn strain_at(&self, pt: PolarPoint) -> StrainTensor {
        if self.plane {
            StrainTensor::Plane {
                eps_rr: self.at("eps_rr", pt),
                eps_tt: self.at("eps_tt", pt),
                eps_rt: self.at("eps_rt", pt),
            }
        } else {
            StrainTensor::Anti { eps_rz: self.at("eps_rz", pt), eps_tz: self.at("eps_tz", pt) }
        }
    }

    pub fn monopolar_at(&self, pt: PolarPoint) -> MonopolarStress {
        if self.plane {
            MonopolarStress::Plane {
                tau_rr: self.at("tau_rr", pt),
                tau_tt: self.at("tau_tt", pt),
                tau_rt: self.at("tau_rt", pt),
                tau_zz: self.at("tau_zz", pt),
            }
        } else {
            MonopolarStress::Anti { tau_rz: self.at("tau_rz", pt), tau_tz: self.at("tau_tz", pt) }
        }
    }

    pub fn dipolar_at(&self, pt: PolarPoint) -> DipolarStress {
        if self.plane {
            DipolarStress::Plane {
                m_rrr: self.at("m_rrr", pt),
                m_rrt: self.at("m_rrt", pt),
                m_rtt: self.at("m_rtt", pt),
                m_trr: self.at("m_trr", pt),
                m_ttr: self.at("m_ttr", pt),
                m_ttt: self.at("m_ttt", pt),
            }
        } else {
            DipolarStress::Anti {
                m_rrz: self.at("m_rrz", pt),
                m_rtz: self.at("m_rtz", pt),
                m_trz: self.at("m_trz", pt),
                m_ttz: self.at("m_ttz", pt),
            }
        }
    }

    pub fn traction_theta_at(&self, pt: PolarPoint) -> TotalTraction {
        if self.plane {
            TotalTraction::Plane { t_tr: self.at("t_tr", pt), t_tt: self.at("t_tt", pt) }
        } else {
            TotalTraction::Anti { t_tz: self.at("t_tz", pt) }
        }
    }
}

fn plane_pipeline(u_r: &PolarSeries, u_t: &PolarSeries, mat: &MaterialParams) -> Vec<PolarSeries> {
    let (mu, c, lambda) = (mat.mu, mat.c, mat.lambda());
    let eps_rr = u_r.d_dr();
    let eps_tt = (u_r + &u_t.d_dtheta()).div_r();
    let eps_rt = 0.5 * ((u_r.d_dtheta() - u_t).div_r() + u_t.d_dr());

    let tau_rr = (lambda + 2.0 * mu) * &eps_rr + lambda * &eps_tt;
    let tau_tt = (lambda + 2.0 * mu) * &eps_tt + lambda * &eps_rr;
    let tau_rt = 2.0 * mu * &eps_rt;
    let tau_zz = lambda * (&eps_rr + &eps_tt);

    let m_rrr = c * tau_rr.d_dr();
    let m_rrt = c * tau_rt.d_dr();
    let m_rtt = c * tau_tt.d_dr();
    let m_trr = c * (tau_rr.d_dtheta() - 2.0 * &tau_rt).div_r();
    let m_ttr = c * (tau_rt.d_dtheta() + &tau_rr - &tau_tt).div_r();
    let m_ttt = c * (tau_tt.d_dtheta() + 2.0 * &tau_rt).div_r();

    let dr = PolarSeries::d_dr;
    let dtr = |s: &PolarSeries| s.d_dtheta().div_r();
    let inv = PolarSeries::div_r;
    let t_tr = -(dr(&m_trr) + dr(&m_rrt) + dtr(&m_ttr) + inv(&m_trr) + inv(&m_rrt)) + inv(&m_ttt);
    let t_tt = -(dr(&m_ttr) + dr(&m_rtt) + dtr(&m_ttt) + inv(&m_rtt) + 2.0 * inv(&m_ttr));
    let t_rr = -(dr(&m_rrr) + dtr(&m_trr) + dtr(&m_rrt) + inv(&m_rrr)) + 2.0 * inv(&m_ttr) + inv(&m_rtt);
    let t_rt = -(dr(&m_rrt) + dtr(&m_rtt) + dtr(&m_ttr) + inv(&m_trr) + 2.0 * inv(&m_rrt)) + inv(&m_ttt);

    let w = plane_energy(&eps_rr, &eps_tt, &eps_rt, mat);
    vec![
        u_r.clone(),
        u_t.clone(),
        eps_rr,
        eps_tt,
        eps_rt,
        tau_rr,
        tau_tt,
        tau_rt,
        tau_zz,
        m_rrr,
        m_rrt,
        m_rtt,
        m_trr,
        m_ttr,
        m_ttt,
        t_tr,
        t_tt,
        t_rr,
        t_rt,
        w,
    ]
}

fn plane_energy(err: &PolarSeries, ett: &PolarSeries, ert: &PolarSeries, mat: &MaterialParams) -> PolarSeries {
    let (mu, c, lambda) = (mat.mu, mat.c, mat.lambda());
    let e = err + ett;
    let g_rr = (err.d_dtheta() - 2.0 * ert).div_r();
    let g_tt = (ett.d_dtheta() + 2.0 * ert).div_r();
    let g_rt = (ert.d_dtheta() + err - ett).div_r();
    let grad2 = err.d_dr().square()
        + ett.d_dr().square()
        + 2.0 * ert.d_dr().square()
        + g_rr.square()
        + g_tt.square()
        + 2.0 * g_rt.square();
    (0.5 * lambda) * e.square()
        + mu * (err.square() + ett.square() + 2.0 * ert.square())
        + (0.5 * lambda * c) * (e.d_dr().square() + e.d_dtheta().div_r().square())
        + (mu * c) * grad2
}

fn anti_pipeline(w: &PolarSeries, mat: &MaterialParams) -> Vec<PolarSeries> {
    let (mu, c) = (mat.mu, mat.c);
    let eps_rz = 0.5 * w.d_dr();
    let eps_tz = 0.5 * w.d_dtheta().div_r();
    let tau_rz = 2.0 * mu * &eps_rz;
    let tau_tz = 2.0 * mu * &eps_tz;
    let m_rrz = c * tau_rz.d_dr();
    let m_rtz = c * tau_tz.d_dr();
    let m_trz = c * (tau_rz.d_dtheta() - &tau_tz).div_r();
    let m_ttz = c * (tau_tz.d_dtheta() + &tau_rz).div_r();
    let t_tz = -(m_rtz.d_dr() + m_trz.d_dr() + m_ttz.d_dtheta().div_r() + m_rtz.div_r() + m_trz.div_r());

    let g_r = (eps_rz.d_dtheta() - &eps_tz).div_r();
    let g_t = (eps_tz.d_dtheta() + &eps_rz).div_r();
    let energy = (2.0 * mu) * (eps_rz.square() + eps_tz.square())
        + (2.0 * mu * c) * (eps_rz.d_dr().square() + eps_tz.d_dr().square() + g_r.square() + g_t.square());
    vec![w.clone(), eps_rz, eps_tz, tau_rz, tau_tz, m_rrz, m_rtz, m_trz, m_ttz, t_tz, energy]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StrainTensor {
    Plane { eps_rr: f64, eps_tt: f64, eps_rt: f64 },
    Anti { eps_rz: f64, eps_tz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MonopolarStress {
    Plane { tau_rr: f64, tau_tt: f64, tau_rt: f64, tau_zz: f64 },
    Anti { tau_rz: f64, tau_tz: f64 },
}

/// `m_trr` is `m_θrr`; `m_rrt` also stands for `m_rθr`, `m_ttr` for `m_θrθ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DipolarStress {
    Plane { m_rrr: f64, m_rrt: f64, m_rtt: f64, m_trr: f64, m_ttr: f64, m_ttt: f64 },
    Anti { m_rrz: f64, m_rtz: f64, m_trz: f64, m_ttz: f64 },
}

/// Total tractions on a `θ = const` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TotalTraction {
    Plane { t_tr: f64, t_tt: f64 },
    Anti { t_tz: f64 },
}

/// Displacement components (`[u_r, u_θ]` or `[w]`) at a point.
pub fn displacement(sol: &EigenSolution, amp_index: usize, pt: PolarPoint) -> Result<Vec<f64>> {
    Ok(sol.field(amp_index)?.eval(pt.r, pt.theta))
}

pub fn strain(sol: &EigenSolution, amp_index: usize, pt: PolarPoint) -> Result<StrainTensor> {
    Ok(FieldSet::for_solution(sol, amp_index)?.strain_at(pt))
}

pub fn monopolar_stress(sol: &EigenSolution, amp_index: usize, pt: PolarPoint) -> Result<MonopolarStress> {
    Ok(FieldSet::for_solution(sol, amp_index)?.monopolar_at(pt))
}

pub fn dipolar_stress(sol: &EigenSolution, amp_index: usize, pt: PolarPoint) -> Result<DipolarStress> {
    Ok(FieldSet::for_solution(sol, amp_index)?.dipolar_at(pt))
}

pub fn total_stress_theta(sol: &EigenSolution, amp_index: usize, pt: PolarPoint) -> Result<TotalTraction> {
    Ok(FieldSet::for_solution(sol, amp_index)?.traction_theta_at(pt))
}

/// `(t_rr, t_rθ)` on a circle `r = const`. Plane modes only.
pub fn total_stress_r(sol: &EigenSolution, amp_index: usize, pt: PolarPoint) -> Result<(f64, f64)> {
    let fs = FieldSet::for_solution(sol, amp_index)?;
    if !fs.is_plane() {
        return Err(NotchError::Unsupported("r-normal total tractions are defined for plane modes".into()));
    }
    Ok((fs.at("t_rr", pt), fs.at("t_rt", pt)))
}

pub fn strain_energy_density(sol: &EigenSolution, amp_index: usize, pt: PolarPoint) -> Result<f64> {
    Ok(FieldSet::for_solution(sol, amp_index)?.energy_density_at(pt))
}

/// Angular pattern of one term of the closed forms. The pattern name gives
/// the symmetric-mode trig function; the anti-symmetric mode swaps cos and
/// sin and may flip the sign.
#[derive(Debug, Clone, Copy)]
enum Brace {
    /// `{A cos; B sin}`
    Cc,
    /// `{A sin; -B cos}`
    Sn,
    /// `{-A sin; B cos}`
    Msn,
    /// `{A cos; -B sin}`
    C4,
    /// `{A sin; B cos}`
    S4,
    /// `{-A cos; B sin}`
    C4b,
}

impl Brace {
    fn series(self, sym: bool, amp: f64, r_exp: f64, freq: f64) -> PolarSeries {
        use Brace::*;
        let (sym_cos, s_sym, s_anti) = match self {
            Cc => (true, 1.0, 1.0),
            Sn => (false, 1.0, -1.0),
            Msn => (false, -1.0, 1.0),
            C4 => (true, 1.0, -1.0),
            S4 => (false, 1.0, 1.0),
            C4b => (true, -1.0, 1.0),
        };
        match (sym, sym_cos) {
            (true, true) => PolarSeries::cos(s_sym * amp, r_exp, freq),
            (true, false) => PolarSeries::sin(s_sym * amp, r_exp, freq),
            (false, true) => PolarSeries::sin(s_anti * amp, r_exp, freq),
            (false, false) => PolarSeries::cos(s_anti * amp, r_exp, freq),
        }
    }
}

/// Closed-form fields of the degree-`p` general solution with member
/// amplitudes `amps` (A1..A4, B1..B4 or D1, D2), plus the constant-strain
/// part with constants `p1` (C1, C3 / C2 / E; empty means none).
///
/// Built directly from the amplitudes, without differentiating a
/// displacement series. Plane output: strains, `τ` (no `τ_zz`), the six
/// dipolar stresses and `t_tr`, `t_tt`. Anti-plane: `w`, strains, `τ`, `m`,
/// `t_tz`.
pub fn closed_form_fields(
    mode: Mode,
    p: f64,
    material: &MaterialParams,
    amps: &[f64],
    p1: &[f64],
) -> Result<NamedSeries> {
    if amps.len() != mode.basis_len() {
        return Err(NotchError::AmplitudeCount { expected: mode.basis_len(), got: amps.len() });
    }
    if !p1.is_empty() && p1.len() != mode.p1_len() {
        return Err(NotchError::AmplitudeCount { expected: mode.p1_len(), got: p1.len() });
    }
    if mode.is_plane() {
        plane_closed_form(mode == Mode::PlaneSym, p, material, amps, p1)
    } else {
        Ok(anti_closed_form(p, material, amps, p1.first().copied().unwrap_or(0.0)))
    }
}

fn plane_closed_form(sym: bool, p: f64, mat: &MaterialParams, amps: &[f64], p1: &[f64]) -> Result<NamedSeries> {
    use Brace::*;
    let MaterialParams { mu, nu, c } = *mat;
    let den = p + 8.0 * nu - 7.0;
    if den == 0.0 {
        return Err(NotchError::Unsupported(format!("closed forms have a pole at p = {p}")));
    }
    let q = 1.0 - 2.0 * nu;
    let freqs = [p - 1.0, p + 1.0, p - 3.0, p - 1.0];
    let row = |pref: f64, r_exp: f64, kinds: [Brace; 4], coefs: [f64; 4]| -> PolarSeries {
        let sum: PolarSeries = (0..4).map(|j| coefs[j] * kinds[j].series(sym, amps[j], r_exp, freqs[j])).sum();
        pref * sum
    };
    let (r1, r2, r3) = (p - 1.0, p - 2.0, p - 3.0);
    let cc = [Cc, Cc, Cc, C4];
    let ms = [Msn, Msn, Msn, S4];
    let rr_coefs = [(p + nu - p * nu) / q, p, (p * p - 7.0 * p + 8.0 * nu) / den, nu * (p - 1.0) / q];
    let tt_coefs = [(1.0 - nu + p * nu) / q, -p, -(p * p + p + 8.0 * nu - 8.0) / den, (1.0 - nu) * (p - 1.0) / q];
    let rt_coefs = [p - 1.0, 2.0 * p, 2.0 * (p * p - 3.0 * p - 8.0 * nu + 8.0) / den, p - 1.0];
    let cm = c * mu * (p - 1.0);
    let ct = c * mu * (p - 1.0) * (p - 2.0);

    let mut out: NamedSeries = vec![
        ("eps_rr", row(p, r1, cc, [1.0, 1.0, 1.0, 0.0])),
        ("eps_tt", row(1.0, r1, cc, [1.0, -p, -(p * p + p - 8.0 * p * nu + 16.0 * nu - 8.0) / den, p - 1.0])),
        ("eps_rt", row(0.5, r1, ms, rt_coefs)),
        ("tau_rr", row(2.0 * mu, r1, cc, rr_coefs)),
        ("tau_tt", row(2.0 * mu, r1, cc, tt_coefs)),
        ("tau_rt", row(mu, r1, ms, rt_coefs)),
        ("m_rrr", row(2.0 * cm, r2, cc, rr_coefs)),
        ("m_rrt", row(cm, r2, ms, rt_coefs)),
        ("m_rtt", row(2.0 * cm, r2, cc, tt_coefs)),
        (
            "m_trr",
            row(
                2.0 * cm,
                r2,
                [Sn, Msn, Msn, S4],
                [
                    (1.0 - 3.0 * nu - p + p * nu) / q,
                    p,
                    (p * p - 11.0 * p + 8.0 * nu + 16.0) / den,
                    -(1.0 - 3.0 * nu + p * nu) / q,
                ],
            ),
        ),
        (
            "m_ttr",
            row(
                -cm,
                r2,
                [Cc, Cc, Cc, C4b],
                [p - 3.0, 2.0 * p, 2.0 * (p * p - 7.0 * p - 8.0 * nu + 16.0) / den, p - 3.0],
            ),
        ),
        (
            "m_ttt",
            row(
                2.0 * cm,
                r2,
                [Sn, Sn, Sn, S4],
                [
                    (3.0 * nu - 2.0 - p * nu) / q,
                    p,
                    (p * p - 3.0 * p + 8.0 * nu - 8.0) / den,
                    (2.0 - p - 3.0 * nu + p * nu) / q,
                ],
            ),
        ),
        (
            "t_tr",
            row(
                2.0 * ct,
                r3,
                [Sn, Sn, Sn, S4],
                [(1.0 + p) * (1.0 - nu) / q, p, (p * p - 3.0 * p + 8.0 * nu - 8.0) / den, (nu - 1.0 + p * nu) / q],
            ),
        ),
        ("t_tt", row(ct, r3, [Cc, Cc, Cc, C4b], [p + 1.0, 2.0 * p, 2.0 * (p * p + p - 8.0 * nu + 8.0) / den, p + 1.0])),
    ];

    if !p1.is_empty() {
        // constant strains: {C1 + C3 cos2θ; C2 sin2θ} and companions
        let k = |c: f64, f: f64| PolarSeries::cos(c, 0.0, f);
        let s = |c: f64, f: f64| PolarSeries::sin(c, 0.0, f);
        let parts: [(&str, PolarSeries); 6] = if sym {
            let (c1, c3) = (p1[0], p1[1]);
            [
                ("eps_rr", k(c1, 0.0) + k(c3, 2.0)),
                ("eps_tt", k(c1, 0.0) - k(c3, 2.0)),
                ("eps_rt", s(-c3, 2.0)),
                ("tau_rr", 2.0 * mu * (k(c1 / q, 0.0) + k(c3, 2.0))),
                ("tau_tt", 2.0 * mu * (k(c1 / q, 0.0) - k(c3, 2.0))),
                ("tau_rt", 2.0 * mu * s(-c3, 2.0)),
            ]
        } else {
            let c2 = p1[0];
            [
                ("eps_rr", s(c2, 2.0)),
                ("eps_tt", s(-c2, 2.0)),
                ("eps_rt", k(c2, 2.0)),
                ("tau_rr", 2.0 * mu * s(c2, 2.0)),
                ("tau_tt", 2.0 * mu * s(-c2, 2.0)),
                ("tau_rt", 2.0 * mu * k(c2, 2.0)),
            ]
        };
        for (name, extra) in parts {
            if let Some(entry) = out.iter_mut().find(|(n, _)| *n == name) {
                entry.1 += &extra;
            }
        }
    }
    Ok(out)
}

fn anti_closed_form(p: f64, mat: &MaterialParams, amps: &[f64], e: f64) -> NamedSeries {
    let MaterialParams { mu, c, .. } = *mat;
    let (d1, d2) = (amps[0], amps[1]);
    let (f1, f2) = (p, p - 2.0);
    let sn = PolarSeries::sin;
    let cs = PolarSeries::cos;
    let mc = mu * c * (p - 1.0);
    vec![
        ("w", sn(e, 1.0, 1.0) + sn(d1, p, f1) + sn(d2, p, f2)),
        ("eps_rz", sn(0.5 * e, 0.0, 1.0) + (0.5 * p) * (sn(d1, p - 1.0, f1) + sn(d2, p - 1.0, f2))),
        ("eps_tz", cs(0.5 * e, 0.0, 1.0) + 0.5 * (cs(d1 * p, p - 1.0, f1) + cs(d2 * (p - 2.0), p - 1.0, f2))),
        ("tau_rz", mu * (sn(e, 0.0, 1.0) + p * (sn(d1, p - 1.0, f1) + sn(d2, p - 1.0, f2)))),
        ("tau_tz", mu * (cs(e, 0.0, 1.0) + cs(d1 * p, p - 1.0, f1) + cs(d2 * (p - 2.0), p - 1.0, f2))),
        ("m_rrz", (mc * p) * (sn(d1, p - 2.0, f1) + sn(d2, p - 2.0, f2))),
        ("m_rtz", mc * (cs(d1 * p, p - 2.0, f1) + cs(d2 * (p - 2.0), p - 2.0, f2))),
        ("m_trz", mc * (cs(d1 * p, p - 2.0, f1) + cs(d2 * (p - 2.0), p - 2.0, f2))),
        ("m_ttz", -mc * (sn(d1 * p, p - 2.0, f1) + sn(d2 * (p - 4.0), p - 2.0, f2))),
        ("t_tz", -(mc * (p - 2.0)) * (cs(d1 * p, p - 3.0, f1) + cs(d2 * (p + 2.0), p - 3.0, f2))),
    ]
}

/// Crack-tip loading mode of the reference closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrackMode {
    I,
    II,
    III,
}

impl CrackMode {
    pub fn mode(self) -> Mode {
        match self {
            CrackMode::I => Mode::PlaneSym,
            CrackMode::II => Mode::PlaneAnti,
            CrackMode::III => Mode::AntiplaneOdd,
        }
    }

    /// Amplitude names in input order.
    pub fn amplitude_names(self) -> &'static [&'static str] {
        match self {
            CrackMode::I => &["C1", "C3", "A1", "A2"],
            CrackMode::II => &["C2", "B1", "B2"],
            CrackMode::III => &["E", "D"],
        }
    }
}

impl fmt::Display for CrackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CrackMode::I => "I",
            CrackMode::II => "II",
            CrackMode::III => "III",
        })
    }
}

impl FromStr for CrackMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "I" => Ok(CrackMode::I),
            "II" => Ok(CrackMode::II),
            "III" => Ok(CrackMode::III),
            other => Err(format!("unknown crack mode '{other}' (expected I, II or III)")),
        }
    }
}

/// Crack-tip (`a = π`, `p = 3/2`) fields in closed form, as series.
/// Amplitudes: mode I `[C1, C3, A1, A2]`, mode II `[C2, B1, B2]`,
/// mode III `[E, D]`. Total stresses are the dominant parts.
pub fn crack_reference_series(mode: CrackMode, amps: &[f64], material: &MaterialParams) -> Result<NamedSeries> {
    let want = mode.amplitude_names().len();
    if amps.len() != want {
        return Err(NotchError::AmplitudeCount { expected: want, got: amps.len() });
    }
    Ok(match mode {
        CrackMode::I => crack_mode_i(amps, material),
        CrackMode::II => crack_mode_ii(amps, material),
        CrackMode::III => crack_mode_iii(amps, material),
    })
}

/// [`crack_reference_series`] evaluated at one point.
pub fn crack_reference_fields(
    mode: CrackMode,
    amps: &[f64],
    material: &MaterialParams,
    pt: PolarPoint,
) -> Result<Vec<(&'static str, f64)>> {
    Ok(crack_reference_series(mode, amps, material)?.into_iter().map(|(n, s)| (n, s.eval(pt.r, pt.theta))).collect())
}

// Radial exponents and half-angle frequencies of the crack-tip forms.
const S: f64 = 0.5;
const SI: f64 = -0.5;
const S3: f64 = -1.5;
const H1: f64 = 0.5;
const H3: f64 = 1.5;
const H5: f64 = 2.5;

fn crack_mode_i(amps: &[f64], mat: &MaterialParams) -> NamedSeries {
    let (c1, c3, a1, a2) = (amps[0], amps[1], amps[2], amps[3]);
    let MaterialParams { mu, nu, c } = *mat;
    let k = 41.0 - 32.0 * nu;
    let q = 1.0 - 2.0 * nu;
    let cs = PolarSeries::cos;
    let sn = PolarSeries::sin;
    let g = 1.5;
    let qq = 0.75;
    let mc = mu * c;
    let u_r = cs(c1, 1.0, 0.0)
        + cs(c3, 1.0, 2.0)
        + a1 * (cs(3.0 - 8.0 * nu, 1.5, H1) + cs(3.0 * (11.0 - 16.0 * nu) / k, 1.5, H3))
        - a2 * (cs(3.0 * (11.0 - 16.0 * nu) / k, 1.5, H3) - cs(1.0, 1.5, H5));
    let u_t = sn(-c3, 1.0, 2.0)
        + a1 * (sn(9.0 - 8.0 * nu, 1.5, H1) - sn(3.0 * (13.0 - 16.0 * nu) / k, 1.5, H3))
        + a2 * (sn(3.0 * (13.0 - 16.0 * nu) / k, 1.5, H3) - sn(1.0, 1.5, H5));
    let eps_rr = cs(c1, 0.0, 0.0)
        + cs(c3, 0.0, 2.0)
        + (g * a1) * (cs((33.0 - 48.0 * nu) / k, S, H3) + cs(3.0 - 8.0 * nu, S, H1))
        - (g * a2) * (cs((33.0 - 48.0 * nu) / k, S, H3) - cs(1.0, S, H5));
    let eps_tt = cs(c1, 0.0, 0.0)
        - cs(c3, 0.0, 2.0)
        - (g * a1) * (cs((17.0 - 16.0 * nu) / k, S, H3) - cs(5.0 - 8.0 * nu, S, H1))
        + (g * a2) * (cs((17.0 - 16.0 * nu) / k, S, H3) - cs(1.0, S, H5));
    let eps_rt = sn(-c3, 0.0, 2.0) - (g * a1) * (sn((23.0 - 32.0 * nu) / k, S, H3) - sn(1.0, S, H1))
        + (g * a2) * (sn((23.0 - 32.0 * nu) / k, S, H3) - sn(1.0, S, H5));
    let tau_rr = mu
        * (cs(2.0 * c1 / q, 0.0, 0.0)
            + cs(2.0 * c3, 0.0, 2.0)
            + (3.0 * a1) * (cs(3.0, S, H1) + cs((33.0 - 32.0 * nu) / k, S, H3))
            - (3.0 * a2) * (cs((33.0 - 32.0 * nu) / k, S, H3) - cs(1.0, S, H5)));
    let tau_tt = mu
        * (cs(2.0 * c1 / q, 0.0, 0.0) - cs(2.0 * c3, 0.0, 2.0)
            + (3.0 * a1) * (cs(5.0, S, H1) - cs((17.0 - 32.0 * nu) / k, S, H3))
            - (3.0 * a2) * (cs(1.0, S, H5) - cs((17.0 - 32.0 * nu) / k, S, H3)));
    let tau_rt = mu
        * (sn(-2.0 * c3, 0.0, 2.0) + (3.0 * a1) * (sn(1.0, S, H1) - sn((23.0 - 32.0 * nu) / k, S, H3))
            - (3.0 * a2) * (sn(1.0, S, H5) - sn((23.0 - 32.0 * nu) / k, S, H3)));
    let m_ttr = mc
        * ((g * a1) * (cs(-3.0, SI, H1) + cs((31.0 - 32.0 * nu) / k, SI, H3))
            - (g * a2) * (cs((31.0 - 32.0 * nu) / k, SI, H3) + cs(1.0, SI, H5)));
    let m_ttt = mc * (-(g * a1) * (sn(1.0, SI, H1) + sn(1.0, SI, H3)) + (g * a2) * (sn(1.0, SI, H3) + sn(1.0, SI, H5)));
    let m_rrr = mc
        * ((g * a1) * (cs(3.0, SI, H1) + cs((33.0 - 32.0 * nu) / k, SI, H3))
            - (g * a2) * (cs((33.0 - 32.0 * nu) / k, SI, H3) - cs(1.0, SI, H5)));
    let m_rrt = mc
        * ((g * a1) * (sn(1.0, SI, H1) - sn((23.0 - 32.0 * nu) / k, SI, H3))
            + (g * a2) * (sn((23.0 - 32.0 * nu) / k, SI, H3) - sn(1.0, SI, H5)));
    let m_trr = mc
        * (-(g * a1) * (sn(7.0, SI, H1) + sn((7.0 + 32.0 * nu) / k, SI, H3))
            + (g * a2) * (sn((7.0 + 32.0 * nu) / k, SI, H3) - sn(1.0, SI, H5)));
    let m_rtt = mc
        * ((g * a1) * (cs(5.0, SI, H1) - cs((17.0 - 32.0 * nu) / k, SI, H3))
            + (g * a2) * (cs((17.0 - 32.0 * nu) / k, SI, H3) - cs(1.0, SI, H5)));
    let t_tr = mc * ((qq * a1) * (sn(1.0, S3, H1) + sn(1.0, S3, H3)) - (qq * a2) * (sn(1.0, S3, H3) + sn(1.0, S3, H5)));
    let t_tt = mc
        * ((qq * a1) * (cs((47.0 - 32.0 * nu) / k, S3, H3) + cs(5.0, S3, H1))
            - (qq * a2) * (cs((47.0 - 32.0 * nu) / k, S3, H3) + cs(1.0, S3, H5)));
    let t_rr = (mc * qq / k)
        * (a1 * (cs(147.0 - 32.0 * nu, S3, H3) + cs(k, S3, H1))
            + a2 * (cs(123.0 - 96.0 * nu, S3, H5) - cs(147.0 - 32.0 * nu, S3, H3)));
    let t_rt = (mc * qq / k)
        * (a1 * (sn(43.0 + 32.0 * nu, S3, H3) + sn(451.0 - 352.0 * nu, S3, H1))
            - a2 * (sn(123.0 - 96.0 * nu, S3, H5) + sn(43.0 + 32.0 * nu, S3, H3)));
    vec![
        ("u_r", u_r),
        ("u_t", u_t),
        ("eps_rr", eps_rr),
        ("eps_tt", eps_tt),
        ("eps_rt", eps_rt),
        ("tau_rr", tau_rr),
        ("tau_tt", tau_tt),
        ("tau_rt", tau_rt),
        ("m_rrr", m_rrr),
        ("m_rrt", m_rrt),
        ("m_rtt", m_rtt),
        ("m_trr", m_trr),
        ("m_ttr", m_ttr),
        ("m_ttt", m_ttt),
        ("t_tr", t_tr),
        ("t_tt", t_tt),
        ("t_rr", t_rr),
        ("t_rt", t_rt),
    ]
}

fn crack_mode_ii(amps: &[f64], mat: &MaterialParams) -> NamedSeries {
    let (c2, b1, b2) = (amps[0], amps[1], amps[2]);
    let MaterialParams { mu, nu, c } = *mat;
    let k = 37.0 - 32.0 * nu;
    let q = 1.0 - 2.0 * nu;
    let cs = PolarSeries::cos;
    let sn = PolarSeries::sin;
    let g = 1.5;
    let qq = 0.75;
    let mc = mu * c;
    let u_r = sn(c2, 1.0, 2.0) + sn(b1, 1.5, H1) + b2 * (sn(-3.0 * (11.0 - 16.0 * nu) / k, 1.5, H3) + sn(1.0, 1.5, H5));
    let u_t = cs(c2, 1.0, 2.0) - cs(b1, 1.5, H1)
        + b2 * (cs(1.0, 1.5, H5) - cs(3.0 * (13.0 - 16.0 * nu) / k, 1.5, H3) + cs(12.0 / k, 1.5, H1));
    let eps_rr = sn(c2, 0.0, 2.0) + sn(g * b1, S, H1) - (g * b2) * (sn((33.0 - 48.0 * nu) / k, S, H3) - sn(1.0, S, H5));
    let eps_tt = sn(-c2, 0.0, 2.0)
        - (g * b2) * (sn(4.0 / k, S, H1) - sn((17.0 - 16.0 * nu) / k, S, H3) + sn(1.0, S, H5))
        + sn(g * b1, S, H1);
    let eps_rt =
        cs(c2, 0.0, 2.0) + (g * b2) * (cs(2.0 / k, S, H1) - cs((23.0 - 32.0 * nu) / k, S, H3) + cs(1.0, S, H5));
    let tau_rr = mu
        * (sn(2.0 * c2, 0.0, 2.0)
            - (3.0 * b2) * (sn(4.0 * nu / (q * k), S, H1) + sn((33.0 - 32.0 * nu) / k, S, H3) - sn(1.0, S, H5))
            + sn(3.0 / q * b1, S, H1));
    let tau_tt = mu
        * (sn(-2.0 * c2, 0.0, 2.0)
            - (3.0 * b2)
                * (sn(4.0 * (1.0 - nu) / (q * k), S, H1) - sn((17.0 - 32.0 * nu) / k, S, H3) + sn(1.0, S, H5))
            + sn(3.0 / q * b1, S, H1));
    let tau_rt = mu
        * (cs(2.0 * c2, 0.0, 2.0)
            + (3.0 * b2) * (cs(2.0 / k, S, H1) - cs((23.0 - 32.0 * nu) / k, S, H3) + cs(1.0, S, H5)));
    let m_ttt = mc
        * (-(g * b2)
            * (cs(-4.0 * (1.0 - 3.0 * nu) / (q * k), SI, H1) + cs((41.0 - 32.0 * nu) / k, SI, H3) + cs(1.0, SI, H5))
            + cs(g / q * b1, SI, H1));
    let m_ttr = mc * (-(g * b2) * (sn(-6.0 / k, SI, H1) + sn((31.0 - 32.0 * nu) / k, SI, H3) + sn(1.0, SI, H5)));
    let m_rrr = mc
        * (-(g * b2) * (sn(-1.0, SI, H5) + sn((33.0 - 32.0 * nu) / k, SI, H3) + sn(4.0 * nu / (k * q), SI, H1))
            + sn(g / q * b1, SI, H1));
    let m_trr = mc
        * (-(g * b2)
            * (cs(4.0 * (2.0 - 3.0 * nu) / (q * k), SI, H1) + cs((7.0 + 32.0 * nu) / k, SI, H3) - cs(1.0, SI, H5))
            + cs(g / q * b1, SI, H1));
    let m_rrt = mc * (-(g * b2) * (cs(-2.0 / k, SI, H1) + cs((23.0 - 32.0 * nu) / k, SI, H3) - cs(1.0, SI, H5)));
    let m_rtt = mc
        * (-(g * b2) * (sn(4.0 * (1.0 - nu) / (k * q), SI, H1) - sn((17.0 - 32.0 * nu) / k, SI, H3) + sn(1.0, SI, H5))
            + sn(g / q * b1, SI, H1));
    let t_tr = mc
        * ((qq * b2)
            * (cs(4.0 * (2.0 - 5.0 * nu) / (q * k), S3, H1) + cs((41.0 - 32.0 * nu) / k, S3, H3) + cs(1.0, S3, H5))
            + cs(qq / q * b1, S3, H1));
    let t_tt = mc * (-(qq * b2) * (sn(10.0 / k, S3, H1) + sn((47.0 - 32.0 * nu) / k, S3, H3) + sn(1.0, S3, H5)));
    let t_rr = mc
        * ((qq / k * b2) * (sn((10.0 - 28.0 * nu) / q, S3, H1) + sn(3.0 * k, S3, H5) - sn(147.0 - 32.0 * nu, S3, H3))
            + sn(g / q * b1, S3, H1));
    let t_rt = mc
        * ((qq / k * b2) * (cs((16.0 - 28.0 * nu) / q, S3, H1) + cs(3.0 * k, S3, H5) + cs(43.0 + 32.0 * nu, S3, H3))
            - cs(qq / q * b1, S3, H1));
    vec![
        ("u_r", u_r),
        ("u_t", u_t),
        ("eps_rr", eps_rr),
        ("eps_tt", eps_tt),
        ("eps_rt", eps_rt),
        ("tau_rr", tau_rr),
        ("tau_tt", tau_tt),
        ("tau_rt", tau_rt),
        ("m_rrr", m_rrr),
        ("m_rrt", m_rrt),
        ("m_rtt", m_rtt),
        ("m_trr", m_trr),
        ("m_ttr", m_ttr),
        ("m_ttt", m_ttt),
        ("t_tr", t_tr),
        ("t_tt", t_tt),
        ("t_rr", t_rr),
        ("t_rt", t_rt),
    ]
}

fn crack_mode_iii(amps: &[f64], mat: &MaterialParams) -> NamedSeries {
    let (e, d) = (amps[0], amps[1]);
    let MaterialParams { mu, c, .. } = *mat;
    let cs = PolarSeries::cos;
    let sn = PolarSeries::sin;
    let mc = mu * c;
    let m_trz = (mc * d / 4.0) * (cs(5.0, SI, H3) - cs(1.0, SI, H1));
    vec![
        ("w", sn(e, 1.0, 1.0) + (d / 3.0) * (sn(5.0, 1.5, H3) - sn(3.0, 1.5, H1))),
        ("tau_rz", mu * (sn(e, 0.0, 1.0) + (d / 2.0) * (sn(5.0, S, H3) - sn(3.0, S, H1)))),
        ("tau_tz", mu * (cs(e, 0.0, 1.0) + (d / 2.0) * (cs(5.0, S, H3) - cs(1.0, S, H1)))),
        ("m_rrz", (mc * d / 4.0) * (sn(5.0, SI, H3) - sn(3.0, SI, H1))),
        ("m_rtz", m_trz.clone()),
        ("m_trz", m_trz),
        ("m_ttz", (-5.0 * mc * d / 4.0) * (sn(1.0, SI, H3) + sn(1.0, SI, H1))),
        ("t_tz", (mc * d / 8.0) * (cs(5.0, S3, H3) + cs(7.0, S3, H1))),
    ]
}

/// Least-squares fit of a set of named reference fields by a combination
/// of candidate field sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeMatch {
    pub coeffs: Vec<f64>,
    /// Worst `|fit - reference|` over the points, divided by the largest
    /// `|reference|` of the same field (or of all fields if that is zero).
    pub max_rel_error: f64,
    pub worst_field: String,
}

pub fn match_amplitudes(
    reference: &[(&'static str, PolarSeries)],
    candidates: &[FieldSet],
    points: &[PolarPoint],
) -> Result<AmplitudeMatch> {
    if candidates.is_empty() || points.is_empty() || reference.is_empty() {
        return Err(NotchError::Unsupported("amplitude matching needs candidates, points and fields".into()));
    }
    for (name, _) in reference {
        if candidates[0].get(name).is_none() {
            return Err(NotchError::Unsupported(format!("candidate fields have no '{name}'")));
        }
    }
    let n = candidates.len();
    let rows = reference.len() * points.len();
    let mut a = DMatrix::<f64>::zeros(rows, n);
    let mut b = DVector::<f64>::zeros(rows);
    for (fi, (name, s)) in reference.iter().enumerate() {
        for (pi, pt) in points.iter().enumerate() {
            let row = fi * points.len() + pi;
            b[row] = s.eval(pt.r, pt.theta);
            for (j, cand) in candidates.iter().enumerate() {
                a[(row, j)] = cand.series(name).eval(pt.r, pt.theta);
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-13 * svd.singular_values.max()).map_err(|e| NotchError::Unsupported(e.to_string()))?;
    let fit = &a * &x;
    let global = b.amax();
    let mut worst = (0.0, String::new());
    for (fi, (name, _)) in reference.iter().enumerate() {
        let range = fi * points.len()..(fi + 1) * points.len();
        let scale = range.clone().map(|i| b[i].abs()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { global.max(f64::MIN_POSITIVE) };
        let err = range.map(|i| (fit[i] - b[i]).abs()).fold(0.0, f64::max) / scale;
        if err > worst.0 || worst.1.is_empty() {
            worst = (err, (*name).to_string());
        }
    }
    Ok(AmplitudeMatch { coeffs: x.iter().copied().collect(), max_rel_error: worst.0, worst_field: worst.1 })
}
