//! Corner forces and force/moment balance of a small circular sector
//! `r = r0, |θ| ≤ a` around the notch tip.
//!
//! The arc carries the total tractions `t_rr`, `t_rθ` and the double-force
//! traction `m_rrθ`; the two corners where the arc meets the faces carry
//! concentrated forces from the jump of `n_r k_p m_rpq`. Only the dominant
//! parts of the fields enter, as is appropriate for `r0 → 0`.

use std::f64::consts::FRAC_PI_2;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::basis::EigenSolution;
use crate::error::{NotchError, Result};
use crate::fields::FieldSet;
use crate::model::PolarPoint;
use crate::series::PolarSeries;

/// Relative tolerance for the balance residuals.
pub const BALANCE_TOL: f64 = 1e-8;
/// Relative tolerance between the two arc-integral evaluations.
pub const QUAD_TOL: f64 = 1e-8;

const NODES_PER_QUARTER: usize = 64;
const MAX_NODES: usize = 4096;
const QUAD_CONVERGENCE: f64 = 1e-12;

/// Unit vectors at one corner, in the local `(e_r, e_θ)` frame. The `+`
/// surface is the arc side and the `-` surface the face side for A; for B
/// the roles follow from the mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub theta: f64,
    pub n_plus: [f64; 2],
    pub n_minus: [f64; 2],
    pub k_plus: [f64; 2],
    pub k_minus: [f64; 2],
}

/// Both corners of the sector; `s` is the out-of-plane unit vector and
/// `k = s × n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerGeometry {
    pub a: Corner,
    pub b: Corner,
}

fn cross_z(n: [f64; 2]) -> [f64; 2] {
    [-n[1], n[0]]
}

impl CornerGeometry {
    pub fn new(half_angle: f64) -> Self {
        let (n_ap, n_am) = ([1.0, 0.0], [0.0, 1.0]);
        let (n_bp, n_bm) = ([-n_am[0], -n_am[1]], n_ap);
        Self {
            a: Corner { theta: half_angle, n_plus: n_ap, n_minus: n_am, k_plus: cross_z(n_ap), k_minus: cross_z(n_am) },
            b: Corner {
                theta: -half_angle,
                n_plus: n_bp,
                n_minus: n_bm,
                k_plus: cross_z(n_bp),
                k_minus: cross_z(n_bm),
            },
        }
    }
}

/// Concentrated forces per unit length at the corners A (`θ = a`) and
/// B (`θ = -a`), in polar components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerForces {
    pub e_r_a: f64,
    pub e_t_a: f64,
    pub e_r_b: f64,
    pub e_t_b: f64,
}

impl CornerForces {
    pub fn abs_sum(&self) -> f64 {
        self.e_r_a.abs() + self.e_t_a.abs() + self.e_r_b.abs() + self.e_t_b.abs()
    }
}

/// `m[i][p][q]` with index 0 = r, 1 = θ.
fn dipolar_tensor(fs: &FieldSet, pt: PolarPoint) -> [[[f64; 2]; 2]; 2] {
    let v = |n: &str| fs.series(n).eval(pt.r, pt.theta);
    let (rrr, rrt, rtt) = (v("m_rrr"), v("m_rrt"), v("m_rtt"));
    let (trr, ttr, ttt) = (v("m_trr"), v("m_ttr"), v("m_ttt"));
    [[[rrr, rrt], [rrt, rtt]], [[trr, ttr], [ttr, ttt]]]
}

#[allow(clippy::needless_range_loop)]
fn jump(c: &Corner, m: &[[[f64; 2]; 2]; 2]) -> [f64; 2] {
    let mut e = [0.0; 2];
    for (q, eq) in e.iter_mut().enumerate() {
        for i in 0..2 {
            for p in 0..2 {
                *eq += (c.n_plus[i] * c.k_plus[p] - c.n_minus[i] * c.k_minus[p]) * m[i][p][q];
            }
        }
    }
    e
}

fn require_plane(fs: &FieldSet) -> Result<()> {
    if fs.is_plane() {
        Ok(())
    } else {
        Err(NotchError::Unsupported("sector equilibrium is defined for plane modes".into()))
    }
}

fn require_r0(r0: f64) -> Result<()> {
    if r0 > 0.0 && r0.is_finite() {
        Ok(())
    } else {
        Err(NotchError::OutOfRange { field: "r0", value: r0, allowed: "r0 > 0" })
    }
}

/// Corner forces of a plane field set on a sector of half-angle `a`.
pub fn edge_forces_of(fs: &FieldSet, a: f64, r0: f64) -> Result<CornerForces> {
    require_plane(fs)?;
    require_r0(r0)?;
    let g = CornerGeometry::new(a);
    let ea = jump(&g.a, &dipolar_tensor(fs, PolarPoint::new(r0, g.a.theta)));
    let eb = jump(&g.b, &dipolar_tensor(fs, PolarPoint::new(r0, g.b.theta)));
    Ok(CornerForces { e_r_a: ea[0], e_t_a: ea[1], e_r_b: eb[0], e_t_b: eb[1] })
}

pub fn edge_forces(sol: &EigenSolution, amp_index: usize, r0: f64) -> Result<CornerForces> {
    edge_forces_of(&FieldSet::for_solution(sol, amp_index)?, sol.case.half_angle, r0)
}

/// Composite Gauss–Legendre on `[lo, hi]`: one panel per quarter turn,
/// node count doubled until two estimates agree. Returns the integral
/// and the integral of `|f|` (used as a scale).
pub fn gauss_legendre_composite<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let panels = ((hi - lo) / FRAC_PI_2).ceil().max(1.0) as usize;
    let width = (hi - lo) / panels as f64;
    let run = |n: usize, g: &dyn Fn(f64) -> f64| -> f64 {
        let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n > 0"));
        (0..panels)
            .map(|i| {
                let a = lo + i as f64 * width;
                rule.integrate(a, a + width, g)
            })
            .sum()
    };
    let mut n = NODES_PER_QUARTER;
    let mut prev = run(n, &f);
    let abs_int = run(n, &|x| f(x).abs());
    while n * 2 * panels <= MAX_NODES {
        n *= 2;
        let next = run(n, &f);
        let done = (next - prev).abs() <= QUAD_CONVERGENCE * next.abs().max(abs_int);
        prev = next;
        if done {
            break;
        }
    }
    (prev, abs_int)
}

/// `∫_{-a}^{a} s(r0, θ) dθ` by exact antiderivative, checked against
/// composite Gauss–Legendre.
fn checked_integral(what: &'static str, s: &PolarSeries, r0: f64, a: f64) -> Result<f64> {
    let exact = s.integrate_theta(r0, -a, a);
    let (quad, abs_int) = gauss_legendre_composite(|t| s.eval(r0, t), -a, a);
    if (quad - exact).abs() > QUAD_TOL * exact.abs().max(abs_int) {
        return Err(NotchError::QuadratureDisagreement { what, quadrature: quad, exact });
    }
    Ok(exact)
}

/// Resultants `(H, V, T)` of the arc tractions: horizontal and vertical
/// force and moment about the tip.
pub fn resultant_on_arc_of(fs: &FieldSet, a: f64, r0: f64) -> Result<(f64, f64, f64)> {
    require_plane(fs)?;
    require_r0(r0)?;
    let (t_rr, t_rt, m_rrt) = (fs.series("t_rr"), fs.series("t_rt"), fs.series("m_rrt"));
    let cos = PolarSeries::cos(1.0, 0.0, 1.0);
    let sin = PolarSeries::sin(1.0, 0.0, 1.0);
    let h_int = t_rr.product(&cos) - t_rt.product(&sin);
    let v_int = t_rr.product(&sin) + t_rt.product(&cos);
    let h = r0 * checked_integral("H", &h_int, r0, a)?;
    let v = r0 * checked_integral("V", &v_int, r0, a)?;
    let t = r0 * r0 * checked_integral("T (t_rt)", t_rt, r0, a)? + r0 * checked_integral("T (m_rrt)", m_rrt, r0, a)?;
    Ok((h, v, t))
}

pub fn resultant_on_arc(sol: &EigenSolution, amp_index: usize, r0: f64) -> Result<(f64, f64, f64)> {
    resultant_on_arc_of(&FieldSet::for_solution(sol, amp_index)?, sol.case.half_angle, r0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub r0: f64,
    pub h: f64,
    pub v: f64,
    pub t: f64,
    pub edge: CornerForces,
    pub sum_fx: f64,
    pub sum_fy: f64,
    pub sum_m: f64,
    /// `|H| + |V| + |T|/r0 + Σ|E|`.
    pub scale: f64,
    pub pass: bool,
}

pub fn check_equilibrium_of(fs: &FieldSet, a: f64, r0: f64) -> Result<EquilibriumReport> {
    let (h, v, t) = resultant_on_arc_of(fs, a, r0)?;
    let edge = edge_forces_of(fs, a, r0)?;
    let corners = [(edge.e_r_a, edge.e_t_a, a), (edge.e_r_b, edge.e_t_b, -a)];
    let sum_fx = h + corners.iter().map(|(er, et, th)| er * th.cos() - et * th.sin()).sum::<f64>();
    let sum_fy = v + corners.iter().map(|(er, et, th)| er * th.sin() + et * th.cos()).sum::<f64>();
    let sum_m = t + r0 * (edge.e_t_a + edge.e_t_b);
    let scale = h.abs() + v.abs() + t.abs() / r0 + edge.abs_sum();
    let pass = [sum_fx, sum_fy, sum_m].iter().all(|s| s.abs() <= BALANCE_TOL * scale);
    Ok(EquilibriumReport { r0, h, v, t, edge, sum_fx, sum_fy, sum_m, scale, pass })
}

pub fn check_equilibrium(sol: &EigenSolution, amp_index: usize, r0: f64) -> Result<EquilibriumReport> {
    check_equilibrium_of(&FieldSet::for_solution(sol, amp_index)?, sol.case.half_angle, r0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{eigenfield, DisplacementField};
    use crate::fields::{crack_reference_series, CrackMode};
    use crate::model::{MaterialParams, Mode, WedgeCase};
    use std::f64::consts::PI;

    fn crack_fields(mode: CrackMode, amps: &[f64], nu: f64) -> FieldSet {
        let m = MaterialParams::nondimensional(nu);
        let refs = crack_reference_series(mode, amps, &m).unwrap();
        let get = |n: &str| refs.iter().find(|(k, _)| *k == n).unwrap().1.clone();
        FieldSet::from_displacement(&DisplacementField::Plane { u_r: get("u_r"), u_t: get("u_t") }, &m)
    }

    #[test]
    fn geometry_matches_the_corner_table() {
        let g = CornerGeometry::new(PI);
        assert_eq!(g.a.k_plus, [0.0, 1.0]);
        assert_eq!(g.a.k_minus, [-1.0, 0.0]);
        assert_eq!(g.b.n_plus, [0.0, -1.0]);
        assert_eq!(g.b.n_minus, [1.0, 0.0]);
        assert_eq!(g.b.k_plus, [1.0, 0.0]);
        assert_eq!(g.b.k_minus, [0.0, 1.0]);
    }

    #[test]
    fn mode_i_corner_force_value() {
        let fs = crack_fields(CrackMode::I, &[0.0, 0.0, 1.0, 0.0], 0.3);
        let e = edge_forces_of(&fs, PI, 1.0).unwrap();
        let want = -12.0 * (27.0 - 7.2) / (41.0 - 9.6);
        assert!((e.e_r_a - want).abs() < 1e-12 * want.abs());
        assert!((e.e_r_b - want).abs() < 1e-12 * want.abs());
        assert!(e.e_t_a.abs() < 1e-12 && e.e_t_b.abs() < 1e-12);
    }

    #[test]
    fn crack_sectors_balance() {
        for (mode, amps) in [(CrackMode::I, [0.0, 0.0, 0.8, -0.3]), (CrackMode::II, [0.0, 0.5, 0.9, 0.0])] {
            let amps = &amps[..mode.amplitude_names().len()];
            let fs = crack_fields(mode, amps, 0.27);
            for r0 in [0.1, 1.0] {
                let rep = check_equilibrium_of(&fs, PI, r0).unwrap();
                assert!(rep.pass, "{mode} {rep:?}");
                if mode == CrackMode::I {
                    assert!(rep.v.abs() < 1e-12 * rep.scale && rep.t.abs() < 1e-12 * rep.scale);
                } else {
                    assert!(rep.h.abs() < 1e-12 * rep.scale);
                    assert!(rep.edge.e_r_a.abs() < 1e-12 * rep.scale);
                }
            }
        }
    }

    #[test]
    fn general_notch_balances() {
        let case = WedgeCase::new(2.0, Mode::PlaneSym);
        let m = MaterialParams::default();
        let p = crate::eigensolver::smallest_exponents(&case, m.nu).unwrap().p;
        let sol = eigenfield(&case, &m, p).unwrap();
        for r0 in [0.01, 0.1, 1.0, 10.0] {
            let rep = check_equilibrium(&sol, 0, r0).unwrap();
            assert!(rep.pass, "{rep:?}");
            assert!(rep.sum_fy.abs() < 1e-12 * rep.scale);
        }
    }

    #[test]
    fn zero_field_has_zero_resultants() {
        let fs = FieldSet::from_displacement(&DisplacementField::zero(Mode::PlaneSym), &MaterialParams::default());
        assert_eq!(resultant_on_arc_of(&fs, 2.0, 1.0).unwrap(), (0.0, 0.0, 0.0));
        assert!(check_equilibrium_of(&fs, 2.0, 1.0).unwrap().pass);
    }

    #[test]
    fn quadrature_integrates_trig_exactly() {
        let (q, _) = gauss_legendre_composite(|t| (2.5 * t).cos(), -PI, PI);
        let exact = 2.0 * (2.5 * PI).sin() / 2.5;
        assert!((q - exact).abs() < 1e-13);
    }

    #[test]
    fn bad_inputs_rejected() {
        let fs = FieldSet::from_displacement(&DisplacementField::zero(Mode::AntiplaneOdd), &MaterialParams::default());
        assert!(edge_forces_of(&fs, PI, 1.0).is_err());
        let fs = FieldSet::from_displacement(&DisplacementField::zero(Mode::PlaneSym), &MaterialParams::default());
        assert!(matches!(resultant_on_arc_of(&fs, PI, 0.0), Err(NotchError::OutOfRange { .. })));
    }
}
