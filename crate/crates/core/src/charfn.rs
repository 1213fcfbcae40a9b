//! Characteristic (eigenvalue) functions in closed form.
//!
//! The bracket forms drop the polynomial prefactors `(p-1)^4 (p-2)^2`
//! (plane) and `(p-1)^2 (p-2)` (anti-plane); roots are searched on these.

use serde::{Deserialize, Serialize};

use crate::model::{Mode, WedgeCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CharKind {
    PlaneSymBracket,
    PlaneAntiBracket,
    AntiplaneBracket,
    PlaneSymFull,
    PlaneAntiFull,
    AntiplaneFull,
}

impl CharKind {
    pub fn bracket(mode: Mode) -> Self {
        match mode {
            Mode::PlaneSym => CharKind::PlaneSymBracket,
            Mode::PlaneAnti => CharKind::PlaneAntiBracket,
            Mode::AntiplaneOdd => CharKind::AntiplaneBracket,
        }
    }

    pub fn full(mode: Mode) -> Self {
        match mode {
            Mode::PlaneSym => CharKind::PlaneSymFull,
            Mode::PlaneAnti => CharKind::PlaneAntiFull,
            Mode::AntiplaneOdd => CharKind::AntiplaneFull,
        }
    }

    pub fn eval(self, p: f64, a: f64, nu: f64) -> f64 {
        match self {
            CharKind::PlaneSymBracket => char_plane_sym(p, a, nu),
            CharKind::PlaneAntiBracket => char_plane_anti(p, a, nu),
            CharKind::AntiplaneBracket => char_antiplane(p, a),
            CharKind::PlaneSymFull => prefactor(Mode::PlaneSym, p) * char_plane_sym(p, a, nu),
            CharKind::PlaneAntiFull => prefactor(Mode::PlaneAnti, p) * char_plane_anti(p, a, nu),
            CharKind::AntiplaneFull => prefactor(Mode::AntiplaneOdd, p) * char_antiplane(p, a),
        }
    }
}

/// `s = +1` symmetric, `-1` anti-symmetric.
fn plane_bracket(p: f64, a: f64, nu: f64, s: f64) -> f64 {
    let q = p - 1.0;
    let inner = 2.0 * q * ((2.0 * q * a).cos() + s * ((4.0 * a).cos() - 1.0))
        - (p - 2.0) * (2.0 * (p + 1.0) * a).cos()
        - p * (2.0 * (p - 3.0) * a).cos();
    q * inner + s * 2.0 * (5.0 - 4.0 * nu) * (1.0 - (4.0 * q * a).cos())
}

fn plane_bracket_dp(p: f64, a: f64, nu: f64, s: f64) -> f64 {
    let q = p - 1.0;
    let inner = 2.0 * q * ((2.0 * q * a).cos() + s * ((4.0 * a).cos() - 1.0))
        - (p - 2.0) * (2.0 * (p + 1.0) * a).cos()
        - p * (2.0 * (p - 3.0) * a).cos();
    let inner_dp = 2.0 * ((2.0 * q * a).cos() + s * ((4.0 * a).cos() - 1.0))
        - 4.0 * a * q * (2.0 * q * a).sin()
        - (2.0 * (p + 1.0) * a).cos()
        + 2.0 * a * (p - 2.0) * (2.0 * (p + 1.0) * a).sin()
        - (2.0 * (p - 3.0) * a).cos()
        + 2.0 * a * p * (2.0 * (p - 3.0) * a).sin();
    inner + q * inner_dp + s * 2.0 * (5.0 - 4.0 * nu) * 4.0 * a * (4.0 * q * a).sin()
}

pub fn char_plane_sym(p: f64, a: f64, nu: f64) -> f64 {
    plane_bracket(p, a, nu, 1.0)
}

pub fn char_plane_anti(p: f64, a: f64, nu: f64) -> f64 {
    plane_bracket(p, a, nu, -1.0)
}

pub fn char_antiplane(p: f64, a: f64) -> f64 {
    (p - 1.0) * (2.0 * a).sin() + 3.0 * (2.0 * (p - 1.0) * a).sin()
}

/// Bracket function of the mode.
pub fn bracket(p: f64, case: &WedgeCase, nu: f64) -> f64 {
    let a = case.half_angle;
    match case.mode {
        Mode::PlaneSym => char_plane_sym(p, a, nu),
        Mode::PlaneAnti => char_plane_anti(p, a, nu),
        Mode::AntiplaneOdd => char_antiplane(p, a),
    }
}

/// Analytic `d/dp` of [`bracket`].
pub fn bracket_dp(p: f64, case: &WedgeCase, nu: f64) -> f64 {
    let a = case.half_angle;
    match case.mode {
        Mode::PlaneSym => plane_bracket_dp(p, a, nu, 1.0),
        Mode::PlaneAnti => plane_bracket_dp(p, a, nu, -1.0),
        Mode::AntiplaneOdd => (2.0 * a).sin() + 6.0 * a * (2.0 * (p - 1.0) * a).cos(),
    }
}

pub fn prefactor(mode: Mode, p: f64) -> f64 {
    let (q, d) = (p - 1.0, p - 2.0);
    if mode.is_plane() {
        q.powi(4) * d * d
    } else {
        q * q * d
    }
}

/// Bracket times the polynomial prefactor.
pub fn char_full(p: f64, case: &WedgeCase, nu: f64) -> f64 {
    prefactor(case.mode, p) * bracket(p, case, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn crack_roots_at_half_integers() {
        assert!(char_plane_sym(1.5, PI, 0.3).abs() < 1e-12);
        assert!(char_plane_anti(1.5, PI, 0.3).abs() < 1e-12);
        assert!(char_antiplane(1.5, PI).abs() < 1e-12);
    }

    #[test]
    fn p_one_is_a_bracket_root() {
        assert_eq!(char_plane_sym(1.0, 2.0, 0.25), 0.0);
        assert_eq!(char_plane_anti(1.0, 2.5, 0.4), 0.0);
        assert_eq!(char_antiplane(1.0, 2.0), 0.0);
    }

    #[test]
    fn half_space_roots_at_integers() {
        assert!(char_plane_sym(2.0, FRAC_PI_2, 0.3).abs() < 1e-12);
        assert!(char_plane_anti(2.0, FRAC_PI_2, 0.1).abs() < 1e-12);
    }

    #[test]
    fn full_form_vanishes_at_prefactor_roots() {
        for mode in Mode::ALL {
            let case = WedgeCase::new(2.2, mode);
            assert_eq!(char_full(1.0, &case, 0.3), 0.0);
            assert_eq!(char_full(2.0, &case, 0.3), 0.0);
        }
        assert!(char_full(1.5, &WedgeCase::crack(Mode::PlaneSym), 0.3).abs() < 1e-12);
    }

    #[test]
    fn antiplane_root_near_three_quarter_pi() {
        // bisection on (1.5, 2) as an independent oracle
        let a = 0.75 * PI;
        let (mut lo, mut hi) = (1.5, 2.0);
        assert!(char_antiplane(lo, a) * char_antiplane(hi, a) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if char_antiplane(lo, a) * char_antiplane(mid, a) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!(lo > 1.6 && lo < 1.65);
        assert!(char_antiplane(lo, a).abs() < 1e-9);
    }

    #[test]
    fn crack_reduction_on_a_dense_sample() {
        let nu = 0.3;
        for i in 0..1000 {
            let p = 1.0 + 3.0 * i as f64 / 999.0;
            let want = 2.0 * (5.0 - 4.0 * nu) * (1.0 - (4.0 * PI * p).cos());
            let scale = 1.0 + want.abs();
            assert!((char_plane_sym(p, PI, nu) - want).abs() < 1e-12 * scale, "p={p}");
            assert!((char_plane_anti(p, PI, nu) + want).abs() < 1e-12 * scale, "p={p}");
            let ap = 3.0 * (2.0 * PI * p).sin();
            assert!((char_antiplane(p, PI) - ap).abs() < 1e-12 * (1.0 + ap.abs()));
        }
    }

    #[test]
    fn half_space_reduction() {
        let nu = 0.25;
        for i in 0..200 {
            let p = 1.0 + 3.0 * i as f64 / 199.0;
            let want = 2.0 * (5.0 - 4.0 * nu) * (1.0 - (2.0 * PI * p).cos());
            assert!((char_plane_sym(p, FRAC_PI_2, nu) - want).abs() < 1e-10);
            assert!((char_plane_anti(p, FRAC_PI_2, nu) + want).abs() < 1e-10);
            assert!((char_antiplane(p, FRAC_PI_2) + 3.0 * (PI * p).sin()).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn derivative_matches_central_difference(p in 1.0..4.0f64, a in FRAC_PI_2..PI, nu in 0.0..0.49f64) {
            let h = 1e-6;
            for mode in Mode::ALL {
                let case = WedgeCase::new(a, mode);
                let fd = (bracket(p + h, &case, nu) - bracket(p - h, &case, nu)) / (2.0 * h);
                let an = bracket_dp(p, &case, nu);
                prop_assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "{mode} {fd} {an}");
            }
        }

        #[test]
        fn nu_enters_through_one_additive_term(p in 1.0..4.0f64, a in FRAC_PI_2..PI, n1 in 0.0..0.49f64, n2 in 0.0..0.49f64) {
            let g = 1.0 - (4.0 * (p - 1.0) * a).cos();
            let ds = char_plane_sym(p, a, n1) - char_plane_sym(p, a, n2);
            let da = char_plane_anti(p, a, n1) - char_plane_anti(p, a, n2);
            prop_assert!((ds - 8.0 * (n2 - n1) * g).abs() < 1e-11);
            prop_assert!((da + 8.0 * (n2 - n1) * g).abs() < 1e-11);
        }

        #[test]
        fn exact_antisymmetric_branch(a in FRAC_PI_2..PI, nu in 0.0..0.49f64) {
            let p = 1.0 + PI / (2.0 * a);
            prop_assert!(char_plane_anti(p, a, nu).abs() < 1e-11);
        }
    }
}
