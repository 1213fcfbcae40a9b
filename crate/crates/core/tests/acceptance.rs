//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so that the report prints in order; exits nonzero on any failure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use notch_core::basis::{basis_fields, bc_matrix, eigenfield, DisplacementField};
use notch_core::eigensolver::{angle_grid, find_roots, smallest_exponents, sweep, RootScanOptions};
use notch_core::equilibrium::{check_equilibrium_of, edge_forces_of};
use notch_core::error::NotchError;
use notch_core::fields::{crack_reference_series, CrackMode, FieldSet};
use notch_core::model::{MaterialParams, Mode, PolarPoint, WedgeCase};
use notch_core::series::{PolarSeries, Term};
use notch_core::verify::{
    bc_residual, crack_oracle_error, energy_scaling, energy_scaling_of, fd_spot_check, pde_residual,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Criterion = fn(&mut ChaCha8Rng) -> Result<Outcome, NotchError>;

/// Independent (a, ν) draw: a ∈ (π/2, π), ν ∈ [0, 0.49].
fn random_case(rng: &mut ChaCha8Rng, mode: Mode) -> (WedgeCase, MaterialParams) {
    let a = rng.random_range(FRAC_PI_2..PI);
    let nu = rng.random_range(0.0..=0.49);
    (WedgeCase::new(a, mode), MaterialParams::nondimensional(nu))
}

fn random_points(rng: &mut ChaCha8Rng, a: f64, n: usize) -> Vec<PolarPoint> {
    (0..n).map(|_| PolarPoint::new(rng.random_range(0.2..3.0), rng.random_range(-a..=a))).collect()
}

fn bracket_roots(case: &WedgeCase, nu: f64) -> Result<Vec<f64>, NotchError> {
    Ok(find_roots(case, nu, &RootScanOptions::default())?.values().into_iter().filter(|p| *p > 1.0).collect())
}

fn crack_limit(_: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for mode in [Mode::PlaneSym, Mode::PlaneAnti] {
        for nu in [0.0, 0.25, 0.49] {
            worst = worst.max((smallest_exponents(&WedgeCase::crack(mode), nu)?.p - 1.5).abs());
        }
    }
    worst = worst.max((smallest_exponents(&WedgeCase::crack(Mode::AntiplaneOdd), 0.3)?.p - 1.5).abs());
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome::new(worst <= 1e-9 && secs < 1.0, format!("max |p - 1.5| = {worst:.2e}, {secs:.3} s")))
}

fn halfspace_limit(_: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let mut first = 0.0_f64;
    let mut next = 0.0_f64;
    for mode in Mode::ALL {
        for nu in [0.0, 0.3, 0.49] {
            let v = bracket_roots(&WedgeCase::half_space(mode), nu)?;
            first = first.max((v[0] - 2.0).abs());
            if mode.is_plane() {
                let n = v.iter().copied().find(|p| *p > 2.0 + 1e-6).unwrap_or(f64::NAN);
                next = next.max((n - 3.0).abs());
            }
        }
    }
    let pass = first <= 1e-9 && next <= 1e-9;
    Ok(Outcome::new(pass, format!("max |p - 2| = {first:.2e}, max |p_next - 3| = {next:.2e}")))
}

fn figure_sweep(_: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let angles = angle_grid(90.0, 180.0, 1.0)?;
    let mut pass = true;
    let mut notes = Vec::new();
    for mode in Mode::ALL {
        let rows = sweep(mode, &MaterialParams::default(), &angles, &RootScanOptions::default())?;
        let decreasing = rows.windows(2).all(|w| w[1].p < w[0].p);
        let e90 = (rows[0].exp_total + 1.0).abs();
        let e180 = (rows[rows.len() - 1].exp_total + 1.5).abs();
        // roots are resolved to 1e-9, so the endpoints may sit that far outside
        let outside =
            rows.iter().map(|r| (0.5 - r.exp_monopolar).max(r.exp_monopolar - 1.0).max(0.0)).fold(0.0, f64::max);
        let ok = rows.len() == 91 && decreasing && e90 <= 1e-6 && e180 <= 1e-6 && outside <= 1e-9;
        pass &= ok;
        notes.push(format!("{mode}: dec={decreasing} end=({e90:.1e},{e180:.1e})"));
    }
    Ok(Outcome::new(pass, notes.join("; ")))
}

fn null_space_structure(_: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let mut pass = true;
    let mut notes = Vec::new();
    for mode in [Mode::PlaneSym, Mode::PlaneAnti] {
        for nu in [0.0, 0.3, 0.49] {
            let case = WedgeCase::crack(mode);
            let n = eigenfield(&case, &MaterialParams::nondimensional(nu), smallest_exponents(&case, nu)?.p)?.nullity;
            pass &= n == 2;
            if nu == 0.3 {
                notes.push(format!("{mode} nullity {n}"));
            }
        }
    }
    let sol = eigenfield(&WedgeCase::crack(Mode::AntiplaneOdd), &MaterialParams::default(), 1.5)?;
    let ratio = sol.amplitudes[0][0] / sol.amplitudes[0][1];
    let err = (ratio - 5.0 / 3.0).abs();
    pass &= sol.nullity == 1 && err <= 1e-9;
    notes.push(format!("ap nullity {} D1/D2 - 5/3 = {err:.1e}", sol.nullity));
    Ok(Outcome::new(pass, notes.join("; ")))
}

fn bc_residuals(rng: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let mut worst = 0.0_f64;
    let mut fields = 0;
    for mode in Mode::ALL {
        for _ in 0..10 {
            let (case, m) = random_case(rng, mode);
            for p in bracket_roots(&case, m.nu)? {
                let sol = eigenfield(&case, &m, p)?;
                fields += sol.nullity;
                worst = worst.max(bc_residual(&sol)?.iter().map(|x| x.1).fold(0.0, f64::max));
            }
        }
    }
    Ok(Outcome::new(worst < 1e-8, format!("{fields} eigenfields, worst relative residual {worst:.2e}")))
}

fn pde_residuals(rng: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let mut leading = 0.0_f64;
    let mut fd = 0.0_f64;
    for mode in Mode::ALL {
        for _ in 0..10 {
            let (case, m) = random_case(rng, mode);
            let root = smallest_exponents(&case, m.nu)?.p;
            // members solve the field equations for any exponent, root or not
            for p in [root, rng.random_range(1.05..3.95)] {
                for member in basis_fields(&case, p, m.nu)? {
                    leading = leading.max(pde_residual(&member, &m).leading_rel());
                }
            }
            let sol = eigenfield(&case, &m, root)?;
            let pts = random_points(rng, case.half_angle, 10);
            fd = fd.max(fd_spot_check(&sol.fields[0], &m, &pts));
        }
    }
    // central differences with h = 1e-5 r: truncation ~1e-10, rounding ~1e-6
    let pass = leading < 1e-12 && fd < 1e-4;
    Ok(Outcome::new(pass, format!("leading {leading:.2e}, finite-difference {fd:.2e}")))
}

fn zero_set_agreement(rng: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let mut on = 0.0_f64;
    let mut off = f64::INFINITY;
    for mode in Mode::ALL {
        for _ in 0..5 {
            let (case, m) = random_case(rng, mode);
            let roots = bracket_roots(&case, m.nu)?;
            for &p in &roots {
                on = on.max(bc_matrix(&case, p, m.nu)?.sigma_ratio());
            }
            // non-roots drawn away from every root and from the exceptional
            // exponents p = 1, 2 where members degenerate
            let mut excluded = roots.clone();
            excluded.extend([1.0, 2.0, 7.0 - 8.0 * m.nu]);
            let mut drawn = 0;
            while drawn < 50 {
                let p = rng.random_range(1.05..3.95);
                if excluded.iter().any(|r| (p - r).abs() < 0.05) {
                    continue;
                }
                off = off.min(bc_matrix(&case, p, m.nu)?.sigma_ratio());
                drawn += 1;
            }
        }
    }
    Ok(Outcome::new(on < 1e-6 && off > 1e-4, format!("max at roots {on:.2e}, min off roots {off:.2e}")))
}

fn crack_oracles(rng: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let mut notes = Vec::new();
    let mut worst = 0.0_f64;
    for cm in [CrackMode::I, CrackMode::II, CrackMode::III] {
        let nu = rng.random_range(0.0..0.49);
        let m = MaterialParams::new(rng.random_range(0.5..2.0), nu, rng.random_range(0.5..2.0))?;
        let pts = random_points(rng, PI, 100);
        let e = crack_oracle_error(cm, &m, rng, &pts)?;
        worst = worst.max(e);
        notes.push(format!("{cm} {e:.1e}"));
    }
    Ok(Outcome::new(worst <= 1e-10, notes.join(", ")))
}

/// `c ∂_r` applied term by term: `k r^{k-1}` per `r^k` term.
fn c_dr(s: &PolarSeries, c: f64) -> PolarSeries {
    PolarSeries::from_terms(s.terms().iter().map(|t| Term::new(c * t.r_exp * t.coef, t.r_exp - 1.0, t.freq, t.kind)))
}

fn constitutive_consistency(rng: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let mut worst = 0.0_f64;
    let mut fields = 0;
    for mode in Mode::ALL {
        for _ in 0..5 {
            let (case, _) = random_case(rng, mode);
            let m = MaterialParams::new(1.0, rng.random_range(0.0..0.49), rng.random_range(0.1..3.0))?;
            for p in bracket_roots(&case, m.nu)? {
                let sol = eigenfield(&case, &m, p)?;
                for k in 0..sol.nullity {
                    let fs = FieldSet::for_eigenpart(&sol, k)?;
                    fields += 1;
                    let pairs: &[(&str, &str)] = if mode.is_plane() {
                        &[("m_rrr", "tau_rr"), ("m_rrt", "tau_rt"), ("m_rtt", "tau_tt")]
                    } else {
                        &[("m_rrz", "tau_rz"), ("m_rtz", "tau_tz")]
                    };
                    let scale = pairs.iter().map(|(mm, _)| fs.series(mm).max_abs_coef()).fold(0.0, f64::max);
                    for (mm, tt) in pairs {
                        let d = fs.series(mm).max_coef_diff(&c_dr(fs.series(tt), m.c));
                        worst = worst.max(d / scale);
                    }
                }
            }
        }
    }
    Ok(Outcome::new(worst <= 1e-12, format!("{fields} eigenfields, worst {worst:.2e}")))
}

fn crack_displacement(cm: CrackMode, amps: &[f64], m: &MaterialParams) -> Result<FieldSet, NotchError> {
    let s = crack_reference_series(cm, amps, m)?;
    let get = |n: &str| s.iter().find(|(k, _)| *k == n).map(|x| x.1.clone()).unwrap_or_default();
    Ok(FieldSet::from_displacement(&DisplacementField::Plane { u_r: get("u_r"), u_t: get("u_t") }, m))
}

fn equilibrium(rng: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let m = MaterialParams::default();
    let mut worst = 0.0_f64;
    let mut check = |fs: &FieldSet, a: f64| -> Result<(), NotchError> {
        for r0 in [0.1, 1.0] {
            let rep = check_equilibrium_of(fs, a, r0)?;
            worst = worst.max(rep.sum_fx.abs().max(rep.sum_fy.abs()).max(rep.sum_m.abs()) / rep.scale);
        }
        Ok(())
    };
    for _ in 0..5 {
        let (a1, a2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        check(&crack_displacement(CrackMode::I, &[0.0, 0.0, a1, a2], &m)?, PI)?;
        check(&crack_displacement(CrackMode::II, &[0.0, a1, a2], &m)?, PI)?;
    }
    let case = WedgeCase::from_degrees(114.6, Mode::PlaneSym);
    let sol = eigenfield(&case, &m, smallest_exponents(&case, m.nu)?.p)?;
    let coeffs: Vec<f64> = (0..sol.nullity).map(|_| rng.random_range(-1.0..1.0)).collect();
    check(&FieldSet::from_displacement(&sol.combination(&coeffs)?, &m), case.half_angle)?;

    // hand evaluation of the closed-form corner force at ν = 0.3:
    // E_r = -12 μc (27 - 24ν) / (41 - 32ν) = -237.6 / 31.4
    let want = -237.6 / 31.4;
    let e = edge_forces_of(&crack_displacement(CrackMode::I, &[0.0, 0.0, 1.0, 0.0], &m)?, PI, 1.0)?;
    let rel = ((e.e_r_a - want) / want).abs();
    let pass = worst < 1e-8 && rel <= 1e-5 && e.e_r_a == e.e_r_b;
    Ok(Outcome::new(pass, format!("worst balance {worst:.2e} x scale, E_r^A = {:.6} (rel {rel:.1e})", e.e_r_a)))
}

fn energy_criterion(_: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let m = MaterialParams::default();
    let mut worst = 0.0_f64;
    for mode in Mode::ALL {
        for case in [WedgeCase::crack(mode), WedgeCase::half_space(mode)] {
            let p = smallest_exponents(&case, m.nu)?.p;
            let sol = eigenfield(&case, &m, p)?;
            for k in 0..sol.nullity {
                worst = worst.max((energy_scaling(&sol, k, 1e-4)? - (2.0 * p - 2.0)).abs());
            }
        }
    }
    let mut diverges = true;
    for mode in Mode::ALL {
        let case = WedgeCase::crack(mode);
        for member in basis_fields(&case, 0.5, m.nu)? {
            let fs = FieldSet::from_displacement(&member, &m);
            diverges &= matches!(energy_scaling_of(&fs, PI, 1e-2), Err(NotchError::DivergentEnergy { .. }));
        }
    }
    let pass = worst <= 1e-6 && diverges;
    Ok(Outcome::new(pass, format!("max |exponent - (2p-2)| = {worst:.2e}, p = 0.5 rejected: {diverges}")))
}

fn zero_total_stress(_: &mut ChaCha8Rng) -> Result<Outcome, NotchError> {
    let mut worst = 0.0_f64;
    let mut fields = 0;
    // λ/μ grows without bound as ν → 1/2 and rounding in the O(λ) stress
    // entries then exceeds an absolute 1e-14; see the near-incompressible
    // integration test for that regime
    for mode in Mode::ALL {
        for nu in [0.0, 0.25, 0.3, 0.4] {
            let sol = eigenfield(&WedgeCase::half_space(mode), &MaterialParams::nondimensional(nu), 2.0)?;
            let names: &[&str] = if mode.is_plane() { &["t_tr", "t_tt"] } else { &["t_tz"] };
            for k in 0..sol.nullity {
                let fs = FieldSet::for_eigenpart(&sol, k)?;
                fields += 1;
                for n in names {
                    worst = worst.max(fs.series(n).max_abs_coef());
                }
            }
        }
    }
    Ok(Outcome::new(fields > 0 && worst < 1e-14, format!("{fields} eigenfields, largest coefficient {worst:.2e}")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 12] = [
        ("crack limit p = 1.5", crack_limit),
        ("half-space limit p = 2, next plane p = 3", halfspace_limit),
        ("exponent sweep 90..180 deg", figure_sweep),
        ("crack null-space structure", null_space_structure),
        ("traction-free faces", bc_residuals),
        ("field-equation residuals", pde_residuals),
        ("determinant zero set", zero_set_agreement),
        ("crack closed-form fields", crack_oracles),
        ("m = c dr tau", constitutive_consistency),
        ("corner-force equilibrium", equilibrium),
        ("bounded-energy exponent", energy_criterion),
        ("zero total stress at p = 2", zero_total_stress),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let out = f(&mut rng).unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        failed += usize::from(!out.pass);
        println!("criterion {:>2} {} {name}: {}", i + 1, if out.pass { "PASS" } else { "FAIL" }, out.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
