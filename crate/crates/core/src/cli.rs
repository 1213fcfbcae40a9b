//! `notch` command line: eigenvalue queries, angle sweeps, field grids,
//! equilibrium checks and the verification suite.
//!
//! Exit codes: 0 success, 1 usage error, 2 check failure.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::basis::{eigenfield_with_tol, DisplacementField, NULL_TOL};
use crate::eigensolver::{admissible_eigenvalues, angle_grid, sweep, RootScanOptions};
use crate::equilibrium::{check_equilibrium_of, EquilibriumReport};
use crate::error::NotchError;
use crate::fields::{crack_reference_series, CrackMode, FieldSet};
use crate::model::{MaterialParams, Mode, PolarPoint, WedgeCase};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "notch", version, about = "Asymptotic notch-tip fields in dipolar gradient elasticity")]
pub struct Cli {
    /// Shear modulus.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub mu: f64,
    /// Gradient coefficient (length squared).
    #[arg(long, global = true, default_value_t = 1.0)]
    pub c: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Admissible eigenvalues and null spaces as JSON.
    Eig(EigArgs),
    /// Smallest exponent over a range of angles as CSV.
    Sweep(SweepArgs),
    /// Field values on a polar grid as CSV.
    Field(FieldArgs),
    /// Force and moment balance of a small notch-tip core.
    Equilibrium(EquilibriumArgs),
    /// Run a verification suite.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct EigArgs {
    #[arg(long)]
    pub mode: Mode,
    #[arg(long, allow_negative_numbers = true)]
    pub angle_deg: f64,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, default_value_t = 4.0)]
    pub p_max: f64,
    /// Relative singular-value tolerance of the null space.
    #[arg(long, default_value_t = NULL_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub mode: Mode,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, default_value_t = 90.0)]
    pub from: f64,
    #[arg(long, default_value_t = 180.0)]
    pub to: f64,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    #[arg(long, default_value_t = 4.0)]
    pub p_max: f64,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long)]
    pub mode: Mode,
    #[arg(long, allow_negative_numbers = true)]
    pub angle_deg: f64,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, default_value_t = 4.0)]
    pub p_max: f64,
    /// Index into the root list printed by `eig` (0 is p = 1).
    #[arg(long)]
    pub eig_index: usize,
    /// Coefficients of the eigenfunctions, one per null vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub amps: Vec<f64>,
    /// Constants of the p = 1 part: `c1,c3`, `c2` or `e`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub with_p1: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 36)]
    pub theta_steps: usize,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

/// Loading selector of `equilibrium`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumMode {
    CrackI,
    CrackII,
    CrackIII,
    NotchSym,
    NotchAnti,
}

impl FromStr for EquilibriumMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(Self::CrackI),
            "II" => Ok(Self::CrackII),
            "III" | "III-na" => Ok(Self::CrackIII),
            "notch-sym" => Ok(Self::NotchSym),
            "notch-anti" => Ok(Self::NotchAnti),
            other => Err(format!("unknown mode '{other}' (expected I, II, III-na, notch-sym or notch-anti)")),
        }
    }
}

impl fmt::Display for EquilibriumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CrackI => "I",
            Self::CrackII => "II",
            Self::CrackIII => "III-na",
            Self::NotchSym => "notch-sym",
            Self::NotchAnti => "notch-anti",
        })
    }
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[arg(long)]
    pub mode: EquilibriumMode,
    /// Notch half-angle; cracks use 180.
    #[arg(long, allow_negative_numbers = true)]
    pub angle_deg: Option<f64>,
    /// Crack modes: `A1,A2` / `B1,B2` (or the full `C1,C3,A1,A2` / `C2,B1,B2`).
    /// Notch modes: coefficients of the eigenfunctions of the smallest root.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub amps: Vec<f64>,
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAIL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<NotchError> for CliError {
    fn from(e: NotchError) -> Self {
        match e {
            NotchError::NoRootFound { .. } | NotchError::QuadratureDisagreement { .. } => {
                CliError::Failed(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command. `Ok` carries the exit code of a command that ran
/// to completion (a failed check still completes).
pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Eig(a) => cmd_eig(cli, a, out),
        Command::Sweep(a) => cmd_sweep(cli, a, out),
        Command::Field(a) => cmd_field(cli, a, out),
        Command::Equilibrium(a) => cmd_equilibrium(cli, a, out),
        Command::Check(a) => cmd_check(a, out),
    }
}

fn material(cli: &Cli, nu: f64) -> CliResult<MaterialParams> {
    if !(0.0..0.5).contains(&nu) {
        return Err(CliError::Usage(format!("--nu {nu} is out of range (0 <= nu < 0.5)")));
    }
    Ok(MaterialParams::new(cli.mu, nu, cli.c)?)
}

fn check_angle(deg: f64) -> CliResult<()> {
    if !(90.0..=180.0).contains(&deg) {
        return Err(CliError::Usage(format!("angle {deg} is out of range (90 <= angle <= 180)")));
    }
    Ok(())
}

fn scan_options(p_max: f64) -> CliResult<RootScanOptions> {
    let opts = RootScanOptions::with_p_max(p_max);
    opts.validate()?;
    Ok(opts)
}

fn open_out<'a>(path: &PathBuf, stdout: &'a mut dyn Write) -> CliResult<Box<dyn Write + 'a>> {
    if path.as_os_str() == "-" {
        Ok(Box::new(stdout))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
}

/// JSON text with sorted keys and every float at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    // Value's map is a BTreeMap, so the round trip sorts the keys
    let v: Value = serde_json::to_value(value).expect("serializable");
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    v.serialize(&mut ser).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8")
}

fn cmd_eig(cli: &Cli, a: &EigArgs, out: &mut dyn Write) -> CliResult<i32> {
    check_angle(a.angle_deg)?;
    // anti-plane results do not depend on nu, but the material still needs one
    let nu = if a.mode.is_plane() { a.nu } else { a.nu.clamp(0.0, 0.49) };
    let mat = material(cli, nu)?;
    if !(a.tol > 0.0 && a.tol < 1.0) {
        return Err(CliError::Usage(format!("--tol {} is out of range (0 < tol < 1)", a.tol)));
    }
    let opts = scan_options(a.p_max)?;
    let case = WedgeCase::from_degrees(a.angle_deg, a.mode);
    let mut roots = Vec::new();
    for stub in admissible_eigenvalues(&case, nu, &opts)? {
        let mut entry = json!({
            "p": stub.p,
            "kind": stub.kind,
            "admissible": stub.admissible,
        });
        match eigenfield_with_tol(&case, &mat, stub.p, a.tol) {
            Ok(sol) => {
                entry["nullity"] = json!(sol.nullity);
                entry["amplitudes"] = json!(sol.amplitudes);
                entry["sigma_ratio"] = json!(sol.sigma_ratio);
            }
            Err(e) => {
                entry["nullity"] = json!(0);
                entry["amplitudes"] = json!([]);
                entry["note"] = json!(e.to_string());
            }
        }
        roots.push(entry);
    }
    let doc = json!({
        "case": {
            "mode": a.mode,
            "angle_deg": a.angle_deg,
            "half_angle": case.half_angle,
            "nu": mat.nu,
            "mu": mat.mu,
            "c": mat.c,
        },
        "roots": roots,
    });
    writeln!(out, "{}", to_json(&doc))?;
    Ok(EXIT_OK)
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs, out: &mut dyn Write) -> CliResult<i32> {
    check_angle(a.from)?;
    check_angle(a.to)?;
    let mat = material(cli, a.nu)?;
    let opts = scan_options(a.p_max)?;
    let angles = angle_grid(a.from, a.to, a.step)?;
    let rows = sweep(a.mode, &mat, &angles, &opts)?;
    let mut w = open_out(&a.out, out)?;
    writeln!(w, "angle_deg,nu,mode,p,exp_monopolar,exp_total")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.angle_deg),
            fmt_f64(r.nu),
            r.mode,
            fmt_f64(r.p),
            fmt_f64(r.exp_monopolar),
            fmt_f64(r.exp_total)
        )?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn cmd_field(cli: &Cli, a: &FieldArgs, out: &mut dyn Write) -> CliResult<i32> {
    check_angle(a.angle_deg)?;
    let nu = if a.mode.is_plane() { a.nu } else { a.nu.clamp(0.0, 0.49) };
    let mat = material(cli, nu)?;
    let opts = scan_options(a.p_max)?;
    if a.theta_steps == 0 {
        return Err(CliError::Usage("--theta-steps must be at least 1".into()));
    }
    if let Some(r) = a.r.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(CliError::Usage(format!("--r {r} is out of range (r > 0)")));
    }
    let case = WedgeCase::from_degrees(a.angle_deg, a.mode);
    let stubs = admissible_eigenvalues(&case, nu, &opts)?;
    let stub = stubs.get(a.eig_index).ok_or_else(|| {
        CliError::Usage(format!(
            "--eig-index {} is out of range ({} roots up to p = {})",
            a.eig_index,
            stubs.len(),
            a.p_max
        ))
    })?;
    let mut sol = eigenfield_with_tol(&case, &mat, stub.p, NULL_TOL)?;
    if a.amps.len() != sol.nullity {
        return Err(CliError::Usage(format!(
            "--amps has {} values but the eigenvalue p = {} has nullity {}",
            a.amps.len(),
            stub.p,
            sol.nullity
        )));
    }
    if let Some(p1) = &a.with_p1 {
        sol = sol.with_p1(p1.clone())?;
    }
    let fs = FieldSet::from_displacement(&sol.combination(&a.amps)?, &mat);

    let mut w = open_out(&a.out, out)?;
    writeln!(w, "r,theta,{}", fs.names().join(","))?;
    let half = case.half_angle;
    let n = a.theta_steps;
    for &r in &a.r {
        for i in 0..=n {
            // exact endpoints so that the face rows sit on θ = ±a
            let theta = if i == n { half } else { -half + 2.0 * half * i as f64 / n as f64 };
            let vals = fs.eval(PolarPoint::new(r, theta));
            let line: Vec<String> =
                [r, theta].into_iter().chain(vals.into_iter().map(|(_, v)| v)).map(fmt_f64).collect();
            writeln!(w, "{}", line.join(","))?;
        }
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn crack_field(cm: CrackMode, amps: &[f64], mat: &MaterialParams) -> CliResult<FieldSet> {
    let names = cm.amplitude_names();
    let p1 = cm.mode().p1_len();
    let full: Vec<f64> = if amps.len() == names.len() {
        amps.to_vec()
    } else if amps.len() == names.len() - p1 {
        std::iter::repeat_n(0.0, p1).chain(amps.iter().copied()).collect()
    } else {
        return Err(CliError::Usage(format!(
            "--amps for mode {cm} takes {} or {} values ({})",
            names.len() - p1,
            names.len(),
            names.join(",")
        )));
    };
    let series = crack_reference_series(cm, &full, mat)?;
    let get = |n: &str| series.iter().find(|(k, _)| *k == n).map(|(_, s)| s.clone()).expect("crack displacement");
    let disp = DisplacementField::Plane { u_r: get("u_r"), u_t: get("u_t") };
    Ok(FieldSet::from_displacement(&disp, mat))
}

fn cmd_equilibrium(cli: &Cli, a: &EquilibriumArgs, out: &mut dyn Write) -> CliResult<i32> {
    let mat = material(cli, a.nu)?;
    if !(a.r0 > 0.0 && a.r0.is_finite()) {
        return Err(CliError::Usage(format!("--r0 {} is out of range (r0 > 0)", a.r0)));
    }
    let (fs, half) = match a.mode {
        EquilibriumMode::CrackIII => {
            return Err(CliError::Usage(
                "mode III has no corner-force balance: the anti-plane problem carries no in-plane \
                 resultant and its edge forces act out of plane, so only I, II, notch-sym and notch-anti are supported"
                    .into(),
            ));
        }
        EquilibriumMode::CrackI | EquilibriumMode::CrackII => {
            if let Some(deg) = a.angle_deg {
                if deg != 180.0 {
                    return Err(CliError::Usage(format!("crack modes require --angle-deg 180 (got {deg})")));
                }
            }
            let cm = if a.mode == EquilibriumMode::CrackI { CrackMode::I } else { CrackMode::II };
            (crack_field(cm, &a.amps, &mat)?, std::f64::consts::PI)
        }
        EquilibriumMode::NotchSym | EquilibriumMode::NotchAnti => {
            let deg = a.angle_deg.ok_or_else(|| CliError::Usage("notch modes require --angle-deg".into()))?;
            check_angle(deg)?;
            let mode = if a.mode == EquilibriumMode::NotchSym { Mode::PlaneSym } else { Mode::PlaneAnti };
            let case = WedgeCase::from_degrees(deg, mode);
            let stubs = admissible_eigenvalues(&case, mat.nu, &RootScanOptions::default())?;
            let p = stubs
                .iter()
                .find(|s| s.p > 1.0 && s.admissible)
                .map(|s| s.p)
                .ok_or(NotchError::NoRootFound { p_min: 1.0, p_max: RootScanOptions::default().p_max })?;
            let sol = eigenfield_with_tol(&case, &mat, p, NULL_TOL)?;
            if a.amps.len() != sol.nullity {
                return Err(CliError::Usage(format!(
                    "--amps has {} values but the smallest root p = {p} has nullity {}",
                    a.amps.len(),
                    sol.nullity
                )));
            }
            (FieldSet::from_displacement(&sol.combination(&a.amps)?, &mat), case.half_angle)
        }
    };
    let rep = check_equilibrium_of(&fs, half, a.r0)?;
    write_equilibrium(a, &rep, out)?;
    Ok(if rep.pass { EXIT_OK } else { EXIT_FAIL })
}

fn write_equilibrium(a: &EquilibriumArgs, rep: &EquilibriumReport, out: &mut dyn Write) -> io::Result<()> {
    let e = &rep.edge;
    writeln!(out, "mode {} r0 = {}", a.mode, fmt_f64(rep.r0))?;
    writeln!(out, "H     = {}", fmt_f64(rep.h))?;
    writeln!(out, "V     = {}", fmt_f64(rep.v))?;
    writeln!(out, "T     = {}", fmt_f64(rep.t))?;
    writeln!(out, "E_r^A = {}  E_t^A = {}", fmt_f64(e.e_r_a), fmt_f64(e.e_t_a))?;
    writeln!(out, "E_r^B = {}  E_t^B = {}", fmt_f64(e.e_r_b), fmt_f64(e.e_t_b))?;
    writeln!(out, "sum Fx = {}", fmt_f64(rep.sum_fx))?;
    writeln!(out, "sum Fy = {}", fmt_f64(rep.sum_fy))?;
    writeln!(out, "sum M  = {}", fmt_f64(rep.sum_m))?;
    writeln!(out, "{}", if rep.pass { "PASS" } else { "FAIL" })?;
    writeln!(out, "{}", to_json(rep))
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> CliResult<i32> {
    let rep = run_suite(a.suite, a.seed);
    let failed = rep.failures().count();
    for c in &rep.checks {
        writeln!(
            out,
            "{} {} value={:.3e} threshold={:.1e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        )?;
    }
    writeln!(out, "suite {} seed {}: {} checks, {} failed", rep.suite, rep.seed, rep.checks.len(), failed)?;
    writeln!(out, "{}", to_json(&rep))?;
    Ok(if rep.pass { EXIT_OK } else { EXIT_FAIL })
}
