//! Python bindings: `import gradnotch`.

use std::collections::BTreeMap;

use notch_core::basis::{eigenfield, EigenSolution};
use notch_core::eigensolver::{
    admissible_eigenvalues, angle_grid, smallest_exponents, sweep as sweep_angles, RootScanOptions,
};
use notch_core::equilibrium::check_equilibrium_of;
use notch_core::fields::{crack_reference_fields, CrackMode, FieldSet};
use notch_core::model::{MaterialParams, Mode, PolarPoint, WedgeCase};
use notch_core::verify::{bc_residual, energy_scaling, run_suite as run_core_suite, Suite};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(gradnotch, NotchError, PyValueError, "Invalid input or failed computation in gradnotch.");

fn err(e: notch_core::error::NotchError) -> PyErr {
    NotchError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(NotchError::new_err)
}

fn material(mu: f64, nu: f64, c: f64) -> PyResult<MaterialParams> {
    MaterialParams::new(mu, nu, c).map_err(err)
}

fn case(mode: &str, angle_deg: f64) -> PyResult<WedgeCase> {
    let case = WedgeCase::from_degrees(angle_deg, parse::<Mode>(mode)?);
    case.validate().map_err(err)?;
    Ok(case)
}

/// Candidate exponent with its null space.
#[pyclass(frozen, get_all, module = "gradnotch")]
pub struct Root {
    p: f64,
    kind: String,
    admissible: bool,
    nullity: usize,
    amplitudes: Vec<Vec<f64>>,
}

#[pymethods]
impl Root {
    fn __repr__(&self) -> String {
        format!("Root(p={}, kind='{}', nullity={})", self.p, self.kind, self.nullity)
    }
}

/// `p = 1` and every bracket root up to `p_max`, with null spaces.
#[pyfunction]
#[pyo3(signature = (mode, angle_deg, nu=0.3, p_max=4.0))]
fn eigenvalues(mode: &str, angle_deg: f64, nu: f64, p_max: f64) -> PyResult<Vec<Root>> {
    let case = case(mode, angle_deg)?;
    let mat = material(1.0, nu, 1.0)?;
    let opts = RootScanOptions::with_p_max(p_max);
    let stubs = admissible_eigenvalues(&case, nu, &opts).map_err(err)?;
    let kind = |k| serde_json::to_value(k).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    Ok(stubs
        .into_iter()
        .map(|s| {
            let (nullity, amplitudes) = match eigenfield(&case, &mat, s.p) {
                Ok(sol) => (sol.nullity, sol.amplitudes),
                Err(_) => (0, Vec::new()),
            };
            Root { p: s.p, kind: kind(s.kind), admissible: s.admissible, nullity, amplitudes }
        })
        .collect())
}

/// Smallest admissible exponent `p` at the given half-angle.
#[pyfunction]
#[pyo3(signature = (mode, angle_deg, nu=0.3))]
fn smallest_exponent(mode: &str, angle_deg: f64, nu: f64) -> PyResult<f64> {
    Ok(smallest_exponents(&case(mode, angle_deg)?, nu).map_err(err)?.p)
}

/// Rows `(angle_deg, p, exp_monopolar, exp_total)` from `start` to `stop`.
#[pyfunction]
#[pyo3(signature = (mode, start=90.0, stop=180.0, step=1.0, nu=0.3))]
fn sweep(mode: &str, start: f64, stop: f64, step: f64, nu: f64) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let angles = angle_grid(start, stop, step).map_err(err)?;
    let rows =
        sweep_angles(parse(mode)?, &material(1.0, nu, 1.0)?, &angles, &RootScanOptions::default()).map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.angle_deg, r.p, r.exp_monopolar, r.exp_total)).collect())
}

/// Eigenfunctions at one exponent (the smallest admissible one by default).
#[pyclass(frozen, module = "gradnotch")]
pub struct Eigenfield {
    sol: EigenSolution,
}

impl Eigenfield {
    fn field_set(&self, coeffs: Option<Vec<f64>>, p1: Option<Vec<f64>>) -> PyResult<FieldSet> {
        let mut sol = self.sol.clone();
        if let Some(c) = p1 {
            sol = sol.with_p1(c).map_err(err)?;
        }
        let coeffs = coeffs.unwrap_or_else(|| {
            let mut v = vec![0.0; sol.nullity];
            if let Some(first) = v.first_mut() {
                *first = 1.0;
            }
            v
        });
        let disp = sol.combination(&coeffs).map_err(err)?;
        Ok(FieldSet::from_displacement(&disp, &sol.material))
    }
}

#[pymethods]
impl Eigenfield {
    #[new]
    #[pyo3(signature = (mode, angle_deg, nu=0.3, p=None, mu=1.0, c=1.0))]
    fn new(mode: &str, angle_deg: f64, nu: f64, p: Option<f64>, mu: f64, c: f64) -> PyResult<Self> {
        let case = case(mode, angle_deg)?;
        let mat = material(mu, nu, c)?;
        let p = match p {
            Some(p) => p,
            None => smallest_exponents(&case, nu).map_err(err)?.p,
        };
        Ok(Self { sol: eigenfield(&case, &mat, p).map_err(err)? })
    }

    #[getter]
    fn p(&self) -> f64 {
        self.sol.p
    }

    #[getter]
    fn nullity(&self) -> usize {
        self.sol.nullity
    }

    #[getter]
    fn amplitudes(&self) -> Vec<Vec<f64>> {
        self.sol.amplitudes.clone()
    }

    #[getter]
    fn sigma_ratio(&self) -> f64 {
        self.sol.sigma_ratio
    }

    #[getter]
    fn half_angle(&self) -> f64 {
        self.sol.case.half_angle
    }

    /// Column names returned by `evaluate`.
    fn field_names(&self) -> PyResult<Vec<&'static str>> {
        Ok(self.field_set(None, None)?.names().to_vec())
    }

    /// All field quantities at `(r, theta)` for the eigenfunction combination
    /// `coeffs` (default: the first eigenfunction) plus an optional `p = 1` part.
    #[pyo3(signature = (r, theta, coeffs=None, p1=None))]
    fn evaluate(
        &self,
        r: f64,
        theta: f64,
        coeffs: Option<Vec<f64>>,
        p1: Option<Vec<f64>>,
    ) -> PyResult<BTreeMap<&'static str, f64>> {
        let fs = self.field_set(coeffs, p1)?;
        Ok(fs.eval(PolarPoint::new(r, theta)).into_iter().collect())
    }

    /// Largest relative traction residual on the faces, per condition.
    fn bc_residual(&self) -> PyResult<BTreeMap<&'static str, f64>> {
        Ok(bc_residual(&self.sol).map_err(err)?.into_iter().collect())
    }

    /// Measured `log2 U(2 r0) / U(r0)` of eigenfunction `index`.
    #[pyo3(signature = (index=0, r0=1e-4))]
    fn energy_exponent(&self, index: usize, r0: f64) -> PyResult<f64> {
        energy_scaling(&self.sol, index, r0).map_err(err)
    }

    /// Force and moment balance of the core `r < r0`.
    #[pyo3(signature = (r0=1.0, coeffs=None))]
    fn equilibrium<'py>(&self, py: Python<'py>, r0: f64, coeffs: Option<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
        let rep = check_equilibrium_of(&self.field_set(coeffs, None)?, self.sol.case.half_angle, r0).map_err(err)?;
        let d = PyDict::new(py);
        for (k, v) in [
            ("h", rep.h),
            ("v", rep.v),
            ("t", rep.t),
            ("e_r_a", rep.edge.e_r_a),
            ("e_t_a", rep.edge.e_t_a),
            ("e_r_b", rep.edge.e_r_b),
            ("e_t_b", rep.edge.e_t_b),
            ("sum_fx", rep.sum_fx),
            ("sum_fy", rep.sum_fy),
            ("sum_m", rep.sum_m),
            ("scale", rep.scale),
        ] {
            d.set_item(k, v)?;
        }
        d.set_item("pass", rep.pass)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Eigenfield(mode='{}', half_angle={}, p={}, nullity={})",
            self.sol.case.mode, self.sol.case.half_angle, self.sol.p, self.sol.nullity
        )
    }
}

/// Closed-form crack-tip fields. `amps`: I `[C1, C3, A1, A2]`,
/// II `[C2, B1, B2]`, III `[E, D]`.
#[pyfunction]
#[pyo3(signature = (mode, amps, r, theta, nu=0.3, mu=1.0, c=1.0))]
fn crack_fields(
    mode: &str,
    amps: Vec<f64>,
    r: f64,
    theta: f64,
    nu: f64,
    mu: f64,
    c: f64,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let cm: CrackMode = parse(mode)?;
    let vals = crack_reference_fields(cm, &amps, &material(mu, nu, c)?, PolarPoint::new(r, theta)).map_err(err)?;
    Ok(vals.into_iter().collect())
}

/// Runs a verification suite; returns `(passed, report_json)`.
#[pyfunction]
#[pyo3(signature = (suite="all", seed=0))]
fn run_suite(suite: &str, seed: u64) -> PyResult<(bool, String)> {
    let rep = run_core_suite(parse::<Suite>(suite)?, seed);
    let json = serde_json::to_string(&rep).map_err(|e| NotchError::new_err(e.to_string()))?;
    Ok((rep.pass, json))
}

#[pymodule]
pub fn gradnotch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("NotchError", m.py().get_type::<NotchError>())?;
    m.add_class::<Root>()?;
    m.add_class::<Eigenfield>()?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(smallest_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(crack_fields, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
