use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    use gradnotch::gradnotch as module;
    pyo3::append_to_inittab!(module);
    Python::attach(|py| {
        let locals = PyDict::new(py);
        locals.set_item("gn", py.import("gradnotch").unwrap()).unwrap();
        f(py, &locals);
    });
}

fn eval(py: Python<'_>, locals: &Bound<'_, PyDict>, code: &str) -> f64 {
    let code = std::ffi::CString::new(code).unwrap();
    py.eval(&code, None, Some(locals)).unwrap().extract().unwrap()
}

#[test]
fn module_round_trip() {
    with_module(|py, l| {
        assert!((eval(py, l, "gn.smallest_exponent('ap', 180.0)") - 1.5).abs() < 1e-9);
        assert_eq!(eval(py, l, "float(gn.Eigenfield('ps-sym', 180.0).nullity)"), 2.0);
        let t = eval(py, l, "gn.crack_fields('III', [0.0, 1.0], 1.0, 0.0)['t_tz']");
        assert!((t - 1.5).abs() < 1e-12);
        let raised = eval(py, l, "float(not gn.run_suite('halfspace', 0)[0])");
        assert_eq!(raised, 0.0);
        let code = std::ffi::CString::new("gn.Eigenfield('ap', 30.0)").unwrap();
        let e = py.eval(&code, None, Some(l)).unwrap_err();
        assert!(e.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}
