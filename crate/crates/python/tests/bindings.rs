use pyo3::prelude::*;
use pyo3::types::PyDict;

fn module(py: Python<'_>) -> Bound<'_, PyModule> {
    let m = PyModule::new(py, "statamoeba_py").unwrap();
    statamoeba_py::register(&m).unwrap();
    m
}

fn eval<'py>(py: Python<'py>, code: &str) -> Bound<'py, PyAny> {
    let locals = PyDict::new(py);
    locals.set_item("sa", module(py)).unwrap();
    let code = std::ffi::CString::new(code).unwrap();
    py.eval(&code, None, Some(&locals)).unwrap()
}

#[test]
fn golden_sign_vector_from_python() {
    Python::attach(|py| {
        let v: Vec<i8> = eval(py, "sa.sign_vector(sa.Family.preset('fig4'), 2, [2.0, -2.0])").extract().unwrap();
        assert_eq!(v, [-1, 1, 1, 1, 1, -1, -1, -1, -1, 1, 1, 1, 1, 1, 1]);
        let c: String = eval(py, "sa.classify_point(sa.Family.preset('triangle'), 1, [0.0, 0.0])").extract().unwrap();
        assert_eq!(c, "POS");
    });
}

#[test]
fn errors_become_value_errors() {
    Python::attach(|py| {
        let locals = PyDict::new(py);
        locals.set_item("sa", module(py)).unwrap();
        let err = py.run(c"sa.build_polygon([1.0, 1.0, 5.0])", None, Some(&locals)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let err = py.run(c"sa.Family.preset('nope')", None, Some(&locals)).unwrap_err();
        assert!(err.to_string().contains("unknown preset"));
    });
}

#[test]
fn contours_and_polygon() {
    Python::attach(|py| {
        let visible: Vec<usize> = eval(
            py,
            "sorted(s[0] for s, lines in sa.stratum_contours(sa.Family.preset('fig4'), 1, [(-6.0, 6.0), (-6.0, 6.0)], 201) if lines)",
        )
        .extract()
        .unwrap();
        assert_eq!(visible, [1, 2, 3, 5, 6]);
        let poly: Vec<[f64; 2]> = eval(py, "sa.build_polygon([3.0, 4.0, 5.0])").extract().unwrap();
        assert_eq!(poly.len(), 4);
        assert_eq!(poly[0], [0.0, 0.0]);
    });
}
