//! Python bindings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use statamoeba::export;
use statamoeba::grid::GridSpec;
use statamoeba::loci::stratum_loci;
use statamoeba::model::{FunctionFamily as CoreFamily, SubsetMask, PRESETS};
use statamoeba::polygon::build_closed_polygon;
use statamoeba::regions::{classify_grid, domain_class, label_subdomains, CellClass, DomainClass};
use statamoeba::tropical::{skeleton_2d_masked, TropicalKind};
use statamoeba::verify::{run_verify, NegRule, VerifyConfig};

fn py_err(e: statamoeba::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mask(subset: &[usize]) -> PyResult<SubsetMask> {
    SubsetMask::from_one_based(subset).map_err(py_err)
}

/// A family of exponents `f_1, ..., f_N`.
#[pyclass(name = "Family", frozen)]
pub struct Family(CoreFamily);

#[pymethods]
impl Family {
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        statamoeba::preset(name).map(Family).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CoreFamily::from_json_str(text).map(Family).map_err(py_err)
    }

    /// Linear family from `(b, [a_1, ..., a_n])` pairs.
    #[staticmethod]
    fn linear(forms: Vec<(f64, Vec<f64>)>) -> PyResult<Self> {
        let n = forms.first().map_or(0, |f| f.1.len());
        CoreFamily::linear(n, &forms).map(Family).map_err(py_err)
    }

    #[getter]
    fn n_terms(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn exponents(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.0.dim() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.0.dim())));
        }
        Ok(self.0.exponents(&x))
    }

    fn to_json(&self) -> String {
        self.0.to_json_string()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Family(n_terms={}, dim={})", self.0.len(), self.0.dim())
    }
}

#[pyfunction]
fn presets() -> Vec<(&'static str, &'static str)> {
    PRESETS.to_vec()
}

/// `ln(sum outside) - ln(sum inside)` for the 1-based `subset`.
#[pyfunction]
fn zk_log_gap(family: &Family, subset: Vec<usize>, x: Vec<f64>) -> PyResult<f64> {
    statamoeba::zk_log_gap(&family.0, mask(&subset)?, &x).map(|g| g.value()).map_err(py_err)
}

#[pyfunction]
fn zk_value(family: &Family, subset: Vec<usize>, x: Vec<f64>) -> PyResult<f64> {
    statamoeba::zk_value(&family.0, mask(&subset)?, &x).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (family, k, x, tol = statamoeba::DEFAULT_TOL))]
fn sign_vector(family: &Family, k: usize, x: Vec<f64>, tol: f64) -> PyResult<Vec<i8>> {
    statamoeba::sign_vector(&family.0, k, &x, tol).map(|v| v.entries).map_err(py_err)
}

/// `"POS"`, `"NEG"` or `"MIXED"` for the point `x`.
#[pyfunction]
#[pyo3(signature = (family, k, x, tol = statamoeba::DEFAULT_TOL))]
fn classify_point(family: &Family, k: usize, x: Vec<f64>, tol: f64) -> PyResult<&'static str> {
    let v = statamoeba::sign_vector(&family.0, k, &x, tol).map_err(py_err)?;
    Ok(match domain_class(&v, family.0.len(), k).map_err(py_err)? {
        DomainClass::Pos => "POS",
        DomainClass::Neg => "NEG",
        DomainClass::Mixed => "MIXED",
    })
}

fn grid(bbox: Vec<(f64, f64)>, res: usize) -> PyResult<GridSpec> {
    GridSpec::new(bbox, vec![res]).map_err(py_err)
}

/// Region map as `(csv, summary_json)`.
#[pyfunction]
#[pyo3(signature = (family, k, bbox, res, tol = statamoeba::DEFAULT_TOL))]
fn classify(family: &Family, k: usize, bbox: Vec<(f64, f64)>, res: usize, tol: f64) -> PyResult<(String, String)> {
    let g = grid(bbox, res)?;
    let map = label_subdomains(classify_grid(&family.0, k, &g, tol).map_err(py_err)?);
    Ok((export::region_csv(&map), export::region_summary_json(&map).map_err(py_err)?))
}

/// Cell counts per class.
#[pyfunction]
#[pyo3(signature = (family, k, bbox, res, tol = statamoeba::DEFAULT_TOL))]
fn class_counts(family: &Family, k: usize, bbox: Vec<(f64, f64)>, res: usize, tol: f64) -> PyResult<Vec<(&'static str, usize)>> {
    let g = grid(bbox, res)?;
    let map = classify_grid(&family.0, k, &g, tol).map_err(py_err)?;
    Ok([CellClass::Pos, CellClass::Neg, CellClass::Zcd, CellClass::Boundary]
        .iter()
        .map(|&c| (c.as_str(), map.count(c)))
        .collect())
}

/// Zero loci of stratum `k` as a list of `(subset, polylines)`.
#[pyfunction]
fn stratum_contours(
    family: &Family,
    k: usize,
    bbox: Vec<(f64, f64)>,
    res: usize,
) -> PyResult<Vec<(Vec<usize>, Vec<Vec<[f64; 2]>>)>> {
    let loci = stratum_loci(&family.0, k, &grid(bbox, res)?).map_err(py_err)?;
    Ok(loci
        .sets
        .into_iter()
        .map(|s| (s.subset.one_based(), s.polylines.into_iter().map(|p| p.points).collect()))
        .collect())
}

/// Tropical skeleton as JSON, clipped segments included.
#[pyfunction]
#[pyo3(signature = (family, bbox, constants = false, drop = Vec::new()))]
fn tropical_skeleton(family: &Family, bbox: Vec<(f64, f64)>, constants: bool, drop: Vec<usize>) -> PyResult<String> {
    let kind = if constants { TropicalKind::Affine } else { TropicalKind::Homogeneous };
    let mut mask = vec![false; family.0.dim()];
    for i in drop {
        *mask.get_mut(i.wrapping_sub(1)).ok_or_else(|| PyValueError::new_err(format!("variable {i} out of range")))? = true;
    }
    let skel = skeleton_2d_masked(&family.0, kind, &mask).map_err(py_err)?;
    export::skeleton_json(&skel, &bbox).map_err(py_err)
}

/// Vertices of a closed polygon with the given side lengths.
#[pyfunction]
#[pyo3(signature = (lengths, tol = 1e-9))]
fn build_polygon(lengths: Vec<f64>, tol: f64) -> PyResult<Vec<[f64; 2]>> {
    build_closed_polygon(&lengths, tol).map(|p| p.vertices).map_err(py_err)
}

/// Runs the property suite and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (family, bbox, samples = 10_000, seed = 0, expect_violation = Vec::new()))]
fn verify(family: &Family, bbox: Vec<(f64, f64)>, samples: usize, seed: u64, expect_violation: Vec<String>) -> PyResult<String> {
    let mut cfg = VerifyConfig::new(seed, samples, bbox);
    if expect_violation.iter().any(|e| e == "chains" || e == "chain_neg") {
        cfg.neg_rule = NegRule::ObservedMax;
    }
    cfg.expect_violation = expect_violation;
    let report = run_verify(&family.0, &cfg).map_err(py_err)?;
    export::to_json(&report).map_err(py_err)
}

#[pymodule]
fn statamoeba_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds every class and function to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Family>()?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(zk_log_gap, m)?)?;
    m.add_function(wrap_pyfunction!(zk_value, m)?)?;
    m.add_function(wrap_pyfunction!(sign_vector, m)?)?;
    m.add_function(wrap_pyfunction!(classify_point, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(class_counts, m)?)?;
    m.add_function(wrap_pyfunction!(stratum_contours, m)?)?;
    m.add_function(wrap_pyfunction!(tropical_skeleton, m)?)?;
    m.add_function(wrap_pyfunction!(build_polygon, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
