//! Python bindings. Structured results cross the boundary as JSON strings in
//! the same formats the CLI writes.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use frobtwist::io::{self, IsoReport, OracleReport, ViolationFile, WeightFile};
use frobtwist::{AlgebraElement, FrobeniusAlgebra, PartialAssignment, State};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

#[pyclass(name = "LinkDiagram", frozen)]
struct PyLinkDiagram {
    inner: frobtwist::LinkDiagram,
}

impl PyLinkDiagram {
    fn state(&self, bits: &str) -> PyResult<State> {
        let s = State::parse_bits(bits).ok_or_else(|| value_err(format!("bad state `{bits}`")))?;
        if s.len() != self.inner.crossing_count() {
            return Err(value_err(format!("state `{bits}` needs {} bits", self.inner.crossing_count())));
        }
        Ok(s)
    }

    fn crossing(&self, c: usize) -> PyResult<usize> {
        if c >= self.inner.crossing_count() {
            return Err(PyIndexError::new_err(format!("no crossing {c}")));
        }
        Ok(c)
    }
}

#[pymethods]
impl PyLinkDiagram {
    /// Parse PD-code text.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyLinkDiagram { inner: frobtwist::parse_pd(text).map_err(value_err)? })
    }

    #[getter]
    fn crossing_count(&self) -> usize {
        self.inner.crossing_count()
    }

    /// Circles of a state as `(canonical id, edges)` pairs.
    fn resolve(&self, bits: &str) -> PyResult<Vec<(u32, Vec<u32>)>> {
        let res = self.inner.resolve(self.state(bits)?).map_err(value_err)?;
        Ok(res.circles.iter().map(|c| (c.canonical_id.0, c.edges.iter().map(|e| e.0).collect())).collect())
    }

    /// `"split"` or `"merge"` for the cube edge out of `bits` along crossing `c`.
    fn classify(&self, bits: &str, c: usize) -> PyResult<&'static str> {
        let saddle = self.inner.classify(self.state(bits)?, self.crossing(c)?).map_err(value_err)?;
        Ok(if saddle.is_split() { "split" } else { "merge" })
    }

    fn gamma(&self, bits: &str) -> PyResult<i64> {
        self.inner.gamma_state(self.state(bits)?).map_err(value_err)
    }

    fn crossing_change(&self, c: usize) -> PyResult<Self> {
        Ok(PyLinkDiagram { inner: self.inner.crossing_change(self.crossing(c)?) })
    }

    fn find_connected_state(&self) -> PyResult<String> {
        Ok(self.inner.find_connected_state().map_err(value_err)?.to_bits())
    }

    fn __repr__(&self) -> String {
        format!("LinkDiagram({} crossings)", self.inner.crossing_count())
    }
}

#[pyclass(name = "FrobeniusAlgebra", frozen)]
struct PyAlgebra {
    inner: FrobeniusAlgebra,
}

#[pymethods]
impl PyAlgebra {
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(PyAlgebra { inner: FrobeniusAlgebra::builtin(name).map_err(value_err)? })
    }

    /// Load from the algebra JSON format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyAlgebra { inner: io::parse_algebra(text).map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        to_json(&io::AlgebraFile::from(&self.inner))
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    /// Names of the failed axioms; empty for a valid algebra.
    fn validate_axioms(&self) -> Vec<String> {
        self.inner.validate_axioms().iter().map(|f| format!("{f:?}")).collect()
    }

    fn mul(&self, a: Vec<i64>, b: Vec<i64>) -> PyResult<Vec<i64>> {
        let r = self.inner.rank();
        if a.len() != r || b.len() != r {
            return Err(value_err(format!("elements need {r} coordinates")));
        }
        Ok(self.inner.mul(&AlgebraElement(a), &AlgebraElement(b)).0)
    }

    fn invert(&self, theta: Vec<i64>) -> PyResult<Option<Vec<i64>>> {
        Ok(self.inner.invert(&AlgebraElement(theta)).map_err(value_err)?.map(|x| x.0))
    }

    fn power(&self, theta: Vec<i64>, k: i64) -> PyResult<Vec<i64>> {
        Ok(self.inner.power(&AlgebraElement(theta), k).map_err(value_err)?.0)
    }

    fn twist(&self, theta: Vec<i64>) -> PyResult<Self> {
        Ok(PyAlgebra { inner: self.inner.twist(&AlgebraElement(theta)).map_err(value_err)? })
    }

    fn check_twist_comparison(&self, theta: Vec<i64>, p: i64, q: i64) -> PyResult<bool> {
        self.inner.check_twist_comparison(&AlgebraElement(theta), p, q).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("FrobeniusAlgebra(rank {})", self.inner.rank())
    }
}

/// A twisting weight for `diagram`, as weight JSON.
#[pyfunction]
fn construct_weight(diagram: &PyLinkDiagram) -> PyResult<String> {
    let d = &diagram.inner;
    let nu = frobtwist::construct(d).map_err(value_err)?;
    Ok(to_json(&io::weight_to_file(d, &nu).map_err(value_err)?))
}

/// Violations of a weight given as JSON, in the violation JSON format.
#[pyfunction]
fn check_weight(diagram: &PyLinkDiagram, weight_json: &str) -> PyResult<String> {
    let d = &diagram.inner;
    let file: WeightFile = serde_json::from_str(weight_json).map_err(value_err)?;
    let nu = io::weight_from_file(d, &file).map_err(value_err)?;
    let report = frobtwist::check_weight(d, &nu).map_err(value_err)?;
    Ok(to_json(&ViolationFile::from(&report)))
}

/// Oracle result JSON: `{"status": "feasible", "weight": ...}` or `{"status": "infeasible"}`.
#[pyfunction]
#[pyo3(signature = (diagram, pins_json = None, cap = frobtwist::DEFAULT_ORACLE_CAP))]
fn oracle_solve(diagram: &PyLinkDiagram, pins_json: Option<&str>, cap: usize) -> PyResult<String> {
    let d = &diagram.inner;
    let pins = match pins_json {
        Some(text) => {
            let file: WeightFile = serde_json::from_str(text).map_err(value_err)?;
            io::pins_from_file(d, &file).map_err(value_err)?
        }
        None => PartialAssignment::new(),
    };
    let report = match frobtwist::oracle_solve_with_cap(d, &pins, cap).map_err(value_err)? {
        Some(nu) => OracleReport {
            status: "feasible".into(),
            weight: Some(io::weight_to_file(d, &nu).map_err(value_err)?),
        },
        None => OracleReport { status: "infeasible".into(), weight: None },
    };
    Ok(to_json(&report))
}

/// Homology records of C(D;A), or of C(D;A^θ) when `theta` is given.
#[pyfunction]
#[pyo3(signature = (diagram, algebra, theta = None))]
fn homology(diagram: &PyLinkDiagram, algebra: &PyAlgebra, theta: Option<Vec<i64>>) -> PyResult<String> {
    let a = match theta {
        Some(t) => algebra.inner.twist(&AlgebraElement(t)).map_err(value_err)?,
        None => algebra.inner.clone(),
    };
    let c = frobtwist::complex_of(&diagram.inner, &a).map_err(value_err)?;
    let h = frobtwist::homology_snf(&c).map_err(value_err)?;
    Ok(io::homology_to_json(&h).to_string())
}

/// Build and verify θ̂^ν for the constructed weight; iso report JSON.
#[pyfunction]
fn verify_theta_iso(diagram: &PyLinkDiagram, algebra: &PyAlgebra, theta: Vec<i64>) -> PyResult<String> {
    let d = &diagram.inner;
    let a = &algebra.inner;
    let theta = AlgebraElement(theta);
    let nu = frobtwist::construct(d).map_err(value_err)?;
    let f = frobtwist::theta_map(d, a, &theta, &nu).map_err(value_err)?;
    let chain_map = frobtwist::verify_chain_map(&f).map_err(value_err)?;
    let iso = frobtwist::verify_iso(&f).map_err(value_err)?;
    let homology_twisted = frobtwist::homology_snf(&f.source).map_err(value_err)?;
    let homology = frobtwist::homology_snf(&f.target).map_err(value_err)?;
    let homology_equal = homology_twisted == homology;
    Ok(to_json(&IsoReport { theta: theta.0, chain_map, iso, homology_twisted, homology, homology_equal }))
}

#[pymodule]
fn pyfrobtwist(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLinkDiagram>()?;
    m.add_class::<PyAlgebra>()?;
    m.add_function(wrap_pyfunction!(construct_weight, m)?)?;
    m.add_function(wrap_pyfunction!(check_weight, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_solve, m)?)?;
    m.add_function(wrap_pyfunction!(homology, m)?)?;
    m.add_function(wrap_pyfunction!(verify_theta_iso, m)?)?;
    Ok(())
}
