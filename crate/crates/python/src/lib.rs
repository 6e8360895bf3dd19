//! Python bindings: schemes, exact DoF, validation, regions and sweeps.
//!
//! Exact quantities cross the boundary as `fractions.Fraction`; α may be
//! passed as a `Fraction`, an `int` or a string such as `"1/2"`.

use misodof_core::alpha::{parse_rational, Rational};
use misodof_core::channel::CsitQuality;
use misodof_core::dofcalc::{self, SchemeSpec};
use misodof_core::region::{self as reg, DofRegion};
use misodof_core::schemes::{builtin_catalog, resolve_scheme};
use misodof_core::sim::{self, SweepConfig, UserSel};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

fn err(e: misodof_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((r.to_string(),))
}

fn fractions<'py>(py: Python<'py>, v: &[Rational]) -> PyResult<Vec<Bound<'py, PyAny>>> {
    v.iter().map(|r| fraction(py, r)).collect()
}

fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(obj.str()?.to_str()?.trim()).map_err(err)
}

fn quality(obj: &Bound<'_, PyAny>) -> PyResult<CsitQuality> {
    CsitQuality::new(rational(obj)?).map_err(err)
}

/// A transmission scheme, built in or loaded from JSON.
#[pyclass(name = "Scheme", frozen)]
struct PyScheme {
    inner: SchemeSpec,
}

#[pymethods]
impl PyScheme {
    /// Built-in scheme by name, e.g. `"x1"`, `"x3:4"`, `"zf:3"`.
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(PyScheme {
            inner: resolve_scheme(name).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyScheme {
            inner: dofcalc::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        dofcalc::to_json(&self.inner)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn slot_count(&self) -> usize {
        self.inner.slot_count()
    }

    /// Violation messages; empty when the scheme is valid.
    fn validate(&self) -> Vec<String> {
        dofcalc::validate(&self.inner)
            .violations
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    /// Per-user DoF as `(c0, c1)` pairs meaning `c0 + c1·α`, and the total.
    #[allow(clippy::type_complexity)]
    fn dof_symbolic<'py>(
        &self,
        py: Python<'py>,
    ) -> PyResult<(
        Vec<(Bound<'py, PyAny>, Bound<'py, PyAny>)>,
        (Bound<'py, PyAny>, Bound<'py, PyAny>),
    )> {
        let d = dofcalc::dof_symbolic(&self.inner).map_err(err)?;
        let pair = |a: &misodof_core::AffineAlpha| {
            Ok::<_, PyErr>((fraction(py, &a.c0)?, fraction(py, &a.c1)?))
        };
        let users = d.users().iter().map(pair).collect::<PyResult<Vec<_>>>()?;
        Ok((users, pair(&d.total)?))
    }

    /// Per-user DoF at one α.
    fn dof_at<'py>(
        &self,
        py: Python<'py>,
        alpha: &Bound<'py, PyAny>,
    ) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let d = dofcalc::dof_at(&self.inner, &quality(alpha)?).map_err(err)?;
        fractions(py, &d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scheme({:?}, K={}, N={}, slots={})",
            self.inner.name,
            self.inner.k,
            self.inner.n,
            self.inner.slot_count()
        )
    }
}

/// A parameterized DoF region (`"theorem1"`, `"theorem1-verbatim"`, `"theorem3"`).
#[pyclass(name = "Region", frozen)]
struct PyRegion {
    inner: DofRegion,
}

#[pymethods]
impl PyRegion {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(PyRegion {
            inner: reg::resolve_region(name).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    fn vertex_names(&self) -> Vec<String> {
        self.inner
            .named_vertices
            .iter()
            .map(|(n, _)| n.clone())
            .collect()
    }

    fn vertex<'py>(
        &self,
        py: Python<'py>,
        name: &str,
        alpha: &Bound<'py, PyAny>,
    ) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let a = quality(alpha)?;
        let v = self
            .inner
            .vertex_at(name, a.alpha())
            .ok_or_else(|| PyKeyError::new_err(name.to_string()))?;
        fractions(py, &v)
    }

    fn contains(&self, point: Vec<Bound<'_, PyAny>>, alpha: &Bound<'_, PyAny>) -> PyResult<bool> {
        let p = point.iter().map(rational).collect::<PyResult<Vec<_>>>()?;
        reg::contains(&self.inner, &p, &quality(alpha)?).map_err(err)
    }

    /// The region and its vertex table as JSON text.
    #[pyo3(signature = (alphas=None))]
    fn to_json(&self, alphas: Option<Vec<Bound<'_, PyAny>>>) -> PyResult<String> {
        let grid = match alphas {
            Some(a) => a.iter().map(rational).collect::<PyResult<Vec<_>>>()?,
            None => reg::standard_alpha_grid(),
        };
        reg::export_json(&self.inner, &grid).map_err(err)
    }
}

/// Checks a scheme's DoF against a region over an α grid. Returns
/// `(all_inside, common_vertex)`.
#[pyfunction]
#[pyo3(signature = (scheme, region, alphas=None))]
fn cross_check(
    scheme: &PyScheme,
    region: &PyRegion,
    alphas: Option<Vec<Bound<'_, PyAny>>>,
) -> PyResult<(bool, Option<String>)> {
    let grid = match alphas {
        Some(a) => a.iter().map(rational).collect::<PyResult<Vec<_>>>()?,
        None => reg::standard_alpha_grid(),
    };
    let r = reg::achievability_cross_check(&scheme.inner, &region.inner, &grid).map_err(err)?;
    Ok((r.all_inside(), r.common_vertex().map(str::to_string)))
}

/// Names of every built-in scheme.
#[pyfunction]
fn builtin_names() -> Vec<String> {
    builtin_catalog().into_iter().map(|s| s.name).collect()
}

/// Result of a Monte Carlo sweep.
#[pyclass(name = "RateReport", frozen)]
struct PyRateReport {
    inner: sim::RateReport,
}

#[pymethods]
impl PyRateReport {
    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    /// `(slope, predicted)` for one α and a user index, or `None` for the total.
    #[pyo3(signature = (alpha, user=None))]
    fn slope(&self, alpha: &Bound<'_, PyAny>, user: Option<usize>) -> PyResult<(f64, f64)> {
        let a = rational(alpha)?;
        let who = user.map_or(UserSel::Total, UserSel::User);
        let s = self
            .inner
            .slope(&a, who)
            .ok_or_else(|| PyKeyError::new_err(format!("no slope for α={a}, {who}")))?;
        Ok((s.slope, misodof_core::alpha::to_f64(&s.predicted)))
    }
}

/// Runs a rate sweep of `scheme` over `alphas` × `snr_db`.
#[pyfunction]
#[pyo3(signature = (scheme, alphas, snr_db, trials, seed=0, window_db=None))]
fn sweep(
    py: Python<'_>,
    scheme: &PyScheme,
    alphas: Vec<Bound<'_, PyAny>>,
    snr_db: Vec<f64>,
    trials: usize,
    seed: u64,
    window_db: Option<(f64, f64)>,
) -> PyResult<PyRateReport> {
    let alphas = alphas.iter().map(rational).collect::<PyResult<Vec<_>>>()?;
    let mut cfg = SweepConfig::new(&scheme.inner.name, alphas, snr_db, trials, seed);
    if let Some(w) = window_db {
        cfg.window_db = w;
    }
    let spec = scheme.inner.clone();
    let report = py
        .detach(move || sim::sweep_scheme(&spec, &cfg))
        .map_err(err)?;
    Ok(PyRateReport { inner: report })
}

#[pymodule]
fn pymisodof(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScheme>()?;
    m.add_class::<PyRegion>()?;
    m.add_class::<PyRateReport>()?;
    m.add_function(wrap_pyfunction!(cross_check, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_names, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
