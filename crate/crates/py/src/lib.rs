use pyo3::exceptions::{PyMemoryError, PyOSError, PyValueError};
use pyo3::prelude::*;

use sqfull_core::asymptotics::{self, SecondTermVariant};
use sqfull_core::campaign::{self, BRule, CampaignConfig};
use sqfull_core::error::Error;
use sqfull_core::repr::{self, IntervalSpec};
use sqfull_core::sieve;
use sqfull_core::squarefull::{self, TruncationLevel};
use sqfull_core::zeta::ZetaConstants;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Resource { .. } => PyMemoryError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn trunc(b: Option<f64>) -> PyResult<Option<TruncationLevel>> {
    b.map(TruncationLevel::new).transpose().map_err(to_py)
}

/// Λ and prime lookups up to a fixed limit.
#[pyclass(name = "LambdaTable", frozen)]
pub struct PyLambdaTable {
    inner: sieve::LambdaTable,
}

#[pymethods]
impl PyLambdaTable {
    #[new]
    fn new(py: Python<'_>, limit: u64) -> PyResult<Self> {
        let inner = py
            .allow_threads(|| sieve::LambdaTable::build(limit))
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn limit(&self) -> u64 {
        self.inner.limit()
    }

    fn von_mangoldt(&self, n: u64) -> PyResult<f64> {
        self.inner.try_lambda(n).map_err(to_py)
    }

    fn is_prime(&self, n: u64) -> PyResult<bool> {
        if n > self.inner.limit() {
            return Err(PyValueError::new_err(format!(
                "{n} exceeds the table limit"
            )));
        }
        Ok(self.inner.is_prime(n))
    }

    fn psi(&self, x: u64) -> PyResult<f64> {
        Ok(self.inner.chebyshev_psi(x).map_err(to_py)?.value)
    }

    fn theta(&self, x: u64) -> PyResult<f64> {
        Ok(self.inner.chebyshev_theta(x).map_err(to_py)?.value)
    }

    /// R(N), or R_B(N) when `b` is given.
    #[pyo3(signature = (n, b=None))]
    fn repr_sqfull(&self, n: u64, b: Option<f64>) -> PyResult<f64> {
        let v = match trunc(b)? {
            Some(t) => repr::repr_truncated(n, t, &self.inner),
            None => repr::repr_sqfull(n, &self.inner),
        };
        Ok(v.map_err(to_py)?.value)
    }

    fn repr_sq(&self, n: u64) -> PyResult<f64> {
        Ok(repr::repr_sq(n, &self.inner).map_err(to_py)?.value)
    }

    /// Σ_{X < N <= X+H} R(N) one N at a time.
    #[pyo3(signature = (x, h, b=None))]
    fn interval_sum_direct(&self, py: Python<'_>, x: u64, h: u64, b: Option<f64>) -> PyResult<f64> {
        let spec = IntervalSpec::new(x, h).map_err(to_py)?;
        let trunc = trunc(b)?;
        let sum = py.allow_threads(|| repr::interval_sum_direct(&spec, trunc, &self.inner));
        Ok(sum.map_err(to_py)?.value)
    }

    #[pyo3(signature = (x, h, b=None))]
    fn smoothing_residuals(
        &self,
        x: u64,
        h: u64,
        b: Option<f64>,
    ) -> PyResult<Vec<(u64, u64, f64, f64)>> {
        let spec = IntervalSpec::new(x, h).map_err(to_py)?;
        let rows =
            asymptotics::smoothing_residuals(&spec, trunc(b)?, &self.inner).map_err(to_py)?;
        Ok(rows
            .iter()
            .map(|r| (r.m, r.f, r.residual, r.envelope))
            .collect())
    }
}

#[pyclass(name = "ZetaConstants", frozen, get_all)]
pub struct PyZetaConstants {
    zeta_3_2: f64,
    zeta_3: f64,
    zeta_2_3: f64,
    zeta_2: f64,
    leading_ratio: f64,
    precision_bits: usize,
    fingerprint: String,
}

#[pyfunction]
fn zeta_constants() -> PyZetaConstants {
    let c = ZetaConstants::shared();
    PyZetaConstants {
        zeta_3_2: c.zeta_3_2,
        zeta_3: c.zeta_3,
        zeta_2_3: c.zeta_2_3,
        zeta_2: c.zeta_2,
        leading_ratio: c.leading_ratio,
        precision_bits: c.precision_bits,
        fingerprint: c.fingerprint(),
    }
}

#[pyfunction]
fn is_prime(n: u64) -> bool {
    sieve::is_prime_u64(n)
}

#[pyfunction]
fn is_squarefull(f: u64) -> PyResult<bool> {
    squarefull::is_squarefull(f).map_err(to_py)
}

/// (a, b) with f = a²b³ and b square-free.
#[pyfunction]
fn decompose(f: u64) -> PyResult<(u64, u64)> {
    let d = squarefull::decompose(f).map_err(to_py)?;
    Ok((d.a, d.b))
}

#[pyfunction]
#[pyo3(signature = (x, b=None))]
fn count_squarefull(x: u64, b: Option<f64>) -> PyResult<u64> {
    Ok(squarefull::count_squarefull(x, trunc(b)?))
}

#[pyfunction]
#[pyo3(signature = (lo, hi, b=None))]
fn squarefull_between(lo: u64, hi: u64, b: Option<f64>) -> PyResult<Vec<u64>> {
    let iter = squarefull::SquarefullIter::new(lo, hi, trunc(b)?).map_err(to_py)?;
    Ok(iter.map(|d| d.f).collect())
}

/// Σ_f [ψ(X+H−f) − ψ(X−f)], no Λ-table needed.
#[pyfunction]
#[pyo3(signature = (x, h, b=None))]
fn interval_sum(py: Python<'_>, x: u64, h: u64, b: Option<f64>) -> PyResult<f64> {
    let spec = IntervalSpec::new(x, h).map_err(to_py)?;
    let trunc = trunc(b)?;
    let sum = py.allow_threads(|| repr::interval_sum_rearranged(&spec, trunc));
    Ok(sum.map_err(to_py)?.value)
}

#[pyfunction]
fn main_term(x: u64, h: u64) -> PyResult<f64> {
    let spec = IntervalSpec::new(x, h).map_err(to_py)?;
    Ok(asymptotics::main_term(&spec, ZetaConstants::shared()))
}

/// (Q(x), two-term prediction) with the calibrated or named second-term variant.
#[pyfunction]
#[pyo3(signature = (x, variant=None))]
fn qx_fit(x: u64, variant: Option<&str>) -> PyResult<(f64, f64)> {
    let variant = match variant {
        Some(v) => v.parse::<SecondTermVariant>().map_err(to_py)?,
        None => SecondTermVariant::calibrated(),
    };
    let fit = asymptotics::qx_fit(x, ZetaConstants::shared(), variant).map_err(to_py)?;
    Ok((fit.actual, fit.predicted))
}

#[pyfunction]
fn mean_value_sample(py: Python<'_>, x: u64, h: u64, samples: u64, seed: u64) -> PyResult<f64> {
    let s = py.allow_threads(|| asymptotics::mean_value_sample(x, h, samples, seed));
    Ok(s.map_err(to_py)?.normalized_second_moment)
}

/// Runs the campaign and returns the report text (CSV or JSON).
#[pyfunction]
#[pyo3(signature = (x_grid, h_exponent=campaign::DEFAULT_H_EXPONENT, b_rule="log4", threads=1, format="csv"))]
fn verify(
    py: Python<'_>,
    x_grid: Vec<u64>,
    h_exponent: f64,
    b_rule: &str,
    threads: usize,
    format: &str,
) -> PyResult<String> {
    let format = match format {
        "csv" => campaign::ReportFormat::Csv,
        "json" => campaign::ReportFormat::Json,
        other => return Err(PyValueError::new_err(format!("unknown format `{other}`"))),
    };
    let config = CampaignConfig {
        x_grid,
        h_exponent,
        b_rule: b_rule.parse::<BRule>().map_err(to_py)?,
        threads,
        format,
        ..Default::default()
    };
    let rows = py
        .allow_threads(|| campaign::run_campaign(&config))
        .map_err(to_py)?;
    campaign::render_report(&rows, format).map_err(to_py)
}

#[pymodule]
fn sqfull(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLambdaTable>()?;
    m.add_class::<PyZetaConstants>()?;
    m.add_function(wrap_pyfunction!(zeta_constants, m)?)?;
    m.add_function(wrap_pyfunction!(is_prime, m)?)?;
    m.add_function(wrap_pyfunction!(is_squarefull, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(count_squarefull, m)?)?;
    m.add_function(wrap_pyfunction!(squarefull_between, m)?)?;
    m.add_function(wrap_pyfunction!(interval_sum, m)?)?;
    m.add_function(wrap_pyfunction!(main_term, m)?)?;
    m.add_function(wrap_pyfunction!(qx_fit, m)?)?;
    m.add_function(wrap_pyfunction!(mean_value_sample, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
