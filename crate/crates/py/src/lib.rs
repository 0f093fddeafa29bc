//! Python bindings for the trace-fluctuation laboratory.
//!
//! The module mirrors the main library surface: entry distributions,
//! seeded matrix arrays with the trace decomposition, exact oracles
//! (rationals are returned as strings to stay exact), trace kernels with
//! contraction norms, and the experiment drivers.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tracefluct::asclt::{self, il_statistic, replicated_paths};
use tracefluct::combinatorics::{self, cardinality_bound_check, remainder_variance_exact};
use tracefluct::ensemble::{EntryDistribution, MatrixArray};
use tracefluct::kernels::{self, contract};
use tracefluct::oracle;
use tracefluct::stein::{self, BoundInput, Phi};
use tracefluct::trace;

fn err(e: tracefluct::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An entry distribution with exact rational moments.
#[pyclass(name = "Distribution", from_py_object)]
#[derive(Clone)]
struct PyDistribution {
    inner: EntryDistribution,
}

#[pymethods]
impl PyDistribution {
    /// Parse `rademacher`, `normal`, or `discrete:v1,p1;v2,p2;...`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyDistribution {
            inner: EntryDistribution::parse(spec).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    /// The j-th moment as an exact rational string.
    fn moment(&self, j: usize) -> PyResult<String> {
        Ok(self.inner.moment(j).map_err(err)?.to_string())
    }

    fn abs_third(&self) -> f64 {
        self.inner.abs_third()
    }

    fn __repr__(&self) -> String {
        format!("Distribution({})", self.inner.name())
    }
}

/// A seeded infinite array of i.i.d. entries; matrices are its leading
/// blocks scaled by 1/sqrt(N).
#[pyclass(name = "MatrixArray")]
struct PyMatrixArray {
    inner: MatrixArray,
}

#[pymethods]
impl PyMatrixArray {
    #[new]
    fn new(seed: u64, dist: PyDistribution) -> Self {
        PyMatrixArray {
            inner: MatrixArray::new(seed, dist.inner),
        }
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    /// Raw (unscaled) entry at 1-based position (i, j).
    fn entry(&self, i: usize, j: usize) -> f64 {
        self.inner.entry(i, j)
    }

    /// Tr(X_N^k) for the scaled N x N block.
    fn trace_power(&self, n: usize, k: usize) -> PyResult<f64> {
        let m = self.inner.sample_matrix(n).map_err(err)?;
        trace::trace_power(&m, k).map_err(err)
    }

    /// N^{-1/2} sum of the first N diagonal entries.
    fn diagonal_sum(&self, n: usize) -> f64 {
        trace::diagonal_sum(&self.inner, n)
    }

    /// The off-diagonal chaos component J_N(k).
    fn chaos_component(&self, n: usize, k: usize) -> PyResult<f64> {
        trace::chaos_component(&self.inner, n, k).map_err(err)
    }

    /// Centered trace decomposition: (total, chaos_part, remainder).
    fn decompose(&self, n: usize, k: usize) -> PyResult<(f64, f64, f64)> {
        let d = trace::decompose(&self.inner, n, k).map_err(err)?;
        Ok((d.total, d.chaos_part, d.remainder))
    }
}

/// A symmetric kernel over matrix sites, order k.
#[pyclass(name = "TraceKernel")]
struct PyTraceKernel {
    inner: kernels::DenseKernel,
}

#[pymethods]
impl PyTraceKernel {
    /// The kernel f_{k,N} representing J_N(k) as a k-th chaos.
    #[new]
    fn new(k: usize, n: usize) -> PyResult<Self> {
        Ok(PyTraceKernel {
            inner: kernels::trace_kernel(k, n).map_err(err)?,
        })
    }

    /// Unit-variance version g_{k,N}.
    #[staticmethod]
    fn normalized(k: usize, n: usize) -> PyResult<Self> {
        Ok(PyTraceKernel {
            inner: kernels::normalized_kernel(k, n).map_err(err)?,
        })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn norm_sq(&self) -> f64 {
        self.inner.norm_sq()
    }

    /// Variance of the chaos: k! * ||f||^2.
    fn kernel_variance(&self) -> f64 {
        self.inner.kernel_variance()
    }

    fn max_influence(&self) -> f64 {
        self.inner.max_influence()
    }

    /// ||f star_r f|| via the hash-join contraction.
    fn contraction_norm(&self, r: usize) -> PyResult<f64> {
        Ok(contract(&self.inner, &self.inner, r).map_err(err)?.norm())
    }

    /// Evaluate the chaos sum on a seeded matrix array.
    fn q_sum(&self, array: &PyMatrixArray) -> f64 {
        self.inner.q_sum_entries(&array.inner)
    }
}

/// Deterministic per-replication seed derivation.
#[pyfunction]
fn child_seed(master: u64, replication: u64) -> u64 {
    tracefluct::child_seed(master, replication)
}

/// Exact chaos variance E[J_N(k)^2] as a rational string.
#[pyfunction]
fn exact_chaos_variance(n: usize, k: usize) -> PyResult<String> {
    Ok(oracle::exact_chaos_variance(n, k).map_err(err)?.to_string())
}

/// Exact E[Tr(X_N^k)].
#[pyfunction]
fn exact_expected_trace(n: usize, k: usize, dist: PyDistribution) -> PyResult<f64> {
    Ok(oracle::exact_expected_trace(n, k, &dist.inner)
        .map_err(err)?
        .value_f64())
}

/// Exact Cov(Tr(X_N^{k1}), Tr(X_N^{k2})).
#[pyfunction]
fn exact_fluct_covariance(n: usize, k1: usize, k2: usize, dist: PyDistribution) -> PyResult<f64> {
    Ok(oracle::exact_fluct_covariance(n, k1, k2, &dist.inner)
        .map_err(err)?
        .value_f64())
}

/// Exact Var(R_N(k)) as a rational string.
#[pyfunction]
fn remainder_variance(n: usize, k: usize, dist: PyDistribution) -> PyResult<String> {
    Ok(remainder_variance_exact(n, k, &dist.inner)
        .map_err(err)?
        .to_string())
}

/// All set partitions of {1,...,k} in canonical text form.
#[pyfunction]
fn partitions(k: usize) -> PyResult<Vec<String>> {
    Ok(combinatorics::partitions(k)
        .map_err(err)?
        .iter()
        .map(|p| p.to_string())
        .collect())
}

/// Rows (partition, N, cardinality, ratio) of the class-size table.
#[pyfunction]
fn cardinality_table(k: usize, n_list: Vec<usize>) -> PyResult<Vec<(String, usize, usize, f64)>> {
    Ok(cardinality_bound_check(k, &n_list)
        .map_err(err)?
        .into_iter()
        .map(|r| (r.partition.to_string(), r.n, r.cardinality, r.ratio))
        .collect())
}

/// Rows (N, r, norm, sqrtN * norm) of the contraction-scaling table.
#[pyfunction]
fn contraction_scaling(k: usize, n_list: Vec<usize>) -> PyResult<Vec<(usize, usize, f64, f64)>> {
    Ok(kernels::contraction_scaling(k, &n_list)
        .map_err(err)?
        .into_iter()
        .map(|r| (r.n, r.r, r.norm, r.scaled_norm))
        .collect())
}

/// The explicit smooth-function bound for normalized trace kernels,
/// returned as (contraction_part, influence_part, total).
#[pyfunction]
fn universal_bound(
    orders: Vec<usize>,
    n: usize,
    dist: PyDistribution,
    t: Vec<f64>,
) -> PyResult<(f64, f64, f64)> {
    let phi = Phi::CosProduct { t };
    let kernels: Vec<_> = orders
        .iter()
        .map(|&k| kernels::normalized_kernel(k, n))
        .collect::<tracefluct::Result<_>>()
        .map_err(err)?;
    let input = BoundInput::new(
        kernels,
        dist.inner.abs_third(),
        phi.derivative_norm(2),
        phi.derivative_norm(3),
        None,
    )
    .map_err(err)?;
    let b = stein::universal_bound(&input).map_err(err)?;
    Ok((b.contraction_part, b.influence_part, b.total()))
}

/// Berry-type discrepancy rows (N, discrepancy, scaled, se).
#[pyfunction]
fn berry_rate(
    dist: PyDistribution,
    orders: Vec<usize>,
    n_list: Vec<usize>,
    replications: u64,
    t: Vec<f64>,
    seed: u64,
) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let phi = Phi::CosProduct { t };
    Ok(
        stein::berry_rate_experiment(&dist.inner, &orders, &n_list, replications, &phi, seed)
            .map_err(err)?
            .into_iter()
            .map(|r| (r.n, r.discrepancy, r.scaled_discrepancy, r.se))
            .collect(),
    )
}

/// Exact Step-1 correlation data as a dict-like tuple:
/// (cross, identity_rhs, normalized, identity_holds_exactly).
#[pyfunction]
fn correlation_decay(n: usize, p: usize, k: usize) -> PyResult<(f64, f64, f64, bool)> {
    let cd = asclt::correlation_decay(n, p, k).map_err(err)?;
    Ok((cd.cross, cd.identity_rhs, cd.normalized, cd.identity_holds_exactly()))
}

/// Averaged characteristic-function statistic E|Delta_N|^2 over
/// replicated trace paths.
#[pyfunction]
fn il_criterion(
    seed: u64,
    dist: PyDistribution,
    orders: Vec<usize>,
    n: usize,
    replications: u64,
    t: Vec<f64>,
) -> PyResult<f64> {
    let paths = replicated_paths(seed, &dist.inner, &orders, n, replications).map_err(err)?;
    Ok(il_statistic(&paths, &t).map_err(err)?.mean_abs2)
}

#[pymodule]
fn tracefluct_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyMatrixArray>()?;
    m.add_class::<PyTraceKernel>()?;
    m.add_function(wrap_pyfunction!(child_seed, m)?)?;
    m.add_function(wrap_pyfunction!(exact_chaos_variance, m)?)?;
    m.add_function(wrap_pyfunction!(exact_expected_trace, m)?)?;
    m.add_function(wrap_pyfunction!(exact_fluct_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(remainder_variance, m)?)?;
    m.add_function(wrap_pyfunction!(partitions, m)?)?;
    m.add_function(wrap_pyfunction!(cardinality_table, m)?)?;
    m.add_function(wrap_pyfunction!(contraction_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(universal_bound, m)?)?;
    m.add_function(wrap_pyfunction!(berry_rate, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_decay, m)?)?;
    m.add_function(wrap_pyfunction!(il_criterion, m)?)?;
    Ok(())
}
