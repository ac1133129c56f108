//! Python bindings. Indices are 0-based on the Python side.

use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use seating_core::hall::{self, HalvedDifferences, SearchConfig};
use seating_core::oracle::{self, OracleBounds};
use seating_core::signflip;
use seating_core::solver;
use seating_core::zmod::{self, Orientation, Pair, PairPartition, Parity};
use seating_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::TooLarge { .. } => PyOverflowError::new_err(e.to_string()),
        Error::Internal { ref dump, .. } => PyRuntimeError::new_err(format!("{e} [{dump}]")),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn bounds() -> PyResult<OracleBounds> {
    OracleBounds::from_env().map_err(to_py)
}

/// A validated modulus with its unit differences.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Instance {
    inner: zmod::Instance,
}

#[pymethods]
impl Instance {
    #[new]
    fn new(modulus: i64, differences: Vec<i64>) -> PyResult<Self> {
        zmod::validate_instance(modulus, &differences)
            .map(|inner| Instance { inner })
            .map_err(to_py)
    }

    #[getter]
    fn modulus(&self) -> u64 {
        self.inner.modulus()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn parity(&self) -> &'static str {
        match self.inner.parity() {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }

    #[getter]
    fn differences(&self) -> Vec<u64> {
        self.inner.difference_values()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(N={}, differences={:?})",
            self.inner.modulus(),
            self.inner.difference_values()
        )
    }
}

/// Pairs covering the target set, each tagged with the difference index it realizes.
#[pyclass(frozen)]
struct Partition {
    inner: PairPartition,
    signs: Option<Vec<i8>>,
}

#[pymethods]
impl Partition {
    #[getter]
    fn pairs(&self) -> Vec<(u64, u64)> {
        self.inner.pairs.iter().map(|p| (p.a, p.b)).collect()
    }

    #[getter]
    fn realizes(&self) -> Vec<usize> {
        self.inner.pairs.iter().map(|p| p.index).collect()
    }

    #[getter]
    fn orientations(&self) -> Vec<&'static str> {
        self.inner
            .pairs
            .iter()
            .map(|p| p.orientation.as_str())
            .collect()
    }

    /// Signs chosen by the constructive solver; `None` for oracle results.
    #[getter]
    fn signs(&self) -> Option<Vec<i8>> {
        self.signs.clone()
    }

    #[getter]
    fn instance(&self) -> Instance {
        Instance {
            inner: self.inner.instance.clone(),
        }
    }

    fn is_valid(&self) -> bool {
        zmod::verify_partition(&self.inner).valid
    }

    fn __len__(&self) -> usize {
        self.inner.pairs.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Partition(N={}, pairs={:?})",
            self.inner.instance.modulus(),
            self.pairs()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (instance, seed = 0))]
fn solve(instance: &Instance, seed: u64) -> PyResult<Partition> {
    let out = solver::solve(&instance.inner, &SearchConfig::with_seed(seed)).map_err(to_py)?;
    Ok(Partition {
        inner: out.partition,
        signs: Some(out.signs.signs),
    })
}

#[pyfunction]
fn oracle_solve(instance: &Instance) -> PyResult<Option<Partition>> {
    Ok(oracle::oracle_solve(&instance.inner, &bounds()?)
        .map_err(to_py)?
        .map(|inner| Partition { inner, signs: None }))
}

#[pyfunction]
fn oracle_count(instance: &Instance) -> PyResult<u64> {
    oracle::oracle_count(&instance.inner, &bounds()?).map_err(to_py)
}

#[pyfunction]
fn choose_signs(instance: &Instance) -> PyResult<Vec<i8>> {
    signflip::choose_signs(&instance.inner)
        .map(|s| s.signs)
        .map_err(to_py)
}

/// Returns `(c, sigma)` with `(i - c[i]) % n == values[sigma[i]]`.
#[pyfunction]
#[pyo3(signature = (values, seed = 0))]
fn hall_realize(values: Vec<usize>, seed: u64) -> PyResult<(Vec<usize>, Vec<usize>)> {
    let e = HalvedDifferences::new(values.len(), values).map_err(to_py)?;
    let sol = hall::hall_realize(&e, &SearchConfig::with_seed(seed)).map_err(to_py)?;
    Ok((sol.c, sol.sigma))
}

/// Checks pairs against an instance; returns `(valid, failures)`.
#[pyfunction]
fn verify(
    instance: &Instance,
    pairs: Vec<(u64, u64)>,
    realizes: Vec<usize>,
    orientations: Vec<String>,
) -> PyResult<(bool, Vec<String>)> {
    if pairs.len() != realizes.len() || pairs.len() != orientations.len() {
        return Err(PyValueError::new_err(
            "pairs, realizes and orientations must have equal length",
        ));
    }
    let mut out = Vec::with_capacity(pairs.len());
    for ((&(a, b), &index), o) in pairs.iter().zip(&realizes).zip(&orientations) {
        let orientation = match o.as_str() {
            "a-b" => Orientation::AMinusB,
            "b-a" => Orientation::BMinusA,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown orientation {other:?}"
                )))
            }
        };
        out.push(Pair {
            a,
            b,
            index,
            orientation,
        });
    }
    let report = zmod::verify_partition(&PairPartition {
        instance: instance.inner.clone(),
        pairs: out,
    });
    Ok((
        report.valid,
        report.failures.iter().map(|f| format!("{f:?}")).collect(),
    ))
}

type Counterexample = (u64, Vec<u64>);

/// Sweeps all instances for `N` in `start..=stop` of one parity.
/// Returns `(total_instances, counterexamples)`.
#[pyfunction]
#[pyo3(signature = (start, stop, odd = true))]
fn explore(
    py: Python<'_>,
    start: u64,
    stop: u64,
    odd: bool,
) -> PyResult<(usize, Vec<Counterexample>)> {
    let parity = if odd { Parity::Odd } else { Parity::Even };
    let b = bounds()?;
    let report = py
        .detach(|| oracle::explore(start, stop, parity, &b, None))
        .map_err(to_py)?;
    Ok((
        report.total_instances,
        report
            .failures
            .into_iter()
            .map(|f| (f.modulus, f.differences))
            .collect(),
    ))
}

#[pymodule]
fn seating(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Partition>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_solve, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_count, m)?)?;
    m.add_function(wrap_pyfunction!(choose_signs, m)?)?;
    m.add_function(wrap_pyfunction!(hall_realize, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(explore, m)?)?;
    Ok(())
}
