//! Python bindings for the core lab: hypothesis evaluation, regularizers and
//! their induced learners, the coupled-instance experiment, shattering, the
//! baseline learner, and the secret-sharing primitives.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use otplab::adversary::{run_experiment, verify_uniformity as core_verify_uniformity, Mode};
use otplab::hypotheses::{enumerate_class, cantor_class, OtpHypothesis};
use otplab::regularization::{
    builtin_family, induced_learner, parse_regularizer, regularizer_to_json, RegularizerTable,
};
use otplab::secretsharing::{
    otp_reconstruct, otp_share, shamir_reconstruct, shamir_share, verify_secrecy, OtpShares,
    ShamirShare,
};
use otplab::shattering::ds_dimension_upto;
use otplab::strings::BitString;
use otplab::transduction::{
    ratio_string, transductive_error, BaselineLearner, LabeledSample, Learner,
    TransductiveInstance,
};

fn err(e: otplab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A hypothesis h_{A,B}; exposes evaluation and the recovered secret.
#[pyclass(name = "Hypothesis")]
struct PyHypothesis {
    inner: OtpHypothesis,
}

#[pymethods]
impl PyHypothesis {
    #[new]
    fn new(a: &str, b: &str) -> PyResult<Self> {
        let a: BitString = a.parse().map_err(err)?;
        let b: BitString = b.parse().map_err(err)?;
        Ok(Self { inner: OtpHypothesis::new(a, b).map_err(err)? })
    }

    #[getter]
    fn a(&self) -> String {
        self.inner.a().to_string()
    }

    #[getter]
    fn b(&self) -> String {
        self.inner.b().to_string()
    }

    #[getter]
    fn secret(&self) -> String {
        self.inner.secret().to_string()
    }

    /// Returns (tag, payload) at domain point x.
    fn evaluate(&self, x: u64) -> (u8, String) {
        let label = self.inner.evaluate(x);
        (label.tag, label.payload.to_string())
    }

    fn __repr__(&self) -> String {
        format!("Hypothesis({})", self.inner)
    }
}

/// A local regularizer table over the enumerated class at a given length.
#[pyclass(name = "Regularizer")]
struct PyRegularizer {
    table: Arc<RegularizerTable>,
    string_len: usize,
}

#[pymethods]
impl PyRegularizer {
    /// Builds a builtin family ("random", "hash", "prefer-tag0",
    /// "prefer-tag1", "constant") over strings of the given length.
    #[staticmethod]
    fn builtin(name: &str, string_len: usize, seed: u64) -> PyResult<Self> {
        let class = Arc::new(enumerate_class(string_len).map_err(err)?);
        let table = builtin_family(name, class, string_len, seed).map_err(err)?;
        Ok(Self { table: Arc::new(table), string_len })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let table = parse_regularizer(text).map_err(err)?;
        let string_len = table.points();
        Ok(Self { table: Arc::new(table), string_len })
    }

    fn to_json(&self) -> PyResult<String> {
        regularizer_to_json(&self.table, self.string_len).map_err(err)
    }

    #[getter]
    fn locally_injective(&self) -> bool {
        self.table.is_locally_injective()
    }

    /// Breaks rank ties by hypothesis id, yielding an injective table.
    fn completed(&self) -> PyResult<Self> {
        Ok(Self {
            table: Arc::new(self.table.complete_by_id().map_err(err)?),
            string_len: self.string_len,
        })
    }

    fn rank(&self, a: &str, b: &str, x: usize) -> PyResult<u64> {
        let a: BitString = a.parse().map_err(err)?;
        let b: BitString = b.parse().map_err(err)?;
        let id = self
            .table
            .class()
            .id_of(&a, &b)
            .ok_or_else(|| PyValueError::new_err("hypothesis not in class"))?;
        if x >= self.table.points() {
            return Err(PyValueError::new_err("point out of range"));
        }
        Ok(self.table.rank(id, x))
    }

    /// Runs the induced learner: training is [(x, (tag, payload)), ...].
    fn predict(&self, training: Vec<(u64, (u8, String))>, test: u64) -> PyResult<(u8, String)> {
        let learner = induced_learner(Arc::clone(&self.table)).map_err(err)?;
        let examples = training
            .into_iter()
            .map(|(x, (tag, payload))| {
                Ok((x, otplab::hypotheses::Label::new(tag, payload.parse().map_err(err)?)))
            })
            .collect::<PyResult<Vec<_>>>()?;
        let label = learner.predict(&LabeledSample::new(examples), test).map_err(err)?;
        Ok((label.tag, label.payload.to_string()))
    }
}

/// Number of hypotheses in the enumerated class over strings of length d.
#[pyfunction]
fn class_size(d: usize) -> PyResult<usize> {
    Ok(enumerate_class(d).map_err(err)?.len())
}

/// Number of hypotheses in the fixed-B subclass.
#[pyfunction]
fn cantor_class_size(d: usize) -> PyResult<usize> {
    Ok(cantor_class(d).map_err(err)?.len())
}

/// Runs the coupled-instance experiment; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (d, reg, mode="exhaustive", trials=10_000, seed=0, workers=1))]
fn run_adversary(
    d: usize,
    reg: &PyRegularizer,
    mode: &str,
    trials: u64,
    seed: u64,
    workers: usize,
) -> PyResult<String> {
    let mode = match mode {
        "exhaustive" => Mode::Exhaustive,
        "monte-carlo" => Mode::MonteCarlo,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report =
        run_experiment(d, &reg.table, mode, trials, &mut rng, workers).map_err(err)?;
    serde_json::to_string_pretty(&report).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// True iff x_test is conditionally uniform for the given instance family.
#[pyfunction]
fn uniformity_holds(d: usize, family: usize) -> PyResult<bool> {
    Ok(core_verify_uniformity(d, family).map_err(err)?.all_uniform)
}

/// Largest k <= kmax with a shattered k-subset of the candidate points.
#[pyfunction]
fn ds_dimension(d: usize, points: Vec<u64>, kmax: usize) -> PyResult<usize> {
    let class = enumerate_class(d).map_err(err)?;
    ds_dimension_upto(&class, &points, kmax).map_err(err)
}

/// Leave-one-out error of the baseline learner, as an exact "num/den" string.
#[pyfunction]
fn baseline_error(points: Vec<u64>, a: &str, b: &str) -> PyResult<String> {
    let h = OtpHypothesis::new(a.parse().map_err(err)?, b.parse().map_err(err)?).map_err(err)?;
    let inst = TransductiveInstance::new(points, h).map_err(err)?;
    Ok(ratio_string(transductive_error(&BaselineLearner, &inst).map_err(err)?))
}

#[pyfunction]
fn otp_split(secret: &str, seed: u64) -> PyResult<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shares = otp_share(&secret.parse().map_err(err)?, &mut rng).map_err(err)?;
    Ok((shares.share1.to_string(), shares.share2.to_string()))
}

#[pyfunction]
fn otp_combine(share1: &str, share2: &str) -> PyResult<String> {
    let shares =
        OtpShares { share1: share1.parse().map_err(err)?, share2: share2.parse().map_err(err)? };
    Ok(otp_reconstruct(&shares).map_err(err)?.to_string())
}

#[pyfunction]
fn shamir_split(k: u64, t: usize, n: usize, q: u64, seed: u64) -> PyResult<Vec<(u64, u64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shares = shamir_share(k, t, n, q, &mut rng).map_err(err)?;
    Ok(shares.into_iter().map(|s| (s.index, s.value)).collect())
}

#[pyfunction]
fn shamir_combine(shares: Vec<(u64, u64)>, t: usize, q: u64) -> PyResult<u64> {
    let shares: Vec<ShamirShare> = shares
        .into_iter()
        .map(|(index, value)| ShamirShare { index, value })
        .collect();
    shamir_reconstruct(&shares, t, q).map_err(err)
}

/// Exhaustively checks perfect secrecy of the (t, n) Shamir scheme mod q.
#[pyfunction]
fn shamir_secrecy_holds(t: usize, n: usize, q: u64) -> PyResult<bool> {
    Ok(verify_secrecy(t, n, q).map_err(err)?.holds)
}

#[pymodule]
fn otplab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHypothesis>()?;
    m.add_class::<PyRegularizer>()?;
    m.add_function(wrap_pyfunction!(class_size, m)?)?;
    m.add_function(wrap_pyfunction!(cantor_class_size, m)?)?;
    m.add_function(wrap_pyfunction!(run_adversary, m)?)?;
    m.add_function(wrap_pyfunction!(uniformity_holds, m)?)?;
    m.add_function(wrap_pyfunction!(ds_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_error, m)?)?;
    m.add_function(wrap_pyfunction!(otp_split, m)?)?;
    m.add_function(wrap_pyfunction!(otp_combine, m)?)?;
    m.add_function(wrap_pyfunction!(shamir_split, m)?)?;
    m.add_function(wrap_pyfunction!(shamir_combine, m)?)?;
    m.add_function(wrap_pyfunction!(shamir_secrecy_holds, m)?)?;
    Ok(())
}
