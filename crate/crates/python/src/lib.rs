//! Python access to the closed forms, their oracles and the report runner.

use abg_finsler::analysis::{douglas_tensor, hamel_residual, projective_factor};
use abg_finsler::fields::{fixture, EvaluationPoint, FieldSet, FIXTURE_NAMES};
use abg_finsler::psi::{admissibility as sweep, GridSpec};
use abg_finsler::runner::{parse_config, parse_kernel, report_to_string, run as run_report, Command};
use abg_finsler::spray::{spray_closed, spray_oracle as direct_spray};
use abg_finsler::tensors::{cartan_closed, fundamental_closed, oracle_g, scalar_state};
use abg_finsler::{linalg, GeomError, PsiKernel};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

/// `(g, det g, g^{-1})`
type Fundamental = (Vec<Vec<f64>>, f64, Vec<Vec<f64>>);

fn err(e: GeomError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A bare family name such as `"exp_gamma"`, or a JSON kernel object.
fn kernel_from(spec: &str) -> PyResult<PsiKernel> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        format!("{{\"family\": \"{spec}\"}}")
    };
    parse_kernel(&text).map_err(err)
}

fn setup(name: &str, kernel: &str, x: Vec<f64>, y: Vec<f64>) -> PyResult<(FieldSet, PsiKernel, EvaluationPoint)> {
    let fs = fixture(name, x.len()).map_err(err)?;
    let k = kernel_from(kernel)?;
    let p = EvaluationPoint::new(x, y).map_err(err)?;
    Ok((fs, k, p))
}

#[pyfunction]
fn fixture_names() -> Vec<&'static str> {
    FIXTURE_NAMES.to_vec()
}

/// Closed-form `(g, det g, g^{-1})` at `(x, y)`.
#[pyfunction]
fn fundamental_tensor(
    fixture: &str,
    kernel: &str,
    x: Vec<f64>,
    y: Vec<f64>,
) -> PyResult<Fundamental> {
    let (fs, k, p) = setup(fixture, kernel, x, y)?;
    let st = scalar_state(&fs, &k, &p).map_err(err)?;
    let t = fundamental_closed(&st).map_err(err)?;
    Ok((t.g, t.det, t.ginv))
}

/// Hessian of `F^2/2` from exact jets.
#[pyfunction]
fn fundamental_tensor_oracle(fixture: &str, kernel: &str, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let (fs, k, p) = setup(fixture, kernel, x, y)?;
    oracle_g(&fs, &k, &p).map_err(err)
}

#[pyfunction]
fn cartan_tensor(fixture: &str, kernel: &str, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let (fs, k, p) = setup(fixture, kernel, x, y)?;
    let st = scalar_state(&fs, &k, &p).map_err(err)?;
    cartan_closed(&st).map_err(err)
}

#[pyfunction]
fn spray(fixture: &str, kernel: &str, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
    let (fs, k, p) = setup(fixture, kernel, x, y)?;
    Ok(spray_closed(&fs, &k, &p).map_err(err)?.g)
}

#[pyfunction]
fn spray_oracle(fixture: &str, kernel: &str, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<f64>> {
    let (fs, k, p) = setup(fixture, kernel, x, y)?;
    direct_spray(&fs, &k, &p).map_err(err)
}

#[pyfunction]
fn hamel(fixture: &str, kernel: &str, x: Vec<f64>, y: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
    let (fs, k, p) = setup(fixture, kernel, x, y)?;
    let h = hamel_residual(&fs, &k, &p).map_err(err)?;
    let pf = projective_factor(&fs, &k, &p).map_err(err)?;
    Ok((h, pf))
}

/// Largest entry of the Douglas tensor.
#[pyfunction]
fn douglas_norm(fixture: &str, kernel: &str, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    let (fs, k, p) = setup(fixture, kernel, x, y)?;
    let d = douglas_tensor(&fs, &k, &p).map_err(err)?;
    Ok(linalg::max_abs(linalg::flatten4(&d)))
}

/// Whether `Pi > 0, Gamma > 0` on the default sweep.
#[pyfunction]
#[pyo3(signature = (kernel, dimension = 3))]
fn admissible(kernel: &str, dimension: usize) -> PyResult<bool> {
    let k = kernel_from(kernel)?;
    Ok(sweep(&k, &GridSpec::default(), dimension).map_err(err)?.admissible)
}

/// Runs a command on a JSON config and returns the JSON report.
#[pyfunction]
fn run(config: &str, command: &str) -> PyResult<String> {
    let cfg = parse_config(config).map_err(err)?;
    let c: Command = command.parse().map_err(err)?;
    Ok(report_to_string(&run_report(&cfg, c).map_err(err)?))
}

#[pymodule]
fn abg_finsler_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add_function(wrap_pyfunction!(fundamental_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(fundamental_tensor_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(cartan_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(spray, m)?)?;
    m.add_function(wrap_pyfunction!(spray_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(hamel, m)?)?;
    m.add_function(wrap_pyfunction!(douglas_norm, m)?)?;
    m.add_function(wrap_pyfunction!(admissible, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
