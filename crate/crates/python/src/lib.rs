//! Python bindings for `nevpick`.
//!
//! Structured reports come back as plain dicts with the same layout as the
//! JSON written by the `nevpick` binary; complex numbers inside them are
//! `[re, im]` pairs. Matrices and vectors returned directly are nested lists
//! of Python `complex`. Index sets (`E`, `σ`) are 1-based, as in the reports.

use nevpick::cli::{run_text, RunArgs};
use nevpick::constrained_hardy::{h1_family_sweep, DEFAULT_GRID_DENSITY};
use nevpick::finite_algebra::{
    build_algebra, compression_sup, distance_to_ideal, np_gap, FiniteAlgebra, OptimizerOptions,
    DEFAULT_SINGULAR_TOL,
};
use nevpick::kernels::{gram_matrix, KernelSpec, Node};
use nevpick::npc::{complete_np_test, embed_drury_arveson, DEFAULT_NPC_TOL};
use nevpick::numerics::{CMatrix, HermitianMatrix};
use nevpick::pick::{scalar_pick, InterpolationData, DEFAULT_PICK_TOL};
use nevpick::schur::{boundary_sup, solve_classical, SchurInterpolant, DEFAULT_BOUNDARY_SAMPLES, DEFAULT_SCHUR_TOL};
use nevpick::search::{search_violations, SearchParams};
use nevpick::NpError;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

create_exception!(pynevpick, NumericalError, PyRuntimeError, "The computation failed on numerical grounds.");

fn err(e: NpError) -> PyErr {
    if e.is_numerical() {
        NumericalError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<Complex64>], what: &str) -> PyResult<CMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err(format!("{what}: rows have different lengths")));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn hermitian(rows: &[Vec<Complex64>]) -> PyResult<HermitianMatrix> {
    HermitianMatrix::new(matrix(rows, "gram")?).map_err(err)
}

/// `E` as a bit mask, from 1-based indices.
fn ideal(e: &[usize], n: usize) -> PyResult<u64> {
    e.iter().try_fold(0u64, |mask, &i| {
        if i == 0 || i > n {
            Err(PyValueError::new_err(format!("E: index {i} outside 1..={n}")))
        } else {
            Ok(mask | 1 << (i - 1))
        }
    })
}

#[derive(FromPyObject)]
enum NodeArg {
    Disk(Complex64),
    Ball(Vec<Complex64>),
}

fn nodes(args: Vec<NodeArg>) -> PyResult<Vec<Node>> {
    args.into_iter()
        .map(|a| match a {
            NodeArg::Disk(z) => Ok(Node::scalar(z)),
            NodeArg::Ball(v) => Node::new(v).map_err(err),
        })
        .collect()
}

fn kernel(name: &str, s: Option<f64>, dim: usize) -> PyResult<KernelSpec> {
    let spec = match name {
        "szego" => KernelSpec::Szego,
        "bergman" => KernelSpec::Bergman,
        "drury_arveson" => KernelSpec::DruryArveson { dim },
        "weighted_bergman" => {
            KernelSpec::weighted_bergman(s.ok_or_else(|| PyValueError::new_err("weighted_bergman needs s"))?)
        }
        other => return Err(PyValueError::new_err(format!("unknown kernel {other:?}"))),
    };
    spec.validate().map_err(err)?;
    Ok(spec)
}

fn interpolation_data(zs: Vec<NodeArg>, targets: Vec<Complex64>) -> PyResult<InterpolationData> {
    InterpolationData::new(nodes(zs)?, targets).map_err(err)
}

/// Gram matrix `[k(zᵢ, zⱼ)]` of a named kernel.
#[pyfunction]
#[pyo3(signature = (kernel_name, points, s = None))]
fn gram(kernel_name: &str, points: Vec<NodeArg>, s: Option<f64>) -> PyResult<Vec<Vec<Complex64>>> {
    let points = nodes(points)?;
    let dim = points.first().map_or(1, Node::dim);
    let g = gram_matrix(&kernel(kernel_name, s, dim)?, &points).map_err(err)?;
    Ok(rows(g.matrix()))
}

/// Pick matrix test for `zᵢ ↦ wᵢ` in the space of a named kernel.
#[pyfunction]
#[pyo3(signature = (points, targets, kernel_name = "szego", s = None, tol = DEFAULT_PICK_TOL))]
fn pick_check<'py>(
    py: Python<'py>,
    points: Vec<NodeArg>,
    targets: Vec<Complex64>,
    kernel_name: &str,
    s: Option<f64>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let data = interpolation_data(points, targets)?;
    let dim = data.nodes().first().map_or(1, Node::dim);
    let g = gram_matrix(&kernel(kernel_name, s, dim)?, data.nodes()).map_err(err)?;
    to_py(py, &scalar_pick(&data, &g, tol).map_err(err)?)
}

/// A Schur-class function built by the Schur recursion.
#[pyclass(name = "SchurInterpolant", frozen)]
struct PySchurInterpolant(SchurInterpolant);

#[pymethods]
impl PySchurInterpolant {
    fn __call__(&self, z: Complex64) -> Complex64 {
        self.0.evaluate(z)
    }

    /// `(node, parameter)` pairs in peeling order.
    #[getter]
    fn steps(&self) -> Vec<(Complex64, Complex64)> {
        self.0.steps.clone()
    }

    #[getter]
    fn terminal(&self) -> Complex64 {
        self.0.terminal
    }

    #[pyo3(signature = (samples = DEFAULT_BOUNDARY_SAMPLES))]
    fn boundary_sup(&self, samples: usize) -> f64 {
        boundary_sup(&self.0, samples)
    }

    fn __repr__(&self) -> String {
        format!("SchurInterpolant(steps={})", self.0.steps.len())
    }
}

/// Classical disk problem. The returned dict has `status`, `pick` and,
/// when one exists, an `interpolant` callable.
#[pyfunction]
#[pyo3(signature = (points, targets, tol = DEFAULT_SCHUR_TOL))]
fn solve_classical_problem<'py>(
    py: Python<'py>,
    points: Vec<Complex64>,
    targets: Vec<Complex64>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let data = InterpolationData::on_disk(&points, &targets).map_err(err)?;
    let outcome = solve_classical(&data, tol).map_err(err)?;
    let out = to_py(py, &outcome)?;
    let interpolant = outcome.interpolant().map(|f| PySchurInterpolant(f.clone()));
    out.set_item("interpolant", interpolant)?;
    Ok(out)
}

/// Pick matrices of the constrained Hardy family over a `grid × grid` mesh.
#[pyfunction]
#[pyo3(signature = (points, targets, grid = DEFAULT_GRID_DENSITY, tol = DEFAULT_PICK_TOL))]
fn h1_sweep<'py>(
    py: Python<'py>,
    points: Vec<Complex64>,
    targets: Vec<Complex64>,
    grid: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let data = InterpolationData::on_disk(&points, &targets).map_err(err)?;
    to_py(py, &h1_family_sweep(&data, grid, tol).map_err(err)?)
}

/// Complete Nevanlinna-Pick test of a Gram matrix, normalized at `base`.
#[pyfunction]
#[pyo3(signature = (gram, base = 0, tol = DEFAULT_NPC_TOL))]
fn npc_test<'py>(py: Python<'py>, gram: Vec<Vec<Complex64>>, base: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let rep = complete_np_test(&hermitian(&gram)?, base, tol).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("verdict", to_py(py, &rep.verdict)?)?;
    out.set_item("f_matrix", rows(rep.f_matrix.matrix()))?;
    out.set_item("base", rep.base)?;
    Ok(out)
}

/// Embedding into the Drury-Arveson ball, returned as `(b, delta, residual)`.
#[pyfunction]
#[pyo3(signature = (gram, base = 0, tol = DEFAULT_NPC_TOL))]
fn npc_embed(
    gram: Vec<Vec<Complex64>>,
    base: usize,
    tol: f64,
) -> PyResult<(Vec<Vec<Complex64>>, Vec<Complex64>, f64)> {
    let e = embed_drury_arveson(&hermitian(&gram)?, base, tol).map_err(err)?;
    Ok((e.b, e.delta, e.residual))
}

/// The algebra spanned by the idempotents of `S · diag · S⁻¹`.
#[pyclass(name = "FiniteAlgebra", frozen)]
struct PyFiniteAlgebra(FiniteAlgebra);

fn optimizer(restarts: usize, seed: u64, tol: f64) -> OptimizerOptions {
    OptimizerOptions {
        restarts,
        seed,
        tol,
        ..OptimizerOptions::default()
    }
}

#[pymethods]
impl PyFiniteAlgebra {
    #[new]
    fn new(s: Vec<Vec<Complex64>>) -> PyResult<Self> {
        build_algebra(&matrix(&s, "S")?, DEFAULT_SINGULAR_TOL).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn condition_number(&self) -> f64 {
        self.0.condition_number()
    }

    #[getter]
    fn idempotents(&self) -> Vec<Vec<Vec<Complex64>>> {
        (0..self.0.n()).map(|i| rows(self.0.idempotent(i))).collect()
    }

    /// Compression norms over every `σ ⊇ E`.
    fn compressions<'py>(&self, py: Python<'py>, a: Vec<Complex64>, e: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        let mask = ideal(&e, self.0.n())?;
        to_py(py, &compression_sup(&self.0, &a, mask).map_err(err)?)
    }

    /// Distance from `Σ aᵢpᵢ` to the ideal spanned by `{pᵢ : i ∉ E}`.
    #[pyo3(signature = (a, e, restarts = 8, seed = 0, tol = 1e-9))]
    fn distance<'py>(
        &self,
        py: Python<'py>,
        a: Vec<Complex64>,
        e: Vec<usize>,
        restarts: usize,
        seed: u64,
        tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mask = ideal(&e, self.0.n())?;
        let d = distance_to_ideal(&self.0, &a, mask, &optimizer(restarts, seed, tol)).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("distance", d.distance)?;
        out.set_item("minimizer", d.minimizer)?;
        out.set_item("spread", d.spread)?;
        Ok(out)
    }

    /// Distance, compression supremum and their difference.
    #[pyo3(signature = (a, e, restarts = 8, seed = 0, tol = 1e-9))]
    fn gap<'py>(
        &self,
        py: Python<'py>,
        a: Vec<Complex64>,
        e: Vec<usize>,
        restarts: usize,
        seed: u64,
        tol: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let mask = ideal(&e, self.0.n())?;
        to_py(py, &np_gap(&self.0, &a, mask, &optimizer(restarts, seed, tol)).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("FiniteAlgebra(n={}, cond={:.3e})", self.0.n(), self.0.condition_number())
    }
}

/// Random search for algebras where distance and compression supremum differ.
#[pyfunction]
#[pyo3(signature = (n, e_size, seed = 0, budget = 1000, threshold = 1e-4))]
fn search<'py>(
    py: Python<'py>,
    n: usize,
    e_size: usize,
    seed: u64,
    budget: usize,
    threshold: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut params = SearchParams::new(n, e_size);
    params.seed = seed;
    params.budget = budget;
    params.threshold = threshold;
    to_py(py, &search_violations(&params).map_err(err)?)
}

/// Runs a problem document (JSON text) and returns the report.
#[pyfunction]
#[pyo3(signature = (problem, seed = None, tol = None, grid = None, restarts = None, budget = None, threshold = None, max_n = None))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    problem: &str,
    seed: Option<u64>,
    tol: Option<f64>,
    grid: Option<usize>,
    restarts: Option<usize>,
    budget: Option<usize>,
    threshold: Option<f64>,
    max_n: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let args = RunArgs {
        seed,
        tol,
        grid,
        restarts,
        budget,
        threshold,
        max_n,
        ..RunArgs::default()
    };
    match run_text(problem, &args) {
        Ok(text) => py.import("json")?.call_method1("loads", (text,)),
        Err(e) if e.code == 3 => Err(NumericalError::new_err(e.message)),
        Err(e) => Err(PyValueError::new_err(e.message)),
    }
}

#[pymodule]
fn pynevpick(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PySchurInterpolant>()?;
    m.add_class::<PyFiniteAlgebra>()?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(pick_check, m)?)?;
    m.add_function(wrap_pyfunction!(solve_classical_problem, m)?)?;
    m.add_function(wrap_pyfunction!(h1_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(npc_test, m)?)?;
    m.add_function(wrap_pyfunction!(npc_embed, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pyo3::types::PyModule;

    fn attach(f: impl for<'py> FnOnce(Python<'py>)) {
        Python::initialize();
        Python::attach(f)
    }

    fn module(py: Python<'_>) -> Bound<'_, PyModule> {
        let m = PyModule::new(py, "pynevpick").unwrap();
        pynevpick(&m).unwrap();
        m
    }

    #[test]
    fn classical_problem_round_trip() {
        attach(|py| {
            let m = module(py);
            let res = m
                .getattr("solve_classical_problem")
                .unwrap()
                .call1((vec![0.0, 0.5], vec![0.0, 0.25]))
                .unwrap();
            assert_eq!(res.get_item("status").unwrap().extract::<String>().unwrap(), "solved");
            let f = res.get_item("interpolant").unwrap();
            let v: Complex64 = f.call1((Complex64::new(0.5, 0.0),)).unwrap().extract().unwrap();
            assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-12);
        });
    }

    #[test]
    fn finite_algebra_reports_gap() {
        attach(|py| {
            let m = module(py);
            let s: Vec<Vec<f64>> = vec![
                vec![3.0, 1.0, 1.0, 0.0, -1.0],
                vec![0.0, 1.0, -2.0, -1.0, 0.0],
                vec![-1.0, 0.0, -1.0, 1.0, -1.0],
                vec![-1.0, 1.0, 2.0, 1.0, -1.0],
                vec![1.0, 1.0, 3.0, 1.0, -2.0],
            ];
            let alg = m.getattr("FiniteAlgebra").unwrap().call1((s,)).unwrap();
            let rep = alg
                .call_method1("gap", (vec![-2.0, -3.0, 7.0, 0.0, 0.0], vec![1usize, 2, 3]))
                .unwrap();
            let gap: f64 = rep.get_item("gap").unwrap().extract().unwrap();
            assert!(gap > 1.2, "{gap}");
        });
    }

    #[test]
    fn errors_map_to_python_exceptions() {
        attach(|py| {
            let m = module(py);
            let singular = m.getattr("FiniteAlgebra").unwrap().call1((vec![vec![1.0, 2.0], vec![2.0, 4.0]],));
            assert!(singular.unwrap_err().is_instance_of::<NumericalError>(py));
            let outside = m.getattr("gram").unwrap().call1(("szego", vec![1.5]));
            assert!(outside.unwrap_err().is_instance_of::<PyValueError>(py));
            let bad_e = m
                .getattr("FiniteAlgebra")
                .unwrap()
                .call1((vec![vec![1.0, 0.0], vec![0.0, 1.0]],))
                .unwrap()
                .call_method1("compressions", (vec![1.0, 0.0], vec![3usize]));
            assert!(bad_e.unwrap_err().to_string().contains("E:"));
        });
    }
}
