//! Batch front end: JSON problem files in, JSON (or CSV) reports out.
//!
//! Exit codes: `0` computed (whatever the verdict), `2` invalid input,
//! `3` numerical failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::constrained_hardy::{h1_family_sweep, DEFAULT_GRID_DENSITY};
use crate::error::NpError;
use crate::finite_algebra::{
    block_family_test, build_algebra, family_pick_verdict, mask_of, np_gap, OptimizerOptions, DEFAULT_MAX_N,
    DEFAULT_SINGULAR_TOL,
};
use crate::io::{matrix_to_pairs, to_complex, to_matrix, ComplexInput};
use crate::kernels::{gram_matrix, KernelSpec, Node, DEFAULT_TRUNCATION};
use crate::npc::{complete_np_test, embed_drury_arveson, DEFAULT_NPC_TOL};
use crate::numerics::{HermitianMatrix, CONTAINMENT_TOL, DEFAULT_RANK_TOL};
use crate::pick::{block_pick, scalar_pick, InterpolationData, MatrixInterpolationData, DEFAULT_PICK_TOL};
use crate::schur::{boundary_sup, solve_classical, DEFAULT_BOUNDARY_SAMPLES, DEFAULT_SCHUR_TOL};
use crate::search::{search_violations, Candidate, Sampler, SearchParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nevpick", version, about = "Nevanlinna-Pick interpolation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a JSON problem file and emit a report.
    Run(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Problem file.
    pub problem: PathBuf,
    /// Global tolerance override.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Emit the tabular part of the report as CSV.
    #[arg(long)]
    pub csv: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid density for h1-sweep.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Largest algebra size accepted for lattice enumeration.
    #[arg(long = "max-n")]
    pub max_n: Option<usize>,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub struct RunError {
    pub code: i32,
    pub message: String,
}

impl RunError {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<NpError> for RunError {
    fn from(e: NpError) -> Self {
        Self {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INVALID },
            message: e.to_string(),
        }
    }
}

/// Attaches the offending field to a validation error.
fn field<T>(r: crate::error::Result<T>, name: &str) -> Result<T, RunError> {
    r.map_err(|e| {
        let mut err = RunError::from(e);
        if err.code == EXIT_INVALID {
            err.message = format!("{name}: {}", err.message);
        }
        err
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelInput {
    Szego,
    Bergman,
    DruryArveson { dim: usize },
    WeightedBergman { s: f64, truncation: Option<usize> },
    ExplicitGram { gram: Vec<Vec<ComplexInput>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NodeInput {
    Disk(ComplexInput),
    Ball(Vec<ComplexInput>),
}

impl NodeInput {
    fn to_node(&self) -> Result<Node, RunError> {
        match self {
            NodeInput::Disk(z) => Ok(Node::scalar((*z).into())),
            NodeInput::Ball(v) => Node::new(to_complex(v)).map_err(|_| RunError::invalid("nodes: empty coordinate list")),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerInput {
    pub restarts: Option<usize>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateInput {
    #[serde(rename = "S")]
    pub s: Vec<Vec<ComplexInput>>,
    pub a: Vec<ComplexInput>,
    #[serde(rename = "E")]
    pub e: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerInput {
    pub distribution: String,
    pub entry_range: Option<[i64; 2]>,
    pub integer_entries: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    PickCheck {
        kernel: KernelInput,
        nodes: Vec<NodeInput>,
        targets: Option<Vec<ComplexInput>>,
        matrix_targets: Option<Vec<Vec<Vec<ComplexInput>>>>,
        tol: Option<f64>,
    },
    PickSolve {
        nodes: Vec<ComplexInput>,
        targets: Vec<ComplexInput>,
        tol: Option<f64>,
        samples: Option<usize>,
    },
    H1Sweep {
        nodes: Vec<ComplexInput>,
        targets: Vec<ComplexInput>,
        grid: Option<usize>,
        tol: Option<f64>,
    },
    NpcTest {
        kernel: KernelInput,
        nodes: Option<Vec<NodeInput>>,
        base: Option<usize>,
        tol: Option<f64>,
    },
    NpcEmbed {
        kernel: KernelInput,
        nodes: Option<Vec<NodeInput>>,
        base: Option<usize>,
        tol: Option<f64>,
    },
    FiniteRun {
        #[serde(rename = "S")]
        s: Vec<Vec<ComplexInput>>,
        a: Vec<ComplexInput>,
        #[serde(rename = "E")]
        e: Vec<usize>,
        targets: Option<Vec<ComplexInput>>,
        matrix_targets: Option<Vec<Vec<Vec<ComplexInput>>>>,
        optimizer: Option<OptimizerInput>,
        seed: Option<u64>,
        tol: Option<f64>,
    },
    FiniteSearch {
        n: usize,
        e_size: usize,
        sampler: Option<SamplerInput>,
        seed: Option<u64>,
        budget: Option<usize>,
        threshold: Option<f64>,
        max_condition: Option<f64>,
        optimizer: Option<OptimizerInput>,
        inject: Option<Vec<CandidateInput>>,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::PickCheck { .. } => "pick-check",
            Task::PickSolve { .. } => "pick-solve",
            Task::H1Sweep { .. } => "h1-sweep",
            Task::NpcTest { .. } => "npc-test",
            Task::NpcEmbed { .. } => "npc-embed",
            Task::FiniteRun { .. } => "finite-run",
            Task::FiniteSearch { .. } => "finite-search",
        }
    }
}

/// Parses a problem document; all schema checks happen here.
pub fn parse_problem(text: &str) -> Result<(Value, Task), RunError> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| RunError::invalid(format!("malformed JSON: {e}")))?;
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| RunError::invalid("problem file must be a JSON object"))?;
    match obj.get("version").and_then(Value::as_u64) {
        Some(1) => {}
        Some(v) => return Err(RunError::invalid(format!("version: unsupported value {v}"))),
        None => return Err(RunError::invalid("version: missing or not an integer")),
    }
    let echo = Value::Object(obj.clone());
    obj.remove("version");
    let task: Task = serde_json::from_value(Value::Object(obj.clone())).map_err(|e| RunError::invalid(format!("{e}")))?;
    Ok((echo, task))
}

fn kernel_spec(k: &KernelInput, label_nodes: Option<&[Node]>) -> Result<KernelSpec, RunError> {
    Ok(match k {
        KernelInput::Szego => KernelSpec::Szego,
        KernelInput::Bergman => KernelSpec::Bergman,
        KernelInput::DruryArveson { dim } => KernelSpec::DruryArveson { dim: *dim },
        KernelInput::WeightedBergman { s, truncation } => KernelSpec::WeightedBergman {
            s: *s,
            truncation: truncation.unwrap_or(DEFAULT_TRUNCATION),
        },
        KernelInput::ExplicitGram { gram } => {
            let m = to_matrix(gram).ok_or_else(|| RunError::invalid("kernel.gram: ragged or empty matrix"))?;
            let g = HermitianMatrix::new(m).map_err(|e| RunError::invalid(format!("kernel.gram: {e}")))?;
            let nodes = match label_nodes {
                Some(n) => n.to_vec(),
                None => (0..g.dim()).map(|i| Node::real(i as f64)).collect(),
            };
            KernelSpec::ExplicitGram { gram: g, nodes }
        }
    })
}

fn nodes_of(inputs: &[NodeInput]) -> Result<Vec<Node>, RunError> {
    if inputs.is_empty() {
        return Err(RunError::invalid("nodes: at least one node is required"));
    }
    inputs.iter().map(NodeInput::to_node).collect()
}

fn disk_nodes(inputs: &[ComplexInput]) -> Vec<Node> {
    inputs.iter().map(|&z| Node::scalar(z.into())).collect()
}

/// Gram matrix for npc tasks: explicit grams need no nodes.
fn npc_gram(kernel: &KernelInput, nodes: &Option<Vec<NodeInput>>) -> Result<HermitianMatrix, RunError> {
    match (kernel, nodes) {
        (KernelInput::ExplicitGram { .. }, _) => {
            let spec = kernel_spec(kernel, None)?;
            match spec {
                KernelSpec::ExplicitGram { gram, .. } => Ok(gram),
                _ => unreachable!(),
            }
        }
        (_, Some(n)) => {
            let nodes = nodes_of(n)?;
            field(gram_matrix(&kernel_spec(kernel, None)?, &nodes), "nodes")
        }
        (_, None) => Err(RunError::invalid("nodes: required for this kernel")),
    }
}

fn matrices(inputs: &[Vec<Vec<ComplexInput>>], field: &str) -> Result<Vec<crate::numerics::CMatrix>, RunError> {
    inputs
        .iter()
        .enumerate()
        .map(|(k, m)| to_matrix(m).ok_or_else(|| RunError::invalid(format!("{field}[{k}]: ragged or empty matrix"))))
        .collect()
}

fn optimizer_options(input: &Option<OptimizerInput>, args: &RunArgs, seed: u64, default: OptimizerOptions) -> OptimizerOptions {
    let inp = input.clone().unwrap_or_default();
    OptimizerOptions {
        restarts: args.restarts.or(inp.restarts).unwrap_or(default.restarts),
        max_iter: inp.max_iter.unwrap_or(default.max_iter),
        tol: args.tol.or(inp.tol).unwrap_or(default.tol),
        seed,
    }
}

fn one_based_mask(e: &[usize], n: usize, field: &str) -> Result<u64, RunError> {
    if e.is_empty() {
        return Err(RunError::invalid(format!("{field}: must be nonempty")));
    }
    let mut zero_based = Vec::with_capacity(e.len());
    for &i in e {
        if i == 0 || i > n {
            return Err(RunError::invalid(format!("{field}: index {i} outside 1..={n}")));
        }
        if zero_based.contains(&(i - 1)) {
            return Err(RunError::invalid(format!("{field}: index {i} repeated")));
        }
        zero_based.push(i - 1);
    }
    Ok(mask_of(&zero_based))
}

/// Validated inputs of a finite-run, before any numerics.
struct FiniteRunInput {
    s: crate::numerics::CMatrix,
    a: Vec<crate::numerics::C64>,
    e: u64,
    targets: Option<Vec<crate::numerics::C64>>,
    matrix_targets: Option<Vec<crate::numerics::CMatrix>>,
}

fn validate_finite_run(
    s: &[Vec<ComplexInput>],
    a: &[ComplexInput],
    e: &[usize],
    targets: &Option<Vec<ComplexInput>>,
    matrix_targets: &Option<Vec<Vec<Vec<ComplexInput>>>>,
    max_n: usize,
) -> Result<FiniteRunInput, RunError> {
    let s = to_matrix(s).ok_or_else(|| RunError::invalid("S: ragged or empty matrix"))?;
    if s.nrows() != s.ncols() {
        return Err(RunError::invalid(format!("S: must be square, got {}x{}", s.nrows(), s.ncols())));
    }
    let n = s.nrows();
    if n > max_n {
        return Err(RunError::invalid(format!("S: size {n} exceeds the lattice cap {max_n} (see --max-n)")));
    }
    if a.len() != n {
        return Err(RunError::invalid(format!("a: expected {n} coefficients, found {}", a.len())));
    }
    let mask = one_based_mask(e, n, "E")?;
    let targets = match targets {
        Some(t) if t.len() != e.len() => {
            return Err(RunError::invalid(format!("targets: expected {} values over E, found {}", e.len(), t.len())))
        }
        Some(t) => Some(to_complex(t)),
        None => None,
    };
    let matrix_targets = match matrix_targets {
        Some(t) if t.len() != e.len() => {
            return Err(RunError::invalid(format!("matrix_targets: expected {} matrices, found {}", e.len(), t.len())))
        }
        Some(t) => Some(matrices(t, "matrix_targets")?),
        None => None,
    };
    Ok(FiniteRunInput {
        s,
        a: to_complex(a),
        e: mask,
        targets,
        matrix_targets,
    })
}

/// A computed report plus an optional CSV rendering of its table.
pub struct Outcome {
    pub result: Value,
    pub tolerances: Value,
    pub seed: Option<u64>,
    pub table: Option<(Vec<String>, Vec<Vec<String>>)>,
}

fn fmt(x: f64) -> String {
    format!("{x:?}")
}

pub fn execute(task: &Task, args: &RunArgs) -> Result<Outcome, RunError> {
    match task {
        Task::PickCheck {
            kernel,
            nodes,
            targets,
            matrix_targets,
            tol,
        } => {
            let nodes = nodes_of(nodes)?;
            let tol = args.tol.or(*tol).unwrap_or(DEFAULT_PICK_TOL);
            let spec = kernel_spec(kernel, Some(&nodes))?;
            let result = match (targets, matrix_targets) {
                (Some(t), None) => {
                    let data = field(InterpolationData::new(nodes.clone(), to_complex(t)), "nodes/targets")?;
                    let gram = field(gram_matrix(&spec, &nodes), "nodes")?;
                    serde_json::to_value(scalar_pick(&data, &gram, tol)?).expect("serializable")
                }
                (None, Some(m)) => {
                    let data = field(
                        MatrixInterpolationData::new(nodes.clone(), matrices(m, "matrix_targets")?),
                        "nodes/matrix_targets",
                    )?;
                    let gram = field(gram_matrix(&spec, &nodes), "nodes")?;
                    serde_json::to_value(block_pick(&data, &gram, tol)?).expect("serializable")
                }
                _ => return Err(RunError::invalid("exactly one of targets or matrix_targets is required")),
            };
            Ok(Outcome {
                result,
                tolerances: json!({"pick_relative": tol}),
                seed: None,
                table: None,
            })
        }
        Task::PickSolve {
            nodes,
            targets,
            tol,
            samples,
        } => {
            let tol = args.tol.or(*tol).unwrap_or(DEFAULT_SCHUR_TOL);
            let samples = samples.unwrap_or(DEFAULT_BOUNDARY_SAMPLES);
            if samples < 16 {
                return Err(RunError::invalid("samples: must be at least 16"));
            }
            let data = field(InterpolationData::new(disk_nodes(nodes), to_complex(targets)), "nodes/targets")?;
            let outcome = field(solve_classical(&data, tol), "nodes")?;
            let sup = outcome.interpolant().map(|f| boundary_sup(f, samples));
            Ok(Outcome {
                result: json!({"outcome": outcome, "boundary_sup": sup, "boundary_samples": samples}),
                tolerances: json!({"pick_relative": tol}),
                seed: None,
                table: None,
            })
        }
        Task::H1Sweep {
            nodes,
            targets,
            grid,
            tol,
        } => {
            let tol = args.tol.or(*tol).unwrap_or(DEFAULT_PICK_TOL);
            let density = args.grid.or(*grid).unwrap_or(DEFAULT_GRID_DENSITY);
            if density < 8 {
                return Err(RunError::invalid("grid: density must be at least 8"));
            }
            let data = field(InterpolationData::new(disk_nodes(nodes), to_complex(targets)), "nodes/targets")?;
            let rep = field(h1_family_sweep(&data, density, tol), "nodes")?;
            let rows = rep
                .grid
                .iter()
                .map(|p| vec![fmt(p.theta), fmt(p.phi), fmt(p.min_eigenvalue)])
                .collect();
            Ok(Outcome {
                result: serde_json::to_value(&rep).expect("serializable"),
                tolerances: json!({"family_relative": tol, "grid_density": density}),
                seed: None,
                table: Some((vec!["theta".into(), "phi".into(), "min_eigenvalue".into()], rows)),
            })
        }
        Task::NpcTest { kernel, nodes, base, tol } => {
            let tol = args.tol.or(*tol).unwrap_or(DEFAULT_NPC_TOL);
            let gram = npc_gram(kernel, nodes)?;
            let rep = field(complete_np_test(&gram, base.unwrap_or(0), tol), "base")?;
            Ok(Outcome {
                result: json!({
                    "verdict": rep.verdict,
                    "base": rep.base,
                    "f_matrix": matrix_to_pairs(rep.f_matrix.matrix()),
                    "scope": if rep.verdict.is_psd { "restriction passes" } else { "restriction fails" },
                }),
                tolerances: json!({"npc_absolute": tol}),
                seed: None,
                table: None,
            })
        }
        Task::NpcEmbed { kernel, nodes, base, tol } => {
            let tol = args.tol.or(*tol).unwrap_or(DEFAULT_NPC_TOL);
            let gram = npc_gram(kernel, nodes)?;
            let emb = embed_drury_arveson(&gram, base.unwrap_or(0), tol)?;
            Ok(Outcome {
                result: json!({
                    "embedding": emb,
                    "delta_convention": "delta_i = g(base, i) / sqrt(g(base, base))",
                }),
                tolerances: json!({"npc_absolute": tol, "rank_cut_relative": 1e-10}),
                seed: None,
                table: None,
            })
        }
        Task::FiniteRun {
            s,
            a,
            e,
            targets,
            matrix_targets,
            optimizer,
            seed,
            tol,
        } => {
            let max_n = args.max_n.unwrap_or(DEFAULT_MAX_N);
            let input = validate_finite_run(s, a, e, targets, matrix_targets, max_n)?;
            let seed = args.seed.or(*seed).unwrap_or(0);
            let opt = optimizer_options(optimizer, args, seed, OptimizerOptions::default());
            let pick_tol = args.tol.or(*tol).unwrap_or(DEFAULT_PICK_TOL);
            let alg = build_algebra(&input.s, DEFAULT_SINGULAR_TOL)?;
            let rep = np_gap(&alg, &input.a, input.e, &opt)?;
            let family = match &input.targets {
                Some(t) => Some(family_pick_verdict(&alg, input.e, t, pick_tol)?),
                None => None,
            };
            let block = match &input.matrix_targets {
                Some(t) => Some(block_family_test(&alg, input.e, t, pick_tol)?),
                None => None,
            };
            let rows = rep
                .per_sigma
                .iter()
                .map(|s| {
                    let label: Vec<String> = s.sigma.iter().map(|i| i.to_string()).collect();
                    vec![label.join(" "), s.dim.to_string(), fmt(s.norm)]
                })
                .collect();
            Ok(Outcome {
                result: json!({
                    "report": rep,
                    "algebra": {
                        "n": alg.n(),
                        "condition_number": alg.condition_number(),
                        "duality_defect": alg.duality_defect(),
                        "idempotent_defect": alg.idempotent_defect(),
                    },
                    "family_pick": family,
                    "block_family": block,
                }),
                tolerances: json!({
                    "optimizer": opt,
                    "pick_relative": pick_tol,
                    "rank_relative": DEFAULT_RANK_TOL,
                    "containment": CONTAINMENT_TOL,
                    "singular_ratio": DEFAULT_SINGULAR_TOL,
                    "max_n": max_n,
                }),
                seed: Some(seed),
                table: Some((vec!["sigma".into(), "dim".into(), "compression_norm".into()], rows)),
            })
        }
        Task::FiniteSearch {
            n,
            e_size,
            sampler,
            seed,
            budget,
            threshold,
            max_condition,
            optimizer,
            inject,
        } => {
            let max_n = args.max_n.unwrap_or(DEFAULT_MAX_N);
            if *n > max_n {
                return Err(RunError::invalid(format!("n: {n} exceeds the lattice cap {max_n} (see --max-n)")));
            }
            let mut params = SearchParams::new(*n, *e_size);
            params.seed = args.seed.or(*seed).unwrap_or(0);
            params.budget = args.budget.or(*budget).unwrap_or(params.budget);
            params.threshold = args.threshold.or(*threshold).unwrap_or(params.threshold);
            params.max_condition = max_condition.unwrap_or(params.max_condition);
            params.optimizer = optimizer_options(optimizer, args, params.seed, params.optimizer);
            if let Some(sm) = sampler {
                params.sampler = match (sm.distribution.as_str(), sm.integer_entries) {
                    ("gaussian", Some(true)) => {
                        return Err(RunError::invalid("sampler.integer_entries: not available for gaussian"))
                    }
                    ("gaussian", _) => Sampler::Gaussian,
                    ("uniform", _) | ("integer", _) => {
                        let [lo, hi] = sm.entry_range.unwrap_or([-3, 3]);
                        Sampler::Integer { lo, hi }
                    }
                    (other, _) => return Err(RunError::invalid(format!("sampler.distribution: unknown value {other:?}"))),
                };
            }
            for (k, c) in inject.iter().flatten().enumerate() {
                let s = to_matrix(&c.s).ok_or_else(|| RunError::invalid(format!("inject[{k}].S: ragged or empty matrix")))?;
                if s.nrows() != *n || s.ncols() != *n {
                    return Err(RunError::invalid(format!("inject[{k}].S: expected {n}x{n}")));
                }
                if c.a.len() != *n {
                    return Err(RunError::invalid(format!("inject[{k}].a: expected {n} coefficients")));
                }
                let mask = one_based_mask(&c.e, *n, &format!("inject[{k}].E"))?;
                params.inject.push(Candidate {
                    s,
                    a: to_complex(&c.a),
                    e: crate::finite_algebra::members(mask, *n),
                });
            }
            let out = search_violations(&params)?;
            let rows = out
                .violations
                .iter()
                .map(|v| {
                    let id = match (v.sample, v.injected) {
                        (Some(k), _) => k.to_string(),
                        (_, Some(k)) => format!("inject{k}"),
                        _ => String::new(),
                    };
                    vec![id, fmt(v.report.gap), fmt(v.report.distance), fmt(v.report.sup_compression)]
                })
                .collect();
            Ok(Outcome {
                result: serde_json::to_value(&out).expect("serializable"),
                tolerances: json!({
                    "threshold": params.threshold,
                    "max_condition": params.max_condition,
                    "optimizer": params.optimizer,
                    "sampler": params.sampler,
                    "budget": params.budget,
                }),
                seed: Some(params.seed),
                table: Some((
                    vec!["sample".into(), "gap".into(), "distance".into(), "sup_compression".into()],
                    rows,
                )),
            })
        }
    }
}

fn render_csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Runs one problem file and returns the rendered report.
pub fn run_problem(args: &RunArgs) -> Result<String, RunError> {
    let text = fs::read_to_string(&args.problem)
        .map_err(|e| RunError::invalid(format!("{}: {e}", args.problem.display())))?;
    run_text(&text, args)
}

pub fn run_text(text: &str, args: &RunArgs) -> Result<String, RunError> {
    let started = Instant::now();
    let (echo, task) = parse_problem(text)?;
    if args.csv && !matches!(task, Task::H1Sweep { .. } | Task::FiniteRun { .. } | Task::FiniteSearch { .. }) {
        return Err(RunError::invalid(format!("--csv: task {} has no tabular output", task.name())));
    }
    let outcome = execute(&task, args)?;
    if args.csv {
        let (header, rows) = outcome.table.expect("tabular tasks provide a table");
        return Ok(render_csv(&header, &rows));
    }
    let report = json!({
        "version": 1,
        "task": task.name(),
        "input": echo,
        "result": outcome.result,
        "tolerances": outcome.tolerances,
        "seed": outcome.seed,
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    Ok(serde_json::to_string_pretty(&report).expect("serializable") + "\n")
}

fn write_output(path: Option<&Path>, body: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, body),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::Run(args) => match run_problem(&args) {
            Ok(body) => match write_output(args.out.as_deref(), &body) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    eprintln!("error: cannot write report: {e}");
                    EXIT_INVALID
                }
            },
            Err(e) => {
                eprintln!("error: {}", e.message);
                e.code
            }
        },
    }
}
