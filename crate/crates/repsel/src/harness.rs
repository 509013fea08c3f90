//! Benchmark harness: dataset generation with a hidden ground-truth
//! program, the method pipelines, and CSV emission.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cegis::{run_cegis, run_ours, SynthesisOutcome};
use crate::core::{Dataset, Example, ProgramSpace};
use crate::domains::{
    DfaSpace, DrawingSpace, Grid, OrderingSpace, SpaceConfig,
};
use crate::error::{Error, Result};
use crate::predictor::{NeuralModel, NnPredictor, Predictor};
use crate::selection::{h1_dfa_select, h1_draw_select, hasse_select, random_select};
use crate::solver::{fits, CeStrategy, DEFAULT_SOLVER_BUDGET};
use crate::verify::{is_representative, Tri};

pub struct GenOutput<P, I, O> {
    pub data: Dataset<I, O>,
    pub hidden: P,
}

/// Samples a hidden permutation and `size` distinct ordered pairs labeled
/// by it. Mirrored pairs count as distinct examples.
pub fn gen_ordering_dataset(
    space: &OrderingSpace,
    size: usize,
    seed: u64,
) -> Result<GenOutput<Vec<u8>, (u8, u8), bool>> {
    let n = space.n() as u8;
    let universe = space.n() * (space.n() - 1);
    if size > universe {
        return Err(Error::InvalidInput(format!(
            "requested {size} pairs but only {universe} exist"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = space.params_from_ordinal(rng.gen_range(0..space.space_size()));
    let mut pairs: Vec<(u8, u8)> = Vec::with_capacity(universe);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    pairs.shuffle(&mut rng);
    let mut data = Dataset::new();
    for &p in pairs.iter().take(size) {
        data.push(Example::new(p, space.evaluate(&hidden, &p)))?;
    }
    Ok(GenOutput { data, hidden })
}

/// Samples a hidden automaton and `size` distinct strings with lengths in
/// the inclusive range, labeled by it.
pub fn gen_dfa_dataset(
    space: &DfaSpace,
    size: usize,
    len_range: (usize, usize),
    seed: u64,
) -> Result<GenOutput<crate::domains::DfaParams, String, bool>> {
    let (lo, hi) = len_range;
    if lo > hi {
        return Err(Error::InvalidInput("empty length range".into()));
    }
    let universe: u128 = (lo..=hi).map(|l| 1u128 << l).sum();
    if size as u128 > universe {
        return Err(Error::InvalidInput(format!(
            "requested {size} strings but only {universe} exist in lengths {lo}..={hi}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = space.params_from_ordinal(rng.gen_range(0..space.space_size()));
    let mut seen = std::collections::HashSet::new();
    let mut data = Dataset::new();
    while data.len() < size {
        let len = rng.gen_range(lo..=hi);
        let s: String = (0..len).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect();
        if seen.insert(s.clone()) {
            let out = space.evaluate(&hidden, &s);
            data.push(Example::new(s, out))?;
        }
    }
    Ok(GenOutput { data, hidden })
}

/// Samples a hidden drawing program; the dataset covers every pixel of its
/// rendering.
pub fn gen_drawing_dataset(
    space: &DrawingSpace,
    seed: u64,
) -> Result<GenOutput<crate::domains::DrawProgram, (u8, u8), bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = space.params_from_ordinal(rng.gen_range(0..space.space_size()));
    let grid = space.render(&hidden);
    let mut data = Dataset::new();
    for r in 0..space.height() {
        for c in 0..space.width() {
            data.push(Example::new((r, c), grid.get(r, c)))?;
        }
    }
    Ok(GenOutput { data, hidden })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Full,
    Cegis,
    Rcegis,
    Acegis,
    RandCegis,
    H1Cegis,
    Ours,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "full" => Method::Full,
            "cegis" => Method::Cegis,
            "rcegis" => Method::Rcegis,
            "acegis" => Method::Acegis,
            "rand-cegis" => Method::RandCegis,
            "h1-cegis" => Method::H1Cegis,
            "ours" => Method::Ours,
            other => return Err(Error::InvalidInput(format!("unknown method {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Cegis => "cegis",
            Method::Rcegis => "rcegis",
            Method::Acegis => "acegis",
            Method::RandCegis => "rand-cegis",
            Method::H1Cegis => "h1-cegis",
            Method::Ours => "ours",
        }
    }
}

fn default_fraction() -> f64 {
    0.2
}

fn default_tau() -> f64 {
    0.95
}

fn default_budget() -> u64 {
    DEFAULT_SOLVER_BUDGET
}

/// One benchmark task: a space, a generated dataset, and the methods to run
/// on it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskConfig {
    pub task_id: String,
    pub space: SpaceConfig,
    /// Dataset size; ignored for drawings, which always use every pixel.
    #[serde(default)]
    pub size: usize,
    pub seed: u64,
    pub methods: Vec<String>,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Trained model file, required by the `ours` method.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default = "default_budget")]
    pub solver_budget: u64,
    /// String length range for DFA generation.
    #[serde(default)]
    pub dfa_len_range: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub task_id: String,
    pub method: String,
    pub subset_size: u64,
    pub representative: Tri,
    pub synth_consistent: bool,
    pub cegis_iterations: u64,
    pub solver_nodes: u64,
    pub wall_ms: u64,
    pub seed: u64,
}

fn record_from_outcome<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    outcome: &SynthesisOutcome<S::Params, S::Input, S::Output>,
    task: &TaskConfig,
    method: Method,
    wall_ms: u64,
) -> RunRecord {
    let mut final_subset = outcome.initial_subset.clone();
    for ce in outcome.counterexamples_added.iter() {
        final_subset.push(ce.clone()).expect("counterexamples are fresh inputs");
    }
    let representative = is_representative(space, data, &final_subset, task.solver_budget)
        .map(|r| r.verdict)
        .unwrap_or(Tri::Unknown);
    RunRecord {
        task_id: task.task_id.clone(),
        method: method.name().to_string(),
        subset_size: final_subset.len() as u64,
        representative,
        synth_consistent: fits(space, &outcome.program, data),
        cegis_iterations: outcome.iterations,
        solver_nodes: outcome.solver_nodes,
        wall_ms,
        seed: task.seed,
    }
}

fn failure_record(task: &TaskConfig, method: Method, wall_ms: u64, err: &Error) -> RunRecord {
    eprintln!("task {} method {}: {err}", task.task_id, method.name());
    RunRecord {
        task_id: task.task_id.clone(),
        method: method.name().to_string(),
        subset_size: 0,
        representative: Tri::Unknown,
        synth_consistent: false,
        cegis_iterations: 0,
        solver_nodes: 0,
        wall_ms,
        seed: task.seed,
    }
}

/// Knobs shared by every method pipeline.
#[derive(Debug, Clone, Copy)]
pub struct MethodParams {
    pub seed: u64,
    pub budget: u64,
    pub fraction: f64,
    pub tau: f64,
}

impl TaskConfig {
    fn method_params(&self) -> MethodParams {
        MethodParams {
            seed: self.seed,
            budget: self.solver_budget,
            fraction: self.fraction,
            tau: self.tau,
        }
    }
}

/// Runs one method pipeline: pick the initial subset its way, then complete
/// with the CEGIS loop. `h1` supplies the domain heuristic subset; `nn` is
/// required by `ours`.
pub fn run_method<S>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    h1: impl Fn() -> Result<Dataset<S::Input, S::Output>>,
    nn: Option<&dyn Predictor<S>>,
    method: Method,
    params: &MethodParams,
) -> Result<SynthesisOutcome<S::Params, S::Input, S::Output>>
where
    S: ProgramSpace,
{
    let budget = params.budget;
    let seed = params.seed;
    match method {
        Method::Full => run_cegis(space, data, data, CeStrategy::Canonical, seed, budget),
        Method::Cegis => {
            run_cegis(space, data, &Dataset::new(), CeStrategy::Canonical, seed, budget)
        }
        Method::Rcegis => run_cegis(space, data, &Dataset::new(), CeStrategy::Random, seed, budget),
        Method::Acegis => {
            run_cegis(space, data, &Dataset::new(), CeStrategy::FixedArbitrary, seed, budget)
        }
        Method::RandCegis => {
            let initial = random_select(data, params.fraction, seed)?;
            run_cegis(space, data, &initial.subset, CeStrategy::Canonical, seed, budget)
        }
        Method::H1Cegis => {
            let initial = h1()?;
            run_cegis(space, data, &initial, CeStrategy::Canonical, seed, budget)
        }
        Method::Ours => {
            let predictor = nn.ok_or_else(|| {
                Error::InvalidInput("method `ours` requires a trained model".into())
            })?;
            run_ours(space, data, &predictor, params.tau, CeStrategy::Canonical, seed, budget)
        }
    }
}

fn run_task(task: &TaskConfig) -> Vec<RunRecord> {
    let model = task.model.as_ref().map(NeuralModel::load);
    let mut records = Vec::new();

    for name in &task.methods {
        let method = match Method::parse(name) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("task {} method {name}: {e}", task.task_id);
                records.push(RunRecord {
                    task_id: task.task_id.clone(),
                    method: name.clone(),
                    subset_size: 0,
                    representative: Tri::Unknown,
                    synth_consistent: false,
                    cegis_iterations: 0,
                    solver_nodes: 0,
                    wall_ms: 0,
                    seed: task.seed,
                });
                continue;
            }
        };
        let start = Instant::now();
        let record = match &task.space {
            SpaceConfig::Ordering { n } => (|| -> Result<RunRecord> {
                let space = OrderingSpace::new(*n)?;
                let gen = gen_ordering_dataset(&space, task.size, task.seed)?;
                let nn = match (&model, method) {
                    (Some(Ok(m)), Method::Ours) => Some(NnPredictor::new(m.clone())),
                    (Some(Err(e)), Method::Ours) => {
                        return Err(Error::InvalidInput(format!("model load failed: {e}")))
                    }
                    _ => None,
                };
                let outcome = run_method(
                    &space,
                    &gen.data,
                    || hasse_select(&gen.data),
                    nn.as_ref().map(|p| p as &dyn Predictor<OrderingSpace>),
                    method,
                    &task.method_params(),
                )?;
                let wall = start.elapsed().as_millis() as u64;
                Ok(record_from_outcome(&space, &gen.data, &outcome, task, method, wall))
            })(),
            SpaceConfig::Dfa { num_states } => (|| -> Result<RunRecord> {
                let space = DfaSpace::new(*num_states)?;
                let len_range = task.dfa_len_range.unwrap_or((5, 10));
                let gen = gen_dfa_dataset(&space, task.size, len_range, task.seed)?;
                let nn = match (&model, method) {
                    (Some(Ok(m)), Method::Ours) => Some(NnPredictor::new(m.clone())),
                    (Some(Err(e)), Method::Ours) => {
                        return Err(Error::InvalidInput(format!("model load failed: {e}")))
                    }
                    _ => None,
                };
                let outcome = run_method(
                    &space,
                    &gen.data,
                    || Ok(h1_dfa_select(&gen.data, task.seed)),
                    nn.as_ref().map(|p| p as &dyn Predictor<DfaSpace>),
                    method,
                    &task.method_params(),
                )?;
                let wall = start.elapsed().as_millis() as u64;
                Ok(record_from_outcome(&space, &gen.data, &outcome, task, method, wall))
            })(),
            SpaceConfig::Drawing { width, height, grammar } => (|| -> Result<RunRecord> {
                let space = DrawingSpace::new(*width, *height, grammar.clone())?;
                let gen = gen_drawing_dataset(&space, task.seed)?;
                let target = grid_from_full_dataset(*width, *height, &gen.data)?;
                let nn = match (&model, method) {
                    (Some(Ok(m)), Method::Ours) => Some(NnPredictor::new(m.clone())),
                    (Some(Err(e)), Method::Ours) => {
                        return Err(Error::InvalidInput(format!("model load failed: {e}")))
                    }
                    _ => None,
                };
                let outcome = run_method(
                    &space,
                    &gen.data,
                    || Ok(h1_draw_select(&target)),
                    nn.as_ref().map(|p| p as &dyn Predictor<DrawingSpace>),
                    method,
                    &task.method_params(),
                )?;
                let wall = start.elapsed().as_millis() as u64;
                Ok(record_from_outcome(&space, &gen.data, &outcome, task, method, wall))
            })(),
        };
        records.push(match record {
            Ok(r) => r,
            Err(e) => failure_record(task, method, start.elapsed().as_millis() as u64, &e),
        });
    }
    records
}

/// Rebuilds the target grid from a dataset that covers every pixel.
pub fn grid_from_full_dataset(
    width: u8,
    height: u8,
    data: &Dataset<(u8, u8), bool>,
) -> Result<Grid> {
    if data.len() != width as usize * height as usize {
        return Err(Error::InvalidInput(format!(
            "dataset has {} pixels, grid needs {}",
            data.len(),
            width as usize * height as usize
        )));
    }
    let mut grid = Grid::new(width, height);
    for e in data {
        grid.set(e.input.0, e.input.1, e.output);
    }
    Ok(grid)
}

/// Runs every task with up to `workers` in parallel. Per-task failures
/// become records; the batch never aborts. Records come back sorted by
/// task id and method order regardless of scheduling.
pub fn run_bench(tasks: &[TaskConfig], workers: usize) -> Vec<RunRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let mut indexed: Vec<(usize, Vec<RunRecord>)> = pool.install(|| {
        tasks.par_iter().enumerate().map(|(i, t)| (i, run_task(t))).collect()
    });
    indexed.sort_by(|a, b| {
        let ta = &tasks[a.0];
        let tb = &tasks[b.0];
        ta.task_id.cmp(&tb.task_id).then(a.0.cmp(&b.0))
    });
    indexed.into_iter().flat_map(|(_, r)| r).collect()
}

pub const CSV_HEADER: &str =
    "task_id,method,subset_size,representative,synth_consistent,cegis_iterations,solver_nodes,wall_ms,seed";

pub fn emit_csv<W: Write>(records: &[RunRecord], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let repr = match r.representative {
            Tri::True => "true",
            Tri::False => "false",
            Tri::Unknown => "unknown",
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.task_id,
            r.method,
            r.subset_size,
            repr,
            r.synth_consistent,
            r.cegis_iterations,
            r.solver_nodes,
            r.wall_ms,
            r.seed
        )?;
    }
    Ok(())
}
