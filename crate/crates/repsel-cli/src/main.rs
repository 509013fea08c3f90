use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use repsel::cegis::SynthesisOutcome;
use repsel::core::{Dataset, ProgramSpace, DEFAULT_SPACE_CAP};
use repsel::domains::{DfaSpace, DrawingSpace, OrderingSpace, SpaceConfig};
use repsel::harness::{
    emit_csv, gen_dfa_dataset, gen_drawing_dataset, gen_ordering_dataset, grid_from_full_dataset,
    run_bench, run_method, Method, MethodParams, TaskConfig,
};
use repsel::predictor::{
    train_committee, Arch, ExactPosterior, ModelForm, NeuralModel, NnPredictor, Predictor,
    TrainConfig,
};
use repsel::selection::{
    anticipation_select, h1_dfa_select, h1_draw_select, hasse_select, random_select,
    SelectionResult,
};
use repsel::solver::{fits, DEFAULT_SOLVER_BUDGET};
use repsel::verify::{claims, is_representative, Tri};

#[derive(Parser)]
#[command(name = "repsel", version, about = "Representative example selection for program synthesis")]
struct Cli {
    /// Seed for every randomized choice a command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Node budget per solver call.
    #[arg(long, global = true, default_value_t = DEFAULT_SOLVER_BUDGET)]
    solver_budget: u64,

    /// Worker threads for batch commands.
    #[arg(long, global = true, default_value_t = 4)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormArg {
    Committee,
    Anticipation,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SelectMethodArg {
    /// Greedy selection with the exact count oracle.
    Count,
    /// Greedy selection driven by a trained network.
    Nn,
    /// Greedy selection driven by the exact posterior.
    ExactNn,
    /// Uniform random subset of the requested fraction.
    Random,
    /// Domain heuristic: suffix trie for DFA data, boundary window for
    /// drawings.
    H1,
    /// Transitive reduction of ordering data.
    Hasse,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynthMethodArg {
    Full,
    Cegis,
    Rcegis,
    Acegis,
    RandCegis,
    H1Cegis,
    Ours,
}

impl SelectMethodArg {
    fn name(&self) -> &'static str {
        match self {
            SelectMethodArg::Count => "count",
            SelectMethodArg::Nn => "nn",
            SelectMethodArg::ExactNn => "exact-nn",
            SelectMethodArg::Random => "random",
            SelectMethodArg::H1 => "h1",
            SelectMethodArg::Hasse => "hasse",
        }
    }
}

impl SynthMethodArg {
    fn to_method(self) -> Method {
        match self {
            SynthMethodArg::Full => Method::Full,
            SynthMethodArg::Cegis => Method::Cegis,
            SynthMethodArg::Rcegis => Method::Rcegis,
            SynthMethodArg::Acegis => Method::Acegis,
            SynthMethodArg::RandCegis => Method::RandCegis,
            SynthMethodArg::H1Cegis => Method::H1Cegis,
            SynthMethodArg::Ours => Method::Ours,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClaimArg {
    Claim1,
    Claim2,
    Claim3,
    Lemma21,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DomainArg {
    Ordering,
    Dfa,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled dataset from a hidden sampled program.
    Gen {
        /// Space config JSON file.
        #[arg(long)]
        space: PathBuf,
        /// Examples to generate (ignored for drawings: every pixel).
        #[arg(long, default_value_t = 100)]
        size: usize,
        /// Shortest DFA string length.
        #[arg(long, default_value_t = 5)]
        min_len: usize,
        /// Longest DFA string length.
        #[arg(long, default_value_t = 10)]
        max_len: usize,
        /// Output dataset (JSON lines).
        #[arg(short, long)]
        output: PathBuf,
        /// Where to write the hidden ground-truth program.
        #[arg(long)]
        hidden_out: Option<PathBuf>,
    },
    /// Train a committee or anticipation network for a space.
    Train {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 1e-4)]
        lr: f64,
        #[arg(long, default_value_t = 32)]
        batch: usize,
        #[arg(long, value_enum, default_value_t = FormArg::Committee)]
        form: FormArg,
        /// Strings per sampled task when training on DFA data.
        #[arg(long, default_value_t = 50)]
        train_data_size: usize,
        #[arg(long, default_value_t = 5)]
        train_min_len: usize,
        #[arg(long, default_value_t = 10)]
        train_max_len: usize,
        /// Output model JSON.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Select a subset of examples from a dataset.
    Select {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        method: SelectMethodArg,
        /// Fraction for random selection.
        #[arg(long, default_value_t = 0.35)]
        fraction: f64,
        /// Confidence threshold for predictor-driven selection.
        #[arg(long, default_value_t = 0.95)]
        tau: f64,
        /// Trained model (required by `nn`).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Cap on |S| for the exact count oracle.
        #[arg(long, default_value_t = DEFAULT_SPACE_CAP)]
        count_cap: u64,
        /// Output subset (JSON lines).
        #[arg(short, long)]
        output: PathBuf,
        /// Optional selection trace JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Synthesize a program consistent with a dataset.
    Synth {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        method: SynthMethodArg,
        #[arg(long, default_value_t = 0.95)]
        tau: f64,
        /// Fraction for rand-cegis initialization.
        #[arg(long, default_value_t = 0.2)]
        fraction: f64,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Output outcome JSON.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check whether a subset is representative of a dataset.
    Verify {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        subset: PathBuf,
        /// Output verdict JSON (stdout when omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a claim checker and emit its report JSON.
    VerifyClaims {
        #[arg(long, value_enum)]
        claim: ClaimArg,
        #[arg(long, default_value_t = 50)]
        trials: u64,
        /// Domain for claim1.
        #[arg(long, value_enum, default_value_t = DomainArg::Ordering)]
        domain: DomainArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run benchmark tasks from a config file and emit CSV records.
    Bench {
        /// JSON config: {"tasks": [...]}.
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Upgrade drawing tasks to the 32x32 wide grammar.
        #[arg(long, default_value_t = false)]
        paper_scale: bool,
    },
}

fn load_space(path: &Path) -> Result<SpaceConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading space config {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{value}")?;
    Ok(())
}

fn selection_json<I: serde::Serialize, O: serde::Serialize>(
    method: &str,
    seed: u64,
    result: &SelectionResult<I, O>,
) -> serde_json::Value {
    json!({
        "method": method,
        "seed": seed,
        "terminated_by": result.terminated_by,
        "subset_size": result.subset.len(),
        "trace": result.trace,
    })
}

fn outcome_json<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    method: Method,
    seed: u64,
    outcome: &SynthesisOutcome<S::Params, S::Input, S::Output>,
) -> serde_json::Value {
    json!({
        "method": method.name(),
        "seed": seed,
        "program": outcome.program,
        "iterations": outcome.iterations,
        "initial_subset": outcome.initial_subset.examples(),
        "counterexamples_added": outcome.counterexamples_added.examples(),
        "solver_nodes": outcome.solver_nodes,
        "consistent": fits(space, &outcome.program, data),
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { space, size, min_len, max_len, output, hidden_out } => {
            let cfg = load_space(&space)?;
            let hidden_json;
            match &cfg {
                SpaceConfig::Ordering { n } => {
                    let sp = OrderingSpace::new(*n)?;
                    let out = gen_ordering_dataset(&sp, size, cli.seed)?;
                    out.data.save_jsonl(&output)?;
                    hidden_json = json!({"domain": "ordering", "params": out.hidden});
                }
                SpaceConfig::Dfa { num_states } => {
                    let sp = DfaSpace::new(*num_states)?;
                    let out = gen_dfa_dataset(&sp, size, (min_len, max_len), cli.seed)?;
                    out.data.save_jsonl(&output)?;
                    hidden_json = json!({"domain": "dfa", "params": out.hidden});
                }
                SpaceConfig::Drawing { width, height, grammar } => {
                    let sp = DrawingSpace::new(*width, *height, grammar.clone())?;
                    let out = gen_drawing_dataset(&sp, cli.seed)?;
                    out.data.save_jsonl(&output)?;
                    hidden_json = json!({"domain": "drawing", "params": out.hidden});
                }
            }
            if let Some(path) = hidden_out {
                write_json(&path, &hidden_json)?;
            }
            Ok(())
        }

        Command::Train {
            space,
            samples,
            lr,
            batch,
            form,
            train_data_size,
            train_min_len,
            train_max_len,
            output,
        } => {
            let cfg = load_space(&space)?;
            let arch = match &cfg {
                SpaceConfig::Ordering { n } => Arch::ordering_default(*n),
                SpaceConfig::Dfa { .. } => Arch::dfa_default(),
                SpaceConfig::Drawing { width, height, .. } => Arch::draw_default(*width, *height),
            };
            let mut tc = TrainConfig::new(samples, lr, cli.seed);
            tc.batch = batch;
            tc.form = match form {
                FormArg::Committee => ModelForm::Committee,
                FormArg::Anticipation => ModelForm::Anticipation,
            };
            tc.dfa_dataset_size = train_data_size;
            tc.dfa_len_range = (train_min_len, train_max_len);
            let model = train_committee(&cfg, arch, &tc)?;
            model.save(&output)?;
            eprintln!("trained {} ({} samples) -> {}", model.arch.id(), samples, output.display());
            Ok(())
        }

        Command::Select {
            space,
            data,
            method,
            fraction,
            tau,
            model,
            count_cap,
            output,
            trace,
        } => {
            let cfg = load_space(&space)?;
            let seed = cli.seed;
            let load_model = |required: bool| -> Result<Option<NeuralModel>> {
                match (&model, required) {
                    (Some(p), _) => Ok(Some(NeuralModel::load(p)?)),
                    (None, true) => bail!("--model is required for method `nn`"),
                    (None, false) => Ok(None),
                }
            };
            let (subset_jsonl, trace_json) = match &cfg {
                SpaceConfig::Ordering { n } => {
                    let sp = OrderingSpace::new(*n)?;
                    let ds: Dataset<(u8, u8), bool> = Dataset::load_jsonl(&data)?;
                    let result = match method {
                        SelectMethodArg::Count => greedy(&sp, &ds, count_cap)?,
                        SelectMethodArg::ExactNn => {
                            let p = ExactPosterior::new(&sp, count_cap);
                            anticipation_select::<OrderingSpace, _>(&p, &ds, tau, ds.len())?
                        }
                        SelectMethodArg::Nn => {
                            let p = NnPredictor::new(load_model(true)?.expect("required"));
                            anticipation_select::<OrderingSpace, _>(&p, &ds, tau, ds.len())?
                        }
                        SelectMethodArg::Random => random_select(&ds, fraction, seed)?,
                        SelectMethodArg::Hasse => plain_result(hasse_select(&ds)?),
                        SelectMethodArg::H1 => {
                            bail!("h1 applies to dfa or drawing data; use hasse for orderings")
                        }
                    };
                    (to_jsonl(&result.subset)?, selection_json(method.name(), seed, &result))
                }
                SpaceConfig::Dfa { num_states } => {
                    let sp = DfaSpace::new(*num_states)?;
                    let ds: Dataset<String, bool> = Dataset::load_jsonl(&data)?;
                    let result = match method {
                        SelectMethodArg::Count => greedy(&sp, &ds, count_cap)?,
                        SelectMethodArg::ExactNn => {
                            let p = ExactPosterior::new(&sp, count_cap);
                            anticipation_select::<DfaSpace, _>(&p, &ds, tau, ds.len())?
                        }
                        SelectMethodArg::Nn => {
                            let p = NnPredictor::new(load_model(true)?.expect("required"));
                            anticipation_select::<DfaSpace, _>(&p, &ds, tau, ds.len())?
                        }
                        SelectMethodArg::Random => random_select(&ds, fraction, seed)?,
                        SelectMethodArg::H1 => plain_result(h1_dfa_select(&ds, seed)),
                        SelectMethodArg::Hasse => bail!("hasse applies to ordering data"),
                    };
                    (to_jsonl(&result.subset)?, selection_json(method.name(), seed, &result))
                }
                SpaceConfig::Drawing { width, height, grammar } => {
                    let sp = DrawingSpace::new(*width, *height, grammar.clone())?;
                    let ds: Dataset<(u8, u8), bool> = Dataset::load_jsonl(&data)?;
                    let result = match method {
                        SelectMethodArg::Count => greedy(&sp, &ds, count_cap)?,
                        SelectMethodArg::ExactNn => {
                            let p = ExactPosterior::new(&sp, count_cap);
                            anticipation_select::<DrawingSpace, _>(&p, &ds, tau, ds.len())?
                        }
                        SelectMethodArg::Nn => {
                            let p = NnPredictor::new(load_model(true)?.expect("required"));
                            anticipation_select::<DrawingSpace, _>(&p, &ds, tau, ds.len())?
                        }
                        SelectMethodArg::Random => random_select(&ds, fraction, seed)?,
                        SelectMethodArg::H1 => {
                            let grid = grid_from_full_dataset(*width, *height, &ds)?;
                            plain_result(h1_draw_select(&grid))
                        }
                        SelectMethodArg::Hasse => bail!("hasse applies to ordering data"),
                    };
                    (to_jsonl(&result.subset)?, selection_json(method.name(), seed, &result))
                }
            };
            std::fs::write(&output, subset_jsonl)?;
            if let Some(path) = trace {
                write_json(&path, &trace_json)?;
            }
            Ok(())
        }

        Command::Synth { space, data, method, tau, fraction, model, output } => {
            let cfg = load_space(&space)?;
            let method = method.to_method();
            let params = MethodParams {
                seed: cli.seed,
                budget: cli.solver_budget,
                fraction,
                tau,
            };
            let loaded = model.as_ref().map(NeuralModel::load).transpose()?;
            let value = match &cfg {
                SpaceConfig::Ordering { n } => {
                    let sp = OrderingSpace::new(*n)?;
                    let ds: Dataset<(u8, u8), bool> = Dataset::load_jsonl(&data)?;
                    let nn = loaded.map(NnPredictor::new);
                    let outcome = run_method(
                        &sp,
                        &ds,
                        || hasse_select(&ds),
                        nn.as_ref().map(|p| p as &dyn Predictor<OrderingSpace>),
                        method,
                        &params,
                    )?;
                    outcome_json(&sp, &ds, method, cli.seed, &outcome)
                }
                SpaceConfig::Dfa { num_states } => {
                    let sp = DfaSpace::new(*num_states)?;
                    let ds: Dataset<String, bool> = Dataset::load_jsonl(&data)?;
                    let nn = loaded.map(NnPredictor::new);
                    let outcome = run_method(
                        &sp,
                        &ds,
                        || Ok(h1_dfa_select(&ds, cli.seed)),
                        nn.as_ref().map(|p| p as &dyn Predictor<DfaSpace>),
                        method,
                        &params,
                    )?;
                    outcome_json(&sp, &ds, method, cli.seed, &outcome)
                }
                SpaceConfig::Drawing { width, height, grammar } => {
                    let sp = DrawingSpace::new(*width, *height, grammar.clone())?;
                    let ds: Dataset<(u8, u8), bool> = Dataset::load_jsonl(&data)?;
                    let nn = loaded.map(NnPredictor::new);
                    let outcome = run_method(
                        &sp,
                        &ds,
                        || Ok(h1_draw_select(&grid_from_full_dataset(*width, *height, &ds)?)),
                        nn.as_ref().map(|p| p as &dyn Predictor<DrawingSpace>),
                        method,
                        &params,
                    )?;
                    outcome_json(&sp, &ds, method, cli.seed, &outcome)
                }
            };
            write_json(&output, &value)?;
            Ok(())
        }

        Command::Verify { space, data, subset, output } => {
            let cfg = load_space(&space)?;
            let verdict = match &cfg {
                SpaceConfig::Ordering { n } => {
                    let sp = OrderingSpace::new(*n)?;
                    let ds: Dataset<(u8, u8), bool> = Dataset::load_jsonl(&data)?;
                    let sub: Dataset<(u8, u8), bool> = Dataset::load_jsonl(&subset)?;
                    verdict_json(&sp, &ds, &sub, cli.solver_budget)?
                }
                SpaceConfig::Dfa { num_states } => {
                    let sp = DfaSpace::new(*num_states)?;
                    let ds: Dataset<String, bool> = Dataset::load_jsonl(&data)?;
                    let sub: Dataset<String, bool> = Dataset::load_jsonl(&subset)?;
                    verdict_json(&sp, &ds, &sub, cli.solver_budget)?
                }
                SpaceConfig::Drawing { width, height, grammar } => {
                    let sp = DrawingSpace::new(*width, *height, grammar.clone())?;
                    let ds: Dataset<(u8, u8), bool> = Dataset::load_jsonl(&data)?;
                    let sub: Dataset<(u8, u8), bool> = Dataset::load_jsonl(&subset)?;
                    verdict_json(&sp, &ds, &sub, cli.solver_budget)?
                }
            };
            match output {
                Some(path) => write_json(&path, &verdict)?,
                None => println!("{verdict}"),
            }
            Ok(())
        }

        Command::VerifyClaims { claim, trials, domain, output } => {
            let opts = claims::ClaimOpts {
                seed: cli.seed,
                cap: DEFAULT_SPACE_CAP,
                budget: cli.solver_budget,
            };
            let value = match claim {
                ClaimArg::Claim1 => {
                    let report = match domain {
                        DomainArg::Ordering => claims::claim1_ordering(trials, 5, (10, 20), &opts)?,
                        DomainArg::Dfa => claims::claim1_dfa(trials, 3, 30, (1, 6), &opts)?,
                    };
                    eprintln!("claim1: {}/{} failed", report.failures, report.trials);
                    serde_json::to_value(&report)?
                }
                ClaimArg::Claim2 => {
                    let report = claims::claim2_ordering(trials, (3, 5), (5, 15), &opts)?;
                    eprintln!("claim2: {}/{} failed", report.failures, report.trials);
                    serde_json::to_value(&report)?
                }
                ClaimArg::Claim3 => {
                    let report = claims::claim3_ordering(trials, (3, 5), &opts)?;
                    eprintln!("claim3: {}/{} failed", report.failures, report.trials);
                    serde_json::to_value(&report)?
                }
                ClaimArg::Lemma21 => {
                    let (mono, submod) = claims::lemma21_ordering(4, 5, &opts)?;
                    eprintln!(
                        "lemma21: mono {}/{} failed, submod {}/{} failed",
                        mono.failures, mono.trials, submod.failures, submod.trials
                    );
                    json!({"mono": mono, "submod": submod})
                }
            };
            match output {
                Some(path) => write_json(&path, &value)?,
                None => println!("{value}"),
            }
            Ok(())
        }

        Command::Bench { config, output, paper_scale } => {
            #[derive(serde::Deserialize)]
            struct BenchConfig {
                tasks: Vec<TaskConfig>,
            }
            let text = std::fs::read_to_string(&config)
                .with_context(|| format!("reading bench config {}", config.display()))?;
            let mut cfg: BenchConfig = serde_json::from_str(&text)?;
            if paper_scale {
                for task in &mut cfg.tasks {
                    if let SpaceConfig::Drawing { width, height, grammar } = &mut task.space {
                        *width = 32;
                        *height = 32;
                        *grammar = repsel::domains::GrammarConfig::paper();
                    }
                }
            }
            let records = run_bench(&cfg.tasks, cli.workers);
            let mut buf = Vec::new();
            emit_csv(&records, &mut buf)?;
            std::fs::write(&output, buf)?;
            eprintln!("{} records -> {}", records.len(), output.display());
            Ok(())
        }
    }
}

fn greedy<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    cap: u64,
) -> Result<SelectionResult<S::Input, S::Output>> {
    Ok(repsel::selection::greedy_count_select(space, data, cap)?)
}

/// Wraps a bare subset (heuristic selectors have no scores) into the common
/// result shape.
fn plain_result<I: serde::Serialize + Clone, O: Clone>(
    subset: Dataset<I, O>,
) -> SelectionResult<I, O> {
    let trace = subset
        .iter()
        .map(|e| repsel::selection::SelectionStep { example: e.clone(), score: 0.0 })
        .collect();
    SelectionResult {
        subset,
        trace,
        terminated_by: repsel::selection::Termination::Exhausted,
    }
}

fn to_jsonl<I: serde::Serialize + Clone, O: serde::Serialize + Clone>(
    ds: &Dataset<I, O>,
) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    ds.write_jsonl(&mut buf)?;
    Ok(buf)
}

fn verdict_json<S: ProgramSpace>(
    space: &S,
    data: &Dataset<S::Input, S::Output>,
    subset: &Dataset<S::Input, S::Output>,
    budget: u64,
) -> Result<serde_json::Value> {
    let outcome = is_representative(space, data, subset, budget)?;
    let representative = match outcome.verdict {
        Tri::True => "true",
        Tri::False => "false",
        Tri::Unknown => "unknown",
    };
    Ok(json!({
        "representative": representative,
        "probes": outcome.probes,
        "violated": outcome.counterexample.as_ref().map(|(d, _)| d),
        "witness_program": outcome.counterexample.as_ref().map(|(_, s)| s),
    }))
}
