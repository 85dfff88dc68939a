// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! `quvis`: pulse synthesis, instruction-set compilation and benchmark sweeps.
//!
//! Every subcommand writes `<name>.json` (structured result), `<name>.csv`
//! (plot-ready columns) and `<name>.meta.json` (wall time and timestamp, kept
//! apart so reruns produce identical result files). Failures print a JSON
//! error record on stderr and exit nonzero.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use quvis::bench::{
    bench_gate_costs, bench_phase_trace, bench_qft, bench_swap, fit_exponential, fit_linear, verify_golden,
    ExperimentResult, SetChoice, Table,
};
use quvis::evolution::Evaluator;
use quvis::gates::qft_matrix;
use quvis::isa::{circuit_error_estimate, compile_qft, CompiledCircuit, InstructionSet, Op};
use quvis::linalg::frobenius_distance;
use quvis::optimizer::{synthesize_restarts, OptimizationReport};
use quvis::schedule::PulseSchedule;
use serde::Serialize;

use crate::config::{resolve_target, Config, ConfigError};

/// Exit code when a run completed but missed its error budget.
const EXIT_BUDGET: u8 = 3;
const EXIT_CONFIG: u8 = 2;
const EXIT_ERROR: u8 = 1;

#[derive(Parser)]
#[command(
    name = "quvis",
    version,
    about = "Pulse-level gate synthesis and variational instruction sets"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base optimizer seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Largest width in QFT and swap sweeps.
    #[arg(long, global = true)]
    max_n: Option<usize>,
    /// Instruction sets to use: quvis2, quvis3, qumis, direct (repeatable or comma-separated).
    #[arg(long = "set", global = true, value_delimiter = ',')]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a pulse schedule for one target gate.
    Synthesize {
        /// Target name, e.g. `cp:pi/2`, `u3`, `qft:3`.
        #[arg(long)]
        target: Option<String>,
        /// Total duration T.
        #[arg(long)]
        time: Option<f64>,
        /// Number of seeds tried.
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Compile the N-qubit QFT over an instruction set.
    Compile {
        #[arg(long)]
        n: usize,
    },
    /// Evolve a pulse table and compare with a target.
    Evolve {
        /// Pulse table to evolve.
        #[arg(long)]
        schedule: PathBuf,
        /// Target name; defaults to the identity.
        #[arg(long)]
        target: Option<String>,
    },
    /// Replay the nine reference pulse tables.
    VerifyGolden {
        #[arg(long, default_value_t = 5e-2)]
        budget: f64,
    },
    /// Run a benchmark sweep.
    Bench {
        #[arg(value_enum)]
        experiment: Experiment,
    },
    /// Fit a scaling law to two columns of a CSV file.
    Fit {
        input: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, value_enum, default_value_t = FitKind::Linear)]
        kind: FitKind,
        /// Ignore rows with x below this value.
        #[arg(long)]
        min_x: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Qft,
    Phase,
    Swap,
    Gates,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitKind {
    Linear,
    Exponential,
}

/// Outcome of a command that produced results.
enum Status {
    Ok,
    BudgetMissed,
}

struct Writer {
    dir: PathBuf,
    started: Instant,
    command: &'static str,
}

impl Writer {
    fn write(&self, name: &str, json: &impl Serialize, csv: &Table) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(json)?;
        text.push('\n');
        self.put(&format!("{name}.json"), &text)?;
        self.put(&format!("{name}.csv"), &csv.to_csv())?;
        let finished = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let meta = serde_json::json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_s": self.started.elapsed().as_secs_f64(),
            "finished_unix": finished,
        });
        self.put(&format!("{name}.meta.json"), &serde_json::to_string_pretty(&meta)?)
    }

    fn put(&self, file: &str, text: &str) -> anyhow::Result<()> {
        std::fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.dir.join(file);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    fn experiment(&self, r: &ExperimentResult) -> anyhow::Result<()> {
        self.write(&r.experiment, r, &r.table)?;
        for (name, t) in &r.extra_tables {
            self.put(&format!("{}.{name}.csv", r.experiment), &t.to_csv())?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct RunSummary {
    seed: u64,
    final_error: f64,
    iterations: usize,
    success: bool,
}

#[derive(Serialize)]
struct SynthesisSummary {
    target: String,
    total_time: f64,
    error_budget: f64,
    successes: usize,
    runs: Vec<RunSummary>,
    best: OptimizationReport,
}

fn synthesize(cfg: &Config, w: &Writer) -> anyhow::Result<Status> {
    let gate = resolve_target(&cfg.target.gate)?;
    let model = cfg.model.chain(gate.n_qubits);
    let t = cfg.target.total_time;
    let k0 = cfg
        .target
        .initial_slices
        .unwrap_or_else(|| cfg.optimizer.initial_slices(t));
    let reports = synthesize_restarts(&gate.matrix, &model, t, k0, &cfg.optimizer)?;
    let budget = cfg.target.error_budget;
    let runs: Vec<RunSummary> = reports
        .iter()
        .map(|r| RunSummary {
            seed: r.seed,
            final_error: r.final_error,
            iterations: r.iterations(),
            success: r.final_error <= budget,
        })
        .collect();
    let successes = runs.iter().filter(|r| r.success).count();
    let best = reports
        .iter()
        .cloned()
        .reduce(|a, b| if b.final_error < a.final_error { b } else { a })
        .expect("at least one run");

    let longest = reports.iter().map(|r| r.loss_history.len()).max().unwrap_or(0);
    let mut columns = vec!["iteration".to_string()];
    columns.extend(reports.iter().map(|r| format!("error_seed{}", r.seed)));
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for i in 0..longest {
        let mut row = vec![Some(i as f64)];
        row.extend(reports.iter().map(|r| r.loss_history.get(i).copied()));
        table.rows.push(row);
    }
    w.put("synthesize.pulses.csv", &best.final_schedule.write_pulse_table())?;
    eprintln!(
        "{} at T = {t}: best error {:.4e} (seed {}), {successes}/{} within {budget}",
        gate.label,
        best.final_error,
        best.seed,
        runs.len()
    );
    w.write(
        "synthesize",
        &SynthesisSummary {
            target: cfg.target.gate.clone(),
            total_time: t,
            error_budget: budget,
            successes,
            runs,
            best,
        },
        &table,
    )?;
    Ok(if successes > 0 {
        Status::Ok
    } else {
        Status::BudgetMissed
    })
}

#[derive(Serialize)]
struct CompileSummary {
    circuit: CompiledCircuit,
    /// Distance of the ideal composition from the QFT matrix.
    exact_distance: f64,
    gate_count: usize,
}

fn compile(cfg: &Config, sets: &[SetChoice], n: usize, w: &Writer) -> anyhow::Result<Status> {
    let choice = sets.first().copied().unwrap_or(SetChoice::Quvis3);
    anyhow::ensure!(
        choice != SetChoice::Direct,
        "direct control is not a compilation target"
    );
    let mut set = InstructionSet::by_label(choice.label())?;
    let mut circuit = compile_qft(&set, n)?;
    let exact_distance = frobenius_distance(&circuit.exact_unitary(&set)?, &qft_matrix(n).matrix)?;
    if choice == SetChoice::Quvis3 {
        // every gate of this set has a reference table, so the error estimate is free
        set.load_golden(&cfg.model.chain(3), &cfg.optimizer.evolution)?;
        circuit.predicted_error = Some(circuit_error_estimate(&circuit, &set, cfg.optimizer.evolution.metric)?);
    }
    let mut table = Table::new(&["index", "start", "end", "width", "gate_id"]);
    let mut t = 0.0;
    for (i, p) in circuit.placements.iter().enumerate() {
        let dt = set.op_time(&p.op)?;
        let id = match p.op {
            Op::Gate { id } => Some(id as f64),
            _ => None,
        };
        table.push(vec![
            Some(i as f64),
            Some(t),
            Some(t + dt),
            Some(p.qubits.len() as f64),
            id,
        ]);
        t += dt;
    }
    let gate_count = circuit.count(|op| !matches!(op, Op::WireSwap | Op::GlobalPhase { .. } | Op::Phase { .. }));
    eprintln!(
        "QFT{n} over {}: {gate_count} gates, T = {}",
        set.label, circuit.total_time
    );
    let name = format!("compile_{}_n{n}", set.label);
    w.write(
        &name,
        &CompileSummary {
            circuit,
            exact_distance,
            gate_count,
        },
        &table,
    )?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct EvolveSummary {
    target: String,
    n_qubits: usize,
    total_time: f64,
    n_slices: usize,
    error: f64,
    unitarity_defect: f64,
}

fn evolve(cfg: &Config, schedule: &Path, target: Option<String>, w: &Writer) -> anyhow::Result<Status> {
    let text = std::fs::read_to_string(schedule).with_context(|| format!("reading {}", schedule.display()))?;
    let s = PulseSchedule::read_pulse_table(&text).with_context(|| format!("parsing {}", schedule.display()))?;
    let name = target.unwrap_or_else(|| format!("identity:{}", s.n_qubits()));
    let gate = resolve_target(&name)?;
    anyhow::ensure!(
        gate.n_qubits == s.n_qubits(),
        "target {name} acts on {} qubits but the schedule drives {}",
        gate.n_qubits,
        s.n_qubits()
    );
    let eval = Evaluator::new(&gate.matrix, &cfg.model.chain(s.n_qubits()), &cfg.optimizer.evolution)?;
    let u = eval.evolve(&s)?;
    let trace = eval.trace(&s)?;
    let mut table = Table::new(&["t", "error"]);
    for (t, e) in trace.times.iter().zip(&trace.errors) {
        table.push(vec![Some(*t), Some(*e)]);
    }
    let summary = EvolveSummary {
        target: name,
        n_qubits: s.n_qubits(),
        total_time: s.total_time(),
        n_slices: s.n_slices(),
        error: cfg.optimizer.evolution.metric.distance(&gate.matrix, &u)?,
        unitarity_defect: u.unitarity_defect(),
    };
    eprintln!("error {:.6e} after T = {}", summary.error, summary.total_time);
    w.write("evolve", &summary, &table)?;
    Ok(Status::Ok)
}

fn verify(cfg: &Config, budget: f64, w: &Writer) -> anyhow::Result<Status> {
    let r = verify_golden(&cfg.model.chain(3), &cfg.optimizer.evolution, budget)?;
    for row in &r.table.rows {
        let (m, e) = (row[0].unwrap_or(f64::NAN), row[3].unwrap_or(f64::NAN));
        let mark = if e <= budget { "ok" } else { "over" };
        println!("U{m}\tT={}\terror={e:.4}\t{mark}", row[1].unwrap_or(f64::NAN));
    }
    w.experiment(&r)?;
    Ok(if r.failures.is_empty() {
        Status::Ok
    } else {
        Status::BudgetMissed
    })
}

fn bench(cfg: &Config, experiment: Experiment, w: &Writer) -> anyhow::Result<Status> {
    let base = cfg.model.chain(3);
    let r = match experiment {
        Experiment::Qft => bench_qft(&cfg.qft, &base, &cfg.optimizer)?,
        Experiment::Phase => bench_phase_trace(&cfg.phase, &base, &cfg.optimizer)?,
        Experiment::Swap => bench_swap(&cfg.swap, &base, &cfg.optimizer)?,
        Experiment::Gates => bench_gate_costs(&base, &cfg.optimizer, false)?,
    };
    for f in &r.failures {
        eprintln!("cell {}: {}", f.cell, f.message);
    }
    for (name, fit) in &r.fits {
        eprintln!("fit {name}: gamma {:.4}, beta {:.4}", fit.gamma, fit.beta);
    }
    w.experiment(&r)?;
    Ok(Status::Ok)
}

fn read_columns(path: &Path, x: &str, y: &str) -> anyhow::Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow::anyhow!("{} has no column {name:?}", path.display()))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |j: usize| -> anyhow::Result<Option<f64>> {
            match record.get(j).map(str::trim) {
                None | Some("") => Ok(None),
                Some(v) => v
                    .parse()
                    .map(Some)
                    .with_context(|| format!("{}: row {} has non-numeric {v:?}", path.display(), i + 2)),
            }
        };
        if let (Some(a), Some(b)) = (cell(ix)?, cell(iy)?) {
            points.push((a, b));
        }
    }
    Ok(points)
}

fn fit(input: &Path, x: &str, y: &str, kind: FitKind, min_x: Option<f64>, w: &Writer) -> anyhow::Result<Status> {
    let points = read_columns(input, x, y)?;
    let (f, predict): (_, fn(&quvis::bench::FitResult, f64) -> f64) = match kind {
        FitKind::Linear => (fit_linear(&points, min_x)?, |f, x| f.predict_linear(x)),
        FitKind::Exponential => (fit_exponential(&points, min_x)?, |f, x| f.predict_exponential(x)),
    };
    let mut table = Table::new(&[x, y, "fit"]);
    for &(a, b) in &points {
        table.push(vec![Some(a), Some(b), Some(predict(&f, a))]);
    }
    println!("gamma {} beta {} residual {}", f.gamma, f.beta, f.residual);
    w.write("fit", &f, &table)?;
    Ok(Status::Ok)
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.optimizer.seed = s;
    }
    if let Some(n) = cli.max_n {
        cfg.qft.max_n = n;
        cfg.swap.max_n = n;
    }
    let sets = cli
        .sets
        .iter()
        .map(|s| SetChoice::from_label(s.trim()))
        .collect::<quvis::Result<Vec<_>>>()?;
    if !sets.is_empty() {
        cfg.qft.sets = sets.clone();
    }
    if let Some(j) = cli.jobs {
        anyhow::ensure!(j >= 1, "--jobs must be at least 1");
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let command = match &cli.command {
        Command::Synthesize { .. } => "synthesize",
        Command::Compile { .. } => "compile",
        Command::Evolve { .. } => "evolve",
        Command::VerifyGolden { .. } => "verify-golden",
        Command::Bench { .. } => "bench",
        Command::Fit { .. } => "fit",
    };
    let w = Writer {
        dir: cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone()),
        started: Instant::now(),
        command,
    };
    match cli.command {
        Command::Synthesize {
            target,
            time,
            restarts,
            budget,
        } => {
            if let Some(t) = target {
                cfg.target.gate = t;
            }
            if let Some(t) = time {
                cfg.target.total_time = t;
            }
            if let Some(r) = restarts {
                cfg.optimizer.restarts = r;
            }
            if let Some(b) = budget {
                cfg.target.error_budget = b;
            }
            synthesize(&cfg, &w)
        }
        Command::Compile { n } => compile(&cfg, &sets, n, &w),
        Command::Evolve { schedule, target } => evolve(&cfg, &schedule, target, &w),
        Command::VerifyGolden { budget } => verify(&cfg, budget, &w),
        Command::Bench { experiment } => bench(&cfg, experiment, &w),
        Command::Fit {
            input,
            x,
            y,
            kind,
            min_x,
        } => fit(&input, &x, &y, kind, min_x, &w),
    }
}

fn error_record(e: &anyhow::Error) -> (u8, serde_json::Value) {
    if let Some(c) = e.downcast_ref::<ConfigError>() {
        let record = serde_json::json!({
            "kind": "config",
            "message": c.message,
            "path": c.path,
            "line": c.line,
            "column": c.column,
        });
        return (EXIT_CONFIG, record);
    }
    let kind = e
        .chain()
        .find_map(|c| c.downcast_ref::<quvis::Error>())
        .map_or("error", |q| q.kind());
    let message = e.chain().map(|c| c.to_string()).collect::<Vec<_>>().join(": ");
    (EXIT_ERROR, serde_json::json!({ "kind": kind, "message": message }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::BudgetMissed) => ExitCode::from(EXIT_BUDGET),
        Err(e) => {
            let (code, record) = error_record(&e);
            eprintln!("{}", serde_json::json!({ "error": record }));
            ExitCode::from(code)
        }
    }
}
