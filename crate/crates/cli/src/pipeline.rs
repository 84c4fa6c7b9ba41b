use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use synplan_core::learn::{chains_to_csv, estimate_synergies, Estimate, EstimateConfig, PosteriorSummary};
use synplan_core::milp::SolveStatus;
use synplan_core::planner::{delta_s, plan_with, PlannerKind};
use synplan_core::process::{Plan, PlanDoc, SynergyDoc, SynergyMatrix, SCHEMA_VERSION};
use synplan_core::sim::{random_plan, simulate, ExecutionTrace, SimConfig, SimError};

use crate::config::{PlannerSpec, Resolved};
use crate::gantt::render_gantt_csv;
use crate::metrics::{distance_grid, metric_distance_cdf, metric_dmin_cdf, metric_makespan, run_minima, Stats};
use crate::PipelineError;

/// Offsets separating the seed streams of the phases. Evaluation run `r`
/// uses `seed + r` directly.
pub const COLLECT_SEED_OFFSET: u64 = 1_000_000;
pub const LEARN_SEED_OFFSET: u64 = 2_000_000;

pub fn collect_seed(base: u64, run: usize) -> u64 {
    base.wrapping_add(COLLECT_SEED_OFFSET).wrapping_add(run as u64)
}

pub fn eval_seed(base: u64, run: usize) -> u64 {
    base.wrapping_add(run as u64)
}

#[derive(Debug, Clone)]
pub struct CollectedRun {
    pub seed: u64,
    pub plan: Plan,
    pub trace: ExecutionTrace,
}

#[derive(Debug, Clone, Default)]
pub struct Collected {
    pub runs: Vec<CollectedRun>,
    /// Seeds of random plans whose execution stalled; they are left out of
    /// the dataset.
    pub skipped: Vec<u64>,
}

fn sim_config(r: &Resolved, seed: u64) -> SimConfig {
    SimConfig {
        dt: r.config.dt,
        seed,
        deterministic: false,
    }
}

fn run_sim(r: &Resolved, plan: &Plan, seed: u64) -> Result<ExecutionTrace, SimError> {
    simulate(
        plan,
        &r.spec,
        &r.geometry,
        &r.config.safety,
        &r.config.variability,
        &sim_config(r, seed),
    )
}

/// Runs `f` over `0..n` on scoped threads; results come back in index order.
fn parallel_map<T: Send, F: Fn(usize) -> T + Sync>(n: usize, f: F) -> Vec<T> {
    let workers = std::thread::available_parallelism().map_or(1, |p| p.get()).min(n.max(1));
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    std::thread::scope(|s| {
        let f = &f;
        let handles: Vec<_> = (0..workers)
            .map(|w| s.spawn(move || (w..n).step_by(workers).map(|i| (i, f(i))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (i, v) in h.join().expect("worker thread") {
                out[i] = Some(v);
            }
        }
    });
    out.into_iter().map(|v| v.expect("every index mapped")).collect()
}

/// Phase 1: random plans executed in the simulated cell.
pub fn collect(r: &Resolved) -> Result<Collected, PipelineError> {
    let results = parallel_map(r.config.n_random, |run| {
        let seed = collect_seed(r.config.seed, run);
        let plan = random_plan(&r.spec, seed)?;
        let trace = run_sim(r, &plan, seed);
        Ok::<_, PipelineError>((seed, plan, trace))
    });
    let mut out = Collected::default();
    for res in results {
        let (seed, plan, trace) = res?;
        match trace {
            Ok(trace) => out.runs.push(CollectedRun { seed, plan, trace }),
            Err(SimError::StalledExecution { .. }) => out.skipped.push(seed),
            Err(source) => {
                return Err(PipelineError::Simulation {
                    phase: "collect",
                    seed,
                    source,
                })
            }
        }
    }
    if out.runs.is_empty() {
        return Err(PipelineError::Config("every random plan stalled; nothing to learn from".into()));
    }
    Ok(out)
}

pub fn learn_config(r: &Resolved) -> EstimateConfig {
    let mut mcmc = r.config.mcmc.clone();
    mcmc.seed = r.config.seed.wrapping_add(LEARN_SEED_OFFSET);
    EstimateConfig {
        mcmc,
        freeze_below: r.config.freeze_below,
        basis: r.config.overlap_basis,
    }
}

/// Phase 2: posterior over the synergies seen in the dataset.
pub fn learn(r: &Resolved, collected: &Collected) -> Result<Estimate, PipelineError> {
    let dataset: Vec<(ExecutionTrace, Plan)> = collected
        .runs
        .iter()
        .map(|c| (c.trace.clone(), c.plan.clone()))
        .collect();
    Ok(estimate_synergies(&dataset, &r.spec, &r.config.priors, &learn_config(r))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub status: SolveStatus,
    pub objective: f64,
    pub best_bound: f64,
    /// Absent when no finite bound was proven.
    pub gap: Option<f64>,
    pub nodes: u64,
    /// Latest planned end time.
    pub nominal_makespan: f64,
    /// Synergy lengthening of the plan under the learned table.
    pub planned_delta_s: f64,
}

#[derive(Debug, Clone)]
pub struct PlannedMethod {
    pub name: String,
    pub plan: Plan,
    pub solve: SolveRecord,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Phase 3: one plan per configured planner.
pub fn plan_all(r: &Resolved, synergies: &SynergyMatrix) -> Result<Vec<PlannedMethod>, PipelineError> {
    r.config
        .planners
        .iter()
        .map(|p| plan_one(r, p, synergies))
        .collect()
}

pub fn plan_one(r: &Resolved, planner: &PlannerSpec, synergies: &SynergyMatrix) -> Result<PlannedMethod, PipelineError> {
    let kind = planner.kind(&r.spec)?;
    let cfg = r.config.solver_config(planner, &kind);
    let out = plan_with(&r.spec, &kind, synergies, &cfg).map_err(|source| PipelineError::Solver {
        planner: planner.name().into(),
        source,
    })?;
    let ds = delta_s(&out.plan, &r.spec, synergies);
    let s = &out.solution;
    let nominal = match kind {
        PlannerKind::Rstp => s.objective - ds,
        _ => out.plan.makespan(),
    };
    Ok(PlannedMethod {
        name: planner.name().into(),
        plan: out.plan,
        solve: SolveRecord {
            status: s.status,
            objective: s.objective,
            best_bound: s.best_bound,
            gap: finite(s.gap),
            nodes: s.nodes,
            nominal_makespan: nominal,
            planned_delta_s: ds,
        },
    })
}

#[derive(Debug, Clone)]
pub struct Evaluated {
    pub method: PlannedMethod,
    pub runs: Vec<(u64, ExecutionTrace)>,
}

/// Phase 4: every plan executed `n_eval` times, run `r` seeded `seed + r`.
pub fn evaluate(r: &Resolved, methods: Vec<PlannedMethod>) -> Result<Vec<Evaluated>, PipelineError> {
    methods
        .into_iter()
        .map(|m| {
            let traces = parallel_map(r.config.n_eval, |run| {
                let seed = eval_seed(r.config.seed, run);
                run_sim(r, &m.plan, seed).map(|t| (seed, t))
            });
            let runs = traces
                .into_iter()
                .enumerate()
                .map(|(run, t)| {
                    t.map_err(|source| PipelineError::Simulation {
                        phase: "evaluate",
                        seed: eval_seed(r.config.seed, run),
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Evaluated { method: m, runs })
        })
        .collect()
}

/// What went into the learned table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningRecord {
    pub collect_seeds: Vec<u64>,
    pub skipped_seeds: Vec<u64>,
    pub mcmc_seed: u64,
    pub posterior: PosteriorSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// Relative to the output directory.
    pub trace: String,
    pub makespan: f64,
    pub delta_s: f64,
    pub d_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub name: String,
    pub solve: SolveRecord,
    pub makespan: Stats,
    pub delta_s: Stats,
    pub d_min: Stats,
    /// Per-tick separation CDF averaged over runs, on [`BenchReport::grid`].
    pub distance_cdf: Vec<f64>,
    /// CDF over runs of each run's minimum separation.
    pub d_min_cdf: Vec<f64>,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: u32,
    pub config_hash: String,
    pub base_seed: u64,
    pub learning: Option<LearningRecord>,
    pub synergies: SynergyDoc,
    pub grid: Vec<f64>,
    pub methods: Vec<MethodReport>,
}

impl BenchReport {
    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.name == name)
    }
}

pub fn trace_path(method: &str, run: usize) -> String {
    format!("traces/{method}/run_{run:03}.jsonl")
}

/// Phase 5 numbers; nothing is written.
pub fn build_report(
    r: &Resolved,
    synergies: &SynergyMatrix,
    learning: Option<LearningRecord>,
    evaluated: &[Evaluated],
) -> Result<BenchReport, PipelineError> {
    let grid = distance_grid(r.config.d_max, r.config.grid_step);
    let mut methods = Vec::new();
    for e in evaluated {
        let traces: Vec<ExecutionTrace> = e.runs.iter().map(|(_, t)| t.clone()).collect();
        let minima = run_minima(&traces)?;
        let mut runs = Vec::new();
        for (k, ((seed, t), d_min)) in e.runs.iter().zip(minima).enumerate() {
            runs.push(RunRecord {
                seed: *seed,
                trace: trace_path(&e.method.name, k),
                makespan: metric_makespan(t)?,
                delta_s: delta_s(&t.as_plan(), &r.spec, synergies),
                d_min,
            });
        }
        let col = |f: fn(&RunRecord) -> f64| Stats::of(&runs.iter().map(f).collect::<Vec<_>>()).expect("n_eval >= 1");
        methods.push(MethodReport {
            name: e.method.name.clone(),
            solve: e.method.solve.clone(),
            makespan: col(|x| x.makespan),
            delta_s: col(|x| x.delta_s),
            d_min: col(|x| x.d_min),
            distance_cdf: metric_distance_cdf(&traces, &grid)?,
            d_min_cdf: metric_dmin_cdf(&traces, &grid)?,
            runs,
        });
    }
    Ok(BenchReport {
        schema: SCHEMA_VERSION,
        config_hash: r.hash(),
        base_seed: r.config.seed,
        learning,
        synergies: synergies.to_doc(&r.spec),
        grid,
        methods,
    })
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, contents).map_err(io(path))
}

pub fn read_file(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_file(path, text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, PipelineError> {
    serde_json::from_str(&read_file(path)?).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectIndex {
    pub schema: u32,
    pub runs: Vec<u64>,
    pub skipped: Vec<u64>,
}

pub fn write_collected(out: &Path, r: &Resolved, c: &Collected) -> Result<(), PipelineError> {
    for run in &c.runs {
        write_json(&out.join(format!("collect/plan_{}.json", run.seed)), &run.plan.to_doc(&r.spec))?;
        write_file(&out.join(format!("collect/trace_{}.jsonl", run.seed)), run.trace.to_jsonl())?;
    }
    write_json(
        &out.join("collect/index.json"),
        &CollectIndex {
            schema: SCHEMA_VERSION,
            runs: c.runs.iter().map(|x| x.seed).collect(),
            skipped: c.skipped.clone(),
        },
    )
}

pub fn read_collected(out: &Path, r: &Resolved) -> Result<Collected, PipelineError> {
    let index: CollectIndex = read_json(&out.join("collect/index.json"))?;
    let mut runs = Vec::new();
    for &seed in &index.runs {
        let doc: PlanDoc = read_json(&out.join(format!("collect/plan_{seed}.json")))?;
        let plan = Plan::from_doc(&doc, &r.spec)?;
        let trace_file = out.join(format!("collect/trace_{seed}.jsonl"));
        let trace = ExecutionTrace::from_jsonl(&read_file(&trace_file)?).map_err(|source| PipelineError::Simulation {
            phase: "learn",
            seed,
            source,
        })?;
        runs.push(CollectedRun { seed, plan, trace });
    }
    Ok(Collected {
        runs,
        skipped: index.skipped,
    })
}

pub fn learning_record(r: &Resolved, c: &Collected, estimate: &Estimate) -> LearningRecord {
    LearningRecord {
        collect_seeds: c.runs.iter().map(|x| x.seed).collect(),
        skipped_seeds: c.skipped.clone(),
        mcmc_seed: learn_config(r).mcmc.seed,
        posterior: estimate.summary.clone(),
    }
}

pub fn write_learned(out: &Path, r: &Resolved, estimate: &Estimate, record: &LearningRecord) -> Result<(), PipelineError> {
    write_json(&out.join("synergies.json"), &estimate.matrix.to_doc(&r.spec))?;
    write_json(&out.join("learning.json"), record)?;
    write_file(&out.join("chains.csv"), chains_to_csv(&estimate.chains, &estimate.names))
}

/// The learned table, or an empty (neutral) one when nothing was learned yet.
pub fn read_synergies(out: &Path, r: &Resolved) -> Result<SynergyMatrix, PipelineError> {
    let path = out.join("synergies.json");
    if !path.exists() {
        return Ok(SynergyMatrix::new());
    }
    let doc: SynergyDoc = read_json(&path)?;
    Ok(SynergyMatrix::from_doc(&doc, &r.spec)?)
}

pub fn read_learning(out: &Path) -> Result<Option<LearningRecord>, PipelineError> {
    let path = out.join("learning.json");
    if path.exists() {
        read_json(&path).map(Some)
    } else {
        Ok(None)
    }
}

pub fn write_planned(out: &Path, r: &Resolved, methods: &[PlannedMethod]) -> Result<(), PipelineError> {
    for m in methods {
        write_json(&out.join(format!("plans/{}.json", m.name)), &m.plan.to_doc(&r.spec))?;
        write_json(&out.join(format!("plans/{}.solve.json", m.name)), &m.solve)?;
        write_file(
            &out.join(format!("gantt/{}.csv", m.name)),
            render_gantt_csv(&m.plan, &r.spec, None),
        )?;
    }
    Ok(())
}

pub fn read_planned(out: &Path, r: &Resolved) -> Result<Vec<PlannedMethod>, PipelineError> {
    r.config
        .planners
        .iter()
        .map(|p| {
            let name = p.name();
            let doc: PlanDoc = read_json(&out.join(format!("plans/{name}.json")))?;
            Ok(PlannedMethod {
                name: name.into(),
                plan: Plan::from_doc(&doc, &r.spec)?,
                solve: read_json(&out.join(format!("plans/{name}.solve.json")))?,
            })
        })
        .collect()
}

fn csv_table(report: &BenchReport) -> String {
    let mut s = String::from(
        "method,status,objective,nominal_makespan,planned_delta_s,makespan_mean,makespan_min,makespan_max,delta_s_mean,delta_s_min,delta_s_max,d_min_mean,d_min_min,d_min_max\n",
    );
    for m in &report.methods {
        let st = serde_json::to_value(m.solve.status).expect("status serializes");
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            m.name,
            st.as_str().unwrap_or_default(),
            m.solve.objective,
            m.solve.nominal_makespan,
            m.solve.planned_delta_s,
            m.makespan.mean,
            m.makespan.min,
            m.makespan.max,
            m.delta_s.mean,
            m.delta_s.min,
            m.delta_s.max,
            m.d_min.mean,
            m.d_min.min,
            m.d_min.max
        ));
    }
    s
}

fn cdf_table(report: &BenchReport, pick: fn(&MethodReport) -> &Vec<f64>) -> String {
    let mut s = String::from("d");
    for m in &report.methods {
        s.push(',');
        s.push_str(&m.name);
    }
    s.push('\n');
    for (k, d) in report.grid.iter().enumerate() {
        s.push_str(&d.to_string());
        for m in &report.methods {
            s.push_str(&format!(",{}", pick(m)[k]));
        }
        s.push('\n');
    }
    s
}

/// Writes traces, gantt charts, the report and its CSV tables.
pub fn write_evaluation(out: &Path, r: &Resolved, evaluated: &[Evaluated], report: &BenchReport) -> Result<(), PipelineError> {
    for e in evaluated {
        for (k, (_, t)) in e.runs.iter().enumerate() {
            write_file(&out.join(trace_path(&e.method.name, k)), t.to_jsonl())?;
        }
        if let Some((_, first)) = e.runs.first() {
            write_file(
                &out.join(format!("gantt/{}.csv", e.method.name)),
                render_gantt_csv(&e.method.plan, &r.spec, Some(first)),
            )?;
        }
    }
    write_json(&out.join("report.json"), report)?;
    write_file(&out.join("methods.csv"), csv_table(report))?;
    write_file(&out.join("distance_cdf.csv"), cdf_table(report, |m| &m.distance_cdf))?;
    write_file(&out.join("d_min_cdf.csv"), cdf_table(report, |m| &m.d_min_cdf))
}

/// All five phases; outputs go to `out`.
pub fn run_pipeline_to(r: &Resolved, out: &Path) -> Result<BenchReport, PipelineError> {
    let collected = collect(r)?;
    write_collected(out, r, &collected)?;
    let estimate = learn(r, &collected)?;
    let record = learning_record(r, &collected, &estimate);
    write_learned(out, r, &estimate, &record)?;
    let methods = plan_all(r, &estimate.matrix)?;
    write_planned(out, r, &methods)?;
    let evaluated = evaluate(r, methods)?;
    let report = build_report(r, &estimate.matrix, Some(record), &evaluated)?;
    write_evaluation(out, r, &evaluated, &report)?;
    Ok(report)
}

/// [`run_pipeline_to`] with the configured output directory.
pub fn run_pipeline(r: &Resolved) -> Result<BenchReport, PipelineError> {
    let out: PathBuf = r.config.out.clone();
    run_pipeline_to(r, &out)
}
