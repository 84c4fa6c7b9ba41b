use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use synplan_cli::metrics::metric_makespan;
use synplan_cli::pipeline::{self, write_file};
use synplan_cli::{render_gantt_csv, PipelineConfig, PipelineError, Resolved};
use synplan_core::process::{Plan, PlanDoc};
use synplan_core::sim::{min_distance, simulate, ExecutionTrace, SimConfig};

#[derive(Parser)]
#[command(name = "synplan", version, about = "Synergy-aware task planning for a human-robot cell")]
struct Cli {
    /// Pipeline config (JSON).
    #[arg(long, global = true, default_value = "pipeline.json")]
    config: PathBuf,
    /// Overrides the base seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory of the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check the config and the documents it names.
    Validate,
    /// Simulate random plans into `<out>/collect`.
    Collect,
    /// Estimate synergies from `<out>/collect`.
    Learn,
    /// Solve every configured planner with the learned synergies.
    Plan,
    /// Execute one plan file once.
    Simulate {
        #[arg(long)]
        plan: PathBuf,
        /// Nominal human durations.
        #[arg(long)]
        deterministic: bool,
    },
    /// Simulate the stored plans and write the report.
    Evaluate,
    /// Collect, learn, plan, evaluate and report in one go.
    Pipeline,
    /// Print a plan (and optionally its execution) as CSV.
    Gantt {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

fn load(cli: &Cli) -> Result<Resolved> {
    let mut r = PipelineConfig::from_file(&cli.config).with_context(|| format!("loading {}", cli.config.display()))?;
    if let Some(seed) = cli.seed {
        r.config.seed = seed;
    }
    if let Some(out) = &cli.out {
        r.config.out = out.clone();
    }
    Ok(r)
}

fn read_plan(path: &PathBuf, r: &Resolved) -> Result<Plan> {
    let doc: PlanDoc = pipeline::read_json(path)?;
    Ok(Plan::from_doc(&doc, &r.spec).map_err(PipelineError::from)?)
}

fn summary(report: &synplan_cli::BenchReport) {
    println!("method            makespan (mean/min/max)      delta_s mean   d_min mean");
    for m in &report.methods {
        println!(
            "{:<17} {:>8.2} {:>8.2} {:>8.2}   {:>12.3}   {:>10.3}",
            m.name, m.makespan.mean, m.makespan.min, m.makespan.max, m.delta_s.mean, m.d_min.mean
        );
    }
}

fn run(cli: &Cli) -> Result<()> {
    let r = load(cli)?;
    let out = r.config.out.clone();
    match &cli.command {
        Command::Validate => {
            println!(
                "ok: {} tasks, {} agents, {} planners, config {}",
                r.spec.num_tasks(),
                r.spec.num_agents(),
                r.config.planners.len(),
                r.hash()
            );
        }
        Command::Collect => {
            let c = pipeline::collect(&r)?;
            pipeline::write_collected(&out, &r, &c)?;
            println!("collected {} runs ({} stalled)", c.runs.len(), c.skipped.len());
        }
        Command::Learn => {
            let c = pipeline::read_collected(&out, &r).context("run `collect` first")?;
            let est = pipeline::learn(&r, &c)?;
            let record = pipeline::learning_record(&r, &c, &est);
            pipeline::write_learned(&out, &r, &est, &record)?;
            for s in &est.summary.synergies {
                println!(
                    "{} {} {}: {:.3} [{:.3}, {:.3}]{}",
                    r.spec.agent_id(s.key.robot),
                    r.spec.task_id(s.key.robot_task),
                    r.spec.task_id(s.key.human_task),
                    s.stats.median,
                    s.stats.lo90,
                    s.stats.hi90,
                    if s.frozen { " (prior)" } else { "" }
                );
            }
        }
        Command::Plan => {
            let syn = pipeline::read_synergies(&out, &r)?;
            let methods = pipeline::plan_all(&r, &syn)?;
            pipeline::write_planned(&out, &r, &methods)?;
            for m in &methods {
                println!(
                    "{}: {:?}, objective {:.3}, makespan {:.3}",
                    m.name, m.solve.status, m.solve.objective, m.solve.nominal_makespan
                );
            }
        }
        Command::Simulate { plan, deterministic } => {
            let p = read_plan(plan, &r)?;
            let cfg = SimConfig {
                dt: r.config.dt,
                seed: r.config.seed,
                deterministic: *deterministic,
            };
            let trace = simulate(&p, &r.spec, &r.geometry, &r.config.safety, &r.config.variability, &cfg).map_err(
                |source| PipelineError::Simulation {
                    phase: "simulate",
                    seed: cfg.seed,
                    source,
                },
            )?;
            let path = out.join(format!("trace_{}.jsonl", cfg.seed));
            write_file(&path, trace.to_jsonl())?;
            println!(
                "makespan {:.3} s, min separation {:.3} m -> {}",
                metric_makespan(&trace).map_err(PipelineError::from)?,
                min_distance(&trace).unwrap_or(f64::NAN),
                path.display()
            );
        }
        Command::Evaluate => {
            let syn = pipeline::read_synergies(&out, &r)?;
            let methods = pipeline::read_planned(&out, &r).context("run `plan` first")?;
            let learning = pipeline::read_learning(&out)?;
            let evaluated = pipeline::evaluate(&r, methods)?;
            let report = pipeline::build_report(&r, &syn, learning, &evaluated)?;
            pipeline::write_evaluation(&out, &r, &evaluated, &report)?;
            summary(&report);
        }
        Command::Pipeline => {
            let report = pipeline::run_pipeline_to(&r, &out)?;
            summary(&report);
        }
        Command::Gantt { plan, trace } => {
            let p = read_plan(plan, &r)?;
            let t = match trace {
                Some(path) => Some(
                    ExecutionTrace::from_jsonl(&pipeline::read_file(path)?)
                        .with_context(|| format!("reading {}", path.display()))?,
                ),
                None => None,
            };
            print!("{}", render_gantt_csv(&p, &r.spec, t.as_ref()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.chain().find_map(|c| c.downcast_ref::<PipelineError>()).map_or(1, |p| p.exit_code());
            ExitCode::from(code as u8)
        }
    }
}
