//! `simulate`: virtual-time runs compared against the static-fraction model.

use serde::Serialize;

use calu_core::dag::{Section, TaskGraph};
use calu_core::model::{self, CostModel, ModelInput, ModelOutput, NoiseProfile};
use calu_core::scheduler::{self, ExecMode, Policy, SchedulerConfig};
use calu_core::{Partition, Result};

use crate::config::{RunConfig, Workload, VERSION};
use crate::output;

#[derive(Debug, Clone, Serialize)]
pub struct SimRun {
    pub policy: Policy,
    pub d_ratio: f64,
    pub n_static: usize,
    /// Share of the total work held by static tasks.
    pub static_work_fraction: f64,
    pub makespan: f64,
    pub ratio_to_ideal: f64,
    /// `max(t_ideal, t_actual(static_work_fraction)) + T_criticalPath`.
    pub predicted: f64,
    pub ratio_to_predicted: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub version: &'static str,
    pub config: RunConfig,
    pub tasks: usize,
    #[serde(rename = "T1")]
    pub t1: f64,
    #[serde(rename = "T_criticalPath")]
    pub t_critical_path: f64,
    pub deltas: Vec<f64>,
    pub model: ModelOutput,
    /// Model completion time of a purely static run.
    pub t_actual_static: f64,
    pub runs: Vec<SimRun>,
    pub all_pass: bool,
}

const DEFAULT_RATIOS: [f64; 6] = [0.0, 0.1, 0.25, 0.5, 0.75, 1.0];

fn graph(workload: Workload, part: &Partition, n_static: usize) -> Result<TaskGraph> {
    Ok(match workload {
        Workload::Calu => TaskGraph::build(part, n_static)
            .map_err(|e| calu_core::CaluError::Config(e.to_string()))?,
        Workload::Independent => TaskGraph::independent(part.block_rows, part.block_cols, n_static),
    })
}

pub fn simulate_report(mut cfg: RunConfig) -> Result<SimReport> {
    cfg.mode = ExecMode::Simulated;
    cfg.b = Some(cfg.block_size());
    let part = Partition::new(cfg.m, cfg.n, cfg.block_size())?;
    let base: SchedulerConfig = cfg.scheduler()?;
    let p = base.workers;

    let full = graph(cfg.workload, &part, 0)?;
    let cost = |g: &TaskGraph, t: &calu_core::Task| base.task_cost(g, t);
    let t1: f64 = full.tasks().iter().map(|t| cost(&full, t)).sum();
    let t_cp = full.longest_path(|t| cost(&full, t));
    let mut deltas = base
        .noise
        .as_ref()
        .map(|n| n.deltas.clone())
        .unwrap_or_default();
    deltas.resize(p, 0.0);
    let input = ModelInput {
        cost: CostModel {
            t1,
            p,
            t_critical_path: t_cp,
            t_migration: 0.0,
            t_overhead: 0.0,
        },
        deltas: deltas.clone(),
    };
    let out = input.evaluate()?;
    let noise = NoiseProfile::new(deltas.clone())?;

    let policies = if cfg.sweep.policies.is_empty() {
        Policy::ALL.to_vec()
    } else {
        cfg.sweep.policies.clone()
    };
    let mut ratios = if cfg.sweep.d_ratios.is_empty() {
        let mut r = DEFAULT_RATIOS.to_vec();
        r.push(out.d_ratio_min);
        r
    } else {
        cfg.sweep.d_ratios.clone()
    };
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();

    let mut runs = Vec::new();
    for policy in policies {
        // only the hybrid policy reads d_ratio
        let sweep: &[f64] = if policy == Policy::Hybrid {
            &ratios
        } else {
            &[cfg.d_ratio]
        };
        for &d in sweep {
            let mut sched = base.clone();
            sched.policy = policy;
            sched.d_ratio = d;
            let n_static = sched.n_static(part.block_cols);
            let g = graph(cfg.workload, &part, n_static)?;
            let r = scheduler::simulate(&g, &sched)?;
            let static_work: f64 = g
                .tasks()
                .iter()
                .filter(|t| t.section == Section::Static)
                .map(|t| cost(&g, t))
                .sum();
            let f_s = static_work / t1;
            let predicted = out.t_ideal.max(model::t_actual(&input.cost, &noise, f_s)) + t_cp;
            let makespan = r.stats.makespan;
            runs.push(SimRun {
                policy,
                d_ratio: d,
                n_static,
                static_work_fraction: f_s,
                makespan,
                ratio_to_ideal: makespan / out.t_ideal,
                predicted,
                ratio_to_predicted: makespan / predicted,
                pass: makespan <= (1.0 + cfg.tolerance) * predicted,
            });
        }
    }
    Ok(SimReport {
        version: VERSION,
        tasks: full.len(),
        t1,
        t_critical_path: t_cp,
        t_actual_static: model::t_actual(&input.cost, &noise, 1.0),
        deltas,
        model: out,
        all_pass: runs.iter().all(|r| r.pass),
        runs,
        config: cfg,
    })
}

pub fn cmd_simulate(cfg: RunConfig) -> Result<()> {
    let out = cfg.out.clone();
    let report = simulate_report(cfg)?;
    output::json(out.as_deref(), &report)
}
