//! `factor` and `sweep`.

use std::collections::BTreeMap;
use std::fs;

use serde::Serialize;

use calu_core::matrix::{growth_factor, relative_residual};
use calu_core::scheduler::{self, ExecMode, Policy};
use calu_core::trace::{self, TimeUnit};
use calu_core::{CaluError, DenseMatrix, LayoutKind, LayoutMatrix, Result, RunReport};

use crate::config::{RunConfig, VERSION};
use crate::output;

#[derive(Debug, Clone, Serialize)]
pub struct WorkerStats {
    pub worker: usize,
    pub busy: f64,
    pub idle: f64,
    pub idle_fraction: f64,
    pub noise: f64,
}

/// Everything `factor` reports about one run.
#[derive(Debug, Clone, Serialize)]
pub struct FactorReport {
    pub version: &'static str,
    pub config: RunConfig,
    pub m: usize,
    pub n: usize,
    pub b: usize,
    pub block_cols: usize,
    pub n_static: usize,
    /// `||P A - L U||_F / ||A||_F`; absent for simulated runs.
    pub residual: Option<f64>,
    /// `max|U| / max|A|`; absent for simulated runs.
    pub growth: Option<f64>,
    pub makespan: f64,
    pub time_unit: TimeUnit,
    pub idle_max: f64,
    pub idle_avg: f64,
    pub workers: Vec<WorkerStats>,
    pub tasks_by_kind: BTreeMap<String, usize>,
    pub static_tasks: usize,
    pub dynamic_tasks: usize,
    pub static_dispatches: usize,
    pub dynamic_dispatches: usize,
}

/// Factors (or simulates) `a` under `cfg`, whose shape fields must already
/// describe `a`.
pub fn factor_matrix(a: &DenseMatrix, cfg: &RunConfig) -> Result<(FactorReport, RunReport)> {
    let sched = cfg.scheduler()?;
    let b = cfg.block_size();
    let mat = LayoutMatrix::from_dense(a, b, cfg.layout, sched.grid())?;
    let part = mat.partition();
    let run = scheduler::run(&mat, &sched)?;
    let (residual, growth) = match &run.factors {
        Some(f) => (
            Some(relative_residual(a, &f.lu, &f.perm.0)?),
            Some(growth_factor(a, &f.lu)),
        ),
        None => (None, None),
    };
    let idle = trace::idle_stats(&run.timeline)?;
    let s = &run.stats;
    let workers = (0..sched.workers)
        .map(|w| WorkerStats {
            worker: w,
            busy: s.busy[w],
            idle: s.idle[w],
            idle_fraction: idle.idle_fraction[w],
            noise: s.noise[w],
        })
        .collect();
    let report = FactorReport {
        version: VERSION,
        config: cfg.clone(),
        m: part.m,
        n: part.n,
        b,
        block_cols: part.block_cols,
        n_static: sched.n_static(part.block_cols),
        residual,
        growth,
        makespan: s.makespan,
        time_unit: s.unit,
        idle_max: idle.idle_max(),
        idle_avg: idle.idle_avg(),
        workers,
        tasks_by_kind: s.tasks_by_kind.clone(),
        static_tasks: s.static_tasks,
        dynamic_tasks: s.dynamic_tasks,
        static_dispatches: s.static_dispatches,
        dynamic_dispatches: s.dynamic_dispatches,
    };
    Ok((report, run))
}

pub fn cmd_factor(mut cfg: RunConfig) -> Result<()> {
    let a = cfg.load_matrix()?;
    let (report, run) = factor_matrix(&a, &cfg)?;
    if let Some(p) = &cfg.trace_json {
        run.timeline.write_chrome(p)?;
    }
    if let Some(p) = &cfg.trace_svg {
        run.timeline.write_svg(p)?;
    }
    if let Some(p) = &cfg.factors {
        let f = run
            .factors
            .as_ref()
            .ok_or_else(|| CaluError::Config("--factors needs a real run".into()))?;
        fs::write(p, f.to_bytes())?;
    }
    output::json(cfg.out.as_deref(), &report)
}

/// One CSV row of `sweep`. Column order is part of the output format.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub version: &'static str,
    pub generator: String,
    pub seed: u64,
    pub mode: String,
    pub policy: String,
    pub layout: String,
    pub d_ratio: f64,
    #[serde(rename = "P")]
    pub workers: usize,
    pub grid: String,
    pub b: usize,
    pub m: usize,
    pub n: usize,
    pub n_static: Option<usize>,
    pub makespan: Option<f64>,
    pub time_unit: Option<String>,
    pub residual: Option<f64>,
    pub growth: Option<f64>,
    pub idle_max: Option<f64>,
    pub idle_avg: Option<f64>,
    pub static_tasks: Option<usize>,
    pub dynamic_tasks: Option<usize>,
    pub error: Option<String>,
}

fn or_single<T: Clone>(list: &[T], single: T) -> Vec<T> {
    if list.is_empty() {
        vec![single]
    } else {
        list.to_vec()
    }
}

pub fn sweep_rows(mut base: RunConfig) -> Result<Vec<SweepRow>> {
    let a = base.load_matrix()?;
    let lists = base.sweep.clone();
    let policies: Vec<Policy> = or_single(&lists.policies, base.policy);
    let layouts: Vec<LayoutKind> = or_single(&lists.layouts, base.layout);
    let ratios: Vec<f64> = or_single(&lists.d_ratios, base.d_ratio);
    let workers: Vec<usize> = or_single(&lists.workers, base.workers);
    let sizes: Vec<usize> = or_single(&lists.block_sizes, base.block_size());
    let source = match &base.matrix {
        Some(p) => p.display().to_string(),
        None => serde_json::to_value(base.generator)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
    };

    let mut rows = Vec::new();
    for &policy in &policies {
        for &layout in &layouts {
            for &d_ratio in &ratios {
                for &p in &workers {
                    for &b in &sizes {
                        let mut cfg = base.clone();
                        cfg.policy = policy;
                        cfg.layout = layout;
                        cfg.d_ratio = d_ratio;
                        cfg.workers = p;
                        cfg.b = Some(b);
                        let grid = cfg
                            .grid
                            .unwrap_or_else(|| calu_core::ThreadGrid::for_workers(p))
                            .to_string();
                        let mut row = SweepRow {
                            version: VERSION,
                            generator: source.clone(),
                            seed: cfg.seed,
                            mode: match cfg.mode {
                                ExecMode::Real => "real".into(),
                                ExecMode::Simulated => "simulated".into(),
                            },
                            policy: policy.to_string(),
                            layout: layout.to_string(),
                            d_ratio,
                            workers: p,
                            grid,
                            b,
                            m: cfg.m,
                            n: cfg.n,
                            n_static: None,
                            makespan: None,
                            time_unit: None,
                            residual: None,
                            growth: None,
                            idle_max: None,
                            idle_avg: None,
                            static_tasks: None,
                            dynamic_tasks: None,
                            error: None,
                        };
                        match factor_matrix(&a, &cfg) {
                            Ok((r, _)) => {
                                row.n_static = Some(r.n_static);
                                row.makespan = Some(r.makespan);
                                row.time_unit = Some(r.time_unit.name().into());
                                row.residual = r.residual;
                                row.growth = r.growth;
                                row.idle_max = Some(r.idle_max);
                                row.idle_avg = Some(r.idle_avg);
                                row.static_tasks = Some(r.static_tasks);
                                row.dynamic_tasks = Some(r.dynamic_tasks);
                            }
                            Err(e) => row.error = Some(e.to_string()),
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn cmd_sweep(cfg: RunConfig) -> Result<()> {
    let out = cfg.out.clone();
    let rows = sweep_rows(cfg)?;
    output::csv(out.as_deref(), &rows)
}
