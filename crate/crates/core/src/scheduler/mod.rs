//! Execution of the task graph on a pool of workers.
//!
//! Block columns left of `N_static` are static: each of their tasks runs on
//! the worker owning its block under the 2D block-cyclic distribution. The
//! remaining columns are dynamic and are pulled from one shared queue,
//! leftmost column first. Workers always prefer their own static work and
//! fill idle time with dynamic tasks.

mod numeric;
mod queues;
mod real;
mod sim;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dag::{Section, TaskGraph, TaskKind};
use crate::error::{CaluError, Result};
use crate::kernels::{PanelSwaps, PermutationVector, DEFAULT_RECURSION_CUTOFF};
use crate::layout::{LayoutMatrix, ThreadGrid};
use crate::matrix::DenseMatrix;
use crate::model::NoiseProfile;
use crate::trace::{TimeUnit, Timeline};
use crate::tslu::ReductionTree;

pub use numeric::Numeric;
pub use queues::{Dispatch, QueueState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Every task on its owner; same path as `Hybrid` with `d_ratio = 0`.
    Static,
    /// Every task from the global queue; same path as `Hybrid` with `d_ratio = 1`.
    Dynamic,
    Hybrid,
    /// Fully dynamic; workers first look for ready tasks on blocks they touched recently.
    BlockLocality,
    /// Block locality plus a search along the column of the last task.
    GuidedColumnLocality,
}

impl Policy {
    pub const ALL: [Policy; 5] = [
        Policy::Static,
        Policy::Dynamic,
        Policy::Hybrid,
        Policy::BlockLocality,
        Policy::GuidedColumnLocality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Static => "static",
            Policy::Dynamic => "dynamic",
            Policy::Hybrid => "hybrid",
            Policy::BlockLocality => "block-locality",
            Policy::GuidedColumnLocality => "guided-column-locality",
        }
    }

    /// Dynamic fraction actually used for a requested `d_ratio`.
    pub fn effective_d_ratio(self, d_ratio: f64) -> f64 {
        match self {
            Policy::Static => 0.0,
            Policy::Hybrid => d_ratio,
            Policy::Dynamic | Policy::BlockLocality | Policy::GuidedColumnLocality => 1.0,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = CaluError;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CaluError::Config(format!("unknown policy '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Real,
    Simulated,
}

impl FromStr for ExecMode {
    type Err = CaluError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(ExecMode::Real),
            "simulated" | "sim" => Ok(ExecMode::Simulated),
            _ => Err(CaluError::Config(format!("unknown mode '{s}'"))),
        }
    }
}

/// Virtual duration of each task kind. A panel costs `p_level` per level
/// of its reduction tree, leaves included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskCosts {
    pub p_level: f64,
    pub l: f64,
    pub u: f64,
    pub s: f64,
}

impl Default for TaskCosts {
    fn default() -> Self {
        Self {
            p_level: 0.5,
            l: 0.5,
            u: 0.5,
            s: 1.0,
        }
    }
}

/// Real-mode disturbance: `worker` sleeps before its first task of every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub worker: usize,
    pub sleep_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerConfig {
    pub policy: Policy,
    pub workers: usize,
    pub d_ratio: f64,
    /// Updates of one column batched per dispatch.
    pub group: usize,
    pub mode: ExecMode,
    pub seed: u64,
    /// Ownership grid; defaults to the near-square grid of `workers`.
    pub grid: Option<ThreadGrid>,
    /// Leaves of the pivoting tree; defaults to the number of grid rows.
    pub tree_leaves: Option<usize>,
    pub cutoff: usize,
    /// Panels allowed to run ahead of the oldest unfinished step; `None` is unbounded.
    pub lookahead: Option<usize>,
    /// Simulated mode: per-worker excess work.
    pub noise: Option<NoiseProfile>,
    pub costs: TaskCosts,
    /// Simulated mode: each duration is scaled by `1 + jitter * u`, `u` uniform in `[-1, 1]`.
    pub jitter: f64,
    pub perturbation: Option<Perturbation>,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            policy: Policy::Hybrid,
            workers: 1,
            d_ratio: 0.1,
            group: 3,
            mode: ExecMode::Real,
            seed: 0,
            grid: None,
            tree_leaves: None,
            cutoff: DEFAULT_RECURSION_CUTOFF,
            lookahead: Some(1),
            noise: None,
            costs: TaskCosts::default(),
            jitter: 0.0,
            perturbation: None,
        }
    }
}

impl SchedulerConfig {
    pub fn new(policy: Policy, workers: usize, d_ratio: f64) -> Self {
        Self {
            policy,
            workers,
            d_ratio,
            ..Self::default()
        }
    }

    pub fn simulated(mut self) -> Self {
        self.mode = ExecMode::Simulated;
        self
    }

    pub fn grid(&self) -> ThreadGrid {
        self.grid
            .unwrap_or_else(|| ThreadGrid::for_workers(self.workers))
    }

    pub fn leaves(&self) -> usize {
        self.tree_leaves.unwrap_or_else(|| self.grid().rows).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(CaluError::Config("workers must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.d_ratio) {
            return Err(CaluError::Config(format!(
                "d_ratio must be in [0, 1], got {}",
                self.d_ratio
            )));
        }
        if self.group == 0 {
            return Err(CaluError::Config("group must be >= 1".into()));
        }
        if self.grid().workers() != self.workers {
            return Err(CaluError::Config(format!(
                "grid {} does not match {} workers",
                self.grid(),
                self.workers
            )));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(CaluError::Config(format!(
                "jitter must be in [0, 1), got {}",
                self.jitter
            )));
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
            if noise.deltas.len() > self.workers {
                return Err(CaluError::Config(format!(
                    "{} noise entries for {} workers",
                    noise.deltas.len(),
                    self.workers
                )));
            }
        }
        if let Some(p) = &self.perturbation {
            if p.worker >= self.workers {
                return Err(CaluError::Config(format!(
                    "perturbed worker {} does not exist",
                    p.worker
                )));
            }
        }
        Ok(())
    }

    /// Static column count for `n` block columns under this policy.
    pub fn n_static(&self, n: usize) -> usize {
        n_static(n, self.policy.effective_d_ratio(self.d_ratio))
    }

    /// Virtual duration of `task` in `graph` under `self.costs`.
    pub fn task_cost(&self, graph: &TaskGraph, task: &crate::dag::Task) -> f64 {
        let c = self.costs;
        match task.kind {
            TaskKind::P => {
                let rows = graph.block_rows() - task.step;
                c.p_level * (ReductionTree::new(rows, 1, self.leaves()).depth() + 1) as f64
            }
            TaskKind::L => c.l,
            TaskKind::U => c.u,
            TaskKind::S => c.s,
        }
    }

    fn deltas(&self) -> Vec<f64> {
        let mut d = self
            .noise
            .as_ref()
            .map(|n| n.deltas.clone())
            .unwrap_or_default();
        d.resize(self.workers, 0.0);
        d
    }
}

/// `floor(n * (1 - d_ratio))`, clamped to `[0, n]`.
pub fn n_static(n: usize, d_ratio: f64) -> usize {
    let v = (n as f64 * (1.0 - d_ratio.clamp(0.0, 1.0))).floor();
    (v.max(0.0) as usize).min(n)
}

/// Combined `L\U` factors and the row permutation of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Factors {
    pub lu: DenseMatrix,
    pub perm: PermutationVector,
    pub pivots: Vec<PanelSwaps>,
}

impl Factors {
    pub fn l(&self) -> DenseMatrix {
        self.lu.split_lu().0
    }

    pub fn u(&self) -> DenseMatrix {
        self.lu.split_lu().1
    }

    /// Little-endian dump of the factor bits followed by the permutation.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * (self.lu.as_slice().len() + self.perm.len() + 2));
        out.extend((self.lu.rows() as u64).to_le_bytes());
        out.extend((self.lu.cols() as u64).to_le_bytes());
        for v in self.lu.as_slice() {
            out.extend(v.to_bits().to_le_bytes());
        }
        for &p in self.perm.as_slice() {
            out.extend((p as u64).to_le_bytes());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub unit: TimeUnit,
    pub makespan: f64,
    pub busy: Vec<f64>,
    pub idle: Vec<f64>,
    /// Simulated excess work per worker (part of its idle time).
    pub noise: Vec<f64>,
    pub tasks_by_kind: BTreeMap<String, usize>,
    pub static_tasks: usize,
    pub dynamic_tasks: usize,
    /// Tasks taken from a worker's own static queue.
    pub static_dispatches: usize,
    /// Tasks taken from the global queue.
    pub dynamic_dispatches: usize,
}

impl RunStats {
    fn from_timeline(
        t: &Timeline,
        noise: Vec<f64>,
        static_dispatches: usize,
        dynamic_dispatches: usize,
    ) -> Self {
        let makespan = t.makespan();
        let mut busy = vec![0.0; t.workers];
        let mut tasks_by_kind = BTreeMap::new();
        let (mut st, mut dy) = (0, 0);
        for e in &t.events {
            busy[e.worker] += e.duration();
            *tasks_by_kind
                .entry(e.task.kind.name().to_string())
                .or_insert(0) += 1;
            match e.task.section {
                Section::Static => st += 1,
                Section::Dynamic => dy += 1,
            }
        }
        let idle = busy.iter().map(|b| makespan - b).collect();
        Self {
            unit: t.unit,
            makespan,
            busy,
            idle,
            noise,
            tasks_by_kind,
            static_tasks: st,
            dynamic_tasks: dy,
            static_dispatches,
            dynamic_dispatches,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    /// `None` for simulated runs.
    pub factors: Option<Factors>,
    pub timeline: Timeline,
    pub stats: RunStats,
}

/// Factors `mat` in place under `cfg`, or simulates the schedule when
/// `cfg.mode` is simulated (the matrix is then left untouched).
pub fn run(mat: &LayoutMatrix, cfg: &SchedulerConfig) -> Result<RunReport> {
    cfg.validate()?;
    let part = mat.partition();
    let graph = TaskGraph::build(&part, cfg.n_static(part.block_cols))
        .map_err(|e| CaluError::Config(e.to_string()))?;
    match cfg.mode {
        ExecMode::Real => real::run(mat, &graph, cfg),
        ExecMode::Simulated => simulate(&graph, cfg),
    }
}

/// Virtual-time execution of `graph` with durations from `cfg.costs`.
pub fn simulate(graph: &TaskGraph, cfg: &SchedulerConfig) -> Result<RunReport> {
    simulate_with(graph, cfg, |t| cfg.task_cost(graph, t))
}

/// Virtual-time execution of `graph` with a caller-supplied duration per task.
pub fn simulate_with(
    graph: &TaskGraph,
    cfg: &SchedulerConfig,
    cost: impl Fn(&crate::dag::Task) -> f64,
) -> Result<RunReport> {
    cfg.validate()?;
    sim::run(graph, cfg, &cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_static_examples() {
        assert_eq!(n_static(10, 0.2), 8);
        assert_eq!(n_static(10, 0.0), 10);
        assert_eq!(n_static(7, 0.1), 6);
        assert_eq!(n_static(10, 1.0), 0);
        assert_eq!(n_static(0, 0.5), 0);
    }

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
            assert_eq!(
                serde_json::to_string(&p).unwrap(),
                format!("\"{}\"", p.name())
            );
        }
        assert!("fifo".parse::<Policy>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SchedulerConfig::new(Policy::Hybrid, 4, 0.1)
            .validate()
            .is_ok());
        assert!(SchedulerConfig::new(Policy::Hybrid, 0, 0.1)
            .validate()
            .is_err());
        assert!(SchedulerConfig::new(Policy::Hybrid, 4, 1.5)
            .validate()
            .is_err());
        let mut c = SchedulerConfig::new(Policy::Hybrid, 4, 0.1);
        c.grid = Some(ThreadGrid::new(3, 1).unwrap());
        assert!(c.validate().is_err());
        c.grid = Some(ThreadGrid::new(4, 1).unwrap());
        assert!(c.validate().is_ok());
        assert_eq!(c.leaves(), 4);
        let c: SchedulerConfig =
            serde_json::from_str(r#"{"policy": "static", "workers": 2}"#).unwrap();
        assert_eq!(c.group, 3);
        assert_eq!(c.n_static(10), 10);
    }
}
