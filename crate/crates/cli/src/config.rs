//! Run configuration: a JSON file overlaid with command-line flags.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use calu_core::matrix::{read_matrix_market, Generator};
use calu_core::model::NoiseProfile;
use calu_core::scheduler::{ExecMode, Perturbation, Policy, SchedulerConfig, TaskCosts};
use calu_core::{CaluError, DenseMatrix, LayoutKind, Result, ThreadGrid};

pub const VERSION: &str = concat!("calu ", env!("CARGO_PKG_VERSION"));

/// Task graph used by `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Workload {
    /// The factorization DAG of an `m x n` matrix with `b x b` tiles.
    Calu,
    /// Independent updates on the same tile grid.
    Independent,
}

/// Value lists expanded by `sweep` (and by `simulate` for policies and ratios).
/// An empty list means the single value of the enclosing config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepLists {
    pub policies: Vec<Policy>,
    pub layouts: Vec<LayoutKind>,
    pub d_ratios: Vec<f64>,
    pub workers: Vec<usize>,
    pub block_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// MatrixMarket input; when absent the matrix comes from `generator`.
    pub matrix: Option<PathBuf>,
    pub generator: Generator,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    /// Tile size; defaults to `clamp(n / 8, 4, 100)` capped at `min(m, n)`.
    pub b: Option<usize>,
    pub layout: LayoutKind,
    #[serde(with = "grid_text")]
    pub grid: Option<ThreadGrid>,
    pub policy: Policy,
    pub workers: usize,
    pub d_ratio: f64,
    pub group: usize,
    pub mode: ExecMode,
    pub tree_leaves: Option<usize>,
    pub cutoff: usize,
    pub lookahead: Option<usize>,
    pub jitter: f64,
    pub costs: TaskCosts,
    /// JSON file holding per-worker excess work, either an array or `{"deltas": [...]}`.
    pub noise: Option<PathBuf>,
    pub deltas: Vec<f64>,
    pub perturbation: Option<Perturbation>,
    pub workload: Workload,
    /// Relative slack allowed over the predicted makespan in `simulate`.
    pub tolerance: f64,
    pub sweep: SweepLists,
    pub out: Option<PathBuf>,
    pub trace_json: Option<PathBuf>,
    pub trace_svg: Option<PathBuf>,
    /// Raw dump of the factors and permutation.
    pub factors: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sched = SchedulerConfig::default();
        Self {
            matrix: None,
            generator: Generator::RandomGaussian,
            seed: 0,
            m: 256,
            n: 256,
            b: None,
            layout: LayoutKind::BlockCyclic,
            grid: None,
            policy: sched.policy,
            workers: 4,
            d_ratio: sched.d_ratio,
            group: sched.group,
            mode: sched.mode,
            tree_leaves: sched.tree_leaves,
            cutoff: sched.cutoff,
            lookahead: sched.lookahead,
            jitter: sched.jitter,
            costs: sched.costs,
            noise: None,
            deltas: Vec::new(),
            perturbation: None,
            workload: Workload::Calu,
            tolerance: 0.05,
            sweep: SweepLists::default(),
            out: None,
            trace_json: None,
            trace_svg: None,
            factors: None,
        }
    }
}

pub fn default_block_size(m: usize, n: usize) -> usize {
    (n / 8).clamp(4, 100).min(m.min(n)).max(1)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CaluError::Config(format!("{}: {e}", path.display())))
    }

    pub fn block_size(&self) -> usize {
        self.b.unwrap_or_else(|| default_block_size(self.m, self.n))
    }

    /// Reads or generates the input matrix and records its shape and tile size.
    pub fn load_matrix(&mut self) -> Result<DenseMatrix> {
        let a = match &self.matrix {
            Some(path) => read_matrix_market(BufReader::new(fs::File::open(path)?))?,
            None => self.generator.generate(self.m, self.n, self.seed),
        };
        self.m = a.rows();
        self.n = a.cols();
        self.b = Some(self.block_size());
        Ok(a)
    }

    pub fn noise_profile(&self) -> Result<Option<NoiseProfile>> {
        let mut deltas = self.deltas.clone();
        if let Some(path) = &self.noise {
            #[derive(Deserialize)]
            #[serde(untagged)]
            enum NoiseFile {
                List(Vec<f64>),
                Object { deltas: Vec<f64> },
            }
            let text = fs::read_to_string(path)?;
            let parsed: NoiseFile = serde_json::from_str(&text)
                .map_err(|e| CaluError::Config(format!("{}: {e}", path.display())))?;
            deltas = match parsed {
                NoiseFile::List(d) | NoiseFile::Object { deltas: d } => d,
            };
        }
        if deltas.is_empty() {
            Ok(None)
        } else {
            NoiseProfile::new(deltas).map(Some)
        }
    }

    pub fn scheduler(&self) -> Result<SchedulerConfig> {
        let cfg = SchedulerConfig {
            policy: self.policy,
            workers: self.workers,
            d_ratio: self.d_ratio,
            group: self.group,
            mode: self.mode,
            seed: self.seed,
            grid: self.grid,
            tree_leaves: self.tree_leaves,
            cutoff: self.cutoff,
            lookahead: self.lookahead,
            noise: self.noise_profile()?,
            costs: self.costs,
            jitter: self.jitter,
            perturbation: self.perturbation,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Flag values layered over a config file. List-valued flags carry one
/// entry for `factor` and any number for `sweep`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration; flags take precedence over its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub policy: Vec<Policy>,
    #[arg(long = "d-ratio", value_delimiter = ',')]
    pub d_ratio: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub workers: Vec<usize>,
    #[arg(long = "block-size", short = 'b', value_delimiter = ',')]
    pub block_size: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub layout: Vec<LayoutKind>,
    /// Worker grid as ROWSxCOLS.
    #[arg(long)]
    pub grid: Option<ThreadGrid>,
    #[arg(long)]
    pub trace_json: Option<PathBuf>,
    #[arg(long)]
    pub trace_svg: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub factors: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<ExecMode>,
    /// MatrixMarket input file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// random-gaussian, diag-dominant or identity.
    #[arg(long)]
    pub generator: Option<Generator>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Square matrix order; sets both m and n.
    #[arg(long, conflicts_with_all = ["m", "n"])]
    pub size: Option<usize>,
    #[arg(long)]
    pub group: Option<usize>,
    #[arg(long)]
    pub tree_leaves: Option<usize>,
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Noise file for simulated runs.
    #[arg(long)]
    pub noise: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub workload: Option<Workload>,
}

/// Which list-valued flags a command expands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Listed {
    None,
    PolicyAndRatio,
    All,
}

fn single<T: Copy>(flag: &str, values: &[T]) -> Result<Option<T>> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(CaluError::Config(format!(
            "--{flag} takes a single value here"
        ))),
    }
}

impl Overrides {
    /// Loads the config file (if any) and applies the flags. Flags named by
    /// `listed` fill the sweep lists; the others must carry one value.
    pub fn resolve(&self, listed: Listed) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let (all, some) = match listed {
            Listed::None => (false, false),
            Listed::PolicyAndRatio => (false, true),
            Listed::All => (true, true),
        };
        macro_rules! list_or_single {
            ($flag:literal, $values:expr, $list:expr, $single:expr, $wrap:expr, $listed:expr) => {
                if $listed {
                    if !$values.is_empty() {
                        $list = $values.clone();
                    }
                } else if let Some(v) = single($flag, &$values)? {
                    $single = $wrap(v);
                }
            };
        }
        list_or_single!(
            "policy",
            self.policy,
            c.sweep.policies,
            c.policy,
            |v| v,
            some
        );
        list_or_single!(
            "d-ratio",
            self.d_ratio,
            c.sweep.d_ratios,
            c.d_ratio,
            |v| v,
            some
        );
        list_or_single!("layout", self.layout, c.sweep.layouts, c.layout, |v| v, all);
        list_or_single!(
            "workers",
            self.workers,
            c.sweep.workers,
            c.workers,
            |v| v,
            all
        );
        list_or_single!(
            "block-size",
            self.block_size,
            c.sweep.block_sizes,
            c.b,
            Some,
            all
        );
        if self.grid.is_some() {
            c.grid = self.grid;
        }
        if let Some(s) = self.size {
            c.m = s;
            c.n = s;
        }
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = &self.$field {
                    $target = v.clone().into();
                })*
            };
        }
        set!(
            trace_json => c.trace_json,
            trace_svg => c.trace_svg,
            out => c.out,
            factors => c.factors,
            seed => c.seed,
            mode => c.mode,
            matrix => c.matrix,
            generator => c.generator,
            m => c.m,
            n => c.n,
            group => c.group,
            tree_leaves => c.tree_leaves,
            jitter => c.jitter,
            noise => c.noise,
            workload => c.workload,
        );
        Ok(c)
    }
}

/// Grids are written as `"RxC"` in config files.
mod grid_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use calu_core::ThreadGrid;

    pub fn serialize<S: Serializer>(grid: &Option<ThreadGrid>, s: S) -> Result<S::Ok, S::Error> {
        match grid {
            Some(g) => s.serialize_str(&g.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ThreadGrid>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_block_sizes() {
        assert_eq!(default_block_size(256, 256), 32);
        assert_eq!(default_block_size(16, 16), 4);
        assert_eq!(default_block_size(3, 3), 3);
        assert_eq!(default_block_size(5000, 5000), 100);
        assert_eq!(default_block_size(10, 800), 10);
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut c = RunConfig::default();
        c.grid = Some(ThreadGrid::new(2, 3).unwrap());
        c.workers = 6;
        c.deltas = vec![0.5, 0.0];
        c.sweep.policies = vec![Policy::Static, Policy::GuidedColumnLocality];
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"grid\":\"2x3\""));
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"d_ration": 0.1}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"policy": "static", "grid": "2x2"}"#).unwrap();
        assert_eq!(c.policy, Policy::Static);
        assert_eq!(c.workers, 4);
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"policy": "static", "workers": 2, "seed": 5}"#).unwrap();
        let o = Overrides {
            config: Some(path),
            workers: vec![8],
            ..Default::default()
        };
        let c = o.resolve(Listed::None).unwrap();
        assert_eq!((c.policy, c.workers, c.seed), (Policy::Static, 8, 5));

        let o = Overrides {
            workers: vec![1, 2],
            ..Default::default()
        };
        assert!(o.resolve(Listed::None).is_err());
        assert_eq!(o.resolve(Listed::All).unwrap().sweep.workers, vec![1, 2]);
    }
}
