//! Completion-time model for a static/dynamic split under per-core noise.
//!
//! Core `i` carries `delta_i` units of excess work. With perfect balancing
//! all work spreads evenly (`t_ideal`); a static fraction `f_s` is pinned to
//! its owners, so the noisiest core finishes last (`t_actual`). The largest
//! `f_s` for which the two agree is [`max_static_fraction`].

use serde::{Deserialize, Serialize};

use crate::error::{CaluError, Result};

/// Per-core excess work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    pub deltas: Vec<f64>,
    /// Probability that the excess work occurs on each core. Only `1.0` is
    /// modelled; other values are rejected.
    #[serde(default = "one")]
    pub phi: f64,
}

fn one() -> f64 {
    1.0
}

impl NoiseProfile {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        let n = Self { deltas, phi: 1.0 };
        n.validate()?;
        Ok(n)
    }

    /// No excess work on any of `p` cores.
    pub fn quiet(p: usize) -> Self {
        Self {
            deltas: vec![0.0; p],
            phi: 1.0,
        }
    }

    /// `delta` on core `core`, zero elsewhere.
    pub fn single(p: usize, core: usize, delta: f64) -> Self {
        let mut deltas = vec![0.0; p];
        deltas[core] = delta;
        Self { deltas, phi: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.deltas.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(CaluError::Config(format!(
                "noise delta must be finite and >= 0, got {d}"
            )));
        }
        if self.phi != 1.0 {
            return Err(CaluError::Config(format!(
                "only phi = 1 is supported, got {}",
                self.phi
            )));
        }
        Ok(())
    }

    pub fn delta_max(&self) -> f64 {
        self.deltas.iter().copied().fold(0.0, f64::max)
    }

    pub fn delta_sum(&self) -> f64 {
        self.deltas.iter().sum()
    }

    pub fn delta_avg(&self) -> f64 {
        if self.deltas.is_empty() {
            0.0
        } else {
            self.delta_sum() / self.deltas.len() as f64
        }
    }
}

/// Work and overhead terms of a parallel run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    #[serde(rename = "T1")]
    pub t1: f64,
    pub p: usize,
    #[serde(rename = "T_criticalPath", default)]
    pub t_critical_path: f64,
    #[serde(rename = "T_migration", default)]
    pub t_migration: f64,
    #[serde(rename = "T_overhead", default)]
    pub t_overhead: f64,
}

impl CostModel {
    pub fn new(t1: f64, p: usize) -> Result<Self> {
        let m = Self {
            t1,
            p,
            t_critical_path: 0.0,
            t_migration: 0.0,
            t_overhead: 0.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1.is_finite() && self.t1 > 0.0) {
            return Err(CaluError::Config(format!(
                "T1 must be > 0, got {}",
                self.t1
            )));
        }
        if self.p == 0 {
            return Err(CaluError::Config("p must be >= 1".into()));
        }
        for (name, v) in [
            ("T_criticalPath", self.t_critical_path),
            ("T_migration", self.t_migration),
            ("T_overhead", self.t_overhead),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CaluError::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `T1/p + T_criticalPath + T_migration + T_overhead`.
    pub fn t_p(&self) -> f64 {
        self.t1 / self.p as f64 + self.t_critical_path + self.t_migration + self.t_overhead
    }
}

/// Completion time with all work, noise included, spread evenly.
pub fn t_ideal(model: &CostModel, noise: &NoiseProfile) -> f64 {
    (model.t1 + noise.delta_sum()) / model.p as f64
}

/// Completion time when a fraction `f_s` of the work is bound to its owner.
pub fn t_actual(model: &CostModel, noise: &NoiseProfile, f_s: f64) -> f64 {
    f_s * model.t1 / model.p as f64 + noise.delta_max()
}

/// Static-fraction bound together with whether it had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticBound {
    pub f_s: f64,
    pub unclamped: f64,
    pub clamped: bool,
}

/// `1 - (delta_max - delta_avg) / T_p`, clamped to `[0, 1]`.
pub fn static_bound(model: &CostModel, noise: &NoiseProfile) -> StaticBound {
    let raw = 1.0 - (noise.delta_max() - noise.delta_avg()) / model.t_p();
    let f_s = raw.clamp(0.0, 1.0);
    StaticBound {
        f_s,
        unclamped: raw,
        clamped: f_s != raw,
    }
}

pub fn max_static_fraction(model: &CostModel, noise: &NoiseProfile) -> f64 {
    static_bound(model, noise).f_s
}

/// Input document of the `model` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInput {
    #[serde(flatten)]
    pub cost: CostModel,
    pub deltas: Vec<f64>,
}

/// Output document of the `model` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutput {
    pub t_ideal: f64,
    pub t_actual_at_bound: f64,
    pub f_s_max: f64,
    pub d_ratio_min: f64,
    pub clamped: bool,
    #[serde(rename = "T_p")]
    pub t_p: f64,
}

impl ModelInput {
    pub fn evaluate(&self) -> Result<ModelOutput> {
        self.cost.validate()?;
        let noise = NoiseProfile::new(self.deltas.clone())?;
        if noise.deltas.len() > self.cost.p {
            return Err(CaluError::Config(format!(
                "{} deltas given for p = {}",
                noise.deltas.len(),
                self.cost.p
            )));
        }
        // missing cores carry no excess work
        let mut deltas = noise.deltas;
        deltas.resize(self.cost.p, 0.0);
        let noise = NoiseProfile { deltas, phi: 1.0 };
        let bound = static_bound(&self.cost, &noise);
        Ok(ModelOutput {
            t_ideal: t_ideal(&self.cost, &noise),
            t_actual_at_bound: t_actual(&self.cost, &noise, bound.f_s),
            f_s_max: bound.f_s,
            d_ratio_min: 1.0 - bound.f_s,
            clamped: bound.clamped,
            t_p: self.cost.t_p(),
        })
    }
}
