//! Flat run configuration shared by the command line and TOML files.

use std::path::PathBuf;

use clap::ValueEnum;
use qispline_core::{OperatorKind, PartitionFamily, PartitionSpec, TestFunction};
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Norms,
    Nearbest,
    Convergence,
    Quad,
    Diffmat,
    Audit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Norms => "norms",
            Command::Nearbest => "nearbest",
            Command::Convergence => "convergence",
            Command::Quad => "quad",
            Command::Diffmat => "diffmat",
            Command::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Q2star,
    Qp2star,
    Dqi,
    Nearbest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Uniform,
    Arithmetic,
    Geometric,
    Random,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Arithmetic => "arithmetic",
            Family::Geometric => "geometric",
            Family::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Function {
    Sin,
    Exp,
    Runge,
}

impl Function {
    pub fn test_function(self) -> TestFunction {
        match self {
            Function::Sin => TestFunction::Sin,
            Function::Exp => TestFunction::Exp,
            Function::Runge => TestFunction::Runge,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every knob of a run. Missing keys take the defaults below; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub kind: Kind,
    pub m: usize,
    /// Stencil half-width; defaults to `m`.
    pub p: Option<usize>,
    pub q: usize,
    pub family: Family,
    pub a: f64,
    pub b: f64,
    pub n: usize,
    /// Geometric ratio, arithmetic increment or random spread.
    pub ratio: Option<f64>,
    /// At most `i64::MAX`, the largest TOML integer.
    pub seed: u64,
    /// Number of partitions in a sweep; seeds run from `seed` upwards.
    pub count: usize,
    pub f: Function,
    pub sizes: Vec<usize>,
    pub out: Option<PathBuf>,
    pub audit: bool,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Norms,
            kind: Kind::Q2star,
            m: 2,
            p: None,
            q: 2,
            family: Family::Uniform,
            a: 0.0,
            b: 1.0,
            n: 16,
            ratio: None,
            seed: 0,
            count: 1,
            f: Function::Sin,
            sizes: vec![16, 32, 64, 128],
            out: None,
            audit: false,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.message().to_string()))
    }

    /// Canonical TOML: every key, fixed order.
    pub fn to_canonical(&self) -> Result<String, RunError> {
        toml::to_string(self).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn half_width(&self) -> usize {
        self.p.unwrap_or(self.m)
    }

    /// Family parameter after defaults, as reported in output rows.
    pub fn family_param(&self) -> Option<f64> {
        match self.family {
            Family::Uniform => None,
            Family::Arithmetic => Some(self.ratio.unwrap_or(1.0)),
            Family::Geometric => Some(self.ratio.unwrap_or(2.0)),
            Family::Random => Some(self.ratio.unwrap_or(10.0)),
        }
    }

    pub fn operator_kind(&self) -> OperatorKind {
        match self.kind {
            Kind::Q2star => OperatorKind::Q2Star,
            Kind::Qp2star => OperatorKind::Qp2Star {
                p: self.half_width(),
            },
            Kind::Dqi => OperatorKind::Dqi,
            Kind::Nearbest => OperatorKind::NearBest {
                p: self.half_width(),
                q: self.q,
            },
        }
    }

    /// Partition spec with `n` intervals; `seed` only affects the random family.
    pub fn partition(&self, n: usize, seed: u64) -> PartitionSpec {
        let family = match self.family {
            Family::Uniform => PartitionFamily::Uniform,
            Family::Arithmetic => PartitionFamily::Arithmetic {
                increment: self.family_param().unwrap(),
            },
            Family::Geometric => PartitionFamily::Geometric {
                ratio: self.family_param().unwrap(),
            },
            Family::Random => PartitionFamily::Random {
                seed,
                spread: self.family_param().unwrap(),
            },
        };
        PartitionSpec::new(family, self.a, self.b, n)
    }

    /// Seeds of the partitions in a sweep. Non-random families have one.
    pub fn sweep(&self) -> Vec<u64> {
        match self.family {
            Family::Random => (0..self.count as u64)
                .map(|k| self.seed.wrapping_add(k))
                .collect(),
            _ => vec![self.seed],
        }
    }

    /// Rejects combinations no command can run.
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if !(self.a.is_finite() && self.b.is_finite() && self.a < self.b) {
            return bad(format!(
                "interval [{}, {}] is empty or not finite",
                self.a, self.b
            ));
        }
        if self.seed > i64::MAX as u64 {
            return bad(format!("seed {} exceeds {}", self.seed, i64::MAX));
        }
        if self.p == Some(0) {
            return bad("p must be at least 1".into());
        }
        if self.ratio.is_some() && self.family == Family::Uniform {
            return bad("ratio has no meaning for the uniform family".into());
        }
        if let Some(r) = self.family_param() {
            let ok = match self.family {
                Family::Arithmetic => r.is_finite() && r >= 0.0,
                _ => r.is_finite() && r >= 1.0,
            };
            if !ok {
                return bad(format!("invalid {} parameter {r}", self.family.name()));
            }
        }
        let studies = matches!(
            self.command,
            Command::Convergence | Command::Diffmat | Command::Quad
        );
        if studies && (self.sizes.is_empty() || self.sizes.contains(&0)) {
            return bad("sizes must be a nonempty list of positive integers".into());
        }
        if self.kind == Kind::Dqi && self.command != Command::Convergence {
            return bad(format!(
                "kind dqi is only available for convergence, not {}",
                self.command.name()
            ));
        }
        Ok(())
    }
}
