//! Run-config file schema (TOML). Unknown keys are rejected everywhere.
//!
//! ```toml
//! seed = 42
//!
//! [source]
//! mu_min = 0.25
//! mu_max = 0.25
//! kind = "iid"              # iid | extremal | history_toggle | scripted
//! # distribution = [[0.25, 0.25], [0.25, 0.25]]   (iid; default uniform)
//! # favored = [0, 0]                               (extremal)
//! # script_hex = "1b"                              (scripted, MSB first per nibble)
//!
//! [device]
//! kind = "honest"           # honest | deterministic | scripted
//! q = 0.0                   # depolarizing weight (honest)
//! # alice = [0, 1], bob = [1, 1]                   (deterministic)
//! # outputs = [[0, 0], [1, 1]]                     (scripted)
//!
//! [eat]
//! n = 1000000
//! s_exp = 0.0129
//! delta_est = 0.001
//! eps_s = 1e-6
//! eps_ea = 1e-6
//!
//! [extractor]
//! eps_ext = 1e-6
//! # d = 2000000             (default 2n)
//!
//! [rate]                    # grid for the `rate` subcommand
//! mu = [[0.25, 0.25], [0.21, 0.371]]
//! n = [100000000000, 500000000]
//! s_exp = [0.00491, 0.01294]
//! # s_exp_range = { start = 0.0002, stop = 0.0129, points = 50 }
//! delta_est = 1e-4
//! eps_s = 1e-7
//! eps_ea = 1e-7
//!
//! [optimize]
//! mu_min = 0.124
//! mu_max = 0.629
//! restarts = 32
//! ```

use serde::Deserialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::protocol::{DeviceModel, ExtractorConfig};
use crate::quantum::optimize::{optimize_s_tilde, NelderMeadConfig, OptimizerConfig};
use crate::rates::EatParams;
use crate::sources::{InputDistribution, MdlParams, SourceKind, SourceModel};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub source: Option<SourceSection>,
    pub device: Option<DeviceSection>,
    pub eat: Option<EatSection>,
    pub extractor: Option<ExtractorSection>,
    pub rate: Option<RateSection>,
    pub optimize: Option<OptimizeSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKindName {
    Iid,
    Extremal,
    HistoryToggle,
    Scripted,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub mu_min: f64,
    pub mu_max: f64,
    #[serde(default = "default_source_kind")]
    pub kind: SourceKindName,
    pub distribution: Option<[[f64; 2]; 2]>,
    pub favored: Option<[u8; 2]>,
    pub script_hex: Option<String>,
}

fn default_source_kind() -> SourceKindName {
    SourceKindName::Iid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKindName {
    Honest,
    Deterministic,
    Scripted,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub kind: DeviceKindName,
    #[serde(default)]
    pub q: f64,
    pub alice: Option<[u8; 2]>,
    pub bob: Option<[u8; 2]>,
    pub outputs: Option<Vec<[u8; 2]>>,
    /// Optimizer restarts used to build the honest strategy.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_restarts() -> usize {
    32
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EatSection {
    pub n: u64,
    pub s_exp: f64,
    pub delta_est: f64,
    pub eps_s: f64,
    pub eps_ea: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractorSection {
    pub d: Option<usize>,
    pub eps_ext: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSection {
    #[serde(default)]
    pub mu: Vec<[f64; 2]>,
    #[serde(default)]
    pub n: Vec<u64>,
    #[serde(default)]
    pub s_exp: Vec<f64>,
    pub s_exp_range: Option<Range>,
    pub delta_est: f64,
    pub eps_s: f64,
    pub eps_ea: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub mu_min: f64,
    pub mu_max: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub full_bloch: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
        s.as_ref()
            .ok_or_else(|| Error::Config(format!("missing [{name}] section")))
    }

    pub fn mdl_params(&self) -> Result<MdlParams> {
        let s = Self::section(&self.source, "source")?;
        MdlParams::new(s.mu_min, s.mu_max).map_err(schema)
    }

    pub fn source_model(&self) -> Result<SourceModel> {
        let s = Self::section(&self.source, "source")?;
        let params = self.mdl_params()?;
        let kind = match s.kind {
            SourceKindName::Iid => {
                let dist = match s.distribution {
                    Some(d) => InputDistribution::new(d).map_err(schema)?,
                    None => InputDistribution::uniform(),
                };
                SourceKind::Iid(dist)
            }
            SourceKindName::Extremal => {
                let [x, y] = s
                    .favored
                    .ok_or_else(|| Error::Config("extremal source needs `favored`".into()))?;
                SourceKind::Extremal { favored: (x, y) }
            }
            SourceKindName::HistoryToggle => SourceKind::HistoryToggle,
            SourceKindName::Scripted => {
                let hex = s
                    .script_hex
                    .as_deref()
                    .ok_or_else(|| Error::Config("scripted source needs `script_hex`".into()))?;
                SourceKind::Scripted(BitString::from_hex(hex).map_err(schema)?)
            }
        };
        SourceModel::new(kind, params).map_err(schema)
    }

    /// Device model; the honest strategy is the `S̃_μ` optimizer's output.
    pub fn device_model(&self) -> Result<DeviceModel> {
        let d = Self::section(&self.device, "device")?;
        match d.kind {
            DeviceKindName::Honest => {
                if !(0.0..=1.0).contains(&d.q) {
                    return Err(Error::Config(format!("q = {} outside [0, 1]", d.q)));
                }
                let config = OptimizerConfig {
                    restarts: d.restarts.max(1),
                    seed: self.seed,
                    ..OptimizerConfig::default()
                };
                let opt = optimize_s_tilde(&self.mdl_params()?, &config)?;
                Ok(DeviceModel::honest(opt.strategy, d.q))
            }
            DeviceKindName::Deterministic => {
                let (alice, bob) = d
                    .alice
                    .zip(d.bob)
                    .ok_or_else(|| Error::Config("deterministic device needs `alice` and `bob`".into()))?;
                if alice.iter().chain(&bob).any(|&v| v > 1) {
                    return Err(Error::Config("deterministic tables must be binary".into()));
                }
                Ok(DeviceModel::DeterministicClassical { alice, bob })
            }
            DeviceKindName::Scripted => {
                let outputs = d
                    .outputs
                    .as_ref()
                    .filter(|o| !o.is_empty())
                    .ok_or_else(|| Error::Config("scripted device needs non-empty `outputs`".into()))?;
                Ok(DeviceModel::Scripted {
                    outputs: outputs.iter().map(|&[a, b]| (a, b)).collect(),
                })
            }
        }
    }

    pub fn eat_params(&self) -> Result<EatParams> {
        let e = Self::section(&self.eat, "eat")?;
        EatParams::new(e.n as u128, e.s_exp, e.delta_est, e.eps_s, e.eps_ea).map_err(schema)
    }

    pub fn extractor_config(&self) -> Result<ExtractorConfig> {
        let x = Self::section(&self.extractor, "extractor")?;
        if !(x.eps_ext > 0.0 && x.eps_ext < 1.0) {
            return Err(Error::Config(format!("eps_ext = {} outside (0, 1)", x.eps_ext)));
        }
        if x.d.is_some_and(|d| d == 0 || d % 2 != 0) {
            return Err(Error::Config("seed length d must be even and positive".into()));
        }
        Ok(ExtractorConfig {
            d: x.d,
            eps_ext: x.eps_ext,
        })
    }

    pub fn rate_section(&self) -> Result<&RateSection> {
        Self::section(&self.rate, "rate")
    }

    pub fn optimizer(&self) -> Result<(MdlParams, OptimizerConfig)> {
        let o = Self::section(&self.optimize, "optimize")?;
        let params = MdlParams::new(o.mu_min, o.mu_max).map_err(schema)?;
        let mut nm = NelderMeadConfig::default();
        if let Some(t) = o.tolerance {
            nm.tolerance = t;
        }
        Ok((
            params,
            OptimizerConfig {
                restarts: o.restarts.max(1),
                seed: self.seed,
                nelder_mead: nm,
                full_bloch: o.full_bloch,
            },
        ))
    }
}

impl RateSection {
    /// Expected-violation grid: the explicit list followed by the range points.
    pub fn s_exp_values(&self) -> Vec<f64> {
        let mut out = self.s_exp.clone();
        if let Some(r) = self.s_exp_range {
            match r.points {
                0 => {}
                1 => out.push(r.start),
                p => out.extend((0..p).map(|i| r.start + (r.stop - r.start) * i as f64 / (p - 1) as f64)),
            }
        }
        out
    }
}

/// Parameter errors found while validating a config are schema errors.
fn schema(e: Error) -> Error {
    match e {
        Error::Io(_) => e,
        other => Error::Config(other.to_string()),
    }
}
