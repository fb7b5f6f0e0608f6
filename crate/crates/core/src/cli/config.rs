//! JSON run configuration.
//!
//! ```json
//! {
//!   "system":     { "beta_bs_ue1": 1.0, "alpha_bs_t2": 0.1, "rate_ue1_ul": 1.0, ... },
//!   "sweep":      { "snr_db": "0:40:2", "trials": 100000, "seed": 1, "preset": "fig3" },
//!   "quadrature": { "n_terms": 100, "oracle_tol": 1e-10 },
//!   "output":     { "prefix": "results/fig3" }
//! }
//! ```
//!
//! Every key is optional; missing ones take the defaults below. Unknown keys
//! are rejected.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use crate::analysis::QuadratureConfig;
use crate::channel::ChannelStats;
use crate::error::{Error, Result};
use crate::montecarlo::{snr_grid, SweepSpec, DEFAULT_CHUNK_SIZE};
use crate::schemes::{PowerAllocation, RateTargets, Scheme};
use crate::SystemParams;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_SNR: &str = "0:40:2";
pub const DEFAULT_PREFIX: &str = "noma_lab";

/// Figure reproduction presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Outage probabilities of HDU-CNOMA and CNOMA.
    Fig3,
    /// Outage throughput of all three schemes.
    Fig4,
}

impl Preset {
    pub fn schemes(self) -> Vec<Scheme> {
        match self {
            Preset::Fig3 => vec![Scheme::HduCnoma, Scheme::ConventionalCnoma],
            Preset::Fig4 => Scheme::ALL.to_vec(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            other => Err(Error::param(
                "sweep.preset",
                format!("unknown preset `{other}` (expected fig3 or fig4)"),
            )),
        }
    }
}

/// Parses `lo:hi:step` (dB) into an inclusive grid.
pub fn parse_snr_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::param("sweep.snr_db", format!("expected lo:hi:step, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    snr_grid(nums[0], nums[1], nums[2]).map_err(|e| Error::param("sweep.snr_db", e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub chunk_size: u64,
    pub quadrature: QuadratureConfig,
    pub output_prefix: PathBuf,
    pub preset: Option<Preset>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SystemParams::default(),
            snr_grid_db: parse_snr_range(DEFAULT_SNR).expect("default grid is valid"),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            schemes: Scheme::ALL.to_vec(),
            chunk_size: DEFAULT_CHUNK_SIZE,
            quadrature: QuadratureConfig::default(),
            output_prefix: PathBuf::from(DEFAULT_PREFIX),
            preset: None,
        }
    }
}

impl RunConfig {
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        SweepSpec::new(
            self.snr_grid_db.clone(),
            self.trials,
            self.seed,
            self.schemes.clone(),
        )?
        .with_chunk_size(self.chunk_size)
    }

    /// Applies command-line overrides on top of the file values.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(p) = o.preset {
            self.set_preset(p);
        }
        if let Some(t) = o.trials {
            if t == 0 {
                return Err(Error::param("trials", "need at least one trial per point"));
            }
            self.trials = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.output_prefix = out.clone();
        }
        if let Some(snr) = &o.snr {
            self.snr_grid_db = parse_snr_range(snr)?;
        }
        Ok(())
    }

    fn set_preset(&mut self, preset: Preset) {
        self.preset = Some(preset);
        self.schemes = preset.schemes();
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub snr: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    quadrature: QuadratureSection,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    beta_bs_ue1: Option<f64>,
    beta_bs_ue2: Option<f64>,
    beta_ue1_ue2: Option<f64>,
    alpha_ue1_t1: Option<f64>,
    alpha_ue2_t1: Option<f64>,
    alpha_bs_t2: Option<f64>,
    alpha_ue2_t2: Option<f64>,
    rate_ue1_dl: Option<f64>,
    rate_ue2_dl: Option<f64>,
    rate_ue1_ul: Option<f64>,
    rate_ue2_ul: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    snr_db: Option<String>,
    trials: Option<u64>,
    seed: Option<u64>,
    schemes: Option<Vec<String>>,
    chunk_size: Option<u64>,
    preset: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadratureSection {
    n_terms: Option<usize>,
    oracle_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    prefix: Option<PathBuf>,
}

fn in_section(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParam { key, reason } if !key.contains('.') => Error::InvalidParam {
            key: format!("{section}.{key}"),
            reason,
        },
        other => other,
    }
}

/// Parses and validates a JSON config. An empty (or whitespace-only)
/// document yields the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: Document = if text.trim().is_empty() {
        Document::default()
    } else {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
    };
    let mut cfg = RunConfig::default();
    let d = SystemParams::default();

    let sys = &doc.system;
    let stats = ChannelStats::new(
        sys.beta_bs_ue1.unwrap_or(d.stats.beta_bs_ue1()),
        sys.beta_bs_ue2.unwrap_or(d.stats.beta_bs_ue2()),
        sys.beta_ue1_ue2.unwrap_or(d.stats.beta_ue1_ue2()),
    )
    .map_err(|e| in_section("system", e))?;
    let power = PowerAllocation::new(
        sys.alpha_ue1_t1.unwrap_or(d.power.a_ue1_t1()),
        sys.alpha_ue2_t1.unwrap_or(d.power.a_ue2_t1()),
        sys.alpha_bs_t2.unwrap_or(d.power.a_bs_t2()),
        sys.alpha_ue2_t2.unwrap_or(d.power.a_ue2_t2()),
    )
    .map_err(|e| in_section("system", e))?;
    let rates = RateTargets::new(
        sys.rate_ue1_dl.unwrap_or(d.rates.r_ue1_dl),
        sys.rate_ue2_dl.unwrap_or(d.rates.r_ue2_dl),
        sys.rate_ue1_ul.unwrap_or(d.rates.r_ue1_ul),
        sys.rate_ue2_ul.unwrap_or(d.rates.r_ue2_ul),
    )
    .map_err(|e| in_section("system", e))?;
    cfg.params = SystemParams {
        stats,
        power,
        rates,
    };

    let sw = &doc.sweep;
    if let Some(snr) = &sw.snr_db {
        cfg.snr_grid_db = parse_snr_range(snr)?;
    }
    if let Some(t) = sw.trials {
        if t == 0 {
            return Err(Error::param(
                "sweep.trials",
                "need at least one trial per point",
            ));
        }
        cfg.trials = t;
    }
    if let Some(s) = sw.seed {
        cfg.seed = s;
    }
    if let Some(c) = sw.chunk_size {
        if c == 0 {
            return Err(Error::param("sweep.chunk_size", "must be positive"));
        }
        cfg.chunk_size = c;
    }
    if let Some(names) = &sw.schemes {
        cfg.schemes = names
            .iter()
            .map(|n| {
                Scheme::from_name(n)
                    .ok_or_else(|| Error::param("sweep.schemes", format!("unknown scheme `{n}`")))
            })
            .collect::<Result<_>>()?;
    }
    if let Some(p) = &sw.preset {
        cfg.set_preset(p.parse()?);
    }

    let q = &doc.quadrature;
    cfg.quadrature = QuadratureConfig::new(
        q.n_terms.unwrap_or(cfg.quadrature.n_terms()),
        q.oracle_tol.unwrap_or(cfg.quadrature.oracle_tol()),
    )
    .map_err(|e| in_section("quadrature", e))?;

    if let Some(prefix) = &doc.output.prefix {
        cfg.output_prefix = prefix.clone();
    }

    cfg.sweep_spec().map_err(|e| in_section("sweep", e))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(e: Error) -> String {
        match e {
            Error::InvalidParam { key, .. } => key,
            other => panic!("expected InvalidParam, got {other:?}"),
        }
    }

    #[test]
    fn empty_document_gives_defaults() {
        for text in ["", "  \n", "{}"] {
            let cfg = parse_config(text).unwrap();
            assert_eq!(cfg, RunConfig::default());
            assert_eq!(cfg.params.stats, ChannelStats::new(1.0, 0.05, 0.8).unwrap());
            assert_eq!(
                cfg.params.power,
                PowerAllocation::new(0.05, 0.95, 0.1, 0.9).unwrap()
            );
            assert_eq!(cfg.params.rates, RateTargets::uniform(1.0).unwrap());
            assert_eq!(cfg.quadrature.n_terms(), 100);
            assert_eq!(cfg.snr_grid_db.len(), 21);
        }
    }

    #[test]
    fn rejects_overallocated_strong_user() {
        let e =
            parse_config(r#"{"system": {"alpha_ue1_t1": 0.6, "alpha_ue2_t1": 0.4}}"#).unwrap_err();
        assert_eq!(key_of(e), "system.alpha_ue1_t1");
    }

    #[test]
    fn rejects_reversed_user_ordering() {
        let e = parse_config(r#"{"system": {"beta_bs_ue2": 2, "beta_bs_ue1": 1}}"#).unwrap_err();
        assert_eq!(key_of(e), "system.beta_bs_ue2");
    }

    #[test]
    fn rejects_bad_sums_and_unknown_keys() {
        let e = parse_config(r#"{"system": {"alpha_bs_t2": 0.2}}"#).unwrap_err();
        assert_eq!(key_of(e), "system.alpha_ue2_t2");
        let e = parse_config(r#"{"system": {"alpha_bs": 0.2}}"#).unwrap_err();
        assert!(e.to_string().contains("alpha_bs"), "{e}");
        let e = parse_config(r#"{"plots": {}}"#).unwrap_err();
        assert!(e.to_string().contains("plots"), "{e}");
        assert!(matches!(parse_config("{"), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_and_quadrature_keys() {
        let cfg = parse_config(
            r#"{"sweep": {"snr_db": "10:20:5", "trials": 7, "seed": 9, "schemes": ["cnoma"]},
                "quadrature": {"n_terms": 64}, "output": {"prefix": "x/y"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.snr_grid_db, vec![10.0, 15.0, 20.0]);
        assert_eq!((cfg.trials, cfg.seed), (7, 9));
        assert_eq!(cfg.schemes, vec![Scheme::ConventionalCnoma]);
        assert_eq!(cfg.quadrature.n_terms(), 64);
        assert_eq!(cfg.output_prefix, PathBuf::from("x/y"));

        assert_eq!(
            key_of(parse_config(r#"{"sweep": {"trials": 0}}"#).unwrap_err()),
            "sweep.trials"
        );
        assert_eq!(
            key_of(parse_config(r#"{"sweep": {"snr_db": "1:2"}}"#).unwrap_err()),
            "sweep.snr_db"
        );
        assert_eq!(
            key_of(parse_config(r#"{"sweep": {"schemes": ["oma"]}}"#).unwrap_err()),
            "sweep.schemes"
        );
        assert_eq!(
            key_of(parse_config(r#"{"sweep": {"preset": "fig5"}}"#).unwrap_err()),
            "sweep.preset"
        );
        assert_eq!(
            key_of(parse_config(r#"{"quadrature": {"n_terms": 0}}"#).unwrap_err()),
            "quadrature.n_terms"
        );
    }

    #[test]
    fn presets_pick_schemes_and_flags_override() {
        let mut cfg = parse_config(r#"{"sweep": {"preset": "fig3", "trials": 5}}"#).unwrap();
        assert_eq!(
            cfg.schemes,
            vec![Scheme::HduCnoma, Scheme::ConventionalCnoma]
        );
        cfg.apply(&Overrides {
            preset: Some(Preset::Fig4),
            trials: Some(11),
            seed: Some(3),
            out: Some(PathBuf::from("o")),
            snr: Some("0:4:2".into()),
        })
        .unwrap();
        assert_eq!(cfg.preset, Some(Preset::Fig4));
        assert_eq!(cfg.schemes.len(), 3);
        assert_eq!((cfg.trials, cfg.seed), (11, 3));
        assert_eq!(cfg.snr_grid_db, vec![0.0, 2.0, 4.0]);
        assert!(cfg
            .apply(&Overrides {
                snr: Some("a:b:c".into()),
                ..Default::default()
            })
            .is_err());
    }
}
