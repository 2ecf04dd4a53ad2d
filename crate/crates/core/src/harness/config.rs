//! Experiment configuration, read from TOML. Every field has a default, so
//! an empty file describes the reference setup.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::allocation::Strategy;
use crate::filters::{FilterKind, FilterSpec};
use crate::{Error, LatticeParams, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeConfig,
    pub filter: FilterConfig,
    pub channel: ChannelConfig,
    pub link: LinkConfig,
    pub pilot: PilotSettings,
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    /// Bandwidth `B` in Hz.
    pub bandwidth: f64,
    /// Frame duration `T` in seconds.
    pub duration: f64,
    /// Doppler period `nu_p` in Hz.
    pub doppler_period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub kind: FilterKind,
    pub beta_tau: f64,
    pub beta_nu: f64,
    /// Truncation half-spans in lattice units; the filter default if unset.
    pub span_tau: Option<usize>,
    pub span_nu: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub profile: Profile,
    /// Maximum Doppler shifts in Hz.
    pub nu_max: Vec<f64>,
    /// Oversampling factor of the time-domain simulation and of the
    /// effective-channel integral.
    pub oversampling: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    VehA,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub modem: Modem,
    /// `E_T / N0` values in dB.
    pub snr_db: Vec<f64>,
    /// Coding and allocation pairs such as `ldpc-strip` or `uncoded-rpe`.
    pub schemes: Vec<Scheme>,
    pub max_iters: usize,
    /// Seed of the LDPC shift search.
    pub code_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modem {
    Zak,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PilotSettings {
    /// Estimate from a noise-free pilot frame.
    pub noiseless: bool,
    /// Zero estimated taps below three noise standard deviations.
    pub threshold: bool,
    /// Read-off half-widths; the largest centred region if unset.
    pub r_k: Option<usize>,
    pub r_l: Option<usize>,
    /// Realizations averaged into each RPE map.
    pub rpe_realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Upper limit on frames per point.
    pub trials: usize,
    /// A point also stops once it has this many information-bit errors
    /// and at least `min_frames` frames.
    pub target_errors: u64,
    pub min_frames: usize,
    /// Data frames sent through each channel realization.
    pub frames_per_channel: usize,
    /// Channel realizations simulated between stopping checks.
    pub batch_channels: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeConfig::default(),
            filter: FilterConfig::default(),
            channel: ChannelConfig::default(),
            link: LinkConfig::default(),
            pilot: PilotSettings::default(),
            run: RunConfig::default(),
        }
    }
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            bandwidth: 0.96e6,
            duration: 1.6e-3,
            doppler_period: 30e3,
        }
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            kind: FilterKind::Sinc,
            beta_tau: 0.0,
            beta_nu: 0.0,
            span_tau: None,
            span_nu: None,
        }
    }
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            profile: Profile::VehA,
            nu_max: vec![500.0, 4500.0, 12000.0],
            oversampling: 8,
        }
    }
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            modem: Modem::Zak,
            snr_db: vec![13.0],
            schemes: vec![
                Scheme::new(Coding::Ldpc, Strategy::Strip),
                Scheme::new(Coding::Ldpc, Strategy::Rpe),
                Scheme::new(Coding::Ldpc, Strategy::Standard),
                Scheme::new(Coding::Uncoded, Strategy::Rpe),
            ],
            max_iters: crate::ldpc::DEFAULT_MAX_ITERS,
            code_seed: 1,
        }
    }
}

impl Default for PilotSettings {
    fn default() -> Self {
        Self {
            noiseless: false,
            threshold: true,
            r_k: None,
            r_l: None,
            rpe_realizations: 100,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 1000,
            target_errors: 100,
            min_frames: 0,
            frames_per_channel: 4,
            batch_channels: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coding {
    Uncoded,
    Ldpc,
}

/// One coding and allocation pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Scheme {
    pub coding: Coding,
    pub allocation: Strategy,
}

impl Scheme {
    pub fn new(coding: Coding, allocation: Strategy) -> Self {
        Self { coding, allocation }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coding = match self.coding {
            Coding::Uncoded => "uncoded",
            Coding::Ldpc => "ldpc",
        };
        let alloc = match self.allocation {
            Strategy::Standard => "standard",
            Strategy::Strip => "strip",
            Strategy::Rpe => "rpe",
        };
        write!(f, "{coding}-{alloc}")
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (c, a) = s
            .split_once('-')
            .ok_or_else(|| Error::Config(format!("scheme `{s}` is not of the form coding-allocation")))?;
        let coding = match c {
            "uncoded" => Coding::Uncoded,
            "ldpc" => Coding::Ldpc,
            _ => return Err(Error::Config(format!("unknown coding `{c}`"))),
        };
        let allocation = match a {
            "standard" => Strategy::Standard,
            "strip" => Strategy::Strip,
            "rpe" => Strategy::Rpe,
            _ => return Err(Error::Config(format!("unknown allocation `{a}`"))),
        };
        Ok(Self { coding, allocation })
    }
}

impl TryFrom<String> for Scheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> Self {
        s.to_string()
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Canonical TOML rendering; the config hash is taken over this text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn lattice_params(&self) -> Result<LatticeParams> {
        LatticeParams::new(self.lattice.bandwidth, self.lattice.duration, self.lattice.doppler_period)
    }

    pub fn filter_spec(&self) -> Result<FilterSpec> {
        let f = &self.filter;
        let base = match f.kind {
            FilterKind::Sinc => FilterSpec::sinc(),
            FilterKind::Rrc => FilterSpec::rrc(f.beta_tau, f.beta_nu),
        };
        let spec = base.with_spans(f.span_tau.unwrap_or(base.span_tau), f.span_nu.unwrap_or(base.span_nu));
        spec.validate()?;
        Ok(spec)
    }

    pub fn n0(snr_db: f64) -> f64 {
        10f64.powf(-snr_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        let params = self.lattice_params().map_err(|e| Error::Config(e.to_string()))?;
        self.filter_spec().map_err(|e| Error::Config(e.to_string()))?;
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.channel.nu_max.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("nu_max values must be finite and non-negative");
        }
        if self.channel.oversampling == 0 {
            return bad("oversampling must be at least 1");
        }
        if self.link.snr_db.iter().any(|v| !v.is_finite()) {
            return bad("snr_db values must be finite");
        }
        if self.link.schemes.is_empty() {
            return bad("at least one scheme is required");
        }
        if self.link.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if self.run.trials == 0 || self.run.frames_per_channel == 0 || self.run.batch_channels == 0 {
            return bad("trials, frames_per_channel and batch_channels must be at least 1");
        }
        if self.pilot.rpe_realizations == 0 {
            return bad("rpe_realizations must be at least 1");
        }
        let (m, n) = (params.m(), params.n());
        if self.pilot.r_k.is_some_and(|r| 2 * r + 1 > m) || self.pilot.r_l.is_some_and(|r| 2 * r + 1 > n) {
            return bad("pilot read-off region exceeds the grid");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_setup() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let p = cfg.lattice_params().unwrap();
        assert_eq!((p.m(), p.n()), (32, 48));
        assert_eq!(cfg.link.snr_db, vec![13.0]);
        assert_eq!(cfg.filter_spec().unwrap(), FilterSpec::sinc());
    }

    #[test]
    fn round_trip_and_hash() {
        let text = r#"
            [channel]
            nu_max = [1000.0, 2000.0]
            [link]
            schemes = ["ldpc-strip", "uncoded-standard"]
            modem = "mc"
            [filter]
            kind = "rrc"
            beta_tau = 0.1
            beta_nu = 0.1
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.link.modem, Modem::Mc);
        assert_eq!(cfg.link.schemes[1], Scheme::new(Coding::Uncoded, Strategy::Standard));
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.sha256(), cfg.sha256());
        assert_ne!(cfg.sha256(), ExperimentConfig::default().sha256());
        assert_eq!(cfg.sha256().len(), 64);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            "[lattice]\nbandwidth = 1.0e6",
            "[link]\nschemes = [\"turbo-strip\"]",
            "[link]\nschemes = []",
            "[run]\ntrials = 0",
            "[channel]\nnu_max = [-5.0]",
            "[pilot]\nr_k = 40",
            "[run]\nunknown = 3",
            "[filter]\nkind = \"rrc\"\nbeta_tau = 2.0",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn scheme_names() {
        for s in ["ldpc-strip", "ldpc-rpe", "ldpc-standard", "uncoded-rpe"] {
            assert_eq!(s.parse::<Scheme>().unwrap().to_string(), s);
        }
        assert!("ldpc".parse::<Scheme>().is_err());
    }
}
