use serde::{Deserialize, Serialize};

use crate::adaptation::{CodeMode, DEFAULT_DELTA};
use crate::channel::{RicianParams, RisLinkConfig};
use crate::error::{Error, Result};
use crate::jammer::{JammerModel, PathTopology};
use crate::receiver::ClassifierThresholds;
use crate::waveform::{default_code_table, ModFamily, RsCode, ORDERS, PILOT_LEN};

/// Upper end of the jammer power envelope.
pub const JAMMER_MAX_DBM: f64 = 40.0;
pub const JAMMER_MIN_DBM: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orthogonality {
    /// Beamformed separation on a receive array.
    Spatial,
    /// Burst shortened to the estimated delay.
    Temporal,
    /// No spatial separation: the half-frame overlap forces a 50 % burst.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeModeKind {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub topology: PathTopology,
    pub jammer_models: Vec<JammerModel>,
    pub ris_sizes: Vec<usize>,
    pub jsr_grid_db: Vec<f64>,
    pub baseline_snr_db: f64,
    /// RIS size at which the baseline SNR holds; defaults to the smallest
    /// entry of `ris_sizes`.
    pub reference_ris_size: Option<usize>,
    pub orthogonality: Orthogonality,
    pub trials: usize,
    pub seed: u64,
    pub bandwidth_hz: f64,
    pub source_power_dbm: f64,
    pub frame_len: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            topology: PathTopology::SourceAware,
            jammer_models: JammerModel::ALL.to_vec(),
            ris_sizes: vec![16],
            jsr_grid_db: (-20..=20).map(f64::from).collect(),
            baseline_snr_db: 7.0,
            reference_ris_size: None,
            orthogonality: Orthogonality::Spatial,
            trials: 200,
            seed: 1,
            bandwidth_hz: 1.0,
            source_power_dbm: 20.0,
            frame_len: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub d_sr: f64,
    pub d_rd: f64,
    pub d_rj: f64,
    pub rj_alignment: f64,
    pub path_loss_exp: f64,
    pub corr_rate: f64,
    pub carrier_hz: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let c = RisLinkConfig::default();
        Self {
            d_sr: c.d_sr,
            d_rd: c.d_rd,
            d_rj: c.d_rj,
            rj_alignment: c.rj_alignment,
            path_loss_exp: c.path_loss_exp,
            corr_rate: c.corr_rate,
            carrier_hz: c.carrier_hz,
        }
    }
}

impl ChannelSection {
    pub fn link(&self, element_count: usize) -> RisLinkConfig {
        RisLinkConfig {
            element_count,
            d_sr: self.d_sr,
            d_rd: self.d_rd,
            d_rj: self.d_rj,
            rj_alignment: self.rj_alignment,
            path_loss_exp: self.path_loss_exp,
            corr_rate: self.corr_rate,
            carrier_hz: self.carrier_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JammerSection {
    /// Replay delay; defaults to half a frame.
    pub delay_samples: Option<usize>,
    pub amp_gain: f64,
    pub cycle_period: Option<usize>,
    pub rician_k: f64,
    pub avg_amp: f64,
    pub path_count: usize,
    /// Eavesdropping gain of Jammer 1 over the reference legitimate gain.
    pub src_eaves_gain_db: f64,
    /// Jammer-to-receiver gain over the reference legitimate gain.
    pub jam_link_gain_db: f64,
}

impl Default for JammerSection {
    fn default() -> Self {
        let r = RicianParams::default();
        Self {
            delay_samples: None,
            amp_gain: 1.0,
            cycle_period: None,
            rician_k: r.rician_k,
            avg_amp: r.avg_amp,
            path_count: r.path_count,
            src_eaves_gain_db: 15.0,
            jam_link_gain_db: -4.0,
        }
    }
}

impl JammerSection {
    pub fn rician(&self) -> RicianParams {
        RicianParams { rician_k: self.rician_k, avg_amp: self.avg_amp, path_count: self.path_count }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverSection {
    pub antenna_count: usize,
    pub legit_aoa_deg: f64,
    pub jammer_aoa_deg: f64,
    pub sim_threshold: f64,
    pub inversion_threshold: f64,
    /// Smallest replica-to-direct correlation peak ratio taken as an echo.
    pub peak_ratio_threshold: f64,
    /// Smallest relative energy step taken as a jammer onset.
    pub onset_threshold: f64,
    /// Correlation search bound; defaults to half a frame.
    pub gamma_max: Option<usize>,
}

impl Default for ReceiverSection {
    fn default() -> Self {
        let t = ClassifierThresholds::default();
        Self {
            antenna_count: 8,
            legit_aoa_deg: 0.0,
            jammer_aoa_deg: 20.0,
            sim_threshold: t.sim_threshold,
            inversion_threshold: t.inversion_threshold,
            peak_ratio_threshold: 0.1,
            onset_threshold: 0.1,
            gamma_max: None,
        }
    }
}

impl ReceiverSection {
    pub fn thresholds(&self) -> ClassifierThresholds {
        ClassifierThresholds { sim_threshold: self.sim_threshold, inversion_threshold: self.inversion_threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptationSection {
    pub code_mode: CodeModeKind,
    /// Rate of the fixed code; the table entry closest to it is used.
    pub fixed_rate: f64,
    pub delta: f64,
    pub max_order: u32,
    pub modulation_family: ModFamily,
    /// `(n, k)` pairs; empty means the built-in table.
    pub code_table: Vec<(usize, usize)>,
}

impl Default for AdaptationSection {
    fn default() -> Self {
        Self {
            code_mode: CodeModeKind::Adaptive,
            fixed_rate: 0.94,
            delta: DEFAULT_DELTA,
            max_order: 64,
            modulation_family: ModFamily::Psk,
            code_table: Vec::new(),
        }
    }
}

impl AdaptationSection {
    pub fn table(&self) -> Result<Vec<RsCode>> {
        let mut t = if self.code_table.is_empty() {
            default_code_table()
        } else {
            self.code_table.iter().map(|&(n, k)| RsCode::new(n, k)).collect::<Result<Vec<_>>>()?
        };
        t.sort_by(|a, b| b.rate().total_cmp(&a.rate()));
        Ok(t)
    }

    pub fn mode(&self) -> Result<CodeMode> {
        let table = self.table()?;
        Ok(match self.code_mode {
            CodeModeKind::Adaptive => CodeMode::Adaptive(table),
            CodeModeKind::Fixed => {
                let code = table
                    .iter()
                    .min_by(|a, b| (a.rate() - self.fixed_rate).abs().total_cmp(&(b.rate() - self.fixed_rate).abs()))
                    .copied()
                    .ok_or_else(|| Error::Config("code table is empty".into()))?;
                CodeMode::Fixed(code)
            }
        })
    }
}

/// Full sweep description, read from TOML with one section per module.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub channel: ChannelSection,
    pub jammer: JammerSection,
    pub receiver: ReceiverSection,
    pub adaptation: AdaptationSection,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn delay_samples(&self) -> usize {
        self.jammer.delay_samples.unwrap_or(self.experiment.frame_len / 2)
    }

    pub fn gamma_max(&self) -> usize {
        self.receiver.gamma_max.unwrap_or(self.experiment.frame_len / 2)
    }

    pub fn reference_ris_size(&self) -> usize {
        self.experiment
            .reference_ris_size
            .or_else(|| self.experiment.ris_sizes.iter().min().copied())
            .unwrap_or(1)
    }

    /// Jammer transmit power for a JSR point, clamped to the envelope top.
    pub fn jammer_power_dbm(&self, jsr_db: f64) -> f64 {
        (self.experiment.source_power_dbm + jsr_db).min(JAMMER_MAX_DBM)
    }

    /// Checks every field; also logs a warning for JSR points whose jammer
    /// power leaves the 0–40 dBm envelope.
    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.trials == 0 {
            return Err(cfg_err("trials must be at least 1"));
        }
        if e.jammer_models.is_empty() || e.ris_sizes.is_empty() || e.jsr_grid_db.is_empty() {
            return Err(cfg_err("jammer_models, ris_sizes and jsr_grid_db must be non-empty"));
        }
        if e.ris_sizes.contains(&0) {
            return Err(cfg_err("ris_sizes entries must be positive"));
        }
        if e.reference_ris_size == Some(0) {
            return Err(cfg_err("reference_ris_size must be positive"));
        }
        if e.jsr_grid_db.iter().any(|v| !v.is_finite()) || !e.baseline_snr_db.is_finite() {
            return Err(cfg_err("JSR grid and baseline SNR must be finite"));
        }
        if !(e.bandwidth_hz > 0.0) {
            return Err(cfg_err("bandwidth_hz must be positive"));
        }
        if !e.source_power_dbm.is_finite() {
            return Err(cfg_err("source_power_dbm must be finite"));
        }
        if e.frame_len <= 2 * PILOT_LEN {
            return Err(cfg_err(format!("frame_len must exceed {}", 2 * PILOT_LEN)));
        }
        self.channel.link(self.reference_ris_size()).validate().map_err(|x| cfg_err(x.to_string()))?;
        self.jammer.rician().validate().map_err(|x| cfg_err(x.to_string()))?;
        if !(self.jammer.amp_gain > 0.0) {
            return Err(cfg_err("amp_gain must be positive"));
        }
        if self.jammer.cycle_period == Some(0) {
            return Err(cfg_err("cycle_period must be positive"));
        }
        if self.delay_samples() == 0 {
            return Err(cfg_err("delay_samples must be positive"));
        }
        if !self.jammer.src_eaves_gain_db.is_finite() {
            return Err(cfg_err("src_eaves_gain_db must be finite"));
        }
        if !self.jammer.jam_link_gain_db.is_finite() {
            return Err(cfg_err("jam_link_gain_db must be finite"));
        }
        let r = &self.receiver;
        if r.antenna_count < 3 {
            return Err(cfg_err("antenna_count must be at least 3 to resolve two sources"));
        }
        for a in [r.legit_aoa_deg, r.jammer_aoa_deg] {
            if !(-90.0..=90.0).contains(&a) {
                return Err(cfg_err("angles of arrival must lie in [-90, 90] degrees"));
            }
        }
        r.thresholds().validate().map_err(|x| cfg_err(x.to_string()))?;
        if !(r.peak_ratio_threshold > 0.0) || !(r.onset_threshold > 0.0) {
            return Err(cfg_err("peak_ratio_threshold and onset_threshold must be positive"));
        }
        if self.gamma_max() == 0 || self.gamma_max() >= e.frame_len {
            return Err(cfg_err("gamma_max must lie in [1, frame_len)"));
        }
        let a = &self.adaptation;
        if !(a.delta < 0.0) {
            return Err(cfg_err("delta must be negative"));
        }
        if !ORDERS.contains(&a.max_order) {
            return Err(cfg_err(format!("max_order must be one of {ORDERS:?}")));
        }
        if !(a.fixed_rate > 0.0 && a.fixed_rate < 1.0) {
            return Err(cfg_err("fixed_rate must lie in (0, 1)"));
        }
        a.mode().map_err(|x| cfg_err(x.to_string()))?;

        for &jsr in &e.jsr_grid_db {
            let p = e.source_power_dbm + jsr;
            if p > JAMMER_MAX_DBM {
                log::warn!("JSR {jsr} dB needs {p:.1} dBm of jammer power; clamped to {JAMMER_MAX_DBM} dBm");
            } else if p < JAMMER_MIN_DBM {
                log::warn!("JSR {jsr} dB puts the jammer at {p:.1} dBm, below the {JAMMER_MIN_DBM} dBm envelope");
            }
        }
        Ok(())
    }
}
