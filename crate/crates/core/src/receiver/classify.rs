use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::correlation::cross_correlate;
use crate::error::{domain, Error, Result};
use crate::jammer::JammerModel;
use crate::waveform::{ModFamily, PilotInversions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityMetrics {
    pub sc_max: f64,
    pub cc_max: f64,
    pub sim: f64,
}

/// Peak cross-correlation of the jam estimate against the legitimate
/// estimate, relative to the legitimate self-correlation peak. Both peaks
/// are normalised by `f_max` and searched over `|τ| < f_max/2`.
///
/// The ratio is not energy-normalised: scaling `jam_est` by a real `c`
/// scales `sim` by `c`. Callers equalise the jam stream first.
pub fn similarity_ratio(jam_est: &[Complex64], legit_est: &[Complex64], f_max: usize) -> Result<SimilarityMetrics> {
    if f_max == 0 {
        return domain("f_max must be positive");
    }
    if legit_est.len() < f_max || jam_est.len() < f_max {
        return domain(format!("sequences must hold at least f_max = {f_max} samples"));
    }
    if legit_est[..f_max].iter().all(|v| v.norm_sqr() == 0.0) {
        return Err(Error::UndefinedRatio("legitimate estimate has zero energy".into()));
    }
    let gamma = f_max / 2;
    let peak = |a: &[Complex64], b: &[Complex64]| -> Result<f64> {
        let r = cross_correlate(a, b, f_max, gamma)?;
        Ok(r.values.iter().map(|v| v.norm()).fold(0.0, f64::max))
    };
    let sc_max = peak(legit_est, legit_est)? / f_max as f64;
    let cc_max = peak(jam_est, legit_est)? / f_max as f64;
    Ok(SimilarityMetrics { sc_max, cc_max, sim: cc_max / sc_max })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierThresholds {
    pub sim_threshold: f64,
    pub inversion_threshold: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        // An equalised AS replica still correlates at E[V]/√E[V²] ≈ 0.87,
        // so the DRFM cut sits above that.
        Self { sim_threshold: 0.93, inversion_threshold: 0.25 }
    }
}

impl ClassifierThresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sim_threshold", self.sim_threshold), ("inversion_threshold", self.inversion_threshold)] {
            if !(v > 0.0 && v < 1.0) {
                return domain(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JammerClass {
    Drfm,
    Ps,
    As,
    Unknown,
}

impl JammerClass {
    pub fn model(self) -> Option<JammerModel> {
        match self {
            JammerClass::Drfm => Some(JammerModel::Drfm),
            JammerClass::Ps => Some(JammerModel::Ps),
            JammerClass::As => Some(JammerModel::As),
            JammerClass::Unknown => None,
        }
    }
}

/// Threshold rule: high similarity means DRFM; otherwise enough pilot
/// inversions name PS under a phase-bearing scheme and AS under an
/// amplitude-bearing one.
pub fn classify_jammer(
    metrics: &SimilarityMetrics,
    inversions: f64,
    family: ModFamily,
    thresholds: &ClassifierThresholds,
) -> JammerClass {
    if metrics.sim >= thresholds.sim_threshold {
        JammerClass::Drfm
    } else if inversions >= thresholds.inversion_threshold {
        // QAM carries both, so the inversion test cannot tell them apart
        match family {
            ModFamily::Psk => JammerClass::Ps,
            ModFamily::Ask => JammerClass::As,
            ModFamily::Qam => JammerClass::Unknown,
        }
    } else {
        JammerClass::Unknown
    }
}

/// Runs the pilot test on both bit types: sign flips are read as a
/// phase-bearing inversion, magnitude flips as an amplitude-bearing one.
pub fn classify_with_pilot(
    metrics: &SimilarityMetrics,
    inversions: &PilotInversions,
    thresholds: &ClassifierThresholds,
) -> JammerClass {
    match classify_jammer(metrics, inversions.phase, ModFamily::Psk, thresholds) {
        JammerClass::Unknown => classify_jammer(metrics, inversions.amplitude, ModFamily::Ask, thresholds),
        c => c,
    }
}

/// Least-squares gain of `rx ≈ h·pilot`.
pub fn ls_gain(rx: &[Complex64], pilot: &[Complex64]) -> Complex64 {
    let num: Complex64 = rx.iter().zip(pilot).map(|(r, p)| r * p.conj()).sum();
    let den: f64 = pilot.iter().zip(rx).map(|(p, _)| p.norm_sqr()).sum();
    if den == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        num / den
    }
}

/// Jammer-channel estimate from the replayed pilot.
///
/// A per-symbol random sign or scale on the replica breaks the plain
/// least-squares estimate, so both phase and magnitude come from the
/// squared products `(r·p*)²`, which are blind to sign flips and carry no
/// noise bias. The magnitude is then `|g|·√E[s²]` for a per-symbol scale
/// `s`. The plain estimate only resolves the leftover π ambiguity.
pub fn estimate_jam_gain(rx: &[Complex64], pilot: &[Complex64]) -> Complex64 {
    let n = rx.len().min(pilot.len());
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let sq: Complex64 = rx.iter().zip(pilot).map(|(r, p)| (r * p.conj()).powi(2)).sum();
    let p4: f64 = pilot[..n].iter().map(|p| p.norm_sqr().powi(2)).sum();
    if p4 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mut phase = sq.arg() / 2.0;
    let plain = ls_gain(&rx[..n], &pilot[..n]);
    if (plain * Complex64::from_polar(1.0, -phase)).re < 0.0 {
        phase += std::f64::consts::PI;
    }
    Complex64::from_polar((sq.norm() / p4).sqrt(), phase)
}

/// Divides a stream by a channel gain; a zero gain gives zeros.
pub fn equalize(stream: &[Complex64], gain: Complex64) -> Vec<Complex64> {
    if gain.norm_sqr() == 0.0 {
        return vec![Complex64::new(0.0, 0.0); stream.len()];
    }
    stream.iter().map(|v| v / gain).collect()
}
