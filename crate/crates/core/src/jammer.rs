//! Reactive jammer transforms and received-signal composition.
//!
//! Three jammer classes are modelled. Each scales the intercepted waveform
//! by a factor `A`:
//!
//! | class | factor `A`                         |
//! |-------|------------------------------------|
//! | DRFM  | constant gain `β_a`                |
//! | PS    | `U(t) ∈ {+1, −1}`, equiprobable    |
//! | AS    | `V(t)` uniform on `[0, 2]`         |
//!
//! `U` and `V` are drawn once per modulation symbol. Delays are integer
//! sample counts.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{cascaded_coefficient, unit_rayleigh, ChannelRealization, CorrelationMatrix, PhaseMatrix};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JammerModel {
    #[serde(rename = "DRFM", alias = "drfm")]
    Drfm,
    #[serde(rename = "PS", alias = "ps")]
    Ps,
    #[serde(rename = "AS", alias = "as")]
    As,
}

impl JammerModel {
    pub const ALL: [JammerModel; 3] = [JammerModel::Drfm, JammerModel::Ps, JammerModel::As];

    pub fn as_str(self) -> &'static str {
        match self {
            JammerModel::Drfm => "DRFM",
            JammerModel::Ps => "PS",
            JammerModel::As => "AS",
        }
    }
}

impl fmt::Display for JammerModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JammerModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DRFM" => Ok(JammerModel::Drfm),
            "PS" => Ok(JammerModel::Ps),
            "AS" => Ok(JammerModel::As),
            other => domain(format!("unknown jammer model {other:?}")),
        }
    }
}

/// Jammer parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct JammerSpec {
    pub model: JammerModel,
    /// DRFM amplification `β_a`.
    pub amp_gain: f64,
    pub delay_samples: usize,
    pub power_dbm: f64,
    /// When set the jammer is active for the first half of every period.
    pub cycle_period: Option<usize>,
}

impl JammerSpec {
    pub fn new(model: JammerModel, delay_samples: usize) -> Self {
        Self { model, amp_gain: 1.0, delay_samples, power_dbm: 20.0, cycle_period: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model == JammerModel::Drfm && !(self.amp_gain > 0.0) {
            return domain("DRFM amp_gain must be positive");
        }
        if self.cycle_period == Some(0) {
            return domain("cycle_period must be positive");
        }
        Ok(())
    }

    /// Mean square of the factor `A`: `β_a²`, 1, or `E[V²] = 4/3`.
    pub fn factor_power(&self) -> f64 {
        match self.model {
            JammerModel::Drfm => self.amp_gain * self.amp_gain,
            JammerModel::Ps => 1.0,
            JammerModel::As => 4.0 / 3.0,
        }
    }

    fn active_at(&self, n: usize) -> bool {
        match self.cycle_period {
            Some(p) => n % p < p.div_ceil(2),
            None => true,
        }
    }
}

/// Draws the per-symbol factor sequence `A(t)` for `len` symbols.
pub fn draw_factors<R: Rng + ?Sized>(spec: &JammerSpec, len: usize, rng: &mut R) -> Vec<f64> {
    match spec.model {
        JammerModel::Drfm => vec![spec.amp_gain; len],
        JammerModel::Ps => (0..len).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect(),
        JammerModel::As => (0..len).map(|_| 2.0 * rng.gen::<f64>()).collect(),
    }
}

/// Applies a given factor sequence, delay and duty cycle.
///
/// The output has `x.len() + delay_samples` samples with a zero head.
pub fn apply_factors(spec: &JammerSpec, x: &[Complex64], factors: &[f64]) -> Result<Vec<Complex64>> {
    if factors.len() != x.len() {
        return domain("factor sequence must match the input length");
    }
    let d = spec.delay_samples;
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() + d];
    for (i, (s, a)) in x.iter().zip(factors).enumerate() {
        let n = i + d;
        if spec.active_at(n) {
            out[n] = s * a;
        }
    }
    Ok(out)
}

pub fn jammer_transform<R: Rng + ?Sized>(spec: &JammerSpec, x: &[Complex64], rng: &mut R) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return domain("jammer input must be non-empty");
    }
    spec.validate()?;
    let factors = draw_factors(spec, x.len(), rng);
    apply_factors(spec, x, &factors)
}

/// Which node eavesdrops the legitimate waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathTopology {
    /// Jammer 1 listens to the source directly.
    #[serde(rename = "source_aware", alias = "SourceAware")]
    SourceAware,
    /// Jammer 2 listens to the RIS-reflected beam.
    #[serde(rename = "ris_aware", alias = "RisAware")]
    RisAware,
}

impl PathTopology {
    pub fn as_str(self) -> &'static str {
        match self {
            PathTopology::SourceAware => "source_aware",
            PathTopology::RisAware => "ris_aware",
        }
    }
}

impl fmt::Display for PathTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Circularly symmetric complex Gaussian noise of total variance `var`.
pub fn complex_noise<R: Rng + ?Sized>(var: f64, len: usize, rng: &mut R) -> Vec<Complex64> {
    let s = var.max(0.0).sqrt();
    (0..len).map(|_| unit_rayleigh(rng) * s).collect()
}

/// `y[n] = legit·x[n] + jam_coeff·j[n] + w[n]` over the longer of the two
/// waveforms; samples beyond either waveform count as zero.
pub fn superpose<R: Rng + ?Sized>(
    legit_coeff: Complex64,
    x: &[Complex64],
    jam_coeff: Complex64,
    jam: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let len = x.len().max(jam.len());
    let zero = Complex64::new(0.0, 0.0);
    let noise = if noise_var > 0.0 { complex_noise(noise_var, len, rng) } else { vec![zero; len] };
    (0..len)
        .map(|n| {
            let a = x.get(n).copied().unwrap_or(zero);
            let b = jam.get(n).copied().unwrap_or(zero);
            legit_coeff * a + jam_coeff * b + noise[n]
        })
        .collect()
}

/// Jammer 1 path: `y[n] = h_L·x[n] + A·h_E1·h_J1·x[n−τ] + w[n]`.
#[allow(clippy::too_many_arguments)]
pub fn received_source_aware<R: Rng + ?Sized>(
    legit_coeff: Complex64,
    h_e1: Complex64,
    h_j1: Complex64,
    spec: &JammerSpec,
    x: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let jam = jammer_transform(spec, x, rng)?;
    Ok(superpose(legit_coeff, x, h_e1 * h_j1, &jam, noise_var, rng))
}

/// Jammer 2 path: the jammer hears the RIS-reflected beam, so its
/// eavesdropping coefficient is the cascade through `h_RJ`.
#[allow(clippy::too_many_arguments)]
pub fn received_ris_aware<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    r: &CorrelationMatrix,
    phi: &PhaseMatrix,
    h_j2: Complex64,
    spec: &JammerSpec,
    x: &[Complex64],
    noise_var: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let legit = cascaded_coefficient(&realization.h_sr, &realization.h_rd, r, phi)?;
    let eaves = cascaded_coefficient(&realization.h_sr, &realization.h_rj, r, phi)?;
    let jam = jammer_transform(spec, x, rng)?;
    Ok(superpose(legit, x, eaves * h_j2, &jam, noise_var, rng))
}

/// Half-wavelength uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReceiveArray {
    pub antenna_count: usize,
}

impl ReceiveArray {
    pub fn new(antenna_count: usize) -> Result<Self> {
        if antenna_count == 0 {
            return domain("antenna_count must be at least 1");
        }
        Ok(Self { antenna_count })
    }

    /// Entry `i` is `e^{−jπ·i·sin(aoa)}`.
    pub fn steering(&self, aoa: f64) -> Vec<Complex64> {
        steering_vector(self.antenna_count, aoa)
    }
}

pub fn steering_vector(m: usize, aoa: f64) -> Vec<Complex64> {
    let k = -PI * aoa.sin();
    (0..m).map(|i| Complex64::from_polar(1.0, k * i as f64)).collect()
}

/// `Y = s_v·y + w`: one stream per antenna.
pub fn array_receive<R: Rng + ?Sized>(
    y: &[Complex64],
    array: &ReceiveArray,
    aoa: f64,
    noise_var: f64,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    array_receive_sources(&[(y, aoa)], array, noise_var, rng)
}

/// Several far-field sources impinging at their own angles, with one
/// independent noise draw per antenna.
pub fn array_receive_sources<R: Rng + ?Sized>(
    sources: &[(&[Complex64], f64)],
    array: &ReceiveArray,
    noise_var: f64,
    rng: &mut R,
) -> Vec<Vec<Complex64>> {
    let len = sources.iter().map(|(s, _)| s.len()).max().unwrap_or(0);
    let steer: Vec<Vec<Complex64>> = sources.iter().map(|(_, a)| array.steering(*a)).collect();
    (0..array.antenna_count)
        .map(|i| {
            let mut stream = if noise_var > 0.0 {
                complex_noise(noise_var, len, rng)
            } else {
                vec![Complex64::new(0.0, 0.0); len]
            };
            for ((sig, _), sv) in sources.iter().zip(&steer) {
                for (out, s) in stream.iter_mut().zip(sig.iter()) {
                    *out += sv[i] * s;
                }
            }
            stream
        })
        .collect()
}
