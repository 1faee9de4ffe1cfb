//! Link SNRs, modulation remapping, code selection and throughput metrics.

mod ber;

pub use ber::{ber_amplitude_faded, ber_awgn, q_function, ser_awgn};

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{domain, Result};
use crate::jammer::JammerModel;
use crate::receiver::JammerClass;
use crate::waveform::{ser_from_ber, ModFamily, ModScheme, RsCode, ORDERS};

pub const DEFAULT_DELTA: f64 = -0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSnrs {
    pub gamma_e: f64,
    pub gamma_j: f64,
    pub gamma_l: f64,
    pub p_t: f64,
    pub p_j: f64,
    /// `σ_E², σ_J², σ_L²`.
    pub noise_vars: [f64; 3],
}

impl LinkSnrs {
    pub fn validate(&self) -> Result<()> {
        let all = [self.gamma_e, self.gamma_j, self.gamma_l, self.p_t, self.p_j];
        if all.iter().any(|v| !(*v >= 0.0)) {
            return domain("SNRs and powers must be non-negative");
        }
        if self.noise_vars.iter().any(|v| !(*v > 0.0)) {
            return domain("noise variances must be positive");
        }
        Ok(())
    }
}

/// End-to-end SNR of the replay path `source → jammer → receiver`:
/// `γ_E·γ_J / (γ_E + γ_J + 1)`.
pub fn snr_jamming(s: &LinkSnrs) -> f64 {
    relay_snr(s.gamma_e, s.gamma_j)
}

pub fn relay_snr(gamma_e: f64, gamma_j: f64) -> f64 {
    let (e, j) = (gamma_e.max(0.0), gamma_j.max(0.0));
    if e.is_infinite() {
        return j;
    }
    if j.is_infinite() {
        return e;
    }
    e * j / (e + j + 1.0)
}

/// New scheme after a jammer is classified. Amplitude scaling pushes the
/// link to PSK, phase inversion to (positive-real) ASK; DRFM and unknown
/// jammers leave the scheme alone. The order is re-chosen later.
pub fn remap_modulation(class: JammerClass, current: ModScheme) -> ModScheme {
    let family = match class {
        JammerClass::As => ModFamily::Psk,
        JammerClass::Ps => ModFamily::Ask,
        JammerClass::Drfm | JammerClass::Unknown => current.family,
    };
    ModScheme { family, order: current.order }
}

/// `(n·SER − t)/n`.
pub fn residual(code: &RsCode, ser: f64) -> f64 {
    let n = code.n as f64;
    (n * ser - code.t() as f64) / n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationDecision {
    pub scheme: ModScheme,
    pub code: RsCode,
    pub residual: f64,
    pub delta: f64,
    /// False when no code met the residual bound and the fallback was used.
    pub compliant: bool,
}

/// Highest-rate code meeting `P_res ≤ Δ` at the given symbol error rate.
/// `table` must be sorted by rate, highest first.
pub fn select_code_for_ser(ser: f64, scheme: ModScheme, delta: f64, table: &[RsCode]) -> Result<AdaptationDecision> {
    let Some(last) = table.last() else {
        return domain("code table is empty");
    };
    for code in table {
        let r = residual(code, ser);
        if r <= delta {
            return Ok(AdaptationDecision { scheme, code: *code, residual: r, delta, compliant: true });
        }
    }
    Ok(AdaptationDecision { scheme, code: *last, residual: residual(last, ser), delta, compliant: false })
}

/// Code selection from the analytic BER of `scheme` at linear SNR `snr`.
pub fn select_code(snr: f64, scheme: ModScheme, delta: f64, table: &[RsCode]) -> Result<AdaptationDecision> {
    let ser = ser_from_ber(ber_awgn(&scheme, snr), scheme.order);
    select_code_for_ser(ser, scheme, delta, table)
}

/// Which codes the link may pick from.
#[derive(Debug, Clone, PartialEq)]
pub enum CodeMode {
    Fixed(RsCode),
    Adaptive(Vec<RsCode>),
}

impl CodeMode {
    fn table(&self) -> &[RsCode] {
        match self {
            CodeMode::Fixed(c) => std::slice::from_ref(c),
            CodeMode::Adaptive(t) => t,
        }
    }
}

/// Probability that a block of `code` decodes when each code symbol is
/// wrong independently with probability `ser`.
pub fn block_success(code: &RsCode, ser: f64) -> f64 {
    let p = ser.clamp(0.0, 1.0);
    match Binomial::new(p, code.n as u64) {
        Ok(b) => b.cdf(code.t() as u64),
        Err(_) => 0.0,
    }
}

/// Error rate of one 8-bit Reed-Solomon symbol at bit error rate `ber`.
pub fn code_symbol_error(ber: f64) -> f64 {
    ser_from_ber(ber, 1 << 8)
}

/// Highest order of `family` that admits a compliant code under the BER
/// model `ber_of`. If no order does, the lowest order with the most robust
/// code is returned flagged non-compliant.
///
/// Unlike [`select_code`], the residual is evaluated on code-symbol (byte)
/// errors, which is what the decoder actually has to correct once a
/// modulation symbol carries fewer than eight bits.
pub fn select_scheme(
    family: ModFamily,
    ber_of: impl Fn(&ModScheme) -> f64,
    mode: &CodeMode,
    delta: f64,
    max_order: u32,
) -> Result<AdaptationDecision> {
    let table = mode.table();
    let mut fallback = None;
    for &order in ORDERS.iter().rev().filter(|&&m| m <= max_order) {
        let scheme = ModScheme::new(family, order)?;
        let d = select_code_for_ser(code_symbol_error(ber_of(&scheme)), scheme, delta, table)?;
        if d.compliant {
            return Ok(d);
        }
        fallback = Some(d);
    }
    fallback.ok_or_else(|| crate::Error::Domain(format!("no modulation order ≤ {max_order}")))
}

/// Among the (order, code) pairs that meet the residual bound, the one with
/// the largest expected goodput `rate · log2(M) · P(block decodes)`. The
/// bound alone admits pairs that lose about half their blocks, so the
/// highest-order compliant pair is often not the best one. Falls back to
/// [`select_scheme`] when nothing complies.
pub fn select_for_goodput(
    family: ModFamily,
    ber_of: impl Fn(&ModScheme) -> f64,
    mode: &CodeMode,
    delta: f64,
    max_order: u32,
) -> Result<AdaptationDecision> {
    let mut best: Option<(f64, AdaptationDecision)> = None;
    for &order in ORDERS.iter().rev().filter(|&&m| m <= max_order) {
        let scheme = ModScheme::new(family, order)?;
        let ser = code_symbol_error(ber_of(&scheme));
        for code in mode.table() {
            let r = residual(code, ser);
            if r > delta {
                continue;
            }
            let score = code.rate() * (order as f64).log2() * block_success(code, ser);
            if best.as_ref().is_none_or(|(b, _)| score > *b) {
                best = Some((score, AdaptationDecision { scheme, code: *code, residual: r, delta, compliant: true }));
            }
        }
    }
    match best {
        Some((_, d)) => Ok(d),
        None => select_scheme(family, ber_of, mode, delta, max_order),
    }
}

/// SNR seen by the adapted link once the jam stream is separated.
///
/// The replica helps only when its transform leaves the chosen family's
/// information intact: a DRFM copy always does, an amplitude-scaled copy
/// does under PSK (with fading), a sign-flipped copy does under ASK, where
/// the receiver reads magnitudes only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinedSnr {
    pub legit: f64,
    pub replica: f64,
    pub jammer: Option<JammerModel>,
}

impl CombinedSnr {
    pub fn ber(&self, scheme: &ModScheme) -> f64 {
        let use_full = |s: &ModScheme| ber_awgn(s, self.legit + self.replica);
        let none = |s: &ModScheme| ber_awgn(s, self.legit);
        match (self.jammer, scheme.family) {
            (None, _) => none(scheme),
            (Some(JammerModel::Drfm), _) => use_full(scheme),
            (Some(JammerModel::As), ModFamily::Psk) => ber_amplitude_faded(scheme, self.legit, self.replica),
            (Some(JammerModel::Ps), ModFamily::Ask) => use_full(scheme),
            _ => none(scheme),
        }
    }
}

/// `B · rate · log2(M) · payload_fraction` in bit/s.
pub fn throughput(bandwidth: f64, code_rate: f64, scheme: &ModScheme, payload_fraction: f64) -> Result<f64> {
    if !(payload_fraction > 0.0 && payload_fraction <= 1.0) {
        return domain(format!("payload_fraction must lie in (0, 1], got {payload_fraction}"));
    }
    Ok(bandwidth * code_rate * (scheme.order as f64).log2() * payload_fraction)
}

pub fn jsr_db(p_j: f64, p_l: f64) -> Result<f64> {
    if !(p_j > 0.0 && p_l > 0.0) {
        return domain("JSR needs positive powers");
    }
    Ok(10.0 * p_j.log10() - 10.0 * p_l.log10())
}

pub fn antifragile_gain(t_jammed: f64, t_baseline: f64) -> Result<f64> {
    if !(t_baseline > 0.0) {
        return domain("baseline throughput must be positive");
    }
    Ok(t_jammed / t_baseline)
}

/// `P[dBm] = 10·log10(P[mW])`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1000.0).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub t_baseline: f64,
    pub t_jammed: f64,
    pub bandwidth: f64,
    pub jsr_db: f64,
    pub p_j_dbm: f64,
    pub p_l_dbm: f64,
    pub gain: f64,
    pub payload_fraction: f64,
}

impl ThroughputReport {
    pub fn is_antifragile(&self) -> bool {
        self.gain > 1.0
    }
}
