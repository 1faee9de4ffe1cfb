//! Browser bindings for three small views of the simulator: a gain curve,
//! a delay correlation profile and the RIS power scaling law.

use antifrag_core::channel::{RicianParams, RisLinkConfig};
use antifrag_core::harness::{mean_cascade_power, run_sweep, CodeModeKind, ExperimentConfig, Orthogonality};
use antifrag_core::jammer::{complex_noise, JammerModel};
use antifrag_core::receiver::cross_correlate;
use antifrag_core::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// JSR points of the demo curve, in dB.
pub const DEMO_JSR_DB: [f64; 13] = [-8.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 15.0, 18.0, 20.0];

fn orthogonality(name: &str) -> Result<Orthogonality> {
    match name {
        "spatial" => Ok(Orthogonality::Spatial),
        "temporal" => Ok(Orthogonality::Temporal),
        "none" => Ok(Orthogonality::None),
        other => Err(Error::Config(format!("unknown orthogonality {other:?}"))),
    }
}

/// `[jsr, gain, stderr]` triples for one jammer at RIS size 16.
pub fn gain_curve_rows(jammer: &str, ortho: &str, baseline_snr_db: f64, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let mut cfg = ExperimentConfig::default();
    cfg.experiment.jammer_models = vec![jammer.parse::<JammerModel>()?];
    cfg.experiment.orthogonality = orthogonality(ortho)?;
    cfg.experiment.baseline_snr_db = baseline_snr_db;
    cfg.experiment.ris_sizes = vec![16];
    cfg.experiment.jsr_grid_db = DEMO_JSR_DB.to_vec();
    cfg.experiment.trials = trials.clamp(1, 200);
    cfg.experiment.seed = seed;
    if cfg.experiment.orthogonality == Orthogonality::None {
        cfg.adaptation.code_mode = CodeModeKind::Fixed;
    }
    cfg.validate()?;
    Ok(run_sweep(&cfg)?.iter().flat_map(|r| [r.jsr_db, r.gain, r.stderr_gain]).collect())
}

/// `|R(γ)|` over lags `0..=2·delay` for a QPSK burst plus a replica delayed
/// by `delay` at `snr_db` per sample.
pub fn correlation_rows(delay: usize, snr_db: f64, seed: u64) -> Result<Vec<f64>> {
    const LEN: usize = 1024;
    if delay == 0 || delay >= LEN / 2 {
        return Err(Error::Domain(format!("delay must lie in 1..{}", LEN / 2)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Complex64> = (0..LEN)
        .map(|_| Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * rng.gen_range(0..4) as f64 + std::f64::consts::FRAC_PI_4))
        .collect();
    let noise = complex_noise(10f64.powf(-snr_db / 10.0), LEN, &mut rng);
    let y: Vec<Complex64> = (0..LEN)
        .map(|n| x[n] + if n >= delay { x[n - delay] } else { Complex64::new(0.0, 0.0) } + noise[n])
        .collect();
    let gamma_max = 2 * delay;
    let corr = cross_correlate(&x, &y, LEN - gamma_max, gamma_max)?;
    Ok((0..=gamma_max as i64).map(|lag| corr.at(lag).map_or(0.0, |v| v.norm())).collect())
}

/// Mean optimised cascade power in dB for each RIS size under the
/// default geometry.
pub fn ris_scaling_rows(sizes: &[usize]) -> Result<Vec<f64>> {
    let rician = RicianParams::default();
    sizes
        .iter()
        .map(|&m| {
            let link = RisLinkConfig::default().with_elements(m);
            Ok(10.0 * mean_cascade_power(&link, &rician)?.log10())
        })
        .collect()
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn gain_curve(jammer: &str, orthogonality: &str, baseline_snr_db: f64, trials: usize, seed: u64) -> std::result::Result<Vec<f64>, JsError> {
    gain_curve_rows(jammer, orthogonality, baseline_snr_db, trials, seed).map_err(js)
}

#[wasm_bindgen]
pub fn correlation_profile(delay: usize, snr_db: f64, seed: u64) -> std::result::Result<Vec<f64>, JsError> {
    correlation_rows(delay, snr_db, seed).map_err(js)
}

#[wasm_bindgen]
pub fn ris_scaling(sizes: Vec<usize>) -> std::result::Result<Vec<f64>, JsError> {
    ris_scaling_rows(&sizes).map_err(js)
}
