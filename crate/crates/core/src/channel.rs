//! RIS channel model.
//!
//! The legitimate hop is the cascade source → RIS → destination:
//!
//! ```text
//! h_L = h_SR · R^{1/2} · diag(e^{jφ}) · R^{1/2} · h_RD
//! ```
//!
//! where `R` carries the element correlation and `φ` the per-element phase
//! shifts. Per-element links are Rayleigh with unit mean power scaled by the
//! amplitude path loss `√(d^{−δ})`. The jammer links (source → Jammer 1,
//! Jammer 1/2 → destination) are Rician draws.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Geometry and propagation parameters of one RIS-assisted hop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RisLinkConfig {
    /// Number of reflecting elements `M`.
    pub element_count: usize,
    /// Source to RIS distance in meters.
    pub d_sr: f64,
    /// RIS to destination distance in meters.
    pub d_rd: f64,
    /// RIS to Jammer 2 distance in meters.
    pub d_rj: f64,
    /// Correlation of the RIS → Jammer 2 fading with the RIS → destination
    /// fading. At 1 Jammer 2 sits inside the reflected beam and inherits
    /// the full beamforming gain; at 0 it sees an unrelated scatter.
    pub rj_alignment: f64,
    /// Path loss exponent `δ`.
    pub path_loss_exp: f64,
    /// Exponential correlation rate `λ_R` over the element index.
    pub corr_rate: f64,
    pub carrier_hz: f64,
}

impl Default for RisLinkConfig {
    fn default() -> Self {
        Self {
            element_count: 64,
            d_sr: 18.0,
            d_rd: 7.0,
            d_rj: 0.5,
            rj_alignment: 0.9,
            path_loss_exp: 2.7,
            corr_rate: 0.05,
            carrier_hz: 28e9,
        }
    }
}

impl RisLinkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.element_count == 0 {
            return domain("element_count must be at least 1");
        }
        for (name, d) in [("d_sr", self.d_sr), ("d_rd", self.d_rd), ("d_rj", self.d_rj)] {
            if !(d > 0.0 && d.is_finite()) {
                return domain(format!("{name} must be a positive distance, got {d}"));
            }
        }
        if !(0.0..=1.0).contains(&self.rj_alignment) {
            return domain("rj_alignment must lie in [0, 1]");
        }
        if !(self.path_loss_exp > 0.0) {
            return domain("path_loss_exp must be positive");
        }
        if !(self.corr_rate >= 0.0) {
            return domain("corr_rate must be non-negative");
        }
        Ok(())
    }

    pub fn with_elements(&self, element_count: usize) -> Self {
        Self { element_count, ..self.clone() }
    }
}

/// Power path loss `d^{−δ}`.
pub fn path_loss(d: f64, delta: f64) -> Result<f64> {
    if !(d > 0.0) {
        return domain(format!("distance must be positive, got {d}"));
    }
    if !(delta > 0.0) {
        return domain(format!("path loss exponent must be positive, got {delta}"));
    }
    Ok(d.powf(-delta))
}

/// Element correlation matrix together with its principal square root.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
    sqrt_form: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn identity(m: usize) -> Self {
        Self { entries: DMatrix::identity(m, m), sqrt_form: DMatrix::identity(m, m) }
    }

    /// Builds from explicit entries; the square root comes from a symmetric
    /// eigendecomposition with negative eigenvalues clamped to zero.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return domain("correlation matrix must be square and non-empty");
        }
        let m = entries.nrows();
        let sym = (&entries + entries.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(1.0f64, |a, &v| a.max(v.abs()));
        if eig.eigenvalues.iter().any(|&v| v < -1e-8 * scale) {
            return Err(Error::Internal("correlation matrix is not positive semidefinite".into()));
        }
        let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let q = &eig.eigenvectors;
        let mut sqrt_form = q * DMatrix::from_diagonal(&roots) * q.transpose();
        sqrt_form = (&sqrt_form + sqrt_form.transpose()) * 0.5;
        debug_assert_eq!(sqrt_form.nrows(), m);
        Ok(Self { entries: sym, sqrt_form })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn sqrt_form(&self) -> &DMatrix<f64> {
        &self.sqrt_form
    }

    /// `R^{1/2} h` for a complex vector `h`.
    pub fn apply_sqrt(&self, h: &[Complex64]) -> Vec<Complex64> {
        let m = self.size();
        let s = &self.sqrt_form;
        (0..m)
            .map(|a| (0..m).map(|k| h[k] * s[(a, k)]).sum())
            .collect()
    }
}

/// Exponential correlation `ρ_{i,j} = exp(−λ_R·|i−j|)`.
pub fn build_correlation(cfg: &RisLinkConfig) -> Result<CorrelationMatrix> {
    cfg.validate()?;
    let m = cfg.element_count;
    let entries = DMatrix::from_fn(m, m, |i, j| (-cfg.corr_rate * (i as f64 - j as f64).abs()).exp());
    CorrelationMatrix::from_entries(entries)
}

/// Per-element RIS phase shifts, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    phases: Vec<f64>,
}

impl PhaseMatrix {
    pub fn new(phases: impl IntoIterator<Item = f64>) -> Self {
        Self { phases: phases.into_iter().map(wrap_phase).collect() }
    }

    pub fn zeros(m: usize) -> Self {
        Self { phases: vec![0.0; m] }
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        Self::new((0..m).map(|_| rng.gen::<f64>() * TAU))
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Rician parameters for the jammer-side scalar links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RicianParams {
    /// Rician factor `κ`; `f64::INFINITY` is the pure line-of-sight limit.
    pub rician_k: f64,
    /// Line-of-sight amplitude `σ`.
    pub avg_amp: f64,
    /// Number of diffuse paths `L`.
    pub path_count: usize,
}

impl Default for RicianParams {
    fn default() -> Self {
        Self { rician_k: 3.0, avg_amp: 1.0, path_count: 1 }
    }
}

impl RicianParams {
    pub fn validate(&self) -> Result<()> {
        if self.path_count == 0 {
            return domain("path_count must be at least 1");
        }
        if !(self.avg_amp > 0.0) {
            return domain("avg_amp must be positive");
        }
        if !(self.rician_k >= 0.0) {
            return domain("rician_k must be non-negative");
        }
        Ok(())
    }

    /// Mean power `E|h|²` of a draw.
    pub fn mean_power(&self) -> f64 {
        if self.rician_k.is_infinite() {
            return self.avg_amp * self.avg_amp;
        }
        let k = self.rician_k;
        (k * self.avg_amp * self.avg_amp + self.path_count as f64) / (k + 1.0)
    }
}

/// Circularly symmetric complex Gaussian with unit power; its magnitude is
/// Rayleigh with `E[g²] = 1` and its phase uniform.
pub fn unit_rayleigh<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// One Rician draw: line-of-sight term plus `L` Rayleigh-amplitude paths.
pub fn sample_rician<R: Rng + ?Sized>(p: &RicianParams, rng: &mut R) -> Complex64 {
    let los_phase = rng.gen::<f64>() * TAU;
    let los = Complex64::from_polar(p.avg_amp, los_phase);
    if p.rician_k.is_infinite() {
        return los;
    }
    let k = p.rician_k;
    let diffuse: Complex64 = (0..p.path_count).map(|_| unit_rayleigh(rng)).sum();
    los * (k / (k + 1.0)).sqrt() + diffuse * (1.0 / (k + 1.0)).sqrt()
}

/// One Monte Carlo draw of every fading coefficient in the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_sr: Vec<Complex64>,
    pub h_rd: Vec<Complex64>,
    pub h_rj: Vec<Complex64>,
    pub h_e1: Complex64,
    pub h_j1: Complex64,
    pub h_j2: Complex64,
}

pub fn sample_realization<R: Rng + ?Sized>(
    cfg: &RisLinkConfig,
    jp: &RicianParams,
    rng: &mut R,
) -> Result<ChannelRealization> {
    cfg.validate()?;
    jp.validate()?;
    let m = cfg.element_count;
    let a_sr = path_loss(cfg.d_sr, cfg.path_loss_exp)?.sqrt();
    let a_rd = path_loss(cfg.d_rd, cfg.path_loss_exp)?.sqrt();
    let a_rj = path_loss(cfg.d_rj, cfg.path_loss_exp)?.sqrt();
    let mut draw = |amp: f64| -> Vec<Complex64> { (0..m).map(|_| unit_rayleigh(rng) * amp).collect() };
    let h_sr = draw(a_sr);
    let h_rd = draw(a_rd);
    let rho = cfg.rj_alignment;
    let scatter = draw(1.0);
    let h_rj = h_rd
        .iter()
        .zip(&scatter)
        .map(|(d, w)| (d / a_rd * rho + w * (1.0 - rho * rho).sqrt()) * a_rj)
        .collect();
    let h_e1 = sample_rician(jp, rng);
    let h_j1 = sample_rician(jp, rng);
    let h_j2 = sample_rician(jp, rng);
    Ok(ChannelRealization { h_sr, h_rd, h_rj, h_e1, h_j1, h_j2 })
}

/// `h_in · R^{1/2} · diag(e^{jφ}) · R^{1/2} · h_out`.
pub fn cascaded_coefficient(
    h_in: &[Complex64],
    h_out: &[Complex64],
    r: &CorrelationMatrix,
    phi: &PhaseMatrix,
) -> Result<Complex64> {
    let m = r.size();
    if h_in.len() != m || h_out.len() != m || phi.len() != m {
        return domain(format!(
            "length mismatch: h_in {}, h_out {}, phases {}, correlation {m}",
            h_in.len(),
            h_out.len(),
            phi.len()
        ));
    }
    let u = r.apply_sqrt(h_in);
    let v = r.apply_sqrt(h_out);
    Ok(u.iter()
        .zip(&v)
        .zip(phi.phases())
        .map(|((a, b), &p)| a * b * Complex64::from_polar(1.0, p))
        .sum())
}

/// Co-phases every element's effective product so all terms add coherently.
///
/// With `u = R^{1/2} h_SR` and `v = R^{1/2} h_RD` the cascade is
/// `Σ_a u_a v_a e^{jφ_a}`, which is maximized by `φ_a = −arg(u_a v_a)`.
pub fn optimize_phases(h_sr: &[Complex64], h_rd: &[Complex64], r: &CorrelationMatrix) -> Result<PhaseMatrix> {
    let m = r.size();
    if h_sr.len() != m || h_rd.len() != m {
        return domain("channel lengths must match the correlation size");
    }
    let u = r.apply_sqrt(h_sr);
    let v = r.apply_sqrt(h_rd);
    Ok(PhaseMatrix::new(u.iter().zip(&v).map(|(a, b)| -(a * b).arg())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triple_sum(h_in: &[Complex64], h_out: &[Complex64], r: &CorrelationMatrix, phi: &PhaseMatrix) -> Complex64 {
        let s = r.sqrt_form();
        let m = h_in.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..m {
            for k in 0..m {
                for l in 0..m {
                    acc += h_in[k] * h_out[l] * s[(a, k)] * s[(a, l)] * Complex64::from_polar(1.0, phi.phases()[a]);
                }
            }
        }
        acc
    }

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss(1.0, 2.7).unwrap(), 1.0);
        // 18^-2.7 and 7^-2.7 evaluated independently with exp/ln
        let want_18 = (-2.7f64 * 18f64.ln()).exp();
        assert_relative_eq!(path_loss(18.0, 2.7).unwrap(), want_18, max_relative = 1e-12);
        assert_relative_eq!(path_loss(18.0, 2.7).unwrap(), 4.08e-4, max_relative = 5e-3);
        assert_relative_eq!(path_loss(7.0, 2.7).unwrap(), 5.24e-3, max_relative = 5e-3);
        assert!(path_loss(0.0, 2.7).is_err());
        assert!(path_loss(-3.0, 2.7).is_err());
        assert!(path_loss(7.0, 8.0).unwrap() < path_loss(6.0, 8.0).unwrap());
    }

    #[test]
    fn correlation_examples() {
        let c = build_correlation(&RisLinkConfig { element_count: 1, ..Default::default() }).unwrap();
        assert_eq!(c.entries()[(0, 0)], 1.0);

        let c = build_correlation(&RisLinkConfig { element_count: 2, corr_rate: 0.05, ..Default::default() }).unwrap();
        assert_relative_eq!(c.entries()[(0, 1)], 0.951229424500714, epsilon = 1e-12);
        let s = c.sqrt_form();
        let back = s * s;
        assert!((back - c.entries()).abs().max() < 1e-9);

        let c = build_correlation(&RisLinkConfig { element_count: 5, corr_rate: 0.0, ..Default::default() }).unwrap();
        assert!(c.entries().iter().all(|&v| v == 1.0));
        let s = c.sqrt_form();
        assert!((s * s - c.entries()).abs().max() < 1e-9);
    }

    #[test]
    fn rician_los_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = RicianParams { rician_k: f64::INFINITY, avg_amp: 0.7, path_count: 3 };
        for _ in 0..100 {
            assert_relative_eq!(sample_rician(&p, &mut rng).norm(), 0.7, epsilon = 1e-12);
        }
        // a very large finite factor behaves like the limit
        let p = RicianParams { rician_k: 1e12, avg_amp: 0.7, path_count: 3 };
        assert_relative_eq!(sample_rician(&p, &mut rng).norm(), 0.7, epsilon = 1e-5);
    }

    #[test]
    fn rayleigh_mean_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = RicianParams { rician_k: 0.0, avg_amp: 1.0, path_count: 1 };
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| sample_rician(&p, &mut rng).norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean power {mean}");
    }

    #[test]
    fn realization_is_deterministic_and_scaled() {
        let cfg = RisLinkConfig { element_count: 4, ..Default::default() };
        let jp = RicianParams::default();
        let a = sample_realization(&cfg, &jp, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_realization(&cfg, &jp, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.h_sr.len(), 4);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000 / 4;
        let mean = |cfg: &RisLinkConfig, rng: &mut ChaCha8Rng| {
            let mut acc = 0.0;
            for _ in 0..draws {
                let r = sample_realization(cfg, &jp, rng).unwrap();
                acc += r.h_sr.iter().map(|h| h.norm_sqr()).sum::<f64>();
            }
            acc / (draws * cfg.element_count) as f64
        };
        let pl = path_loss(18.0, 2.7).unwrap();
        let m1 = mean(&cfg, &mut rng);
        assert!((m1 / pl - 1.0).abs() < 0.03, "ratio {}", m1 / pl);
        let m2 = mean(&RisLinkConfig { d_sr: 36.0, ..cfg.clone() }, &mut rng);
        assert!((m2 / m1 / 2f64.powf(-2.7) - 1.0).abs() < 0.04);
    }

    #[test]
    fn cascade_examples() {
        let one = [Complex64::new(1.0, 0.0)];
        let r = CorrelationMatrix::identity(1);
        let c = cascaded_coefficient(&one, &one, &r, &PhaseMatrix::zeros(1)).unwrap();
        assert_eq!(c, Complex64::new(1.0, 0.0));

        let r = CorrelationMatrix::identity(3);
        let h: Vec<_> = (0..3).map(|i| Complex64::from_polar(1.0, 0.3 * i as f64)).collect();
        let phi = optimize_phases(&h, &h, &r).unwrap();
        let c = cascaded_coefficient(&h, &h, &r, &phi).unwrap();
        assert_relative_eq!(c.norm(), 3.0, epsilon = 1e-12);

        assert!(cascaded_coefficient(&h, &h[..2], &r, &phi).is_err());
    }

    #[test]
    fn cascade_matches_triple_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in 1..=8 {
            let r = build_correlation(&RisLinkConfig { element_count: m, corr_rate: 0.3, ..Default::default() }).unwrap();
            for _ in 0..10 {
                let a: Vec<_> = (0..m).map(|_| unit_rayleigh(&mut rng)).collect();
                let b: Vec<_> = (0..m).map(|_| unit_rayleigh(&mut rng)).collect();
                let phi = PhaseMatrix::random(m, &mut rng);
                let fast = cascaded_coefficient(&a, &b, &r, &phi).unwrap();
                let slow = triple_sum(&a, &b, &r, &phi);
                assert!((fast - slow).norm() <= 1e-9 * slow.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn single_element_alignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = CorrelationMatrix::identity(1);
        let a = [unit_rayleigh(&mut rng)];
        let b = [unit_rayleigh(&mut rng)];
        let phi = optimize_phases(&a, &b, &r).unwrap();
        let c = cascaded_coefficient(&a, &b, &r, &phi).unwrap();
        assert_relative_eq!(c.norm(), a[0].norm() * b[0].norm(), epsilon = 1e-12);
        assert!(c.im.abs() < 1e-12 && c.re > 0.0);
    }

    #[test]
    fn aligned_phases_beat_exhaustive_grid() {
        // exhaustive 24-step phase grid per element for M ≤ 3 never beats the closed form
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for m in 1..=3usize {
            let r = CorrelationMatrix::identity(m);
            let a: Vec<_> = (0..m).map(|_| unit_rayleigh(&mut rng)).collect();
            let b: Vec<_> = (0..m).map(|_| unit_rayleigh(&mut rng)).collect();
            let best = cascaded_coefficient(&a, &b, &r, &optimize_phases(&a, &b, &r).unwrap()).unwrap().norm();
            let coherent: f64 = a.iter().zip(&b).map(|(x, y)| x.norm() * y.norm()).sum();
            assert_relative_eq!(best, coherent, epsilon = 1e-12);
            let steps = 24usize;
            let mut grid_best = 0.0f64;
            for idx in 0..steps.pow(m as u32) {
                let mut rem = idx;
                let phases: Vec<f64> = (0..m)
                    .map(|_| {
                        let p = (rem % steps) as f64 * TAU / steps as f64;
                        rem /= steps;
                        p
                    })
                    .collect();
                let v = cascaded_coefficient(&a, &b, &r, &PhaseMatrix::new(phases)).unwrap().norm();
                grid_best = grid_best.max(v);
            }
            assert!(best + 1e-12 >= grid_best);
            assert!(grid_best > 0.95 * best);
        }
    }

    #[test]
    fn optimized_beats_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = RisLinkConfig { element_count: 16, ..Default::default() };
        let r = build_correlation(&cfg).unwrap();
        let real = sample_realization(&cfg, &RicianParams::default(), &mut rng).unwrap();
        let best = cascaded_coefficient(&real.h_sr, &real.h_rd, &r, &optimize_phases(&real.h_sr, &real.h_rd, &r).unwrap())
            .unwrap()
            .norm();
        for _ in 0..100 {
            let phi = PhaseMatrix::random(16, &mut rng);
            assert!(best >= cascaded_coefficient(&real.h_sr, &real.h_rd, &r, &phi).unwrap().norm());
        }
    }

    #[test]
    fn phases_are_wrapped() {
        let p = PhaseMatrix::new([-0.1, 7.0, -1e-18, TAU]);
        assert!(p.phases().iter().all(|&v| (0.0..TAU).contains(&v)));
    }
}
