//! Angle-of-arrival estimation and beamformed separation on a
//! half-wavelength ULA.
//!
//! AoA uses MUSIC on a forward-backward smoothed covariance (two subarrays
//! of `m−1` elements), which restores rank when the jammer replays the
//! source coherently. Separation uses an LCMV beamformer with unit gain
//! toward one source and a null toward the other.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jammer::steering_vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoaOptions {
    pub smoothing: bool,
    /// Coarse search grid in radians.
    pub grid_step: f64,
}

impl Default for AoaOptions {
    fn default() -> Self {
        Self { smoothing: true, grid_step: 0.25f64.to_radians() }
    }
}

pub fn sample_covariance(streams: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let m = streams.len();
    let n = streams.iter().map(Vec::len).min().unwrap_or(0).max(1);
    let mut r = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v: Complex64 = streams[i].iter().zip(&streams[j]).map(|(a, b)| a * b.conj()).sum::<Complex64>() / n as f64;
            r[(i, j)] = v;
            r[(j, i)] = v.conj();
        }
    }
    r
}

fn forward_backward(r: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let m = r.nrows();
    let s = m - 1;
    let fwd = (r.view((0, 0), (s, s)) + r.view((1, 1), (s, s))) * Complex64::new(0.5, 0.0);
    // J·conj(R)·J with J the exchange matrix
    let bwd = DMatrix::from_fn(s, s, |i, j| fwd[(s - 1 - i, s - 1 - j)].conj());
    (fwd + bwd) * Complex64::new(0.5, 0.0)
}

fn noise_subspace(r: &DMatrix<Complex64>, sources: usize) -> Vec<DVector<Complex64>> {
    let eig = SymmetricEigen::new(r.clone());
    let mut idx: Vec<usize> = (0..r.nrows()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    idx.iter()
        .take(r.nrows() - sources)
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

fn pseudo_spectrum(noise: &[DVector<Complex64>], m: usize, theta: f64) -> f64 {
    let a = steering_vector(m, theta);
    let proj: f64 = noise
        .iter()
        .map(|e| e.iter().zip(&a).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr())
        .sum();
    1.0 / proj.max(1e-300)
}

/// Returns `source_count` angles (radians, ascending) at the strongest
/// MUSIC pseudo-spectrum peaks.
pub fn estimate_aoa(streams: &[Vec<Complex64>], source_count: usize) -> Result<Vec<f64>> {
    estimate_aoa_with(streams, source_count, AoaOptions::default())
}

pub fn estimate_aoa_with(streams: &[Vec<Complex64>], source_count: usize, opts: AoaOptions) -> Result<Vec<f64>> {
    let m = streams.len();
    if source_count == 0 || m <= source_count {
        return Err(Error::Capability(format!("{m} antennas cannot resolve {source_count} sources")));
    }
    let full = sample_covariance(streams);
    let (cov, size) = if opts.smoothing && m - 1 > source_count {
        (forward_backward(&full), m - 1)
    } else {
        (full, m)
    };
    let noise = noise_subspace(&cov, source_count);

    let steps = (std::f64::consts::PI / opts.grid_step).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| -FRAC_PI_2 + i as f64 * opts.grid_step).collect();
    let spec: Vec<f64> = grid.iter().map(|&t| pseudo_spectrum(&noise, size, t)).collect();
    let mut peaks: Vec<usize> = (0..spec.len())
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { spec[i - 1] };
            let right = spec.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            spec[i] >= left && spec[i] > right
        })
        .collect();
    peaks.sort_by(|&a, &b| spec[b].total_cmp(&spec[a]));
    if peaks.len() < source_count {
        return Err(Error::Capability("pseudo-spectrum has fewer peaks than sources".into()));
    }
    let mut angles: Vec<f64> = peaks[..source_count]
        .iter()
        .map(|&i| refine_peak(&noise, size, grid[i], opts.grid_step))
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

fn refine_peak(noise: &[DVector<Complex64>], m: usize, center: f64, step: f64) -> f64 {
    // golden-section search on the log spectrum within one grid step
    let f = |t: f64| pseudo_spectrum(noise, m, t.clamp(-FRAC_PI_2, FRAC_PI_2)).ln();
    let (mut lo, mut hi) = (center - step, center + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    (0.5 * (lo + hi)).clamp(-FRAC_PI_2, FRAC_PI_2)
}

/// Output of [`separate_spatial`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSplit {
    pub legit: Vec<Complex64>,
    pub jam: Vec<Complex64>,
    /// `‖w‖²` of each beamformer; output noise variance is this times the
    /// per-antenna noise variance.
    pub legit_noise_gain: f64,
    pub jam_noise_gain: f64,
}

/// Minimum spacing in `sin θ` that the beamformer will accept.
pub fn separation_limit(m: usize) -> f64 {
    1.0 / m as f64
}

/// LCMV beamformers toward `aoas[0]` (legitimate) and `aoas[1]` (jammer).
///
/// `w = R⁻¹C(CᴴR⁻¹C)⁻¹f` with `C = [a(θ_L), a(θ_J)]` and `f = e_1` or
/// `e_2`. The sample covariance gets a small diagonal load so noiseless
/// input stays invertible.
pub fn separate_spatial(streams: &[Vec<Complex64>], aoas: [f64; 2]) -> Result<SpatialSplit> {
    let m = streams.len();
    if m < 2 {
        return Err(Error::SeparationFailure("need at least two antennas".into()));
    }
    let du = (aoas[0].sin() - aoas[1].sin()).abs();
    if du < separation_limit(m) {
        return Err(Error::SeparationFailure(format!(
            "angular separation {:.4} in sin-space is below the limit {:.4}",
            du,
            separation_limit(m)
        )));
    }
    let mut r = sample_covariance(streams);
    let load = r.diagonal().iter().map(|v| v.re).sum::<f64>() / m as f64 * 1e-9 + 1e-300;
    for i in 0..m {
        r[(i, i)] += Complex64::new(load, 0.0);
    }
    let r_inv = r
        .try_inverse()
        .ok_or_else(|| Error::Internal("covariance is singular after loading".into()))?;
    let a1 = steering_vector(m, aoas[0]);
    let a2 = steering_vector(m, aoas[1]);
    let c = DMatrix::from_fn(m, 2, |i, j| if j == 0 { a1[i] } else { a2[i] });
    let ri_c = &r_inv * &c;
    let gram = c.adjoint() * &ri_c;
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::SeparationFailure("constraint matrix is singular".into()))?;
    let weights = ri_c * gram_inv; // column j answers f = e_j
    let n = streams.iter().map(Vec::len).min().unwrap_or(0);
    let beam = |col: usize| -> Vec<Complex64> {
        (0..n)
            .map(|t| (0..m).map(|i| weights[(i, col)].conj() * streams[i][t]).sum())
            .collect()
    };
    let gain = |col: usize| weights.column(col).iter().map(|w| w.norm_sqr()).sum::<f64>();
    Ok(SpatialSplit { legit: beam(0), jam: beam(1), legit_noise_gain: gain(0), jam_noise_gain: gain(1) })
}
