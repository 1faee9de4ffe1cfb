use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{domain, Error, Result};

/// Sliding inner product over lags `[−γ_max, γ_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub lags: Vec<i64>,
    pub values: Vec<Complex64>,
    pub search_bound: usize,
}

impl CorrelationResult {
    pub fn at(&self, lag: i64) -> Option<Complex64> {
        let idx = lag + self.search_bound as i64;
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `R(τ) = Σ_{n<f_max} y[n]·conj(ỹ[n+τ])`, with indices outside `ỹ`
/// contributing zero.
///
/// A replica delayed by `d` (`ỹ[n] = y[n−d]`) peaks at `τ = +d`.
pub fn cross_correlate(y: &[Complex64], y_ref: &[Complex64], f_max: usize, gamma_max: usize) -> Result<CorrelationResult> {
    if gamma_max >= f_max {
        return domain(format!("gamma_max ({gamma_max}) must be below f_max ({f_max})"));
    }
    if y.len() < f_max || y_ref.len() < f_max {
        return domain(format!("sequences must hold at least f_max = {f_max} samples"));
    }
    let a = &y[..f_max];
    let b = &y_ref[..y_ref.len().min(f_max + gamma_max)];
    let n = (a.len() + b.len()).next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    let mut fb = fa.clone();
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let fwd = p.plan_fft_forward(n);
        fwd.process(&mut fa);
        fwd.process(&mut fb);
        for (x, z) in fb.iter_mut().zip(&fa) {
            *x *= z.conj();
        }
        p.plan_fft_inverse(n).process(&mut fb);
    });
    let scale = 1.0 / n as f64;
    let g = gamma_max as i64;
    let lags: Vec<i64> = (-g..=g).collect();
    let values = lags
        .iter()
        .map(|&tau| {
            let idx = if tau >= 0 { tau as usize } else { n - (-tau) as usize };
            (fb[idx] * scale).conj()
        })
        .collect();
    Ok(CorrelationResult { lags, values, search_bound: gamma_max })
}

/// Direct `O(f_max·γ_max)` evaluation of [`cross_correlate`].
pub fn cross_correlate_direct(
    y: &[Complex64],
    y_ref: &[Complex64],
    f_max: usize,
    gamma_max: usize,
) -> Result<CorrelationResult> {
    if gamma_max >= f_max {
        return domain(format!("gamma_max ({gamma_max}) must be below f_max ({f_max})"));
    }
    if y.len() < f_max || y_ref.len() < f_max {
        return domain(format!("sequences must hold at least f_max = {f_max} samples"));
    }
    let g = gamma_max as i64;
    let lags: Vec<i64> = (-g..=g).collect();
    let values = lags
        .iter()
        .map(|&tau| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, yn) in y[..f_max].iter().enumerate() {
                let m = n as i64 + tau;
                if m >= 0 && (m as usize) < y_ref.len() {
                    acc += yn * y_ref[m as usize].conj();
                }
            }
            acc
        })
        .collect();
    Ok(CorrelationResult { lags, values, search_bound: gamma_max })
}

/// Lag of the largest magnitude; ties go to the smallest `|τ|`, positive first.
pub fn estimate_delay(corr: &CorrelationResult) -> Result<i64> {
    peak_in(corr, |_| true)
}

/// Peak search restricted to `lo ≤ τ ≤ hi`.
pub fn estimate_delay_in(corr: &CorrelationResult, lo: i64, hi: i64) -> Result<i64> {
    peak_in(corr, |tau| tau >= lo && tau <= hi)
}

fn peak_in(corr: &CorrelationResult, keep: impl Fn(i64) -> bool) -> Result<i64> {
    let mut best: Option<(i64, f64)> = None;
    for (&tau, v) in corr.lags.iter().zip(&corr.values) {
        if !keep(tau) {
            continue;
        }
        let mag = v.norm();
        best = match best {
            None => Some((tau, mag)),
            Some((bt, bm)) => {
                let better = mag > bm || (mag == bm && (tau.abs(), -tau) < (bt.abs(), -bt));
                if better {
                    Some((tau, mag))
                } else {
                    Some((bt, bm))
                }
            }
        };
    }
    match best {
        Some((tau, mag)) if mag > 0.0 => Ok(tau),
        _ => Err(Error::NoPeak),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn qpsk(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..n).map(|_| Complex64::from_polar(1.0, FRAC_PI_2 * rng.gen_range(0..4) as f64 + 0.25)).collect()
    }

    fn delayed(x: &[Complex64], d: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); d];
        out.extend_from_slice(x);
        out
    }

    #[test]
    fn impulse_autocorrelation() {
        let mut imp = vec![Complex64::new(0.0, 0.0); 16];
        imp[0] = Complex64::new(1.0, 0.0);
        let r = cross_correlate(&imp, &imp, 16, 8).unwrap();
        assert!((r.at(0).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(estimate_delay(&r).unwrap(), 0);
    }

    #[test]
    fn shifted_copy_peaks_at_delay() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = qpsk(256, &mut rng);
        let y = delayed(&x, 5);
        let r = cross_correlate(&x, &y, 256, 64).unwrap();
        assert_eq!(estimate_delay(&r).unwrap(), 5);

        let mut a = vec![Complex64::new(0.0, 0.0); 32];
        let mut b = a.clone();
        a[4] = Complex64::new(1.0, 0.0);
        b[7] = Complex64::new(1.0, 0.0);
        assert_eq!(estimate_delay(&cross_correlate(&a, &b, 32, 10).unwrap()).unwrap(), 3);
    }

    #[test]
    fn fft_matches_direct_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &(len, f, g) in &[(64usize, 64usize, 63usize), (300, 200, 50), (1000, 999, 500), (4096, 4096, 2048)] {
            let x = qpsk(len, &mut rng);
            let y = delayed(&qpsk(len, &mut rng), 3);
            let fast = cross_correlate(&x, &y, f, g).unwrap();
            let slow = cross_correlate_direct(&x, &y, f, g).unwrap();
            assert_eq!(fast.lags, slow.lags);
            let scale = f as f64;
            for (a, b) in fast.values.iter().zip(&slow.values) {
                assert!((a - b).norm() <= 1e-9 * scale, "len {len}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tie_break_prefers_small_lag() {
        let r = CorrelationResult {
            lags: vec![-2, -1, 0, 1, 2],
            values: [1.0, 3.0, 0.0, 3.0, 3.0].iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            search_bound: 2,
        };
        assert_eq!(estimate_delay(&r).unwrap(), 1);
        assert_eq!(estimate_delay_in(&r, 2, 2).unwrap(), 2);
    }

    #[test]
    fn errors() {
        let x = vec![Complex64::new(1.0, 0.0); 8];
        assert!(cross_correlate(&x, &x, 8, 8).is_err());
        assert!(cross_correlate(&x, &x, 16, 2).is_err());
        let zeros = vec![Complex64::new(0.0, 0.0); 8];
        let r = cross_correlate(&zeros, &zeros, 8, 3).unwrap();
        assert_eq!(estimate_delay(&r), Err(Error::NoPeak));
    }

    #[test]
    fn noiseless_delay_is_exact_for_every_lag() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = qpsk(512, &mut rng);
        for d in 1..=128 {
            let y = delayed(&x, d);
            let r = cross_correlate(&x, &y, 512, 128).unwrap();
            assert_eq!(estimate_delay(&r).unwrap(), d as i64);
        }
    }
}
