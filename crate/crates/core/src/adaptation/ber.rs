//! Analytic AWGN error rates. `snr` is the linear symbol SNR `Es/N0`
//! throughout, with unit-energy constellations as in `waveform`.

use std::f64::consts::PI;

use crate::waveform::{ModFamily, ModScheme};

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn psk_ser(order: u32, snr: f64) -> f64 {
    match order {
        2 => q_function((2.0 * snr).sqrt()),
        4 => {
            let p = q_function(snr.sqrt());
            2.0 * p - p * p
        }
        m => {
            // Craig's form of the exact M-PSK symbol error rate
            let s = (PI / m as f64).sin().powi(2);
            let upper = PI * (m as f64 - 1.0) / m as f64;
            simpson(|th| { let d = th.sin().powi(2); if d == 0.0 { 0.0 } else { (-snr * s / d).exp() } }, 0.0, upper, 400) / PI
        }
    }
}

fn ask_ser(order: u32, snr: f64) -> f64 {
    // unipolar levels 1..M, unit mean energy → spacing d
    let m = order as f64;
    let d = (6.0 / ((m + 1.0) * (2.0 * m + 1.0))).sqrt();
    2.0 * (m - 1.0) / m * q_function(d * (snr / 2.0).sqrt())
}

fn qam_ser(order: u32, snr: f64) -> f64 {
    let b = order.trailing_zeros();
    let (li, lq) = ((1u32 << b.div_ceil(2)) as f64, (1u32 << (b / 2)) as f64);
    let a = (3.0 / ((li * li - 1.0) + (lq * lq - 1.0))).sqrt();
    let per_dim = |l: f64| if l <= 1.0 { 0.0 } else { 2.0 * (1.0 - 1.0 / l) * q_function(a * (2.0 * snr).sqrt()) };
    1.0 - (1.0 - per_dim(li)) * (1.0 - per_dim(lq))
}

/// Symbol error rate of `scheme` at linear SNR `snr`.
pub fn ser_awgn(scheme: &ModScheme, snr: f64) -> f64 {
    let snr = snr.max(0.0);
    let p = match scheme.family {
        ModFamily::Psk => psk_ser(scheme.order, snr),
        ModFamily::Ask => ask_ser(scheme.order, snr),
        ModFamily::Qam => qam_ser(scheme.order, snr),
    };
    p.clamp(0.0, 1.0)
}

/// Bit error rate under Gray labelling (`SER / log2 M`; exact for BPSK and
/// QPSK).
pub fn ber_awgn(scheme: &ModScheme, snr: f64) -> f64 {
    let k = scheme.bits_per_symbol() as f64;
    match (scheme.family, scheme.order) {
        (ModFamily::Psk | ModFamily::Qam, 4) => q_function(snr.max(0.0).sqrt()),
        _ => ser_awgn(scheme, snr) / k,
    }
}

/// BER when a replica scaled by `V ~ U[0,2]` adds `0.75·V²·s_j` to `s_l`
/// symbol by symbol (the mean of `0.75·V²` is one).
pub fn ber_amplitude_faded(scheme: &ModScheme, s_l: f64, s_j: f64) -> f64 {
    simpson(|v| ber_awgn(scheme, s_l + 0.75 * v * v * s_j), 0.0, 2.0, 64) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jammer::complex_noise;
    use crate::waveform::{demodulate, modulate, ModScheme};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn q_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!((q_function(1.0) - 0.158_655_253_931_457).abs() < 1e-12);
        assert!((q_function(3.0) - 1.349_898_031_630_09e-3).abs() < 1e-14);
    }

    #[test]
    fn bpsk_reference() {
        // 10 dB: Q(√20)
        let p = ber_awgn(&ModScheme::bpsk(), 10.0);
        assert!((p - 3.872_108_215_522e-6).abs() < 1e-15);
    }

    #[test]
    fn craig_matches_qpsk_closed_form() {
        // Craig's integral with M = 4 must agree with 2Q − Q²
        for snr_db in [0.0f64, 5.0, 10.0] {
            let snr = 10f64.powf(snr_db / 10.0);
            let s = (PI / 4.0).sin().powi(2);
            let craig = simpson(|th| (-snr * s / th.sin().powi(2).max(1e-300)).exp(), 0.0, 0.75 * PI, 2000) / PI;
            assert!((craig - psk_ser(4, snr)).abs() < 1e-9, "{snr_db}");
        }
    }

    #[test]
    fn monotone_in_snr_and_order() {
        for fam in [ModFamily::Psk, ModFamily::Ask, ModFamily::Qam] {
            let mut prev_order = vec![0.0; 31];
            for &m in &[2u32, 4, 8, 16, 32, 64] {
                let s = ModScheme::new(fam, m).unwrap();
                let mut prev = 1.0;
                for (i, db) in (0..=30).enumerate() {
                    let p = ser_awgn(&s, 10f64.powf(db as f64 / 10.0));
                    assert!(p <= prev + 1e-15, "{s} at {db} dB");
                    assert!(p >= prev_order[i] - 1e-12, "{s} at {db} dB beats a lower order");
                    prev_order[i] = p;
                    prev = p;
                }
            }
        }
    }

    #[test]
    fn analytic_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (fam, m, db) in [
            (ModFamily::Psk, 8, 12.0),
            (ModFamily::Ask, 4, 18.0),
            (ModFamily::Qam, 16, 14.0),
            (ModFamily::Qam, 8, 12.0),
            (ModFamily::Psk, 16, 16.0),
        ] {
            let s = ModScheme::new(fam, m).unwrap();
            let snr = 10f64.powf(db / 10.0);
            let k = s.bits_per_symbol();
            let n_sym = 200_000;
            let bits: Vec<u8> = (0..n_sym * k).map(|_| rng.gen_range(0..2)).collect();
            let tx = modulate(&bits, &s).unwrap();
            let noise = complex_noise(1.0 / snr, tx.len(), &mut rng);
            let rx: Vec<_> = tx.iter().zip(&noise).map(|(a, b)| a + b).collect();
            let out = demodulate(&rx, &s);
            let sym_err = bits.chunks(k).zip(out.chunks(k)).filter(|(a, b)| a != b).count() as f64 / n_sym as f64;
            let want = ser_awgn(&s, snr);
            assert!((sym_err - want).abs() < 0.1 * want + 2e-4, "{s} {db} dB: sim {sym_err} vs {want}");
        }
    }

    #[test]
    fn fading_average_is_worse_than_mean() {
        let s = ModScheme::new(ModFamily::Psk, 8).unwrap();
        let faded = ber_amplitude_faded(&s, 5.0, 20.0);
        let flat = ber_awgn(&s, 25.0);
        assert!(faded > flat);
        assert!((ber_amplitude_faded(&s, 5.0, 0.0) - ber_awgn(&s, 5.0)).abs() < 1e-12);
    }
}
