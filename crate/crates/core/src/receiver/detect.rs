use num_complex::Complex64;

/// A jammer is suspected whenever the RS decoder gives up on a frame.
pub fn detect_jamming(decode_failure: bool) -> bool {
    decode_failure
}

/// Timing of observed jamming attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CycleTracker {
    pub first_attack_time: Option<u64>,
    pub last_attack_time: Option<u64>,
    pub cycle_estimate: Option<u64>,
    pub attacks: u32,
}

/// Records an attack; the cycle estimate is the spacing of the last two.
pub fn update_cycle(tracker: CycleTracker, attack_time: u64) -> CycleTracker {
    let mut next = tracker;
    next.attacks += 1;
    match tracker.last_attack_time {
        None => next.first_attack_time = Some(attack_time),
        Some(last) if attack_time > last => next.cycle_estimate = Some(attack_time - last),
        Some(_) => {}
    }
    next.last_attack_time = Some(attack_time);
    next
}

/// Start of a sustained rise in received energy.
///
/// Fits a two-level step to `|y|²` and returns the split index when the
/// later level exceeds the earlier one by at least `min_step` (relative)
/// and the step stands well clear of the fluctuation of `|y|²` itself.
/// Reactive jammers that stay silent until they have heard the frame show
/// up as such a step even when their waveform does not correlate with the
/// reference.
pub fn estimate_onset(y: &[Complex64], min_step: f64) -> Option<usize> {
    const MIN_SEGMENT: usize = 16;
    // |y|² of Gaussian samples has a standard deviation equal to its mean
    const MIN_Z: f64 = 6.0;
    let n = y.len();
    if n < 2 * MIN_SEGMENT {
        return None;
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in y {
        prefix.push(prefix.last().unwrap() + v.norm_sqr());
    }
    let total = prefix[n];
    let mut best: Option<(usize, f64)> = None;
    for k in MIN_SEGMENT..=n - MIN_SEGMENT {
        let before = prefix[k] / k as f64;
        let after = (total - prefix[k]) / (n - k) as f64;
        if after <= before {
            continue;
        }
        let score = (after - before).powi(2) * (k as f64) * ((n - k) as f64);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((k, score));
        }
    }
    let (k, _) = best?;
    let before = prefix[k] / k as f64;
    let after = (total - prefix[k]) / (n - k) as f64;
    let z = (after - before) / (total / n as f64) * ((k * (n - k)) as f64 / n as f64).sqrt();
    (before > 0.0 && (after - before) / before >= min_step && z >= MIN_Z).then_some(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jammer::complex_noise;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn onset_found_at_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut y = complex_noise(1.0, 4096, &mut rng);
        let jam = complex_noise(1.0, 2048, &mut rng);
        for (i, j) in jam.iter().enumerate() {
            y[2048 + i] += j;
        }
        let k = estimate_onset(&y, 0.1).unwrap();
        assert!((k as i64 - 2048).abs() <= 40, "{k}");
        let flat = complex_noise(1.0, 4096, &mut rng);
        assert_eq!(estimate_onset(&flat, 0.1), None);
        assert_eq!(estimate_onset(&flat[..10], 0.1), None);
    }

    #[test]
    fn detection_follows_decoder() {
        assert!(!detect_jamming(false));
        assert!(detect_jamming(true));
    }

    #[test]
    fn cycle_examples() {
        let t = update_cycle(CycleTracker::default(), 1000);
        assert_eq!(t.first_attack_time, Some(1000));
        assert_eq!(t.cycle_estimate, None);
        let t = update_cycle(t, 3000);
        assert_eq!(t.cycle_estimate, Some(2000));
        let t = update_cycle(t, 5000);
        assert_eq!(t.cycle_estimate, Some(2000));
        assert_eq!(t.first_attack_time, Some(1000));
        assert_eq!(t.attacks, 3);
    }
}
