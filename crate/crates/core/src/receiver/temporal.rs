use super::detect::CycleTracker;
use crate::error::{Error, Result};

/// Burst placement that keeps the legitimate waveform clear of the replica.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitSchedule {
    pub burst_start: usize,
    pub burst_len: usize,
    /// Share of the scheduling period carrying payload.
    pub payload_fraction: f64,
}

/// Shortens the burst so it ends before the replica delayed by `tau_hat`
/// arrives. The schedule repeats every observed jamming cycle, or every
/// frame when no cycle has been measured.
pub fn partition_temporal(frame_len: usize, tau_hat: usize, cycle: &CycleTracker) -> Result<TransmitSchedule> {
    if tau_hat == 0 {
        return Err(Error::NoTemporalSeparation);
    }
    let period = match cycle.cycle_estimate {
        Some(c) if c > 0 => (c as usize).min(frame_len),
        _ => frame_len,
    };
    let burst_len = tau_hat.min(period);
    Ok(TransmitSchedule { burst_start: 0, burst_len, payload_fraction: burst_len as f64 / period as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let none = CycleTracker::default();
        let s = partition_temporal(4096, 2048, &none).unwrap();
        assert_eq!(s.burst_len, 2048);
        assert_eq!(s.payload_fraction, 0.5);
        let s = partition_temporal(4096, 5000, &none).unwrap();
        assert_eq!(s.payload_fraction, 1.0);
        assert_eq!(partition_temporal(4096, 0, &none), Err(Error::NoTemporalSeparation));
    }

    #[test]
    fn cycle_shortens_period() {
        let t = CycleTracker { cycle_estimate: Some(2048), ..Default::default() };
        let s = partition_temporal(4096, 1024, &t).unwrap();
        assert_eq!(s.payload_fraction, 0.5);
    }
}
