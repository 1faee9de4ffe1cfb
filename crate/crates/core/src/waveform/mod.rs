//! Bit and symbol pipeline: mapping, Reed-Solomon coding, framing and
//! error-rate measurement.

mod frame;
mod modulation;
mod rs;

pub use frame::{
    bits_to_bytes, bytes_to_bits, pilot_inversions, pilot_symbols, Frame, FrameDecode, FramePlan, FrameReference,
    PilotInversions,
    PILOT_LEN,
};
pub use modulation::{demodulate, modulate, ModFamily, ModScheme, ORDERS};
pub use rs::{default_code_table, rs_decode, rs_encode, DecodeOutcome, RsCode};

use crate::error::{domain, Result};

/// Fraction of differing bits.
pub fn measure_ber(tx_bits: &[u8], rx_bits: &[u8]) -> Result<f64> {
    if tx_bits.len() != rx_bits.len() {
        return domain(format!("bit sequences differ in length: {} vs {}", tx_bits.len(), rx_bits.len()));
    }
    if tx_bits.is_empty() {
        return Ok(0.0);
    }
    let errors = tx_bits.iter().zip(rx_bits).filter(|(a, b)| (*a ^ *b) & 1 == 1).count();
    Ok(errors as f64 / tx_bits.len() as f64)
}

/// `SER = 1 − (1 − BER)^{log2(order)}`.
pub fn ser_from_ber(ber: f64, order: u32) -> f64 {
    let bits = (order as f64).log2();
    let ber = ber.clamp(0.0, 1.0);
    // expm1/ln_1p keep precision for tiny BER
    -((bits * (-ber).ln_1p()).exp_m1())
}
