//! Frame layout: a fixed pilot prefix followed by Reed-Solomon blocks.
//!
//! The payload region is filled with as many full blocks as fit, then one
//! shortened block carrying the same parity budget, then random filler bits
//! for whatever is left over.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::modulation::{demodulate, modulate, ModScheme};
use super::rs::{rs_decode, rs_encode, RsCode};
use crate::error::{domain, Result};

pub const PILOT_LEN: usize = 64;

const PILOT_LEVELS: usize = 4;

fn pilot_step() -> f64 {
    // levels ±{1,2,3,4}·d with unit mean energy: d² · (1+4+9+16)/4 = 1
    (4.0f64 / 30.0).sqrt()
}

/// The 64 known pilot symbols.
///
/// Each pilot is `±a·d` with `a ∈ {1,2,3,4}`: the sign carries one
/// phase-bearing bit and the magnitude two amplitude-bearing (Gray) bits, so
/// a single pilot exposes both phase inversions and amplitude distortion.
pub fn pilot_symbols() -> &'static [Complex64] {
    static PILOT: OnceLock<Vec<Complex64>> = OnceLock::new();
    PILOT.get_or_init(|| {
        let d = pilot_step();
        let mut pts: Vec<Complex64> = (0..PILOT_LEN)
            .map(|i| {
                let level = (i % PILOT_LEVELS + 1) as f64;
                let sign = if (i / PILOT_LEVELS).is_multiple_of(2) { 1.0 } else { -1.0 };
                Complex64::new(sign * level * d, 0.0)
            })
            .collect();
        pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5049_4c4f_5453_4551));
        pts
    })
}

fn level_gray(level: usize) -> usize {
    level ^ (level >> 1)
}

fn pilot_decision(s: Complex64) -> (bool, usize) {
    let d = pilot_step();
    let mag = s.re.abs() / d;
    let level = (mag.round().clamp(1.0, PILOT_LEVELS as f64) as usize) - 1;
    (s.re < 0.0, level)
}

/// Bit-inversion fractions observed on an equalised pilot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PilotInversions {
    /// Fraction of flipped sign bits.
    pub phase: f64,
    /// Fraction of flipped magnitude bits.
    pub amplitude: f64,
}

/// Compares received pilot symbols against the known pilot.
pub fn pilot_inversions(received: &[Complex64]) -> Result<PilotInversions> {
    let pilot = pilot_symbols();
    if received.len() < PILOT_LEN {
        return domain(format!("need {PILOT_LEN} pilot symbols, got {}", received.len()));
    }
    let mut phase = 0usize;
    let mut amp = 0usize;
    for (r, p) in received.iter().zip(pilot) {
        let (rs, rl) = pilot_decision(*r);
        let (ps, pl) = pilot_decision(*p);
        phase += (rs != ps) as usize;
        amp += (level_gray(rl) ^ level_gray(pl)).count_ones() as usize;
    }
    Ok(PilotInversions { phase: phase as f64 / PILOT_LEN as f64, amplitude: amp as f64 / (2 * PILOT_LEN) as f64 })
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |k| (b >> k) & 1)).collect()
}

/// Packs bits MSB first; a trailing partial byte is dropped.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks_exact(8).map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1))).collect()
}

/// Block layout of one frame for a given scheme and code.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePlan {
    pub frame_len: usize,
    pub scheme: ModScheme,
    pub blocks: Vec<RsCode>,
    pub filler_bits: usize,
}

impl FramePlan {
    pub fn new(frame_len: usize, scheme: ModScheme, code: RsCode) -> Result<Self> {
        if frame_len <= PILOT_LEN {
            return domain(format!("frame_len must exceed the {PILOT_LEN}-symbol pilot"));
        }
        let bits = (frame_len - PILOT_LEN) * scheme.bits_per_symbol();
        let bytes = bits / 8;
        let mut blocks = vec![code; bytes / code.n];
        let rem = bytes % code.n;
        if rem > code.parity() {
            blocks.push(code.shortened(rem)?);
        }
        let used: usize = blocks.iter().map(|b| b.n * 8).sum();
        if blocks.is_empty() {
            return domain(format!("frame of {frame_len} symbols cannot carry one {code} block"));
        }
        Ok(Self { frame_len, scheme, blocks, filler_bits: bits - used })
    }

    pub fn data_bytes(&self) -> usize {
        self.blocks.iter().map(|b| b.k).sum()
    }
}

/// One transmitted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub payload: Vec<u8>,
    /// Pilot followed by the modulated coded payload; `frame_len` symbols.
    pub symbols: Vec<Complex64>,
    pub frame_len: usize,
}

impl Frame {
    pub fn build<R: Rng + ?Sized>(plan: &FramePlan, rng: &mut R) -> Result<Self> {
        let payload: Vec<u8> = (0..plan.data_bytes()).map(|_| rng.gen()).collect();
        let mut coded = Vec::with_capacity(plan.blocks.iter().map(|b| b.n).sum());
        let mut off = 0;
        for code in &plan.blocks {
            coded.extend(rs_encode(&payload[off..off + code.k], code)?);
            off += code.k;
        }
        let mut bits = bytes_to_bits(&coded);
        bits.extend((0..plan.filler_bits).map(|_| rng.gen_range(0..2u8)));
        let mut symbols = pilot_symbols().to_vec();
        symbols.extend(modulate(&bits, &plan.scheme)?);
        debug_assert_eq!(symbols.len(), plan.frame_len);
        Ok(Self { payload, symbols, frame_len: plan.frame_len })
    }

    pub fn payload_bits(&self) -> Vec<u8> {
        bytes_to_bits(&self.payload)
    }

    pub fn pilot(&self) -> &[Complex64] {
        &self.symbols[..PILOT_LEN]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameDecode {
    pub payload: Vec<u8>,
    pub failed: bool,
    pub blocks_failed: usize,
    pub corrected: usize,
}

/// Best guess of a transmitted frame. `reliable[n]` marks symbols fixed by
/// the pilot or by a block that decoded.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameReference {
    pub symbols: Vec<Complex64>,
    pub reliable: Vec<bool>,
}

impl FrameReference {
    /// Zeroes every unreliable position of `stream` and of the reference,
    /// returning both.
    pub fn masked(&self, stream: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let zero = Complex64::new(0.0, 0.0);
        let keep = |v: &[Complex64]| -> Vec<Complex64> {
            v.iter().zip(&self.reliable).map(|(x, &ok)| if ok { *x } else { zero }).collect()
        };
        (keep(stream), keep(&self.symbols))
    }
}

impl FramePlan {
    /// Demodulates and decodes an equalised frame.
    pub fn decode(&self, symbols: &[Complex64]) -> Result<FrameDecode> {
        self.decode_with_reference(symbols).map(|(d, _)| d)
    }

    /// Decodes and also rebuilds the most likely transmitted symbols: the
    /// known pilot, re-encoded RS blocks, and hard decisions wherever a
    /// block could not be corrected or for the filler.
    pub fn decode_with_reference(&self, symbols: &[Complex64]) -> Result<(FrameDecode, FrameReference)> {
        if symbols.len() < self.frame_len {
            return domain("received frame is shorter than the plan");
        }
        let bits = demodulate(&symbols[PILOT_LEN..self.frame_len], &self.scheme);
        let bytes = bits_to_bytes(&bits);
        let mut payload = Vec::with_capacity(self.data_bytes());
        let mut rebuilt = Vec::with_capacity(bytes.len());
        let (mut off, mut blocks_failed, mut corrected) = (0, 0, 0);
        let k = self.scheme.bits_per_symbol();
        let mut reliable = vec![true; PILOT_LEN];
        reliable.resize(self.frame_len, false);
        for code in &self.blocks {
            let block = &bytes[off..off + code.n];
            let out = rs_decode(block, code)?;
            blocks_failed += out.failed as usize;
            corrected += out.corrected;
            if !out.failed {
                // symbols lying wholly inside this block
                let first = (off * 8).div_ceil(k);
                let last = ((off + code.n) * 8) / k;
                for r in &mut reliable[PILOT_LEN + first..PILOT_LEN + last] {
                    *r = true;
                }
            }
            if out.failed {
                rebuilt.extend_from_slice(block);
            } else {
                rebuilt.extend(rs_encode(&out.data, code)?);
            }
            payload.extend(out.data);
            off += code.n;
        }
        let mut ref_bits = bytes_to_bits(&rebuilt);
        ref_bits.extend_from_slice(&bits[ref_bits.len()..]);
        let mut reference = pilot_symbols().to_vec();
        reference.extend(modulate(&ref_bits, &self.scheme)?);
        Ok((
            FrameDecode { payload, failed: blocks_failed > 0, blocks_failed, corrected },
            FrameReference { symbols: reference, reliable },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{default_code_table, ModFamily};

    #[test]
    fn pilot_has_unit_energy_and_balanced_levels() {
        let p = pilot_symbols();
        assert_eq!(p.len(), PILOT_LEN);
        let e = p.iter().map(|s| s.norm_sqr()).sum::<f64>() / PILOT_LEN as f64;
        assert!((e - 1.0).abs() < 1e-12);
        assert_eq!(p.iter().filter(|s| s.re < 0.0).count(), PILOT_LEN / 2);
        assert_eq!(pilot_inversions(p).unwrap(), PilotInversions::default());
    }

    #[test]
    fn pilot_inversions_see_sign_and_scale() {
        let neg: Vec<_> = pilot_symbols().iter().map(|s| -s).collect();
        let inv = pilot_inversions(&neg).unwrap();
        assert_eq!(inv.phase, 1.0);
        assert_eq!(inv.amplitude, 0.0);
        let zeroed = vec![Complex64::new(0.0, 0.0); PILOT_LEN];
        assert!(pilot_inversions(&zeroed).unwrap().amplitude > 0.3);
        assert!(pilot_inversions(&zeroed[..10]).is_err());
    }

    #[test]
    fn plan_fills_frame() {
        let code = default_code_table()[1];
        let plan = FramePlan::new(4096, ModScheme::bpsk(), code).unwrap();
        // 4032 bits = 504 bytes: one full block and one shortened 249-byte block
        assert_eq!(plan.blocks.len(), 2);
        assert_eq!(plan.blocks[1].n, 249);
        assert_eq!(plan.filler_bits, 0);
        let plan = FramePlan::new(4096, ModScheme::new(ModFamily::Psk, 64).unwrap(), code).unwrap();
        assert_eq!(plan.blocks.iter().map(|b| b.n).sum::<usize>(), 3024);
        assert!(FramePlan::new(64, ModScheme::bpsk(), code).is_err());
        assert!(FramePlan::new(100, ModScheme::bpsk(), code).is_err());
    }

    #[test]
    fn frame_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for order in [2, 8, 64] {
            let plan = FramePlan::new(1024, ModScheme::new(ModFamily::Qam, order).unwrap(), default_code_table()[0]).unwrap();
            let frame = Frame::build(&plan, &mut rng).unwrap();
            assert_eq!(frame.symbols.len(), 1024);
            let out = plan.decode(&frame.symbols).unwrap();
            assert!(!out.failed);
            assert_eq!(out.payload, frame.payload);
        }
    }

    #[test]
    fn reference_undoes_correctable_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let plan = FramePlan::new(2048, ModScheme::bpsk(), default_code_table()[0]).unwrap();
        let frame = Frame::build(&plan, &mut rng).unwrap();
        let mut rx = frame.symbols.clone();
        for i in [100, 400, 900, 1500] {
            rx[i] = -rx[i];
        }
        let (dec, reference) = plan.decode_with_reference(&rx).unwrap();
        assert!(!dec.failed);
        assert_eq!(reference.symbols, frame.symbols);
        assert!(reference.reliable[..PILOT_LEN].iter().all(|&r| r));
        assert!(reference.reliable[PILOT_LEN..1000].iter().all(|&r| r));
    }

    #[test]
    fn failed_block_is_unreliable() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let plan = FramePlan::new(8192, ModScheme::bpsk(), default_code_table()[0]).unwrap();
        let frame = Frame::build(&plan, &mut rng).unwrap();
        let mut rx = frame.symbols.clone();
        // wreck the first block only
        for v in &mut rx[PILOT_LEN..PILOT_LEN + 8 * 100] {
            *v = -*v;
        }
        let (dec, reference) = plan.decode_with_reference(&rx).unwrap();
        assert_eq!(dec.blocks_failed, 1);
        assert!(reference.reliable[..PILOT_LEN].iter().all(|&r| r));
        assert!(!reference.reliable[PILOT_LEN]);
        let n = plan.blocks[0].n * 8;
        assert!(reference.reliable[PILOT_LEN + n..PILOT_LEN + 2 * n].iter().all(|&r| r));
        let (s, r) = reference.masked(&rx);
        assert_eq!(s[PILOT_LEN], Complex64::new(0.0, 0.0));
        assert_eq!(r[PILOT_LEN + n], frame.symbols[PILOT_LEN + n]);
    }

    #[test]
    fn bit_packing() {
        let bytes = [0xA5u8, 0x01];
        let bits = bytes_to_bits(&bytes);
        assert_eq!(&bits[..8], &[1, 0, 1, 0, 0, 1, 0, 1]);
        assert_eq!(bits_to_bytes(&bits), bytes);
    }
}
