use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModFamily {
    #[serde(rename = "PSK")]
    Psk,
    /// Unipolar amplitude shift keying; every point lies on the positive real axis.
    #[serde(rename = "ASK")]
    Ask,
    #[serde(rename = "QAM")]
    Qam,
}

impl ModFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            ModFamily::Psk => "PSK",
            ModFamily::Ask => "ASK",
            ModFamily::Qam => "QAM",
        }
    }

    /// Information carried in the phase (sign) of the symbol.
    pub fn bears_phase(self) -> bool {
        matches!(self, ModFamily::Psk | ModFamily::Qam)
    }

    /// Information carried in the symbol magnitude.
    pub fn bears_amplitude(self) -> bool {
        matches!(self, ModFamily::Ask | ModFamily::Qam)
    }
}

pub const ORDERS: [u32; 6] = [2, 4, 8, 16, 32, 64];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModScheme {
    pub family: ModFamily,
    pub order: u32,
}

impl ModScheme {
    pub fn new(family: ModFamily, order: u32) -> Result<Self> {
        if !ORDERS.contains(&order) {
            return domain(format!("modulation order must be one of {ORDERS:?}, got {order}"));
        }
        Ok(Self { family, order })
    }

    pub fn bpsk() -> Self {
        Self { family: ModFamily::Psk, order: 2 }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    /// Unit-energy Gray-coded constellation indexed by the symbol label
    /// (the `log2(order)` bits read MSB first).
    pub fn constellation(&self) -> Vec<Complex64> {
        let m = self.order as usize;
        let mut pts = vec![Complex64::new(0.0, 0.0); m];
        match self.family {
            ModFamily::Psk => {
                for i in 0..m {
                    pts[gray(i)] = Complex64::from_polar(1.0, TAU * i as f64 / m as f64);
                }
            }
            ModFamily::Ask => {
                for i in 0..m {
                    pts[gray(i)] = Complex64::new((i + 1) as f64, 0.0);
                }
            }
            ModFamily::Qam => {
                let b = self.bits_per_symbol();
                let (bi, bq) = (b.div_ceil(2), b / 2);
                let (ni, nq) = (1usize << bi, 1usize << bq);
                for i in 0..ni {
                    for q in 0..nq {
                        let label = (gray(i) << bq) | gray(q);
                        let re = 2.0 * i as f64 - (ni as f64 - 1.0);
                        let im = 2.0 * q as f64 - (nq as f64 - 1.0);
                        pts[label] = Complex64::new(re, im);
                    }
                }
            }
        }
        let energy = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
        let s = energy.sqrt().recip();
        pts.iter_mut().for_each(|p| *p *= s);
        pts
    }
}

impl fmt::Display for ModScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.order, self.family.as_str())
    }
}

impl FromStr for ModScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (order, fam) = s
            .split_once('-')
            .ok_or_else(|| Error::Domain(format!("expected <order>-<family>, got {s:?}")))?;
        let order: u32 = order.trim().parse().map_err(|_| Error::Domain(format!("bad order in {s:?}")))?;
        let family = match fam.trim().to_ascii_uppercase().as_str() {
            "PSK" => ModFamily::Psk,
            "ASK" => ModFamily::Ask,
            "QAM" => ModFamily::Qam,
            other => return domain(format!("unknown modulation family {other:?}")),
        };
        ModScheme::new(family, order)
    }
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Maps bits (one per byte, 0 or 1) onto symbols.
pub fn modulate(bits: &[u8], scheme: &ModScheme) -> Result<Vec<Complex64>> {
    let b = scheme.bits_per_symbol();
    if !bits.len().is_multiple_of(b) {
        return domain(format!("{} bits cannot be split into {b}-bit symbols", bits.len()));
    }
    let pts = scheme.constellation();
    Ok(bits
        .chunks(b)
        .map(|chunk| pts[chunk.iter().fold(0usize, |acc, &bit| (acc << 1) | (bit & 1) as usize)])
        .collect())
}

/// Minimum-distance hard decisions.
pub fn demodulate(symbols: &[Complex64], scheme: &ModScheme) -> Vec<u8> {
    let pts = scheme.constellation();
    let b = scheme.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * b);
    for s in symbols {
        let label = nearest(&pts, *s);
        bits.extend((0..b).rev().map(|k| ((label >> k) & 1) as u8));
    }
    bits
}

pub(crate) fn nearest(pts: &[Complex64], s: Complex64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in pts.iter().enumerate() {
        let d = (s - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}
