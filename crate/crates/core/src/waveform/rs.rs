//! Reed-Solomon codes over GF(2^8).
//!
//! Field polynomial `x^8 + x^4 + x^3 + x^2 + 1` (0x11D), generator roots
//! `α^0 … α^{n−k−1}`. Codewords are systematic with the data first. A block
//! length below 255 is a shortened code: the missing leading symbols are
//! implicit zeros. When `n − k` is odd the spare parity symbol only helps
//! detect failures; `t = ⌊(n−k)/2⌋`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

struct Tables {
    exp: [u8; 512],
    log: [u8; 256],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut exp = [0u8; 512];
        let mut log = [0u8; 256];
        let mut x: u16 = 1;
        for i in 0..255 {
            exp[i] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x100 != 0 {
                x ^= 0x11D;
            }
        }
        for i in 255..512 {
            exp[i] = exp[i - 255];
        }
        Tables { exp, log }
    })
}

fn mul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = tables();
    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
}

fn div(a: u8, b: u8) -> u8 {
    assert!(b != 0, "division by zero in GF(256)");
    if a == 0 {
        return 0;
    }
    let t = tables();
    t.exp[(t.log[a as usize] as usize + 255 - t.log[b as usize] as usize) % 255]
}

fn pow_alpha(e: usize) -> u8 {
    tables().exp[e % 255]
}

fn inv(a: u8) -> u8 {
    div(1, a)
}

/// Evaluates a polynomial stored highest degree first.
fn eval_hi(poly: &[u8], x: u8) -> u8 {
    poly.iter().fold(0u8, |acc, &c| mul(acc, x) ^ c)
}

/// Evaluates a polynomial stored lowest degree first.
fn eval_lo(poly: &[u8], x: u8) -> u8 {
    poly.iter().rev().fold(0u8, |acc, &c| mul(acc, x) ^ c)
}

fn generator(nsym: usize) -> Vec<u8> {
    // highest degree first
    let mut g = vec![1u8];
    for i in 0..nsym {
        let root = pow_alpha(i);
        let mut next = vec![0u8; g.len() + 1];
        for (j, &c) in g.iter().enumerate() {
            next[j] ^= c;
            next[j + 1] ^= mul(c, root);
        }
        g = next;
    }
    g
}

/// An `(n, k)` Reed-Solomon code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RsCode {
    pub n: usize,
    pub k: usize,
}

impl RsCode {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if !(0 < k && k < n && n <= 255) {
            return domain(format!("invalid RS code ({n},{k}): need 0 < k < n <= 255"));
        }
        Ok(Self { n, k })
    }

    pub fn parity(&self) -> usize {
        self.n - self.k
    }

    /// Correctable symbol errors.
    pub fn t(&self) -> usize {
        self.parity() / 2
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// The same parity budget on a shorter block.
    pub fn shortened(&self, n: usize) -> Result<Self> {
        if n <= self.parity() {
            return domain("shortened block leaves no data symbols");
        }
        RsCode::new(n, n - self.parity())
    }
}

impl fmt::Display for RsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RS({},{})", self.n, self.k)
    }
}

/// Rates evenly spaced from 0.70 to 0.94 over a 255-symbol block, highest
/// rate first.
pub fn default_code_table() -> Vec<RsCode> {
    [240, 224, 208, 192, 178].iter().map(|&k| RsCode { n: 255, k }).collect()
}

pub fn rs_encode(data: &[u8], code: &RsCode) -> Result<Vec<u8>> {
    if data.len() != code.k {
        return domain(format!("encoder expects {} data symbols, got {}", code.k, data.len()));
    }
    let nsym = code.parity();
    let g = generator(nsym);
    // remainder of data·x^nsym divided by g
    let mut rem = vec![0u8; nsym];
    for &d in data {
        let coef = d ^ rem[0];
        rem.rotate_left(1);
        rem[nsym - 1] = 0;
        if coef != 0 {
            for j in 0..nsym {
                rem[j] ^= mul(g[j + 1], coef);
            }
        }
    }
    let mut out = Vec::with_capacity(code.n);
    out.extend_from_slice(data);
    out.extend_from_slice(&rem);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub data: Vec<u8>,
    /// Set when the error pattern exceeded the correction capability and was
    /// recognised as such.
    pub failed: bool,
    pub corrected: usize,
}

pub fn rs_decode(block: &[u8], code: &RsCode) -> Result<DecodeOutcome> {
    if block.len() != code.n {
        return domain(format!("decoder expects {} symbols, got {}", code.n, block.len()));
    }
    let nsym = code.parity();
    let n = code.n;
    let fail = |block: &[u8]| DecodeOutcome { data: block[..code.k].to_vec(), failed: true, corrected: 0 };

    let synd: Vec<u8> = (0..nsym).map(|j| eval_hi(block, pow_alpha(j))).collect();
    if synd.iter().all(|&s| s == 0) {
        return Ok(DecodeOutcome { data: block[..code.k].to_vec(), failed: false, corrected: 0 });
    }

    // Berlekamp-Massey, polynomials lowest degree first
    let mut lambda = vec![1u8];
    let mut prev = vec![1u8];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut b = 1u8;
    for r in 0..nsym {
        let mut delta = synd[r];
        for i in 1..=l.min(lambda.len() - 1) {
            delta ^= mul(lambda[i], synd[r - i]);
        }
        if delta == 0 {
            shift += 1;
            continue;
        }
        let coef = div(delta, b);
        let mut next = lambda.clone();
        if next.len() < prev.len() + shift {
            next.resize(prev.len() + shift, 0);
        }
        for (i, &p) in prev.iter().enumerate() {
            next[i + shift] ^= mul(coef, p);
        }
        if 2 * l <= r {
            prev = lambda;
            l = r + 1 - l;
            b = delta;
            shift = 1;
        } else {
            shift += 1;
        }
        lambda = next;
    }
    while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
        lambda.pop();
    }
    let degree = lambda.len() - 1;
    if degree != l || 2 * l > nsym {
        return Ok(fail(block));
    }

    // Chien search over the positions that exist in this (possibly shortened) block.
    // Position p is the coefficient of x^p, i.e. block index n-1-p.
    let mut positions = Vec::with_capacity(l);
    for p in 0..n {
        let x_inv = pow_alpha(255 - p % 255);
        if eval_lo(&lambda, x_inv) == 0 {
            positions.push(p);
        }
    }
    if positions.len() != l {
        return Ok(fail(block));
    }

    // Forney with first consecutive root α^0: e = X·Ω(X⁻¹)/Λ'(X⁻¹)
    let mut omega = vec![0u8; nsym];
    for (i, &s) in synd.iter().enumerate() {
        for (j, &c) in lambda.iter().enumerate() {
            if i + j < nsym {
                omega[i + j] ^= mul(s, c);
            }
        }
    }
    let deriv: Vec<u8> = lambda
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
        .collect();
    let mut fixed = block.to_vec();
    for &p in &positions {
        let x = pow_alpha(p);
        let x_inv = inv(x);
        let denom = eval_lo(&deriv, x_inv);
        if denom == 0 {
            return Ok(fail(block));
        }
        let mag = mul(x, div(eval_lo(&omega, x_inv), denom));
        fixed[n - 1 - p] ^= mag;
    }
    if (0..nsym).any(|j| eval_hi(&fixed, pow_alpha(j)) != 0) {
        return Ok(fail(block));
    }
    Ok(DecodeOutcome { data: fixed[..code.k].to_vec(), failed: false, corrected: positions.len() })
}
