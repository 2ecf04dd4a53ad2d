//! Rate-1/2 (3,6)-regular quasi-cyclic LDPC code.
//!
//! The parity-check matrix lifts an all-ones 3x6 base matrix with circulant
//! permutation blocks of size 502 (= 2 x 251; since 2 and 251 are coprime a
//! 502-circulant is the same as lifting by 2 and then by 251). Circulant
//! shifts are chosen greedily to avoid 4- and 6-cycles.
//!
//! Every block row of an all-ones QC matrix sums to the all-ones vector, so
//! the 1506 checks have rank at most 1504 and the code dimension is at least
//! 1508. The code carries exactly `n/2 = 1506` information bits; the
//! remaining free positions are frozen to zero and known to the decoder.
//!
//! Bit order. Codewords are exchanged in transmission order: the
//! information bits verbatim first, then the frozen bits, then the parity
//! bits. Internally the code works in the natural column order of the QC
//! matrix.

mod alist;
mod decode;
mod gf2;

pub use alist::{read_alist, write_alist};
pub use decode::{DecodeResult, Schedule};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};
use gf2::BitRow;

/// Base matrix rows.
pub const BASE_ROWS: usize = 3;
/// Base matrix columns.
pub const BASE_COLS: usize = 6;
/// Circulant size, `2 * 251`.
pub const CIRCULANT: usize = 502;
/// Default decoder iteration limit.
pub const DEFAULT_MAX_ITERS: usize = 50;

const SEED_ATTEMPTS: u64 = 16;
const CANDIDATES_PER_SHIFT: usize = 4000;

#[derive(Debug, Clone)]
pub struct LdpcCode {
    n: usize,
    /// Variable (natural index) list of every check.
    checks: Vec<Vec<usize>>,
    /// Check rows grouped into decoding layers.
    layers: Vec<std::ops::Range<usize>>,
    /// Circulant shifts, when the code is QC.
    shifts: Option<Vec<Vec<usize>>>,
    /// Natural column of each transmission position.
    tx_to_nat: Vec<usize>,
    nat_to_tx: Vec<usize>,
    info_bits: usize,
    frozen_bits: usize,
    /// Reduced echelon rows restricted to the free columns, one per parity bit.
    parity_rows: Vec<BitRow>,
    /// Dimension of the null space.
    dimension: usize,
}

impl LdpcCode {
    /// Constructs the paper-length QC code; deterministic in `seed`.
    pub fn construct(seed: u64) -> Result<Self> {
        let mut last = None;
        for attempt in 0..SEED_ATTEMPTS {
            let shifts = choose_shifts(seed.wrapping_add(attempt), CIRCULANT);
            match Self::from_shifts(&shifts, CIRCULANT) {
                Ok(code) => return Ok(code),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| Error::CodeConstruction("no attempt made".into())))
    }

    /// QC code from a base shift matrix and circulant size.
    pub fn from_shifts(shifts: &[Vec<usize>], z: usize) -> Result<Self> {
        let rows = shifts.len();
        let cols = shifts.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || shifts.iter().any(|r| r.len() != cols) {
            return Err(Error::CodeConstruction("shift matrix must be rectangular".into()));
        }
        let mut checks = Vec::with_capacity(rows * z);
        for row in shifts {
            for t in 0..z {
                checks.push(row.iter().enumerate().map(|(j, s)| j * z + (t + s) % z).collect());
            }
        }
        let layers = (0..rows).map(|i| i * z..(i + 1) * z).collect();
        let mut code = Self::from_checks(cols * z, checks, layers)?;
        code.shifts = Some(shifts.to_vec());
        Ok(code)
    }

    /// Code from an explicit check list. Layers must partition the checks.
    pub fn from_checks(
        n: usize,
        checks: Vec<Vec<usize>>,
        layers: Vec<std::ops::Range<usize>>,
    ) -> Result<Self> {
        if n == 0 || n % 2 == 1 {
            return Err(Error::CodeConstruction(format!("block length {n} must be even and positive")));
        }
        if checks.iter().flatten().any(|&v| v >= n) {
            return Err(Error::CodeConstruction("check references a bit beyond the block".into()));
        }
        let covered: usize = layers.iter().map(|r| r.len()).sum();
        if covered != checks.len() || layers.windows(2).any(|w| w[0].end != w[1].start) {
            return Err(Error::CodeConstruction("layers must partition the checks in order".into()));
        }
        let mut rows: Vec<BitRow> = checks
            .iter()
            .map(|c| {
                let mut r = BitRow::zeros(n);
                for &v in c {
                    r.flip(v);
                }
                r
            })
            .collect();
        let pivots = gf2::reduce(&mut rows, n);
        let dimension = n - pivots.len();
        let info_bits = n / 2;
        if dimension < info_bits {
            return Err(Error::CodeConstruction(format!(
                "code dimension {dimension} is below n/2 = {info_bits}"
            )));
        }
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let parity_rows = rows
            .iter()
            .map(|r| {
                let mut out = BitRow::zeros(free.len());
                for (f, &c) in free.iter().enumerate() {
                    if r.get(c) {
                        out.set(f);
                    }
                }
                out
            })
            .collect();
        let tx_to_nat: Vec<usize> = free.iter().copied().chain(pivots.iter().copied()).collect();
        let mut nat_to_tx = vec![0; n];
        for (t, &c) in tx_to_nat.iter().enumerate() {
            nat_to_tx[c] = t;
        }
        Ok(Self {
            n,
            checks,
            layers,
            shifts: None,
            tx_to_nat,
            nat_to_tx,
            info_bits,
            frozen_bits: dimension - info_bits,
            parity_rows,
            dimension,
        })
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Information bits per codeword.
    pub fn info_bits(&self) -> usize {
        self.info_bits
    }

    /// Alias of [`LdpcCode::info_bits`].
    pub fn k(&self) -> usize {
        self.info_bits
    }

    /// Dimension of the code (information plus frozen bits).
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn frozen_bits(&self) -> usize {
        self.frozen_bits
    }

    /// Transmission positions of the frozen (always zero) bits.
    pub fn frozen_positions(&self) -> std::ops::Range<usize> {
        self.info_bits..self.info_bits + self.frozen_bits
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub fn layers(&self) -> &[std::ops::Range<usize>] {
        &self.layers
    }

    pub fn shifts(&self) -> Option<&[Vec<usize>]> {
        self.shifts.as_deref()
    }

    /// Natural column of transmission position `t`.
    pub fn natural_index(&self, t: usize) -> usize {
        self.tx_to_nat[t]
    }

    /// Systematic encoding; `info` appears verbatim at the start of the
    /// returned codeword.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.info_bits {
            return Err(Error::LengthMismatch {
                expected: self.info_bits,
                actual: info.len(),
            });
        }
        let mut free = BitRow::zeros(self.dimension);
        for (i, &b) in info.iter().enumerate() {
            if b & 1 == 1 {
                free.set(i);
            }
        }
        let mut cw = Vec::with_capacity(self.n);
        cw.extend(info.iter().map(|b| b & 1));
        cw.extend(std::iter::repeat_n(0u8, self.frozen_bits));
        cw.extend(self.parity_rows.iter().map(|r| u8::from(r.dot(&free))));
        Ok(cw)
    }

    /// Generator row for free position `f` (transmission order): the
    /// codeword whose only nonzero free bit is `f`.
    pub fn generator_row(&self, f: usize) -> Vec<u8> {
        let mut cw = vec![0u8; self.n];
        cw[f] = 1;
        for (i, r) in self.parity_rows.iter().enumerate() {
            cw[self.dimension + i] = u8::from(r.get(f));
        }
        cw
    }

    /// Number of unsatisfied checks of a transmission-order word.
    pub fn syndrome_weight(&self, cw_tx: &[u8]) -> usize {
        self.checks
            .iter()
            .filter(|c| c.iter().fold(0u8, |acc, &v| acc ^ cw_tx[self.nat_to_tx[v]]) & 1 == 1)
            .count()
    }

    pub fn is_codeword(&self, cw_tx: &[u8]) -> bool {
        cw_tx.len() == self.n && self.syndrome_weight(cw_tx) == 0
    }

    /// Girth of the Tanner graph restricted to short cycles: returns 4, 6 or
    /// 8 (meaning "at least 8").
    pub fn short_cycle_girth(&self) -> usize {
        match &self.shifts {
            Some(s) => qc_girth(s, self.n / s[0].len()),
            None => 8,
        }
    }
}

/// Smallest cycle length (4, 6, or 8 for "none shorter") of the QC lifting.
pub fn qc_girth(shifts: &[Vec<usize>], z: usize) -> usize {
    let s: Vec<Vec<Option<usize>>> = shifts.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect();
    if has_cycle4(&s, z) {
        4
    } else if has_cycle6(&s, z) {
        6
    } else {
        8
    }
}

/// 4-cycles among the fixed (`Some`) entries.
fn has_cycle4(s: &[Vec<Option<usize>>], z: usize) -> bool {
    let (rows, cols) = (s.len(), s[0].len());
    for r1 in 0..rows {
        for r2 in r1 + 1..rows {
            for c1 in 0..cols {
                for c2 in c1 + 1..cols {
                    let (Some(a), Some(b), Some(c), Some(d)) = (s[r1][c1], s[r1][c2], s[r2][c2], s[r2][c1]) else {
                        continue;
                    };
                    if (a as i64 - b as i64 + c as i64 - d as i64).rem_euclid(z as i64) == 0 {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// 6-cycles among the fixed entries.
fn has_cycle6(s: &[Vec<Option<usize>>], z: usize) -> bool {
    let (rows, cols) = (s.len(), s[0].len());
    for r0 in 0..rows {
        for r1 in 0..rows {
            for r2 in 0..rows {
                if r0 == r1 || r1 == r2 || r0 == r2 {
                    continue;
                }
                for c0 in 0..cols {
                    for c1 in 0..cols {
                        for c2 in 0..cols {
                            if c0 == c1 || c1 == c2 || c0 == c2 {
                                continue;
                            }
                            let entries = [s[r0][c0], s[r0][c1], s[r1][c1], s[r1][c2], s[r2][c2], s[r2][c0]];
                            if entries.iter().any(Option::is_none) {
                                continue;
                            }
                            let v: Vec<i64> = entries.iter().map(|e| e.unwrap() as i64).collect();
                            if (v[0] - v[1] + v[2] - v[3] + v[4] - v[5]).rem_euclid(z as i64) == 0 {
                                return true;
                            }
                        }
                    }
                }
            }
        }
    }
    false
}

/// Greedy shift selection: first row and column zero, remaining entries
/// drawn at random and kept when they close no 4-cycle and, if possible, no
/// 6-cycle with the entries already fixed.
fn choose_shifts(seed: u64, z: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s: Vec<Vec<Option<usize>>> = (0..BASE_ROWS)
        .map(|r| (0..BASE_COLS).map(|c| (r == 0 || c == 0).then_some(0)).collect())
        .collect();
    for r in 1..BASE_ROWS {
        for c in 1..BASE_COLS {
            let mut fallback = None;
            let mut chosen = None;
            for _ in 0..CANDIDATES_PER_SHIFT {
                let v = rng.random_range(1..z);
                s[r][c] = Some(v);
                if has_cycle4(&s, z) {
                    continue;
                }
                fallback.get_or_insert(v);
                if !has_cycle6(&s, z) {
                    chosen = Some(v);
                    break;
                }
            }
            s[r][c] = Some(chosen.or(fallback).unwrap_or(1));
        }
    }
    s.into_iter().map(|r| r.into_iter().map(|v| v.unwrap_or(0)).collect()).collect()
}
