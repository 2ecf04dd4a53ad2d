//! Quasi-periodic delay-Doppler signals and discrete twisted convolution.
//!
//! A [`DDSignal`] stores one fundamental period `x[k, l]`, `0 <= k < M`,
//! `0 <= l < N`. Samples outside the period follow the quasi-periodic rule
//!
//! ```text
//! x[k + nM, l + mN] = x[k, l] * exp(j 2 pi n l / N)
//! ```
//!
//! and are produced on demand by [`DDSignal::extend`]. Samples are stored in
//! vector order: bin `(k, l)` lives at index `l * M + k` (the 1-based
//! `(lM + k + 1)`-th element in matrix notation).
//!
//! A [`DDTapSet`] is an aperiodic filter on `Z^2`. The discrete twisted
//! convolution of taps `h` with a signal `x` is
//!
//! ```text
//! y[k, l] = sum_{k', l'} h[k - k', l - l'] x[k', l'] exp(j 2 pi (l - l') k' / (MN))
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::{Complex, Error, LatticeParams, Result};

/// One fundamental period of a discrete quasi-periodic DD signal.
#[derive(Debug, Clone, PartialEq)]
pub struct DDSignal {
    params: LatticeParams,
    samples: Vec<Complex>,
}

impl DDSignal {
    pub fn zeros(params: LatticeParams) -> Self {
        Self {
            params,
            samples: vec![Complex::new(0.0, 0.0); params.size()],
        }
    }

    /// Builds a signal from `f(k, l)` evaluated on the fundamental domain.
    pub fn from_fn(params: LatticeParams, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut sig = Self::zeros(params);
        for l in 0..params.n() {
            for k in 0..params.m() {
                sig.samples[params.index(k, l)] = f(k, l);
            }
        }
        sig
    }

    /// Unit-energy pulse scaled by `amplitude` at bin `(k, l)`.
    pub fn pulse(params: LatticeParams, k: usize, l: usize, amplitude: Complex) -> Self {
        let mut sig = Self::zeros(params);
        sig.samples[params.index(k, l)] = amplitude;
        sig
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> Complex {
        self.samples[self.params.index(k, l)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, l: usize, v: Complex) {
        let idx = self.params.index(k, l);
        self.samples[idx] = v;
    }

    /// Samples in vector order (`l * M + k`).
    pub fn as_slice(&self) -> &[Complex] {
        &self.samples
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.samples
    }

    /// Value at any integer `(k, l)`, folding into the fundamental domain with
    /// the quasi-periodic phase.
    pub fn extend(&self, k: i64, l: i64) -> Complex {
        let (m, n) = (self.params.m() as i64, self.params.n() as i64);
        let k0 = k.rem_euclid(m);
        let wraps = k.div_euclid(m);
        let l0 = l.rem_euclid(n);
        let v = self.samples[(l0 * m + k0) as usize];
        if wraps == 0 || l0 == 0 {
            return v;
        }
        let turns = (wraps * l0).rem_euclid(n) as f64 / n as f64;
        v * Complex::from_polar(1.0, 2.0 * PI * turns)
    }

    /// Vectorized form: element `l * M + k` is sample `(k, l)`.
    pub fn vectorize(&self) -> Vec<Complex> {
        self.samples.clone()
    }

    pub fn devectorize(params: LatticeParams, v: Vec<Complex>) -> Result<Self> {
        if v.len() != params.size() {
            return Err(Error::LengthMismatch {
                expected: params.size(),
                actual: v.len(),
            });
        }
        Ok(Self { params, samples: v })
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `self + alpha * other`.
    pub fn axpy(&mut self, alpha: Complex, other: &DDSignal) -> Result<()> {
        if self.params != other.params {
            return Err(Error::LatticeMismatch);
        }
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: Complex) {
        for s in &mut self.samples {
            *s *= alpha;
        }
    }

    /// Squared Euclidean distance to another signal on the fundamental domain.
    pub fn distance_sqr(&self, other: &DDSignal) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }
}

/// Table of `exp(j 2 pi i / (MN))` for `i` in `0..MN`.
pub(crate) struct TwistTable {
    mn: i64,
    m: i64,
    roots: Vec<Complex>,
}

impl TwistTable {
    pub(crate) fn new(params: &LatticeParams) -> Self {
        let mn = params.size();
        let roots = (0..mn)
            .map(|i| Complex::from_polar(1.0, 2.0 * PI * i as f64 / mn as f64))
            .collect();
        Self {
            mn: mn as i64,
            m: params.m() as i64,
            roots,
        }
    }

    /// `exp(j 2 pi e / (MN))`.
    #[inline]
    pub(crate) fn root(&self, e: i64) -> Complex {
        self.roots[e.rem_euclid(self.mn) as usize]
    }

    /// `exp(j 2 pi i / (MN))` for `i < MN`.
    #[inline]
    pub(crate) fn root_at(&self, i: usize) -> Complex {
        self.roots[i]
    }

    /// Phase of the shift operator for tap `(a, b)` reading input position
    /// `(k - a, l - b)` folded to `(k0, l0)` with `wraps` delay periods:
    /// `exp(j 2 pi b (k - a) / MN) * exp(j 2 pi wraps l0 / N)`.
    #[inline]
    pub(crate) fn shift_phase(&self, b: i64, k_src: i64, wraps: i64, l0: i64) -> Complex {
        self.root(b * k_src + wraps * l0 * self.m)
    }
}

/// Aperiodic DD filter with finite support on `Z^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DDTapSet {
    params: LatticeParams,
    taps: BTreeMap<(i64, i64), Complex>,
}

/// Inclusive support box `(k_min, k_max, l_min, l_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Support {
    pub k_min: i64,
    pub k_max: i64,
    pub l_min: i64,
    pub l_max: i64,
}

impl DDTapSet {
    pub fn new(params: LatticeParams) -> Self {
        Self {
            params,
            taps: BTreeMap::new(),
        }
    }

    pub fn from_taps(
        params: LatticeParams,
        taps: impl IntoIterator<Item = ((i64, i64), Complex)>,
    ) -> Self {
        let mut set = Self::new(params);
        for (pos, h) in taps {
            set.add(pos.0, pos.1, h);
        }
        set
    }

    /// Single unit tap at the origin.
    pub fn identity(params: LatticeParams) -> Self {
        Self::from_taps(params, [((0, 0), Complex::new(1.0, 0.0))])
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    /// Accumulates `h` into tap `(k, l)`.
    pub fn add(&mut self, k: i64, l: i64, h: Complex) {
        *self.taps.entry((k, l)).or_insert(Complex::new(0.0, 0.0)) += h;
    }

    pub fn get(&self, k: i64, l: i64) -> Complex {
        self.taps.get(&(k, l)).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), Complex)> + '_ {
        self.taps.iter().map(|(&p, &h)| (p, h))
    }

    /// Smallest box containing every stored tap, `None` when empty.
    pub fn support(&self) -> Option<Support> {
        let mut it = self.taps.keys();
        let &(k0, l0) = it.next()?;
        let mut s = Support {
            k_min: k0,
            k_max: k0,
            l_min: l0,
            l_max: l0,
        };
        for &(k, l) in it {
            s.k_min = s.k_min.min(k);
            s.k_max = s.k_max.max(k);
            s.l_min = s.l_min.min(l);
            s.l_max = s.l_max.max(l);
        }
        Some(s)
    }

    pub fn max_abs(&self) -> f64 {
        self.taps.values().map(|h| h.norm()).fold(0.0, f64::max)
    }

    pub fn energy(&self) -> f64 {
        self.taps.values().map(|h| h.norm_sqr()).sum()
    }

    /// Drops taps whose magnitude is at most `threshold`.
    pub fn prune(&mut self, threshold: f64) {
        self.taps.retain(|_, h| h.norm() > threshold);
    }

    pub fn scaled(&self, alpha: Complex) -> Self {
        Self {
            params: self.params,
            taps: self.taps.iter().map(|(&p, &h)| (p, h * alpha)).collect(),
        }
    }

    /// Tap-wise `self - other` over the union of supports.
    pub fn difference(&self, other: &DDTapSet) -> Result<DDTapSet> {
        if self.params != other.params {
            return Err(Error::LatticeMismatch);
        }
        let mut out = self.clone();
        for (&(k, l), &h) in &other.taps {
            out.add(k, l, -h);
        }
        Ok(out)
    }

    /// Tap-set twisted convolution `self * other`, so that convolving a
    /// signal with the result equals convolving with `other` first and then
    /// with `self`.
    pub fn compose(&self, other: &DDTapSet) -> Result<DDTapSet> {
        if self.params != other.params {
            return Err(Error::LatticeMismatch);
        }
        let (Some(s1), Some(s2)) = (self.support(), other.support()) else {
            return Ok(DDTapSet::new(self.params));
        };
        let table = TwistTable::new(&self.params);
        // Dense accumulator over the output support box.
        let k_lo = s1.k_min + s2.k_min;
        let l_lo = s1.l_min + s2.l_min;
        let width = (s1.k_max + s2.k_max - k_lo + 1) as usize;
        let height = (s1.l_max + s2.l_max - l_lo + 1) as usize;
        let mut acc = vec![Complex::new(0.0, 0.0); width * height];
        let mut hit = vec![false; width * height];
        let rhs: Vec<((i64, i64), Complex)> = other.iter().collect();
        for (&(a1, b1), &h1) in &self.taps {
            for &((a2, b2), h2) in &rhs {
                let idx = (b1 + b2 - l_lo) as usize * width + (a1 + a2 - k_lo) as usize;
                acc[idx] += h1 * h2 * table.root(b1 * a2);
                hit[idx] = true;
            }
        }
        let taps = acc
            .into_iter()
            .zip(hit)
            .enumerate()
            .filter(|(_, (_, h))| *h)
            .map(|(i, (v, _))| ((k_lo + (i % width) as i64, l_lo + (i / width) as i64), v));
        Ok(DDTapSet::from_taps(self.params, taps))
    }

    /// Taps of the adjoint operator on the fundamental domain:
    /// `h_adj[a, b] = conj(h[-a, -b]) exp(j 2 pi a b / MN)`.
    pub fn adjoint(&self) -> DDTapSet {
        let table = TwistTable::new(&self.params);
        let taps = self
            .taps
            .iter()
            .map(|(&(a, b), &h)| ((-a, -b), h.conj() * table.root(a * b)));
        DDTapSet::from_taps(self.params, taps)
    }
}

/// Discrete twisted convolution `h *_sigma x` on the fundamental domain.
///
/// Cost is `O(MN * |taps|)`.
pub fn twisted_convolve(h: &DDTapSet, x: &DDSignal) -> Result<DDSignal> {
    if h.params != x.params {
        return Err(Error::LatticeMismatch);
    }
    let p = x.params;
    let (m, n) = (p.m() as i64, p.n() as i64);
    let table = TwistTable::new(&p);
    let mut y = DDSignal::zeros(p);
    let mut fold = vec![(0usize, 0i64); p.m()];
    for (&(a, b), &tap) in &h.taps {
        for (k, f) in fold.iter_mut().enumerate() {
            let ks = k as i64 - a;
            *f = (ks.rem_euclid(m) as usize, ks.div_euclid(m));
        }
        for l in 0..n {
            let l0 = (l - b).rem_euclid(n);
            let row_in = (l0 * m) as usize;
            let row_out = (l * m) as usize;
            for k in 0..m {
                let (k0, wraps) = fold[k as usize];
                let phase = table.shift_phase(b, k - a, wraps, l0);
                y.samples[row_out + k as usize] += tap * phase * x.samples[row_in + k0];
            }
        }
    }
    Ok(y)
}
