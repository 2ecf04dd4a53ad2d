//! Model-free acquisition from a single pilot, the vectorized channel matrix
//! and relative prediction error (RPE) maps.
//!
//! RPE is operationalized per DD bin `(k, l)`: send a unit symbol at that bin,
//! predict the response with the estimated taps, and compare with the true
//! noise-free response,
//!
//! ```text
//! RPE[k, l] = ||y_pred - y_true||^2 / ||y_true||^2
//! ```

use faer::Mat;

use crate::dd::{twisted_convolve, DDSignal, DDTapSet, TwistTable};
use crate::{Complex, Error, LatticeParams, Result};

/// Pilot placement, energy and read-off region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotConfig {
    pub k_p: usize,
    pub l_p: usize,
    /// Pilot energy `E_p`.
    pub energy: f64,
    /// Half-widths of the read-off region in delay and Doppler bins.
    pub r_k: usize,
    pub r_l: usize,
    /// Taps whose estimated magnitude falls below this are zeroed.
    pub threshold: f64,
}

impl PilotConfig {
    /// Pilot at `(M/2, N/2)` with `E_p = MN E_T`, the largest centred region
    /// and no threshold.
    pub fn centered(params: &LatticeParams, symbol_energy: f64) -> Self {
        let (m, n) = (params.m(), params.n());
        Self {
            k_p: m / 2,
            l_p: n / 2,
            energy: params.size() as f64 * symbol_energy,
            r_k: (m / 2).saturating_sub(1),
            r_l: (n / 2).saturating_sub(1),
            threshold: 0.0,
        }
    }

    /// Sets the threshold to `3 sqrt(N0 / E_p)`, three standard deviations of
    /// the per-tap estimation noise.
    pub fn with_noise_threshold(mut self, n0: f64) -> Self {
        self.threshold = 3.0 * (n0 / self.energy).sqrt();
        self
    }

    pub fn validate(&self, params: &LatticeParams) -> Result<()> {
        if self.k_p >= params.m() || self.l_p >= params.n() {
            return Err(Error::RegionOutOfBounds(format!(
                "pilot ({}, {}) outside the {}x{} grid",
                self.k_p,
                self.l_p,
                params.m(),
                params.n()
            )));
        }
        if 2 * self.r_k + 1 > params.m() || 2 * self.r_l + 1 > params.n() {
            return Err(Error::RegionOutOfBounds(format!(
                "read-off region {}x{} exceeds the {}x{} grid",
                2 * self.r_k + 1,
                2 * self.r_l + 1,
                params.m(),
                params.n()
            )));
        }
        if !(self.energy > 0.0) {
            return Err(Error::InvalidParameter("pilot energy must be positive".into()));
        }
        Ok(())
    }

    /// Pilot frame: `sqrt(E_p)` at `(k_p, l_p)`, zero elsewhere.
    pub fn frame(&self, params: &LatticeParams) -> DDSignal {
        DDSignal::pulse(*params, self.k_p, self.l_p, Complex::new(self.energy.sqrt(), 0.0))
    }
}

/// Reads the effective channel off the response to a pilot frame:
/// `h[dk, dl] = y(k_p + dk, l_p + dl) exp(-j 2 pi dl k_p / MN) / sqrt(E_p)`.
pub fn estimate_h_eff(received_pilot: &DDSignal, cfg: &PilotConfig) -> Result<DDTapSet> {
    let params = *received_pilot.params();
    cfg.validate(&params)?;
    let table = TwistTable::new(&params);
    let scale = 1.0 / cfg.energy.sqrt();
    let (kp, lp) = (cfg.k_p as i64, cfg.l_p as i64);
    let (rk, rl) = (cfg.r_k as i64, cfg.r_l as i64);
    let mut taps = DDTapSet::new(params);
    for dl in -rl..=rl {
        for dk in -rk..=rk {
            let v = received_pilot.extend(kp + dk, lp + dl) * table.root(-dl * kp) * scale;
            if v.norm() >= cfg.threshold && v != Complex::new(0.0, 0.0) {
                taps.add(dk, dl, v);
            }
        }
    }
    Ok(taps)
}

/// Dense `MN x MN` matrix of the DD input-output relation: row `lM + k` is
/// output bin `(k, l)`, column `l'M + k'` input bin `(k', l')`.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    params: LatticeParams,
    h: Mat<Complex>,
}

impl ChannelMatrix {
    /// Folds every tap's contribution, including delay and Doppler aliases of
    /// the quasi-periodic input, into the fundamental domain.
    pub fn build(taps: &DDTapSet) -> Self {
        let params = *taps.params();
        let (m, n) = (params.m() as i64, params.n() as i64);
        let mn = params.size();
        let table = TwistTable::new(&params);
        let list: Vec<((i64, i64), Complex)> = taps.iter().collect();
        let mu = m as usize;
        // Block row `l` holds the `M x M` blocks `(l, l0)`, each row-major,
        // so a tap's writes for one `l` stay inside a single block.
        let mut blocks = vec![Complex::new(0.0, 0.0); mn * mn];
        for l in 0..n {
            let block_row = &mut blocks[l as usize * mu * mn..][..mu * mn];
            for &((a, b), tap) in &list {
                let l0 = (l - b).rem_euclid(n);
                let block = &mut block_row[l0 as usize * mu * mu..][..mu * mu];
                // Source delay index `ks = k - a` for `k = 0`.
                let ks = -a;
                let mut k0 = ks.rem_euclid(m) as usize;
                let wraps = ks.div_euclid(m);
                // Phase index, advanced by `b` per step and by `l0 M` per wrap.
                let mut e = (b * ks + wraps * l0 * m).rem_euclid(mn as i64) as usize;
                let step = b.rem_euclid(mn as i64) as usize;
                let wrap_step = (l0 * m) as usize;
                for k in 0..mu {
                    block[k * mu + k0] += tap * table.root_at(e);
                    e += step;
                    if e >= mn {
                        e -= mn;
                    }
                    k0 += 1;
                    if k0 == mu {
                        k0 = 0;
                        e += wrap_step;
                        if e >= mn {
                            e -= mn;
                        }
                    }
                }
            }
        }
        let h = Mat::<Complex>::from_fn(mn, mn, |r, c| {
            let (k, l) = (r % mu, r / mu);
            let (k0, l0) = (c % mu, c / mu);
            blocks[l * mu * mn + l0 * mu * mu + k * mu + k0]
        });
        Self { params, h }
    }

    pub fn from_mat(params: LatticeParams, h: Mat<Complex>) -> Result<Self> {
        let mn = params.size();
        if h.nrows() != mn || h.ncols() != mn {
            return Err(Error::LengthMismatch {
                expected: mn,
                actual: h.nrows().max(h.ncols()),
            });
        }
        Ok(Self { params, h })
    }

    pub fn identity(params: LatticeParams) -> Self {
        let mn = params.size();
        Self {
            params,
            h: Mat::identity(mn, mn),
        }
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn mat(&self) -> &Mat<Complex> {
        &self.h
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.h[(row, col)]
    }

    /// `H x` for a vectorized input.
    pub fn apply_vec(&self, x: &[Complex]) -> Result<Vec<Complex>> {
        let mn = self.params.size();
        if x.len() != mn {
            return Err(Error::LengthMismatch {
                expected: mn,
                actual: x.len(),
            });
        }
        let mut y = vec![Complex::new(0.0, 0.0); mn];
        for (c, xc) in x.iter().enumerate() {
            if *xc == Complex::new(0.0, 0.0) {
                continue;
            }
            let col = self.h.col(c);
            for (yr, hr) in y.iter_mut().zip(col.iter()) {
                *yr += hr * xc;
            }
        }
        Ok(y)
    }

    pub fn apply(&self, x: &DDSignal) -> Result<DDSignal> {
        if *x.params() != self.params {
            return Err(Error::LatticeMismatch);
        }
        DDSignal::devectorize(self.params, self.apply_vec(x.as_slice())?)
    }

    /// `H^H y`.
    pub fn apply_adjoint_vec(&self, y: &[Complex]) -> Result<Vec<Complex>> {
        let mn = self.params.size();
        if y.len() != mn {
            return Err(Error::LengthMismatch {
                expected: mn,
                actual: y.len(),
            });
        }
        Ok((0..mn)
            .map(|c| {
                self.h
                    .col(c)
                    .iter()
                    .zip(y)
                    .map(|(h, v)| h.conj() * v)
                    .sum()
            })
            .collect())
    }
}

/// Taps of `H^H H` for `H = build(taps)`: the adjoint composed with the
/// channel.
pub fn gram_taps(taps: &DDTapSet) -> Result<DDTapSet> {
    taps.adjoint().compose(taps)
}

/// Per-bin RPE map, stored in vector order `lM + k`. Bins whose true
/// response vanishes are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct RpeMap {
    params: LatticeParams,
    values: Vec<f64>,
}

impl RpeMap {
    pub fn new(params: LatticeParams, values: Vec<f64>) -> Result<Self> {
        if values.len() != params.size() {
            return Err(Error::LengthMismatch {
                expected: params.size(),
                actual: values.len(),
            });
        }
        Ok(Self { params, values })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.values[self.params.index(k, l)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Element-wise mean of several maps; undefined bins are skipped.
    pub fn average(maps: &[RpeMap]) -> Result<RpeMap> {
        let first = maps.first().ok_or_else(|| Error::InvalidParameter("no maps to average".into()))?;
        let params = first.params;
        let mut sum = vec![0.0; params.size()];
        let mut count = vec![0usize; params.size()];
        for map in maps {
            if map.params != params {
                return Err(Error::LatticeMismatch);
            }
            for (i, v) in map.values.iter().enumerate() {
                if v.is_finite() {
                    sum[i] += v;
                    count[i] += 1;
                }
            }
        }
        let values = sum
            .into_iter()
            .zip(count)
            .map(|(s, c)| if c == 0 { f64::NAN } else { s / c as f64 })
            .collect();
        Ok(RpeMap { params, values })
    }

    /// Fraction of bins with RPE strictly below `threshold`.
    pub fn fraction_below(&self, threshold: f64) -> f64 {
        let below = self.values.iter().filter(|v| **v < threshold).count();
        below as f64 / self.values.len() as f64
    }

    /// Mean Doppler offset from row `l_ref` of the bins below `threshold`,
    /// with offsets wrapped into `[-N/2, N/2)`. `None` if no bin qualifies.
    pub fn doppler_centroid_offset(&self, threshold: f64, l_ref: usize) -> Option<f64> {
        let n = self.params.n() as i64;
        let mut sum = 0.0;
        let mut count = 0usize;
        for (i, v) in self.values.iter().enumerate() {
            if *v < threshold {
                let (_, l) = self.params.bin(i);
                let d = (l as i64 - l_ref as i64 + n / 2).rem_euclid(n) - n / 2;
                sum += d as f64;
                count += 1;
            }
        }
        (count > 0).then(|| sum / count as f64)
    }

    /// Mean RPE over the defined bins.
    pub fn mean(&self) -> f64 {
        let finite: Vec<f64> = self.values.iter().copied().filter(|v| v.is_finite()).collect();
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

/// Squared norm of every column of `build(taps)`: the energy of the response
/// to a unit symbol at each bin, in vector order.
pub fn column_energies(taps: &DDTapSet) -> Vec<f64> {
    let params = *taps.params();
    let (m, n) = (params.m() as i64, params.n() as i64);
    let table = TwistTable::new(&params);
    let list: Vec<((i64, i64), Complex)> = taps.iter().collect();
    let mut scratch = vec![Complex::new(0.0, 0.0); params.size()];
    let mut touched = Vec::with_capacity(list.len());
    let mut out = vec![0.0; params.size()];
    for lp in 0..n {
        for kp in 0..m {
            for &((a, b), h) in &list {
                // Input at (kp, lp) reaches extended output (kp + a, lp + b)
                // with phase exp(j 2 pi b kp / MN); fold back with the
                // quasi-periodic phase.
                let (ko, lo) = (kp + a, lp + b);
                let (k0, l0) = (ko.rem_euclid(m), lo.rem_euclid(n));
                let wraps = ko.div_euclid(m);
                let v = h * table.root(b * kp) * table.root(-wraps * l0 * m);
                let idx = (l0 * m + k0) as usize;
                if scratch[idx] == Complex::new(0.0, 0.0) {
                    touched.push(idx);
                }
                scratch[idx] += v;
            }
            let idx = (lp * m + kp) as usize;
            out[idx] = touched.iter().map(|&i| scratch[i].norm_sqr()).sum();
            for &i in &touched {
                scratch[i] = Complex::new(0.0, 0.0);
            }
            touched.clear();
        }
    }
    out
}

/// RPE map of `estimated` against the true effective channel `truth`, both
/// as tap sets.
pub fn rpe_from_taps(truth: &DDTapSet, estimated: &DDTapSet) -> Result<RpeMap> {
    let diff = estimated.difference(truth)?;
    let num = column_energies(&diff);
    let den = column_energies(truth);
    let values = num
        .into_iter()
        .zip(den)
        .map(|(e, t)| if t > 0.0 { e / t } else { f64::NAN })
        .collect();
    RpeMap::new(*truth.params(), values)
}

/// RPE map against an arbitrary noise-free channel: `true_response` maps a
/// DD input frame to the received DD frame (for instance the time-domain
/// simulation path). One call per bin.
pub fn compute_rpe<F>(true_response: F, estimated: &DDTapSet, params: &LatticeParams) -> Result<RpeMap>
where
    F: Fn(&DDSignal) -> Result<DDSignal>,
{
    if estimated.params() != params {
        return Err(Error::LatticeMismatch);
    }
    let mut values = Vec::with_capacity(params.size());
    for idx in 0..params.size() {
        let (k, l) = params.bin(idx);
        let x = DDSignal::pulse(*params, k, l, Complex::new(1.0, 0.0));
        let y_true = true_response(&x)?;
        let y_pred = twisted_convolve(estimated, &x)?;
        let den = y_true.energy();
        values.push(if den > 0.0 { y_pred.distance_sqr(&y_true) / den } else { f64::NAN });
    }
    RpeMap::new(*params, values)
}
