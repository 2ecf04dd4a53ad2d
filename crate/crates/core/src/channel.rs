//! Doubly-spread channel: path draws, effective DD channel, time-domain
//! simulation path and AWGN.
//!
//! Two independent routes produce the received lattice samples:
//!
//! - DD route: [`compute_h_eff`] integrates `w_rx *_sigma h_phy *_sigma w_tx`
//!   on a `Q`-oversampled grid and samples it on the information lattice; the
//!   received signal is then [`crate::dd::twisted_convolve`] of those taps.
//! - TD route: [`TdSimulator`] synthesizes the transmitted waveform from
//!   lattice impulses, applies each path as a delayed, Doppler-shifted copy,
//!   matched-filters, samples at rate `B` and folds the samples back through
//!   the Zak transform.
//!
//! The routes share only the filter definitions.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dd::{DDSignal, DDTapSet};
use crate::filters::FilterSpec;
use crate::zak::{forward_zak_samples, TDFrame};
use crate::{Complex, Error, LatticeParams, Result};

/// Relative magnitude below which effective-channel taps are discarded.
pub const TAP_FLOOR: f64 = 1e-5;

/// Number of frame periods simulated on the time-domain route.
pub const TD_PERIODS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex,
    /// Delay in seconds.
    pub delay: f64,
    /// Doppler shift in Hz.
    pub doppler: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub paths: Vec<Path>,
}

impl ChannelRealization {
    pub fn new(paths: Vec<Path>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::EmptyChannel);
        }
        if paths.iter().any(|p| !(p.delay >= 0.0)) {
            return Err(Error::InvalidParameter("path delays must be non-negative".into()));
        }
        Ok(Self { paths })
    }

    /// Single path with unit gain.
    pub fn single(delay: f64, doppler: f64) -> Self {
        Self {
            paths: vec![Path {
                gain: Complex::new(1.0, 0.0),
                delay,
                doppler,
            }],
        }
    }

    pub fn max_delay(&self) -> f64 {
        self.paths.iter().map(|p| p.delay).fold(0.0, f64::max)
    }

    pub fn max_doppler(&self) -> f64 {
        self.paths.iter().map(|p| p.doppler.abs()).fold(0.0, f64::max)
    }

    pub fn power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }
}

/// Delay spread below `tau_p` and Doppler spread below `nu_p`.
pub fn is_crystallized(ch: &ChannelRealization, params: &LatticeParams) -> bool {
    ch.max_delay() < params.delay_period() && 2.0 * ch.max_doppler() < params.doppler_period()
}

/// Power-delay profile with a maximum Doppler shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    /// Relative path delays in microseconds.
    pub delays_us: Vec<f64>,
    /// Relative path powers in dB.
    pub powers_db: Vec<f64>,
}

impl ChannelProfile {
    /// ITU Vehicular-A, six paths.
    pub fn veh_a() -> Self {
        Self {
            delays_us: vec![0.0, 0.31, 0.71, 1.09, 1.73, 2.51],
            powers_db: vec![0.0, -1.0, -9.0, -10.0, -15.0, -20.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delays_us.is_empty() {
            return Err(Error::EmptyChannel);
        }
        if self.delays_us.len() != self.powers_db.len() {
            return Err(Error::Config("channel profile delays and powers differ in length".into()));
        }
        if self.delays_us.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::Config("channel profile delays must be non-negative".into()));
        }
        Ok(())
    }

    /// Linear path powers normalized to sum to one.
    pub fn normalized_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.powers_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }

    /// Draws Rayleigh path gains with the profile's variances and Doppler
    /// shifts `nu_max cos(theta)`, `theta ~ U[0, 2 pi)`.
    pub fn draw<R: Rng + ?Sized>(&self, nu_max: f64, rng: &mut R) -> ChannelRealization {
        let powers = self.normalized_powers();
        let paths = self
            .delays_us
            .iter()
            .zip(powers)
            .map(|(&d, p)| {
                let s = (p / 2.0).sqrt();
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                let theta = rng.random_range(0.0..2.0 * PI);
                Path {
                    gain: Complex::new(s * re, s * im),
                    delay: d * 1e-6,
                    doppler: nu_max * theta.cos(),
                }
            })
            .collect();
        ChannelRealization { paths }
    }
}

/// Veh-A draw from a seed.
pub fn draw_veh_a(nu_max: f64, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ChannelProfile::veh_a().draw(nu_max, &mut rng)
}

#[inline]
fn trapezoid_weight(i: i64, half: i64) -> f64 {
    if i.abs() == half {
        0.5
    } else {
        1.0
    }
}

/// Effective DD channel `h_eff[k, l] = h_eff(k/B, l/T)` of
/// `w_rx *_sigma h_phy *_sigma w_tx`.
///
/// For each path the double integral over `(tau', nu')` is a trapezoid sum on
/// the `Q`-oversampled grid. The twist `exp(j 2 pi nu' (tau - tau'))` couples
/// the two axes; it is expanded as a short power series in the normalized grid
/// indices so the sum factors into per-delay and per-Doppler moments. The
/// series is truncated once its remainder drops below machine precision.
/// Taps below [`TAP_FLOOR`] times the largest tap are dropped.
pub fn compute_h_eff(
    ch: &ChannelRealization,
    w_tx: &FilterSpec,
    w_rx: &FilterSpec,
    params: &LatticeParams,
    oversampling: usize,
) -> Result<DDTapSet> {
    let mut taps = raw_h_eff(ch, w_tx, w_rx, params, oversampling)?;
    let floor = TAP_FLOOR * taps.max_abs();
    taps.prune(floor);
    Ok(taps)
}

/// [`compute_h_eff`] without the relative floor.
pub fn raw_h_eff(
    ch: &ChannelRealization,
    w_tx: &FilterSpec,
    w_rx: &FilterSpec,
    params: &LatticeParams,
    oversampling: usize,
) -> Result<DDTapSet> {
    if oversampling < 1 {
        return Err(Error::InvalidParameter("oversampling Q must be >= 1".into()));
    }
    if ch.paths.is_empty() {
        return Err(Error::EmptyChannel);
    }
    w_tx.validate()?;
    w_rx.validate()?;
    let mut taps = DDTapSet::new(*params);
    for path in &ch.paths {
        path_h_eff(path, w_tx, w_rx, params, oversampling, &mut taps);
    }
    Ok(taps)
}

fn path_h_eff(
    path: &Path,
    w_tx: &FilterSpec,
    w_rx: &FilterSpec,
    params: &LatticeParams,
    q: usize,
    out: &mut DDTapSet,
) {
    let qf = q as f64;
    let qi = q as i64;
    let mn = params.size() as f64;
    let big_l = qf * qf * mn;
    let dtau = path.delay * params.bandwidth();
    let dnu = path.doppler * params.duration();

    // Delay axis: rx grid a in [-Q Kr, Q Kr]; tx support bounds k.
    let half_a = qi * w_rx.span_tau as i64;
    let span_t = w_tx.span_tau as f64;
    let k_lo = (dtau - span_t - w_rx.span_tau as f64).floor() as i64;
    let k_hi = (dtau + span_t + w_rx.span_tau as f64).ceil() as i64;
    let d0 = qi * dtau.round() as i64;

    // Doppler axis.
    let half_b = qi * w_rx.span_nu as i64;
    let span_n = w_tx.span_nu as f64;
    let l_lo = (dnu - span_n - w_rx.span_nu as f64).floor() as i64;
    let l_hi = (dnu + span_n + w_rx.span_nu as f64).ceil() as i64;

    let d_max = ((qi * k_lo - half_a - d0).abs()).max((qi * k_hi + half_a - d0).abs()).max(1) as f64;
    let b_max = half_b.max(1) as f64;
    let theta = 2.0 * PI * b_max * d_max / big_l;
    let terms = series_terms(theta);

    let rx_delay: Vec<f64> = (-half_a..=half_a)
        .map(|a| trapezoid_weight(a, half_a) * w_rx.delay_pulse(a as f64 / qf))
        .collect();
    let rx_doppler: Vec<f64> = (-half_b..=half_b)
        .map(|b| trapezoid_weight(b, half_b) * w_rx.doppler_pulse(b as f64 / qf))
        .collect();

    // Delay moments: sum_a A(k, a) (d'/d_max)^p with d' = Qk - a - d0.
    let nk = (k_hi - k_lo + 1) as usize;
    let mut delay_mom = vec![Complex::new(0.0, 0.0); nk * terms];
    let nu_over_b = path.doppler / params.bandwidth();
    for (ki, k) in (k_lo..=k_hi).enumerate() {
        let mom = &mut delay_mom[ki * terms..(ki + 1) * terms];
        for (ai, a) in (-half_a..=half_a).enumerate() {
            let r = rx_delay[ai];
            if r == 0.0 {
                continue;
            }
            let x = k as f64 - a as f64 / qf;
            let t = w_tx.delay_pulse(x - dtau);
            if t == 0.0 {
                continue;
            }
            let val = Complex::from_polar(r * t, 2.0 * PI * nu_over_b * x);
            let u = (qi * k - a - d0) as f64 / d_max;
            let mut pw = 1.0;
            for m in mom.iter_mut() {
                *m += val * pw;
                pw *= u;
            }
        }
    }

    // Doppler moments: sum_b B(l, b) exp(j 2 pi b d0 / L) (b/b_max)^p.
    let nl = (l_hi - l_lo + 1) as usize;
    let mut doppler_mom = vec![Complex::new(0.0, 0.0); nl * terms];
    let centre: Vec<Complex> = (-half_b..=half_b)
        .map(|b| Complex::from_polar(1.0, 2.0 * PI * ((b * d0) as f64 / big_l)))
        .collect();
    for (li, l) in (l_lo..=l_hi).enumerate() {
        let mom = &mut doppler_mom[li * terms..(li + 1) * terms];
        for (bi, b) in (-half_b..=half_b).enumerate() {
            let r = rx_doppler[bi];
            if r == 0.0 {
                continue;
            }
            let t = w_tx.doppler_pulse(l as f64 - b as f64 / qf - dnu);
            if t == 0.0 {
                continue;
            }
            let val = centre[bi] * (r * t);
            let u = b as f64 / b_max;
            let mut pw = 1.0;
            for m in mom.iter_mut() {
                *m += val * pw;
                pw *= u;
            }
        }
    }

    // Series coefficients (j theta)^p / p!.
    let mut coef = Vec::with_capacity(terms);
    let mut c = Complex::new(1.0, 0.0);
    for p in 0..terms {
        coef.push(c);
        c *= Complex::new(0.0, theta) / (p + 1) as f64;
    }
    let pref = path.gain * Complex::from_polar(1.0 / (qf * qf), -2.0 * PI * path.doppler * path.delay);
    for (ki, k) in (k_lo..=k_hi).enumerate() {
        let dm = &delay_mom[ki * terms..(ki + 1) * terms];
        if dm[0] == Complex::new(0.0, 0.0) && dm.iter().all(|v| v.norm_sqr() == 0.0) {
            continue;
        }
        for (li, l) in (l_lo..=l_hi).enumerate() {
            let lm = &doppler_mom[li * terms..(li + 1) * terms];
            let mut acc = Complex::new(0.0, 0.0);
            for p in 0..terms {
                acc += coef[p] * dm[p] * lm[p];
            }
            if acc != Complex::new(0.0, 0.0) {
                out.add(k, l, pref * acc);
            }
        }
    }
}

/// Number of power-series terms so that `theta^P / P!` is below 1e-17.
fn series_terms(theta: f64) -> usize {
    let mut term = 1.0;
    let mut p = 0usize;
    while p < 200 {
        p += 1;
        term *= theta / p as f64;
        if term < 1e-17 {
            break;
        }
    }
    p + 1
}

/// Time-domain simulation path for Zak-OTFS frames.
///
/// The critically sampled frame is extended periodically over
/// [`TD_PERIODS`] frame periods centred on time zero. Each rate-`B` impulse is
/// weighted by the transmit Doppler window (the inverse Fourier transform of
/// the Doppler pulse, a time window about one frame long) and interpolated by
/// the transmit delay pulse onto a `Q`-oversampled grid, separately for each
/// path's delay. Paths add with their gains and Doppler tones. The receiver
/// applies its own window, integrates against the receive delay pulse,
/// samples at rate `B` and folds the samples over delay periods with the
/// Zak phase.
#[derive(Debug, Clone)]
pub struct TdSimulator {
    params: LatticeParams,
    w_tx: FilterSpec,
    q: usize,
    /// Impulse index range `[q_lo, q_hi)`.
    q_lo: i64,
    q_hi: i64,
    /// Grid index of `window_tx[0]` / `window_rx[0]`.
    g_lo: i64,
    window_tx: Vec<f64>,
    window_rx: Vec<f64>,
    rx_delay: Vec<f64>,
}

impl TdSimulator {
    pub fn new(
        params: LatticeParams,
        w_tx: FilterSpec,
        w_rx: FilterSpec,
        oversampling: usize,
    ) -> Result<Self> {
        Self::with_periods(params, w_tx, w_rx, oversampling, TD_PERIODS)
    }

    /// As [`TdSimulator::new`] with `periods` frame periods simulated instead
    /// of [`TD_PERIODS`].
    pub fn with_periods(
        params: LatticeParams,
        w_tx: FilterSpec,
        w_rx: FilterSpec,
        oversampling: usize,
        periods: usize,
    ) -> Result<Self> {
        if oversampling < 1 {
            return Err(Error::InvalidParameter("oversampling Q must be >= 1".into()));
        }
        if periods < 1 {
            return Err(Error::InvalidParameter("at least one frame period must be simulated".into()));
        }
        w_tx.validate()?;
        w_rx.validate()?;
        let q = oversampling as i64;
        let mn = params.size() as i64;
        let half_span = (periods as i64 * mn) / 2;
        let (q_lo, q_hi) = (-half_span, periods as i64 * mn - half_span);
        let margin = q * (w_rx.span_tau.max(w_tx.span_tau) as i64 + 2);
        let g_lo = q * q_lo - margin;
        let g_hi = q * q_hi + margin;
        let window_tx = doppler_window(&w_tx, &params, oversampling, g_lo, g_hi);
        let window_rx = doppler_window(&w_rx, &params, oversampling, g_lo, g_hi);
        let half_a = q * w_rx.span_tau as i64;
        let rx_delay = (-half_a..=half_a)
            .map(|a| trapezoid_weight(a, half_a) * w_rx.delay_pulse(a as f64 / q as f64))
            .collect();
        Ok(Self {
            params,
            w_tx,
            q: oversampling,
            q_lo,
            q_hi,
            g_lo,
            window_tx,
            window_rx,
            rx_delay,
        })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    /// Received, matched-filtered, lattice-sampled DD signal for a
    /// noise-free channel.
    pub fn apply(&self, ch: &ChannelRealization, frame: &TDFrame) -> Result<DDSignal> {
        if *frame.params() != self.params {
            return Err(Error::LatticeMismatch);
        }
        let mn = self.params.size() as i64;
        let s = frame.samples();
        let impulses: Vec<Complex> = (self.q_lo..self.q_hi)
            .map(|qi| {
                let w = self.window_tx[(self.q as i64 * qi - self.g_lo) as usize];
                s[qi.rem_euclid(mn) as usize] * w
            })
            .collect();
        let grid = channel_on_grid(
            ch,
            &self.w_tx,
            &self.params,
            self.q,
            self.q_lo,
            &impulses,
            self.g_lo,
            self.window_tx.len(),
        );
        let m = self.params.m() as i64;
        let n = self.params.n() as i64;
        let mut folded = vec![Complex::new(0.0, 0.0); mn as usize];
        let half_a = (self.rx_delay.len() / 2) as i64;
        let qq = self.q as i64;
        for p in self.q_lo..self.q_hi {
            let centre = qq * p - self.g_lo;
            let mut acc = Complex::new(0.0, 0.0);
            for (ai, w) in self.rx_delay.iter().enumerate() {
                let g = (centre - (ai as i64 - half_a)) as usize;
                acc += grid[g] * (w * self.window_rx[g]);
            }
            let k = p.rem_euclid(m);
            let wraps = p.div_euclid(m).rem_euclid(n);
            folded[(k + wraps * m) as usize] += acc;
        }
        let mut out = forward_zak_samples(&self.params, &folded)?;
        out.scale(Complex::new(1.0 / self.q as f64, 0.0));
        Ok(out)
    }
}

/// `omega(g) = (1/Q) sum_b w_b w2(b/Q) cos(2 pi b g / (Q^2 MN))` for grid
/// indices `g` in `[g_lo, g_hi)`: the Doppler pulse's inverse Fourier
/// transform at time `g / (QB)`, scaled by `T`.
fn doppler_window(
    spec: &FilterSpec,
    params: &LatticeParams,
    oversampling: usize,
    g_lo: i64,
    g_hi: i64,
) -> Vec<f64> {
    let q = oversampling as i64;
    let len = (q * q) as usize * params.size();
    let half_b = q * spec.span_nu as i64;
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    for b in -half_b..=half_b {
        let v = trapezoid_weight(b, half_b) * spec.doppler_pulse(b as f64 / q as f64) / q as f64;
        buf[b.rem_euclid(len as i64) as usize] += Complex::new(v, 0.0);
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    (g_lo..g_hi)
        .map(|g| buf[g.rem_euclid(len as i64) as usize].re)
        .collect()
}

/// Received signal before the receive filter, on the grid `g / (QB)` for
/// `g in [g_lo, g_lo + len)`, for rate-`B` impulses `amps[i]` at index
/// `q_first + i`.
#[allow(clippy::too_many_arguments)]
fn channel_on_grid(
    ch: &ChannelRealization,
    w_tx: &FilterSpec,
    params: &LatticeParams,
    oversampling: usize,
    q_first: i64,
    amps: &[Complex],
    g_lo: i64,
    len: usize,
) -> Vec<Complex> {
    let q = oversampling as i64;
    let qf = oversampling as f64;
    let b = params.bandwidth();
    let mut out = vec![Complex::new(0.0, 0.0); len];
    let mut acc = vec![Complex::new(0.0, 0.0); len];
    for path in &ch.paths {
        let dtau = path.delay * b;
        let span = w_tx.span_tau as f64;
        // Offsets o = g - Q q with |o/Q - dtau| <= span.
        let o_lo = (qf * (dtau - span)).ceil() as i64;
        let o_hi = (qf * (dtau + span)).floor() as i64;
        let taps: Vec<f64> = (o_lo..=o_hi)
            .map(|o| w_tx.delay_pulse(o as f64 / qf - dtau))
            .collect();
        acc.iter_mut().for_each(|v| *v = Complex::new(0.0, 0.0));
        for (i, &amp) in amps.iter().enumerate() {
            if amp == Complex::new(0.0, 0.0) {
                continue;
            }
            let base = q * (q_first + i as i64) + o_lo - g_lo;
            let start = base.max(0);
            let end = (base + taps.len() as i64).min(len as i64);
            for g in start..end {
                acc[g as usize] += amp * taps[(g - base) as usize];
            }
        }
        let step = 2.0 * PI * path.doppler / (qf * b);
        let offset = -2.0 * PI * path.doppler * path.delay;
        for (gi, (o, a)) in out.iter_mut().zip(&acc).enumerate() {
            if *a == Complex::new(0.0, 0.0) {
                continue;
            }
            let g = g_lo + gi as i64;
            *o += path.gain * Complex::from_polar(1.0, step * g as f64 + offset) * a;
        }
    }
    out
}

/// Convenience wrapper building a [`TdSimulator`] for a single call.
pub fn apply_td(
    ch: &ChannelRealization,
    frame: &TDFrame,
    w_tx: &FilterSpec,
    w_rx: &FilterSpec,
    params: &LatticeParams,
    oversampling: usize,
) -> Result<DDSignal> {
    TdSimulator::new(*params, *w_tx, *w_rx, oversampling)?.apply(ch, frame)
}

/// Time-domain channel for a finite burst of `M * N` rate-`B` samples with no
/// periodic extension and no Doppler windows: band-limiting transmit pulse,
/// physical paths, matched receive pulse, sampling at rate `B`. Samples that
/// leave the burst are lost and nothing enters from outside it.
#[derive(Debug, Clone)]
pub struct BurstChannel {
    params: LatticeParams,
    w_tx: FilterSpec,
    q: usize,
    rx_delay: Vec<f64>,
}

impl BurstChannel {
    pub fn new(params: LatticeParams, w_tx: FilterSpec, w_rx: FilterSpec, oversampling: usize) -> Result<Self> {
        if oversampling < 1 {
            return Err(Error::InvalidParameter("oversampling Q must be >= 1".into()));
        }
        w_tx.validate()?;
        w_rx.validate()?;
        let q = oversampling as i64;
        let half_a = q * w_rx.span_tau as i64;
        let rx_delay = (-half_a..=half_a)
            .map(|a| trapezoid_weight(a, half_a) * w_rx.delay_pulse(a as f64 / q as f64))
            .collect();
        Ok(Self {
            params,
            w_tx,
            q: oversampling,
            rx_delay,
        })
    }

    pub fn apply(&self, ch: &ChannelRealization, samples: &[Complex]) -> Result<Vec<Complex>> {
        let mn = self.params.size();
        if samples.len() != mn {
            return Err(Error::LengthMismatch {
                expected: mn,
                actual: samples.len(),
            });
        }
        let q = self.q as i64;
        let half_a = (self.rx_delay.len() / 2) as i64;
        let g_lo = -half_a - q;
        let len = (q * mn as i64 + 2 * half_a + 2 * q) as usize;
        let grid = channel_on_grid(ch, &self.w_tx, &self.params, self.q, 0, samples, g_lo, len);
        let out = (0..mn as i64)
            .map(|p| {
                let centre = q * p - g_lo;
                let mut acc = Complex::new(0.0, 0.0);
                for (ai, w) in self.rx_delay.iter().enumerate() {
                    acc += grid[(centre - (ai as i64 - half_a)) as usize] * *w;
                }
                acc / self.q as f64
            })
            .collect();
        Ok(out)
    }
}

impl BurstChannel {
    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    /// Sample-domain response matrix of the burst. Unit samples spaced wider
    /// than the impulse response are sent together, so the result agrees
    /// with [`BurstChannel::apply`] up to rounding.
    pub fn response(&self, ch: &ChannelRealization) -> Result<BurstResponse> {
        let mn = self.params.size();
        let spans = self.w_tx.span_tau + self.rx_delay.len() / (2 * self.q) + 2;
        let late = ch.max_delay() * self.params.bandwidth();
        let before = spans;
        let after = spans + late.ceil() as usize;
        let stride = (before + after + 1).min(mn);
        let mut cols = vec![(0, Vec::new()); mn];
        let mut comb = vec![Complex::new(0.0, 0.0); mn];
        for r in 0..stride {
            comb.iter_mut().for_each(|v| *v = Complex::new(0.0, 0.0));
            for q in (r..mn).step_by(stride) {
                comb[q] = Complex::new(1.0, 0.0);
            }
            let out = self.apply(ch, &comb)?;
            for q in (r..mn).step_by(stride) {
                let lo = q.saturating_sub(before);
                let hi = (q + after + 1).min(mn);
                cols[q] = (lo, out[lo..hi].to_vec());
            }
        }
        Ok(BurstResponse { mn, cols })
    }
}

/// Banded sample-domain matrix of a [`BurstChannel`]; column `q` is stored
/// as its first row index and the rows that follow.
#[derive(Debug, Clone)]
pub struct BurstResponse {
    mn: usize,
    cols: Vec<(usize, Vec<Complex>)>,
}

impl BurstResponse {
    pub fn apply(&self, samples: &[Complex]) -> Result<Vec<Complex>> {
        if samples.len() != self.mn {
            return Err(Error::LengthMismatch {
                expected: self.mn,
                actual: samples.len(),
            });
        }
        let mut out = vec![Complex::new(0.0, 0.0); self.mn];
        for ((lo, col), &s) in self.cols.iter().zip(samples) {
            if s == Complex::new(0.0, 0.0) {
                continue;
            }
            for (o, g) in out[*lo..].iter_mut().zip(col) {
                *o += g * s;
            }
        }
        Ok(out)
    }
}

/// Adds circularly-symmetric complex Gaussian noise of variance `n0` per bin.
pub fn add_noise(sig: &DDSignal, n0: f64, seed: u64) -> DDSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add_noise_with(sig, n0, &mut rng)
}

pub fn add_noise_with<R: Rng + ?Sized>(sig: &DDSignal, n0: f64, rng: &mut R) -> DDSignal {
    let mut out = sig.clone();
    add_noise_in_place(out.as_mut_slice(), n0, rng);
    out
}

pub fn add_noise_in_place<R: Rng + ?Sized>(samples: &mut [Complex], n0: f64, rng: &mut R) {
    if n0 <= 0.0 {
        return;
    }
    let s = (n0 / 2.0).sqrt();
    for v in samples {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *v += Complex::new(s * re, s * im);
    }
}
