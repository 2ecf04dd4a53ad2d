//! Multicarrier OTFS comparison modem.
//!
//! DD symbols are spread onto an `N x M` time-frequency grid by the ISFFT and
//! sent as `N` slots of `M` subcarriers with rectangular pulses and no cyclic
//! prefix. The receiver reverses both steps. Acquisition reads a kernel off
//! the pilot response under the usual MC-OTFS model, in which the channel
//! acts as a 2-D periodic convolution on the DD grid. That model breaks down
//! as Doppler spread grows.

use std::sync::Arc;

use faer::Mat;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::acquisition::{ChannelMatrix, PilotConfig, RpeMap};
use crate::channel::{add_noise_in_place, BurstChannel, ChannelRealization};
use crate::dd::DDSignal;
use crate::equalizer::{EqualizerOutput, MmseEqualizer};
use crate::filters::FilterSpec;
use crate::zak::TDFrame;
use crate::{Complex, Error, LatticeParams, Result};

/// Time-frequency grid, slot `n` major: entry `(n, m)` at `n M + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TFGrid {
    params: LatticeParams,
    data: Vec<Complex>,
}

impl TFGrid {
    pub fn zeros(params: LatticeParams) -> Self {
        Self {
            params,
            data: vec![Complex::new(0.0, 0.0); params.size()],
        }
    }

    pub fn from_vec(params: LatticeParams, data: Vec<Complex>) -> Result<Self> {
        if data.len() != params.size() {
            return Err(Error::LengthMismatch {
                expected: params.size(),
                actual: data.len(),
            });
        }
        Ok(Self { params, data })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn get(&self, n: usize, m: usize) -> Complex {
        self.data[n * self.params.m() + m]
    }

    pub fn set(&mut self, n: usize, m: usize, v: Complex) {
        let idx = n * self.params.m() + m;
        self.data[idx] = v;
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

struct Plans {
    fwd_m: Arc<dyn Fft<f64>>,
    inv_m: Arc<dyn Fft<f64>>,
    fwd_n: Arc<dyn Fft<f64>>,
    inv_n: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(params: &LatticeParams) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd_m: planner.plan_fft_forward(params.m()),
            inv_m: planner.plan_fft_inverse(params.m()),
            fwd_n: planner.plan_fft_forward(params.n()),
            inv_n: planner.plan_fft_inverse(params.n()),
        }
    }
}

/// Both layouts keep the `M`-long axis contiguous: transform every row with
/// `along_m`, then every stride-`M` column with `along_n`, then scale.
fn separable(
    params: &LatticeParams,
    input: &[Complex],
    along_m: &dyn Fft<f64>,
    along_n: &dyn Fft<f64>,
) -> Vec<Complex> {
    let (m, n) = (params.m(), params.n());
    let mut buf = input.to_vec();
    for row in buf.chunks_exact_mut(m) {
        along_m.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for k in 0..m {
        for (i, c) in col.iter_mut().enumerate() {
            *c = buf[i * m + k];
        }
        along_n.process(&mut col);
        for (i, c) in col.iter().enumerate() {
            buf[i * m + k] = *c;
        }
    }
    let scale = 1.0 / (params.size() as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// `X[n, m] = (NM)^{-1/2} sum_{k,l} x[k, l] exp(j 2 pi (n l / N - m k / M))`.
pub fn isfft(x: &DDSignal) -> TFGrid {
    let params = *x.params();
    let plans = Plans::new(&params);
    TFGrid {
        params,
        data: separable(&params, x.as_slice(), &*plans.fwd_m, &*plans.inv_n),
    }
}

/// Inverse of [`isfft`].
pub fn sfft(grid: &TFGrid) -> DDSignal {
    let params = grid.params;
    let plans = Plans::new(&params);
    let data = separable(&params, &grid.data, &*plans.inv_m, &*plans.fwd_n);
    DDSignal::devectorize(params, data).expect("grid and frame sizes agree")
}

/// Per-slot IDFT: slot `n` occupies samples `nM .. (n+1)M`.
pub fn mc_modulate(grid: &TFGrid) -> TDFrame {
    let params = grid.params;
    let plan = FftPlanner::new().plan_fft_inverse(params.m());
    let scale = 1.0 / (params.m() as f64).sqrt();
    let mut samples = grid.data.clone();
    for slot in samples.chunks_exact_mut(params.m()) {
        plan.process(slot);
        slot.iter_mut().for_each(|v| *v *= scale);
    }
    TDFrame::new(params, samples).expect("grid and frame sizes agree")
}

/// Per-slot DFT with the matched rectangular pulse.
pub fn mc_demodulate(frame: &TDFrame) -> TFGrid {
    let params = *frame.params();
    let plan = FftPlanner::new().plan_fft_forward(params.m());
    let scale = 1.0 / (params.m() as f64).sqrt();
    let mut data = frame.samples().to_vec();
    for slot in data.chunks_exact_mut(params.m()) {
        plan.process(slot);
        slot.iter_mut().for_each(|v| *v *= scale);
    }
    TFGrid { params, data }
}

/// MC-OTFS transmitter, receiver and physical link over a finite burst.
#[derive(Debug, Clone)]
pub struct McLink {
    burst: BurstChannel,
}

impl McLink {
    pub fn new(params: LatticeParams, w_tx: FilterSpec, w_rx: FilterSpec, oversampling: usize) -> Result<Self> {
        Ok(Self {
            burst: BurstChannel::new(params, w_tx, w_rx, oversampling)?,
        })
    }

    pub fn params(&self) -> &LatticeParams {
        self.burst.params()
    }

    /// Noise-free DD-to-DD response.
    pub fn apply(&self, ch: &ChannelRealization, x: &DDSignal) -> Result<DDSignal> {
        self.check(x)?;
        let tx = mc_modulate(&isfft(x));
        let rx = self.burst.apply(ch, tx.samples())?;
        Ok(receive(*self.params(), rx))
    }

    /// As [`McLink::apply`] with complex AWGN of variance `n0` added to the
    /// received samples.
    pub fn apply_noisy<R: Rng + ?Sized>(
        &self,
        ch: &ChannelRealization,
        x: &DDSignal,
        n0: f64,
        rng: &mut R,
    ) -> Result<DDSignal> {
        self.check(x)?;
        let tx = mc_modulate(&isfft(x));
        let mut rx = self.burst.apply(ch, tx.samples())?;
        add_noise_in_place(&mut rx, n0, rng);
        Ok(receive(*self.params(), rx))
    }

    /// Exact `MN x MN` DD-domain matrix of the link for one realization.
    pub fn true_matrix(&self, ch: &ChannelRealization) -> Result<ChannelMatrix> {
        let params = *self.params();
        let resp = self.burst.response(ch)?;
        let mn = params.size();
        let mut h = Mat::<Complex>::zeros(mn, mn);
        for j in 0..mn {
            let (k, l) = params.bin(j);
            let x = DDSignal::pulse(params, k, l, Complex::new(1.0, 0.0));
            let tx = mc_modulate(&isfft(&x));
            let y = receive(params, resp.apply(tx.samples())?);
            for (i, v) in y.as_slice().iter().enumerate() {
                h[(i, j)] = *v;
            }
        }
        ChannelMatrix::from_mat(params, h)
    }

    fn check(&self, x: &DDSignal) -> Result<()> {
        if x.params() != self.params() {
            return Err(Error::LatticeMismatch);
        }
        Ok(())
    }
}

fn receive(params: LatticeParams, samples: Vec<Complex>) -> DDSignal {
    let frame = TDFrame::new(params, samples).expect("burst keeps the frame length");
    sfft(&mc_demodulate(&frame))
}

/// Kernel of a 2-D periodic convolution on the DD grid, `h[dk, dl]` at
/// `dl M + dk` with both offsets taken modulo the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicKernel {
    params: LatticeParams,
    h: Vec<Complex>,
}

impl PeriodicKernel {
    pub fn new(params: LatticeParams, h: Vec<Complex>) -> Result<Self> {
        if h.len() != params.size() {
            return Err(Error::LengthMismatch {
                expected: params.size(),
                actual: h.len(),
            });
        }
        Ok(Self { params, h })
    }

    pub fn identity(params: LatticeParams) -> Self {
        let mut h = vec![Complex::new(0.0, 0.0); params.size()];
        h[0] = Complex::new(1.0, 0.0);
        Self { params, h }
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn get(&self, dk: i64, dl: i64) -> Complex {
        let (m, n) = (self.params.m() as i64, self.params.n() as i64);
        self.h[(dl.rem_euclid(n) * m + dk.rem_euclid(m)) as usize]
    }

    /// `y[k, l] = sum h[dk, dl] x[k - dk, l - dl]`, indices modulo the grid.
    pub fn apply(&self, x: &DDSignal) -> Result<DDSignal> {
        if x.params() != &self.params {
            return Err(Error::LatticeMismatch);
        }
        let (m, n) = (self.params.m(), self.params.n());
        let mut y = DDSignal::zeros(self.params);
        for (t, &h) in self.h.iter().enumerate() {
            if h == Complex::new(0.0, 0.0) {
                continue;
            }
            let (dk, dl) = (t % m, t / m);
            for l in 0..n {
                for k in 0..m {
                    let (ks, ls) = ((k + m - dk) % m, (l + n - dl) % n);
                    let v = y.get(k, l) + h * x.get(ks, ls);
                    y.set(k, l, v);
                }
            }
        }
        Ok(y)
    }

    /// Doubly-circulant matrix of the convolution.
    pub fn matrix(&self) -> ChannelMatrix {
        let p = self.params;
        let (m, n) = (p.m(), p.n());
        let h = Mat::<Complex>::from_fn(p.size(), p.size(), |row, col| {
            let (k, l) = (row % m, row / m);
            let (kc, lc) = (col % m, col / m);
            self.h[((l + n - lc) % n) * m + (k + m - kc) % m]
        });
        ChannelMatrix::from_mat(p, h).expect("kernel matrix is MN x MN")
    }
}

/// Reads the periodic-convolution kernel off a pilot response:
/// `h[dk, dl] = y[k_p + dk, l_p + dl] / sqrt(E_p)` over the read-off region,
/// indices modulo the grid. Entries below the pilot threshold are zeroed.
pub fn read_periodic_kernel(received_pilot: &DDSignal, cfg: &PilotConfig) -> Result<PeriodicKernel> {
    let params = *received_pilot.params();
    cfg.validate(&params)?;
    let (m, n) = (params.m() as i64, params.n() as i64);
    let scale = 1.0 / cfg.energy.sqrt();
    let mut h = vec![Complex::new(0.0, 0.0); params.size()];
    for dl in -(cfg.r_l as i64)..=cfg.r_l as i64 {
        for dk in -(cfg.r_k as i64)..=cfg.r_k as i64 {
            let k = (cfg.k_p as i64 + dk).rem_euclid(m) as usize;
            let l = (cfg.l_p as i64 + dl).rem_euclid(n) as usize;
            let v = received_pilot.get(k, l) * scale;
            if v.norm() >= cfg.threshold {
                h[(dl.rem_euclid(n) * m + dk.rem_euclid(m)) as usize] = v;
            }
        }
    }
    PeriodicKernel::new(params, h)
}

/// MMSE equalizer for the periodic-convolution model of a kernel.
pub fn mc_equalizer(kernel: &PeriodicKernel, symbol_energy: f64, n0: f64) -> Result<MmseEqualizer> {
    MmseEqualizer::new(kernel.matrix(), symbol_energy, n0)
}

/// Model-free MC-OTFS receiver for one data frame.
pub fn mc_acquire_and_equalize(
    pilot_response: &DDSignal,
    cfg: &PilotConfig,
    data: &DDSignal,
    symbol_energy: f64,
    n0: f64,
) -> Result<EqualizerOutput> {
    if pilot_response.params() != data.params() {
        return Err(Error::LatticeMismatch);
    }
    let kernel = read_periodic_kernel(pilot_response, cfg)?;
    mc_equalizer(&kernel, symbol_energy, n0)?.equalize(&data.vectorize())
}

/// Per-bin relative prediction error of the periodic-convolution model
/// against the true link matrix, the MC counterpart of the Zak-OTFS RPE.
pub fn mc_rpe(truth: &ChannelMatrix, kernel: &PeriodicKernel) -> Result<RpeMap> {
    let params = *truth.params();
    if kernel.params() != &params {
        return Err(Error::LatticeMismatch);
    }
    let (m, n) = (params.m(), params.n());
    let values = (0..params.size())
        .map(|col| {
            let (kc, lc) = (col % m, col / m);
            let mut err = 0.0;
            let mut den = 0.0;
            for row in 0..params.size() {
                let (k, l) = (row % m, row / m);
                let t = truth.get(row, col);
                let pred = kernel.h[((l + n - lc) % n) * m + (k + m - kc) % m];
                err += (t - pred).norm_sqr();
                den += t.norm_sqr();
            }
            if den > 0.0 {
                err / den
            } else {
                f64::NAN
            }
        })
        .collect();
    RpeMap::new(params, values)
}
