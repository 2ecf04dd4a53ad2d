//! Discrete Zak transform.
//!
//! The unitary pair used here maps a critically sampled frame `s[q]`,
//! `q = k + mM`, to the DD grid:
//!
//! ```text
//! x[k, l] = 1/sqrt(N) sum_m s[k + mM] exp(-j 2 pi l m / N)
//! s[k + mM] = 1/sqrt(N) sum_l x[k, l] exp(+j 2 pi l m / N)
//! ```
//!
//! A single DD pulse at `(k0, 0)` becomes a train of `N` equal pulses spaced
//! one delay period apart (the pulsone); a pulse at `(k0, l0)` modulates the
//! train with a tone of `l0` cycles per frame.

use rustfft::FftPlanner;

use crate::dd::DDSignal;
use crate::{Complex, Error, LatticeParams, Result};

/// One frame of time-domain samples at rate `B`, `M * N` samples long.
///
/// The underlying signal of an integer-lattice DD frame is periodic with
/// period `M * N`; consumers that need samples outside the frame extend it
/// periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct TDFrame {
    params: LatticeParams,
    samples: Vec<Complex>,
}

impl TDFrame {
    pub fn new(params: LatticeParams, samples: Vec<Complex>) -> Result<Self> {
        if samples.len() != params.size() {
            return Err(Error::LengthMismatch {
                expected: params.size(),
                actual: samples.len(),
            });
        }
        Ok(Self { params, samples })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn samples(&self) -> &[Complex] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex> {
        self.samples
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// DD signal to time-domain frame.
pub fn inverse_zak(sig: &DDSignal) -> TDFrame {
    let p = *sig.params();
    let (m, n) = (p.m(), p.n());
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = vec![Complex::new(0.0, 0.0); p.size()];
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for k in 0..m {
        for (l, c) in col.iter_mut().enumerate() {
            *c = sig.get(k, l);
        }
        ifft.process(&mut col);
        for (mi, c) in col.iter().enumerate() {
            out[k + mi * m] = c * scale;
        }
    }
    TDFrame {
        params: p,
        samples: out,
    }
}

/// Time-domain frame to DD signal; exact inverse of [`inverse_zak`].
pub fn forward_zak(frame: &TDFrame) -> DDSignal {
    let p = frame.params;
    forward_zak_samples(&p, &frame.samples).expect("TDFrame length is checked at construction")
}

/// Forward transform of a raw sample slice of length `M * N`.
pub fn forward_zak_samples(params: &LatticeParams, samples: &[Complex]) -> Result<DDSignal> {
    let (m, n) = (params.m(), params.n());
    if samples.len() != params.size() {
        return Err(Error::LengthMismatch {
            expected: params.size(),
            actual: samples.len(),
        });
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = DDSignal::zeros(*params);
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for k in 0..m {
        for (mi, c) in col.iter_mut().enumerate() {
            *c = samples[k + mi * m];
        }
        fft.process(&mut col);
        for (l, c) in col.iter().enumerate() {
            out.set(k, l, c * scale);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(p: LatticeParams, seed: u64) -> DDSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DDSignal::from_fn(p, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn zero_doppler_pulse_is_pulse_train() {
        let p = LatticeParams::unit(8, 6);
        let k0 = 3;
        let s = inverse_zak(&DDSignal::pulse(p, k0, 0, Complex::new(1.0, 0.0)));
        let amp = 1.0 / 6f64.sqrt();
        for (q, v) in s.samples().iter().enumerate() {
            if q % 8 == k0 {
                assert!((v - Complex::new(amp, 0.0)).norm() < 1e-14);
            } else {
                assert!(v.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = LatticeParams::unit(4, 4);
        let s = inverse_zak(&DDSignal::zeros(p));
        assert!(s.samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn roundtrip_and_parseval() {
        let p = LatticeParams::veh_a_default();
        let x = random_signal(p, 7);
        let s = inverse_zak(&x);
        assert!((s.energy() - x.energy()).abs() <= 1e-10 * x.energy());
        let back = forward_zak(&s);
        assert!(back.distance_sqr(&x).sqrt() <= 1e-12 * x.energy().sqrt());
    }

    #[test]
    fn time_pulse_spreads_flat_over_doppler() {
        let p = LatticeParams::unit(5, 4);
        let k0 = 2;
        let mut samples = vec![Complex::new(0.0, 0.0); 20];
        samples[k0] = Complex::new(1.0, 0.0);
        let x = forward_zak(&TDFrame::new(p, samples).unwrap());
        for l in 0..4 {
            for k in 0..5 {
                let expected = if k == k0 { 0.5 } else { 0.0 };
                assert!((x.get(k, l) - Complex::new(expected, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_frame_concentrates_at_zero_doppler() {
        let p = LatticeParams::unit(4, 6);
        let x = forward_zak(&TDFrame::new(p, vec![Complex::new(1.0, 0.0); 24]).unwrap());
        for k in 0..4 {
            assert!((x.get(k, 0) - Complex::new(6f64.sqrt(), 0.0)).norm() < 1e-12);
            for l in 1..6 {
                assert!(x.get(k, l).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let p = LatticeParams::unit(4, 6);
        assert!(TDFrame::new(p, vec![Complex::new(0.0, 0.0); 23]).is_err());
        assert!(forward_zak_samples(&p, &[Complex::new(0.0, 0.0); 5]).is_err());
    }

    #[test]
    fn forward_zak_is_unitary_on_random_frames() {
        let p = LatticeParams::unit(6, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let s: Vec<Complex> = (0..60)
                .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let frame = TDFrame::new(p, s).unwrap();
            let x = forward_zak(&frame);
            assert!((x.energy() - frame.energy()).abs() <= 1e-10 * frame.energy());
        }
    }
}
