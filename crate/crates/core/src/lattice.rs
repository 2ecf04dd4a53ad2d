//! Frame geometry of the information lattice.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const INTEGRALITY_TOL: f64 = 1e-9;

/// Delay-Doppler frame geometry.
///
/// A frame of bandwidth `B` and duration `T` carries `M x N` symbols, with
/// `M = B * tau_p` delay bins and `N = T * nu_p` Doppler bins. The delay and
/// Doppler periods satisfy `tau_p * nu_p = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    bandwidth: f64,
    duration: f64,
    delay_period: f64,
    doppler_period: f64,
    m: usize,
    n: usize,
}

impl LatticeParams {
    /// Builds the lattice from bandwidth, duration and Doppler period; the
    /// delay period is `1 / nu_p`.
    pub fn new(bandwidth: f64, duration: f64, doppler_period: f64) -> Result<Self> {
        if !(doppler_period > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "Doppler period must be positive, got {doppler_period}"
            )));
        }
        Self::with_periods(bandwidth, duration, 1.0 / doppler_period, doppler_period)
    }

    /// Builds the lattice from all four physical quantities, checking that the
    /// periods multiply to one and that `M`, `N` are positive integers.
    pub fn with_periods(
        bandwidth: f64,
        duration: f64,
        delay_period: f64,
        doppler_period: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("bandwidth", bandwidth),
            ("duration", duration),
            ("delay period", delay_period),
            ("Doppler period", doppler_period),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidLattice(format!("{name} must be positive, got {v}")));
            }
        }
        if ((delay_period * doppler_period) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidLattice(format!(
                "tau_p * nu_p = {} (must be 1)",
                delay_period * doppler_period
            )));
        }
        let m = integral(bandwidth * delay_period, "M = B * tau_p")?;
        let n = integral(duration * doppler_period, "N = T * nu_p")?;
        Ok(Self {
            bandwidth,
            duration,
            delay_period,
            doppler_period,
            m,
            n,
        })
    }

    /// Paper-default frame: `B = 0.96 MHz`, `T = 1.6 ms`, `nu_p = 30 kHz`,
    /// giving `M = 32`, `N = 48`.
    pub fn veh_a_default() -> Self {
        Self::new(0.96e6, 1.6e-3, 30e3).expect("default lattice is valid")
    }

    /// Small lattice with unit resolutions, used for algebra tests.
    pub fn unit(m: usize, n: usize) -> Self {
        // B = M, tau_p = 1, nu_p = 1, T = N
        Self::with_periods(m as f64, n as f64, 1.0, 1.0).expect("unit lattice is valid")
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    pub fn duration(&self) -> f64 {
        self.duration
    }
    pub fn delay_period(&self) -> f64 {
        self.delay_period
    }
    pub fn doppler_period(&self) -> f64 {
        self.doppler_period
    }
    /// Number of delay bins.
    pub fn m(&self) -> usize {
        self.m
    }
    /// Number of Doppler bins.
    pub fn n(&self) -> usize {
        self.n
    }
    /// `M * N`, the number of bins per frame.
    pub fn size(&self) -> usize {
        self.m * self.n
    }
    /// Delay resolution `1 / B`.
    pub fn delay_resolution(&self) -> f64 {
        1.0 / self.bandwidth
    }
    /// Doppler resolution `1 / T`.
    pub fn doppler_resolution(&self) -> f64 {
        1.0 / self.duration
    }

    /// Vector index `l * M + k` of bin `(k, l)`.
    #[inline]
    pub fn index(&self, k: usize, l: usize) -> usize {
        l * self.m + k
    }

    /// Bin `(k, l)` of vector index `lM + k`.
    #[inline]
    pub fn bin(&self, idx: usize) -> (usize, usize) {
        (idx % self.m, idx / self.m)
    }
}

fn integral(v: f64, what: &str) -> Result<usize> {
    let r = v.round();
    if r < 1.0 || (v - r).abs() > INTEGRALITY_TOL * r.max(1.0) {
        return Err(Error::InvalidLattice(format!("{what} = {v} is not a positive integer")));
    }
    Ok(r as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry() {
        let p = LatticeParams::veh_a_default();
        assert_eq!(p.m(), 32);
        assert_eq!(p.n(), 48);
        assert!((p.delay_period() * p.doppler_period() - 1.0).abs() < 1e-12);
        assert!((p.delay_resolution() - p.delay_period() / 32.0).abs() < 1e-18);
        assert!((p.doppler_resolution() - p.doppler_period() / 48.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_integer_grid() {
        assert!(LatticeParams::new(1.0e6, 1.6e-3, 30e3).is_err());
        assert!(LatticeParams::with_periods(32.0, 48.0, 1.0, 2.0).is_err());
        assert!(LatticeParams::new(0.96e6, -1.0, 30e3).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let p = LatticeParams::unit(4, 3);
        for idx in 0..p.size() {
            let (k, l) = p.bin(idx);
            assert_eq!(p.index(k, l), idx);
        }
        assert_eq!(p.index(1, 0), 1);
        assert_eq!(p.index(0, 1), 4);
    }
}
