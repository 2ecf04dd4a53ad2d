//! Factorizable delay-Doppler pulse shaping filters.
//!
//! A filter is `w(tau, nu) = sqrt(BT) * w1(B tau) * w2(T nu)` where `w1`, `w2`
//! are unit-rate pulses: `sinc` for the sinc filter, root raised cosine with
//! roll-offs `beta_tau` (delay) and `beta_nu` (Doppler) for the RRC filter.
//! Both pulses are truncated to `|x| <= K` bins.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::{Error, LatticeParams, Result};

/// Default truncation half-width for sinc pulses, in lattice bins.
pub const SINC_DEFAULT_SPAN: usize = 20;
/// Default truncation half-width for RRC pulses, in lattice bins.
pub const RRC_DEFAULT_SPAN: usize = 8;
/// Default oversampling factor for numerical integration on the DD grid.
pub const DEFAULT_OVERSAMPLING: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Sinc,
    Rrc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Delay-axis roll-off (RRC only).
    pub beta_tau: f64,
    /// Doppler-axis roll-off (RRC only).
    pub beta_nu: f64,
    /// Delay truncation half-width in bins of `1/B`.
    pub span_tau: usize,
    /// Doppler truncation half-width in bins of `1/T`.
    pub span_nu: usize,
}

impl FilterSpec {
    pub fn sinc() -> Self {
        Self {
            kind: FilterKind::Sinc,
            beta_tau: 0.0,
            beta_nu: 0.0,
            span_tau: SINC_DEFAULT_SPAN,
            span_nu: SINC_DEFAULT_SPAN,
        }
    }

    pub fn rrc(beta_tau: f64, beta_nu: f64) -> Self {
        Self {
            kind: FilterKind::Rrc,
            beta_tau,
            beta_nu,
            span_tau: RRC_DEFAULT_SPAN,
            span_nu: RRC_DEFAULT_SPAN,
        }
    }

    pub fn with_spans(mut self, span_tau: usize, span_nu: usize) -> Self {
        self.span_tau = span_tau;
        self.span_nu = span_nu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("beta_tau", self.beta_tau), ("beta_nu", self.beta_nu)] {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::InvalidParameter(format!("{name} = {b} outside [0, 1]")));
            }
        }
        if self.span_tau < 1 || self.span_nu < 1 {
            return Err(Error::InvalidParameter("filter truncation spans must be >= 1".into()));
        }
        Ok(())
    }

    fn roll_offs(&self) -> (f64, f64) {
        match self.kind {
            FilterKind::Sinc => (0.0, 0.0),
            FilterKind::Rrc => (self.beta_tau, self.beta_nu),
        }
    }

    /// Truncated unit-rate delay pulse `w1(x)`, `x` in bins of `1/B`.
    #[inline]
    pub fn delay_pulse(&self, x: f64) -> f64 {
        if x.abs() > self.span_tau as f64 + 1e-12 {
            return 0.0;
        }
        rrc(x, self.roll_offs().0)
    }

    /// Truncated unit-rate Doppler pulse `w2(y)`, `y` in bins of `1/T`.
    #[inline]
    pub fn doppler_pulse(&self, y: f64) -> f64 {
        if y.abs() > self.span_nu as f64 + 1e-12 {
            return 0.0;
        }
        rrc(y, self.roll_offs().1)
    }

    /// `(1 + beta_tau) B` and `(1 + beta_nu) T`, the occupied bandwidth and
    /// frame duration reported as run metadata.
    pub fn expanded_resources(&self, params: &LatticeParams) -> (f64, f64) {
        let (bt, bn) = self.roll_offs();
        ((1.0 + bt) * params.bandwidth(), (1.0 + bn) * params.duration())
    }
}

/// Filter value `w(tau, nu)` (real) at physical delay `tau` (s) and Doppler
/// `nu` (Hz).
pub fn evaluate(spec: &FilterSpec, params: &LatticeParams, tau: f64, nu: f64) -> f64 {
    let (b, t) = (params.bandwidth(), params.duration());
    (b * t).sqrt() * spec.delay_pulse(b * tau) * spec.doppler_pulse(t * nu)
}

/// `sin(pi x) / (pi x)` with `sinc(0) = 1`.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Unit-rate root-raised-cosine impulse response with roll-off `beta`;
/// `rrc(x, 0) = sinc(x)`. Unit energy, zero-ISI at integer lags after
/// matched filtering.
pub fn rrc(x: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return sinc(x);
    }
    if x.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let edge = 4.0 * beta * x;
    if (edge.abs() - 1.0).abs() < 1e-7 {
        let a = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2
            * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * x * (1.0 - beta)).sin() + edge * (PI * x * (1.0 + beta)).cos();
    num / (PI * x * (1.0 - edge * edge))
}

/// Filter values on the `Q`-oversampled grid `tau = i/(QB)`, `nu = j/(QT)`
/// for `|i| <= Q K_tau`, `|j| <= Q K_nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterGrid {
    pub oversampling: usize,
    pub half_tau: usize,
    pub half_nu: usize,
    values: Vec<f64>,
}

impl FilterGrid {
    /// Value at delay index `i` and Doppler index `j` (both centred on zero).
    pub fn get(&self, i: i64, j: i64) -> f64 {
        let (ht, hn) = (self.half_tau as i64, self.half_nu as i64);
        if i.abs() > ht || j.abs() > hn {
            return 0.0;
        }
        let cols = 2 * hn + 1;
        self.values[((i + ht) * cols + (j + hn)) as usize]
    }

    pub fn dims(&self) -> (usize, usize) {
        (2 * self.half_tau + 1, 2 * self.half_nu + 1)
    }
}

pub fn sample_grid(spec: &FilterSpec, params: &LatticeParams, oversampling: usize) -> Result<FilterGrid> {
    if oversampling < 1 {
        return Err(Error::InvalidParameter("oversampling Q must be >= 1".into()));
    }
    spec.validate()?;
    let q = oversampling;
    let (ht, hn) = (q * spec.span_tau, q * spec.span_nu);
    let scale = (params.bandwidth() * params.duration()).sqrt();
    let delay: Vec<f64> = (-(ht as i64)..=ht as i64)
        .map(|i| spec.delay_pulse(i as f64 / q as f64))
        .collect();
    let doppler: Vec<f64> = (-(hn as i64)..=hn as i64)
        .map(|j| spec.doppler_pulse(j as f64 / q as f64))
        .collect();
    let mut values = Vec::with_capacity(delay.len() * doppler.len());
    for d in &delay {
        for v in &doppler {
            values.push(scale * d * v);
        }
    }
    Ok(FilterGrid {
        oversampling: q,
        half_tau: ht,
        half_nu: hn,
        values,
    })
}
