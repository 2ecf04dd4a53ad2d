//! Linear MMSE equalization of `y = H x + n` and 4-QAM soft demapping.
//!
//! With `sigma = N0 / E_T` the estimate is
//! `x_hat = (H^H H + sigma I)^{-1} H^H y`, which equals
//! `E_T H^H (E_T H H^H + N0 I)^{-1} y`. Each component is biased,
//! `E[x_hat_r | x_r] = mu_r x_r` with `mu_r = 1 - sigma [(H^H H + sigma I)^{-1}]_rr`,
//! and its unbiased SINR is `gamma_r = mu_r / (1 - mu_r)`.
//!
//! LLR sign convention: positive means bit 0 is more likely. Gray 4-QAM maps
//! `(b0, b1)` to `sqrt(E_T) ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`.

use std::f64::consts::SQRT_2;

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::linalg::solvers::Llt;
use faer::{Mat, Side};

use crate::acquisition::{gram_taps, ChannelMatrix};
use crate::allocation::AllocationMap;
use crate::dd::DDTapSet;
use crate::{Complex, Error, Result};

/// Equalized symbols with their bias and SINR, in vector order.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerOutput {
    pub x_hat: Vec<Complex>,
    pub mu: Vec<f64>,
    /// Post-equalization SINR; infinite when the system is noiseless.
    pub sinr: Vec<f64>,
}

/// MMSE filter for one channel matrix and noise level, reusable across
/// frames.
pub struct MmseEqualizer {
    h: ChannelMatrix,
    llt: Llt<Complex>,
    mu: Vec<f64>,
    sinr: Vec<f64>,
}

impl MmseEqualizer {
    /// Forms `H^H H` by dense multiplication.
    pub fn new(h: ChannelMatrix, symbol_energy: f64, n0: f64) -> Result<Self> {
        let gram = h.mat().adjoint() * h.mat();
        Self::with_gram(h, gram, symbol_energy, n0)
    }

    /// Builds `H` and `H^H H` from a tap set; the Gram matrix comes from the
    /// composed taps rather than a dense product.
    pub fn from_taps(taps: &DDTapSet, symbol_energy: f64, n0: f64) -> Result<Self> {
        let h = ChannelMatrix::build(taps);
        let gram = ChannelMatrix::build(&gram_taps(taps)?).mat().clone();
        Self::with_gram(h, gram, symbol_energy, n0)
    }

    fn with_gram(h: ChannelMatrix, mut gram: Mat<Complex>, symbol_energy: f64, n0: f64) -> Result<Self> {
        if !(symbol_energy > 0.0) {
            return Err(Error::InvalidParameter("symbol energy must be positive".into()));
        }
        if !(n0 >= 0.0) {
            return Err(Error::InvalidParameter("noise PSD must be non-negative".into()));
        }
        let sigma = n0 / symbol_energy;
        let mn = gram.nrows();
        for i in 0..mn {
            // Hermitian by construction; drop rounding residue on the diagonal.
            gram[(i, i)] = Complex::new(gram[(i, i)].re + sigma, 0.0);
        }
        let llt = gram.llt(Side::Lower).map_err(|_| Error::SingularSystem)?;
        let (mu, sinr) = if sigma == 0.0 {
            (vec![1.0; mn], vec![f64::INFINITY; mn])
        } else {
            let inv = llt.inverse();
            let mu: Vec<f64> = (0..mn).map(|i| (1.0 - sigma * inv[(i, i)].re).clamp(0.0, 1.0)).collect();
            let sinr = mu
                .iter()
                .map(|&m| if m >= 1.0 { f64::INFINITY } else { m / (1.0 - m) })
                .collect();
            (mu, sinr)
        };
        Ok(Self { h, llt, mu, sinr })
    }

    pub fn channel(&self) -> &ChannelMatrix {
        &self.h
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sinr(&self) -> &[f64] {
        &self.sinr
    }

    /// Equalizes one received vector.
    pub fn equalize(&self, y: &[Complex]) -> Result<EqualizerOutput> {
        let rhs = self.h.apply_adjoint_vec(y)?;
        let mut col = Mat::<Complex>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        self.llt.solve_in_place(col.as_mut());
        Ok(EqualizerOutput {
            x_hat: (0..rhs.len()).map(|i| col[(i, 0)]).collect(),
            mu: self.mu.clone(),
            sinr: self.sinr.clone(),
        })
    }
}

/// One-shot MMSE equalization.
pub fn mmse_equalize(h: &ChannelMatrix, y: &[Complex], symbol_energy: f64, n0: f64) -> Result<EqualizerOutput> {
    MmseEqualizer::new(h.clone(), symbol_energy, n0)?.equalize(y)
}

/// Gray 4-QAM point for bits `(b0, b1)`.
#[inline]
pub fn qam4_symbol(b0: u8, b1: u8, symbol_energy: f64) -> Complex {
    let a = (symbol_energy / 2.0).sqrt();
    Complex::new(if b0 == 0 { a } else { -a }, if b1 == 0 { a } else { -a })
}

/// LLRs `(b0, b1)` of one equalized symbol.
#[inline]
pub fn qam4_symbol_llrs(x_hat: Complex, mu: f64, sinr: f64, symbol_energy: f64) -> [f64; 2] {
    let z = x_hat / mu;
    let scale = 2.0 * SQRT_2 * sinr / symbol_energy.sqrt();
    let llr = |v: f64| {
        let r = scale * v;
        if r.is_nan() {
            0.0
        } else {
            r
        }
    };
    [llr(z.re), llr(z.im)]
}

/// Codeword-ordered LLRs of the data symbols listed in `map`.
pub fn qam4_llrs(out: &EqualizerOutput, map: &AllocationMap, symbol_energy: f64) -> Result<Vec<f64>> {
    let mn = map.params().size();
    if out.x_hat.len() != mn {
        return Err(Error::LengthMismatch {
            expected: mn,
            actual: out.x_hat.len(),
        });
    }
    let per_bin: Vec<[f64; 2]> = (0..mn)
        .map(|i| qam4_symbol_llrs(out.x_hat[i], out.mu[i], out.sinr[i], symbol_energy))
        .collect();
    map.unmap_llrs(&per_bin)
}

/// Hard decisions from LLRs: bit 1 where the LLR is negative.
pub fn hard_decisions(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::add_noise_in_place;
    use crate::LatticeParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_taps(p: LatticeParams, seed: u64) -> DDTapSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = DDTapSet::identity(p).scaled(Complex::new(2.0, 0.0));
        for _ in 0..6 {
            t.add(
                rng.random_range(-2..=2),
                rng.random_range(-2..=2),
                Complex::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4)),
            );
        }
        t
    }

    fn random_symbols(n: usize, e_t: f64, rng: &mut ChaCha8Rng) -> Vec<Complex> {
        (0..n)
            .map(|_| qam4_symbol(rng.random_range(0..2), rng.random_range(0..2), e_t))
            .collect()
    }

    #[test]
    fn identity_noiseless() {
        let p = LatticeParams::unit(4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_symbols(16, 1.0, &mut rng);
        let out = mmse_equalize(&ChannelMatrix::identity(p), &x, 1.0, 0.0).unwrap();
        assert_eq!(out.x_hat, x);
        assert!(out.sinr.iter().all(|g| g.is_infinite()));
    }

    #[test]
    fn identity_at_unit_snr() {
        let p = LatticeParams::unit(4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = random_symbols(16, 2.0, &mut rng);
        let out = mmse_equalize(&ChannelMatrix::identity(p), &y, 2.0, 2.0).unwrap();
        for (a, b) in out.x_hat.iter().zip(&y) {
            assert!((a - b / 2.0).norm() < 1e-14);
        }
        assert!(out.mu.iter().all(|m| (m - 0.5).abs() < 1e-14));
        assert!(out.sinr.iter().all(|g| (g - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_forcing_limit() {
        let p = LatticeParams::unit(6, 5);
        let h = ChannelMatrix::build(&random_taps(p, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_symbols(30, 1.0, &mut rng);
        let y = h.apply_vec(&x).unwrap();
        let out = mmse_equalize(&h, &y, 1.0, 1e-13).unwrap();
        let err: f64 = out.x_hat.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm <= 1e-8, "{}", err / norm);
    }

    #[test]
    fn singular_noiseless_system_is_reported() {
        let p = LatticeParams::unit(3, 3);
        let taps = DDTapSet::from_taps(p, [((0, 0), Complex::new(1.0, 0.0)), ((1, 0), Complex::new(-1.0, 0.0))]);
        // 1 - (delay shift) annihilates the constant zero-Doppler row.
        let err = mmse_equalize(&ChannelMatrix::build(&taps), &[Complex::new(0.0, 0.0); 9], 1.0, 0.0);
        assert!(matches!(err, Err(Error::SingularSystem)));
    }

    #[test]
    fn gram_routes_agree() {
        let p = LatticeParams::unit(8, 6);
        let taps = random_taps(p, 5);
        let a = MmseEqualizer::new(ChannelMatrix::build(&taps), 1.0, 0.3).unwrap();
        let b = MmseEqualizer::from_taps(&taps, 1.0, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let y = random_symbols(48, 1.0, &mut rng);
        let (oa, ob) = (a.equalize(&y).unwrap(), b.equalize(&y).unwrap());
        for i in 0..48 {
            assert!((oa.x_hat[i] - ob.x_hat[i]).norm() < 1e-12);
            assert!((oa.mu[i] - ob.mu[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn bias_matches_definition() {
        // mu_r = [W H]_rr with W the MMSE filter.
        let p = LatticeParams::unit(5, 4);
        let h = ChannelMatrix::build(&random_taps(p, 7));
        let eq = MmseEqualizer::new(h.clone(), 1.0, 0.5).unwrap();
        for r in 0..20 {
            let mut e = vec![Complex::new(0.0, 0.0); 20];
            e[r] = Complex::new(1.0, 0.0);
            let resp = eq.equalize(&h.apply_vec(&e).unwrap()).unwrap();
            assert!((resp.x_hat[r].re - eq.mu()[r]).abs() < 1e-12);
            assert!(resp.x_hat[r].im.abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_invariance() {
        let p = LatticeParams::unit(5, 4);
        let h = ChannelMatrix::build(&random_taps(p, 8));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut y = h.apply_vec(&random_symbols(20, 1.0, &mut rng)).unwrap();
        add_noise_in_place(&mut y, 0.2, &mut rng);
        let alpha = 3.0;
        let a = mmse_equalize(&h, &y, 1.0, 0.2).unwrap();
        let ys: Vec<Complex> = y.iter().map(|v| v * alpha).collect();
        let b = mmse_equalize(&h, &ys, alpha * alpha, 0.2 * alpha * alpha).unwrap();
        for i in 0..20 {
            assert!((b.x_hat[i] - a.x_hat[i] * alpha).norm() < 1e-12);
            assert!((b.sinr[i] - a.sinr[i]).abs() < 1e-9);
            let la = qam4_symbol_llrs(a.x_hat[i], a.mu[i], a.sinr[i], 1.0);
            let lb = qam4_symbol_llrs(b.x_hat[i], b.mu[i], b.sinr[i], alpha * alpha);
            assert!((la[0] - lb[0]).abs() < 1e-9 && (la[1] - lb[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn mmse_no_worse_than_zero_forcing() {
        let p = LatticeParams::unit(6, 4);
        let taps = random_taps(p, 10);
        let h = ChannelMatrix::build(&taps);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut e_mmse, mut e_zf) = (0.0, 0.0);
        for _ in 0..200 {
            let x = random_symbols(24, 1.0, &mut rng);
            let mut y = h.apply_vec(&x).unwrap();
            add_noise_in_place(&mut y, 0.5, &mut rng);
            let m = mmse_equalize(&h, &y, 1.0, 0.5).unwrap();
            let z = mmse_equalize(&h, &y, 1.0, 0.0).unwrap();
            e_mmse += m.x_hat.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
            e_zf += z.x_hat.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        }
        assert!(e_mmse <= e_zf, "{e_mmse} vs {e_zf}");
    }

    #[test]
    fn llr_signs_and_erasures() {
        for (b0, b1) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let s = qam4_symbol(b0, b1, 2.0);
            let l1 = qam4_symbol_llrs(s, 1.0, 10.0, 2.0);
            let l2 = qam4_symbol_llrs(s, 1.0, 20.0, 2.0);
            assert_eq!(hard_decisions(&l1), vec![b0, b1]);
            assert!((l2[0] - 2.0 * l1[0]).abs() < 1e-12);
        }
        assert_eq!(qam4_symbol_llrs(Complex::new(0.0, 0.0), 0.5, 3.0, 1.0), [0.0, 0.0]);
        assert_eq!(qam4_symbol_llrs(Complex::new(0.0, 0.0), 1.0, f64::INFINITY, 1.0), [0.0, 0.0]);
        let s = qam4_symbol(1, 0, 1.0);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn awgn_llr_matches_exact_bit_llr() {
        // For H = I the Gaussian LLR is exact: 4 a y / N0 with a = sqrt(E_T/2).
        let p = LatticeParams::unit(2, 2);
        let y = vec![Complex::new(0.3, -0.8); 4];
        let (e_t, n0) = (1.5, 0.4);
        let out = mmse_equalize(&ChannelMatrix::identity(p), &y, e_t, n0).unwrap();
        let l = qam4_symbol_llrs(out.x_hat[0], out.mu[0], out.sinr[0], e_t);
        let a = (e_t / 2.0).sqrt();
        assert!((l[0] - 4.0 * a * 0.3 / n0).abs() < 1e-12);
        assert!((l[1] + 4.0 * a * 0.8 / n0).abs() < 1e-12);
    }
}
