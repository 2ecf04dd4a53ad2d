//! Sum-product decoding with a layered or flooding schedule.

use super::LdpcCode;

/// Channel LLRs are clipped to this magnitude.
pub const LLR_CLIP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Checks processed one after another, posteriors refreshed after each.
    Layered,
    /// All checks from the previous iteration's messages.
    Flooding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Hard decisions in transmission order.
    pub bits: Vec<u8>,
    /// True exactly when `bits` satisfies every check.
    pub converged: bool,
    pub iterations: usize,
}

impl DecodeResult {
    pub fn info_bits<'a>(&'a self, code: &LdpcCode) -> &'a [u8] {
        &self.bits[..code.info_bits()]
    }
}

/// `phi(x) = -ln(tanh(x/2))`, its own inverse on `x > 0`.
#[inline]
fn phi(x: f64) -> f64 {
    let x = x.clamp(1e-12, 60.0);
    -(x / 2.0).tanh().ln()
}

impl LdpcCode {
    /// Layered belief propagation, exact sum-product check update.
    /// `llrs` are in transmission order, positive favouring bit 0. Frozen
    /// positions are forced to zero.
    pub fn decode_layered_bp(&self, llrs: &[f64], max_iters: usize) -> DecodeResult {
        self.decode(llrs, max_iters, Schedule::Layered)
    }

    pub fn decode(&self, llrs: &[f64], max_iters: usize, schedule: Schedule) -> DecodeResult {
        assert_eq!(llrs.len(), self.n, "LLR vector length must equal the block length");
        let mut post = vec![0.0; self.n];
        for (t, &l) in llrs.iter().enumerate() {
            let v = if l.is_nan() { 0.0 } else { l.clamp(-LLR_CLIP, LLR_CLIP) };
            post[self.tx_to_nat[t]] = v;
        }
        for t in self.frozen_positions() {
            post[self.tx_to_nat[t]] = LLR_CLIP;
        }
        let channel = post.clone();
        let offsets: Vec<usize> = std::iter::once(0)
            .chain(self.checks.iter().scan(0, |acc, c| {
                *acc += c.len();
                Some(*acc)
            }))
            .collect();
        let mut msg = vec![0.0; *offsets.last().unwrap()];
        let mut scratch = Vec::new();
        let mut iterations = 0;
        let mut converged = self.natural_syndrome_ok(&post);
        while !converged && iterations < max_iters {
            iterations += 1;
            match schedule {
                Schedule::Layered => {
                    for (c, vars) in self.checks.iter().enumerate() {
                        let m = &mut msg[offsets[c]..offsets[c + 1]];
                        scratch.clear();
                        scratch.extend(vars.iter().zip(m.iter()).map(|(&v, &r)| post[v] - r));
                        check_update(&scratch, m);
                        for ((&v, &q), &r) in vars.iter().zip(&scratch).zip(m.iter()) {
                            post[v] = q + r;
                        }
                    }
                }
                Schedule::Flooding => {
                    // Variable-to-check messages from the previous posteriors.
                    for (c, vars) in self.checks.iter().enumerate() {
                        let m = &mut msg[offsets[c]..offsets[c + 1]];
                        scratch.clear();
                        scratch.extend(vars.iter().zip(m.iter()).map(|(&v, &r)| post[v] - r));
                        check_update(&scratch, m);
                    }
                    post.copy_from_slice(&channel);
                    for (c, vars) in self.checks.iter().enumerate() {
                        for (&v, &r) in vars.iter().zip(&msg[offsets[c]..offsets[c + 1]]) {
                            post[v] += r;
                        }
                    }
                }
            }
            converged = self.natural_syndrome_ok(&post);
        }
        let bits = (0..self.n).map(|t| u8::from(post[self.tx_to_nat[t]] < 0.0)).collect();
        DecodeResult {
            bits,
            converged,
            iterations,
        }
    }

    fn natural_syndrome_ok(&self, post: &[f64]) -> bool {
        self.checks
            .iter()
            .all(|c| c.iter().filter(|&&v| post[v] < 0.0).count() % 2 == 0)
    }
}

/// Check-to-variable messages from incoming variable-to-check LLRs `q`.
fn check_update(q: &[f64], out: &mut [f64]) {
    let mut total = 0.0;
    let mut negatives = 0usize;
    for &x in q {
        total += phi(x.abs());
        negatives += usize::from(x < 0.0);
    }
    for (o, &x) in out.iter_mut().zip(q) {
        let mag = phi(total - phi(x.abs()));
        let neg = negatives - usize::from(x < 0.0);
        *o = if neg % 2 == 0 { mag } else { -mag };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::tests::paper_code;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn bpsk_llrs(cw: &[u8], ebn0_db: f64, rate: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let esn0 = rate * 10f64.powf(ebn0_db / 10.0);
        let sigma2 = 1.0 / (2.0 * esn0);
        let noise = Normal::new(0.0, sigma2.sqrt()).unwrap();
        cw.iter()
            .map(|&b| {
                let y = (1.0 - 2.0 * b as f64) + noise.sample(rng);
                2.0 * y / sigma2
            })
            .collect()
    }

    #[test]
    fn phi_is_an_involution() {
        for x in [0.01, 0.5, 1.0, 3.0, 10.0] {
            assert!((phi(phi(x)) - x).abs() < 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn check_update_matches_tanh_rule() {
        let q = [1.2, -0.4, 2.5, 0.9, -3.1, 0.2];
        let mut out = [0.0; 6];
        check_update(&q, &mut out);
        for i in 0..6 {
            let prod: f64 = q.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| (x / 2.0).tanh()).product();
            let expect = 2.0 * prod.atanh();
            assert!((out[i] - expect).abs() < 1e-9, "{i}: {} vs {expect}", out[i]);
        }
    }

    #[test]
    fn noiseless_codeword_in_one_iteration() {
        let code = paper_code();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode(&info).unwrap();
        let llrs: Vec<f64> = cw.iter().map(|&b| if b == 0 { 30.0 } else { -30.0 }).collect();
        let r = code.decode_layered_bp(&llrs, 50);
        // The syndrome of the channel decisions is already zero; one pass is
        // still counted for every codeword whose first check is visited.
        assert!(r.converged);
        assert_eq!(r.bits, cw);
        assert!(r.iterations <= 1);
    }

    #[test]
    fn single_flip_corrected() {
        let code = paper_code();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let cw = code.encode(&info).unwrap();
        let mut llrs: Vec<f64> = cw.iter().map(|&b| if b == 0 { 4.0 } else { -4.0 }).collect();
        llrs[777] = -llrs[777];
        let r = code.decode_layered_bp(&llrs, 50);
        assert!(r.converged);
        assert_eq!(r.bits, cw);
        assert_eq!(code.syndrome_weight(&r.bits), 0);
    }

    #[test]
    fn converged_iff_zero_syndrome() {
        let code = paper_code();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for ebn0 in [0.0, 1.0, 1.5] {
            let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let cw = code.encode(&info).unwrap();
            let llrs = bpsk_llrs(&cw, ebn0, 0.5, &mut rng);
            for schedule in [Schedule::Layered, Schedule::Flooding] {
                let r = code.decode(&llrs, 20, schedule);
                assert_eq!(r.converged, code.syndrome_weight(&r.bits) == 0);
            }
        }
    }

    #[test]
    fn frozen_bits_are_forced() {
        let code = paper_code();
        let cw = code.encode(&vec![0; code.k()]).unwrap();
        let mut llrs = vec![5.0; code.n()];
        for t in code.frozen_positions() {
            llrs[t] = -20.0;
        }
        let r = code.decode_layered_bp(&llrs, 50);
        assert_eq!(r.bits, cw);
    }

    #[test]
    fn layered_converges_faster_than_flooding() {
        let code = paper_code();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut layered, mut flooding) = (0usize, 0usize);
        let frames = 30;
        for _ in 0..frames {
            let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
            let cw = code.encode(&info).unwrap();
            let llrs = bpsk_llrs(&cw, 2.0, 0.5, &mut rng);
            let a = code.decode(&llrs, 50, Schedule::Layered);
            let b = code.decode(&llrs, 50, Schedule::Flooding);
            assert!(a.converged && b.converged);
            layered += a.iterations;
            flooding += b.iterations;
        }
        assert!(layered < flooding, "layered {layered} vs flooding {flooding}");
    }
}
