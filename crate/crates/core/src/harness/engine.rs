//! Monte Carlo engine: BER points, sweeps and RPE heatmaps.
//!
//! Work is split into channel realizations. Every random quantity comes
//! from a stream keyed by what it belongs to (channel, pilot, frame,
//! scheme), so results do not depend on scheduling or on the worker count.
//! Channel draws do not depend on the SNR, which gives common random
//! numbers along SNR sweeps.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Coding, ExperimentConfig, Modem, Profile, Scheme};
use crate::acquisition::{estimate_h_eff, rpe_from_taps, PilotConfig, RpeMap};
use crate::allocation::{make_rpe, make_standard, make_strip, AllocationMap, Strategy, SymbolLayout};
use crate::channel::{add_noise_with, compute_h_eff, ChannelProfile, ChannelRealization, TdSimulator};
use crate::dd::{twisted_convolve, DDSignal};
use crate::equalizer::{hard_decisions, qam4_llrs, MmseEqualizer};
use crate::filters::FilterSpec;
use crate::ldpc::LdpcCode;
use crate::mcotfs::{mc_equalizer, mc_rpe, read_periodic_kernel, McLink};
use crate::zak::inverse_zak;
use crate::{LatticeParams, Result};

/// Energy per transmitted symbol; the noise level sets the SNR.
pub const SYMBOL_ENERGY: f64 = 1.0;

const STREAM_CHANNEL: u64 = 1;
const STREAM_PILOT: u64 = 2;
const STREAM_DATA: u64 = 3;
const STREAM_RPE: u64 = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the stream named by `path` under `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(master), |h, &p| splitmix(h ^ splitmix(p)))
}

fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

/// Aggregate of one (Doppler, SNR, scheme) point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub modem: Modem,
    pub scheme: Scheme,
    pub nu_max: f64,
    pub snr_db: f64,
    pub frames: u64,
    pub info_bits_per_frame: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    /// Sum of decoder iterations; zero for uncoded schemes.
    pub iterations: u64,
    /// Time spent on the point, shared by all its schemes.
    pub wall_time: Duration,
}

impl ResultRow {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / (self.frames * self.info_bits_per_frame) as f64
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames as f64
    }

    pub fn mean_iterations(&self) -> f64 {
        self.iterations as f64 / self.frames as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
    iterations: u64,
}

impl Tally {
    fn add(&mut self, other: &Tally) {
        self.frames += other.frames;
        self.bit_errors += other.bit_errors;
        self.frame_errors += other.frame_errors;
        self.iterations += other.iterations;
    }
}

enum Link {
    Zak(TdSimulator),
    Mc(McLink),
}

/// Everything fixed for one configuration: lattice, filters, code, pilot
/// and the time-domain channel path.
pub struct Experiment {
    cfg: ExperimentConfig,
    params: LatticeParams,
    filter: FilterSpec,
    profile: ChannelProfile,
    code: LdpcCode,
    pilot: PilotConfig,
    link: Link,
    pool: rayon::ThreadPool,
}

impl Experiment {
    /// `workers = 0` lets the thread pool pick.
    pub fn new(cfg: ExperimentConfig, workers: usize) -> Result<Self> {
        cfg.validate()?;
        let params = cfg.lattice_params()?;
        let filter = cfg.filter_spec()?;
        let profile = match cfg.channel.profile {
            Profile::VehA => ChannelProfile::veh_a(),
        };
        let code = LdpcCode::construct(cfg.link.code_seed)?;
        let mut pilot = PilotConfig::centered(&params, SYMBOL_ENERGY);
        if let Some(r) = cfg.pilot.r_k {
            pilot.r_k = r;
        }
        if let Some(r) = cfg.pilot.r_l {
            pilot.r_l = r;
        }
        pilot.validate(&params)?;
        let q = cfg.channel.oversampling;
        let link = match cfg.link.modem {
            Modem::Zak => Link::Zak(TdSimulator::new(params, filter, filter, q)?),
            Modem::Mc => Link::Mc(McLink::new(params, filter, filter, q)?),
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
        Ok(Self {
            cfg,
            params,
            filter,
            profile,
            code,
            pilot,
            link,
            pool,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn code(&self) -> &LdpcCode {
        &self.code
    }

    pub fn pilot(&self) -> &PilotConfig {
        &self.pilot
    }

    fn draw_channel(&self, nu_idx: usize, c: u64) -> ChannelRealization {
        let nu = self.cfg.channel.nu_max[nu_idx];
        self.profile.draw(nu, &mut stream(self.cfg.run.seed, &[STREAM_CHANNEL, nu_idx as u64, c]))
    }

    /// Noise-free RPE of the pilot estimate for one realization.
    fn rpe_realization(&self, nu_idx: usize, r: u64) -> Result<RpeMap> {
        let nu = self.cfg.channel.nu_max[nu_idx];
        let ch = self.profile.draw(nu, &mut stream(self.cfg.run.seed, &[STREAM_RPE, nu_idx as u64, r]));
        let frame = self.pilot.frame(&self.params);
        match &self.link {
            Link::Zak(_) => {
                let q = self.cfg.channel.oversampling;
                let truth = compute_h_eff(&ch, &self.filter, &self.filter, &self.params, q)?;
                let est = estimate_h_eff(&twisted_convolve(&truth, &frame)?, &self.pilot)?;
                rpe_from_taps(&truth, &est)
            }
            Link::Mc(link) => {
                let truth = link.true_matrix(&ch)?;
                let kernel = read_periodic_kernel(&truth.apply(&frame)?, &self.pilot)?;
                mc_rpe(&truth, &kernel)
            }
        }
    }

    /// RPE map averaged over the configured number of realizations.
    pub fn rpe_map(&self, nu_idx: usize) -> Result<RpeMap> {
        let count = self.cfg.pilot.rpe_realizations as u64;
        let maps = self.pool.install(|| {
            (0..count)
                .into_par_iter()
                .map(|r| self.rpe_realization(nu_idx, r))
                .collect::<Result<Vec<_>>>()
        })?;
        RpeMap::average(&maps)
    }

    /// Averaged RPE map for every configured Doppler value.
    pub fn run_heatmap(&self) -> Result<Vec<(f64, RpeMap)>> {
        (0..self.cfg.channel.nu_max.len())
            .map(|i| Ok((self.cfg.channel.nu_max[i], self.rpe_map(i)?)))
            .collect()
    }

    fn layout(&self, coding: Coding) -> SymbolLayout {
        match coding {
            Coding::Ldpc => SymbolLayout::from_code(&self.code),
            Coding::Uncoded => SymbolLayout::uncoded(self.code.info_bits()),
        }
    }

    /// Allocation of every scheme at one Doppler value.
    fn allocations(&self, rpe: Option<&RpeMap>) -> Result<Vec<AllocationMap>> {
        self.cfg
            .link
            .schemes
            .iter()
            .map(|s| {
                let layout = self.layout(s.coding);
                match s.allocation {
                    Strategy::Standard => make_standard(&self.params, layout),
                    Strategy::Strip => make_strip(&self.params, layout, self.pilot.k_p, self.pilot.l_p),
                    Strategy::Rpe => make_rpe(&self.params, layout, rpe.expect("RPE map computed when needed")),
                }
            })
            .collect()
    }

    fn needs_rpe(&self) -> bool {
        self.cfg.link.schemes.iter().any(|s| s.allocation == Strategy::Rpe)
    }

    /// Every (Doppler, SNR, scheme) point, Doppler outermost and schemes
    /// innermost.
    pub fn run_sweep(&self) -> Result<Vec<ResultRow>> {
        let mut rows = Vec::new();
        for nu_idx in 0..self.cfg.channel.nu_max.len() {
            let rpe = if self.needs_rpe() { Some(self.rpe_map(nu_idx)?) } else { None };
            let allocs = self.allocations(rpe.as_ref())?;
            for snr_idx in 0..self.cfg.link.snr_db.len() {
                rows.extend(self.run_point(nu_idx, snr_idx, &allocs)?);
            }
        }
        Ok(rows)
    }

    /// One BER point for all schemes, with the per-scheme stopping rule.
    pub fn run_ber_point(&self, nu_idx: usize, snr_idx: usize) -> Result<Vec<ResultRow>> {
        let rpe = if self.needs_rpe() { Some(self.rpe_map(nu_idx)?) } else { None };
        let allocs = self.allocations(rpe.as_ref())?;
        self.run_point(nu_idx, snr_idx, &allocs)
    }

    fn run_point(&self, nu_idx: usize, snr_idx: usize, allocs: &[AllocationMap]) -> Result<Vec<ResultRow>> {
        let start = Instant::now();
        let run = &self.cfg.run;
        let schemes = &self.cfg.link.schemes;
        let mut tallies = vec![Tally::default(); schemes.len()];
        let mut active = vec![true; schemes.len()];
        let mut next_channel = 0u64;
        while active.iter().any(|a| *a) {
            let batch: Vec<u64> = (next_channel..next_channel + run.batch_channels as u64).collect();
            next_channel += run.batch_channels as u64;
            let results = self.pool.install(|| {
                batch
                    .par_iter()
                    .map(|&c| self.simulate_channel(nu_idx, snr_idx, c, &active, allocs))
                    .collect::<Result<Vec<_>>>()
            })?;
            for per_channel in &results {
                for (s, t) in per_channel.iter().enumerate() {
                    if !active[s] {
                        continue;
                    }
                    tallies[s].add(t);
                    let enough_errors =
                        tallies[s].bit_errors >= run.target_errors && tallies[s].frames >= run.min_frames as u64;
                    if enough_errors || tallies[s].frames >= run.trials as u64 {
                        active[s] = false;
                    }
                }
            }
        }
        let wall_time = start.elapsed();
        Ok(schemes
            .iter()
            .zip(tallies)
            .map(|(scheme, t)| ResultRow {
                modem: self.cfg.link.modem,
                scheme: *scheme,
                nu_max: self.cfg.channel.nu_max[nu_idx],
                snr_db: self.cfg.link.snr_db[snr_idx],
                frames: t.frames,
                info_bits_per_frame: self.code.info_bits() as u64,
                bit_errors: t.bit_errors,
                frame_errors: t.frame_errors,
                iterations: t.iterations,
                wall_time,
            })
            .collect())
    }

    /// Acquires the channel from a pilot frame and sends the configured
    /// number of data frames for every active scheme.
    fn simulate_channel(
        &self,
        nu_idx: usize,
        snr_idx: usize,
        c: u64,
        active: &[bool],
        allocs: &[AllocationMap],
    ) -> Result<Vec<Tally>> {
        let seed = self.cfg.run.seed;
        let n0 = ExperimentConfig::n0(self.cfg.link.snr_db[snr_idx]);
        let ch = self.draw_channel(nu_idx, c);
        let mut pilot_rng = stream(seed, &[STREAM_PILOT, nu_idx as u64, snr_idx as u64, c]);
        let pilot_n0 = if self.cfg.pilot.noiseless { 0.0 } else { n0 };
        let mut pilot = self.pilot;
        if self.cfg.pilot.threshold && pilot_n0 > 0.0 {
            pilot = pilot.with_noise_threshold(pilot_n0);
        }
        let frame = pilot.frame(&self.params);
        let equalizer = match &self.link {
            Link::Zak(td) => {
                let y = add_noise_with(&td.apply(&ch, &inverse_zak(&frame))?, pilot_n0, &mut pilot_rng);
                MmseEqualizer::from_taps(&estimate_h_eff(&y, &pilot)?, SYMBOL_ENERGY, n0)?
            }
            Link::Mc(link) => {
                let y = link.apply_noisy(&ch, &frame, pilot_n0, &mut pilot_rng)?;
                mc_equalizer(&read_periodic_kernel(&y, &pilot)?, SYMBOL_ENERGY, n0)?
            }
        };
        let k = self.code.info_bits();
        let mut tallies = vec![Tally::default(); allocs.len()];
        for f in 0..self.cfg.run.frames_per_channel as u64 {
            for (s, alloc) in allocs.iter().enumerate() {
                if !active[s] {
                    continue;
                }
                let path = [STREAM_DATA, nu_idx as u64, snr_idx as u64, c, f, s as u64];
                let mut rng = stream(seed, &path);
                let info: Vec<u8> = (0..k).map(|_| rng.random_range(0..2u8)).collect();
                let scheme = self.cfg.link.schemes[s];
                let codeword = match scheme.coding {
                    Coding::Ldpc => self.code.encode(&info)?,
                    Coding::Uncoded => info.clone(),
                };
                let x = alloc.map_symbols(&codeword, SYMBOL_ENERGY)?;
                let y = self.transmit(&ch, &x, n0, &mut rng)?;
                let out = equalizer.equalize(&y.vectorize())?;
                let llrs = qam4_llrs(&out, alloc, SYMBOL_ENERGY)?;
                let (decided, iterations) = match scheme.coding {
                    Coding::Ldpc => {
                        let r = self.code.decode_layered_bp(&llrs, self.cfg.link.max_iters);
                        (r.info_bits(&self.code).to_vec(), r.iterations as u64)
                    }
                    Coding::Uncoded => (hard_decisions(&llrs[..k]), 0),
                };
                let errors = decided.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
                let t = &mut tallies[s];
                t.frames += 1;
                t.bit_errors += errors;
                t.frame_errors += u64::from(errors > 0);
                t.iterations += iterations;
            }
        }
        Ok(tallies)
    }

    fn transmit(&self, ch: &ChannelRealization, x: &DDSignal, n0: f64, rng: &mut ChaCha8Rng) -> Result<DDSignal> {
        match &self.link {
            Link::Zak(td) => Ok(add_noise_with(&td.apply(ch, &inverse_zak(x))?, n0, rng)),
            Link::Mc(link) => link.apply_noisy(ch, x, n0, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_every_component() {
        let a = derive_seed(1, &[1, 2, 3]);
        assert_eq!(a, derive_seed(1, &[1, 2, 3]));
        assert_ne!(a, derive_seed(2, &[1, 2, 3]));
        assert_ne!(a, derive_seed(1, &[1, 3, 2]));
        assert_ne!(a, derive_seed(1, &[1, 2]));
        assert_ne!(a, derive_seed(1, &[1, 2, 3, 0]));
    }

    #[test]
    fn row_statistics() {
        let row = ResultRow {
            modem: Modem::Zak,
            scheme: "ldpc-strip".parse().unwrap(),
            nu_max: 0.0,
            snr_db: 0.0,
            frames: 4,
            info_bits_per_frame: 100,
            bit_errors: 8,
            frame_errors: 2,
            iterations: 10,
            wall_time: Duration::ZERO,
        };
        assert_eq!(row.ber(), 0.02);
        assert_eq!(row.fer(), 0.5);
        assert_eq!(row.mean_iterations(), 2.5);
    }
}
