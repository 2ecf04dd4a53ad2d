//! Placement of 4-QAM codeword symbols on DD bins.
//!
//! A codeword of `n` bits becomes `n/2` symbols; symbol `s` carries bits
//! `2s, 2s+1`. The first `info_symbols` symbols carry systematic information
//! bits, the next `parity_symbols` the rest of the codeword. Bins left over
//! are null (transmit zero).
//!
//! - Standard: symbols in raster order (`lM + k` ascending), nulls last.
//! - Strip: information in a full-delay-width band of rows around the pilot
//!   row, parity in the remaining rows nearest the band first.
//! - RPE: bins sorted by ascending relative prediction error; information on
//!   the most reliable bins, then parity, then nulls.

use std::io::Write;

use crate::acquisition::RpeMap;
use crate::dd::DDSignal;
use crate::equalizer::qam4_symbol;
use crate::ldpc::LdpcCode;
use crate::{Complex, Error, LatticeParams, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Standard,
    Strip,
    Rpe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Info,
    Parity,
    Null,
}

/// Symbol counts of a codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolLayout {
    pub info_symbols: usize,
    pub parity_symbols: usize,
}

impl SymbolLayout {
    /// Information symbols carry the code's information bits; every other
    /// codeword bit is counted as parity.
    pub fn from_code(code: &LdpcCode) -> Self {
        let info = code.info_bits() / 2;
        Self {
            info_symbols: info,
            parity_symbols: code.n() / 2 - info,
        }
    }

    /// `bits / 2` information symbols and no parity.
    pub fn uncoded(bits: usize) -> Self {
        Self {
            info_symbols: bits / 2,
            parity_symbols: 0,
        }
    }

    pub fn symbols(&self) -> usize {
        self.info_symbols + self.parity_symbols
    }

    pub fn bits(&self) -> usize {
        2 * self.symbols()
    }
}

/// Bijection between codeword symbols and DD bins.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationMap {
    params: LatticeParams,
    strategy: Strategy,
    layout: SymbolLayout,
    /// Vector index of the bin carrying each symbol.
    bin_of_symbol: Vec<usize>,
    /// Symbol carried by each bin.
    symbol_of_bin: Vec<Option<usize>>,
}

impl AllocationMap {
    /// Assigns `info_bins` to information symbols and `parity_bins` to parity
    /// symbols, in the given order.
    fn from_bins(
        params: LatticeParams,
        strategy: Strategy,
        layout: SymbolLayout,
        info_bins: &[usize],
        parity_bins: &[usize],
    ) -> Self {
        debug_assert_eq!(info_bins.len(), layout.info_symbols);
        debug_assert_eq!(parity_bins.len(), layout.parity_symbols);
        let mut bin_of_symbol = Vec::with_capacity(layout.symbols());
        let mut symbol_of_bin = vec![None; params.size()];
        for (s, &b) in info_bins.iter().chain(parity_bins).enumerate() {
            bin_of_symbol.push(b);
            symbol_of_bin[b] = Some(s);
        }
        Self {
            params,
            strategy,
            layout,
            bin_of_symbol,
            symbol_of_bin,
        }
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn layout(&self) -> SymbolLayout {
        self.layout
    }

    /// Bin `(k, l)` of codeword symbol `s`.
    pub fn bin_of(&self, s: usize) -> (usize, usize) {
        self.params.bin(self.bin_of_symbol[s])
    }

    pub fn symbol_at(&self, k: usize, l: usize) -> Option<usize> {
        self.symbol_of_bin[self.params.index(k, l)]
    }

    pub fn role_at(&self, k: usize, l: usize) -> Role {
        match self.symbol_at(k, l) {
            None => Role::Null,
            Some(s) if s < self.layout.info_symbols => Role::Info,
            Some(_) => Role::Parity,
        }
    }

    pub fn role_of_symbol(&self, s: usize) -> Role {
        if s < self.layout.info_symbols {
            Role::Info
        } else {
            Role::Parity
        }
    }

    /// Vector indices of the bins in `role`.
    pub fn bins_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.params.size())
            .filter(|&i| {
                let (k, l) = self.params.bin(i);
                self.role_at(k, l) == role
            })
            .collect()
    }

    /// Gray 4-QAM modulation of a codeword onto the grid, nulls zero.
    pub fn map_symbols(&self, codeword: &[u8], symbol_energy: f64) -> Result<DDSignal> {
        if codeword.len() != self.layout.bits() {
            return Err(Error::LengthMismatch {
                expected: self.layout.bits(),
                actual: codeword.len(),
            });
        }
        let mut v = vec![Complex::new(0.0, 0.0); self.params.size()];
        for (s, &bin) in self.bin_of_symbol.iter().enumerate() {
            v[bin] = qam4_symbol(codeword[2 * s], codeword[2 * s + 1], symbol_energy);
        }
        DDSignal::devectorize(self.params, v)
    }

    /// Collects per-bin LLR pairs (vector order) into codeword order,
    /// discarding null bins.
    pub fn unmap_llrs(&self, per_bin: &[[f64; 2]]) -> Result<Vec<f64>> {
        if per_bin.len() != self.params.size() {
            return Err(Error::LengthMismatch {
                expected: self.params.size(),
                actual: per_bin.len(),
            });
        }
        let mut out = Vec::with_capacity(self.layout.bits());
        for &bin in &self.bin_of_symbol {
            out.extend_from_slice(&per_bin[bin]);
        }
        Ok(out)
    }

    /// CSV rows `symbol_index,role,k,l`; null bins have an empty index.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "symbol_index,role,k,l")?;
        for i in 0..self.params.size() {
            let (k, l) = self.params.bin(i);
            let (idx, role) = match self.symbol_of_bin[i] {
                Some(s) => (s.to_string(), self.role_of_symbol(s)),
                None => (String::new(), Role::Null),
            };
            let role = match role {
                Role::Info => "info",
                Role::Parity => "parity",
                Role::Null => "null",
            };
            writeln!(w, "{idx},{role},{k},{l}")?;
        }
        Ok(())
    }
}

fn check_fits(params: &LatticeParams, layout: SymbolLayout) -> Result<()> {
    if layout.symbols() > params.size() {
        return Err(Error::InvalidParameter(format!(
            "{} symbols do not fit on {} bins",
            layout.symbols(),
            params.size()
        )));
    }
    Ok(())
}

/// Raster placement: symbol `s` on bin index `s`.
pub fn make_standard(params: &LatticeParams, layout: SymbolLayout) -> Result<AllocationMap> {
    check_fits(params, layout)?;
    let info: Vec<usize> = (0..layout.info_symbols).collect();
    let parity: Vec<usize> = (layout.info_symbols..layout.symbols()).collect();
    Ok(AllocationMap::from_bins(*params, Strategy::Standard, layout, &info, &parity))
}

fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// Strip placement around pilot row `l_p`, with `k_p` used only to rank the
/// outermost slots for nulls.
///
/// Information fills rows `[l_p - h/2, l_p - h/2 + h)` with
/// `h = ceil(info / M)`; the unused slots of the band are the ones farthest
/// from the pilot. Parity fills the other rows in order of row distance to
/// the pilot; unused slots fall on the farthest rows.
pub fn make_strip(params: &LatticeParams, layout: SymbolLayout, k_p: usize, l_p: usize) -> Result<AllocationMap> {
    check_fits(params, layout)?;
    let (m, n) = (params.m(), params.n());
    if l_p >= n || k_p >= m {
        return Err(Error::RegionOutOfBounds(format!("pilot ({k_p}, {l_p}) outside the grid")));
    }
    let height = layout.info_symbols.div_ceil(m);
    if height > n {
        return Err(Error::RegionOutOfBounds(format!(
            "information band of {height} rows exceeds N = {n}"
        )));
    }
    let first = (l_p + n - height / 2) % n;
    let band: Vec<usize> = (0..height).map(|i| (first + i) % n).collect();
    let in_band = |l: usize| band.contains(&l);

    let slot_key = |k: usize, l: usize| (circular_distance(l, l_p, n), k.abs_diff(k_p), l, k);

    let mut band_slots: Vec<(usize, usize)> = band.iter().flat_map(|&l| (0..m).map(move |k| (k, l))).collect();
    band_slots.sort_by_key(|&(k, l)| slot_key(k, l));
    band_slots.truncate(layout.info_symbols);
    // Raster order within the band.
    band_slots.sort_by_key(|&(k, l)| ((l + n - first) % n, k));
    let info: Vec<usize> = band_slots.iter().map(|&(k, l)| params.index(k, l)).collect();

    let mut rest: Vec<(usize, usize)> = (0..n)
        .filter(|&l| !in_band(l))
        .flat_map(|l| (0..m).map(move |k| (k, l)))
        .collect();
    rest.sort_by_key(|&(k, l)| slot_key(k, l));
    if rest.len() < layout.parity_symbols {
        return Err(Error::InvalidParameter("parity symbols do not fit outside the band".into()));
    }
    rest.truncate(layout.parity_symbols);
    rest.sort_by_key(|&(k, l)| (circular_distance(l, l_p, n), l, k));
    let parity: Vec<usize> = rest.iter().map(|&(k, l)| params.index(k, l)).collect();
    Ok(AllocationMap::from_bins(*params, Strategy::Strip, layout, &info, &parity))
}

/// RPE placement: bins by ascending RPE, ties by bin index; undefined (NaN)
/// bins sort last.
pub fn make_rpe(params: &LatticeParams, layout: SymbolLayout, rpe: &RpeMap) -> Result<AllocationMap> {
    check_fits(params, layout)?;
    if rpe.params() != params {
        return Err(Error::LatticeMismatch);
    }
    let mut order: Vec<usize> = (0..params.size()).collect();
    let vals = rpe.values();
    order.sort_by(|&a, &b| {
        let (x, y) = (vals[a], vals[b]);
        match (x.is_nan(), y.is_nan()) {
            (true, true) => a.cmp(&b),
            (true, false) => std::cmp::Ordering::Greater,
            (false, true) => std::cmp::Ordering::Less,
            (false, false) => x.total_cmp(&y).then(a.cmp(&b)),
        }
    });
    let info = &order[..layout.info_symbols];
    let parity = &order[layout.info_symbols..layout.symbols()];
    Ok(AllocationMap::from_bins(*params, Strategy::Rpe, layout, info, parity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn paper_layout() -> SymbolLayout {
        SymbolLayout {
            info_symbols: 753,
            parity_symbols: 753,
        }
    }

    fn check_partition(map: &AllocationMap) {
        let p = *map.params();
        let info = map.bins_with_role(Role::Info).len();
        let parity = map.bins_with_role(Role::Parity).len();
        let null = map.bins_with_role(Role::Null).len();
        assert_eq!(info, map.layout().info_symbols);
        assert_eq!(parity, map.layout().parity_symbols);
        assert_eq!(info + parity + null, p.size());
        for s in 0..map.layout().symbols() {
            let (k, l) = map.bin_of(s);
            assert_eq!(map.symbol_at(k, l), Some(s));
        }
    }

    fn radial_map(p: LatticeParams) -> RpeMap {
        let (kp, lp) = (p.m() / 2, p.n() / 2);
        let v = (0..p.size())
            .map(|i| {
                let (k, l) = p.bin(i);
                let dk = circular_distance(k, kp, p.m()) as f64;
                let dl = circular_distance(l, lp, p.n()) as f64;
                (dk * dk + 4.0 * dl * dl).sqrt()
            })
            .collect();
        RpeMap::new(p, v).unwrap()
    }

    #[test]
    fn standard_is_raster() {
        let p = LatticeParams::veh_a_default();
        let map = make_standard(&p, paper_layout()).unwrap();
        assert_eq!(map.bin_of(0), (0, 0));
        assert_eq!(map.bin_of(1), (1, 0));
        assert_eq!(map.bin_of(32), (0, 1));
        check_partition(&map);
        let nulls = map.bins_with_role(Role::Null);
        assert_eq!(nulls, (1506..1536).collect::<Vec<_>>());
    }

    #[test]
    fn strip_geometry() {
        let p = LatticeParams::veh_a_default();
        let map = make_strip(&p, paper_layout(), 16, 24).unwrap();
        check_partition(&map);
        let info = map.bins_with_role(Role::Info);
        let rows: std::collections::BTreeSet<usize> = info.iter().map(|&i| p.bin(i).1).collect();
        assert_eq!(rows.len(), 24);
        assert_eq!(*rows.iter().next().unwrap(), 12);
        assert_eq!(*rows.iter().last().unwrap(), 35);
        for &i in &info {
            assert!((p.bin(i).1 as i64 - 24).abs() <= 12);
        }
        for &i in &map.bins_with_role(Role::Parity) {
            assert!(!(12..=35).contains(&p.bin(i).1));
        }
        // Band nulls sit on the outermost band row, far from the pilot delay.
        let nulls = map.bins_with_role(Role::Null);
        assert_eq!(nulls.len(), 30);
        let band_nulls: Vec<(usize, usize)> =
            nulls.iter().map(|&i| p.bin(i)).filter(|&(_, l)| (12..=35).contains(&l)).collect();
        assert_eq!(band_nulls.len(), 15);
        assert!(band_nulls.iter().all(|&(_, l)| l == 12));
        // Parity nulls sit on the row farthest from the pilot.
        assert!(nulls.iter().map(|&i| p.bin(i)).filter(|&(_, l)| !(12..=35).contains(&l)).all(|(_, l)| l == 0));
    }

    #[test]
    fn strip_rejects_oversized_band() {
        let p = LatticeParams::unit(4, 4);
        let layout = SymbolLayout {
            info_symbols: 17,
            parity_symbols: 0,
        };
        assert!(make_strip(&p, layout, 2, 2).is_err());
    }

    #[test]
    fn rpe_uniform_reduces_to_raster() {
        let p = LatticeParams::veh_a_default();
        let flat = RpeMap::new(p, vec![0.5; p.size()]).unwrap();
        let a = make_rpe(&p, paper_layout(), &flat).unwrap();
        let b = make_standard(&p, paper_layout()).unwrap();
        for s in 0..1506 {
            assert_eq!(a.bin_of(s), b.bin_of(s));
        }
    }

    #[test]
    fn rpe_partition_is_sorted() {
        let p = LatticeParams::veh_a_default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let map = RpeMap::new(p, (0..p.size()).map(|_| rng.random::<f64>()).collect()).unwrap();
        let alloc = make_rpe(&p, paper_layout(), &map).unwrap();
        check_partition(&alloc);
        let max_info = alloc.bins_with_role(Role::Info).iter().map(|&i| map.values()[i]).fold(0.0, f64::max);
        let min_par = alloc.bins_with_role(Role::Parity).iter().map(|&i| map.values()[i]).fold(1.0, f64::min);
        assert!(max_info <= min_par);
    }

    #[test]
    fn rpe_info_centroid_near_pilot() {
        let p = LatticeParams::veh_a_default();
        let alloc = make_rpe(&p, paper_layout(), &radial_map(p)).unwrap();
        let mean_dist = |role| {
            let bins = alloc.bins_with_role(role);
            bins.iter()
                .map(|&i| {
                    let (k, l) = p.bin(i);
                    let dk = circular_distance(k, 16, 32) as f64;
                    let dl = circular_distance(l, 24, 48) as f64;
                    (dk * dk + dl * dl).sqrt()
                })
                .sum::<f64>()
                / bins.len() as f64
        };
        assert!(mean_dist(Role::Info) < mean_dist(Role::Parity));
    }

    #[test]
    fn map_and_unmap() {
        let p = LatticeParams::veh_a_default();
        let map = make_strip(&p, paper_layout(), 16, 24).unwrap();
        let zeros = vec![0u8; 3012];
        let x = map.map_symbols(&zeros, 1.0).unwrap();
        let point = qam4_symbol(0, 0, 1.0);
        for i in 0..p.size() {
            let (k, l) = p.bin(i);
            let v = x.get(k, l);
            match map.role_at(k, l) {
                Role::Null => assert_eq!(v, Complex::new(0.0, 0.0)),
                _ => assert_eq!(v, point),
            }
        }
        assert!((x.energy() - 1506.0).abs() < 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cw: Vec<u8> = (0..3012).map(|_| rng.random_range(0..2)).collect();
        let x = map.map_symbols(&cw, 2.0).unwrap();
        let per_bin: Vec<[f64; 2]> = x.as_slice().iter().map(|v| [v.re, v.im]).collect();
        let llrs = map.unmap_llrs(&per_bin).unwrap();
        let hard: Vec<u8> = llrs.iter().map(|&l| u8::from(l < 0.0)).collect();
        assert_eq!(hard, cw);
        assert!(map.map_symbols(&cw[..10], 1.0).is_err());
    }

    #[test]
    fn uncoded_layouts() {
        let p = LatticeParams::veh_a_default();
        let layout = SymbolLayout::uncoded(1506);
        assert_eq!(layout.symbols(), 753);
        for map in [
            make_standard(&p, layout).unwrap(),
            make_strip(&p, layout, 16, 24).unwrap(),
            make_rpe(&p, layout, &radial_map(p)).unwrap(),
        ] {
            check_partition(&map);
            assert_eq!(map.bins_with_role(Role::Null).len(), 783);
        }
    }

    #[test]
    fn csv_export() {
        let p = LatticeParams::unit(2, 2);
        let layout = SymbolLayout {
            info_symbols: 1,
            parity_symbols: 2,
        };
        let map = make_standard(&p, layout).unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "symbol_index,role,k,l\n0,info,0,0\n1,parity,1,0\n2,parity,0,1\n,null,1,1\n");
    }
}
