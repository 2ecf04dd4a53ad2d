//! CSV output. Files start with `#` comment lines carrying the config hash
//! and seed, then a header row. Wall time is not written, so reruns give
//! identical bytes.

use std::io::Write;

use super::config::{ExperimentConfig, Modem};
use super::engine::ResultRow;
use crate::acquisition::RpeMap;
use crate::Result;

fn preamble<W: Write>(w: &mut W, kind: &str, cfg: &ExperimentConfig) -> Result<()> {
    writeln!(w, "# zakotfs {kind}")?;
    writeln!(w, "# config_sha256={}", cfg.sha256())?;
    writeln!(w, "# seed={}", cfg.run.seed)?;
    Ok(())
}

fn modem_name(m: Modem) -> &'static str {
    match m {
        Modem::Zak => "zak",
        Modem::Mc => "mc",
    }
}

pub fn write_rows<W: Write>(mut w: W, kind: &str, cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<()> {
    preamble(&mut w, kind, cfg)?;
    writeln!(w, "modem,scheme,nu_max_hz,snr_db,frames,bit_errors,ber,frame_errors,fer,mean_iterations")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{:e},{},{:e},{}",
            modem_name(r.modem),
            r.scheme,
            r.nu_max,
            r.snr_db,
            r.frames,
            r.bit_errors,
            r.ber(),
            r.frame_errors,
            r.fer(),
            r.mean_iterations()
        )?;
    }
    Ok(())
}

/// One row per bin and Doppler value; undefined bins are written as `nan`.
pub fn write_heatmap<W: Write>(mut w: W, cfg: &ExperimentConfig, maps: &[(f64, RpeMap)]) -> Result<()> {
    preamble(&mut w, "heatmap", cfg)?;
    writeln!(w, "nu_max_hz,k,l,rpe")?;
    for (nu, map) in maps {
        let p = map.params();
        for l in 0..p.n() {
            for k in 0..p.m() {
                let v = map.get(k, l);
                if v.is_finite() {
                    writeln!(w, "{nu},{k},{l},{v:e}")?;
                } else {
                    writeln!(w, "{nu},{k},{l},nan")?;
                }
            }
        }
    }
    Ok(())
}

/// Summary per Doppler value: fraction of bins below `threshold` and the
/// Doppler centroid of those bins relative to `l_ref`.
pub fn write_heatmap_summary<W: Write>(
    mut w: W,
    cfg: &ExperimentConfig,
    maps: &[(f64, RpeMap)],
    threshold: f64,
    l_ref: usize,
) -> Result<()> {
    preamble(&mut w, "heatmap-summary", cfg)?;
    writeln!(w, "nu_max_hz,threshold,fraction_below,mean_rpe,centroid_offset")?;
    for (nu, map) in maps {
        let centroid = map
            .doppler_centroid_offset(threshold, l_ref)
            .map_or_else(|| "nan".to_string(), |c| c.to_string());
        writeln!(w, "{nu},{threshold},{},{:e},{centroid}", map.fraction_below(threshold), map.mean())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Scheme;
    use crate::LatticeParams;
    use std::time::Duration;

    #[test]
    fn rows_format() {
        let cfg = ExperimentConfig::default();
        let row = ResultRow {
            modem: Modem::Zak,
            scheme: "uncoded-rpe".parse::<Scheme>().unwrap(),
            nu_max: 4500.0,
            snr_db: 13.0,
            frames: 10,
            info_bits_per_frame: 1506,
            bit_errors: 3,
            frame_errors: 1,
            iterations: 0,
            wall_time: Duration::from_secs(7),
        };
        let mut out = Vec::new();
        write_rows(&mut out, "sweep", &cfg, &[row]).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], format!("# config_sha256={}", cfg.sha256()));
        assert_eq!(lines[4], "zak,uncoded-rpe,4500,13,10,3,1.9920318725099602e-4,1,1e-1,0");
    }

    #[test]
    fn heatmap_format() {
        let cfg = ExperimentConfig::default();
        let p = LatticeParams::unit(2, 1);
        let map = RpeMap::new(p, vec![0.5, f64::NAN]).unwrap();
        let mut out = Vec::new();
        write_heatmap(&mut out, &cfg, &[(500.0, map.clone())]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.ends_with("nu_max_hz,k,l,rpe\n500,0,0,5e-1\n500,1,0,nan\n"));
        let mut out = Vec::new();
        write_heatmap_summary(&mut out, &cfg, &[(500.0, map)], 0.6, 0).unwrap();
        assert!(String::from_utf8(out).unwrap().ends_with("500,0.6,0.5,5e-1,0\n"));
    }
}
