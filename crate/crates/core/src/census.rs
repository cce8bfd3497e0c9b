//! Emitter survey statistics: ZPL distributions, per-tile densities,
//! ODMR-active fractions and long-wavelength fractions.
//!
//! Records arrive as plain CSV (no quoting; none of the fields contain
//! commas). A row with an empty `emitter_id` declares a scanned flake with no
//! emitters, which lets density statistics include empty flakes.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::Result;

/// Host crystal of a surveyed flake.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Material {
    HBn,
    CHBn,
}

impl Material {
    pub fn parse(s: &str) -> Option<Material> {
        match s.trim().to_ascii_lowercase().replace('-', "").as_str() {
            "hbn" => Some(Material::HBn),
            "chbn" => Some(Material::CHBn),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Material::HBn => "hBN",
            Material::CHBn => "cHBN",
        }
    }
}

impl std::fmt::Display for Material {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which spin transitions an emitter showed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransitionFlags {
    pub s1: bool,
    pub s1_2: bool,
}

impl TransitionFlags {
    /// Parses "S1+S1_2", "S1_2", "S1" or empty.
    pub fn parse(s: &str) -> Option<TransitionFlags> {
        let mut flags = TransitionFlags::default();
        let t = s.trim();
        if t.is_empty() {
            return Some(flags);
        }
        for tok in t.split('+') {
            match tok.trim() {
                "S1" => flags.s1 = true,
                "S1_2" => flags.s1_2 = true,
                _ => return None,
            }
        }
        Some(flags)
    }

    pub fn render(&self) -> String {
        match (self.s1, self.s1_2) {
            (true, true) => "S1+S1_2".into(),
            (false, true) => "S1_2".into(),
            (true, false) => "S1".into(),
            (false, false) => String::new(),
        }
    }
}

/// One surveyed emitter, or a flake declaration when `emitter_id` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterRecord {
    pub emitter_id: String,
    pub flake_id: String,
    pub material: Material,
    /// Zero phonon line wavelength; present on every emitter row, absent on
    /// flake declarations.
    pub zpl_nm: Option<f64>,
    pub fwhm_nm: Option<f64>,
    /// Scanned area of the emitter's flake.
    pub map_area_um2: f64,
    pub odmr_active: bool,
    pub transitions: TransitionFlags,
}

impl EmitterRecord {
    pub fn is_flake_marker(&self) -> bool {
        self.emitter_id.is_empty()
    }
}

/// One rejected CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    /// 1-based line number in the source.
    pub line: usize,
    pub reason: String,
}

/// Ingest outcome: nothing is silently dropped.
#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub rejections: Vec<Rejection>,
}

pub const CSV_HEADER: &str =
    "emitter_id,flake_id,material,zpl_nm,fwhm_nm,map_area_um2,odmr_active,transitions";

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

/// Parses the survey CSV. Malformed rows land in the report with their line
/// numbers; a bad header fails the whole ingest.
pub fn ingest(csv_text: &str) -> Result<(Vec<EmitterRecord>, IngestReport)> {
    let mut lines = csv_text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((n, l)) => {
                if l.trim().is_empty() {
                    continue;
                }
                break (n, l);
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "empty input: expected a CSV header".into(),
                })
            }
        }
    };
    let normalized: String = header
        .1
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect::<Vec<_>>()
        .join(",");
    if normalized != CSV_HEADER {
        return Err(Error::Parse {
            line: header.0 + 1,
            msg: format!("expected header `{CSV_HEADER}`, got `{}`", header.1.trim()),
        });
    }

    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for (n, raw) in lines {
        let line = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        match parse_row(raw) {
            Ok(rec) => records.push(rec),
            Err(reason) => report.rejections.push(Rejection { line, reason }),
        }
    }
    Ok((records, report))
}

fn parse_row(raw: &str) -> std::result::Result<EmitterRecord, String> {
    let cols: Vec<&str> = raw.split(',').map(|c| c.trim()).collect();
    if cols.len() != 8 {
        return Err(format!("expected 8 columns, got {}", cols.len()));
    }
    let emitter_id = cols[0].to_string();
    let flake_id = cols[1].to_string();
    if flake_id.is_empty() {
        return Err("flake_id must not be empty".into());
    }
    let material = Material::parse(cols[2])
        .ok_or_else(|| format!("material must be hBN or cHBN, got `{}`", cols[2]))?;
    let map_area_um2: f64 = cols[5]
        .parse()
        .map_err(|_| format!("map_area_um2 is not a number: `{}`", cols[5]))?;
    if !map_area_um2.is_finite() || map_area_um2 <= 0.0 {
        return Err(format!("map_area_um2 must be > 0, got {map_area_um2}"));
    }

    if emitter_id.is_empty() {
        // Flake declaration: the per-emitter fields must stay empty.
        if !(cols[3].is_empty() && cols[4].is_empty() && cols[6].is_empty() && cols[7].is_empty())
        {
            return Err(
                "rows with empty emitter_id declare a flake and must leave zpl_nm, fwhm_nm, \
                 odmr_active and transitions empty"
                    .into(),
            );
        }
        return Ok(EmitterRecord {
            emitter_id,
            flake_id,
            material,
            zpl_nm: None,
            fwhm_nm: None,
            map_area_um2,
            odmr_active: false,
            transitions: TransitionFlags::default(),
        });
    }

    let zpl_nm: f64 = cols[3]
        .parse()
        .map_err(|_| format!("zpl_nm is not a number: `{}`", cols[3]))?;
    if !(400.0..=1000.0).contains(&zpl_nm) {
        return Err(format!("zpl_nm must lie in [400, 1000] nm, got {zpl_nm}"));
    }
    let fwhm_nm = if cols[4].is_empty() {
        None
    } else {
        let v: f64 = cols[4]
            .parse()
            .map_err(|_| format!("fwhm_nm is not a number: `{}`", cols[4]))?;
        if !v.is_finite() || v <= 0.0 {
            return Err(format!("fwhm_nm must be > 0, got {v}"));
        }
        Some(v)
    };
    let odmr_active =
        parse_bool(cols[6]).ok_or_else(|| format!("odmr_active is not a flag: `{}`", cols[6]))?;
    let transitions = TransitionFlags::parse(cols[7])
        .ok_or_else(|| format!("transitions must be S1+S1_2, S1_2 or empty, got `{}`", cols[7]))?;
    // No emitter ever showed only the S = 1 transition: S1 implies S1_2.
    if transitions.s1 && !transitions.s1_2 {
        return Err(
            "transitions violate the S1 => S1_2 rule (an S = 1 transition always comes with \
             the S = 1/2 transition)"
                .into(),
        );
    }
    Ok(EmitterRecord {
        emitter_id,
        flake_id,
        material,
        zpl_nm: Some(zpl_nm),
        fwhm_nm,
        map_area_um2,
        odmr_active,
        transitions,
    })
}

/// Binomial fraction with its Wilson 95% score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdmrFraction {
    pub active: usize,
    pub total: usize,
    pub fraction: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for k successes out of n.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    assert!(n > 0, "wilson interval needs n > 0");
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Fraction of ODMR-active emitters with a Wilson 95% interval.
pub fn odmr_fraction(records: &[EmitterRecord]) -> Result<OdmrFraction> {
    let emitters: Vec<&EmitterRecord> = records.iter().filter(|r| !r.is_flake_marker()).collect();
    if emitters.is_empty() {
        return Err(Error::domain("no emitter records"));
    }
    let total = emitters.len();
    let active = emitters.iter().filter(|r| r.odmr_active).count();
    let (lo, hi) = wilson_interval(active, total);
    Ok(OdmrFraction {
        active,
        total,
        fraction: active as f64 / total as f64,
        wilson_low: lo,
        wilson_high: hi,
    })
}

/// Fraction of emitters per material whose ZPL lies in (threshold, upper].
pub fn long_wavelength_fraction(
    records: &[EmitterRecord],
    threshold_nm: f64,
    upper_nm: f64,
) -> Result<BTreeMap<Material, f64>> {
    if threshold_nm >= upper_nm {
        return Err(Error::domain("threshold must be below the upper bound"));
    }
    let mut counts: BTreeMap<Material, (usize, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_flake_marker()) {
        let zpl = r.zpl_nm.expect("emitter rows carry a ZPL");
        let e = counts.entry(r.material).or_insert((0, 0));
        e.1 += 1;
        if zpl > threshold_nm && zpl <= upper_nm {
            e.0 += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::domain("no emitter records"));
    }
    Ok(counts
        .into_iter()
        .map(|(m, (k, n))| (m, k as f64 / n as f64))
        .collect())
}

/// Default long-wavelength window (threshold, upper] in nm.
pub const LONG_WL_THRESHOLD_NM: f64 = 700.0;
pub const LONG_WL_UPPER_NM: f64 = 850.0;

/// Area of the normalization tile: 30 x 30 um^2.
pub const TILE_AREA_UM2: f64 = 900.0;

/// Emitter density of one flake, normalized to the 30 x 30 um^2 tile.
#[derive(Debug, Clone, PartialEq)]
pub struct FlakeDensity {
    pub flake_id: String,
    pub material: Material,
    pub emitters: usize,
    pub map_area_um2: f64,
    pub per_tile: f64,
}

/// Distribution summary of per-flake densities.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityStats {
    pub per_flake: Vec<FlakeDensity>,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // Linear interpolation between closest ranks (type 7).
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n as f64 - 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-flake emitter densities normalized to 900 um^2 tiles.
///
/// Every record of a flake must quote the same scanned area; densities assume
/// emitters are spread uniformly over that area.
pub fn density_stats(records: &[EmitterRecord]) -> Result<DensityStats> {
    let mut flakes: BTreeMap<String, (Material, f64, usize)> = BTreeMap::new();
    for r in records {
        let entry = flakes
            .entry(r.flake_id.clone())
            .or_insert((r.material, r.map_area_um2, 0));
        if (entry.1 - r.map_area_um2).abs() > 1e-9 * entry.1.max(1.0) {
            return Err(Error::domain(format!(
                "flake `{}` quotes inconsistent map areas ({} vs {})",
                r.flake_id, entry.1, r.map_area_um2
            )));
        }
        if !r.is_flake_marker() {
            entry.2 += 1;
        }
    }
    if flakes.is_empty() {
        return Err(Error::domain("no records"));
    }
    let per_flake: Vec<FlakeDensity> = flakes
        .into_iter()
        .map(|(flake_id, (material, area, count))| FlakeDensity {
            flake_id,
            material,
            emitters: count,
            map_area_um2: area,
            per_tile: count as f64 * TILE_AREA_UM2 / area,
        })
        .collect();
    let mut densities: Vec<f64> = per_flake.iter().map(|f| f.per_tile).collect();
    densities.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean = densities.iter().sum::<f64>() / densities.len() as f64;
    Ok(DensityStats {
        mean,
        min: densities[0],
        q1: quantile(&densities, 0.25),
        median: quantile(&densities, 0.5),
        q3: quantile(&densities, 0.75),
        max: densities[densities.len() - 1],
        per_flake,
    })
}

/// Histogram of ZPL wavelengths over [550, 900] nm.
#[derive(Debug, Clone, PartialEq)]
pub struct ZplHistogram {
    /// Bin edges; bin `k` covers `[edges[k], edges[k+1])`.
    pub edges_nm: Vec<f64>,
    pub counts: Vec<usize>,
    /// Index of the most populated bin (first on ties).
    pub mode_bin: usize,
}

pub const ZPL_HIST_MIN_NM: f64 = 550.0;
pub const ZPL_HIST_MAX_NM: f64 = 900.0;

/// Bins emitter ZPLs over [550, 900] nm. Values outside the range land in
/// the boundary bins so the counts always sum to the emitter count.
pub fn zpl_histogram(records: &[EmitterRecord], bin_nm: f64) -> Result<ZplHistogram> {
    if !bin_nm.is_finite() || bin_nm <= 0.0 {
        return Err(Error::domain("bin width must be > 0"));
    }
    let span = ZPL_HIST_MAX_NM - ZPL_HIST_MIN_NM;
    let n_bins = (span / bin_nm).ceil() as usize;
    if n_bins == 0 || n_bins > 100_000 {
        return Err(Error::domain("bin width out of range"));
    }
    let mut counts = vec![0usize; n_bins];
    for r in records.iter().filter(|r| !r.is_flake_marker()) {
        let zpl = r.zpl_nm.expect("emitter rows carry a ZPL");
        let idx = ((zpl - ZPL_HIST_MIN_NM) / bin_nm).floor();
        let idx = (idx.max(0.0) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let mode_bin = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let edges_nm = (0..=n_bins)
        .map(|k| ZPL_HIST_MIN_NM + k as f64 * bin_nm)
        .collect();
    Ok(ZplHistogram {
        edges_nm,
        counts,
        mode_bin,
    })
}

/// Per-material census summary.
#[derive(Debug, Clone)]
pub struct MaterialSummary {
    pub material: Material,
    pub emitter_count: usize,
    pub flake_count: usize,
    pub histogram: ZplHistogram,
    pub density: DensityStats,
    pub odmr: OdmrFraction,
    pub long_wavelength_fraction: f64,
}

/// Whole-survey summary, grouped per host material.
#[derive(Debug, Clone)]
pub struct CensusSummary {
    pub per_material: Vec<MaterialSummary>,
    pub total_emitters: usize,
    pub rejected_rows: usize,
}

impl CensusSummary {
    pub fn compute(
        records: &[EmitterRecord],
        report: &IngestReport,
        bin_nm: f64,
    ) -> Result<CensusSummary> {
        let mut materials: Vec<Material> = records.iter().map(|r| r.material).collect();
        materials.sort();
        materials.dedup();
        let mut per_material = Vec::new();
        for m in materials {
            let subset: Vec<EmitterRecord> =
                records.iter().filter(|r| r.material == m).cloned().collect();
            let emitters = subset.iter().filter(|r| !r.is_flake_marker()).count();
            if emitters == 0 {
                continue;
            }
            let mut flakes: Vec<&str> = subset.iter().map(|r| r.flake_id.as_str()).collect();
            flakes.sort();
            flakes.dedup();
            per_material.push(MaterialSummary {
                material: m,
                emitter_count: emitters,
                flake_count: flakes.len(),
                histogram: zpl_histogram(&subset, bin_nm)?,
                density: density_stats(&subset)?,
                odmr: odmr_fraction(&subset)?,
                long_wavelength_fraction: long_wavelength_fraction(
                    &subset,
                    LONG_WL_THRESHOLD_NM,
                    LONG_WL_UPPER_NM,
                )?[&m],
            });
        }
        Ok(CensusSummary {
            total_emitters: records.iter().filter(|r| !r.is_flake_marker()).count(),
            rejected_rows: report.rejections.len(),
            per_material,
        })
    }

    /// Human-readable report.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "emitter census: {} emitters, {} rejected rows", self.total_emitters, self.rejected_rows);
        for m in &self.per_material {
            let _ = writeln!(s, "\n[{}]", m.material);
            let _ = writeln!(s, "  emitters: {} across {} flakes", m.emitter_count, m.flake_count);
            let _ = writeln!(
                s,
                "  density per 30x30 um^2 tile: mean {:.2}, min {:.2}, q1 {:.2}, median {:.2}, q3 {:.2}, max {:.2}",
                m.density.mean, m.density.min, m.density.q1, m.density.median, m.density.q3, m.density.max
            );
            let _ = writeln!(
                s,
                "  ODMR active: {}/{} = {:.1}% (Wilson 95%: {:.1}%..{:.1}%)",
                m.odmr.active,
                m.odmr.total,
                m.odmr.fraction * 100.0,
                m.odmr.wilson_low * 100.0,
                m.odmr.wilson_high * 100.0
            );
            let _ = writeln!(
                s,
                "  ZPL in ({:.0}, {:.0}] nm: {:.1}%",
                LONG_WL_THRESHOLD_NM,
                LONG_WL_UPPER_NM,
                m.long_wavelength_fraction * 100.0
            );
            let lo = m.histogram.edges_nm[m.histogram.mode_bin];
            let hi = m.histogram.edges_nm[m.histogram.mode_bin + 1];
            let _ = writeln!(s, "  ZPL mode bin: [{lo:.0}, {hi:.0}) nm");
        }
        s
    }
}
