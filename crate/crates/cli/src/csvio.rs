//! CSV readers and writers for the tool's file formats. All files are plain
//! comma-separated text without quoting; floats are written with Rust's
//! shortest round-trip formatting so reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use spinsim_core::experiments::{
    AngleScan, FanMap, OdmrSpectrum, PlTrace, PulseSegment, PulseSequence,
};
use spinsim_core::fit::{FieldScale, FitResult, ResonanceObservation};
use spinsim_core::rates::AmplifierTable;
use spinsim_core::spin::{FieldVector, TransitionLabel};
use spinsim_core::FieldVector64;

use crate::{Category, CliError};

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

pub fn render_spectrum(sp: &OdmrSpectrum<f64>) -> String {
    let mut s = String::from("frequency_mhz,contrast_percent\n");
    for (f, c) in sp.frequencies_mhz.iter().zip(&sp.contrast_percent) {
        let _ = writeln!(s, "{f},{c}");
    }
    s
}

/// Long-format fan map: one row per (field, frequency) point.
pub fn render_fan(map: &FanMap<f64>) -> String {
    let mut s = String::from("b_mt,frequency_mhz,contrast_percent\n");
    for (bi, b) in map.b_values_mt.iter().enumerate() {
        for (fi, f) in map.frequencies_mhz.iter().enumerate() {
            let _ = writeln!(s, "{b},{f},{}", map.contrast_percent[bi][fi]);
        }
    }
    s
}

/// The Zeeman guide lines sampled on the fan's field axis.
pub fn render_overlay_lines(map: &FanMap<f64>) -> String {
    let mut s = String::from("label,b_mt,frequency_mhz\n");
    for line in &map.lines {
        for &b in &map.b_values_mt {
            let f = line.intercept_mhz + line.slope_mhz_per_mt * b;
            let _ = writeln!(s, "{},{b},{f}", line.label);
        }
    }
    s
}

pub fn render_angle_scan(scan: &AngleScan<f64>) -> String {
    let mut s = String::from("angle_deg,label,frequency_mhz\n");
    for (k, angle) in scan.angles_deg.iter().enumerate() {
        for (label, f) in &scan.entries[k] {
            let _ = writeln!(s, "{angle},{label},{f}");
        }
    }
    s
}

pub fn render_trace(trace: &PlTrace<f64>) -> String {
    let mut s = String::from("time_us,pl_rate_per_us\n");
    for (t, pl) in trace.times_us.iter().zip(&trace.pl_per_us) {
        let _ = writeln!(s, "{t},{pl}");
    }
    s
}

pub fn render_g2(taus: &[f64], ideal: &[f64], with_background: Option<&[f64]>) -> String {
    let mut s = String::new();
    match with_background {
        Some(bg) => {
            s.push_str("tau_us,g2,g2_with_background\n");
            for ((t, g), b) in taus.iter().zip(ideal).zip(bg) {
                let _ = writeln!(s, "{t},{g},{b}");
            }
        }
        None => {
            s.push_str("tau_us,g2\n");
            for (t, g) in taus.iter().zip(ideal) {
                let _ = writeln!(s, "{t},{g}");
            }
        }
    }
    s
}

pub fn render_fit(result: &FitResult<f64>) -> String {
    let mut s = String::from("parameter,value\n");
    let _ = writeln!(s, "d_mhz,{}", result.d_mhz);
    let _ = writeln!(s, "e_mhz,{}", result.e_mhz);
    let _ = writeln!(s, "g_factor,{}", result.g_factor);
    let _ = writeln!(s, "tilt_deg,{}", result.tilt_deg);
    match &result.field_scale {
        FieldScale::Fixed => {
            let _ = writeln!(s, "field_scale,1");
        }
        FieldScale::Single(v) => {
            let _ = writeln!(s, "field_scale,{v}");
        }
        FieldScale::PerAngle(pairs) => {
            for (angle, scale) in pairs {
                let _ = writeln!(s, "field_scale@{angle}deg,{scale}");
            }
        }
    }
    let _ = writeln!(s, "residual_rms_mhz,{}", result.residual_rms_mhz);
    let _ = writeln!(s, "converged,{}", result.converged);
    let _ = writeln!(s, "n_restarts_used,{}", result.n_restarts_used);
    s
}

pub const OBSERVATION_HEADER: &str =
    "b_mt_x,b_mt_y,b_mt_z,angle_deg,label,frequency_mhz,sigma_mhz";

/// Reads resonance observations; `angle_deg` and `sigma_mhz` may be empty
/// (sigma falls back to the 10 MHz default).
pub fn parse_observations(text: &str) -> Result<Vec<ResonanceObservation<f64>>, CliError> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| CliError::input("empty observation file"))?;
    let normalized: String = header
        .1
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect::<Vec<_>>()
        .join(",");
    if normalized != OBSERVATION_HEADER {
        return Err(CliError::input(format!(
            "expected header `{OBSERVATION_HEADER}`, got `{}`",
            header.1.trim()
        )));
    }
    let mut out = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split(',').map(|c| c.trim()).collect();
        if cols.len() != 7 {
            return Err(CliError::input(format!(
                "line {line_no}: expected 7 columns, got {}",
                cols.len()
            )));
        }
        let num = |s: &str, name: &str| -> Result<f64, CliError> {
            s.parse().map_err(|_| {
                CliError::input(format!("line {line_no}: `{name}` is not a number: `{s}`"))
            })
        };
        let field = FieldVector::new(
            num(cols[0], "b_mt_x")?,
            num(cols[1], "b_mt_y")?,
            num(cols[2], "b_mt_z")?,
        )
        .map_err(|e| CliError::input(format!("line {line_no}: {e}")))?;
        let label = TransitionLabel::parse(cols[4]).ok_or_else(|| {
            CliError::input(format!(
                "line {line_no}: label must be T_MINUS, T_PLUS, DQT or DOUBLET, got `{}`",
                cols[4]
            ))
        })?;
        let frequency = num(cols[5], "frequency_mhz")?;
        let sigma = if cols[6].is_empty() {
            ResonanceObservation::<f64>::DEFAULT_SIGMA_MHZ
        } else {
            num(cols[6], "sigma_mhz")?
        };
        let mut obs = ResonanceObservation::with_sigma(field, label, frequency, sigma)
            .map_err(|e| CliError::input(format!("line {line_no}: {e}")))?;
        if !cols[3].is_empty() {
            obs = obs.at_angle(num(cols[3], "angle_deg")?);
        }
        out.push(obs);
    }
    Ok(out)
}

pub const SEQUENCE_HEADER: &str = "laser_on,mw_on,duration_us";

pub fn parse_sequence(text: &str) -> Result<PulseSequence<f64>, CliError> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| CliError::input("empty sequence file"))?;
    if header.1.trim().to_ascii_lowercase() != SEQUENCE_HEADER {
        return Err(CliError::input(format!(
            "expected header `{SEQUENCE_HEADER}`, got `{}`",
            header.1.trim()
        )));
    }
    let mut segments = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split(',').map(|c| c.trim()).collect();
        if cols.len() != 3 {
            return Err(CliError::input(format!(
                "line {line_no}: expected 3 columns"
            )));
        }
        let flag = |s: &str| match s.to_ascii_lowercase().as_str() {
            "true" | "1" | "on" => Ok(true),
            "false" | "0" | "off" => Ok(false),
            _ => Err(CliError::input(format!(
                "line {line_no}: not a flag: `{s}`"
            ))),
        };
        segments.push(PulseSegment {
            laser_on: flag(cols[0])?,
            mw_on: flag(cols[1])?,
            duration_us: cols[2].parse().map_err(|_| {
                CliError::input(format!("line {line_no}: bad duration `{}`", cols[2]))
            })?,
        });
    }
    PulseSequence::new(segments).map_err(|e| CliError::input(e.to_string()))
}

pub const AMPLIFIER_HEADER: &str = "frequency_mhz,gain";

pub fn parse_amplifier_table(text: &str) -> Result<AmplifierTable<f64>, CliError> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| CliError::input("empty amplifier table"))?;
    if header.1.trim().to_ascii_lowercase() != AMPLIFIER_HEADER {
        return Err(CliError::input(format!(
            "expected header `{AMPLIFIER_HEADER}`, got `{}`",
            header.1.trim()
        )));
    }
    let mut points = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split(',').map(|c| c.trim()).collect();
        if cols.len() != 2 {
            return Err(CliError::input(format!(
                "line {line_no}: expected 2 columns"
            )));
        }
        let f: f64 = cols[0]
            .parse()
            .map_err(|_| CliError::input(format!("line {line_no}: bad frequency")))?;
        let g: f64 = cols[1]
            .parse()
            .map_err(|_| CliError::input(format!("line {line_no}: bad gain")))?;
        points.push((f, g));
    }
    AmplifierTable::new(points).map_err(|e| CliError::input(e.to_string()))
}

/// Parses `start:stop:step` ranges or comma lists of numbers.
pub fn parse_value_list(text: &str) -> Result<Vec<f64>, CliError> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!(
                "range must be start:stop:step, got `{text}`"
            )));
        }
        let p = |s: &str| -> Result<f64, CliError> {
            s.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("not a number: `{s}`")))
        };
        let (start, stop, step) = (p(parts[0])?, p(parts[1])?, p(parts[2])?);
        if step <= 0.0 || stop < start {
            return Err(CliError::usage("range requires stop >= start and step > 0"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| start + k as f64 * step).collect())
    } else {
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::usage(format!("not a number: `{s}`")))
            })
            .collect()
    }
}

/// Parses a `bx,by,bz` triple into a field vector.
pub fn parse_field_triple(text: &str) -> Result<FieldVector64, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!(
            "field must be bx,by,bz in mT, got `{text}`"
        )));
    }
    let p = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse()
            .map_err(|_| CliError::usage(format!("not a number: `{s}`")))
    };
    FieldVector::new(p(parts[0])?, p(parts[1])?, p(parts[2])?)
        .map_err(|e| CliError::new(Category::Usage, e.to_string()))
}

pub fn write_output(
    path: &Path,
    contents: &str,
    manifest: &mut crate::manifest::RunManifest,
) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    manifest.add_output(path, contents.as_bytes());
    Ok(())
}

/// Writes the manifest next to its primary output as `<name>.manifest`.
pub fn write_manifest(
    primary_output: &Path,
    manifest: &crate::manifest::RunManifest,
) -> Result<(), CliError> {
    let mut name = primary_output
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string());
    name.push_str(".manifest");
    let path = primary_output.with_file_name(name);
    std::fs::write(&path, manifest.render())
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}
