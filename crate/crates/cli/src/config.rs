//! Sectioned key-value configuration with strict validation.
//!
//! Unknown sections or keys, duplicate keys and invariant violations are
//! rejected with line numbers; every default applied for an omitted key is
//! logged so a run's effective parameters are always visible.

use std::collections::BTreeMap;

use spinsim_core::experiments::SweepSpec;
use spinsim_core::rates::RateParams;
use spinsim_core::spin::{PairModel, ZfsParams};
use spinsim_core::{PairModel64, RateParams64, SweepSpec64, ZfsParams64};

use crate::{Category, CliError};

/// Effective run parameters.
#[derive(Debug, Clone)]
pub struct Config {
    pub zfs: ZfsParams64,
    pub pair: PairModel64,
    pub rates: RateParams64,
    pub mw_drive_rate: f64,
    pub mw_linewidth_fwhm_mhz: f64,
    pub amplifier_table_path: Option<String>,
    pub sweep: SweepSpec64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            zfs: ZfsParams::new(950.0, 200.0, 2.0).expect("default ZFS valid"),
            pair: PairModel::default(),
            rates: RateParams::default(),
            mw_drive_rate: 1.0,
            mw_linewidth_fwhm_mhz: 30.0,
            amplifier_table_path: None,
            sweep: SweepSpec::new(100.0, 4000.0, 2.0).expect("default sweep valid"),
        }
    }
}

const KNOWN: &[(&str, &[&str])] = &[
    ("zfs", &["d_mhz", "e_mhz", "g_factor"]),
    ("pair", &["j_mhz", "delta_x_mhz", "delta_z_mhz"]),
    (
        "rates",
        &[
            "k_pump", "k_rad", "k_isc_p1", "k_isc_0", "k_isc_m1", "k_ct", "k_rec_s", "k_rec_t",
        ],
    ),
    (
        "mw",
        &["drive_rate", "linewidth_fwhm_mhz", "amplifier_table_path"],
    ),
    ("sweep", &["f_min_mhz", "f_max_mhz", "f_step_mhz"]),
];

fn config_err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::new(
        Category::Config,
        format!("line {line}: {}", msg.into()),
    )
}

/// Parses the config text. Returns the effective configuration and a log of
/// applied defaults and remap warnings.
pub fn parse_config(text: &str) -> Result<(Config, Vec<String>), CliError> {
    // First pass: collect (section, key) -> (raw value, line).
    let mut values: BTreeMap<(String, String), (String, usize)> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| config_err(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            if !KNOWN.iter().any(|(s, _)| *s == name) {
                return Err(config_err(line_no, format!("unknown section `[{name}]`")));
            }
            section = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(line_no, "expected `key = value`"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let section = section
            .clone()
            .ok_or_else(|| config_err(line_no, "key appears before any [section]"))?;
        let known_keys = KNOWN
            .iter()
            .find(|(s, _)| *s == section)
            .map(|(_, ks)| *ks)
            .expect("section validated");
        if !known_keys.contains(&key.as_str()) {
            return Err(config_err(
                line_no,
                format!("unknown key `{key}` in section `[{section}]`"),
            ));
        }
        if values
            .insert((section.clone(), key.clone()), (value, line_no))
            .is_some()
        {
            return Err(config_err(
                line_no,
                format!("duplicate key `{section}.{key}`"),
            ));
        }
    }

    let mut log = Vec::new();
    let defaults = Config::default();

    fn get_number(
        values: &BTreeMap<(String, String), (String, usize)>,
        log: &mut Vec<String>,
        section: &str,
        key: &str,
        default: f64,
    ) -> Result<(f64, usize), CliError> {
        match values.get(&(section.to_string(), key.to_string())) {
            Some((v, line)) => {
                let parsed: f64 = v.parse().map_err(|_| {
                    config_err(*line, format!("`{section}.{key}` is not a number: `{v}`"))
                })?;
                if !parsed.is_finite() {
                    return Err(config_err(*line, format!("`{section}.{key}` must be finite")));
                }
                Ok((parsed, *line))
            }
            None => {
                log.push(format!("default applied: {section}.{key} = {default}"));
                Ok((default, 0))
            }
        }
    }
    let number = |section: &str, key: &str, default: f64, log: &mut Vec<String>| {
        get_number(&values, log, section, key, default)
    };

    let (d, d_line) = number("zfs", "d_mhz", defaults.zfs.d_mhz, &mut log)?;
    let (e, e_line) = number("zfs", "e_mhz", defaults.zfs.e_mhz, &mut log)?;
    let (g, g_line) = number("zfs", "g_factor", defaults.zfs.g_factor, &mut log)?;
    let (zfs, remapped) = ZfsParams::remapped(d, e, g)
        .map_err(|err| config_err(d_line.max(e_line).max(g_line), err.to_string()))?;
    if remapped {
        log.push(format!(
            "warning: zfs (D = {d}, E = {e}) lies outside the conventional range; \
             remapped to the equivalent (D = {}, E = {})",
            zfs.d_mhz, zfs.e_mhz
        ));
    }

    let (j, j_line) = number("pair", "j_mhz", defaults.pair.j_mhz, &mut log)?;
    let (dx, dx_line) = number("pair", "delta_x_mhz", defaults.pair.delta_x_mhz, &mut log)?;
    let (dz, dz_line) = number("pair", "delta_z_mhz", defaults.pair.delta_z_mhz, &mut log)?;
    let pair = PairModel::new(j, dx, dz)
        .map_err(|err| config_err(j_line.max(dx_line).max(dz_line), err.to_string()))?;

    let rate_keys = [
        ("k_pump", defaults.rates.k_pump),
        ("k_rad", defaults.rates.k_rad),
        ("k_isc_p1", defaults.rates.k_isc[0]),
        ("k_isc_0", defaults.rates.k_isc[1]),
        ("k_isc_m1", defaults.rates.k_isc[2]),
        ("k_ct", defaults.rates.k_ct),
        ("k_rec_s", defaults.rates.k_rec_s),
        ("k_rec_t", defaults.rates.k_rec_t),
    ];
    let mut parsed_rates = [0.0f64; 8];
    let mut last_rate_line = 0usize;
    for (slot, (key, default)) in parsed_rates.iter_mut().zip(rate_keys.iter()) {
        let (v, line) = number("rates", key, *default, &mut log)?;
        if v < 0.0 {
            return Err(config_err(
                line,
                format!("`rates.{key}` must be >= 0, got {v}"),
            ));
        }
        last_rate_line = last_rate_line.max(line);
        *slot = v;
    }
    let rates = RateParams64 {
        k_pump: parsed_rates[0],
        k_rad: parsed_rates[1],
        k_isc: [parsed_rates[2], parsed_rates[3], parsed_rates[4]],
        k_ct: parsed_rates[5],
        k_rec_s: parsed_rates[6],
        k_rec_t: parsed_rates[7],
    };
    rates
        .validate()
        .map_err(|err| config_err(last_rate_line, err.to_string()))?;

    let (drive, drive_line) = number("mw", "drive_rate", defaults.mw_drive_rate, &mut log)?;
    if drive < 0.0 {
        return Err(config_err(drive_line, "`mw.drive_rate` must be >= 0"));
    }
    let (fwhm, fwhm_line) = number("mw", "linewidth_fwhm_mhz", defaults.mw_linewidth_fwhm_mhz, &mut log)?;
    if fwhm <= 0.0 {
        return Err(config_err(fwhm_line, "`mw.linewidth_fwhm_mhz` must be > 0"));
    }
    let amplifier_table_path = match values.get(&("mw".to_string(), "amplifier_table_path".to_string()))
    {
        Some((v, _)) => Some(v.clone()),
        None => None,
    };

    let (f_min, l1) = number("sweep", "f_min_mhz", defaults.sweep.f_min_mhz, &mut log)?;
    let (f_max, l2) = number("sweep", "f_max_mhz", defaults.sweep.f_max_mhz, &mut log)?;
    let (f_step, l3) = number("sweep", "f_step_mhz", defaults.sweep.f_step_mhz, &mut log)?;
    let sweep = SweepSpec::new(f_min, f_max, f_step)
        .map_err(|err| config_err(l1.max(l2).max(l3), err.to_string()))?;

    Ok((
        Config {
            zfs,
            pair,
            rates,
            mw_drive_rate: drive,
            mw_linewidth_fwhm_mhz: fwhm,
            amplifier_table_path,
            sweep,
        },
        log,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_all_defaults_logged() {
        let (cfg, log) = parse_config("").unwrap();
        assert_eq!(cfg.zfs.d_mhz, 950.0);
        assert_eq!(cfg.rates.k_pump, 10.0);
        assert_eq!(cfg.sweep.f_step_mhz, 2.0);
        // Every key was defaulted and logged.
        assert_eq!(log.len(), 3 + 3 + 8 + 2 + 3);
        assert!(log.iter().any(|l| l.contains("rates.k_pump = 10")));
    }

    #[test]
    fn out_of_convention_zfs_is_remapped_with_warning() {
        let text = "[zfs]\nd_mhz = 950\ne_mhz = 400\n";
        let (cfg, log) = parse_config(text).unwrap();
        assert!(log.iter().any(|l| l.contains("remapped")));
        assert!(cfg.zfs.e_mhz >= 0.0);
        assert!(cfg.zfs.e_mhz <= cfg.zfs.d_mhz.abs() / 3.0 + 1e-9);
    }

    #[test]
    fn negative_rate_is_rejected_naming_the_key() {
        let text = "[rates]\nk_ct = -1\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.category, Category::Config);
        assert!(err.msg.contains("k_ct"), "{}", err.msg);
        assert!(err.msg.contains("line 2"), "{}", err.msg);
    }

    #[test]
    fn duplicate_and_unknown_keys_are_rejected_with_lines() {
        let dup = "[zfs]\nd_mhz = 900\nd_mhz = 950\n";
        let err = parse_config(dup).unwrap_err();
        assert!(err.msg.contains("line 3") && err.msg.contains("duplicate"));

        let unknown_key = "[zfs]\nd_mhz = 900\nq_factor = 1\n";
        let err = parse_config(unknown_key).unwrap_err();
        assert!(err.msg.contains("line 3") && err.msg.contains("unknown key"));

        let unknown_section = "[magnets]\nstrength = 2\n";
        let err = parse_config(unknown_section).unwrap_err();
        assert!(err.msg.contains("line 1") && err.msg.contains("unknown section"));

        let orphan = "d_mhz = 900\n";
        let err = parse_config(orphan).unwrap_err();
        assert!(err.msg.contains("before any [section]"));
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "# a comment\n\n[zfs]\n# another\nd_mhz = 850\ne_mhz = 0\n";
        let (cfg, _) = parse_config(text).unwrap();
        assert_eq!(cfg.zfs.d_mhz, 850.0);
        assert_eq!(cfg.zfs.e_mhz, 0.0);
    }
}
