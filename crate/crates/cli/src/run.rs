//! Subcommand definitions and execution.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use spinsim_core::experiments::{
    angle_scan, cw_sweep, overlay_lines, pulsed_transient, FanMap, MwSettings, SweepSpec,
};
use spinsim_core::fit::{fit_angle_series, fit_zfs, DqtIntercept, FitOptions, ScaleMode};
use spinsim_core::rates::{
    apply_g2_background, assemble_generator, g2, g2_background_for_target, steady_state, MwDrive,
    IDX_GS, N_LEVELS,
};
use spinsim_core::spin::FieldVector;
use spinsim_core::{census, FieldVector64};

use crate::config::{parse_config, Config};
use crate::csvio;
use crate::manifest::RunManifest;
use crate::par::par_map;
use crate::{Category, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "spinsim",
    version,
    about = "Simulator and fitting toolkit for optically addressable spin complexes in hBN"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// CW ODMR spectrum at one magnetic field.
    #[command(name = "spectrum")]
    Spectrum(SpectrumArgs),
    /// Fan of CW spectra over a field list, with Zeeman guide lines.
    #[command(name = "fan")]
    Fan(FanArgs),
    /// Exact transition frequencies versus field angle.
    #[command(name = "angle")]
    Angle(AngleArgs),
    /// Photoluminescence transient of a laser/microwave pulse program.
    #[command(name = "pulse")]
    Pulse(PulseArgs),
    /// Photon correlation g2(tau) of the model.
    #[command(name = "g2")]
    G2(G2Args),
    /// Fit D, E (and g) to resonance observations at known fields.
    #[command(name = "fit")]
    Fit(FitArgs),
    /// Joint fit of D, E, g, tilt and field scale to a rotation series.
    #[command(name = "fit-angle")]
    FitAngle(FitAngleArgs),
    /// Survey statistics over an emitter census CSV.
    #[command(name = "census")]
    Census(CensusArgs),
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Static field as `bx,by,bz` in mT.
    #[arg(long = "b-mt", value_name = "BX,BY,BZ")]
    pub b_mt: Option<String>,
    /// Field magnitude in mT; combine with --theta-deg.
    #[arg(long = "b-mag", value_name = "MT")]
    pub b_mag: Option<f64>,
    /// Angle from the out-of-plane axis in degrees; field is
    /// |B| (sin t, 0, cos t).
    #[arg(long = "theta-deg", value_name = "DEG")]
    pub theta_deg: Option<f64>,
}

impl FieldArgs {
    fn resolve(&self) -> Result<FieldVector64, CliError> {
        match (&self.b_mt, self.b_mag, self.theta_deg) {
            (Some(triple), None, None) => csvio::parse_field_triple(triple),
            (None, Some(mag), theta) => {
                FieldVector::from_polar(mag, theta.unwrap_or(0.0))
                    .map_err(|e| CliError::usage(e.to_string()))
            }
            (None, None, _) => Err(CliError::usage(
                "a field is required: --b-mt bx,by,bz or --b-mag (with optional --theta-deg)",
            )),
            _ => Err(CliError::usage(
                "--b-mt and --b-mag/--theta-deg are mutually exclusive",
            )),
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Configuration file; omitted keys use documented defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Override the sweep start (MHz).
    #[arg(long = "f-min-mhz")]
    pub f_min_mhz: Option<f64>,
    /// Override the sweep end (MHz).
    #[arg(long = "f-max-mhz")]
    pub f_max_mhz: Option<f64>,
    /// Override the sweep step (MHz).
    #[arg(long = "f-step-mhz")]
    pub f_step_mhz: Option<f64>,
    /// Output CSV: frequency_mhz,contrast_percent.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FanArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field list along +z in mT: `start:stop:step` or a comma list.
    #[arg(long = "b-list", value_name = "LIST")]
    pub b_list: String,
    /// Output CSV (long format): b_mt,frequency_mhz,contrast_percent.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV with the four Zeeman guide lines sampled on the field
    /// axis: label,b_mt,frequency_mhz.
    #[arg(long)]
    pub lines: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AngleArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field magnitude in mT.
    #[arg(long = "b-mag")]
    pub b_mag: f64,
    /// Angle list in degrees: `start:stop:step` or a comma list.
    #[arg(long)]
    pub angles: String,
    /// Optional per-angle field-magnitude corrections (comma list aligned
    /// with --angles).
    #[arg(long)]
    pub corrections: Option<String>,
    /// Output CSV: angle_deg,label,frequency_mhz.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PulseArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Pulse program CSV: laser_on,mw_on,duration_us.
    #[arg(long)]
    pub seq: PathBuf,
    /// Sampling resolution in microseconds.
    #[arg(long = "resolution-us")]
    pub resolution_us: f64,
    /// Drive frequency during mw_on segments (MHz).
    #[arg(long = "mw-freq-mhz")]
    pub mw_freq_mhz: Option<f64>,
    /// Start from the CW steady state instead of the ground state.
    #[arg(long = "from-steady")]
    pub from_steady: bool,
    /// Output CSV: time_us,pl_rate_per_us.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct G2Args {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Largest correlation delay in microseconds.
    #[arg(long = "tau-max-us", default_value_t = 50.0)]
    pub tau_max_us: f64,
    /// Delay grid step in microseconds.
    #[arg(long = "tau-step-us", default_value_t = 0.1)]
    pub tau_step_us: f64,
    /// Add a background-corrected column rescaled so g2(0) hits this value.
    #[arg(long = "g2-zero-target")]
    pub g2_zero_target: Option<f64>,
    /// Output CSV: `tau_us,g2[,g2_with_background]`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Observations CSV: b_mt_x,b_mt_y,b_mt_z,angle_deg,label,frequency_mhz,sigma_mhz.
    #[arg(long)]
    pub obs: PathBuf,
    /// Fix the g-factor instead of fitting it.
    #[arg(long = "fix-g")]
    pub fix_g: Option<f64>,
    /// Use straight Zeeman guide lines instead of exact diagonalization.
    #[arg(long = "linear-zeeman")]
    pub linear_zeeman: bool,
    /// Zero-field intercept convention for the DQT guide line:
    /// `2e` (standard) or `e` (the alternative reading).
    #[arg(long = "dqt-intercept", default_value = "2e")]
    pub dqt_intercept: String,
    /// Output CSV: parameter,value.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitAngleArgs {
    /// Observations CSV; every row must carry angle_deg.
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long = "fix-g")]
    pub fix_g: Option<f64>,
    /// Field-scale treatment: `single` or `per-angle`.
    #[arg(long = "scale-mode", default_value = "single")]
    pub scale_mode: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    /// Emitter survey CSV.
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    /// Report directory (created if missing).
    #[arg(long)]
    pub report: PathBuf,
    /// ZPL histogram bin width in nm.
    #[arg(long = "bin-nm", default_value_t = 10.0)]
    pub bin_nm: f64,
}

/// Loads the configuration (or defaults), records it in the manifest and
/// prints the applied-default/warning log to stderr.
fn load_config(
    path: &Option<PathBuf>,
    manifest: &mut RunManifest,
) -> Result<Config, CliError> {
    match path {
        Some(p) => {
            let text = csvio::read_to_string(p)?;
            manifest.set_config(&p.display().to_string(), text.as_bytes());
            let (cfg, log) = parse_config(&text)?;
            for line in log {
                eprintln!("config: {line}");
            }
            Ok(cfg)
        }
        None => {
            eprintln!("config: none given, using defaults");
            Ok(Config::default())
        }
    }
}

/// Microwave sweep settings from the config, loading the amplifier table
/// when one is configured.
fn mw_settings(cfg: &Config, manifest: &mut RunManifest) -> Result<MwSettings<f64>, CliError> {
    let mut mw = MwSettings::new(cfg.mw_drive_rate, cfg.mw_linewidth_fwhm_mhz)
        .map_err(|e| CliError::new(Category::Config, e.to_string()))?;
    if let Some(path) = &cfg.amplifier_table_path {
        let p = Path::new(path);
        let text = csvio::read_to_string(p)?;
        manifest.add_input(p, text.as_bytes());
        mw.amplifier = Some(csvio::parse_amplifier_table(&text)?);
    }
    Ok(mw)
}

fn sweep_with_overrides(
    cfg: &Config,
    f_min: Option<f64>,
    f_max: Option<f64>,
    f_step: Option<f64>,
) -> Result<SweepSpec<f64>, CliError> {
    SweepSpec::new(
        f_min.unwrap_or(cfg.sweep.f_min_mhz),
        f_max.unwrap_or(cfg.sweep.f_max_mhz),
        f_step.unwrap_or(cfg.sweep.f_step_mhz),
    )
    .map_err(|e| CliError::usage(e.to_string()))
}

pub fn execute(cli: Cli, command_line: &str) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Spectrum(a) => run_spectrum(a, command_line),
        Cmd::Fan(a) => run_fan(a, command_line),
        Cmd::Angle(a) => run_angle(a, command_line),
        Cmd::Pulse(a) => run_pulse(a, command_line),
        Cmd::G2(a) => run_g2(a, command_line),
        Cmd::Fit(a) => run_fit(a, command_line),
        Cmd::FitAngle(a) => run_fit_angle(a, command_line),
        Cmd::Census(a) => run_census(a, command_line),
    }
}

fn run_spectrum(args: SpectrumArgs, command: &str) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command);
    let cfg = load_config(&args.config, &mut manifest)?;
    let field = args.field.resolve()?;
    let mw = mw_settings(&cfg, &mut manifest)?;
    let spec = sweep_with_overrides(&cfg, args.f_min_mhz, args.f_max_mhz, args.f_step_mhz)?;
    let sp = cw_sweep(&cfg.zfs, &cfg.pair, &cfg.rates, &field, &mw, &spec)?;
    csvio::write_output(&args.out, &csvio::render_spectrum(&sp), &mut manifest)?;
    csvio::write_manifest(&args.out, &manifest)?;
    println!("spectrum: {} points -> {}", sp.frequencies_mhz.len(), args.out.display());
    Ok(())
}

fn run_fan(args: FanArgs, command: &str) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command);
    let cfg = load_config(&args.config, &mut manifest)?;
    let mw = mw_settings(&cfg, &mut manifest)?;
    let b_list = csvio::parse_value_list(&args.b_list)?;
    if b_list.is_empty() {
        return Err(CliError::usage("field list is empty"));
    }
    for w in b_list.windows(2) {
        if w[1] <= w[0] {
            return Err(CliError::usage("field list must be strictly increasing"));
        }
    }
    // Rows are independent; evaluate them in parallel and assemble in input
    // order, which reproduces the serial fan bit for bit.
    let rows: Vec<Result<Vec<f64>, spinsim_core::Error>> = par_map(&b_list, |&b| {
        let field = FieldVector::new(0.0, 0.0, b)?;
        Ok(cw_sweep(&cfg.zfs, &cfg.pair, &cfg.rates, &field, &mw, &cfg.sweep)?.contrast_percent)
    });
    let mut contrast = Vec::with_capacity(rows.len());
    for row in rows {
        contrast.push(row?);
    }
    let map = FanMap {
        b_values_mt: b_list,
        frequencies_mhz: cfg.sweep.frequencies(),
        contrast_percent: contrast,
        lines: overlay_lines(&cfg.zfs),
    };
    csvio::write_output(&args.out, &csvio::render_fan(&map), &mut manifest)?;
    if let Some(lines_path) = &args.lines {
        csvio::write_output(lines_path, &csvio::render_overlay_lines(&map), &mut manifest)?;
    }
    csvio::write_manifest(&args.out, &manifest)?;
    println!(
        "fan: {} fields x {} frequencies -> {}",
        map.b_values_mt.len(),
        map.frequencies_mhz.len(),
        args.out.display()
    );
    Ok(())
}

fn run_angle(args: AngleArgs, command: &str) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command);
    let cfg = load_config(&args.config, &mut manifest)?;
    let angles = csvio::parse_value_list(&args.angles)?;
    let corrections = match &args.corrections {
        Some(c) => Some(csvio::parse_value_list(c)?),
        None => None,
    };
    let scan = angle_scan(&cfg.zfs, args.b_mag, &angles, corrections.as_deref())
        .map_err(|e| CliError::usage(e.to_string()))?;
    csvio::write_output(&args.out, &csvio::render_angle_scan(&scan), &mut manifest)?;
    csvio::write_manifest(&args.out, &manifest)?;
    println!("angle: {} angles -> {}", angles.len(), args.out.display());
    Ok(())
}

fn run_pulse(args: PulseArgs, command: &str) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command);
    let cfg = load_config(&args.config, &mut manifest)?;
    let field = args.field.resolve()?;
    let seq_text = csvio::read_to_string(&args.seq)?;
    manifest.add_input(&args.seq, seq_text.as_bytes());
    let seq = csvio::parse_sequence(&seq_text)?;

    let drives_mw = seq.segments.iter().any(|s| s.mw_on);
    let mw = match (drives_mw, args.mw_freq_mhz) {
        (true, None) => {
            return Err(CliError::usage(
                "the sequence gates microwaves on; --mw-freq-mhz is required",
            ))
        }
        (_, Some(f)) => {
            let mut drive = MwDrive::new(f, cfg.mw_drive_rate, cfg.mw_linewidth_fwhm_mhz)
                .map_err(|e| CliError::usage(e.to_string()))?;
            if let Some(path) = &cfg.amplifier_table_path {
                let p = Path::new(path);
                let text = csvio::read_to_string(p)?;
                manifest.add_input(p, text.as_bytes());
                drive.amplifier = Some(csvio::parse_amplifier_table(&text)?);
            }
            Some(drive)
        }
        (false, None) => None,
    };

    let p0 = if args.from_steady {
        let gen = assemble_generator(&cfg.zfs, &cfg.pair, &cfg.rates, &field, None)?;
        steady_state(&gen)?
    } else {
        let mut p = vec![0.0; N_LEVELS];
        p[IDX_GS] = 1.0;
        p
    };
    let trace = pulsed_transient(
        &cfg.zfs,
        &cfg.pair,
        &cfg.rates,
        &field,
        mw.as_ref(),
        &p0,
        &seq,
        args.resolution_us,
    )?;
    csvio::write_output(&args.out, &csvio::render_trace(&trace), &mut manifest)?;
    csvio::write_manifest(&args.out, &manifest)?;
    println!("pulse: {} samples -> {}", trace.times_us.len(), args.out.display());
    Ok(())
}

fn run_g2(args: G2Args, command: &str) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command);
    let cfg = load_config(&args.config, &mut manifest)?;
    let field = args.field.resolve()?;
    if !(args.tau_step_us > 0.0 && args.tau_max_us > 0.0) {
        return Err(CliError::usage("tau grid requires positive max and step"));
    }
    let n = (args.tau_max_us / args.tau_step_us).floor() as usize;
    let taus: Vec<f64> = (0..=n).map(|k| k as f64 * args.tau_step_us).collect();
    let ideal = g2(&cfg.zfs, &cfg.pair, &cfg.rates, &field, &taus)?;
    let with_bg = match args.g2_zero_target {
        Some(target) => {
            let b = g2_background_for_target(target)
                .map_err(|e| CliError::usage(e.to_string()))?;
            eprintln!("g2: background level {b} reaches g2(0) = {target}");
            let mut curve = ideal.clone();
            apply_g2_background(&mut curve, b);
            Some(curve)
        }
        None => None,
    };
    csvio::write_output(
        &args.out,
        &csvio::render_g2(&taus, &ideal, with_bg.as_deref()),
        &mut manifest,
    )?;
    csvio::write_manifest(&args.out, &manifest)?;
    println!("g2: {} delays -> {}", taus.len(), args.out.display());
    Ok(())
}

fn parse_dqt_convention(s: &str) -> Result<DqtIntercept, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "2e" => Ok(DqtIntercept::TwoE),
        "e" => Ok(DqtIntercept::E),
        _ => Err(CliError::usage(
            "--dqt-intercept must be `2e` or `e`",
        )),
    }
}

fn run_fit(args: FitArgs, command: &str) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command);
    let text = csvio::read_to_string(&args.obs)?;
    manifest.add_input(&args.obs, text.as_bytes());
    let obs = csvio::parse_observations(&text)?;
    let mut options = FitOptions::default();
    options.fix_g = args.fix_g;
    options.linear_zeeman = args.linear_zeeman;
    options.dqt_intercept = parse_dqt_convention(&args.dqt_intercept)?;
    let result = fit_zfs(&obs, &options).map_err(|e| CliError::input(e.to_string()))?;
    csvio::write_output(&args.out, &csvio::render_fit(&result), &mut manifest)?;
    csvio::write_manifest(&args.out, &manifest)?;
    println!(
        "fit: D = {:.2} MHz, E = {:.2} MHz, g = {:.4}, residual rms {:.3} MHz -> {}",
        result.d_mhz,
        result.e_mhz,
        result.g_factor,
        result.residual_rms_mhz,
        args.out.display()
    );
    Ok(())
}

fn run_fit_angle(args: FitAngleArgs, command: &str) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command);
    let text = csvio::read_to_string(&args.obs)?;
    manifest.add_input(&args.obs, text.as_bytes());
    let obs = csvio::parse_observations(&text)?;
    let mut options = FitOptions::default();
    options.fix_g = args.fix_g;
    options.scale_mode = match args.scale_mode.to_ascii_lowercase().as_str() {
        "single" => ScaleMode::Single,
        "per-angle" => ScaleMode::PerAngle,
        _ => return Err(CliError::usage("--scale-mode must be `single` or `per-angle`")),
    };
    let result = fit_angle_series(&obs, &options).map_err(|e| CliError::input(e.to_string()))?;
    csvio::write_output(&args.out, &csvio::render_fit(&result), &mut manifest)?;
    csvio::write_manifest(&args.out, &manifest)?;
    println!(
        "fit-angle: D = {:.2} MHz, E = {:.2} MHz, tilt = {:.2} deg -> {}",
        result.d_mhz,
        result.e_mhz,
        result.tilt_deg,
        args.out.display()
    );
    Ok(())
}

fn run_census(args: CensusArgs, command: &str) -> Result<(), CliError> {
    let mut manifest = RunManifest::new(command);
    let text = csvio::read_to_string(&args.input)?;
    manifest.add_input(&args.input, text.as_bytes());
    let (records, report) = census::ingest(&text).map_err(|e| CliError::input(e.to_string()))?;
    let summary = census::CensusSummary::compute(&records, &report, args.bin_nm)
        .map_err(|e| CliError::input(e.to_string()))?;

    std::fs::create_dir_all(&args.report)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", args.report.display())))?;

    csvio::write_output(
        &args.report.join("summary.txt"),
        &summary.to_text(),
        &mut manifest,
    )?;

    let mut fractions = String::from(
        "material,emitters,odmr_active,odmr_fraction,wilson_low,wilson_high,long_wavelength_fraction\n",
    );
    for m in &summary.per_material {
        use std::fmt::Write as _;
        let _ = writeln!(
            fractions,
            "{},{},{},{},{},{},{}",
            m.material,
            m.odmr.total,
            m.odmr.active,
            m.odmr.fraction,
            m.odmr.wilson_low,
            m.odmr.wilson_high,
            m.long_wavelength_fraction
        );
    }
    csvio::write_output(&args.report.join("fractions.csv"), &fractions, &mut manifest)?;

    let mut densities = String::from("flake_id,material,emitters,map_area_um2,per_tile_900um2\n");
    for m in &summary.per_material {
        use std::fmt::Write as _;
        for f in &m.density.per_flake {
            let _ = writeln!(
                densities,
                "{},{},{},{},{}",
                f.flake_id, f.material, f.emitters, f.map_area_um2, f.per_tile
            );
        }
    }
    csvio::write_output(&args.report.join("densities.csv"), &densities, &mut manifest)?;

    let mut hist = String::from("material,bin_low_nm,bin_high_nm,count\n");
    for m in &summary.per_material {
        use std::fmt::Write as _;
        for (k, count) in m.histogram.counts.iter().enumerate() {
            let _ = writeln!(
                hist,
                "{},{},{},{}",
                m.material,
                m.histogram.edges_nm[k],
                m.histogram.edges_nm[k + 1],
                count
            );
        }
    }
    csvio::write_output(&args.report.join("histogram.csv"), &hist, &mut manifest)?;

    // Written even when empty so a rerun into the same directory never
    // leaves a stale rejection list behind.
    let mut rej = String::from("line,reason\n");
    for r in &report.rejections {
        use std::fmt::Write as _;
        let _ = writeln!(rej, "{},{}", r.line, r.reason);
    }
    csvio::write_output(&args.report.join("rejections.csv"), &rej, &mut manifest)?;
    if !report.rejections.is_empty() {
        eprintln!(
            "census: {} rows rejected; see rejections.csv",
            report.rejections.len()
        );
    }
    csvio::write_manifest(&args.report.join("summary.txt"), &manifest)?;
    println!(
        "census: {} emitters, {} rejected rows -> {}",
        summary.total_emitters,
        summary.rejected_rows,
        args.report.display()
    );
    Ok(())
}
