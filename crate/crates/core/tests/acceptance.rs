//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured numbers (run with `--nocapture` to see them).

mod common;

use std::time::Instant;

use common::{char_poly_eigenvalues, long_time_populations, Rng};
use spinsim_core::census;
use spinsim_core::experiments::{
    angle_scan, cw_sweep, fan_scan, find_peaks, MwSettings, SweepSpec,
};
use spinsim_core::fit::{
    fit_angle_series, fit_zfs, predict, FitOptions, PredictMode, ResonanceObservation,
    ScaleMode, SpinHamiltonianParams,
};
use spinsim_core::rates::{
    apply_g2_background, assemble_generator, evolve, g2, g2_background_for_target, odmr_contrast,
    steady_state, MwDrive, RateParams, IDX_GS, N_LEVELS,
};
use spinsim_core::spin::{
    build_triplet_hamiltonian, doublet_frequency, triplet_levels, triplet_transitions,
    FieldVector, MsLabel, PairModel, TransitionLabel, ZfsParams, GAMMA_E_MHZ_PER_MT,
};

const GAMMA: f64 = GAMMA_E_MHZ_PER_MT;

fn bz(b: f64) -> FieldVector<f64> {
    FieldVector::new(0.0, 0.0, b).unwrap()
}

fn default_mw() -> MwSettings<f64> {
    MwSettings::new(1.0, 30.0).unwrap()
}

fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let den: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    num / den
}

/// Criterion 1: the three single-emitter resonance positions at 66 mT.
#[test]
fn criterion_1_resonance_positions() {
    let t0 = Instant::now();
    let zfs = ZfsParams::new(850.0, 0.0, 2.0).unwrap();
    let pair = PairModel::default();
    let rates = RateParams::default();
    let spec = SweepSpec::new(800.0, 3000.0, 2.0).unwrap();
    let sp = cw_sweep(&zfs, &pair, &rates, &bz(66.0), &default_mw(), &spec).unwrap();
    let max = sp.contrast_percent.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let peaks = find_peaks(&sp, max * 1e-3);
    assert_eq!(peaks.len(), 3, "expected exactly three resonances");

    let expected = [999.65, 1849.65, 2699.65];
    let coarse_mhz = [1.1e3, 1.9e3, 2.8e3];
    for ((peak, &exact), &coarse) in peaks.iter().zip(&expected).zip(&coarse_mhz) {
        assert!(
            (peak.frequency_mhz - exact).abs() < 2.0,
            "peak at {} vs exact {}",
            peak.frequency_mhz,
            exact
        );
        assert!(
            (peak.frequency_mhz - coarse).abs() < 150.0,
            "peak at {} vs coarse position {}",
            peak.frequency_mhz,
            coarse
        );
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "runtime {dt:?} exceeds 1 s");
    println!(
        "acceptance 1 (resonance positions): pass - peaks at {:.2}, {:.2}, {:.2} MHz in {:?}",
        peaks[0].frequency_mhz, peaks[1].frequency_mhz, peaks[2].frequency_mhz, dt
    );
}

/// Criterion 2: fan-map structure, ridge slopes, zero-field transitions.
#[test]
fn criterion_2_fan_structure() {
    let t0 = Instant::now();
    let zfs = ZfsParams::new(950.0, 200.0, 2.0).unwrap();
    let pair = PairModel::default();
    let rates = RateParams::default();

    // 40 x 1501 grid over B in [12, 160] mT, 100-4000 MHz.
    let b_list: Vec<f64> = (0..40).map(|k| 12.0 + k as f64 * (148.0 / 39.0)).collect();
    let spec = SweepSpec::new(100.0, 4000.0, 2.6).unwrap();
    let fan = fan_scan(&zfs, &pair, &rates, &default_mw(), &b_list, &spec).unwrap();
    assert_eq!(fan.b_values_mt.len(), 40);
    assert!(fan.frequencies_mhz.len() >= 1500);

    // Zero-field triplet transitions are exactly D +- E (eigen-oracle).
    let h0 = build_triplet_hamiltonian(&zfs, &FieldVector::zero()).unwrap();
    let t = triplet_transitions(&h0).unwrap();
    assert!((t.frequency(TransitionLabel::TMinus).unwrap() - 750.0).abs() < 1e-9);
    assert!((t.frequency(TransitionLabel::TPlus).unwrap() - 1150.0).abs() < 1e-9);
    let oracle = char_poly_eigenvalues(&h0.matrix);
    assert!((oracle[2] - oracle[0] - 1150.0).abs() < 1e-6);
    assert!((oracle[1] - oracle[0] - 750.0).abs() < 1e-6);

    // Labeled transition gaps per field row, signed against the m = 0 level.
    let mut tplus_gap = Vec::new();
    let mut tminus_gap = Vec::new();
    let mut dqt_gap = Vec::new();
    for &b in &b_list {
        let lv = triplet_levels(&build_triplet_hamiltonian(&zfs, &bz(b)).unwrap()).unwrap();
        let (ep, e0, em) = (
            lv.energy(MsLabel::P1),
            lv.energy(MsLabel::Zero),
            lv.energy(MsLabel::M1),
        );
        tplus_gap.push(ep - e0);
        tminus_gap.push(em - e0);
        dqt_gap.push(ep - em);
    }

    // The map's ridges sit on the labeled transitions: at sampled rows each
    // driven line still inside the sweep window has a contrast peak within
    // half a linewidth (the upper branches leave the 4 GHz window at high
    // field, as in the measured map).
    let in_window = |f: f64| f > 130.0 && f < 3970.0;
    for &row in &[0usize, 19, 39] {
        let spectrum = spinsim_core::experiments::OdmrSpectrum {
            frequencies_mhz: fan.frequencies_mhz.clone(),
            contrast_percent: fan.contrast_percent[row].clone(),
        };
        let maxc = spectrum
            .contrast_percent
            .iter()
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        let peaks = find_peaks(&spectrum, maxc * 1e-3);
        let b = fan.b_values_mt[row];
        let expect = [
            tplus_gap[row].abs(),
            tminus_gap[row].abs(),
            GAMMA * b, // doublet
        ];
        for want in expect.into_iter().filter(|&f| in_window(f)) {
            let nearest = peaks
                .iter()
                .map(|p| (p.frequency_mhz - want).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(
                nearest < 15.0,
                "no ridge within FWHM/2 of {want:.1} MHz at B = {b:.1} mT"
            );
        }
    }

    // Ridge slopes. Triplet and DQT branches curve below ~2 E / gamma_e, so
    // the 0.5% slope check runs on the linear regime (B >= 80 mT); the
    // doublet is linear everywhere. T_PLUS and the doublet are fit from the
    // contrast ridges themselves, T_MINUS and the DQT from the labeled gaps
    // (the signed T_MINUS branch and the MW-dark axial DQT are not separate
    // contrast ridges).
    let hi: Vec<usize> = (0..40).filter(|&k| b_list[k] >= 80.0).collect();
    let bs: Vec<f64> = hi.iter().map(|&k| b_list[k]).collect();

    let ridge_points = |expected: &dyn Fn(usize) -> f64| -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &row in &hi {
            let want = expected(row);
            if !in_window(want) {
                continue;
            }
            let spectrum = spinsim_core::experiments::OdmrSpectrum {
                frequencies_mhz: fan.frequencies_mhz.clone(),
                contrast_percent: fan.contrast_percent[row].clone(),
            };
            let maxc = spectrum
                .contrast_percent
                .iter()
                .fold(0.0f64, |a, &b| a.max(b.abs()));
            let peaks = find_peaks(&spectrum, maxc * 1e-3);
            let peak = peaks
                .iter()
                .min_by(|a, b| {
                    (a.frequency_mhz - want)
                        .abs()
                        .partial_cmp(&(b.frequency_mhz - want).abs())
                        .unwrap()
                })
                .map(|p| p.frequency_mhz)
                .expect("ridge peak");
            xs.push(b_list[row]);
            ys.push(peak);
        }
        (xs, ys)
    };

    let (tp_b, tplus_ridge) = ridge_points(&|row| tplus_gap[row]);
    assert!(tp_b.len() >= 5, "too few in-window T_PLUS ridge rows");
    let (db_b, doublet_ridge) = ridge_points(&|row| GAMMA * b_list[row]);
    assert!(db_b.len() >= 10, "too few in-window doublet ridge rows");

    let s_tplus = linear_slope(&tp_b, &tplus_ridge);
    let s_doublet = linear_slope(&db_b, &doublet_ridge);
    let gaps_hi = |v: &[f64]| -> Vec<f64> { hi.iter().map(|&k| v[k]).collect() };
    let s_tminus = linear_slope(&bs, &gaps_hi(&tminus_gap));
    let s_dqt = linear_slope(&bs, &gaps_hi(&dqt_gap));

    assert!(
        ((s_tplus - GAMMA) / GAMMA).abs() < 0.005,
        "T_PLUS ridge slope {s_tplus} vs {GAMMA}"
    );
    assert!(
        ((s_doublet - GAMMA) / GAMMA).abs() < 0.005,
        "doublet ridge slope {s_doublet} vs {GAMMA}"
    );
    assert!(
        ((s_tminus + GAMMA) / GAMMA).abs() < 0.005,
        "T_MINUS branch slope {s_tminus} vs -{GAMMA}"
    );
    assert!(
        ((s_dqt - 2.0 * GAMMA) / (2.0 * GAMMA)).abs() < 0.005,
        "DQT slope {s_dqt} vs {}",
        2.0 * GAMMA
    );

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "runtime {dt:?} exceeds 30 s");
    println!(
        "acceptance 2 (fan structure): pass - slopes {:.4}/{:.4}/{:.4}/{:.4} MHz/mT, zero-field 750/1150 exact, in {:?}",
        s_tplus, s_tminus, s_doublet, s_dqt, dt
    );
}

/// Criterion 3: contrast collapses at low field.
#[test]
fn criterion_3_low_field_collapse() {
    let zfs = ZfsParams::new(950.0, 200.0, 2.0).unwrap();
    let pair = PairModel::default();
    let rates = RateParams::default();
    let spec = SweepSpec::new(100.0, 4000.0, 4.0).unwrap();

    let max_abs = |b: f64| {
        cw_sweep(&zfs, &pair, &rates, &bz(b), &default_mw(), &spec)
            .unwrap()
            .contrast_percent
            .iter()
            .fold(0.0f64, |a, &c| a.max(c.abs()))
    };
    let m0 = max_abs(0.0);
    let m66 = max_abs(66.0);
    assert!(
        m0 < 0.05 * m66,
        "zero-field max |contrast| {m0} is not below 5% of {m66}"
    );

    // Doublet contrast decreases monotonically from 66 mT to 5 mT.
    let grid = [66.0, 50.0, 40.0, 30.0, 20.0, 10.0, 5.0];
    let mut last = f64::INFINITY;
    let mut values = Vec::new();
    for b in grid {
        let field = bz(b);
        let f = doublet_frequency(&field, 2.0).unwrap();
        let c = odmr_contrast(
            &zfs,
            &pair,
            &rates,
            &field,
            &MwDrive::new(f, 1.0, 30.0).unwrap(),
        )
        .unwrap()
        .abs();
        assert!(
            c < last,
            "doublet |contrast| not monotone: {c} at {b} mT after {last}"
        );
        values.push(c);
        last = c;
    }
    println!(
        "acceptance 3 (low-field collapse): pass - B=0/B=66 ratio {:.4}, doublet contrast {:.3}% -> {:.3}%",
        m0 / m66,
        values[0],
        values[values.len() - 1]
    );
}

/// Criterion 4: no charge transfer, no doublet resonance.
#[test]
fn criterion_4_charge_transfer_is_structural() {
    let zfs = ZfsParams::new(950.0, 200.0, 2.0).unwrap();
    let pair = PairModel::default();

    // With intersystem crossing still feeding the local metastable, k_ct = 0
    // leaves an absorbing trap: the cycle goes dark and the solver says so.
    let mut trapped = RateParams::default();
    trapped.k_ct = 0.0;
    let field = bz(66.0);
    let f_doublet = doublet_frequency(&field, 2.0).unwrap();
    let drive = MwDrive::new(f_doublet, 1.0, 30.0).unwrap();
    assert!(odmr_contrast(&zfs, &pair, &trapped, &field, &drive).is_err());

    // With the charge-separated branch fully disabled (k_ct = 0 and the ISC
    // feed off), the model stays bright and the doublet resonance is gone.
    let mut off = RateParams::default();
    off.k_ct = 0.0;
    off.k_isc = [0.0; 3];
    let c = odmr_contrast(&zfs, &pair, &off, &field, &drive).unwrap();
    assert!(
        c.abs() < 1e-9,
        "doublet contrast {c} survived with the branch off"
    );

    // And a whole fan map is flat: no doublet ridge (or any other) remains.
    let spec = SweepSpec::new(100.0, 4000.0, 10.0).unwrap();
    let map = fan_scan(&zfs, &pair, &off, &default_mw(), &[20.0, 66.0, 120.0], &spec).unwrap();
    for (row, b) in map.contrast_percent.iter().zip(&map.b_values_mt) {
        assert!(row.iter().all(|&c| c.abs() < 1e-9));
        let sp = spinsim_core::experiments::OdmrSpectrum {
            frequencies_mhz: map.frequencies_mhz.clone(),
            contrast_percent: row.clone(),
        };
        assert!(
            find_peaks(&sp, 1e-9).is_empty(),
            "ridge survived at B = {b} mT"
        );
    }
    println!(
        "acceptance 4 (charge transfer structural): pass - doublet contrast {c:.3e} % with branch off"
    );
}

/// Criterion 5: doublet isotropy and tilt recovery from noisy angle scans.
#[test]
fn criterion_5_angle_dependence() {
    let t0 = Instant::now();
    let zfs = ZfsParams::new(950.0, 200.0, 2.0).unwrap();

    // Doublet frequency flat versus angle.
    let angles: Vec<f64> = (0..=90).map(|k| k as f64).collect();
    let scan = angle_scan(&zfs, 66.0, &angles, None).unwrap();
    let f0 = scan.entries[0]
        .iter()
        .find(|(l, _)| *l == TransitionLabel::Doublet)
        .unwrap()
        .1;
    for row in &scan.entries {
        let f = row
            .iter()
            .find(|(l, _)| *l == TransitionLabel::Doublet)
            .unwrap()
            .1;
        assert!(((f - f0) / f0).abs() < 1e-9, "doublet varies with angle");
    }

    // Monte-Carlo tilt recovery: 100 trials of a 0..90 degree scan with
    // 10 MHz Gaussian noise; the 95th-percentile tilt error must be <= 5 deg.
    let truth_tilt = 4.0;
    let mut truth = SpinHamiltonianParams::new(950.0, 200.0, 2.0);
    truth.tilt_deg = truth_tilt;
    let scan_angles: Vec<f64> = (0..=9).map(|k| k as f64 * 10.0).collect();
    let mut rng = Rng::new(0x5eed_0005);
    let mut errors = Vec::with_capacity(100);
    for _ in 0..100 {
        let mut obs = Vec::new();
        for &a in &scan_angles {
            let nominal = FieldVector::from_polar(66.0, a).unwrap();
            for label in [TransitionLabel::TPlus, TransitionLabel::Doublet] {
                let f = predict(&truth, &nominal, label, PredictMode::Exact).unwrap()
                    + 10.0 * rng.gaussian();
                obs.push(
                    ResonanceObservation::new(nominal, label, f)
                        .unwrap()
                        .at_angle(a),
                );
            }
        }
        let mut opts = FitOptions::default();
        opts.fix_g = Some(2.0);
        opts.scale_mode = ScaleMode::Single;
        let r = fit_angle_series(&obs, &opts).unwrap();
        errors.push((r.tilt_deg - truth_tilt).abs());
    }
    errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p95 = errors[94];
    assert!(p95 <= 5.0, "95th-percentile tilt error {p95} deg exceeds 5");
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "runtime {dt:?} exceeds 10 s");
    println!(
        "acceptance 5 (angle dependence): pass - doublet flat to 1e-9, tilt p95 error {:.2} deg in {:?}",
        p95, dt
    );
}

/// Criterion 6: noiseless fit round-trip over 1000 random parameter draws.
#[test]
fn criterion_6_fit_round_trip() {
    let t0 = Instant::now();
    let fields = [15.0, 45.0, 90.0, 140.0];
    let labels = [
        TransitionLabel::TMinus,
        TransitionLabel::TPlus,
        TransitionLabel::Doublet,
    ];
    let run_draw = |rng: &mut Rng| -> (f64, f64, f64, spinsim_core::fit::FitResult<f64>) {
        let d = rng.range(100.0, 2900.0);
        let e = rng.range(0.0, d / 3.0 * 0.95).max(2.0);
        let g = rng.range(1.8, 2.2);
        let truth = SpinHamiltonianParams::new(d, e, g);
        let mut obs = Vec::new();
        for &b in &fields {
            for &l in &labels {
                let f = predict(&truth, &bz(b), l, PredictMode::Exact).unwrap();
                obs.push(ResonanceObservation::new(bz(b), l, f).unwrap());
            }
        }
        let r = fit_zfs(&obs, &FitOptions::default()).unwrap();
        (d, e, g, r)
    };

    let mut rng = Rng::new(0x5eed_0006);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let (d, e, g, r) = run_draw(&mut rng);
        let rel_d = (r.d_mhz - d).abs() / d.max(1.0);
        let rel_e = (r.e_mhz - e).abs() / e.max(1.0);
        let rel_g = (r.g_factor - g).abs() / g;
        let rel = rel_d.max(rel_e).max(rel_g);
        worst = worst.max(rel);
        assert!(
            rel < 1e-3,
            "draw {k}: truth ({d:.3}, {e:.3}, {g:.5}) fitted ({:.3}, {:.3}, {:.5})",
            r.d_mhz,
            r.e_mhz,
            r.g_factor
        );
    }
    // Deterministic: the same seed reproduces identical fit results.
    let mut r1 = Rng::new(0xd00d);
    let mut r2 = Rng::new(0xd00d);
    for _ in 0..25 {
        let a = run_draw(&mut r1);
        let b = run_draw(&mut r2);
        assert_eq!(a.3, b.3);
    }
    let dt = t0.elapsed();
    println!(
        "acceptance 6 (fit round-trip): pass - 1000 draws, worst relative error {:.2e}, deterministic, in {:?}",
        worst, dt
    );
}

/// Criterion 7: photon-correlation shape and the background knob.
#[test]
fn criterion_7_g2() {
    let zfs = ZfsParams::new(950.0, 200.0, 2.0).unwrap();
    let pair = PairModel::default();
    let rates = RateParams::default();
    let mut taus: Vec<f64> = (0..400).map(|k| k as f64 * 0.1).collect();
    taus.push(200.0);
    let curve = g2(&zfs, &pair, &rates, &bz(66.0), &taus).unwrap();
    assert!(curve[0].abs() < 1e-6, "g2(0) = {}", curve[0]);
    let tail = *curve.last().unwrap();
    assert!((tail - 1.0).abs() < 1e-6, "g2(inf) = {tail}");
    let peak = curve.iter().fold(0.0f64, |a, &b| a.max(b));
    assert!(peak > 1.0, "no bunching shoulder (max {peak})");

    let b = g2_background_for_target(0.1).unwrap();
    let mut with_bg = curve.clone();
    apply_g2_background(&mut with_bg, b);
    assert!(
        (with_bg[0] - 0.10).abs() <= 0.005,
        "backgrounded g2(0) = {}",
        with_bg[0]
    );
    println!(
        "acceptance 7 (g2): pass - g2(0) = {:.1e}, shoulder max {:.3}, tail {:.6}, backgrounded dip {:.3}",
        curve[0], peak, tail, with_bg[0]
    );
}

/// Criterion 8: census statistics on the reconstructed fixtures.
#[test]
fn criterion_8_census_fixtures() {
    let t0 = Instant::now();

    let mut active_rows = String::from(census::CSV_HEADER);
    for k in 0..20 {
        active_rows.push_str(&format!(
            "\ne{k},f1,cHBN,{},,900,{},{}",
            600.0 + k as f64,
            k < 5,
            if k < 5 { "S1+S1_2" } else { "" }
        ));
    }
    let (recs, _) = census::ingest(&active_rows).unwrap();
    let f = census::odmr_fraction(&recs).unwrap();
    assert_eq!(f.fraction * 100.0, 25.0);

    let mut sparse = String::from(census::CSV_HEADER);
    for k in 0..20 {
        sparse.push_str(&format!("\ne{k},f1,hBN,600,,900,{},", k < 1));
    }
    let (recs, _) = census::ingest(&sparse).unwrap();
    let f = census::odmr_fraction(&recs).unwrap();
    assert_eq!(f.fraction * 100.0, 5.0);

    // Long-wavelength fractions: 8/100 hBN and 21/130 c-hBN in (700, 850].
    let mut wl = String::from(census::CSV_HEADER);
    for k in 0..100 {
        let zpl = if k < 8 { 760.0 } else { 585.0 };
        wl.push_str(&format!("\nh{k},fh,hBN,{zpl},,900,false,"));
    }
    for k in 0..130 {
        let zpl = if k < 21 { 770.0 } else { 582.0 };
        wl.push_str(&format!("\nc{k},fc,cHBN,{zpl},,900,false,"));
    }
    let (recs, _) = census::ingest(&wl).unwrap();
    let lw = census::long_wavelength_fraction(&recs, 700.0, 850.0).unwrap();
    assert!((lw[&census::Material::HBn] - 0.08).abs() < 1e-12);
    let chbn = lw[&census::Material::CHBn];
    assert!((chbn - 0.16).abs() < 0.005, "c-hBN fraction {chbn}");

    // Density: 13 emitters in 1800 um^2 -> 6.5 per 30x30 um^2 tile; a
    // synthetic survey spanning 3..18 per tile reproduces the min/max.
    let mut dens = String::from(census::CSV_HEADER);
    for k in 0..13 {
        dens.push_str(&format!("\nd{k},fd,hBN,600,,1800,false,"));
    }
    for k in 0..3 {
        dens.push_str(&format!("\nlo{k},flo,hBN,600,,900,false,"));
    }
    for k in 0..18 {
        dens.push_str(&format!("\nhi{k},fhi,hBN,600,,900,false,"));
    }
    let (recs, _) = census::ingest(&dens).unwrap();
    let d = census::density_stats(&recs).unwrap();
    let fd = d.per_flake.iter().find(|f| f.flake_id == "fd").unwrap();
    assert!((fd.per_tile - 6.5).abs() < 1e-12);
    assert_eq!(d.min, 3.0);
    assert_eq!(d.max, 18.0);

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "runtime {dt:?} exceeds 1 s");
    println!(
        "acceptance 8 (census fixtures): pass - 25%/5% fractions, 8%/16.2% long-wavelength, 6.5 per tile, in {:?}",
        dt
    );
}

/// Criterion 9: solver cross-checks against independent oracles.
#[test]
fn criterion_9_solver_properties() {
    let t0 = Instant::now();

    // Steady state equals long-time integration on 100 random draws.
    let mut rng = Rng::new(0x5eed_0009);
    for draw in 0..100 {
        let d = rng.range(200.0, 1800.0);
        let zfs = ZfsParams::new(d, rng.range(0.0, d / 3.0), 2.0).unwrap();
        let pair = PairModel::new(
            rng.range(-30.0, 30.0),
            rng.range(-50.0, 50.0),
            rng.range(-50.0, 50.0),
        )
        .unwrap();
        let k_rec_t = rng.range(0.2, 2.0);
        let rates = RateParams {
            k_pump: rng.range(1.0, 40.0),
            k_rad: rng.range(20.0, 150.0),
            k_isc: [
                rng.range(0.5, 10.0),
                rng.range(0.5, 10.0),
                rng.range(0.5, 10.0),
            ],
            k_ct: rng.range(1.0, 15.0),
            k_rec_s: k_rec_t + rng.range(5.0, 40.0),
            k_rec_t,
        };
        let field = bz(rng.range(0.0, 160.0));
        let mw = if draw % 2 == 0 {
            Some(MwDrive::new(rng.range(100.0, 4000.0), rng.range(0.1, 3.0), 30.0).unwrap())
        } else {
            None
        };
        let gen = assemble_generator(&zfs, &pair, &rates, &field, mw.as_ref()).unwrap();
        let ss = steady_state(&gen).unwrap();

        let mut p0 = vec![0.0; N_LEVELS];
        p0[IDX_GS] = 1.0;
        let min_rate = rates
            .k_isc
            .iter()
            .cloned()
            .chain([rates.k_pump, rates.k_rad, rates.k_ct, rates.k_rec_s, rates.k_rec_t])
            .fold(f64::INFINITY, f64::min);
        let t_long = 1e4 / min_rate;
        let p_long = long_time_populations(&gen, &p0, t_long);
        for k in 0..N_LEVELS {
            assert!(
                (ss[k] - p_long[k]).abs() < 1e-6,
                "draw {draw}, level {k}: {} vs {}",
                ss[k],
                p_long[k]
            );
        }
    }

    // Default model: steady state matches the long-time oracle to 1e-8, and
    // stepwise evolve conserves probability to 1e-9.
    let zfs = ZfsParams::new(950.0, 200.0, 2.0).unwrap();
    let pair = PairModel::default();
    let rates = RateParams::default();
    let gen = assemble_generator(&zfs, &pair, &rates, &bz(66.0), None).unwrap();
    let ss = steady_state(&gen).unwrap();
    let mut p0 = vec![0.0; N_LEVELS];
    p0[IDX_GS] = 1.0;
    let p_long = long_time_populations(&gen, &p0, 1e4 / 0.5);
    for k in 0..N_LEVELS {
        assert!((ss[k] - p_long[k]).abs() < 1e-8);
    }
    let p = evolve(&gen, &p0, 25.0).unwrap();
    let sum: f64 = p.iter().sum();
    assert!((sum - 1.0).abs() < 1e-9, "probability drift {}", sum - 1.0);
    for &v in &p {
        assert!(v >= -1e-12);
    }

    // Triplet eigenvalues against the characteristic-polynomial oracle on
    // 1000 random (D, E, B) draws.
    let mut rng = Rng::new(0x5eed_0909);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = rng.range(0.0, 2500.0);
        let e = rng.range(0.0, d / 3.0);
        let zfs = ZfsParams::new(d, e, 2.0).unwrap();
        let field = FieldVector::new(
            rng.range(-150.0, 150.0),
            rng.range(-150.0, 150.0),
            rng.range(-150.0, 150.0),
        )
        .unwrap();
        let h = build_triplet_hamiltonian(&zfs, &field).unwrap();
        let got = h.matrix.eigh().unwrap().values;
        let want = char_poly_eigenvalues(&h.matrix);
        for k in 0..3 {
            let err = (got[k] - want[k]).abs();
            worst = worst.max(err);
            assert!(err < 1e-6, "eigenvalue {k}: {} vs {}", got[k], want[k]);
        }
    }
    let dt = t0.elapsed();
    println!(
        "acceptance 9 (solver properties): pass - steady/evolve agree, eig worst error {:.2e} MHz, in {:?}",
        worst, dt
    );
}
