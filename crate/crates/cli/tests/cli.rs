//! End-to-end tests of the command-line surface: wiring, file formats,
//! manifests, reproducibility and exit codes.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use spinsim::dispatch;
use spinsim::manifest::fnv1a64;
use spinsim_core::experiments::{cw_sweep, fan_scan, MwSettings, SweepSpec};
use spinsim_core::fit::{predict, PredictMode, SpinHamiltonianParams};
use spinsim_core::rates::RateParams;
use spinsim_core::spin::{FieldVector, PairModel, TransitionLabel, ZfsParams};

static DIR_SEQ: AtomicUsize = AtomicUsize::new(0);

fn scratch_dir(tag: &str) -> PathBuf {
    let n = DIR_SEQ.fetch_add(1, Ordering::SeqCst);
    let dir = std::env::temp_dir().join(format!(
        "spinsim-test-{}-{tag}-{n}",
        std::process::id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> i32 {
    let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    dispatch(&owned)
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

const TEST_CONFIG: &str = "\
[zfs]
d_mhz = 850
e_mhz = 0
g_factor = 2.0

[sweep]
f_min_mhz = 900
f_max_mhz = 2000
f_step_mhz = 50
";

#[test]
fn spectrum_matches_library_and_is_reproducible() {
    let dir = scratch_dir("spectrum");
    let cfg_path = dir.join("c.cfg");
    std::fs::write(&cfg_path, TEST_CONFIG).unwrap();
    let out_a = dir.join("a.csv");
    let out_b = dir.join("b.csv");
    for out in [&out_a, &out_b] {
        let code = run(&[
            "spectrum",
            "--config",
            cfg_path.to_str().unwrap(),
            "--b-mt",
            "0,0,66",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let text_a = read(&out_a);
    assert_eq!(text_a, read(&out_b), "reruns must be byte-identical");

    // Values equal the library path exactly.
    let zfs = ZfsParams::new(850.0, 0.0, 2.0).unwrap();
    let sp = cw_sweep(
        &zfs,
        &PairModel::default(),
        &RateParams::default(),
        &FieldVector::new(0.0, 0.0, 66.0).unwrap(),
        &MwSettings::new(1.0, 30.0).unwrap(),
        &SweepSpec::new(900.0, 2000.0, 50.0).unwrap(),
    )
    .unwrap();
    let mut lines = text_a.lines();
    assert_eq!(lines.next().unwrap(), "frequency_mhz,contrast_percent");
    for (k, line) in lines.enumerate() {
        let (f, c) = line.split_once(',').unwrap();
        assert_eq!(f.parse::<f64>().unwrap(), sp.frequencies_mhz[k]);
        assert_eq!(c.parse::<f64>().unwrap(), sp.contrast_percent[k]);
    }

    // Manifest sits next to the output, records matching hashes, and only
    // its timestamp line differs between runs.
    let man_a = read(&dir.join("a.csv.manifest"));
    assert!(man_a.contains("command: spinsim spectrum"));
    let expected = format!("fnv1a64={:016x}", fnv1a64(text_a.as_bytes()));
    assert!(
        man_a.lines().any(|l| l.starts_with("output:") && l.contains(&expected)),
        "manifest lacks the output hash: {man_a}"
    );
    let strip_ts = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("timestamp_unix"))
            .map(|l| l.replace("a.csv", "x.csv").replace("b.csv", "x.csv"))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip_ts(&man_a), strip_ts(&read(&dir.join("b.csv.manifest"))));
}

#[test]
fn fan_parallel_rows_equal_serial_library_fan() {
    let dir = scratch_dir("fan");
    let cfg = dir.join("c.cfg");
    std::fs::write(
        &cfg,
        "[sweep]\nf_min_mhz = 300\nf_max_mhz = 2400\nf_step_mhz = 30\n",
    )
    .unwrap();
    let out = dir.join("fan.csv");
    let lines_out = dir.join("lines.csv");
    let code = run(&[
        "fan",
        "--config",
        cfg.to_str().unwrap(),
        "--b-list",
        "12:60:16",
        "--out",
        out.to_str().unwrap(),
        "--lines",
        lines_out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let zfs = ZfsParams::new(950.0, 200.0, 2.0).unwrap();
    let map = fan_scan(
        &zfs,
        &PairModel::default(),
        &RateParams::default(),
        &MwSettings::new(1.0, 30.0).unwrap(),
        &[12.0, 28.0, 44.0, 60.0],
        &SweepSpec::new(300.0, 2400.0, 30.0).unwrap(),
    )
    .unwrap();
    let text = read(&out);
    let mut rows = text.lines().skip(1);
    for (bi, &b) in map.b_values_mt.iter().enumerate() {
        for (fi, &f) in map.frequencies_mhz.iter().enumerate() {
            let line = rows.next().unwrap();
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols[0].parse::<f64>().unwrap(), b);
            assert_eq!(cols[1].parse::<f64>().unwrap(), f);
            assert_eq!(
                cols[2].parse::<f64>().unwrap(),
                map.contrast_percent[bi][fi],
                "parallel row differs at b={b}, f={f}"
            );
        }
    }
    assert!(rows.next().is_none());

    let lines_text = read(&lines_out);
    for label in ["T_MINUS", "T_PLUS", "DQT", "DOUBLET"] {
        assert!(lines_text.lines().any(|l| l.starts_with(label)));
    }
}

#[test]
fn fan_respects_thread_cap() {
    let dir = scratch_dir("fan-threads");
    let cfg = dir.join("c.cfg");
    std::fs::write(
        &cfg,
        "[sweep]\nf_min_mhz = 800\nf_max_mhz = 1200\nf_step_mhz = 100\n",
    )
    .unwrap();
    let run_with_threads = |threads: &str, name: &str| -> String {
        std::env::set_var("SPINSIM_THREADS", threads);
        let out = dir.join(name);
        let code = run(&[
            "fan",
            "--config",
            cfg.to_str().unwrap(),
            "--b-list",
            "10,20,30,40,50",
            "--out",
            out.to_str().unwrap(),
        ]);
        std::env::remove_var("SPINSIM_THREADS");
        assert_eq!(code, 0);
        read(&out)
    };
    let serial = run_with_threads("1", "serial.csv");
    let parallel = run_with_threads("4", "parallel.csv");
    assert_eq!(serial, parallel, "thread count changed the output");
}

#[test]
fn angle_scan_csv_has_all_labels() {
    let dir = scratch_dir("angle");
    let out = dir.join("angle.csv");
    let code = run(&[
        "angle",
        "--b-mag",
        "66",
        "--angles",
        "0:90:15",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&out);
    assert!(text.starts_with("angle_deg,label,frequency_mhz\n"));
    // 7 angles x 4 labels.
    assert_eq!(text.lines().count(), 1 + 7 * 4);
    assert!(text.contains(",DOUBLET,"));
    assert!(text.contains(",DQT,"));
}

#[test]
fn pulse_and_g2_flows() {
    let dir = scratch_dir("pulse-g2");
    let seq = dir.join("seq.csv");
    std::fs::write(&seq, "laser_on,mw_on,duration_us\n1,0,5\n0,0,5\n").unwrap();
    let out = dir.join("trace.csv");
    let code = run(&[
        "pulse",
        "--b-mt",
        "0,0,66",
        "--seq",
        seq.to_str().unwrap(),
        "--resolution-us",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&out);
    assert!(text.starts_with("time_us,pl_rate_per_us\n"));
    assert_eq!(text.lines().count(), 1 + 21); // t = 0..10 in 0.5 us steps

    // Sequence gating microwaves without a frequency is a usage error.
    let seq_mw = dir.join("seq_mw.csv");
    std::fs::write(&seq_mw, "laser_on,mw_on,duration_us\n1,1,5\n").unwrap();
    let code = run(&[
        "pulse",
        "--b-mt",
        "0,0,66",
        "--seq",
        seq_mw.to_str().unwrap(),
        "--resolution-us",
        "0.5",
        "--out",
        dir.join("t2.csv").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);

    let g2_out = dir.join("g2.csv");
    let code = run(&[
        "g2",
        "--b-mt",
        "0,0,66",
        "--tau-max-us",
        "10",
        "--tau-step-us",
        "0.5",
        "--g2-zero-target",
        "0.1",
        "--out",
        g2_out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&g2_out);
    assert!(text.starts_with("tau_us,g2,g2_with_background\n"));
    let first = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = first.split(',').collect();
    assert_eq!(cols[0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(cols[1].parse::<f64>().unwrap(), 0.0);
    assert!((cols[2].parse::<f64>().unwrap() - 0.1).abs() < 1e-12);
}

#[test]
fn fit_round_trip_through_files() {
    let dir = scratch_dir("fit");
    let truth = SpinHamiltonianParams::new(950.0, 200.0, 2.0);
    let mut obs = String::from("b_mt_x,b_mt_y,b_mt_z,angle_deg,label,frequency_mhz,sigma_mhz\n");
    for b in [20.0, 60.0, 100.0, 140.0] {
        let field = FieldVector::new(0.0, 0.0, b).unwrap();
        for label in [
            TransitionLabel::TMinus,
            TransitionLabel::TPlus,
            TransitionLabel::Doublet,
        ] {
            let f = predict(&truth, &field, label, PredictMode::Exact).unwrap();
            obs.push_str(&format!("0,0,{b},,{label},{f},\n"));
        }
    }
    let obs_path = dir.join("obs.csv");
    std::fs::write(&obs_path, &obs).unwrap();
    let out = dir.join("fit.csv");
    let code = run(&[
        "fit",
        "--obs",
        obs_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = read(&out);
    let value = |key: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(&format!("{key},")))
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((value("d_mhz") - 950.0).abs() < 1.0);
    assert!((value("e_mhz") - 200.0).abs() < 1.0);
    assert!((value("g_factor") - 2.0).abs() < 0.01);
}

#[test]
fn census_report_files() {
    let dir = scratch_dir("census");
    let mut csv = String::from(
        "emitter_id,flake_id,material,zpl_nm,fwhm_nm,map_area_um2,odmr_active,transitions\n",
    );
    for k in 0..20 {
        csv.push_str(&format!(
            "e{k},f{},cHBN,{},,900,{},\n",
            k % 4,
            570.0 + 10.0 * (k % 8) as f64,
            k < 5
        ));
    }
    csv.push_str("bad,f0,cHBN,580,,900,true,S1\n"); // violates S1 => S1_2
    let input = dir.join("emitters.csv");
    std::fs::write(&input, &csv).unwrap();
    let report = dir.join("report");
    let code = run(&[
        "census",
        "--in",
        input.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for name in [
        "summary.txt",
        "fractions.csv",
        "densities.csv",
        "histogram.csv",
        "rejections.csv",
        "summary.txt.manifest",
    ] {
        assert!(report.join(name).exists(), "missing {name}");
    }
    let fractions = read(&report.join("fractions.csv"));
    let row = fractions.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[0], "cHBN");
    assert_eq!(cols[1], "20");
    assert_eq!(cols[2], "5");
    assert_eq!(cols[3].parse::<f64>().unwrap(), 0.25);
}

#[test]
fn exit_codes_by_category() {
    let dir = scratch_dir("codes");
    // Usage: missing required flag.
    assert_eq!(run(&["spectrum", "--b-mt", "0,0,66"]), 2);
    // Usage: no field given.
    assert_eq!(
        run(&[
            "spectrum",
            "--out",
            dir.join("s.csv").to_str().unwrap()
        ]),
        2
    );
    // Io: missing input file.
    assert_eq!(
        run(&[
            "fit",
            "--obs",
            dir.join("nope.csv").to_str().unwrap(),
            "--out",
            dir.join("f.csv").to_str().unwrap()
        ]),
        3
    );
    // Config: invalid key.
    let bad_cfg = dir.join("bad.cfg");
    std::fs::write(&bad_cfg, "[zfs]\nbogus = 1\n").unwrap();
    assert_eq!(
        run(&[
            "spectrum",
            "--config",
            bad_cfg.to_str().unwrap(),
            "--b-mt",
            "0,0,66",
            "--out",
            dir.join("s.csv").to_str().unwrap()
        ]),
        4
    );
    // Input: malformed observation file.
    let bad_obs = dir.join("bad_obs.csv");
    std::fs::write(&bad_obs, "wrong,header\n").unwrap();
    assert_eq!(
        run(&[
            "fit",
            "--obs",
            bad_obs.to_str().unwrap(),
            "--out",
            dir.join("f.csv").to_str().unwrap()
        ]),
        5
    );
    // Compute: a dark model (no pumping) cannot define contrast.
    let dark_cfg = dir.join("dark.cfg");
    std::fs::write(&dark_cfg, "[rates]\nk_pump = 0\n").unwrap();
    assert_eq!(
        run(&[
            "spectrum",
            "--config",
            dark_cfg.to_str().unwrap(),
            "--b-mt",
            "0,0,66",
            "--out",
            dir.join("s.csv").to_str().unwrap()
        ]),
        6
    );
    // Unknown subcommand.
    assert_eq!(run(&["frobnicate"]), 2);
}

#[test]
fn config_remap_warning_path_accepts_out_of_convention_zfs() {
    let dir = scratch_dir("remap");
    let cfg = dir.join("c.cfg");
    std::fs::write(
        &cfg,
        "[zfs]\nd_mhz = 950\ne_mhz = 400\n\n[sweep]\nf_min_mhz = 500\nf_max_mhz = 600\nf_step_mhz = 50\n",
    )
    .unwrap();
    let out = dir.join("s.csv");
    let code = run(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--b-mt",
        "0,0,30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "remapped config must be accepted");
    assert!(out.exists());
}
