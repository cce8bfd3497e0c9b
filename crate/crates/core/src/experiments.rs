//! Measurement protocols composed from the spin models and the rate engine:
//! CW frequency sweeps, Zeeman fan maps, angle scans and pulsed transients.

use crate::error::Error;
use crate::rates::{
    assemble_from_scheme, pl_rate, steady_state, AmplifierTable, LevelScheme, MwDrive, RateParams,
    N_LEVELS,
};
use crate::scalar::{lit, Float};
use crate::spin::{
    build_triplet_hamiltonian, doublet_frequency, gamma_e, triplet_transitions, FieldVector,
    PairModel, TransitionLabel, ZfsParams,
};
use crate::Result;

/// Microwave drive settings without a frequency; a sweep instantiates one
/// [`MwDrive`] per sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct MwSettings<T> {
    pub drive_rate: T,
    pub linewidth_fwhm_mhz: T,
    pub amplifier: Option<AmplifierTable<T>>,
}

impl<T: Float> MwSettings<T> {
    pub fn new(drive_rate: T, linewidth_fwhm_mhz: T) -> Result<Self> {
        let s = MwSettings {
            drive_rate,
            linewidth_fwhm_mhz,
            amplifier: None,
        };
        s.at(T::zero())?; // runs MwDrive validation
        Ok(s)
    }

    /// The drive at one sweep frequency.
    pub fn at(&self, frequency_mhz: T) -> Result<MwDrive<T>> {
        let drive = MwDrive {
            frequency_mhz,
            drive_rate: self.drive_rate,
            linewidth_fwhm_mhz: self.linewidth_fwhm_mhz,
            amplifier: self.amplifier.clone(),
        };
        drive.validate()?;
        Ok(drive)
    }
}

/// Frequency axis of a CW sweep, MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec<T> {
    pub f_min_mhz: T,
    pub f_max_mhz: T,
    pub f_step_mhz: T,
}

impl<T: Float> SweepSpec<T> {
    pub fn new(f_min_mhz: T, f_max_mhz: T, f_step_mhz: T) -> Result<Self> {
        if !(f_min_mhz.is_finite() && f_max_mhz.is_finite() && f_step_mhz.is_finite()) {
            return Err(Error::invalid("sweep bounds must be finite"));
        }
        if f_min_mhz >= f_max_mhz {
            return Err(Error::invalid("sweep requires f_min < f_max"));
        }
        if f_step_mhz <= T::zero() {
            return Err(Error::invalid("sweep step must be > 0"));
        }
        let count = (f_max_mhz - f_min_mhz) / f_step_mhz;
        if count > lit(1e6) {
            return Err(Error::invalid("sweep would exceed 1e6 points"));
        }
        Ok(SweepSpec {
            f_min_mhz,
            f_max_mhz,
            f_step_mhz,
        })
    }

    /// Strictly increasing sweep frequencies, inclusive of f_max when it
    /// falls on the grid.
    pub fn frequencies(&self) -> Vec<T> {
        let span = self.f_max_mhz - self.f_min_mhz;
        let n = (span / self.f_step_mhz + lit(1e-9)).floor();
        let n = n.to_usize().unwrap_or(0);
        (0..=n)
            .map(|k| self.f_min_mhz + self.f_step_mhz * lit(k as f64))
            .collect()
    }
}

/// One simulated CW ODMR spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct OdmrSpectrum<T> {
    pub frequencies_mhz: Vec<T>,
    pub contrast_percent: Vec<T>,
}

/// Simulates a CW sweep: one steady-state contrast evaluation per frequency.
pub fn cw_sweep<T: Float>(
    zfs: &ZfsParams<T>,
    pair: &PairModel<T>,
    rates: &RateParams<T>,
    field: &FieldVector<T>,
    mw: &MwSettings<T>,
    spec: &SweepSpec<T>,
) -> Result<OdmrSpectrum<T>> {
    // The scheme and the microwave-free reference are frequency independent;
    // computing them once keeps per-point work identical to a standalone
    // odmr_contrast call (same scheme, same solver, bit-equal results).
    let scheme = LevelScheme::new(zfs, pair, field)?;
    let g_off = assemble_from_scheme(&scheme, rates, None)?;
    let p_off = steady_state(&g_off)?;
    let pl_off = pl_rate(&p_off, rates);
    if pl_off <= T::zero() {
        return Err(Error::DarkModel);
    }
    let frequencies = spec.frequencies();
    let mut contrast = Vec::with_capacity(frequencies.len());
    for &f in &frequencies {
        let drive = mw.at(f)?;
        let g_on = assemble_from_scheme(&scheme, rates, Some(&drive))?;
        let p_on = steady_state(&g_on)?;
        let pl_on = pl_rate(&p_on, rates);
        contrast.push((pl_on - pl_off) / pl_off * lit(100.0));
    }
    Ok(OdmrSpectrum {
        frequencies_mhz: frequencies,
        contrast_percent: contrast,
    })
}

/// A straight Zeeman guide line frequency = intercept + slope * |B|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayLine<T> {
    pub label: TransitionLabel,
    pub intercept_mhz: T,
    pub slope_mhz_per_mt: T,
}

/// The four linear guide lines of the fan: triplet branches with slope
/// +-gamma_e, the doublet with slope (g/2) gamma_e, and the double quantum
/// transition with slope 2 gamma_e and intercept 2E.
pub fn overlay_lines<T: Float>(zfs: &ZfsParams<T>) -> [OverlayLine<T>; 4] {
    let g = gamma_e::<T>();
    [
        OverlayLine {
            label: TransitionLabel::TMinus,
            intercept_mhz: zfs.d_mhz - zfs.e_mhz,
            slope_mhz_per_mt: -g,
        },
        OverlayLine {
            label: TransitionLabel::TPlus,
            intercept_mhz: zfs.d_mhz + zfs.e_mhz,
            slope_mhz_per_mt: g,
        },
        OverlayLine {
            label: TransitionLabel::Doublet,
            intercept_mhz: T::zero(),
            slope_mhz_per_mt: zfs.g_factor / lit::<T>(2.0) * g,
        },
        OverlayLine {
            label: TransitionLabel::Dqt,
            intercept_mhz: zfs.e_mhz + zfs.e_mhz,
            slope_mhz_per_mt: g + g,
        },
    ]
}

/// Magnetic-field fan of CW spectra plus the Zeeman guide lines.
#[derive(Debug, Clone, PartialEq)]
pub struct FanMap<T> {
    pub b_values_mt: Vec<T>,
    pub frequencies_mhz: Vec<T>,
    /// Contrast in percent, indexed `[b][frequency]`.
    pub contrast_percent: Vec<Vec<T>>,
    pub lines: [OverlayLine<T>; 4],
}

/// Simulates a fan of CW sweeps for fields along +z.
pub fn fan_scan<T: Float>(
    zfs: &ZfsParams<T>,
    pair: &PairModel<T>,
    rates: &RateParams<T>,
    mw: &MwSettings<T>,
    b_list_mt: &[T],
    spec: &SweepSpec<T>,
) -> Result<FanMap<T>> {
    if b_list_mt.is_empty() {
        return Err(Error::invalid("field list must not be empty"));
    }
    for w in b_list_mt.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid("field list must be strictly increasing"));
        }
    }
    let frequencies = spec.frequencies();
    let mut rows = Vec::with_capacity(b_list_mt.len());
    for &b in b_list_mt {
        let field = FieldVector::new(T::zero(), T::zero(), b)?;
        let row = cw_sweep(zfs, pair, rates, &field, mw, spec)?;
        rows.push(row.contrast_percent);
    }
    Ok(FanMap {
        b_values_mt: b_list_mt.to_vec(),
        frequencies_mhz: frequencies,
        contrast_percent: rows,
        lines: overlay_lines(zfs),
    })
}

/// Exact labeled transition frequencies versus field angle.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleScan<T> {
    pub angles_deg: Vec<T>,
    pub corrections: Vec<T>,
    /// Per angle: (label, frequency) entries ordered T_MINUS, T_PLUS, DQT,
    /// DOUBLET.
    pub entries: Vec<Vec<(TransitionLabel, T)>>,
}

/// Computes transition frequencies as the field rotates from out-of-plane
/// (0 degrees) to in-plane (90 degrees), with optional per-angle magnitude
/// corrections for magnet drift.
pub fn angle_scan<T: Float>(
    zfs: &ZfsParams<T>,
    b_mag_mt: T,
    angles_deg: &[T],
    corrections: Option<&[T]>,
) -> Result<AngleScan<T>> {
    if angles_deg.is_empty() {
        return Err(Error::invalid("angle list must not be empty"));
    }
    let corrections: Vec<T> = match corrections {
        Some(c) => {
            if c.len() != angles_deg.len() {
                return Err(Error::invalid(
                    "corrections must align one-to-one with angles",
                ));
            }
            for &v in c {
                if !v.is_finite() || v <= T::zero() {
                    return Err(Error::invalid("corrections must be positive"));
                }
            }
            c.to_vec()
        }
        None => vec![T::one(); angles_deg.len()],
    };

    let mut entries = Vec::with_capacity(angles_deg.len());
    for (k, &theta) in angles_deg.iter().enumerate() {
        let field = FieldVector::from_polar(corrections[k] * b_mag_mt, theta)?;
        let h = build_triplet_hamiltonian(zfs, &field)?;
        let t = triplet_transitions(&h)?;
        let mut row: Vec<(TransitionLabel, T)> = t
            .entries
            .iter()
            .map(|e| (e.label, e.frequency_mhz))
            .collect();
        row.push((
            TransitionLabel::Doublet,
            doublet_frequency(&field, zfs.g_factor)?,
        ));
        entries.push(row);
    }
    Ok(AngleScan {
        angles_deg: angles_deg.to_vec(),
        corrections,
        entries,
    })
}

/// One laser/microwave gate interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSegment<T> {
    pub laser_on: bool,
    pub mw_on: bool,
    pub duration_us: T,
}

/// An ordered pulse program.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence<T> {
    pub segments: Vec<PulseSegment<T>>,
}

impl<T: Float> PulseSequence<T> {
    pub fn new(segments: Vec<PulseSegment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("pulse sequence must not be empty"));
        }
        let mut total = T::zero();
        for s in &segments {
            if !s.duration_us.is_finite() || s.duration_us <= T::zero() {
                return Err(Error::invalid("segment durations must be finite and > 0"));
            }
            total += s.duration_us;
        }
        if !total.is_finite() {
            return Err(Error::invalid("total sequence duration must be finite"));
        }
        Ok(PulseSequence { segments })
    }

    pub fn total_duration(&self) -> T {
        self.segments
            .iter()
            .fold(T::zero(), |acc, s| acc + s.duration_us)
    }
}

/// Sampled photoluminescence trace of a pulse program.
#[derive(Debug, Clone, PartialEq)]
pub struct PlTrace<T> {
    pub times_us: Vec<T>,
    pub pl_per_us: Vec<T>,
    /// Populations at the end of the program, for chaining sequences.
    pub final_populations: Vec<T>,
}

/// Integrates the rate model through a pulse program, toggling the pump rate
/// and the microwave drive per segment, and samples PL on a uniform grid.
pub fn pulsed_transient<T: Float>(
    zfs: &ZfsParams<T>,
    pair: &PairModel<T>,
    rates: &RateParams<T>,
    field: &FieldVector<T>,
    mw: Option<&MwDrive<T>>,
    p0: &[T],
    seq: &PulseSequence<T>,
    resolution_us: T,
) -> Result<PlTrace<T>> {
    if !resolution_us.is_finite() || resolution_us <= T::zero() {
        return Err(Error::invalid("resolution must be finite and > 0"));
    }
    if p0.len() != N_LEVELS {
        return Err(Error::domain("initial populations must have 9 entries"));
    }
    if seq.segments.iter().any(|s| s.mw_on) && mw.is_none() {
        return Err(Error::domain(
            "sequence gates microwaves on but no drive was given",
        ));
    }
    let scheme = LevelScheme::new(zfs, pair, field)?;
    let mut dark_rates = *rates;
    dark_rates.k_pump = T::zero();

    // Generators for the four gate combinations, built on demand.
    let mut gens: [Option<crate::rates::GeneratorMatrix<T>>; 4] = [None, None, None, None];
    let mut gen_for = |laser: bool, mw_on: bool| -> Result<crate::rates::GeneratorMatrix<T>> {
        let idx = (laser as usize) * 2 + mw_on as usize;
        if gens[idx].is_none() {
            let r = if laser { rates } else { &dark_rates };
            let drive = if mw_on { mw } else { None };
            gens[idx] = Some(assemble_from_scheme(&scheme, r, drive)?);
        }
        Ok(gens[idx].clone().expect("generator just built"))
    };

    let total = seq.total_duration();
    let n_samples = (total / resolution_us + lit(1e-9)).floor().to_usize().unwrap_or(0);

    let mut p = p0.to_vec();
    let mut times = Vec::with_capacity(n_samples + 1);
    let mut pl = Vec::with_capacity(n_samples + 1);
    times.push(T::zero());
    pl.push(pl_rate(&p, rates));

    let mut seg_iter = seq.segments.iter();
    let mut seg = *seg_iter.next().expect("sequence validated nonempty");
    let mut seg_end = seg.duration_us;
    let mut cursor = T::zero();
    let eps = total * lit(1e-12);

    for k in 1..=n_samples {
        let target = resolution_us * lit(k as f64);
        while cursor < target - eps {
            let stop = if seg_end < target { seg_end } else { target };
            let dt = stop - cursor;
            if dt > T::zero() {
                let g = gen_for(seg.laser_on, seg.mw_on)?;
                p = crate::rates::evolve(&g, &p, dt)?;
            }
            cursor = stop;
            if cursor >= seg_end - eps && cursor < total - eps {
                if let Some(next) = seg_iter.next() {
                    seg = *next;
                    seg_end += seg.duration_us;
                }
            }
        }
        times.push(target);
        pl.push(pl_rate(&p, rates));
    }
    // Finish any remainder so final_populations reflect the whole program.
    while cursor < total - eps {
        let stop = if seg_end < total { seg_end } else { total };
        let dt = stop - cursor;
        if dt > T::zero() {
            let g = gen_for(seg.laser_on, seg.mw_on)?;
            p = crate::rates::evolve(&g, &p, dt)?;
        }
        cursor = stop;
        if let Some(next) = seg_iter.next() {
            seg = *next;
            seg_end += seg.duration_us;
        }
    }

    Ok(PlTrace {
        times_us: times,
        pl_per_us: pl,
        final_populations: p,
    })
}

/// A located spectral peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub frequency_mhz: T,
    /// Peak |contrast| after sub-bin interpolation, percent.
    pub height: T,
}

/// Local maxima of |contrast| above `min_height`, refined by quadratic
/// sub-bin interpolation.
pub fn find_peaks<T: Float>(spectrum: &OdmrSpectrum<T>, min_height: T) -> Vec<Peak<T>> {
    let f = &spectrum.frequencies_mhz;
    let v: Vec<T> = spectrum.contrast_percent.iter().map(|c| c.abs()).collect();
    let mut peaks = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        if v[i] > v[i - 1] && v[i] > v[i + 1] && v[i] >= min_height {
            let denom = v[i - 1] - (v[i] + v[i]) + v[i + 1];
            let half = lit::<T>(0.5);
            let (df, height) = if denom.abs() > T::epsilon() {
                let mut shift = half * (v[i - 1] - v[i + 1]) / denom;
                if shift > half {
                    shift = half;
                }
                if shift < -half {
                    shift = -half;
                }
                let h = v[i] - lit::<T>(0.25) * (v[i - 1] - v[i + 1]) * shift;
                (shift * (f[i + 1] - f[i]), h)
            } else {
                (T::zero(), v[i])
            };
            peaks.push(Peak {
                frequency_mhz: f[i] + df,
                height,
            });
        }
    }
    peaks
}
