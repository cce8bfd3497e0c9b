//! Weighted least-squares estimation of spin-Hamiltonian parameters from
//! measured resonance frequencies.
//!
//! The forward model is the exact diagonalization used everywhere else in
//! the crate; a straight Zeeman-line mode is available as an option.
//! Minimization is a deterministic multi-start Nelder-Mead, so a fixed seed
//! list always produces the same result.

use crate::error::Error;
use crate::optim::nelder_mead;
use crate::scalar::{lit, Float};
use crate::spin::{
    build_triplet_hamiltonian, doublet_frequency, gamma_e, remap_zfs, triplet_transitions,
    FieldVector, TransitionLabel, ZfsParams,
};
use crate::Result;

/// One measured resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceObservation<T> {
    /// Nominal applied field.
    pub field: FieldVector<T>,
    /// Rotation-scan angle this point belongs to, if any.
    pub angle_deg: Option<T>,
    pub label: TransitionLabel,
    pub frequency_mhz: T,
    /// Measurement uncertainty in MHz.
    pub sigma_mhz: T,
}

impl<T: Float> ResonanceObservation<T> {
    pub const DEFAULT_SIGMA_MHZ: f64 = 10.0;

    pub fn new(field: FieldVector<T>, label: TransitionLabel, frequency_mhz: T) -> Result<Self> {
        Self::with_sigma(field, label, frequency_mhz, lit(Self::DEFAULT_SIGMA_MHZ))
    }

    pub fn with_sigma(
        field: FieldVector<T>,
        label: TransitionLabel,
        frequency_mhz: T,
        sigma_mhz: T,
    ) -> Result<Self> {
        if !frequency_mhz.is_finite() || frequency_mhz <= T::zero() {
            return Err(Error::invalid("observed frequency must be finite and > 0"));
        }
        if !sigma_mhz.is_finite() || sigma_mhz <= T::zero() {
            return Err(Error::invalid("sigma must be finite and > 0"));
        }
        Ok(ResonanceObservation {
            field,
            angle_deg: None,
            label,
            frequency_mhz,
            sigma_mhz,
        })
    }

    pub fn at_angle(mut self, angle_deg: T) -> Self {
        self.angle_deg = Some(angle_deg);
        self
    }
}

/// Full parameter set of the forward model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinHamiltonianParams<T> {
    pub d_mhz: T,
    pub e_mhz: T,
    pub g_factor: T,
    /// Quantization-axis tilt away from the lab out-of-plane axis, degrees,
    /// in the rotation (x-z) plane.
    pub tilt_deg: T,
    /// Multiplier on the nominal field magnitude.
    pub field_scale: T,
}

impl<T: Float> SpinHamiltonianParams<T> {
    pub fn new(d_mhz: T, e_mhz: T, g_factor: T) -> Self {
        SpinHamiltonianParams {
            d_mhz,
            e_mhz,
            g_factor,
            tilt_deg: T::zero(),
            field_scale: T::one(),
        }
    }
}

/// Zero-field intercept convention for the DQT guide line. The standard ZFS
/// convention puts the intercept at 2E; measured maps are sometimes quoted
/// with an intercept matching E instead, so both readings are selectable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DqtIntercept {
    #[default]
    TwoE,
    E,
}

/// Forward-model flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictMode {
    /// Exact triplet diagonalization (default everywhere).
    Exact,
    /// Straight Zeeman lines with zero-field intercepts.
    LinearZeeman(DqtIntercept),
}

/// Predicted resonance frequency for a labeled transition at a nominal field.
pub fn predict<T: Float>(
    params: &SpinHamiltonianParams<T>,
    field: &FieldVector<T>,
    label: TransitionLabel,
    mode: PredictMode,
) -> Result<T> {
    let effective = field
        .scaled(params.field_scale)
        .rotated_about_y(-params.tilt_deg);
    match mode {
        PredictMode::Exact => match label {
            TransitionLabel::Doublet => doublet_frequency(&effective, params.g_factor),
            _ => {
                // Constructed directly: mid-search parameters may sit outside
                // the reporting convention, and the Hamiltonian is valid for
                // any finite (D, E).
                let zfs = ZfsParams {
                    d_mhz: params.d_mhz,
                    e_mhz: params.e_mhz,
                    g_factor: params.g_factor,
                };
                let h = build_triplet_hamiltonian(&zfs, &effective)?;
                let t = triplet_transitions(&h)?;
                t.frequency(label)
                    .ok_or_else(|| Error::domain("label missing from transition set"))
            }
        },
        PredictMode::LinearZeeman(dqt) => {
            let gb = gamma_e::<T>() * effective.magnitude();
            Ok(match label {
                TransitionLabel::TPlus => params.d_mhz + params.e_mhz + gb,
                TransitionLabel::TMinus => (params.d_mhz - params.e_mhz - gb).abs(),
                TransitionLabel::Dqt => {
                    let intercept = match dqt {
                        DqtIntercept::TwoE => params.e_mhz + params.e_mhz,
                        DqtIntercept::E => params.e_mhz,
                    };
                    intercept + gb + gb
                }
                TransitionLabel::Doublet => gb,
            })
        }
    }
}

/// How the field-calibration scale is treated by a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    /// Scale pinned to 1.
    #[default]
    Fixed,
    /// One global multiplier.
    Single,
    /// One multiplier per distinct scan angle.
    PerAngle,
}

/// Fit configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    /// Fix the g-factor at this value instead of fitting it.
    pub fix_g: Option<T>,
    /// Fit the quantization-axis tilt (angle-series fits enable this).
    pub fit_tilt: bool,
    pub scale_mode: ScaleMode,
    /// Use straight Zeeman lines instead of exact diagonalization.
    pub linear_zeeman: bool,
    pub dqt_intercept: DqtIntercept,
    /// Number of deterministic multi-start seeds (at least 8).
    pub n_starts: usize,
    /// Relative simplex diameter at convergence.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Float> Default for FitOptions<T> {
    fn default() -> Self {
        FitOptions {
            fix_g: None,
            fit_tilt: false,
            scale_mode: ScaleMode::Fixed,
            linear_zeeman: false,
            dqt_intercept: DqtIntercept::TwoE,
            n_starts: 8,
            tol: lit(1e-6),
            max_iter: 4000,
        }
    }
}

/// Fitted field scale, mirroring [`ScaleMode`].
#[derive(Debug, Clone, PartialEq)]
pub enum FieldScale<T> {
    Fixed,
    Single(T),
    /// (angle_deg, scale) pairs sorted by angle.
    PerAngle(Vec<(T, T)>),
}

/// Result of a spin-Hamiltonian fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub d_mhz: T,
    pub e_mhz: T,
    pub g_factor: T,
    /// Quantization-axis tilt folded into [0, 90] degrees.
    pub tilt_deg: T,
    pub field_scale: FieldScale<T>,
    /// Unweighted RMS residual in MHz.
    pub residual_rms_mhz: T,
    pub converged: bool,
    pub n_restarts_used: usize,
}

const D_MAX_MHZ: f64 = 3000.0;

struct Problem<'a, T> {
    observations: &'a [ResonanceObservation<T>],
    fix_g: Option<T>,
    fit_tilt: bool,
    scale_mode: ScaleMode,
    mode: PredictMode,
    /// Distinct angles (sorted) when scale_mode == PerAngle.
    angles: Vec<T>,
}

impl<'a, T: Float> Problem<'a, T> {
    fn n_params(&self) -> usize {
        let mut n = 2; // d, e
        if self.fix_g.is_none() {
            n += 1;
        }
        if self.fit_tilt {
            n += 1;
        }
        n += match self.scale_mode {
            ScaleMode::Fixed => 0,
            ScaleMode::Single => 1,
            ScaleMode::PerAngle => self.angles.len(),
        };
        n
    }

    fn decode(&self, x: &[T]) -> (SpinHamiltonianParams<T>, Vec<T>) {
        let mut k = 0;
        let d = x[k];
        k += 1;
        let e = x[k];
        k += 1;
        let g = match self.fix_g {
            Some(g) => g,
            None => {
                k += 1;
                x[k - 1]
            }
        };
        let tilt = if self.fit_tilt {
            k += 1;
            x[k - 1]
        } else {
            T::zero()
        };
        let scales: Vec<T> = match self.scale_mode {
            ScaleMode::Fixed => vec![T::one()],
            ScaleMode::Single => vec![x[k]],
            ScaleMode::PerAngle => x[k..k + self.angles.len()].to_vec(),
        };
        (
            SpinHamiltonianParams {
                d_mhz: d,
                e_mhz: e,
                g_factor: g,
                tilt_deg: tilt,
                field_scale: T::one(),
            },
            scales,
        )
    }

    fn scale_for(&self, obs: &ResonanceObservation<T>, scales: &[T]) -> T {
        match self.scale_mode {
            ScaleMode::Fixed => T::one(),
            ScaleMode::Single => scales[0],
            ScaleMode::PerAngle => {
                let angle = obs.angle_deg.unwrap_or(T::zero());
                let mut best = 0;
                let mut best_d = T::infinity();
                for (i, &a) in self.angles.iter().enumerate() {
                    let d = (a - angle).abs();
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                scales[best]
            }
        }
    }

    fn objective(&self, x: &[T]) -> T {
        let (mut params, scales) = self.decode(x);
        let mut penalty = T::zero();
        let d_max = lit::<T>(D_MAX_MHZ);
        // One-sided quadratic penalties outside the admissible box keep the
        // interior objective untouched.
        if params.d_mhz < T::zero() {
            penalty += (params.d_mhz / lit(10.0)).powi(2) * lit(1e6);
        }
        if params.d_mhz > d_max {
            penalty += ((params.d_mhz - d_max) / lit(10.0)).powi(2) * lit(1e6);
        }
        if params.e_mhz < T::zero() {
            penalty += (params.e_mhz / lit(10.0)).powi(2) * lit(1e6);
        }
        let e_cap = params.d_mhz.abs() / lit(3.0);
        if params.e_mhz > e_cap {
            penalty += ((params.e_mhz - e_cap) / lit(10.0)).powi(2) * lit(1e6);
        }
        if params.g_factor < lit(0.1) {
            penalty += ((params.g_factor - lit::<T>(0.1)) * lit::<T>(1e4)).powi(2);
        }
        for &s in &scales {
            if s < lit(0.05) {
                penalty += ((s - lit::<T>(0.05)) * lit::<T>(1e4)).powi(2);
            }
        }

        let mut chi2 = T::zero();
        for obs in self.observations {
            params.field_scale = self.scale_for(obs, &scales);
            match predict(&params, &obs.field, obs.label, self.mode) {
                Ok(f) => {
                    let r = (f - obs.frequency_mhz) / obs.sigma_mhz;
                    chi2 += r * r;
                }
                Err(_) => return lit(1e30),
            }
        }
        chi2 + penalty
    }
}

fn distinct_sorted<T: Float>(values: impl Iterator<Item = T>, tol: T) -> Vec<T> {
    let mut v: Vec<T> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<T> = Vec::new();
    for x in v {
        if out.last().map_or(true, |&last| (x - last).abs() > tol) {
            out.push(x);
        }
    }
    out
}

fn validate_common<T: Float>(observations: &[ResonanceObservation<T>]) -> Result<()> {
    if observations.is_empty() {
        return Err(Error::Underdetermined("no observations given".into()));
    }
    for o in observations {
        if !o.frequency_mhz.is_finite() || o.frequency_mhz <= T::zero() {
            return Err(Error::invalid("observed frequencies must be > 0"));
        }
        if !o.sigma_mhz.is_finite() || o.sigma_mhz <= T::zero() {
            return Err(Error::invalid("sigmas must be > 0"));
        }
    }
    if observations
        .iter()
        .all(|o| o.label == TransitionLabel::Doublet)
    {
        return Err(Error::Underdetermined(
            "only DOUBLET observations: the doublet is isotropic, so D, E and tilt \
             are unidentifiable; add T_MINUS/T_PLUS/DQT points"
                .into(),
        ));
    }
    Ok(())
}

fn run_multistart<T: Float>(
    problem: &Problem<'_, T>,
    options: &FitOptions<T>,
) -> (Vec<T>, T, bool, usize) {
    let n_starts = options.n_starts.max(8);
    let mut best: Option<(Vec<T>, T, bool)> = None;
    let mut used = 0;
    let n_obs = problem.observations.len();
    let stop_below = lit::<T>(1e-12) * lit::<T>(n_obs as f64);

    for k in 0..n_starts {
        used += 1;
        // Deterministic seeds spanning D in [0, 3000] and E in [0, D/3].
        let frac = lit::<T>((k as f64 + 0.5) / n_starts as f64);
        let d0 = lit::<T>(D_MAX_MHZ) * frac;
        let e0 = d0 / lit::<T>(3.0) * lit::<T>([0.5, 0.17, 0.83][k % 3]);
        let mut x0: Vec<T> = vec![d0, e0];
        let mut step: Vec<T> = vec![lit(150.0), lit(40.0)];
        if problem.fix_g.is_none() {
            x0.push(lit(2.0));
            step.push(lit(0.2));
        }
        if problem.fit_tilt {
            x0.push(lit([0.0, 25.0, 50.0, 75.0][k % 4]));
            step.push(lit(10.0));
        }
        match problem.scale_mode {
            ScaleMode::Fixed => {}
            ScaleMode::Single => {
                x0.push(T::one());
                step.push(lit(0.05));
            }
            ScaleMode::PerAngle => {
                for _ in 0..problem.angles.len() {
                    x0.push(T::one());
                    step.push(lit(0.05));
                }
            }
        }

        let mut f = |x: &[T]| problem.objective(x);
        let r = nelder_mead(&mut f, &x0, &step, options.tol, options.max_iter);
        let better = match &best {
            None => true,
            Some((_, fx, _)) => r.fx < *fx, // strict: ties keep the lowest seed index
        };
        if better {
            best = Some((r.x, r.fx, r.converged));
        }
        if let Some((_, fx, _)) = &best {
            if *fx < stop_below {
                break;
            }
        }
    }
    let (x, fx, converged) = best.expect("at least one start");
    (x, fx, converged, used)
}

fn finish<T: Float>(
    problem: &Problem<'_, T>,
    x: Vec<T>,
    converged: bool,
    used: usize,
) -> FitResult<T> {
    let (mut params, scales) = problem.decode(&x);

    // Residuals in MHz at the optimum (unweighted RMS).
    let mut ss = T::zero();
    for obs in problem.observations {
        params.field_scale = problem.scale_for(obs, &scales);
        if let Ok(f) = predict(&params, &obs.field, obs.label, problem.mode) {
            ss += (f - obs.frequency_mhz).powi(2);
        }
    }
    let rms = (ss / lit::<T>(problem.observations.len() as f64)).sqrt();

    // Report in the conventional frame; the remap preserves the spectrum.
    let (d, e) = remap_zfs(params.d_mhz, params.e_mhz);
    // Fold the tilt into [0, 90]: transition frequencies are even in the
    // tilt and 180-degree periodic.
    let mut tilt = params.tilt_deg.abs();
    let period = lit::<T>(180.0);
    tilt = tilt - (tilt / period).floor() * period;
    if tilt > lit(90.0) {
        tilt = period - tilt;
    }

    let field_scale = match problem.scale_mode {
        ScaleMode::Fixed => FieldScale::Fixed,
        ScaleMode::Single => FieldScale::Single(scales[0]),
        ScaleMode::PerAngle => FieldScale::PerAngle(
            problem
                .angles
                .iter()
                .cloned()
                .zip(scales.iter().cloned())
                .collect(),
        ),
    };

    FitResult {
        d_mhz: d,
        e_mhz: e,
        g_factor: params.g_factor,
        tilt_deg: tilt,
        field_scale,
        residual_rms_mhz: rms,
        converged,
        n_restarts_used: used,
    }
}

/// Fits (D, E) and optionally g to resonances observed at known fields.
///
/// Weighted least squares over the exact forward model, minimized from
/// deterministic multi-start seeds; the lowest objective wins and ties go to
/// the lowest seed index.
pub fn fit_zfs<T: Float>(
    observations: &[ResonanceObservation<T>],
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    validate_common(observations)?;
    if options.scale_mode == ScaleMode::PerAngle {
        return Err(Error::Underdetermined(
            "per-angle field scales require an angle series; use fit_angle_series".into(),
        ));
    }
    let fields = distinct_sorted(
        observations.iter().map(|o| o.field.magnitude()),
        lit(1e-9),
    );
    if fields.len() < 2 {
        return Err(Error::Underdetermined(format!(
            "need observations at >= 2 distinct field magnitudes for D/E \
             identifiability, got {}",
            fields.len()
        )));
    }
    let problem = Problem {
        observations,
        fix_g: options.fix_g,
        fit_tilt: options.fit_tilt,
        scale_mode: options.scale_mode,
        mode: if options.linear_zeeman {
            PredictMode::LinearZeeman(options.dqt_intercept)
        } else {
            PredictMode::Exact
        },
        angles: Vec::new(),
    };
    if observations.len() < problem.n_params() {
        return Err(Error::Underdetermined(format!(
            "{} observations cannot determine {} parameters",
            observations.len(),
            problem.n_params()
        )));
    }
    let (x, _fx, converged, used) = run_multistart(&problem, options);
    Ok(finish(&problem, x, converged, used))
}

/// Jointly fits (D, E, g, tilt, field scale) to a rotation series.
///
/// Requires at least three distinct angles including one near 0 and one near
/// 90 degrees, and at least one non-doublet label.
pub fn fit_angle_series<T: Float>(
    observations: &[ResonanceObservation<T>],
    options: &FitOptions<T>,
) -> Result<FitResult<T>> {
    validate_common(observations)?;
    if observations.iter().any(|o| o.angle_deg.is_none()) {
        return Err(Error::invalid(
            "angle-series observations must all carry angle_deg",
        ));
    }
    let angles = distinct_sorted(
        observations.iter().map(|o| o.angle_deg.unwrap()),
        lit(1e-6),
    );
    if angles.len() < 3 {
        return Err(Error::Underdetermined(format!(
            "need >= 3 distinct angles, got {}",
            angles.len()
        )));
    }
    let lo = angles[0];
    let hi = angles[angles.len() - 1];
    if lo > lit(20.0) || hi < lit(70.0) {
        return Err(Error::Underdetermined(
            "angle series must include points near 0 and near 90 degrees".into(),
        ));
    }

    let scale_mode = match options.scale_mode {
        ScaleMode::Fixed => ScaleMode::Single, // angle series always fits a scale
        other => other,
    };
    let problem = Problem {
        observations,
        fix_g: options.fix_g,
        fit_tilt: true,
        scale_mode,
        mode: if options.linear_zeeman {
            PredictMode::LinearZeeman(options.dqt_intercept)
        } else {
            PredictMode::Exact
        },
        angles,
    };
    if observations.len() < problem.n_params() {
        return Err(Error::Underdetermined(format!(
            "{} observations cannot determine {} parameters",
            observations.len(),
            problem.n_params()
        )));
    }
    let (x, _fx, converged, used) = run_multistart(&problem, options);
    Ok(finish(&problem, x, converged, used))
}
