//! Classical rate-equation photodynamics of the nine-level spin complex.
//!
//! Level ordering: GS, ES, LMS(+1), LMS(0), LMS(-1), RMS(1..4). The local
//! metastable (LMS) levels are the labeled eigenstates of the triplet
//! Hamiltonian; the remote metastable (RMS) levels are the eigenstates of the
//! pair Hamiltonian, sorted by energy. Optical pumping cycles GS <-> ES,
//! spin-selective intersystem crossing shelves into the LMS, charge transfer
//! moves population into the RMS conserving the spin projection through
//! eigenstate overlaps, and recombination back to GS is singlet-selective:
//! that asymmetry is what generates ODMR contrast.

use crate::error::Error;
use crate::scalar::{lit, lit_usize, Float};
use crate::spin::{
    build_pair_hamiltonian, build_triplet_hamiltonian, dq_element, pair_levels, pair_sx_element,
    sx_element, triplet_levels, FieldVector, MsLabel, PairLevels, PairModel, TripletLevels,
    ZfsParams, PAIR_S, PAIR_T_0, PAIR_T_MINUS, PAIR_T_PLUS,
};
use crate::Result;

/// Number of levels in the scheme.
pub const N_LEVELS: usize = 9;

pub const IDX_GS: usize = 0;
pub const IDX_ES: usize = 1;
pub const IDX_LMS_P1: usize = 2;
pub const IDX_LMS_0: usize = 3;
pub const IDX_LMS_M1: usize = 4;
pub const IDX_RMS: usize = 5;

/// Tag of one level in the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelTag {
    Gs,
    Es,
    LmsP1,
    Lms0,
    LmsM1,
    Rms(usize),
}

impl std::fmt::Display for LevelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LevelTag::Gs => write!(f, "GS"),
            LevelTag::Es => write!(f, "ES"),
            LevelTag::LmsP1 => write!(f, "LMS(+1)"),
            LevelTag::Lms0 => write!(f, "LMS(0)"),
            LevelTag::LmsM1 => write!(f, "LMS(-1)"),
            LevelTag::Rms(k) => write!(f, "RMS({})", k + 1),
        }
    }
}

/// Tags in level order.
pub fn level_tags() -> [LevelTag; N_LEVELS] {
    [
        LevelTag::Gs,
        LevelTag::Es,
        LevelTag::LmsP1,
        LevelTag::Lms0,
        LevelTag::LmsM1,
        LevelTag::Rms(0),
        LevelTag::Rms(1),
        LevelTag::Rms(2),
        LevelTag::Rms(3),
    ]
}

/// The spin content of the scheme at one field point: diagonalized triplet
/// (with m_s labels) and pair (with singlet fractions).
#[derive(Debug, Clone)]
pub struct LevelScheme<T> {
    pub triplet: TripletLevels<T>,
    pub pair: PairLevels<T>,
}

impl<T: Float> LevelScheme<T> {
    pub fn new(zfs: &ZfsParams<T>, pair: &PairModel<T>, field: &FieldVector<T>) -> Result<Self> {
        let h3 = build_triplet_hamiltonian(zfs, field)?;
        let triplet = triplet_levels(&h3)?;
        let h4 = build_pair_hamiltonian(pair, field)?;
        let pair = pair_levels(&h4)?;
        Ok(LevelScheme { triplet, pair })
    }

    /// Singlet fraction of RMS eigenstate `k` (0-based).
    pub fn singlet_fraction(&self, k: usize) -> T {
        self.pair.singlet_fraction(k)
    }
}

/// Kinetic rates of the level scheme, all in inverse microseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams<T> {
    /// Optical pumping GS -> ES.
    pub k_pump: T,
    /// Radiative decay ES -> GS; the photoluminescence channel.
    pub k_rad: T,
    /// Spin-selective intersystem crossing ES -> LMS(m_s), ordered (+1, 0, -1).
    pub k_isc: [T; 3],
    /// Charge transfer LMS -> RMS.
    pub k_ct: T,
    /// Singlet-channel recombination RMS -> GS.
    pub k_rec_s: T,
    /// Triplet-channel recombination RMS -> GS; must stay below `k_rec_s`.
    pub k_rec_t: T,
}

impl<T: Float> Default for RateParams<T> {
    /// Working defaults chosen to give percent-level contrast and a visible
    /// bunching shoulder; every value is configurable.
    fn default() -> Self {
        RateParams {
            k_pump: lit(10.0),
            k_rad: lit(100.0),
            k_isc: [lit(2.0), lit(8.0), lit(2.0)],
            k_ct: lit(5.0),
            k_rec_s: lit(20.0),
            k_rec_t: lit(0.5),
        }
    }
}

impl<T: Float> RateParams<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.k_pump,
            self.k_rad,
            self.k_isc[0],
            self.k_isc[1],
            self.k_isc[2],
            self.k_ct,
            self.k_rec_s,
            self.k_rec_t,
        ];
        for r in all {
            if !r.is_finite() || r < T::zero() {
                return Err(Error::invalid(format!("rates must be finite and >= 0, got {r}")));
            }
        }
        if self.k_rec_s <= self.k_rec_t {
            return Err(Error::invalid(
                "singlet recombination must exceed triplet recombination (k_rec_s > k_rec_t)",
            ));
        }
        Ok(())
    }
}

/// Microwave drive amplitude multiplier versus frequency, modeling a
/// non-flat amplifier response. Linear interpolation, clamped at the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplifierTable<T> {
    points: Vec<(T, T)>,
}

impl<T: Float> AmplifierTable<T> {
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("amplifier table must not be empty"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(
                    "amplifier table frequencies must be strictly increasing",
                ));
            }
        }
        for &(f, g) in &points {
            if !f.is_finite() || !g.is_finite() || g < T::zero() {
                return Err(Error::invalid("amplifier table entries must be finite with gain >= 0"));
            }
        }
        Ok(AmplifierTable { points })
    }

    pub fn gain(&self, frequency_mhz: T) -> T {
        let pts = &self.points;
        if frequency_mhz <= pts[0].0 {
            return pts[0].1;
        }
        if frequency_mhz >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        for w in pts.windows(2) {
            let (f0, g0) = w[0];
            let (f1, g1) = w[1];
            if frequency_mhz <= f1 {
                let t = (frequency_mhz - f0) / (f1 - f0);
                return g0 + t * (g1 - g0);
            }
        }
        pts[pts.len() - 1].1
    }
}

/// Incoherent CW microwave drive.
#[derive(Debug, Clone, PartialEq)]
pub struct MwDrive<T> {
    /// Drive frequency in MHz.
    pub frequency_mhz: T,
    /// Effective two-level mixing rate at resonance, inverse microseconds.
    pub drive_rate: T,
    /// Lorentzian full width at half maximum in MHz.
    pub linewidth_fwhm_mhz: T,
    /// Optional amplifier response; `None` means flat.
    pub amplifier: Option<AmplifierTable<T>>,
}

impl<T: Float> MwDrive<T> {
    pub fn new(frequency_mhz: T, drive_rate: T, linewidth_fwhm_mhz: T) -> Result<Self> {
        let drive = MwDrive {
            frequency_mhz,
            drive_rate,
            linewidth_fwhm_mhz,
            amplifier: None,
        };
        drive.validate()?;
        Ok(drive)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.frequency_mhz.is_finite() {
            return Err(Error::invalid("drive frequency must be finite"));
        }
        if !self.drive_rate.is_finite() || self.drive_rate < T::zero() {
            return Err(Error::invalid("drive rate must be finite and >= 0"));
        }
        if !self.linewidth_fwhm_mhz.is_finite() || self.linewidth_fwhm_mhz <= T::zero() {
            return Err(Error::invalid("linewidth FWHM must be finite and > 0"));
        }
        Ok(())
    }

    /// Drive rate including the amplifier gain at the drive frequency.
    fn effective_rate(&self) -> T {
        match &self.amplifier {
            Some(t) => self.drive_rate * t.gain(self.frequency_mhz),
            None => self.drive_rate,
        }
    }
}

/// Lorentzian line factor, 1 at zero detuning.
pub fn lorentzian<T: Float>(detuning_mhz: T, fwhm_mhz: T) -> T {
    let hw = fwhm_mhz / lit(2.0);
    hw * hw / (detuning_mhz * detuning_mhz + hw * hw)
}

/// Rate generator: column convention, `m[i][j]` with i != j is the rate
/// j -> i (>= 0) and each diagonal holds minus its column sum, so columns
/// sum to zero and probability is conserved.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix<T> {
    n: usize,
    m: Vec<T>,
}

impl<T: Float> GeneratorMatrix<T> {
    fn zeros(n: usize) -> Self {
        GeneratorMatrix {
            n,
            m: vec![T::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.m[i * self.n + j]
    }

    fn add_rate(&mut self, from: usize, to: usize, rate: T) -> Result<()> {
        if !rate.is_finite() || rate < T::zero() {
            return Err(Error::Construction(format!(
                "negative or non-finite rate {rate} for {} -> {}",
                level_tags()[from],
                level_tags()[to]
            )));
        }
        self.m[to * self.n + from] += rate;
        Ok(())
    }

    /// Recomputes diagonals as minus the off-diagonal column sums.
    fn close_columns(&mut self) {
        for j in 0..self.n {
            let mut sum = T::zero();
            for i in 0..self.n {
                if i != j {
                    sum += self.m[i * self.n + j];
                }
            }
            self.m[j * self.n + j] = -sum;
        }
    }

    /// Largest absolute column sum; zero up to rounding for a valid generator.
    pub fn column_sum_defect(&self) -> T {
        let mut worst = T::zero();
        for j in 0..self.n {
            let mut sum = T::zero();
            for i in 0..self.n {
                sum += self.m[i * self.n + j];
            }
            worst = worst.max(sum.abs());
        }
        worst
    }

    /// `out = M p`.
    pub fn apply(&self, p: &[T], out: &mut [T]) {
        for i in 0..self.n {
            let mut acc = T::zero();
            let row = &self.m[i * self.n..(i + 1) * self.n];
            for (mij, pj) in row.iter().zip(p.iter()) {
                acc += *mij * *pj;
            }
            out[i] = acc;
        }
    }
}

/// Assembles the rate generator for the level scheme at one field point,
/// optionally with a CW microwave drive mixing LMS and RMS sublevels.
pub fn assemble_generator<T: Float>(
    zfs: &ZfsParams<T>,
    pair: &PairModel<T>,
    rates: &RateParams<T>,
    field: &FieldVector<T>,
    mw: Option<&MwDrive<T>>,
) -> Result<GeneratorMatrix<T>> {
    let scheme = LevelScheme::new(zfs, pair, field)?;
    assemble_from_scheme(&scheme, rates, mw)
}

/// Same as [`assemble_generator`] with a prebuilt [`LevelScheme`].
pub fn assemble_from_scheme<T: Float>(
    scheme: &LevelScheme<T>,
    rates: &RateParams<T>,
    mw: Option<&MwDrive<T>>,
) -> Result<GeneratorMatrix<T>> {
    rates.validate()?;
    if let Some(d) = mw {
        d.validate()?;
    }
    let mut g = GeneratorMatrix::zeros(N_LEVELS);
    let half = lit::<T>(0.5);

    // Optical cycle.
    g.add_rate(IDX_GS, IDX_ES, rates.k_pump)?;
    g.add_rate(IDX_ES, IDX_GS, rates.k_rad)?;

    // Spin-selective intersystem crossing into the labeled LMS levels.
    g.add_rate(IDX_ES, IDX_LMS_P1, rates.k_isc[0])?;
    g.add_rate(IDX_ES, IDX_LMS_0, rates.k_isc[1])?;
    g.add_rate(IDX_ES, IDX_LMS_M1, rates.k_isc[2])?;

    // Charge transfer LMS -> RMS, conserving the spin projection through
    // overlaps with the pair basis. The m = 0 channel spans both Sz = 0
    // basis states (T0 and S), so its overlap weights are halved to keep the
    // total transfer rate at k_ct for every sublevel.
    for k in 0..4 {
        let wp = scheme.pair.eigen.basis_weight(k, PAIR_T_PLUS);
        let wm = scheme.pair.eigen.basis_weight(k, PAIR_T_MINUS);
        let w0 = (scheme.pair.eigen.basis_weight(k, PAIR_T_0)
            + scheme.pair.eigen.basis_weight(k, PAIR_S))
            * half;
        g.add_rate(IDX_LMS_P1, IDX_RMS + k, rates.k_ct * wp)?;
        g.add_rate(IDX_LMS_0, IDX_RMS + k, rates.k_ct * w0)?;
        g.add_rate(IDX_LMS_M1, IDX_RMS + k, rates.k_ct * wm)?;
    }

    // Singlet-selective recombination RMS -> GS.
    for k in 0..4 {
        let s = scheme.pair.singlet_fraction(k);
        let rate = rates.k_rec_s * s + rates.k_rec_t * (T::one() - s);
        g.add_rate(IDX_RMS + k, IDX_GS, rate)?;
    }

    // Incoherent microwave mixing.
    if let Some(drive) = mw {
        let eff = drive.effective_rate();
        if eff > T::zero() {
            let fwhm = drive.linewidth_fwhm_mhz;
            let f = drive.frequency_mhz;

            // LMS sublevel pairs. Single-quantum pairs use |<i|Sx|j>|^2; the
            // double quantum pair has no Sx element, so it uses the
            // Delta m = 2 operator as its relative weight (same convention
            // as the reported DQT transition strength).
            let t = &scheme.triplet;
            let ip = t.index(MsLabel::P1);
            let i0 = t.index(MsLabel::Zero);
            let im = t.index(MsLabel::M1);
            let v = &t.eigen.vectors;
            let lms_pairs = [
                (
                    IDX_LMS_P1,
                    IDX_LMS_0,
                    sx_element(&v[ip], &v[i0]).norm_sqr(),
                    (t.eigen.values[ip] - t.eigen.values[i0]).abs(),
                ),
                (
                    IDX_LMS_0,
                    IDX_LMS_M1,
                    sx_element(&v[i0], &v[im]).norm_sqr(),
                    (t.eigen.values[i0] - t.eigen.values[im]).abs(),
                ),
                (
                    IDX_LMS_P1,
                    IDX_LMS_M1,
                    dq_element(&v[ip], &v[im]).norm_sqr(),
                    (t.eigen.values[ip] - t.eigen.values[im]).abs(),
                ),
            ];
            for (a, b, weight, freq) in lms_pairs {
                let r = eff * lorentzian(f - freq, fwhm) * weight;
                g.add_rate(a, b, r)?;
                g.add_rate(b, a, r)?;
            }

            // RMS eigenstate pairs, driven through the total transverse spin.
            let pv = &scheme.pair.eigen.vectors;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let weight = pair_sx_element(&pv[i], &pv[j]).norm_sqr();
                    let freq = (scheme.pair.eigen.values[i] - scheme.pair.eigen.values[j]).abs();
                    let r = eff * lorentzian(f - freq, fwhm) * weight;
                    g.add_rate(IDX_RMS + i, IDX_RMS + j, r)?;
                    g.add_rate(IDX_RMS + j, IDX_RMS + i, r)?;
                }
            }
        }
    }

    g.close_columns();
    Ok(g)
}

/// Levels unreachable from GS or unable to return to it; used to explain
/// singular balance equations.
fn disconnected_levels<T: Float>(m: &GeneratorMatrix<T>) -> Vec<String> {
    let n = m.dim();
    let reach = |forward: bool| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack = vec![IDX_GS];
        seen[IDX_GS] = true;
        while let Some(j) = stack.pop() {
            for k in 0..n {
                let rate = if forward { m.get(k, j) } else { m.get(j, k) };
                if k != j && rate > T::zero() && !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        seen
    };
    let fwd = reach(true);
    let back = reach(false);
    let tags = level_tags();
    let mut out = Vec::new();
    for k in 0..n {
        if !fwd[k] {
            out.push(format!("{} unreachable from GS", tags[k]));
        } else if !back[k] {
            out.push(format!("{} cannot return to GS", tags[k]));
        }
    }
    out
}

/// Steady state of the generator: solves M p = 0 with one balance equation
/// replaced by the normalization sum(p) = 1.
///
/// Levels with no inflow path from GS stay at exactly zero population (all
/// probability starts the optical cycle in GS), so disabling a branch, e.g.
/// k_isc = k_ct = 0, leaves a well-posed reduced model. Absorbing subsets
/// that drain the cycle make the balance equations singular and are
/// reported with the offending levels.
pub fn steady_state<T: Float>(m: &GeneratorMatrix<T>) -> Result<Vec<T>> {
    let n = m.dim();
    // Forward reachability from GS through positive rates.
    let mut reachable = vec![false; n];
    reachable[IDX_GS] = true;
    let mut stack = vec![IDX_GS];
    while let Some(j) = stack.pop() {
        for k in 0..n {
            if k != j && m.get(k, j) > T::zero() && !reachable[k] {
                reachable[k] = true;
                stack.push(k);
            }
        }
    }
    let live: Vec<usize> = (0..n).filter(|&k| reachable[k]).collect();
    let r = live.len();

    let mut a = vec![T::zero(); r * r];
    let mut b = vec![T::zero(); r];
    for j in 0..r {
        a[j] = T::one(); // normalization row replaces the GS balance row
    }
    b[0] = T::one();
    for (ri, &i) in live.iter().enumerate().skip(1) {
        for (rj, &j) in live.iter().enumerate() {
            a[ri * r + rj] = m.get(i, j);
        }
    }
    let p = crate::linalg::solve_dense(&a, &b, r).map_err(|_| {
        let details = disconnected_levels(m);
        let msg = if details.is_empty() {
            "balance equations are singular beyond the expected null space".to_string()
        } else {
            format!("balance equations are singular: {}", details.join("; "))
        };
        Error::Singular(msg)
    })?;

    let clamp_tol = lit::<T>(-1e-9).min(-T::epsilon() * lit(1e4));
    let mut out = vec![T::zero(); n];
    for (ri, &i) in live.iter().enumerate() {
        let v = p[ri];
        if v < T::zero() {
            if v < clamp_tol {
                return Err(Error::Singular(format!(
                    "steady state has a significantly negative population {v}"
                )));
            }
            out[i] = T::zero();
        } else {
            out[i] = v;
        }
    }
    let total: T = out.iter().fold(T::zero(), |acc, &v| acc + v);
    for v in out.iter_mut() {
        *v /= total;
    }
    Ok(out)
}

/// Photon flux in inverse microseconds: radiative rate times the excited
/// state population.
pub fn pl_rate<T: Float>(p: &[T], rates: &RateParams<T>) -> T {
    rates.k_rad * p[IDX_ES]
}

/// CW ODMR contrast in percent: (PL(mw on) - PL(mw off)) / PL(mw off) * 100.
pub fn odmr_contrast<T: Float>(
    zfs: &ZfsParams<T>,
    pair: &PairModel<T>,
    rates: &RateParams<T>,
    field: &FieldVector<T>,
    mw: &MwDrive<T>,
) -> Result<T> {
    let scheme = LevelScheme::new(zfs, pair, field)?;
    let g_off = assemble_from_scheme(&scheme, rates, None)?;
    let p_off = steady_state(&g_off)?;
    let pl_off = pl_rate(&p_off, rates);
    if pl_off <= T::zero() {
        return Err(Error::DarkModel);
    }
    let g_on = assemble_from_scheme(&scheme, rates, Some(mw))?;
    let p_on = steady_state(&g_on)?;
    let pl_on = pl_rate(&p_on, rates);
    Ok((pl_on - pl_off) / pl_off * lit(100.0))
}

/// Evolves populations for `t` microseconds with fixed-step classical RK4.
/// The step obeys h <= 0.1 / max|M_jj|, so the stiffest level is resolved.
pub fn evolve<T: Float>(m: &GeneratorMatrix<T>, p0: &[T], t: T) -> Result<Vec<T>> {
    let n = m.dim();
    if p0.len() != n {
        return Err(Error::domain("population vector length mismatch"));
    }
    if !t.is_finite() || t < T::zero() {
        return Err(Error::domain("evolution time must be finite and >= 0"));
    }
    let total: T = p0.iter().fold(T::zero(), |acc, &v| acc + v);
    if (total - T::one()).abs() > lit(1e-6) {
        return Err(Error::domain(format!(
            "initial populations must sum to 1, got {total}"
        )));
    }
    let mut max_diag = T::zero();
    for j in 0..n {
        max_diag = max_diag.max(m.get(j, j).abs());
    }
    if t == T::zero() || max_diag == T::zero() {
        return Ok(p0.to_vec());
    }
    let steps_f = (t * max_diag / lit(0.1)).ceil();
    let steps = steps_f.to_usize().unwrap_or(usize::MAX).max(1);
    let h = t / lit_usize::<T>(steps);

    let mut p = p0.to_vec();
    let mut k1 = vec![T::zero(); n];
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];
    let half = lit::<T>(0.5);
    let sixth = T::one() / lit::<T>(6.0);
    let two = lit::<T>(2.0);

    for _ in 0..steps {
        m.apply(&p, &mut k1);
        for i in 0..n {
            tmp[i] = p[i] + half * h * k1[i];
        }
        m.apply(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = p[i] + half * h * k2[i];
        }
        m.apply(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = p[i] + h * k3[i];
        }
        m.apply(&tmp, &mut k4);
        for i in 0..n {
            p[i] += h * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
    }
    Ok(p)
}

/// Second-order photon correlation g2(tau) of the model.
///
/// After a detection event the emitter is projected to the ground state, so
/// g2(tau) = p_ES(tau | p(0) = GS) / p_ES(steady state). The returned curve
/// is the ideal model one: g2(0) = 0 and g2(inf) = 1.
pub fn g2<T: Float>(
    zfs: &ZfsParams<T>,
    pair: &PairModel<T>,
    rates: &RateParams<T>,
    field: &FieldVector<T>,
    tau_grid_us: &[T],
) -> Result<Vec<T>> {
    if tau_grid_us.is_empty() {
        return Err(Error::domain("tau grid must not be empty"));
    }
    for w in tau_grid_us.windows(2) {
        if w[1] < w[0] {
            return Err(Error::domain("tau grid must be nondecreasing"));
        }
    }
    if tau_grid_us[0] < T::zero() {
        return Err(Error::domain("tau must be >= 0"));
    }
    let scheme = LevelScheme::new(zfs, pair, field)?;
    let gen = assemble_from_scheme(&scheme, rates, None)?;
    let p_ss = steady_state(&gen)?;
    let es_ss = p_ss[IDX_ES];
    if es_ss <= T::zero() {
        return Err(Error::DarkModel);
    }
    let mut p = vec![T::zero(); N_LEVELS];
    p[IDX_GS] = T::one();
    let mut prev = T::zero();
    let mut out = Vec::with_capacity(tau_grid_us.len());
    for &tau in tau_grid_us {
        p = evolve(&gen, &p, tau - prev)?;
        prev = tau;
        out.push(p[IDX_ES] / es_ss);
    }
    Ok(out)
}

/// Background level that rescales an ideal g2 curve so g2(0) hits `target`.
pub fn g2_background_for_target<T: Float>(target: T) -> Result<T> {
    if !target.is_finite() || target < T::zero() || target >= T::one() {
        return Err(Error::domain("g2(0) target must lie in [0, 1)"));
    }
    Ok(target / (T::one() - target))
}

/// Applies a background `b` to an ideal curve: g2 -> (g2 + b) / (1 + b).
pub fn apply_g2_background<T: Float>(curve: &mut [T], background: T) {
    for v in curve.iter_mut() {
        *v = (*v + background) / (T::one() + background);
    }
}
