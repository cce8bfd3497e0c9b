//! Spin Hamiltonians of the emitter complex: the S = 1 local metastable
//! triplet and the weakly coupled spin-1/2 pair of the remote metastable
//! state, together with their labeled transition frequencies.
//!
//! Conventions fixed here and relied upon everywhere else:
//! * triplet basis ordered (|+1>, |0>, |-1>) along the crystal z axis,
//! * pair basis ordered (T+, T0, T-, S),
//! * zero-field splitting written `D (Sz^2 - 2/3) + E (Sx^2 - Sy^2)`, so the
//!   zero-field triplet transitions are D - E and D + E and the zero-field
//!   gap between the two |m_s| = 1 branches is 2E.

use num_complex::Complex;

use crate::error::Error;
use crate::linalg::{EigenDecomposition, HermitianMatrix};
use crate::scalar::{lit, Float};
use crate::Result;

/// Electron gyromagnetic ratio in MHz per mT.
pub const GAMMA_E_MHZ_PER_MT: f64 = 28.025;

/// Electron gyromagnetic ratio in the working scalar type.
#[inline]
pub fn gamma_e<T: Float>() -> T {
    lit(GAMMA_E_MHZ_PER_MT)
}

/// Static magnetic field in mT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldVector<T> {
    pub bx: T,
    pub by: T,
    pub bz: T,
}

impl<T: Float> FieldVector<T> {
    pub fn new(bx: T, by: T, bz: T) -> Result<Self> {
        if !(bx.is_finite() && by.is_finite() && bz.is_finite()) {
            return Err(Error::domain("magnetic field components must be finite"));
        }
        Ok(FieldVector { bx, by, bz })
    }

    /// Field of magnitude `b_mag` tilted by `theta_deg` from the out-of-plane
    /// axis toward the in-plane x axis: B = |B| (sin t, 0, cos t).
    pub fn from_polar(b_mag: T, theta_deg: T) -> Result<Self> {
        if !(b_mag.is_finite() && theta_deg.is_finite()) {
            return Err(Error::domain("field magnitude and angle must be finite"));
        }
        let t = theta_deg.to_radians();
        FieldVector::new(b_mag * t.sin(), T::zero(), b_mag * t.cos())
    }

    pub fn zero() -> Self {
        FieldVector {
            bx: T::zero(),
            by: T::zero(),
            bz: T::zero(),
        }
    }

    pub fn magnitude(&self) -> T {
        (self.bx * self.bx + self.by * self.by + self.bz * self.bz).sqrt()
    }

    pub fn scaled(&self, factor: T) -> Self {
        FieldVector {
            bx: self.bx * factor,
            by: self.by * factor,
            bz: self.bz * factor,
        }
    }

    /// Rotates the field about the y axis by `angle_deg` (x-z plane).
    pub fn rotated_about_y(&self, angle_deg: T) -> Self {
        let t = angle_deg.to_radians();
        let (s, c) = (t.sin(), t.cos());
        FieldVector {
            bx: c * self.bx + s * self.bz,
            by: self.by,
            bz: -s * self.bx + c * self.bz,
        }
    }
}

/// Zero-field splitting parameters and g-factor of the triplet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZfsParams<T> {
    /// Axial splitting D in MHz.
    pub d_mhz: T,
    /// Transverse splitting E in MHz.
    pub e_mhz: T,
    /// Dimensionless g-factor; 2.0 reproduces the bare gyromagnetic ratio.
    pub g_factor: T,
}

impl<T: Float> ZfsParams<T> {
    /// Strict constructor: requires the conventional frame D >= 0 and
    /// 0 <= E <= D/3 (and a positive finite g-factor).
    pub fn new(d_mhz: T, e_mhz: T, g_factor: T) -> Result<Self> {
        if !(d_mhz.is_finite() && e_mhz.is_finite() && g_factor.is_finite()) {
            return Err(Error::invalid("ZFS parameters must be finite"));
        }
        if g_factor <= T::zero() {
            return Err(Error::invalid("g-factor must be positive"));
        }
        if d_mhz < T::zero() {
            return Err(Error::invalid(format!("D must be >= 0, got {d_mhz}")));
        }
        if e_mhz < T::zero() || e_mhz > d_mhz / lit(3.0) {
            return Err(Error::invalid(format!(
                "E must satisfy 0 <= E <= D/3, got D={d_mhz}, E={e_mhz}"
            )));
        }
        Ok(ZfsParams {
            d_mhz,
            e_mhz,
            g_factor,
        })
    }

    /// Lenient constructor: accepts any finite (D, E), re-expressing them in
    /// the conventional principal-axis frame. Returns the parameters and
    /// whether a remap changed them.
    ///
    /// The remap relabels principal axes so that |E| <= |D|/3 and E >= 0
    /// while preserving the zero-field spectrum exactly; spectra whose two
    /// upper levels straddle zero only admit a negative-D representation,
    /// which is kept (this is why `d_mhz` is not clamped here).
    pub fn remapped(d_mhz: T, e_mhz: T, g_factor: T) -> Result<(Self, bool)> {
        if !(d_mhz.is_finite() && e_mhz.is_finite() && g_factor.is_finite()) {
            return Err(Error::invalid("ZFS parameters must be finite"));
        }
        if g_factor <= T::zero() {
            return Err(Error::invalid("g-factor must be positive"));
        }
        let (d2, e2) = remap_zfs(d_mhz, e_mhz);
        let scale = d_mhz.abs().max(e_mhz.abs()).max(T::one());
        let changed = (d2 - d_mhz).abs() + (e2 - e_mhz).abs() > scale * lit(1e-12);
        Ok((
            ZfsParams {
                d_mhz: d2,
                e_mhz: e2,
                g_factor,
            },
            changed,
        ))
    }

    /// Zero-field triplet level energies {-2D/3, D/3 - E, D/3 + E} in MHz.
    pub fn zero_field_levels(&self) -> [T; 3] {
        zero_field_levels(self.d_mhz, self.e_mhz)
    }
}

fn zero_field_levels<T: Float>(d: T, e: T) -> [T; 3] {
    let third = d / lit(3.0);
    [-(third + third), third - e, third + e]
}

/// Re-expresses (D, E) in the conventional principal-axis frame, preserving
/// the zero-field spectrum exactly. Output satisfies E >= 0, |E| <= |D|/3.
/// Inputs already in range come back bit-identical.
pub fn remap_zfs<T: Float>(d: T, e: T) -> (T, T) {
    if d >= T::zero() && e >= T::zero() && e <= d / lit(3.0) {
        return (d, e);
    }
    let mut levels = zero_field_levels(d, e);
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let [a, b, c] = levels;
    let half = lit::<T>(0.5);
    let three_halves = lit::<T>(1.5);
    if b >= T::zero() {
        // Unique low level: D > 0 representation.
        (-three_halves * a, (c - b) * half)
    } else {
        // Unique high level: only a D < 0 representation exists.
        (-three_halves * c, (b - a) * half)
    }
}

/// Labels for the resonances of the complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransitionLabel {
    /// Triplet 0 <-> -1.
    TMinus,
    /// Triplet 0 <-> +1.
    TPlus,
    /// Double quantum transition -1 <-> +1.
    Dqt,
    /// Spin-1/2 pair transition.
    Doublet,
}

impl TransitionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransitionLabel::TMinus => "T_MINUS",
            TransitionLabel::TPlus => "T_PLUS",
            TransitionLabel::Dqt => "DQT",
            TransitionLabel::Doublet => "DOUBLET",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "T_MINUS" => Some(TransitionLabel::TMinus),
            "T_PLUS" => Some(TransitionLabel::TPlus),
            "DQT" => Some(TransitionLabel::Dqt),
            "DOUBLET" => Some(TransitionLabel::Doublet),
            _ => None,
        }
    }
}

impl std::fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One labeled resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<T> {
    pub label: TransitionLabel,
    pub frequency_mhz: T,
    /// Relative strength in [0, 1]; see `triplet_transitions` for the
    /// matrix-element convention.
    pub strength: T,
}

/// The labeled transitions of one spin system at one field point.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSet<T> {
    pub entries: Vec<Transition<T>>,
}

impl<T: Float> TransitionSet<T> {
    pub fn frequency(&self, label: TransitionLabel) -> Option<T> {
        self.entries
            .iter()
            .find(|t| t.label == label)
            .map(|t| t.frequency_mhz)
    }
}

/// Spin-1 Hamiltonian of the triplet in MHz, basis (|+1>, |0>, |-1>).
#[derive(Debug, Clone, PartialEq)]
pub struct TripletHamiltonian<T> {
    pub matrix: HermitianMatrix<T>,
}

/// Linear Zeeman shift of a single sublevel: gamma_e * |B| * m_s.
///
/// `ms` must be one of -1, -1/2, 0, +1/2, +1.
pub fn zeeman_shift<T: Float>(ms: T, field: &FieldVector<T>) -> Result<T> {
    if !ms.is_finite() {
        return Err(Error::domain("m_s must be finite"));
    }
    let allowed = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let ok = allowed
        .iter()
        .any(|&a| (ms - lit::<T>(a)).abs() < lit(1e-9));
    if !ok {
        return Err(Error::domain(format!(
            "m_s must be one of -1, -1/2, 0, +1/2, +1; got {ms}"
        )));
    }
    if !(field.bx.is_finite() && field.by.is_finite() && field.bz.is_finite()) {
        return Err(Error::domain("magnetic field components must be finite"));
    }
    Ok(gamma_e::<T>() * field.magnitude() * ms)
}

/// Spin-1 operator matrices in the (|+1>, |0>, |-1>) basis.
pub fn spin1_operators<T: Float>() -> [HermitianMatrix<T>; 3] {
    let inv_sqrt2 = T::one() / lit::<T>(2.0).sqrt();
    let zero = Complex::new(T::zero(), T::zero());

    let mut sx = HermitianMatrix::zeros(3);
    sx.set_sym(0, 1, Complex::new(inv_sqrt2, T::zero()));
    sx.set_sym(1, 2, Complex::new(inv_sqrt2, T::zero()));

    let mut sy = HermitianMatrix::zeros(3);
    sy.set_sym(0, 1, Complex::new(T::zero(), -inv_sqrt2));
    sy.set_sym(1, 2, Complex::new(T::zero(), -inv_sqrt2));

    let mut sz = HermitianMatrix::zeros(3);
    sz.set(0, 0, Complex::new(T::one(), T::zero()));
    sz.set(1, 1, zero);
    sz.set(2, 2, Complex::new(-T::one(), T::zero()));

    [sx, sy, sz]
}

/// The Delta m = 2 operator Sx^2 - Sy^2, which couples |+1> and |-1> directly.
pub fn sx2_minus_sy2<T: Float>() -> HermitianMatrix<T> {
    let mut op = HermitianMatrix::zeros(3);
    op.set_sym(0, 2, Complex::new(T::one(), T::zero()));
    op
}

/// <a|Sx|b> for spin-1 state vectors in the (|+1>, |0>, |-1>) basis,
/// written out to avoid building the operator matrix in hot loops.
#[inline]
pub fn sx_element<T: Float>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let inv_sqrt2 = T::one() / lit::<T>(2.0).sqrt();
    (a[0].conj() * b[1] + a[1].conj() * b[0] + a[1].conj() * b[2] + a[2].conj() * b[1])
        * inv_sqrt2
}

/// <a|Sx^2 - Sy^2|b> for spin-1 state vectors.
#[inline]
pub fn dq_element<T: Float>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a[0].conj() * b[2] + a[2].conj() * b[0]
}

/// <a|S1x + S2x|b> for pair state vectors in the (T+, T0, T-, S) basis.
#[inline]
pub fn pair_sx_element<T: Float>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    let inv_sqrt2 = T::one() / lit::<T>(2.0).sqrt();
    (a[PAIR_T_PLUS].conj() * b[PAIR_T_0]
        + a[PAIR_T_0].conj() * b[PAIR_T_PLUS]
        + a[PAIR_T_MINUS].conj() * b[PAIR_T_0]
        + a[PAIR_T_0].conj() * b[PAIR_T_MINUS])
        * inv_sqrt2
}

/// Builds H = D (Sz^2 - 2/3) + E (Sx^2 - Sy^2) + (g/2) gamma_e B . S in MHz.
pub fn build_triplet_hamiltonian<T: Float>(
    zfs: &ZfsParams<T>,
    field: &FieldVector<T>,
) -> Result<TripletHamiltonian<T>> {
    if !(field.bx.is_finite() && field.by.is_finite() && field.bz.is_finite()) {
        return Err(Error::domain("magnetic field components must be finite"));
    }
    let d = zfs.d_mhz;
    let e = zfs.e_mhz;
    let w = zfs.g_factor / lit::<T>(2.0) * gamma_e::<T>();
    let third = d / lit(3.0);
    let inv_sqrt2 = T::one() / lit::<T>(2.0).sqrt();

    let mut h = HermitianMatrix::zeros(3);
    h.set(0, 0, Complex::new(third + w * field.bz, T::zero()));
    h.set(1, 1, Complex::new(-(third + third), T::zero()));
    h.set(2, 2, Complex::new(third - w * field.bz, T::zero()));
    // Transverse Zeeman: <+1|H|0> = <0|H|-1> = w (Bx - i By)/sqrt(2).
    let transverse = Complex::new(w * field.bx, -w * field.by) * inv_sqrt2;
    h.set_sym(0, 1, transverse);
    h.set_sym(1, 2, transverse);
    // E couples |+1> and |-1>.
    h.set_sym(0, 2, Complex::new(e, T::zero()));
    Ok(TripletHamiltonian { matrix: h })
}

/// m_s character labels attached to triplet eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsLabel {
    P1,
    Zero,
    M1,
}

/// Diagonalized triplet with a deterministic m_s labeling.
#[derive(Debug, Clone)]
pub struct TripletLevels<T> {
    pub eigen: EigenDecomposition<T>,
    /// `index_of[0]` is the eigenstate index labeled +1, `[1]` the one
    /// labeled 0, `[2]` the one labeled -1.
    pub index_of: [usize; 3],
    /// `weights[k][m]` is |<m|psi_k>|^2 in the labeling basis (m ordered
    /// +1, 0, -1 along the quantization axis).
    pub weights: [[T; 3]; 3],
}

impl<T: Float> TripletLevels<T> {
    pub fn energy(&self, label: MsLabel) -> T {
        self.eigen.values[self.index(label)]
    }

    pub fn index(&self, label: MsLabel) -> usize {
        match label {
            MsLabel::P1 => self.index_of[0],
            MsLabel::Zero => self.index_of[1],
            MsLabel::M1 => self.index_of[2],
        }
    }

    /// Expectation of S along the quantization axis for eigenstate `k`.
    pub fn sz_expectation(&self, k: usize) -> T {
        self.weights[k][0] - self.weights[k][2]
    }
}

/// Diagonalizes the triplet and assigns m_s labels to the eigenstates.
///
/// Labels follow the dominant |m_s> character along the quantization axis:
/// the applied-field direction when a Zeeman term is present (this is the
/// axis along which the experiment tracks branches as the magnet rotates),
/// falling back to the crystal z axis at zero field. The assignment
/// maximizes the summed |<m_s|psi>|^2 over the six label permutations;
/// exact ties (degenerate or fully mixed states) are broken
/// deterministically: the larger axis projection takes the +1 label, then higher
/// energy.
pub fn triplet_levels<T: Float>(h: &TripletHamiltonian<T>) -> Result<TripletLevels<T>> {
    let eigen = h.matrix.eigh()?;

    // The Zeeman part of H sits alone in the Delta m = 1 elements and the
    // diagonal asymmetry, so the quantization direction can be read off the
    // matrix itself (in units of (g/2) gamma_e B).
    let sqrt2 = lit::<T>(2.0).sqrt();
    let h01 = h.matrix.get(0, 1);
    let h12 = h.matrix.get(1, 2);
    let half = lit::<T>(0.5);
    let vx = (h01.re + h12.re) * half * sqrt2;
    let vy = -(h01.im + h12.im) * half * sqrt2;
    let vz = (h.matrix.get(0, 0).re - h.matrix.get(2, 2).re) * half;
    let vnorm = (vx * vx + vy * vy + vz * vz).sqrt();
    let scale = h.matrix.frobenius_norm().max(T::one());

    let mut weights = [[T::zero(); 3]; 3];
    if vnorm > scale * lit(1e-10) {
        // Spin-1 basis rotated onto the axis (theta, phi): rows of the
        // Wigner D^1 matrix, components on (|+1>, |0>, |-1>).
        let ct = vz / vnorm;
        let st_sq = (vx * vx + vy * vy).sqrt();
        let st = st_sq / vnorm;
        let (cp, sp) = if st_sq > T::zero() {
            (vx / st_sq, vy / st_sq)
        } else {
            (T::one(), T::zero())
        };
        let e_m = Complex::new(cp, -sp); // e^{-i phi}
        let e_p = Complex::new(cp, sp);
        let half = lit::<T>(0.5);
        let inv_sqrt2 = T::one() / lit::<T>(2.0).sqrt();
        let rot: [[Complex<T>; 3]; 3] = [
            // |+1_n>
            [
                e_m * ((T::one() + ct) * half),
                Complex::new(st * inv_sqrt2, T::zero()),
                e_p * ((T::one() - ct) * half),
            ],
            // |0_n>
            [
                e_m * (-st * inv_sqrt2),
                Complex::new(ct, T::zero()),
                e_p * (st * inv_sqrt2),
            ],
            // |-1_n>
            [
                e_m * ((T::one() - ct) * half),
                Complex::new(-st * inv_sqrt2, T::zero()),
                e_p * ((T::one() + ct) * half),
            ],
        ];
        for k in 0..3 {
            for (m, axis_state) in rot.iter().enumerate() {
                let mut overlap = Complex::new(T::zero(), T::zero());
                for b in 0..3 {
                    overlap += axis_state[b].conj() * eigen.vectors[k][b];
                }
                weights[k][m] = overlap.norm_sqr();
            }
        }
    } else {
        for k in 0..3 {
            for m in 0..3 {
                weights[k][m] = eigen.basis_weight(k, m);
            }
        }
    }

    let w = |k: usize, m: usize| weights[k][m];
    let sz = |k: usize| w(k, 0) - w(k, 2);

    // Permutations listed as (index of +1 state, of 0 state, of -1 state).
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let tol = lit::<T>(1e-12);
    let mut best: Option<([usize; 3], T)> = None;
    for perm in PERMS {
        let score = w(perm[0], 0) + w(perm[1], 1) + w(perm[2], 2);
        let better = match &best {
            None => true,
            Some((cur, cur_score)) => {
                if score > *cur_score + tol {
                    true
                } else if score < *cur_score - tol {
                    false
                } else {
                    // Tie-break toward T_PLUS: the +1 label goes to the state
                    // with larger <Sz>, then to the higher-energy state.
                    let key = |p: &[usize; 3]| {
                        (
                            sz(p[0]),
                            eigen.values[p[0]],
                            sz(p[2]).neg(),
                            eigen.values[p[1]],
                        )
                    };
                    let (a1, a2, a3, a4) = key(&perm);
                    let (b1, b2, b3, b4) = key(cur);
                    (a1, a2, a3, a4) > (b1, b2, b3, b4)
                }
            }
        };
        if better {
            best = Some((perm, score));
        }
    }
    let (perm, _) = best.expect("at least one permutation");
    Ok(TripletLevels {
        eigen,
        index_of: perm,
        weights,
    })
}

/// Labeled triplet transition frequencies and relative strengths.
///
/// Strengths are |<i|Sx|j>|^2 for the single-quantum pairs; the double
/// quantum transition has no single-quantum matrix element, so its strength
/// uses the Delta m = 2 operator |<+1|Sx^2 - Sy^2|-1>|^2 as a relative
/// heuristic. All three are normalized so the largest equals 1.
pub fn triplet_transitions<T: Float>(h: &TripletHamiltonian<T>) -> Result<TransitionSet<T>> {
    let levels = triplet_levels(h)?;
    let (ip, i0, im) = (
        levels.index(MsLabel::P1),
        levels.index(MsLabel::Zero),
        levels.index(MsLabel::M1),
    );
    let e = &levels.eigen;

    let f_plus = (e.values[ip] - e.values[i0]).abs();
    let f_minus = (e.values[im] - e.values[i0]).abs();
    let f_dqt = (e.values[ip] - e.values[im]).abs();

    let mut s_plus = sx_element(&e.vectors[ip], &e.vectors[i0]).norm_sqr();
    let mut s_minus = sx_element(&e.vectors[im], &e.vectors[i0]).norm_sqr();
    let mut s_dqt = dq_element(&e.vectors[ip], &e.vectors[im]).norm_sqr();
    let max = s_plus.max(s_minus).max(s_dqt);
    if max > T::zero() {
        s_plus /= max;
        s_minus /= max;
        s_dqt /= max;
    }

    Ok(TransitionSet {
        entries: vec![
            Transition {
                label: TransitionLabel::TMinus,
                frequency_mhz: f_minus,
                strength: s_minus,
            },
            Transition {
                label: TransitionLabel::TPlus,
                frequency_mhz: f_plus,
                strength: s_plus,
            },
            Transition {
                label: TransitionLabel::Dqt,
                frequency_mhz: f_dqt,
                strength: s_dqt,
            },
        ],
    })
}

/// Frequency of the spin-1/2 pair transition: (g/2) gamma_e |B|.
/// Isotropic: depends on the field only through its magnitude.
pub fn doublet_frequency<T: Float>(field: &FieldVector<T>, g_factor: T) -> Result<T> {
    if !(field.bx.is_finite() && field.by.is_finite() && field.bz.is_finite()) {
        return Err(Error::domain("magnetic field components must be finite"));
    }
    if !g_factor.is_finite() || g_factor <= T::zero() {
        return Err(Error::domain("g-factor must be positive and finite"));
    }
    Ok(g_factor / lit::<T>(2.0) * gamma_e::<T>() * field.magnitude())
}

/// Parameters of the weakly coupled two-spin-1/2 remote metastable state.
///
/// `j_mhz` is an isotropic exchange; `delta_x_mhz`/`delta_z_mhz` form a
/// local-field difference acting on spin 1 only. The defaults are not
/// measured values; they are model inputs exposed through configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairModel<T> {
    pub j_mhz: T,
    pub delta_x_mhz: T,
    pub delta_z_mhz: T,
}

impl<T: Float> Default for PairModel<T> {
    /// Default local-field difference is purely transverse. A longitudinal
    /// component leaves the zero-field pair eigenstates partially sorted by
    /// spin projection, which keeps the triplet lines visible at B = 0; the
    /// transverse choice fully scrambles the projection channels there and
    /// reproduces the observed zero-field contrast collapse.
    fn default() -> Self {
        PairModel {
            j_mhz: T::zero(),
            delta_x_mhz: lit(20.0),
            delta_z_mhz: T::zero(),
        }
    }
}

impl<T: Float> PairModel<T> {
    pub fn new(j_mhz: T, delta_x_mhz: T, delta_z_mhz: T) -> Result<Self> {
        if !(j_mhz.is_finite() && delta_x_mhz.is_finite() && delta_z_mhz.is_finite()) {
            return Err(Error::invalid("pair parameters must be finite"));
        }
        Ok(PairModel {
            j_mhz,
            delta_x_mhz,
            delta_z_mhz,
        })
    }
}

/// Pair basis indices in the coupled basis (T+, T0, T-, S).
pub const PAIR_T_PLUS: usize = 0;
pub const PAIR_T_0: usize = 1;
pub const PAIR_T_MINUS: usize = 2;
pub const PAIR_S: usize = 3;

/// Builds the 4x4 pair Hamiltonian in the (T+, T0, T-, S) basis, MHz.
///
/// H = gamma_e |B| (S1z + S2z) + J S1.S2 + delta_x S1x + delta_z S1z.
/// The pair couples to the field only through its magnitude (the doublet is
/// isotropic), so the field is taken along the pair's own z axis.
pub fn build_pair_hamiltonian<T: Float>(
    model: &PairModel<T>,
    field: &FieldVector<T>,
) -> Result<HermitianMatrix<T>> {
    if !(field.bx.is_finite() && field.by.is_finite() && field.bz.is_finite()) {
        return Err(Error::domain("magnetic field components must be finite"));
    }
    let gb = gamma_e::<T>() * field.magnitude();
    let j = model.j_mhz;
    let dx = model.delta_x_mhz;
    let dz = model.delta_z_mhz;
    let quarter = lit::<T>(0.25);
    let half = lit::<T>(0.5);
    let dx_coup = dx / (lit::<T>(2.0) * lit::<T>(2.0).sqrt());

    let mut h = HermitianMatrix::zeros(4);
    let re = |x: T| Complex::new(x, T::zero());
    // Zeeman on total Sz plus exchange diagonal.
    h.set(PAIR_T_PLUS, PAIR_T_PLUS, re(gb + j * quarter + dz * half));
    h.set(PAIR_T_0, PAIR_T_0, re(j * quarter));
    h.set(PAIR_T_MINUS, PAIR_T_MINUS, re(-gb + j * quarter - dz * half));
    h.set(PAIR_S, PAIR_S, re(-j * quarter * lit::<T>(3.0)));
    // delta_z mixes T0 and S.
    h.set_sym(PAIR_T_0, PAIR_S, re(dz * half));
    // delta_x couples T+- to both T0 and S.
    h.set_sym(PAIR_T_PLUS, PAIR_T_0, re(dx_coup));
    h.set_sym(PAIR_T_PLUS, PAIR_S, re(-dx_coup));
    h.set_sym(PAIR_T_MINUS, PAIR_T_0, re(dx_coup));
    h.set_sym(PAIR_T_MINUS, PAIR_S, re(dx_coup));
    Ok(h)
}

/// Total transverse spin operator S1x + S2x of the pair in (T+, T0, T-, S).
pub fn pair_sx_total<T: Float>() -> HermitianMatrix<T> {
    let inv_sqrt2 = T::one() / lit::<T>(2.0).sqrt();
    let mut op = HermitianMatrix::zeros(4);
    op.set_sym(PAIR_T_PLUS, PAIR_T_0, Complex::new(inv_sqrt2, T::zero()));
    op.set_sym(PAIR_T_MINUS, PAIR_T_0, Complex::new(inv_sqrt2, T::zero()));
    op
}

/// One diagonalized pair level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEigenstate<T> {
    pub energy_mhz: T,
    /// |<S|psi>|^2, the weight on the two-spin singlet.
    pub singlet_fraction: T,
    /// <S1z + S2z>.
    pub ms_expectation: T,
}

/// Diagonalized pair with eigenvectors retained for rate-model weights.
#[derive(Debug, Clone)]
pub struct PairLevels<T> {
    pub eigen: EigenDecomposition<T>,
}

impl<T: Float> PairLevels<T> {
    pub fn singlet_fraction(&self, k: usize) -> T {
        self.eigen.basis_weight(k, PAIR_S)
    }

    pub fn ms_expectation(&self, k: usize) -> T {
        self.eigen.basis_weight(k, PAIR_T_PLUS) - self.eigen.basis_weight(k, PAIR_T_MINUS)
    }

    pub fn states(&self) -> Vec<PairEigenstate<T>> {
        (0..4)
            .map(|k| PairEigenstate {
                energy_mhz: self.eigen.values[k],
                singlet_fraction: self.singlet_fraction(k),
                ms_expectation: self.ms_expectation(k),
            })
            .collect()
    }
}

/// Diagonalizes a pair Hamiltonian. Levels come out sorted by energy; exact
/// degeneracies keep the (T+, T0, T-, S) basis order, which pins the
/// S-aligned vector in the fully degenerate zero-field case.
pub fn pair_levels<T: Float>(h: &HermitianMatrix<T>) -> Result<PairLevels<T>> {
    if h.dim() != 4 {
        return Err(Error::domain("pair Hamiltonian must be 4x4"));
    }
    Ok(PairLevels { eigen: h.eigh()? })
}

/// The four pair eigenstates with energies, singlet fractions and `<Sz>`.
pub fn pair_eigenstates<T: Float>(h: &HermitianMatrix<T>) -> Result<Vec<PairEigenstate<T>>> {
    Ok(pair_levels(h)?.states())
}
