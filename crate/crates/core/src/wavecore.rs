//! Transfer matrices and steady-state fields of a chain of thin scatterers.
//!
//! Every field component (a [`Mode`]) propagates through the chain on its own;
//! scatterers never convert light from one mode into another. Between
//! neighbours the field of a mode is a pair of counter-propagating plane waves
//!
//! ```text
//!   E(x) = C_j e^{ik(x - x_j)} + D_j e^{-ik(x - x_j)}
//!        = A_{j+1} e^{ik(x - x_{j+1})} + B_{j+1} e^{-ik(x - x_{j+1})}
//! ```
//!
//! and each scatterer maps `(A_j, B_j)` to `(C_j, D_j)` with a unimodular
//! beam-splitter matrix. Units: `eps0 = c = 1`, lengths in `1/k_ref`, and a
//! mode of intensity `I` has amplitude modulus `sqrt(2 I)`.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Complex field amplitude in internal units.
pub type ComplexAmp = Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Below this modulus of `m22` the boundary problem is treated as singular.
pub const SINGULAR_M22: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix {
        m11: Complex64 { re: 1.0, im: 0.0 },
        m12: Complex64 { re: 0.0, im: 0.0 },
        m21: Complex64 { re: 0.0, im: 0.0 },
        m22: Complex64 { re: 1.0, im: 0.0 },
    };

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Applies the matrix to an amplitude pair.
    #[inline]
    pub fn apply(&self, (x, y): (Complex64, Complex64)) -> (Complex64, Complex64) {
        (self.m11 * x + self.m12 * y, self.m21 * x + self.m22 * y)
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }
}

/// Matrix of a single thin scatterer with coupling `zeta`:
/// `[[1 + i zeta, i zeta], [-i zeta, 1 - i zeta]]`.
pub fn beam_splitter_matrix(zeta: Complex64) -> TransferMatrix {
    let iz = I * zeta;
    TransferMatrix {
        m11: 1.0 + iz,
        m12: iz,
        m21: -iz,
        m22: 1.0 - iz,
    }
}

/// Free propagation over a distance `d >= 0`: `diag(e^{ikd}, e^{-ikd})`.
pub fn propagation_matrix(k: f64, d: f64) -> Result<TransferMatrix> {
    if d < 0.0 || d.is_nan() {
        return Err(Error::NegativeDistance(d));
    }
    let phase = Complex64::from_polar(1.0, k * d);
    Ok(TransferMatrix {
        m11: phase,
        m12: Complex64::new(0.0, 0.0),
        m21: Complex64::new(0.0, 0.0),
        m22: phase.conj(),
    })
}

/// Amplitude of a plane wave of the given intensity and phase.
pub fn amplitude(intensity: f64, phase: f64) -> Complex64 {
    Complex64::from_polar((2.0 * intensity).sqrt(), phase)
}

/// Intensity carried by an amplitude, `|amp|^2 / 2`.
pub fn intensity(amp: Complex64) -> f64 {
    0.5 * amp.norm_sqr()
}

/// One non-interfering field component.
///
/// Drives are the complex amplitudes of the incoming waves referenced to the
/// origin: the wave entering from the left is `drive_left * e^{ikx}` and the
/// one entering from the right is `drive_right * e^{-ikx}`. For a mode driven
/// from one side only the reference point has no effect on forces; for a
/// standing wave it pins the lattice in space.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub label: String,
    /// Wavenumber in units of `k_ref`.
    pub k: f64,
    /// Multiplier on each scatterer's base coupling. Defaults to `k / k_ref`.
    pub zeta_scale: f64,
    /// Uniform coupling used instead of `zeta_base * zeta_scale` when set.
    pub zeta_override: Option<Complex64>,
    pub drive_left: ComplexAmp,
    pub drive_right: ComplexAmp,
}

impl Mode {
    pub fn new(label: impl Into<String>, k: f64) -> Self {
        Mode {
            label: label.into(),
            k,
            zeta_scale: k,
            zeta_override: None,
            drive_left: Complex64::new(0.0, 0.0),
            drive_right: Complex64::new(0.0, 0.0),
        }
    }

    /// Mode injected from the left with intensity `intensity`.
    pub fn from_left(label: impl Into<String>, k: f64, intensity: f64) -> Self {
        Mode::new(label, k).with_left(intensity, 0.0)
    }

    /// Mode injected from the right with intensity `intensity`.
    pub fn from_right(label: impl Into<String>, k: f64, intensity: f64) -> Self {
        Mode::new(label, k).with_right(intensity, 0.0)
    }

    pub fn with_left(mut self, intensity: f64, phase: f64) -> Self {
        self.drive_left = amplitude(intensity, phase);
        self
    }

    pub fn with_right(mut self, intensity: f64, phase: f64) -> Self {
        self.drive_right = amplitude(intensity, phase);
        self
    }

    pub fn with_drives(mut self, left: ComplexAmp, right: ComplexAmp) -> Self {
        self.drive_left = left;
        self.drive_right = right;
        self
    }

    pub fn with_zeta_scale(mut self, scale: f64) -> Self {
        self.zeta_scale = scale;
        self
    }

    pub fn with_zeta_override(mut self, zeta: Complex64) -> Self {
        self.zeta_override = Some(zeta);
        self
    }

    pub fn intensity_left(&self) -> f64 {
        intensity(self.drive_left)
    }

    pub fn intensity_right(&self) -> f64 {
        intensity(self.drive_right)
    }

    /// Coupling seen by this mode at a scatterer of base coupling `base`.
    #[inline]
    pub fn coupling(&self, base: Complex64) -> Complex64 {
        self.zeta_override.unwrap_or(base * self.zeta_scale)
    }

    /// A mode fed from at most one side carries no standing-wave pattern.
    pub fn is_one_sided(&self) -> bool {
        self.drive_left.norm_sqr() == 0.0 || self.drive_right.norm_sqr() == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(invalid(format!("mode '{}': k must be positive, got {}", self.label, self.k)));
        }
        if !(self.zeta_scale > 0.0 && self.zeta_scale.is_finite()) {
            return Err(invalid(format!(
                "mode '{}': zeta_scale must be positive, got {}",
                self.label, self.zeta_scale
            )));
        }
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(self.drive_left) || !finite(self.drive_right) {
            return Err(invalid(format!("mode '{}': drives must be finite", self.label)));
        }
        if let Some(z) = self.zeta_override {
            if !finite(z) {
                return Err(invalid(format!("mode '{}': zeta override must be finite", self.label)));
            }
        }
        Ok(())
    }
}

/// Ordered scatterer positions with their base couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScattererChain {
    positions: Vec<f64>,
    zeta: Vec<Complex64>,
}

impl ScattererChain {
    /// Builds a chain; rejects unsorted positions and gain (`Im zeta < 0`).
    pub fn new(positions: Vec<f64>, zeta: Vec<Complex64>) -> Result<Self> {
        Self::build(positions, zeta, false)
    }

    /// Same as [`ScattererChain::new`] but accepts `Im zeta < 0`.
    pub fn with_gain(positions: Vec<f64>, zeta: Vec<Complex64>) -> Result<Self> {
        Self::build(positions, zeta, true)
    }

    pub fn uniform(positions: Vec<f64>, zeta: Complex64) -> Result<Self> {
        let n = positions.len();
        Self::new(positions, vec![zeta; n])
    }

    pub fn equidistant(n: usize, start: f64, spacing: f64, zeta: Complex64) -> Result<Self> {
        if n > 1 && !(spacing > 0.0) {
            return Err(invalid(format!("spacing must be positive, got {spacing}")));
        }
        Self::uniform((0..n).map(|j| start + j as f64 * spacing).collect(), zeta)
    }

    /// Chain without scatterers; fields are the bare incoming waves.
    pub fn empty() -> Self {
        ScattererChain {
            positions: Vec::new(),
            zeta: Vec::new(),
        }
    }

    fn build(positions: Vec<f64>, zeta: Vec<Complex64>, allow_gain: bool) -> Result<Self> {
        if positions.len() != zeta.len() {
            return Err(invalid(format!(
                "{} positions but {} couplings",
                positions.len(),
                zeta.len()
            )));
        }
        validate_positions(&positions)?;
        for (j, z) in zeta.iter().enumerate() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(invalid(format!("coupling of scatterer {} is not finite", j + 1)));
            }
            if z.im < 0.0 && !allow_gain {
                return Err(invalid(format!(
                    "scatterer {} has Im(zeta) = {} < 0 (gain); enable allow_gain to accept it",
                    j + 1,
                    z.im
                )));
            }
        }
        Ok(ScattererChain { positions, zeta })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn zeta(&self) -> &[Complex64] {
        &self.zeta
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Copy of the chain with the scatterers moved to `positions`.
    pub fn with_positions(&self, positions: Vec<f64>) -> Result<Self> {
        if positions.len() != self.len() {
            return Err(invalid("position count does not match the chain"));
        }
        validate_positions(&positions)?;
        Ok(ScattererChain {
            positions,
            zeta: self.zeta.clone(),
        })
    }
}

fn validate_positions(positions: &[f64]) -> Result<()> {
    if let Some(j) = positions.iter().position(|x| !x.is_finite()) {
        return Err(invalid(format!("position of scatterer {} is not finite", j + 1)));
    }
    if let Some(j) = positions.windows(2).position(|w| w[1] <= w[0]) {
        return Err(invalid(format!(
            "positions must be strictly increasing (scatterers {} and {})",
            j + 1,
            j + 2
        )));
    }
    Ok(())
}

/// Amplitudes left (`a`, `b`) and right (`c`, `d`) of one scatterer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Quad {
    /// Radiation force of this mode on the scatterer, `(|A|^2+|B|^2-|C|^2-|D|^2)/2`.
    #[inline]
    pub fn force(&self) -> f64 {
        0.5 * (self.a.norm_sqr() + self.b.norm_sqr() - self.c.norm_sqr() - self.d.norm_sqr())
    }
}

/// Reflection and transmission of the whole chain.
///
/// `B_1 = r A_1 + t D_N` and `C_N = t A_1 + r_right D_N`, with amplitudes
/// referenced to the outermost scatterers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scattering {
    pub r: Complex64,
    pub t: Complex64,
    pub r_right: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub label: String,
    pub k: f64,
    pub drive_left: ComplexAmp,
    pub drive_right: ComplexAmp,
    pub quads: Vec<Quad>,
    /// `None` for an empty chain.
    pub scattering: Option<Scattering>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    pub positions: Vec<f64>,
    pub modes: Vec<ModeField>,
}

impl FieldSolution {
    pub fn mode(&self, label: &str) -> Option<&ModeField> {
        self.modes.iter().find(|m| m.label == label)
    }
}

/// Ordered product `M_BS(zeta_N) M_p(d_{N-1}) ... M_p(d_1) M_BS(zeta_1)`.
pub fn total_transfer_matrix(chain: &ScattererChain, mode: &Mode) -> Result<TransferMatrix> {
    mode.validate()?;
    chain_matrix(chain.positions(), chain.zeta(), mode)
}

pub(crate) fn chain_matrix(positions: &[f64], zeta: &[Complex64], mode: &Mode) -> Result<TransferMatrix> {
    let mut m = TransferMatrix::IDENTITY;
    for (j, (&x, &z)) in positions.iter().zip(zeta).enumerate() {
        if j > 0 {
            m = propagation_matrix(mode.k, x - positions[j - 1])? * m;
        }
        m = beam_splitter_matrix(mode.coupling(z)) * m;
    }
    Ok(m)
}

fn scattering_from(m: &TransferMatrix) -> Result<Scattering> {
    let m22_abs = m.m22.norm();
    if !(m22_abs >= SINGULAR_M22) {
        return Err(Error::SingularBoundary(m22_abs));
    }
    Ok(Scattering {
        r: -m.m21 / m.m22,
        t: m.det() / m.m22,
        r_right: m.m12 / m.m22,
    })
}

/// Reflection and transmission coefficients of a non-empty chain for one mode.
pub fn reflection_transmission(chain: &ScattererChain, mode: &Mode) -> Result<Scattering> {
    if chain.is_empty() {
        return Err(invalid("reflection of an empty chain is undefined"));
    }
    scattering_from(&total_transfer_matrix(chain, mode)?)
}

/// Solves one mode: boundary inversion for `B_1`, then a left-to-right sweep.
pub(crate) fn solve_mode(positions: &[f64], zeta: &[Complex64], mode: &Mode) -> Result<ModeField> {
    let mut quads = Vec::with_capacity(positions.len());
    let scattering = if positions.is_empty() {
        None
    } else {
        let m = chain_matrix(positions, zeta, mode)?;
        let s = scattering_from(&m)?;
        sweep(positions, zeta, mode, &m, |q| quads.push(q))?;
        Some(s)
    };
    Ok(ModeField {
        label: mode.label.clone(),
        k: mode.k,
        drive_left: mode.drive_left,
        drive_right: mode.drive_right,
        quads,
        scattering,
    })
}

/// Runs the forward sweep for a non-empty chain, handing each quad to `visit`.
pub(crate) fn sweep(
    positions: &[f64],
    zeta: &[Complex64],
    mode: &Mode,
    total: &TransferMatrix,
    mut visit: impl FnMut(Quad),
) -> Result<()> {
    let n = positions.len();
    let m22_abs = total.m22.norm();
    if !(m22_abs >= SINGULAR_M22) {
        return Err(Error::SingularBoundary(m22_abs));
    }
    let a1 = mode.drive_left * Complex64::from_polar(1.0, mode.k * positions[0]);
    let dn = mode.drive_right * Complex64::from_polar(1.0, -mode.k * positions[n - 1]);
    let b1 = (dn - total.m21 * a1) / total.m22;

    let mut left = (a1, b1);
    let mut right = (a1, b1);
    for (j, (&x, &z)) in positions.iter().zip(zeta).enumerate() {
        if j > 0 {
            left = propagation_matrix(mode.k, x - positions[j - 1])?.apply(right);
        }
        right = beam_splitter_matrix(mode.coupling(z)).apply(left);
        visit(Quad {
            a: left.0,
            b: left.1,
            c: right.0,
            d: right.1,
        });
    }
    Ok(())
}

/// Steady-state amplitudes of every mode, each solved independently.
pub fn solve_fields(chain: &ScattererChain, modes: &[Mode]) -> Result<FieldSolution> {
    let modes = modes
        .iter()
        .map(|mode| {
            mode.validate()?;
            solve_mode(chain.positions(), chain.zeta(), mode)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldSolution {
        positions: chain.positions().to_vec(),
        modes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySample {
    pub x: f64,
    pub total: f64,
    pub per_mode: Vec<f64>,
}

impl ModeField {
    /// Complex field of this mode at `x`, using the plane-wave pair of the interval containing `x`.
    pub fn field_at(&self, positions: &[f64], x: f64) -> Complex64 {
        let k = self.k;
        if positions.is_empty() {
            return self.drive_left * Complex64::from_polar(1.0, k * x)
                + self.drive_right * Complex64::from_polar(1.0, -k * x);
        }
        // index of the last scatterer at or left of x
        let idx = positions.partition_point(|&p| p <= x);
        let (fwd, bwd, anchor) = if idx == 0 {
            (self.quads[0].a, self.quads[0].b, positions[0])
        } else {
            let q = &self.quads[idx - 1];
            (q.c, q.d, positions[idx - 1])
        };
        let phase = Complex64::from_polar(1.0, k * (x - anchor));
        fwd * phase + bwd * phase.conj()
    }
}

/// Intensity of each mode and their sum at the sample points.
///
/// Modes do not interfere, so the total is a plain sum of `|E_m|^2 / 2`.
pub fn intensity_profile(solution: &FieldSolution, xs: &[f64]) -> Vec<IntensitySample> {
    xs.iter()
        .map(|&x| {
            let per_mode: Vec<f64> = solution
                .modes
                .iter()
                .map(|m| intensity(m.field_at(&solution.positions, x)))
                .collect();
            IntensitySample {
                x,
                total: per_mode.iter().sum(),
                per_mode,
            }
        })
        .collect()
}
