//! Radiation forces on the scatterers.
//!
//! The exact force on scatterer `j` from one mode is the momentum-flux
//! imbalance `(|A_j|^2 + |B_j|^2 - |C_j|^2 - |D_j|^2) / 2`; modes add. Positive
//! forces point towards `+x`.
//!
//! The small-coupling closed forms for a pair of scatterers in two
//! counter-propagating, orthogonally polarised beams are provided for
//! comparison and for inverse design.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::wavecore::{chain_matrix, solve_fields, sweep, Mode, ScattererChain};

/// Forces of one mode on every scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeForces {
    pub label: String,
    pub forces: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceProfile {
    pub total: Vec<f64>,
    pub per_mode: Vec<ModeForces>,
}

impl ForceProfile {
    pub fn mode(&self, label: &str) -> Option<&[f64]> {
        self.per_mode
            .iter()
            .find(|m| m.label == label)
            .map(|m| m.forces.as_slice())
    }

    /// Sup-norm of the total force.
    pub fn max_abs(&self) -> f64 {
        self.total.iter().fold(0.0, |m, f| m.max(f.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.total.iter().sum()
    }
}

/// Exact per-mode and total forces on every scatterer.
pub fn forces_exact(chain: &ScattererChain, modes: &[Mode]) -> Result<ForceProfile> {
    if chain.is_empty() {
        return Err(invalid("forces need at least one scatterer"));
    }
    let solution = solve_fields(chain, modes)?;
    let n = chain.len();
    let mut total = vec![0.0; n];
    let per_mode = solution
        .modes
        .iter()
        .map(|m| {
            let forces: Vec<f64> = m.quads.iter().map(|q| q.force()).collect();
            for (t, f) in total.iter_mut().zip(&forces) {
                *t += f;
            }
            ModeForces {
                label: m.label.clone(),
                forces,
            }
        })
        .collect();
    Ok(ForceProfile { total, per_mode })
}

/// Scatterer couplings and illumination, with positions left free.
///
/// This is the object the integrators and root finders work with: it
/// evaluates total forces for arbitrary position vectors without building
/// intermediate field solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSystem {
    zeta: Vec<Complex64>,
    modes: Vec<Mode>,
}

impl ChainSystem {
    pub fn new(zeta: Vec<Complex64>, modes: Vec<Mode>) -> Result<Self> {
        if zeta.is_empty() {
            return Err(invalid("a chain system needs at least one scatterer"));
        }
        for m in &modes {
            m.validate()?;
        }
        Ok(ChainSystem { zeta, modes })
    }

    pub fn uniform(n: usize, zeta: Complex64, modes: Vec<Mode>) -> Result<Self> {
        Self::new(vec![zeta; n], modes)
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn zeta(&self) -> &[Complex64] {
        &self.zeta
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn with_modes(&self, modes: Vec<Mode>) -> Result<Self> {
        Self::new(self.zeta.clone(), modes)
    }

    /// Chain at the given positions (validated for ordering).
    pub fn chain(&self, positions: &[f64]) -> Result<ScattererChain> {
        ScattererChain::with_gain(positions.to_vec(), self.zeta.clone())
    }

    /// True when no mode is fed from both sides, so forces depend on gaps only.
    pub fn is_translation_invariant(&self) -> bool {
        self.modes.iter().all(Mode::is_one_sided)
    }

    /// Total force on each scatterer.
    pub fn forces(&self, positions: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.forces_into(positions, &mut out)?;
        Ok(out)
    }

    /// Writes the total forces into `out`. Positions must be non-decreasing.
    pub fn forces_into(&self, positions: &[f64], out: &mut [f64]) -> Result<()> {
        if positions.len() != self.len() || out.len() != self.len() {
            return Err(invalid(format!(
                "expected {} positions, got {}",
                self.len(),
                positions.len()
            )));
        }
        out.iter_mut().for_each(|f| *f = 0.0);
        for mode in &self.modes {
            let m = chain_matrix(positions, &self.zeta, mode)?;
            let mut j = 0;
            sweep(positions, &self.zeta, mode, &m, |q| {
                out[j] += q.force();
                j += 1;
            })?;
        }
        Ok(())
    }

    /// Full per-mode force breakdown at the given positions.
    pub fn profile(&self, positions: &[f64]) -> Result<ForceProfile> {
        forces_exact(&self.chain(positions)?, &self.modes)
    }
}

/// Parameters of the two-beam pair approximation.
///
/// Mode `y` enters from the left with intensity `i_y`; mode `z` enters from
/// the right with intensity `intensity_ratio * i_y`. The coupling of the `z`
/// mode is `zeta * k_z / k_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairForceParams {
    pub intensity_ratio: f64,
    pub k_y: f64,
    pub k_z: f64,
    pub zeta: f64,
    pub i_y: f64,
}

impl PairForceParams {
    pub fn new(intensity_ratio: f64, k_y: f64, k_z: f64, zeta: f64, i_y: f64) -> Self {
        PairForceParams {
            intensity_ratio,
            k_y,
            k_z,
            zeta,
            i_y,
        }
    }

    pub fn i_z(&self) -> f64 {
        self.intensity_ratio * self.i_y
    }

    pub fn zeta_z(&self) -> f64 {
        self.zeta * self.k_z / self.k_y
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity_ratio >= 0.0) || !(self.i_y >= 0.0) {
            return Err(invalid("intensity ratio and i_y must be non-negative"));
        }
        if !(self.k_y > 0.0) || !(self.k_z > 0.0) {
            return Err(invalid("wavenumbers must be positive"));
        }
        if !self.zeta.is_finite() {
            return Err(invalid("zeta must be finite"));
        }
        Ok(())
    }

    /// The two modes these parameters describe, for use with the exact engine.
    pub fn modes(&self) -> Vec<Mode> {
        vec![
            Mode::from_left("y", self.k_y, self.i_y).with_zeta_scale(self.k_y),
            Mode::from_right("z", self.k_z, self.i_z()).with_zeta_scale(self.k_z),
        ]
    }

    /// Exact-engine system for the pair, with base coupling `zeta / k_y`.
    pub fn system(&self) -> Result<ChainSystem> {
        ChainSystem::uniform(2, Complex64::new(self.zeta / self.k_y, 0.0), self.modes())
    }
}

/// Closed-form small-coupling forces `(F1, F2)` at separation `d`.
pub fn pair_forces_approx(d: f64, p: &PairForceParams) -> (f64, f64) {
    if p.zeta.abs() > 0.2 {
        log::warn!("pair approximation used at zeta = {} (> 0.2)", p.zeta);
    }
    let z2 = p.zeta * p.zeta;
    let zz2 = p.zeta_z() * p.zeta_z();
    let cy2 = (d * p.k_y).cos().powi(2);
    let cz2 = (d * p.k_z).cos().powi(2);
    let (iy, iz) = (p.i_y, p.i_z());
    let f1 = 2.0 * (iy * z2 * (4.0 * cy2 - 1.0) / (1.0 + 4.0 * z2 * cy2) - iz * zz2 / (1.0 + 4.0 * zz2 * cz2));
    let f2 = 2.0 * (iy * z2 / (1.0 + 4.0 * z2 * cy2) - iz * zz2 * (4.0 * cz2 - 1.0) / (1.0 + 4.0 * zz2 * cz2));
    (f1, f2)
}

/// `F1 - F2` for equal wavenumbers.
pub fn pair_force_difference(d: f64, p: &PairForceParams) -> Result<f64> {
    if p.k_y != p.k_z {
        return Err(Error::WavenumberMismatch {
            k_y: p.k_y,
            k_z: p.k_z,
        });
    }
    let z2 = p.zeta * p.zeta;
    let k = p.k_y;
    Ok(4.0 * z2 * (2.0 * d * k).cos() * (p.i_y + p.i_z()) / (1.0 + 4.0 * z2 * (d * k).cos().powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Approximate separations `(d1, d2)` at which `F1` and `F2` vanish.
///
/// `n` selects the period (`+ n pi / k`) on both distances.
pub fn pair_zero_force_distances(p: &PairForceParams, branch: Branch, n: i32) -> Result<(f64, f64)> {
    p.validate()?;
    let (ky, kz, iy, iz) = (p.k_y, p.k_z, p.i_y, p.i_z());
    let z2 = p.zeta * p.zeta;
    let num = ky * ky * iy + kz * kz * iz;
    let den1 = iy + (kz / ky).powi(2) * z2 * (iy - iz);
    let den2 = iz - z2 * (iy - iz);
    let arg = |k: f64, den: f64, which: &str| -> Result<f64> {
        let ratio = num / den;
        if !(ratio >= 0.0) || !ratio.is_finite() {
            return Err(Error::NoSolution(format!(
                "zero of F{which}: radicand {ratio:e} is negative or undefined"
            )));
        }
        let a = branch.sign() * ratio.sqrt() / (2.0 * k);
        if a.abs() > 1.0 {
            return Err(Error::NoSolution(format!(
                "zero of F{which}: arccos argument {a} outside [-1, 1]"
            )));
        }
        Ok(a)
    };
    let a1 = arg(ky, den1, "1")?;
    let a2 = arg(kz, den2, "2")?;
    let n = n as f64;
    Ok((
        (a1.acos() + n * std::f64::consts::PI) / ky,
        (a2.acos() + n * std::f64::consts::PI) / kz,
    ))
}
