//! Scatterers trapped in a standing wave, optionally perturbed by a weaker
//! one-sided beam of a different wavelength.
//!
//! The lattice mode (wavenumber `k`) is fed from both sides with intensities
//! `I_l`, `I_r`; the perturbation mode (`k_p`, intensity `I_p`) enters from the
//! left only. The modes do not interfere.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::DynamicsParams;
use crate::equilibria::{find_equilibrium_with, EquilibriumOptions};
use crate::error::{invalid, Error, Result};
use crate::forcefield::{forces_exact, ChainSystem, ForceProfile};
use crate::wavecore::{amplitude, Mode, ScattererChain};

pub const LATTICE_LABEL: &str = "lattice";
pub const PERTURBATION_LABEL: &str = "perturbation";

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Self-consistent lattice phase `k d_sw` for coupling `zeta` and asymmetry
/// `A = (I_l - I_r) / sqrt(I_l I_r)`. Equals `pi` (half a wavelength) for `zeta = 0`.
pub fn lattice_constant(zeta: f64, asymmetry: f64) -> Result<f64> {
    let z2 = zeta * zeta;
    let a2 = asymmetry * asymmetry;
    let radicand = 4.0 - z2 * a2;
    if !(radicand >= 0.0) {
        return Err(Error::NoLattice(radicand));
    }
    let arg = (-z2 * (4.0 + a2).sqrt() + radicand.sqrt()) / (2.0 * (1.0 + z2));
    Ok(PI - arg.clamp(-1.0, 1.0).acos())
}

/// Centre of mass of a symmetric pair trapped in the standing wave.
///
/// `r` and `t` are the pair's reflection and transmission at the lattice
/// wavenumber `k`; `n` selects the lattice period.
pub fn stable_com_position(i_l: f64, i_r: f64, r: Complex64, t: Complex64, k: f64, n: i32) -> Result<f64> {
    if !(i_l > 0.0) || !(i_r > 0.0) {
        return Err(Error::NoTrap("both standing-wave intensities must be positive".into()));
    }
    let im = (r * t.conj()).im;
    if im == 0.0 {
        return Err(Error::NoTrap("Im(r t*) vanishes".into()));
    }
    let arg = (i_r - i_l) * (1.0 + r.norm_sqr() - t.norm_sqr()) / (4.0 * im.abs() * (i_l * i_r).sqrt());
    if !(arg.abs() <= 1.0) {
        return Err(Error::NoTrap(format!("arccos argument {arg} outside [-1, 1]")));
    }
    let u = im.signum();
    Ok((arg.acos() - 0.5 * PI * u) / (2.0 * k) + n as f64 * PI / k)
}

/// Closed-form `(r, t)` of two equal scatterers a distance `d` apart.
pub fn pair_rt_closed_form(d: f64, k: f64, zeta: Complex64) -> Result<(Complex64, Complex64)> {
    let e2 = Complex64::from_polar(1.0, 2.0 * k * d);
    let den = zeta * zeta * (e2 - 1.0) - 2.0 * I * zeta + 1.0;
    if den.norm() <= 1e-14 {
        return Err(Error::SingularDenominator(den.norm()));
    }
    let r = -zeta * ((zeta - I) * e2 - zeta - I) / den;
    let t = Complex64::from_polar(1.0, k * d) / den;
    Ok((r, t))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeScenario {
    pub n: usize,
    pub zeta: f64,
    pub k: f64,
    pub i_l: f64,
    pub i_r: f64,
    pub k_p: f64,
    pub i_p: f64,
    pub zeta_p: f64,
    pub asymmetry: f64,
    pub d_sw: f64,
    pub x0: f64,
    /// Force-free positions of the unperturbed lattice.
    pub sites: Vec<f64>,
}

impl LatticeScenario {
    /// Builds the lattice and locates its unperturbed equilibrium sites.
    ///
    /// The perturbation coupling defaults to `zeta_p = zeta k / k_p`.
    pub fn new(n: usize, zeta: f64, k: f64, i_l: f64, i_r: f64, k_p: f64, i_p: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("a lattice scenario needs at least two scatterers"));
        }
        if !(k > 0.0) || !(k_p > 0.0) {
            return Err(invalid("wavenumbers must be positive"));
        }
        if !(i_l > 0.0) || !(i_r > 0.0) || !(i_p >= 0.0) {
            return Err(invalid("standing-wave intensities must be positive and I_p non-negative"));
        }
        if !(zeta > 0.0) || !zeta.is_finite() {
            return Err(invalid("lattice coupling must be positive"));
        }
        let asymmetry = (i_l - i_r) / (i_l * i_r).sqrt();
        let d_sw = lattice_constant(zeta, asymmetry)? / k;
        let (r, t) = pair_rt_closed_form(d_sw, k, Complex64::new(zeta, 0.0))?;
        let x0 = stable_com_position(i_l, i_r, r, t, k, 0)?;
        let grid: Vec<f64> = (0..n).map(|j| x0 - 0.5 * d_sw + j as f64 * d_sw).collect();
        let mut s = LatticeScenario {
            n,
            zeta,
            k,
            i_l,
            i_r,
            k_p,
            i_p,
            zeta_p: zeta * k / k_p,
            asymmetry,
            d_sw,
            x0,
            sites: grid.clone(),
        };
        if n > 2 {
            let opts = EquilibriumOptions {
                relax_fallback: false,
                ..EquilibriumOptions::default()
            };
            let report = find_equilibrium_with(&s.lattice_system()?, &grid, false, &opts)?;
            s.sites = report.positions;
        }
        Ok(s)
    }

    pub fn with_zeta_p(mut self, zeta_p: f64) -> Result<Self> {
        if !(zeta_p >= 0.0) {
            return Err(invalid("zeta_p must be non-negative"));
        }
        self.zeta_p = zeta_p;
        Ok(self)
    }

    pub fn with_perturbation_intensity(&self, i_p: f64) -> Self {
        LatticeScenario { i_p, ..self.clone() }
    }

    pub fn lattice_mode(&self) -> Mode {
        Mode::new(LATTICE_LABEL, self.k)
            .with_drives(amplitude(self.i_l, 0.0), amplitude(self.i_r, 0.0))
            .with_zeta_override(Complex64::new(self.zeta, 0.0))
    }

    pub fn perturbation_mode(&self) -> Mode {
        Mode::new(PERTURBATION_LABEL, self.k_p)
            .with_drives(amplitude(self.i_p, 0.0), Complex64::new(0.0, 0.0))
            .with_zeta_override(Complex64::new(self.zeta_p, 0.0))
    }

    fn system_of(&self, modes: Vec<Mode>) -> Result<ChainSystem> {
        ChainSystem::uniform(self.n, Complex64::new(self.zeta, 0.0), modes)
    }

    pub fn lattice_system(&self) -> Result<ChainSystem> {
        self.system_of(vec![self.lattice_mode()])
    }

    pub fn perturbation_system(&self) -> Result<ChainSystem> {
        self.system_of(vec![self.perturbation_mode()])
    }

    /// Both modes together.
    pub fn system(&self) -> Result<ChainSystem> {
        self.system_of(vec![self.lattice_mode(), self.perturbation_mode()])
    }

    pub fn chain(&self, positions: Vec<f64>) -> Result<ScattererChain> {
        ScattererChain::uniform(positions, Complex64::new(self.zeta, 0.0))
    }
}

/// Lattice and perturbation forces with the scatterers displaced from their sites.
pub fn perturbed_lattice_forces(scenario: &LatticeScenario, displacements: &[f64]) -> Result<ForceProfile> {
    if displacements.len() != scenario.n {
        return Err(invalid("one displacement per scatterer required"));
    }
    let x: Vec<f64> = scenario.sites.iter().zip(displacements).map(|(s, d)| s + d).collect();
    forces_exact(
        &scenario.chain(x)?,
        &[scenario.lattice_mode(), scenario.perturbation_mode()],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    CorrelatedOscillation,
    ResonantTransfer,
}

/// Ready-to-run setup for one of the perturbed-lattice dynamics studies.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPreset {
    pub kind: PerturbationKind,
    pub scenario: LatticeScenario,
    /// Same run with `I_p = 0`.
    pub baseline: LatticeScenario,
    pub dynamics: DynamicsParams,
    pub initial_positions: Vec<f64>,
    pub baseline_initial_positions: Vec<f64>,
}

/// Lattice wavenumber whose self-consistent spacing is `fraction` of the
/// perturbation wavelength `2 pi / k_p`.
pub fn wavenumber_for_spacing(zeta: f64, asymmetry: f64, fraction: f64, k_p: f64) -> Result<f64> {
    Ok(lattice_constant(zeta, asymmetry)? / (fraction * 2.0 * PI / k_p))
}

pub fn build_perturbation_scenarios(kind: PerturbationKind) -> Result<PerturbationPreset> {
    match kind {
        PerturbationKind::CorrelatedOscillation => {
            let (zeta, k_p) = (0.1, 1.0);
            let k = wavenumber_for_spacing(zeta, 0.0, 0.23, k_p)?;
            let scenario = LatticeScenario::new(4, zeta, k, 1.0, 1.0, k_p, 1.0)?.with_zeta_p(0.1)?;
            let baseline = scenario.with_perturbation_intensity(0.0);
            let start: Vec<f64> = scenario.sites.iter().map(|x| x + 0.01).collect();
            let mut dynamics = DynamicsParams::newtonian(1.0, 0.01, 0.05, 2000.0);
            dynamics.capture_every = 10;
            Ok(PerturbationPreset {
                kind,
                baseline_initial_positions: start.clone(),
                initial_positions: start,
                scenario,
                baseline,
                dynamics,
            })
        }
        PerturbationKind::ResonantTransfer => {
            let scenario = LatticeScenario::new(3, 0.01, 0.99, 20.0, 20.0, 1.0, 1.0)?.with_zeta_p(0.1)?;
            let baseline = scenario.with_perturbation_intensity(0.0);
            let kick = |mut x: Vec<f64>| {
                x[2] += 0.05;
                x
            };
            let opts = EquilibriumOptions::default();
            let eq = find_equilibrium_with(&scenario.system()?, &scenario.sites, false, &opts)?;
            let mut dynamics = DynamicsParams::newtonian(1.0, 0.01, 0.05, 2000.0);
            dynamics.capture_every = 10;
            Ok(PerturbationPreset {
                kind,
                initial_positions: kick(eq.positions),
                baseline_initial_positions: kick(baseline.sites.clone()),
                scenario,
                baseline,
                dynamics,
            })
        }
    }
}
