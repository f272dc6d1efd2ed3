//! Scenario file schema.
//!
//! A scenario is one JSON document. Unknown keys are rejected everywhere and
//! every block is validated before any computation starts. Lengths are given
//! in the unit chosen by `units.length`; wavenumbers are always multiples of
//! `k_ref`, and times, masses and frictions are in internal units
//! (`k_ref = c = 1`).

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsParams, IntensityCapture, Regime, StopRule};
use crate::error::{invalid, Result};
use crate::forcefield::{ChainSystem, PairForceParams};
use crate::lattice::{wavenumber_for_spacing, LatticeScenario};
use crate::wavecore::{amplitude, Mode, ScattererChain};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthUnit {
    /// Multiples of `lambda_ref = 2 pi / k_ref`.
    #[default]
    Wavelength,
    /// Multiples of `1 / k_ref`.
    InverseWavenumber,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    #[serde(default)]
    pub length: LengthUnit,
}

impl Units {
    /// Internal length of one user length unit.
    pub fn length_scale(&self) -> f64 {
        match self.length {
            LengthUnit::Wavelength => TAU,
            LengthUnit::InverseWavenumber => 1.0,
        }
    }
}

/// Inclusive, evenly spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Range {
    pub fn validate(&self, what: &str) -> Result<()> {
        if self.steps == 0 {
            return Err(invalid(format!("{what}: steps must be at least 1")));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(invalid(format!("{what}: bounds must be finite")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + i as f64 * h).collect()
    }

    fn scaled(&self, s: f64) -> Vec<f64> {
        self.values().into_iter().map(|v| v * s).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Equidistant,
    #[default]
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainBlock {
    #[serde(default)]
    pub generator: Generator,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub start: f64,
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default)]
    pub positions: Option<Vec<f64>>,
    /// Base coupling `[re, im]` at `k_ref`.
    pub zeta: [f64; 2],
    #[serde(default)]
    pub zeta_per_scatterer: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub allow_gain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeBlock {
    pub label: String,
    pub k: f64,
    #[serde(default)]
    pub intensity_left: f64,
    #[serde(default)]
    pub intensity_right: f64,
    #[serde(default)]
    pub phase_left: f64,
    #[serde(default)]
    pub phase_right: f64,
    /// Defaults to `k`: couplings grow linearly with the wavenumber.
    #[serde(default)]
    pub zeta_scale: Option<f64>,
    #[serde(default)]
    pub zeta_override: Option<[f64; 2]>,
}

fn default_mass() -> f64 {
    1.0
}

fn default_force_tol() -> f64 {
    1e-10
}

fn default_stop() -> StopRule {
    StopRule::Auto
}

fn default_regime() -> Regime {
    Regime::Overdamped
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsBlock {
    #[serde(default = "default_regime")]
    pub regime: Regime,
    #[serde(default = "default_mass")]
    pub mass: f64,
    pub friction: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Defaults to `1e-3 lambda_ref`.
    #[serde(default)]
    pub min_separation: Option<f64>,
    #[serde(default = "default_force_tol")]
    pub force_tol: f64,
    #[serde(default = "default_stop")]
    pub stop: StopRule,
    #[serde(default)]
    pub initial_velocities: Option<Vec<f64>>,
    #[serde(default)]
    pub intensity_samples: Option<Range>,
    #[serde(default)]
    pub intensity_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParameter {
    /// JSON pointer into the scenario, e.g. `/modes/1/intensity_right`.
    pub path: String,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepParameter {
    pub fn range(&self) -> Range {
        Range {
            start: self.start,
            stop: self.stop,
            steps: self.steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameters: Vec<SweepParameter>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        self != OutputFormat::Json
    }

    pub fn json(self) -> bool {
        self != OutputFormat::Csv
    }
}

fn default_capture() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub format: OutputFormat,
    /// File name stem; defaults to the command name.
    #[serde(default)]
    pub prefix: Option<String>,
    #[serde(default = "default_capture")]
    pub capture_every: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            format: OutputFormat::Csv,
            prefix: None,
            capture_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeBlock {
    /// Pair separations at which forces are evaluated.
    pub d: Range,
}

fn default_k_y() -> f64 {
    1.0
}

fn default_k_max() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    pub d: Range,
    #[serde(default = "default_k_y")]
    pub k_y: f64,
    pub zeta: f64,
    #[serde(default = "default_k_max")]
    pub k_max: f64,
    /// Fixed `k_z / k_y`: only the intensity ratios are solved for.
    #[serde(default)]
    pub kz_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeStart {
    /// Unperturbed lattice sites.
    #[default]
    Sites,
    /// Equilibrium including the perturbation beam.
    Equilibrium,
}

fn default_fd_step() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeBlock {
    pub n: usize,
    pub zeta: f64,
    #[serde(default)]
    pub k: Option<f64>,
    /// Lattice spacing as a fraction of the perturbation wavelength; fixes `k`.
    #[serde(default)]
    pub spacing_fraction: Option<f64>,
    pub i_l: f64,
    pub i_r: f64,
    pub k_p: f64,
    pub i_p: f64,
    #[serde(default)]
    pub zeta_p: Option<f64>,
    #[serde(default)]
    pub start: LatticeStart,
    /// Added to the start positions, one entry per scatterer.
    #[serde(default)]
    pub displacement: Option<Vec<f64>>,
    /// Also run the `I_p = 0` lattice from its own sites plus `displacement`.
    #[serde(default)]
    pub compare_baseline: bool,
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Finite-difference step (internal units) for the linearization.
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub i_p_sweep: Option<Range>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub d1: Range,
    pub d2: Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    #[serde(default)]
    pub units: Units,
    #[serde(default)]
    pub chain: Option<ChainBlock>,
    #[serde(default)]
    pub modes: Vec<ModeBlock>,
    #[serde(default)]
    pub dynamics: Option<DynamicsBlock>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub output: OutputBlock,
    /// Sample points for field profiles.
    #[serde(default)]
    pub samples: Option<Range>,
    #[serde(default)]
    pub probe: Option<ProbeBlock>,
    #[serde(default)]
    pub design: Option<DesignBlock>,
    #[serde(default)]
    pub lattice: Option<LatticeBlock>,
    #[serde(default)]
    pub grid: Option<GridBlock>,
}

fn finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be finite")))
    }
}

fn cplx(z: [f64; 2]) -> Complex64 {
    Complex64::new(z[0], z[1])
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: ScenarioFile = serde_json::from_str(text).map_err(|e| invalid(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let s: ScenarioFile = serde_json::from_value(value).map_err(|e| invalid(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes") + "\n"
    }

    pub fn length_scale(&self) -> f64 {
        self.units.length_scale()
    }

    /// Checks every present block; nothing is computed.
    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(invalid(format!("unsupported scenario version {}", self.version)));
        }
        let n = match &self.chain {
            Some(c) => Some(self.validate_chain(c)?),
            None => None,
        };
        let mut labels = std::collections::BTreeSet::new();
        for m in &self.modes {
            if !labels.insert(m.label.as_str()) {
                return Err(invalid(format!("duplicate mode label {:?}", m.label)));
            }
            self.mode(m).validate()?;
            for (v, what) in [(m.phase_left, "phase_left"), (m.phase_right, "phase_right")] {
                finite(v, what)?;
            }
        }
        if let Some(d) = &self.dynamics {
            self.validate_dynamics(d, n)?;
        }
        if let Some(s) = &self.sweep {
            for p in &s.parameters {
                if !p.path.starts_with('/') {
                    return Err(invalid(format!("sweep path {:?} must be a JSON pointer", p.path)));
                }
                p.range().validate(&format!("sweep {}", p.path))?;
            }
        }
        if self.output.capture_every == 0 {
            return Err(invalid("output.capture_every must be at least 1"));
        }
        if let Some(p) = &self.output.prefix {
            if p.is_empty() || p.contains(['/', '\\']) {
                return Err(invalid("output.prefix must be a plain file name stem"));
            }
        }
        if let Some(r) = &self.samples {
            r.validate("samples")?;
        }
        if let Some(p) = &self.probe {
            p.d.validate("probe.d")?;
        }
        if let Some(d) = &self.design {
            d.d.validate("design.d")?;
            if !(d.k_y > 0.0) || !(d.k_max > 0.0) || !(d.zeta > 0.0) {
                return Err(invalid("design: k_y, k_max and zeta must be positive"));
            }
            if let Some(r) = d.kz_ratio {
                if !(r > 0.0) {
                    return Err(invalid("design.kz_ratio must be positive"));
                }
            }
        }
        if let Some(l) = &self.lattice {
            self.validate_lattice(l)?;
        }
        if let Some(g) = &self.grid {
            g.d1.validate("grid.d1")?;
            g.d2.validate("grid.d2")?;
        }
        Ok(())
    }

    fn validate_chain(&self, c: &ChainBlock) -> Result<usize> {
        finite(c.zeta[0], "chain.zeta")?;
        finite(c.zeta[1], "chain.zeta")?;
        finite(c.start, "chain.start")?;
        let n = match c.generator {
            Generator::Equidistant => {
                if c.positions.is_some() {
                    return Err(invalid("chain: equidistant generator takes n and spacing, not positions"));
                }
                let n = c.n.ok_or_else(|| invalid("chain: equidistant generator needs n"))?;
                let s = c.spacing.ok_or_else(|| invalid("chain: equidistant generator needs spacing"))?;
                if !(s > 0.0) || !s.is_finite() {
                    return Err(invalid("chain.spacing must be positive"));
                }
                n
            }
            Generator::Explicit => {
                if c.spacing.is_some() {
                    return Err(invalid("chain: explicit generator takes positions, not spacing"));
                }
                let p = c.positions.as_ref().ok_or_else(|| invalid("chain: explicit generator needs positions"))?;
                if let Some(n) = c.n {
                    if n != p.len() {
                        return Err(invalid(format!("chain.n = {n} but {} positions given", p.len())));
                    }
                }
                p.len()
            }
        };
        if let Some(z) = &c.zeta_per_scatterer {
            if z.len() != n {
                return Err(invalid("chain.zeta_per_scatterer needs one entry per scatterer"));
            }
        }
        self.chain()?;
        Ok(n)
    }

    fn validate_dynamics(&self, d: &DynamicsBlock, n: Option<usize>) -> Result<()> {
        self.dynamics_params(d)?.validate()?;
        if let (Some(v), Some(n)) = (&d.initial_velocities, n) {
            if v.len() != n {
                return Err(invalid("dynamics.initial_velocities needs one entry per scatterer"));
            }
        }
        if let Some(r) = &d.intensity_samples {
            r.validate("dynamics.intensity_samples")?;
        }
        Ok(())
    }

    fn validate_lattice(&self, l: &LatticeBlock) -> Result<()> {
        if l.n < 2 {
            return Err(invalid("lattice.n must be at least 2"));
        }
        match (l.k, l.spacing_fraction) {
            (Some(_), Some(_)) => return Err(invalid("lattice: give k or spacing_fraction, not both")),
            (None, None) => return Err(invalid("lattice: k or spacing_fraction required")),
            (None, Some(f)) if !(f > 0.0) => return Err(invalid("lattice.spacing_fraction must be positive")),
            _ => {}
        }
        if let Some(d) = &l.displacement {
            if d.len() != l.n {
                return Err(invalid("lattice.displacement needs one entry per scatterer"));
            }
            for v in d {
                finite(*v, "lattice.displacement")?;
            }
        }
        if !(l.mass > 0.0) || !(l.fd_step > 0.0) {
            return Err(invalid("lattice: mass and fd_step must be positive"));
        }
        if let Some(r) = &l.i_p_sweep {
            r.validate("lattice.i_p_sweep")?;
            if r.values().iter().any(|v| !(*v >= 0.0)) {
                return Err(invalid("lattice.i_p_sweep values must be non-negative"));
            }
        }
        if let Some(z) = l.zeta_p {
            if !(z >= 0.0) {
                return Err(invalid("lattice.zeta_p must be non-negative"));
            }
        }
        if !(l.zeta > 0.0) || !(l.k_p > 0.0) || !(l.i_l > 0.0) || !(l.i_r > 0.0) || !(l.i_p >= 0.0) {
            return Err(invalid("lattice: zeta, k_p, i_l, i_r must be positive and i_p non-negative"));
        }
        Ok(())
    }

    pub fn mode(&self, m: &ModeBlock) -> Mode {
        let mut mode = Mode::new(m.label.clone(), m.k).with_drives(
            amplitude(m.intensity_left, m.phase_left),
            amplitude(m.intensity_right, m.phase_right),
        );
        if let Some(s) = m.zeta_scale {
            mode = mode.with_zeta_scale(s);
        }
        if let Some(z) = m.zeta_override {
            mode = mode.with_zeta_override(cplx(z));
        }
        mode
    }

    pub fn modes(&self) -> Vec<Mode> {
        self.modes.iter().map(|m| self.mode(m)).collect()
    }

    fn chain_block(&self) -> Result<&ChainBlock> {
        self.chain.as_ref().ok_or_else(|| invalid("scenario has no chain block"))
    }

    /// Positions in internal units.
    pub fn positions(&self) -> Result<Vec<f64>> {
        let c = self.chain_block()?;
        let s = self.length_scale();
        Ok(match c.generator {
            Generator::Equidistant => {
                let (n, d) = (c.n.unwrap_or(0), c.spacing.unwrap_or(0.0));
                (0..n).map(|j| (c.start + j as f64 * d) * s).collect()
            }
            Generator::Explicit => c.positions.clone().unwrap_or_default().iter().map(|x| x * s).collect(),
        })
    }

    pub fn zetas(&self) -> Result<Vec<Complex64>> {
        let c = self.chain_block()?;
        let n = self.positions()?.len();
        Ok(match &c.zeta_per_scatterer {
            Some(z) => z.iter().copied().map(cplx).collect(),
            None => vec![cplx(c.zeta); n],
        })
    }

    pub fn chain(&self) -> Result<ScattererChain> {
        let c = self.chain_block()?;
        if c.allow_gain {
            ScattererChain::with_gain(self.positions()?, self.zetas()?)
        } else {
            ScattererChain::new(self.positions()?, self.zetas()?)
        }
    }

    pub fn system(&self) -> Result<ChainSystem> {
        let chain = self.chain()?;
        ChainSystem::new(chain.zeta().to_vec(), self.modes())
    }

    /// Pair parameters for the perturbative force formulas, when the scenario
    /// has that shape: two scatterers with one real coupling, one mode from
    /// the left and one from the right, couplings scaling with `k`.
    pub fn pair_params(&self) -> Option<PairForceParams> {
        let c = self.chain.as_ref()?;
        if self.positions().ok()?.len() != 2 || c.zeta[1] != 0.0 || c.zeta_per_scatterer.is_some() {
            return None;
        }
        let [y, z] = self.modes.as_slice() else { return None };
        let one_sided = |m: &ModeBlock, left: bool| {
            m.zeta_override.is_none()
                && m.zeta_scale.map_or(true, |s| s == m.k)
                && if left { m.intensity_right == 0.0 } else { m.intensity_left == 0.0 }
        };
        if !one_sided(y, true) || !one_sided(z, false) || !(y.intensity_left > 0.0) {
            return None;
        }
        Some(PairForceParams::new(
            z.intensity_right / y.intensity_left,
            y.k,
            z.k,
            c.zeta[0] * y.k,
            y.intensity_left,
        ))
    }

    fn dynamics_block(&self) -> Result<&DynamicsBlock> {
        self.dynamics.as_ref().ok_or_else(|| invalid("scenario has no dynamics block"))
    }

    fn dynamics_params(&self, d: &DynamicsBlock) -> Result<DynamicsParams> {
        let s = self.length_scale();
        let mut p = match d.regime {
            Regime::Overdamped => DynamicsParams::overdamped(d.friction, d.dt, d.t_end),
            Regime::Newtonian => DynamicsParams::newtonian(d.mass, d.friction, d.dt, d.t_end),
        };
        if let Some(m) = d.min_separation {
            p.min_separation = m * s;
        }
        p.force_tol = d.force_tol;
        p.stop = d.stop;
        p.capture_every = self.output.capture_every;
        if let Some(r) = &d.intensity_samples {
            p.intensity = Some(IntensityCapture {
                xs: r.scaled(s),
                every: d.intensity_every.unwrap_or(self.output.capture_every),
            });
        }
        Ok(p)
    }

    /// Integrator settings in internal units.
    pub fn dynamics(&self) -> Result<DynamicsParams> {
        self.dynamics_params(self.dynamics_block()?)
    }

    pub fn initial_velocities(&self) -> Result<Option<Vec<f64>>> {
        let s = self.length_scale();
        Ok(self.dynamics_block()?.initial_velocities.as_ref().map(|v| v.iter().map(|x| x * s).collect()))
    }

    pub fn sample_points(&self) -> Result<Vec<f64>> {
        let r = self.samples.as_ref().ok_or_else(|| invalid("scenario has no samples block"))?;
        Ok(r.scaled(self.length_scale()))
    }

    pub fn probe_distances(&self) -> Option<Vec<f64>> {
        self.probe.as_ref().map(|p| p.d.scaled(self.length_scale()))
    }

    pub fn design_distances(&self) -> Result<Vec<f64>> {
        let d = self.design.as_ref().ok_or_else(|| invalid("scenario has no design block"))?;
        Ok(d.d.scaled(self.length_scale()))
    }

    pub fn grid_axes(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.grid.as_ref().ok_or_else(|| invalid("scenario has no grid block"))?;
        let s = self.length_scale();
        Ok((g.d1.scaled(s), g.d2.scaled(s)))
    }

    fn lattice_block(&self) -> Result<&LatticeBlock> {
        self.lattice.as_ref().ok_or_else(|| invalid("scenario has no lattice block"))
    }

    /// The lattice with its equilibrium sites located.
    pub fn lattice_scenario(&self) -> Result<LatticeScenario> {
        let l = self.lattice_block()?;
        let asymmetry = (l.i_l - l.i_r) / (l.i_l * l.i_r).sqrt();
        let k = match (l.k, l.spacing_fraction) {
            (Some(k), _) => k,
            (None, Some(f)) => wavenumber_for_spacing(l.zeta, asymmetry, f, l.k_p)?,
            (None, None) => return Err(invalid("lattice: k or spacing_fraction required")),
        };
        let s = LatticeScenario::new(l.n, l.zeta, k, l.i_l, l.i_r, l.k_p, l.i_p)?;
        match l.zeta_p {
            Some(z) => s.with_zeta_p(z),
            None => Ok(s),
        }
    }

    /// Displacements in internal units (zeros when absent).
    pub fn lattice_displacement(&self) -> Result<Vec<f64>> {
        let l = self.lattice_block()?;
        let s = self.length_scale();
        Ok(match &l.displacement {
            Some(d) => d.iter().map(|x| x * s).collect(),
            None => vec![0.0; l.n],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_json(extra: &str) -> String {
        format!(
            r#"{{
                "version": 1,
                "chain": {{"generator": "explicit", "positions": [0.0, 0.375], "zeta": [0.01, 0.0]}},
                "modes": [
                    {{"label": "y", "k": 1.0, "intensity_left": 1.0}},
                    {{"label": "z", "k": 1.0, "intensity_right": 1.0}}
                ]{extra}
            }}"#
        )
    }

    #[test]
    fn parses_minimal_pair() {
        let s = ScenarioFile::from_json(&pair_json("")).unwrap();
        let x = s.positions().unwrap();
        assert!((x[1] - 0.375 * TAU).abs() < 1e-15);
        let p = s.pair_params().unwrap();
        assert_eq!((p.intensity_ratio, p.k_y, p.k_z, p.zeta), (1.0, 1.0, 1.0, 0.01));
    }

    #[test]
    fn pair_system_matches_pair_params() {
        let s = ScenarioFile::from_json(&pair_json("")).unwrap();
        let x = s.positions().unwrap();
        let a = s.system().unwrap().forces(&x).unwrap();
        let b = s.pair_params().unwrap().system().unwrap().forces(&x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ScenarioFile::from_json(&pair_json(r#", "bogus": 1"#)).is_err());
        let bad = pair_json("").replace(r#""k": 1.0, "intensity_left""#, r#""k": 1.0, "wavenumber": 2, "intensity_left""#);
        assert!(ScenarioFile::from_json(&bad).is_err());
    }

    #[test]
    fn missing_required_fields_are_rejected() {
        assert!(ScenarioFile::from_json(r#"{"units": {}}"#).is_err());
        let bad = pair_json("").replace(r#", "zeta": [0.01, 0.0]"#, "");
        assert!(ScenarioFile::from_json(&bad).is_err());
    }

    #[test]
    fn inconsistent_blocks_are_rejected() {
        let cases = [
            pair_json("").replace(r#""version": 1"#, r#""version": 2"#),
            pair_json("").replace("[0.0, 0.375]", "[0.375, 0.0]"),
            pair_json(r#", "probe": {"d": {"start": 0.1, "stop": 0.2, "steps": 0}}"#),
            pair_json(r#", "dynamics": {"friction": 0.0, "dt": 0.1, "t_end": 1.0}"#),
            pair_json(r#", "sweep": {"parameters": [{"path": "modes", "start": 0, "stop": 1, "steps": 2}]}"#),
            pair_json("").replace(r#""label": "z""#, r#""label": "y""#),
            pair_json("").replace("[0.01, 0.0]", "[0.01, -0.1]"),
        ];
        for c in cases {
            assert!(ScenarioFile::from_json(&c).is_err(), "{c}");
        }
    }

    #[test]
    fn equidistant_generator_and_units() {
        let s = ScenarioFile::from_json(
            r#"{"version": 1, "units": {"length": "inverse_wavenumber"},
                "chain": {"generator": "equidistant", "n": 3, "start": 1.0, "spacing": 2.0, "zeta": [0.1, 0.0]}}"#,
        )
        .unwrap();
        assert_eq!(s.positions().unwrap(), vec![1.0, 3.0, 5.0]);
    }

    #[test]
    fn range_values_are_inclusive() {
        let r = Range {
            start: 0.0,
            stop: 1.0,
            steps: 5,
        };
        assert_eq!(r.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let one = Range { steps: 1, ..r };
        assert_eq!(one.values(), vec![0.0]);
    }

    #[test]
    fn round_trips_through_json() {
        let s = ScenarioFile::from_json(&pair_json("")).unwrap();
        let t = ScenarioFile::from_json(&s.to_json()).unwrap();
        assert_eq!(s, t);
    }
}
