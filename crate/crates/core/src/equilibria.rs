//! Stationary configurations, their stability, inverse design of pair traps,
//! and the linearised two-site model of a perturbed lattice.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{evolve, DynamicsParams, StopRule};
use crate::error::{invalid, Error, Result};
use crate::forcefield::{ChainSystem, PairForceParams};
use crate::lattice::LatticeScenario;
use crate::roots::root_near;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

/// Eigenvalue real parts beyond this magnitude decide stability.
pub const STABILITY_TOL: f64 = 1e-9;

pub fn classify(eigenvalues: &[Complex64]) -> Stability {
    if eigenvalues.iter().any(|e| e.re > STABILITY_TOL) {
        Stability::Unstable
    } else if eigenvalues.iter().all(|e| e.re < -STABILITY_TOL) {
        Stability::Stable
    } else {
        Stability::Marginal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub positions: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Sup-norm of the solved residual: forces, or force differences in gap mode.
    pub residual: f64,
    /// `dF_i / dx_j` by central differences.
    pub jacobian: Vec<Vec<f64>>,
    /// Eigenvalues used for classification, as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
    pub classification: Stability,
    /// Net force on the whole chain.
    pub com_force: f64,
    pub forces: Vec<f64>,
    /// Solved in gap coordinates.
    pub relative: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumOptions {
    /// Convergence threshold relative to the total injected intensity.
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Retry from an overdamped relaxation when Newton stalls.
    pub relax_fallback: bool,
    pub relax_steps: usize,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions {
            tol: 1e-12,
            max_iter: 60,
            fd_step: 1e-6,
            relax_fallback: true,
            relax_steps: 20_000,
        }
    }
}

fn intensity_scale(system: &ChainSystem) -> f64 {
    let s: f64 = system
        .modes()
        .iter()
        .map(|m| m.intensity_left() + m.intensity_right())
        .sum();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn gaps_of(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Unknowns and residual map for one Newton problem.
struct Problem<'a> {
    system: &'a ChainSystem,
    relative: bool,
    anchor: f64,
}

impl Problem<'_> {
    fn positions(&self, u: &[f64]) -> Vec<f64> {
        if self.relative {
            let mut x = Vec::with_capacity(u.len() + 1);
            x.push(self.anchor);
            for g in u {
                x.push(x.last().unwrap() + g);
            }
            x
        } else {
            u.to_vec()
        }
    }

    fn unknowns(&self, x: &[f64]) -> Vec<f64> {
        if self.relative {
            gaps_of(x)
        } else {
            x.to_vec()
        }
    }

    fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let f = self.system.forces(&self.positions(u))?;
        Ok(if self.relative { gaps_of(&f) } else { f })
    }

    fn jacobian(&self, u: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let n = u.len();
        let mut j = DMatrix::zeros(n, n);
        let mut up = u.to_vec();
        for c in 0..n {
            up[c] = u[c] + h;
            let fp = self.residual(&up)?;
            up[c] = u[c] - h;
            let fm = self.residual(&up)?;
            up[c] = u[c];
            for r in 0..n {
                j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        Ok(j)
    }
}

fn ordered(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] > w[0])
}

/// Damped Newton iteration; returns the best iterate and its residual norm.
fn newton(p: &Problem, u0: Vec<f64>, opts: &EquilibriumOptions, tol: f64) -> (Vec<f64>, f64, usize, bool) {
    let mut u = u0;
    let mut r = match p.residual(&u) {
        Ok(r) => r,
        Err(_) => return (u, f64::INFINITY, 0, false),
    };
    let mut norm = sup(&r);
    for it in 0..opts.max_iter {
        if norm < tol {
            return (u, norm, it, true);
        }
        let Ok(j) = p.jacobian(&u, opts.fd_step) else {
            return (u, norm, it, false);
        };
        let Some(delta) = j.lu().solve(&DVector::from_vec(r.iter().map(|v| -v).collect())) else {
            return (u, norm, it, false);
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
            let x = p.positions(&trial);
            if ordered(&x) {
                if let Ok(rt) = p.residual(&trial) {
                    let nt = sup(&rt);
                    if nt < norm {
                        u = trial;
                        r = rt;
                        norm = nt;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return (u, norm, it, norm < tol);
        }
    }
    (u, norm, opts.max_iter, norm < tol)
}

/// Searches for a stationary configuration near `guess` with default options.
pub fn find_equilibrium(system: &ChainSystem, guess: &[f64], relative_only: bool) -> Result<EquilibriumReport> {
    find_equilibrium_with(system, guess, relative_only, &EquilibriumOptions::default())
}

/// Damped Newton on `F(x) = 0`, or on `F_{j+1} - F_j = 0` with the first
/// scatterer held fixed when `relative_only` is set. Falls back to overdamped
/// relaxation if Newton stalls.
pub fn find_equilibrium_with(
    system: &ChainSystem,
    guess: &[f64],
    relative_only: bool,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumReport> {
    system.chain(guess)?;
    let p = Problem {
        system,
        relative: relative_only,
        anchor: guess[0],
    };
    let tol = opts.tol * intensity_scale(system);
    let (u, norm, iterations, ok) = newton(&p, p.unknowns(guess), opts, tol);

    if !ok && opts.relax_fallback {
        let j = p.jacobian(&u, opts.fd_step)?;
        let rate = j.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        if rate > 0.0 {
            let dt = 0.5 / rate;
            let mut params = DynamicsParams::overdamped(1.0, dt, dt * opts.relax_steps as f64);
            params.min_separation = 0.0;
            params.force_tol = tol;
            params.capture_every = opts.relax_steps.max(1);
            params.stop = if relative_only {
                StopRule::Relative
            } else {
                StopRule::Absolute
            };
            if let Ok(tr) = evolve(system, &p.positions(&u), None, &params) {
                if !tr.is_partial() {
                    let x = tr.final_positions();
                    let start = if relative_only {
                        // keep the anchor of the relaxed chain
                        gaps_of(x)
                    } else {
                        x.to_vec()
                    };
                    let p2 = Problem {
                        anchor: x[0],
                        ..p
                    };
                    let (u2, n2, it2, ok2) = newton(&p2, start, opts, tol);
                    let report = build_report(system, &p2.positions(&u2), relative_only, n2, iterations + it2, opts)?;
                    if ok2 {
                        return Ok(report);
                    }
                    if n2 < norm {
                        return Err(Error::NoConvergence {
                            iterations: report.iterations,
                            residual: n2,
                            best: Box::new(report),
                        });
                    }
                }
            }
        }
    }

    let report = build_report(system, &p.positions(&u), relative_only, norm, iterations, opts)?;
    if ok {
        Ok(report)
    } else {
        Err(Error::NoConvergence {
            iterations,
            residual: norm,
            best: Box::new(report),
        })
    }
}

/// Central-difference Jacobian `dF_i / dx_j` in absolute coordinates.
pub fn force_jacobian(system: &ChainSystem, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    Problem {
        system,
        relative: false,
        anchor: 0.0,
    }
    .jacobian(x, h)
}

fn build_report(
    system: &ChainSystem,
    x: &[f64],
    relative: bool,
    residual: f64,
    iterations: usize,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumReport> {
    let forces = system.forces(x)?;
    let j = force_jacobian(system, x, opts.fd_step)?;
    let n = x.len();
    let reduced = if relative && system.is_translation_invariant() {
        // gap dynamics: g_i' ~ F_{i+1} - F_i, with x_k = x_1 + sum_{j<k} g_j
        let mut d = DMatrix::zeros(n - 1, n);
        let mut s = DMatrix::zeros(n, n - 1);
        for i in 0..n - 1 {
            d[(i, i)] = -1.0;
            d[(i, i + 1)] = 1.0;
            for k in i + 1..n {
                s[(k, i)] = 1.0;
            }
        }
        d * &j * s
    } else {
        j.clone()
    };
    let eigs: Vec<Complex64> = if reduced.nrows() == 0 {
        Vec::new()
    } else {
        reduced.complex_eigenvalues().iter().copied().collect()
    };
    Ok(EquilibriumReport {
        positions: x.to_vec(),
        gaps: gaps_of(x),
        residual,
        jacobian: j.row_iter().map(|r| r.iter().copied().collect()).collect(),
        eigenvalues: eigs.iter().map(|e| [e.re, e.im]).collect(),
        classification: classify(&eigs),
        com_force: forces.iter().sum(),
        forces,
        relative,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryDistance {
    pub n: usize,
    pub d: f64,
    pub stable: bool,
}

/// Separations `(2n+1) pi / (4k)` of the symmetric pair; odd `n` is stable.
pub fn pair_stationary_distances(k: f64, n_max: usize) -> Vec<StationaryDistance> {
    (0..=n_max)
        .map(|n| StationaryDistance {
            n,
            d: (2 * n + 1) as f64 * PI / (4.0 * k),
            stable: n % 2 == 1,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntensityDesign {
    pub p1: f64,
    pub p2: f64,
    pub p1_physical: bool,
    pub p2_physical: bool,
}

impl IntensityDesign {
    pub fn physical(&self) -> bool {
        self.p1_physical && self.p2_physical
    }
}

/// Intensity ratios making `F1` (`p1`) or `F2` (`p2`) of the approximate pair forces vanish at `d`.
pub fn design_intensity_ratio(d: f64, k_y: f64, k_z: f64, zeta: f64) -> IntensityDesign {
    let cy2 = (d * k_y).cos().powi(2);
    let cz2 = (d * k_z).cos().powi(2);
    let z2 = zeta * zeta;
    let num = k_y * k_y + 4.0 * k_z * k_z * z2 * cz2;
    let den = k_z * k_z * (1.0 + 4.0 * z2 * cy2);
    let p1 = (4.0 * cy2 - 1.0) * num / den;
    let p2 = num / (den * (4.0 * cz2 - 1.0));
    IntensityDesign {
        p1,
        p2,
        p1_physical: p1 > 0.0,
        p2_physical: p2 > 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    /// Largest `k_z` returned.
    pub k_max: f64,
    pub i_y: f64,
    /// Step for the stability derivative of the exact forces.
    pub fd_step: f64,
}

impl DesignOptions {
    pub fn band(k_max: f64) -> Self {
        DesignOptions {
            k_max,
            i_y: 1.0,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WavenumberCandidate {
    pub k_z: f64,
    /// `+1` or `-1`: sign of `cos(d k_z)` at the lowest-order solution.
    pub branch: i8,
    /// Period index: `d k_z = arccos(+-c) + n pi`.
    pub n: u32,
    pub seed: f64,
    pub p1: f64,
    pub p2: f64,
    pub physical: bool,
    /// Exact forces on the pair at separation `d` with `P = p1`.
    pub f1: f64,
    pub f2: f64,
    /// `d/dd (F2 - F1) < 0` from the exact engine.
    pub stable: bool,
}

/// Wavenumbers `k_z` for which a pair at separation `d` is force-free.
///
/// Lowest-order seeds solve `cos^2(d k_z) = (1 + C) / (2 (1 + 2C))` with
/// `C = cos(2 d k_y)`; each seed is refined so that `P1 = P2` with the full
/// coupling dependence, then checked against the exact engine.
pub fn design_wavenumber(d: f64, k_y: f64, zeta: f64, opts: &DesignOptions) -> Result<Vec<WavenumberCandidate>> {
    if !(d > 0.0) || !(k_y > 0.0) || !(opts.k_max > 0.0) {
        return Err(invalid("d, k_y and k_max must be positive"));
    }
    let c = (2.0 * d * k_y).cos();
    if c < -1.0 / 3.0 {
        return Err(Error::NoSolution(format!(
            "cos(2 d k_y) = {c} < -1/3: cos^2(d k_z) = {} has no solution",
            (1.0 + c) / (2.0 * (1.0 + 2.0 * c))
        )));
    }
    let c2 = ((1.0 + c) / (2.0 * (1.0 + 2.0 * c))).clamp(0.0, 1.0);
    let mismatch = |kz: f64| {
        let des = design_intensity_ratio(d, k_y, kz, zeta);
        des.p1 - des.p2
    };
    let mut out = Vec::new();
    for n in 0.. {
        let base = n as f64 * PI;
        if base / d > opts.k_max {
            break;
        }
        for (branch, theta) in [(1i8, c2.sqrt().acos()), (-1i8, (-c2.sqrt()).acos())] {
            let seed = (theta + base) / d;
            if !(seed > 0.0) || seed > opts.k_max {
                continue;
            }
            let k_z = root_near(mismatch, seed, 1e-6 / d, 0.05 / d, 1e-15).unwrap_or(seed);
            let des = design_intensity_ratio(d, k_y, k_z, zeta);
            let params = PairForceParams::new(des.p1, k_y, k_z, zeta, opts.i_y);
            let (f1, f2, stable) = if des.p1 >= 0.0 {
                let sys = params.system()?;
                let f = sys.forces(&[0.0, d])?;
                let h = opts.fd_step;
                let fp = sys.forces(&[0.0, d + h])?;
                let fm = sys.forces(&[0.0, d - h])?;
                let slope = ((fp[1] - fp[0]) - (fm[1] - fm[0])) / (2.0 * h);
                (f[0], f[1], slope < 0.0)
            } else {
                (f64::NAN, f64::NAN, false)
            };
            out.push(WavenumberCandidate {
                k_z,
                branch,
                n: n as u32,
                seed,
                p1: des.p1,
                p2: des.p2,
                physical: des.physical(),
                f1,
                f2,
                stable,
            });
        }
    }
    out.sort_by(|a, b| a.k_z.total_cmp(&b.k_z));
    out.dedup_by(|a, b| (a.k_z - b.k_z).abs() < 1e-12);
    Ok(out)
}

/// Raw first-order expansion coefficients of the four pair forces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub k1p: f64,
    pub k2p: f64,
    pub k3p: f64,
    pub k4p: f64,
}

/// Which coefficient identities hold within the finite-difference tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub tolerance: f64,
    pub a_u_zero: bool,
    pub b_eq_v: bool,
    pub c_eq_w: bool,
    pub c_eq_minus_w: bool,
    pub k1p_eq_k3p: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizedModel {
    /// Spring constant `K = -b`.
    pub k_spring: f64,
    /// `K_2p + c`.
    pub kappa1: f64,
    /// `-(K_4p + w)`.
    pub kappa2: f64,
    /// Mean constant drive `(K_1p + K_3p) / 2`.
    pub f_ext: f64,
    pub f_ext1: f64,
    pub f_ext2: f64,
    pub mass: f64,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub constants: TaylorConstants,
    pub identities: IdentityCheck,
}

/// Linearises the forces of a two-site lattice around its unperturbed sites.
///
/// Derivatives are central differences with step `h` in `(dx_1, Delta)` for
/// `F_1`, `(dx_2, Delta)` for `F_2`, and `Delta` alone for the perturbation
/// forces, where `Delta = dx_2 - dx_1`.
pub fn linearize_pair_in_lattice(scenario: &LatticeScenario, mass: f64, h: f64) -> Result<LinearizedModel> {
    if scenario.n != 2 {
        return Err(invalid("linearisation needs a two-site lattice scenario"));
    }
    if !(mass > 0.0) || !(h > 0.0) {
        return Err(invalid("mass and step must be positive"));
    }
    let lat = scenario.lattice_system()?;
    let per = scenario.perturbation_system()?;
    let (s1, s2) = (scenario.sites[0], scenario.sites[1]);
    let lat_f = |dx1: f64, dx2: f64| lat.forces(&[s1 + dx1, s2 + dx2]);
    let per_f = |delta: f64| per.forces(&[s1, s2 + delta]);
    let diff = |p: [f64; 2], m: [f64; 2]| (p[0] - m[0]) / (2.0 * h);
    let v2 = |v: Vec<f64>| [v[0], v[1]];

    let f0 = lat_f(0.0, 0.0)?;
    // F1(dx1, Delta): x1 = s1 + dx1, x2 = s2 + dx1 + Delta
    let b = diff(v2(lat_f(h, h)?), v2(lat_f(-h, -h)?));
    let c = diff(v2(lat_f(0.0, h)?), v2(lat_f(0.0, -h)?));
    // F2(dx2, Delta): x2 = s2 + dx2, x1 = s1 + dx2 - Delta
    let sw = |v: Vec<f64>| [v[1], v[0]];
    let v = diff(sw(lat_f(h, h)?), sw(lat_f(-h, -h)?));
    let w = diff(sw(lat_f(-h, 0.0)?), sw(lat_f(h, 0.0)?));
    let p0 = per_f(0.0)?;
    let k2p = diff(v2(per_f(h)?), v2(per_f(-h)?));
    let k4p = diff(sw(per_f(h)?), sw(per_f(-h)?));

    let constants = TaylorConstants {
        a: f0[0],
        b,
        c,
        u: f0[1],
        v,
        w,
        k1p: p0[0],
        k2p,
        k3p: p0[1],
        k4p,
    };
    let scale = scenario.i_l + scenario.i_r + scenario.i_p;
    let k3 = scenario.k.max(scenario.k_p).powi(3);
    let tolerance = 10.0 * h * h * scale * k3 + 1e-9 * scale;
    let close = |x: f64, y: f64| (x - y).abs() <= tolerance;
    let identities = IdentityCheck {
        tolerance,
        a_u_zero: close(constants.a, 0.0) && close(constants.u, 0.0),
        b_eq_v: close(b, v),
        c_eq_w: close(c, w),
        c_eq_minus_w: close(c, -w),
        k1p_eq_k3p: close(constants.k1p, constants.k3p),
    };
    if !identities.a_u_zero || !identities.b_eq_v || !identities.c_eq_minus_w {
        return Err(Error::InconsistentLinearization(format!(
            "a = {:e}, u = {:e}, b - v = {:e}, c + w = {:e} (tolerance {tolerance:e}); sites are not an equilibrium",
            constants.a,
            constants.u,
            b - v,
            c + w
        )));
    }
    let k_spring = -b;
    let kappa1 = k2p + c;
    let kappa2 = -(k4p + w);
    let root = |x: f64| (x >= 0.0).then(|| (x / mass).sqrt());
    Ok(LinearizedModel {
        k_spring,
        kappa1,
        kappa2,
        f_ext: 0.5 * (constants.k1p + constants.k3p),
        f_ext1: constants.k1p,
        f_ext2: constants.k3p,
        mass,
        omega1: root(k_spring),
        omega2: root(k_spring + kappa1 + kappa2),
        constants,
        identities,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalModes {
    pub omega1: f64,
    pub omega2: f64,
    pub mode1: [f64; 2],
    pub mode2: [f64; 2],
    /// Common static displacement `F_ext / K`.
    pub static_offset: f64,
}

/// Frequencies and shapes of the two coupled-oscillator modes.
pub fn normal_modes(model: &LinearizedModel) -> Result<NormalModes> {
    let m = model.mass;
    let w1 = model.k_spring / m;
    let w2 = (model.k_spring + model.kappa1 + model.kappa2) / m;
    for sq in [w1, w2] {
        if sq < 0.0 {
            return Err(Error::UnstableMode {
                omega_sq: sq,
                growth_rate: (-sq).sqrt(),
            });
        }
    }
    if model.kappa2 == 0.0 {
        return Err(invalid("kappa2 = 0: second mode shape undefined"));
    }
    Ok(NormalModes {
        omega1: w1.sqrt(),
        omega2: w2.sqrt(),
        mode1: [1.0, 1.0],
        mode2: [-model.kappa1 / model.kappa2, 1.0],
        static_offset: model.f_ext / model.k_spring,
    })
}

/// Signed forces of a three-scatterer chain on a `(d1, d2)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroForceGrid {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// `forces[s][i * d2.len() + j]` is the force on scatterer `s` at `(d1[i], d2[j])`.
    pub forces: [Vec<f64>; 3],
}

impl ZeroForceGrid {
    pub fn at(&self, s: usize, i: usize, j: usize) -> f64 {
        self.forces[s][i * self.d2.len() + j]
    }

    /// Cells whose corners show both signs for all three forces.
    pub fn sign_change_cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.d1.len().saturating_sub(1) {
            for j in 0..self.d2.len().saturating_sub(1) {
                let all = (0..3).all(|s| {
                    let c = [self.at(s, i, j), self.at(s, i + 1, j), self.at(s, i, j + 1), self.at(s, i + 1, j + 1)];
                    c.iter().any(|v| *v <= 0.0) && c.iter().any(|v| *v >= 0.0)
                });
                if all {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Exact forces for positions `(0, d1, d1 + d2)` on the given axes.
pub fn zero_force_grid(system: &ChainSystem, d1: &[f64], d2: &[f64]) -> Result<ZeroForceGrid> {
    if system.len() != 3 {
        return Err(invalid("zero-force grids need a three-scatterer system"));
    }
    let strictly = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|x| *x > 0.0);
    if !strictly(d1) || !strictly(d2) {
        return Err(invalid("grid axes must be positive and increasing"));
    }
    let cells: Vec<[f64; 3]> = (0..d1.len() * d2.len())
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (d1[idx / d2.len()], d2[idx % d2.len()]);
            system.forces(&[0.0, a, a + b]).map(|f| [f[0], f[1], f[2]])
        })
        .collect::<Result<_>>()?;
    let forces = [0, 1, 2].map(|s| cells.iter().map(|c| c[s]).collect());
    Ok(ZeroForceGrid {
        d1: d1.to_vec(),
        d2: d2.to_vec(),
        forces,
    })
}
