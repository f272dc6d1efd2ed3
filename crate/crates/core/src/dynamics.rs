//! Motion of the scatterers under their own optical forces.
//!
//! Two regimes: damped Newtonian motion `m x'' = -mu x' + F(x)` and the
//! overdamped limit `mu x' = F(x)`. Both use fixed-step RK4 with the fields
//! re-solved at every stage, followed by a separation guard.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::forcefield::ChainSystem;
use crate::output::fmt_f64;
use crate::wavecore::{intensity_profile, solve_fields};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Overdamped,
    Newtonian,
}

/// Stationarity test used to stop overdamped runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// `max_j |F_j| < force_tol`.
    Absolute,
    /// `max_j |F_j - mean(F)| < force_tol`: stationary gaps, the whole chain may drift.
    Relative,
    /// Relative for translation-invariant systems, absolute otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityCapture {
    pub xs: Vec<f64>,
    pub every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsParams {
    pub mass: f64,
    pub friction: f64,
    pub dt: f64,
    pub t_end: f64,
    pub regime: Regime,
    /// Smallest allowed gap between neighbours.
    pub min_separation: f64,
    /// Overdamped runs stop once the force criterion drops below this.
    pub force_tol: f64,
    pub stop: StopRule,
    /// Store every n-th step (the final state is always stored).
    pub capture_every: usize,
    pub capture_forces: bool,
    pub intensity: Option<IntensityCapture>,
}

impl DynamicsParams {
    pub fn overdamped(friction: f64, dt: f64, t_end: f64) -> Self {
        DynamicsParams {
            mass: 1.0,
            friction,
            dt,
            t_end,
            regime: Regime::Overdamped,
            min_separation: 1e-3 * std::f64::consts::TAU,
            force_tol: 1e-10,
            stop: StopRule::Auto,
            capture_every: 1,
            capture_forces: false,
            intensity: None,
        }
    }

    pub fn newtonian(mass: f64, friction: f64, dt: f64, t_end: f64) -> Self {
        DynamicsParams {
            mass,
            regime: Regime::Newtonian,
            ..Self::overdamped(friction, dt, t_end)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.regime {
            Regime::Overdamped if !(self.friction > 0.0) => {
                return Err(invalid("overdamped dynamics need friction > 0"))
            }
            Regime::Newtonian if !(self.mass > 0.0) || !(self.friction >= 0.0) => {
                return Err(invalid("newtonian dynamics need mass > 0 and friction >= 0"))
            }
            _ => {}
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(invalid("dt must be positive and t_end finite and non-negative"));
        }
        if !(self.min_separation >= 0.0) {
            return Err(invalid("min_separation must be non-negative"));
        }
        if !(self.force_tol >= 0.0) {
            return Err(invalid("force_tol must be non-negative"));
        }
        if self.capture_every == 0 {
            return Err(invalid("capture_every must be at least 1"));
        }
        if let Some(c) = &self.intensity {
            if c.every == 0 {
                return Err(invalid("intensity capture cadence must be at least 1"));
            }
        }
        Ok(())
    }
}

fn guard(x: &[f64], min: f64, time: f64) -> Result<()> {
    for (j, w) in x.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if !(gap >= min) {
            return Err(Error::SeparationViolation {
                time,
                left: j,
                gap,
                min,
            });
        }
    }
    Ok(())
}

/// Forces at an intermediate stage; a stage that reorders the chain is a separation failure.
fn stage_forces(system: &ChainSystem, x: &[f64], out: &mut [f64], min: f64, time: f64) -> Result<()> {
    match system.forces_into(x, out) {
        Err(Error::NegativeDistance(_)) => guard(x, min.max(0.0), time),
        other => other,
    }
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One RK4 step of `x' = F(x) / mu` starting at time `t`.
pub fn step_overdamped(system: &ChainSystem, x: &[f64], params: &DynamicsParams, t: f64) -> Result<Vec<f64>> {
    let mut k1 = vec![0.0; x.len()];
    stage_forces(system, x, &mut k1, params.min_separation, t)?;
    step_overdamped_with(system, x, &k1, params, t)
}

fn step_overdamped_with(
    system: &ChainSystem,
    x: &[f64],
    f1: &[f64],
    params: &DynamicsParams,
    t: f64,
) -> Result<Vec<f64>> {
    let (h, mu) = (params.dt, params.friction);
    let n = x.len();
    let min = params.min_separation;
    let k1: Vec<f64> = f1.iter().map(|f| f / mu).collect();
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    stage_forces(system, &axpy(x, 0.5 * h, &k1), &mut k2, min, t + 0.5 * h)?;
    k2.iter_mut().for_each(|v| *v /= mu);
    stage_forces(system, &axpy(x, 0.5 * h, &k2), &mut k3, min, t + 0.5 * h)?;
    k3.iter_mut().for_each(|v| *v /= mu);
    stage_forces(system, &axpy(x, h, &k3), &mut k4, min, t + h)?;
    k4.iter_mut().for_each(|v| *v /= mu);
    let next: Vec<f64> = (0..n)
        .map(|j| x[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect();
    guard(&next, min, t + h)?;
    Ok(next)
}

/// One RK4 step of `m x'' = -mu x' + F(x)` starting at time `t`.
pub fn step_newtonian(
    system: &ChainSystem,
    x: &[f64],
    v: &[f64],
    params: &DynamicsParams,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut f = vec![0.0; x.len()];
    stage_forces(system, x, &mut f, params.min_separation, t)?;
    step_newtonian_with(system, x, v, &f, params, t)
}

fn step_newtonian_with(
    system: &ChainSystem,
    x: &[f64],
    v: &[f64],
    f1: &[f64],
    params: &DynamicsParams,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (h, m, mu) = (params.dt, params.mass, params.friction);
    let n = x.len();
    let min = params.min_separation;
    let accel = |v: &[f64], f: &[f64]| -> Vec<f64> { (0..n).map(|j| (f[j] - mu * v[j]) / m).collect() };

    let kx1 = v.to_vec();
    let kv1 = accel(v, f1);

    let x2 = axpy(x, 0.5 * h, &kx1);
    let v2 = axpy(v, 0.5 * h, &kv1);
    let mut f = vec![0.0; n];
    stage_forces(system, &x2, &mut f, min, t + 0.5 * h)?;
    let kx2 = v2.clone();
    let kv2 = accel(&v2, &f);

    let x3 = axpy(x, 0.5 * h, &kx2);
    let v3 = axpy(v, 0.5 * h, &kv2);
    stage_forces(system, &x3, &mut f, min, t + 0.5 * h)?;
    let kx3 = v3.clone();
    let kv3 = accel(&v3, &f);

    let x4 = axpy(x, h, &kx3);
    let v4 = axpy(v, h, &kv3);
    stage_forces(system, &x4, &mut f, min, t + h)?;
    let kx4 = v4.clone();
    let kv4 = accel(&v4, &f);

    let comb = |y: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|j| y[j] + h / 6.0 * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]))
            .collect()
    };
    let xn = comb(x, &kx1, &kx2, &kx3, &kx4);
    let vn = comb(v, &kv1, &kv2, &kv3, &kv4);
    guard(&xn, min, t + h)?;
    Ok((xn, vn))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    TimeLimit,
    ForceTolerance,
    SeparationViolation {
        time: f64,
        left: usize,
        gap: f64,
        min: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensitySnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub total: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One row of positions per stored time.
    pub positions: Vec<Vec<f64>>,
    pub velocities: Option<Vec<Vec<f64>>>,
    /// Total forces per stored time, when requested.
    pub forces: Option<Vec<Vec<f64>>>,
    pub intensity: Vec<IntensitySnapshot>,
    pub termination: Termination,
    /// Stop-rule residual at the last evaluated state.
    pub residual: f64,
}

impl Trajectory {
    pub fn final_positions(&self) -> &[f64] {
        self.positions.last().map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn final_gaps(&self) -> Vec<f64> {
        self.final_positions().windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// True when the run stopped early on an ordering violation.
    pub fn is_partial(&self) -> bool {
        matches!(self.termination, Termination::SeparationViolation { .. })
    }

    /// Turns a separation stop into the corresponding error.
    pub fn check(&self) -> Result<()> {
        match self.termination {
            Termination::SeparationViolation { time, left, gap, min } => {
                Err(Error::SeparationViolation { time, left, gap, min })
            }
            _ => Ok(()),
        }
    }

    /// Centre-of-mass velocity from a least-squares line over the last quarter of the samples.
    pub fn com_velocity(&self) -> Option<f64> {
        let n = self.times.len();
        if n < 2 {
            return None;
        }
        let start = (3 * n / 4).min(n - 2);
        let ts = &self.times[start..];
        let com: Vec<f64> = self.positions[start..]
            .iter()
            .map(|x| x.iter().sum::<f64>() / x.len() as f64)
            .collect();
        let m = ts.len() as f64;
        let tm = ts.iter().sum::<f64>() / m;
        let cm = com.iter().sum::<f64>() / m;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (t, c) in ts.iter().zip(&com) {
            sxy += (t - tm) * (c - cm);
            sxx += (t - tm) * (t - tm);
        }
        (sxx > 0.0).then(|| sxy / sxx)
    }

    fn window(&self, t0: f64, t1: f64) -> impl Iterator<Item = usize> + '_ {
        self.times.iter().enumerate().filter(move |(_, t)| **t >= t0 && **t <= t1).map(|(i, _)| i)
    }

    /// Half the peak-to-peak excursion of each scatterer for stored times in `[t0, t1]`.
    pub fn oscillation_amplitudes(&self, t0: f64, t1: f64) -> Vec<f64> {
        let n = self.final_positions().len();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for i in self.window(t0, t1) {
            for (j, x) in self.positions[i].iter().enumerate() {
                lo[j] = lo[j].min(*x);
                hi[j] = hi[j].max(*x);
            }
        }
        lo.iter().zip(&hi).map(|(a, b)| if b >= a { 0.5 * (b - a) } else { 0.0 }).collect()
    }

    /// Mean kinetic energy `m v^2 / 2` of each scatterer over stored times in `[t0, t1]`.
    pub fn mean_kinetic_energy(&self, mass: f64, t0: f64, t1: f64) -> Option<Vec<f64>> {
        let v = self.velocities.as_ref()?;
        let n = self.final_positions().len();
        let mut sum = vec![0.0; n];
        let mut count = 0usize;
        for i in self.window(t0, t1) {
            for (s, vj) in sum.iter_mut().zip(&v[i]) {
                *s += 0.5 * mass * vj * vj;
            }
            count += 1;
        }
        (count > 0).then(|| sum.into_iter().map(|s| s / count as f64).collect())
    }

    /// Copy with every length (positions, velocities, sample points) divided by `unit`.
    pub fn in_length_unit(&self, unit: f64) -> Trajectory {
        let scale = |rows: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            rows.iter().map(|r| r.iter().map(|x| x / unit).collect()).collect()
        };
        let termination = match self.termination {
            Termination::SeparationViolation { time, left, gap, min } => Termination::SeparationViolation {
                time,
                left,
                gap: gap / unit,
                min: min / unit,
            },
            ref other => other.clone(),
        };
        Trajectory {
            times: self.times.clone(),
            positions: scale(&self.positions),
            velocities: self.velocities.as_ref().map(scale),
            forces: self.forces.clone(),
            intensity: self
                .intensity
                .iter()
                .map(|s| IntensitySnapshot {
                    t: s.t,
                    x: s.x.iter().map(|x| x / unit).collect(),
                    total: s.total.clone(),
                })
                .collect(),
            termination,
            residual: self.residual,
        }
    }

    /// CSV rows `t,x_1..x_N[,v_1..v_N]` with a header line.
    pub fn write_csv(&self, out: &mut impl std::fmt::Write) -> std::fmt::Result {
        let n = self.final_positions().len();
        write!(out, "t")?;
        for j in 1..=n {
            write!(out, ",x_{j}")?;
        }
        if self.velocities.is_some() {
            for j in 1..=n {
                write!(out, ",v_{j}")?;
            }
        }
        writeln!(out)?;
        for (i, t) in self.times.iter().enumerate() {
            write!(out, "{}", fmt_f64(*t))?;
            for x in &self.positions[i] {
                write!(out, ",{}", fmt_f64(*x))?;
            }
            if let Some(v) = &self.velocities {
                for x in &v[i] {
                    write!(out, ",{}", fmt_f64(*x))?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Long-format intensity snapshots `t,x,I_total`.
    pub fn write_intensity_csv(&self, out: &mut impl std::fmt::Write) -> std::fmt::Result {
        writeln!(out, "t,x,I_total")?;
        for s in &self.intensity {
            for (x, i) in s.x.iter().zip(&s.total) {
                writeln!(out, "{},{},{}", fmt_f64(s.t), fmt_f64(*x), fmt_f64(*i))?;
            }
        }
        Ok(())
    }
}

fn stop_residual(f: &[f64], relative: bool) -> f64 {
    let shift = if relative {
        f.iter().sum::<f64>() / f.len() as f64
    } else {
        0.0
    };
    f.iter().fold(0.0, |m, v| m.max((v - shift).abs()))
}

fn snapshot(system: &ChainSystem, x: &[f64], t: f64, xs: &[f64]) -> Result<IntensitySnapshot> {
    let sol = solve_fields(&system.chain(x)?, system.modes())?;
    let total = intensity_profile(&sol, xs).into_iter().map(|s| s.total).collect();
    Ok(IntensitySnapshot {
        t,
        x: xs.to_vec(),
        total,
    })
}

/// Integrates from `x0` (and `v0` for Newtonian runs) until `t_end` or stationarity.
///
/// A separation violation ends the run with the trajectory so far and
/// `Termination::SeparationViolation`; other numerical failures are errors.
pub fn evolve(system: &ChainSystem, x0: &[f64], v0: Option<&[f64]>, params: &DynamicsParams) -> Result<Trajectory> {
    params.validate()?;
    if x0.len() != system.len() {
        return Err(invalid(format!("expected {} initial positions, got {}", system.len(), x0.len())));
    }
    system.chain(x0)?;
    let n = x0.len();
    let newtonian = params.regime == Regime::Newtonian;
    let relative = match params.stop {
        StopRule::Absolute => false,
        StopRule::Relative => true,
        StopRule::Auto => n > 1 && system.is_translation_invariant(),
    };
    let mut x = x0.to_vec();
    let mut v = match v0 {
        Some(v) if v.len() != n => return Err(invalid("initial velocity count does not match the chain")),
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };

    let mut traj = Trajectory {
        times: Vec::new(),
        positions: Vec::new(),
        velocities: newtonian.then(Vec::new),
        forces: params.capture_forces.then(Vec::new),
        intensity: Vec::new(),
        termination: Termination::TimeLimit,
        residual: f64::NAN,
    };
    let steps = (params.t_end / params.dt).round() as usize;
    let mut f = vec![0.0; n];
    let mut t = 0.0;
    let mut step = 0usize;
    let mut stored_last;

    loop {
        system.forces_into(&x, &mut f)?;
        traj.residual = stop_residual(&f, relative);
        let converged = !newtonian && traj.residual < params.force_tol;
        let done = converged || step >= steps;

        if step % params.capture_every == 0 || done {
            traj.times.push(t);
            traj.positions.push(x.clone());
            if let Some(vs) = traj.velocities.as_mut() {
                vs.push(v.clone());
            }
            if let Some(fs) = traj.forces.as_mut() {
                fs.push(f.clone());
            }
            stored_last = true;
        } else {
            stored_last = false;
        }
        if let Some(cap) = &params.intensity {
            if step % cap.every == 0 || done {
                traj.intensity.push(snapshot(system, &x, t, &cap.xs)?);
            }
        }
        if done {
            if converged {
                traj.termination = Termination::ForceTolerance;
            }
            break;
        }

        let next = if newtonian {
            step_newtonian_with(system, &x, &v, &f, params, t).map(|(xn, vn)| {
                v = vn;
                xn
            })
        } else {
            step_overdamped_with(system, &x, &f, params, t)
        };
        match next {
            Ok(xn) => x = xn,
            Err(Error::SeparationViolation { time, left, gap, min }) => {
                if !stored_last {
                    traj.times.push(t);
                    traj.positions.push(x.clone());
                    if let Some(vs) = traj.velocities.as_mut() {
                        vs.push(v.clone());
                    }
                    if let Some(fs) = traj.forces.as_mut() {
                        fs.push(f.clone());
                    }
                }
                traj.termination = Termination::SeparationViolation { time, left, gap, min };
                return Ok(traj);
            }
            Err(e) => return Err(e),
        }
        step += 1;
        t = step as f64 * params.dt;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcefield::PairForceParams;
    use crate::wavecore::Mode;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    const LAMBDA: f64 = 2.0 * PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_splitter_is_pushed_downstream() {
        let sys = ChainSystem::uniform(1, c(0.1), vec![Mode::from_left("y", 1.0, 1.0)]).unwrap();
        let p = DynamicsParams::overdamped(0.1, 0.1, 5.0);
        let tr = evolve(&sys, &[0.0], None, &p).unwrap();
        assert!(tr.positions.windows(2).all(|w| w[1][0] > w[0][0]));
        // constant force 2 zeta^2/(1+zeta^2), velocity F/mu
        let f = 2.0 * 0.01 / 1.01;
        assert_abs_diff_eq!(tr.final_positions()[0], f / 0.1 * 5.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_coupling_keeps_positions() {
        let sys = ChainSystem::uniform(3, c(0.0), vec![Mode::from_left("y", 1.0, 1.0)]).unwrap();
        let x0 = [0.0, 1.0, 2.0];
        let x = step_overdamped(&sys, &x0, &DynamicsParams::overdamped(1.0, 0.1, 1.0), 0.0).unwrap();
        assert_eq!(x, x0);
    }

    #[test]
    fn free_particle_velocity_decays_exponentially() {
        let sys = ChainSystem::uniform(2, c(0.0), vec![Mode::from_left("y", 1.0, 1.0)]).unwrap();
        let mut p = DynamicsParams::newtonian(2.0, 0.5, 0.01, 4.0);
        p.min_separation = 0.0;
        let tr = evolve(&sys, &[0.0, 10.0], Some(&[1.0, -0.3]), &p).unwrap();
        let v = tr.velocities.as_ref().unwrap().last().unwrap();
        let decay = (-0.5 * 4.0 / 2.0f64).exp();
        assert_abs_diff_eq!(v[0], decay, epsilon = 1e-9);
        assert_abs_diff_eq!(v[1], -0.3 * decay, epsilon = 1e-9);
    }

    #[test]
    fn stable_pair_barely_moves() {
        let p = PairForceParams::new(1.0, 1.0, 1.0, 0.01, 1.0);
        let sys = p.system().unwrap();
        let x0 = [0.0, 3.0 * LAMBDA / 8.0];
        let x = step_overdamped(&sys, &x0, &DynamicsParams::overdamped(2e-4, 0.1, 1.0), 0.0).unwrap();
        // relative motion stays at the size of the O(zeta^3) residual force
        assert!(((x[1] - x[0]) - (x0[1] - x0[0])).abs() < 1e-2);
    }

    #[test]
    fn overdamped_pair_relaxes_to_stationary_gap() {
        let p = PairForceParams::new(1.0, 1.0, 1.0, 0.01, 1.0);
        let sys = p.system().unwrap();
        let mut params = DynamicsParams::overdamped(2e-4, 0.1, 400.0);
        params.capture_every = 100;
        let tr = evolve(&sys, &[0.0, 0.3 * LAMBDA], None, &params).unwrap();
        assert_eq!(tr.termination, Termination::ForceTolerance);
        let gap = tr.final_gaps()[0];
        assert!((gap - 3.0 * LAMBDA / 8.0).abs() < 3e-3 * LAMBDA, "gap {}", gap / LAMBDA);
        let f = sys.forces(tr.final_positions()).unwrap();
        assert!((f[0] - f[1]).abs() < 10.0 * params.force_tol);
    }

    #[test]
    fn rk4_is_fourth_order() {
        // frozen two-splitter benchmark, reference from a much finer step
        let sys = PairForceParams::new(1.0, 1.0, 1.2, 0.05, 1.0).system().unwrap();
        let run = |dt: f64| {
            let mut p = DynamicsParams::overdamped(0.01, dt, 4.0);
            p.force_tol = 0.0;
            evolve(&sys, &[0.0, 1.7], None, &p).unwrap().final_positions().to_vec()
        };
        let reference = run(1e-3);
        let e1 = (run(0.1)[1] - reference[1]).abs();
        let e2 = (run(0.05)[1] - reference[1]).abs();
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn separation_violation_returns_partial_trajectory() {
        // two splitters in a strong standing wave pulled toward the same node
        let sys = ChainSystem::uniform(2, c(0.5), vec![Mode::from_left("y", 1.0, 1.0)]).unwrap();
        let mut p = DynamicsParams::newtonian(1.0, 0.0, 0.01, 100.0);
        p.min_separation = 0.1;
        let tr = evolve(&sys, &[0.0, 0.5], Some(&[2.0, 0.0]), &p).unwrap();
        assert!(tr.is_partial());
        assert!(matches!(tr.check(), Err(Error::SeparationViolation { .. })));
        assert!(tr.positions.iter().all(|x| x[1] - x[0] >= 0.1));
    }

    #[test]
    fn stiff_newtonian_limit_follows_overdamped() {
        let sys = PairForceParams::new(1.0, 1.0, 1.0, 0.05, 1.0).system().unwrap();
        let mu = 0.05;
        let t_end = 5.0;
        let mut od = DynamicsParams::overdamped(mu, 0.05, t_end);
        od.force_tol = 0.0;
        let reference = evolve(&sys, &[0.0, 1.9], None, &od).unwrap();
        let gap = |tr: &Trajectory| tr.final_gaps()[0];
        let err = |m: f64| {
            let p = DynamicsParams::newtonian(m, mu, 0.01 * m / mu, t_end);
            let p = DynamicsParams { dt: p.dt.min(0.05), ..p };
            (gap(&evolve(&sys, &[0.0, 1.9], None, &p).unwrap()) - gap(&reference)).abs()
        };
        let (e1, e2) = (err(1e-2), err(1e-3));
        assert!(e2 < e1, "{e1} {e2}");
        assert!(e2 < 1e-2);
    }

    #[test]
    fn com_velocity_of_uniform_drift() {
        let tr = Trajectory {
            times: (0..20).map(|i| i as f64).collect(),
            positions: (0..20).map(|i| vec![0.5 * i as f64, 1.0 + 0.5 * i as f64]).collect(),
            velocities: None,
            forces: None,
            intensity: Vec::new(),
            termination: Termination::TimeLimit,
            residual: 0.0,
        };
        assert_abs_diff_eq!(tr.com_velocity().unwrap(), 0.5, epsilon = 1e-12);
        let mut s = String::new();
        tr.write_csv(&mut s).unwrap();
        assert!(s.starts_with("t,x_1,x_2\n"));
        assert_eq!(s.lines().count(), 21);
    }

    #[test]
    fn intensity_snapshots_are_captured() {
        let sys = ChainSystem::uniform(2, c(0.1), vec![Mode::from_left("y", 1.0, 1.0)]).unwrap();
        let mut p = DynamicsParams::overdamped(1.0, 0.1, 1.0);
        p.intensity = Some(IntensityCapture {
            xs: vec![-1.0, 0.5, 3.0],
            every: 5,
        });
        let tr = evolve(&sys, &[0.0, 1.0], None, &p).unwrap();
        assert_eq!(tr.intensity.len(), 3);
        let mut s = String::new();
        tr.write_intensity_csv(&mut s).unwrap();
        assert_eq!(s.lines().count(), 1 + 9);
    }

    #[test]
    fn parameter_validation() {
        let sys = ChainSystem::uniform(1, c(0.1), vec![Mode::from_left("y", 1.0, 1.0)]).unwrap();
        let bad = DynamicsParams::overdamped(0.0, 0.1, 1.0);
        assert!(evolve(&sys, &[0.0], None, &bad).unwrap_err().is_input_error());
        let bad = DynamicsParams::overdamped(1.0, -0.1, 1.0);
        assert!(evolve(&sys, &[0.0], None, &bad).is_err());
    }

    fn synthetic() -> Trajectory {
        let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        let positions = times.iter().map(|t| vec![0.3 * t.sin(), 5.0 + 0.1 * (2.0 * t).cos()]).collect();
        let velocities = times.iter().map(|t| vec![0.3 * t.cos(), -0.2 * (2.0 * t).sin()]).collect();
        Trajectory {
            times,
            positions,
            velocities: Some(velocities),
            forces: None,
            intensity: Vec::new(),
            termination: Termination::SeparationViolation {
                time: 20.0,
                left: 0,
                gap: 2.0 * PI,
                min: 4.0 * PI,
            },
            residual: 0.0,
        }
    }

    #[test]
    fn oscillation_amplitudes_are_half_peak_to_peak() {
        let a = synthetic().oscillation_amplitudes(0.0, 20.0);
        assert_abs_diff_eq!(a[0], 0.3, epsilon = 1e-3);
        assert_abs_diff_eq!(a[1], 0.1, epsilon = 1e-3);
        assert_eq!(synthetic().oscillation_amplitudes(30.0, 40.0), vec![0.0, 0.0]);
    }

    #[test]
    fn mean_kinetic_energy_averages_window() {
        let ke = synthetic().mean_kinetic_energy(2.0, 0.0, 20.0).unwrap();
        // <cos^2> = 1/2 over many periods
        assert_abs_diff_eq!(ke[0], 0.09 / 2.0, epsilon = 2e-3);
        assert_abs_diff_eq!(ke[1], 0.04 / 2.0, epsilon = 2e-3);
        assert!(synthetic().mean_kinetic_energy(2.0, 30.0, 40.0).is_none());
    }

    #[test]
    fn length_unit_rescales_lengths_only() {
        let tr = synthetic().in_length_unit(2.0 * PI);
        assert_eq!(tr.times, synthetic().times);
        assert_abs_diff_eq!(tr.positions[0][1], 5.1 / (2.0 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(tr.velocities.as_ref().unwrap()[0][0], 0.3 / (2.0 * PI), epsilon = 1e-15);
        match tr.termination {
            Termination::SeparationViolation { gap, min, .. } => assert_eq!((gap, min), (1.0, 2.0)),
            _ => panic!("termination changed"),
        }
    }
}
