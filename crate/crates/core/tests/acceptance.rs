use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use lightlattice::cli::{run, Command, Context};
use lightlattice::dynamics::{evolve, DynamicsParams, Termination};
use lightlattice::equilibria::{
    find_equilibrium, design_wavenumber, linearize_pair_in_lattice, DesignOptions, Stability,
};
use lightlattice::forcefield::{forces_exact, pair_forces_approx, ChainSystem, PairForceParams};
use lightlattice::lattice::{
    build_perturbation_scenarios, lattice_constant, LatticeScenario, PerturbationKind,
};
use lightlattice::wavecore::{reflection_transmission, solve_fields, total_transfer_matrix, Mode, ScattererChain};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LAMBDA: f64 = TAU;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn pair_system(zeta: f64, p: f64, k_z: f64) -> ChainSystem {
    PairForceParams::new(p, 1.0, k_z, zeta, 1.0).system().unwrap()
}

fn chain_system(n: usize, zeta: f64, p: f64, k_z: f64) -> ChainSystem {
    let modes = vec![Mode::from_left("y", 1.0, 1.0), Mode::from_right("z", k_z, p)];
    ChainSystem::uniform(n, Complex64::new(zeta, 0.0), modes).unwrap()
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

fn zero_crossings(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect();
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (fa, fb) = (f(w[0]), f(w[1]));
        if fa == 0.0 || (fa > 0.0) != (fb > 0.0) {
            out.push(bisect(&f, w[0], w[1]));
        }
    }
    out
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn relax(sys: &ChainSystem, n: usize, dt: f64) -> lightlattice::dynamics::Trajectory {
    let x0: Vec<f64> = (0..n).map(|j| j as f64 * 0.5 * LAMBDA).collect();
    let mut p = DynamicsParams::overdamped(2e-4, dt, 50_000.0);
    p.capture_every = 100;
    evolve(sys, &x0, None, &p).unwrap()
}

fn c1_pair_equilibrium() -> Verdict {
    let sys = pair_system(0.01, 1.0, 1.0);
    let sys_ref = &sys;
    let f = |j: usize| move |d: f64| sys_ref.forces(&[0.0, d]).unwrap()[j];
    let targets = [LAMBDA / 8.0, 3.0 * LAMBDA / 8.0];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for j in 0..2 {
        let zs = zero_crossings(f(j), 0.01 * LAMBDA, 0.49 * LAMBDA, 480);
        if zs.len() != 2 {
            return verdict(false, format!("F{} has {} zeros in (0, lambda/2)", j + 1, zs.len()));
        }
        for (z, t) in zs.iter().zip(&targets) {
            worst = worst.max((z - t).abs() / LAMBDA);
        }
    }
    ok &= worst < 1e-6;
    let class = |d: f64| find_equilibrium(&sys, &[0.0, d], true).map(|r| r.classification);
    let stable = matches!(class(targets[1]), Ok(Stability::Stable));
    let unstable = matches!(class(targets[0]), Ok(Stability::Unstable));
    verdict(
        ok && stable && unstable,
        format!("max |d0 - target| = {worst:.3e} lambda; 3l/8 stable {stable}, l/8 unstable {unstable}"),
    )
}

fn c2_approximation_order() -> Verdict {
    let sup = |zeta: f64| {
        let p = PairForceParams::new(1.0, 1.0, 1.0, zeta, 1.0);
        let sys = p.system().unwrap();
        (1..1000)
            .map(|i| (0.05 + 0.9 * i as f64 / 1000.0) * LAMBDA)
            .map(|d| {
                let e = sys.forces(&[0.0, d]).unwrap();
                let (a1, a2) = pair_forces_approx(d, &p);
                (e[0] - a1).abs().max((e[1] - a2).abs())
            })
            .fold(0.0, f64::max)
    };
    let (e2, e1) = (sup(0.02), sup(0.01));
    let ratio = e2 / e1;
    verdict((6.0..=10.0).contains(&ratio), format!("error ratio {ratio:.3} ({e2:.3e} / {e1:.3e})"))
}

fn c3_conservation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut det_err, mut unit_err, mut tele_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=20);
        let mut x = Vec::with_capacity(n);
        let mut acc = rng.gen_range(-5.0..5.0);
        for _ in 0..n {
            acc += rng.gen_range(0.01..10.0);
            x.push(acc);
        }
        let zeta: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(0.0..=0.2), 0.0)).collect();
        let chain = ScattererChain::new(x, zeta).unwrap();
        let mode = Mode::new("m", rng.gen_range(0.1..5.0))
            .with_zeta_scale(1.0)
            .with_left(rng.gen_range(0.0..5.0), rng.gen_range(-PI..PI))
            .with_right(rng.gen_range(0.0..5.0), rng.gen_range(-PI..PI));
        det_err = det_err.max((total_transfer_matrix(&chain, &mode).unwrap().det() - 1.0).norm());
        let s = reflection_transmission(&chain, &mode).unwrap();
        unit_err = unit_err.max((s.r.norm_sqr() + s.t.norm_sqr() - 1.0).abs());
        let sol = solve_fields(&chain, std::slice::from_ref(&mode)).unwrap();
        let q = &sol.modes[0].quads;
        let flux = 0.5 * (q[0].a.norm_sqr() + q[0].b.norm_sqr() - q[n - 1].c.norm_sqr() - q[n - 1].d.norm_sqr());
        let total: f64 = forces_exact(&chain, &[mode]).unwrap().total.iter().sum();
        tele_err = tele_err.max((total - flux).abs());
    }
    verdict(
        det_err < 1e-12 && unit_err < 1e-10 && tele_err < 1e-10,
        format!("det {det_err:.1e}, |r|^2+|t|^2 {unit_err:.1e}, telescoping {tele_err:.1e}"),
    )
}

fn c4_self_ordering() -> Verdict {
    let d_sw = lattice_constant(0.01, 0.0).unwrap();
    let mut last = f64::INFINITY;
    let mut monotone = true;
    let mut equidistant = true;
    let mut parts = Vec::new();
    for n in [4usize, 10, 20, 30] {
        let sys = chain_system(n, 0.01, 1.0, 1.0);
        let traj = relax(&sys, n, 0.6 / n as f64);
        let gaps = traj.final_gaps();
        let converged = traj.termination == Termination::ForceTolerance;
        let gap = gaps[(n - 1) / 2];
        let dev = (gap - d_sw).abs();
        monotone &= converged && dev < last;
        last = dev;
        if n == 10 {
            let s = spread(&gaps) / LAMBDA;
            equidistant = converged && s < 1e-6 && gaps.iter().all(|g| *g < 0.5 * LAMBDA);
            parts.push(format!("N=10 spread {s:.1e} lambda"));
        }
        parts.push(format!("N={n} gap {:.6} lambda", gap / LAMBDA));
    }
    verdict(
        equidistant && monotone,
        format!("{}; d_sw {:.6} lambda", parts.join(", "), d_sw / LAMBDA),
    )
}

fn c5_asymmetric_ordering() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p, k_z, sign) in [("P=1.3", 1.3, 1.0, Some(-1.0)), ("kz/ky=1.3", 1.0, 1.3, None)] {
        let sys = chain_system(10, 0.01, p, k_z);
        let traj = relax(&sys, 10, 0.04);
        let converged = traj.termination == Termination::ForceTolerance;
        let gaps = traj.final_gaps();
        let s = spread(&gaps) / LAMBDA;
        let stable = find_equilibrium(&sys, traj.final_positions(), true)
            .map(|r| r.classification == Stability::Stable)
            .unwrap_or(false);
        let v = traj.com_velocity().unwrap_or(0.0);
        let drift_ok = v.abs() > 1e-6 && sign.map_or(true, |sg: f64| v * sg > 0.0);
        pass &= converged && stable && s > 1e-4 && drift_ok;
        parts.push(format!("{name}: stable {stable}, spread {s:.2e} lambda, v_com {v:+.3e}"));
    }
    verdict(pass, parts.join("; "))
}

fn c6_design_round_trip() -> Verdict {
    let zeta = 0.01;
    let mut targets = Vec::new();
    for i in 1..2000 {
        let d = i as f64 / 2000.0 * 0.5 * LAMBDA;
        let opts = DesignOptions::band(1.1 * PI / d);
        if let Ok(c) = design_wavenumber(d, 1.0, zeta, &opts) {
            let lowest: Vec<_> = c.into_iter().filter(|c| c.n == 0 && c.physical).collect();
            if !lowest.is_empty() {
                targets.push(lowest);
            }
        }
    }
    if targets.len() < 50 {
        return verdict(false, format!("only {} physical targets", targets.len()));
    }
    let step = targets.len() as f64 / 50.0;
    let mut worst: f64 = 0.0;
    let (mut over, mut no_stable) = (0, 0);
    let mut weakest_failure = f64::INFINITY;
    for i in 0..50 {
        let cands = &targets[(i as f64 * step) as usize];
        let mut bad = false;
        for c in cands {
            let f = c.f1.abs().max(c.f2.abs());
            worst = worst.max(f);
            if f >= 1e-4 {
                bad = true;
                weakest_failure = weakest_failure.min(zeta * c.k_z);
            }
        }
        over += bad as usize;
        no_stable += !cands.iter().any(|c| c.stable) as usize;
    }
    let note = if over > 0 {
        format!(" (from zeta k_z/k_y = {weakest_failure:.3})")
    } else {
        String::new()
    };
    verdict(
        over == 0 && no_stable == 0,
        format!(
            "50 targets, max |F| {worst:.2e} I_y, over tolerance {over}{note}, without a stable branch {no_stable}"
        ),
    )
}

fn c7_linearization() -> Verdict {
    let scenario = LatticeScenario::new(2, 0.1, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap().with_zeta_p(0.1).unwrap();
    let model = linearize_pair_in_lattice(&scenario, 1.0, 1e-4).unwrap();
    let id = model.identities;
    let free = linearize_pair_in_lattice(&scenario.with_perturbation_intensity(0.0), 1.0, 1e-4).unwrap();
    let kappa_eq = (free.kappa1 - free.kappa2).abs() <= 1e-6 * free.kappa1.abs().max(1e-12);

    let omega1 = (free.k_spring / free.mass).sqrt();
    let period = TAU / omega1;
    let base = scenario.with_perturbation_intensity(0.0);
    let eps = 1e-4;
    let x0: Vec<f64> = base.sites.iter().map(|x| x + eps).collect();
    let mut p = DynamicsParams::newtonian(1.0, 0.0, period / 400.0, 11.5 * period);
    p.min_separation = 0.0;
    let traj = evolve(&base.system().unwrap(), &x0, None, &p).unwrap();
    let mean: Vec<f64> = traj
        .positions
        .iter()
        .map(|x| x.iter().zip(&base.sites).map(|(a, s)| a - s).sum::<f64>() / 2.0)
        .collect();
    let mut ups = Vec::new();
    for i in 1..mean.len() {
        if mean[i - 1] < 0.0 && mean[i] >= 0.0 {
            let f = mean[i - 1] / (mean[i - 1] - mean[i]);
            ups.push(traj.times[i - 1] + f * (traj.times[i] - traj.times[i - 1]));
        }
    }
    let measured = if ups.len() >= 2 {
        TAU * (ups.len() - 1) as f64 / (ups[ups.len() - 1] - ups[0])
    } else {
        f64::NAN
    };
    let freq_err = (measured - omega1).abs() / omega1;
    let pass = id.a_u_zero && id.c_eq_w && id.k1p_eq_k3p && kappa_eq && freq_err < 0.01;
    let c = model.constants;
    verdict(
        pass,
        format!(
            "a=u=0 {}, c=w {} (c {:.3e}, w {:.3e}), K1p=K3p {} ({:.3e} vs {:.3e}), kappa1=kappa2 at I_p=0 {kappa_eq}, omega1 {omega1:.5} measured {measured:.5} ({} periods)",
            id.a_u_zero,
            id.c_eq_w,
            c.c,
            c.w,
            id.k1p_eq_k3p,
            c.k1p,
            c.k3p,
            ups.len().saturating_sub(1)
        ),
    )
}

fn c8_perturbation_pattern() -> Verdict {
    let s = build_perturbation_scenarios(PerturbationKind::CorrelatedOscillation).unwrap().scenario;
    let f = s.perturbation_system().unwrap().forces(&s.sites).unwrap();
    let scale = f[0].abs();
    let dev = [(f[0] - f[2]).abs(), (f[0] + f[1]).abs(), (f[0] + f[3]).abs()]
        .into_iter()
        .fold(0.0, f64::max)
        / scale;
    verdict(
        scale > 0.0 && dev < 0.02,
        format!("F_p = [{:.4e}, {:.4e}, {:.4e}, {:.4e}], deviation {:.2}%", f[0], f[1], f[2], f[3], 100.0 * dev),
    )
}

fn c9_correlated_dynamics() -> Verdict {
    let pre = build_perturbation_scenarios(PerturbationKind::CorrelatedOscillation).unwrap();
    let tau = pre.dynamics.mass / pre.dynamics.friction;
    let traj = evolve(&pre.scenario.system().unwrap(), &pre.initial_positions, None, &pre.dynamics).unwrap();
    let t_end = 20.0 * tau;
    let early = traj.oscillation_amplitudes(0.0, tau);
    let late = traj.oscillation_amplitudes(t_end - tau, t_end);
    let grows = |j: usize| late[j] > early[j];
    let pattern = grows(0) && grows(2) && !grows(1) && !grows(3);

    let res = build_perturbation_scenarios(PerturbationKind::ResonantTransfer).unwrap();
    let t = res.dynamics.t_end;
    let a = evolve(&res.scenario.system().unwrap(), &res.initial_positions, None, &res.dynamics).unwrap();
    let b = evolve(&res.baseline.system().unwrap(), &res.baseline_initial_positions, None, &res.dynamics).unwrap();
    let ke = |tr: &lightlattice::dynamics::Trajectory| tr.mean_kinetic_energy(res.dynamics.mass, 0.0, t).unwrap()[0];
    let ratio = ke(&a) / ke(&b);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    verdict(
        pattern && ratio >= 5.0 && !traj.is_partial(),
        format!(
            "amplitudes first tau [{}] -> last tau [{}]; KE ratio splitter 1 {ratio:.1}",
            fmt(&early),
            fmt(&late)
        ),
    )
}

fn c10_determinism() -> Verdict {
    let scenario = lightlattice::cli::preset("imbalance_sweep").unwrap();
    let render = |threads: usize| {
        let ctx = Context {
            scenario: scenario.clone(),
            hash: "determinism".into(),
            threads: Some(threads),
        };
        run(Command::Sweep, &ctx).unwrap().render(&ctx)
    };
    let one = render(1);
    let same = [2, 4, 7].iter().all(|t| render(*t) == one);
    verdict(same, format!("{} file(s), worker counts 1, 2, 4, 7", one.len()))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Verdict); 10] = [
        (1, "pair equilibrium", Duration::from_secs(1), c1_pair_equilibrium),
        (2, "approximation order", Duration::from_secs(5), c2_approximation_order),
        (3, "conservation suite", Duration::from_secs(10), c3_conservation),
        (4, "self-ordering", Duration::from_secs(120), c4_self_ordering),
        (5, "asymmetric ordering", Duration::from_secs(60), c5_asymmetric_ordering),
        (6, "design round trip", Duration::from_secs(30), c6_design_round_trip),
        (7, "linearization", Duration::from_secs(30), c7_linearization),
        (8, "perturbation force pattern", Duration::from_secs(1), c8_perturbation_pattern),
        (9, "correlated dynamics", Duration::from_secs(120), c9_correlated_dynamics),
        (10, "determinism", Duration::from_secs(10), c10_determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed < limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id:>2} {name}: {} [{:.2} s / {} s]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of 10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
