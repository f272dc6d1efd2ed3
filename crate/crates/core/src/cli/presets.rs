//! Built-in scenarios reproducing the standard studies.

use serde_json::{json, Value};

use super::scenario::ScenarioFile;
use crate::error::{invalid, Result};

/// Preset names with the command each one is meant for.
pub const PRESETS: &[(&str, &str)] = &[
    ("pair_forces", "forces"),
    ("pair_sweep", "sweep"),
    ("triple_zero_lines", "zerolines"),
    ("chain_order", "relax"),
    ("chain_order_imbalanced", "relax"),
    ("chain_order_bichromatic", "relax"),
    ("lattice_modes", "modes"),
    ("imbalance_sweep", "sweep"),
    ("design_mask", "design"),
    ("perturbation_forces", "forces"),
    ("correlated_oscillation", "evolve"),
    ("resonant_transfer", "evolve"),
];

fn pair_modes(k_z: f64, p: f64) -> Value {
    json!([
        {"label": "y", "k": 1.0, "intensity_left": 1.0},
        {"label": "z", "k": k_z, "intensity_right": p}
    ])
}

fn chain_relax(p: f64, k_z: f64, prefix: &str) -> Value {
    json!({
        "version": 1,
        "chain": {"generator": "equidistant", "n": 10, "start": 0.0, "spacing": 0.5, "zeta": [0.01, 0.0]},
        "modes": pair_modes(k_z, p),
        "dynamics": {
            "regime": "overdamped", "friction": 2e-4, "dt": 0.04, "t_end": 20000.0,
            "force_tol": 1e-10, "stop": "auto",
            "intensity_samples": {"start": -0.5, "stop": 5.5, "steps": 241},
            "intensity_every": 2500
        },
        "output": {"format": "csv", "prefix": prefix, "capture_every": 250}
    })
}

fn lattice_common() -> Value {
    json!({
        "n": 4, "zeta": 0.1, "spacing_fraction": 0.23,
        "i_l": 1.0, "i_r": 1.0, "k_p": 1.0, "i_p": 1.0, "zeta_p": 0.1
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

fn preset_value(name: &str) -> Option<Value> {
    Some(match name {
        "pair_forces" => json!({
            "version": 1,
            "chain": {"generator": "explicit", "positions": [0.0, 0.375], "zeta": [0.01, 0.0]},
            "modes": pair_modes(1.0, 1.0),
            "probe": {"d": {"start": 0.001, "stop": 0.999, "steps": 999}},
            "output": {"prefix": "pair_forces"}
        }),
        "pair_sweep" => json!({
            "version": 1,
            "chain": {"generator": "explicit", "positions": [0.0, 0.3], "zeta": [0.01, 0.0]},
            "modes": pair_modes(1.0, 1.0),
            "dynamics": {"regime": "overdamped", "friction": 2e-4, "dt": 0.02, "t_end": 400.0, "force_tol": 1e-10},
            "sweep": {"parameters": [
                {"path": "/modes/1/k", "start": 0.5, "stop": 2.0, "steps": 31},
                {"path": "/modes/1/intensity_right", "start": 0.5, "stop": 2.0, "steps": 31}
            ]},
            "output": {"prefix": "pair_sweep", "capture_every": 5000}
        }),
        "triple_zero_lines" => json!({
            "version": 1,
            "chain": {"generator": "explicit", "positions": [0.0, 0.3, 0.6], "zeta": [0.1, 0.0]},
            "modes": pair_modes(1.1, 1.0),
            "grid": {
                "d1": {"start": 0.02, "stop": 1.22, "steps": 241},
                "d2": {"start": 0.02, "stop": 1.22, "steps": 241}
            },
            "output": {"prefix": "triple_zero_lines"}
        }),
        "chain_order" => chain_relax(1.0, 1.0, "chain_order"),
        "chain_order_imbalanced" => chain_relax(1.3, 1.0, "chain_order_imbalanced"),
        "chain_order_bichromatic" => chain_relax(1.0, 1.3, "chain_order_bichromatic"),
        "lattice_modes" => json!({
            "version": 1,
            "units": {"length": "inverse_wavenumber"},
            "lattice": {
                "n": 2, "zeta": 0.1, "k": 1.0, "i_l": 1.0, "i_r": 1.0, "k_p": 1.0, "i_p": 0.0, "zeta_p": 0.1,
                "i_p_sweep": {"start": 0.0, "stop": 1.0, "steps": 21}
            },
            "output": {"prefix": "lattice_modes"}
        }),
        "imbalance_sweep" => json!({
            "version": 1,
            "chain": {"generator": "equidistant", "n": 4, "start": 0.0, "spacing": 0.45, "zeta": [0.01, 0.0]},
            "modes": pair_modes(1.0, 1.0),
            "dynamics": {"regime": "overdamped", "friction": 2e-4, "dt": 0.05, "t_end": 4000.0, "force_tol": 1e-10},
            "sweep": {"parameters": [
                {"path": "/modes/1/intensity_right", "start": 0.5, "stop": 1.5, "steps": 21}
            ]},
            "output": {"prefix": "imbalance_sweep", "capture_every": 1000}
        }),
        "design_mask" => json!({
            "version": 1,
            "design": {"d": {"start": 0.005, "stop": 0.995, "steps": 199}, "k_y": 1.0, "zeta": 0.01, "kz_ratio": 1.4},
            "output": {"prefix": "design_mask"}
        }),
        "perturbation_forces" => json!({
            "version": 1,
            "units": {"length": "inverse_wavenumber"},
            "lattice": lattice_common(),
            "output": {"prefix": "perturbation_forces"}
        }),
        "correlated_oscillation" => json!({
            "version": 1,
            "units": {"length": "inverse_wavenumber"},
            "lattice": merge(lattice_common(), json!({
                "start": "sites", "displacement": [0.01, 0.01, 0.01, 0.01], "compare_baseline": true
            })),
            "dynamics": {"regime": "newtonian", "mass": 1.0, "friction": 0.01, "dt": 0.05, "t_end": 2000.0},
            "output": {"prefix": "correlated_oscillation", "capture_every": 10}
        }),
        "resonant_transfer" => json!({
            "version": 1,
            "units": {"length": "inverse_wavenumber"},
            "lattice": {
                "n": 3, "zeta": 0.01, "k": 0.99, "i_l": 20.0, "i_r": 20.0, "k_p": 1.0, "i_p": 1.0, "zeta_p": 0.1,
                "start": "equilibrium", "displacement": [0.0, 0.0, 0.05], "compare_baseline": true
            },
            "dynamics": {"regime": "newtonian", "mass": 1.0, "friction": 0.01, "dt": 0.05, "t_end": 2000.0},
            "output": {"prefix": "resonant_transfer", "capture_every": 10}
        }),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<ScenarioFile> {
    let value = preset_value(name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        invalid(format!("unknown preset {name:?} (known: {})", names.join(", ")))
    })?;
    ScenarioFile::from_value(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_perturbation_scenarios, PerturbationKind};

    #[test]
    fn every_preset_validates() {
        for (name, _) in PRESETS {
            preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("no_such_preset").is_err());
    }

    #[test]
    fn preset_json_round_trips() {
        for (name, _) in PRESETS {
            let s = preset(name).unwrap();
            assert_eq!(ScenarioFile::from_json(&s.to_json()).unwrap(), s);
        }
    }

    #[test]
    fn lattice_presets_match_library_builders() {
        for (name, kind) in [
            ("correlated_oscillation", PerturbationKind::CorrelatedOscillation),
            ("resonant_transfer", PerturbationKind::ResonantTransfer),
        ] {
            let s = preset(name).unwrap();
            let built = build_perturbation_scenarios(kind).unwrap();
            let l = s.lattice_scenario().unwrap();
            assert!((l.k - built.scenario.k).abs() < 1e-14, "{name}");
            assert_eq!(l.zeta_p, built.scenario.zeta_p);
            let d = s.dynamics().unwrap();
            assert_eq!((d.mass, d.friction, d.dt, d.t_end), (1.0, 0.01, 0.05, 2000.0));
        }
    }
}
