//! The three benchmark models: two weakly coupled components (Model 1), the
//! same with stronger coupling (Model 2), and a three-component model with
//! an optical-lattice term in the third trap (Model 3).

use rotbec::optim::RunOptions;
use rotbec::{ModelSpec, Potential, Rect};

use crate::{CliError, ConfigFile, Result};

pub const NAMES: [&str; 3] = ["model1", "model2", "model3"];

/// Inner tolerance for the three-component model; the coupled inner solves
/// there stay cheap only with a loose relative tolerance.
pub const MODEL3_TOL_CG: f64 = 1e-1;

/// `½((sx x)² + (sy y)²)` scaled by `f`.
fn scaled_harmonic(f: f64, sx: f64, sy: f64) -> Potential {
    Potential::harmonic(f * sx * sx, f * sy * sy)
}

fn model1() -> ModelSpec {
    ModelSpec {
        domain: Rect::square(10.0),
        elements_per_dir: 64,
        quad_order: rotbec::model::DEFAULT_QUAD_ORDER,
        masses: vec![2.0, 1.0],
        frequencies: vec![-1.0, -1.2],
        potentials: vec![scaled_harmonic(0.75, 0.8, 1.2), scaled_harmonic(0.5, 1.2, 0.9)],
        interaction: vec![vec![120.0, 20.0], vec![20.0, 100.0]],
        assumption_margin: vec![0.05; 2],
    }
}

fn model3() -> ModelSpec {
    ModelSpec {
        domain: Rect::square(10.0),
        elements_per_dir: 64,
        quad_order: rotbec::model::DEFAULT_QUAD_ORDER,
        masses: vec![2.0, 1.0, 3.0],
        frequencies: vec![-1.0, -1.1, -1.2],
        potentials: vec![
            scaled_harmonic(0.5, 0.9, 1.1),
            scaled_harmonic(0.5, 1.1, 0.9),
            Potential { a: 0.5, b: 0.5, c: 1.0, d: 0.5, alpha: 1.0, beta: 1.0 },
        ],
        interaction: vec![vec![100.0, 40.0, 50.0], vec![40.0, 125.0, 60.0], vec![50.0, 60.0, 150.0]],
        assumption_margin: vec![0.05; 3],
    }
}

pub fn preset(name: &str) -> Result<ConfigFile> {
    let model = match name {
        "model1" => model1(),
        "model2" => {
            let mut m = model1();
            m.interaction = vec![vec![120.0, 60.0], vec![60.0, 100.0]];
            m
        }
        "model3" => model3(),
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset {other:?}; expected one of {}",
                NAMES.join(", ")
            )))
        }
    };
    let mut run = RunOptions::default();
    if name == "model3" {
        run.tol_cg = MODEL3_TOL_CG;
    }
    Ok(ConfigFile { model, run })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model1_parameters() {
        let c = preset("model1").unwrap();
        let m = &c.model;
        assert_eq!(m.interaction, vec![vec![120.0, 20.0], vec![20.0, 100.0]]);
        assert_eq!(m.masses, vec![2.0, 1.0]);
        assert_eq!(m.frequencies, vec![-1.0, -1.2]);
        // ¾((0.8x)² + (1.2y)²) and ½((1.2x)² + (0.9y)²).
        let v = &m.potentials;
        assert!((v[0].a - 0.48).abs() < 1e-15 && (v[0].b - 1.08).abs() < 1e-15);
        assert!((v[1].a - 0.72).abs() < 1e-15 && (v[1].b - 0.405).abs() < 1e-15);
        assert_eq!(m.domain, Rect::square(10.0));
        assert_eq!(m.elements_per_dir, 64);
        assert_eq!(c.run.stop_residual, 1e-14);
        assert_eq!(c.run.tol_cg, 1e-8);
        assert_eq!(c.run.warm_start_residual, Some(1e-2));
    }

    #[test]
    fn model2_differs_only_in_coupling() {
        let a = preset("model1").unwrap();
        let mut b = preset("model2").unwrap();
        assert_eq!(b.model.interaction, vec![vec![120.0, 60.0], vec![60.0, 100.0]]);
        b.model.interaction = a.model.interaction.clone();
        assert_eq!(a, b);
    }

    #[test]
    fn model3_parameters() {
        let c = preset("model3").unwrap();
        let m = &c.model;
        assert_eq!(m.p(), 3);
        assert_eq!(m.frequencies[2], -1.2);
        assert_eq!(m.masses, vec![2.0, 1.0, 3.0]);
        let v3 = m.potentials[2];
        assert_eq!((v3.c, v3.d, v3.alpha, v3.beta), (1.0, 0.5, 1.0, 1.0));
        assert_eq!((v3.a, v3.b), (0.5, 0.5));
        assert!((m.potentials[0].a - 0.405).abs() < 1e-15 && (m.potentials[0].b - 0.605).abs() < 1e-15);
        assert_eq!(m.interaction[1], vec![40.0, 125.0, 60.0]);
        assert_eq!(c.run.tol_cg, MODEL3_TOL_CG);
    }

    #[test]
    fn presets_validate_and_unknown_fails() {
        for name in NAMES {
            preset(name).unwrap().model.validate().unwrap();
        }
        assert!(matches!(preset("model4"), Err(CliError::Usage(_))));
    }
}
