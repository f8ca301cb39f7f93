//! Browser bindings: force coefficient curves, field streamlines and an
//! incremental simulation that the page steps from `requestAnimationFrame`.

use ridgeform::field::DirectionField;
use ridgeform::force::ForceModel;
use ridgeform::output::streamline_set;
use ridgeform::sim::{InitSpec, SimConfig, Simulation};
use wasm_bindgen::prelude::*;

fn js_err(e: ridgeform::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn field_from(name: &str, theta0: f64) -> Result<DirectionField, ridgeform::Error> {
    if name == "homogeneous" {
        Ok(DirectionField::homogeneous(theta0))
    } else {
        DirectionField::preset(name)
    }
}

/// Samples of `[r, f_l, f_s]` on `[0, 0.5]`, flattened.
#[wasm_bindgen]
pub fn coefficient_curves(preset: &str, eta: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let force = ForceModel::preset(preset).and_then(|f| f.with_eta(eta)).map_err(js_err)?;
    let samples = samples.max(2);
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let r = 0.5 * i as f64 / (samples - 1) as f64;
        let c = force.coefficients(r);
        out.extend([r, c.f_l, c.f_s]);
    }
    Ok(out)
}

/// Streamline polylines as `x, y` pairs; a `NaN, NaN` pair ends each line.
#[wasm_bindgen]
pub fn streamlines(field: &str, theta0: f64, seeds_per_side: usize) -> Result<Vec<f64>, JsError> {
    let field = field_from(field, theta0).map_err(js_err)?;
    let mut out = Vec::new();
    for line in streamline_set(&field, seeds_per_side, 0.005, 80) {
        for p in line {
            out.extend([p.x(), p.y()]);
        }
        out.extend([f64::NAN, f64::NAN]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub struct Sim {
    inner: Simulation,
    last_tau: f64,
}

#[wasm_bindgen]
impl Sim {
    #[wasm_bindgen(constructor)]
    pub fn new(force: &str, field: &str, n_particles: usize, eta: f64, dt: f64, seed: u32) -> Result<Sim, JsError> {
        let force = ForceModel::preset(force).and_then(|f| f.with_eta(eta)).map_err(js_err)?;
        let field = field_from(field, std::f64::consts::FRAC_PI_2).map_err(js_err)?;
        let mut config = SimConfig::new(n_particles, f64::MAX, force, field);
        config.dt = dt;
        config.init = InitSpec::Uniform { seed: seed as u64 };
        let inner = Simulation::new(config).map_err(js_err)?;
        Ok(Sim { inner, last_tau: f64::NAN })
    }

    /// Advance `steps` steps and return τ of the last one.
    pub fn advance(&mut self, steps: u32) -> Result<f64, JsError> {
        for _ in 0..steps {
            self.last_tau = self.inner.step().map_err(js_err)?;
        }
        Ok(self.last_tau)
    }

    pub fn time(&self) -> f64 {
        self.inner.state().time
    }

    pub fn tau(&self) -> f64 {
        self.last_tau
    }

    /// Positions as `x, y` pairs.
    pub fn positions(&self) -> Vec<f64> {
        self.inner.state().positions.iter().flat_map(|p| p.to_array()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_have_three_columns() {
        let c = coefficient_curves("bio_harmonic", 1.0, 11).unwrap();
        assert_eq!(c.len(), 33);
        assert_eq!(c[30], 0.5);
    }

    #[test]
    fn streamlines_are_separated() {
        let s = streamlines("homogeneous", 0.0, 3).unwrap();
        assert_eq!(s.iter().filter(|v| v.is_nan()).count(), 2 * 9);
    }

    #[test]
    fn sim_steps() {
        let mut sim = Sim::new("kc_stationary", "delta", 50, 1.0, 0.2, 3).unwrap();
        let tau = sim.advance(5).unwrap();
        assert!(tau.is_finite() && tau > 0.0);
        assert!((sim.time() - 1.0).abs() < 1e-12);
        assert_eq!(sim.positions().len(), 100);
    }
}
