//! Decay of the quenched mixing statistic
//!   E [ E_y[(1_{Γ^ε}(ξ_θ) - κ) g(ξ_θ)]² ] ~ ε^{d/2},
//! where Γ^ε = √ε Γ. The inner Brownian expectation is a quadrature of the
//! Gaussian density against field membership sampled on a grid; the grid
//! origin is jittered per realization, which makes the Riemann sum unbiased,
//! and the outer average runs over fresh field realizations.

use super::{mean_and_se, Cell, ExperimentResult, Timer};
use crate::error::{Error, Result};
use crate::obstacles::{FieldView, ObstacleField, ShapeLaw};
use crate::quad::linear_fit;
use crate::rng::{mix, Stream};
use crate::testfn::TestFunction;

#[derive(Clone, Debug)]
pub struct MixingParams {
    pub dim: usize,
    pub theta: f64,
    pub g: TestFunction,
    pub eps_list: Vec<f64>,
    pub field_realizations: u64,
    /// Starting point y of the Brownian motion (first coordinate; the rest 0).
    pub y: f64,
    pub shape: ShapeLaw,
    /// Grid spacing = √ε r0 / grid_factor.
    pub grid_factor: f64,
    pub seed: u64,
    pub threads: usize,
}

impl MixingParams {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > 2 {
            return Err(Error::config("mixing_decay supports d in {1, 2}"));
        }
        if !(self.theta > 0.0) {
            return Err(Error::config("theta must be > 0"));
        }
        if self.eps_list.len() < 2 {
            return Err(Error::config("need at least two epsilon values"));
        }
        let lo = self.eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.eps_list.iter().cloned().fold(0.0f64, f64::max);
        if hi / lo < 99.0 {
            return Err(Error::config("epsilon list must span at least two decades"));
        }
        if self.field_realizations == 0 {
            return Err(Error::config("need at least one field realization"));
        }
        Ok(())
    }
}

pub fn mixing_decay(params: &MixingParams) -> Result<ExperimentResult> {
    params.validate()?;
    let timer = Timer::start();
    let d = params.dim;
    let r0 = params.shape.r0();
    let kappa = crate::obstacles::kappa(&params.shape, d);
    let theta = params.theta;
    let window = 5.5 * theta.sqrt();
    let norm = 1.0 / (2.0 * std::f64::consts::PI * theta).powf(d as f64 / 2.0);

    let mut result = ExperimentResult::new(
        "mixing",
        vec!["epsilon", "grid_h", "realizations", "stat", "stat_se"],
    );
    result.master_seed = params.seed;

    let mut log_eps = Vec::new();
    let mut log_stat = Vec::new();

    for (e_idx, &eps) in params.eps_list.iter().enumerate() {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::config(format!("epsilon {eps} must be in (0, 1)")));
        }
        let root = eps.sqrt();
        let h = root * r0 / params.grid_factor;
        let m = ((2.0 * window) / h).ceil() as usize;

        let one_realization = |i: u64| -> crate::error::Result<f64> {
            let field = ObstacleField::new(params.shape.clone(), d, mix(params.seed, i))?;
            let mut view = FieldView::new(&field);
            let mut jitter_stream =
                Stream::from_key(mix(mix(params.seed, 0x6a69_7474_6572), mix(i, e_idx as u64)));
            let jit: [f64; 2] = [jitter_stream.u01(), jitter_stream.u01()];

            let mut integral = 0.0;
            if d == 1 {
                let lo = params.y - window;
                for j in 0..m {
                    let x = lo + (j as f64 + jit[0]) * h;
                    let dx = x - params.y;
                    let weight = norm * (-dx * dx / (2.0 * theta)).exp() * params.g.eval(&[x]);
                    let ind = view.contains(&[x / root]) as u64 as f64;
                    integral += weight * (ind - kappa);
                }
                integral *= h;
            } else {
                let lo0 = params.y - window;
                let lo1 = -window;
                for j0 in 0..m {
                    let x0 = lo0 + (j0 as f64 + jit[0]) * h;
                    let d0 = x0 - params.y;
                    let w0 = (-d0 * d0 / (2.0 * theta)).exp();
                    if w0 < 1e-18 {
                        continue;
                    }
                    for j1 in 0..m {
                        let x1 = lo1 + (j1 as f64 + jit[1]) * h;
                        let w = w0 * (-x1 * x1 / (2.0 * theta)).exp();
                        let g = params.g.eval(&[x0, x1]);
                        let ind = view.contains(&[x0 / root, x1 / root]) as u64 as f64;
                        integral += w * g * (ind - kappa);
                    }
                }
                integral *= norm * h * h;
            }
            Ok(integral * integral)
        };

        let sq_values: Vec<f64> = if params.threads <= 1 {
            (0..params.field_realizations).map(one_realization).collect::<crate::error::Result<_>>()?
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(params.threads)
                .build()
                .map_err(|e| Error::Sim(format!("thread pool: {e}")))?;
            pool.install(|| {
                use rayon::prelude::*;
                (0..params.field_realizations)
                    .into_par_iter()
                    .map(one_realization)
                    .collect::<crate::error::Result<_>>()
            })?
        };

        let (stat, se) = mean_and_se(&sq_values);
        result.push_row(vec![
            Cell::F(eps),
            Cell::F(h),
            Cell::U(params.field_realizations),
            Cell::F(stat),
            Cell::F(se),
        ]);
        if stat > 0.0 {
            log_eps.push(eps.ln());
            log_stat.push(stat.ln());
        }
    }

    let slope = if log_eps.len() >= 2 {
        let (_, s) = linear_fit(&log_eps, &log_stat);
        Some(s)
    } else {
        None
    };
    result.set_summary("kappa", serde_json::json!(kappa));
    result.set_summary("slope", serde_json::json!(slope));
    result.set_summary("expected_slope", serde_json::json!(d as f64 / 2.0));
    result.wall_seconds = timer.seconds();
    Ok(result)
}
