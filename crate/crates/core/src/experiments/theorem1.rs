//! Critical-regime hitting probabilities: R² P(hit of the complement of the
//! R-ball) against the blow-up BVP value u_(κa)(0) on the unit ball, with
//! ε = a/R² along the row list.

use super::{z_score, Cell, ExperimentResult, Timer};
use crate::branching::{hit_probability, Medium, SimConfig, StopRule};
use crate::error::{Error, Result};
use crate::obstacles::ObstacleField;
use crate::offspring::OffspringDistribution;
use crate::pde::{solve_radial_bvp, DEFAULT_LADDER};

#[derive(Clone, Debug)]
pub struct Theorem1Params {
    pub a: f64,
    /// (R, replicates) rows; ε = a/R² per row.
    pub r_list: Vec<(f64, u64)>,
    pub dt: f64,
    pub bridge: bool,
    pub seed: u64,
    pub threads: usize,
}

pub fn theorem1(
    params: &Theorem1Params,
    field: &ObstacleField,
    nu: &OffspringDistribution,
) -> Result<ExperimentResult> {
    if !(params.a > 0.0) {
        return Err(Error::config("theorem1 requires a > 0"));
    }
    if params.r_list.is_empty() {
        return Err(Error::config("theorem1 requires at least one R"));
    }
    let timer = Timer::start();
    let d = field.dim();
    let kappa = field.kappa();
    let sigma2 = nu.sigma2();
    let oracle = solve_radial_bvp(kappa * params.a, sigma2, d, 1.0, &DEFAULT_LADDER)?.u0;

    let mut result = ExperimentResult::new(
        "theorem1",
        vec![
            "R",
            "epsilon",
            "replicates",
            "hits",
            "censored",
            "p_hat",
            "p_se",
            "r2_p_hat",
            "r2_se",
            "oracle_u0",
            "z",
            "rel_err",
        ],
    );
    result.master_seed = params.seed;

    for (row_idx, &(r, reps)) in params.r_list.iter().enumerate() {
        if !(r > 0.0) {
            return Err(Error::config(format!("R = {r} must be > 0")));
        }
        let eps = params.a / (r * r);
        let mut cfg = SimConfig::new(
            eps,
            params.dt,
            StopRule::BallExit { radius: r },
            64.0 * r * r,
            1,
            crate::rng::mix(params.seed, row_idx as u64),
        );
        cfg.bridge = params.bridge && d == 1;
        let (stats, _) = match d {
            1 => hit_probability::<1>(&cfg, Medium::Field(field), nu, reps, params.threads)?,
            2 => hit_probability::<2>(&cfg, Medium::Field(field), nu, reps, params.threads)?,
            3 => hit_probability::<3>(&cfg, Medium::Field(field), nu, reps, params.threads)?,
            other => return Err(Error::config(format!("unsupported dimension {other}"))),
        };
        let r2p = r * r * stats.estimate;
        let r2se = r * r * stats.std_error;
        let z = z_score(r2p, r2se, oracle);
        result.push_row(vec![
            Cell::F(r),
            Cell::F(eps),
            Cell::U(stats.replicates),
            Cell::U(stats.hits),
            Cell::U(stats.censored),
            Cell::F(stats.estimate),
            Cell::F(stats.std_error),
            Cell::F(r2p),
            Cell::F(r2se),
            Cell::F(oracle),
            z.map(Cell::F).unwrap_or(Cell::Empty),
            Cell::F((r2p - oracle).abs() / oracle),
        ]);
    }

    result.set_summary("kappa", serde_json::json!(kappa));
    result.set_summary("oracle_u0", serde_json::json!(oracle));
    result.set_summary(
        "rel_err_by_R",
        serde_json::json!(result
            .rows
            .iter()
            .map(|row| match (&row[0], &row[11]) {
                (Cell::F(r), Cell::F(e)) => serde_json::json!([r, e]),
                _ => serde_json::json!(null),
            })
            .collect::<Vec<_>>()),
    );
    result.wall_seconds = timer.seconds();
    Ok(result)
}
