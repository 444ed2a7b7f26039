//! `mildobs` — single entry point for field diagnostics, particle
//! simulation, PDE oracles, and the experiment harnesses.
//!
//! Usage: `mildobs <subcommand> [--config FILE] [--key value]...`
//!
//! Any `--key value` pair overrides a config entry (`--sim.dt 0.001`); a few
//! short aliases are accepted (`--a`, `--R`, `--reps`, `--b`, `--out`,
//! `--seed`, `--threads`). Outputs are a CSV plus a JSON summary stamped
//! with the tool version, config hash, and master seed. Exit codes: 0 ok,
//! 2 invalid configuration, 3 numerical or simulation failure.

use mildobs_core::branching::{
    hit_probability, run_replicates, Medium, SimConfig, StopRule,
};
use mildobs_core::config::RunConfig;
use mildobs_core::error::Error;
use mildobs_core::experiments::{
    corollary_escape, fmt_f64, homogenization_moments, largedev, mixing_decay, theorem1, Cell,
    EscapeParams, ExperimentResult, LargeDevParams, MixingParams, MomentsMode, MomentsParams,
    Theorem1Params,
};
use mildobs_core::obstacles::{kappa, ObstacleField, Window};
use mildobs_core::offspring::OffspringDistribution;
use mildobs_core::pde::{
    exit_prob_1d, first_integral_1d, solve_radial_bvp, vtg_semigroup, DEFAULT_LADDER,
};
use mildobs_core::testfn::{RadialProfile, TestFunction};
use std::path::PathBuf;

const USAGE: &str = "usage: mildobs <subcommand> [--config FILE] [--key value]...
subcommands:
  field coverage    empirical coverage of a window vs. the closed-form kappa
  simulate          replicate trajectories (CSV: replicate, hit, max_distance, extinction_time, seed)
  hitprob           hitting-probability estimate over replicates
  exitprob-oracle   1-d exit probability tables from the implicit integral
  bvp               blow-up boundary value problem: ladder and extrapolated u(0)
  theorem1          R^2 x hitting probability vs. u_(kappa a)(0)
  corollary         escape-distance law vs. exp(-(b/r^2) u(0))
  largedev          exponential-regime decay shape with domination checks
  mixing            quenched mixing statistic decay in epsilon
  moments           rescaled-process moments vs. the limiting-process oracle
  selftest          fast invariant suite (exit 1 on any failure)";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(run(&args));
}

fn run(args: &[String]) -> i32 {
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        println!("{USAGE}");
        return if args.is_empty() { 2 } else { 0 };
    }
    let sub = args[0].as_str();
    let mut rest = &args[1..];
    // `field coverage` is a two-word subcommand.
    let mut verb = String::new();
    if sub == "field" {
        if rest.is_empty() || rest[0].starts_with("--") {
            report_config_error("field requires a verb, e.g. `field coverage`");
            return 2;
        }
        verb = rest[0].clone();
        rest = &rest[1..];
    }

    let cfg = match build_config(rest) {
        Ok(c) => c,
        Err(e) => {
            report_error(&e);
            return exit_code(&e);
        }
    };

    let result = match (sub, verb.as_str()) {
        ("field", "coverage") => cmd_field_coverage(&cfg),
        ("field", other) => Err(Error::config(format!("unknown field verb `{other}`"))),
        ("simulate", _) => cmd_simulate(&cfg),
        ("hitprob", _) => cmd_hitprob(&cfg),
        ("exitprob-oracle", _) => cmd_exitprob_oracle(&cfg),
        ("bvp", _) => cmd_bvp(&cfg),
        ("theorem1", _) => cmd_theorem1(&cfg),
        ("corollary", _) => cmd_corollary(&cfg),
        ("largedev", _) => cmd_largedev(&cfg),
        ("mixing", _) => cmd_mixing(&cfg),
        ("moments", _) => cmd_moments(&cfg),
        ("selftest", _) => return cmd_selftest(&cfg),
        (other, _) => Err(Error::config(format!("unknown subcommand `{other}`\n{USAGE}"))),
    };

    match result {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e);
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 3,
    }
}

fn report_error(e: &Error) {
    let kind = match e {
        Error::Config(_) => "config",
        Error::Numerics { .. } => "numerics",
        Error::Sim(_) => "simulation",
        Error::Io(_) => "io",
    };
    eprintln!(
        "{}",
        serde_json::json!({"error": {"kind": kind, "message": e.to_string()}})
    );
}

fn report_config_error(msg: &str) {
    report_error(&Error::config(msg));
}

const ALIASES: &[(&str, &str)] = &[
    ("a", "experiment.a"),
    ("R", "experiment.r_list"),
    ("reps", "experiment.replicates"),
    ("b", "experiment.b"),
    ("out", "output.dir"),
    ("seed", "experiment.seed"),
    ("threads", "threads"),
    ("eps", "experiment.eps_list"),
    ("env-seeds", "experiment.env_seeds"),
];

fn build_config(args: &[String]) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::default();
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut config_path: Option<PathBuf> = None;
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| Error::config(format!("expected --key, got `{arg}`")))?;
        let value = args
            .get(i + 1)
            .ok_or_else(|| Error::config(format!("flag --{key} needs a value")))?;
        if key == "config" {
            config_path = Some(PathBuf::from(value));
        } else {
            let full = ALIASES
                .iter()
                .find(|(short, _)| *short == key)
                .map(|(_, long)| long.to_string())
                .unwrap_or_else(|| key.to_string());
            overrides.push((full, value.clone()));
        }
        i += 2;
    }
    if let Some(path) = config_path {
        cfg = RunConfig::from_file(&path)?;
    }
    for (k, v) in overrides {
        cfg.set(&k, &v);
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    PathBuf::from(cfg.opt_str("output.dir").unwrap_or_else(|| "out".to_string()))
}

fn finish_and_write(cfg: &RunConfig, mut result: ExperimentResult) -> Result<(), Error> {
    let dir = out_dir(cfg);
    result.config_echo = cfg.echo();
    cfg.finish()?;
    let (csv, json) = result.write_files(&dir)?;
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn require_field(cfg: &RunConfig) -> Result<ObstacleField, Error> {
    cfg.field()?.ok_or_else(|| Error::config("this subcommand needs a field.* block (set field.intensity)"))
}

// ---------------------------------------------------------------- field

fn cmd_field_coverage(cfg: &RunConfig) -> Result<(), Error> {
    let field = require_field(cfg)?;
    let n = cfg.u64_or("coverage.n", 1_000_000)?;
    let half = cfg.f64_or("coverage.halfwidth", 1000.0 * field.cell_size())?;
    let seed = cfg.u64_or("coverage.seed", 1)?;
    let d = field.dim();
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for k in 0..d {
        lo[k] = -half;
        hi[k] = half;
    }
    let window = Window::new(lo, hi);
    let cov = field.empirical_coverage(&window, n, seed)?;
    let analytic = field.kappa();
    let mut result = ExperimentResult::new(
        "field_coverage",
        vec!["window_halfwidth", "n", "estimate", "se", "kappa_analytic", "z"],
    );
    result.master_seed = seed;
    let z = if cov.std_error > 0.0 { (cov.estimate - analytic) / cov.std_error } else { 0.0 };
    result.push_row(vec![
        Cell::F(half),
        Cell::U(n),
        Cell::F(cov.estimate),
        Cell::F(cov.std_error),
        Cell::F(analytic),
        Cell::F(z),
    ]);
    finish_and_write(cfg, result)
}

// ---------------------------------------------------------------- simulate / hitprob

struct SimSetup {
    field: Option<ObstacleField>,
    nu: OffspringDistribution,
    sim: SimConfig,
    medium_name: String,
    dim: usize,
    replicates: u64,
    threads: usize,
}

fn sim_setup(cfg: &RunConfig) -> Result<SimSetup, Error> {
    let field = cfg.field()?;
    let nu = cfg.offspring()?;
    let sim = cfg.sim()?;
    let medium_name = cfg
        .opt_str("sim.medium")
        .unwrap_or_else(|| if field.is_some() { "obstacles".into() } else { "none".into() });
    let dim = match &field {
        Some(f) => f.dim(),
        None => cfg.u64_or("sim.dimension", 1)? as usize,
    };
    if medium_name == "obstacles" && field.is_none() {
        return Err(Error::config("sim.medium = obstacles needs a field.* block"));
    }
    Ok(SimSetup {
        field,
        nu,
        sim,
        medium_name,
        dim,
        replicates: cfg.u64_or("sim.replicates", 1)?,
        threads: cfg.threads()?,
    })
}

fn medium_of<'a>(setup: &'a SimSetup) -> Result<Medium<'a>, Error> {
    match setup.medium_name.as_str() {
        "none" => Ok(Medium::None),
        "homogeneous" => Ok(Medium::Homogeneous),
        "obstacles" => Ok(Medium::Field(setup.field.as_ref().unwrap())),
        other => Err(Error::config(format!(
            "sim.medium must be none, homogeneous, or obstacles (got `{other}`)"
        ))),
    }
}

fn replicate_rows(
    name: &str,
    setup: &SimSetup,
    outcomes: &[mildobs_core::branching::ReplicateOutcome],
) -> ExperimentResult {
    let mut result = ExperimentResult::new(
        name,
        vec!["replicate", "hit", "max_distance", "extinction_time", "seed"],
    );
    result.master_seed = setup.sim.seed;
    for o in outcomes {
        result.push_row(vec![
            Cell::U(o.index),
            Cell::B(o.hit),
            Cell::F(o.max_distance),
            o.extinction_time.map(Cell::F).unwrap_or(Cell::Empty),
            Cell::U(o.seed),
        ]);
    }
    result
}

fn cmd_simulate(cfg: &RunConfig) -> Result<(), Error> {
    let setup = sim_setup(cfg)?;
    let medium = medium_of(&setup)?;
    let outcomes = match setup.dim {
        1 => run_replicates::<1>(&setup.sim, medium, &setup.nu, setup.replicates, setup.threads)?,
        2 => run_replicates::<2>(&setup.sim, medium, &setup.nu, setup.replicates, setup.threads)?,
        3 => run_replicates::<3>(&setup.sim, medium, &setup.nu, setup.replicates, setup.threads)?,
        d => return Err(Error::config(format!("unsupported dimension {d}"))),
    };
    let censored = outcomes.iter().filter(|o| o.censored).count();
    let mut result = replicate_rows("simulate", &setup, &outcomes);
    result.set_summary("censored", serde_json::json!(censored));
    finish_and_write(cfg, result)
}

fn cmd_hitprob(cfg: &RunConfig) -> Result<(), Error> {
    let setup = sim_setup(cfg)?;
    if setup.sim.stop == StopRule::None {
        return Err(Error::config("hitprob needs sim.stop_radius or sim.half_line"));
    }
    let medium = medium_of(&setup)?;
    let (stats, outcomes) = match setup.dim {
        1 => hit_probability::<1>(&setup.sim, medium, &setup.nu, setup.replicates, setup.threads)?,
        2 => hit_probability::<2>(&setup.sim, medium, &setup.nu, setup.replicates, setup.threads)?,
        3 => hit_probability::<3>(&setup.sim, medium, &setup.nu, setup.replicates, setup.threads)?,
        d => return Err(Error::config(format!("unsupported dimension {d}"))),
    };
    let mut result = replicate_rows("hitprob", &setup, &outcomes);
    result.set_summary("estimate", serde_json::json!(stats.estimate));
    result.set_summary("std_error", serde_json::json!(stats.std_error));
    result.set_summary("hits", serde_json::json!(stats.hits));
    result.set_summary("censored_as_no_hit", serde_json::json!(stats.censored));
    finish_and_write(cfg, result)
}

// ---------------------------------------------------------------- oracles

fn cmd_exitprob_oracle(cfg: &RunConfig) -> Result<(), Error> {
    let nu = cfg.offspring()?;
    let eps_list = cfg.opt_list_f64("oracle.eps_list")?.unwrap_or_else(|| vec![0.0]);
    let x_list = cfg
        .opt_list_f64("oracle.x_list")?
        .unwrap_or_else(|| (0..=20).map(|i| i as f64 * 0.5).collect());
    let mut result = ExperimentResult::new("exitprob_oracle", vec!["epsilon", "x", "p"]);
    for &eps in &eps_list {
        for &x in &x_list {
            let p = exit_prob_1d(eps, x, &nu)?;
            result.push_row(vec![Cell::F(eps), Cell::F(x), Cell::F(p)]);
        }
    }
    finish_and_write(cfg, result)
}

fn cmd_bvp(cfg: &RunConfig) -> Result<(), Error> {
    let a = cfg.f64_or("bvp.a", 0.0)?;
    let sigma2 = cfg.f64_or("bvp.sigma2", 1.0)?;
    let d = cfg.u64_or("bvp.dimension", 1)? as usize;
    let radius = cfg.f64_or("bvp.radius", 1.0)?;
    let ladder = cfg.opt_list_f64("bvp.ladder")?.unwrap_or_else(|| DEFAULT_LADDER.to_vec());
    let _ = cfg.opt_str("output.dir");
    let sol = solve_radial_bvp(a, sigma2, d, radius, &ladder)?;
    cfg.finish()?;
    let json = serde_json::json!({
        "a": a,
        "sigma2": sigma2,
        "dimension": d,
        "radius": radius,
        "u0": sol.u0,
        "ladder": sol.ladder.iter().map(|&(n, u)| serde_json::json!({"n": n, "u_n_at_0": u})).collect::<Vec<_>>(),
        "extrapolation_fit_rms": sol.fit_residual,
        "grid_nodes": sol.grid.len(),
    });
    println!("{}", serde_json::to_string_pretty(&json).unwrap());
    Ok(())
}

// ---------------------------------------------------------------- experiments

fn reps_for(cfg: &RunConfig, count: usize) -> Result<Vec<u64>, Error> {
    if let Some(list) = cfg.opt_list_f64("experiment.reps_list")? {
        if list.len() != count {
            return Err(Error::config(format!(
                "experiment.reps_list has {} entries, expected {count}",
                list.len()
            )));
        }
        Ok(list.into_iter().map(|v| v as u64).collect())
    } else {
        let r = cfg.u64_or("experiment.replicates", 10_000)?;
        Ok(vec![r; count])
    }
}

fn cmd_theorem1(cfg: &RunConfig) -> Result<(), Error> {
    let field = require_field(cfg)?;
    let nu = cfg.offspring()?;
    let r_list = cfg.list_f64("experiment.r_list")?;
    let reps = reps_for(cfg, r_list.len())?;
    let params = Theorem1Params {
        a: cfg.f64_or("experiment.a", 1.0)?,
        r_list: r_list.into_iter().zip(reps).collect(),
        dt: cfg.f64_or("sim.dt", 0.02)?,
        bridge: cfg.bool_or("sim.bridge", true)?,
        seed: cfg.u64_or("experiment.seed", 1)?,
        threads: cfg.threads()?,
    };
    // One quenched environment per invocation by default; an env-seed list
    // loops environments, emitting one row block each.
    let env_seeds: Vec<u64> = match cfg.opt_list_f64("experiment.env_seeds")? {
        Some(list) => list.into_iter().map(|v| v as u64).collect(),
        None => vec![field.master_seed()],
    };
    let mut combined = ExperimentResult::new(
        "theorem1",
        vec![
            "env_seed", "R", "epsilon", "replicates", "hits", "censored", "p_hat", "p_se",
            "r2_p_hat", "r2_se", "oracle_u0", "z", "rel_err",
        ],
    );
    combined.master_seed = params.seed;
    for &env in &env_seeds {
        let env_field = ObstacleField::with_cell_size(
            field.shape().clone(),
            field.dim(),
            env,
            field.cell_size(),
        )?;
        let res = theorem1(&params, &env_field, &nu)?;
        for row in res.rows {
            let mut full = vec![Cell::U(env)];
            full.extend(row);
            combined.push_row(full);
        }
        for (k, v) in res.summary {
            combined.set_summary(&format!("env_{env}_{k}"), v);
        }
    }
    finish_and_write(cfg, combined)
}

fn cmd_corollary(cfg: &RunConfig) -> Result<(), Error> {
    let field = require_field(cfg)?;
    let nu = cfg.offspring()?;
    let params = EscapeParams {
        b: cfg.f64_or("experiment.b", 1.0)?,
        eps_list: cfg.list_f64("experiment.eps_list")?,
        r_grid: cfg.list_f64("experiment.r_grid")?,
        replicates: cfg.u64_or("experiment.replicates", 2000)?,
        dt: cfg.f64_or("sim.dt", 0.02)?,
        t_max_factor: cfg.f64_or("experiment.t_max_factor", 64.0)?,
        seed: cfg.u64_or("experiment.seed", 1)?,
        threads: cfg.threads()?,
    };
    finish_and_write(cfg, corollary_escape(&params, &field, &nu)?)
}

fn cmd_largedev(cfg: &RunConfig) -> Result<(), Error> {
    let field = require_field(cfg)?;
    let nu = cfg.offspring()?;
    let cells_spec = cfg
        .opt_str("experiment.cells")
        .ok_or_else(|| Error::config("largedev needs experiment.cells = eps:R:reps,..."))?;
    let mut cells = Vec::new();
    for tok in cells_spec.split(',') {
        let parts: Vec<&str> = tok.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(Error::config(format!("experiment.cells: `{tok}` is not eps:R:reps")));
        }
        let eps: f64 = parts[0].parse().map_err(|_| Error::config(format!("bad eps in `{tok}`")))?;
        let r: f64 = parts[1].parse().map_err(|_| Error::config(format!("bad R in `{tok}`")))?;
        let reps: u64 = parts[2].parse().map_err(|_| Error::config(format!("bad reps in `{tok}`")))?;
        cells.push((eps, r, reps));
    }
    let params = LargeDevParams {
        cells,
        dt: cfg.f64_or("sim.dt", 0.05)?,
        bridge: cfg.bool_or("sim.bridge", true)?,
        seed: cfg.u64_or("experiment.seed", 1)?,
        threads: cfg.threads()?,
    };
    finish_and_write(cfg, largedev(&params, &field, &nu)?)
}

fn cmd_mixing(cfg: &RunConfig) -> Result<(), Error> {
    let field = require_field(cfg)?;
    let params = MixingParams {
        dim: field.dim(),
        theta: cfg.f64_or("experiment.theta", 1.0)?,
        g: TestFunction::Gaussian {
            amplitude: cfg.f64_or("experiment.g_amplitude", 1.0)?,
            width: cfg.f64_or("experiment.g_width", 1.0)?,
        },
        eps_list: cfg.list_f64("experiment.eps_list")?,
        field_realizations: cfg.u64_or("experiment.realizations", 200)?,
        y: cfg.f64_or("experiment.y", 0.0)?,
        shape: field.shape().clone(),
        grid_factor: cfg.f64_or("experiment.grid_factor", 6.0)?,
        seed: cfg.u64_or("experiment.seed", 1)?,
        threads: cfg.threads()?,
    };
    finish_and_write(cfg, mixing_decay(&params)?)
}

fn cmd_moments(cfg: &RunConfig) -> Result<(), Error> {
    let field = require_field(cfg)?;
    let nu = cfg.offspring()?;
    let mode = match cfg.opt_str("experiment.mode").as_deref() {
        None | Some("obstacles") => MomentsMode::Obstacles,
        Some("control") => MomentsMode::Control,
        Some(other) => {
            return Err(Error::config(format!(
                "experiment.mode must be control or obstacles (got `{other}`)"
            )))
        }
    };
    let eps = cfg.list_f64("experiment.eps_list")?;
    let reps = reps_for(cfg, eps.len())?;
    let params = MomentsParams {
        mode,
        t_list: cfg.opt_list_f64("experiment.t_list")?.unwrap_or_else(|| vec![1.0]),
        eps_list: eps.into_iter().zip(reps).collect(),
        g: TestFunction::Gaussian {
            amplitude: cfg.f64_or("experiment.g_amplitude", 1.0)?,
            width: cfg.f64_or("experiment.g_width", 1.0)?,
        },
        dt: cfg.f64_or("sim.dt", 0.05)?,
        seed: cfg.u64_or("experiment.seed", 1)?,
        threads: cfg.threads()?,
        field_per_replicate: cfg.bool_or("experiment.field_per_replicate", false)?,
    };
    finish_and_write(cfg, homogenization_moments(&params, &field, &nu)?)
}

// ---------------------------------------------------------------- selftest

fn cmd_selftest(cfg: &RunConfig) -> i32 {
    let degrade = cfg.bool_or("selftest.degrade_bvp", false).unwrap_or(false);
    let bvp_tol = cfg.f64_or("selftest.bvp_tol", 1e-4).unwrap_or(1e-4);
    if cfg.finish().is_err() {
        report_config_error("selftest accepts only selftest.degrade_bvp and selftest.bvp_tol");
        return 2;
    }
    let mut failures = 0;
    let mut check = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failures += 1;
        }
    };

    // kappa closed form, d = 1 and d = 2.
    {
        let s = mildobs_core::obstacles::ShapeLaw::single(1.0, 0.5).unwrap();
        let k1 = kappa(&s, 1);
        let expect = 1.0 - (-1.0f64).exp();
        let s2 = mildobs_core::obstacles::ShapeLaw::single(1.0, 1.0 / std::f64::consts::PI).unwrap();
        let k2 = kappa(&s2, 2);
        check(
            "kappa-closed-form",
            (k1 - expect).abs() < 1e-12 && (k2 - expect).abs() < 1e-12,
            format!("d1 {} d2 {} vs {}", fmt_f64(k1), fmt_f64(k2), fmt_f64(expect)),
        );
    }

    // exit probability closed form for binary branching.
    {
        let nu = OffspringDistribution::binary();
        let sqrt6 = 6.0f64.sqrt();
        let mut worst: f64 = 0.0;
        for &x in &[0.5, 1.0, sqrt6, 5.0, 10.0] {
            let p = exit_prob_1d(0.0, x, &nu).unwrap_or(f64::NAN);
            worst = worst.max((p - 6.0 / ((x + sqrt6) * (x + sqrt6))).abs());
        }
        check("exitprob-closed-form", worst < 1e-8, format!("max abs err {worst:.3e}"));
    }

    // BVP vs the first-integral oracle in d = 1.
    {
        let ladder: Vec<f64> = if degrade { vec![10.0, 100.0] } else { DEFAULT_LADDER.to_vec() };
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for &a in &[0.0, 0.5, 2.0] {
            match (solve_radial_bvp(a, 1.0, 1, 1.0, &ladder), first_integral_1d(a, 1.0, 1.0)) {
                (Ok(sol), Ok(oracle)) => worst = worst.max((sol.u0 - oracle).abs() / oracle),
                _ => ok = false,
            }
        }
        let detail = if ok {
            format!("max rel err {worst:.3e} (tol {bvp_tol:.1e})")
        } else {
            "solver error".to_string()
        };
        check("bvp-vs-first-integral", ok && worst < bvp_tol, detail);
    }

    // Parabolic semigroup against the Riccati / logistic closed forms.
    {
        let c = 0.8;
        let mut worst: f64 = 0.0;
        for &(a, t) in &[(0.0, 1.0), (0.0, 10.0), (0.7, 1.0), (0.7, 10.0)] {
            match vtg_semigroup(&RadialProfile::Constant(c), t, a, 1.0, 1) {
                Ok(sol) => {
                    let exact = if a == 0.0 {
                        c / (1.0 + 0.5 * c * t)
                    } else {
                        let e = (-a * t).exp();
                        a * c * e / (a + 0.5 * c * (1.0 - e))
                    };
                    worst = worst.max((sol.at(0.0) - exact).abs());
                }
                Err(_) => worst = f64::INFINITY,
            }
        }
        check("vtg-closed-form", worst < 1e-6, format!("max abs err {worst:.3e}"));
    }

    if failures == 0 {
        println!("selftest: all checks passed");
        0
    } else {
        println!("selftest: {failures} check(s) failed");
        1
    }
}
