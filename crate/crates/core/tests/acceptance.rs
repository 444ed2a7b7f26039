//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them stream). The heavy Monte Carlo
//! criteria share a mutex so they execute one at a time, and the runs reused
//! by the determinism criterion are computed once and cached.
//!
//! Budgets are sized for a single core: the full suite takes tens of
//! minutes, dominated by criteria 9, 11, 12, and 14.

use mildobs_core::branching::{
    hit_probability, run_replicates, Medium, ReplicateOutcome, SimConfig, StopRule,
};
use mildobs_core::experiments::*;
use mildobs_core::obstacles::{ObstacleField, ShapeLaw, Window};
use mildobs_core::offspring::OffspringDistribution;
use mildobs_core::pde::{
    exit_prob_1d, first_integral_1d, scaling_check, solve_radial_bvp, vtg_semigroup,
    DEFAULT_LADDER,
};
use mildobs_core::testfn::{RadialProfile, TestFunction};
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

/// Serializes the compute-heavy criteria.
static GATE: Mutex<()> = Mutex::new(());

fn gate() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(criterion: &str, pass: bool, detail: &str, started: Instant) {
    let state = if pass { "PASS" } else { "FAIL" };
    println!(
        "[{criterion}] {state} ({:.1}s) {detail}",
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "[{criterion}] FAIL {detail}");
}

fn cell_f(c: &Cell) -> f64 {
    match c {
        Cell::F(v) => *v,
        other => panic!("expected float, got {other:?}"),
    }
}

fn binary() -> OffspringDistribution {
    OffspringDistribution::binary()
}

// ---------------------------------------------------------------------
// criterion 1: closed-form exit probability
#[test]
fn c01_exit_prob_closed_form() {
    let t0 = Instant::now();
    let nu = binary();
    let sqrt6 = 6.0f64.sqrt();
    let mut worst: f64 = 0.0;
    for &x in &[0.5, 1.0, sqrt6, 5.0, 10.0] {
        let p = exit_prob_1d(0.0, x, &nu).unwrap();
        worst = worst.max((p - 6.0 / ((x + sqrt6) * (x + sqrt6))).abs());
    }
    let fast = t0.elapsed().as_secs_f64() < 1.0;
    report(
        "criterion 1",
        worst < 1e-8 && fast,
        &format!("exit_prob vs 6/(x+sqrt(6))^2: max abs err {worst:.2e}"),
        t0,
    );
}

// criterion 2: ODE residual of the implicit-integral solution
#[test]
fn c02_exit_prob_ode_residual() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    let h = 0.04;
    for nu in [OffspringDistribution::binary(), OffspringDistribution::geometric_type()] {
        for &eps in &[0.0, 0.05, 0.5] {
            for i in 0..100 {
                let x = 0.3 + 0.04 * i as f64;
                let mut p = [0.0; 5];
                for (j, pj) in p.iter_mut().enumerate() {
                    *pj = exit_prob_1d(eps, x + (j as f64 - 2.0) * h, &nu).unwrap();
                }
                let d2 = (-p[0] + 16.0 * p[1] - 30.0 * p[2] + 16.0 * p[3] - p[4]) / (12.0 * h * h);
                let resid = (0.5 * d2 - eps * p[2] - nu.phi(p[2]).unwrap()).abs();
                worst = worst.max(resid);
            }
        }
    }
    let fast = t0.elapsed().as_secs_f64() < 10.0;
    report(
        "criterion 2",
        worst < 1e-6 && fast,
        &format!("(1/2)p'' = eps p + Phi(p) at 100 interior points x 6 cases: max residual {worst:.2e}"),
        t0,
    );
}

// criterion 3: BVP against the independent first-integral oracle
#[test]
fn c03_bvp_vs_first_integral() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for &a in &[0.0, 0.5, 2.0] {
        let sol = solve_radial_bvp(a, 1.0, 1, 1.0, &DEFAULT_LADDER).unwrap();
        let oracle = first_integral_1d(a, 1.0, 1.0).unwrap();
        worst = worst.max((sol.u0 - oracle).abs() / oracle);
    }
    report(
        "criterion 3",
        worst < 1e-4,
        &format!("u(0) relative error vs shooting oracle: max {worst:.2e}"),
        t0,
    );
}

// criterion 4: ladder monotone in n, u_(a)(0) nonincreasing in a
#[test]
fn c04_ladder_and_a_monotonicity() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut detail = String::new();
    let mut prev = f64::INFINITY;
    for &a in &[0.0, 0.25, 1.0, 4.0, 16.0, 64.0] {
        let sol = solve_radial_bvp(a, 1.0, 1, 1.0, &DEFAULT_LADDER).unwrap();
        for w in sol.ladder.windows(2) {
            if w[1].1 <= w[0].1 {
                pass = false;
                detail = format!("ladder not strictly increasing at a = {a}");
            }
        }
        if sol.u0 > prev + 1e-9 {
            pass = false;
            detail = format!("u0 increased between a values at a = {a}");
        }
        prev = sol.u0;
    }
    if pass {
        detail = "u_n(0) strictly increasing in n; u_(a)(0) nonincreasing over a in {0..64}".into();
    }
    report("criterion 4", pass, &detail, t0);
}

// criterion 5: scaling identity u_(kappa a) = a v(sqrt(a) x)
#[test]
fn c05_scaling_identity() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for &d in &[1usize, 2] {
        for &a in &[0.25, 4.0] {
            let disc = scaling_check(a, 0.3935, 1.0, d, 1.0).unwrap();
            worst = worst.max(disc);
        }
    }
    report(
        "criterion 5",
        worst < 1e-4,
        &format!("max relative discrepancy over a in {{0.25, 4}}, d in {{1, 2}}: {worst:.2e}"),
        t0,
    );
}

// ---------------------------------------------------------------------
// criterion 6 (+ reuse by criterion 14): MC vs the ODE oracle

const C6_CELLS: [(f64, f64, u64); 4] = [
    (0.0, 3.0, 200_000),
    (0.0, 5.0, 100_000),
    (0.05, 3.0, 200_000),
    (0.05, 5.0, 100_000),
];

fn c6_run(threads: usize) -> Vec<Vec<ReplicateOutcome>> {
    let nu = binary();
    C6_CELLS
        .iter()
        .enumerate()
        .map(|(i, &(eps, x, reps))| {
            let mut cfg = SimConfig::new(
                eps,
                1e-3,
                StopRule::HalfLine { level: x },
                64.0 * x * x,
                1,
                mildobs_core::rng::mix(0xC6, i as u64),
            );
            cfg.bridge = true;
            let medium = if eps > 0.0 { Medium::Homogeneous } else { Medium::None };
            hit_probability::<1>(&cfg, medium, &nu, reps, threads).unwrap().1
        })
        .collect()
}

fn c6_csv(outs: &[Vec<ReplicateOutcome>]) -> String {
    let mut s = String::from("cell,replicate,hit,max_distance,seed\n");
    for (i, cell) in outs.iter().enumerate() {
        for o in cell {
            s.push_str(&format!(
                "{i},{},{},{},{}\n",
                o.index,
                o.hit,
                fmt_f64(o.max_distance),
                o.seed
            ));
        }
    }
    s
}

fn c6_cached() -> &'static Vec<Vec<ReplicateOutcome>> {
    static CACHE: OnceLock<Vec<Vec<ReplicateOutcome>>> = OnceLock::new();
    CACHE.get_or_init(|| c6_run(1))
}

#[test]
fn c06_mc_matches_exit_prob_oracle() {
    let _g = gate();
    let t0 = Instant::now();
    let nu = binary();
    let outs = c6_cached();
    let mut pass = true;
    let mut lines = Vec::new();
    for (cell, &(eps, x, _)) in outs.iter().zip(&C6_CELLS) {
        let stats = mildobs_core::branching::summarize_hits(cell);
        let oracle = exit_prob_1d(eps, x, &nu).unwrap();
        let z = (stats.estimate - oracle) / stats.std_error;
        let ok = z.abs() < 3.0 && stats.std_error < 1e-3;
        pass &= ok;
        lines.push(format!(
            "(eps={eps}, x={x}): est {:.5} oracle {:.5} se {:.1e} z {z:+.2}",
            stats.estimate, oracle, stats.std_error
        ));
    }
    report("criterion 6", pass, &lines.join("; "), t0);
}

// criterion 7: criticality and the second-moment identity
#[test]
fn c07_criticality_and_second_moment() {
    let _g = gate();
    let t0 = Instant::now();
    let nu = binary();
    let mut cfg = SimConfig::new(0.0, 0.1, StopRule::None, 5.5, 1, 0xC7);
    cfg.snapshot_times = vec![1.0, 5.0];
    let outs = run_replicates::<1>(&cfg, Medium::None, &nu, 100_000, 1).unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for (j, &t) in [1.0f64, 5.0].iter().enumerate() {
        let counts: Vec<f64> = outs.iter().map(|o| o.snapshots[j].len() as f64).collect();
        let n = counts.len() as f64;
        let mean: f64 = counts.iter().sum::<f64>() / n;
        let var: f64 = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / n;
        let se = (var / n).sqrt();
        let sq: Vec<f64> = counts.iter().map(|c| c * c).collect();
        let mean2: f64 = sq.iter().sum::<f64>() / n;
        let var2: f64 = sq.iter().map(|c| (c - mean2) * (c - mean2)).sum::<f64>() / n;
        let se2 = (var2 / n).sqrt();
        let expect2 = 1.0 + nu.sigma2() * t;
        let ok = (mean - 1.0).abs() < 3.0 * se && (mean2 - expect2).abs() < 3.0 * se2;
        pass &= ok;
        lines.push(format!(
            "t={t}: E[N]={mean:.4}+-{se:.4}, E[N^2]={mean2:.3}+-{se2:.3} (expect {expect2})"
        ));
    }
    report("criterion 7", pass, &lines.join("; "), t0);
}

// criterion 8: empirical coverage matches the kappa formula
#[test]
fn c08_coverage_matches_kappa() {
    let _g = gate();
    let t0 = Instant::now();
    // (d, intensity, radius, window halfwidth)
    let settings = [
        (1usize, 0.5, 1.0, 2.5e7),
        (2usize, 1.0 / std::f64::consts::PI, 1.0, 5.0e3),
        (3usize, 0.1, 1.0, 3.0e2),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for (i, &(d, lambda, r, half)) in settings.iter().enumerate() {
        let shape = ShapeLaw::single(r, lambda).unwrap();
        let field = ObstacleField::new(shape, d, 0xC8 + i as u64).unwrap();
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for k in 0..d {
            lo[k] = -half;
            hi[k] = half;
        }
        let cov = field.empirical_coverage(&Window::new(lo, hi), 1_000_000, 7 + i as u64).unwrap();
        let k = field.kappa();
        let z = (cov.estimate - k) / cov.std_error;
        pass &= z.abs() < 3.0;
        lines.push(format!("d={d}: cov {:.5} vs kappa {k:.5}, z {z:+.2}", cov.estimate));
    }
    report("criterion 8", pass, &lines.join("; "), t0);
}

// ---------------------------------------------------------------------
// criterion 9 (+ reuse by criterion 14): critical-regime limit at desk scale

fn theorem1_field() -> ObstacleField {
    ObstacleField::new(ShapeLaw::single(1.0, 0.25).unwrap(), 1, 12345).unwrap()
}

fn c9_params() -> Theorem1Params {
    Theorem1Params {
        a: 1.0,
        r_list: vec![(10.0, 400_000), (20.0, 400_000), (40.0, 400_000)],
        dt: 0.02,
        bridge: true,
        seed: 9,
        threads: 1,
    }
}

fn c9_cached() -> &'static ExperimentResult {
    static CACHE: OnceLock<ExperimentResult> = OnceLock::new();
    CACHE.get_or_init(|| {
        let params = c9_params();
        theorem1(&params, &theorem1_field(), &binary()).unwrap()
    })
}

#[test]
fn c09_theorem1_desk_scale() {
    let _g = gate();
    let t0 = Instant::now();
    let res = c9_cached();
    let rels: Vec<f64> = res.rows.iter().map(|row| cell_f(&row[11])).collect();
    let decreasing = rels.windows(2).all(|w| w[1] < w[0]);
    let last_ok = *rels.last().unwrap() < 0.15;
    report(
        "criterion 9",
        decreasing && last_ok,
        &format!(
            "|R^2 p - u(0)|/u(0) over R = 10, 20, 40: {:?} (decreasing: {decreasing}, R=40 < 0.15: {last_ok})",
            rels.iter().map(|r| (r * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
        t0,
    );
}

// criterion 10: mixing-statistic decay exponent d/2
#[test]
fn c10_mixing_decay_exponent() {
    let _g = gate();
    let t0 = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for (d, theta, lambda, eps_list) in [
        (1usize, 1.0, 0.5, vec![1e-4, 2.15e-4, 4.64e-4, 1e-3, 2.15e-3, 4.64e-3, 1e-2]),
        (2usize, 0.5, 0.2206356, vec![3.16e-3, 6.81e-3, 1.47e-2, 3.16e-2, 6.81e-2, 1.47e-1, 3.16e-1]),
    ] {
        let params = MixingParams {
            dim: d,
            theta,
            g: TestFunction::Gaussian { amplitude: 1.0, width: 1.0 },
            eps_list,
            field_realizations: 200,
            y: 0.0,
            shape: ShapeLaw::single(1.0, lambda).unwrap(),
            grid_factor: 6.0,
            seed: 31,
            threads: 1,
        };
        let res = mixing_decay(&params).unwrap();
        let slope = res.summary["slope"].as_f64().unwrap();
        let target = d as f64 / 2.0;
        pass &= (slope - target).abs() < 0.2;
        lines.push(format!("d={d}: slope {slope:.3} (target {target} +- 0.2)"));
    }
    report("criterion 10", pass, &lines.join("; "), t0);
}

// ---------------------------------------------------------------------
// criterion 11: homogenization moments

fn moments_field() -> ObstacleField {
    // kappa = 1/2: intensity * 2 r0 = ln 2 with r0 = 2.5.
    ObstacleField::new(ShapeLaw::single(2.5, std::f64::consts::LN_2 / 5.0).unwrap(), 1, 777).unwrap()
}

#[test]
fn c11_homogenization_moments() {
    let _g = gate();
    let t0 = Instant::now();
    let field = moments_field();
    let nu = binary();
    let g = TestFunction::Gaussian { amplitude: 1.0, width: 1.0 };

    // Control: homogeneous killing at rate kappa*eps; moment formulas exact.
    let control = homogenization_moments(
        &MomentsParams {
            mode: MomentsMode::Control,
            t_list: vec![0.5, 1.0],
            eps_list: vec![(0.01, 30_000)],
            g,
            dt: 0.1,
            seed: 5,
            threads: 1,
            field_per_replicate: false,
        },
        &field,
        &nu,
    )
    .unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for row in &control.rows {
        let (z_mean, z_var) = (cell_f(&row[9]), cell_f(&row[14]));
        pass &= z_mean.abs() < 3.0 && z_var.abs() < 3.0;
        lines.push(format!("control t={}: z_mean {z_mean:+.2}, z_var {z_var:+.2}", cell_f(&row[2])));
    }

    // Obstacles, environment-averaged (fresh field per replicate): the
    // homogenization gap |mean - oracle| must shrink along eps.
    let obstacles = homogenization_moments(
        &MomentsParams {
            mode: MomentsMode::Obstacles,
            t_list: vec![1.0],
            eps_list: vec![(0.04, 30_000), (0.01, 40_000), (0.0025, 40_000)],
            g,
            dt: 0.1,
            seed: 5,
            threads: 1,
            field_per_replicate: true,
        },
        &field,
        &nu,
    )
    .unwrap();
    let gaps: Vec<f64> = obstacles.rows.iter().map(|row| cell_f(&row[10])).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    pass &= decreasing;
    lines.push(format!(
        "obstacle |mean - oracle| over eps = 0.04, 0.01, 0.0025: {:?} (decreasing: {decreasing})",
        gaps.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
    ));
    report("criterion 11", pass, &lines.join("; "), t0);
}

// criterion 12: large-deviation regime shape
#[test]
fn c12_largedev_shape() {
    let _g = gate();
    let t0 = Instant::now();
    let field = theorem1_field();
    let nu = binary();
    let r = 40.0;
    let params = LargeDevParams {
        cells: vec![
            (1.0 / (r * r), r, 200_000),
            (4.0 / (r * r), r, 200_000),
            (16.0 / (r * r), r, 400_000),
            (64.0 / (r * r), r, 1_000_000),
        ],
        dt: 0.05,
        bridge: true,
        seed: 12,
        threads: 1,
    };
    let res = largedev(&params, &field, &nu).unwrap();
    let mut pass = true;
    let mut lines = Vec::new();

    let mut log_p = Vec::new();
    let mut xs = Vec::new();
    for row in &res.rows {
        let eps = cell_f(&row[0]);
        let hits = match row[4] {
            Cell::U(h) => h,
            _ => 0,
        };
        let violations = match row[14] {
            Cell::U(v) => v,
            _ => u64::MAX,
        };
        if violations != 0 {
            pass = false;
            lines.push(format!("eps={eps}: {violations} domination violations"));
        }
        if hits == 0 {
            // Reported as an upper bound; excluded from the decay fit.
            let ub = cell_f(&row[8]);
            lines.push(format!("eps={eps}: zero hits, upper bound {ub:.2e}"));
            continue;
        }
        let p = cell_f(&row[6]);
        let se = cell_f(&row[7]);
        let oracle = cell_f(&row[13]);
        // Lower-bound shape: the half-line oracle carries eps e^{-R sqrt(2 eps)}.
        if p.ln() < oracle.ln() - 3.0 * se / p {
            pass = false;
            lines.push(format!("eps={eps}: estimate below the half-line oracle"));
        }
        log_p.push(p.ln());
        xs.push(r * (2.0 * eps).sqrt());
    }

    // Anchor row eps R^2 = 1 connects to the critical regime.
    let p_anchor = cell_f(&res.rows[0][6]);
    let u0 = solve_radial_bvp(field.kappa() * 1.0, nu.sigma2(), 1, 1.0, &DEFAULT_LADDER)
        .unwrap()
        .u0;
    let ratio = r * r * p_anchor / u0;
    if !(ratio > 1.0 / 3.0 && ratio < 3.0) {
        pass = false;
    }
    lines.push(format!("anchor eps R^2 = 1: R^2 p / u0 = {ratio:.2}"));

    // Superlinear decay: successive slopes of log p against R sqrt(2 eps)
    // increasingly negative.
    if log_p.len() >= 3 {
        let slopes: Vec<f64> = log_p
            .windows(2)
            .zip(xs.windows(2))
            .map(|(lp, x)| (lp[1] - lp[0]) / (x[1] - x[0]))
            .collect();
        let steepening = slopes.windows(2).all(|w| w[1] < w[0]);
        if !steepening {
            pass = false;
        }
        lines.push(format!(
            "slopes of log p vs R sqrt(2 eps): {:?} (steepening: {steepening})",
            slopes.iter().map(|s| (s * 1e3).round() / 1e3).collect::<Vec<_>>()
        ));
    } else {
        pass = false;
        lines.push("too few cells with hits for the shape fit".into());
    }
    report("criterion 12", pass, &lines.join("; "), t0);
}

// criterion 13: V_t g closed forms
#[test]
fn c13_vtg_closed_forms() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    let c = 0.8;
    for &t in &[0.1, 1.0, 10.0] {
        // a = 0 Riccati
        let sol = vtg_semigroup(&RadialProfile::Constant(c), t, 0.0, 1.3, 2).unwrap();
        let exact = c / (1.0 + 0.5 * 1.3 * c * t);
        worst = worst.max((sol.at(0.0) - exact).abs());
        // a > 0 logistic
        let (a, s2) = (0.7, 1.5);
        let sol = vtg_semigroup(&RadialProfile::Constant(c), t, a, s2, 1).unwrap();
        let e = (-a * t).exp();
        let exact = a * c * e / (a + 0.5 * s2 * c * (1.0 - e));
        worst = worst.max((sol.at(0.0) - exact).abs());
    }
    let fast = t0.elapsed().as_secs_f64() < 10.0;
    report(
        "criterion 13",
        worst < 1e-6 && fast,
        &format!("V_t(const) vs Riccati/logistic at t in {{0.1, 1, 10}}: max abs err {worst:.2e}"),
        t0,
    );
}

// criterion 14: determinism and thread invariance of criteria 6 and 9
#[test]
fn c14_determinism() {
    let _g = gate();
    let t0 = Instant::now();
    // Criterion 6 rerun on 4 threads must match the cached 1-thread run,
    // byte for byte.
    let base6 = c6_csv(c6_cached());
    let rerun6 = c6_csv(&c6_run(4));
    let six_ok = base6 == rerun6;

    // Criterion 9 rerun on 4 threads.
    let base9 = c9_cached().to_csv();
    let mut params = c9_params();
    params.threads = 4;
    let rerun9 = theorem1(&params, &theorem1_field(), &binary()).unwrap().to_csv();
    let nine_ok = base9 == rerun9;

    report(
        "criterion 14",
        six_ok && nine_ok,
        &format!(
            "criterion 6 CSV byte-identical across reruns/threads: {six_ok}; criterion 9: {nine_ok}"
        ),
        t0,
    );
}
