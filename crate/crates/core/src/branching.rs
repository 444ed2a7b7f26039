//! Event-driven simulation of critical branching Brownian motion with
//! killing in obstacles.
//!
//! Construction: every particle carries an Exp(1) lifetime (branch clock)
//! and an independent Exp(1) threshold γ; it dies when the time it has spent
//! inside the obstacle set during its own lifetime exceeds γ/ε. At the end
//! of an un-killed lifetime it is replaced by k offspring at its death
//! position, k drawn from the critical law ν. Variants: `Homogeneous` kills
//! at rate ε everywhere (occupation = elapsed time, handled by an exact
//! clock), `None` never kills.
//!
//! Randomness is keyed by genealogy: a particle's stream is a pure function
//! of (replicate seed, root index, child indices down the tree). Enlarging ε
//! with fixed seeds therefore removes particles from the population without
//! disturbing anything else, which makes the coupling and domination
//! properties exact, replicate by replicate.

use crate::error::{Error, Result};
use crate::obstacles::{FieldView, LineView, ObstacleField};
use crate::offspring::OffspringDistribution;
use crate::rng::{mix, Stream};
use crate::testfn::TestFunction;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Absorbing stop domain.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub enum StopRule {
    /// No absorption; run to extinction or t_max.
    None,
    /// Absorb on exit of the centered open ball of this radius.
    BallExit { radius: f64 },
    /// Absorb when the first coordinate reaches `level` (d = 1 half-line
    /// hitting problems start the particle at 0 and chase the level x).
    HalfLine { level: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    /// Killing rate ε >= 0.
    pub epsilon: f64,
    /// Diffusion time step for path-resolved stepping.
    pub dt: f64,
    pub stop: StopRule,
    pub t_max: f64,
    pub initial_count: u64,
    pub seed: u64,
    /// Half-space Brownian-bridge crossing correction (d = 1 only).
    pub bridge: bool,
    /// Real times at which alive-particle positions are recorded.
    pub snapshot_times: Vec<f64>,
    /// Abandon a replicate as soon as one particle is absorbed.
    pub stop_on_hit: bool,
    /// Force dt-chunked stepping even when no field/boundary needs it
    /// (used by cross-medium coupling tests).
    pub force_dt: bool,
}

impl SimConfig {
    pub fn new(epsilon: f64, dt: f64, stop: StopRule, t_max: f64, initial_count: u64, seed: u64) -> Self {
        SimConfig {
            epsilon,
            dt,
            stop,
            t_max,
            initial_count,
            seed,
            bridge: false,
            snapshot_times: Vec::new(),
            stop_on_hit: false,
            force_dt: false,
        }
    }

    /// Default censoring horizon: critical populations confined to scale L
    /// are extinct by O(L²) with high probability.
    pub fn default_t_max(stop: &StopRule) -> f64 {
        match stop {
            StopRule::None => 64.0,
            StopRule::BallExit { radius } => 64.0 * radius * radius,
            StopRule::HalfLine { level } => 64.0 * level * level,
        }
    }

    fn validate(&self, medium: &Medium) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::config(format!("epsilon {} must be finite and >= 0", self.epsilon)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config(format!("dt {} must be > 0", self.dt)));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::config(format!("t_max {} must be > 0", self.t_max)));
        }
        if self.initial_count == 0 {
            return Err(Error::config("initial_count must be >= 1"));
        }
        if let Medium::Field(f) = medium {
            let r0 = f.r0();
            if self.dt.sqrt() > r0 / 4.0 + 1e-12 {
                return Err(Error::config(format!(
                    "dt = {} too coarse for obstacle radius r0 = {r0}: need sqrt(dt) <= r0/4",
                    self.dt
                )));
            }
        }
        for &t in &self.snapshot_times {
            if !(t >= 0.0) || t >= self.t_max {
                return Err(Error::config(format!(
                    "snapshot time {t} must lie in [0, t_max); raise t_max past the last snapshot"
                )));
            }
        }
        if !self.snapshot_times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::config("snapshot times must be strictly increasing"));
        }
        Ok(())
    }
}

/// Killing medium.
#[derive(Clone, Copy)]
pub enum Medium<'a> {
    /// No killing (equivalently, any ε with an empty obstacle set).
    None,
    /// Killed at rate ε homogeneously over all of space.
    Homogeneous,
    /// Killed at rate ε inside the quenched obstacle field.
    Field(&'a ObstacleField),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub index: u64,
    pub seed: u64,
    pub hit: bool,
    pub max_distance: f64,
    /// None when the replicate was censored at t_max with particles alive.
    pub extinction_time: Option<f64>,
    pub censored: bool,
    /// Positions of alive particles at each requested snapshot time.
    pub snapshots: Vec<Vec<[f64; 3]>>,
    pub branch_events: u64,
    pub kill_events: u64,
}

struct Pending<const D: usize> {
    id: u64,
    pos: [f64; D],
    birth: f64,
}

enum Occupancy<'a> {
    None,
    Clock,
    Line(LineView<'a>),
    Cells(FieldView<'a>),
}

/// Simulate one replicate. `rep_index` keys all randomness under
/// `cfg.seed`.
pub fn simulate_replicate<const D: usize>(
    cfg: &SimConfig,
    medium: Medium<'_>,
    nu: &OffspringDistribution,
    rep_index: u64,
) -> Result<ReplicateOutcome> {
    cfg.validate(&medium)?;
    if let Medium::Field(f) = medium {
        if f.dim() != D {
            return Err(Error::config(format!("field dimension {} != simulation dimension {D}", f.dim())));
        }
    }
    let rep_seed = mix(cfg.seed, rep_index);

    let mut occupancy = match medium {
        Medium::None => Occupancy::None,
        Medium::Homogeneous => Occupancy::Clock,
        Medium::Field(f) => {
            if D == 1 {
                Occupancy::Line(LineView::new(f))
            } else {
                Occupancy::Cells(FieldView::new(f))
            }
        }
    };

    // dt-resolved stepping is needed whenever the path itself matters.
    let path_resolved = cfg.force_dt
        || matches!(occupancy, Occupancy::Line(_) | Occupancy::Cells(_))
        || cfg.stop != StopRule::None;
    let dt = if path_resolved { cfg.dt } else { f64::INFINITY };

    let mut stack: Vec<Pending<D>> = (0..cfg.initial_count)
        .rev()
        .map(|i| Pending { id: mix(rep_seed, i), pos: [0.0; D], birth: 0.0 })
        .collect();

    let mut out = ReplicateOutcome {
        index: rep_index,
        seed: rep_seed,
        hit: false,
        max_distance: 0.0,
        extinction_time: Some(0.0),
        censored: false,
        snapshots: vec![Vec::new(); cfg.snapshot_times.len()],
        branch_events: 0,
        kill_events: 0,
    };

    // Absorption at a degenerate boundary through the origin.
    let absorbed_at_birth = match cfg.stop {
        StopRule::BallExit { radius } => radius <= 0.0,
        StopRule::HalfLine { level } => level <= 0.0,
        StopRule::None => false,
    };
    if absorbed_at_birth {
        out.hit = true;
        return Ok(out);
    }

    'particles: while let Some(p) = stack.pop() {
        let mut rng = Stream::from_key(p.id);
        let lifetime = rng.exp1();
        let gamma = rng.exp1();
        let kill_budget = if cfg.epsilon > 0.0 { gamma / cfg.epsilon } else { f64::INFINITY };

        let branch_at = p.birth + lifetime;
        let kill_clock = if matches!(occupancy, Occupancy::Clock) {
            p.birth + kill_budget
        } else {
            f64::INFINITY
        };

        let mut t = p.birth;
        let mut pos = p.pos;
        let mut occ = 0.0;
        let mut snap_idx = cfg.snapshot_times.partition_point(|&s| s < p.birth);
        let mut death = f64::INFINITY;
        let mut alive_at_tmax = false;

        'life: loop {
            let hard = branch_at.min(kill_clock).min(cfg.t_max);
            let (target, is_snap) = match cfg.snapshot_times.get(snap_idx) {
                Some(&s) if s < hard => (s, true),
                _ => (hard, false),
            };
            // Diffuse from t to target in dt chunks.
            while t < target {
                let h = dt.min(target - t);
                let sq = h.sqrt();
                let prev = pos;
                for x in pos.iter_mut() {
                    *x += sq * rng.normal();
                    if !x.is_finite() {
                        return Err(Error::Sim(format!("non-finite position in replicate {rep_index}")));
                    }
                }
                t += h;
                // Occupation accrual at the step midpoint.
                match &mut occupancy {
                    Occupancy::Line(view) => {
                        let mid = 0.5 * (prev[0] + pos[0]);
                        if view.contains(mid) {
                            occ += h;
                            if occ > kill_budget {
                                death = t;
                                out.kill_events += 1;
                                break 'life;
                            }
                        }
                    }
                    Occupancy::Cells(view) => {
                        let mut mid = [0.0; 3];
                        for k in 0..D {
                            mid[k] = 0.5 * (prev[k] + pos[k]);
                        }
                        if view.contains(&mid[..D]) {
                            occ += h;
                            if occ > kill_budget {
                                death = t;
                                out.kill_events += 1;
                                break 'life;
                            }
                        }
                    }
                    _ => {}
                }
                let dist2: f64 = pos.iter().map(|x| x * x).sum();
                if dist2 > out.max_distance * out.max_distance {
                    out.max_distance = dist2.sqrt();
                }
                // Absorption checks.
                let absorbed = match cfg.stop {
                    StopRule::None => false,
                    StopRule::BallExit { radius } => {
                        dist2 >= radius * radius
                            || (cfg.bridge
                                && D == 1
                                && bridge_ball_crossing(prev[0], pos[0], radius, h, &mut rng))
                    }
                    StopRule::HalfLine { level } => {
                        pos[0] >= level
                            || (cfg.bridge
                                && D == 1
                                && bridge_level_crossing(prev[0], pos[0], level, h, &mut rng))
                    }
                };
                if absorbed {
                    out.hit = true;
                    death = t;
                    // Bridge-detected crossings reach the boundary even when
                    // the sampled endpoints stay inside.
                    let boundary = match cfg.stop {
                        StopRule::BallExit { radius } => radius,
                        StopRule::HalfLine { level } => level,
                        StopRule::None => 0.0,
                    };
                    if boundary > out.max_distance {
                        out.max_distance = boundary;
                    }
                    if cfg.stop_on_hit {
                        out.extinction_time = None;
                        return Ok(out);
                    }
                    break 'life;
                }
            }
            if is_snap {
                let mut padded = [0.0; 3];
                padded[..D].copy_from_slice(&pos);
                out.snapshots[snap_idx].push(padded);
                snap_idx += 1;
                continue 'life;
            }
            if target >= cfg.t_max && branch_at.min(kill_clock) > cfg.t_max {
                alive_at_tmax = true;
                break 'life;
            }
            if kill_clock <= branch_at {
                death = kill_clock;
                out.kill_events += 1;
                break 'life;
            }
            // Branch: replace by k offspring at the death position.
            death = branch_at;
            out.branch_events += 1;
            let k = nu.sample(&mut rng);
            for j in (0..k).rev() {
                stack.push(Pending { id: mix(p.id, j as u64 + 1), pos, birth: branch_at });
            }
            break 'life;
        }

        if alive_at_tmax {
            out.censored = true;
            out.extinction_time = None;
            if cfg.stop_on_hit && out.hit {
                return Ok(out);
            }
            continue 'particles;
        }
        if let Some(ext) = out.extinction_time.as_mut() {
            *ext = ext.max(death.min(cfg.t_max));
        }
    }

    Ok(out)
}

fn bridge_level_crossing(x0: f64, x1: f64, level: f64, h: f64, rng: &mut Stream) -> bool {
    let a = level - x0;
    let b = level - x1;
    if a <= 0.0 || b <= 0.0 {
        return true;
    }
    let expo = 2.0 * a * b / h;
    // Skip the draw when the crossing probability is negligible; the gate
    // depends only on the path, so stream consumption stays reproducible.
    if expo > 27.6 {
        return false;
    }
    rng.u01() < (-expo).exp()
}

fn bridge_ball_crossing(x0: f64, x1: f64, radius: f64, h: f64, rng: &mut Stream) -> bool {
    let up = 2.0 * (radius - x0) * (radius - x1) / h;
    let dn = 2.0 * (radius + x0) * (radius + x1) / h;
    let expo = up.min(dn);
    if expo > 27.6 {
        return false;
    }
    let p = (-up).exp() + (-dn).exp();
    rng.u01() < p
}

/// Run independent replicates, optionally on a thread pool; the result
/// vector is ordered by replicate index regardless of scheduling.
pub fn run_replicates<const D: usize>(
    cfg: &SimConfig,
    medium: Medium<'_>,
    nu: &OffspringDistribution,
    replicates: u64,
    threads: usize,
) -> Result<Vec<ReplicateOutcome>> {
    if replicates == 0 {
        return Err(Error::config("replicates must be >= 1"));
    }
    if threads <= 1 {
        (0..replicates).map(|i| simulate_replicate::<D>(cfg, medium, nu, i)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Sim(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..replicates)
                .into_par_iter()
                .map(|i| simulate_replicate::<D>(cfg, medium, nu, i))
                .collect()
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HitStats {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub censored: u64,
    pub replicates: u64,
}

/// Fraction of replicates that hit the stop domain. Censored replicates
/// count as no-hit and are reported.
pub fn hit_probability<const D: usize>(
    cfg: &SimConfig,
    medium: Medium<'_>,
    nu: &OffspringDistribution,
    replicates: u64,
    threads: usize,
) -> Result<(HitStats, Vec<ReplicateOutcome>)> {
    let mut cfg = cfg.clone();
    cfg.stop_on_hit = true;
    let outcomes = run_replicates::<D>(&cfg, medium, nu, replicates, threads)?;
    Ok((summarize_hits(&outcomes), outcomes))
}

pub fn summarize_hits(outcomes: &[ReplicateOutcome]) -> HitStats {
    let n = outcomes.len() as u64;
    let hits = outcomes.iter().filter(|o| o.hit).count() as u64;
    let censored = outcomes.iter().filter(|o| o.censored && !o.hit).count() as u64;
    let p = hits as f64 / n as f64;
    HitStats {
        estimate: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        hits,
        censored,
        replicates: n,
    }
}

/// Empirical law of the maximal distance from the origin over the whole
/// population, one value per replicate; starts `n_initial` particles at 0.
pub fn max_distance_sample<const D: usize>(
    cfg: &SimConfig,
    medium: Medium<'_>,
    nu: &OffspringDistribution,
    n_initial: u64,
    replicates: u64,
    threads: usize,
) -> Result<Vec<ReplicateOutcome>> {
    if n_initial == 0 {
        return Err(Error::config("n_initial must be >= 1"));
    }
    let mut cfg = cfg.clone();
    cfg.initial_count = n_initial;
    cfg.stop_on_hit = false;
    run_replicates::<D>(&cfg, medium, nu, replicates, threads)
}

/// Field mode accepted by the first-moment oracle (closed-form transition
/// densities exist only without obstacles).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMedium {
    None,
    Homogeneous,
}

/// First-moment oracle E_{k δ_x}⟨Z_t, h⟩ = k e^{-εt} (S_t h)(x) for
/// homogeneous killing (ε = 0 for no killing).
pub fn moment_oracle_first(
    t: f64,
    h: &TestFunction,
    k: u64,
    epsilon: f64,
    medium: OracleMedium,
    x: &[f64],
    d: usize,
) -> f64 {
    let decay = match medium {
        OracleMedium::None => 1.0,
        OracleMedium::Homogeneous => (-epsilon * t).exp(),
    };
    k as f64 * decay * h.heat(t, x, d)
}

/// ⟨X_t, φ⟩ = ε Σ_v φ(√ε x_v) over one snapshot of particle positions.
pub fn rescale_functional(positions: &[[f64; 3]], d: usize, epsilon: f64, phi: &TestFunction) -> f64 {
    let root = epsilon.sqrt();
    let mut acc = 0.0;
    let mut scaled = [0.0; 3];
    for p in positions {
        for k in 0..d {
            scaled[k] = root * p[k];
        }
        acc += phi.eval(&scaled[..d]);
    }
    epsilon * acc
}
