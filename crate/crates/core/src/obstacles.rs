//! Quenched Poissonian obstacle fields.
//!
//! The obstacle set is a union of closed balls `x_i + B(0, r_i)` whose
//! centers form a homogeneous Poisson process and whose radii are drawn from
//! a finite mixture. The field is unbounded: it is realized lazily, one
//! axis-aligned cell at a time, and the content of a cell is a pure function
//! of `(master_seed, cell index)`. Queries anywhere agree bit-exactly across
//! runs and query orders.

use crate::error::{Error, Result};
use crate::rng::{mix, Stream};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

pub const MAX_DIM: usize = 3;

/// Finite mixture of closed-ball shapes plus a Poisson intensity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeLaw {
    /// `(radius, weight)` pairs; weights are normalized on construction.
    atoms: Vec<(f64, f64)>,
    /// Expected obstacle count per unit volume.
    intensity: f64,
}

impl ShapeLaw {
    pub fn new(atoms: Vec<(f64, f64)>, intensity: f64) -> Result<Self> {
        if !(intensity >= 0.0) || !intensity.is_finite() {
            return Err(Error::config(format!("intensity must be finite and >= 0, got {intensity}")));
        }
        if atoms.is_empty() {
            return Err(Error::config("shape law needs at least one (radius, weight) atom"));
        }
        let mut total = 0.0;
        for &(r, w) in &atoms {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::config(format!("atom radius must be in (0, r0], got {r}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::config(format!("atom weight must be >= 0, got {w}")));
            }
            total += w;
        }
        if !(total > 0.0) {
            return Err(Error::config("atom weights must not all be zero"));
        }
        let atoms = atoms.into_iter().map(|(r, w)| (r, w / total)).collect();
        Ok(ShapeLaw { atoms, intensity })
    }

    /// Single radius, all mass on one atom.
    pub fn single(radius: f64, intensity: f64) -> Result<Self> {
        ShapeLaw::new(vec![(radius, 1.0)], intensity)
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Largest radius in the mixture; every obstacle fits in `B(0, r0)`.
    pub fn r0(&self) -> f64 {
        self.atoms.iter().map(|&(r, _)| r).fold(0.0, f64::max)
    }
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let d = d as f64;
    std::f64::consts::PI.powf(d / 2.0) / libm::tgamma(d / 2.0 + 1.0)
}

/// Probability that a fixed point is covered, `1 - exp(-λ ∫ Θ(dK) vol(K))`.
pub fn kappa(shape: &ShapeLaw, d: usize) -> f64 {
    let omega = unit_ball_volume(d);
    let mean_vol: f64 = shape.atoms.iter().map(|&(r, w)| w * omega * r.powi(d as i32)).sum();
    -(-shape.intensity * mean_vol).exp_m1()
}

#[derive(Clone, Copy, Debug)]
pub struct Ball {
    pub center: [f64; MAX_DIM],
    pub radius: f64,
}

/// Lazily sampled infinite Poisson field of closed balls.
#[derive(Clone, Debug)]
pub struct ObstacleField {
    shape: ShapeLaw,
    dim: usize,
    master_seed: u64,
    cell_size: f64,
    /// Cumulative atom weights for inverse-CDF radius sampling.
    atom_cdf: Vec<f64>,
}

impl ObstacleField {
    pub fn new(shape: ShapeLaw, dim: usize, master_seed: u64) -> Result<Self> {
        let cell_size = 2.0 * shape.r0();
        Self::with_cell_size(shape, dim, master_seed, cell_size)
    }

    pub fn with_cell_size(shape: ShapeLaw, dim: usize, master_seed: u64, cell_size: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::config(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
        }
        let r0 = shape.r0();
        if !(cell_size >= 2.0 * r0 * (1.0 - 1e-12)) {
            return Err(Error::config(format!(
                "cell_size {cell_size} must be >= 2*r0 = {}",
                2.0 * r0
            )));
        }
        let mut atom_cdf = Vec::with_capacity(shape.atoms.len());
        let mut acc = 0.0;
        for &(_, w) in &shape.atoms {
            acc += w;
            atom_cdf.push(acc);
        }
        if let Some(last) = atom_cdf.last_mut() {
            *last = 1.0;
        }
        Ok(ObstacleField { shape, dim, master_seed, cell_size, atom_cdf })
    }

    pub fn shape(&self) -> &ShapeLaw {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn r0(&self) -> f64 {
        self.shape.r0()
    }

    pub fn kappa(&self) -> f64 {
        kappa(&self.shape, self.dim)
    }

    #[inline]
    fn cell_of(&self, x: &[f64]) -> [i64; MAX_DIM] {
        let mut c = [0i64; MAX_DIM];
        for k in 0..self.dim {
            c[k] = (x[k] / self.cell_size).floor() as i64;
        }
        c
    }

    fn cell_stream(&self, cell: &[i64; MAX_DIM]) -> Stream {
        let mut key = mix(self.master_seed, 0x6f62_7374_6163_6c65);
        for k in 0..self.dim {
            // Zigzag so negative indices key distinct streams.
            let z = ((cell[k] << 1) ^ (cell[k] >> 63)) as u64;
            key = mix(key, z);
        }
        Stream::from_key(key)
    }

    /// Obstacles whose centers lie in the given cell. Pure function of
    /// `(master_seed, cell)`.
    pub fn balls_in_cell(&self, cell: &[i64; MAX_DIM]) -> Vec<Ball> {
        let mut s = self.cell_stream(cell);
        let volume = self.cell_size.powi(self.dim as i32);
        let count = s.poisson(self.shape.intensity * volume);
        let mut balls = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let mut center = [0.0; MAX_DIM];
            for k in 0..self.dim {
                center[k] = (cell[k] as f64 + s.u01()) * self.cell_size;
            }
            let u = s.u01();
            let idx = self.atom_cdf.iter().position(|&c| u <= c).unwrap_or(self.atom_cdf.len() - 1);
            balls.push(Ball { center, radius: self.shape.atoms[idx].0 });
        }
        balls
    }

    /// Closed-ball membership test. Only cells intersecting `B(x, r0)` are
    /// sampled.
    pub fn contains(&self, x: &[f64]) -> bool {
        debug_assert_eq!(x.len(), self.dim);
        for &xi in x {
            assert!(xi.is_finite(), "contains() requires finite coordinates");
        }
        if self.shape.intensity == 0.0 {
            return false;
        }
        let r0 = self.r0();
        let base = self.cell_of(x);
        let mut offsets = [[0i64; MAX_DIM]; 27];
        let n_off = neighbor_offsets(self.dim, &mut offsets);
        for off in offsets.iter().take(n_off) {
            let mut cell = [0i64; MAX_DIM];
            for k in 0..self.dim {
                cell[k] = base[k] + off[k];
            }
            // Skip cells that cannot host a covering ball.
            if cell_point_dist2(&cell, x, self.cell_size, self.dim) > r0 * r0 {
                continue;
            }
            for ball in self.balls_in_cell(&cell) {
                if dist2(&ball.center, x, self.dim) <= ball.radius * ball.radius {
                    return true;
                }
            }
        }
        false
    }

    /// Monte Carlo coverage of a window: fraction of `n` uniform points that
    /// lie in the obstacle set, with its binomial standard error.
    pub fn empirical_coverage(&self, window: &Window, n: u64, seed: u64) -> Result<Coverage> {
        if n == 0 {
            return Err(Error::config("coverage requires n >= 1"));
        }
        window.validate(self.dim)?;
        let mut s = Stream::from_key(mix(seed, 0x636f_7665_7261_6765));
        let mut hits = 0u64;
        let mut x = [0.0; MAX_DIM];
        let mut view = FieldView::new(self);
        for _ in 0..n {
            for k in 0..self.dim {
                x[k] = s.uniform(window.lo[k], window.hi[k]);
            }
            if view.contains(&x[..self.dim]) {
                hits += 1;
            }
        }
        let est = hits as f64 / n as f64;
        let se = (est * (1.0 - est) / n as f64).sqrt();
        Ok(Coverage { estimate: est, std_error: se, hits, n })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Coverage {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub n: u64,
}

/// Axis-aligned box window.
#[derive(Clone, Debug)]
pub struct Window {
    pub lo: [f64; MAX_DIM],
    pub hi: [f64; MAX_DIM],
}

impl Window {
    pub fn new(lo: [f64; MAX_DIM], hi: [f64; MAX_DIM]) -> Self {
        Window { lo, hi }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        for k in 0..dim {
            if !(self.hi[k] > self.lo[k]) {
                return Err(Error::config(format!(
                    "degenerate window on axis {k}: [{}, {}]",
                    self.lo[k], self.hi[k]
                )));
            }
        }
        Ok(())
    }
}

fn neighbor_offsets(dim: usize, out: &mut [[i64; MAX_DIM]; 27]) -> usize {
    let mut n = 0;
    match dim {
        1 => {
            for a in -1..=1 {
                out[n][0] = a;
                n += 1;
            }
        }
        2 => {
            for a in -1..=1i64 {
                for b in -1..=1i64 {
                    out[n] = [a, b, 0];
                    n += 1;
                }
            }
        }
        _ => {
            for a in -1..=1i64 {
                for b in -1..=1i64 {
                    for c in -1..=1i64 {
                        out[n] = [a, b, c];
                        n += 1;
                    }
                }
            }
        }
    }
    n
}

#[inline]
fn dist2(a: &[f64; MAX_DIM], x: &[f64], dim: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..dim {
        let d = a[k] - x[k];
        acc += d * d;
    }
    acc
}

/// Squared distance from `x` to the closed box of `cell`.
#[inline]
fn cell_point_dist2(cell: &[i64; MAX_DIM], x: &[f64], cs: f64, dim: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..dim {
        let lo = cell[k] as f64 * cs;
        let hi = lo + cs;
        let d = if x[k] < lo {
            lo - x[k]
        } else if x[k] > hi {
            x[k] - hi
        } else {
            0.0
        };
        acc += d * d;
    }
    acc
}

/// Memoizing view over a field. Caching is result-invisible: cells are pure
/// functions of the seed, the cache only avoids resampling them.
pub struct FieldView<'a> {
    field: &'a ObstacleField,
    cells: FxHashMap<[i64; MAX_DIM], Vec<Ball>>,
}

impl<'a> FieldView<'a> {
    pub fn new(field: &'a ObstacleField) -> Self {
        FieldView { field, cells: FxHashMap::default() }
    }

    pub fn field(&self) -> &ObstacleField {
        self.field
    }

    pub fn contains(&mut self, x: &[f64]) -> bool {
        let f = self.field;
        if f.shape.intensity == 0.0 {
            return false;
        }
        let r0 = f.r0();
        let base = f.cell_of(x);
        let mut offsets = [[0i64; MAX_DIM]; 27];
        let n_off = neighbor_offsets(f.dim, &mut offsets);
        for off in offsets.iter().take(n_off) {
            let mut cell = [0i64; MAX_DIM];
            for k in 0..f.dim {
                cell[k] = base[k] + off[k];
            }
            if cell_point_dist2(&cell, x, f.cell_size, f.dim) > r0 * r0 {
                continue;
            }
            let balls = self.cells.entry(cell).or_insert_with(|| f.balls_in_cell(&cell));
            for ball in balls.iter() {
                if dist2(&ball.center, x, f.dim) <= ball.radius * ball.radius {
                    return true;
                }
            }
        }
        false
    }
}

/// One-dimensional membership accelerator: keeps the merged union of ball
/// intervals over a five-cell window so the per-step query is a couple of
/// comparisons. Valid over the middle three cells; a diffusing particle
/// crosses that zone in O((cell/step)²) steps, so rebuilds amortize away.
pub struct LineView<'a> {
    field: &'a ObstacleField,
    valid_lo: f64,
    valid_hi: f64,
    intervals: Vec<(f64, f64)>,
    raw: Vec<(f64, f64)>,
}

impl<'a> LineView<'a> {
    pub fn new(field: &'a ObstacleField) -> Self {
        assert_eq!(field.dim, 1, "LineView is for 1-d fields");
        LineView { field, valid_lo: 1.0, valid_hi: 0.0, intervals: Vec::new(), raw: Vec::new() }
    }

    fn rebuild(&mut self, x: f64) {
        let cs = self.field.cell_size;
        let cell = (x / cs).floor() as i64;
        self.valid_lo = (cell - 1) as f64 * cs;
        self.valid_hi = (cell + 2) as f64 * cs;
        self.intervals.clear();
        self.raw.clear();
        for c in cell - 2..=cell + 2 {
            for ball in self.field.balls_in_cell(&[c, 0, 0]) {
                self.raw.push((ball.center[0] - ball.radius, ball.center[0] + ball.radius));
            }
        }
        self.raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &self.raw {
            match self.intervals.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => self.intervals.push((a, b)),
            }
        }
    }

    #[inline]
    pub fn contains(&mut self, x: f64) -> bool {
        if x < self.valid_lo || x >= self.valid_hi {
            if self.field.shape.intensity == 0.0 {
                return false;
            }
            self.rebuild(x);
        }
        for &(a, b) in &self.intervals {
            if x < a {
                return false;
            }
            if x <= b {
                return true;
            }
        }
        false
    }
}
