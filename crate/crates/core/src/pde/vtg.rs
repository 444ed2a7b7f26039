//! Semilinear parabolic semigroup u_t = V_t g solving
//! ∂u/∂t = ½ Δu - ψ_(a)(u), u_0 = g, for radial nonnegative g.
//!
//! Method of lines on a radial grid with Strang splitting: the reaction flow
//! is integrated exactly (logistic decay), the diffusion half is
//! Crank-Nicolson. For spatially constant g the scheme reproduces the
//! Riccati/logistic closed forms to rounding.

use crate::error::{Error, Result};
use crate::pde::BranchingMechanism;
use crate::testfn::RadialProfile;

#[derive(Clone, Debug)]
pub struct VtgSolution {
    pub t: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub truncation_radius: f64,
}

impl VtgSolution {
    /// Linear interpolation on the radial grid.
    pub fn at(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= *self.grid.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let idx = self.grid.partition_point(|&g| g <= r).max(1) - 1;
        let (r0, r1) = (self.grid[idx], self.grid[idx + 1]);
        let w = (r - r0) / (r1 - r0);
        self.values[idx] * (1.0 - w) + self.values[idx + 1] * w
    }
}

/// Solve u_t = V_t g at time `t` on the ball of radius R_inf (chosen from the
/// profile's extent and the diffusion scale).
pub fn vtg_semigroup(g: &RadialProfile, t: f64, a: f64, sigma2: f64, dim: usize) -> Result<VtgSolution> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::config(format!("time {t} must be finite and >= 0")));
    }
    if dim == 0 {
        return Err(Error::config("dimension must be >= 1"));
    }
    if !g.is_nonnegative() {
        return Err(Error::config("vtg_semigroup requires a nonnegative profile"));
    }
    let mech = BranchingMechanism::new(a, sigma2);
    let r_inf = g.extent() + 8.0 * (t + 1.0).sqrt();
    let h = (r_inf / 600.0).min(0.05);
    let n = (r_inf / h).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut u: Vec<f64> = grid.iter().map(|&r| g.eval_radial(r)).collect();

    if t > 0.0 {
        let steps = ((t / 2e-3).ceil() as usize).max(8);
        let dt = t / steps as f64;
        let d = dim as f64;

        // Crank-Nicolson factors for ½Δ with the radial first-derivative
        // term; Neumann at both ends (symmetry at r = 0, no flux at R_inf).
        let m = u.len();
        let mut lo = vec![0.0; m];
        let mut di = vec![0.0; m];
        let mut up = vec![0.0; m];
        // Row 0: ½ Δu(0) = d (u1 - u0)/h².
        di[0] = -d / (h * h);
        up[0] = d / (h * h);
        for i in 1..m - 1 {
            let r = grid[i];
            let lap = 1.0 / (h * h);
            let grad = (d - 1.0) / (2.0 * r * h);
            lo[i] = 0.5 * (lap - grad);
            di[i] = -lap;
            up[i] = 0.5 * (lap + grad);
        }
        // Row m-1: mirror ghost node (no flux).
        lo[m - 1] = 1.0 / (h * h);
        di[m - 1] = -1.0 / (h * h);

        let theta = 0.5 * dt;
        let mut rhs = vec![0.0; m];
        let mut c_star = vec![0.0; m];
        let mut d_star = vec![0.0; m];
        for _ in 0..steps {
            for v in u.iter_mut() {
                *v = mech.reaction_flow(*v, 0.5 * dt);
            }
            // (I - θ L) u⁺ = (I + θ L) u
            rhs[0] = u[0] + theta * (di[0] * u[0] + up[0] * u[1]);
            for i in 1..m - 1 {
                rhs[i] = u[i] + theta * (lo[i] * u[i - 1] + di[i] * u[i] + up[i] * u[i + 1]);
            }
            rhs[m - 1] = u[m - 1] + theta * (lo[m - 1] * u[m - 2] + di[m - 1] * u[m - 1]);
            // Thomas solve with A = I - θ L.
            let a0 = 1.0 - theta * di[0];
            c_star[0] = -theta * up[0] / a0;
            d_star[0] = rhs[0] / a0;
            for i in 1..m {
                let ai = 1.0 - theta * di[i];
                let li = -theta * lo[i];
                let ui = if i + 1 < m { -theta * up[i] } else { 0.0 };
                let denom = ai - li * c_star[i - 1];
                c_star[i] = ui / denom;
                d_star[i] = (rhs[i] - li * d_star[i - 1]) / denom;
            }
            u[m - 1] = d_star[m - 1];
            for i in (0..m - 1).rev() {
                u[i] = d_star[i] - c_star[i] * u[i + 1];
            }
            for v in u.iter_mut() {
                *v = mech.reaction_flow(*v, 0.5 * dt);
            }
        }
    }

    // The truncation is harmless only if the solution is flat at the outer
    // edge (constant data) or has decayed there.
    let edge = *u.last().unwrap();
    let edge_slope = (u[u.len() - 1] - u[u.len() - 2]).abs() / h;
    if edge_slope > 1e-9 * (1.0 + edge.abs()) && edge > 1e-12 {
        return Err(Error::numerics(
            "vtg_semigroup",
            format!("truncation radius too small: u(R_inf) = {edge:.3e}, slope {edge_slope:.3e}"),
        ));
    }

    Ok(VtgSolution { t, grid, values: u, truncation_radius: r_inf })
}
