//! Radial semilinear boundary value problem with blow-up boundary data.
//!
//! Solves ½ (u'' + (d-1) u'/r) = ψ_(a)(u) on [0, R) with u'(0) = 0 and
//! u = +∞ on the boundary, through the Dirichlet ladder u(R) = n for an
//! increasing sequence of n, followed by extrapolation along the
//! (R - r)^{-2} boundary asymptote: the rung with boundary value n looks
//! like the blow-up solution of a domain enlarged by s_n = sqrt(6/(σ² n)).

use crate::error::{Error, Result};
use crate::pde::BranchingMechanism;
use crate::quad::polyfit;

pub const DEFAULT_LADDER: [f64; 6] = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6];

#[derive(Clone, Debug)]
pub struct RadialSolution {
    pub dim: usize,
    pub radius: f64,
    pub a: f64,
    pub sigma2: f64,
    /// Mesh of the last rung, ascending, grid[0] = 0, grid[N] = radius.
    pub grid: Vec<f64>,
    /// Values of the last (largest-n) rung on `grid`.
    pub values: Vec<f64>,
    /// `(n, u_n(0))` for each ladder rung.
    pub ladder: Vec<(f64, f64)>,
    /// Extrapolated center value u_(a)(0).
    pub u0: f64,
    /// RMS residual of the extrapolation fit, as a relative quantity.
    pub fit_residual: f64,
}

struct Mesh {
    r: Vec<f64>,
}

/// Geometric grading from the wall: spacing proportional to distance from
/// the boundary, clamped to [h_min, h_max].
fn build_mesh(radius: f64, h_min: f64, growth: f64, h_max_frac: f64) -> Mesh {
    let h_max = radius * h_max_frac;
    let mut ts = vec![0.0, h_min];
    loop {
        let t = *ts.last().unwrap();
        let step = (t * growth).clamp(h_min, h_max);
        let next = t + step;
        if next >= radius - 0.5 * h_min {
            break;
        }
        ts.push(next);
    }
    let mut r: Vec<f64> = ts.iter().map(|t| radius - t).collect();
    r.push(0.0);
    r.reverse();
    Mesh { r }
}

/// One Newton solve of the Dirichlet problem u(R) = n on the mesh, starting
/// from `init` (resized/interpolated by the caller). Unknowns are
/// u_0..u_{N-1}; u_N is pinned to the boundary value.
fn solve_rung(mesh: &Mesh, mech: &BranchingMechanism, dim: usize, n_boundary: f64, u: &mut [f64]) -> Result<()> {
    let r = &mesh.r;
    let nn = r.len() - 1; // index of the boundary node
    assert_eq!(u.len(), nn + 1);
    u[nn] = n_boundary;

    let d = dim as f64;
    let mut resid = vec![0.0; nn];
    let mut lower = vec![0.0; nn];
    let mut diag = vec![0.0; nn];
    let mut upper = vec![0.0; nn];
    let mut delta = vec![0.0; nn];
    let mut trial = vec![0.0; nn + 1];

    // Residual together with the magnitude of the terms that formed it; the
    // attainable residual is bounded below by rounding on u/h² near the
    // boundary, so convergence tests must compare against that floor.
    let assemble = |u: &[f64], resid: &mut [f64]| -> f64 {
        let h0 = r[1] - r[0];
        resid[0] = d * (u[1] - u[0]) / (h0 * h0) - mech.psi(u[0]);
        let mut mag = d * (u[1].abs() + u[0].abs()) / (h0 * h0) + mech.psi(u[0].abs());
        for i in 1..nn {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let denom = hm * hp * (hm + hp);
            let d2 = 2.0 * (hm * u[i + 1] - (hm + hp) * u[i] + hp * u[i - 1]) / denom;
            let d1 = (hm * hm * u[i + 1] - hp * hp * u[i - 1] + (hp * hp - hm * hm) * u[i]) / denom;
            resid[i] = 0.5 * (d2 + (d - 1.0) / r[i] * d1) - mech.psi(u[i]);
            let m = (hm * u[i + 1].abs() + (hm + hp) * u[i].abs() + hp * u[i - 1].abs()) / denom;
            if m > mag {
                mag = m;
            }
        }
        mag
    };

    let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut mag = assemble(u, &mut resid);
    let mut fnorm = norm(&resid);
    let tol_of = |mag: f64| (1e-12 * mech.psi(n_boundary).max(1.0)).max(64.0 * f64::EPSILON * mag);

    for _iter in 0..120 {
        if fnorm <= tol_of(mag) {
            return Ok(());
        }
        // Jacobian (tridiagonal).
        let h0 = r[1] - r[0];
        diag[0] = -d / (h0 * h0) - mech.psi_prime(u[0]);
        upper[0] = d / (h0 * h0);
        for i in 1..nn {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let denom = hm * hp * (hm + hp);
            let c_m = 0.5 * (2.0 * hp - (d - 1.0) / r[i] * hp * hp) / denom;
            let c_p = 0.5 * (2.0 * hm + (d - 1.0) / r[i] * hm * hm) / denom;
            let c_0 = 0.5 * (-2.0 * (hm + hp) + (d - 1.0) / r[i] * (hp * hp - hm * hm)) / denom;
            lower[i] = c_m;
            diag[i] = c_0 - mech.psi_prime(u[i]);
            upper[i] = if i + 1 < nn { c_p } else { 0.0 };
            if i + 1 == nn {
                // contribution of the pinned boundary node is in the residual
            }
        }
        // Solve J delta = -resid by the Thomas algorithm.
        {
            let mut c_star = vec![0.0; nn];
            let mut d_star = vec![0.0; nn];
            c_star[0] = upper[0] / diag[0];
            d_star[0] = -resid[0] / diag[0];
            for i in 1..nn {
                let m = diag[i] - lower[i] * c_star[i - 1];
                if m == 0.0 {
                    return Err(Error::numerics("solve_radial_bvp", "singular Jacobian"));
                }
                c_star[i] = upper[i] / m;
                d_star[i] = (-resid[i] - lower[i] * d_star[i - 1]) / m;
            }
            delta[nn - 1] = d_star[nn - 1];
            for i in (0..nn - 1).rev() {
                delta[i] = d_star[i] - c_star[i] * delta[i + 1];
            }
        }
        // Damped update.
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 1024.0 {
            trial[..nn]
                .iter_mut()
                .zip(u[..nn].iter().zip(delta.iter()))
                .for_each(|(t, (&ui, &di))| *t = ui + lambda * di);
            trial[nn] = n_boundary;
            let m = assemble(&trial, &mut resid);
            let fnew = norm(&resid);
            if fnew < fnorm * (1.0 - 0.2 * lambda) || fnew <= tol_of(m) {
                u[..nn].copy_from_slice(&trial[..nn]);
                fnorm = fnew;
                mag = m;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            if fnorm <= 16.0 * tol_of(mag) {
                return Ok(());
            }
            return Err(Error::numerics(
                "solve_radial_bvp",
                format!("Newton stalled at rung n = {n_boundary}, residual {fnorm:.3e}"),
            ));
        }
    }
    let m = assemble(u, &mut resid);
    if norm(&resid) <= 16.0 * tol_of(m) {
        Ok(())
    } else {
        Err(Error::numerics(
            "solve_radial_bvp",
            format!("Newton did not converge at rung n = {n_boundary}, residual {:.3e}", norm(&resid)),
        ))
    }
}

/// Dirichlet-ladder solve of the blow-up problem on the ball of radius
/// `r_ball` in dimension `d`.
pub fn solve_radial_bvp(a: f64, sigma2: f64, dim: usize, r_ball: f64, ladder: &[f64]) -> Result<RadialSolution> {
    if dim == 0 {
        return Err(Error::config("dimension must be >= 1"));
    }
    if !(r_ball > 0.0) || !r_ball.is_finite() {
        return Err(Error::config(format!("domain radius {r_ball} must be finite and > 0")));
    }
    if ladder.is_empty() || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] <= 0.0 {
        return Err(Error::config("ladder must be a positive increasing sequence"));
    }
    let mech = BranchingMechanism::new(a, sigma2);

    // Mesh resolving the boundary layer of the largest rung.
    let n_max = *ladder.last().unwrap();
    let layer = (6.0 / (sigma2 * n_max)).sqrt();
    let h_min = (0.04 * layer).min(2.5e-5 * r_ball);
    let mesh = build_mesh(r_ball, h_min, 0.01, 1.0 / 384.0);
    let nn = mesh.r.len() - 1;

    // Warm-up continuation so the first reported rung starts close.
    let mut u = vec![0.0; nn + 1];
    let mut warm = 1.0f64.min(ladder[0]);
    loop {
        solve_rung(&mesh, &mech, dim, warm, &mut u)?;
        if warm >= ladder[0] {
            break;
        }
        warm = (warm * 10.0).min(ladder[0]);
    }

    let mut rungs = Vec::with_capacity(ladder.len());
    let mut current = ladder[0];
    solve_rung(&mesh, &mech, dim, current, &mut u)?;
    rungs.push((current, u[0]));
    for &n in &ladder[1..] {
        // Continuation between rungs, in at most one intermediate hop.
        if n / current > 31.7 {
            let mid = current * (n / current).sqrt();
            solve_rung(&mesh, &mech, dim, mid, &mut u)?;
        }
        solve_rung(&mesh, &mech, dim, n, &mut u)?;
        current = n;
        rungs.push((n, u[0]));
    }

    let (u0, fit_residual) = extrapolate(&rungs, sigma2, r_ball)?;

    Ok(RadialSolution {
        dim,
        radius: r_ball,
        a,
        sigma2,
        grid: mesh.r.clone(),
        values: u,
        ladder: rungs,
        u0,
        fit_residual,
    })
}

/// Extrapolate the ladder to n = ∞ along the boundary asymptote. The rung
/// u_n looks like the blow-up solution of the ball of radius R + s_n with
/// s_n = sqrt(6/(σ² n)); scaling out the exact a = 0 domain dependence
/// (u(0) ∝ R^{-2}) flattens the sequence, and a quadratic fit in s_n removes
/// the rest.
fn extrapolate(rungs: &[(f64, f64)], sigma2: f64, r_ball: f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = rungs
        .iter()
        .map(|&(n, u0)| {
            let s = (6.0 / (sigma2 * n)).sqrt();
            (s, u0 * (1.0 + s / r_ball).powi(2))
        })
        .filter(|&(s, _)| s < 0.12 * r_ball)
        .collect();
    if pts.len() < 3 {
        return Err(Error::numerics(
            "solve_radial_bvp",
            "ladder too short for extrapolation; extend it to larger n",
        ));
    }
    let take = pts.len().min(4);
    let pts = &pts[pts.len() - take..];
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let deg = if take >= 4 { 2 } else { take - 1 };
    let coeffs = polyfit(&xs, &ys, deg);
    let mut rss = 0.0;
    for (&x, &y) in xs.iter().zip(&ys) {
        let fit: f64 = coeffs.iter().enumerate().map(|(j, c)| c * x.powi(j as i32)).sum();
        rss += (fit - y) * (fit - y);
    }
    let rms = (rss / xs.len() as f64).sqrt() / coeffs[0].abs().max(1e-300);
    Ok((coeffs[0], rms))
}

/// Relative discrepancy of the scaling identity u_(κ a)(x) = a v(√a x),
/// where v solves the problem with parameter κ on the ball of radius √a R.
pub fn scaling_check(a: f64, kappa: f64, sigma2: f64, dim: usize, r_ball: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::config("scaling_check requires a > 0"));
    }
    let lhs = solve_radial_bvp(kappa * a, sigma2, dim, r_ball, &DEFAULT_LADDER)?;
    let rhs = solve_radial_bvp(kappa, sigma2, dim, a.sqrt() * r_ball, &DEFAULT_LADDER)?;
    let left = lhs.u0;
    let right = a * rhs.u0;
    Ok((left - right).abs() / left.abs().max(1e-300))
}
