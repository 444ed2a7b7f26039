//! 1-d exit probability for branching Brownian motion killed homogeneously
//! at rate ε, via the implicit integral
//!
//!   ∫_{p(x)}^1 du / sqrt(2 ε u² + 4 Γ(u)) = x,
//!
//! which inverts the ODE ½ p'' = ε p + Φ(p) with p(0) = 1, p(∞) = 0.

use crate::error::{Error, Result};
use crate::offspring::OffspringDistribution;
use crate::quad::{brent, integrate};

const QUAD_TOL: f64 = 1e-13;
const ROOT_TOL: f64 = 1e-12;

/// Distance x(p) from the implicit integral; strictly decreasing in p.
fn x_of_p(p: f64, eps: f64, nu: &OffspringDistribution) -> Result<f64> {
    if p >= 1.0 {
        return Ok(0.0);
    }
    let integrand = |u: f64| {
        let g = 2.0 * eps * u * u + 4.0 * nu.gamma_int(u.clamp(0.0, 1.0)).unwrap_or(f64::NAN);
        1.0 / g.sqrt()
    };
    integrate(integrand, p, 1.0, QUAD_TOL)
}

/// The unique p ∈ (0, 1] with ∫_p^1 du/sqrt(2εu² + 4Γ(u)) = x.
pub fn exit_prob_1d(eps: f64, x: f64, nu: &OffspringDistribution) -> Result<f64> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::numerics("exit_prob_1d", format!("epsilon {eps} invalid")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::numerics("exit_prob_1d", format!("x {x} must be finite and >= 0")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    // Bracket p from below: x(p) -> infinity as p -> 0+.
    let mut lo = 0.5;
    let mut iters = 0;
    while x_of_p(lo, eps, nu)? < x {
        lo *= 0.25;
        iters += 1;
        if iters > 500 || lo < 1e-290 {
            return Err(Error::numerics(
                "exit_prob_1d",
                format!("failed to bracket p for x = {x}, eps = {eps}"),
            ));
        }
    }
    let f = |p: f64| x_of_p(p, eps, nu).unwrap_or(f64::NAN) - x;
    let p = brent(f, lo, 1.0, ROOT_TOL * lo.max(1e-6))?;
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> OffspringDistribution {
        OffspringDistribution::binary()
    }

    #[test]
    fn boundary_condition_at_zero() {
        assert_eq!(exit_prob_1d(0.0, 0.0, &binary()).unwrap(), 1.0);
        assert_eq!(exit_prob_1d(0.7, 0.0, &binary()).unwrap(), 1.0);
    }

    #[test]
    fn binary_closed_form_eps_zero() {
        // p(x) = 6 / (x + sqrt(6))^2 solves (1/2) p'' = p^2 / 2.
        let nu = binary();
        let sqrt6 = 6.0f64.sqrt();
        for &x in &[0.5, 1.0, sqrt6, 5.0, 10.0] {
            let p = exit_prob_1d(0.0, x, &nu).unwrap();
            let exact = 6.0 / (x + sqrt6).powi(2);
            assert!((p - exact).abs() < 1e-9, "x = {x}: {p} vs {exact}");
        }
        assert!((exit_prob_1d(0.0, sqrt6, &nu).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn decreasing_in_x_and_in_eps() {
        let nu = binary();
        let mut prev = 1.0;
        for i in 1..=20 {
            let x = i as f64 * 0.5;
            let p = exit_prob_1d(0.0, x, &nu).unwrap();
            assert!(p < prev);
            prev = p;
        }
        for &x in &[0.5, 2.0, 8.0] {
            let p0 = exit_prob_1d(0.0, x, &nu).unwrap();
            let p1 = exit_prob_1d(0.05, x, &nu).unwrap();
            let p2 = exit_prob_1d(0.5, x, &nu).unwrap();
            assert!(p0 > p1 && p1 > p2, "x = {x}");
        }
    }

    #[test]
    fn far_field_decay_with_killing() {
        // For eps > 0 the decay is exponential at rate sqrt(2 eps).
        let nu = binary();
        let eps = 0.5;
        let p20 = exit_prob_1d(eps, 20.0, &nu).unwrap();
        let p25 = exit_prob_1d(eps, 25.0, &nu).unwrap();
        let rate = -(p25 / p20).ln() / 5.0;
        assert!((rate - (2.0 * eps).sqrt()).abs() < 0.02, "rate {rate}");
    }

    #[test]
    fn ode_residual_small_on_grid() {
        // Five-point second difference of p against eps p + Phi(p).
        let nu = OffspringDistribution::geometric_type();
        for &eps in &[0.0, 0.05, 0.5] {
            let h = 0.04;
            for i in 0..12 {
                let x = 0.4 + 0.35 * i as f64;
                let mut p = [0.0; 5];
                for (j, pj) in p.iter_mut().enumerate() {
                    *pj = exit_prob_1d(eps, x + (j as f64 - 2.0) * h, &nu).unwrap();
                }
                let d2 = (-p[0] + 16.0 * p[1] - 30.0 * p[2] + 16.0 * p[3] - p[4]) / (12.0 * h * h);
                let resid = 0.5 * d2 - eps * p[2] - nu.phi(p[2]).unwrap();
                assert!(resid.abs() < 1e-6, "eps {eps}, x {x}: residual {resid:.2e}");
            }
        }
    }
}
