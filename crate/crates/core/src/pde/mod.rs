//! Numerical oracles: the 1-d exit probability through its implicit
//! integral, the singular radial boundary value problem with blow-up data,
//! and the semilinear parabolic semigroup.

mod bvp;
mod exit;
mod first_integral;
mod vtg;

pub use bvp::{scaling_check, solve_radial_bvp, RadialSolution, DEFAULT_LADDER};
pub use exit::exit_prob_1d;
pub use first_integral::first_integral_1d;
pub use vtg::{vtg_semigroup, VtgSolution};

use serde::{Deserialize, Serialize};

/// Branching mechanism ψ_(a)(u) = (σ²/2) u² + a u.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BranchingMechanism {
    pub a: f64,
    pub sigma2: f64,
}

impl BranchingMechanism {
    pub fn new(a: f64, sigma2: f64) -> Self {
        assert!(a >= 0.0, "killing parameter a must be >= 0");
        assert!(sigma2 > 0.0, "sigma^2 must be > 0");
        BranchingMechanism { a, sigma2 }
    }

    #[inline]
    pub fn psi(&self, u: f64) -> f64 {
        0.5 * self.sigma2 * u * u + self.a * u
    }

    #[inline]
    pub fn psi_prime(&self, u: f64) -> f64 {
        self.sigma2 * u + self.a
    }

    /// Exact flow of u' = -ψ(u) over a time step; logistic-type decay.
    pub fn reaction_flow(&self, u: f64, dt: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        if self.a == 0.0 {
            u / (1.0 + 0.5 * self.sigma2 * u * dt)
        } else {
            let e = (-self.a * dt).exp();
            self.a * u * e / (self.a + 0.5 * self.sigma2 * u * (1.0 - e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reaction_flow_matches_closed_forms() {
        let m = BranchingMechanism::new(0.0, 1.3);
        let c = 0.7;
        let t = 2.5;
        let expect = c / (1.0 + 0.5 * 1.3 * c * t);
        assert!((m.reaction_flow(c, t) - expect).abs() < 1e-15);

        let m = BranchingMechanism::new(0.9, 2.0);
        let got = m.reaction_flow(c, t);
        let e = (-0.9f64 * t).exp();
        let expect = 0.9 * c * e / (0.9 + 1.0 * c * (1.0 - e));
        assert!((got - expect).abs() < 1e-15);
    }
}
