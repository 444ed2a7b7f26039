//! Independent d=1 oracle for the blow-up boundary value problem.
//!
//! The even solution on (-R, R) with u(±R) = ∞ satisfies u'(0) = 0, so the
//! first integral gives (u')² = 4 ∫_{u0}^{u} ψ(w) dw and the shooting
//! identity R = ∫_{u0}^∞ dv / sqrt(4 ∫_{u0}^v ψ(w) dw), solved for u0 = u(0).

use crate::error::{Error, Result};
use crate::pde::BranchingMechanism;
use crate::quad::{brent, integrate};

const QUAD_TOL: f64 = 1e-12;

/// Radius R(u0) of the interval whose blow-up solution has center value u0.
/// Strictly decreasing in u0.
fn radius_of_u0(u0: f64, mech: &BranchingMechanism) -> Result<f64> {
    let (s6, a) = (mech.sigma2 / 6.0, mech.a);
    // Substitute v = u0 + s²; then Ψ(v) = s² Q(s) exactly with
    // Q(s) = (σ²/6)(3 u0² + 3 u0 s² + s⁴) + (a/2)(2 u0 + s²),
    // so dv / (2 sqrt(Ψ)) = ds / sqrt(Q). Map s = s0 t/(1-t) onto t ∈ [0,1);
    // the integrand extends continuously to t = 1.
    let s0 = u0.sqrt().max(1e-3);
    let integrand = |t: f64| {
        if t >= 1.0 {
            // limit: ds/sqrt(Q) with Q ~ (σ²/6) s⁴ and ds/dt = s0/(1-t)²
            return (1.0 / s6.sqrt()) / s0;
        }
        let s = s0 * t / (1.0 - t);
        let ds = s0 / ((1.0 - t) * (1.0 - t));
        let s2 = s * s;
        let q = s6 * (3.0 * u0 * u0 + 3.0 * u0 * s2 + s2 * s2) + 0.5 * a * (2.0 * u0 + s2);
        ds / q.sqrt()
    };
    integrate(integrand, 0.0, 1.0, QUAD_TOL)
}

/// Center value u(0) of the blow-up solution on the interval (-R, R).
pub fn first_integral_1d(a: f64, sigma2: f64, r_ball: f64) -> Result<f64> {
    if !(r_ball > 0.0) {
        return Err(Error::numerics("first_integral_1d", format!("radius {r_ball} must be > 0")));
    }
    let mech = BranchingMechanism::new(a, sigma2);
    // Bracket u0: R(u0) decreasing, R -> 0 as u0 -> infinity and R -> infinity
    // as u0 -> 0.
    let mut hi = 1.0;
    let mut iters = 0;
    while radius_of_u0(hi, &mech)? > r_ball {
        hi *= 4.0;
        iters += 1;
        if iters > 200 {
            return Err(Error::numerics("first_integral_1d", "bracket failure (upper)"));
        }
    }
    let mut lo = hi;
    iters = 0;
    while radius_of_u0(lo, &mech)? < r_ball {
        lo *= 0.25;
        iters += 1;
        if iters > 400 || lo < 1e-280 {
            return Err(Error::numerics("first_integral_1d", "bracket failure (lower)"));
        }
    }
    let f = |u0: f64| radius_of_u0(u0, &mech).unwrap_or(f64::NAN) - r_ball;
    brent(f, lo, hi, 1e-13 * lo.max(1e-8))
}
