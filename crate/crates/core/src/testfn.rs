//! Bounded test functions with closed-form heat-semigroup action, used by
//! the moment oracles and the experiment harnesses.

use serde::{Deserialize, Serialize};

/// Radial profiles for the parabolic solver.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum RadialProfile {
    Constant(f64),
    /// amplitude · exp(-r² / (2 width²))
    GaussianBump { amplitude: f64, width: f64 },
}

impl RadialProfile {
    pub fn eval_radial(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Constant(c) => c,
            RadialProfile::GaussianBump { amplitude, width } => {
                amplitude * (-r * r / (2.0 * width * width)).exp()
            }
        }
    }

    /// Radius beyond which the profile is negligible (0 for constants, which
    /// never decay).
    pub fn extent(&self) -> f64 {
        match *self {
            RadialProfile::Constant(_) => 0.0,
            RadialProfile::GaussianBump { width, .. } => 12.0 * width,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match *self {
            RadialProfile::Constant(c) => c >= 0.0,
            RadialProfile::GaussianBump { amplitude, .. } => amplitude >= 0.0,
        }
    }
}

/// Bounded measurable test functions h on R^d with closed-form S_t h.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum TestFunction {
    Const(f64),
    /// Indicator of the half-space { x_0 >= threshold }.
    HalfSpace { threshold: f64 },
    /// amplitude · exp(-|x|² / (2 width²)), radial.
    Gaussian { amplitude: f64, width: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            TestFunction::Const(c) => c,
            TestFunction::HalfSpace { threshold } => {
                if x[0] >= threshold {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Gaussian { amplitude, width } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match *self {
            TestFunction::Const(c) => c.abs(),
            TestFunction::HalfSpace { .. } => 1.0,
            TestFunction::Gaussian { amplitude, .. } => amplitude.abs(),
        }
    }

    /// Heat semigroup (S_t h)(x) = E[h(x + B_t)] in d dimensions.
    pub fn heat(&self, t: f64, x: &[f64], d: usize) -> f64 {
        debug_assert!(x.len() >= d);
        if t == 0.0 {
            return self.eval(x);
        }
        match *self {
            TestFunction::Const(c) => c,
            TestFunction::HalfSpace { threshold } => {
                crate::quad::normal_cdf((x[0] - threshold) / t.sqrt())
            }
            TestFunction::Gaussian { amplitude, width } => {
                let w2 = width * width;
                let r2: f64 = x[..d].iter().map(|v| v * v).sum();
                amplitude * (w2 / (w2 + t)).powf(d as f64 / 2.0) * (-r2 / (2.0 * (w2 + t))).exp()
            }
        }
    }
}
