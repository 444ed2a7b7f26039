//! Adaptive quadrature and root finding used by the PDE oracles.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Gauss-Legendre nodes/weights on [-1, 1], computed by Newton iteration on
/// the Legendre recurrence to machine precision.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

struct Rules {
    lo_nodes: Vec<f64>,
    lo_weights: Vec<f64>,
    hi_nodes: Vec<f64>,
    hi_weights: Vec<f64>,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| {
        let (lo_nodes, lo_weights) = gauss_legendre(10);
        let (hi_nodes, hi_weights) = gauss_legendre(21);
        Rules { lo_nodes, lo_weights, hi_nodes, hi_weights }
    })
}

fn apply_rule<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive Gauss quadrature of `f` over [a, b] to absolute tolerance `tol`.
///
/// Error is estimated per interval by comparing 10-point and 21-point
/// rules. An interval is accepted when its error fits the
/// length-proportional budget or sits at the local roundoff floor
/// (integrable endpoint singularities would otherwise subdivide forever).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let r = rules();
    let mut total = 0.0;
    let mut err_total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    let span = (b - a).abs();
    while let Some((lo, hi, depth)) = stack.pop() {
        let coarse = apply_rule(&mut f, lo, hi, &r.lo_nodes, &r.lo_weights);
        let fine = apply_rule(&mut f, lo, hi, &r.hi_nodes, &r.hi_weights);
        let err = (fine - coarse).abs();
        let local_tol = tol * ((hi - lo).abs() / span).max(1e-300);
        if err <= local_tol || err <= 1e-14 * fine.abs() || depth >= 50 {
            total += fine;
            err_total += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    if !total.is_finite() {
        return Err(Error::numerics("integrate", "non-finite integral"));
    }
    if err_total > (100.0 * tol).max(1e-11 * total.abs()) {
        return Err(Error::numerics(
            "integrate",
            format!("no convergence: error estimate {err_total:.3e} for integral {total:.6e}"),
        ));
    }
    Ok(total)
}

/// Brent root finding on a bracket [a, b] with f(a)·f(b) <= 0.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, x1: f64, x2: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b, mut c) = (x1, x2, x2);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::numerics(
            "brent",
            format!("no sign change on bracket: f({a}) = {fa:.3e}, f({b}) = {fb:.3e}"),
        ));
    }
    let mut fc = fb;
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..300 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::numerics("brent", "iteration limit"))
}

/// Simple least-squares fit of y = c0 + c1 x; returns (c0, c1).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// Least-squares polynomial fit of small degree; returns ascending
/// coefficients. Solved by normal equations with Gaussian elimination, which
/// is fine at the degrees (<= 3) used here.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Vec<f64> {
    let m = degree + 1;
    let mut ata = vec![vec![0.0; m]; m];
    let mut atb = vec![0.0; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut pow = vec![1.0; m];
        for j in 1..m {
            pow[j] = pow[j - 1] * x;
        }
        for i in 0..m {
            atb[i] += pow[i] * y;
            for j in 0..m {
                ata[i][j] += pow[i] * pow[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let mut piv = col;
        for row in col + 1..m {
            if ata[row][col].abs() > ata[piv][col].abs() {
                piv = row;
            }
        }
        ata.swap(col, piv);
        atb.swap(col, piv);
        let diag = ata[col][col];
        for row in col + 1..m {
            let factor = ata[row][col] / diag;
            for j in col..m {
                ata[row][j] -= factor * ata[col][j];
            }
            atb[row] -= factor * atb[col];
        }
    }
    let mut coeffs = vec![0.0; m];
    for row in (0..m).rev() {
        let mut acc = atb[row];
        for j in row + 1..m {
            acc -= ata[row][j] * coeffs[j];
        }
        coeffs[row] = acc / ata[row][row];
    }
    coeffs
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12).unwrap();
        // antiderivative x^4/4 - x^2 + x: F(3) - F(-1) = (81/4 - 9 + 3) - (1/4 - 1 - 1)
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 2.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn integrates_peaked_function() {
        // ∫_0^1 1/sqrt(x + 1e-8) dx = 2(sqrt(1 + 1e-8) - 1e-4)
        let v = integrate(|x| 1.0 / (x + 1e-8).sqrt(), 0.0, 1.0, 1e-11).unwrap();
        let exact = 2.0 * ((1.0f64 + 1e-8).sqrt() - 1e-4);
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn integrates_gaussian() {
        let v = integrate(|x| (-x * x / 2.0).exp(), -8.0, 8.0, 1e-13).unwrap();
        let exact = (2.0 * std::f64::consts::PI).sqrt();
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn brent_finds_root() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn brent_rejects_bad_bracket() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn polyfit_recovers_quadratic() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x + 0.5 * x * x).collect();
        let c = polyfit(&xs, &ys, 2);
        assert!((c[0] - 3.0).abs() < 1e-10);
        assert!((c[1] + 2.0).abs() < 1e-9);
        assert!((c[2] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-9);
    }
}
