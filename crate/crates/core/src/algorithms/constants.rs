use serde::Serialize;

/// Constants of the MTLM analysis and the fixed-phase lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PaperConstants {
    /// MTLM phase factor: the positive root of `3c^3 - 8c - 4`.
    pub c0: f64,
    /// MTLM ratio: the largest real root of `R^3 - 5R^2 + 3R + 3`.
    pub r0: f64,
    /// `1 / (R0 - 1)`.
    pub alpha: f64,
    /// Phase-length threshold `2(R0 + 1) / (R0^2 - 2R0 - 1)`.
    pub c_t: f64,
    /// Linear-play split `1 + 1/R0`.
    pub t_lin: f64,
}

impl PaperConstants {
    pub fn c0_residual(&self) -> f64 {
        c0_poly(self.c0)
    }

    pub fn r0_residual(&self) -> f64 {
        r0_poly(self.r0)
    }
}

pub fn c0_poly(c: f64) -> f64 {
    3.0 * c * c * c - 8.0 * c - 4.0
}

fn c0_poly_deriv(c: f64) -> f64 {
    9.0 * c * c - 8.0
}

pub fn r0_poly(r: f64) -> f64 {
    ((r - 5.0) * r + 3.0) * r + 3.0
}

fn r0_poly_deriv(r: f64) -> f64 {
    3.0 * r * r - 10.0 * r + 3.0
}

/// Bisection on a sign change, then a few Newton steps.
fn root(f: fn(f64) -> f64, df: fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..4 {
        let step = f(x) / df(x);
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// Root-found constants.
pub fn paper_constants() -> PaperConstants {
    // 3c^3 - 8c - 4 has one positive root; f(1) < 0 < f(2)
    let c0 = root(c0_poly, c0_poly_deriv, 1.0, 2.0);
    // the cubic's roots lie near -0.5, 1.4 and 4.09; the largest is above
    // the local minimum at (10 + sqrt(64)) / 6 = 3
    let r0 = root(r0_poly, r0_poly_deriv, 3.0, 5.0);
    let alpha = 1.0 / (r0 - 1.0);
    let c_t = 2.0 * (r0 + 1.0) / (r0 * r0 - 2.0 * r0 - 1.0);
    let t_lin = 1.0 + 1.0 / r0;
    PaperConstants { c0, r0, alpha, c_t, t_lin }
}
