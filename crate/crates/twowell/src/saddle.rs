//! Saddle-point representation of the grand partition function.
//!
//! Decoupling the interaction turns log Ξ into a two-dimensional integral
//! over auxiliary fields (x, y) with an effective landscape F(x, y) whose
//! global maximum F* controls convergence: the csch^2 integrand diverges as
//! F* -> 0^-. This module evaluates the landscape, integrates the csch^2
//! form numerically, and exposes the quadratic/quartic expansion
//! coefficients that fix the divergence exponent.

use crate::boundary::{classify, CaseLabel};
use crate::error::{Error, Result};
use crate::gauss::{gauss_legendre, integrate_1d};
use crate::model::ModelParams;
use crate::thermo::BathParams;

/// Effective landscape of the decoupled partition function at one
/// (gamma, lambda, mu).
#[derive(Debug, Clone)]
pub struct SaddleLandscape {
    params: ModelParams,
    mu: f64,
    lambda_c: f64,
    /// Region label of (lambda, mu) from the equilibrium diagram.
    pub case: CaseLabel,
    /// Landscape maxima (x*, y*): one on the case-1 side, a symmetric pair
    /// on the case-2 side.
    pub maxima: Vec<(f64, f64)>,
    /// F evaluated at a maximum.
    pub f_star: f64,
}

impl SaddleLandscape {
    /// F(x, y) = -x^2 - y^2 + sqrt(2 lambda) x + sqrt(2 lambda y^2 + lambda_c^2) + mu.
    pub fn f(&self, x: f64, y: f64) -> f64 {
        let l = self.params.lambda();
        -x * x - y * y
            + (2.0 * l).sqrt() * x
            + (2.0 * l * y * y + self.lambda_c * self.lambda_c).sqrt()
            + self.mu
    }

    /// Splitting of the two normal modes: surd(y) = 2 sqrt(2 lambda y^2 + lambda_c^2).
    pub fn surd(&self, y: f64) -> f64 {
        let l = self.params.lambda();
        2.0 * (2.0 * l * y * y + self.lambda_c * self.lambda_c).sqrt()
    }

    /// G(x, y) = F(x, y) - surd(y): the landscape of the upper normal branch.
    pub fn g(&self, x: f64, y: f64) -> f64 {
        self.f(x, y) - self.surd(y)
    }

    /// Normal single-particle energies of the decoupled quadratic
    /// Hamiltonian; their difference is surd(y) identically.
    pub fn eps_plus(&self, y: f64) -> f64 {
        self.mu + 0.5 * self.surd(y)
    }

    pub fn eps_minus(&self, y: f64) -> f64 {
        self.mu - 0.5 * self.surd(y)
    }
}

/// Build the landscape, locating its maxima from the closed forms.
pub fn landscape(params: ModelParams, mu: f64) -> SaddleLandscape {
    let lc = params.critical_lambda();
    let l = params.lambda();
    let x_star = (0.5 * l).sqrt();
    let maxima = if l <= lc {
        vec![(x_star, 0.0)]
    } else {
        let y_star = ((l * l - lc * lc) / (2.0 * l)).sqrt();
        vec![(x_star, y_star), (x_star, -y_star)]
    };
    let case = classify(params, mu).label;
    let mut out = SaddleLandscape {
        params,
        mu,
        lambda_c: lc,
        case,
        maxima,
        f_star: 0.0,
    };
    out.f_star = out.f(out.maxima[0].0, out.maxima[0].1);
    out
}

/// Expansion family of the landscape peak.
///
/// S1/S3 are the generic quadratic peaks of the case-1/case-2 regions; S2/S4
/// are their quartic degenerations at the triple point, where the quadratic
/// y-coefficient vanishes and the divergence exponent becomes 5/4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcase {
    S1,
    S2,
    S3,
    S4,
}

/// Peak expansion coefficients: F ~ F* - alpha_x^2 dx^2 - alpha_y^2 dy^2
/// (- gamma_y^2 dy^4 where the quadratic term degenerates).
#[derive(Debug, Clone, Copy)]
pub struct ExpansionCoefficients {
    pub alpha_x_sq: f64,
    pub alpha_y_sq: f64,
    /// Quartic coefficient; meaningful at and near the triple point.
    pub gamma_y_sq: f64,
    pub subcase: Subcase,
}

/// Peak expansion coefficients at an equilibrium point.
///
/// The quartic subcases are selected when the quartic term dominates the
/// quadratic one at the peak width set by |F*|.
pub fn expansion_coefficients(params: ModelParams, mu: f64) -> Result<ExpansionCoefficients> {
    let region = classify(params, mu);
    if !region.label.is_equilibrium() {
        return Err(Error::DivergentParameters {
            lambda: params.lambda(),
            mu,
            gamma: params.gamma(),
            region: region.label.as_str(),
        });
    }
    let lc = params.critical_lambda();
    let l = params.lambda();
    let (alpha_y_sq, gamma_y_sq, quad, quartic) = if l <= lc {
        // Expansion around y* = 0.
        (1.0 - l / lc, l * l / (2.0 * lc.powi(3)), Subcase::S1, Subcase::S2)
    } else {
        // Expansion around the symmetric pair y* != 0. The quartic
        // coefficient follows from the fourth y-derivative of F at y*.
        let r = lc / l;
        (
            1.0 - r * r,
            lc * lc * (lc * lc - 4.0 * (l * l - lc * lc)) / (2.0 * l.powi(5)),
            Subcase::S3,
            Subcase::S4,
        )
    };
    let subcase = if alpha_y_sq * alpha_y_sq <= gamma_y_sq * region.f_star.abs() {
        quartic
    } else {
        quad
    };
    Ok(ExpansionCoefficients {
        alpha_x_sq: 1.0,
        alpha_y_sq,
        gamma_y_sq,
        subcase,
    })
}

fn csch2(u: f64) -> f64 {
    let s = u.sinh();
    1.0 / (s * s)
}

/// log of the csch^2 quadrature approximation to the grand partition
/// function.
///
/// Integrates the two csch^2 branches, weighted by their Bose factors in
/// surd(y), over a panelled box around the landscape maxima, then adds the
/// empty-sector 1. The panel set refines dyadically toward each maximum,
/// with depth tied to |F*|.
pub fn xi_quadrature(params: ModelParams, bath: BathParams) -> Result<f64> {
    let mu = bath.mu();
    let beta = bath.beta();
    let region = classify(params, mu);
    if !region.label.is_equilibrium() {
        return Err(Error::DivergentParameters {
            lambda: params.lambda(),
            mu,
            gamma: params.gamma(),
            region: region.label.as_str(),
        });
    }
    let land = landscape(params, mu);
    let x_star = land.maxima[0].0;
    let y_max = land.maxima.iter().map(|m| m.1.abs()).fold(0.0, f64::max);

    let integrand = |x: f64, y: f64| -> f64 {
        let f = land.f(x, y);
        let s = land.surd(y);
        let em = (-beta * s).exp();
        let denom = 1.0 - em;
        let head = csch2(0.5 * beta * f);
        let tail = csch2(0.5 * beta * (f - s)) * em;
        (head - tail) / denom
    };

    // Grow the box until the integrand is negligible along its edges.
    let mut r = (60.0 / beta).sqrt() + x_star.abs() + y_max + 1.0;
    let peak = integrand(x_star, land.maxima[0].1);
    if !peak.is_finite() || peak <= 0.0 {
        return Err(Error::QuadratureFailure(format!(
            "integrand peak not positive-finite: {peak}"
        )));
    }
    let mut grow = 0;
    loop {
        let mut edge = 0.0f64;
        for i in 0..=64 {
            let t = i as f64 / 64.0;
            let x = x_star - r + 2.0 * r * t;
            let y = -r + 2.0 * r * t;
            edge = edge
                .max(integrand(x, -r).abs())
                .max(integrand(x, r).abs())
                .max(integrand(x_star - r, y).abs())
                .max(integrand(x_star + r, y).abs());
        }
        if edge <= 1e-12 * peak {
            break;
        }
        r *= 2.0;
        grow += 1;
        if grow > 24 {
            return Err(Error::QuadratureFailure(format!(
                "edge tail still {edge:e} of peak after doubling to R={r:e}"
            )));
        }
    }

    // Dyadic breakpoints toward each maximum, depth tied to |F*|.
    let depth = (1.0 / land.f_star.abs()).log2().ceil().clamp(0.0, 20.0) as i32;
    let x_breaks = dyadic_breaks(&[x_star], x_star - r, x_star + r, r, depth);
    let y_centres: Vec<f64> = if land.maxima.len() == 2 {
        vec![land.maxima[1].1, 0.0, land.maxima[0].1]
    } else {
        vec![0.0]
    };
    let y_breaks = dyadic_breaks(&y_centres, -r, r, r, depth);

    let mut previous: Option<f64> = None;
    let mut order = 12usize;
    loop {
        let (nodes, weights) = gauss_legendre(order);
        let mut total = 0.0;
        for xw in x_breaks.windows(2) {
            for yw in y_breaks.windows(2) {
                total += integrate_1d(&nodes, &weights, xw[0], xw[1], |x| {
                    integrate_1d(&nodes, &weights, yw[0], yw[1], |y| integrand(x, y))
                });
            }
        }
        let xi = 1.0 + beta / (4.0 * std::f64::consts::PI) * total;
        if let Some(prev) = previous {
            if (xi - prev).abs() <= 1e-8 * xi.abs().max(1e-300) {
                return Ok(xi.ln());
            }
        }
        previous = Some(xi);
        order *= 2;
        if order > 96 {
            return Err(Error::QuadratureFailure(
                "node doubling did not converge to 1e-8".into(),
            ));
        }
    }
}

/// Sorted panel breakpoints on [lo, hi]: the ends, each centre, and dyadic
/// offsets centre +/- span 2^-j down to the given depth.
fn dyadic_breaks(centres: &[f64], lo: f64, hi: f64, span: f64, depth: i32) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for &c in centres {
        if c > lo && c < hi {
            pts.push(c);
        }
        for j in 0..=depth {
            let off = span * 0.5f64.powi(j);
            for x in [c - off, c + off] {
                if x > lo && x < hi {
                    pts.push(x);
                }
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * span);
    pts
}
