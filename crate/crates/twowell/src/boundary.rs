//! Equilibrium-region geometry in the (lambda, mu) plane.
//!
//! The grand partition function converges only where the peak value F* of
//! the saddle landscape is negative. F* has one closed form on each side of
//! lambda_c, and its zero set is the divergence curve (lambda_D, mu_D): a
//! straight case-1 segment joined to a curved case-2 branch at the triple
//! point (lambda_c, -3/2 lambda_c), where the divergence exponent jumps from
//! 1 to 5/4.

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Tolerance on |F*| below which a point is reported as sitting on the
/// divergence curve itself.
const ON_BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseLabel {
    /// lambda < lambda_c side of the equilibrium region.
    Case1,
    /// lambda >= lambda_c side (requires mu < -3/2 lambda_c).
    Case2,
    NonEquilibrium,
    OnBoundary,
}

impl CaseLabel {
    pub fn is_equilibrium(self) -> bool {
        matches!(self, CaseLabel::Case1 | CaseLabel::Case2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CaseLabel::Case1 => "case1",
            CaseLabel::Case2 => "case2",
            CaseLabel::NonEquilibrium => "non_equilibrium",
            CaseLabel::OnBoundary => "on_boundary",
        }
    }
}

/// Classification of one (lambda, mu) point.
#[derive(Debug, Clone, Copy)]
pub struct RegionCase {
    pub label: CaseLabel,
    /// Peak landscape value; negative inside the equilibrium region and
    /// approaching zero at the divergence curve.
    pub f_star: f64,
}

/// Decide which side of the equilibrium diagram a point lies on.
///
/// Points exactly at lambda = lambda_c are classified with the case-2 form;
/// the two F* expressions agree there, so the label is a convention.
pub fn classify(params: ModelParams, mu: f64) -> RegionCase {
    let lc = params.critical_lambda();
    let l = params.lambda();
    let (f_star, candidate) = if l < lc {
        (0.5 * l + lc + mu, CaseLabel::Case1)
    } else {
        (l + lc * lc / (2.0 * l) + mu, CaseLabel::Case2)
    };
    let label = if f_star.abs() <= ON_BOUNDARY_TOL {
        CaseLabel::OnBoundary
    } else if f_star < 0.0 {
        candidate
    } else {
        CaseLabel::NonEquilibrium
    };
    RegionCase { label, f_star }
}

/// One point of the divergence curve, with its local scaling data.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub mu_d: f64,
    pub lambda_d: f64,
    pub lambda_c: f64,
    /// Slope factor kappa evaluated at lambda = lambda_D.
    pub kappa: f64,
    /// Divergence exponent: 1 everywhere except 5/4 at the triple point.
    pub alpha: f64,
    pub case_label: CaseLabel,
    pub is_triple_point: bool,
}

impl BoundaryPoint {
    /// Scaling variable (lambda_D - lambda) kappa(lambda) + (mu_D - mu) of
    /// the divergence law; equals -F* for points inside the matching case.
    pub fn scaling_variable(&self, lambda: f64, mu: f64) -> f64 {
        let kappa = match self.case_label {
            CaseLabel::Case2 => 1.0 - self.lambda_c * self.lambda_c / (2.0 * lambda * self.lambda_d),
            _ => 0.5,
        };
        (self.lambda_d - lambda) * kappa + (self.mu_d - mu)
    }
}

/// Divergence-curve point above the chemical potential `mu_d`.
///
/// Fails for mu_d >= -lambda_c, where the case-1 expression would produce a
/// negative coupling: the equilibrium region does not extend there.
pub fn divergence_lambda(mu_d: f64, gamma: f64) -> Result<BoundaryPoint> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma must be finite and >= 0, got {gamma}"
        )));
    }
    if !mu_d.is_finite() {
        return Err(Error::InvalidParameter(format!("mu_d must be finite, got {mu_d}")));
    }
    let lc = gamma.hypot(1.0);
    if mu_d >= -lc {
        return Err(Error::NoBoundary {
            mu_d,
            minus_lambda_c: -lc,
        });
    }
    let triple_mu = -1.5 * lc;
    let is_triple_point = (mu_d - triple_mu).abs() <= 1e-12 * (1.0 + mu_d.abs());
    let (lambda_d, case_label) = if mu_d >= triple_mu {
        (-2.0 * (lc + mu_d), CaseLabel::Case1)
    } else {
        (
            0.5 * (-mu_d + (mu_d * mu_d - 2.0 * lc * lc).sqrt()),
            CaseLabel::Case2,
        )
    };
    let kappa = if lambda_d <= lc {
        0.5
    } else {
        1.0 - lc * lc / (2.0 * lambda_d * lambda_d)
    };
    Ok(BoundaryPoint {
        mu_d,
        lambda_d,
        lambda_c: lc,
        kappa,
        alpha: if is_triple_point { 1.25 } else { 1.0 },
        case_label,
        is_triple_point,
    })
}

/// Chemical potential of the divergence curve at fixed coupling: the
/// inverse of [`divergence_lambda`], i.e. the solution of F*(lambda, mu) = 0.
pub fn divergence_mu(lambda: f64, gamma: f64) -> Result<f64> {
    if !gamma.is_finite() || gamma < 0.0 || !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need gamma >= 0 and lambda >= 0, got gamma={gamma}, lambda={lambda}"
        )));
    }
    let lc = gamma.hypot(1.0);
    Ok(if lambda < lc {
        -(lc + 0.5 * lambda)
    } else {
        -(lambda + lc * lc / (2.0 * lambda))
    })
}

/// Sample the divergence curve from just below mu = -lambda_c down to
/// `mu_min`, inclusive; the backbone of an equilibrium-diagram plot.
pub fn sample_curve(gamma: f64, mu_min: f64, points: usize) -> Result<Vec<BoundaryPoint>> {
    if points < 2 {
        return Err(Error::InvalidParameter(format!(
            "curve sampling needs >= 2 points, got {points}"
        )));
    }
    let lc = gamma.hypot(1.0);
    let top = -lc * (1.0 + 1e-9);
    if !(mu_min < top) {
        return Err(Error::InvalidParameter(format!(
            "mu_min must lie below -lambda_c = {}, got {mu_min}",
            -lc
        )));
    }
    (0..points)
        .map(|i| {
            let mu = top + (mu_min - top) * i as f64 / (points - 1) as f64;
            divergence_lambda(mu, gamma)
        })
        .collect()
}

/// Per-particle observable limits on approach to a boundary point (the
/// coefficients multiplying the mean particle number near divergence).
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticCoefficients {
    pub e_coeff: f64,
    pub i_coeff: f64,
    pub j_coeff: f64,
    pub w_coeff: f64,
}

/// Near-divergence coefficients of E, I, J, W per particle.
pub fn asymptotic_coefficients(bp: &BoundaryPoint, gamma: f64) -> AsymptoticCoefficients {
    let lc = gamma.hypot(1.0);
    let ld = bp.lambda_d;
    if ld <= lc {
        AsymptoticCoefficients {
            e_coeff: -lc - 0.5 * ld,
            i_coeff: 0.5,
            j_coeff: -gamma / lc,
            w_coeff: -1.0 / lc,
        }
    } else {
        AsymptoticCoefficients {
            e_coeff: -ld - lc * lc / (2.0 * ld),
            i_coeff: 1.0 - lc * lc / (2.0 * ld * ld),
            j_coeff: -gamma / ld,
            w_coeff: -1.0 / ld,
        }
    }
}
