//! Browser demo bindings: phase diagram raster, collective energy surface,
//! and perpendicular-occupation curves, all as flat buffers a canvas can
//! draw directly.

use wasm_bindgen::prelude::*;

use twowell::boundary::{classify, divergence_lambda, CaseLabel};
use twowell::meanfield::{collective_energy, minimize_energy, ModeAngles, Phase};
use twowell::model::ModelParams;
use twowell::scan::{run_sweep, SweepPath, SweepSpec};

/// RGBA raster of the equilibrium diagram over
/// lambda in [0, lambda_max] (x axis) and mu in [mu_min, 0] (y axis, top row
/// = mu = 0). Case-1 and case-2 zones get distinct fills; the divergence
/// curve is overdrawn in black.
#[wasm_bindgen]
pub fn phase_diagram_rgba(
    gamma: f64,
    lambda_max: f64,
    mu_min: f64,
    width: usize,
    height: usize,
) -> Vec<u8> {
    let mut rgba = vec![0u8; width * height * 4];
    let params_at = |i: usize| lambda_max * i as f64 / (width - 1).max(1) as f64;
    let mu_at = |j: usize| mu_min * j as f64 / (height - 1).max(1) as f64;
    for j in 0..height {
        let mu = mu_at(j);
        for i in 0..width {
            let lambda = params_at(i);
            let px = &mut rgba[(j * width + i) * 4..(j * width + i) * 4 + 4];
            let label = match ModelParams::new(gamma, lambda) {
                Ok(p) => classify(p, mu).label,
                Err(_) => CaseLabel::NonEquilibrium,
            };
            let (r, g, b) = match label {
                CaseLabel::Case1 => (66, 135, 245),
                CaseLabel::Case2 => (240, 150, 50),
                CaseLabel::OnBoundary => (0, 0, 0),
                CaseLabel::NonEquilibrium => (245, 245, 245),
            };
            px[0] = r;
            px[1] = g;
            px[2] = b;
            px[3] = 255;
        }
    }
    // Divergence curve overlay.
    let lc = gamma.hypot(1.0);
    let steps = width * 4;
    for s in 0..=steps {
        let mu = -lc - (mu_min.abs() - lc) * s as f64 / steps as f64;
        if let Ok(bp) = divergence_lambda(mu, gamma) {
            if bp.lambda_d <= lambda_max {
                let i = (bp.lambda_d / lambda_max * (width - 1) as f64).round() as usize;
                let j = (mu / mu_min * (height - 1) as f64).round() as usize;
                if i < width && j < height {
                    let px = &mut rgba[(j * width + i) * 4..(j * width + i) * 4 + 4];
                    px[0] = 0;
                    px[1] = 0;
                    px[2] = 0;
                }
            }
        }
    }
    rgba
}

/// Collective energy surface E(theta, phi)/M on an n_theta x n_phi grid
/// (row-major, theta rows from 0 to pi/2, phi columns from 0 to 2 pi).
#[wasm_bindgen]
pub fn energy_surface(gamma: f64, lambda: f64, n_theta: usize, n_phi: usize) -> Vec<f64> {
    let params = match ModelParams::new(gamma, lambda) {
        Ok(p) => p,
        Err(_) => return Vec::new(),
    };
    let mut out = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = std::f64::consts::FRAC_PI_2 * i as f64 / (n_theta - 1).max(1) as f64;
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            let angles = ModeAngles::new(theta, phi).expect("grid angles in domain");
            out.push(collective_energy(angles, params));
        }
    }
    out
}

/// Mean-field summary: [phase (0 gapped, 1 degenerate), lambda_c, phi*,
/// energy per particle, theta1*, theta2*] (theta2* repeats theta1* in the
/// gapped phase).
#[wasm_bindgen]
pub fn meanfield_summary(gamma: f64, lambda: f64) -> Vec<f64> {
    let params = match ModelParams::new(gamma, lambda) {
        Ok(p) => p,
        Err(_) => return Vec::new(),
    };
    let sol = minimize_energy(params);
    let theta1 = sol.minima[0].theta();
    let theta2 = sol.minima.last().unwrap().theta();
    vec![
        match sol.phase {
            Phase::Gapped => 0.0,
            Phase::Degenerate => 1.0,
        },
        sol.lambda_c,
        sol.phi_star,
        sol.energy_per_particle,
        theta1,
        theta2,
    ]
}

/// Perpendicular-mode occupation along an approach to the divergence curve:
/// interleaved (distance, n_perp) pairs, NaN for rows that failed.
///
/// `path`: 0 vertical approach at fixed lambda, 1 along the case-separating
/// line toward the triple point.
#[wasm_bindgen]
pub fn nperp_approach(
    gamma: f64,
    beta: f64,
    path: u8,
    lambda: f64,
    start: f64,
    end: f64,
    points: usize,
) -> Vec<f64> {
    let spec = SweepSpec {
        gamma,
        beta,
        path: if path == 1 {
            SweepPath::AlongCaseBoundary
        } else {
            SweepPath::FixedLambdaVaryMu { lambda }
        },
        // The demo keeps distances moderate so a browser tab stays snappy.
        start: start.max(5e-3),
        end: end.max(5e-3),
        points: points.clamp(2, 64),
        log_spacing: true,
        tol: 1e-6,
    };
    match run_sweep(&spec) {
        Ok(rows) => rows
            .iter()
            .flat_map(|r| [r.distance, r.n_perp])
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Divergence curve samples as interleaved (lambda_D, mu_D) pairs, walking
/// mu from just below -lambda_c down to mu_min.
#[wasm_bindgen]
pub fn divergence_curve(gamma: f64, mu_min: f64, points: usize) -> Vec<f64> {
    let lc = gamma.hypot(1.0);
    let mut out = Vec::with_capacity(points * 2);
    for s in 0..points {
        let mu = -lc - 1e-9 - (mu_min.abs() - lc) * s as f64 / (points - 1).max(1) as f64;
        if let Ok(bp) = divergence_lambda(mu, gamma) {
            out.push(bp.lambda_d);
            out.push(bp.mu_d);
        }
    }
    out
}
