//! Model parameters and fixed-M Hamiltonian matrices.
//!
//! The model is a gas of one-species bosons hopping between two equal-energy
//! wells, with an attractive same-well interaction scaled by the particle
//! number. In the Fock basis |m1, m2> with m1 + m2 = M the Hamiltonian is a
//! complex Hermitian tridiagonal matrix; a diagonal phase change of basis
//! (a gauge transform) turns it into a real symmetric tridiagonal one with
//! strictly positive off-diagonal entries, which is what every solver in this
//! crate consumes.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coupling constants of the two-well Hamiltonian.
///
/// `gamma` scales the antisymmetric (phase-twisting) hopping, `lambda` the
/// attractive same-well interaction. The symmetric hopping sets the energy
/// scale and is pinned to `DELTA = 1`; it is not user-settable because the
/// critical coupling and every closed form downstream assume it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    gamma: f64,
    lambda: f64,
}

impl ModelParams {
    /// Symmetric-hopping scale. Fixed by the choice of energy unit.
    pub const DELTA: f64 = 1.0;

    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be finite and >= 0, got {gamma}"
            )));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Self { gamma, lambda })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Critical coupling `lambda_c = sqrt(1 + gamma^2)` separating the gapped
    /// and degenerate zero-temperature phases.
    pub fn critical_lambda(&self) -> f64 {
        self.gamma.hypot(1.0)
    }
}

/// A fixed total-particle-number subspace.
///
/// The basis index k = m1 runs over 0..=M, labelling |m1 = k, m2 = M - k>.
/// Ordering by ascending m1 makes the Hamiltonian tridiagonal with no
/// permutation bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSector {
    m: usize,
}

impl FockSector {
    /// The empty sector M = 0 is excluded: its Hamiltonian is defined to be
    /// zero and is handled directly by the grand-canonical sum.
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "sector M = 0 has no Hamiltonian matrix; it enters the grand sum as the constant 1"
                    .into(),
            ));
        }
        Ok(Self { m })
    }

    pub fn particles(&self) -> usize {
        self.m
    }

    pub fn dimension(&self) -> usize {
        self.m + 1
    }
}

/// Gauge-transformed sector Hamiltonian: real symmetric tridiagonal.
///
/// With the basis phases u_k = exp(-i k chi), chi = atan(gamma), the complex
/// off-diagonal (1 - i gamma) sqrt((k+1)(M-k)) becomes the real positive
/// lambda_c sqrt((k+1)(M-k)); the diagonal -(lambda/M)(k^2 + (M-k)^2) is
/// untouched. The spectrum is exactly that of the dense complex matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalHamiltonian {
    sector: FockSector,
    params: ModelParams,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    gauge_phase: f64,
}

impl TridiagonalHamiltonian {
    pub fn sector(&self) -> FockSector {
        self.sector
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// Diagonal entries, length M + 1.
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries, length M; `offdiag[k]` couples k and k + 1.
    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Per-step phase chi = atan(gamma) removed from the off-diagonal.
    pub fn gauge_phase(&self) -> f64 {
        self.gauge_phase
    }

    pub fn dimension(&self) -> usize {
        self.diag.len()
    }

    /// Undo the gauge transform, rebuilding the complex Hermitian matrix.
    pub fn reconstruct_dense(&self) -> DenseHamiltonian {
        let n = self.dimension();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            data[k * n + k] = Complex64::new(self.diag[k], 0.0);
        }
        for k in 0..n - 1 {
            // H[k+1][k] = u_{k+1} T[k+1][k] conj(u_k) = e^{-i chi} offdiag[k]
            let lower = Complex64::from_polar(self.offdiag[k], -self.gauge_phase);
            data[(k + 1) * n + k] = lower;
            data[k * n + (k + 1)] = lower.conj();
        }
        DenseHamiltonian { n, data }
    }
}

/// Build the gauged real symmetric tridiagonal Hamiltonian of sector M.
pub fn build_tridiagonal(params: ModelParams, m: usize) -> Result<TridiagonalHamiltonian> {
    let sector = FockSector::new(m)?;
    let lambda_c = params.critical_lambda();
    let mf = m as f64;
    let diag = (0..=m)
        .map(|k| {
            let k1 = k as f64;
            let k2 = (m - k) as f64;
            -(params.lambda() / mf) * (k1 * k1 + k2 * k2)
        })
        .collect();
    let offdiag = (0..m)
        .map(|k| lambda_c * (((k + 1) * (m - k)) as f64).sqrt())
        .collect();
    Ok(TridiagonalHamiltonian {
        sector,
        params,
        diag,
        offdiag,
        gauge_phase: params.gamma().atan(),
    })
}

/// Dense complex Hermitian sector Hamiltonian, row-major.
///
/// Test oracle for the gauged tridiagonal form; capped at M = 128 since it
/// exists only to be compared against, never to scale.
#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    n: usize,
    data: Vec<Complex64>,
}

impl DenseHamiltonian {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    /// Largest |H - H^dagger| entry; zero by construction.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for c in 0..self.n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }
}

/// Build the dense complex Hermitian Hamiltonian of sector M (oracle scale).
pub fn dense_hamiltonian(params: ModelParams, m: usize) -> Result<DenseHamiltonian> {
    let sector = FockSector::new(m)?;
    if m > 128 {
        return Err(Error::InvalidParameter(format!(
            "dense oracle capped at M = 128, got M = {m}"
        )));
    }
    let n = sector.dimension();
    let mf = m as f64;
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 0..n {
        let k1 = k as f64;
        let k2 = (m - k) as f64;
        data[k * n + k] = Complex64::new(-(params.lambda() / mf) * (k1 * k1 + k2 * k2), 0.0);
    }
    for k in 0..m {
        // a1^dag a2 raises m1: <k+1| H |k> = (delta - i gamma) sqrt((k+1)(M-k))
        let amp = (((k + 1) * (m - k)) as f64).sqrt();
        let lower = Complex64::new(ModelParams::DELTA, -params.gamma()) * amp;
        data[(k + 1) * n + k] = lower;
        data[k * n + (k + 1)] = lower.conj();
    }
    Ok(DenseHamiltonian { n, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn params_reject_negative_couplings() {
        assert!(ModelParams::new(-0.1, 1.0).is_err());
        assert!(ModelParams::new(1.0, -0.1).is_err());
        assert!(ModelParams::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn critical_lambda_values() {
        assert_abs_diff_eq!(ModelParams::new(0.0, 1.0).unwrap().critical_lambda(), 1.0);
        assert_abs_diff_eq!(
            ModelParams::new(1.0, 1.0).unwrap().critical_lambda(),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            ModelParams::new(2.0, 1.0).unwrap().critical_lambda(),
            5f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn sector_zero_rejected() {
        assert!(FockSector::new(0).is_err());
        assert!(build_tridiagonal(ModelParams::new(1.0, 1.0).unwrap(), 0).is_err());
        assert!(dense_hamiltonian(ModelParams::new(1.0, 1.0).unwrap(), 0).is_err());
    }

    #[test]
    fn tridiagonal_m1() {
        let t = build_tridiagonal(ModelParams::new(1.0, 1.0).unwrap(), 1).unwrap();
        assert_eq!(t.diag(), &[-1.0, -1.0]);
        assert_eq!(t.offdiag().len(), 1);
        assert_abs_diff_eq!(t.offdiag()[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.gauge_phase(), std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
    }

    #[test]
    fn tridiagonal_m2() {
        let t = build_tridiagonal(ModelParams::new(1.0, 1.0).unwrap(), 2).unwrap();
        assert_eq!(t.diag(), &[-2.0, -1.0, -2.0]);
        for &e in t.offdiag() {
            assert_abs_diff_eq!(e, 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn offdiag_strictly_positive() {
        for &(g, l, m) in &[(0.0, 0.0, 1usize), (0.5, 2.0, 8), (3.0, 0.7, 40)] {
            let t = build_tridiagonal(ModelParams::new(g, l).unwrap(), m).unwrap();
            assert!(t.offdiag().iter().all(|&e| e > 0.0));
        }
    }

    #[test]
    fn inversion_symmetry_of_arrays() {
        // diag[k] = diag[M-k] and offdiag[k] = offdiag[M-1-k], exactly.
        let t = build_tridiagonal(ModelParams::new(0.7, 1.3).unwrap(), 17).unwrap();
        let m = t.sector().particles();
        for k in 0..=m {
            assert_eq!(t.diag()[k], t.diag()[m - k]);
        }
        for k in 0..m {
            assert_eq!(t.offdiag()[k], t.offdiag()[m - 1 - k]);
        }
    }

    #[test]
    fn dense_m1_matrices() {
        let h = dense_hamiltonian(ModelParams::new(1.0, 1.0).unwrap(), 1).unwrap();
        assert_abs_diff_eq!(h.get(0, 0).re, -1.0);
        assert_abs_diff_eq!(h.get(0, 1).re, 1.0);
        assert_abs_diff_eq!(h.get(0, 1).im, 1.0);
        assert_abs_diff_eq!(h.get(1, 0).re, 1.0);
        assert_abs_diff_eq!(h.get(1, 0).im, -1.0);

        let h0 = dense_hamiltonian(ModelParams::new(0.0, 0.0).unwrap(), 1).unwrap();
        assert_abs_diff_eq!(h0.get(0, 0).norm(), 0.0);
        assert_abs_diff_eq!(h0.get(0, 1).re, 1.0);
        assert_abs_diff_eq!(h0.get(0, 1).im, 0.0);
    }

    #[test]
    fn dense_hermitian_by_construction() {
        let h = dense_hamiltonian(ModelParams::new(2.0, 3.0).unwrap(), 5).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn dense_oracle_scale_cap() {
        assert!(dense_hamiltonian(ModelParams::new(1.0, 1.0).unwrap(), 129).is_err());
    }

    #[test]
    fn gauge_reconstruction_matches_dense() {
        for &(g, l, m) in &[(0.5, 2.0, 8usize), (1.0, 1.0, 3), (2.5, 0.3, 21)] {
            let p = ModelParams::new(g, l).unwrap();
            let t = build_tridiagonal(p, m).unwrap();
            let rebuilt = t.reconstruct_dense();
            let oracle = dense_hamiltonian(p, m).unwrap();
            for r in 0..=m {
                for c in 0..=m {
                    let d = (rebuilt.get(r, c) - oracle.get(r, c)).norm();
                    assert!(d <= 1e-12, "entry ({r},{c}) off by {d} at gamma={g}, lambda={l}");
                }
            }
        }
    }
}
