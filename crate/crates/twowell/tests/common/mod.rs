//! Shared oracles for the integration suites.

use nalgebra::DMatrix;

use twowell::model::{dense_hamiltonian, ModelParams};

/// Eigenvalues of the dense complex Hermitian sector Hamiltonian via its
/// real symmetric embedding [[A, -B], [B, A]], solved by nalgebra. Fully
/// independent of the crate's own tridiagonal solver.
pub fn dense_oracle_eigenvalues(params: ModelParams, m: usize) -> Vec<f64> {
    let h = dense_hamiltonian(params, m).expect("oracle scale");
    let n = h.dimension();
    let embed = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (rb, rq) = (r % n, r / n);
        let (cb, cq) = (c % n, c / n);
        let z = h.get(rb, cb);
        match (rq, cq) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            (1, 0) => z.im,
            _ => unreachable!(),
        }
    });
    let mut evs: Vec<f64> = embed.symmetric_eigen().eigenvalues.iter().cloned().collect();
    evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Each eigenvalue of H appears twice in the embedding.
    evs.into_iter().step_by(2).collect()
}

/// Least-squares slope of y against x.
pub fn lsq_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}
