//! Simultaneous diagonalization of two matrices (generalized eigenproblem)
//! and approximate orthogonal joint diagonalization of a matrix family via
//! Givens-rotation sweeps.

use crate::error::{Error, Result};
use crate::loccov::{whiten, SymMatrix};
use nalgebra::{DMatrix, DVector};

/// Default |sin θ| threshold below which a sweep counts as converged.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default sweep limit for [`givens_joint_diag`].
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Result of [`simultaneous_diag`]: W·M1·Wᵀ = I and W·M2·Wᵀ = diag(D) with D
/// decreasing.
#[derive(Debug, Clone)]
pub struct SimDiagResult {
    pub w: DMatrix<f64>,
    /// Generalized eigenvalues, decreasing.
    pub d: DVector<f64>,
}

/// Result of [`givens_joint_diag`].
#[derive(Debug, Clone)]
pub struct JointDiagResult {
    /// Orthogonal diagonalizer; rows ordered by decreasing summed diagonal,
    /// each row's largest-magnitude entry positive.
    pub u: DMatrix<f64>,
    /// Final value of Σ_k ‖diag(U·M_k·Uᵀ)‖²_F.
    pub criterion: f64,
    /// Sweeps performed.
    pub sweeps: usize,
    /// False when the sweep limit was reached with rotations above tol.
    pub converged: bool,
    /// Criterion after initialization and after each sweep (non-decreasing).
    pub criterion_history: Vec<f64>,
    /// diag(U·M_k·Uᵀ) per input matrix, in the final row order.
    pub diagonals: Vec<Vec<f64>>,
}

/// Flips each row's sign so its largest-magnitude entry is positive.
pub(crate) fn fix_row_signs(w: &mut DMatrix<f64>) {
    for r in 0..w.nrows() {
        let mut arg = 0usize;
        let mut best = f64::NEG_INFINITY;
        for c in 0..w.ncols() {
            let a = w[(r, c)].abs();
            if a > best {
                best = a;
                arg = c;
            }
        }
        if w[(r, arg)] < 0.0 {
            for c in 0..w.ncols() {
                w[(r, c)] = -w[(r, c)];
            }
        }
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted decreasing; returns
/// (eigenvalues, Vᵀ) with eigenvectors as the rows of Vᵀ.
pub(crate) fn sorted_eigen_vt(m: &SymMatrix) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.as_matrix().clone().symmetric_eigen();
    let p = m.dim();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let d = DVector::from_iterator(p, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vt = DMatrix::<f64>::zeros(p, p);
    for (row, &k) in order.iter().enumerate() {
        for c in 0..p {
            vt[(row, c)] = eig.eigenvectors[(c, k)];
        }
    }
    (d, vt)
}

/// Solves the generalized eigenproblem for a pair (M2, M1) with M1 SPD.
///
/// Computes R = M1^{−1/2}, eigendecomposes R·M2·R with decreasing
/// eigenvalues, and returns W = Vᵀ·R, which diagonalizes both inputs exactly:
/// W·M1·Wᵀ = I and W·M2·Wᵀ = diag(D).
pub fn simultaneous_diag(m1: &SymMatrix, m2: &SymMatrix) -> Result<SimDiagResult> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch {
            what: "simultaneous diagonalization pair".into(),
            expected: m1.dim(),
            got: m2.dim(),
        });
    }
    let r = whiten(m1)?.root;
    let mid = SymMatrix::from_symmetrized(&r * m2.as_matrix() * &r);
    let (d, vt) = sorted_eigen_vt(&mid);
    let mut w = vt * r;
    fix_row_signs(&mut w);
    Ok(SimDiagResult { w, d })
}

/// Σ_k ‖diag(M_k)‖²_F, the joint-diagonality objective.
fn diag_criterion(ms: &[DMatrix<f64>]) -> f64 {
    ms.iter()
        .map(|m| (0..m.nrows()).map(|i| m[(i, i)] * m[(i, i)]).sum::<f64>())
        .sum()
}

/// Approximately jointly diagonalizes a family of symmetric matrices by an
/// orthogonal U, maximizing Σ_k ‖diag(U·M_k·Uᵀ)‖²_F with Givens sweeps.
///
/// Each (i, j) pair gets the closed-form angle maximizing the criterion
/// restricted to that pair: with α_k = (M_k)_{ii}, β_k = (M_k)_{jj},
/// γ_k = (M_k)_{ij}, the pair objective is uᵀHu over the unit vector
/// u = (cos 2θ, sin 2θ), H = Σ_k h_k h_kᵀ, h_k = (α_k − β_k, 2γ_k); the
/// maximizing u is the dominant eigenvector of H with cos 2θ ≥ 0 (inner
/// rotations, |θ| ≤ π/4). Sweeps stop when every |sin θ| in a full sweep is
/// below `tol`, or after `max_sweeps` (then `converged` is false — a flag,
/// not a hard error).
pub fn givens_joint_diag(
    matrices: &[SymMatrix],
    tol: f64,
    max_sweeps: usize,
) -> Result<JointDiagResult> {
    if matrices.is_empty() {
        return Err(Error::BadConfig(
            "joint diagonalization needs at least one matrix".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::BadConfig(format!(
            "joint diagonalization tol must be > 0, got {tol}"
        )));
    }
    let p = matrices[0].dim();
    for (k, m) in matrices.iter().enumerate() {
        if m.dim() != p {
            return Err(Error::DimensionMismatch {
                what: format!("joint diagonalization matrix {k}"),
                expected: p,
                got: m.dim(),
            });
        }
    }

    let mut ms: Vec<DMatrix<f64>> = matrices.iter().map(|m| m.as_matrix().clone()).collect();
    let mut u = DMatrix::<f64>::identity(p, p);
    let mut history = vec![diag_criterion(&ms)];
    let mut converged = p < 2; // a 1×1 family is trivially diagonal
    let mut sweeps = 0usize;

    'outer: for _ in 0..max_sweeps {
        if p < 2 {
            break 'outer;
        }
        sweeps += 1;
        let mut max_abs_sin = 0.0f64;
        for i in 0..p - 1 {
            for j in (i + 1)..p {
                // 2×2 subproblem moments.
                let (mut h11, mut h12, mut h22) = (0.0f64, 0.0f64, 0.0f64);
                for m in &ms {
                    let a = m[(i, i)] - m[(j, j)];
                    let b = 2.0 * m[(i, j)];
                    h11 += a * a;
                    h12 += a * b;
                    h22 += b * b;
                }
                // Dominant unit eigenvector (x, y) of H with x ≥ 0.
                let (x, y) = if h12 == 0.0 {
                    if h11 >= h22 {
                        (1.0, 0.0) // already optimal; identity rotation
                    } else {
                        (0.0, 1.0) // 45° rotation dominates
                    }
                } else {
                    let mean = 0.5 * (h11 + h22);
                    let half_gap = 0.5 * (h11 - h22);
                    let lmax = mean + (half_gap * half_gap + h12 * h12).sqrt();
                    let vx = lmax - h22; // > 0 whenever h12 ≠ 0
                    let norm = (vx * vx + h12 * h12).sqrt();
                    (vx / norm, h12 / norm)
                };
                let c = (0.5 * (1.0 + x)).sqrt();
                let s = y / (2.0 * c);
                max_abs_sin = max_abs_sin.max(s.abs());
                if s.abs() < tol {
                    continue;
                }
                // Apply G to every matrix (G·M·Gᵀ) and accumulate U ← G·U.
                for m in &mut ms {
                    for t in 0..p {
                        let a = m[(i, t)];
                        let b = m[(j, t)];
                        m[(i, t)] = c * a + s * b;
                        m[(j, t)] = -s * a + c * b;
                    }
                    for t in 0..p {
                        let a = m[(t, i)];
                        let b = m[(t, j)];
                        m[(t, i)] = c * a + s * b;
                        m[(t, j)] = -s * a + c * b;
                    }
                }
                for t in 0..p {
                    let a = u[(i, t)];
                    let b = u[(j, t)];
                    u[(i, t)] = c * a + s * b;
                    u[(j, t)] = -s * a + c * b;
                }
            }
        }
        history.push(diag_criterion(&ms));
        if max_abs_sin < tol {
            converged = true;
            break;
        }
    }

    // Deterministic resolution of the permutation/sign ambiguity: rows by
    // decreasing summed diagonal, then positive largest-magnitude entry.
    let mut order: Vec<usize> = (0..p).collect();
    let sums: Vec<f64> = (0..p)
        .map(|i| ms.iter().map(|m| m[(i, i)]).sum::<f64>())
        .collect();
    order.sort_by(|&a, &b| sums[b].partial_cmp(&sums[a]).expect("finite diagonals"));
    let mut u_ord = DMatrix::<f64>::zeros(p, p);
    for (row, &k) in order.iter().enumerate() {
        for col in 0..p {
            u_ord[(row, col)] = u[(k, col)];
        }
    }
    fix_row_signs(&mut u_ord);

    let diagonals = ms
        .iter()
        .map(|m| order.iter().map(|&k| m[(k, k)]).collect())
        .collect();

    Ok(JointDiagResult {
        u: u_ord,
        criterion: *history.last().expect("non-empty history"),
        sweeps,
        converged,
        criterion_history: history,
        diagonals,
    })
}
