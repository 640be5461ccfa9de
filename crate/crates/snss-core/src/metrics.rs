//! Performance metrics: the minimum distance index (MDI) for gain matrices
//! and a small diagonality diagnostic for symmetric matrices.

use crate::error::{Error, Result};
use crate::loccov::SymMatrix;
use nalgebra::DMatrix;

/// Largest dimension for which the MDI assignment is solved by exhaustive
/// permutation enumeration (auditable by inspection); larger problems use the
/// O(p³) augmenting-path assignment solver.
pub const MDI_EXHAUSTIVE_MAX_DIM: usize = 8;

/// Minimum distance index of a gain matrix G = W·A.
///
/// With g̃_{kj} = G²_{kj}/‖G_{k·}‖², MDI(G) = √(p − max_σ Σ_i g̃_{σ(i),i}) /
/// √(p − 1), where σ ranges over permutations assigning row σ(i) to
/// position i. Zero exactly when G is a generalized permutation (one nonzero
/// per row and column); always in [0, 1].
pub fn mdi(g: &DMatrix<f64>) -> Result<f64> {
    let p = g.nrows();
    if g.ncols() != p {
        return Err(Error::DimensionMismatch {
            what: "gain matrix columns (must be square)".into(),
            expected: p,
            got: g.ncols(),
        });
    }
    if p < 2 {
        return Err(Error::DimensionMismatch {
            what: "gain matrix side".into(),
            expected: 2,
            got: p,
        });
    }
    for i in 0..p {
        for j in 0..p {
            if !g[(i, j)].is_finite() {
                return Err(Error::NonFinite {
                    what: format!("gain matrix entry ({i}, {j})"),
                });
            }
        }
    }
    let mut tilde = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let norm2: f64 = (0..p).map(|j| g[(i, j)] * g[(i, j)]).sum();
        if norm2 == 0.0 {
            return Err(Error::ZeroRow { row: i });
        }
        for j in 0..p {
            tilde[(i, j)] = g[(i, j)] * g[(i, j)] / norm2;
        }
    }
    let best = if p <= MDI_EXHAUSTIVE_MAX_DIM {
        exhaustive_max_assignment(&tilde)
    } else {
        hungarian_max_assignment(&tilde)
    };
    Ok(((p as f64 - best).max(0.0) / (p as f64 - 1.0)).sqrt())
}

/// ‖off-diagonal part‖_F / ‖M‖_F; 0 for the zero matrix.
pub fn offdiag_fraction(m: &SymMatrix) -> f64 {
    let p = m.dim();
    let mut off = 0.0f64;
    let mut total = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            let v = m.as_matrix()[(i, j)];
            total += v * v;
            if i != j {
                off += v * v;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (off / total).sqrt()
    }
}

/// Best assignment value over all permutations by direct enumeration.
fn exhaustive_max_assignment(gain: &DMatrix<f64>) -> f64 {
    fn rec(gain: &DMatrix<f64>, col: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        let n = used.len();
        if col == n {
            if acc > *best {
                *best = acc;
            }
            return;
        }
        for row in 0..n {
            if !used[row] {
                used[row] = true;
                rec(gain, col + 1, used, acc + gain[(row, col)], best);
                used[row] = false;
            }
        }
    }
    let n = gain.nrows();
    let mut used = vec![false; n];
    let mut best = f64::NEG_INFINITY;
    rec(gain, 0, &mut used, 0.0, &mut best);
    best
}

/// Best assignment value via the shortest-augmenting-path algorithm with
/// dual potentials (O(n³)); maximization is run as minimization of −gain.
fn hungarian_max_assignment(gain: &DMatrix<f64>) -> f64 {
    let n = gain.nrows();
    // 1-based arrays; p[j] holds the row currently matched to column j.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = -gain[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| gain[(p[j] - 1, j - 1)]).sum()
}
