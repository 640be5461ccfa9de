//! Sample local covariance matrices over sub-domains, and whitening.
//!
//! The local covariance of a block S with kernel f is
//!
//! ```text
//! M_{S,f} = (1/|S|) · Σ_{i∈S} Σ_{j∈S} f(s_i − s_j) · (x_i − x̄)(x_j − x̄)ᵀ
//! ```
//!
//! centered with the *global* sample mean x̄ (not per-block means) and
//! normalized by the block size (not the pair count or the weight sum). The
//! double sum runs in row-major order over ordered pairs so results are
//! reproducible, and the output is numerically symmetrized as (M + Mᵀ)/2.

use crate::data::SpatialData;
use crate::error::{Error, Result};
use crate::geometry::{kernel_weight, KernelSpec};
use nalgebra::{DMatrix, DVector};

/// Relative asymmetry tolerated by [`SymMatrix::new`].
pub const SYM_TOL: f64 = 1e-12;

/// Relative eigenvalue threshold below which a matrix is treated as not
/// positive definite (separates genuine rank deficiency from round-off).
pub const EPS_PD: f64 = 1e-10;

/// A square matrix that is symmetric up to 1e-12 relative tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Validates symmetry of an already-symmetric matrix.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                what: "symmetric matrix".into(),
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let worst = (0..m.nrows())
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .fold(0.0f64, |acc, (i, j)| acc.max((m[(i, j)] - m[(j, i)]).abs()));
        if worst > SYM_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::BadConfig(format!(
                "matrix is asymmetric: max |m_ij − m_ji| = {worst:.3e} exceeds {SYM_TOL:.0e} relative"
            )));
        }
        Ok(Self(m))
    }

    /// Symmetrizes (M + Mᵀ)/2 and wraps the result.
    pub fn from_symmetrized(m: DMatrix<f64>) -> Self {
        let mut s = m.clone();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                s[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
            }
        }
        Self(s)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

impl std::ops::Deref for SymMatrix {
    type Target = DMatrix<f64>;
    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Symmetric inverse square root of a covariance, kept with its source.
#[derive(Debug, Clone)]
pub struct Whitener {
    /// The symmetric positive-definite inverse square root M₀^{−1/2}.
    pub root: DMatrix<f64>,
    /// The covariance this whitener was derived from.
    pub source: SymMatrix,
}

/// Arithmetic mean over all rows (the location functional estimate).
pub fn sample_mean(data: &SpatialData) -> DVector<f64> {
    let v = data.values();
    let mut mean = DVector::zeros(data.p());
    for i in 0..data.n() {
        for j in 0..data.p() {
            mean[j] += v[(i, j)];
        }
    }
    mean / data.n() as f64
}

/// Sample local covariance of `block` with kernel `kernel`, centered by the
/// global mean and normalized by the block size.
pub fn local_cov(data: &SpatialData, block: &[usize], kernel: KernelSpec) -> Result<SymMatrix> {
    kernel.validate()?;
    if block.is_empty() {
        return Err(Error::EmptyBlock { block: 0, blocks: 1 });
    }
    let p = data.p();
    let v = data.values();
    let coords = data.coords();
    let mean = sample_mean(data);

    // Centered rows of the block, gathered once.
    let mut xc: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for &i in block {
        let mut row = Vec::with_capacity(p);
        for j in 0..p {
            row.push(v[(i, j)] - mean[j]);
        }
        xc.push(row);
    }

    let mut m = DMatrix::<f64>::zeros(p, p);
    for (bi, &i) in block.iter().enumerate() {
        let si = coords[i];
        for (bj, &j) in block.iter().enumerate() {
            let sj = coords[j];
            let w = kernel_weight(kernel, [si[0] - sj[0], si[1] - sj[1]]);
            if w == 0.0 {
                continue;
            }
            let (xi, xj) = (&xc[bi], &xc[bj]);
            for a in 0..p {
                let wxa = w * xi[a];
                for b in 0..p {
                    m[(a, b)] += wxa * xj[b];
                }
            }
        }
    }
    m /= block.len() as f64;
    Ok(SymMatrix::from_symmetrized(m))
}

/// Symmetric inverse square root of an SPD matrix.
///
/// Eigendecomposes M₀ = QΛQᵀ and returns QΛ^{−1/2}Qᵀ; errors if the smallest
/// eigenvalue is ≤ `EPS_PD` × the largest.
pub fn whiten(m0: &SymMatrix) -> Result<Whitener> {
    let eig = m0.as_matrix().clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let threshold = EPS_PD * max_eig;
    if min_eig <= threshold {
        return Err(Error::NotPositiveDefinite {
            what: "covariance matrix".into(),
            eigenvalue: min_eig,
            threshold,
        });
    }
    let p = m0.dim();
    let mut root = DMatrix::<f64>::zeros(p, p);
    for k in 0..p {
        let scale = 1.0 / eig.eigenvalues[k].sqrt();
        let q = eig.eigenvectors.column(k);
        for i in 0..p {
            for j in 0..p {
                root[(i, j)] += scale * q[i] * q[j];
            }
        }
    }
    // The Q Λ^{-1/2} Qᵀ accumulation above is symmetric term by term, so the
    // result is exactly symmetric already; wrap without a tolerance check.
    Ok(Whitener {
        root: root.clone(),
        source: m0.clone(),
    })
}
