//! Compositional-data support: clr and pivot-ilr log-ratio transforms, the
//! contrast matrix tying them together, combined loadings, and the
//! moving-block variance map used to visualize local score variability.

use crate::error::{Error, Result};
use crate::estimators::UnmixingModel;
use crate::geometry::Coords;
use nalgebra::DMatrix;

/// An n×m matrix of strictly positive concentrations.
#[derive(Debug, Clone)]
pub struct Composition(DMatrix<f64>);

impl Composition {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                let v = values[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        what: format!("composition entry ({i}, {j})"),
                    });
                }
                if v <= 0.0 {
                    return Err(Error::NonPositiveEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        if values.ncols() < 2 {
            return Err(Error::BadConfig(format!(
                "a composition needs at least 2 parts, got {}",
                values.ncols()
            )));
        }
        Ok(Composition(values))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    /// Number of parts m.
    pub fn parts(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// The m×(m−1) pivot contrast matrix V: orthonormal columns, each orthogonal
/// to the all-ones vector, with clr = ilr·Vᵀ and ilr = clr·V.
#[derive(Debug, Clone)]
pub struct ContrastMatrix(DMatrix<f64>);

impl ContrastMatrix {
    /// The pivot-coordinate contrast matrix for m parts:
    /// V[c,c] = √((m−c−1)/(m−c)), V[r,c] = −√((m−c−1)/(m−c))/(m−c−1) for
    /// r > c, zero above the diagonal (0-based indices).
    pub fn pivot(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::BadConfig(format!(
                "a contrast matrix needs at least 2 parts, got {m}"
            )));
        }
        let mut v = DMatrix::<f64>::zeros(m, m - 1);
        for c in 0..m - 1 {
            let tail = (m - c - 1) as f64;
            let head = ((tail) / (tail + 1.0)).sqrt();
            v[(c, c)] = head;
            for r in c + 1..m {
                v[(r, c)] = -head / tail;
            }
        }
        Ok(ContrastMatrix(v))
    }

    /// Number of parts m (rows).
    pub fn parts(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Centered log-ratio transform: row-wise log(x_j) − mean_j log(x_j).
/// Every output row sums to zero.
pub fn clr(comp: &Composition) -> DMatrix<f64> {
    let (n, m) = (comp.n(), comp.parts());
    let mut out = DMatrix::<f64>::zeros(n, m);
    for i in 0..n {
        let mut mean = 0.0;
        for j in 0..m {
            let l = comp.as_matrix()[(i, j)].ln();
            out[(i, j)] = l;
            mean += l;
        }
        mean /= m as f64;
        for j in 0..m {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// Isometric log-ratio transform in pivot coordinates:
/// z_j = √((m−j)/(m−j+1)) · log(x_j / geometric-mean(x_{j+1..m})) for
/// j = 1..m−1 (1-based), reducing the dimension by one. Also returns the
/// contrast matrix V with clr = ilr·Vᵀ and ilr = clr·V.
///
/// Worked m = 3 example: x = (1, 2, 4) gives
/// z₁ = √(2/3)·log(1/√8) ≈ −0.8489284545, z₂ = √(1/2)·log(2/4) ≈ −0.4901290717.
pub fn ilr_pivot(comp: &Composition) -> (DMatrix<f64>, ContrastMatrix) {
    let (n, m) = (comp.n(), comp.parts());
    let mut out = DMatrix::<f64>::zeros(n, m - 1);
    let mut logs = vec![0.0f64; m];
    for i in 0..n {
        for j in 0..m {
            logs[j] = comp.as_matrix()[(i, j)].ln();
        }
        // Suffix means of the log values: mean of logs[j+1..m].
        let mut suffix_sum = 0.0;
        let mut suffix_means = vec![0.0f64; m];
        for j in (0..m).rev() {
            if j < m - 1 {
                suffix_means[j] = suffix_sum / (m - 1 - j) as f64;
            }
            suffix_sum += logs[j];
        }
        for c in 0..m - 1 {
            let tail = (m - c - 1) as f64;
            let coef = (tail / (tail + 1.0)).sqrt();
            out[(i, c)] = coef * (logs[c] - suffix_means[c]);
        }
    }
    let v = ContrastMatrix::pivot(m).expect("m >= 2 by Composition invariant");
    (out, v)
}

/// Combined loadings W·Vᵀ (p×m): maps clr space directly to the latent
/// components when the model was fitted on ilr coordinates (p = m−1).
/// Rows live in the clr hyperplane, so each row sums to zero.
pub fn combined_loadings(model: &UnmixingModel, v: &ContrastMatrix) -> Result<DMatrix<f64>> {
    let p = model.w.nrows();
    if v.parts() != p + 1 {
        return Err(Error::DimensionMismatch {
            what: "contrast matrix parts vs unmixing dimension + 1".into(),
            expected: p + 1,
            got: v.parts(),
        });
    }
    Ok(&model.w * v.as_matrix().transpose())
}

/// One cell of the moving-block variance map.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceCell {
    /// Cell center (x, y).
    pub center: [f64; 2],
    /// Points inside the block centered on this cell.
    pub count: usize,
    /// Sample variance of the scores in the block; `None` with count < 2
    /// (missing marker, never NaN).
    pub variance: Option<f64>,
}

/// Moving-block variance map of one score component.
///
/// The grid origin sits on (min x, min y); cell centers advance by
/// `grid_res` per axis, covering the data's bounding box. Each cell's block
/// is the square of side `block_size` centered on it, with closed-lower /
/// open-upper edges: [c − b/2, c + b/2) per axis. Cells are emitted in
/// row-major order (y outer, x inner).
pub fn moving_block_variance(
    scores: &[f64],
    coords: &Coords,
    grid_res: f64,
    block_size: f64,
) -> Result<Vec<VarianceCell>> {
    if !(grid_res > 0.0) || !grid_res.is_finite() {
        return Err(Error::BadConfig(format!(
            "grid resolution must be positive and finite, got {grid_res}"
        )));
    }
    if !(block_size > 0.0) || !block_size.is_finite() {
        return Err(Error::BadConfig(format!(
            "block size must be positive and finite, got {block_size}"
        )));
    }
    if scores.len() != coords.len() {
        return Err(Error::DimensionMismatch {
            what: "scores per coordinate".into(),
            expected: coords.len(),
            got: scores.len(),
        });
    }
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in coords.iter() {
        min_x = min_x.min(p[0]);
        max_x = max_x.max(p[0]);
        min_y = min_y.min(p[1]);
        max_y = max_y.max(p[1]);
    }
    // floor with a small forgiveness so a span that is an exact multiple of
    // the resolution (up to fp noise) still gets its last center.
    let centers = |min: f64, max: f64| -> Vec<f64> {
        let k = ((max - min) / grid_res + 1e-9).floor() as usize + 1;
        (0..k).map(|i| min + i as f64 * grid_res).collect()
    };
    let xs = centers(min_x, max_x);
    let ys = centers(min_y, max_y);
    let half = block_size / 2.0;
    let mut cells = Vec::with_capacity(xs.len() * ys.len());
    for &cy in &ys {
        for &cx in &xs {
            let mut count = 0usize;
            let mut mean = 0.0f64;
            let mut m2 = 0.0f64;
            for (p, &s) in coords.iter().zip(scores) {
                let inside = p[0] >= cx - half
                    && p[0] < cx + half
                    && p[1] >= cy - half
                    && p[1] < cy + half;
                if inside {
                    // Welford's running variance.
                    count += 1;
                    let delta = s - mean;
                    mean += delta / count as f64;
                    m2 += delta * (s - mean);
                }
            }
            let variance = if count >= 2 {
                Some(m2 / (count - 1) as f64)
            } else {
                None
            };
            cells.push(VarianceCell {
                center: [cx, cy],
                count,
                variance,
            });
        }
    }
    Ok(cells)
}
