//! The unmixing estimators: the three non-stationary methods (sd, jd, sjd),
//! stationary SBSS, and the FOBI contender, plus latent-score production.

use crate::data::SpatialData;
use crate::error::{Error, Result};
use crate::geometry::{KernelSpec, Partition};
use crate::jointdiag::{
    fix_row_signs, givens_joint_diag, simultaneous_diag, sorted_eigen_vt, DEFAULT_MAX_SWEEPS,
    DEFAULT_TOL,
};
use crate::loccov::{local_cov, sample_mean, whiten, SymMatrix};
use nalgebra::{DMatrix, DVector};

/// Estimation byproducts: the diagonal values the solver produced (one vector
/// per diagonalized matrix) and, for the iterative methods, convergence info.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// For sd: the generalized eigenvalues. For jd/sjd/sbss: diag(U·M_k·Uᵀ)
    /// per local covariance. For fobi: the fourth-moment eigenvalues.
    pub diagonals: Vec<Vec<f64>>,
    /// Always true for the closed-form methods (sd, fobi).
    pub converged: bool,
    /// Givens sweeps performed (0 for closed-form methods).
    pub sweeps: usize,
    /// Joint-diagonality criterion after init and after each sweep.
    pub criterion_history: Vec<f64>,
}

/// A fitted unmixing model: scores are (x − T)·Wᵀ row-wise.
#[derive(Debug, Clone)]
pub struct UnmixingModel {
    pub w: DMatrix<f64>,
    pub t: DVector<f64>,
    /// Method tag: "sd", "jd", "sjd", "sbss", or "fobi".
    pub method: String,
    pub diagnostics: Diagnostics,
}

/// Rewrites the offender description of a positive-definiteness failure so
/// estimator errors say which covariance broke.
fn annotate_npd(err: Error, what: &str) -> Error {
    match err {
        Error::NotPositiveDefinite {
            eigenvalue,
            threshold,
            ..
        } => Error::NotPositiveDefinite {
            what: what.into(),
            eigenvalue,
            threshold,
        },
        other => other,
    }
}

fn check_partition_len(data: &SpatialData, partition: &Partition) -> Result<()> {
    if partition.len() != data.n() {
        return Err(Error::DimensionMismatch {
            what: "partition labels per observation".into(),
            expected: data.n(),
            got: partition.len(),
        });
    }
    Ok(())
}

/// Simultaneous-diagonalization estimator for a two-block partition:
/// W diagonalizes the pair of block zero-lag local covariances exactly
/// (W·M_{S1}·Wᵀ = I, W·M_{S2}·Wᵀ = D decreasing).
pub fn snss_sd(data: &SpatialData, partition: &Partition) -> Result<UnmixingModel> {
    check_partition_len(data, partition)?;
    if partition.n_blocks() != 2 {
        return Err(Error::BadConfig(format!(
            "the sd method needs a partition with exactly 2 blocks, got {}",
            partition.n_blocks()
        )));
    }
    partition.require_min_size(data.p())?;
    let blocks = partition.blocks();
    let m1 = local_cov(data, &blocks[0], KernelSpec::F0)?;
    let m2 = local_cov(data, &blocks[1], KernelSpec::F0)?;
    let sd = simultaneous_diag(&m1, &m2)
        .map_err(|e| annotate_npd(e, "zero-lag local covariance of partition block 0"))?;
    Ok(UnmixingModel {
        w: sd.w,
        t: sample_mean(data),
        method: "sd".into(),
        diagnostics: Diagnostics {
            diagonals: vec![sd.d.iter().copied().collect()],
            converged: true,
            sweeps: 0,
            criterion_history: Vec::new(),
        },
    })
}

/// Whole-domain standardization shared by the joint-diagonalization methods
/// and FOBI: y = M₀^{−1/2}·(x − x̄) with M₀ the zero-lag covariance.
struct Standardized {
    root: DMatrix<f64>,
    std_data: SpatialData,
    t: DVector<f64>,
}

fn standardize(data: &SpatialData) -> Result<Standardized> {
    let n = data.n();
    let p = data.p();
    let all: Vec<usize> = (0..n).collect();
    let cov = local_cov(data, &all, KernelSpec::F0)?;
    let wh = whiten(&cov).map_err(|e| annotate_npd(e, "whole-domain zero-lag covariance"))?;
    let t = sample_mean(data);
    let mut y = data.values().clone();
    for i in 0..n {
        for j in 0..p {
            y[(i, j)] -= t[j];
        }
    }
    // Row-wise y_i = root·(x_i − t); root is symmetric.
    let y = y * &wh.root;
    let std_data = data.with_values(y)?;
    Ok(Standardized {
        root: wh.root,
        std_data,
        t,
    })
}

/// Shared core of jd/sjd/sbss: standardize, build the local covariance for
/// every (block, kernel) pair in block-major order, jointly diagonalize, and
/// compose W = U·root.
fn joint_core(
    data: &SpatialData,
    partition: &Partition,
    kernels: &[KernelSpec],
    method: &'static str,
    min_block: usize,
) -> Result<UnmixingModel> {
    check_partition_len(data, partition)?;
    if kernels.is_empty() {
        return Err(Error::BadConfig(format!(
            "the {method} method needs at least one kernel"
        )));
    }
    for k in kernels {
        k.validate()?;
    }
    partition.require_min_size(min_block)?;
    let std = standardize(data)?;
    let blocks = partition.blocks();
    let mut mats = Vec::with_capacity(blocks.len() * kernels.len());
    for block in &blocks {
        for &kernel in kernels {
            mats.push(local_cov(&std.std_data, block, kernel)?);
        }
    }
    let jd = givens_joint_diag(&mats, DEFAULT_TOL, DEFAULT_MAX_SWEEPS)?;
    Ok(UnmixingModel {
        w: &jd.u * &std.root,
        t: std.t,
        method: method.into(),
        diagnostics: Diagnostics {
            diagonals: jd.diagonals,
            converged: jd.converged,
            sweeps: jd.sweeps,
            criterion_history: jd.criterion_history,
        },
    })
}

/// Joint-diagonalization estimator: whiten with the whole-domain zero-lag
/// covariance, then jointly diagonalize the per-block zero-lag covariances of
/// the standardized data; W = U·M₀^{−1/2}.
pub fn snss_jd(data: &SpatialData, partition: &Partition) -> Result<UnmixingModel> {
    joint_core(data, partition, &[KernelSpec::F0], "jd", data.p())
}

/// Spatial joint-diagonalization estimator: like jd, but diagonalizing the
/// local covariance of every (block, kernel) pair — K·L matrices. With
/// kernels = {F0} it reduces to jd; with a single block and spatial kernels
/// it reduces to stationary SBSS.
pub fn snss_sjd(
    data: &SpatialData,
    partition: &Partition,
    kernels: &[KernelSpec],
) -> Result<UnmixingModel> {
    joint_core(data, partition, kernels, "sjd", 1)
}

/// Stationary SBSS: sjd over the trivial one-block partition, with zero-lag
/// kernels dropped from the diagonalized set (the whitening step already
/// consumes the zero-lag information; keeping it would only add an identity).
pub fn sbss(data: &SpatialData, kernels: &[KernelSpec]) -> Result<UnmixingModel> {
    for k in kernels {
        k.validate()?;
    }
    let spatial: Vec<KernelSpec> = kernels
        .iter()
        .copied()
        .filter(|k| !k.is_zero_lag())
        .collect();
    if spatial.is_empty() {
        return Err(Error::BadConfig(
            "the sbss method needs at least one spatial kernel besides the zero-lag indicator"
                .into(),
        ));
    }
    joint_core(
        data,
        &Partition::single_block(data.n()),
        &spatial,
        "sbss",
        1,
    )
}

/// Fourth-order blind identification: whiten, then eigendecompose the
/// kurtosis matrix (1/n)·Σ_i ‖y_i‖²·y_i·y_iᵀ of the standardized data with
/// eigenvalues decreasing; W = Vᵀ·M₀^{−1/2}.
pub fn fobi(data: &SpatialData) -> Result<UnmixingModel> {
    let std = standardize(data)?;
    let y = std.std_data.values();
    let n = data.n();
    let p = data.p();
    let mut k = DMatrix::<f64>::zeros(p, p);
    for i in 0..n {
        let row = y.row(i);
        let norm2: f64 = row.iter().map(|v| v * v).sum();
        for a in 0..p {
            for b in a..p {
                k[(a, b)] += norm2 * row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            k[(a, b)] /= n as f64;
            k[(b, a)] = k[(a, b)];
        }
    }
    let (d, vt) = sorted_eigen_vt(&SymMatrix::new(k).expect("built symmetric"));
    let mut w = vt * &std.root;
    fix_row_signs(&mut w);
    Ok(UnmixingModel {
        w,
        t: std.t,
        method: "fobi".into(),
        diagnostics: Diagnostics {
            diagonals: vec![d.iter().copied().collect()],
            converged: true,
            sweeps: 0,
            criterion_history: Vec::new(),
        },
    })
}

/// Latent scores (x − T)·Wᵀ, one row per observation.
pub fn latent_scores(model: &UnmixingModel, data: &SpatialData) -> Result<DMatrix<f64>> {
    let p = data.p();
    if model.w.nrows() != p || model.w.ncols() != p {
        return Err(Error::DimensionMismatch {
            what: "unmixing matrix side vs data dimension".into(),
            expected: p,
            got: model.w.nrows().max(model.w.ncols()),
        });
    }
    if model.t.len() != p {
        return Err(Error::DimensionMismatch {
            what: "location vector length vs data dimension".into(),
            expected: p,
            got: model.t.len(),
        });
    }
    let mut xc = data.values().clone();
    for i in 0..data.n() {
        for j in 0..p {
            xc[(i, j)] -= model.t[j];
        }
    }
    Ok(xc * model.w.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample_setting, standard_setting};
    use crate::geometry::{gen_uniform_coords, make_partition, Coords, PartitionSpec, Rect};
    use crate::metrics::mdi;
    use nalgebra::dmatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    /// iid diagonal-covariance noise in two spatial blocks (x < 1 vs x ≥ 1),
    /// the Setting-1-like fixture used throughout.
    fn two_block_noise(
        n_per: usize,
        vars: [[f64; 2]; 2],
        seed: u64,
    ) -> (SpatialData, Partition) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let n = 2 * n_per;
        let mut pts = Vec::with_capacity(n);
        let mut vals = DMatrix::<f64>::zeros(n, 2);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let block = usize::from(i >= n_per);
            pts.push([block as f64 + rng.random::<f64>(), rng.random::<f64>()]);
            labels.push(block);
            for k in 0..2 {
                let g: f64 = rng.sample(StandardNormal);
                vals[(i, k)] = vars[block][k].sqrt() * g;
            }
        }
        let data = SpatialData::new(Coords::new(pts).unwrap(), vals).unwrap();
        (data, Partition::new(labels, 2).unwrap())
    }

    /// Fixed Setting-5-style data (non-stationary Matérn, contrasting
    /// variances) with a 2×2 grid partition.
    fn setting5_fixture(n_side: u32, seed: u64) -> (SpatialData, Partition) {
        let coords = gen_uniform_coords(n_side, seed);
        let rect = Rect::square(n_side as f64);
        let spec = standard_setting(5).unwrap();
        // Three fixed cluster centers spread over the domain.
        let s = n_side as f64;
        let centers = vec![[0.25 * s, 0.3 * s], [0.8 * s, 0.2 * s], [0.5 * s, 0.8 * s]];
        let clusters = make_partition(&coords, &PartitionSpec::NearestCenters(centers), &rect)
            .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x5eed);
        let z = sample_setting(&spec, &coords, clusters.labels(), &mut rng).unwrap();
        let data = SpatialData::new(coords.clone(), z).unwrap();
        let partition =
            make_partition(&coords, &PartitionSpec::GridBlocks(2, 2), &rect).unwrap();
        (data, partition)
    }

    fn premix(data: &SpatialData, b: &DMatrix<f64>, a: &DVector<f64>) -> SpatialData {
        let mut x = data.values() * b.transpose();
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                x[(i, j)] += a[j];
            }
        }
        data.with_values(x).unwrap()
    }

    #[test]
    fn sd_recovers_identity_mixing_on_block_noise() {
        // Block-to-block variance ratios 4 and 2/3: well separated
        // generalized eigenvalues, so recovery noise stays small.
        let (data, partition) = two_block_noise(2000, [[1.0, 3.0], [4.0, 2.0]], 11);
        let model = snss_sd(&data, &partition).unwrap();
        // A = I, so the gain matrix is W itself.
        assert!(
            mdi(&model.w).unwrap() < 0.1,
            "mdi = {}",
            mdi(&model.w).unwrap()
        );
        assert_eq!(model.method, "sd");
        // Diagnostics carry the generalized eigenvalues, decreasing.
        let d = &model.diagnostics.diagonals[0];
        assert_eq!(d.len(), 2);
        assert!(d[0] >= d[1]);
    }

    #[test]
    fn sd_satisfies_both_definition_constraints() {
        let (data, partition) = two_block_noise(500, [[1.0, 3.0], [2.0, 4.0]], 13);
        let model = snss_sd(&data, &partition).unwrap();
        let blocks = partition.blocks();
        let m1 = local_cov(&data, &blocks[0], KernelSpec::F0).unwrap();
        let m2 = local_cov(&data, &blocks[1], KernelSpec::F0).unwrap();
        let c1 = &model.w * m1.as_matrix() * model.w.transpose();
        assert!((c1 - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-8);
        let c2 = &model.w * m2.as_matrix() * model.w.transpose();
        assert!(c2[(0, 1)].abs() < 1e-8 && c2[(1, 0)].abs() < 1e-8);
    }

    #[test]
    fn sd_affine_equivariance_on_identical_samples() {
        let (data, partition) = two_block_noise(500, [[1.0, 3.0], [2.0, 4.0]], 17);
        let model = snss_sd(&data, &partition).unwrap();
        let b = dmatrix![1.5, -0.7; 0.3, 2.0];
        let a = DVector::from_vec(vec![5.0, -3.0]);
        let mixed = premix(&data, &b, &a);
        let model_b = snss_sd(&mixed, &partition).unwrap();
        let gain = &model_b.w * &b * model.w.clone().try_inverse().unwrap();
        assert!(mdi(&gain).unwrap() < 1e-8, "mdi = {}", mdi(&gain).unwrap());
    }

    #[test]
    fn sd_with_tied_variance_ratios_returns_but_cannot_identify() {
        let (data, partition) = two_block_noise(2000, [[1.0, 1.0], [2.0, 2.0]], 19);
        let model = snss_sd(&data, &partition).unwrap();
        assert!(
            mdi(&model.w).unwrap() > 0.1,
            "tied ratios should leave the gain far from a permutation (mdi = {})",
            mdi(&model.w).unwrap()
        );
    }

    #[test]
    fn jd_and_sd_agree_on_two_blocks() {
        let (data, partition) = two_block_noise(2000, [[1.0, 3.0], [2.0, 4.0]], 23);
        let m_sd = mdi(&snss_sd(&data, &partition).unwrap().w).unwrap();
        let m_jd = mdi(&snss_jd(&data, &partition).unwrap().w).unwrap();
        assert!(
            (m_sd - m_jd).abs() < 0.05,
            "sd mdi {m_sd} vs jd mdi {m_jd}"
        );
    }

    #[test]
    fn jd_whitening_constraint_holds_on_scores() {
        let (data, partition) = setting5_fixture(14, 31);
        let model = snss_jd(&data, &partition).unwrap();
        assert!(model.diagnostics.converged);
        let scores = latent_scores(&model, &data).unwrap();
        let sdata = data.with_values(scores).unwrap();
        let all: Vec<usize> = (0..sdata.n()).collect();
        let cov = local_cov(&sdata, &all, KernelSpec::F0).unwrap();
        let p = sdata.p();
        assert!(
            (cov.as_matrix() - DMatrix::<f64>::identity(p, p)).abs().max() < 1e-8
        );
    }

    #[test]
    fn jd_equivariance_via_matched_score_correlations() {
        let (data, partition) = setting5_fixture(14, 37);
        let m1 = snss_jd(&data, &partition).unwrap();
        let b = dmatrix![2.0, 0.5, 0.0; -0.3, 1.0, 0.4; 0.1, 0.0, 1.5];
        let a = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let mixed = premix(&data, &b, &a);
        let m2 = snss_jd(&mixed, &partition).unwrap();
        let s1 = latent_scores(&m1, &data).unwrap();
        let s2 = latent_scores(&m2, &mixed).unwrap();
        let p = 3;
        let n = s1.nrows() as f64;
        // Columns are centered (T is the mean), unit variance up to fp noise.
        let mut matched = vec![usize::MAX; p];
        for i in 0..p {
            let mut best = (0usize, 0.0f64);
            for j in 0..p {
                let num: f64 = (0..s1.nrows()).map(|r| s1[(r, i)] * s2[(r, j)]).sum();
                let d1: f64 = (0..s1.nrows()).map(|r| s1[(r, i)].powi(2)).sum();
                let d2: f64 = (0..s1.nrows()).map(|r| s2[(r, j)].powi(2)).sum();
                let corr = (num / (d1 * d2).sqrt()).abs();
                if corr > best.1 {
                    best = (j, corr);
                }
            }
            assert!(
                best.1 > 1.0 - 1e-6,
                "component {i}: best |corr| {} (n = {n})",
                best.1
            );
            matched[i] = best.0;
        }
        let mut seen = matched.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2], "matching must be a permutation");
    }

    #[test]
    fn sjd_with_zero_lag_kernel_equals_jd() {
        let (data, partition) = setting5_fixture(12, 41);
        let jd = snss_jd(&data, &partition).unwrap();
        let sjd = snss_sjd(&data, &partition, &[KernelSpec::F0]).unwrap();
        assert!((&jd.w - &sjd.w).abs().max() < 1e-10);
    }

    #[test]
    fn sjd_single_block_equals_sbss() {
        let (data, _) = setting5_fixture(12, 43);
        let one = Partition::single_block(data.n());
        let sjd = snss_sjd(&data, &one, &[KernelSpec::Ball(2.0)]).unwrap();
        let sb = sbss(&data, &[KernelSpec::Ball(2.0)]).unwrap();
        assert!((&sjd.w - &sb.w).abs().max() < 1e-10);
        // The sbss path also filters zero-lag kernels out of a mixed list.
        let sb2 = sbss(&data, &[KernelSpec::F0, KernelSpec::Ball(2.0)]).unwrap();
        assert!((&sb.w - &sb2.w).abs().max() < 1e-12);
    }

    #[test]
    fn sbss_rejects_zero_lag_only_kernel_lists() {
        let (data, _) = two_block_noise(50, [[1.0, 2.0], [1.0, 2.0]], 3);
        let err = sbss(&data, &[KernelSpec::F0, KernelSpec::Ball(0.0)]).unwrap_err();
        assert!(matches!(err, Error::BadConfig(_)));
    }

    #[test]
    fn givens_methods_equivariance_within_iterative_tolerance() {
        let (data, partition) = setting5_fixture(14, 47);
        let kernels = [KernelSpec::F0, KernelSpec::Ball(2.0)];
        let b = dmatrix![1.0, 0.3, -0.2; 0.0, 0.8, 0.5; 0.4, 0.0, 1.2];
        let a = DVector::from_vec(vec![-1.0, 2.0, 3.0]);
        let mixed = premix(&data, &b, &a);

        let w1 = snss_sjd(&data, &partition, &kernels).unwrap().w;
        let w2 = snss_sjd(&mixed, &partition, &kernels).unwrap().w;
        let gain = &w2 * &b * w1.try_inverse().unwrap();
        assert!(mdi(&gain).unwrap() < 1e-4, "sjd mdi = {}", mdi(&gain).unwrap());

        let w1 = sbss(&data, &kernels).unwrap().w;
        let w2 = sbss(&mixed, &kernels).unwrap().w;
        let gain = &w2 * &b * w1.try_inverse().unwrap();
        assert!(mdi(&gain).unwrap() < 1e-4, "sbss mdi = {}", mdi(&gain).unwrap());
    }

    #[test]
    fn fobi_gaussian_fourth_moment_eigenvalues_near_p_plus_2() {
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        let coords = gen_uniform_coords(100, 53); // 10000 sites
        let n = coords.len();
        let p = 3;
        let vals = DMatrix::<f64>::from_fn(n, p, |_, _| rng.sample(StandardNormal));
        let data = SpatialData::new(coords, vals).unwrap();
        let model = fobi(&data).unwrap();
        for &lam in &model.diagnostics.diagonals[0] {
            assert!(
                (lam - (p as f64 + 2.0)).abs() < 0.2,
                "eigenvalue {lam}, expected ≈ {}",
                p + 2
            );
        }
    }

    #[test]
    fn fobi_uniform_fourth_moment_eigenvalues_near_2_8() {
        let mut rng = ChaCha12Rng::seed_from_u64(59);
        let coords = gen_uniform_coords(100, 59);
        let n = coords.len();
        let vals = DMatrix::<f64>::from_fn(n, 2, |_, _| rng.random::<f64>() - 0.5);
        let data = SpatialData::new(coords, vals).unwrap();
        let model = fobi(&data).unwrap();
        for &lam in &model.diagnostics.diagonals[0] {
            assert!((lam - 2.8).abs() < 0.15, "eigenvalue {lam}, expected ≈ 2.8");
        }
    }

    #[test]
    fn fobi_affine_equivariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(61);
        let coords = gen_uniform_coords(30, 61);
        let n = coords.len();
        // Heterogeneous kurtoses so FOBI identifies the components.
        let vals = DMatrix::<f64>::from_fn(n, 2, |_, k| {
            if k == 0 {
                rng.random::<f64>() - 0.5
            } else {
                let g: f64 = rng.sample(StandardNormal);
                g * g * if rng.random::<bool>() { 1.0 } else { -1.0 }
            }
        });
        let data = SpatialData::new(coords, vals).unwrap();
        let model = fobi(&data).unwrap();
        let b = dmatrix![0.6, 1.1; -0.4, 0.9];
        let a = DVector::from_vec(vec![3.0, -1.0]);
        let mixed = premix(&data, &b, &a);
        let model_b = fobi(&mixed).unwrap();
        let gain = &model_b.w * &b * model.w.clone().try_inverse().unwrap();
        assert!(mdi(&gain).unwrap() < 1e-8, "mdi = {}", mdi(&gain).unwrap());
    }

    #[test]
    fn latent_scores_trivial_cases() {
        let coords = Coords::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let vals = dmatrix![1.0, 2.0; 3.0, 4.0; 5.0, 9.0];
        let data = SpatialData::new(coords, vals.clone()).unwrap();

        let identity_model = UnmixingModel {
            w: DMatrix::identity(2, 2),
            t: DVector::zeros(2),
            method: "sd".into(),
            diagnostics: Diagnostics::default(),
        };
        let scores = latent_scores(&identity_model, &data).unwrap();
        assert_eq!(scores, vals);

        let mean = sample_mean(&data);
        let model = UnmixingModel {
            w: DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0])),
            t: mean.clone(),
            method: "sd".into(),
            diagnostics: Diagnostics::default(),
        };
        let scores = latent_scores(&model, &data).unwrap();
        for i in 0..3 {
            assert_eq!(scores[(i, 0)], 2.0 * (vals[(i, 0)] - mean[0]));
            assert_eq!(scores[(i, 1)], vals[(i, 1)] - mean[1]);
        }

        let wrong = SpatialData::new(
            Coords::new(vec![[0.0, 0.0]]).unwrap(),
            DMatrix::zeros(1, 3),
        )
        .unwrap();
        assert!(matches!(
            latent_scores(&model, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sd_scores_have_identity_covariance_in_block_one() {
        let (data, partition) = two_block_noise(400, [[1.0, 3.0], [2.0, 4.0]], 67);
        let model = snss_sd(&data, &partition).unwrap();
        let scores = latent_scores(&model, &data).unwrap();
        let sdata = data.with_values(scores).unwrap();
        let cov = local_cov(&sdata, &partition.blocks()[0], KernelSpec::F0).unwrap();
        assert!(
            (cov.as_matrix() - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-8
        );
    }

    #[test]
    fn sd_error_paths() {
        let (data, _) = two_block_noise(50, [[1.0, 2.0], [1.0, 2.0]], 71);
        let three = Partition::new(
            (0..data.n()).map(|i| i % 3).collect(),
            3,
        )
        .unwrap();
        assert!(matches!(
            snss_sd(&data, &three),
            Err(Error::BadConfig(_))
        ));

        // One block smaller than p.
        let mut labels = vec![0usize; data.n()];
        labels[0] = 1;
        let skewed = Partition::new(labels, 2).unwrap();
        assert!(matches!(
            snss_sd(&data, &skewed),
            Err(Error::BlockTooSmall { block: 1, .. })
        ));

        // Rank-deficient values: second column duplicates the first.
        let mut vals = data.values().clone();
        for i in 0..data.n() {
            vals[(i, 1)] = vals[(i, 0)];
        }
        let degenerate = data.with_values(vals).unwrap();
        let halves = Partition::new(
            (0..data.n()).map(|i| usize::from(i >= data.n() / 2)).collect(),
            2,
        )
        .unwrap();
        match snss_sd(&degenerate, &halves) {
            Err(Error::NotPositiveDefinite { what, .. }) => {
                assert!(what.contains("block 0"), "got offender: {what}");
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn partition_length_mismatch_is_reported() {
        let (data, _) = two_block_noise(20, [[1.0, 2.0], [1.0, 2.0]], 73);
        let short = Partition::new(vec![0, 1, 0, 1], 2).unwrap();
        for result in [
            snss_sd(&data, &short),
            snss_jd(&data, &short),
            snss_sjd(&data, &short, &[KernelSpec::Ball(1.0)]),
        ] {
            assert!(matches!(result, Err(Error::DimensionMismatch { .. })));
        }
    }
}
