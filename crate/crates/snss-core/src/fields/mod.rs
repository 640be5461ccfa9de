//! Gaussian random-field machinery for the simulation study: Matérn and
//! non-stationary Matérn covariances, the six standard latent-field settings,
//! and exact (Cholesky-based) sampling.

pub mod bessel;

use crate::error::{Error, Result};
use crate::geometry::Coords;
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma;

pub use bessel::bessel_k;

/// Relative diagonal jitter added when a covariance factorization fails, as a
/// fraction of the mean diagonal entry; escalates ×10 per retry.
pub const JITTER_SCALE: f64 = 1e-10;

/// Jittered factorization retries before giving up.
pub const JITTER_RETRIES: usize = 3;

/// Matérn parameter triple (σ², ν, φ): marginal variance, smoothness, range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaternParams {
    pub sigma2: f64,
    pub nu: f64,
    pub phi: f64,
}

impl MaternParams {
    pub fn new(sigma2: f64, nu: f64, phi: f64) -> Result<Self> {
        for (name, v) in [("sigma2", sigma2), ("nu", nu), ("phi", phi)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::BadConfig(format!(
                    "matern parameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(MaternParams { sigma2, nu, phi })
    }
}

/// Stationary Matérn covariance at lag h ≥ 0:
/// C(h) = σ²/(2^{ν−1}Γ(ν)) · (h/φ)^ν · K_ν(h/φ), with C(0) = σ².
pub fn matern_cov(h: f64, params: MaternParams) -> f64 {
    let MaternParams { sigma2, nu, phi } = params;
    if h == 0.0 {
        return sigma2;
    }
    let u = h.abs() / phi;
    sigma2 / (2f64.powf(nu - 1.0) * gamma(nu)) * u.powf(nu) * bessel_k(nu, u)
}

/// Per-site quantities of the non-stationary Matérn kernel that depend only
/// on the site's parameter triple, precomputable per cluster.
#[derive(Debug, Clone, Copy)]
struct NonstatSite {
    sigma: f64,
    pref: f64,
    q: f64,
    nu: f64,
}

impl NonstatSite {
    fn new(p: MaternParams) -> Self {
        let q = p.phi * p.phi / (8.0 * p.nu);
        let pref =
            (p.phi * p.phi / (4.0 * p.nu)).sqrt() / (gamma(p.nu) * 2f64.powf(p.nu - 1.0)).sqrt();
        NonstatSite {
            sigma: p.sigma2.sqrt(),
            pref,
            q,
            nu: p.nu,
        }
    }
}

fn nonstat_pair(a: NonstatSite, b: NonstatSite, dist: f64) -> f64 {
    let nubar = 0.5 * (a.nu + b.nu);
    let qs = a.q + b.q;
    let d = dist / qs.sqrt();
    // d^ν̄·K_ν̄(d) → Γ(ν̄)·2^{ν̄−1} as d → 0, which makes the zero-lag value
    // exactly the local variance when both sites share parameters.
    let base = if d == 0.0 {
        gamma(nubar) * 2f64.powf(nubar - 1.0)
    } else {
        d.powf(nubar) * bessel_k(nubar, d)
    };
    a.sigma * b.sigma * a.pref * b.pref / qs * base
}

/// Non-stationary Matérn covariance between sites s and s′ carrying their own
/// parameter triples. With q(s) = φ²(s)/(8ν(s)), qs = q(s) + q(s′),
/// ν̄ = (ν(s)+ν(s′))/2 and d = ‖s−s′‖/√qs:
///
/// C(s,s′) = σ(s)σ(s′)·pref(s)·pref(s′)/qs · d^ν̄ K_ν̄(d),
/// pref(s) = √(φ²(s)/4ν(s)) / √(Γ(ν(s))·2^{ν(s)−1}).
///
/// Constant parameters reduce it to the stationary Matérn with range
/// φ/(2√ν); the zero-lag value is σ²(s).
pub fn nonstat_matern_cov(
    s: [f64; 2],
    sp: [f64; 2],
    params_s: MaternParams,
    params_sp: MaternParams,
) -> f64 {
    let dist = ((s[0] - sp[0]).powi(2) + (s[1] - sp[1]).powi(2)).sqrt();
    nonstat_pair(NonstatSite::new(params_s), NonstatSite::new(params_sp), dist)
}

/// Covariance model of one latent component over the sampling sites.
#[derive(Debug, Clone, PartialEq)]
pub enum ComponentModel {
    /// Independent N(0, σ²_c) noise with a cluster-specific variance.
    WhiteNoise { var_per_cluster: Vec<f64> },
    /// Stationary Matérn within each cluster, independent across clusters.
    ClusteredMatern { params_per_cluster: Vec<MaternParams> },
    /// Non-stationary Matérn over the whole domain with piecewise-constant
    /// (per-cluster) parameters.
    NonstatMatern { params_per_cluster: Vec<MaternParams> },
    /// One stationary Matérn over the whole domain; ignores clusters.
    StationaryMatern { params: MaternParams },
}

impl ComponentModel {
    /// How many cluster labels the model's parameter table covers
    /// (0 = cluster-free).
    pub fn clusters_covered(&self) -> usize {
        match self {
            ComponentModel::WhiteNoise { var_per_cluster } => var_per_cluster.len(),
            ComponentModel::ClusteredMatern { params_per_cluster }
            | ComponentModel::NonstatMatern { params_per_cluster } => params_per_cluster.len(),
            ComponentModel::StationaryMatern { .. } => 0,
        }
    }

    fn check_labels(&self, clusters: &[usize]) -> Result<()> {
        let covered = self.clusters_covered();
        if covered == 0 {
            return Ok(());
        }
        for &c in clusters {
            if c >= covered {
                return Err(Error::MissingClusterParams {
                    cluster: c,
                    available: covered,
                });
            }
        }
        Ok(())
    }
}

/// One of the latent-field configurations of the simulation study: p
/// independent components, each with its own covariance model.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingSpec {
    pub id: u8,
    pub components: Vec<ComponentModel>,
}

impl SettingSpec {
    /// Latent dimension.
    pub fn p(&self) -> usize {
        self.components.len()
    }

    /// Clusters the setting expects (0 when no component uses clusters).
    pub fn n_clusters(&self) -> usize {
        self.components
            .iter()
            .map(ComponentModel::clusters_covered)
            .max()
            .unwrap_or(0)
    }
}

fn mp(sigma2: f64, nu: f64, phi: f64) -> MaternParams {
    MaternParams { sigma2, nu, phi }
}

/// Smoothness/range table shared by settings 2 and 4 (all unit variance).
fn table_unit_variance() -> [Vec<MaternParams>; 3] {
    [
        vec![mp(1.0, 0.5, 0.5), mp(1.0, 1.0, 1.0), mp(1.0, 1.0, 2.0)],
        vec![mp(1.0, 1.5, 2.7), mp(1.0, 0.7, 1.0), mp(1.0, 1.2, 1.9)],
        vec![mp(1.0, 1.2, 1.4), mp(1.0, 0.5, 3.0), mp(1.0, 0.7, 0.7)],
    ]
}

/// Same smoothness/range table with cluster-varying variances, shared by
/// settings 3 and 5.
fn table_varying_variance() -> [Vec<MaternParams>; 3] {
    [
        vec![mp(1.0, 0.5, 0.5), mp(2.0, 1.0, 1.0), mp(1.0, 1.0, 2.0)],
        vec![mp(3.0, 1.5, 2.7), mp(4.0, 0.7, 1.0), mp(3.0, 1.2, 1.9)],
        vec![mp(2.0, 1.2, 1.4), mp(2.0, 0.5, 3.0), mp(5.0, 0.7, 0.7)],
    ]
}

/// The six standard settings (p = 3 each):
///
/// 1. white noise with cluster-varying variances,
/// 2. cluster-independent stationary Matérn, unit variances,
/// 3. like 2 with cluster-varying variances,
/// 4. non-stationary Matérn with the setting-2 parameter table,
/// 5. non-stationary Matérn with the setting-3 parameter table,
/// 6. stationary Matérn over the whole domain (no clusters).
pub fn standard_setting(id: u8) -> Result<SettingSpec> {
    let components = match id {
        1 => vec![
            ComponentModel::WhiteNoise {
                var_per_cluster: vec![1.0, 2.0, 1.0],
            },
            ComponentModel::WhiteNoise {
                var_per_cluster: vec![3.0, 4.0, 3.0],
            },
            ComponentModel::WhiteNoise {
                var_per_cluster: vec![2.0, 2.0, 5.0],
            },
        ],
        2 => table_unit_variance()
            .into_iter()
            .map(|params_per_cluster| ComponentModel::ClusteredMatern { params_per_cluster })
            .collect(),
        3 => table_varying_variance()
            .into_iter()
            .map(|params_per_cluster| ComponentModel::ClusteredMatern { params_per_cluster })
            .collect(),
        4 => table_unit_variance()
            .into_iter()
            .map(|params_per_cluster| ComponentModel::NonstatMatern { params_per_cluster })
            .collect(),
        5 => table_varying_variance()
            .into_iter()
            .map(|params_per_cluster| ComponentModel::NonstatMatern { params_per_cluster })
            .collect(),
        6 => vec![
            ComponentModel::StationaryMatern {
                params: mp(1.0, 0.5, 1.0),
            },
            ComponentModel::StationaryMatern {
                params: mp(1.0, 1.0, 1.5),
            },
            ComponentModel::StationaryMatern {
                params: mp(1.0, 1.5, 2.0),
            },
        ],
        other => {
            return Err(Error::BadConfig(format!(
                "unknown simulation setting {other} (valid settings are 1..=6)"
            )))
        }
    };
    Ok(SettingSpec { id, components })
}

/// Dense n×n covariance matrix of one component over the given sites.
pub fn build_component_cov(
    model: &ComponentModel,
    coords: &Coords,
    clusters: &[usize],
) -> Result<DMatrix<f64>> {
    let n = coords.len();
    if clusters.len() != n {
        return Err(Error::DimensionMismatch {
            what: "cluster labels per site".into(),
            expected: n,
            got: clusters.len(),
        });
    }
    model.check_labels(clusters)?;
    let mut c = DMatrix::<f64>::zeros(n, n);
    match model {
        ComponentModel::WhiteNoise { var_per_cluster } => {
            for i in 0..n {
                c[(i, i)] = var_per_cluster[clusters[i]];
            }
        }
        ComponentModel::ClusteredMatern { params_per_cluster } => {
            for i in 0..n {
                c[(i, i)] = params_per_cluster[clusters[i]].sigma2;
                for j in (i + 1)..n {
                    if clusters[i] != clusters[j] {
                        continue;
                    }
                    let v = matern_cov(dist(coords, i, j), params_per_cluster[clusters[i]]);
                    c[(i, j)] = v;
                    c[(j, i)] = v;
                }
            }
        }
        ComponentModel::NonstatMatern { params_per_cluster } => {
            // Everything except the distance is a function of the two cluster
            // labels alone, so the pair coefficients are cached per label pair.
            let sites: Vec<NonstatSite> = params_per_cluster
                .iter()
                .map(|&p| NonstatSite::new(p))
                .collect();
            let k = sites.len();
            let mut coef = vec![0.0f64; k * k];
            let mut inv_sqrt_qs = vec![0.0f64; k * k];
            let mut nubar = vec![0.0f64; k * k];
            let mut zero_lag = vec![0.0f64; k * k];
            for a in 0..k {
                for b in 0..k {
                    let qs = sites[a].q + sites[b].q;
                    let nb = 0.5 * (sites[a].nu + sites[b].nu);
                    let cf = sites[a].sigma * sites[b].sigma * sites[a].pref * sites[b].pref / qs;
                    coef[a * k + b] = cf;
                    inv_sqrt_qs[a * k + b] = 1.0 / qs.sqrt();
                    nubar[a * k + b] = nb;
                    zero_lag[a * k + b] = cf * gamma(nb) * 2f64.powf(nb - 1.0);
                }
            }
            for i in 0..n {
                let ci = clusters[i];
                c[(i, i)] = zero_lag[ci * k + ci];
                for j in (i + 1)..n {
                    let idx = ci * k + clusters[j];
                    let d = dist(coords, i, j) * inv_sqrt_qs[idx];
                    let v = if d == 0.0 {
                        zero_lag[idx]
                    } else {
                        coef[idx] * d.powf(nubar[idx]) * bessel_k(nubar[idx], d)
                    };
                    c[(i, j)] = v;
                    c[(j, i)] = v;
                }
            }
        }
        ComponentModel::StationaryMatern { params } => {
            for i in 0..n {
                c[(i, i)] = params.sigma2;
                for j in (i + 1)..n {
                    let v = matern_cov(dist(coords, i, j), *params);
                    c[(i, j)] = v;
                    c[(j, i)] = v;
                }
            }
        }
    }
    Ok(c)
}

fn dist(coords: &Coords, i: usize, j: usize) -> f64 {
    let a = coords.point(i);
    let b = coords.point(j);
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Lower Cholesky factor of `c`, retrying with escalating diagonal jitter
/// (starting at [`JITTER_SCALE`] × mean diagonal, ×10 per retry) when the
/// plain factorization fails.
pub fn cholesky_with_jitter(c: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = c.nrows();
    if let Some(ch) = Cholesky::new(c.clone()) {
        return Ok(ch.unpack());
    }
    let trace: f64 = (0..n).map(|i| c[(i, i)]).sum();
    let mut jitter = JITTER_SCALE * trace / n as f64;
    for _ in 0..JITTER_RETRIES {
        let mut cj = c.clone();
        for i in 0..n {
            cj[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(cj) {
            return Ok(ch.unpack());
        }
        jitter *= 10.0;
    }
    Err(Error::FactorizationFailed {
        attempts: 1 + JITTER_RETRIES,
    })
}

/// Draws one realization of every component of `spec` at the given sites,
/// returning the n×p latent matrix.
///
/// Each component consumes exactly n standard normals from `rng` in site
/// order before any transformation, so the stream position after k components
/// is k·n draws regardless of model type — the contract that keeps replicates
/// identical across methods and thread counts.
pub fn sample_setting<R: Rng + ?Sized>(
    spec: &SettingSpec,
    coords: &Coords,
    clusters: &[usize],
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let n = coords.len();
    if clusters.len() != n {
        return Err(Error::DimensionMismatch {
            what: "cluster labels per site".into(),
            expected: n,
            got: clusters.len(),
        });
    }
    let p = spec.components.len();
    let mut z = DMatrix::<f64>::zeros(n, p);
    for (k, model) in spec.components.iter().enumerate() {
        let g = DVector::<f64>::from_iterator(n, (0..n).map(|_| rng.sample(StandardNormal)));
        let zk = sample_component(model, coords, clusters, g)?;
        z.set_column(k, &zk);
    }
    Ok(z)
}

fn sample_component(
    model: &ComponentModel,
    coords: &Coords,
    clusters: &[usize],
    g: DVector<f64>,
) -> Result<DVector<f64>> {
    model.check_labels(clusters)?;
    let n = coords.len();
    match model {
        ComponentModel::WhiteNoise { var_per_cluster } => Ok(DVector::from_iterator(
            n,
            (0..n).map(|i| var_per_cluster[clusters[i]].sqrt() * g[i]),
        )),
        ComponentModel::ClusteredMatern { params_per_cluster } => {
            // Clusters are mutually independent, so factor each cluster's
            // covariance separately; this matches the dense factorization of
            // the full (cross-cluster zero) matrix while staying O(Σ n_c³).
            let mut z = DVector::<f64>::zeros(n);
            let n_clusters = params_per_cluster.len();
            for c in 0..n_clusters {
                let idx: Vec<usize> = (0..n).filter(|&i| clusters[i] == c).collect();
                if idx.is_empty() {
                    continue;
                }
                let m = idx.len();
                let mut cov = DMatrix::<f64>::zeros(m, m);
                for (a, &i) in idx.iter().enumerate() {
                    cov[(a, a)] = params_per_cluster[c].sigma2;
                    for (b, &j) in idx.iter().enumerate().skip(a + 1) {
                        let v = matern_cov(dist(coords, i, j), params_per_cluster[c]);
                        cov[(a, b)] = v;
                        cov[(b, a)] = v;
                    }
                }
                let l = cholesky_with_jitter(cov)?;
                let gc = DVector::from_iterator(m, idx.iter().map(|&i| g[i]));
                let zc = l * gc;
                for (a, &i) in idx.iter().enumerate() {
                    z[i] = zc[a];
                }
            }
            Ok(z)
        }
        ComponentModel::NonstatMatern { .. } | ComponentModel::StationaryMatern { .. } => {
            let cov = build_component_cov(model, coords, clusters)?;
            let l = cholesky_with_jitter(cov)?;
            Ok(l * g)
        }
    }
}

/// Applies the mixing model x = A·z + b row-wise: X = Z·Aᵀ + 1bᵀ.
pub fn mix(z: &DMatrix<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DMatrix<f64>> {
    let p = z.ncols();
    if a.nrows() != p || a.ncols() != p {
        return Err(Error::DimensionMismatch {
            what: "mixing matrix side".into(),
            expected: p,
            got: if a.nrows() != p { a.nrows() } else { a.ncols() },
        });
    }
    if b.len() != p {
        return Err(Error::DimensionMismatch {
            what: "location shift length".into(),
            expected: p,
            got: b.len(),
        });
    }
    let mut x = z * a.transpose();
    for i in 0..x.nrows() {
        for j in 0..p {
            x[(i, j)] += b[j];
        }
    }
    Ok(x)
}
