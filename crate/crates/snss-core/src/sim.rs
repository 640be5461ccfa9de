//! Simulation-study harness: configuration parsing, deterministic
//! per-replicate seeding, the replicate loop (parallel over replicates), and
//! CSV rendering of per-replicate rows and aggregated means.

use crate::data::SpatialData;
use crate::error::{Error, Result};
use crate::estimators::{fobi, sbss, snss_jd, snss_sd, snss_sjd, UnmixingModel};
use crate::fields::{sample_setting, standard_setting};
use crate::geometry::{
    gen_skewed_coords_rng, gen_uniform_coords_rng, make_partition, KernelSpec, PartitionSpec,
    Rect,
};
use crate::metrics::mdi;
use crate::csvio::fmt_real;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Sampling pattern for simulated coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pattern {
    Uniform,
    Skewed,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Uniform => write!(f, "uniform"),
            Pattern::Skewed => write!(f, "skewed"),
        }
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(Pattern::Uniform),
            "skewed" => Ok(Pattern::Skewed),
            other => Err(Error::BadConfig(format!(
                "unknown pattern `{other}` (expected uniform or skewed)"
            ))),
        }
    }
}

/// Estimator family selected by a method spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Sd,
    Jd,
    Sjd,
    Sbss,
    Fobi,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Sd => "sd",
            MethodKind::Jd => "jd",
            MethodKind::Sjd => "sjd",
            MethodKind::Sbss => "sbss",
            MethodKind::Fobi => "fobi",
        }
    }
}

/// One configured estimator: kind plus whatever the kind needs.
///
/// Text grammar, one segment list split on `/`:
/// - `sd/<partition>` and `jd/<partition>` (two-block partitions for sd),
/// - `sjd/<partition>/<kernels>` with kernels joined by `+`,
/// - `sbss/<kernels>`,
/// - `fobi` alone.
///
/// Examples: `sd/halve-x`, `jd/grid:2x2`, `sjd/grid:2x2/f0+ball:2`,
/// `sbss/ball:2`, `fobi`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub kind: MethodKind,
    pub partition: Option<PartitionSpec>,
    pub kernels: Vec<KernelSpec>,
}

impl MethodSpec {
    /// The `partition` CSV column: the partition spec string, empty when the
    /// method takes none.
    pub fn partition_column(&self) -> String {
        self.partition.as_ref().map(|p| p.to_string()).unwrap_or_default()
    }

    /// The `kernels` CSV column: kernel specs joined by `+`, empty when the
    /// method takes none.
    pub fn kernels_column(&self) -> String {
        self.kernels
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join("+")
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.partition {
            p.validate()?;
        }
        for k in &self.kernels {
            k.validate()?;
        }
        let bad = |reason: &str| Error::BadMethodSpec {
            spec: self.to_string(),
            reason: reason.into(),
        };
        match self.kind {
            MethodKind::Sd | MethodKind::Jd => {
                if self.partition.is_none() {
                    return Err(bad("a partition is required"));
                }
                if !self.kernels.is_empty() {
                    return Err(bad("kernels are not configurable here"));
                }
            }
            MethodKind::Sjd => {
                if self.partition.is_none() {
                    return Err(bad("a partition is required"));
                }
                if self.kernels.is_empty() {
                    return Err(bad("at least one kernel is required"));
                }
            }
            MethodKind::Sbss => {
                if self.partition.is_some() {
                    return Err(bad("sbss uses the whole domain, no partition"));
                }
                if self.kernels.is_empty() {
                    return Err(bad("at least one kernel is required"));
                }
            }
            MethodKind::Fobi => {
                if self.partition.is_some() || !self.kernels.is_empty() {
                    return Err(bad("fobi takes no partition or kernels"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        if let Some(p) = &self.partition {
            write!(f, "/{p}")?;
        }
        if !self.kernels.is_empty() {
            write!(f, "/{}", self.kernels_column())?;
        }
        Ok(())
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: String| Error::BadMethodSpec {
            spec: s.into(),
            reason,
        };
        let mut segments = s.trim().split('/').map(str::trim);
        let name = segments.next().unwrap_or_default();
        let rest: Vec<&str> = segments.collect();
        let parse_kernels = |seg: &str| -> Result<Vec<KernelSpec>> {
            seg.split('+').map(|k| k.trim().parse()).collect()
        };
        let expect_segments = |want: usize, what: &str| -> Result<()> {
            if rest.len() != want {
                return Err(bad(format!("expected {what}")));
            }
            Ok(())
        };
        let spec = match name {
            "sd" | "jd" => {
                expect_segments(1, &format!("{name}/<partition>"))?;
                MethodSpec {
                    kind: if name == "sd" { MethodKind::Sd } else { MethodKind::Jd },
                    partition: Some(rest[0].parse()?),
                    kernels: vec![],
                }
            }
            "sjd" => {
                expect_segments(2, "sjd/<partition>/<kernels>")?;
                MethodSpec {
                    kind: MethodKind::Sjd,
                    partition: Some(rest[0].parse()?),
                    kernels: parse_kernels(rest[1])?,
                }
            }
            "sbss" => {
                expect_segments(1, "sbss/<kernels>")?;
                MethodSpec {
                    kind: MethodKind::Sbss,
                    partition: None,
                    kernels: parse_kernels(rest[0])?,
                }
            }
            "fobi" => {
                expect_segments(0, "fobi with no segments")?;
                MethodSpec {
                    kind: MethodKind::Fobi,
                    partition: None,
                    kernels: vec![],
                }
            }
            other => return Err(bad(format!("unknown method `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Resolved simulation-study configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub settings: Vec<u8>,
    pub patterns: Vec<Pattern>,
    pub n_sides: Vec<u32>,
    pub reps: u32,
    pub seed: u64,
    /// Worker threads for the replicate loop; 0 means the rayon default.
    pub threads: usize,
    pub methods: Vec<MethodSpec>,
}

impl Default for SimConfig {
    /// Desk-scale defaults: the full study method set, uniform pattern,
    /// 100 replicates on n_side ∈ {20, 30, 40} across all six settings.
    fn default() -> Self {
        let methods = [
            "sd/halve-x",
            "sd/halve-y",
            "jd/grid:2x2",
            "sjd/grid:2x2/f0+ball:2",
            "sbss/ball:2",
        ]
        .iter()
        .map(|m| m.parse().expect("default methods parse"))
        .collect();
        SimConfig {
            settings: vec![1, 2, 3, 4, 5, 6],
            patterns: vec![Pattern::Uniform],
            n_sides: vec![20, 30, 40],
            reps: 100,
            seed: 1,
            threads: 0,
            methods,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::BadConfig(reason);
        if self.reps < 1 {
            return Err(bad("reps must be >= 1".into()));
        }
        if self.settings.is_empty() {
            return Err(bad("settings list is empty".into()));
        }
        for &s in &self.settings {
            standard_setting(s)?;
        }
        if self.patterns.is_empty() {
            return Err(bad("patterns list is empty".into()));
        }
        if self.n_sides.is_empty() {
            return Err(bad("n_sides list is empty".into()));
        }
        for &n in &self.n_sides {
            if n < 2 {
                return Err(bad(format!("n_side must be >= 2, got {n}")));
            }
        }
        if self.methods.is_empty() {
            return Err(bad("methods list is empty".into()));
        }
        for m in &self.methods {
            m.validate()?;
        }
        Ok(())
    }

    /// Parses a flat `key = value` config file. `#` starts a comment, blank
    /// lines are skipped, list values are comma-separated, and unknown or
    /// repeated keys are errors. Missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = SimConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::BadConfig(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    line_no + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::BadConfig(format!(
                    "line {}: key `{key}` given twice",
                    line_no + 1
                )));
            }
            seen.push(key.to_string());
            let items = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
            let parse_list = |what: &str| -> Result<Vec<u64>> {
                items()
                    .map(|s| {
                        s.parse::<u64>().map_err(|_| {
                            Error::BadConfig(format!("{what}: `{s}` is not a non-negative integer"))
                        })
                    })
                    .collect()
            };
            match key {
                "settings" => {
                    config.settings = parse_list("settings")?.iter().map(|&v| v as u8).collect();
                }
                "patterns" => {
                    config.patterns = items().map(Pattern::from_str).collect::<Result<_>>()?;
                }
                "n_sides" => {
                    config.n_sides = parse_list("n_sides")?.iter().map(|&v| v as u32).collect();
                }
                "reps" => {
                    config.reps = value.parse().map_err(|_| {
                        Error::BadConfig(format!("reps: `{value}` is not a non-negative integer"))
                    })?;
                }
                "seed" => {
                    config.seed = value.parse().map_err(|_| {
                        Error::BadConfig(format!("seed: `{value}` is not a non-negative integer"))
                    })?;
                }
                "threads" => {
                    config.threads = value.parse().map_err(|_| {
                        Error::BadConfig(format!("threads: `{value}` is not a non-negative integer"))
                    })?;
                }
                "methods" => {
                    config.methods = items().map(MethodSpec::from_str).collect::<Result<_>>()?;
                }
                other => {
                    return Err(Error::BadConfig(format!(
                        "line {}: unknown key `{other}`",
                        line_no + 1
                    )));
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Canonical rendering of the resolved configuration; parsing it back
    /// reproduces the config exactly. Written next to outputs as provenance.
    pub fn echo(&self) -> String {
        let join = |items: Vec<String>| items.join(",");
        format!(
            "settings = {}\npatterns = {}\nn_sides = {}\nreps = {}\nseed = {}\nthreads = {}\nmethods = {}\n",
            join(self.settings.iter().map(|s| s.to_string()).collect()),
            join(self.patterns.iter().map(|p| p.to_string()).collect()),
            join(self.n_sides.iter().map(|n| n.to_string()).collect()),
            self.reps,
            self.seed,
            self.threads,
            join(self.methods.iter().map(|m| m.to_string()).collect()),
        )
    }
}

/// One replicate × method result row.
#[derive(Debug, Clone)]
pub struct RepRow {
    pub setting: u8,
    pub pattern: Pattern,
    pub n_side: u32,
    pub method: MethodSpec,
    pub rep: u32,
    /// The replicate seed (shared by all methods on this replicate's data).
    pub seed: u64,
    /// Minimum distance index against the true mixing; `None` when the
    /// estimator failed on this replicate.
    pub mdi: Option<f64>,
    pub converged: Option<bool>,
    /// Failure reason when `mdi` is `None`.
    pub error: Option<String>,
}

/// splitmix64 finalizer: the avalanche step used to mix seed components.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic per-replicate seed from the base seed and the replicate's
/// coordinates in the sweep. The method is deliberately not part of the key:
/// every method sees the same simulated data on a given replicate, so method
/// comparisons are paired.
pub fn replicate_seed(base: u64, setting: u8, pattern: Pattern, n_side: u32, rep: u32) -> u64 {
    let pattern_code = match pattern {
        Pattern::Uniform => 0u64,
        Pattern::Skewed => 1u64,
    };
    let mut h = splitmix64(base);
    for part in [setting as u64, pattern_code, n_side as u64, rep as u64] {
        h = splitmix64(h ^ part);
    }
    h
}

/// Number of cluster centers drawn per replicate (the settings tables are
/// all three-cluster; stationary settings ignore the labels).
const N_CLUSTER_CENTERS: usize = 3;

/// Fits one configured method on the data, building whatever partition the
/// method calls for over `domain`.
pub fn fit_method(
    method: &MethodSpec,
    data: &SpatialData,
    domain: &Rect,
) -> Result<UnmixingModel> {
    method.validate()?;
    match method.kind {
        MethodKind::Sd | MethodKind::Jd => {
            let spec = method.partition.as_ref().expect("validated");
            let partition = make_partition(data.coords(), spec, domain)?;
            if method.kind == MethodKind::Sd {
                snss_sd(data, &partition)
            } else {
                snss_jd(data, &partition)
            }
        }
        MethodKind::Sjd => {
            let spec = method.partition.as_ref().expect("validated");
            let partition = make_partition(data.coords(), spec, domain)?;
            snss_sjd(data, &partition, &method.kernels)
        }
        MethodKind::Sbss => sbss(data, &method.kernels),
        MethodKind::Fobi => fobi(data),
    }
}

/// Runs every method on one freshly simulated replicate.
///
/// Draw order from the replicate seed: coordinates (pattern-dependent),
/// then three cluster centers uniform on the domain, then the latent field.
/// The true mixing is the identity, so each estimate's gain matrix is W
/// itself and MDI(W) measures recovery directly.
fn run_replicate(
    config: &SimConfig,
    setting: u8,
    pattern: Pattern,
    n_side: u32,
    rep: u32,
) -> Vec<RepRow> {
    let seed = replicate_seed(config.seed, setting, pattern, n_side, rep);
    let row = |mdi, converged, error| RepRow {
        setting,
        pattern,
        n_side,
        method: config.methods[0].clone(),
        rep,
        seed,
        mdi,
        converged,
        error,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let coords = match pattern {
        Pattern::Uniform => gen_uniform_coords_rng(n_side, &mut rng),
        Pattern::Skewed => gen_skewed_coords_rng(n_side, &mut rng),
    };
    let domain = Rect::square(n_side as f64);
    let scale = n_side as f64;
    let centers: Vec<[f64; 2]> = (0..N_CLUSTER_CENTERS)
        .map(|_| [rng.random::<f64>() * scale, rng.random::<f64>() * scale])
        .collect();
    let simulate = || -> Result<SpatialData> {
        let clusters = make_partition(&coords, &PartitionSpec::NearestCenters(centers), &domain)?;
        let spec = standard_setting(setting)?;
        let z = sample_setting(&spec, &coords, clusters.labels(), &mut rng)?;
        SpatialData::new(coords.clone(), z)
    };
    let data = match simulate() {
        Ok(d) => d,
        Err(e) => {
            // Simulation failure poisons every method row for this replicate.
            return config
                .methods
                .iter()
                .map(|m| RepRow {
                    method: m.clone(),
                    ..row(None, None, Some(e.to_string()))
                })
                .collect();
        }
    };
    config
        .methods
        .iter()
        .map(|method| {
            let outcome = fit_method(method, &data, &domain).and_then(|model| {
                let score = mdi(&model.w)?;
                Ok((score, model.diagnostics.converged))
            });
            let (mdi, converged, error) = match outcome {
                Ok((score, conv)) => (Some(score), Some(conv), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            RepRow {
                method: method.clone(),
                ..row(mdi, converged, error)
            }
        })
        .collect()
}

/// Runs the full sweep. Replicates execute in parallel (`config.threads`
/// workers; 0 = rayon default) with deterministic per-replicate seeds, and
/// rows come back sorted by (setting, pattern, n_side, method, rep), so the
/// result is independent of scheduling.
pub fn run_simulation(config: &SimConfig) -> Result<Vec<RepRow>> {
    config.validate()?;
    let mut tasks = Vec::new();
    for &setting in &config.settings {
        for &pattern in &config.patterns {
            for &n_side in &config.n_sides {
                for rep in 0..config.reps {
                    tasks.push((setting, pattern, n_side, rep));
                }
            }
        }
    }
    let run = || -> Vec<Vec<RepRow>> {
        tasks
            .par_iter()
            .map(|&(setting, pattern, n_side, rep)| {
                run_replicate(config, setting, pattern, n_side, rep)
            })
            .collect()
    };
    let nested = if config.threads == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::BadConfig(format!("cannot build thread pool: {e}")))?;
        pool.install(run)
    };
    let mut rows: Vec<RepRow> = nested.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.setting, a.pattern, a.n_side, a.method.to_string(), a.rep).cmp(&(
            b.setting,
            b.pattern,
            b.n_side,
            b.method.to_string(),
            b.rep,
        ))
    });
    Ok(rows)
}

/// Aggregated mean MDI over the successful replicates of one
/// (setting, pattern, n_side, method) cell.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub setting: u8,
    pub pattern: Pattern,
    pub n_side: u32,
    pub method: MethodSpec,
    /// Replicates attempted / failed in this cell.
    pub reps: u32,
    pub failed: u32,
    /// Mean over successful replicates; `None` if every replicate failed.
    pub mean_mdi: Option<f64>,
}

/// Groups sorted rows into per-cell means (input order is preserved).
pub fn summarize(rows: &[RepRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for row in rows {
        let key = (row.setting, row.pattern, row.n_side, row.method.to_string());
        let matches = out.last().is_some_and(|s| {
            (s.setting, s.pattern, s.n_side, s.method.to_string()) == key
        });
        if !matches {
            out.push(SummaryRow {
                setting: row.setting,
                pattern: row.pattern,
                n_side: row.n_side,
                method: row.method.clone(),
                reps: 0,
                failed: 0,
                mean_mdi: None,
            });
        }
        let cell = out.last_mut().expect("just pushed");
        cell.reps += 1;
        match row.mdi {
            Some(v) => {
                // Accumulate the running sum in mean_mdi; divided at the end.
                cell.mean_mdi = Some(cell.mean_mdi.unwrap_or(0.0) + v);
            }
            None => cell.failed += 1,
        }
    }
    for cell in &mut out {
        let ok = cell.reps - cell.failed;
        if let Some(sum) = cell.mean_mdi {
            cell.mean_mdi = Some(sum / ok as f64);
        }
    }
    out
}

/// Renders per-replicate rows as CSV. Failed replicates leave `mdi` and
/// `converged` empty (missing marker, never NaN).
pub fn render_rows_csv(rows: &[RepRow]) -> String {
    let mut out = String::from("setting,pattern,n_side,method,partition,kernels,rep,seed,mdi,converged\n");
    for r in rows {
        let mdi = r.mdi.map(fmt_real).unwrap_or_default();
        let converged = r.converged.map(|c| c.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.setting,
            r.pattern,
            r.n_side,
            r.method.kind.name(),
            r.method.partition_column(),
            r.method.kernels_column(),
            r.rep,
            r.seed,
            mdi,
            converged,
        ));
    }
    out
}

/// Renders aggregated rows as CSV; `mean_mdi` is empty when every replicate
/// in the cell failed.
pub fn render_summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("setting,pattern,n_side,method,partition,kernels,reps,failed,mean_mdi\n");
    for r in rows {
        let mean = r.mean_mdi.map(fmt_real).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.setting,
            r.pattern,
            r.n_side,
            r.method.kind.name(),
            r.method.partition_column(),
            r.method.kernels_column(),
            r.reps,
            r.failed,
            mean,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> MethodSpec {
        s.parse().unwrap()
    }

    #[test]
    fn method_specs_roundtrip_through_display() {
        for s in [
            "sd/halve-x",
            "sd/halve-y",
            "jd/grid:2x2",
            "sjd/grid:3x2/f0+ball:2",
            "sjd/halve-x/ring:1:2.5+gauss:0.75",
            "sbss/ball:2",
            "sbss/ball:0+ring:0:1",
            "fobi",
        ] {
            let m = spec(s);
            assert_eq!(m.to_string(), s);
            assert_eq!(spec(&m.to_string()), m);
        }
        assert_eq!(spec("sjd/grid:2x2/f0").kernels, vec![KernelSpec::F0]);
    }

    #[test]
    fn method_spec_arity_is_enforced() {
        for s in [
            "sd",                   // missing partition
            "sd/halve-x/ball:2",    // kernels not allowed
            "jd/grid:2x2/f0",       // kernels not allowed
            "sjd/grid:2x2",         // missing kernels
            "sbss",                 // missing kernels
            "sbss/halve-x",         // partition where kernels belong
            "fobi/halve-x",         // no segments allowed
            "pca/halve-x",          // unknown method
            "sjd/grid:2x2/",        // empty kernel list
        ] {
            assert!(s.parse::<MethodSpec>().is_err(), "`{s}` should not parse");
        }
    }

    #[test]
    fn config_parsing_applies_defaults_and_rejects_junk() {
        let text = "\
# study sweep
settings = 1, 4
patterns = uniform, skewed
n_sides = 8
reps = 3
seed = 99   # base seed
methods = sd/halve-x, fobi
";
        let config = SimConfig::parse(text).unwrap();
        assert_eq!(config.settings, vec![1, 4]);
        assert_eq!(config.patterns, vec![Pattern::Uniform, Pattern::Skewed]);
        assert_eq!(config.n_sides, vec![8]);
        assert_eq!(config.reps, 3);
        assert_eq!(config.seed, 99);
        assert_eq!(config.threads, 0, "unset key keeps its default");
        assert_eq!(config.methods, vec![spec("sd/halve-x"), spec("fobi")]);

        assert!(SimConfig::parse("bogus_key = 1\n").is_err());
        assert!(SimConfig::parse("reps = one\n").is_err());
        assert!(SimConfig::parse("reps = 0\n").is_err());
        assert!(SimConfig::parse("settings = 7\n").is_err());
        assert!(SimConfig::parse("seed = 1\nseed = 2\n").is_err());
        assert!(SimConfig::parse("methods = sd\n").is_err());
        assert!(SimConfig::parse("patterns = hexagonal\n").is_err());
        assert!(SimConfig::parse("n_sides = 1\n").is_err());
    }

    #[test]
    fn echo_roundtrips_exactly() {
        let config = SimConfig::parse("settings = 2\nreps = 5\nmethods = sjd/grid:2x2/f0+ball:2\n")
            .unwrap();
        let echoed = SimConfig::parse(&config.echo()).unwrap();
        assert_eq!(echoed, config);
        let default_echo = SimConfig::default().echo();
        assert_eq!(SimConfig::parse(&default_echo).unwrap(), SimConfig::default());
    }

    #[test]
    fn replicate_seeds_separate_every_key_component() {
        let base = replicate_seed(7, 1, Pattern::Uniform, 20, 0);
        assert_eq!(base, replicate_seed(7, 1, Pattern::Uniform, 20, 0));
        for other in [
            replicate_seed(8, 1, Pattern::Uniform, 20, 0),
            replicate_seed(7, 2, Pattern::Uniform, 20, 0),
            replicate_seed(7, 1, Pattern::Skewed, 20, 0),
            replicate_seed(7, 1, Pattern::Uniform, 21, 0),
            replicate_seed(7, 1, Pattern::Uniform, 20, 1),
        ] {
            assert_ne!(base, other);
        }
    }

    fn tiny_config() -> SimConfig {
        SimConfig {
            settings: vec![1],
            patterns: vec![Pattern::Uniform],
            n_sides: vec![8],
            reps: 3,
            seed: 42,
            threads: 0,
            methods: vec![spec("sd/halve-x"), spec("fobi")],
        }
    }

    #[test]
    fn simulation_rows_are_deterministic_and_sorted() {
        let config = tiny_config();
        let rows = run_simulation(&config).unwrap();
        assert_eq!(rows.len(), 6, "1 setting × 1 pattern × 1 size × 2 methods × 3 reps");
        let again = run_simulation(&config).unwrap();
        assert_eq!(render_rows_csv(&rows), render_rows_csv(&again));

        let mut threaded = config.clone();
        threaded.threads = 2;
        let rows2 = run_simulation(&threaded).unwrap();
        assert_eq!(render_rows_csv(&rows), render_rows_csv(&rows2));

        // Sorted by (setting, pattern, n_side, method, rep); fobi < sd.
        let keys: Vec<(String, u32)> = rows
            .iter()
            .map(|r| (r.method.to_string(), r.rep))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        // All methods share the replicate seed on the same rep.
        assert_eq!(rows[0].seed, rows[3].seed);
        assert!(rows.iter().all(|r| r.mdi.is_some()));
    }

    #[test]
    fn estimator_failures_are_recorded_not_fatal() {
        // sd requires exactly two blocks, so a 3×3 grid fails at run time
        // on every replicate while fobi keeps succeeding.
        let config = SimConfig {
            methods: vec![spec("sd/grid:3x3"), spec("fobi")],
            reps: 2,
            ..tiny_config()
        };
        let rows = run_simulation(&config).unwrap();
        assert_eq!(rows.len(), 4);
        let sd_rows: Vec<&RepRow> = rows
            .iter()
            .filter(|r| r.method.kind == MethodKind::Sd)
            .collect();
        assert!(sd_rows.iter().all(|r| r.mdi.is_none() && r.error.is_some()));
        let fobi_rows: Vec<&RepRow> = rows
            .iter()
            .filter(|r| r.method.kind == MethodKind::Fobi)
            .collect();
        assert!(fobi_rows.iter().all(|r| r.mdi.is_some()));
        // Failed rows render with empty mdi and converged fields.
        let csv = render_rows_csv(&rows);
        let line = csv.lines().nth(4).unwrap();
        assert!(line.starts_with("1,uniform,8,sd,grid:3x3,"));
        assert!(line.ends_with(",,"), "line {line} should end with empty mdi,converged");
    }

    #[test]
    fn summary_means_match_replicate_rows() {
        let config = tiny_config();
        let rows = run_simulation(&config).unwrap();
        let summary = summarize(&rows);
        assert_eq!(summary.len(), 2);
        for cell in &summary {
            let members: Vec<f64> = rows
                .iter()
                .filter(|r| {
                    r.method == cell.method
                        && r.setting == cell.setting
                        && r.n_side == cell.n_side
                        && r.pattern == cell.pattern
                })
                .filter_map(|r| r.mdi)
                .collect();
            assert_eq!(cell.reps, 3);
            assert_eq!(cell.failed, 0);
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            assert!((cell.mean_mdi.unwrap() - mean).abs() < 1e-15);
        }
        let csv = render_summary_csv(&summary);
        assert!(csv.starts_with("setting,pattern,n_side,method,partition,kernels,reps,failed,mean_mdi\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn all_failed_cell_renders_empty_mean() {
        let config = SimConfig {
            methods: vec![spec("sd/grid:3x3")],
            reps: 2,
            ..tiny_config()
        };
        let rows = run_simulation(&config).unwrap();
        let summary = summarize(&rows);
        assert_eq!(summary.len(), 1);
        assert_eq!(summary[0].failed, 2);
        assert!(summary[0].mean_mdi.is_none());
        let csv = render_summary_csv(&summary);
        assert!(csv.lines().nth(1).unwrap().ends_with(",2,2,"));
    }
}
