//! `snss` — spatial non-stationary blind source separation from the command
//! line: Monte-Carlo simulation studies, estimation on ingested CSV data,
//! and moving-block variance-map export.
//!
//! Every run writes `config_echo.txt` next to its outputs so results stay
//! reproducible from the recorded configuration alone. Exit codes: 0 on
//! success, 2 for configuration errors, 3 for data errors, 4 for numeric
//! failures.

use clap::{Parser, Subcommand};
use snss_core::coda::{combined_loadings, ilr_pivot, moving_block_variance, Composition};
use snss_core::csvio::{fmt_real, parse_xy_csv, render_xy_csv};
use snss_core::error::ErrorCategory;
use snss_core::estimators::latent_scores;
use snss_core::sim::{
    fit_method, render_rows_csv, render_summary_csv, run_simulation, summarize, MethodSpec,
    SimConfig,
};
use snss_core::{Rect, Result, SpatialData, UnmixingModel};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "snss", version, about = "Spatial non-stationary blind source separation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo simulation study from a config file.
    Simulate {
        /// Flat key = value config file (settings, patterns, n_sides, reps,
        /// seed, threads, methods).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's replicate count.
        #[arg(long)]
        reps: Option<u32>,
        /// Output directory for results.csv, summary.csv, config_echo.txt.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the config's worker-thread count (0 = all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Estimate an unmixing model on a `x,y,<name1>,...` CSV.
    Estimate {
        /// Input CSV with header `x,y,<name1>,...,<namem>`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Estimator: sd, jd, sjd, sbss, or fobi.
        #[arg(long)]
        method: String,
        /// Partition for sd/jd/sjd: halve-x, halve-y, or grid:KxK.
        #[arg(long)]
        partition: Option<String>,
        /// Kernel(s) for sjd/sbss: ball:R, ring:R1:R2, gauss:R, or f0.
        /// Repeat the flag or join with `+` for several.
        #[arg(long = "kernel")]
        kernels: Vec<String>,
        /// Treat the value columns as a composition: ilr-transform before
        /// estimation and also write combined clr loadings.
        #[arg(long)]
        coda: bool,
        /// Output directory for latent.csv, loadings.csv (with --coda),
        /// metadata.txt, config_echo.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Moving-block variance maps, one CSV per latent component.
    Varmap {
        /// Input CSV with header `x,y,<name1>,...` (typically latent.csv).
        #[arg(long = "in")]
        input: PathBuf,
        /// Grid resolution (cell-center spacing).
        #[arg(long, default_value_t = 1.0)]
        grid_res: f64,
        /// Moving-block side length.
        #[arg(long, default_value_t = 3.0)]
        block: f64,
        /// Output directory for varmap_<name>.csv files, config_echo.txt.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        let code = match e.category() {
            ErrorCategory::Config => 2,
            ErrorCategory::Data => 3,
            ErrorCategory::Numeric => 4,
        };
        std::process::exit(code);
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            config,
            reps,
            out,
            threads,
        } => cmd_simulate(&config, reps, &out, threads),
        Command::Estimate {
            input,
            method,
            partition,
            kernels,
            coda,
            out,
        } => cmd_estimate(&input, &method, partition.as_deref(), &kernels, coda, &out),
        Command::Varmap {
            input,
            grid_res,
            block,
            out,
        } => cmd_varmap(&input, grid_res, block, &out),
    }
}

fn cmd_simulate(
    config_path: &Path,
    reps: Option<u32>,
    out: &Path,
    threads: Option<usize>,
) -> Result<()> {
    let text = fs::read_to_string(config_path)?;
    let mut config = SimConfig::parse(&text)?;
    if let Some(r) = reps {
        config.reps = r;
    }
    if let Some(t) = threads {
        config.threads = t;
    }
    config.validate()?;
    let rows = run_simulation(&config)?;
    let mut failures = 0usize;
    for row in &rows {
        if let Some(reason) = &row.error {
            failures += 1;
            eprintln!(
                "warning: setting {} {} n_side {} {} rep {}: {reason}",
                row.setting, row.pattern, row.n_side, row.method, row.rep
            );
        }
    }
    fs::create_dir_all(out)?;
    fs::write(out.join("config_echo.txt"), config.echo())?;
    fs::write(out.join("results.csv"), render_rows_csv(&rows))?;
    fs::write(out.join("summary.csv"), render_summary_csv(&summarize(&rows)))?;
    println!(
        "wrote {} replicate rows ({failures} failed) to {}",
        rows.len(),
        out.display()
    );
    Ok(())
}

/// Assembles the canonical method string `name[/partition][/kernels]` from
/// the estimate flags, so parsing enforces each estimator's requirements.
fn method_string(method: &str, partition: Option<&str>, kernels: &[String]) -> String {
    let mut s = method.trim().to_string();
    if let Some(p) = partition {
        s.push('/');
        s.push_str(p.trim());
    }
    if !kernels.is_empty() {
        s.push('/');
        s.push_str(&kernels.join("+"));
    }
    s
}

fn metadata_text(
    model: &UnmixingModel,
    echo: &str,
    input_names: &[String],
    n: usize,
) -> String {
    let mut out = String::new();
    out.push_str(echo);
    out.push_str(&format!("n = {n}\n"));
    out.push_str(&format!("p = {}\n", model.w.nrows()));
    out.push_str(&format!("names = {}\n", input_names.join(",")));
    out.push_str(&format!("converged = {}\n", model.diagnostics.converged));
    out.push_str(&format!("sweeps = {}\n", model.diagnostics.sweeps));
    if let Some(criterion) = model.diagnostics.criterion_history.last() {
        out.push_str(&format!("criterion_final = {}\n", fmt_real(*criterion)));
    }
    let t: Vec<String> = model.t.iter().map(|v| fmt_real(*v)).collect();
    out.push_str(&format!("t = {}\n", t.join(",")));
    for i in 0..model.w.nrows() {
        let row: Vec<String> = model.w.row(i).iter().map(|v| fmt_real(*v)).collect();
        out.push_str(&format!("w_row_{i} = {}\n", row.join(",")));
    }
    out
}

fn cmd_estimate(
    input: &Path,
    method: &str,
    partition: Option<&str>,
    kernels: &[String],
    coda: bool,
    out: &Path,
) -> Result<()> {
    let text = fs::read_to_string(input)?;
    let xy = parse_xy_csv(&text)?;
    let spec: MethodSpec = method_string(method, partition, kernels).parse()?;
    let (values, contrast) = if coda {
        let comp = Composition::new(xy.values.clone())?;
        let (z, v) = ilr_pivot(&comp);
        (z, Some(v))
    } else {
        (xy.values.clone(), None)
    };
    let data = SpatialData::new(xy.coords.clone(), values)?;
    let domain = Rect::bounding(&xy.coords);
    let model = fit_method(&spec, &data, &domain)?;
    let scores = latent_scores(&model, &data)?;

    fs::create_dir_all(out)?;
    let z_names: Vec<String> = (1..=scores.ncols()).map(|k| format!("z{k}")).collect();
    fs::write(
        out.join("latent.csv"),
        render_xy_csv(&xy.coords, &scores, &z_names)?,
    )?;
    if let Some(v) = contrast {
        let loadings = combined_loadings(&model, &v)?;
        let mut csv = format!("component,{}\n", xy.names.join(","));
        for i in 0..loadings.nrows() {
            csv.push_str(&z_names[i]);
            for j in 0..loadings.ncols() {
                csv.push(',');
                csv.push_str(&fmt_real(loadings[(i, j)]));
            }
            csv.push('\n');
        }
        fs::write(out.join("loadings.csv"), csv)?;
    }
    let echo = format!(
        "subcommand = estimate\nin = {}\nmethod = {spec}\ncoda = {coda}\n",
        input.display()
    );
    fs::write(out.join("config_echo.txt"), &echo)?;
    fs::write(
        out.join("metadata.txt"),
        metadata_text(&model, &echo, &xy.names, data.n()),
    )?;
    println!(
        "wrote latent scores for {} points × {} components to {}",
        data.n(),
        scores.ncols(),
        out.display()
    );
    Ok(())
}

fn cmd_varmap(input: &Path, grid_res: f64, block: f64, out: &Path) -> Result<()> {
    let text = fs::read_to_string(input)?;
    let xy = parse_xy_csv(&text)?;
    fs::create_dir_all(out)?;
    for (j, name) in xy.names.iter().enumerate() {
        let scores: Vec<f64> = xy.values.column(j).iter().copied().collect();
        let cells = moving_block_variance(&scores, &xy.coords, grid_res, block)?;
        let mut csv = String::from("cell_x,cell_y,count,variance\n");
        for cell in &cells {
            let variance = cell.variance.map(fmt_real).unwrap_or_default();
            csv.push_str(&format!(
                "{},{},{},{variance}\n",
                fmt_real(cell.center[0]),
                fmt_real(cell.center[1]),
                cell.count
            ));
        }
        fs::write(out.join(format!("varmap_{name}.csv")), csv)?;
    }
    let echo = format!(
        "subcommand = varmap\nin = {}\ngrid_res = {grid_res}\nblock = {block}\n",
        input.display()
    );
    fs::write(out.join("config_echo.txt"), echo)?;
    println!(
        "wrote {} variance maps to {}",
        xy.names.len(),
        out.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use snss_core::Error;

    #[test]
    fn method_string_assembly() {
        assert_eq!(
            method_string("sjd", Some("grid:2x2"), &["f0".into(), "ball:2".into()]),
            "sjd/grid:2x2/f0+ball:2"
        );
        assert_eq!(method_string("fobi", None, &[]), "fobi");
        assert_eq!(
            method_string("sbss", None, &["ring:0:1.5".into()]),
            "sbss/ring:0:1.5"
        );
        // A kernel flag that already joins several specs stays intact.
        assert_eq!(
            method_string("sbss", None, &["ball:1+gauss:2".into()]),
            "sbss/ball:1+gauss:2"
        );
        assert!(method_string("sd", Some("halve-x"), &[])
            .parse::<MethodSpec>()
            .is_ok());
        assert!(method_string("sd", None, &[]).parse::<MethodSpec>().is_err());
    }

    #[test]
    fn errors_map_to_documented_exit_codes() {
        // The map in main(): Config → 2, Data → 3, Numeric → 4.
        assert_eq!(
            Error::BadConfig("x".into()).category(),
            ErrorCategory::Config
        );
        assert_eq!(
            Error::CsvFormat {
                row: 1,
                col: 1,
                reason: "x".into()
            }
            .category(),
            ErrorCategory::Data
        );
        assert_eq!(
            Error::FactorizationFailed { attempts: 4 }.category(),
            ErrorCategory::Numeric
        );
    }
}
