//! Batch orchestration: configured runs and their CSV/table renderings.
//!
//! Every emitted file starts with a `#`-prefixed provenance line carrying the
//! config hash, the seed(s) and the model, so a table can always be traced
//! back to the exact run that produced it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{LabModeConfig, RunConfig};
use crate::convergence::{refine_experiment, ConvergenceRow};
use crate::error::{Error, Result};
use crate::pricing::{build_smile, McParams, ModelChoice, SmilePoint};

/// Command-line style overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub model: Option<ModelChoice>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub levels: Option<Vec<usize>>,
}

/// A completed smile run.
#[derive(Debug, Clone, PartialEq)]
pub struct SmileRun {
    pub model: ModelChoice,
    pub seed: u64,
    pub n_paths: usize,
    pub config_hash: String,
    pub points: Vec<SmilePoint>,
}

/// A completed convergence run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRun {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub rows: Vec<ConvergenceRow>,
}

/// Build the configured smile: dispatches on the model choice, prices every
/// strike on one ensemble and inverts each point.
pub fn run_price(config: &RunConfig, overrides: &RunOverrides) -> Result<SmileRun> {
    config.validate()?;
    let setup = config.model_setup()?;
    let model = overrides.model.unwrap_or(config.pricing.model);
    let mc = McParams {
        n_paths: overrides.paths.unwrap_or(config.pricing.paths),
        seed: overrides.seed.unwrap_or(config.pricing.seed),
    };
    if mc.n_paths == 0 {
        return Err(Error::Config("pricing.paths: must be >= 1".into()));
    }
    let caplet = config.caplet_spec();
    let points = build_smile(&setup, model, &caplet, mc, config.pricing.tree_path_limit)?;
    Ok(SmileRun {
        model,
        seed: mc.seed,
        n_paths: mc.n_paths,
        config_hash: config.hash(),
        points,
    })
}

/// Run the configured refinement experiment.
pub fn run_converge(config: &RunConfig, overrides: &RunOverrides) -> Result<ConvergenceRun> {
    config.validate()?;
    let Some(mut spec) = config.convergence_spec()? else {
        return Err(Error::Config(
            "convergence: block missing; the converge command needs one".into(),
        ));
    };
    if let Some(levels) = &overrides.levels {
        spec.levels = levels.clone();
    }
    if let Some(paths) = overrides.paths {
        spec.mode = match config
            .convergence
            .as_ref()
            .map(|c| c.mode)
            .unwrap_or_default()
        {
            LabModeConfig::Mc => crate::convergence::LabMode::MonteCarlo { n_paths: paths },
            LabModeConfig::Exact => crate::convergence::LabMode::Exact { max_paths: paths },
        };
    }
    if let Some(seed) = overrides.seed {
        spec.seeds = vec![seed];
    }
    spec.validate()?;
    let curve = config.market_curve()?;
    let rows = refine_experiment(config.tenor.t_star, config.tenor.n, &curve, &spec)?;
    Ok(ConvergenceRun {
        config_hash: config.hash(),
        seeds: spec.seeds,
        rows,
    })
}

fn fmt_vol(vol: Option<f64>) -> String {
    match vol {
        Some(v) => format!("{v:.8}"),
        None => "nan".to_string(),
    }
}

/// Smile CSV: provenance line, header, one row per strike.
pub fn smile_csv(run: &SmileRun) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# config_sha256={} seed={} model={} paths={}",
        run.config_hash, run.seed, run.model, run.n_paths
    );
    let _ = writeln!(out, "strike_mult,price,implied_vol,std_err");
    for point in &run.points {
        let _ = writeln!(
            out,
            "{},{:.12e},{},{:.6e}",
            point.strike_mult,
            point.price,
            fmt_vol(point.implied_vol),
            point.std_err
        );
    }
    out
}

/// Plot-data CSV on the figure scale (vols multiplied by 100).
pub fn plot_csv(run: &SmileRun) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# config_sha256={} seed={} model={} paths={}",
        run.config_hash, run.seed, run.model, run.n_paths
    );
    let _ = writeln!(out, "strike_mult,implied_vol_x100");
    for point in &run.points {
        let scaled = point.implied_vol.map(|v| v * 100.0);
        let _ = writeln!(out, "{},{}", point.strike_mult, fmt_vol(scaled));
    }
    out
}

/// Convergence CSV: `p, model, price, benchmark, rel_error, ks_stat, seed`.
pub fn convergence_csv(run: &ConvergenceRun) -> String {
    let mut out = String::new();
    let seeds = run
        .seeds
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(out, "# config_sha256={} seeds={seeds}", run.config_hash);
    let _ = writeln!(out, "p,model,price,benchmark,rel_error,ks_stat,seed");
    for row in &run.rows {
        let _ = writeln!(
            out,
            "{},{},{:.12e},{:.12e},{:.6e},{:.6e},{}",
            row.level, row.model, row.price, row.benchmark, row.rel_error, row.ks_stat, row.seed
        );
    }
    out
}

/// Human-readable smile table for the terminal.
pub fn smile_table(run: &SmileRun) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "model: {}   seed: {}   paths: {}",
        run.model, run.seed, run.n_paths
    );
    let _ = writeln!(
        out,
        "{:>8} {:>16} {:>12} {:>12}",
        "K", "price", "impl_vol", "std_err"
    );
    for p in &run.points {
        let _ = writeln!(
            out,
            "{:>8.2} {:>16.10} {:>12} {:>12.3e}",
            p.strike_mult,
            p.price,
            fmt_vol(p.implied_vol),
            p.std_err
        );
    }
    out
}

/// Write the configured output files for a smile run; returns what was
/// written. Paths in the config are taken relative to the working directory.
pub fn emit_smile_outputs(config: &RunConfig, run: &SmileRun) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(output) = &config.output {
        if let Some(path) = &output.smile_csv {
            write_file(Path::new(path), &smile_csv(run))?;
            written.push(PathBuf::from(path));
        }
        if let Some(path) = &output.plot_csv {
            write_file(Path::new(path), &plot_csv(run))?;
            written.push(PathBuf::from(path));
        }
    }
    Ok(written)
}

/// Write the configured convergence CSV, if any.
pub fn emit_convergence_output(config: &RunConfig, run: &ConvergenceRun) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(path) = config
        .output
        .as_ref()
        .and_then(|o| o.convergence_csv.as_ref())
    {
        write_file(Path::new(path), &convergence_csv(run))?;
        written.push(PathBuf::from(path));
    }
    Ok(written)
}

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, content)?;
    Ok(())
}
