use std::path::{Path, PathBuf};

use sparse_adapt::harness::run_experiment_with;
use sparse_adapt::{invariants, Execution, MseTrajectory};

use crate::config::{default_title, RunConfig};
use crate::csv_table::write_csv;
use crate::error::Result;
use crate::manifest::{manifest_path, now, RunManifest, TOOL_VERSION};
use crate::svg::{render_svg, SvgOptions};

/// Result of one experiment run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub trajectories: Vec<MseTrajectory>,
    pub output_files: Vec<PathBuf>,
}

impl RunOutcome {
    /// True when some algorithm diverged in every trial (exit code 3).
    pub fn divergence_dominated(&self) -> bool {
        self.trajectories.iter().any(MseTrajectory::all_diverged)
    }
}

/// Runs the experiment and writes the CSV, the SVG and the manifest.
///
/// Algorithms that diverged in every trial have no curve and are left out of
/// the CSV and the plot.
pub fn run(config: RunConfig) -> Result<RunOutcome> {
    let started_at = now();
    let exec = Execution::from_workers(config.workers);
    let trajectories = run_experiment_with(&config.experiment, exec)?;
    let plotted: Vec<MseTrajectory> = trajectories
        .iter()
        .filter(|t| !t.all_diverged())
        .cloned()
        .collect();

    let mut output_files = Vec::new();
    if !plotted.is_empty() {
        write_csv(&plotted, &config.out_csv)?;
        output_files.push(config.out_csv.clone());
        render_svg(
            &plotted,
            &config.out_svg,
            &SvgOptions {
                db_scale: config.db_scale,
                title: config.title.clone(),
            },
        )?;
        output_files.push(config.out_svg.clone());
    }
    let manifest_file = manifest_path(&config.out_csv);
    output_files.push(manifest_file.clone());
    let manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        started_at,
        finished_at: now(),
        output_files: output_files.clone(),
        config: config.echo(),
    };
    manifest.write(&manifest_file)?;

    Ok(RunOutcome {
        config,
        trajectories,
        output_files,
    })
}

/// `(name, T, SNR dB)` of the four convergence-figure experiments.
pub const PRESETS: [(&str, usize, f64); 4] = [
    ("fig4_T1_snr3", 1, 3.0),
    ("fig5_T3_snr3", 3, 3.0),
    ("fig6_T3_snr6", 3, 6.0),
    ("fig7_T3_snr9", 3, 9.0),
];

/// Runs every preset. `resolve` turns `(T, SNR)` into a full configuration so
/// flag and file overrides apply to each preset.
pub fn reproduce<F>(out_dir: &Path, mut resolve: F) -> Result<Vec<RunOutcome>>
where
    F: FnMut(usize, f64) -> Result<RunConfig>,
{
    let mut outcomes = Vec::with_capacity(PRESETS.len());
    for (name, t, snr) in PRESETS {
        let mut cfg = resolve(t, snr)?;
        cfg.out_csv = out_dir.join(format!("{name}.csv"));
        cfg.out_svg = out_dir.join(format!("{name}.svg"));
        cfg.title = default_title(&cfg.experiment);
        outcomes.push(run(cfg)?);
    }
    Ok(outcomes)
}

/// Runs the runtime invariant suite.
pub fn validate(seed: u64) -> Vec<invariants::CheckOutcome> {
    invariants::run_all(seed)
}
