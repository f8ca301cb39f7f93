//! Run directories: manifest, per-snapshot CSV and SVG files, τ series.

use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{
    banded_spacing, count_lines, line_proxy, radial_profile, ridge_spacing, static_residual, Window, DEFAULT_BAND,
    DEFAULT_GAP,
};
use crate::config::config_to_doc;
use crate::error::{Error, Result};
use crate::field::DirectionField;
use crate::output::{particles_svg, streamline_set, write_snapshot_csv, write_tau_csv, Summary};
use crate::sim::{InitSpec, ParticleState, RunReport, SimConfig};
use crate::torus::TorusPoint;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST: &str = "manifest.txt";
pub const TAU_CSV: &str = "tau.csv";

/// Provenance recorded alongside the configuration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ManifestInfo {
    pub config_path: Option<String>,
    pub preset: Option<String>,
    pub created: String,
}

/// Create `dir`, refusing to reuse an existing one unless `force` is set.
pub fn prepare_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        if !force {
            return Err(Error::io(
                format!("output directory {}", dir.display()),
                std::io::Error::new(std::io::ErrorKind::AlreadyExists, "already exists (use --force to overwrite)"),
            ));
        }
        fs::remove_dir_all(dir).map_err(|e| Error::io(format!("clearing {}", dir.display()), e))?;
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

pub fn manifest_text(config: &SimConfig, dir: &Path, info: &ManifestInfo, report: Option<&RunReport>) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: &str| out.push_str(&format!("manifest.{k} = {v}\n"));
    put("version", VERSION);
    put("created", &info.created);
    put("output_dir", &dir.display().to_string());
    if let Some(p) = &info.config_path {
        put("config_path", p);
    }
    if let Some(p) = &info.preset {
        put("preset", p);
    }
    if let InitSpec::Uniform { seed } = config.init {
        put("seed", &seed.to_string());
    }
    if let Some(r) = report {
        put("wall_time_s", &format!("{:.3}", r.wall_time));
        put("complete", &r.complete.to_string());
        put("stopped_early", &r.stopped_early.to_string());
        put("final_time", &r.final_state().time.to_string());
    }
    out.push_str(&config_to_doc(config).to_text());
    out
}

pub fn snapshot_name(index: usize, ext: &str) -> String {
    format!("snapshot_{index:04}.{ext}")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Write every artifact of a finished (or aborted) run into `dir`.
pub fn write_run(dir: &Path, config: &SimConfig, report: &RunReport, info: &ManifestInfo) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let path = dir.join(MANIFEST);
    write_file(&path, manifest_text(config, dir, info, Some(report)).as_bytes())?;
    written.push(path);
    let underlay = if config.field.is_homogeneous() {
        None
    } else {
        Some(streamline_set(&config.field, 10, 0.005, 60))
    };
    for (i, state) in report.snapshots.iter().enumerate() {
        let mut csv = Vec::new();
        write_snapshot_csv(&mut csv, &[state])?;
        let path = dir.join(snapshot_name(i, "csv"));
        write_file(&path, &csv)?;
        written.push(path);
        let path = dir.join(snapshot_name(i, "svg"));
        write_file(&path, particles_svg(state, underlay.as_deref()).as_bytes())?;
        written.push(path);
    }
    let mut csv = Vec::new();
    write_tau_csv(&mut csv, &report.tau_series)?;
    let path = dir.join(TAU_CSV);
    write_file(&path, &csv)?;
    written.push(path);
    Ok(written)
}

/// Snapshot CSV files of a run directory in index order.
pub fn snapshot_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(format!("reading {}", dir.display()), e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("snapshot_") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    Ok(files)
}

pub type LoadedRun = (SimConfig, Vec<ParticleState>, Vec<(f64, f64)>);

/// Configuration and snapshots reloaded from a run directory.
pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let read = |p: PathBuf| fs::read_to_string(&p).map_err(|e| Error::io(format!("reading {}", p.display()), e));
    let config = crate::config::parse_config(&read(dir.join(MANIFEST))?, Some(dir))?;
    let mut states = Vec::new();
    for f in snapshot_files(dir)? {
        states.extend(crate::output::read_snapshot_csv(read(f)?.as_bytes())?);
    }
    let tau = crate::output::read_tau_csv(read(dir.join(TAU_CSV))?.as_bytes())?;
    Ok((config, states, tau))
}

/// Windows used by the local line count for curved fields: a ring of
/// squares around the domain centre, away from singular points.
pub fn proxy_windows() -> Vec<Window> {
    [
        (0.25, 0.25),
        (0.75, 0.25),
        (0.25, 0.75),
        (0.75, 0.75),
        (0.5, 0.85),
        (0.5, 0.15),
        (0.15, 0.5),
        (0.85, 0.5),
    ]
    .iter()
    .map(|&(x, y)| Window {
        center: TorusPoint::wrap_finite(x, y),
        half_width: 0.1,
    })
    .collect()
}

pub const PROXY_GAP: f64 = 0.01;
pub const PROXY_MIN_MEMBERS: usize = 3;

/// Pattern diagnostics of one state.
pub fn analyze_state(config: &SimConfig, state: &ParticleState, tau: Option<f64>) -> Result<Summary> {
    let mut s = Summary::default();
    s.push("t", state.time);
    s.push("n_particles", state.len());
    if let DirectionField::Homogeneous { theta0 } = config.field {
        let pattern = count_lines(&state.positions, theta0, DEFAULT_GAP)?;
        s.push("n_lines", pattern.n_lines);
        match ridge_spacing(&pattern) {
            Ok((mean, std)) => {
                s.push("spacing_mean", mean);
                s.push("spacing_std", std);
            }
            Err(_) => {
                s.push("spacing_mean", "");
                s.push("spacing_std", "");
            }
        }
        match banded_spacing(&state.positions, theta0, DEFAULT_BAND, DEFAULT_GAP) {
            Ok((mean, std)) => {
                s.push("band_spacing_mean", mean);
                s.push("band_spacing_std", std);
            }
            Err(_) => {
                s.push("band_spacing_mean", "");
                s.push("band_spacing_std", "");
            }
        }
    } else {
        for key in ["n_lines", "spacing_mean", "spacing_std", "band_spacing_mean", "band_spacing_std"] {
            s.push(key, "");
        }
    }
    let center = match config.init {
        InitSpec::Circle { center, .. } => TorusPoint::wrap_finite(center[0], center[1]),
        _ => TorusPoint::wrap_finite(0.5, 0.5),
    };
    let prof = radial_profile(&state.positions, center)?;
    s.push("mean_radius", prof.mean_radius);
    s.push("std_radius", prof.std_radius);
    s.push("cv_radius", prof.coefficient_of_variation());
    s.push("max_pairwise_distance", prof.max_pairwise_distance);
    s.push(
        "line_proxy",
        line_proxy(&state.positions, &config.field, &proxy_windows(), PROXY_GAP, PROXY_MIN_MEMBERS)?,
    );
    match static_residual(&state.positions, &config.force, &config.field) {
        Ok(r) => s.push("residual", r),
        Err(_) => s.push("residual", ""),
    }
    match tau {
        Some(t) => {
            s.push("tau", t);
            s.push("tau_per_particle", t / state.len() as f64);
        }
        None => {
            s.push("tau", "");
            s.push("tau_per_particle", "");
        }
    }
    Ok(s)
}
