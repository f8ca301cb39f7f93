use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ridgeform::artifacts::{analyze_state, load_run, prepare_dir, write_run, ManifestInfo};
use ridgeform::config::ConfigDoc;
use ridgeform::experiment::{run_experiment, Experiment};
use ridgeform::field::{sample_angles, DirectionField};
use ridgeform::force::ForceModel;
use ridgeform::output::{coefficients_svg, streamline_set, streamlines_svg, write_angle_csv, write_coefficient_csv};
use ridgeform::{run, Error, Result};

#[derive(Parser)]
#[command(name = "ridgeform", version, about = "Anisotropic particle simulations of fingerprint ridge patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation described by a config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: runs/<config name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace an existing output directory.
        #[arg(long)]
        force: bool,
    },
    /// Run a named parameter sweep.
    Experiment {
        /// One of: delta_sweep, kc_collapse, stationary_delta_core, eta_sweep, cutoff_sweep.
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
        /// `key=value` settings; `sweep.values=a,b,c` replaces the swept values.
        overrides: Vec<String>,
    },
    /// Render streamlines and sample the orientation angle of a field.
    Field {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
        /// Sampling resolution for fields that are not angle maps.
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// Streamline seeds per side.
        #[arg(long, default_value_t = 12)]
        seeds: usize,
    },
    /// Recompute pattern diagnostics from a run directory.
    Analyze {
        #[arg(long)]
        run: PathBuf,
        /// Report every snapshot instead of only the last one.
        #[arg(long)]
        all: bool,
    },
    /// Tabulate and plot the force coefficients on [0, 0.5].
    Forces {
        /// Force preset; ignored when --config is given.
        #[arg(long, default_value = "kc_stationary")]
        preset: String,
        /// Config file whose `force.*` keys describe the model.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
        #[arg(long, default_value_t = 501)]
        samples: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 4,
        Error::Divergence { .. } => 3,
        _ => 2,
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::Io {
        context: format!("writing {}", path.display()),
        source: e,
    })
}

fn load_doc(path: &Path) -> Result<ConfigDoc> {
    ConfigDoc::parse(&read(path)?)
}

fn simulate(config_path: &Path, out: Option<PathBuf>, force: bool) -> Result<()> {
    let doc = load_doc(config_path)?;
    let config = doc.to_sim_config(config_path.parent())?;
    let out = out.unwrap_or_else(|| {
        let stem = config_path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        Path::new("runs").join(stem)
    });
    prepare_dir(&out, force)?;
    let report = run(&config)?;
    let info = ManifestInfo {
        config_path: Some(config_path.display().to_string()),
        preset: None,
        created: now(),
    };
    let files = write_run(&out, &config, &report, &info)?;
    println!("wrote {} files to {}", files.len(), out.display());
    if let Some(tau) = report.final_tau() {
        println!("final tau = {tau:e} (per particle {:e})", tau / config.n_particles as f64);
    }
    match report.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn experiment(name: &str, out: Option<PathBuf>, force: bool, overrides: &[String]) -> Result<()> {
    let mut exp = Experiment::preset(name)?;
    for o in overrides {
        exp.apply_override(o)?;
    }
    let out = out.unwrap_or_else(|| Path::new("experiments").join(name));
    let report = run_experiment(&exp, &out, force, &now())?;
    print!("{}", report.to_csv());
    eprintln!("wrote {} points to {}", report.rows.len(), out.display());
    Ok(())
}

fn field(config_path: &Path, out: &Path, force: bool, grid: usize, seeds: usize) -> Result<()> {
    let doc = load_doc(config_path)?;
    let field = doc.field(config_path.parent())?;
    let (w, h) = match &field {
        DirectionField::AngleMap(g) => (g.width(), g.height()),
        _ => (grid, grid),
    };
    let angles = sample_angles(&field, w, h)?;
    prepare_dir(out, force)?;
    let lines = streamline_set(&field, seeds, 0.005, 80);
    let title = format!("streamlines of {}", config_path.display());
    write(&out.join("field.svg"), streamlines_svg(&lines, &title).as_bytes())?;
    let mut csv = Vec::new();
    write_angle_csv(&mut csv, &angles)?;
    write(&out.join("angles.csv"), &csv)?;
    write(&out.join("angles.txt"), angles.to_text().as_bytes())?;
    println!("wrote field.svg, angles.csv and angles.txt to {}", out.display());
    Ok(())
}

fn analyze(dir: &Path, all: bool) -> Result<()> {
    let (config, states, tau) = load_run(dir)?;
    let tau_at = |t: f64| tau.iter().find(|(time, _)| *time == t).map(|(_, v)| *v);
    let last = states
        .last()
        .ok_or_else(|| Error::Input(format!("no snapshots in {}", dir.display())))?;
    if all {
        for s in &states {
            print!("{}", analyze_state(&config, s, tau_at(s.time))?.to_text());
            println!();
        }
    } else {
        let final_tau = tau_at(last.time).or_else(|| tau.last().map(|t| t.1));
        print!("{}", analyze_state(&config, last, final_tau)?.to_text());
    }
    Ok(())
}

fn forces(preset: &str, config: Option<&Path>, out: &Path, force: bool, samples: usize) -> Result<()> {
    let model = match config {
        Some(p) => load_doc(p)?.force()?,
        None => ForceModel::preset(preset)?,
    };
    prepare_dir(out, force)?;
    let mut csv = Vec::new();
    write_coefficient_csv(&mut csv, &model, samples)?;
    write(&out.join("coefficients.csv"), &csv)?;
    write(&out.join("coefficients.svg"), coefficients_svg(&model, samples).as_bytes())?;
    println!("wrote coefficients.csv and coefficients.svg to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out, force } => simulate(&config, out, force),
        Command::Experiment {
            name,
            out,
            force,
            overrides,
        } => experiment(&name, out, force, &overrides),
        Command::Field {
            config,
            out,
            force,
            grid,
            seeds,
        } => field(&config, &out, force, grid, seeds),
        Command::Analyze { run, all } => analyze(&run, all),
        Command::Forces {
            preset,
            config,
            out,
            force,
            samples,
        } => forces(&preset, config.as_deref(), &out, force, samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
