//! Named parameter sweeps.
//!
//! Each experiment is a base configuration plus a list of values for one
//! swept setting. Every point runs in its own subdirectory and the final
//! state of each point is summarised in `analysis.csv`.

use std::path::Path;

use crate::artifacts::{analyze_state, prepare_dir, write_run, ManifestInfo};
use crate::config::ConfigDoc;
use crate::error::{Error, Result};
use crate::output::Summary;
use crate::sim::run;

pub const EXPERIMENTS: &[&str] = &["delta_sweep", "kc_collapse", "stationary_delta_core", "eta_sweep", "cutoff_sweep"];

pub const ANALYSIS_CSV: &str = "analysis.csv";

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub description: &'static str,
    pub base: ConfigDoc,
    /// Settings that all take the swept value.
    pub sweep_keys: Vec<&'static str>,
    pub values: Vec<String>,
}

fn doc(text: &str) -> ConfigDoc {
    ConfigDoc::parse(text).expect("built-in experiment configuration")
}

impl Experiment {
    pub fn preset(name: &str) -> Result<Self> {
        let (description, base, keys, values): (&str, &str, Vec<&'static str>, &[&str]) = match name {
            "delta_sweep" => (
                "isotropic force delta*F_A + F_R from a small circle; rings form as delta grows",
                "sim.n_particles = 600\nsim.t_end = 20000\nsim.snapshot_interval = 5000\n\
                 init.type = circle\ninit.center = 0.5 0.5\ninit.radius = 0.005\n\
                 force.law = kc\nforce.gamma = 35\nforce.cutoff = 0.5\n\
                 field.type = homogeneous\nfield.theta0 = 1.5707963267948966\n",
                vec!["force.chi", "force.delta_l"],
                &["0.1", "0.3", "0.5", "0.7", "0.9"],
            ),
            "kc_collapse" => (
                "original parameters over a delta: early lines merge and dissolve",
                "sim.n_particles = 600\nsim.dt = 2\nsim.t_end = 400000\nsim.snapshot_interval = 40000\nsim.tau_interval = 200\n\
                 init.type = uniform\ninit.seed = 1\nforce.preset = kc_original\n\
                 field.type = preset\nfield.preset = delta\n",
                vec!["force.cutoff"],
                &["0.1"],
            ),
            "stationary_delta_core" => (
                "weakened attraction keeps the lines over delta and core fields",
                "sim.n_particles = 600\nsim.dt = 2\nsim.t_end = 400000\nsim.snapshot_interval = 40000\nsim.tau_interval = 200\n\
                 init.type = uniform\ninit.seed = 1\nforce.preset = kc_stationary\n\
                 field.type = preset\nfield.preset = delta\n",
                vec!["field.preset"],
                &["delta", "core"],
            ),
            "eta_sweep" => (
                "rescaling the force argument by eta changes the ridge distance",
                "sim.n_particles = 2400\nsim.dt = 100\nsim.t_end = 1000000\nsim.snapshot_interval = 250000\nsim.tau_interval = 10000\n\
                 init.type = uniform\ninit.seed = 1\nforce.preset = bio_harmonic\n\
                 field.type = homogeneous\nfield.theta0 = 1.5707963267948966\n",
                vec!["force.eta"],
                &["0.6", "0.8", "1.0", "1.2"],
            ),
            "cutoff_sweep" => (
                "original parameters over a delta with short force cutoffs",
                "sim.n_particles = 600\nsim.dt = 2\nsim.t_end = 600000\nsim.snapshot_interval = 60000\nsim.tau_interval = 200\n\
                 init.type = uniform\ninit.seed = 1\nforce.preset = kc_original\n\
                 field.type = preset\nfield.preset = delta\n",
                vec!["force.cutoff"],
                &["0.02", "0.04", "0.06"],
            ),
            _ => return Err(Error::lookup("experiment", name, EXPERIMENTS)),
        };
        Ok(Experiment {
            name: name.to_string(),
            description,
            base: doc(base),
            sweep_keys: keys,
            values: values.iter().map(|v| v.to_string()).collect(),
        })
    }

    /// `sweep.values = a,b,c` replaces the swept values; anything else
    /// overrides the base configuration.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        if let Some(list) = assignment.strip_prefix("sweep.values=") {
            let values: Vec<String> = list
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return Err(Error::config("sweep.values", "needs at least one value"));
            }
            self.values = values;
            return Ok(());
        }
        if let Some((key, _)) = assignment.split_once('=') {
            if self.sweep_keys.contains(&key.trim()) {
                return Err(Error::config(key.trim(), "is swept by this experiment; use sweep.values"));
            }
        }
        self.base.apply_override(assignment)
    }

    /// `(label, configuration)` for every sweep point.
    pub fn points(&self) -> Result<Vec<(String, ConfigDoc)>> {
        self.values
            .iter()
            .map(|v| {
                let mut d = self.base.clone();
                for key in &self.sweep_keys {
                    d.set(key, v)?;
                }
                let label = format!("{}_{}", self.sweep_keys[0].rsplit('.').next().unwrap_or("point"), v);
                Ok((label, d))
            })
            .collect()
    }
}

/// One analysis row per point, in sweep order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<(String, String, Summary)>,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let Some((_, _, first)) = self.rows.first() else {
            return out;
        };
        let keys: Vec<&str> = first.entries.iter().map(|(k, _)| k.as_str()).collect();
        out.push_str("point,value,");
        out.push_str(&keys.join(","));
        out.push('\n');
        for (label, value, s) in &self.rows {
            let vals: Vec<&str> = keys.iter().map(|k| s.get(k).unwrap_or("")).collect();
            out.push_str(&format!("{label},{value},{}\n", vals.join(",")));
        }
        out
    }
}

fn thread_budget() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    std::env::var("RIDGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .map_or(available, |n| n.min(available))
}

fn run_point(dir: &Path, label: &str, doc: &ConfigDoc, preset: &str, created: &str) -> Result<Summary> {
    let config = doc.to_sim_config(None)?;
    let report = run(&config)?;
    let point_dir = dir.join(label);
    prepare_dir(&point_dir, true)?;
    let info = ManifestInfo {
        config_path: None,
        preset: Some(preset.to_string()),
        created: created.to_string(),
    };
    write_run(&point_dir, &config, &report, &info)?;
    if let Some(e) = report.error {
        return Err(e);
    }
    analyze_state(&config, report.final_state(), report.final_tau())
}

/// Run every point into `out_dir/<label>/` and write `out_dir/analysis.csv`.
pub fn run_experiment(exp: &Experiment, out_dir: &Path, force: bool, created: &str) -> Result<ExperimentReport> {
    let points = exp.points()?;
    // surface configuration mistakes before any work starts
    for (_, d) in &points {
        d.to_sim_config(None)?;
    }
    prepare_dir(out_dir, force)?;
    let mut manifest = format!(
        "manifest.version = {}\nmanifest.created = {created}\nmanifest.experiment = {}\nmanifest.sweep = {}\nmanifest.values = {}\n",
        crate::artifacts::VERSION,
        exp.name,
        exp.sweep_keys.join(" "),
        exp.values.join(","),
    );
    manifest.push_str(&exp.base.to_text());
    std::fs::write(out_dir.join(crate::artifacts::MANIFEST), manifest)
        .map_err(|e| Error::io(format!("writing manifest in {}", out_dir.display()), e))?;

    let threads = thread_budget().min(points.len()).max(1);
    let mut results: Vec<Option<Result<Summary>>> = (0..points.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<Vec<usize>> = (0..threads)
            .map(|t| (t..points.len()).step_by(threads).collect())
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|idx| {
                let points = &points;
                scope.spawn(move || {
                    idx.into_iter()
                        .map(|i| (i, run_point(out_dir, &points[i].0, &points[i].1, &exp.name, created)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("sweep worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    let mut rows = Vec::new();
    for ((label, _), (value, r)) in points.iter().zip(exp.values.iter().zip(results)) {
        rows.push((label.clone(), value.clone(), r.expect("every point ran")?));
    }
    let report = ExperimentReport { rows };
    std::fs::write(out_dir.join(ANALYSIS_CSV), report.to_csv())
        .map_err(|e| Error::io(format!("writing {}", ANALYSIS_CSV), e))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds_valid_points() {
        for name in EXPERIMENTS {
            let exp = Experiment::preset(name).unwrap();
            let points = exp.points().unwrap();
            assert_eq!(points.len(), exp.values.len());
            for (_, d) in points {
                d.to_sim_config(None).unwrap();
            }
        }
        assert!(matches!(Experiment::preset("nope"), Err(Error::Lookup { .. })));
    }

    #[test]
    fn delta_sweep_scales_both_channels() {
        let exp = Experiment::preset("delta_sweep").unwrap();
        let (label, d) = &exp.points().unwrap()[4];
        assert_eq!(label, "chi_0.9");
        let c = d.to_sim_config(None).unwrap();
        let coeff = c.force.coefficients(0.02);
        assert!((coeff.f_l - coeff.f_s).abs() < 1e-18);
        assert_eq!(c.force.cutoff(), 0.5);
    }

    #[test]
    fn overrides_and_values() {
        let mut exp = Experiment::preset("eta_sweep").unwrap();
        exp.apply_override("sim.dt=0.2").unwrap();
        exp.apply_override("sim.t_end=1").unwrap();
        exp.apply_override("sweep.values=0.9,1.1").unwrap();
        assert!(exp.apply_override("force.eta=2").is_err());
        assert!(exp.apply_override("sweep.values=").is_err());
        let pts = exp.points().unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].1.to_sim_config(None).unwrap().force.eta(), 1.1);
        assert_eq!(pts[1].1.to_sim_config(None).unwrap().t_end, 1.0);
    }

    #[test]
    fn small_sweep_writes_analysis() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("exp");
        let mut exp = Experiment::preset("cutoff_sweep").unwrap();
        for o in ["sim.dt=0.2", "sim.t_end=2", "sim.snapshot_interval=1", "sim.n_particles=60"] {
            exp.apply_override(o).unwrap();
        }
        let report = run_experiment(&exp, &out, false, "now").unwrap();
        assert_eq!(report.rows.len(), 3);
        let csv = std::fs::read_to_string(out.join(ANALYSIS_CSV)).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("point,value,t,"));
        assert!(out.join("cutoff_0.04").join("snapshot_0002.csv").exists());
        assert!(run_experiment(&exp, &out, false, "now").is_err());
    }
}
