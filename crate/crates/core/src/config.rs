//! `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! sim.n_particles = 600
//! sim.t_end = 1
//! force.preset = kc_stationary
//! field.type = singularities
//! field.singularity = core 0.5 0.6
//! field.singularity = delta 0.5 0.25
//! ```
//!
//! List keys (`field.singularity`, `field.piece`, `field.grid_row`) may repeat;
//! every other key may appear once. Keys under `manifest.` are ignored so a
//! run manifest can be fed back in as a configuration.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{load_angle_map, AngleGrid, DirectionField, Rect, Singularity, SingularityKind, FIELD_PRESETS};
use crate::force::{ForceLaw, ForceModel, HarmonicParams, KcParams, DEFAULT_CUTOFF, FORCE_PRESETS};
use crate::sim::{EarlyStop, InitSpec, Integrator, NeighborStrategy, SimConfig, DEFAULT_DT};

const LIST_KEYS: &[&str] = &["field.singularity", "field.piece", "field.grid_row"];

const KNOWN_KEYS: &[&str] = &[
    "sim.n_particles",
    "sim.dt",
    "sim.t_end",
    "sim.integrator",
    "sim.neighbor",
    "sim.snapshot_interval",
    "sim.tau_interval",
    "sim.stop_epsilon",
    "sim.stop_window",
    "init.type",
    "init.seed",
    "init.center",
    "init.radius",
    "init.n_lines",
    "force.preset",
    "force.law",
    "force.eta",
    "force.cutoff",
    "force.alpha",
    "force.beta",
    "force.gamma",
    "force.e_a",
    "force.e_r",
    "force.chi",
    "force.delta_l",
    "force.c1",
    "force.c2",
    "force.c",
    "force.c_s",
    "force.c_l",
    "force.e_s1",
    "force.e_s2",
    "force.e_l1",
    "force.e_l2",
    "force.a_s",
    "force.a_l",
    "field.type",
    "field.preset",
    "field.theta0",
    "field.singularity",
    "field.piece",
    "field.angle_map",
    "field.grid_size",
    "field.grid_row",
];

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

/// Ordered list of configuration entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigDoc {
    entries: Vec<Entry>,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = ConfigDoc::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Parse {
                    line,
                    message: format!("malformed key `{key}`"),
                });
            }
            if key.starts_with("manifest.") {
                continue;
            }
            doc.entries.push(Entry {
                key: key.to_string(),
                value: value.trim().to_string(),
                line,
            });
        }
        doc.check()?;
        Ok(doc)
    }

    fn check(&self) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            if !KNOWN_KEYS.contains(&e.key.as_str()) {
                return Err(Error::Parse {
                    line: e.line,
                    message: format!("unknown key `{}`", e.key),
                });
            }
            let list = LIST_KEYS.contains(&e.key.as_str());
            if !list && self.entries[..i].iter().any(|p| p.key == e.key) {
                return Err(Error::Parse {
                    line: e.line,
                    message: format!("`{}` given more than once", e.key),
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.value.as_str())
    }

    pub fn get_all(&self, key: &str) -> Vec<&str> {
        self.entries.iter().filter(|e| e.key == key).map(|e| e.value.as_str()).collect()
    }

    /// Replace every entry for `key` with a single value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::config(key, "unknown key"));
        }
        match self.entries.iter().position(|e| e.key == key) {
            Some(first) => {
                self.entries[first].value = value.to_string();
                let mut i = 0;
                self.entries.retain(|e| {
                    i += 1;
                    i - 1 == first || e.key != key
                });
            }
            None => self.push(key, value),
        }
        Ok(())
    }

    fn push(&mut self, key: &str, value: &str) {
        let line = self.entries.len() + 1;
        self.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line,
        });
    }

    fn remove_prefix(&mut self, prefix: &str) {
        self.entries.retain(|e| !e.key.starts_with(prefix));
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(assignment, "overrides look like key=value"))?;
        let key = key.trim();
        // switching the field or force source drops settings of the old one
        match key {
            "field.type" => self.remove_prefix("field."),
            "field.preset" => {
                self.remove_prefix("field.");
                self.push("field.type", "preset");
            }
            "force.preset" | "force.law" => self.remove_prefix("force."),
            _ => {}
        }
        self.set(key, value.trim())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.key);
            out.push_str(" = ");
            out.push_str(&e.value);
            out.push('\n');
        }
        out
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::config(key, format!("`{v}` is not a valid number")))
            })
            .transpose()
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.number(key)?.ok_or_else(|| Error::config(key, "missing"))
    }

    /// Build a simulation configuration. Relative angle-map paths resolve
    /// against `base_dir`.
    pub fn to_sim_config(&self, base_dir: Option<&Path>) -> Result<SimConfig> {
        let n_particles = self.required::<usize>("sim.n_particles")?;
        let t_end = self.required::<f64>("sim.t_end")?;
        let mut config = SimConfig::new(n_particles, t_end, self.force()?, self.field(base_dir)?);
        config.dt = self.number("sim.dt")?.unwrap_or(DEFAULT_DT);
        config.snapshot_interval = self.number("sim.snapshot_interval")?.unwrap_or(t_end);
        config.tau_interval = self.number("sim.tau_interval")?.unwrap_or(config.dt);
        if let Some(name) = self.get("sim.integrator") {
            config.integrator = Integrator::parse(name)
                .ok_or_else(|| Error::config("sim.integrator", format!("unknown integrator `{name}` (euler, rkdp)")))?;
        }
        if let Some(name) = self.get("sim.neighbor") {
            config.neighbor = NeighborStrategy::parse(name).ok_or_else(|| {
                Error::config("sim.neighbor", format!("unknown strategy `{name}` (direct, cell_list)"))
            })?;
        }
        let epsilon = self.number::<f64>("sim.stop_epsilon")?;
        let window = self.number::<usize>("sim.stop_window")?;
        if epsilon.is_some() || window.is_some() {
            let d = EarlyStop::default();
            config.early_stop = Some(EarlyStop {
                epsilon: epsilon.unwrap_or(d.epsilon),
                window: window.unwrap_or(d.window),
            });
        }
        config.init = self.init()?;
        config.validate()?;
        Ok(config)
    }

    fn init(&self) -> Result<InitSpec> {
        let kind = self.get("init.type").unwrap_or("uniform");
        let unused = |keys: &[&str]| -> Result<()> {
            for k in keys {
                if self.get(k).is_some() {
                    return Err(Error::config(*k, format!("does not apply to init.type = {kind}")));
                }
            }
            Ok(())
        };
        Ok(match kind {
            "uniform" => {
                unused(&["init.center", "init.radius", "init.n_lines"])?;
                InitSpec::Uniform {
                    seed: self.number("init.seed")?.unwrap_or(0),
                }
            }
            "circle" => {
                unused(&["init.seed", "init.n_lines"])?;
                let center = match self.get("init.center") {
                    Some(v) => {
                        let c = floats("init.center", v, 2)?;
                        [c[0], c[1]]
                    }
                    None => [0.5, 0.5],
                };
                InitSpec::Circle {
                    center,
                    radius: self.number("init.radius")?.unwrap_or(0.005),
                }
            }
            "lines" => {
                unused(&["init.seed", "init.center", "init.radius"])?;
                InitSpec::Lines {
                    n_lines: self.required("init.n_lines")?,
                }
            }
            other => {
                return Err(Error::config(
                    "init.type",
                    format!("unknown initial condition `{other}` (uniform, circle, lines)"),
                ))
            }
        })
    }

    /// The force model described by the `force.*` keys.
    pub fn force(&self) -> Result<ForceModel> {
        let mut law = match (self.get("force.preset"), self.get("force.law")) {
            (Some(_), Some(_)) => return Err(Error::config("force.law", "give either force.preset or force.law")),
            (Some(name), None) => *ForceModel::preset(name)
                .map_err(|_| Error::config("force.preset", format!("unknown preset `{name}` ({})", FORCE_PRESETS.join(", "))))?
                .law(),
            (None, Some("kc")) => ForceLaw::Kc {
                params: KcParams::STATIONARY,
                delta_l: 1.0,
            },
            (None, Some("piecewise")) => ForceLaw::Piecewise {
                params: KcParams::STATIONARY,
                c1: 0.06,
                c2: 0.07,
            },
            (None, Some("harmonic")) => ForceLaw::Harmonic(HarmonicParams::BIO),
            (None, Some(other)) => {
                return Err(Error::config(
                    "force.law",
                    format!("unknown law `{other}` (kc, piecewise, harmonic)"),
                ))
            }
            (None, None) => return Err(Error::config("force.preset", "missing (or give force.law)")),
        };
        let kc_keys = ["alpha", "beta", "gamma", "e_a", "e_r", "chi"];
        let harmonic_keys = ["c", "c_s", "c_l", "e_s1", "e_s2", "e_l1", "e_l2", "a_s", "a_l"];
        let mut allowed: Vec<&str> = Vec::new();
        match &mut law {
            ForceLaw::Kc { params, delta_l } => {
                self.kc_overrides(params)?;
                set(self, "force.delta_l", delta_l)?;
                allowed.extend(kc_keys);
                allowed.push("delta_l");
            }
            ForceLaw::Piecewise { params, c1, c2 } => {
                self.kc_overrides(params)?;
                set(self, "force.c1", c1)?;
                set(self, "force.c2", c2)?;
                allowed.extend(kc_keys);
                allowed.extend(["c1", "c2"]);
            }
            ForceLaw::Harmonic(h) => {
                for (k, v) in [
                    ("c", &mut h.c),
                    ("c_s", &mut h.c_s),
                    ("c_l", &mut h.c_l),
                    ("e_s1", &mut h.e_s1),
                    ("e_s2", &mut h.e_s2),
                    ("e_l1", &mut h.e_l1),
                    ("e_l2", &mut h.e_l2),
                    ("a_s", &mut h.a_s),
                    ("a_l", &mut h.a_l),
                ] {
                    set(self, &format!("force.{k}"), v)?;
                }
                allowed.extend(harmonic_keys);
            }
        }
        for e in &self.entries {
            if let Some(k) = e.key.strip_prefix("force.") {
                let general = ["preset", "law", "eta", "cutoff"].contains(&k);
                if !general && !allowed.contains(&k) {
                    return Err(Error::config(e.key.clone(), "does not apply to this force law"));
                }
            }
        }
        ForceModel::new(
            law,
            self.number("force.eta")?.unwrap_or(1.0),
            self.number("force.cutoff")?.unwrap_or(DEFAULT_CUTOFF),
        )
    }

    fn kc_overrides(&self, p: &mut KcParams) -> Result<()> {
        set(self, "force.alpha", &mut p.alpha)?;
        set(self, "force.beta", &mut p.beta)?;
        set(self, "force.gamma", &mut p.gamma)?;
        set(self, "force.e_a", &mut p.e_a)?;
        set(self, "force.e_r", &mut p.e_r)?;
        set(self, "force.chi", &mut p.chi)
    }

    /// The direction field described by the `field.*` keys.
    pub fn field(&self, base_dir: Option<&Path>) -> Result<DirectionField> {
        let kind = self.get("field.type").unwrap_or("homogeneous");
        let allowed: &[&str] = match kind {
            "homogeneous" => &["field.type", "field.theta0"],
            "preset" => &["field.type", "field.preset"],
            "singularities" => &["field.type", "field.theta0", "field.singularity"],
            "piecewise" => &["field.type", "field.piece"],
            "angle_map" => &["field.type", "field.angle_map", "field.grid_size", "field.grid_row"],
            other => {
                return Err(Error::config(
                    "field.type",
                    format!("unknown field type `{other}` (homogeneous, preset, singularities, piecewise, angle_map)"),
                ))
            }
        };
        for e in &self.entries {
            if e.key.starts_with("field.") && !allowed.contains(&e.key.as_str()) {
                return Err(Error::config(e.key.clone(), format!("does not apply to field.type = {kind}")));
            }
        }
        let default_theta = if kind == "homogeneous" { std::f64::consts::FRAC_PI_2 } else { 0.0 };
        let theta0 = self.number("field.theta0")?.unwrap_or(default_theta);
        match kind {
            "homogeneous" => Ok(DirectionField::homogeneous(theta0)),
            "preset" => {
                let name = self.get("field.preset").ok_or_else(|| Error::config("field.preset", "missing"))?;
                DirectionField::preset(name).map_err(|_| {
                    Error::config("field.preset", format!("unknown preset `{name}` ({})", FIELD_PRESETS.join(", ")))
                })
            }
            "singularities" => {
                let mut sings = Vec::new();
                for v in self.get_all("field.singularity") {
                    let mut parts = v.split_whitespace();
                    let kind = parts
                        .next()
                        .and_then(SingularityKind::parse)
                        .ok_or_else(|| Error::config("field.singularity", format!("`{v}` should be `core|delta X Y`")))?;
                    let xy = floats("field.singularity", &parts.collect::<Vec<_>>().join(" "), 2)?;
                    sings.push(Singularity::new(kind, xy[0], xy[1]).map_err(|e| Error::config("field.singularity", e.to_string()))?);
                }
                Ok(DirectionField::singularities(sings, theta0))
            }
            "piecewise" => {
                let mut pieces = Vec::new();
                for v in self.get_all("field.piece") {
                    let p = floats("field.piece", v, 5)?;
                    pieces.push((Rect::new(p[0], p[1], p[2], p[3]), p[4]));
                }
                DirectionField::piecewise(pieces).map_err(|e| Error::config("field.piece", e.to_string()))
            }
            _ => {
                if let Some(path) = self.get("field.angle_map") {
                    if self.get("field.grid_size").is_some() {
                        return Err(Error::config("field.grid_size", "give either field.angle_map or an inline grid"));
                    }
                    let full = match base_dir {
                        Some(dir) => dir.join(path),
                        None => Path::new(path).to_path_buf(),
                    };
                    let text = std::fs::read_to_string(&full)
                        .map_err(|e| Error::io(format!("reading angle map {}", full.display()), e))?;
                    return Ok(DirectionField::AngleMap(load_angle_map(&text)?));
                }
                let size = self
                    .get("field.grid_size")
                    .ok_or_else(|| Error::config("field.angle_map", "missing (or give field.grid_size and rows)"))?;
                let mut text = format!("{size}\n");
                for row in self.get_all("field.grid_row") {
                    text.push_str(row);
                    text.push('\n');
                }
                let grid = load_angle_map(&text).map_err(|e| Error::config("field.grid_row", e.to_string()))?;
                Ok(DirectionField::AngleMap(grid))
            }
        }
    }
}

fn set(doc: &ConfigDoc, key: &str, slot: &mut f64) -> Result<()> {
    if let Some(v) = doc.number(key)? {
        *slot = v;
    }
    Ok(())
}

fn floats(key: &str, text: &str, n: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::config(key, format!("`{text}` is not a list of numbers")))?;
    if vals.len() != n {
        return Err(Error::config(key, format!("expected {n} numbers, found {}", vals.len())));
    }
    Ok(vals)
}

/// Parse a configuration file's text.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<SimConfig> {
    ConfigDoc::parse(text)?.to_sim_config(base_dir)
}

/// A self-contained document that reproduces `config` exactly.
pub fn config_to_doc(config: &SimConfig) -> ConfigDoc {
    let mut doc = ConfigDoc::default();
    let mut put = |k: &str, v: String| doc.push(k, &v);
    put("sim.n_particles", config.n_particles.to_string());
    put("sim.dt", num(config.dt));
    put("sim.t_end", num(config.t_end));
    put("sim.integrator", config.integrator.name().into());
    put("sim.neighbor", config.neighbor.name().into());
    put("sim.snapshot_interval", num(config.snapshot_interval));
    put("sim.tau_interval", num(config.tau_interval));
    if let Some(stop) = config.early_stop {
        put("sim.stop_epsilon", num(stop.epsilon));
        put("sim.stop_window", stop.window.to_string());
    }
    match &config.init {
        InitSpec::Uniform { seed } => {
            put("init.type", "uniform".into());
            put("init.seed", seed.to_string());
        }
        InitSpec::Circle { center, radius } => {
            put("init.type", "circle".into());
            put("init.center", format!("{} {}", num(center[0]), num(center[1])));
            put("init.radius", num(*radius));
        }
        InitSpec::Lines { n_lines } => {
            put("init.type", "lines".into());
            put("init.n_lines", n_lines.to_string());
        }
    }
    let force = &config.force;
    let kc = |put: &mut dyn FnMut(&str, String), p: &KcParams| {
        put("force.alpha", num(p.alpha));
        put("force.beta", num(p.beta));
        put("force.gamma", num(p.gamma));
        put("force.e_a", num(p.e_a));
        put("force.e_r", num(p.e_r));
        put("force.chi", num(p.chi));
    };
    match force.law() {
        ForceLaw::Kc { params, delta_l } => {
            put("force.law", "kc".into());
            kc(&mut put, params);
            put("force.delta_l", num(*delta_l));
        }
        ForceLaw::Piecewise { params, c1, c2 } => {
            put("force.law", "piecewise".into());
            kc(&mut put, params);
            put("force.c1", num(*c1));
            put("force.c2", num(*c2));
        }
        ForceLaw::Harmonic(h) => {
            put("force.law", "harmonic".into());
            for (k, v) in [
                ("force.c", h.c),
                ("force.c_s", h.c_s),
                ("force.c_l", h.c_l),
                ("force.e_s1", h.e_s1),
                ("force.e_s2", h.e_s2),
                ("force.e_l1", h.e_l1),
                ("force.e_l2", h.e_l2),
                ("force.a_s", h.a_s),
                ("force.a_l", h.a_l),
            ] {
                put(k, num(v));
            }
        }
    }
    put("force.eta", num(force.eta()));
    put("force.cutoff", num(force.cutoff()));
    match &config.field {
        DirectionField::Homogeneous { theta0 } => {
            put("field.type", "homogeneous".into());
            put("field.theta0", num(*theta0));
        }
        DirectionField::Singularities { sings, theta0 } => {
            put("field.type", "singularities".into());
            put("field.theta0", num(*theta0));
            for s in sings {
                put(
                    "field.singularity",
                    format!("{} {} {}", s.kind.name(), num(s.position.x()), num(s.position.y())),
                );
            }
        }
        DirectionField::Piecewise { pieces } => {
            put("field.type", "piecewise".into());
            for (r, theta) in pieces {
                put(
                    "field.piece",
                    format!("{} {} {} {} {}", num(r.x0), num(r.y0), num(r.x1), num(r.y1), num(*theta)),
                );
            }
        }
        DirectionField::AngleMap(grid) => {
            put("field.type", "angle_map".into());
            put_grid(&mut put, grid);
        }
    }
    doc
}

fn put_grid(put: &mut dyn FnMut(&str, String), grid: &AngleGrid) {
    put("field.grid_size", format!("{} {}", grid.width(), grid.height()));
    for j in 0..grid.height() {
        let row: Vec<String> = (0..grid.width()).map(|i| num(grid.get(i, j))).collect();
        put("field.grid_row", row.join(" "));
    }
}

/// Shortest text that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}
