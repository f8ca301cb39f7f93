//! Time integration of the overdamped particle system
//! `dx_j/dt = (1/N) Σ_{k≠j} F(x_j − x_k, T(x_j))` on the unit torus.

mod evaluator;

pub use evaluator::{
    cell_grid_size, net_forces_cell_list, net_forces_direct, ForceEvaluator, NeighborStrategy,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::DirectionField;
use crate::force::ForceModel;
use crate::torus::{displacement, TorusPoint};

pub const DEFAULT_DT: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleState {
    pub positions: Vec<TorusPoint>,
    pub time: f64,
}

impl ParticleState {
    pub fn new(positions: Vec<TorusPoint>, time: f64) -> Self {
        ParticleState { positions, time }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    /// Dormand–Prince 5(4) pair used as a fixed-step fifth-order method.
    Rkdp,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Euler => "euler",
            Integrator::Rkdp => "rkdp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euler" => Some(Integrator::Euler),
            "rkdp" => Some(Integrator::Rkdp),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    /// Independent uniform points, two draws per particle.
    Uniform { seed: u64 },
    /// Equiangular points on a circle.
    Circle { center: [f64; 2], radius: f64 },
    /// `n_lines` equidistant vertical lines with equally spaced particles.
    Lines { n_lines: usize },
}

/// Stop once `τ/N` stays below `epsilon` for `window` consecutive steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EarlyStop {
    pub epsilon: f64,
    pub window: usize,
}

impl Default for EarlyStop {
    fn default() -> Self {
        EarlyStop {
            epsilon: 1e-9,
            window: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n_particles: usize,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub force: ForceModel,
    pub field: DirectionField,
    pub init: InitSpec,
    pub snapshot_interval: f64,
    /// Spacing of recorded τ samples; every step when equal to `dt`.
    pub tau_interval: f64,
    pub neighbor: NeighborStrategy,
    pub early_stop: Option<EarlyStop>,
}

impl SimConfig {
    /// Defaults: `dt = 0.2`, Euler, cell lists, uniform start with seed 0,
    /// snapshots at start and end only.
    pub fn new(n_particles: usize, t_end: f64, force: ForceModel, field: DirectionField) -> Self {
        SimConfig {
            n_particles,
            dt: DEFAULT_DT,
            t_end,
            integrator: Integrator::Euler,
            force,
            field,
            init: InitSpec::Uniform { seed: 0 },
            snapshot_interval: t_end,
            tau_interval: DEFAULT_DT,
            neighbor: NeighborStrategy::CellList,
            early_stop: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::config("sim.n_particles", "need at least two particles"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("sim.dt", "must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(Error::config("sim.t_end", "must be at least one time step"));
        }
        if !(self.snapshot_interval.is_finite() && self.snapshot_interval > 0.0) {
            return Err(Error::config("sim.snapshot_interval", "must be positive"));
        }
        if !(self.tau_interval.is_finite() && self.tau_interval > 0.0) {
            return Err(Error::config("sim.tau_interval", "must be positive"));
        }
        if let Some(stop) = &self.early_stop {
            if stop.epsilon.is_nan() || stop.epsilon <= 0.0 || stop.window == 0 {
                return Err(Error::config("sim.stop_epsilon", "needs positive epsilon and window"));
            }
        }
        match &self.init {
            InitSpec::Lines { n_lines } => {
                if *n_lines == 0 || !self.n_particles.is_multiple_of(*n_lines) {
                    return Err(Error::config(
                        "init.n_lines",
                        format!("{} particles do not split evenly into {n_lines} lines", self.n_particles),
                    ));
                }
            }
            InitSpec::Circle { center, radius } => {
                if !(center[0].is_finite() && center[1].is_finite() && radius.is_finite() && *radius >= 0.0) {
                    return Err(Error::config("init.radius", "circle needs a finite centre and nonnegative radius"));
                }
            }
            InitSpec::Uniform { .. } => {}
        }
        Ok(())
    }

    pub fn total_steps(&self) -> u64 {
        (self.t_end / self.dt).round().max(1.0) as u64
    }

    fn every(&self, interval: f64) -> u64 {
        (interval / self.dt).round().max(1.0) as u64
    }
}

/// Initial particle positions for a configuration.
pub fn init_state(config: &SimConfig) -> Result<ParticleState> {
    config.validate()?;
    let n = config.n_particles;
    let positions = match &config.init {
        InitSpec::Uniform { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n)
                .map(|_| {
                    let x: f64 = rng.gen();
                    let y: f64 = rng.gen();
                    TorusPoint::wrap_finite(x, y)
                })
                .collect()
        }
        InitSpec::Circle { center, radius } => (0..n)
            .map(|k| {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let (sin, cos) = phi.sin_cos();
                TorusPoint::wrap_finite(center[0] + radius * cos, center[1] + radius * sin)
            })
            .collect(),
        InitSpec::Lines { n_lines } => line_positions(n, *n_lines)?,
    };
    Ok(ParticleState::new(positions, 0.0))
}

/// Equidistant vertical lines: particle `j = 1..=N` sits at
/// `((j − j mod M) / N, n (j mod M) / N)` with `M = N / n`, wrapped.
pub fn line_positions(n_particles: usize, n_lines: usize) -> Result<Vec<TorusPoint>> {
    if n_lines == 0 || !n_particles.is_multiple_of(n_lines) {
        return Err(Error::config(
            "init.n_lines",
            format!("{n_particles} particles do not split evenly into {n_lines} lines"),
        ));
    }
    let per_line = n_particles / n_lines;
    let nf = n_particles as f64;
    Ok((1..=n_particles)
        .map(|j| {
            let r = j % per_line;
            TorusPoint::wrap_finite((j - r) as f64 / nf, (n_lines * r) as f64 / nf)
        })
        .collect())
}

/// `τ = Σ_j |Δx_j| + |Δy_j|` with minimum-image component differences.
pub fn tau(prev: &ParticleState, curr: &ParticleState) -> Result<f64> {
    if prev.len() != curr.len() {
        return Err(Error::Input(format!(
            "particle counts differ: {} vs {}",
            prev.len(),
            curr.len()
        )));
    }
    Ok(tau_positions(&prev.positions, &curr.positions))
}

fn tau_positions(prev: &[TorusPoint], curr: &[TorusPoint]) -> f64 {
    prev.iter()
        .zip(curr)
        .map(|(a, b)| displacement(*b, *a).l1())
        .sum()
}

// Dormand–Prince tableau. The seventh (first-same-as-last) stage only feeds
// the embedded error estimate, which a fixed step never uses.
const DP_A: [&[f64]; 6] = [
    &[],
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
];
const DP_B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];

/// A running simulation: owns the state and all scratch buffers.
#[derive(Debug)]
pub struct Simulation {
    config: SimConfig,
    state: ParticleState,
    steps: u64,
    evaluator: ForceEvaluator,
    stages: Vec<Vec<[f64; 2]>>,
    stage_pos: Vec<TorusPoint>,
    next: Vec<TorusPoint>,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        let state = init_state(&config)?;
        Self::from_state(config, state)
    }

    /// Start from explicit positions; the clock restarts at zero.
    pub fn from_state(config: SimConfig, state: ParticleState) -> Result<Self> {
        config.validate()?;
        if state.len() != config.n_particles {
            return Err(Error::config(
                "sim.n_particles",
                format!("state has {} particles, config expects {}", state.len(), config.n_particles),
            ));
        }
        Ok(Simulation {
            config,
            state: ParticleState::new(state.positions, 0.0),
            steps: 0,
            evaluator: ForceEvaluator::new(),
            stages: Vec::new(),
            stage_pos: Vec::new(),
            next: Vec::new(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn state(&self) -> &ParticleState {
        &self.state
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    /// Current velocities.
    pub fn velocities(&mut self) -> Result<Vec<[f64; 2]>> {
        let mut out = Vec::new();
        let c = &self.config;
        self.evaluator
            .evaluate(&self.state.positions, &c.force, &c.field, c.neighbor, &mut out)?;
        Ok(out)
    }

    /// Advance one step and return τ for it.
    pub fn step(&mut self) -> Result<f64> {
        let c = &self.config;
        let dt = c.dt;
        let n = self.state.len();
        let stage_count = match c.integrator {
            Integrator::Euler => 1,
            Integrator::Rkdp => 6,
        };
        self.stages.resize_with(stage_count, Vec::new);
        self.evaluator
            .evaluate(&self.state.positions, &c.force, &c.field, c.neighbor, &mut self.stages[0])?;
        for (s, a) in DP_A.iter().enumerate().take(stage_count).skip(1) {
            self.stage_pos.clear();
            for j in 0..n {
                let (mut dx, mut dy) = (0.0, 0.0);
                for (i, coef) in a.iter().enumerate() {
                    dx += coef * self.stages[i][j][0];
                    dy += coef * self.stages[i][j][1];
                }
                self.stage_pos.push(self.state.positions[j].translate(dt * dx, dt * dy));
            }
            self.evaluator
                .evaluate(&self.stage_pos, &c.force, &c.field, c.neighbor, &mut self.stages[s])?;
        }

        let time = (self.steps + 1) as f64 * dt;
        self.next.clear();
        for j in 0..n {
            let (dx, dy) = match c.integrator {
                Integrator::Euler => (self.stages[0][j][0], self.stages[0][j][1]),
                Integrator::Rkdp => {
                    let (mut dx, mut dy) = (0.0, 0.0);
                    for (i, b) in DP_B.iter().enumerate() {
                        dx += b * self.stages[i][j][0];
                        dy += b * self.stages[i][j][1];
                    }
                    (dx, dy)
                }
            };
            let p = self.state.positions[j].translate(dt * dx, dt * dy);
            if !p.is_finite() {
                return Err(Error::Divergence { time, particle: j });
            }
            self.next.push(p);
        }
        let tau = tau_positions(&self.state.positions, &self.next);
        std::mem::swap(&mut self.state.positions, &mut self.next);
        self.steps += 1;
        self.state.time = time;
        Ok(tau)
    }
}

/// One integration step from `state`.
pub fn step(state: &ParticleState, config: &SimConfig) -> Result<ParticleState> {
    let mut sim = Simulation::from_state(config.clone(), state.clone())?;
    sim.step()?;
    Ok(ParticleState::new(sim.state.positions, state.time + config.dt))
}

#[derive(Debug)]
pub struct RunReport {
    pub snapshots: Vec<ParticleState>,
    pub tau_series: Vec<(f64, f64)>,
    pub wall_time: f64,
    pub config: SimConfig,
    /// False when the run aborted; `error` then holds the cause.
    pub complete: bool,
    pub stopped_early: bool,
    pub error: Option<Error>,
}

impl RunReport {
    pub fn final_state(&self) -> &ParticleState {
        self.snapshots.last().expect("a report always holds the initial snapshot")
    }

    pub fn final_tau(&self) -> Option<f64> {
        self.tau_series.last().map(|&(_, t)| t)
    }
}

/// Integrate a configuration to `t_end`.
pub fn run(config: &SimConfig) -> Result<RunReport> {
    let sim = Simulation::new(config.clone())?;
    Ok(run_simulation(sim))
}

/// Integrate from explicit initial positions.
pub fn run_from(config: &SimConfig, state: ParticleState) -> Result<RunReport> {
    let sim = Simulation::from_state(config.clone(), state)?;
    Ok(run_simulation(sim))
}

fn run_simulation(mut sim: Simulation) -> RunReport {
    let clock = Clock::start();
    let config = sim.config().clone();
    let total = config.total_steps();
    let snap_every = config.every(config.snapshot_interval);
    let tau_every = config.every(config.tau_interval);
    let n = config.n_particles as f64;

    let mut snapshots = vec![sim.state().clone()];
    let mut tau_series = Vec::new();
    let mut quiet_steps = 0usize;
    let mut stopped_early = false;
    let mut error = None;

    for i in 1..=total {
        let tau = match sim.step() {
            Ok(t) => t,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        let time = sim.state().time;
        if i % tau_every == 0 || i == total {
            tau_series.push((time, tau));
        }
        let mut stop = false;
        if let Some(es) = config.early_stop {
            quiet_steps = if tau / n < es.epsilon { quiet_steps + 1 } else { 0 };
            stop = quiet_steps >= es.window;
        }
        if i % snap_every == 0 || i == total || stop {
            snapshots.push(sim.state().clone());
        }
        if stop {
            if tau_series.last().map(|e| e.0) != Some(time) {
                tau_series.push((time, tau));
            }
            stopped_early = i < total;
            break;
        }
    }

    RunReport {
        snapshots,
        tau_series,
        wall_time: clock.elapsed(),
        config,
        complete: error.is_none(),
        stopped_early,
        error,
    }
}

struct Clock(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Clock {
    fn start() -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        return Clock(std::time::Instant::now());
        #[cfg(target_arch = "wasm32")]
        return Clock();
    }

    fn elapsed(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}
