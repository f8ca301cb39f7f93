//! Pattern diagnostics: force residuals, line counting, ridge spacing and
//! radial profiles.

use crate::error::{Error, Result};
use crate::field::DirectionField;
use crate::force::ForceModel;
use crate::sim::net_forces_direct;
use crate::torus::{displacement, distance, wrap_coord, TorusPoint};

/// Default gap separating neighbouring lines in projected coordinates.
pub const DEFAULT_GAP: f64 = 0.02;

/// Largest net force magnitude over all particles.
pub fn static_residual(positions: &[TorusPoint], force: &ForceModel, field: &DirectionField) -> Result<f64> {
    let v = net_forces_direct(positions, force, field)?;
    Ok(v.iter().map(|f| f[0].hypot(f[1])).fold(0.0, f64::max))
}

/// Parallel lines found by projecting particles across the ridge direction.
#[derive(Clone, Debug, PartialEq)]
pub struct LinePattern {
    pub n_lines: usize,
    /// Projected line coordinates in `[0, 1)`, increasing.
    pub centers: Vec<f64>,
    /// Circular gaps between consecutive centers; empty for a single line.
    pub spacings: Vec<f64>,
}

impl LinePattern {
    pub fn from_centers(mut centers: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Input("a line pattern needs at least one center".into()));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input("line centers must be finite".into()));
        }
        for c in centers.iter_mut() {
            *c = wrap_coord(*c);
        }
        centers.sort_by(f64::total_cmp);
        let n = centers.len();
        let spacings = if n == 1 {
            Vec::new()
        } else {
            (0..n)
                .map(|i| {
                    if i + 1 < n {
                        centers[i + 1] - centers[i]
                    } else {
                        1.0 - centers[n - 1] + centers[0]
                    }
                })
                .collect()
        };
        Ok(LinePattern {
            n_lines: n,
            centers,
            spacings,
        })
    }
}

/// Projection across lines running at angle `theta`; vertical lines map to `x`.
fn across(p: TorusPoint, theta: f64) -> f64 {
    wrap_coord(p.x() * theta.sin() - p.y() * theta.cos())
}

/// Group particles into lines of direction `theta`, splitting wherever the
/// projected coordinates leave a circular gap wider than `gap_threshold`.
pub fn count_lines(positions: &[TorusPoint], theta: f64, gap_threshold: f64) -> Result<LinePattern> {
    if positions.is_empty() {
        return Err(Error::Input("no particles to group into lines".into()));
    }
    if !(gap_threshold > 0.0 && gap_threshold < 0.5) {
        return Err(Error::Input(format!("gap threshold {gap_threshold} outside (0, 0.5)")));
    }
    let mut u: Vec<f64> = positions.iter().map(|p| across(*p, theta)).collect();
    u.sort_by(f64::total_cmp);
    let n = u.len();
    let gap_after = |i: usize| if i + 1 < n { u[i + 1] - u[i] } else { 1.0 - u[n - 1] + u[0] };
    let breaks: Vec<usize> = (0..n).filter(|&i| gap_after(i) > gap_threshold).collect();
    if breaks.len() <= 1 {
        return LinePattern::from_centers(vec![circular_mean(&u)]);
    }
    let centers = breaks
        .iter()
        .map(|&b| {
            // a cluster runs from just after one break to the next break
            let start = (b + 1) % n;
            let mut members = Vec::new();
            let mut i = start;
            loop {
                members.push(u[i]);
                if breaks.binary_search(&i).is_ok() {
                    break;
                }
                i = (i + 1) % n;
            }
            let origin = members[0];
            let offset = members.iter().map(|v| wrap_coord(v - origin)).sum::<f64>() / members.len() as f64;
            origin + offset
        })
        .collect();
    LinePattern::from_centers(centers)
}

fn circular_mean(values: &[f64]) -> f64 {
    let tau = std::f64::consts::TAU;
    let (s, c) = values
        .iter()
        .fold((0.0, 0.0), |(s, c), v| (s + (tau * v).sin(), c + (tau * v).cos()));
    if s.hypot(c) < 1e-12 {
        return values[0];
    }
    wrap_coord(s.atan2(c) / tau)
}

/// Mean and population standard deviation of the line spacings.
pub fn ridge_spacing(pattern: &LinePattern) -> Result<(f64, f64)> {
    if pattern.n_lines < 2 {
        return Err(Error::InsufficientLines(pattern.n_lines));
    }
    Ok(mean_std(&pattern.spacings))
}

/// Default band width for [`banded_spacing`].
pub const DEFAULT_BAND: f64 = 0.05;

fn along(p: TorusPoint, theta: f64) -> f64 {
    wrap_coord(p.x() * theta.cos() + p.y() * theta.sin())
}

/// Ridge spacing of wavy or broken lines.
///
/// Particles are cut into bands of width `band` along the line direction,
/// lines are counted inside each band with [`count_lines`], and the mean
/// spacing of every band holding at least two lines is collected. Returns
/// the mean and population standard deviation over those bands.
pub fn banded_spacing(positions: &[TorusPoint], theta: f64, band: f64, gap_threshold: f64) -> Result<(f64, f64)> {
    if !(band > 0.0 && band <= 0.5) {
        return Err(Error::Input(format!("band width {band} outside (0, 0.5]")));
    }
    let n_bands = (1.0 / band).ceil() as usize;
    let mut members: Vec<Vec<TorusPoint>> = vec![Vec::new(); n_bands];
    for p in positions {
        let k = ((along(*p, theta) / band) as usize).min(n_bands - 1);
        members[k].push(*p);
    }
    let mut per_band = Vec::new();
    for m in members.iter().filter(|m| !m.is_empty()) {
        if let Ok((mean, _)) = ridge_spacing(&count_lines(m, theta, gap_threshold)?) {
            per_band.push(mean);
        }
    }
    if per_band.is_empty() {
        return Err(Error::InsufficientLines(0));
    }
    Ok(mean_std(&per_band))
}

/// Where a τ series levels off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    /// End time of the first block whose mean τ is within tolerance of the
    /// previous block's.
    pub time: f64,
    pub mean_tau: f64,
}

/// Average `(t, τ)` samples over consecutive blocks of length `block` and
/// return the first block whose mean differs from its predecessor by at most
/// `rel_tol` relative. Samples are assumed to be in increasing time; the last
/// block only counts when it is complete.
pub fn tau_plateau(series: &[(f64, f64)], block: f64, rel_tol: f64) -> Option<Plateau> {
    let (&(t0, _), &(t_last, _)) = (series.first()?, series.last()?);
    let mut means: Vec<(f64, f64)> = Vec::new();
    let (mut k, mut sum, mut count) = (0usize, 0.0, 0usize);
    for &(t, v) in series {
        let idx = ((t - t0) / block) as usize;
        if idx != k && count > 0 {
            means.push((t0 + (k + 1) as f64 * block, sum / count as f64));
            sum = 0.0;
            count = 0;
        }
        k = idx;
        sum += v;
        count += 1;
    }
    if count > 0 && t_last >= t0 + (k + 1) as f64 * block - 1e-9 * block {
        means.push((t0 + (k + 1) as f64 * block, sum / count as f64));
    }
    means.windows(2).find_map(|w| {
        let ((_, prev), (time, curr)) = (w[0], w[1]);
        ((curr - prev).abs() <= rel_tol * prev.abs()).then_some(Plateau { time, mean_tau: curr })
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialProfile {
    pub center: TorusPoint,
    pub mean_radius: f64,
    pub std_radius: f64,
    pub max_pairwise_distance: f64,
}

impl RadialProfile {
    /// Spread of radii relative to their mean.
    pub fn coefficient_of_variation(&self) -> f64 {
        self.std_radius / self.mean_radius
    }
}

pub fn radial_profile(positions: &[TorusPoint], center: TorusPoint) -> Result<RadialProfile> {
    if positions.is_empty() {
        return Err(Error::Input("no particles for a radial profile".into()));
    }
    let radii: Vec<f64> = positions.iter().map(|p| distance(*p, center)).collect();
    let (mean_radius, std_radius) = mean_std(&radii);
    let mut max_pairwise_distance: f64 = 0.0;
    for (j, a) in positions.iter().enumerate() {
        for b in &positions[j + 1..] {
            max_pairwise_distance = max_pairwise_distance.max(distance(*a, *b));
        }
    }
    Ok(RadialProfile {
        center,
        mean_radius,
        std_radius,
        max_pairwise_distance,
    })
}

/// Square sampling window used to count lines where a curved field is
/// close to constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub center: TorusPoint,
    pub half_width: f64,
}

/// Number of line crossings inside a window: particles in the window are
/// projected across the local field direction at its center and split at
/// gaps wider than `gap_threshold`. Windows holding fewer than `min_members`
/// particles per cluster ignore that cluster as noise.
pub fn local_line_count(
    positions: &[TorusPoint],
    field: &DirectionField,
    window: Window,
    gap_threshold: f64,
    min_members: usize,
) -> Result<usize> {
    let theta = field.theta(window.center)?;
    let (sin, cos) = theta.sin_cos();
    let mut u: Vec<f64> = positions
        .iter()
        .map(|p| displacement(*p, window.center))
        .filter(|d| d.dx.abs() <= window.half_width && d.dy.abs() <= window.half_width)
        .map(|d| d.dx * sin - d.dy * cos)
        .collect();
    u.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut run = 0;
    for (i, v) in u.iter().enumerate() {
        if i > 0 && v - u[i - 1] > gap_threshold {
            count += usize::from(run >= min_members);
            run = 0;
        }
        run += 1;
    }
    count += usize::from(run >= min_members);
    Ok(count)
}

/// Sum of [`local_line_count`] over several windows.
pub fn line_proxy(
    positions: &[TorusPoint],
    field: &DirectionField,
    windows: &[Window],
    gap_threshold: f64,
    min_members: usize,
) -> Result<usize> {
    windows
        .iter()
        .map(|w| local_line_count(positions, field, *w, gap_threshold, min_members))
        .sum()
}
