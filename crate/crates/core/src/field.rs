//! Orientation fields.
//!
//! Every field is described by an angle `θ(x) ∈ [0, π)` of the direction of
//! smallest stress `s = (cos θ, sin θ)`. The direction of largest stress is
//! `l = (-sin θ, cos θ)`. Since `s` and `-s` describe the same field line,
//! angles are only meaningful modulo `π`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::torus::TorusPoint;

/// Orthonormal pair of smallest-stress (`s`) and largest-stress (`l`) directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub s: [f64; 2],
    pub l: [f64; 2],
}

impl Frame {
    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        Frame {
            s: [cos, sin],
            l: [-sin, cos],
        }
    }
}

/// Reduce an angle into `[0, π)`.
#[inline]
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityKind {
    /// Endpoint of a single line, index +1/2.
    Core,
    /// Junction of three lines, index -1/2.
    Delta,
}

impl SingularityKind {
    pub fn index(self) -> f64 {
        match self {
            SingularityKind::Core => 0.5,
            SingularityKind::Delta => -0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SingularityKind::Core => "core",
            SingularityKind::Delta => "delta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "core" => Some(SingularityKind::Core),
            "delta" => Some(SingularityKind::Delta),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Singularity {
    pub position: TorusPoint,
    pub kind: SingularityKind,
}

impl Singularity {
    pub fn new(kind: SingularityKind, x: f64, y: f64) -> Result<Self> {
        Ok(Singularity {
            position: TorusPoint::wrap(x, y)?,
            kind,
        })
    }
}

/// Half-open axis-aligned rectangle `[x0, x1) × [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    fn contains(&self, p: TorusPoint) -> bool {
        p.x() >= self.x0 && p.x() < self.x1 && p.y() >= self.y0 && p.y() < self.y1
    }

    fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 && other.x0 < self.x1 && self.y0 < other.y1 && other.y0 < self.y1
    }
}

/// Grid of orientation angles sampled at cell centres.
///
/// Cell `(i, j)` is centred at `((i + 0.5) / width, (j + 0.5) / height)` and
/// row `j = 0` is the one nearest `y = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleGrid {
    width: usize,
    height: usize,
    theta: Vec<f64>,
}

impl AngleGrid {
    /// Build a grid from row-major angles (row 0 first). Angles equal to `π`
    /// fold to 0; anything outside `[0, π]` is rejected.
    pub fn new(width: usize, height: usize, theta: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Input("angle grid needs positive dimensions".into()));
        }
        if theta.len() != width * height {
            return Err(Error::Input(format!(
                "angle grid {width}x{height} needs {} values, got {}",
                width * height,
                theta.len()
            )));
        }
        let mut theta = theta;
        for t in theta.iter_mut() {
            *t = checked_angle(*t).map_err(Error::Input)?;
        }
        Ok(AngleGrid {
            width,
            height,
            theta,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.theta[j * self.width + i]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> TorusPoint {
        TorusPoint::wrap_finite(
            (i as f64 + 0.5) / self.width as f64,
            (j as f64 + 0.5) / self.height as f64,
        )
    }

    /// Interpolated angle at `x`.
    ///
    /// Bilinear interpolation runs on the doubled-angle vector
    /// `(cos 2θ, sin 2θ)` over the four surrounding cell centres, with
    /// periodic wrap across the domain edges.
    pub fn theta_at(&self, x: TorusPoint) -> Result<f64> {
        let (i0, i1, fx) = bracket(x.x(), self.width);
        let (j0, j1, fy) = bracket(x.y(), self.height);
        let corners = [
            (i0, j0, (1.0 - fx) * (1.0 - fy)),
            (i1, j0, fx * (1.0 - fy)),
            (i0, j1, (1.0 - fx) * fy),
            (i1, j1, fx * fy),
        ];
        let (mut vx, mut vy) = (0.0, 0.0);
        for (i, j, w) in corners {
            if w == 0.0 {
                continue;
            }
            let (s, c) = (2.0 * self.get(i, j)).sin_cos();
            vx += w * c;
            vy += w * s;
        }
        if vx.hypot(vy) < 1e-12 {
            return Err(Error::DegenerateOrientation { x: x.x(), y: x.y() });
        }
        Ok(reduce_angle(0.5 * vy.atan2(vx)))
    }

    /// Serialize in the angle-map text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.width, self.height);
        for j in 0..self.height {
            let row: Vec<String> = (0..self.width)
                .map(|i| format!("{:?}", self.get(i, j)))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

// Lower/upper cell indices and fractional offset along one axis.
fn bracket(coord: f64, n: usize) -> (usize, usize, f64) {
    let u = coord * n as f64 - 0.5;
    let base = u.floor();
    let frac = u - base;
    let lo = (base as i64).rem_euclid(n as i64) as usize;
    (lo, (lo + 1) % n, frac)
}

fn checked_angle(t: f64) -> std::result::Result<f64, String> {
    if !(0.0..=PI).contains(&t) {
        return Err(format!("angle {t} outside [0, π]"));
    }
    Ok(if t >= PI { 0.0 } else { t })
}

/// Parse an angle map: a `width height` header followed by `height` rows of
/// `width` angles in radians, bottom row first.
pub fn load_angle_map(text: &str) -> Result<AngleGrid> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `width height` header".into(),
    })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| s.parse::<usize>().ok().filter(|&v| v > 0);
    let (width, height) = match dims.as_slice() {
        [w, h] => match (parse_dim(w), parse_dim(h)) {
            (Some(w), Some(h)) => (w, h),
            _ => {
                return Err(Error::Parse {
                    line: hline,
                    message: format!("header `{header}` must be two positive integers"),
                })
            }
        },
        _ => {
            return Err(Error::Parse {
                line: hline,
                message: format!("header `{header}` must be `width height`"),
            })
        }
    };

    let mut theta = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (line, row) in lines {
        if rows == height {
            return Err(Error::Parse {
                line,
                message: format!("expected {height} rows, found more"),
            });
        }
        let before = theta.len();
        for tok in row.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{tok}` is not a number"),
            })?;
            theta.push(checked_angle(v).map_err(|message| Error::Parse { line, message })?);
        }
        if theta.len() - before != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} values, found {}", theta.len() - before),
            });
        }
        rows += 1;
    }
    if rows != height {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: format!("expected {height} rows, found {rows}"),
        });
    }
    AngleGrid::new(width, height, theta)
}

/// Orientation angle of a composition of cores and deltas.
///
/// `θ(x) = θ₀ + Σ I_k arg(x − ζ_k)` with index `+1/2` for a core and `-1/2`
/// for a delta, using the planar (unwrapped) offset from each singularity.
pub fn singularity_orientation(
    sings: &[Singularity],
    theta0: f64,
    x: TorusPoint,
) -> Result<f64> {
    let mut theta = theta0;
    for sing in sings {
        let dx = x.x() - sing.position.x();
        let dy = x.y() - sing.position.y();
        if dx == 0.0 && dy == 0.0 {
            return Err(Error::Singularity { x: x.x(), y: x.y() });
        }
        theta += sing.kind.index() * dy.atan2(dx);
    }
    Ok(reduce_angle(theta))
}

#[derive(Clone, Debug, PartialEq)]
pub enum DirectionField {
    Homogeneous {
        theta0: f64,
    },
    Singularities {
        sings: Vec<Singularity>,
        theta0: f64,
    },
    Piecewise {
        pieces: Vec<(Rect, f64)>,
    },
    AngleMap(AngleGrid),
}

pub const FIELD_PRESETS: &[&str] = &["vertical", "horizontal", "delta", "core", "loop", "whorl", "blocks"];

impl DirectionField {
    pub fn homogeneous(theta0: f64) -> Self {
        DirectionField::Homogeneous { theta0 }
    }

    pub fn singularities(sings: Vec<Singularity>, theta0: f64) -> Self {
        DirectionField::Singularities { sings, theta0 }
    }

    /// Piecewise-constant field. The rectangles must tile `[0, 1)²`.
    pub fn piecewise(pieces: Vec<(Rect, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Input("piecewise field needs at least one rectangle".into()));
        }
        for (r, _) in &pieces {
            let inside = |v: f64| (0.0..=1.0).contains(&v);
            if !(inside(r.x0) && inside(r.x1) && inside(r.y0) && inside(r.y1))
                || r.x0 >= r.x1
                || r.y0 >= r.y1
            {
                return Err(Error::Input(format!("rectangle {r:?} is not a proper subset of the unit square")));
            }
        }
        for (a, (ra, _)) in pieces.iter().enumerate() {
            for (rb, _) in &pieces[a + 1..] {
                if ra.overlaps(rb) {
                    return Err(Error::Input(format!("rectangles {ra:?} and {rb:?} overlap")));
                }
            }
        }
        let area: f64 = pieces.iter().map(|(r, _)| r.area()).sum();
        if (area - 1.0).abs() > 1e-12 {
            return Err(Error::Input(format!(
                "rectangles cover area {area}, they must tile the unit square"
            )));
        }
        Ok(DirectionField::Piecewise { pieces })
    }

    /// Named example fields. Singularity placements are hand-picked to
    /// resemble typical delta, core, loop and whorl patterns.
    pub fn preset(name: &str) -> Result<Self> {
        let sing = |k, x, y| Singularity::new(k, x, y);
        use SingularityKind::{Core, Delta};
        Ok(match name {
            "vertical" => Self::homogeneous(FRAC_PI_2),
            "horizontal" => Self::homogeneous(0.0),
            "delta" => Self::singularities(vec![sing(Delta, 0.5, 0.5)?], 0.0),
            "core" => Self::singularities(vec![sing(Core, 0.5, 0.5)?], 0.0),
            "loop" => Self::singularities(vec![sing(Core, 0.5, 0.6)?, sing(Delta, 0.5, 0.25)?], 0.0),
            "whorl" => Self::singularities(
                vec![
                    sing(Core, 0.45, 0.55)?,
                    sing(Core, 0.55, 0.45)?,
                    sing(Delta, 0.2, 0.25)?,
                    sing(Delta, 0.8, 0.25)?,
                ],
                0.0,
            ),
            "blocks" => Self::piecewise(vec![
                (Rect::new(0.0, 0.0, 0.5, 1.0), FRAC_PI_2),
                (Rect::new(0.5, 0.0, 1.0, 0.5), FRAC_PI_4),
                (Rect::new(0.5, 0.5, 1.0, 1.0), 3.0 * FRAC_PI_4),
            ])?,
            _ => return Err(Error::lookup("field preset", name, FIELD_PRESETS)),
        })
    }

    /// True when the frame is the same everywhere.
    pub fn is_homogeneous(&self) -> bool {
        matches!(self, DirectionField::Homogeneous { .. })
    }

    /// Orientation angle at `x`, in `[0, π)`.
    pub fn theta(&self, x: TorusPoint) -> Result<f64> {
        match self {
            DirectionField::Homogeneous { theta0 } => Ok(reduce_angle(*theta0)),
            DirectionField::Singularities { sings, theta0 } => {
                singularity_orientation(sings, *theta0, x)
            }
            DirectionField::Piecewise { pieces } => pieces
                .iter()
                .find(|(r, _)| r.contains(x))
                .map(|(_, t)| reduce_angle(*t))
                .ok_or_else(|| Error::Input(format!("no rectangle covers ({}, {})", x.x(), x.y()))),
            DirectionField::AngleMap(grid) => grid.theta_at(x),
        }
    }

    pub fn evaluate(&self, x: TorusPoint) -> Result<Frame> {
        self.theta(x).map(Frame::from_angle)
    }
}

/// Follow the smallest-stress direction from `seed` with fixed steps.
///
/// The sign of `s` is chosen at every evaluation to agree with the previous
/// step direction. The trace ends early when the field is undefined.
pub fn trace_streamline(
    field: &DirectionField,
    seed: TorusPoint,
    step: f64,
    n_steps: usize,
) -> Vec<TorusPoint> {
    trace_directed(field, seed, step, n_steps, 1.0)
}

/// Trace in both directions from `seed`; the result runs from the backward
/// end through `seed` to the forward end.
pub fn trace_streamline_both(
    field: &DirectionField,
    seed: TorusPoint,
    step: f64,
    n_steps: usize,
) -> Vec<TorusPoint> {
    let mut back = trace_directed(field, seed, step, n_steps, -1.0);
    back.reverse();
    let fwd = trace_directed(field, seed, step, n_steps, 1.0);
    back.extend_from_slice(&fwd[1.min(fwd.len())..]);
    back
}

fn trace_directed(
    field: &DirectionField,
    seed: TorusPoint,
    step: f64,
    n_steps: usize,
    sign: f64,
) -> Vec<TorusPoint> {
    let mut out = vec![seed];
    let Ok(frame) = field.evaluate(seed) else {
        return out;
    };
    let mut heading = [sign * frame.s[0], sign * frame.s[1]];
    let aligned = |v: [f64; 2], h: [f64; 2]| {
        if v[0] * h[0] + v[1] * h[1] < 0.0 {
            [-v[0], -v[1]]
        } else {
            v
        }
    };
    let mut p = seed;
    for _ in 0..n_steps {
        // midpoint rule
        let Ok(f1) = field.evaluate(p) else { break };
        let d1 = aligned(f1.s, heading);
        let mid = p.translate(0.5 * step * d1[0], 0.5 * step * d1[1]);
        let Ok(f2) = field.evaluate(mid) else { break };
        let d2 = aligned(f2.s, d1);
        p = p.translate(step * d2[0], step * d2[1]);
        heading = d2;
        out.push(p);
    }
    out
}

/// Sample `θ` at the centres of a `width × height` lattice.
pub fn sample_angles(field: &DirectionField, width: usize, height: usize) -> Result<AngleGrid> {
    let mut theta = Vec::with_capacity(width * height);
    for j in 0..height {
        for i in 0..width {
            let x = TorusPoint::wrap_finite(
                (i as f64 + 0.5) / width as f64,
                (j as f64 + 0.5) / height as f64,
            );
            theta.push(field.theta(x)?);
        }
    }
    AngleGrid::new(width, height, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn p(x: f64, y: f64) -> TorusPoint {
        TorusPoint::wrap(x, y).unwrap()
    }

    fn assert_orthonormal(f: &Frame) {
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        assert!((dot(f.s, f.s) - 1.0).abs() < TOL);
        assert!((dot(f.l, f.l) - 1.0).abs() < TOL);
        assert!(dot(f.s, f.l).abs() < TOL);
    }

    #[test]
    fn homogeneous_vertical_frame() {
        let f = DirectionField::homogeneous(FRAC_PI_2).evaluate(p(0.3, 0.8)).unwrap();
        assert!(f.s[0].abs() < TOL && (f.s[1] - 1.0).abs() < TOL);
        assert!((f.l[0] + 1.0).abs() < TOL && f.l[1].abs() < TOL);
    }

    #[test]
    fn delta_at_origin_on_positive_imaginary_axis() {
        let field = DirectionField::singularities(vec![Singularity::new(SingularityKind::Delta, 0.0, 0.0).unwrap()], 0.0);
        let theta = field.theta(p(0.0, 0.25)).unwrap();
        assert!((theta - 3.0 * FRAC_PI_4).abs() < TOL);
        let f = field.evaluate(p(0.0, 0.25)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f.s[0] + h).abs() < TOL && (f.s[1] - h).abs() < TOL);
    }

    #[test]
    fn core_examples() {
        // arg(w) = π: the core sits to the right of the query point
        let core = [Singularity::new(SingularityKind::Core, 0.5, 0.5).unwrap()];
        let theta = singularity_orientation(&core, 0.0, p(0.25, 0.5)).unwrap();
        assert!((theta - FRAC_PI_2).abs() < TOL);
        let origin = [Singularity::new(SingularityKind::Core, 0.0, 0.0).unwrap()];
        let theta = singularity_orientation(&origin, 0.0, p(0.0, 0.3)).unwrap();
        assert!((theta - FRAC_PI_4).abs() < TOL);
    }

    #[test]
    fn delta_on_positive_real_axis_is_zero() {
        let delta = [Singularity::new(SingularityKind::Delta, 0.0, 0.0).unwrap()];
        assert_eq!(singularity_orientation(&delta, 0.0, p(0.4, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn evaluation_at_singularity_fails() {
        let field = DirectionField::preset("delta").unwrap();
        assert!(matches!(field.evaluate(p(0.5, 0.5)), Err(Error::Singularity { .. })));
    }

    #[test]
    fn empty_singularity_list_is_homogeneous() {
        let a = DirectionField::singularities(vec![], 1.1);
        let b = DirectionField::homogeneous(1.1);
        for q in [p(0.1, 0.2), p(0.7, 0.9), p(0.5, 0.0)] {
            assert_eq!(a.evaluate(q).unwrap(), b.evaluate(q).unwrap());
        }
    }

    #[test]
    fn single_singularity_matches_closed_form() {
        for kind in [SingularityKind::Core, SingularityKind::Delta] {
            let sings = [Singularity::new(kind, 0.3, 0.6).unwrap()];
            for q in [p(0.9, 0.1), p(0.1, 0.1), p(0.3, 0.95), p(0.05, 0.6)] {
                let arg = (q.y() - 0.6).atan2(q.x() - 0.3);
                let expected = reduce_angle(0.2 + kind.index() * arg);
                assert_eq!(singularity_orientation(&sings, 0.2, q).unwrap(), expected);
            }
        }
    }

    #[test]
    fn angle_map_parses_and_folds_pi() {
        let g = load_angle_map("2 2\n1.25 1.25\n1.25 1.25\n").unwrap();
        assert_eq!((g.width(), g.height()), (2, 2));
        assert!((0..2).all(|i| (0..2).all(|j| g.get(i, j) == 1.25)));

        let pi = format!("{:?}", PI);
        let g = load_angle_map(&format!("1 1\n{pi}\n")).unwrap();
        assert_eq!(g.get(0, 0), 0.0);
    }

    #[test]
    fn angle_map_errors_name_the_line() {
        let err = load_angle_map("2 1\n0.1 3.2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(matches!(load_angle_map("2 x\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load_angle_map("2 2\n0.1 0.2\n0.3\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(load_angle_map("1 2\n0.1\n"), Err(Error::Parse { .. })));
        assert!(matches!(load_angle_map("1 1\n0.1\n0.2\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(load_angle_map("1 1\n-0.1\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn doubled_angle_interpolation_across_wrap() {
        let g = AngleGrid::new(2, 1, vec![0.1, PI - 0.1]).unwrap();
        // centres at x = 0.25 and 0.75; midway between them is x = 0.5
        let theta = g.theta_at(p(0.5, 0.5)).unwrap();
        assert!(theta.abs() < 1e-12, "{theta}");
    }

    #[test]
    fn opposing_orientations_are_degenerate() {
        let g = AngleGrid::new(2, 1, vec![0.0, FRAC_PI_2]).unwrap();
        assert!(matches!(g.theta_at(p(0.5, 0.5)), Err(Error::DegenerateOrientation { .. })));
    }

    #[test]
    fn cell_centres_reproduce_grid_values() {
        let theta: Vec<f64> = (0..12).map(|k| k as f64 * 0.25).collect();
        let g = AngleGrid::new(4, 3, theta).unwrap();
        for j in 0..3 {
            for i in 0..4 {
                let got = g.theta_at(g.cell_center(i, j)).unwrap();
                assert!((got - g.get(i, j)).abs() < TOL, "{i},{j}: {got}");
            }
        }
    }

    #[test]
    fn angle_map_text_round_trip() {
        let g = AngleGrid::new(3, 2, vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0]).unwrap();
        assert_eq!(load_angle_map(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn piecewise_validation() {
        assert!(DirectionField::preset("blocks").is_ok());
        let gap = DirectionField::piecewise(vec![(Rect::new(0.0, 0.0, 0.5, 1.0), 0.0)]);
        assert!(gap.is_err());
        let overlap = DirectionField::piecewise(vec![
            (Rect::new(0.0, 0.0, 0.6, 1.0), 0.0),
            (Rect::new(0.4, 0.0, 1.0, 1.0), 0.0),
        ]);
        assert!(overlap.is_err());
        let f = DirectionField::preset("blocks").unwrap();
        assert_eq!(f.theta(p(0.2, 0.2)).unwrap(), FRAC_PI_2);
        assert_eq!(f.theta(p(0.7, 0.2)).unwrap(), FRAC_PI_4);
        assert_eq!(f.theta(p(0.5, 0.5)).unwrap(), 3.0 * FRAC_PI_4);
    }

    #[test]
    fn vertical_streamline() {
        let field = DirectionField::homogeneous(FRAC_PI_2);
        let line = trace_streamline(&field, p(0.5, 0.5), 0.01, 10);
        assert_eq!(line.len(), 11);
        for q in &line {
            assert!((q.x() - 0.5).abs() < 1e-12);
        }
        assert!((line[10].y() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn core_streamlines_mirror_about_core_axis() {
        // reflection reverses the orientation, so the mirrored curve runs backwards
        let field = DirectionField::preset("core").unwrap();
        let upper = trace_streamline_both(&field, p(0.3, 0.6), 0.005, 80);
        let mut lower = trace_streamline_both(&field, p(0.3, 0.4), 0.005, 80);
        lower.reverse();
        assert_eq!(upper.len(), lower.len());
        for (a, b) in upper.iter().zip(&lower) {
            assert!((a.x() - b.x()).abs() < 1e-9, "{a:?} vs {b:?}");
            assert!((a.y() - (1.0 - b.y())).abs() < 1e-9, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn streamline_truncates_at_singularity() {
        // the backward trace runs along the core's axis and lands exactly on it
        let field = DirectionField::preset("core").unwrap();
        let line = trace_streamline_both(&field, p(0.75, 0.5), 0.125, 10);
        assert!(line.len() < 21);
        assert_eq!(line[0], p(0.5, 0.5));
        let from_singular = trace_streamline(&field, p(0.5, 0.5), 0.01, 10);
        assert_eq!(from_singular.len(), 1);
    }

    proptest! {
        #[test]
        fn frames_are_orthonormal(x in 0.0f64..1.0, y in 0.0f64..1.0, t in -10.0f64..10.0) {
            for name in FIELD_PRESETS {
                let field = DirectionField::preset(name).unwrap();
                if let Ok(f) = field.evaluate(p(x, y)) {
                    assert_orthonormal(&f);
                }
            }
            let f = DirectionField::homogeneous(t).evaluate(p(x, y)).unwrap();
            assert_orthonormal(&f);
            let th = DirectionField::homogeneous(t).theta(p(x, y)).unwrap();
            prop_assert!((0.0..PI).contains(&th));
        }

        #[test]
        fn angle_and_its_antipode_flip_s(t in 0.0f64..PI) {
            let a = Frame::from_angle(t);
            let b = Frame::from_angle(t + PI);
            prop_assert!((a.s[0] + b.s[0]).abs() < TOL && (a.s[1] + b.s[1]).abs() < TOL);
        }

        #[test]
        fn constant_grid_interpolates_exactly(t in 0.0f64..PI, x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let g = AngleGrid::new(5, 4, vec![t; 20]).unwrap();
            let got = g.theta_at(p(x, y)).unwrap();
            let diff = (got - t).abs();
            prop_assert!(diff < 1e-12 || (PI - diff) < 1e-12, "{} vs {}", got, t);
        }
    }
}
