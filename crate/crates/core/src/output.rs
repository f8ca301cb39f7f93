//! CSV and SVG artifacts.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::field::{AngleGrid, DirectionField};
use crate::force::ForceModel;
use crate::sim::ParticleState;
use crate::torus::TorusPoint;

fn csv_err(context: &str, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(context, io),
        other => Error::Input(format!("{context}: {other:?}")),
    }
}

/// Seventeen significant digits: enough to read back the identical `f64`.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows `t,id,x,y` for each particle of each state.
pub fn write_snapshot_csv<W: Write>(out: W, states: &[&ParticleState]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ctx = "writing snapshot CSV";
    w.write_record(["t", "id", "x", "y"]).map_err(|e| csv_err(ctx, e))?;
    for s in states {
        let t = real(s.time);
        for (id, p) in s.positions.iter().enumerate() {
            w.write_record([t.as_str(), &id.to_string(), &real(p.x()), &real(p.y())])
                .map_err(|e| csv_err(ctx, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}

/// States in file order; consecutive rows with the same `t` form one state.
pub fn read_snapshot_csv<R: Read>(input: R) -> Result<Vec<ParticleState>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| csv_err("reading snapshot CSV", e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "id", "x", "y"] {
        return Err(Error::Parse {
            line: 1,
            message: "snapshot header must be `t,id,x,y`".into(),
        });
    }
    let mut states: Vec<ParticleState> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| csv_err("reading snapshot CSV", e))?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("column {} is not a number", k + 1),
                })
        };
        let (t, id) = (field(0)?, field(1)?);
        let p = TorusPoint::wrap(field(2)?, field(3)?).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        match states.last_mut() {
            Some(s) if s.time == t => {
                if id as usize != s.positions.len() {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected particle id {}, found {id}", s.positions.len()),
                    });
                }
                s.positions.push(p)
            }
            _ => {
                if id != 0.0 {
                    return Err(Error::Parse {
                        line,
                        message: "each snapshot must start at particle id 0".into(),
                    });
                }
                states.push(ParticleState::new(vec![p], t))
            }
        }
    }
    Ok(states)
}

/// Rows `t,tau`.
pub fn write_tau_csv<W: Write>(out: W, series: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ctx = "writing tau CSV";
    w.write_record(["t", "tau"]).map_err(|e| csv_err(ctx, e))?;
    for (t, tau) in series {
        w.write_record([real(*t), real(*tau)]).map_err(|e| csv_err(ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}

pub fn read_tau_csv<R: Read>(input: R) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err("reading tau CSV", e))?;
        let parse = |k: usize| rec.get(k).and_then(|v| v.trim().parse::<f64>().ok());
        match (parse(0), parse(1)) {
            (Some(t), Some(tau)) => out.push((t, tau)),
            _ => {
                return Err(Error::Parse {
                    line: i + 2,
                    message: "expected two numbers".into(),
                })
            }
        }
    }
    Ok(out)
}

/// Rows `r,f_l,f_s` sampled evenly on `[0, 0.5]`.
pub fn write_coefficient_csv<W: Write>(out: W, force: &ForceModel, samples: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ctx = "writing coefficient CSV";
    w.write_record(["r", "f_l", "f_s"]).map_err(|e| csv_err(ctx, e))?;
    for (r, c) in force.coefficient_curve(samples) {
        w.write_record([real(r), real(c.f_l), real(c.f_s)]).map_err(|e| csv_err(ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}

/// Rows `i,j,x,y,theta` for every cell of an angle grid.
pub fn write_angle_csv<W: Write>(out: W, grid: &AngleGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ctx = "writing angle CSV";
    w.write_record(["i", "j", "x", "y", "theta"]).map_err(|e| csv_err(ctx, e))?;
    for j in 0..grid.height() {
        for i in 0..grid.width() {
            let c = grid.cell_center(i, j);
            w.write_record([i.to_string(), j.to_string(), real(c.x()), real(c.y()), real(grid.get(i, j))])
                .map_err(|e| csv_err(ctx, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(ctx, e))
}

const SIZE: f64 = 600.0;

fn svg_open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <title>{}</title>\n\
         <rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\" stroke=\"black\"/>\n",
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Screen coordinates with `y` pointing up.
fn screen(p: TorusPoint) -> (f64, f64) {
    (p.x() * SIZE, (1.0 - p.y()) * SIZE)
}

fn polylines(out: &mut String, lines: &[Vec<TorusPoint>], style: &str) {
    for line in lines {
        // split wherever the curve wraps around the torus
        let mut pieces: Vec<Vec<TorusPoint>> = vec![Vec::new()];
        for w in line.windows(2) {
            pieces.last_mut().unwrap().push(w[0]);
            if (w[1].x() - w[0].x()).abs() > 0.5 || (w[1].y() - w[0].y()).abs() > 0.5 {
                pieces.push(Vec::new());
            }
        }
        if let Some(last) = line.last() {
            pieces.last_mut().unwrap().push(*last);
        }
        for piece in pieces.iter().filter(|p| p.len() >= 2) {
            out.push_str("<polyline points=\"");
            for (i, p) in piece.iter().enumerate() {
                let (x, y) = screen(*p);
                let sep = if i == 0 { "" } else { " " };
                let _ = write!(out, "{sep}{x:.2},{y:.2}");
            }
            let _ = writeln!(out, "\" {style}/>");
        }
    }
}

/// Seeds on a `k × k` lattice, traced both ways.
pub fn streamline_set(field: &DirectionField, k: usize, step: f64, n_steps: usize) -> Vec<Vec<TorusPoint>> {
    let mut lines = Vec::new();
    for j in 0..k {
        for i in 0..k {
            let seed = TorusPoint::wrap_finite((i as f64 + 0.5) / k as f64, (j as f64 + 0.5) / k as f64);
            let line = crate::field::trace_streamline_both(field, seed, step, n_steps);
            if line.len() >= 2 {
                lines.push(line);
            }
        }
    }
    lines
}

/// Particles as dots over an optional streamline underlay.
pub fn particles_svg(state: &ParticleState, underlay: Option<&[Vec<TorusPoint>]>) -> String {
    let mut out = String::new();
    svg_open(&mut out, &format!("t = {}", state.time));
    if let Some(lines) = underlay {
        polylines(&mut out, lines, "fill=\"none\" stroke=\"#9bb\" stroke-width=\"1\"");
    }
    out.push_str("<g fill=\"black\">\n");
    for p in &state.positions {
        let (x, y) = screen(*p);
        let _ = writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.6\"/>");
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn streamlines_svg(lines: &[Vec<TorusPoint>], title: &str) -> String {
    let mut out = String::new();
    svg_open(&mut out, title);
    polylines(&mut out, lines, "fill=\"none\" stroke=\"black\" stroke-width=\"1\"");
    out.push_str("</svg>\n");
    out
}

/// Both coefficient curves on `[0, 0.5]` with a zero line.
pub fn coefficients_svg(force: &ForceModel, samples: usize) -> String {
    let curve = force.coefficient_curve(samples);
    let (lo, hi) = curve
        .iter()
        .flat_map(|(_, c)| [c.f_l, c.f_s])
        .filter(|v| v.is_finite())
        .fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let map = |r: f64, v: f64| (r / 0.5 * SIZE, SIZE - (v - lo) / span * SIZE);
    let mut out = String::new();
    svg_open(&mut out, "force coefficients: f_l (red), f_s (blue)");
    let (_, zero) = map(0.0, 0.0);
    let _ = writeln!(out, "<line x1=\"0\" y1=\"{zero:.2}\" x2=\"{SIZE}\" y2=\"{zero:.2}\" stroke=\"#999\"/>");
    for (colour, pick) in [("red", 0usize), ("blue", 1)] {
        out.push_str("<polyline points=\"");
        for (i, (r, c)) in curve.iter().enumerate() {
            let v = if pick == 0 { c.f_l } else { c.f_s };
            let (x, y) = map(*r, v);
            let sep = if i == 0 { "" } else { " " };
            let _ = write!(out, "{sep}{x:.2},{y:.2}");
        }
        let _ = writeln!(out, "\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\"/>");
    }
    out.push_str("</svg>\n");
    out
}

/// Flat `key = value` block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::line_positions;

    fn p(x: f64, y: f64) -> TorusPoint {
        TorusPoint::wrap(x, y).unwrap()
    }

    #[test]
    fn snapshots_round_trip_exactly() {
        let a = ParticleState::new(vec![p(0.1, 0.2), p(1.0 / 3.0, 0.999_999_999_999)], 0.0);
        let b = ParticleState::new(vec![p(0.7, 0.3), p(std::f64::consts::FRAC_1_SQRT_2, 0.5)], 0.2);
        let mut buf = Vec::new();
        write_snapshot_csv(&mut buf, &[&a, &b]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,id,x,y\n"));
        assert_eq!(text.lines().count(), 5);
        assert_eq!(read_snapshot_csv(&buf[..]).unwrap(), vec![a, b]);
    }

    #[test]
    fn malformed_snapshots_name_the_line() {
        let err = read_snapshot_csv("t,id,x,y\n0,0,0.1,0.1\n0,1,oops,0.2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(read_snapshot_csv("a,b\n".as_bytes()).is_err());
    }

    #[test]
    fn tau_round_trips() {
        let series = vec![(0.2, 1e-5), (0.4, 3.25e-7)];
        let mut buf = Vec::new();
        write_tau_csv(&mut buf, &series).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t,tau\n"));
        assert_eq!(read_tau_csv(&buf[..]).unwrap(), series);
    }

    #[test]
    fn coefficient_table_spans_half_period() {
        let mut buf = Vec::new();
        write_coefficient_csv(&mut buf, &ForceModel::preset("bio_harmonic").unwrap(), 11).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "r,f_l,f_s");
        assert_eq!(rows.len(), 12);
        assert!(rows[11].starts_with("5.0000000000000000e-1,"));
    }

    fn assert_xml(svg: &str) {
        let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
        assert_eq!(doc.root_element().tag_name().name(), "svg");
    }

    #[test]
    fn svgs_are_well_formed() {
        let field = DirectionField::preset("delta").unwrap();
        let lines = streamline_set(&field, 6, 0.01, 40);
        assert!(!lines.is_empty());
        let state = ParticleState::new(line_positions(20, 4).unwrap(), 1.5);
        assert_xml(&particles_svg(&state, Some(&lines)));
        assert_xml(&particles_svg(&state, None));
        assert_xml(&streamlines_svg(&lines, "delta <field> & more"));
        assert_xml(&coefficients_svg(&ForceModel::preset("kc_original").unwrap(), 200));
    }

    #[test]
    fn wrapped_streamlines_are_split() {
        let line = vec![p(0.5, 0.98), p(0.5, 0.99), p(0.5, 0.005), p(0.5, 0.015)];
        let svg = streamlines_svg(&[line], "wrap");
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn summary_is_key_value() {
        let mut s = Summary::default();
        s.push("n_lines", 5);
        s.push("spacing_mean", 0.2);
        assert_eq!(s.to_text(), "n_lines = 5\nspacing_mean = 0.2\n");
        assert_eq!(s.get("n_lines"), Some("5"));
    }
}
