//! Net-force passes.
//!
//! Both strategies add the in-range pair forces acting on particle `j` in
//! ascending partner index and scale by `1/N` at the end, so the cell-list
//! pass reproduces the direct pass bit for bit.

use crate::error::{Error, Result};
use crate::field::{DirectionField, Frame};
use crate::force::ForceModel;
use crate::torus::{displacement, TorusPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeighborStrategy {
    Direct,
    CellList,
}

impl NeighborStrategy {
    pub fn name(self) -> &'static str {
        match self {
            NeighborStrategy::Direct => "direct",
            NeighborStrategy::CellList => "cell_list",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "direct" => Some(NeighborStrategy::Direct),
            "cell_list" => Some(NeighborStrategy::CellList),
            _ => None,
        }
    }
}

/// Number of cells per side used for a cutoff, or `None` when the grid would
/// be too coarse to help.
pub fn cell_grid_size(cutoff: f64) -> Option<usize> {
    // the margin keeps every in-range pair within adjacent cells under rounding
    let m = ((1.0 - 1e-9) / cutoff).floor() as usize;
    (m >= 3).then_some(m)
}

/// Reusable scratch space for force passes.
#[derive(Debug, Default)]
pub struct ForceEvaluator {
    frames: Vec<Frame>,
    cell_of: Vec<usize>,
    cell_start: Vec<usize>,
    cell_members: Vec<usize>,
    partners: Vec<Vec<(u32, [f64; 2])>>,
    scratch: Vec<(u32, [f64; 2])>,
}

impl ForceEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Velocities `v_j = (1/N) Σ_{k≠j} F(x_j − x_k, T(x_j))` written into `out`.
    pub fn evaluate(
        &mut self,
        positions: &[TorusPoint],
        force: &ForceModel,
        field: &DirectionField,
        strategy: NeighborStrategy,
        out: &mut Vec<[f64; 2]>,
    ) -> Result<()> {
        self.compute_frames(positions, field)?;
        out.clear();
        out.resize(positions.len(), [0.0, 0.0]);
        match (strategy, cell_grid_size(force.cutoff())) {
            (NeighborStrategy::CellList, Some(m)) => {
                self.bucket(positions, m);
                if field.is_homogeneous() {
                    self.cell_pass_symmetric(positions, force, m, out);
                } else {
                    self.cell_pass(positions, force, m, out);
                }
            }
            _ => {
                if field.is_homogeneous() {
                    self.direct_pass_symmetric(positions, force, out);
                } else {
                    self.direct_pass(positions, force, out);
                }
            }
        }
        let n = positions.len() as f64;
        for v in out.iter_mut() {
            v[0] /= n;
            v[1] /= n;
        }
        Ok(())
    }

    fn compute_frames(&mut self, positions: &[TorusPoint], field: &DirectionField) -> Result<()> {
        self.frames.clear();
        if let DirectionField::Homogeneous { .. } = field {
            let frame = field.evaluate(positions[0])?;
            self.frames.resize(positions.len(), frame);
            return Ok(());
        }
        for (index, p) in positions.iter().enumerate() {
            let frame = field.evaluate(*p).map_err(|e| Error::ParticleSingularity {
                index,
                source: Box::new(e),
            })?;
            self.frames.push(frame);
        }
        Ok(())
    }

    fn direct_pass(&self, positions: &[TorusPoint], force: &ForceModel, out: &mut [[f64; 2]]) {
        for (j, pj) in positions.iter().enumerate() {
            let frame = &self.frames[j];
            let mut acc = [0.0, 0.0];
            for (k, pk) in positions.iter().enumerate() {
                if k == j {
                    continue;
                }
                if let Some(f) = force.pair_force_within(displacement(*pj, *pk), frame) {
                    acc[0] += f[0];
                    acc[1] += f[1];
                }
            }
            out[j] = acc;
        }
    }

    // With one frame for everybody F(-d) = -F(d) exactly, so each pair is
    // evaluated once. Particle k still receives its terms in ascending
    // partner order: first from j < k during earlier rows, then its own row.
    fn direct_pass_symmetric(&self, positions: &[TorusPoint], force: &ForceModel, out: &mut [[f64; 2]]) {
        let frame = &self.frames[0];
        for j in 0..positions.len() {
            let pj = positions[j];
            let mut acc = out[j];
            for k in j + 1..positions.len() {
                if let Some(f) = force.pair_force_within(displacement(pj, positions[k]), frame) {
                    acc[0] += f[0];
                    acc[1] += f[1];
                    out[k][0] -= f[0];
                    out[k][1] -= f[1];
                }
            }
            out[j] = acc;
        }
    }

    fn bucket(&mut self, positions: &[TorusPoint], m: usize) {
        let cells = m * m;
        let mf = m as f64;
        self.cell_of.clear();
        self.cell_of.extend(positions.iter().map(|p| {
            let cx = ((p.x() * mf) as usize).min(m - 1);
            let cy = ((p.y() * mf) as usize).min(m - 1);
            cy * m + cx
        }));
        self.cell_start.clear();
        self.cell_start.resize(cells + 1, 0);
        for &c in &self.cell_of {
            self.cell_start[c + 1] += 1;
        }
        for c in 0..cells {
            self.cell_start[c + 1] += self.cell_start[c];
        }
        // stable fill: members of each cell stay in ascending index order
        let mut cursor = self.cell_start.clone();
        self.cell_members.clear();
        self.cell_members.resize(positions.len(), 0);
        for (j, &c) in self.cell_of.iter().enumerate() {
            self.cell_members[cursor[c]] = j;
            cursor[c] += 1;
        }
    }

    fn neighbor_cells(&self, j: usize, m: usize) -> [usize; 9] {
        let c = self.cell_of[j];
        let (cx, cy) = (c % m, c / m);
        let mut out = [0; 9];
        let mut i = 0;
        for oy in [m - 1, 0, 1] {
            for ox in [m - 1, 0, 1] {
                out[i] = ((cy + oy) % m) * m + (cx + ox) % m;
                i += 1;
            }
        }
        out
    }

    fn cell_pass(&mut self, positions: &[TorusPoint], force: &ForceModel, m: usize, out: &mut [[f64; 2]]) {
        let mut buf = std::mem::take(&mut self.scratch);
        for (j, pj) in positions.iter().enumerate() {
            let frame = &self.frames[j];
            buf.clear();
            for cell in self.neighbor_cells(j, m) {
                for &k in &self.cell_members[self.cell_start[cell]..self.cell_start[cell + 1]] {
                    if k == j {
                        continue;
                    }
                    if let Some(f) = force.pair_force_within(displacement(*pj, positions[k]), frame) {
                        buf.push((k as u32, f));
                    }
                }
            }
            out[j] = sum_sorted(&mut buf);
        }
        self.scratch = buf;
    }

    fn cell_pass_symmetric(&mut self, positions: &[TorusPoint], force: &ForceModel, m: usize, out: &mut [[f64; 2]]) {
        let n = positions.len();
        let mut partners = std::mem::take(&mut self.partners);
        partners.resize_with(n, Vec::new);
        partners.iter_mut().for_each(Vec::clear);
        let frame = self.frames[0];
        for (j, pj) in positions.iter().enumerate() {
            for cell in self.neighbor_cells(j, m) {
                for &k in &self.cell_members[self.cell_start[cell]..self.cell_start[cell + 1]] {
                    if k <= j {
                        continue;
                    }
                    if let Some(f) = force.pair_force_within(displacement(*pj, positions[k]), &frame) {
                        partners[j].push((k as u32, f));
                        partners[k].push((j as u32, [-f[0], -f[1]]));
                    }
                }
            }
        }
        for (j, list) in partners.iter_mut().enumerate() {
            out[j] = sum_sorted(list);
        }
        self.partners = partners;
    }
}

fn sum_sorted(buf: &mut [(u32, [f64; 2])]) -> [f64; 2] {
    buf.sort_unstable_by_key(|e| e.0);
    let mut acc = [0.0, 0.0];
    for (_, f) in buf.iter() {
        acc[0] += f[0];
        acc[1] += f[1];
    }
    acc
}

/// Net velocities by summing over every particle pair.
pub fn net_forces_direct(
    positions: &[TorusPoint],
    force: &ForceModel,
    field: &DirectionField,
) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    ForceEvaluator::new().evaluate(positions, force, field, NeighborStrategy::Direct, &mut out)?;
    Ok(out)
}

/// Net velocities using a cell list; falls back to the direct pass when the
/// cutoff allows fewer than three cells per side.
pub fn net_forces_cell_list(
    positions: &[TorusPoint],
    force: &ForceModel,
    field: &DirectionField,
) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    ForceEvaluator::new().evaluate(positions, force, field, NeighborStrategy::CellList, &mut out)?;
    Ok(out)
}
