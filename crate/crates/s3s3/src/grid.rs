//! JSON interchange of sampled immersions on regular chart grids, and
//! their reconstruction as an [`Immersion`] through finite-difference
//! jets.
//!
//! Interior nodes use fourth-order central stencils; nodes within two
//! steps of an edge fall back to third-order one-sided stencils. Axes
//! with a single node are treated as degenerate: all derivatives along
//! them vanish.

use crate::error::{GeomError, Result};
use crate::jet::Jet2;
use crate::lagrangian::{Immersion, ImmersionJet};
use crate::quat::Quat;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
const UNIT_DRIFT_LIMIT: f64 = 1e-9;
const NODE_MATCH_LIMIT: f64 = 1e-9;

/// Regular grid metadata: node `(i, j, k)` sits at
/// `origin + (i·spacing₀, j·spacing₁, k·spacing₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub counts: [usize; 3],
}

impl GridSpec {
    /// Cubical grid centered at `center` with `count` nodes per axis.
    pub fn centered(center: [f64; 3], spacing: f64, count: usize) -> Self {
        let half = 0.5 * spacing * (count as f64 - 1.0);
        GridSpec {
            origin: [center[0] - half, center[1] - half, center[2] - half],
            spacing: [spacing; 3],
            counts: [count; 3],
        }
    }

    pub fn node_point(&self, idx: [usize; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.origin[a] + idx[a] as f64 * self.spacing[a])
    }

    /// Row-major flattening, last chart axis fastest.
    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.counts[1] + idx[1]) * self.counts[2] + idx[2]
    }

    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1] * self.counts[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One grid node: chart point and the two sphere factors.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SampleRecord {
    pub t: [f64; 3],
    pub p: [f64; 4],
    pub q: [f64; 4],
}

/// Serializable sampling of an immersion over a [`GridSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampledImmersionFile {
    pub schema_version: u32,
    pub chart_dim: u32,
    pub grid: GridSpec,
    pub records: Vec<SampleRecord>,
}

impl SampledImmersionFile {
    /// Sample `imm` over `grid`, in file order.
    pub fn from_immersion(imm: &dyn Immersion, grid: &GridSpec) -> Self {
        let mut records = Vec::with_capacity(grid.len());
        for i in 0..grid.counts[0] {
            for j in 0..grid.counts[1] {
                for k in 0..grid.counts[2] {
                    let t = grid.node_point([i, j, k]);
                    let jet = imm.jet(t);
                    records.push(SampleRecord {
                        t,
                        p: jet.p.value().as_array(),
                        q: jet.q.value().as_array(),
                    });
                }
            }
        }
        SampledImmersionFile {
            schema_version: SCHEMA_VERSION,
            chart_dim: 3,
            grid: *grid,
            records,
        }
    }

    /// Build directly from per-node `(p, q)` values in file order.
    pub fn from_records(grid: &GridSpec, pq: &[(Quat<f64>, Quat<f64>)]) -> Result<Self> {
        if pq.len() != grid.len() {
            return Err(GeomError::BadSampleFile(format!(
                "expected {} records for the grid, got {}",
                grid.len(),
                pq.len()
            )));
        }
        let mut records = Vec::with_capacity(pq.len());
        let mut flat = 0;
        for i in 0..grid.counts[0] {
            for j in 0..grid.counts[1] {
                for k in 0..grid.counts[2] {
                    let (p, q) = pq[flat];
                    records.push(SampleRecord {
                        t: grid.node_point([i, j, k]),
                        p: p.as_array(),
                        q: q.as_array(),
                    });
                    flat += 1;
                }
            }
        }
        let file = SampledImmersionFile {
            schema_version: SCHEMA_VERSION,
            chart_dim: 3,
            grid: *grid,
            records,
        };
        file.validate()?;
        Ok(file)
    }

    /// Schema and consistency gates; every ingestion path runs this.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GeomError::BadSampleFile(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema version {}", self.schema_version));
        }
        if self.chart_dim != 3 {
            return bad(format!("chart dimension must be 3, got {}", self.chart_dim));
        }
        for a in 0..3 {
            let n = self.grid.counts[a];
            if n == 0 {
                return bad(format!("axis {a} has zero nodes"));
            }
            if (2..5).contains(&n) {
                return bad(format!(
                    "axis {a} has {n} nodes; derivatives need 1 (degenerate) or at least 5"
                ));
            }
            if n > 1 && !(self.grid.spacing[a] > 0.0) {
                return bad(format!("axis {a} has non-positive spacing"));
            }
        }
        if self.records.len() != self.grid.len() {
            return bad(format!(
                "grid declares {} nodes but the file holds {} records",
                self.grid.len(),
                self.records.len()
            ));
        }
        for i in 0..self.grid.counts[0] {
            for j in 0..self.grid.counts[1] {
                for k in 0..self.grid.counts[2] {
                    let idx = [i, j, k];
                    let rec = &self.records[self.grid.flat_index(idx)];
                    let node = self.grid.node_point(idx);
                    for a in 0..3 {
                        if (rec.t[a] - node[a]).abs() > NODE_MATCH_LIMIT {
                            return bad(format!(
                                "record at {idx:?} stores chart point {:?}, grid says {node:?}",
                                rec.t
                            ));
                        }
                    }
                    for (label, c) in [("p", &rec.p), ("q", &rec.q)] {
                        let norm = Quat::from_array(*c).norm();
                        if (norm - 1.0).abs() > UNIT_DRIFT_LIMIT {
                            return bad(format!(
                                "{label} at {idx:?} drifted off the unit sphere by {:.3e}",
                                (norm - 1.0).abs()
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SampledImmersionFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Finite-difference stencil as `(node index, coefficient)` pairs; the
/// step division is already folded into the coefficients.
type Stencil = Vec<(usize, f64)>;

fn first_derivative_stencil(i: usize, n: usize, h: f64) -> Stencil {
    if n == 1 {
        return Vec::new();
    }
    let weighted = |nodes: &[usize], c: &[f64], s: f64| -> Stencil {
        nodes.iter().zip(c.iter()).map(|(&idx, &w)| (idx, s * w / h)).collect()
    };
    let edge = [-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0];
    let inset = [-0.25, -5.0 / 6.0, 1.5, -0.5, 1.0 / 12.0];
    if i >= 2 && i + 2 < n {
        weighted(
            &[i - 2, i - 1, i + 1, i + 2],
            &[1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0],
            1.0,
        )
    } else if i == 0 {
        weighted(&[0, 1, 2, 3], &edge, 1.0)
    } else if i == 1 {
        weighted(&[0, 1, 2, 3, 4], &inset, 1.0)
    } else if i == n - 1 {
        weighted(&[n - 1, n - 2, n - 3, n - 4], &edge, -1.0)
    } else {
        weighted(&[n - 1, n - 2, n - 3, n - 4, n - 5], &inset, -1.0)
    }
}

fn second_derivative_stencil(i: usize, n: usize, h: f64) -> Stencil {
    if n == 1 {
        return Vec::new();
    }
    let h2 = h * h;
    let weighted = |nodes: [usize; 5], c: [f64; 5]| -> Stencil {
        nodes.iter().zip(c.iter()).map(|(&idx, &w)| (idx, w / h2)).collect()
    };
    let edge = [35.0 / 12.0, -26.0 / 3.0, 19.0 / 2.0, -14.0 / 3.0, 11.0 / 12.0];
    let inset = [11.0 / 12.0, -5.0 / 3.0, 0.5, 1.0 / 3.0, -1.0 / 12.0];
    if i >= 2 && i + 2 < n {
        weighted(
            [i - 2, i - 1, i, i + 1, i + 2],
            [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
        )
    } else if i == 0 {
        weighted([0, 1, 2, 3, 4], edge)
    } else if i == 1 {
        weighted([0, 1, 2, 3, 4], inset)
    } else if i == n - 1 {
        weighted([n - 1, n - 2, n - 3, n - 4, n - 5], edge)
    } else {
        weighted([n - 1, n - 2, n - 3, n - 4, n - 5], inset)
    }
}

/// An immersion reconstructed from a sampled file. Chart queries snap
/// to the nearest grid node; jets come from the stencils above.
pub struct FileImmersion {
    file: SampledImmersionFile,
}

impl FileImmersion {
    pub fn new(file: SampledImmersionFile) -> Result<Self> {
        file.validate()?;
        Ok(FileImmersion { file })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.file.grid
    }

    fn snap(&self, x: [f64; 3]) -> [usize; 3] {
        [0, 1, 2].map(|a| {
            let n = self.file.grid.counts[a];
            if n == 1 {
                return 0;
            }
            let rel = (x[a] - self.file.grid.origin[a]) / self.file.grid.spacing[a];
            (rel.round().max(0.0) as usize).min(n - 1)
        })
    }

    fn component_jet(&self, idx: [usize; 3], pick: &dyn Fn(&SampleRecord) -> f64) -> Jet2 {
        let grid = &self.file.grid;
        let at = |i: usize, j: usize, k: usize| pick(&self.file.records[grid.flat_index([i, j, k])]);
        let mut out = Jet2::constant(at(idx[0], idx[1], idx[2]));

        let d1: [Stencil; 3] = [0, 1, 2]
            .map(|a| first_derivative_stencil(idx[a], grid.counts[a], grid.spacing[a]));
        let d2: [Stencil; 3] = [0, 1, 2]
            .map(|a| second_derivative_stencil(idx[a], grid.counts[a], grid.spacing[a]));

        for a in 0..3 {
            let mut moved = idx;
            for &(node, c) in &d1[a] {
                moved[a] = node;
                out.g[a] += c * at(moved[0], moved[1], moved[2]);
            }
            let mut moved = idx;
            for &(node, c) in &d2[a] {
                moved[a] = node;
                out.h[a][a] += c * at(moved[0], moved[1], moved[2]);
            }
            for b in (a + 1)..3 {
                let mut acc = 0.0;
                for &(na, ca) in &d1[a] {
                    for &(nb, cb) in &d1[b] {
                        let mut moved = idx;
                        moved[a] = na;
                        moved[b] = nb;
                        acc += ca * cb * at(moved[0], moved[1], moved[2]);
                    }
                }
                out.h[a][b] = acc;
                out.h[b][a] = acc;
            }
        }
        out
    }
}

impl Immersion for FileImmersion {
    fn jet(&self, x: [f64; 3]) -> ImmersionJet {
        let idx = self.snap(x);
        let comp = |which: usize, slot: usize| {
            self.component_jet(idx, &|r: &SampleRecord| {
                if which == 0 {
                    r.p[slot]
                } else {
                    r.q[slot]
                }
            })
        };
        ImmersionJet {
            p: Quat::new(comp(0, 0), comp(0, 1), comp(0, 2), comp(0, 3)),
            q: Quat::new(comp(1, 0), comp(1, 1), comp(1, 2), comp(1, 3)),
        }
    }
}
