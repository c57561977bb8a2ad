use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{BufRead, Write};

/// Boundary marker for edges on a truncation arc; polygon edges use their index.
pub const ARC_MARKER: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub marker: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangularMesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counter-clockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshQuality {
    pub nodes: usize,
    pub triangles: usize,
    pub min_angle_deg: f64,
    /// Longest edge over all triangles.
    pub max_diameter: f64,
    pub min_diameter: f64,
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl TriangularMesh {
    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Interior angles of triangle `t`, radians.
    pub fn angles(&self, t: usize) -> [f64; 3] {
        let v = self.vertices(t);
        let mut out = [0.0; 3];
        for k in 0..3 {
            let p = v[k];
            let q = v[(k + 1) % 3];
            let r = v[(k + 2) % 3];
            let u = [q[0] - p[0], q[1] - p[1]];
            let w = [r[0] - p[0], r[1] - p[1]];
            out[k] = (u[0] * w[1] - u[1] * w[0]).atan2(u[0] * w[0] + u[1] * w[1]);
        }
        out
    }

    pub fn diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.vertices(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn quality(&self) -> MeshQuality {
        let mut min_angle = f64::INFINITY;
        let mut max_d: f64 = 0.0;
        let mut min_d = f64::INFINITY;
        for t in 0..self.triangles.len() {
            for a in self.angles(t) {
                min_angle = min_angle.min(a);
            }
            let d = self.diameter(t);
            max_d = max_d.max(d);
            min_d = min_d.min(d);
        }
        MeshQuality {
            nodes: self.nodes.len(),
            triangles: self.triangles.len(),
            min_angle_deg: min_angle.to_degrees(),
            max_diameter: max_d,
            min_diameter: min_d,
        }
    }

    /// Checks orientation, conformity and that the boundary list matches the
    /// edges owned by a single triangle.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::Geometry(format!("triangle {t} references a missing node")));
            }
            if self.area(t) <= 0.0 {
                return Err(Error::Geometry(format!("triangle {t} is not positively oriented")));
            }
            for k in 0..3 {
                *count.entry(key(tri[k], tri[(k + 1) % 3])).or_default() += 1;
            }
        }
        if let Some((e, c)) = count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::Geometry(format!("edge {e:?} shared by {c} triangles")));
        }
        let mut listed: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.boundary {
            *listed.entry(key(e.a, e.b)).or_default() += 1;
        }
        for (e, &c) in &count {
            let l = listed.get(e).copied().unwrap_or(0);
            if (c == 1) != (l == 1) || l > 1 {
                return Err(Error::Geometry(format!("boundary edge {e:?} listed {l} times, owned by {c}")));
            }
        }
        if listed.len() != self.boundary.len() || listed.keys().any(|e| !count.contains_key(e)) {
            return Err(Error::Geometry("boundary list contains non-edges".into()));
        }
        Ok(())
    }

    /// Uniform red refinement: every triangle is split into four.
    pub fn refine_red(&self) -> TriangularMesh {
        let mut nodes = self.nodes.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<[f64; 2]>| -> usize {
            *mid.entry(key(a, b)).or_insert_with(|| {
                let (p, q) = (nodes[a], nodes[b]);
                nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut nodes);
            let bc = midpoint(b, c, &mut nodes);
            let ca = midpoint(c, a, &mut nodes);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary = Vec::with_capacity(2 * self.boundary.len());
        for e in &self.boundary {
            let m = midpoint(e.a, e.b, &mut nodes);
            boundary.push(BoundaryEdge { a: e.a, b: m, marker: e.marker });
            boundary.push(BoundaryEdge { a: m, b: e.b, marker: e.marker });
        }
        TriangularMesh {
            nodes,
            triangles,
            boundary,
        }
    }

    pub fn scaled(&self, factor: f64) -> TriangularMesh {
        TriangularMesh {
            nodes: self.nodes.iter().map(|p| [p[0] * factor, p[1] * factor]).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
        }
    }

    /// Nodes lying on a boundary edge whose marker satisfies `pred`.
    pub fn boundary_nodes(&self, pred: impl Fn(i32) -> bool) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .boundary
            .iter()
            .filter(|e| pred(e.marker))
            .flat_map(|e| [e.a, e.b])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "nodes {}", self.nodes.len())?;
        for p in &self.nodes {
            writeln!(w, "{:.16e} {:.16e}", p[0], p[1])?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "boundary {}", self.boundary.len())?;
        for e in &self.boundary {
            writeln!(w, "{} {} {}", e.a, e.b, e.marker)?;
        }
        Ok(())
    }

    pub fn read_text(r: impl BufRead) -> Result<TriangularMesh> {
        let mut lines = r.lines().map_while(|l| l.ok()).filter(|l| !l.trim().is_empty());
        let mut header = |name: &str| -> Result<usize> {
            let line = lines.next().ok_or_else(|| Error::Parse(format!("missing '{name}' header")))?;
            let mut it = line.split_whitespace();
            if it.next() != Some(name) {
                return Err(Error::Parse(format!("expected '{name}', found '{line}'")));
            }
            it.next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad count in '{line}'")))
        };
        let n = header("nodes")?;
        let mut mesh = TriangularMesh {
            nodes: Vec::with_capacity(n),
            triangles: vec![],
            boundary: vec![],
        };
        let mut records = |count: usize, width: usize| -> Result<Vec<Vec<String>>> {
            (0..count)
                .map(|_| {
                    let line = lines.next().ok_or_else(|| Error::Parse("unexpected end of mesh file".into()))?;
                    let f: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
                    if f.len() != width {
                        return Err(Error::Parse(format!("expected {width} fields in '{line}'")));
                    }
                    Ok(f)
                })
                .collect()
        };
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Parse(format!("bad number '{s}'"))) };
        let idx = |s: &str| -> Result<usize> { s.parse().map_err(|_| Error::Parse(format!("bad index '{s}'"))) };
        for f in records(n, 2)? {
            mesh.nodes.push([num(&f[0])?, num(&f[1])?]);
        }
        let head = records(1, 2)?;
        if head[0][0] != "triangles" {
            return Err(Error::Parse("expected 'triangles' header".into()));
        }
        for f in records(idx(&head[0][1])?, 3)? {
            mesh.triangles.push([idx(&f[0])?, idx(&f[1])?, idx(&f[2])?]);
        }
        let head = records(1, 2)?;
        if head[0][0] != "boundary" {
            return Err(Error::Parse("expected 'boundary' header".into()));
        }
        for f in records(idx(&head[0][1])?, 3)? {
            let marker = f[2].parse().map_err(|_| Error::Parse(format!("bad marker '{}'", f[2])))?;
            mesh.boundary.push(BoundaryEdge { a: idx(&f[0])?, b: idx(&f[1])?, marker });
        }
        mesh.validate()?;
        Ok(mesh)
    }
}
