use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// Angles closer than this to π are treated as straight (not corners).
const STRAIGHT_TOLERANCE: f64 = 1e-12;

/// A simple polygon with straight edges, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonalDomain {
    pub vertices: Vec<[f64; 2]>,
    /// Interior angle at each vertex, radians.
    pub corner_angles: Vec<f64>,
    /// Edge `i` joins vertex `i` to vertex `i + 1 (mod n)`.
    pub dirichlet_edges: Vec<usize>,
}

impl PolygonalDomain {
    /// Builds a domain from its vertices; clockwise input is reversed.
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        Self::with_dirichlet(vertices, vec![])
    }

    pub fn with_dirichlet(mut vertices: Vec<[f64; 2]>, dirichlet_edges: Vec<usize>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Geometry(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Geometry("non-finite vertex coordinate".into()));
        }
        let mut dirichlet_edges = dirichlet_edges;
        if polygon_area(&vertices) < 0.0 {
            vertices.reverse();
            // edge i (v_i -> v_{i+1}) becomes edge n-2-i after reversal
            for e in dirichlet_edges.iter_mut() {
                *e = (2 * n - 2 - *e) % n;
            }
        }
        if polygon_area(&vertices) <= 0.0 {
            return Err(Error::Geometry("polygon has zero area".into()));
        }
        if let Some(&e) = dirichlet_edges.iter().find(|&&e| e >= n) {
            return Err(Error::Geometry(format!("dirichlet edge {e} out of range")));
        }
        dirichlet_edges.sort_unstable();
        dirichlet_edges.dedup();
        check_simple(&vertices)?;
        let corner_angles = interior_angles(&vertices);
        if let Some(k) = corner_angles.iter().position(|a| (a - PI).abs() <= STRAIGHT_TOLERANCE) {
            return Err(Error::Geometry(format!(
                "vertex {k} has a straight angle and is not a corner"
            )));
        }
        Ok(PolygonalDomain {
            vertices,
            corner_angles,
            dirichlet_edges,
        })
    }

    pub fn unit_square() -> Self {
        Self::rectangle(1.0, 1.0)
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        Self::new(vec![[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]])
            .expect("rectangle is a valid polygon")
    }

    /// The L-shaped domain `[0,1]² \ (1/2,1]²`.
    pub fn l_shape() -> Self {
        Self::new(vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 0.5],
            [0.5, 0.5],
            [0.5, 1.0],
            [0.0, 1.0],
        ])
        .expect("L-shape is a valid polygon")
    }

    /// Isosceles triangle with apex angle `alpha` at the origin and unit legs.
    pub fn wedge(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(Error::InvalidParameter(format!("wedge angle {alpha} not in (0, π)")));
        }
        Self::new(vec![[0.0, 0.0], [1.0, 0.0], [alpha.cos(), alpha.sin()]])
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len()).map(|i| self.edge_length(i)).sum()
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        point_in_polygon(&self.vertices, p)
    }

    /// Euclidean distance from `p` to the boundary.
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                segment_distance(a, b, p)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Point at arc length `s` (mod perimeter) measured from vertex 0.
    pub fn point_at(&self, s: f64) -> [f64; 2] {
        let per = self.perimeter();
        let mut s = s.rem_euclid(per);
        for i in 0..self.len() {
            let l = self.edge_length(i);
            if s <= l || i + 1 == self.len() {
                let (a, b) = self.edge(i);
                let t = (s / l).min(1.0);
                return [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            }
            s -= l;
        }
        unreachable!()
    }

    /// Named presets: `square`, `rectangle` (2 × 1), `l-shape`, `wedge`
    /// (opening π/3).
    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "square" | "unit-square" => Ok(Self::unit_square()),
            "rectangle" => Ok(Self::rectangle(2.0, 1.0)),
            "l-shape" | "lshape" | "l" => Ok(Self::l_shape()),
            "wedge" | "sector" => Self::wedge(PI / 3.0),
            other => Err(Error::InvalidParameter(format!("unknown domain preset '{other}'"))),
        }
    }

    /// Text format: `vertices N`, then `N` lines `x y`; optionally
    /// `dirichlet K` followed by `K` edge indices. `#` starts a comment.
    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "vertices {}", self.len())?;
        for v in &self.vertices {
            writeln!(w, "{:.16e} {:.16e}", v[0], v[1])?;
        }
        if !self.dirichlet_edges.is_empty() {
            writeln!(w, "dirichlet {}", self.dirichlet_edges.len())?;
            for e in &self.dirichlet_edges {
                writeln!(w, "{e}")?;
            }
        }
        Ok(())
    }

    pub fn read_text(r: impl BufRead) -> Result<Self> {
        let mut tokens = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            let line = line.split('#').next().unwrap_or("");
            tokens.extend(line.split_whitespace().map(str::to_owned));
        }
        let mut it = tokens.into_iter();
        let count = |name: &str, it: &mut std::vec::IntoIter<String>| -> Result<usize> {
            match it.next() {
                Some(t) if t == name => {}
                other => return Err(Error::Parse(format!("expected '{name}', found {other:?}"))),
            }
            it.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad count after '{name}'")))
        };
        let n = count("vertices", &mut it)?;
        let number = |it: &mut std::vec::IntoIter<String>| -> Result<f64> {
            let t = it.next().ok_or_else(|| Error::Parse("unexpected end of domain file".into()))?;
            t.parse().map_err(|_| Error::Parse(format!("bad number '{t}'")))
        };
        let mut vertices = Vec::with_capacity(n);
        for _ in 0..n {
            vertices.push([number(&mut it)?, number(&mut it)?]);
        }
        let mut rest = it.peekable();
        let mut dirichlet = Vec::new();
        if rest.peek().is_some() {
            let mut rest: std::vec::IntoIter<String> = rest.collect::<Vec<_>>().into_iter();
            let k = count("dirichlet", &mut rest)?;
            for _ in 0..k {
                let t = rest.next().ok_or_else(|| Error::Parse("missing dirichlet edge".into()))?;
                dirichlet.push(t.parse().map_err(|_| Error::Parse(format!("bad edge index '{t}'")))?);
            }
            if let Some(t) = rest.next() {
                return Err(Error::Parse(format!("trailing token '{t}' in domain file")));
            }
        }
        Self::with_dirichlet(vertices, dirichlet)
    }

    /// Interior angles recomputed from the vertex coordinates.
    pub fn check_angles(&self) -> Result<()> {
        let fresh = interior_angles(&self.vertices);
        for (k, (a, b)) in fresh.iter().zip(&self.corner_angles).enumerate() {
            if (a - b).abs() > 1e-12 {
                return Err(Error::Geometry(format!(
                    "stored angle {b} at vertex {k} disagrees with geometry {a}"
                )));
            }
        }
        Ok(())
    }
}

/// Shoelace area, positive for counter-clockwise vertex order.
pub fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Interior angles of a counter-clockwise polygon.
pub fn interior_angles(v: &[[f64; 2]]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            let p = v[(k + n - 1) % n];
            let c = v[k];
            let q = v[(k + 1) % n];
            let a = [p[0] - c[0], p[1] - c[1]];
            let b = [q[0] - c[0], q[1] - c[1]];
            // angle swept counter-clockwise from b to a
            let cross = b[0] * a[1] - b[1] * a[0];
            let dot = a[0] * b[0] + a[1] * b[1];
            cross.atan2(dot).rem_euclid(2.0 * PI)
        })
        .collect()
}

pub fn point_in_polygon(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    robust::orient2d(
        robust::Coord { x: a[0], y: a[1] },
        robust::Coord { x: b[0], y: b[1] },
        robust::Coord { x: c[0], y: c[1] },
    )
}

fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    (o1 == 0.0 && on(a, b, c))
        || (o2 == 0.0 && on(a, b, d))
        || (o3 == 0.0 && on(c, d, a))
        || (o4 == 0.0 && on(c, d, b))
}

fn check_simple(v: &[[f64; 2]]) -> Result<()> {
    let n = v.len();
    for i in 0..n {
        if v[i] == v[(i + 1) % n] {
            return Err(Error::Geometry(format!("repeated vertex {i}")));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::Geometry(format!("edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_angles() {
        let sq = PolygonalDomain::unit_square();
        assert!(sq.corner_angles.iter().all(|a| (a - PI / 2.0).abs() < 1e-15));
        let l = PolygonalDomain::l_shape();
        let reflex = l.corner_angles.iter().filter(|a| (**a - 1.5 * PI).abs() < 1e-12).count();
        assert_eq!(reflex, 1);
        assert!((l.corner_angles.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
        assert!((l.area() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let d = PolygonalDomain::with_dirichlet(
            vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]],
            vec![0],
        )
        .unwrap();
        assert!(d.area() > 0.0);
        // original edge 0 was (0,0)->(0,1), the left side
        let (a, b) = d.edge(d.dirichlet_edges[0]);
        assert_eq!(a[0] + b[0], 0.0);
    }

    #[test]
    fn rejects_degenerate_polygons() {
        assert!(PolygonalDomain::new(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(PolygonalDomain::new(bowtie).is_err());
        let straight = vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(PolygonalDomain::new(straight).is_err());
    }
}
