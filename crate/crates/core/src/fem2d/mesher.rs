//! Delaunay refinement (Ruppert) of a simple polygon with boundary markers,
//! driven by a size field.

use super::domain::{point_in_polygon, polygon_area, segment_distance, PolygonalDomain};
use super::mesh::{BoundaryEdge, TriangularMesh};
use crate::error::{Error, Result};
use robust::Coord;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

const NONE: usize = usize::MAX;
/// Circumradius to shortest edge bound; `√2` gives a 20.7° minimum angle.
const RATIO_BOUND: f64 = std::f64::consts::SQRT_2;
/// Input angles below this are protected by concentric-shell splitting.
const ACUTE: f64 = PI / 3.0;
const MAX_POINTS: usize = 4_000_000;

/// A closed polygon with one boundary marker per edge (edge `i` joins
/// vertex `i` to vertex `i + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Pslg {
    pub vertices: Vec<[f64; 2]>,
    pub markers: Vec<i32>,
}

impl Pslg {
    pub fn from_domain(domain: &PolygonalDomain) -> Self {
        Pslg {
            vertices: domain.vertices.clone(),
            markers: (0..domain.len() as i32).collect(),
        }
    }

    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| segment_distance(self.vertices[i], self.vertices[(i + 1) % n], p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Piecewise size field: a fine boundary layer, a coarser interior reached
/// with bounded gradation, and algebraic grading toward selected corners.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeField {
    pub boundary_size: f64,
    pub interior_size: f64,
    pub layer_width: f64,
    /// Growth of the size per unit distance beyond the layer.
    pub gradation: f64,
    pub corners: Vec<CornerGrading>,
}

/// Size `s·(r/radius)^(grading−1)` inside `radius`, never below `min_size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerGrading {
    pub point: [f64; 2],
    pub radius: f64,
    pub grading: f64,
    pub min_size: f64,
}

impl SizeField {
    pub fn uniform(size: f64) -> Self {
        SizeField {
            boundary_size: size,
            interior_size: size,
            layer_width: f64::INFINITY,
            gradation: 0.5,
            corners: vec![],
        }
    }

    /// Uniform size with grading toward every vertex of `domain`.
    pub fn graded(domain: &PolygonalDomain, size: f64, grading: f64) -> Self {
        let mut f = Self::uniform(size);
        if grading > 1.0 {
            f.corners = domain
                .vertices
                .iter()
                .map(|&p| CornerGrading {
                    point: p,
                    radius: 8.0 * size,
                    grading,
                    min_size: size / 8.0,
                })
                .collect();
        }
        f
    }

    pub fn size(&self, pslg: &Pslg, x: [f64; 2]) -> f64 {
        let mut s = self.boundary_size;
        if self.interior_size > self.boundary_size {
            let d = pslg.boundary_distance(x);
            if d > self.layer_width {
                s = (self.boundary_size + self.gradation * (d - self.layer_width)).min(self.interior_size);
            }
        }
        for c in &self.corners {
            let r = (x[0] - c.point[0]).hypot(x[1] - c.point[1]);
            if r < c.radius {
                let g = self.boundary_size * (r / c.radius).powf(c.grading - 1.0);
                s = s.min(g.max(c.min_size));
            }
        }
        s
    }
}

/// Meshes `domain` with maximal element diameter `target_size` and corner
/// grading exponent `grading` (1 disables grading).
pub fn mesh_polygon(domain: &PolygonalDomain, target_size: f64, grading: f64) -> Result<TriangularMesh> {
    if !(target_size > 0.0) || !(grading >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target size {target_size} and grading {grading} must be positive and >= 1"
        )));
    }
    let pslg = Pslg::from_domain(domain);
    let field = SizeField::graded(domain, target_size, grading);
    mesh_pslg(&pslg, &|x| field.size(&pslg, x))
}

pub fn mesh_with_field(domain: &PolygonalDomain, field: &SizeField) -> Result<TriangularMesh> {
    let pslg = Pslg::from_domain(domain);
    mesh_pslg(&pslg, &|x| field.size(&pslg, x))
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3],
    /// `n[k]` is across the edge opposite `v[k]`.
    n: [usize; 3],
    alive: bool,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: usize,
    b: usize,
    marker: i32,
    input_edge: usize,
    alive: bool,
}

/// Where a vertex lies on the input boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Origin {
    Super,
    InputVertex(usize),
    OnEdge(usize),
    Interior,
}

struct Cavity {
    tris: Vec<usize>,
    /// `(a, b, outside neighbour, cavity triangle)` with `a → b` counter-clockwise.
    boundary: Vec<(usize, usize, usize, usize)>,
    interior_edges: Vec<(usize, usize)>,
}

fn c(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn ekey(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

struct Refiner<'a> {
    pslg: &'a Pslg,
    size: &'a dyn Fn([f64; 2]) -> f64,
    pts: Vec<[f64; 2]>,
    origin: Vec<Origin>,
    tris: Vec<Tri>,
    free: Vec<usize>,
    mark: Vec<u32>,
    generation: u32,
    last: usize,
    segs: Vec<Segment>,
    seg_map: HashMap<(usize, usize), usize>,
    seg_queue: VecDeque<usize>,
    tri_queue: VecDeque<(usize, [usize; 3])>,
    input_angles: Vec<f64>,
}

impl<'a> Refiner<'a> {
    fn new(pslg: &'a Pslg, size: &'a dyn Fn([f64; 2]) -> f64) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &pslg.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let center = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
        let r = 100.0 * span;
        let pts = vec![
            [center[0] - 2.0 * r, center[1] - r],
            [center[0] + 2.0 * r, center[1] - r],
            [center[0], center[1] + 2.0 * r],
        ];
        let input_angles = super::domain::interior_angles(&pslg.vertices);
        Refiner {
            pslg,
            size,
            pts,
            origin: vec![Origin::Super; 3],
            tris: vec![Tri {
                v: [0, 1, 2],
                n: [NONE; 3],
                alive: true,
            }],
            free: vec![],
            mark: vec![0],
            generation: 0,
            last: 0,
            segs: vec![],
            seg_map: HashMap::new(),
            seg_queue: VecDeque::new(),
            tri_queue: VecDeque::new(),
            input_angles,
        }
    }

    fn orient(&self, a: usize, b: usize, p: [f64; 2]) -> f64 {
        robust::orient2d(c(self.pts[a]), c(self.pts[b]), c(p))
    }

    fn locate(&self, p: [f64; 2]) -> Option<usize> {
        let mut t = if self.tris[self.last].alive {
            self.last
        } else {
            self.tris.iter().position(|t| t.alive)?
        };
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            if steps > 4 * self.tris.len() + 16 {
                return None;
            }
            let tri = self.tris[t];
            for k in 0..3 {
                let a = tri.v[(k + 1) % 3];
                let b = tri.v[(k + 2) % 3];
                if self.orient(a, b, p) < 0.0 {
                    if tri.n[k] == NONE {
                        return None;
                    }
                    t = tri.n[k];
                    continue 'walk;
                }
            }
            return Some(t);
        }
    }

    fn in_circle(&self, t: usize, p: [f64; 2]) -> bool {
        let v = self.tris[t].v;
        robust::incircle(c(self.pts[v[0]]), c(self.pts[v[1]]), c(self.pts[v[2]]), c(p)) > 0.0
    }

    fn cavity(&mut self, p: [f64; 2]) -> Option<Cavity> {
        let t0 = self.locate(p)?;
        if self.tris[t0].v.iter().any(|&v| self.pts[v] == p) {
            return None;
        }
        self.generation = self.generation.wrapping_add(1);
        if self.mark.len() < self.tris.len() {
            self.mark.resize(self.tris.len(), 0);
        }
        let g = self.generation;
        self.mark[t0] = g;
        let mut tris = vec![t0];
        let mut i = 0;
        while i < tris.len() {
            let t = tris[i];
            i += 1;
            for k in 0..3 {
                let nb = self.tris[t].n[k];
                if nb != NONE && self.mark[nb] != g && self.in_circle(nb, p) {
                    self.mark[nb] = g;
                    tris.push(nb);
                }
            }
        }
        let mut boundary = Vec::new();
        let mut interior_edges = Vec::new();
        for &t in &tris {
            let tri = self.tris[t];
            for k in 0..3 {
                let (a, b) = (tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]);
                let nb = tri.n[k];
                if nb == NONE || self.mark[nb] != g {
                    if self.orient(a, b, p) <= 0.0 {
                        return None;
                    }
                    boundary.push((a, b, nb, t));
                } else if t < nb {
                    interior_edges.push((a, b));
                }
            }
        }
        Some(Cavity {
            tris,
            boundary,
            interior_edges,
        })
    }

    fn alloc(&mut self, tri: Tri) -> usize {
        if let Some(i) = self.free.pop() {
            self.tris[i] = tri;
            i
        } else {
            self.tris.push(tri);
            self.mark.push(0);
            self.tris.len() - 1
        }
    }

    /// Inserts `p` with the given cavity; returns the new vertex and triangles.
    fn commit(&mut self, p: [f64; 2], origin: Origin, cav: Cavity) -> (usize, Vec<usize>) {
        let vi = self.pts.len();
        self.pts.push(p);
        self.origin.push(origin);
        for &t in &cav.tris {
            self.tris[t].alive = false;
        }
        // reuse the cavity slots, highest first so that pops come out in order
        let mut slots = cav.tris.clone();
        slots.sort_unstable_by(|a, b| b.cmp(a));
        self.free.extend(slots);
        let mut created = Vec::with_capacity(cav.boundary.len());
        for &(a, b, nb, _) in &cav.boundary {
            let t = self.alloc(Tri {
                v: [a, b, vi],
                n: [NONE, NONE, nb],
                alive: true,
            });
            if nb != NONE {
                // match by edge: the old slot may already hold a new triangle
                let w = self.tris[nb].v;
                for k in 0..3 {
                    if ekey(w[(k + 1) % 3], w[(k + 2) % 3]) == ekey(a, b) {
                        self.tris[nb].n[k] = t;
                    }
                }
            }
            created.push(t);
        }
        for &t in &created {
            let [a, b, _] = self.tris[t].v;
            // opposite a: edge (b, p), shared with the fan triangle starting at b
            let n0 = *created.iter().find(|&&s| self.tris[s].v[0] == b).unwrap_or(&NONE);
            // opposite b: edge (p, a), shared with the fan triangle ending at a
            let n1 = *created.iter().find(|&&s| self.tris[s].v[1] == a).unwrap_or(&NONE);
            self.tris[t].n[0] = n0;
            self.tris[t].n[1] = n1;
        }
        self.last = created[0];
        for &t in &created {
            self.tri_queue.push_back((t, self.tris[t].v));
        }
        // segments deleted from the triangulation must be split
        for &(a, b) in &cav.interior_edges {
            if let Some(&s) = self.seg_map.get(&ekey(a, b)) {
                self.seg_queue.push_back(s);
            }
        }
        // segments on the cavity rim now face the new vertex
        for &(a, b, _, _) in &cav.boundary {
            if let Some(&s) = self.seg_map.get(&ekey(a, b)) {
                if self.encroaches(s, p) {
                    self.seg_queue.push_back(s);
                }
            }
        }
        (vi, created)
    }

    fn insert(&mut self, p: [f64; 2], origin: Origin) -> Option<(usize, Vec<usize>)> {
        let cav = self.cavity(p)?;
        Some(self.commit(p, origin, cav))
    }

    fn encroaches(&self, s: usize, p: [f64; 2]) -> bool {
        let (a, b) = (self.pts[self.segs[s].a], self.pts[self.segs[s].b]);
        (a[0] - p[0]) * (b[0] - p[0]) + (a[1] - p[1]) * (b[1] - p[1]) <= 0.0
    }

    fn add_segment(&mut self, a: usize, b: usize, marker: i32, input_edge: usize) -> usize {
        self.segs.push(Segment {
            a,
            b,
            marker,
            input_edge,
            alive: true,
        });
        let s = self.segs.len() - 1;
        self.seg_map.insert(ekey(a, b), s);
        s
    }

    fn split_point(&self, s: usize) -> [f64; 2] {
        let seg = self.segs[s];
        let (pa, pb) = (self.pts[seg.a], self.pts[seg.b]);
        let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
        let acute = |v: usize| match self.origin[v] {
            Origin::InputVertex(k) => self.input_angles[k] < ACUTE,
            _ => false,
        };
        let (from, to, flip) = match (acute(seg.a), acute(seg.b)) {
            (true, false) => (pa, pb, false),
            (false, true) => (pb, pa, false),
            _ => (pa, pb, true),
        };
        if flip {
            return [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        }
        // concentric shells: split at the power of two nearest to half the length
        let d = 2f64.powf((0.5 * len).log2().round());
        let t = (d / len).clamp(0.25, 0.75);
        [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])]
    }

    fn split_segment(&mut self, s: usize) -> Result<()> {
        let seg = self.segs[s];
        let p = self.split_point(s);
        let cav = self
            .cavity(p)
            .ok_or_else(|| Error::Geometry("segment split point could not be inserted".into()))?;
        self.segs[s].alive = false;
        self.seg_map.remove(&ekey(seg.a, seg.b));
        let (m, created) = self.commit(p, Origin::OnEdge(seg.input_edge), cav);
        let s1 = self.add_segment(seg.a, m, seg.marker, seg.input_edge);
        let s2 = self.add_segment(m, seg.b, seg.marker, seg.input_edge);
        // the halves may be encroached by their apexes in the new fan
        for &t in &created {
            let v = self.tris[t].v;
            for &sub in &[s1, s2] {
                let (a, b) = (self.segs[sub].a, self.segs[sub].b);
                if v.contains(&a) && v.contains(&b) {
                    let apex = v.iter().copied().find(|&x| x != a && x != b).unwrap();
                    if self.encroaches(sub, self.pts[apex]) {
                        self.seg_queue.push_back(sub);
                    }
                }
                // the neighbour across the subsegment has its own apex
                for k in 0..3 {
                    let (x, y) = (v[(k + 1) % 3], v[(k + 2) % 3]);
                    if ekey(x, y) == ekey(a, b) && self.tris[t].n[k] != NONE {
                        let nb = self.tris[self.tris[t].n[k]].v;
                        let apex = nb.iter().copied().find(|&x| x != a && x != b).unwrap();
                        if self.encroaches(sub, self.pts[apex]) {
                            self.seg_queue.push_back(sub);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn drain_segments(&mut self) -> Result<()> {
        while let Some(s) = self.seg_queue.pop_front() {
            if self.segs[s].alive {
                self.split_segment(s)?;
                if self.pts.len() > MAX_POINTS {
                    return Err(Error::Geometry("mesh size limit exceeded".into()));
                }
            }
        }
        Ok(())
    }

    fn is_interior(&self, t: usize) -> bool {
        let v = self.tris[t].v;
        if v.iter().any(|&i| i < 3) {
            return false;
        }
        let p = v.map(|i| self.pts[i]);
        let g = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        point_in_polygon(&self.pslg.vertices, g)
    }

    /// Edges of a skinny triangle that cannot be improved: both ends on
    /// different input edges meeting at an acute input vertex.
    fn seditious(&self, a: usize, b: usize) -> bool {
        let n = self.pslg.vertices.len();
        match (self.origin[a], self.origin[b]) {
            (Origin::OnEdge(e), Origin::OnEdge(f)) if e != f => {
                let shared = if (e + 1) % n == f {
                    f
                } else if (f + 1) % n == e {
                    e
                } else {
                    return false;
                };
                self.input_angles[shared] < ACUTE
            }
            _ => false,
        }
    }

    fn needs_split(&self, t: usize) -> bool {
        let v = self.tris[t].v;
        let p = v.map(|i| self.pts[i]);
        let len = |i: usize, j: usize| (p[i][0] - p[j][0]).hypot(p[i][1] - p[j][1]);
        let edges = [(len(1, 2), 1, 2), (len(2, 0), 2, 0), (len(0, 1), 0, 1)];
        let longest = edges.iter().map(|e| e.0).fold(0.0, f64::max);
        let g = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        if longest > (self.size)(g) {
            return true;
        }
        let &(shortest, i, j) = edges.iter().min_by(|x, y| x.0.total_cmp(&y.0)).unwrap();
        let area = 0.5 * robust::orient2d(c(p[0]), c(p[1]), c(p[2]));
        let circumradius = edges.iter().map(|e| e.0).product::<f64>() / (4.0 * area);
        circumradius > RATIO_BOUND * shortest && !self.seditious(v[i], v[j])
    }

    fn circumcenter(&self, t: usize) -> [f64; 2] {
        let [a, b, cc] = self.tris[t].v.map(|i| self.pts[i]);
        let (bx, by) = (b[0] - a[0], b[1] - a[1]);
        let (cx, cy) = (cc[0] - a[0], cc[1] - a[1]);
        let d = 2.0 * (bx * cy - by * cx);
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
    }

    fn run(mut self) -> Result<TriangularMesh> {
        let n = self.pslg.vertices.len();
        // input vertices, then size-driven subdivision of every input edge
        let mut ids = Vec::with_capacity(n);
        for (k, &p) in self.pslg.vertices.iter().enumerate() {
            let (v, _) = self
                .insert(p, Origin::InputVertex(k))
                .ok_or_else(|| Error::Geometry(format!("input vertex {k} could not be inserted")))?;
            ids.push(v);
        }
        for e in 0..n {
            let (a, b) = (ids[e], ids[(e + 1) % n]);
            let mut chain = vec![self.pts[a], self.pts[b]];
            let mut i = 0;
            while i + 1 < chain.len() {
                let (p, q) = (chain[i], chain[i + 1]);
                let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                let len = (q[0] - p[0]).hypot(q[1] - p[1]);
                let target = (self.size)(p).min((self.size)(q)).min((self.size)(m));
                if len > target {
                    chain.insert(i + 1, m);
                } else {
                    i += 1;
                }
            }
            let mut prev = a;
            for (j, &p) in chain.iter().enumerate().skip(1) {
                let v = if j + 1 == chain.len() {
                    b
                } else {
                    self.insert(p, Origin::OnEdge(e))
                        .ok_or_else(|| Error::Geometry("boundary point could not be inserted".into()))?
                        .0
                };
                self.add_segment(prev, v, self.pslg.markers[e], e);
                prev = v;
            }
        }
        // the queue filled up during construction; recheck every segment
        self.seg_queue.clear();
        self.tri_queue.clear();
        let mut apexes: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for t in self.tris.iter().filter(|t| t.alive) {
            for k in 0..3 {
                apexes
                    .entry(ekey(t.v[(k + 1) % 3], t.v[(k + 2) % 3]))
                    .or_default()
                    .push(t.v[k]);
            }
        }
        for s in 0..self.segs.len() {
            let e = ekey(self.segs[s].a, self.segs[s].b);
            let bad = match apexes.get(&e) {
                None => true,
                Some(list) => list.iter().any(|&x| self.encroaches(s, self.pts[x])),
            };
            if bad {
                self.seg_queue.push_back(s);
            }
        }
        for t in 0..self.tris.len() {
            if self.tris[t].alive {
                self.tri_queue.push_back((t, self.tris[t].v));
            }
        }
        loop {
            self.drain_segments()?;
            let Some((t, v)) = self.tri_queue.pop_front() else {
                break;
            };
            if !self.tris[t].alive || self.tris[t].v != v || !self.is_interior(t) || !self.needs_split(t) {
                continue;
            }
            let p = self.circumcenter(t);
            let Some(cav) = self.cavity(p) else { continue };
            let mut encroached: Vec<usize> = cav
                .interior_edges
                .iter()
                .filter_map(|&(a, b)| self.seg_map.get(&ekey(a, b)).copied())
                .collect();
            for &(a, b, _, _) in &cav.boundary {
                if let Some(&s) = self.seg_map.get(&ekey(a, b)) {
                    if self.encroaches(s, p) {
                        encroached.push(s);
                    }
                }
            }
            if !encroached.is_empty() {
                self.seg_queue.extend(encroached);
                self.tri_queue.push_back((t, v));
                continue;
            }
            if !point_in_polygon(&self.pslg.vertices, p) {
                continue;
            }
            self.commit(p, Origin::Interior, cav);
            if self.pts.len() > MAX_POINTS {
                return Err(Error::Geometry("mesh size limit exceeded".into()));
            }
        }
        self.finish()
    }

    fn finish(self) -> Result<TriangularMesh> {
        let mut map = vec![NONE; self.pts.len()];
        let mut nodes = Vec::new();
        let mut triangles = Vec::new();
        let interior: Vec<usize> = (0..self.tris.len())
            .filter(|&t| self.tris[t].alive && self.is_interior(t))
            .collect();
        let mut used = vec![false; self.pts.len()];
        for &t in &interior {
            for &v in &self.tris[t].v {
                used[v] = true;
            }
        }
        for (i, &u) in used.iter().enumerate() {
            if u {
                map[i] = nodes.len();
                nodes.push(self.pts[i]);
            }
        }
        for &t in &interior {
            triangles.push(self.tris[t].v.map(|v| map[v]));
        }
        let boundary = self
            .segs
            .iter()
            .filter(|s| s.alive)
            .map(|s| BoundaryEdge {
                a: map[s.a],
                b: map[s.b],
                marker: s.marker,
            })
            .collect();
        let mesh = TriangularMesh {
            nodes,
            triangles,
            boundary,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Meshes a marked polygon with element diameters bounded by `size(x)`.
pub fn mesh_pslg(pslg: &Pslg, size: &dyn Fn([f64; 2]) -> f64) -> Result<TriangularMesh> {
    if pslg.vertices.len() < 3 || pslg.markers.len() != pslg.vertices.len() {
        return Err(Error::Geometry("polygon needs >= 3 vertices and one marker per edge".into()));
    }
    if !(polygon_area(&pslg.vertices) > 0.0) {
        return Err(Error::Geometry("polygon must be counter-clockwise with positive area".into()));
    }
    let s0 = size(pslg.vertices[0]);
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::InvalidParameter(format!("size field returned {s0}")));
    }
    Refiner::new(pslg, size).run()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_meets_size_and_angle_targets() {
        let sq = PolygonalDomain::unit_square();
        let m = mesh_polygon(&sq, 0.05, 1.0).unwrap();
        let q = m.quality();
        assert!(q.max_diameter <= 0.05 + 1e-12, "{q:?}");
        assert!(q.min_angle_deg >= 20.0, "{q:?}");
        assert!((m.total_area() - 1.0).abs() < 1e-12);
        let markers: std::collections::BTreeSet<i32> = m.boundary.iter().map(|e| e.marker).collect();
        assert_eq!(markers.into_iter().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn l_shape_and_wedge() {
        let l = mesh_polygon(&PolygonalDomain::l_shape(), 0.04, 2.0).unwrap();
        assert!((l.total_area() - 0.75).abs() < 1e-12);
        assert!(l.quality().min_angle_deg >= 20.0);
        let w = PolygonalDomain::wedge(0.5).unwrap();
        let m = mesh_polygon(&w, 0.05, 1.0).unwrap();
        assert!((m.total_area() - w.area()).abs() < 1e-12);
        assert!(m.quality().max_diameter <= 0.05 + 1e-12);
    }

    #[test]
    fn boundary_nodes_lie_on_their_edges() {
        let l = PolygonalDomain::l_shape();
        let m = mesh_polygon(&l, 0.03, 1.0).unwrap();
        for e in &m.boundary {
            let (a, b) = l.edge(e.marker as usize);
            for v in [e.a, e.b] {
                assert!(segment_distance(a, b, m.nodes[v]) < 1e-14);
            }
        }
    }
}
