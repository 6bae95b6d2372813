//! Structured triangulations of axis-aligned rectangles with labeled boundaries.
//!
//! A [`Mesh`] stores vertices, counter-clockwise triangles and a classified
//! edge list. Local edge `i` of a triangle is the edge opposite its local
//! vertex `i`; the Crouzeix-Raviart basis relies on that convention.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Point<T> = [T; 2];

/// Side of the rectangle a boundary segment lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `x = x_min`
    Left,
    /// `x = x_max`
    Right,
    /// `y = y_min`
    Bottom,
    /// `y = y_max`
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    /// Coordinate axis normal to this side (0 = x, 1 = y).
    pub fn normal_axis(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }

    /// Coordinate axis running along this side.
    pub fn tangent_axis(self) -> usize {
        1 - self.normal_axis()
    }

    /// Outward unit normal.
    pub fn outward_normal<T: Scalar>(self) -> Point<T> {
        let (o, z) = (T::one(), T::zero());
        match self {
            Side::Left => [-o, z],
            Side::Right => [o, z],
            Side::Bottom => [z, -o],
            Side::Top => [z, o],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryLabel {
    Dirichlet,
    Neumann,
    Contact,
}

impl BoundaryLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryLabel::Dirichlet => "dirichlet",
            BoundaryLabel::Neumann => "neumann",
            BoundaryLabel::Contact => "contact",
        }
    }
}

/// Closed interval `[lo, hi]` along one side, measured in the side's tangent coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySegment<T> {
    pub side: Side,
    pub lo: T,
    pub hi: T,
    pub label: BoundaryLabel,
}

impl<T: Scalar> BoundarySegment<T> {
    pub fn new(side: Side, lo: T, hi: T, label: BoundaryLabel) -> Self {
        Self {
            side,
            lo,
            hi,
            label,
        }
    }

    /// Whether `p`, a point on `side`, falls inside this segment.
    pub fn contains(&self, side: Side, p: Point<T>) -> bool {
        if side != self.side {
            return false;
        }
        let s = p[self.side.tangent_axis()];
        s >= self.lo && s <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
    pub boundary: Vec<BoundarySegment<T>>,
}

impl<T: Scalar> Domain<T> {
    pub fn new(
        x_min: T,
        x_max: T,
        y_min: T,
        y_max: T,
        boundary: Vec<BoundarySegment<T>>,
    ) -> Result<Self> {
        let d = Self {
            x_min,
            x_max,
            y_min,
            y_max,
            boundary,
        };
        d.validate()?;
        Ok(d)
    }

    /// Rectangle whose four sides each carry a single label.
    pub fn with_side_labels(
        x_min: T,
        x_max: T,
        y_min: T,
        y_max: T,
        labels: [(Side, BoundaryLabel); 4],
    ) -> Result<Self> {
        let mut segs = Vec::with_capacity(4);
        for (side, label) in labels {
            let (lo, hi) = match side.tangent_axis() {
                0 => (x_min, x_max),
                _ => (y_min, y_max),
            };
            segs.push(BoundarySegment::new(side, lo, hi, label));
        }
        Self::new(x_min, x_max, y_min, y_max, segs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max) || !(self.y_min < self.y_max) {
            return Err(Error::InvalidDomain(
                "rectangle bounds must satisfy min < max".into(),
            ));
        }
        for s in &self.boundary {
            if !(s.lo < s.hi) {
                return Err(Error::InvalidDomain(format!(
                    "segment on {:?} side has non-positive length",
                    s.side
                )));
            }
        }
        // Overlapping segments of different labels would leave points doubly labeled.
        for (i, a) in self.boundary.iter().enumerate() {
            for b in &self.boundary[i + 1..] {
                if a.side == b.side && a.label != b.label && a.lo < b.hi && b.lo < a.hi {
                    return Err(Error::InvalidDomain(format!(
                        "overlapping {} and {} segments on {:?} side",
                        a.label.as_str(),
                        b.label.as_str(),
                        a.side
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn has_dirichlet(&self) -> bool {
        self.boundary
            .iter()
            .any(|s| s.label == BoundaryLabel::Dirichlet)
    }

    pub fn diameter(&self) -> T {
        let dx = self.x_max - self.x_min;
        let dy = self.y_max - self.y_min;
        (dx * dx + dy * dy).sqrt()
    }

    /// The side a boundary point lies on, if any. Corners report the first match.
    fn side_of(&self, p: Point<T>) -> Option<Side> {
        let tol = T::lit(1e-12) * self.diameter();
        if (p[0] - self.x_min).abs() <= tol {
            Some(Side::Left)
        } else if (p[0] - self.x_max).abs() <= tol {
            Some(Side::Right)
        } else if (p[1] - self.y_min).abs() <= tol {
            Some(Side::Bottom)
        } else if (p[1] - self.y_max).abs() <= tol {
            Some(Side::Top)
        } else {
            None
        }
    }

    fn label_of(&self, side: Side, midpoint: Point<T>) -> Option<BoundaryLabel> {
        self.boundary
            .iter()
            .find(|s| s.contains(side, midpoint))
            .map(|s| s.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Interior,
    Boundary { side: Side, label: BoundaryLabel },
}

impl EdgeKind {
    pub fn label(self) -> Option<BoundaryLabel> {
        match self {
            EdgeKind::Interior => None,
            EdgeKind::Boundary { label, .. } => Some(label),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Edge<T> {
    pub vertices: [usize; 2],
    /// First adjacent triangle and the local edge index there.
    pub first: (usize, usize),
    /// Second adjacent triangle, present only for interior edges.
    pub second: Option<(usize, usize)>,
    pub midpoint: Point<T>,
    pub length: T,
    pub kind: EdgeKind,
}

impl<T> Edge<T> {
    pub fn is_interior(&self) -> bool {
        matches!(self.kind, EdgeKind::Interior)
    }
}

/// Edge index sets by boundary class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeSets {
    pub interior: Vec<usize>,
    pub dirichlet: Vec<usize>,
    pub neumann: Vec<usize>,
    pub contact: Vec<usize>,
    /// Interior and Dirichlet edges: the edges carrying the jump penalty.
    pub stabilized: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Mesh<T> {
    domain: Domain<T>,
    vertices: Vec<Point<T>>,
    triangles: Vec<[usize; 3]>,
    tri_edges: Vec<[usize; 3]>,
    edges: Vec<Edge<T>>,
    level: usize,
    parent: Option<Vec<usize>>,
}

impl<T: Scalar> Mesh<T> {
    /// `n x n` grid of squares, each split along its lower-left to upper-right diagonal.
    pub fn structured(domain: &Domain<T>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh(
                "subdivisions per side must be at least 1".into(),
            ));
        }
        domain.validate()?;
        let nn = T::from_count(n);
        let dx = (domain.x_max - domain.x_min) / nn;
        let dy = (domain.y_max - domain.y_min) / nn;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let x = if i == n {
                    domain.x_max
                } else {
                    domain.x_min + dx * T::from_count(i)
                };
                let y = if j == n {
                    domain.y_max
                } else {
                    domain.y_min + dy * T::from_count(j)
                };
                vertices.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Self::from_parts(domain.clone(), vertices, triangles, 0, None)
    }

    /// Builds edges and classification from raw vertex/triangle arrays.
    pub fn from_parts(
        domain: Domain<T>,
        vertices: Vec<Point<T>>,
        triangles: Vec<[usize; 3]>,
        level: usize,
        parent: Option<Vec<usize>>,
    ) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            if signed_area(&vertices, tri) <= T::zero() {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} is degenerate or clockwise"
                )));
            }
        }
        let mut lookup: HashMap<(usize, usize), usize> =
            HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<Edge<T>> = Vec::with_capacity(triangles.len() * 3 / 2 + 1);
        let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for local in 0..3 {
                let a = tri[(local + 1) % 3];
                let b = tri[(local + 2) % 3];
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.second.is_some() {
                            return Err(Error::InvalidMesh(format!(
                                "edge {a}-{b} shared by more than two triangles"
                            )));
                        }
                        edge.second = Some((t, local));
                        edge.kind = EdgeKind::Interior;
                        tri_edges[t][local] = e;
                    }
                    None => {
                        let (pa, pb) = (vertices[key.0], vertices[key.1]);
                        let midpoint = [(pa[0] + pb[0]) * T::half(), (pa[1] + pb[1]) * T::half()];
                        let length = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
                        lookup.insert(key, edges.len());
                        tri_edges[t][local] = edges.len();
                        edges.push(Edge {
                            vertices: [key.0, key.1],
                            first: (t, local),
                            second: None,
                            midpoint,
                            length,
                            // provisional; classified below
                            kind: EdgeKind::Interior,
                        });
                    }
                }
            }
        }
        for (e, edge) in edges.iter_mut().enumerate() {
            if edge.second.is_some() {
                continue;
            }
            let (pa, pb) = (vertices[edge.vertices[0]], vertices[edge.vertices[1]]);
            let side = match (
                domain.side_of(pa),
                domain.side_of(pb),
                domain.side_of(edge.midpoint),
            ) {
                (Some(_), Some(_), Some(s)) => s,
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary edge {e} does not lie on the rectangle boundary"
                    )))
                }
            };
            let label = domain.label_of(side, edge.midpoint).ok_or_else(|| {
                Error::InvalidDomain(format!(
                    "boundary edge {e} (midpoint {:?}) on {side:?} side carries no label",
                    edge.midpoint
                ))
            })?;
            edge.kind = EdgeKind::Boundary { side, label };
        }
        if let Some(p) = &parent {
            if p.len() != triangles.len() {
                return Err(Error::InvalidMesh(
                    "parent map length differs from triangle count".into(),
                ));
            }
        }
        Ok(Self {
            domain,
            vertices,
            triangles,
            tri_edges,
            edges,
            level,
            parent,
        })
    }

    /// Red refinement: every triangle splits into four by joining its edge midpoints.
    ///
    /// Child `4t + c` of triangle `t = (a, b, c)` is, in order, the corner child at
    /// `a`, at `b`, at `c`, then the central child.
    pub fn refine_uniform(&self) -> Result<Self> {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| e.midpoint));
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        let mut parent = Vec::with_capacity(self.triangles.len() * 4);
        for (t, (tri, te)) in self.triangles.iter().zip(&self.tri_edges).enumerate() {
            let [a, b, c] = *tri;
            let (m0, m1, m2) = (nv + te[0], nv + te[1], nv + te[2]);
            triangles.push([a, m2, m1]);
            triangles.push([m2, b, m0]);
            triangles.push([m1, m0, c]);
            triangles.push([m0, m1, m2]);
            parent.extend([t; 4]);
        }
        Self::from_parts(
            self.domain.clone(),
            vertices,
            triangles,
            self.level + 1,
            Some(parent),
        )
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Global edge indices of each triangle; local edge `i` is opposite local vertex `i`.
    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.tri_edges
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Fine-triangle to coarse-triangle map, present for refined meshes.
    pub fn parent_map(&self) -> Option<&[usize]> {
        self.parent.as_deref()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point<T>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> T {
        signed_area(&self.vertices, &self.triangles[t])
    }

    /// Longest edge length over the mesh.
    pub fn max_edge_length(&self) -> T {
        self.edges.iter().fold(T::zero(), |m, e| m.max(e.length))
    }

    pub fn edge_sets(&self) -> EdgeSets {
        let mut sets = EdgeSets::default();
        for (e, edge) in self.edges.iter().enumerate() {
            match edge.kind.label() {
                None => {
                    sets.interior.push(e);
                    sets.stabilized.push(e);
                }
                Some(BoundaryLabel::Dirichlet) => {
                    sets.dirichlet.push(e);
                    sets.stabilized.push(e);
                }
                Some(BoundaryLabel::Neumann) => sets.neumann.push(e),
                Some(BoundaryLabel::Contact) => sets.contact.push(e),
            }
        }
        sets
    }

    /// Plain-text dump: `v x y`, `t i j k`, `e i j label` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {}", v[0], v[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.edges {
            let label = e.kind.label().map_or("interior", BoundaryLabel::as_str);
            let _ = writeln!(out, "e {} {} {}", e.vertices[0], e.vertices[1], label);
        }
        out
    }
}

fn signed_area<T: Scalar>(vertices: &[Point<T>], tri: &[usize; 3]) -> T {
    let [a, b, c] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
    ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) * T::half()
}
