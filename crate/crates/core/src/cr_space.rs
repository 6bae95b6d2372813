//! Lowest-order Crouzeix-Raviart vector space on a [`Mesh`].
//!
//! One displacement vector lives at every edge midpoint. Dirichlet edges carry
//! no unknowns; on contact edges the normal component is pinned to zero and
//! only the tangential component is free.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryLabel, EdgeKind, Mesh, Point};
use crate::quadrature::gauss2_edge;
use crate::scalar::Scalar;

/// Status of one displacement component at an edge midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofSlot {
    Free(usize),
    /// Fixed to zero: Dirichlet edge or contact-normal component.
    Fixed,
}

impl DofSlot {
    pub fn index(self) -> Option<usize> {
        match self {
            DofSlot::Free(i) => Some(i),
            DofSlot::Fixed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeDofs {
    pub slots: [DofSlot; 2],
    /// Counted in the reported DOF total (every non-Dirichlet edge).
    pub reported: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactEdge<T> {
    pub edge: usize,
    pub tangential_dof: usize,
    pub tangent_axis: usize,
    pub length: T,
}

/// Shape functions `psi_i = 1 - 2 lambda_i` of one triangle, `psi_i` tied to local edge `i`.
#[derive(Debug, Clone, Copy)]
pub struct LocalBasis<T> {
    points: [Point<T>; 3],
    area: T,
    grads: [[T; 2]; 3],
}

impl<T: Scalar> LocalBasis<T> {
    pub fn new(points: [Point<T>; 3]) -> Result<Self> {
        let [p0, p1, p2] = points;
        let twice_area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let scale = (p1[0] - p0[0]).abs()
            + (p1[1] - p0[1]).abs()
            + (p2[0] - p0[0]).abs()
            + (p2[1] - p0[1]).abs();
        if twice_area.abs() <= T::epsilon() * scale * scale {
            return Err(Error::InvalidMesh("zero-area triangle".into()));
        }
        let mut grads = [[T::zero(); 2]; 3];
        for i in 0..3 {
            let a = points[(i + 1) % 3];
            let b = points[(i + 2) % 3];
            // grad lambda_i = (a_y - b_y, b_x - a_x) / 2A; psi_i = 1 - 2 lambda_i
            grads[i] = [
                -T::two() * (a[1] - b[1]) / twice_area,
                -T::two() * (b[0] - a[0]) / twice_area,
            ];
        }
        Ok(Self {
            points,
            area: twice_area * T::half(),
            grads,
        })
    }

    pub fn area(&self) -> T {
        self.area
    }

    pub fn gradients(&self) -> &[[T; 2]; 3] {
        &self.grads
    }

    pub fn barycentric(&self, p: Point<T>) -> [T; 3] {
        let mut l = [T::zero(); 3];
        for (i, li) in l.iter_mut().enumerate() {
            let a = self.points[(i + 1) % 3];
            let b = self.points[(i + 2) % 3];
            *li = ((a[0] - p[0]) * (b[1] - p[1]) - (b[0] - p[0]) * (a[1] - p[1])) * T::half()
                / self.area;
        }
        l
    }

    pub fn values(&self, p: Point<T>) -> [T; 3] {
        self.barycentric(p).map(|l| T::one() - T::two() * l)
    }
}

/// Degree-of-freedom layout of the constrained CR space.
#[derive(Debug, Clone)]
pub struct CrSpace<T> {
    mesh: Arc<Mesh<T>>,
    edge_dofs: Vec<EdgeDofs>,
    contact: Vec<ContactEdge<T>>,
    n_free: usize,
    n_reported: usize,
}

impl<T: Scalar> CrSpace<T> {
    pub fn new(mesh: Arc<Mesh<T>>) -> Result<Self> {
        let mut edge_dofs = Vec::with_capacity(mesh.n_edges());
        let mut contact = Vec::new();
        let mut n_free = 0;
        let mut n_reported = 0;
        for (e, edge) in mesh.edges().iter().enumerate() {
            let mut next = || {
                n_free += 1;
                DofSlot::Free(n_free - 1)
            };
            let dofs = match edge.kind {
                EdgeKind::Interior
                | EdgeKind::Boundary {
                    label: BoundaryLabel::Neumann,
                    ..
                } => EdgeDofs {
                    slots: [next(), next()],
                    reported: true,
                },
                EdgeKind::Boundary {
                    label: BoundaryLabel::Dirichlet,
                    ..
                } => EdgeDofs {
                    slots: [DofSlot::Fixed; 2],
                    reported: false,
                },
                EdgeKind::Boundary {
                    side,
                    label: BoundaryLabel::Contact,
                } => {
                    let t = side.tangent_axis();
                    let mut slots = [DofSlot::Fixed; 2];
                    let DofSlot::Free(idx) = next() else {
                        unreachable!()
                    };
                    slots[t] = DofSlot::Free(idx);
                    contact.push(ContactEdge {
                        edge: e,
                        tangential_dof: idx,
                        tangent_axis: t,
                        length: edge.length,
                    });
                    EdgeDofs {
                        slots,
                        reported: true,
                    }
                }
            };
            if dofs.reported {
                n_reported += 2;
            }
            edge_dofs.push(dofs);
        }
        // Every boundary edge was labeled by the mesh constructor; nothing can be unclassified here.
        Ok(Self {
            mesh,
            edge_dofs,
            contact,
            n_free,
            n_reported,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn edge_dofs(&self) -> &[EdgeDofs] {
        &self.edge_dofs
    }

    pub fn contact_edges(&self) -> &[ContactEdge<T>] {
        &self.contact
    }

    /// Unknowns of the linear system (contact normals eliminated).
    pub fn n_free(&self) -> usize {
        self.n_free
    }

    /// Two per non-Dirichlet edge, contact normals included.
    pub fn n_dofs_reported(&self) -> usize {
        self.n_reported
    }

    pub fn local_basis(&self, t: usize) -> Result<LocalBasis<T>> {
        LocalBasis::new(self.mesh.triangle_points(t))
    }

    /// Free-DOF slots of the six local unknowns of triangle `t`, ordered `(edge, component)`.
    pub fn local_dofs(&self, t: usize) -> [Option<usize>; 6] {
        let te = self.mesh.triangle_edges()[t];
        let mut out = [None; 6];
        for (i, &e) in te.iter().enumerate() {
            for c in 0..2 {
                out[2 * i + c] = self.edge_dofs[e].slots[c].index();
            }
        }
        out
    }

    pub fn zero_function(self: &Arc<Self>) -> CrFunction<T> {
        CrFunction::zeros(self.clone())
    }
}

/// Coefficient vector over the free DOFs of a [`CrSpace`].
#[derive(Debug, Clone)]
pub struct CrFunction<T> {
    space: Arc<CrSpace<T>>,
    coefficients: Vec<T>,
}

impl<T: Scalar> CrFunction<T> {
    pub fn zeros(space: Arc<CrSpace<T>>) -> Self {
        let n = space.n_free();
        Self {
            space,
            coefficients: vec![T::zero(); n],
        }
    }

    pub fn from_coefficients(space: Arc<CrSpace<T>>, coefficients: Vec<T>) -> Result<Self> {
        if coefficients.len() != space.n_free() {
            return Err(crate::error::invalid(
                "coefficients",
                format!(
                    "expected {} entries, got {}",
                    space.n_free(),
                    coefficients.len()
                ),
            ));
        }
        Ok(Self {
            space,
            coefficients,
        })
    }

    pub fn space(&self) -> &Arc<CrSpace<T>> {
        &self.space
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [T] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<T> {
        self.coefficients
    }

    /// Displacement at the midpoint of edge `e` (zero in fixed components).
    pub fn edge_value(&self, e: usize) -> [T; 2] {
        self.space.edge_dofs[e]
            .slots
            .map(|s| s.index().map_or(T::zero(), |i| self.coefficients[i]))
    }

    pub fn local_values(&self, t: usize) -> [[T; 2]; 3] {
        self.space.mesh.triangle_edges()[t].map(|e| self.edge_value(e))
    }

    /// Value of the piecewise-linear field restricted to triangle `t`, evaluated at `p`.
    pub fn eval_in(&self, t: usize, basis: &LocalBasis<T>, p: Point<T>) -> [T; 2] {
        let psi = basis.values(p);
        let vals = self.local_values(t);
        let mut out = [T::zero(); 2];
        for i in 0..3 {
            out[0] += psi[i] * vals[i][0];
            out[1] += psi[i] * vals[i][1];
        }
        out
    }

    /// Constant gradient on triangle `t`: `grad[i][j] = d u_i / d x_j`.
    pub fn gradient_in(&self, t: usize, basis: &LocalBasis<T>) -> [[T; 2]; 2] {
        let vals = self.local_values(t);
        let g = basis.gradients();
        let mut out = [[T::zero(); 2]; 2];
        for i in 0..3 {
            for c in 0..2 {
                for d in 0..2 {
                    out[c][d] += vals[i][c] * g[i][d];
                }
            }
        }
        out
    }

    pub fn axpy(&mut self, a: T, other: &CrFunction<T>) -> Result<()> {
        self.check_same_space(other)?;
        for (x, y) in self.coefficients.iter_mut().zip(&other.coefficients) {
            *x += a * *y;
        }
        Ok(())
    }

    pub fn sub(&self, other: &CrFunction<T>) -> Result<CrFunction<T>> {
        let mut out = self.clone();
        out.axpy(-T::one(), other)?;
        Ok(out)
    }

    pub fn scaled(&self, a: T) -> CrFunction<T> {
        CrFunction {
            space: self.space.clone(),
            coefficients: self.coefficients.iter().map(|x| *x * a).collect(),
        }
    }

    fn check_same_space(&self, other: &CrFunction<T>) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space)
            || Arc::ptr_eq(&self.space.mesh, &other.space.mesh)
        {
            Ok(())
        } else {
            Err(crate::error::invalid(
                "function",
                "operands live on different spaces",
            ))
        }
    }
}

/// Edge mean of a vector field by 2-point Gauss (exact for quadratics).
pub fn edge_mean<T: Scalar, F: Fn(Point<T>) -> [T; 2]>(a: Point<T>, b: Point<T>, v: &F) -> [T; 2] {
    let mut out = [T::zero(); 2];
    for (p, w) in gauss2_edge(a, b) {
        let val = v(p);
        out[0] += w * val[0];
        out[1] += w * val[1];
    }
    out
}

/// CR interpolant: each free DOF takes the edge mean of `v`; fixed components are dropped.
pub fn interpolate_cr<T: Scalar, F: Fn(Point<T>) -> [T; 2]>(
    v: F,
    space: &Arc<CrSpace<T>>,
) -> CrFunction<T> {
    let mesh = space.mesh();
    let mut coefficients = vec![T::zero(); space.n_free()];
    for (edge, dofs) in mesh.edges().iter().zip(space.edge_dofs()) {
        if dofs.slots.iter().all(|s| s.index().is_none()) {
            continue;
        }
        let [a, b] = edge.vertices.map(|i| mesh.vertices()[i]);
        let mean = edge_mean(a, b, &v);
        for c in 0..2 {
            if let Some(i) = dofs.slots[c].index() {
                coefficients[i] = mean[c];
            }
        }
    }
    CrFunction {
        space: space.clone(),
        coefficients,
    }
}

/// Transfers a coarse function onto the red-refined fine space.
///
/// Fine midpoints interior to a coarse triangle take the coarse value there;
/// fine edges lying on a coarse interior edge average the two coarse traces.
pub fn prolongate<T: Scalar>(
    coarse: &CrFunction<T>,
    fine_space: &Arc<CrSpace<T>>,
) -> Result<CrFunction<T>> {
    let cmesh = coarse.space().mesh();
    let fmesh = fine_space.mesh();
    check_nested(cmesh, fmesh)?;
    let parent = fmesh.parent_map().expect("checked by check_nested");
    let cbases: Vec<LocalBasis<T>> = (0..cmesh.n_triangles())
        .map(|t| LocalBasis::new(cmesh.triangle_points(t)))
        .collect::<Result<_>>()?;
    let mut coefficients = vec![T::zero(); fine_space.n_free()];
    for (edge, dofs) in fmesh.edges().iter().zip(fine_space.edge_dofs()) {
        if dofs.slots.iter().all(|s| s.index().is_none()) {
            continue;
        }
        let m = edge.midpoint;
        let p1 = parent[edge.first.0];
        let mut val = coarse.eval_in(p1, &cbases[p1], m);
        if let Some((t2, _)) = edge.second {
            let p2 = parent[t2];
            if p2 != p1 {
                let other = coarse.eval_in(p2, &cbases[p2], m);
                val = [
                    (val[0] + other[0]) * T::half(),
                    (val[1] + other[1]) * T::half(),
                ];
            }
        }
        for c in 0..2 {
            if let Some(i) = dofs.slots[c].index() {
                coefficients[i] = val[c];
            }
        }
    }
    Ok(CrFunction {
        space: fine_space.clone(),
        coefficients,
    })
}

/// Verifies that `fine` was produced from `coarse` by one uniform refinement.
pub fn check_nested<T: Scalar>(coarse: &Mesh<T>, fine: &Mesh<T>) -> Result<()> {
    let parent = fine
        .parent_map()
        .ok_or_else(|| Error::NotNested("fine mesh carries no parent map".into()))?;
    if fine.n_triangles() != 4 * coarse.n_triangles() || fine.level() != coarse.level() + 1 {
        return Err(Error::NotNested(format!(
            "fine mesh (level {}, {} triangles) is not one refinement of coarse mesh (level {}, {} triangles)",
            fine.level(),
            fine.n_triangles(),
            coarse.level(),
            coarse.n_triangles()
        )));
    }
    for (t, &p) in parent.iter().enumerate() {
        if p >= coarse.n_triangles() {
            return Err(Error::NotNested(format!("parent index {p} out of range")));
        }
        let pts = fine.triangle_points(t);
        let c = [
            (pts[0][0] + pts[1][0] + pts[2][0]) / T::lit(3.0),
            (pts[0][1] + pts[1][1] + pts[2][1]) / T::lit(3.0),
        ];
        let lam = LocalBasis::new(coarse.triangle_points(p))?.barycentric(c);
        if lam.iter().any(|&l| l < -T::lit(1e-9)) {
            return Err(Error::NotNested(format!(
                "fine triangle {t} lies outside its parent {p}"
            )));
        }
    }
    Ok(())
}
