//! Stabilized bilinear form, load functional and Tresca friction terms.
//!
//! The stiffness is
//!
//! ```text
//! a_h(v, w) = sum_T  int_T sigma(v) : eps(w)
//!           + sum_{e interior or Dirichlet} 2 rho mu / h_e int_e [v] . [w]
//! ```
//!
//! where `[v]` is the trace difference across an interior edge and the trace
//! itself on a Dirichlet edge. Both integrands are exact under the rules used
//! here (constant strain per element, two-point Gauss on linear edge traces).

use std::sync::Arc;

use crate::cr_space::{CrFunction, CrSpace, LocalBasis};
use crate::error::{invalid, Result};
use crate::material::{strain, MaterialModel, SymTensor2};
use crate::mesh::{BoundaryLabel, EdgeKind, Point, Side};
use crate::quadrature::gauss2_edge;
use crate::scalar::Scalar;
use crate::solver::FrictionState;
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Time modulation of a load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeFactor {
    #[default]
    Constant,
    /// Scales linearly with time: `s(t) = t`.
    Linear,
}

impl TimeFactor {
    pub fn at<T: Scalar>(self, t: T) -> T {
        match self {
            TimeFactor::Constant => T::one(),
            TimeFactor::Linear => t,
        }
    }
}

/// Componentwise affine vector field `v_c(x, y) = c0 + cx x + cy y`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AffineField<T> {
    pub coeffs: [[T; 3]; 2],
}

impl<T: Scalar> AffineField<T> {
    pub fn zero() -> Self {
        Self {
            coeffs: [[T::zero(); 3]; 2],
        }
    }

    pub fn constant(v: [T; 2]) -> Self {
        Self {
            coeffs: [[v[0], T::zero(), T::zero()], [v[1], T::zero(), T::zero()]],
        }
    }

    pub fn new(x: [T; 3], y: [T; 3]) -> Self {
        Self { coeffs: [x, y] }
    }

    pub fn eval(&self, p: Point<T>) -> [T; 2] {
        self.coeffs.map(|c| c[0] + c[1] * p[0] + c[2] * p[1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| *c == T::zero())
    }
}

/// Traction applied on the Neumann edges whose midpoints fall in `[lo, hi]` on `side`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentTraction<T> {
    pub side: Side,
    pub lo: T,
    pub hi: T,
    pub field: AffineField<T>,
    pub time: TimeFactor,
}

/// Problem data: body force, boundary tractions, friction bound and initial displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSpec<T> {
    pub body: AffineField<T>,
    pub body_time: TimeFactor,
    pub tractions: Vec<SegmentTraction<T>>,
    pub friction_bound: T,
    pub initial: AffineField<T>,
}

impl<T: Scalar> LoadSpec<T> {
    pub fn zero() -> Self {
        Self {
            body: AffineField::zero(),
            body_time: TimeFactor::Constant,
            tractions: Vec::new(),
            friction_bound: T::zero(),
            initial: AffineField::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.friction_bound >= T::zero()) {
            return Err(invalid("friction_bound", "must be non-negative"));
        }
        Ok(())
    }
}

/// Assembled stabilized stiffness over the free DOFs.
#[derive(Debug, Clone)]
pub struct DiscreteSystem<T> {
    space: Arc<CrSpace<T>>,
    material: MaterialModel<T>,
    rho: T,
    elastic: CsrMatrix<T>,
    penalty: CsrMatrix<T>,
    stiffness: CsrMatrix<T>,
}

impl<T: Scalar> DiscreteSystem<T> {
    pub fn space(&self) -> &Arc<CrSpace<T>> {
        &self.space
    }

    pub fn material(&self) -> &MaterialModel<T> {
        &self.material
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// Full stiffness `K` (element part plus jump penalty).
    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    pub fn elastic_part(&self) -> &CsrMatrix<T> {
        &self.elastic
    }

    pub fn penalty_part(&self) -> &CsrMatrix<T> {
        &self.penalty
    }

    /// Friction weights `g_a h_e`, one per contact edge.
    pub fn contact_weights(&self, friction_bound: T) -> Vec<T> {
        contact_weights(&self.space, friction_bound)
    }
}

pub fn contact_weights<T: Scalar>(space: &CrSpace<T>, friction_bound: T) -> Vec<T> {
    space
        .contact_edges()
        .iter()
        .map(|c| friction_bound * c.length)
        .collect()
}

/// Element stiffness of one triangle, local ordering `(edge i, component c) -> 2i + c`.
pub fn element_stiffness<T: Scalar>(
    basis: &LocalBasis<T>,
    material: &MaterialModel<T>,
) -> [[T; 6]; 6] {
    let g = basis.gradients();
    let eps: [SymTensor2<T>; 6] = std::array::from_fn(|a| {
        let (i, c) = (a / 2, a % 2);
        let mut grad = [[T::zero(); 2]; 2];
        grad[c] = g[i];
        strain(grad)
    });
    let mut k = [[T::zero(); 6]; 6];
    for a in 0..6 {
        let sig = material.stress(&eps[a]);
        for b in 0..6 {
            k[a][b] = basis.area() * sig.contract(&eps[b]);
        }
    }
    k
}

/// Scalar jump weights of the local basis functions at point `p` of edge `e`:
/// `(triangle, local index, weight)` where the jump is `sum weight * coefficient`.
pub(crate) fn edge_jump_terms<T: Scalar>(
    space: &CrSpace<T>,
    bases: &[LocalBasis<T>],
    e: usize,
    p: Point<T>,
) -> Vec<(usize, usize, T)> {
    let edge = &space.mesh().edges()[e];
    let mut out = Vec::with_capacity(6);
    let (t1, _) = edge.first;
    for (i, v) in bases[t1].values(p).into_iter().enumerate() {
        out.push((t1, i, v));
    }
    if let Some((t2, _)) = edge.second {
        for (i, v) in bases[t2].values(p).into_iter().enumerate() {
            out.push((t2, i, -v));
        }
    }
    out
}

pub(crate) fn all_bases<T: Scalar>(space: &CrSpace<T>) -> Result<Vec<LocalBasis<T>>> {
    (0..space.mesh().n_triangles())
        .map(|t| space.local_basis(t))
        .collect()
}

fn is_stabilized(kind: EdgeKind) -> bool {
    matches!(
        kind,
        EdgeKind::Interior
            | EdgeKind::Boundary {
                label: BoundaryLabel::Dirichlet,
                ..
            }
    )
}

pub fn assemble_stiffness<T: Scalar>(
    space: &Arc<CrSpace<T>>,
    material: &MaterialModel<T>,
    rho: T,
) -> Result<DiscreteSystem<T>> {
    if !(rho > T::zero()) {
        return Err(invalid(
            "rho",
            format!("stabilization parameter must be positive, got {rho}"),
        ));
    }
    let mesh = space.mesh();
    let n = space.n_free();
    let bases = all_bases(space)?;

    let mut elastic = TripletBuilder::with_capacity(n, 36 * mesh.n_triangles());
    for (t, basis) in bases.iter().enumerate() {
        let dofs = space.local_dofs(t);
        let ke = element_stiffness(basis, material);
        for a in 0..6 {
            let Some(ga) = dofs[a] else { continue };
            for b in 0..6 {
                if let Some(gb) = dofs[b] {
                    elastic.push(ga, gb, ke[a][b]);
                }
            }
        }
    }

    let coef = T::two() * rho * material.mu;
    let mut penalty = TripletBuilder::with_capacity(n, 72 * mesh.n_edges());
    for (e, edge) in mesh.edges().iter().enumerate() {
        if !is_stabilized(edge.kind) {
            continue;
        }
        let [a, b] = edge.vertices.map(|i| mesh.vertices()[i]);
        for (q, w) in gauss2_edge(a, b) {
            let terms = edge_jump_terms(space, &bases, e, q);
            for &(ta, ia, va) in &terms {
                let da = space.local_dofs(ta);
                for &(tb, ib, vb) in &terms {
                    let db = space.local_dofs(tb);
                    for c in 0..2 {
                        if let (Some(ra), Some(rb)) = (da[2 * ia + c], db[2 * ib + c]) {
                            // (1/h_e) int_e ... = sum_q w_q (...) since the weights sum to 1
                            penalty.push(ra, rb, coef * w * va * vb);
                        }
                    }
                }
            }
        }
    }

    let elastic = elastic.build();
    let penalty = penalty.build();
    let mut total = TripletBuilder::with_capacity(n, elastic.nnz() + penalty.nnz());
    for m in [&elastic, &penalty] {
        for i in 0..n {
            for (j, v) in m.row(i) {
                total.push(i, j, v);
            }
        }
    }
    Ok(DiscreteSystem {
        space: space.clone(),
        material: *material,
        rho,
        elastic,
        penalty,
        stiffness: total.build(),
    })
}

/// Load vector `(l(t), v)` over the free DOFs.
pub fn assemble_load<T: Scalar>(space: &CrSpace<T>, loads: &LoadSpec<T>, t: T) -> Result<Vec<T>> {
    let mesh = space.mesh();
    let mut f = vec![T::zero(); space.n_free()];
    let body_scale = loads.body_time.at(t);
    if !loads.body.is_zero() && body_scale != T::zero() {
        let third = T::one() / T::lit(3.0);
        for tri in 0..mesh.n_triangles() {
            let area = mesh.area(tri);
            let dofs = space.local_dofs(tri);
            // Edge-midpoint rule: psi_i is 1 at its own midpoint and 0 at the others.
            for (i, &e) in mesh.triangle_edges()[tri].iter().enumerate() {
                let val = loads.body.eval(mesh.edges()[e].midpoint);
                for c in 0..2 {
                    if let Some(r) = dofs[2 * i + c] {
                        f[r] += area * third * val[c] * body_scale;
                    }
                }
            }
        }
    }
    for edge in mesh.edges() {
        let EdgeKind::Boundary {
            side,
            label: BoundaryLabel::Neumann,
        } = edge.kind
        else {
            continue;
        };
        let (tri, _) = edge.first;
        let basis = space.local_basis(tri)?;
        let dofs = space.local_dofs(tri);
        let [a, b] = edge.vertices.map(|i| mesh.vertices()[i]);
        for tr in &loads.tractions {
            if tr.side != side {
                continue;
            }
            let s = edge.midpoint[side.tangent_axis()];
            if s < tr.lo || s > tr.hi {
                continue;
            }
            let scale = tr.time.at(t);
            if scale == T::zero() {
                continue;
            }
            for (q, w) in gauss2_edge(a, b) {
                let g = tr.field.eval(q);
                let psi = basis.values(q);
                for i in 0..3 {
                    for c in 0..2 {
                        if let Some(r) = dofs[2 * i + c] {
                            f[r] += edge.length * w * g[c] * psi[i] * scale;
                        }
                    }
                }
            }
        }
    }
    Ok(f)
}

/// `j(v) = sum_e g_a h_e |v_tau(m_e)|` over contact edges.
pub fn friction_value<T: Scalar>(space: &CrSpace<T>, friction_bound: T, v: &CrFunction<T>) -> T {
    space
        .contact_edges()
        .iter()
        .map(|c| friction_bound * c.length * v.coefficients()[c.tangential_dof].abs())
        .sum()
}

/// Coupling vector with `g_a h_e lambda_e` at each contact tangential DOF.
pub fn friction_rhs<T: Scalar>(
    space: &CrSpace<T>,
    friction_bound: T,
    state: &FrictionState<T>,
) -> Result<Vec<T>> {
    let contact = space.contact_edges();
    if state.lambda.len() != contact.len() {
        return Err(invalid(
            "lambda",
            format!(
                "expected {} multipliers, got {}",
                contact.len(),
                state.lambda.len()
            ),
        ));
    }
    let mut out = vec![T::zero(); space.n_free()];
    for (c, &l) in contact.iter().zip(&state.lambda) {
        if !(l.abs() <= T::one()) {
            return Err(invalid("lambda", format!("multiplier {l} outside [-1, 1]")));
        }
        out[c.tangential_dof] = friction_bound * c.length * l;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cr_space::interpolate_cr;
    use crate::mesh::{Domain, Mesh};
    use crate::scalar::norm_inf;

    fn example_space(n: usize) -> Arc<CrSpace<f64>> {
        let d = Domain::with_side_labels(
            0.0,
            4.0,
            0.0,
            4.0,
            [
                (Side::Right, BoundaryLabel::Dirichlet),
                (Side::Left, BoundaryLabel::Neumann),
                (Side::Top, BoundaryLabel::Neumann),
                (Side::Bottom, BoundaryLabel::Contact),
            ],
        )
        .unwrap();
        Arc::new(CrSpace::new(Arc::new(Mesh::structured(&d, n).unwrap())).unwrap())
    }

    fn material() -> MaterialModel<f64> {
        MaterialModel::new(200.0, 0.3, Default::default()).unwrap()
    }

    #[test]
    fn element_matrix_matches_dense_b_matrix_oracle() {
        // B^T D B * area with engineering-strain B and plane D, built independently
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let basis = LocalBasis::new(pts).unwrap();
        let m = MaterialModel::from_lame(1.0, 1.0).unwrap();
        let k = element_stiffness(&basis, &m);
        // psi_i = 1 - 2 lambda_i; lambda_0 = 1 - x - y, lambda_1 = x, lambda_2 = y
        let grads = [[2.0, 2.0], [-2.0, 0.0], [0.0, -2.0]];
        let mut bmat = [[0.0f64; 6]; 3];
        for i in 0..3 {
            bmat[0][2 * i] = grads[i][0];
            bmat[1][2 * i + 1] = grads[i][1];
            bmat[2][2 * i] = grads[i][1];
            bmat[2][2 * i + 1] = grads[i][0];
        }
        let d = [[3.0f64, 1.0, 0.0], [1.0, 3.0, 0.0], [0.0, 0.0, 1.0]];
        for a in 0..6 {
            for b in 0..6 {
                let mut s = 0.0f64;
                for p in 0..3 {
                    for q in 0..3 {
                        s += bmat[p][a] * d[p][q] * bmat[q][b];
                    }
                }
                assert!((k[a][b] - 0.5 * s).abs() < 1e-13, "entry {a},{b}");
            }
        }
    }

    #[test]
    fn stiffness_is_symmetric_and_penalty_linear_in_rho() {
        let space = example_space(4);
        let s1 = assemble_stiffness(&space, &material(), 10.0).unwrap();
        let s2 = assemble_stiffness(&space, &material(), 20.0).unwrap();
        let k = s1.stiffness();
        assert!(k.asymmetry() <= 1e-12 * k.max_abs());
        assert_eq!(s1.elastic_part(), s2.elastic_part());
        let n = space.n_free();
        for i in 0..n {
            for (j, v) in s1.penalty_part().row(i) {
                assert_eq!(2.0 * v, s2.penalty_part().get(i, j));
            }
        }
        assert!(assemble_stiffness(&space, &material(), 0.0).is_err());
    }

    #[test]
    fn translations_only_excite_dirichlet_penalty() {
        let space = example_space(4);
        let sys = assemble_stiffness(&space, &material(), 10.0).unwrap();
        let v = interpolate_cr(|_| [1.0, 0.0], &space);
        let ke = sys.elastic_part().matvec(v.coefficients());
        let kv = sys.stiffness().matvec(v.coefficients());
        let mesh = space.mesh();
        // triangles whose traces see the dropped Dirichlet values, plus their neighbours
        let touches: Vec<bool> = (0..mesh.n_triangles())
            .map(|t| {
                mesh.triangle_edges()[t]
                    .iter()
                    .any(|&e| mesh.edges()[e].kind.label() == Some(BoundaryLabel::Dirichlet))
            })
            .collect();
        let mut near_dirichlet = vec![false; space.n_free()];
        for t in 0..mesh.n_triangles() {
            let near = touches[t]
                || mesh.triangle_edges()[t].iter().any(|&e| {
                    let edge = &mesh.edges()[e];
                    touches[edge.first.0] || edge.second.is_some_and(|(o, _)| touches[o])
                });
            if near {
                for r in space.local_dofs(t).into_iter().flatten() {
                    near_dirichlet[r] = true;
                }
            }
        }
        for (r, (x, y)) in kv.iter().zip(&ke).enumerate() {
            assert!(
                (x.abs() < 1e-12 && y.abs() < 1e-12) || near_dirichlet[r],
                "row {r}"
            );
        }
        assert!(norm_inf(&kv) > 1e-6);
    }

    #[test]
    fn load_vector_properties() {
        let space = example_space(2);
        let zero = assemble_load(&space, &LoadSpec::zero(), 0.7).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));

        let mut loads = LoadSpec::zero();
        loads.tractions.push(SegmentTraction {
            side: Side::Left,
            lo: 0.0,
            hi: 4.0,
            field: AffineField::new([0.1, 0.0, -0.02], [-0.01, 0.0, 0.0]),
            time: TimeFactor::Linear,
        });
        let f1 = assemble_load(&space, &loads, 0.5).unwrap();
        let f2 = assemble_load(&space, &loads, 1.0).unwrap();
        for (a, b) in f1.iter().zip(&f2) {
            assert!((2.0 * a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_traction_on_one_edge_sums_to_its_length() {
        let space = example_space(2);
        let mut loads = LoadSpec::zero();
        loads.tractions.push(SegmentTraction {
            side: Side::Left,
            lo: 0.0,
            hi: 1.0,
            field: AffineField::constant([1.0, 1.0]),
            time: TimeFactor::Constant,
        });
        let f = assemble_load(&space, &loads, 0.0).unwrap();
        let mut sums = [0.0; 2];
        for dofs in space.edge_dofs() {
            for c in 0..2 {
                if let Some(i) = dofs.slots[c].index() {
                    sums[c] += f[i];
                }
            }
        }
        assert!((sums[0] - 2.0).abs() < 1e-14 && (sums[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_body_force_total() {
        let space = example_space(2);
        let mut loads = LoadSpec::zero();
        loads.body = AffineField::constant([0.0, -1.0]);
        let f = assemble_load(&space, &loads, 0.0).unwrap();
        // the CR basis sums to one, so the total equals area for unconstrained edges;
        // here only check the sign and a non-zero result
        assert!(f.iter().all(|&x| x <= 0.0));
        assert!(f.iter().sum::<f64>() < 0.0);
    }

    #[test]
    fn friction_terms() {
        let space = example_space(2);
        let c0 = space.contact_edges()[0];
        assert_eq!(c0.length, 2.0);
        let mut v = space.zero_function();
        assert_eq!(friction_value(&space, 0.0012, &v), 0.0);
        v.coefficients_mut()[c0.tangential_dof] = 1.0;
        assert!((friction_value(&space, 0.0012, &v) - 0.0024).abs() < 1e-16);
        for a in [-3.0, 0.5, 2.0] {
            let jv = friction_value(&space, 0.0012, &v.scaled(a));
            assert!((jv - a.abs() * 0.0024).abs() < 1e-15);
        }

        let m = space.contact_edges().len();
        let zero = FrictionState::zeros(m);
        assert!(friction_rhs(&space, 0.0012, &zero)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
        let mut st = FrictionState::zeros(m);
        st.lambda[0] = 1.0;
        let r = friction_rhs(&space, 0.0012, &st).unwrap();
        assert!((r[c0.tangential_dof] - 0.0024).abs() < 1e-16);
        st.lambda[0] = -1.0;
        let r2 = friction_rhs(&space, 0.0012, &st).unwrap();
        assert_eq!(r2[c0.tangential_dof], -r[c0.tangential_dof]);
        st.lambda[0] = 1.5;
        assert!(friction_rhs(&space, 0.0012, &st).is_err());
    }
}
