//! Mesh-dependent energy norm, inter-mesh errors, convergence orders and a
//! primal reference solver for the per-step variational inequality.

use crate::cr_space::{prolongate, CrFunction, CrSpace, LocalBasis};
use crate::error::{invalid, Error, Result};
use crate::material::{strain, MaterialModel};
use crate::mesh::{BoundaryLabel, EdgeKind, Point};
use crate::quadrature::{gauss2_edge, triangle7};
use crate::scalar::{norm_inf, Scalar};
use crate::sparse::CsrMatrix;

/// `|||v|||^2 = |v|_h^2 + |v|_*^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyNormBreakdown<T> {
    /// `sum_T int_T sigma(v) : eps(v)`
    pub elem_part: T,
    /// `sum_{e in E_h^0} 2 rho mu / h_e ||[v]||^2_{L2(e)}`
    pub jump_part: T,
    pub total: T,
}

/// Evaluates the energy norm elementwise, straight from the field.
pub fn energy_norm<T: Scalar>(
    v: &CrFunction<T>,
    material: &MaterialModel<T>,
    rho: T,
) -> Result<EnergyNormBreakdown<T>> {
    let space = v.space();
    let mesh = space.mesh();
    let bases: Vec<LocalBasis<T>> = (0..mesh.n_triangles())
        .map(|t| space.local_basis(t))
        .collect::<Result<_>>()?;

    let mut elem_part = T::zero();
    for (t, b) in bases.iter().enumerate() {
        let eps = strain(v.gradient_in(t, b));
        elem_part += b.area() * material.energy_density(&eps);
    }

    let mut jump_part = T::zero();
    for edge in mesh.edges() {
        let stabilized = matches!(
            edge.kind,
            EdgeKind::Interior
                | EdgeKind::Boundary {
                    label: BoundaryLabel::Dirichlet,
                    ..
                }
        );
        if !stabilized {
            continue;
        }
        let [a, b] = edge.vertices.map(|i| mesh.vertices()[i]);
        let (t1, _) = edge.first;
        let mut sq = T::zero();
        for (q, w) in gauss2_edge(a, b) {
            let mut jump = v.eval_in(t1, &bases[t1], q);
            if let Some((t2, _)) = edge.second {
                let other = v.eval_in(t2, &bases[t2], q);
                jump = [jump[0] - other[0], jump[1] - other[1]];
            }
            sq += w * edge.length * (jump[0] * jump[0] + jump[1] * jump[1]);
        }
        jump_part += T::two() * rho * material.mu / edge.length * sq;
    }
    Ok(EnergyNormBreakdown {
        elem_part,
        jump_part,
        total: (elem_part + jump_part).sqrt(),
    })
}

/// `|||P u_coarse - u_fine|||` on the fine mesh, `P` the nested prolongation.
pub fn inter_mesh_error<T: Scalar>(
    coarse: &CrFunction<T>,
    fine: &CrFunction<T>,
    material: &MaterialModel<T>,
    rho: T,
) -> Result<T> {
    let lifted = prolongate(coarse, fine.space())?;
    Ok(energy_norm(&lifted.sub(fine)?, material, rho)?.total)
}

/// Observed orders `log2(e_{i-1} / e_i)`.
pub fn eoc<T: Scalar>(errors: &[T]) -> Result<Vec<T>> {
    if errors.len() < 2 {
        return Err(invalid("errors", "need at least two entries"));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > T::zero())) {
        return Err(invalid("errors", format!("non-positive error {e}")));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Material-free broken strain norm `(sum_T int_T eps(v) : eps(v))^(1/2)`, no jump terms.
pub fn broken_strain_norm<T: Scalar>(v: &CrFunction<T>) -> Result<T> {
    let space = v.space();
    let mut s = T::zero();
    for t in 0..space.mesh().n_triangles() {
        let b = space.local_basis(t)?;
        let e = strain(v.gradient_in(t, &b));
        s += b.area() * e.contract(&e);
    }
    Ok(s.sqrt())
}

/// Broken `H^1` seminorm: `(sum_T int_T |grad v|^2)^(1/2)`.
pub fn broken_h1_seminorm<T: Scalar>(v: &CrFunction<T>) -> Result<T> {
    let space = v.space();
    let mut s = T::zero();
    for t in 0..space.mesh().n_triangles() {
        let b = space.local_basis(t)?;
        let g = v.gradient_in(t, &b);
        s += b.area() * (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2));
    }
    Ok(s.sqrt())
}

/// Broken `H^1` seminorm of `v - v_h` for a smooth `v` given through its gradient.
pub fn broken_h1_error<T: Scalar, G: Fn(Point<T>) -> [[T; 2]; 2]>(
    grad_v: G,
    vh: &CrFunction<T>,
) -> Result<T> {
    let space = vh.space();
    let mesh = space.mesh();
    let mut s = T::zero();
    for t in 0..mesh.n_triangles() {
        let b = space.local_basis(t)?;
        let gh = vh.gradient_in(t, &b);
        for (p, w) in triangle7(&mesh.triangle_points(t)) {
            let g = grad_v(p);
            let mut d = T::zero();
            for i in 0..2 {
                for j in 0..2 {
                    d += (g[i][j] - gh[i][j]).powi(2);
                }
            }
            s += b.area() * w * d;
        }
    }
    Ok(s.sqrt())
}

/// Friction data for the reference solver: `j(u) = sum_e w_e |u_{d_e} - prev_e|`.
#[derive(Debug, Clone)]
pub struct OracleProblem<'a, T> {
    pub stiffness: &'a CsrMatrix<T>,
    pub load: &'a [T],
    pub u_prev: &'a [T],
    pub contact_dofs: &'a [usize],
    pub weights: &'a [T],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Proximal-gradient residual target, relative to the load and friction weights.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1_000_000,
        }
    }
}

/// Minimizes `1/2 u^T K u - F^T u + sum_e w_e |u_{d_e} - prev_e|` by accelerated
/// proximal gradient with adaptive restart.
///
/// The step-`n` variational inequality is the optimality condition of this
/// problem (`k j((u - u_prev)/k) = j(u - u_prev)`), so the minimizer is the
/// reference answer for any solver of that step. The iteration works on the
/// primal variable only and shares no code with the multiplier-based solver.
pub fn brute_force_vi_oracle<T: Scalar>(
    problem: &OracleProblem<'_, T>,
    cfg: OracleConfig,
) -> Result<Vec<T>> {
    let k = problem.stiffness;
    let n = k.dim();
    if problem.load.len() != n
        || problem.u_prev.len() != n
        || problem.contact_dofs.len() != problem.weights.len()
    {
        return Err(invalid("oracle", "inconsistent problem dimensions"));
    }
    // Gershgorin bound on the largest eigenvalue
    let lip = (0..n)
        .map(|i| k.row(i).map(|(_, v)| v.abs()).sum::<T>())
        .fold(T::zero(), T::max);
    if lip == T::zero() {
        return Err(invalid("stiffness", "matrix is zero"));
    }
    let step = T::one() / lip;
    let scale = norm_inf(problem.load)
        .max(norm_inf(problem.weights))
        .max(T::min_positive_value());
    let tol = T::lit(cfg.tol) * scale;

    let prox = |x: &mut [T], tau: T| {
        for (&d, &w) in problem.contact_dofs.iter().zip(problem.weights) {
            let r = x[d] - problem.u_prev[d];
            let thr = tau * w;
            let shrunk = if r > thr {
                r - thr
            } else if r < -thr {
                r + thr
            } else {
                T::zero()
            };
            x[d] = problem.u_prev[d] + shrunk;
        }
    };
    let grad = |x: &[T]| -> Vec<T> {
        let kx = k.matvec(x);
        kx.iter().zip(problem.load).map(|(a, b)| *a - *b).collect()
    };

    let mut x = problem.u_prev.to_vec();
    prox(&mut x, step);
    let mut y = x.clone();
    let mut theta = T::one();
    let mut residual = T::infinity();
    for it in 0..cfg.max_iter {
        let gy = grad(&y);
        let mut x_new: Vec<T> = y.iter().zip(&gy).map(|(yi, gi)| *yi - step * *gi).collect();
        prox(&mut x_new, step);

        // stationarity of x: lip * ||x - prox(x - grad(x)/lip)||_inf
        if it % 16 == 0 {
            let gx = grad(&x_new);
            let mut p: Vec<T> = x_new
                .iter()
                .zip(&gx)
                .map(|(xi, gi)| *xi - step * *gi)
                .collect();
            prox(&mut p, step);
            residual = lip
                * x_new
                    .iter()
                    .zip(&p)
                    .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
            if residual <= tol {
                return Ok(x_new);
            }
        }

        // restart when momentum points uphill
        let uphill: T = gy
            .iter()
            .zip(x_new.iter().zip(&x))
            .map(|(g, (a, b))| *g * (*a - *b))
            .sum();
        let theta_new = (T::one() + (T::one() + T::lit(4.0) * theta * theta).sqrt()) * T::half();
        if uphill > T::zero() {
            theta = T::one();
            y = x_new.clone();
        } else {
            let beta = (theta - T::one()) / theta_new;
            y = x_new
                .iter()
                .zip(&x)
                .map(|(a, b)| *a + beta * (*a - *b))
                .collect();
            theta = theta_new;
        }
        x = x_new;
    }
    Err(Error::OracleNotConverged {
        iterations: cfg.max_iter,
        residual: residual.to_f64_lossy(),
    })
}

/// Reference solution of one time step on a mesh-backed space.
pub fn oracle_step<T: Scalar>(
    stiffness: &CsrMatrix<T>,
    space: &CrSpace<T>,
    friction_bound: T,
    load: &[T],
    u_prev: &CrFunction<T>,
) -> Result<Vec<T>> {
    let dofs: Vec<usize> = space
        .contact_edges()
        .iter()
        .map(|c| c.tangential_dof)
        .collect();
    let weights = crate::assembly::contact_weights(space, friction_bound);
    brute_force_vi_oracle(
        &OracleProblem {
            stiffness,
            load,
            u_prev: u_prev.coefficients(),
            contact_dofs: &dofs,
            weights: &weights,
        },
        OracleConfig::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_stiffness;
    use crate::cr_space::interpolate_cr;
    use crate::mesh::{Domain, Mesh, Side};
    use crate::solver::solve_spd;
    use std::sync::Arc;

    fn space(n: usize) -> Arc<CrSpace<f64>> {
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

    fn mat() -> MaterialModel<f64> {
        MaterialModel::new(200.0, 0.3, Default::default()).unwrap()
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let s = space(2);
        let b = energy_norm(&s.zero_function(), &mat(), 10.0).unwrap();
        assert_eq!((b.elem_part, b.jump_part, b.total), (0.0, 0.0, 0.0));
    }

    #[test]
    fn continuous_linear_field_has_no_interior_jumps() {
        let d = Domain::with_side_labels(
            0.0,
            1.0,
            0.0,
            1.0,
            Side::ALL.map(|s| (s, BoundaryLabel::Neumann)),
        )
        .unwrap();
        let s = Arc::new(CrSpace::new(Arc::new(Mesh::structured(&d, 4).unwrap())).unwrap());
        let v = interpolate_cr(|p| [0.3 * p[0] - p[1], 2.0 * p[0] + 0.1], &s);
        let b = energy_norm(&v, &mat(), 10.0).unwrap();
        assert!(b.jump_part < 1e-24);
        assert!(b.elem_part > 0.0);
    }

    #[test]
    fn eoc_examples() {
        let o = eoc(&[1.0f64, 0.5, 0.25]).unwrap();
        assert!(o.iter().all(|x| (x - 1.0).abs() < 1e-15));
        let o = eoc(&[2.512e-4f64, 1.431e-4]).unwrap();
        assert!((o[0] - 0.8118).abs() < 1e-3, "{}", o[0]);
        assert_eq!(eoc(&[3.0, 3.0]).unwrap(), vec![0.0]);
        assert!(eoc(&[1.0, 0.0]).is_err());
        assert!(eoc(&[1.0]).is_err());
    }

    #[test]
    fn oracle_matches_linear_solve_without_friction() {
        let s = space(2);
        let sys = assemble_stiffness(&s, &mat(), 10.0).unwrap();
        let load: Vec<f64> = (0..s.n_free())
            .map(|i| ((i * 7) % 5) as f64 * 1e-3 - 2e-3)
            .collect();
        let direct = solve_spd(sys.stiffness(), &load).unwrap();
        let oracle = oracle_step(sys.stiffness(), &s, 0.0, &load, &s.zero_function()).unwrap();
        for (a, b) in direct.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9);
        }
        let zero = oracle_step(
            sys.stiffness(),
            &s,
            0.0012,
            &vec![0.0; s.n_free()],
            &s.zero_function(),
        )
        .unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
    }
}
