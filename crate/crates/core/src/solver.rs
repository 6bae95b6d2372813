//! Backward-Euler time marching with an Uzawa iteration for the friction multiplier.
//!
//! At every time node the scheme solves
//!
//! ```text
//! K u = F(t_n) - G lambda,    lambda_e = P(lambda_e + s (u - u_prev)_tau,e / k)
//! ```
//!
//! with `G = diag(g_a h_e)` acting on the contact tangential unknowns and
//! `P` the clamp onto `[-1, 1]`. `K` does not change in time, so it is
//! factored once and the contact columns `K^{-1} B^T` are precomputed; each
//! Uzawa sweep then only touches the small contact block.

use std::sync::Arc;

use crate::assembly::{assemble_load, contact_weights, DiscreteSystem, LoadSpec};
use crate::cr_space::{interpolate_cr, CrFunction, CrSpace};
use crate::error::{invalid, Error, Result};
use crate::scalar::{norm2, norm_inf, Scalar};
use crate::sparse::{pcg, CgConfig, CsrMatrix, SparseCholesky};

/// Uniform partition of `[0, T]` into `N` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    pub final_time: T,
    pub steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(final_time: T, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(invalid("steps", "need at least one time step"));
        }
        if !(final_time > T::zero()) {
            return Err(invalid("final_time", "must be positive"));
        }
        Ok(Self { final_time, steps })
    }

    pub fn step_size(&self) -> T {
        self.final_time / T::from_count(self.steps)
    }

    /// `t_n = n T / N`; `t_N` is exactly `T`.
    pub fn node(&self, n: usize) -> T {
        if n == self.steps {
            self.final_time
        } else {
            self.final_time * T::from_count(n) / T::from_count(self.steps)
        }
    }
}

/// One multiplier per contact edge, each in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrictionState<T> {
    pub lambda: Vec<T>,
}

impl<T: Scalar> FrictionState<T> {
    pub fn zeros(n_contact: usize) -> Self {
        Self {
            lambda: vec![T::zero(); n_contact],
        }
    }

    pub fn max_abs(&self) -> T {
        norm_inf(&self.lambda)
    }
}

/// `P(chi) = max(-1, min(1, chi))`.
#[inline]
pub fn projection_p<T: Scalar>(chi: T) -> T {
    chi.min(T::one()).max(-T::one())
}

/// How the multiplier step `s` in `lambda + s (du)_tau` is scaled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiplierStep {
    /// `s = rho_tilde k / lambda_max(C G)`: `rho_tilde` is relative to the largest stable
    /// step, and the sweep contracts for `0 < rho_tilde < 2`.
    #[default]
    Spectral,
    /// `s = rho_tilde g_a`, independent of the mesh and time step.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UzawaConfig<T> {
    pub rho_tilde: T,
    /// Stop once the max-norm of successive displacement iterates drops below this.
    pub eps: T,
    pub max_iter: usize,
    pub step: MultiplierStep,
    /// After the increment test passes, solve the contact block exactly on the
    /// slip set it identified and accept that state if it satisfies the
    /// stick/slip conditions; otherwise keep iterating.
    pub finalize: bool,
}

impl<T: Scalar> Default for UzawaConfig<T> {
    fn default() -> Self {
        Self {
            rho_tilde: T::one(),
            eps: T::lit(1e-8),
            max_iter: 10_000,
            step: MultiplierStep::Spectral,
            finalize: true,
        }
    }
}

impl<T: Scalar> UzawaConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_tilde > T::zero()) {
            return Err(invalid("rho_tilde", "must be positive"));
        }
        if !(self.eps > T::zero()) {
            return Err(invalid("eps", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum LinearSolverKind {
    /// Sparse Cholesky computed once and reused for every right-hand side.
    #[default]
    Cholesky,
    ConjugateGradient(CgConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveInfo {
    /// `||K x - b||_2 / ||b||_2` after refinement.
    pub relative_residual: f64,
    pub refinements: usize,
    pub cg_iterations: usize,
}

/// SPD solver bound to one matrix.
#[derive(Debug, Clone)]
pub struct SpdSolver<T> {
    matrix: CsrMatrix<T>,
    kind: LinearSolverKind,
    factor: Option<SparseCholesky<T>>,
}

impl<T: Scalar> SpdSolver<T> {
    pub fn new(matrix: CsrMatrix<T>, kind: LinearSolverKind) -> Result<Self> {
        let factor = match kind {
            LinearSolverKind::Cholesky => Some(SparseCholesky::factor(&matrix)?),
            LinearSolverKind::ConjugateGradient(_) => None,
        };
        Ok(Self {
            matrix,
            kind,
            factor,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    fn target_residual() -> T {
        T::lit(1e-12).max(T::epsilon() * T::lit(100.0))
    }

    pub fn solve(&self, rhs: &[T]) -> Result<(Vec<T>, LinearSolveInfo)> {
        let bnorm = norm2(rhs);
        if bnorm == T::zero() {
            let info = LinearSolveInfo {
                relative_residual: 0.0,
                refinements: 0,
                cg_iterations: 0,
            };
            return Ok((vec![T::zero(); rhs.len()], info));
        }
        let residual = |x: &[T]| -> Vec<T> {
            let kx = self.matrix.matvec(x);
            rhs.iter().zip(&kx).map(|(b, k)| *b - *k).collect()
        };
        match (&self.factor, self.kind) {
            (Some(f), _) => {
                let mut x = f.solve(rhs);
                let mut r = residual(&x);
                let mut refinements = 0;
                while norm2(&r) > Self::target_residual() * bnorm && refinements < 3 {
                    let dx = f.solve(&r);
                    x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += *di);
                    r = residual(&x);
                    refinements += 1;
                }
                let info = LinearSolveInfo {
                    relative_residual: (norm2(&r) / bnorm).to_f64_lossy(),
                    refinements,
                    cg_iterations: 0,
                };
                Ok((x, info))
            }
            (None, LinearSolverKind::ConjugateGradient(cfg)) => {
                let (x, iters) = pcg(&self.matrix, rhs, None, cfg)?;
                let r = residual(&x);
                let info = LinearSolveInfo {
                    relative_residual: (norm2(&r) / bnorm).to_f64_lossy(),
                    refinements: 0,
                    cg_iterations: iters,
                };
                Ok((x, info))
            }
            (None, LinearSolverKind::Cholesky) => unreachable!("factor computed in new()"),
        }
    }
}

/// One-shot SPD solve by sparse Cholesky.
pub fn solve_spd<T: Scalar>(matrix: &CsrMatrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    Ok(SpdSolver::new(matrix.clone(), LinearSolverKind::Cholesky)?
        .solve(rhs)?
        .0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub iterations: usize,
    /// Max-norm displacement change of the last Uzawa sweep.
    pub final_increment: f64,
    pub linear: LinearSolveInfo,
}

#[derive(Debug, Clone)]
pub struct StepSolution<T> {
    pub displacement: CrFunction<T>,
    pub friction: FrictionState<T>,
    pub diagnostics: StepDiagnostics,
}

/// Stick/slip status of a contact edge at a converged state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactStatus {
    Stick,
    Slip,
    /// Neither condition holds to the requested tolerance.
    Unresolved,
}

/// Result of one Uzawa solve on raw coefficient vectors.
#[derive(Debug, Clone)]
pub struct RawStep<T> {
    pub displacement: Vec<T>,
    pub lambda: Vec<T>,
    pub diagnostics: StepDiagnostics,
}

/// SPD system with frictional unknowns: factored `K`, contact DOFs and weights `g_a h_e`.
///
/// Works on plain coefficient vectors so that synthetic systems can be solved
/// without a mesh.
pub struct FrictionalSystem<T> {
    linear: SpdSolver<T>,
    contact_dofs: Vec<usize>,
    weights: Vec<T>,
    /// Literal-step scale (`g_a`); ignored by the spectral step.
    friction_bound: T,
    /// `K^{-1} B^T`: column `j` is the response to a unit load on contact DOF `j`.
    responses: Vec<Vec<T>>,
    /// Contact block `C = B K^{-1} B^T`; `compliance[j][i] = C_ij`.
    compliance: Vec<Vec<T>>,
    /// Largest eigenvalue of `C G`.
    lambda_max: T,
    cfg: UzawaConfig<T>,
}

impl<T: Scalar> FrictionalSystem<T> {
    pub fn new(
        linear: SpdSolver<T>,
        contact_dofs: Vec<usize>,
        weights: Vec<T>,
        friction_bound: T,
        cfg: UzawaConfig<T>,
    ) -> Result<Self> {
        cfg.validate()?;
        if contact_dofs.len() != weights.len() {
            return Err(invalid("weights", "one weight per contact DOF required"));
        }
        if weights.iter().any(|w| !(*w >= T::zero())) || !(friction_bound >= T::zero()) {
            return Err(invalid("friction_bound", "must be non-negative"));
        }
        let n = linear.matrix().dim();
        if contact_dofs.iter().any(|&d| d >= n) {
            return Err(invalid("contact_dofs", "index out of range"));
        }
        let mut responses = Vec::with_capacity(contact_dofs.len());
        if weights.iter().any(|w| *w > T::zero()) {
            for &d in &contact_dofs {
                let mut e = vec![T::zero(); n];
                e[d] = T::one();
                responses.push(linear.solve(&e)?.0);
            }
        }
        let compliance: Vec<Vec<T>> = responses
            .iter()
            .map(|col| contact_dofs.iter().map(|&d| col[d]).collect())
            .collect();
        let lambda_max = if responses.is_empty() {
            T::zero()
        } else {
            largest_eigenvalue_scaled(&compliance, &weights)
        };
        Ok(Self {
            linear,
            contact_dofs,
            weights,
            friction_bound,
            responses,
            compliance,
            lambda_max,
            cfg,
        })
    }

    pub fn config(&self) -> &UzawaConfig<T> {
        &self.cfg
    }

    pub fn linear_solver(&self) -> &SpdSolver<T> {
        &self.linear
    }

    pub fn contact_dofs(&self) -> &[usize] {
        &self.contact_dofs
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    fn friction_active(&self) -> bool {
        !self.responses.is_empty()
    }

    /// Multiplier step `s` for time step `k`.
    pub fn multiplier_step(&self, k: T) -> T {
        match self.cfg.step {
            MultiplierStep::Literal => self.cfg.rho_tilde * self.friction_bound,
            MultiplierStep::Spectral => {
                if self.lambda_max > T::zero() {
                    self.cfg.rho_tilde * k / self.lambda_max
                } else {
                    T::zero()
                }
            }
        }
    }

    /// One backward-Euler step from `u_prev` with step size `k`, warm-starting the multiplier.
    pub fn solve_step(
        &self,
        load: &[T],
        u_prev: &[T],
        k: T,
        warm_start: &[T],
    ) -> Result<RawStep<T>> {
        if !(k > T::zero()) {
            return Err(invalid("k", "time step must be positive"));
        }
        let m = self.contact_dofs.len();
        if warm_start.len() != m {
            return Err(invalid("lambda", format!("expected {m} multipliers")));
        }
        let (u_free, linear) = self.linear.solve(load)?;
        if !self.friction_active() {
            return Ok(RawStep {
                displacement: u_free,
                lambda: warm_start.to_vec(),
                diagnostics: StepDiagnostics {
                    iterations: 1,
                    final_increment: 0.0,
                    linear,
                },
            });
        }

        let prev: Vec<T> = self.contact_dofs.iter().map(|&d| u_prev[d]).collect();
        let mut lambda: Vec<T> = warm_start.iter().map(|&l| projection_p(l)).collect();
        // tangential contact values of the current iterate
        let mut ut: Vec<T> = self.contact_dofs.iter().map(|&d| u_free[d]).collect();
        for (j, &l) in lambda.iter().enumerate() {
            let g = self.weights[j] * l;
            if g != T::zero() {
                for (i, c) in ut.iter_mut().enumerate() {
                    *c -= self.compliance[j][i] * g;
                }
            }
        }

        let s = self.multiplier_step(k);
        let mut delta_u = vec![T::zero(); u_free.len()];
        let mut history = Vec::new();
        let mut converged = None;
        let mut moved = Vec::with_capacity(m);
        for it in 1..=self.cfg.max_iter {
            moved.clear();
            for e in 0..m {
                let next = projection_p(lambda[e] + s * (ut[e] - prev[e]) / k);
                let d = next - lambda[e];
                if d != T::zero() {
                    moved.push((e, self.weights[e] * d));
                }
                lambda[e] = next;
            }
            for &(j, gd) in &moved {
                for (i, c) in ut.iter_mut().enumerate() {
                    *c -= self.compliance[j][i] * gd;
                }
                for (du, z) in delta_u.iter_mut().zip(&self.responses[j]) {
                    *du -= *z * gd;
                }
            }
            let inc = norm_inf(&delta_u);
            if !moved.is_empty() {
                delta_u.iter_mut().for_each(|x| *x = T::zero());
            }
            history.push(inc.to_f64_lossy());
            if converged.is_none() && inc < self.cfg.eps {
                converged = Some(it);
            }
            if converged.is_some() {
                if !self.cfg.finalize {
                    break;
                }
                if let Some(exact) = self.finalize_active_set(&u_free, &prev, &lambda) {
                    lambda = exact;
                    converged = Some(it);
                    break;
                }
            }
        }

        let displacement = self.displacement_for(&u_free, &lambda);
        let Some(iterations) = converged else {
            return Err(Error::UzawaNotConverged {
                iterations: self.cfg.max_iter,
                last_increment: history.last().copied().unwrap_or(f64::NAN),
                history,
                last_iterate: displacement.iter().map(|x| x.to_f64_lossy()).collect(),
            });
        };
        Ok(RawStep {
            displacement,
            lambda,
            diagnostics: StepDiagnostics {
                iterations,
                final_increment: history.last().copied().unwrap_or(0.0),
                linear,
            },
        })
    }

    /// Multipliers that make the tangential velocity vanish on every edge with
    /// `|lambda_e| < 1`, slip edges held at `+-1`. `None` unless the result is a
    /// genuine stick/slip state: stick multipliers inside `[-1, 1]` and each slip
    /// edge moving in the direction of its multiplier.
    fn finalize_active_set(&self, u_free: &[T], prev: &[T], lambda: &[T]) -> Option<Vec<T>> {
        let m = lambda.len();
        let stick: Vec<usize> = (0..m).filter(|&e| lambda[e].abs() < T::one()).collect();
        let mut exact = lambda.to_vec();
        if !stick.is_empty() {
            // rows i in stick: sum_{j in stick} C_ji w_j l_j = ut_free_i - prev_i - slip part
            let ns = stick.len();
            let mut a = vec![vec![T::zero(); ns + 1]; ns];
            for (r, &i) in stick.iter().enumerate() {
                let mut rhs = u_free[self.contact_dofs[i]] - prev[i];
                for j in 0..m {
                    if lambda[j].abs() >= T::one() {
                        rhs -= self.compliance[j][i] * self.weights[j] * lambda[j];
                    }
                }
                for (c, &j) in stick.iter().enumerate() {
                    a[r][c] = self.compliance[j][i] * self.weights[j];
                }
                a[r][ns] = rhs;
            }
            let sol = dense_solve(a)?;
            for (c, &j) in stick.iter().enumerate() {
                if !(sol[c].abs() <= T::one()) {
                    return None;
                }
                exact[j] = sol[c];
            }
        }
        let mut ut: Vec<T> = self.contact_dofs.iter().map(|&d| u_free[d]).collect();
        for (j, &l) in exact.iter().enumerate() {
            let g = self.weights[j] * l;
            for (i, c) in ut.iter_mut().enumerate() {
                *c -= self.compliance[j][i] * g;
            }
        }
        let consistent = (0..m)
            .filter(|&e| lambda[e].abs() >= T::one())
            .all(|e| exact[e] * (ut[e] - prev[e]) >= T::zero());
        consistent.then_some(exact)
    }

    /// `u = K^{-1} F - K^{-1} B^T G lambda`.
    fn displacement_for(&self, u_free: &[T], lambda: &[T]) -> Vec<T> {
        let mut u = u_free.to_vec();
        for (j, &l) in lambda.iter().enumerate() {
            let g = self.weights[j] * l;
            if g != T::zero() {
                for (ui, z) in u.iter_mut().zip(&self.responses[j]) {
                    *ui -= *z * g;
                }
            }
        }
        u
    }
}

/// Friction-coupled solver for one mesh.
pub struct UzawaSolver<T> {
    space: Arc<CrSpace<T>>,
    friction_bound: T,
    inner: FrictionalSystem<T>,
}

impl<T: Scalar> UzawaSolver<T> {
    pub fn new(system: &DiscreteSystem<T>, friction_bound: T, cfg: UzawaConfig<T>) -> Result<Self> {
        Self::with_linear_solver(system, friction_bound, cfg, LinearSolverKind::Cholesky)
    }

    pub fn with_linear_solver(
        system: &DiscreteSystem<T>,
        friction_bound: T,
        cfg: UzawaConfig<T>,
        kind: LinearSolverKind,
    ) -> Result<Self> {
        let space = system.space().clone();
        let linear = SpdSolver::new(system.stiffness().clone(), kind)?;
        let weights = contact_weights(&space, friction_bound);
        let dofs = space
            .contact_edges()
            .iter()
            .map(|c| c.tangential_dof)
            .collect();
        let inner = FrictionalSystem::new(linear, dofs, weights, friction_bound, cfg)?;
        Ok(Self {
            space,
            friction_bound,
            inner,
        })
    }

    pub fn space(&self) -> &Arc<CrSpace<T>> {
        &self.space
    }

    pub fn friction_bound(&self) -> T {
        self.friction_bound
    }

    pub fn system(&self) -> &FrictionalSystem<T> {
        &self.inner
    }

    /// Uzawa solve of one time step.
    pub fn step(
        &self,
        load: &[T],
        u_prev: &CrFunction<T>,
        k: T,
        warm_start: &FrictionState<T>,
    ) -> Result<StepSolution<T>> {
        let raw = self
            .inner
            .solve_step(load, u_prev.coefficients(), k, &warm_start.lambda)?;
        Ok(StepSolution {
            displacement: CrFunction::from_coefficients(self.space.clone(), raw.displacement)?,
            friction: FrictionState { lambda: raw.lambda },
            diagnostics: raw.diagnostics,
        })
    }
}

/// Gaussian elimination with partial pivoting on an augmented `n x (n+1)` matrix.
fn dense_solve<T: Scalar>(mut a: Vec<Vec<T>>) -> Option<Vec<T>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| {
            a[p][col]
                .abs()
                .partial_cmp(&a[q][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(a[piv][col].abs() > T::zero()) {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != T::zero() {
                for c in col..=n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut v = a[r][n];
        for c in r + 1..n {
            v -= a[r][c] * x[c];
        }
        x[r] = v / a[r][r];
    }
    Some(x)
}

/// Largest eigenvalue of `C G` via power iteration on the symmetric `G^1/2 C G^1/2`.
fn largest_eigenvalue_scaled<T: Scalar>(c: &[Vec<T>], g: &[T]) -> T {
    let m = g.len();
    let sg: Vec<T> = g.iter().map(|x| x.sqrt()).collect();
    let apply = |x: &[T]| -> Vec<T> {
        (0..m)
            .map(|i| sg[i] * (0..m).map(|j| c[j][i] * sg[j] * x[j]).sum::<T>())
            .collect()
    };
    let mut x = vec![T::one(); m];
    let mut est = T::zero();
    for _ in 0..1000 {
        let y = apply(&x);
        let ny = norm2(&y);
        if ny == T::zero() {
            return T::zero();
        }
        let next = crate::scalar::dot(&x, &y) / crate::scalar::dot(&x, &x);
        x = y.into_iter().map(|v| v / ny).collect();
        if (next - est).abs() <= T::lit(1e-12) * next.abs() {
            est = next;
            break;
        }
        est = next;
    }
    est
}

/// `lambda_e` within `tol` of +-1 is slip; otherwise stick requires `|du_tau| <= vel_tol`.
pub fn classify_contact<T: Scalar>(lambda: T, velocity: T, vel_tol: T, tol: T) -> ContactStatus {
    if (lambda.abs() - T::one()).abs() <= tol {
        ContactStatus::Slip
    } else if lambda.abs() < T::one() && velocity.abs() <= vel_tol {
        ContactStatus::Stick
    } else {
        ContactStatus::Unresolved
    }
}

/// Fully-discrete trajectory `{u^n, lambda^n}` on the nodes of a [`TimeGrid`].
#[derive(Debug, Clone)]
pub struct TrajectorySolution<T> {
    pub times: Vec<T>,
    pub displacements: Vec<CrFunction<T>>,
    pub multipliers: Vec<FrictionState<T>>,
    /// One entry per step `n = 1..=N`.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl<T: Scalar> TrajectorySolution<T> {
    pub fn final_displacement(&self) -> &CrFunction<T> {
        self.displacements.last().expect("trajectory contains u^0")
    }

    pub fn total_uzawa_iterations(&self) -> usize {
        self.diagnostics.iter().map(|d| d.iterations).sum()
    }
}

/// Marches `u^0 = I_CR(u_0)` through every node of `grid`.
pub fn march<T: Scalar>(
    solver: &UzawaSolver<T>,
    loads: &LoadSpec<T>,
    grid: &TimeGrid<T>,
) -> Result<TrajectorySolution<T>> {
    loads.validate()?;
    let space = solver.space().clone();
    let init = loads.initial;
    let u0 = interpolate_cr(|p| init.eval(p), &space);
    let m = space.contact_edges().len();
    let k = grid.step_size();
    let mut out = TrajectorySolution {
        times: vec![T::zero()],
        displacements: vec![u0],
        multipliers: vec![FrictionState::zeros(m)],
        diagnostics: Vec::with_capacity(grid.steps),
    };
    for n in 1..=grid.steps {
        let t = grid.node(n);
        let wrap = |e: Error| Error::Step {
            step: n,
            source: Box::new(e),
        };
        let load = assemble_load(&space, loads, t).map_err(wrap)?;
        let step = solver
            .step(&load, &out.displacements[n - 1], k, &out.multipliers[n - 1])
            .map_err(wrap)?;
        log::debug!(
            "step {n}: t = {t}, uzawa iterations = {}, increment = {:e}",
            step.diagnostics.iterations,
            step.diagnostics.final_increment
        );
        out.times.push(t);
        out.displacements.push(step.displacement);
        out.multipliers.push(step.friction);
        out.diagnostics.push(step.diagnostics);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_stiffness;
    use crate::material::MaterialModel;
    use crate::mesh::{BoundaryLabel, Domain, Mesh, Side};

    #[test]
    fn projection_clamps() {
        assert_eq!(projection_p(1.5), 1.0);
        assert_eq!(projection_p(-2.0), -1.0);
        assert_eq!(projection_p(0.3), 0.3);
        assert_eq!(projection_p(-1.0f32), -1.0);
    }

    #[test]
    fn time_grid_nodes() {
        let g = TimeGrid::new(1.0, 40).unwrap();
        assert_eq!(g.step_size(), 0.025);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(40), 1.0);
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = UzawaConfig::<f64>::default();
        assert_eq!((c.rho_tilde, c.eps, c.max_iter), (1.0, 1e-8, 10_000));
        c.eps = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(classify_contact(1.0, 0.3, 1e-8, 1e-12), ContactStatus::Slip);
        assert_eq!(
            classify_contact(0.2, 1e-10, 1e-8, 1e-12),
            ContactStatus::Stick
        );
        assert_eq!(
            classify_contact(0.2, 1e-3, 1e-8, 1e-12),
            ContactStatus::Unresolved
        );
    }

    #[test]
    fn zero_data_gives_zero_step() {
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
        let space = Arc::new(CrSpace::new(Arc::new(Mesh::structured(&d, 2).unwrap())).unwrap());
        let mat = MaterialModel::new(200.0, 0.3, Default::default()).unwrap();
        let sys = assemble_stiffness(&space, &mat, 10.0).unwrap();
        let solver = UzawaSolver::new(&sys, 0.0012, UzawaConfig::default()).unwrap();
        let zero = vec![0.0; space.n_free()];
        let st = solver
            .step(
                &zero,
                &space.zero_function(),
                0.025,
                &FrictionState::zeros(2),
            )
            .unwrap();
        assert_eq!(st.diagnostics.iterations, 1);
        assert!(st.displacement.coefficients().iter().all(|&x| x == 0.0));
        assert!(st.friction.lambda.iter().all(|&x| x == 0.0));
        assert!(solve_spd(sys.stiffness(), &zero)
            .unwrap()
            .iter()
            .all(|&x| x == 0.0));
    }
}
