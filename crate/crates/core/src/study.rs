//! Configured runs: single solves and the nested h/k convergence study.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::{broken_strain_norm, energy_norm, eoc};
use crate::assembly::assemble_stiffness;
use crate::config::{ErrorMetric, ErrorNorm, ProblemConfig};
use crate::cr_space::prolongate;
use crate::cr_space::{CrFunction, CrSpace};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryLabel, Mesh};
use crate::solver::{march, TimeGrid, TrajectorySolution, UzawaSolver};

/// Nested meshes `0..levels`, each a uniform refinement of the previous one.
pub fn mesh_hierarchy(cfg: &ProblemConfig, levels: usize) -> Result<Vec<Arc<Mesh<f64>>>> {
    let domain = cfg.domain()?;
    let mut out = Vec::with_capacity(levels);
    let mut mesh = Mesh::structured(&domain, cfg.mesh.base_subdivisions)?;
    for l in 0..levels {
        if l > 0 {
            mesh = mesh.refine_uniform()?;
        }
        out.push(Arc::new(mesh.clone()));
    }
    Ok(out)
}

/// Trajectory of one level together with its discretization parameters.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub level: usize,
    pub subdivisions: usize,
    pub steps: usize,
    pub trajectory: TrajectorySolution<f64>,
}

/// Solves the configured problem on `mesh` with `steps` time steps.
pub fn solve_on(
    cfg: &ProblemConfig,
    mesh: Arc<Mesh<f64>>,
    steps: usize,
) -> Result<TrajectorySolution<f64>> {
    let space = Arc::new(CrSpace::new(mesh)?);
    let material = cfg.material_model()?;
    let system = assemble_stiffness(&space, &material, cfg.solver.rho)?;
    let solver = UzawaSolver::with_linear_solver(
        &system,
        cfg.loads.friction_bound,
        cfg.uzawa_config(),
        cfg.linear_solver(),
    )?;
    let grid = TimeGrid::new(cfg.time.final_time, steps)?;
    march(&solver, &cfg.load_spec(), &grid)
}

fn run_level(cfg: &ProblemConfig, level: usize, mesh: Arc<Mesh<f64>>) -> Result<LevelRun> {
    let steps = cfg.steps(level);
    let subdivisions = cfg.subdivisions(level);
    log::info!("level {level}: {subdivisions}x{subdivisions} grid, {steps} steps");
    let trajectory = solve_on(cfg, mesh, steps).map_err(|e| Error::Level {
        level,
        source: Box::new(e),
    })?;
    Ok(LevelRun {
        level,
        subdivisions,
        steps,
        trajectory,
    })
}

/// Headline numbers of a single solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub level: usize,
    pub subdivisions: usize,
    pub steps: usize,
    pub dofs: usize,
    pub free_dofs: usize,
    /// Componentwise `(min, max)` of the final edge values.
    pub ux_range: (f64, f64),
    pub uy_range: (f64, f64),
    pub max_abs_lambda: f64,
    pub total_uzawa_iterations: usize,
}

impl std::fmt::Display for RunSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "level {} ({}x{} grid, {} steps): {} DOFs ({} free)",
            self.level, self.subdivisions, self.subdivisions, self.steps, self.dofs, self.free_dofs
        )?;
        writeln!(
            f,
            "ux in [{:.6e}, {:.6e}]",
            self.ux_range.0, self.ux_range.1
        )?;
        writeln!(
            f,
            "uy in [{:.6e}, {:.6e}]",
            self.uy_range.0, self.uy_range.1
        )?;
        writeln!(f, "max |lambda| = {:.6}", self.max_abs_lambda)?;
        write!(
            f,
            "total Uzawa iterations = {}",
            self.total_uzawa_iterations
        )
    }
}

impl LevelRun {
    pub fn space(&self) -> &Arc<CrSpace<f64>> {
        self.trajectory.final_displacement().space()
    }

    pub fn summary(&self) -> RunSummary {
        let u = self.trajectory.final_displacement();
        let space = u.space();
        let mut ux = (f64::INFINITY, f64::NEG_INFINITY);
        let mut uy = ux;
        for e in 0..space.mesh().n_edges() {
            let v = u.edge_value(e);
            ux = (ux.0.min(v[0]), ux.1.max(v[0]));
            uy = (uy.0.min(v[1]), uy.1.max(v[1]));
        }
        RunSummary {
            level: self.level,
            subdivisions: self.subdivisions,
            steps: self.steps,
            dofs: space.n_dofs_reported(),
            free_dofs: space.n_free(),
            ux_range: ux,
            uy_range: uy,
            max_abs_lambda: self
                .trajectory
                .multipliers
                .iter()
                .map(|m| m.max_abs())
                .fold(0.0, f64::max),
            total_uzawa_iterations: self.trajectory.total_uzawa_iterations(),
        }
    }
}

/// Solves a single level of the configured refinement schedule.
pub fn run_single(cfg: &ProblemConfig, level: usize) -> Result<LevelRun> {
    let meshes = mesh_hierarchy(cfg, level + 1)?;
    run_level(cfg, level, meshes[level].clone())
}

/// Final displacement per non-Dirichlet edge, one `mx my ux uy` line each.
pub fn field_dump(u: &CrFunction<f64>) -> String {
    let mut out = String::new();
    for (e, edge) in u.space().mesh().edges().iter().enumerate() {
        if edge.kind.label() == Some(BoundaryLabel::Dirichlet) {
            continue;
        }
        let v = u.edge_value(e);
        let _ = writeln!(
            out,
            "{:.16e} {:.16e} {:.16e} {:.16e}",
            edge.midpoint[0], edge.midpoint[1], v[0], v[1]
        );
    }
    out
}

/// One line of the convergence table.
///
/// `error` compares this level with the next finer one, so the finest row has
/// none; `order` compares this row's error with the previous row's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub h: f64,
    pub k: f64,
    pub dof: usize,
    pub error: Option<f64>,
    pub order: Option<f64>,
}

pub const CSV_HEADER: &str = "N,h,k,dof,error,order";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn write_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{},{},{}",
            r.steps,
            r.h,
            r.k,
            r.dof,
            fmt_opt(r.error),
            fmt_opt(r.order)
        );
    }
    out
}

pub fn write_csv_file(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    std::fs::write(path, write_csv(rows))?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<ConvergenceRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => return Err(Error::Config(format!("unexpected CSV header {other:?}"))),
    }
    let bad = |line: usize, what: &str| Error::Config(format!("CSV line {line}: invalid {what}"));
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let n = i + 2;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(bad(n, "field count"));
        }
        let opt = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(n, what))
            }
        };
        rows.push(ConvergenceRow {
            steps: f[0].parse().map_err(|_| bad(n, "N"))?,
            h: f[1].parse().map_err(|_| bad(n, "h"))?,
            k: f[2].parse().map_err(|_| bad(n, "k"))?,
            dof: f[3].parse().map_err(|_| bad(n, "dof"))?,
            error: opt(f[4], "error")?,
            order: opt(f[5], "order")?,
        });
    }
    Ok(rows)
}

/// Solved levels plus the assembled table.
#[derive(Debug, Clone)]
pub struct StudyResult {
    pub runs: Vec<LevelRun>,
    pub rows: Vec<ConvergenceRow>,
}

/// `P u_coarse - u_fine` measured in `norm`.
pub fn inter_level_difference(
    cfg: &ProblemConfig,
    coarse: &CrFunction<f64>,
    fine: &CrFunction<f64>,
    norm: ErrorNorm,
) -> Result<f64> {
    let diff = prolongate(coarse, fine.space())?.sub(fine)?;
    match norm {
        ErrorNorm::Energy => Ok(energy_norm(&diff, &cfg.material_model()?, cfg.solver.rho)?.total),
        ErrorNorm::Strain => broken_strain_norm(&diff),
    }
}

/// Error between consecutive levels according to the configured metric and norm.
pub fn level_error(cfg: &ProblemConfig, coarse: &LevelRun, fine: &LevelRun) -> Result<f64> {
    let norm = cfg.study.error_norm;
    match cfg.study.error_metric {
        ErrorMetric::FinalTime => inter_level_difference(
            cfg,
            coarse.trajectory.final_displacement(),
            fine.trajectory.final_displacement(),
            norm,
        ),
        ErrorMetric::MaxOverTime => {
            if fine.steps % coarse.steps != 0 {
                return Err(Error::Config("time grids are not nested".into()));
            }
            let ratio = fine.steps / coarse.steps;
            let mut worst = 0.0f64;
            for (n, uc) in coarse.trajectory.displacements.iter().enumerate() {
                let uf = &fine.trajectory.displacements[n * ratio];
                worst = worst.max(inter_level_difference(cfg, uc, uf, norm)?);
            }
            Ok(worst)
        }
    }
}

/// Runs every level of the schedule and tabulates inter-level errors and orders.
pub fn run_convergence_study(cfg: &ProblemConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let levels = cfg.mesh.levels;
    if levels < 2 {
        return Err(Error::Config(
            "mesh.levels: a study needs at least 2 levels".into(),
        ));
    }
    let meshes = mesh_hierarchy(cfg, levels)?;
    let runs: Vec<LevelRun> = if cfg.study.parallel {
        meshes
            .par_iter()
            .enumerate()
            .map(|(l, m)| run_level(cfg, l, m.clone()))
            .collect::<Result<_>>()?
    } else {
        meshes
            .iter()
            .enumerate()
            .map(|(l, m)| run_level(cfg, l, m.clone()))
            .collect::<Result<_>>()?
    };

    let errors: Vec<f64> = runs
        .windows(2)
        .map(|w| level_error(cfg, &w[0], &w[1]))
        .collect::<Result<_>>()?;
    let orders = if errors.len() >= 2 && errors.iter().all(|e| *e > 0.0) {
        eoc(&errors)?
    } else {
        Vec::new()
    };

    let t = cfg.time.final_time;
    let rows = runs
        .iter()
        .enumerate()
        .map(|(i, r)| ConvergenceRow {
            steps: r.steps,
            h: 1.0 / r.subdivisions as f64,
            k: t / r.steps as f64,
            dof: r.space().n_dofs_reported(),
            error: errors.get(i).copied(),
            order: i.checked_sub(1).and_then(|j| orders.get(j).copied()),
        })
        .collect();
    Ok(StudyResult { runs, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![
            ConvergenceRow {
                steps: 40,
                h: 0.5,
                k: 0.025,
                dof: 28,
                error: Some(2.512e-4 + 1e-19),
                order: None,
            },
            ConvergenceRow {
                steps: 80,
                h: 0.25,
                k: 0.0125,
                dof: 104,
                error: Some(std::f64::consts::PI * 1e-4),
                order: Some(0.857_912_345_678_901_2),
            },
            ConvergenceRow {
                steps: 160,
                h: 0.125,
                k: 0.00625,
                dof: 400,
                error: None,
                order: None,
            },
        ];
        let text = write_csv(&rows);
        assert!(text.starts_with("N,h,k,dof,error,order\n40,"));
        assert_eq!(parse_csv(&text).unwrap(), rows);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(parse_csv("a,b\n").is_err());
        assert!(parse_csv("N,h,k,dof,error,order\n1,2\n").is_err());
    }

    #[test]
    fn hierarchy_is_nested() {
        let cfg = ProblemConfig::example_5_1();
        let m = mesh_hierarchy(&cfg, 3).unwrap();
        assert_eq!(m.len(), 3);
        for w in m.windows(2) {
            crate::cr_space::check_nested(&w[0], &w[1]).unwrap();
        }
        assert_eq!(m[2].n_triangles(), 2 * 8 * 8);
    }
}
