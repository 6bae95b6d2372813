use std::sync::Arc;

use proptest::prelude::*;

use cr_contact::assembly::{assemble_load, friction_value};
use cr_contact::config::ProblemConfig;
use cr_contact::study::mesh_hierarchy;
use cr_contact::{
    assemble_stiffness, energy_norm, inter_mesh_error, march, CrFunction, CrSpace, LoadSpec,
    TimeGrid, UzawaSolver,
};

fn space(level: usize) -> Arc<CrSpace<f64>> {
    let cfg = ProblemConfig::example_5_1();
    let meshes = mesh_hierarchy(&cfg, level + 1).unwrap();
    Arc::new(CrSpace::new(meshes[level].clone()).unwrap())
}

fn field(space: &Arc<CrSpace<f64>>, coeffs: &[f64]) -> CrFunction<f64> {
    let n = space.n_free();
    let c = (0..n)
        .map(|i| coeffs[i % coeffs.len()] * (1.0 + (i / coeffs.len()) as f64))
        .collect();
    CrFunction::from_coefficients(space.clone(), c).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 7..31)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_norm_is_absolutely_homogeneous(c in coeffs(), a in -5.0f64..5.0) {
        let sp = space(1);
        let mat = ProblemConfig::example_5_1().material_model().unwrap();
        let v = field(&sp, &c);
        let n1 = energy_norm(&v.scaled(a), &mat, 10.0).unwrap().total;
        let n0 = energy_norm(&v, &mat, 10.0).unwrap().total;
        prop_assert!((n1 - a.abs() * n0).abs() <= 1e-12 * (1.0 + n1));
    }

    #[test]
    fn energy_norm_triangle_inequality(c1 in coeffs(), c2 in coeffs()) {
        let sp = space(1);
        let mat = ProblemConfig::example_5_1().material_model().unwrap();
        let (v, w) = (field(&sp, &c1), field(&sp, &c2));
        let mut sum = v.clone();
        sum.axpy(1.0, &w).unwrap();
        let n = |f: &CrFunction<f64>| energy_norm(f, &mat, 10.0).unwrap().total;
        prop_assert!(n(&sum) <= n(&v) + n(&w) + 1e-12);
    }

    #[test]
    fn friction_functional_is_convex(c1 in coeffs(), c2 in coeffs(), t in 0.0f64..1.0) {
        let sp = space(1);
        let (v, w) = (field(&sp, &c1), field(&sp, &c2));
        let mut mix = v.scaled(t);
        mix.axpy(1.0 - t, &w).unwrap();
        let j = |f: &CrFunction<f64>| friction_value(&sp, 0.0012, f);
        prop_assert!(j(&mix) <= t * j(&v) + (1.0 - t) * j(&w) + 1e-15);
        prop_assert!((j(&v.scaled(-1.0)) - j(&v)).abs() <= 1e-15);
    }

    #[test]
    fn inter_mesh_error_vanishes_for_prolongated_field(c in coeffs()) {
        let coarse = space(1);
        let fine = space(2);
        let mat = ProblemConfig::example_5_1().material_model().unwrap();
        let v = field(&coarse, &c);
        let lifted = cr_contact::prolongate(&v, &fine).unwrap();
        let e = inter_mesh_error(&v, &lifted, &mat, 10.0).unwrap();
        prop_assert!(e <= 1e-13 * (1.0 + energy_norm(&v, &mat, 10.0).unwrap().total));
    }
}

#[test]
fn stiffness_is_positive_definite() {
    let cfg = ProblemConfig::example_5_1();
    for level in 0..3 {
        let sp = space(level);
        let sys = assemble_stiffness(&sp, &cfg.material_model().unwrap(), 10.0).unwrap();
        let k = sys.stiffness();
        // inverse power iteration for the smallest eigenvalue
        let solver = cr_contact::solver::SpdSolver::new(
            k.clone(),
            cr_contact::solver::LinearSolverKind::Cholesky,
        )
        .unwrap();
        let mut x: Vec<f64> = (0..k.dim()).map(|i| 1.0 + (i % 7) as f64).collect();
        let mut rayleigh = 0.0;
        for _ in 0..200 {
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= nx);
            let kx = k.matvec(&x);
            rayleigh = x.iter().zip(&kx).map(|(a, b)| a * b).sum::<f64>();
            x = solver.solve(&x).unwrap().0;
        }
        assert!(
            rayleigh > 1e-6,
            "level {level}: smallest eigenvalue {rayleigh}"
        );
    }
}

#[test]
fn zero_data_gives_zero_trajectory() {
    let mut cfg = ProblemConfig::example_5_1();
    cfg.loads.traction.clear();
    let sp = space(1);
    let sys = assemble_stiffness(&sp, &cfg.material_model().unwrap(), 10.0).unwrap();
    let solver = UzawaSolver::new(&sys, 0.0012, cfg.uzawa_config()).unwrap();
    let traj = march(&solver, &LoadSpec::zero(), &TimeGrid::new(1.0, 10).unwrap()).unwrap();
    for u in &traj.displacements {
        assert!(u.coefficients().iter().all(|x| *x == 0.0));
    }
}

#[test]
fn example_displacement_grows_and_flips_with_the_load() {
    let cfg = ProblemConfig::example_5_1();
    let sp = space(1);
    let mat = cfg.material_model().unwrap();
    let sys = assemble_stiffness(&sp, &mat, 10.0).unwrap();
    let solver = UzawaSolver::new(&sys, 0.0012, cfg.uzawa_config()).unwrap();
    let grid = TimeGrid::new(1.0, 20).unwrap();
    let loads = cfg.load_spec();
    let traj = march(&solver, &loads, &grid).unwrap();
    let norms: Vec<f64> = traj
        .displacements
        .iter()
        .map(|u| energy_norm(u, &mat, 10.0).unwrap().total)
        .collect();
    assert!(norms.windows(2).all(|w| w[1] > w[0]), "{norms:?}");

    // friction is even, so negated loads give the negated trajectory
    let mut flipped = cfg.clone();
    for tr in &mut flipped.loads.traction {
        tr.x.iter_mut().for_each(|c| *c = -*c);
        tr.y.iter_mut().for_each(|c| *c = -*c);
    }
    let neg = march(&solver, &flipped.load_spec(), &grid).unwrap();
    for (a, b) in traj.displacements.iter().zip(&neg.displacements) {
        for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
            assert!((x + y).abs() <= 1e-14 + 1e-10 * x.abs());
        }
    }
    let load = assemble_load(&sp, &flipped.load_spec(), 1.0).unwrap();
    assert!(load.iter().any(|x| *x != 0.0));
}

#[test]
fn single_precision_matches_double() {
    let cfg = ProblemConfig::example_5_1();
    let sp64 = space(1);
    let mesh32 = Arc::new(
        cr_contact::Mesh::<f32>::structured(
            &cr_contact::Domain::new(
                0.0,
                4.0,
                0.0,
                4.0,
                sp64.mesh()
                    .domain()
                    .boundary
                    .iter()
                    .map(|s| {
                        cr_contact::BoundarySegment::new(s.side, s.lo as f32, s.hi as f32, s.label)
                    })
                    .collect(),
            )
            .unwrap(),
            2,
        )
        .unwrap()
        .refine_uniform()
        .unwrap(),
    );
    let sp32 = Arc::new(CrSpace::new(mesh32).unwrap());
    assert_eq!(sp32.n_free(), sp64.n_free());
    let m64 = cfg.material_model().unwrap();
    let m32 = cr_contact::MaterialModel::<f32>::new(200.0, 0.3, m64.assumption).unwrap();
    let v64 = field(&sp64, &[0.3, -0.2, 0.7, 0.1]);
    let v32 = CrFunction::from_coefficients(
        sp32.clone(),
        v64.coefficients().iter().map(|x| *x as f32).collect(),
    )
    .unwrap();
    let n64 = energy_norm(&v64, &m64, 10.0).unwrap().total;
    let n32 = energy_norm(&v32, &m32, 10.0).unwrap().total as f64;
    assert!((n64 - n32).abs() <= 1e-5 * n64, "{n64} vs {n32}");
}
