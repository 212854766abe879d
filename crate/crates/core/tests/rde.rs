mod common;

use roughflow::branched::{branched_lift, synthetic_level2};
use roughflow::branched_rde::{
    bailleul_branched_residual, gubinelli_davie_residual, solve_branched_rde, BranchedLieSeries,
};
use roughflow::calculus::{Coordinate, PolynomialMap, PolynomialSystem, VectorFieldSystem};
use roughflow::geometric::{
    bailleul_residual, davie_residual, log_ode_step, solve_rde, taylor_flow_gap,
};
use roughflow::ode::{dyadic_partition, LogOdeConfig};
use roughflow::path::PiecewiseLinearPath;
use roughflow::signature::GeometricRoughPath;
use roughflow::tensor::{LieTensor, TruncatedTensor};

fn reference_system() -> PolynomialSystem {
    PolynomialSystem::from_json_file(
        &std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/fields_2d.json"),
    )
    .unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn linear_field_step_matches_matrix_exponential() {
    let a = [[0.3, -0.6], [0.5, 0.2]];
    let system = PolynomialSystem::new(vec![PolynomialMap::affine(
        &[a[0].to_vec(), a[1].to_vec()],
        &[0.0, 0.0],
    )
    .unwrap()])
    .unwrap();
    let lambda = LieTensor::new(TruncatedTensor::letter(1, 1, 0), 0.0).unwrap();
    let z0 = [0.7, -1.1];
    let got = log_ode_step(&system, &lambda, &z0, &LogOdeConfig::new(64).unwrap()).unwrap();
    // exp(A) z0 by its power series
    let mut term = z0.to_vec();
    let mut sum = z0.to_vec();
    for n in 1..40 {
        term = (0..2)
            .map(|i| (a[i][0] * term[0] + a[i][1] * term[1]) / n as f64)
            .collect();
        for i in 0..2 {
            sum[i] += term[i];
        }
    }
    assert!(dist(&got, &sum) <= 1e-10, "{got:?} vs {sum:?}");
}

#[test]
fn substep_refinement_converges_at_fourth_order() {
    let mut rng = common::rng(51);
    let system = reference_system();
    let lambda = common::random_tensor(&mut rng, 2, 3, 0.0)
        .scale(0.8)
        .dynkin_project();
    let z0 = [0.3, -0.4];
    let run =
        |n: usize| log_ode_step(&system, &lambda, &z0, &LogOdeConfig::new(n).unwrap()).unwrap();
    let (y1, y2, y3) = (run(2), run(4), run(8));
    let order = (dist(&y1, &y2) / dist(&y2, &y3)).log2();
    assert!(order >= 3.7, "observed order {order}");
}

#[test]
fn depth_one_reduces_to_the_driven_ode() {
    let system = reference_system();
    let path = PiecewiseLinearPath::smooth(2, 32, 1.0, 0.8).unwrap();
    let x = GeometricRoughPath::lift(path.clone(), 1);
    let z0 = vec![0.1, -0.2];
    let cfg = LogOdeConfig::new(16).unwrap();
    let got = solve_rde(&system, &x, path.times(), &z0, &cfg).unwrap();
    // reference: RK4 on dz/dt = sum_i V_i(z) x'^i(t), 200 steps per piece
    let rhs = |z: &[f64], v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; 2];
        for (i, vi) in v.iter().enumerate() {
            let f = system.field_value(i, z).unwrap();
            for k in 0..2 {
                out[k] += f[k] * vi;
            }
        }
        out
    };
    let mut z = z0.clone();
    for w in path.times().windows(2) {
        let h = (w[1] - w[0]) / 200.0;
        let v = path.velocity_at(0.5 * (w[0] + w[1])).unwrap();
        for _ in 0..200 {
            let k1 = rhs(&z, &v);
            let k2 = rhs(&[z[0] + 0.5 * h * k1[0], z[1] + 0.5 * h * k1[1]], &v);
            let k3 = rhs(&[z[0] + 0.5 * h * k2[0], z[1] + 0.5 * h * k2[1]], &v);
            let k4 = rhs(&[z[0] + h * k3[0], z[1] + h * k3[1]], &v);
            for k in 0..2 {
                z[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            }
        }
    }
    assert!(dist(got.final_state(), &z) <= 1e-6);
}

#[test]
fn zero_driver_keeps_the_state() {
    let system = reference_system();
    let path = PiecewiseLinearPath::zero(2, 16, 1.0).unwrap();
    let z0 = [0.4, 0.9];
    let geo = solve_rde(
        &system,
        &GeometricRoughPath::lift(path.clone(), 3),
        path.times(),
        &z0,
        &LogOdeConfig::default(),
    )
    .unwrap();
    let br = solve_branched_rde(
        &system,
        &branched_lift(path.clone(), 2).unwrap(),
        path.times(),
        &z0,
        &LogOdeConfig::default(),
    )
    .unwrap();
    for z in geo.states.iter().chain(&br.states) {
        assert_eq!(z.as_slice(), &z0);
    }
}

#[test]
fn residuals_reduce_and_vanish_where_they_should() {
    let system = reference_system();
    let path = PiecewiseLinearPath::smooth(2, 64, 1.0, 0.5).unwrap();
    let geo = GeometricRoughPath::lift(path.clone(), 2);
    let cfg = LogOdeConfig::default();
    let z = solve_rde(&system, &geo, path.times(), &[0.1, -0.2], &cfg).unwrap();
    let br = synthetic_level2(path.clone(), 0.5).unwrap();
    let zb = solve_branched_rde(&system, &br, path.times(), &[0.1, -0.2], &cfg).unwrap();
    let constant = PolynomialMap::scalar(2, vec![(vec![0, 0], 3.0)]).unwrap();
    assert!(davie_residual(&system, &z, &geo, 0.5, 0.5)
        .unwrap()
        .iter()
        .all(|v| *v == 0.0));
    assert_eq!(
        bailleul_residual(&system, &constant, &z, &geo, 0.25, 0.75).unwrap(),
        0.0
    );
    assert_eq!(
        bailleul_branched_residual(&system, &constant, &zb, &br, 0.25, 0.75).unwrap(),
        0.0
    );
    for (s, t) in [(0.0, 1.0), (0.25, 0.5), (0.125, 0.1875)] {
        let davie = davie_residual(&system, &z, &geo, s, t).unwrap();
        let davie_b = gubinelli_davie_residual(&system, &zb, &br, s, t).unwrap();
        for index in 0..2 {
            let coord = Coordinate { dim: 2, index };
            let b = bailleul_residual(&system, &coord, &z, &geo, s, t).unwrap();
            assert!((b - davie[index]).abs() <= 1e-13);
            let bb = bailleul_branched_residual(&system, &coord, &zb, &br, s, t).unwrap();
            assert!((bb - davie_b[index]).abs() <= 1e-13);
        }
    }
}

#[test]
fn depth_one_linear_problem_residual_is_quadratic() {
    let a = [vec![0.0, -0.5], vec![0.5, 0.0]];
    let system =
        PolynomialSystem::new(vec![PolynomialMap::affine(&a, &[0.0, 0.0]).unwrap()]).unwrap();
    let fine = PiecewiseLinearPath::new(
        dyadic_partition(0.0, 1.0, 6),
        dyadic_partition(0.0, 1.0, 6)
            .into_iter()
            .map(|t| vec![t])
            .collect(),
    )
    .unwrap();
    let x = GeometricRoughPath::lift(fine.clone(), 1);
    let z = solve_rde(
        &system,
        &x,
        fine.times(),
        &[1.0, 0.0],
        &LogOdeConfig::default(),
    )
    .unwrap();
    for level in 1..=5 {
        let h = 0.5f64.powi(level);
        let r = davie_residual(&system, &z, &x, 0.0, h).unwrap();
        // tail of exp(hA) z0: |A|^2 h^2 / 2 with |A| = 0.5
        assert!(
            dist(&r, &[0.0, 0.0]) <= 0.125 * h * h * 1.01,
            "level {level}"
        );
    }
}

#[test]
fn inserting_partition_points_is_harmless() {
    let system = reference_system();
    let path = PiecewiseLinearPath::smooth(2, 64, 1.0, 0.5).unwrap();
    let x = GeometricRoughPath::lift(path.clone(), 2);
    let cfg = LogOdeConfig::default();
    let base = solve_rde(&system, &x, path.times(), &[0.1, -0.2], &cfg).unwrap();
    let mut refined = path.times().to_vec();
    refined.push(0.3 + 1e-3);
    refined.sort_by(f64::total_cmp);
    let more = solve_rde(&system, &x, &refined, &[0.1, -0.2], &cfg).unwrap();
    assert!(dist(base.final_state(), more.final_state()) <= 1e-9);
}

#[test]
fn pipelines_agree_on_geometric_inputs() {
    let system = reference_system();
    let mut rng = common::rng(52);
    let path = common::random_path(&mut rng, 2, 40, 1.0);
    let cfg = LogOdeConfig::default();
    let z0 = [0.1, -0.2];
    // windows spanning 10 pieces, so the logarithms carry level-2 terms
    let coarse = dyadic_partition(0.0, 1.0, 2);
    let geo = solve_rde(
        &system,
        &GeometricRoughPath::lift(path.clone(), 2),
        &coarse,
        &z0,
        &cfg,
    )
    .unwrap();
    let br = solve_branched_rde(
        &system,
        &branched_lift(path.clone(), 2).unwrap(),
        &coarse,
        &z0,
        &cfg,
    )
    .unwrap();
    assert!(dist(geo.final_state(), br.final_state()) <= 1e-7);
}

#[test]
fn branched_logarithms_are_tree_supported() {
    let mut rng = common::rng(53);
    let path = common::random_path(&mut rng, 2, 16, 1.0);
    for x in [
        branched_lift(path.clone(), 4).unwrap(),
        synthetic_level2(path, 0.5).unwrap(),
    ] {
        for (s, t) in [(0.0, 1.0), (0.3, 0.45)] {
            let log = x.increment(s, t).unwrap().series().log_star().unwrap();
            assert!(log.proper_forest_mass() <= 1e-10);
            BranchedLieSeries::log_of(&x.increment(s, t).unwrap()).unwrap();
        }
    }
}

#[test]
fn flow_matches_taylor_expansion_to_high_order() {
    let system = reference_system();
    let x = GeometricRoughPath::lift(PiecewiseLinearPath::smooth(2, 64, 1.0, 0.5).unwrap(), 2);
    let samples = vec![vec![0.1, -0.2], vec![-0.3, 0.4]];
    let cfg = LogOdeConfig::default();
    let gap = |s: f64, t: f64| {
        let inc = x.increment(s, t).unwrap();
        taylor_flow_gap(&system, &inc.log(), &inc, &samples, &cfg).unwrap()
    };
    let (big, small) = (gap(0.0, 0.25), gap(0.0, 0.125));
    assert!(big > small && small > 0.0);
    assert!((big / small).log2() > 2.0);
}
