//! Cross-family behavior of the angular models.

use super::*;
use crate::mvgauss::norm_cdf;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn test_models() -> Vec<AngularModel> {
    vec![
        AngularModel::asym_logistic_exchangeable(3, 1.4, vec![0.7, 0.15, 0.15]).unwrap(),
        AngularModel::tilted_dirichlet(vec![2.0, 2.5, 30.0]).unwrap(),
        AngularModel::pairwise_beta(3, vec![2.0, 4.0, 15.0], 1.0).unwrap(),
        AngularModel::husler_reiss(3, vec![1.7, 0.7, 1.1]).unwrap(),
        AngularModel::extremal_t(3, vec![0.52, 0.71, 0.52], 3.0).unwrap(),
    ]
}

#[test]
fn exponent_respects_bounds_on_random_thresholds() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    for m in test_models() {
        for _ in 0..5 {
            let y: Vec<f64> = (0..m.d()).map(|_| rng.gen_range(0.3..5.0)).collect();
            let v = m.exponent_function(&y).unwrap();
            let lo = y.iter().map(|q| 1.0 / q).fold(f64::MIN, f64::max);
            let hi: f64 = y.iter().map(|q| 1.0 / q).sum();
            assert!(v >= lo - 1e-5 && v <= hi + 1e-5, "{}: V={v} not in [{lo}, {hi}]", m.family());
        }
    }
}

#[test]
fn exponent_is_homogeneous_of_order_minus_one() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let a = 2.5;
    for m in test_models() {
        let y: Vec<f64> = (0..m.d()).map(|_| rng.gen_range(0.5..3.0)).collect();
        let ya: Vec<f64> = y.iter().map(|v| v * a).collect();
        let v = m.exponent_function(&y).unwrap();
        let va = m.exponent_function(&ya).unwrap();
        let closed = !matches!(m, AngularModel::TiltedDirichlet(_) | AngularModel::PairwiseBeta(_));
        let tol = if closed { 1e-9 } else { 4.0 * QUAD_TOL * a };
        assert!((va - v / a).abs() < tol, "{}: {va} vs {}", m.family(), v / a);
    }
}

#[test]
fn pickands_identity_and_bounds() {
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for m in test_models() {
        let d = m.d();
        // vertex: A = 1 for every family
        let mut e1 = vec![0.0; d];
        e1[0] = 1.0;
        assert_eq!(m.pickands(&e1).unwrap(), 1.0);
        // identity (z_1 + ... + z_d) A(t) = V(z) on random z
        let closed = !matches!(m, AngularModel::TiltedDirichlet(_) | AngularModel::PairwiseBeta(_));
        let z: Vec<f64> = (0..d).map(|_| rng.gen_range(0.2..3.0)).collect();
        let zsum: f64 = z.iter().sum();
        let t: Vec<f64> = z.iter().map(|v| v / zsum).collect();
        let y: Vec<f64> = z.iter().map(|v| 1.0 / v).collect();
        let a = m.pickands(&t).unwrap();
        let v = m.exponent_function(&y).unwrap();
        let tol = if closed { 1e-9 } else { 4.0 * QUAD_TOL };
        assert!((zsum * a - v).abs() < tol * zsum.max(1.0), "{}: {} vs {v}", m.family(), zsum * a);
        let lower = t.iter().cloned().fold(f64::MIN, f64::max);
        assert!(a >= lower && a <= 1.0);
    }
}

#[test]
fn pickands_complete_dependence_is_max_coordinate() {
    let m = AngularModel::husler_reiss(3, vec![1e-6, 1e-6, 1e-6]).unwrap();
    let t = [0.5, 0.2, 0.3];
    let a = m.pickands(&t).unwrap();
    assert!((a - 0.5).abs() < 1e-4, "{a}");
}

#[test]
fn tail_dependence_limits() {
    // independence: all angular mass on the vertices, R = 0
    let indep = AngularModel::asym_logistic_exchangeable(3, 2.0, vec![0.0, 0.0, 0.0]).unwrap();
    let r = indep.tail_dependence(&[1.0, 1.0, 1.0]).unwrap();
    assert!(r.abs() < 1e-9, "{r}");
    // near-complete dependence: R(1,..,1) close to 1
    let dep = AngularModel::husler_reiss(3, vec![0.01, 0.01, 0.01]).unwrap();
    let r = dep.tail_dependence(&[1.0, 1.0, 1.0]).unwrap();
    assert!((r - 1.0).abs() < 0.02, "{r}");
}

#[test]
fn tail_dependence_is_homogeneous() {
    let m = AngularModel::husler_reiss(3, vec![0.65, 0.90, 0.98]).unwrap();
    let y = [1.0, 2.0, 1.5];
    let a = 3.0;
    let r = m.tail_dependence(&y).unwrap();
    let ra = m.tail_dependence(&y.map(|v| v * a)).unwrap();
    assert!((ra - r / a).abs() < 4.0 * QUAD_TOL, "{ra} vs {}", r / a);
}

#[test]
fn exponent_convexity_spot_checks() {
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    for m in test_models() {
        let d = m.d();
        for _ in 0..3 {
            let y1: Vec<f64> = (0..d).map(|_| rng.gen_range(0.4..3.0)).collect();
            let y2: Vec<f64> = (0..d).map(|_| rng.gen_range(0.4..3.0)).collect();
            let a: f64 = rng.gen_range(0.0..1.0);
            let mix: Vec<f64> =
                y1.iter().zip(&y2).map(|(u, v)| a * u + (1.0 - a) * v).collect();
            let lhs = m.exponent_function(&mix).unwrap();
            let rhs = a * m.exponent_function(&y1).unwrap()
                + (1.0 - a) * m.exponent_function(&y2).unwrap();
            assert!(lhs <= rhs + 1e-5, "{}: {lhs} > {rhs}", m.family());
        }
    }
}

#[test]
fn moment_condition_across_families() {
    // one representative per family with full measure decompositions
    let models: Vec<AngularModel> = vec![
        AngularModel::asym_logistic_exchangeable(3, 1.25, vec![0.5, 0.5, 0.5]).unwrap(),
        AngularModel::tilted_dirichlet(vec![0.5, 0.5, 0.5]).unwrap(),
        AngularModel::pairwise_beta(3, vec![1.0, 1.0, 1.0], 0.5).unwrap(),
        AngularModel::husler_reiss(3, vec![0.52, 0.71, 0.52]).unwrap(),
        AngularModel::extremal_t(2, vec![-0.3], 5.0).unwrap(),
    ];
    for m in models {
        for j in 0..m.d() {
            let mom = m.coordinate_moment(j, 5e-5).unwrap();
            assert!(mom.complete);
            assert!(
                (mom.value - 1.0 / m.d() as f64).abs() < 1e-3,
                "{} coord {j}: {}",
                m.family(),
                mom.value
            );
        }
    }
}

#[test]
fn et_converges_to_hr_with_variance_matched_correlations() {
    // rho = 1 - 2 lambda^2 / nu reproduces the Gaussian-kernel model as
    // nu -> infinity (the factor 2 matches the kernel variances)
    let nu = 1e6;
    let mut rng = ChaCha12Rng::seed_from_u64(31);
    for lambda in [0.3, 0.65, 1.4] {
        let hr = AngularModel::husler_reiss(2, vec![lambda]).unwrap();
        let et = AngularModel::extremal_t(2, vec![1.0 - 2.0 * lambda * lambda / nu], nu).unwrap();
        for _ in 0..20 {
            let y = [rng.gen_range(0.3..4.0), rng.gen_range(0.3..4.0)];
            let vh = hr.exponent_function(&y).unwrap();
            let vt = et.exponent_function(&y).unwrap();
            assert!((vh - vt).abs() < 1e-3, "lambda={lambda} y={y:?}: {vh} vs {vt}");
        }
    }
    // at y = (1,1) the match is analytic: V_et = 2 T_{nu+1}(lambda), V_hr = 2 Phi(lambda)
    let lambda = 0.65f64;
    let et = AngularModel::extremal_t(2, vec![1.0 - 2.0 * lambda * lambda / nu], nu).unwrap();
    let vt = et.exponent_function(&[1.0, 1.0]).unwrap();
    assert!((vt - 2.0 * norm_cdf(lambda)).abs() < 1e-5);
}

#[test]
fn density_permutation_symmetry_for_symmetric_parameters() {
    let models: Vec<AngularModel> = vec![
        AngularModel::asym_logistic_exchangeable(3, 5.75, vec![0.5, 0.5, 0.5]).unwrap(),
        AngularModel::tilted_dirichlet(vec![2.0, 2.0, 2.0]).unwrap(),
        AngularModel::pairwise_beta(3, vec![2.0, 2.0, 2.0], 4.0).unwrap(),
        AngularModel::husler_reiss(3, vec![0.3, 0.3, 0.3]).unwrap(),
        AngularModel::extremal_t(3, vec![0.95, 0.95, 0.95], 2.0).unwrap(),
    ];
    let w = [0.5, 0.3, 0.2];
    let perms: [[usize; 3]; 3] = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];
    for m in models {
        let base = m.angular_density(&w).unwrap();
        for p in perms {
            let wp = [w[p[0]], w[p[1]], w[p[2]]];
            let v = m.angular_density(&wp).unwrap();
            assert!((v - base).abs() <= 1e-10 * base.max(1.0), "{}: {v} vs {base}", m.family());
        }
    }
}

#[test]
fn face_density_dispatch() {
    let m = AngularModel::tilted_dirichlet(vec![2.0, 2.0, 2.0]).unwrap();
    // |S| = d delegates to the interior density
    let w = [0.4, 0.35, 0.25];
    let a = m.face_density(&[0, 1, 2], &w).unwrap();
    let b = m.angular_density(&w).unwrap();
    assert_eq!(a, b);
    // |S| = 1 delegates to the vertex mass
    assert_eq!(m.face_density(&[1], &[1.0]).unwrap(), 0.0);
    // intermediate faces are only defined for the asymmetric logistic
    assert!(m.face_density(&[0, 1], &[0.5, 0.5]).is_err());
}
