//! Cross-module behavior of the committed canonical instance in the
//! regimes the study design sweeps: deep locking, winding past the critical
//! frustration, and the fragmentation ladder.

use std::path::Path;
use std::sync::OnceLock;

use kuraduel::dynamics::{integrate, PhaseState};
use kuraduel::exp::config::parse;
use kuraduel::exp::runner::{realize, Realized};
use kuraduel::fixedpoint::{stable_root, two_cluster_coeffs, unstable_root};
use kuraduel::graph::partition_red;
use kuraduel::linearized::{
    build_super_laplacian, default_zero_tol, lowest_nonzero_eigenvalue,
};
use kuraduel::measures::{
    centroids, classify_fragmentation, detect_lock, order_params, FragState, FragThresholds,
};
use kuraduel::wrap_angle;

const PI: f64 = std::f64::consts::PI;

fn load(name: &str) -> Realized {
    let base = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances");
    let text = std::fs::read_to_string(base.join(name)).unwrap();
    realize(&parse(&text).unwrap(), &base, None).unwrap()
}

fn canonical() -> &'static Realized {
    static C: OnceLock<Realized> = OnceLock::new();
    C.get_or_init(|| load("canonical.cfg"))
}

fn trailing(xs: &[f64]) -> f64 {
    let w = (xs.len() / 10).max(1);
    xs[xs.len() - w..].iter().sum::<f64>() / w as f64
}

#[test]
fn locked_regime_has_high_order_and_positive_lead() {
    // Global locking of the centroid angle comes with near-perfect phase
    // order in both populations, across the locked part of the sweep.
    for (phi_pi, check_analytic) in [(0.2, true), (0.86, false)] {
        let mut model = canonical().model.clone();
        model.phi = phi_pi * PI;
        let s0 = PhaseState::zeros(21, 21);
        let traj = integrate(&model, &s0, 2000.0, 0.01, 10).unwrap();
        let order = order_params(&traj, None);
        let cent = centroids(&traj, None);
        let w = (cent.alpha.len() / 10).max(2);
        let lock = detect_lock(&cent.times, &cent.alpha, w, 1e-3, 0).unwrap();
        assert!(lock.locked, "phi = {phi_pi} pi should lock");
        assert!(trailing(&order.o_b) >= 0.99);
        assert!(trailing(&order.o_r) >= 0.99);
        let plateau = wrap_angle(trailing(&cent.alpha));
        assert!(plateau > 0.0, "Blue should hold a positive lead");
        if check_analytic {
            let analytic = stable_root(&two_cluster_coeffs(&model)).unwrap();
            assert!((plateau - analytic).abs() < 0.02);
        }
    }
}

#[test]
fn steady_roots_split_by_spectral_sign() {
    let model = &canonical().model;
    let coeffs = two_cluster_coeffs(model);
    let lam = |alpha: f64| {
        let sl = build_super_laplacian(model, alpha);
        lowest_nonzero_eigenvalue(&sl.m, default_zero_tol(&sl.m))
            .unwrap()
            .re
    };
    assert!(lam(stable_root(&coeffs).unwrap()) > 0.0);
    assert!(lam(unstable_root(&coeffs).unwrap()) < 0.0);
}

#[test]
fn nonsymmetric_crossing_is_near_but_not_at_quadrature() {
    // With psi = 0 the super-Laplacian is not symmetric, and the lambda_1
    // sign change sits close to, but not exactly at, alpha = phi +/- pi/2
    // (for this one-to-one coupling it lands at phi/2 +/- pi/2).
    let model = &canonical().model;
    let phi = model.phi;
    let lam = |alpha: f64| {
        let sl = build_super_laplacian(model, alpha);
        lowest_nonzero_eigenvalue(&sl.m, default_zero_tol(&sl.m))
            .unwrap()
            .re
    };
    for sign in [-1.0, 1.0] {
        let boundary = phi + sign * PI / 2.0;
        let (mut lo, mut hi) = (boundary - 0.5, boundary + 0.5);
        let mut flo = lam(lo);
        assert!(flo.signum() != lam(hi).signum());
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let f = lam(mid);
            if (f < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = f;
            } else {
                hi = mid;
            }
        }
        let crossing = 0.5 * (lo + hi);
        let offset = (crossing - boundary).abs();
        assert!(offset > 1e-3, "crossing should not be exactly at quadrature");
        assert!(offset < 0.35, "crossing should stay near quadrature");
        assert!(
            (crossing - (phi / 2.0 + sign * PI / 2.0)).abs() < 1e-3,
            "crossing {crossing} vs phi/2 quadrature"
        );
    }
}

#[test]
fn winding_regime_period_matches_closed_form() {
    // Past the critical frustration the centroid angle winds; the slip
    // period matches 2 pi / sqrt(-K) from the tangent-form solution.
    let mut model = canonical().model.clone();
    model.phi = 0.96 * PI;
    let coeffs = two_cluster_coeffs(&model);
    assert!(coeffs.k < 0.0);
    let closed_form = 2.0 * PI / (-coeffs.k).sqrt();
    let s0 = PhaseState::zeros(21, 21);
    let traj = integrate(&model, &s0, 2000.0, 0.01, 10).unwrap();
    let cent = centroids(&traj, None);
    let w = cent.alpha.len() / 2;
    let lock = detect_lock(&cent.times, &cent.alpha, w, 1e-3, 0).unwrap();
    assert!(!lock.locked);
    assert!(lock.winding_count >= 3);
    let period = lock.period_estimate.unwrap();
    assert!(
        (period - closed_form).abs() / closed_form < 0.05,
        "measured {period} vs closed form {closed_form}"
    );
}

#[test]
fn fragmentation_ladder_classification() {
    let f = load("fragmentation.cfg");
    let part = partition_red(&f.model.red, &f.model.cross).unwrap();
    let classify = |zeta: f64| {
        let mut m = f.model.clone();
        m.zeta_br = zeta;
        m.zeta_rb = zeta;
        let s0 = PhaseState::zeros(21, 21);
        let traj = integrate(&m, &s0, 2000.0, 0.01, 10).unwrap();
        let order = order_params(&traj, Some(&part));
        let cent = centroids(&traj, Some(&part));
        classify_fragmentation(&order, &cent, &FragThresholds::default()).unwrap()
    };
    // Three internally coherent clusters below the threshold: the combined
    // Red order parameter sits below the locked bar while R1 stays tight.
    assert_eq!(classify(3.0), FragState::Locked3Cluster);
    // Past the threshold, the R1-R2 angle winds; R2 loses coherence.
    let state = classify(4.75);
    assert!(
        state == FragState::Evaporated || state == FragState::SplayR2,
        "unexpected state {state:?}"
    );
}
