//! Linearized operators around the locking ansätze: the super-Laplacian,
//! its three-cluster (primed) variant, drift vectors, and spectral utilities
//! built on the dense eigensolvers in [`eig`].

pub mod eig;

use crate::dynamics::ModelConfig;
use crate::graph::{laplacian, RedPartition};
use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

pub use eig::{eig_general, eig_symmetric, eigenvalues, inf_norm, EigError, Spectrum};

#[derive(Debug, Error)]
pub enum LinearizedError {
    #[error(transparent)]
    Eig(#[from] EigError),
    #[error("all eigenvalues fall below the zero tolerance")]
    AllModesZero,
}

/// Linearization operator around the two-cluster ansatz, evaluated at a
/// centroid angle `alpha`: scaled population Laplacians on the diagonal plus
/// cosine-weighted cross-degree and cross-adjacency blocks.
#[derive(Debug, Clone)]
pub struct SuperLaplacian {
    pub m: Array2<f64>,
    pub alpha: f64,
    /// True when the two cosine-weighted cross couplings coincide and the
    /// cross blocks are mutual transposes, which makes `m` symmetric.
    pub symmetric_flag: bool,
}

/// Cosine factors entering the super-Laplacian blocks at angle `alpha`.
fn cross_weights(cfg: &ModelConfig, alpha: f64) -> (f64, f64) {
    (
        cfg.zeta_br * (cfg.phi - alpha).cos(),
        cfg.zeta_rb * (cfg.psi + alpha).cos(),
    )
}

pub fn build_super_laplacian(cfg: &ModelConfig, alpha: f64) -> SuperLaplacian {
    let n = cfg.n_blue();
    let m_red = cfg.n_red();
    let dim = n + m_red;
    let (c_br, c_rb) = cross_weights(cfg, alpha);

    let lb = laplacian(&cfg.blue);
    let lr = laplacian(&cfg.red);
    let a_br = cfg.cross.a_br_f64();
    let a_rb = cfg.cross.a_rb_f64();

    let mut m = Array2::<f64>::zeros((dim, dim));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = cfg.sigma_b * lb[[i, j]];
        }
        let d_br: f64 = a_br.row(i).sum();
        m[[i, i]] += c_br * d_br;
        for j in 0..m_red {
            m[[i, n + j]] = -c_br * a_br[[i, j]];
        }
    }
    for i in 0..m_red {
        for j in 0..m_red {
            m[[n + i, n + j]] = cfg.sigma_r * lr[[i, j]];
        }
        let d_rb: f64 = a_rb.row(i).sum();
        m[[n + i, n + i]] += c_rb * d_rb;
        for j in 0..n {
            m[[n + i, j]] = -c_rb * a_rb[[i, j]];
        }
    }

    let scale = cfg.zeta_br.abs().max(cfg.zeta_rb.abs()).max(1.0);
    let symmetric_flag = (c_br - c_rb).abs() <= 1e-12 * scale && cfg.cross.is_symmetric();
    SuperLaplacian {
        m,
        alpha,
        symmetric_flag,
    }
}

/// Frequency-plus-interaction drift entering the linearized equations at
/// angle `alpha`: blue entries `omega_i + zeta_br sin(phi - alpha) d_i^(BR)`,
/// red entries `nu_i + zeta_rb sin(psi + alpha) d_i^(RB)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftVector {
    pub v: Vec<f64>,
}

pub fn build_drift(cfg: &ModelConfig, alpha: f64) -> DriftVector {
    let s_br = cfg.zeta_br * (cfg.phi - alpha).sin();
    let s_rb = cfg.zeta_rb * (cfg.psi + alpha).sin();
    let mut v = Vec::with_capacity(cfg.n_blue() + cfg.n_red());
    for i in 0..cfg.n_blue() {
        let d: f64 = (0..cfg.n_red())
            .map(|j| cfg.cross.a_br[[i, j]] as f64)
            .sum();
        v.push(cfg.omega[i] + s_br * d);
    }
    for i in 0..cfg.n_red() {
        let d: f64 = (0..cfg.n_blue())
            .map(|j| cfg.cross.a_rb[[i, j]] as f64)
            .sum();
        v.push(cfg.nu[i] + s_rb * d);
    }
    DriftVector { v }
}

/// Three-cluster (primed) super-Laplacian, ordered (Blue, R1, R2), evaluated
/// at angles `alpha_br1` and `alpha_r1r2` (the Blue–R2 angle is eliminated
/// through their sum). The diagonal interaction potentials are retained.
#[derive(Debug, Clone)]
pub struct FragSuperLaplacian {
    pub m: Array2<f64>,
    pub alpha_br1: f64,
    pub alpha_r1r2: f64,
    /// Diagonals of the interaction potentials on the Blue, R1, R2 blocks.
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub v3: Vec<f64>,
    pub n_blue: usize,
    pub m1: usize,
    pub m2: usize,
    /// Red nodes in block order: R1 indices then R2 indices.
    pub red_order: Vec<usize>,
}

pub fn build_frag_super_laplacian(
    cfg: &ModelConfig,
    part: &RedPartition,
    alpha_br1: f64,
    alpha_r1r2: f64,
) -> FragSuperLaplacian {
    let n = cfg.n_blue();
    let m1 = part.m1();
    let m2 = part.m2();
    let dim = n + m1 + m2;
    let alpha_br2 = alpha_br1 + alpha_r1r2;

    let c_br1 = cfg.zeta_br * (cfg.phi - alpha_br1).cos();
    let c_br2 = cfg.zeta_br * (cfg.phi - alpha_br2).cos();
    let c_r1b = cfg.zeta_rb * (cfg.psi + alpha_br1).cos();
    let c_r2b = cfg.zeta_rb * (cfg.psi + alpha_br2).cos();
    let c_rr = cfg.sigma_r * alpha_r1r2.cos();

    let red_order: Vec<usize> = part.r1.iter().chain(part.r2.iter()).copied().collect();
    // Position of each red node inside the (R1, R2) block ordering.
    let mut pos = vec![usize::MAX; cfg.n_red()];
    for (k, &j) in red_order.iter().enumerate() {
        pos[j] = n + k;
    }
    let in_r1 = |k: usize| k < m1;

    let lb = laplacian(&cfg.blue);
    let mut m = Array2::<f64>::zeros((dim, dim));
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; m1];
    let mut v3 = vec![0.0; m2];

    // Blue block: sigma_B L^B plus V1, and the cross-adjacency columns.
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = cfg.sigma_b * lb[[i, j]];
        }
        let mut d_br1 = 0.0;
        let mut d_br2 = 0.0;
        for (k, &j) in red_order.iter().enumerate() {
            let a = cfg.cross.a_br[[i, j]] as f64;
            if a != 0.0 {
                let w = if in_r1(k) { c_br1 } else { c_br2 };
                m[[i, n + k]] = -w * a;
                if in_r1(k) {
                    d_br1 += a;
                } else {
                    d_br2 += a;
                }
            }
        }
        v1[i] = c_br1 * d_br1 + c_br2 * d_br2;
        m[[i, i]] += v1[i];
    }

    // Red blocks: internal Laplacian split across the partition plus the
    // cosine-weighted boundary terms and cross-links back to Blue.
    for (k, &jr) in red_order.iter().enumerate() {
        let row = n + k;
        // Internal red edges.
        for (k2, &jr2) in red_order.iter().enumerate() {
            if k2 == k || !cfg.red.has_edge(jr, jr2) {
                continue;
            }
            let same_side = in_r1(k) == in_r1(k2);
            let w = if same_side { cfg.sigma_r } else { c_rr };
            m[[row, n + k2]] = -w;
            m[[row, row]] += if same_side { cfg.sigma_r } else { 0.0 };
        }
        // Cross links to Blue.
        let w_cross = if in_r1(k) { c_r1b } else { c_r2b };
        let mut d_cross = 0.0;
        for i in 0..n {
            let a = cfg.cross.a_rb[[jr, i]] as f64;
            if a != 0.0 {
                m[[row, i]] = -w_cross * a;
                d_cross += a;
            }
        }
        // Boundary degree toward the other red fragment.
        let d_boundary = red_order
            .iter()
            .enumerate()
            .filter(|&(k2, &jr2)| in_r1(k2) != in_r1(k) && cfg.red.has_edge(jr, jr2))
            .count() as f64;
        let pot = w_cross * d_cross + c_rr * d_boundary;
        m[[row, row]] += pot;
        if in_r1(k) {
            v2[k] = pot;
        } else {
            v3[k - m1] = pot;
        }
    }

    FragSuperLaplacian {
        m,
        alpha_br1,
        alpha_r1r2,
        v1,
        v2,
        v3,
        n_blue: n,
        m1,
        m2,
        red_order,
    }
}

/// Default tolerance below which an eigenvalue counts as a zero mode.
pub fn default_zero_tol(m: &Array2<f64>) -> f64 {
    1e-9 * inf_norm(m).max(1.0)
}

/// The eigenvalue of smallest real part after excluding zero modes
/// (`|lambda| < zero_tol`), along with its right eigenvector.
pub fn lowest_nonzero_mode(
    s: &Spectrum,
    zero_tol: f64,
) -> Result<(Complex64, Vec<Complex64>), LinearizedError> {
    for (ev, vec) in s.eigenvalues.iter().zip(&s.eigenvectors) {
        if ev.norm() >= zero_tol {
            return Ok((*ev, vec.clone()));
        }
    }
    Err(LinearizedError::AllModesZero)
}

/// Eigenvalue-only variant of [`lowest_nonzero_mode`] for dense sweeps.
pub fn lowest_nonzero_eigenvalue(
    m: &Array2<f64>,
    zero_tol: f64,
) -> Result<Complex64, LinearizedError> {
    let evals = eigenvalues(m)?;
    evals
        .into_iter()
        .find(|ev| ev.norm() >= zero_tol)
        .ok_or(LinearizedError::AllModesZero)
}

/// Shape report for an eigenvector split at the Blue/Red boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProfile {
    pub mean_blue: f64,
    pub mean_red: f64,
    pub var_blue: f64,
    pub var_red: f64,
    /// |mean_blue - mean_red|.
    pub gap: f64,
    /// True when the between-population gap exceeds five times the larger
    /// within-population standard deviation.
    pub population_step: bool,
}

/// Classify whether an eigenvector separates the two populations as a step.
/// Works on the real parts (callers pass real-dominant vectors).
pub fn eigenvector_step_profile(evec: &[Complex64], n_blue: usize) -> StepProfile {
    let re: Vec<f64> = evec.iter().map(|c| c.re).collect();
    let stats = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
        (mean, var)
    };
    let (mean_blue, var_blue) = stats(&re[..n_blue]);
    let (mean_red, var_red) = stats(&re[n_blue..]);
    let gap = (mean_blue - mean_red).abs();
    let population_step = gap > 5.0 * var_blue.max(var_red).sqrt();
    StepProfile {
        mean_blue,
        mean_red,
        var_blue,
        var_red,
        gap,
        population_step,
    }
}

/// Per-mode ratios |f_r / lambda_r| over the free-system normal modes, where
/// `f_r` projects the drift vector at `alpha` onto mode `r`. Small ratios
/// justify the small-fluctuation expansion. Modes whose eigenvalue sits at
/// zero are excluded and reported separately by global mode index.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallnessReport {
    /// (global mode index, |f_r / lambda_r|); blue modes are 1..N-1,
    /// red modes N+1..N+M-1.
    pub ratios: Vec<(usize, f64)>,
    pub excluded: Vec<usize>,
}

impl SmallnessReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().map(|&(_, r)| r).fold(0.0, f64::max)
    }
}

pub fn smallness_criterion(cfg: &ModelConfig, alpha: f64) -> SmallnessReport {
    let n = cfg.n_blue();
    let m = cfg.n_red();
    let drift = build_drift(cfg, alpha);
    let mut ratios = Vec::new();
    let mut excluded = Vec::new();

    let mut sector = |l: Array2<f64>, sigma: f64, offset: usize, seg: &[f64], out_base: usize| {
        let (evals, evecs) = eig_symmetric(&l);
        let tol = 1e-9 * inf_norm(&l).max(1.0) * sigma.abs().max(1.0);
        for r in 1..evals.len() {
            let lam = sigma * evals[r];
            let f: f64 = (0..seg.len()).map(|i| seg[i] * evecs[[i, r]]).sum();
            let idx = out_base + r;
            if lam.abs() < tol {
                excluded.push(idx);
            } else {
                ratios.push((idx, (f / lam).abs()));
            }
        }
        let _ = offset;
    };

    sector(
        laplacian(&cfg.blue),
        cfg.sigma_b,
        0,
        &drift.v[..n],
        0,
    );
    sector(
        laplacian(&cfg.red),
        cfg.sigma_r,
        n,
        &drift.v[n..n + m],
        n,
    );
    SmallnessReport { ratios, excluded }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ModelConfig;
    use crate::graph::{
        complete_kary_tree, erdos_renyi, leaf_matching_cross, partition_red, CrossNetwork, Graph,
    };
    use ndarray::array;
    use std::f64::consts::PI;

    fn hier_vs_random_config(phi: f64, psi: f64) -> ModelConfig {
        let blue = complete_kary_tree(4, 2).unwrap();
        let red = erdos_renyi(21, 0.4, 9, true).unwrap();
        let cross = leaf_matching_cross(&blue, &red, true).unwrap();
        let omega: Vec<f64> = (0..21).map(|i| 0.2 + 0.03 * i as f64).collect();
        let nu: Vec<f64> = (0..21).map(|i| 0.25 + 0.03 * i as f64).collect();
        ModelConfig::new(blue, red, cross, 8.0, 0.5, 0.4, 0.4, phi, psi, omega, nu).unwrap()
    }

    fn single_link_config(sigma: f64, zeta: f64, phi: f64, psi: f64) -> ModelConfig {
        let blue = Graph::empty(1);
        let red = Graph::empty(1);
        let mut cross = CrossNetwork::empty(1, 1);
        cross.a_br[[0, 0]] = 1;
        cross.a_rb[[0, 0]] = 1;
        ModelConfig::new(
            blue,
            red,
            cross,
            sigma,
            sigma,
            zeta,
            zeta,
            phi,
            psi,
            vec![0.0],
            vec![0.0],
        )
        .unwrap()
    }

    #[test]
    fn super_laplacian_decoupled_is_block_diagonal() {
        let mut cfg = hier_vs_random_config(0.3, 0.0);
        cfg.zeta_br = 0.0;
        cfg.zeta_rb = 0.0;
        let sl = build_super_laplacian(&cfg, 0.7);
        let lb = laplacian(&cfg.blue);
        let lr = laplacian(&cfg.red);
        for i in 0..21 {
            for j in 0..21 {
                assert_eq!(sl.m[[i, j]], cfg.sigma_b * lb[[i, j]]);
                assert_eq!(sl.m[[21 + i, 21 + j]], cfg.sigma_r * lr[[i, j]]);
                assert_eq!(sl.m[[i, 21 + j]], 0.0);
                assert_eq!(sl.m[[21 + i, j]], 0.0);
            }
        }
    }

    #[test]
    fn super_laplacian_two_node_hand_value() {
        let cfg = single_link_config(0.0, 1.0, 0.0, 0.0);
        let sl = build_super_laplacian(&cfg, 0.0);
        assert_eq!(sl.m, array![[1.0, -1.0], [-1.0, 1.0]]);
        assert!(sl.symmetric_flag);
        let s = eig_general(&sl.m).unwrap();
        assert!((s.eigenvalues[0].re).abs() < 1e-12);
        assert!((s.eigenvalues[1].re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn super_laplacian_symmetric_flag_condition() {
        // psi = 0 and alpha chosen so cos(phi - alpha) = cos(alpha).
        let phi = 0.4;
        let cfg = hier_vs_random_config(phi, 0.0);
        let sl = build_super_laplacian(&cfg, phi / 2.0);
        assert!(sl.symmetric_flag);
        let off = build_super_laplacian(&cfg, phi / 2.0 + 0.1);
        assert!(!off.symmetric_flag);
    }

    #[test]
    fn super_laplacian_annihilates_all_ones() {
        let cfg = hier_vs_random_config(0.37, 0.11);
        for &alpha in &[-2.0, -0.3, 0.0, 0.9, 2.5] {
            let sl = build_super_laplacian(&cfg, alpha);
            let ones = ndarray::Array1::from_elem(42, 1.0);
            let prod = sl.m.dot(&ones);
            for v in prod.iter() {
                assert!(v.abs() < 1e-12, "alpha {alpha}: residual {v}");
            }
        }
    }

    #[test]
    fn taylor_lemma_positive_semidefinite_region() {
        // Symmetric case with both cosines nonnegative: spectrum >= 0.
        let cfg = hier_vs_random_config(0.5, -0.5);
        for &alpha in &[0.2, 0.5, 0.8] {
            let sl = build_super_laplacian(&cfg, alpha);
            assert!(sl.symmetric_flag);
            assert!((cfg.phi - alpha).cos() >= 0.0);
            assert!((cfg.psi + alpha).cos() >= 0.0);
            let evals = eigenvalues(&sl.m).unwrap();
            let bound = -1e-9 * inf_norm(&sl.m);
            for ev in &evals {
                assert!(ev.re >= bound, "alpha {alpha}: eigenvalue {ev}");
                assert!(ev.im.abs() < 1e-9 * inf_norm(&sl.m).max(1.0));
            }
        }
    }

    #[test]
    fn drift_vector_cases() {
        let mut cfg = hier_vs_random_config(0.3, 0.1);
        cfg.zeta_br = 0.0;
        cfg.zeta_rb = 0.0;
        let d = build_drift(&cfg, 0.4);
        let expect: Vec<f64> = cfg.omega.iter().chain(cfg.nu.iter()).copied().collect();
        assert_eq!(d.v, expect);

        // phi = alpha and psi = -alpha: both sines vanish.
        let cfg = hier_vs_random_config(0.9, -0.9);
        let d = build_drift(&cfg, 0.9);
        let expect: Vec<f64> = cfg.omega.iter().chain(cfg.nu.iter()).copied().collect();
        for (a, b) in d.v.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }

        let mut cfg = single_link_config(0.0, 2.0, 0.0, 0.0);
        cfg.phi = PI / 2.0 + 0.4;
        let d = build_drift(&cfg, 0.4);
        assert!((d.v[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn frag_builder_toy_hand_assembly() {
        // One node per cluster, single B-R1 link, single R1-R2 link,
        // unit couplings, all angles zero.
        let blue = Graph::empty(1);
        let mut red = Graph::empty(2);
        red.add_edge(0, 1);
        let mut cross = CrossNetwork::empty(1, 2);
        cross.a_br[[0, 0]] = 1;
        cross.a_rb[[0, 0]] = 1;
        let cfg = ModelConfig::new(
            blue,
            red,
            cross,
            1.0,
            1.0,
            1.0,
            1.0,
            0.0,
            0.0,
            vec![0.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let part = partition_red(&cfg.red, &cfg.cross).unwrap();
        let f = build_frag_super_laplacian(&cfg, &part, 0.0, 0.0);
        let expect = array![[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]];
        assert_eq!(f.m, expect);
        assert_eq!(f.v1, vec![1.0]);
        assert_eq!(f.v2, vec![2.0]);
        assert_eq!(f.v3, vec![1.0]);
    }

    #[test]
    fn frag_builder_degenerate_couplings() {
        let mut cfg = hier_vs_random_config(0.2, 0.0);
        cfg.zeta_br = 0.0;
        cfg.zeta_rb = 0.0;
        cfg.sigma_r = 0.0;
        let part = partition_red(&cfg.red, &cfg.cross).unwrap();
        let f = build_frag_super_laplacian(&cfg, &part, 0.3, -0.8);
        let lb = laplacian(&cfg.blue);
        for i in 0..42 {
            for j in 0..42 {
                let want = if i < 21 && j < 21 {
                    cfg.sigma_b * lb[[i, j]]
                } else {
                    0.0
                };
                assert_eq!(f.m[[i, j]], want);
            }
        }
    }

    #[test]
    fn frag_builder_quarter_angle_kills_boundary() {
        let cfg = hier_vs_random_config(0.2, 0.0);
        let part = partition_red(&cfg.red, &cfg.cross).unwrap();
        let f = build_frag_super_laplacian(&cfg, &part, 0.1, PI / 2.0);
        // All R1-R2 coupling entries vanish at alpha_r1r2 = pi/2.
        let n = 21;
        for k1 in 0..part.m1() {
            for k2 in part.m1()..(part.m1() + part.m2()) {
                assert!(f.m[[n + k1, n + k2]].abs() < 1e-12);
                assert!(f.m[[n + k2, n + k1]].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frag_builder_angle_sum_identity() {
        // Assembling with (a, b) must equal an assembly that treats the
        // Blue-R2 angle as an independent input set to a + b. The builder
        // eliminates it internally, so cross-check one matrix entry class:
        // R2 rows toward Blue use cos(psi + a + b).
        let cfg = hier_vs_random_config(0.3, 0.2);
        let part = partition_red(&cfg.red, &cfg.cross).unwrap();
        let a = 0.4;
        let b = -0.9;
        let f = build_frag_super_laplacian(&cfg, &part, a, b);
        // R2 carries no cross links in this construction, so check via V3:
        // only the sigma_r cos(alpha_r1r2) boundary part remains.
        for (k, &jr) in part.r2.iter().enumerate() {
            let boundary = part
                .r1
                .iter()
                .filter(|&&o| cfg.red.has_edge(jr, o))
                .count() as f64;
            let want = cfg.sigma_r * b.cos() * boundary;
            assert!((f.v3[k] - want).abs() < 1e-12);
        }
        let _ = a;
    }

    #[test]
    fn lowest_nonzero_mode_k5() {
        let mut a = Array2::<f64>::from_elem((5, 5), -1.0);
        for i in 0..5 {
            a[[i, i]] = 4.0;
        }
        let s = eig_general(&a).unwrap();
        let (lam, _) = lowest_nonzero_mode(&s, default_zero_tol(&a)).unwrap();
        assert!((lam.re - 5.0).abs() < 1e-9);
    }

    #[test]
    fn lowest_nonzero_mode_free_system() {
        let mut cfg = hier_vs_random_config(0.2, 0.0);
        cfg.zeta_br = 0.0;
        cfg.zeta_rb = 0.0;
        let sl = build_super_laplacian(&cfg, 0.0);
        let lam = lowest_nonzero_eigenvalue(&sl.m, default_zero_tol(&sl.m)).unwrap();
        let (eb, _) = eig_symmetric(&laplacian(&cfg.blue));
        let (er, _) = eig_symmetric(&laplacian(&cfg.red));
        let want = (cfg.sigma_b * eb[1]).min(cfg.sigma_r * er[1]);
        assert!(want > 0.0);
        assert!((lam.re - want).abs() < 1e-8, "{} vs {}", lam.re, want);
    }

    #[test]
    fn lowest_nonzero_mode_all_zero_errors() {
        let a = Array2::<f64>::zeros((3, 3));
        let s = eig_general(&a).unwrap();
        assert!(matches!(
            lowest_nonzero_mode(&s, 1e-9),
            Err(LinearizedError::AllModesZero)
        ));
    }

    #[test]
    fn step_profile_synthetic() {
        let n = 4;
        let m = 6;
        let mut v: Vec<Complex64> = Vec::new();
        for _ in 0..n {
            v.push(Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
        }
        for _ in 0..m {
            v.push(Complex64::new(-1.0 / (m as f64).sqrt(), 0.0));
        }
        let p = eigenvector_step_profile(&v, n);
        assert!(p.population_step);
        assert!(p.var_blue < 1e-15 && p.var_red < 1e-15);

        let ones: Vec<Complex64> = vec![Complex64::new(0.3, 0.0); 10];
        let p = eigenvector_step_profile(&ones, n);
        assert!(!p.population_step);
        assert!(p.gap < 1e-15);
    }

    #[test]
    fn step_profile_hier_vs_random_config() {
        let cfg = hier_vs_random_config(0.2 * PI, 0.0);
        let sl = build_super_laplacian(&cfg, 0.0);
        let s = eig_general(&sl.m).unwrap();
        let (_, evec) = lowest_nonzero_mode(&s, default_zero_tol(&sl.m)).unwrap();
        let p = eigenvector_step_profile(&evec, 21);
        assert!(p.population_step, "profile: {p:?}");
    }

    #[test]
    fn two_node_toy_crossing_matches_closed_form() {
        // N = M = 1 with one symmetric link and psi = -phi: the only nonzero
        // eigenvalue is 2 zeta cos(phi - alpha), crossing exactly at
        // alpha = phi +/- pi/2.
        let phi = 0.4;
        let mut cfg = single_link_config(0.0, 0.7, phi, -phi);
        cfg.omega = vec![0.0];
        cfg.nu = vec![0.0];
        for alpha in [-1.0, 0.1, 0.4, 1.3, 2.2] {
            let sl = build_super_laplacian(&cfg, alpha);
            let lam = lowest_nonzero_eigenvalue(&sl.m, 1e-12).unwrap();
            let want = 2.0 * 0.7 * (phi - alpha).cos();
            assert!((lam.re - want).abs() < 1e-12, "alpha {alpha}");
        }
        // Zero cross coupling: lambda_1 is independent of alpha.
        let mut free = hier_vs_random_config(0.3, 0.0);
        free.zeta_br = 0.0;
        free.zeta_rb = 0.0;
        let mut values = Vec::new();
        for alpha in [-2.0, 0.0, 1.5] {
            let sl = build_super_laplacian(&free, alpha);
            values.push(
                lowest_nonzero_eigenvalue(&sl.m, default_zero_tol(&sl.m))
                    .unwrap()
                    .re,
            );
        }
        assert!((values[0] - values[1]).abs() < 1e-9);
        assert!((values[1] - values[2]).abs() < 1e-9);
    }

    #[test]
    fn smallness_zero_frequencies() {
        let mut cfg = hier_vs_random_config(0.0, 0.0);
        cfg.zeta_br = 0.0;
        cfg.zeta_rb = 0.0;
        cfg.omega = vec![0.0; 21];
        cfg.nu = vec![0.0; 21];
        let rep = smallness_criterion(&cfg, 0.0);
        assert_eq!(rep.ratios.len(), 40);
        assert!(rep.max_ratio() < 1e-14);
        assert!(rep.excluded.is_empty());
    }

    #[test]
    fn smallness_hier_vs_random_config_below_one() {
        let cfg = hier_vs_random_config(0.2 * PI, 0.0);
        let rep = smallness_criterion(&cfg, 0.0);
        assert!(rep.max_ratio() < 1.0, "max ratio {}", rep.max_ratio());
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(48))]
        // Symmetric case psi = -phi: wherever cos(phi - alpha) >= 0 the
        // whole spectrum is nonnegative.
        #[test]
        fn prop_taylor_lemma_positivity(phi in -1.5f64..1.5, off in -1.5f64..1.5) {
            let cfg = hier_vs_random_config(phi, -phi);
            let alpha = phi + off;
            let sl = build_super_laplacian(&cfg, alpha);
            proptest::prop_assert!(sl.symmetric_flag);
            proptest::prop_assert!((cfg.phi - alpha).cos() >= 0.0);
            let evals = eigenvalues(&sl.m).unwrap();
            let bound = -1e-9 * inf_norm(&sl.m);
            for ev in &evals {
                proptest::prop_assert!(ev.re >= bound, "phi {}: {}", phi, ev);
            }
        }
    }

    #[test]
    fn smallness_scales_inversely_with_coupling() {
        let mut cfg = hier_vs_random_config(0.1, 0.0);
        cfg.zeta_br = 0.0;
        cfg.zeta_rb = 0.0;
        let base = smallness_criterion(&cfg, 0.0);
        cfg.sigma_b *= 2.0;
        let doubled = smallness_criterion(&cfg, 0.0);
        for (&(ra, va), &(rb, vb)) in base.ratios.iter().zip(&doubled.ratios) {
            assert_eq!(ra, rb);
            if ra < 21 {
                assert!((va - 2.0 * vb).abs() < 1e-10 * (1.0 + va));
            } else {
                assert!((va - vb).abs() < 1e-12 * (1.0 + va));
            }
        }
    }
}
