//! Closed-form centroid-angle solutions and stability analysis for both
//! ansätze: steady angles and discriminants, the time-dependent two-cluster
//! solution, Taylor-lemma inequalities, critical-threshold finders, and the
//! Blue frustration optimizer.

use crate::dynamics::ModelConfig;
use crate::graph::{cross_degrees, RedPartition};
use crate::linearized::{
    build_frag_super_laplacian, build_super_laplacian, default_zero_tol, lowest_nonzero_eigenvalue,
};
use crate::wrap_angle;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FixedPointError {
    #[error("no interaction: C and S both vanish, the centroid angle is undetermined")]
    NoInteraction,
    #[error("degenerate parameterization (omega_bar - nu_bar - S = 0); use the ODE oracle")]
    DegenerateDenominator,
    #[error("sigma_r * d_T^(R1R2) = 0: three-cluster coefficients undefined")]
    DivisionByZero,
    #[error("no sign change on the bracket [{0}, {1}]")]
    Bracket(f64, f64),
    #[error("no stable real solution anywhere on the grid")]
    EmptyFeasible,
    #[error(transparent)]
    Linearized(#[from] crate::linearized::LinearizedError),
}

/// Residual tolerance for accepting an angle as a genuine steady-state root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Two-cluster ansatz
// ---------------------------------------------------------------------------

/// Coefficients of the reduced centroid-angle dynamics
/// `alpha' = delta + S cos(alpha) - C sin(alpha)` and its discriminant
/// `K = C^2 + S^2 - delta^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoClusterCoefficients {
    pub c: f64,
    pub s: f64,
    /// Mean-frequency difference `omega_bar - nu_bar`.
    pub delta: f64,
    pub k: f64,
}

pub fn two_cluster_coeffs(cfg: &ModelConfig) -> TwoClusterCoefficients {
    let n = cfg.n_blue() as f64;
    let m = cfg.n_red() as f64;
    let (_, d_rb_rows, d_br_total) = cross_degrees(&cfg.cross);
    let d_rb_total: usize = d_rb_rows.iter().sum();
    let c = d_br_total as f64 * cfg.zeta_br * cfg.phi.cos() / n
        + d_rb_total as f64 * cfg.zeta_rb * cfg.psi.cos() / m;
    let s = d_br_total as f64 * cfg.zeta_br * cfg.phi.sin() / n
        - d_rb_total as f64 * cfg.zeta_rb * cfg.psi.sin() / m;
    let delta = cfg.omega_mean() - cfg.nu_mean();
    TwoClusterCoefficients {
        c,
        s,
        delta,
        k: c * c + s * s - delta * delta,
    }
}

/// Residual of the steady-state condition at `alpha`; zero at genuine roots.
pub fn steady_residual(coeffs: &TwoClusterCoefficients, alpha: f64) -> f64 {
    coeffs.delta + coeffs.s * alpha.cos() - coeffs.c * alpha.sin()
}

/// d(alpha')/d(alpha); negative at an attracting root of the scalar flow.
pub fn steady_derivative(coeffs: &TwoClusterCoefficients, alpha: f64) -> f64 {
    -coeffs.s * alpha.sin() - coeffs.c * alpha.cos()
}

/// One sign choice of the quadratic root for `sin(alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SinRoot {
    /// `K < 0`: the root is complex with this fixed real part and `+/-` the
    /// imaginary part; no steady angle exists.
    Complex { re: f64, im: f64 },
    /// Real root; `angles` holds the arcsin branch candidates that survive
    /// the residual check (empty when `|sin| > 1`).
    Real { sin_alpha: f64, angles: Vec<f64> },
}

/// Both quadratic roots of the steady-state condition, `+` branch first.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSteady {
    pub plus: SinRoot,
    pub minus: SinRoot,
}

impl AlphaSteady {
    /// All validated steady angles from both branches.
    pub fn angles(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for root in [&self.plus, &self.minus] {
            if let SinRoot::Real { angles, .. } = root {
                out.extend_from_slice(angles);
            }
        }
        out
    }
}

pub fn alpha_steady(coeffs: &TwoClusterCoefficients) -> Result<AlphaSteady, FixedPointError> {
    let r2 = coeffs.c * coeffs.c + coeffs.s * coeffs.s;
    if r2 == 0.0 {
        return Err(FixedPointError::NoInteraction);
    }
    let make = |sign: f64| -> SinRoot {
        if coeffs.k < 0.0 {
            return SinRoot::Complex {
                re: coeffs.delta * coeffs.c / r2,
                im: sign * coeffs.s * (-coeffs.k).sqrt() / r2,
            };
        }
        let sin_alpha = (coeffs.delta * coeffs.c + sign * coeffs.s * coeffs.k.sqrt()) / r2;
        let mut angles = Vec::new();
        if sin_alpha.abs() <= 1.0 {
            let a = sin_alpha.asin();
            for cand in [a, wrap_angle(std::f64::consts::PI - a)] {
                if steady_residual(coeffs, cand).abs() <= ROOT_RESIDUAL_TOL
                    && !angles.iter().any(|&x: &f64| (x - cand).abs() < 1e-9)
                {
                    angles.push(cand);
                }
            }
        }
        SinRoot::Real { sin_alpha, angles }
    };
    Ok(AlphaSteady {
        plus: make(1.0),
        minus: make(-1.0),
    })
}

/// The attracting steady angle of the scalar flow, when one exists.
pub fn stable_root(coeffs: &TwoClusterCoefficients) -> Option<f64> {
    alpha_steady(coeffs)
        .ok()?
        .angles()
        .into_iter()
        .find(|&a| steady_derivative(coeffs, a) < 0.0)
}

/// The repelling steady angle of the scalar flow, when one exists.
pub fn unstable_root(coeffs: &TwoClusterCoefficients) -> Option<f64> {
    alpha_steady(coeffs)
        .ok()?
        .angles()
        .into_iter()
        .find(|&a| steady_derivative(coeffs, a) > 0.0)
}

/// Closed-form time solution of the reduced centroid dynamics, obtained via
/// the Weierstrass substitution `u = tan(alpha / 2)`. For `K > 0` the flow
/// relaxes hyperbolically onto the attracting root; for `K < 0` it winds
/// periodically; `K = 0` is the rational borderline case.
#[derive(Debug, Clone)]
pub enum AlphaTimeSolution {
    Hyperbolic {
        sqrt_k: f64,
        u_plus: f64,
        u_minus: f64,
        /// `(u_plus - u0) / (u0 - u_minus)`; may be infinite when the
        /// initial condition already sits on the attracting root.
        e_coef: f64,
    },
    Trigonometric {
        /// `sqrt(-K)`.
        kappa: f64,
        c: f64,
        denom: f64,
        /// Integration constant fixed by the initial angle.
        shift: f64,
    },
    Rational {
        u_star: f64,
        u0: f64,
        rate: f64,
    },
}

impl AlphaTimeSolution {
    /// Evaluate the solution, wrapped to `(-pi, pi]`.
    pub fn eval(&self, t: f64) -> f64 {
        let u = match *self {
            AlphaTimeSolution::Hyperbolic {
                sqrt_k,
                u_plus,
                u_minus,
                e_coef,
            } => {
                let g = e_coef * (sqrt_k * t).exp();
                if g.is_infinite() {
                    u_minus
                } else {
                    u_minus + (u_plus - u_minus) / (g + 1.0)
                }
            }
            AlphaTimeSolution::Trigonometric {
                kappa,
                c,
                denom,
                shift,
            } => (c + kappa * (kappa * (t + shift) / 2.0).tan()) / denom,
            AlphaTimeSolution::Rational { u_star, u0, rate } => {
                u_star + (u0 - u_star) / (1.0 - rate * t)
            }
        };
        wrap_angle(2.0 * u.atan())
    }

    /// Winding period for the trigonometric regime (`K < 0`).
    pub fn period(&self) -> Option<f64> {
        match self {
            AlphaTimeSolution::Trigonometric { kappa, .. } => {
                Some(2.0 * std::f64::consts::PI / kappa)
            }
            _ => None,
        }
    }

    /// Large-time plateau for the hyperbolic regime (`K > 0`).
    pub fn plateau(&self) -> Option<f64> {
        match self {
            AlphaTimeSolution::Hyperbolic { u_minus, .. } => {
                Some(wrap_angle(2.0 * u_minus.atan()))
            }
            _ => None,
        }
    }
}

pub fn alpha_of_t(
    coeffs: &TwoClusterCoefficients,
    alpha0: f64,
) -> Result<AlphaTimeSolution, FixedPointError> {
    let denom = coeffs.delta - coeffs.s;
    let scale = coeffs.c.abs() + coeffs.s.abs() + coeffs.delta.abs();
    if denom.abs() <= 1e-14 * scale.max(1.0) {
        return Err(FixedPointError::DegenerateDenominator);
    }
    let u0 = (alpha0 / 2.0).tan();
    let k_scale = scale * scale;
    if coeffs.k > 1e-14 * k_scale {
        let sqrt_k = coeffs.k.sqrt();
        let u_plus = (coeffs.c + sqrt_k) / denom;
        let u_minus = (coeffs.c - sqrt_k) / denom;
        let e_coef = (u_plus - u0) / (u0 - u_minus);
        Ok(AlphaTimeSolution::Hyperbolic {
            sqrt_k,
            u_plus,
            u_minus,
            e_coef,
        })
    } else if coeffs.k < -1e-14 * k_scale {
        let kappa = (-coeffs.k).sqrt();
        let shift = 2.0 / kappa * ((u0 * denom - coeffs.c) / kappa).atan();
        Ok(AlphaTimeSolution::Trigonometric {
            kappa,
            c: coeffs.c,
            denom,
            shift,
        })
    } else {
        let u_star = coeffs.c / denom;
        Ok(AlphaTimeSolution::Rational {
            u_star,
            u0,
            rate: 0.5 * denom * (u0 - u_star),
        })
    }
}

/// RK4 integration of the scalar centroid ODE; the brute-force oracle for
/// [`alpha_of_t`]. Returns `(times, unwrapped alpha)`.
pub fn alpha_ode_oracle(
    coeffs: &TwoClusterCoefficients,
    alpha0: f64,
    t_end: f64,
) -> (Vec<f64>, Vec<f64>) {
    let dt = 1e-3;
    let sample_every = 10usize;
    let steps = (t_end / dt).round() as usize;
    let f = |a: f64| coeffs.delta + coeffs.s * a.cos() - coeffs.c * a.sin();
    let mut a = alpha0;
    let mut times = vec![0.0];
    let mut alphas = vec![alpha0];
    for step in 0..steps {
        let k1 = f(a);
        let k2 = f(a + 0.5 * dt * k1);
        let k3 = f(a + 0.5 * dt * k2);
        let k4 = f(a + dt * k3);
        a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (step + 1) % sample_every == 0 {
            times.push((step + 1) as f64 * dt);
            alphas.push(a);
        }
    }
    (times, alphas)
}

/// Taylor-lemma inequalities for the two-cluster ansatz:
/// `cos(phi - alpha) >= 0` and `cos(psi + alpha) >= 0`.
pub fn taylor_stability_two(cfg: &ModelConfig, alpha: f64) -> (bool, bool) {
    (
        (cfg.phi - alpha).cos() >= 0.0,
        (cfg.psi + alpha).cos() >= 0.0,
    )
}

/// Bisect `K(phi) = 0` over the bracket to `|dphi| <= 1e-6` rad with `psi`
/// held fixed: the onset of complex roots, where locking is lost.
pub fn critical_phi(
    cfg: &ModelConfig,
    psi_fixed: f64,
    bracket: (f64, f64),
) -> Result<f64, FixedPointError> {
    let k_of = |phi: f64| {
        let mut c = cfg.clone();
        c.phi = phi;
        c.psi = psi_fixed;
        two_cluster_coeffs(&c).k
    };
    let (mut lo, mut hi) = bracket;
    let (klo, khi) = (k_of(lo), k_of(hi));
    if klo == 0.0 {
        return Ok(lo);
    }
    if khi == 0.0 {
        return Ok(hi);
    }
    if klo.signum() == khi.signum() {
        return Err(FixedPointError::Bracket(lo, hi));
    }
    while (hi - lo).abs() > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let km = k_of(mid);
        if km == 0.0 {
            return Ok(mid);
        }
        if km.signum() == klo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One row of a frustration scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiScanRow {
    pub phi: f64,
    pub alpha_stable: Option<f64>,
    pub alpha_unstable: Option<f64>,
    pub k: f64,
    /// Re(lambda_1) of the super-Laplacian at the stable root.
    pub lambda1_at_stable: Option<f64>,
    /// Set when the scalar-ODE stability call and the spectral sign check
    /// disagree at the stable root; reported, never silently resolved.
    pub spectral_disagreement: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub phi_opt: f64,
    pub alpha_opt: f64,
    pub rows: Vec<PhiScanRow>,
}

/// Scan the stable steady angle across a frustration grid and return the
/// maximizer: Blue's best lead before the diminishing-return turning point.
pub fn optimize_phi(
    cfg: &ModelConfig,
    psi_fixed: f64,
    grid: &[f64],
) -> Result<OptimizeResult, FixedPointError> {
    let mut rows = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &phi in grid {
        let mut c = cfg.clone();
        c.phi = phi;
        c.psi = psi_fixed;
        let coeffs = two_cluster_coeffs(&c);
        let a_stable = stable_root(&coeffs);
        let a_unstable = unstable_root(&coeffs);
        let (lambda1, disagree) = match a_stable {
            Some(a) => {
                let sl = build_super_laplacian(&c, a);
                let tol = default_zero_tol(&sl.m);
                let lam = lowest_nonzero_eigenvalue(&sl.m, tol)?;
                (Some(lam.re), lam.re < -tol)
            }
            None => (None, false),
        };
        if let Some(a) = a_stable {
            if best.is_none_or(|(_, ba)| a > ba) {
                best = Some((phi, a));
            }
        }
        rows.push(PhiScanRow {
            phi,
            alpha_stable: a_stable,
            alpha_unstable: a_unstable,
            k: coeffs.k,
            lambda1_at_stable: lambda1,
            spectral_disagreement: disagree,
        });
    }
    let (phi_opt, alpha_opt) = best.ok_or(FixedPointError::EmptyFeasible)?;
    Ok(OptimizeResult {
        phi_opt,
        alpha_opt,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Three-cluster (fragmentation) ansatz
// ---------------------------------------------------------------------------

/// Coefficients of the reduced two-angle steady-state system after
/// eliminating the Blue–R2 angle, with discriminant `J = C1^2 + S1^2 - chi1^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeClusterCoefficients {
    pub chi1: f64,
    pub chi2: f64,
    pub c1: f64,
    pub s1: f64,
    pub c2: f64,
    pub s2: f64,
    pub j: f64,
}

/// Degree totals split across the partition:
/// `(d_T^(BR1), d_T^(R1B), d_T^(BR2), d_T^(R2B), d_T^(R1R2))`.
pub fn frag_degree_totals(
    cfg: &ModelConfig,
    part: &RedPartition,
) -> (usize, usize, usize, usize, usize) {
    let (_, _, d_br_total) = cross_degrees(&cfg.cross);
    let d_rb_total: usize = cross_degrees(&cfg.cross).1.iter().sum();
    let d_br2 = d_br_total - part.d_t_br1;
    let d_r2b = d_rb_total - part.d_t_r1b;
    (part.d_t_br1, part.d_t_r1b, d_br2, d_r2b, part.d_t_r1r2)
}

pub fn three_cluster_coeffs(
    cfg: &ModelConfig,
    part: &RedPartition,
) -> Result<ThreeClusterCoefficients, FixedPointError> {
    let n = cfg.n_blue() as f64;
    let m = cfg.n_red() as f64;
    let m1 = part.m1() as f64;
    let m2 = part.m2() as f64;
    let (d_br1, d_r1b, _, _, d_r1r2) = frag_degree_totals(cfg, part);
    let sr_d = cfg.sigma_r * d_r1r2 as f64;
    if sr_d == 0.0 {
        return Err(FixedPointError::DivisionByZero);
    }
    let omega_bar = cfg.omega_mean();
    let nu1 = part.r1.iter().map(|&i| cfg.nu[i]).sum::<f64>() / m1;
    let nu2 = part.r2.iter().map(|&i| cfg.nu[i]).sum::<f64>() / m2;

    let g1 = cfg.zeta_br * d_br1 as f64 / n;
    let g2 = cfg.zeta_rb * d_r1b as f64;
    let chi1 = (omega_bar - nu2) + m1 / m2 * (omega_bar - nu1);
    let chi2 = m1 * (nu1 - omega_bar) / sr_d;
    let c1 = m * g1 * cfg.phi.cos() / m2 + g2 * cfg.psi.cos() / m2;
    let s1 = m * g1 * cfg.phi.sin() / m2 - g2 * cfg.psi.sin() / m2;
    let c2 = m1 * g1 * cfg.phi.cos() / sr_d + g2 * cfg.psi.cos() / sr_d;
    let s2 = m1 * g1 * cfg.phi.sin() / sr_d - g2 * cfg.psi.sin() / sr_d;
    Ok(ThreeClusterCoefficients {
        chi1,
        chi2,
        c1,
        s1,
        c2,
        s2,
        j: c1 * c1 + s1 * s1 - chi1 * chi1,
    })
}

/// One sign branch of the three-cluster steady state. The quadratic pins
/// both the sine and cosine of the Blue–R1 angle, so the angle itself is
/// fully determined; the R1–R2 angle is determined through its sine only.
#[derive(Debug, Clone, PartialEq)]
pub struct FragBranch {
    /// `J < 0`: the branch is complex and carries no angles.
    pub complex: bool,
    pub sin_a_br1: Option<f64>,
    pub a_br1: Option<f64>,
    pub sin_a_r1r2: Option<f64>,
    /// False when `|sin(alpha_R1R2)| > 1`, the fragmentation onset.
    pub r1r2_exists: bool,
    /// Principal-arcsin angle (`cos >= 0` side), present while it exists.
    pub a_r1r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragAngles {
    pub plus: FragBranch,
    pub minus: FragBranch,
}

impl FragAngles {
    pub fn branches(&self) -> [&FragBranch; 2] {
        [&self.plus, &self.minus]
    }
}

pub fn frag_angles(coeffs: &ThreeClusterCoefficients) -> Result<FragAngles, FixedPointError> {
    let r2 = coeffs.c1 * coeffs.c1 + coeffs.s1 * coeffs.s1;
    if r2 == 0.0 {
        return Err(FixedPointError::NoInteraction);
    }
    let make = |sign: f64| -> FragBranch {
        if coeffs.j < 0.0 {
            return FragBranch {
                complex: true,
                sin_a_br1: None,
                a_br1: None,
                sin_a_r1r2: None,
                r1r2_exists: false,
                a_r1r2: None,
            };
        }
        let sqrt_j = coeffs.j.sqrt();
        let sin_b = (coeffs.chi1 * coeffs.c1 + sign * coeffs.s1 * sqrt_j) / r2;
        let cos_b = (-coeffs.chi1 * coeffs.s1 + sign * coeffs.c1 * sqrt_j) / r2;
        let a_br1 = sin_b.atan2(cos_b);
        let sin_r = coeffs.chi2 + coeffs.c2 * sin_b - coeffs.s2 * cos_b;
        let exists = sin_r.abs() <= 1.0;
        FragBranch {
            complex: false,
            sin_a_br1: Some(sin_b),
            a_br1: Some(a_br1),
            sin_a_r1r2: Some(sin_r),
            r1r2_exists: exists,
            a_r1r2: exists.then(|| sin_r.asin()),
        }
    };
    Ok(FragAngles {
        plus: make(1.0),
        minus: make(-1.0),
    })
}

/// Right-hand side of the reduced two-angle system (full five-term form;
/// the Blue–R2 terms vanish for partitions where R2 carries no cross links).
pub fn frag_reduced_rhs(cfg: &ModelConfig, part: &RedPartition, a: f64, b: f64) -> (f64, f64) {
    let n = cfg.n_blue() as f64;
    let m1 = part.m1() as f64;
    let m2 = part.m2() as f64;
    let (d_br1, d_r1b, d_br2, d_r2b, d_r1r2) = frag_degree_totals(cfg, part);
    let omega_bar = cfg.omega_mean();
    let nu1 = part.r1.iter().map(|&i| cfg.nu[i]).sum::<f64>() / m1;
    let nu2 = part.r2.iter().map(|&i| cfg.nu[i]).sum::<f64>() / m2;
    let f1 = omega_bar - nu1 - cfg.zeta_br * d_br1 as f64 / n * (a - cfg.phi).sin()
        - cfg.zeta_rb * d_r1b as f64 / m1 * (a + cfg.psi).sin()
        + cfg.sigma_r * d_r1r2 as f64 / m1 * b.sin()
        - cfg.zeta_br * d_br2 as f64 / n * (a + b - cfg.phi).sin();
    let f2 = nu1 - nu2 - cfg.zeta_rb * d_r2b as f64 / m2 * (a + b + cfg.psi).sin()
        + cfg.zeta_rb * d_r1b as f64 / m1 * (a + cfg.psi).sin()
        - cfg.sigma_r * d_r1r2 as f64 * (1.0 / m1 + 1.0 / m2) * b.sin();
    (f1, f2)
}

/// Linear stability of a fixed point of the reduced two-angle system:
/// trace < 0 and det > 0 of the 2x2 Jacobian.
pub fn frag_reduced_stable(cfg: &ModelConfig, part: &RedPartition, a: f64, b: f64) -> bool {
    let n = cfg.n_blue() as f64;
    let m1 = part.m1() as f64;
    let m2 = part.m2() as f64;
    let (d_br1, d_r1b, d_br2, d_r2b, d_r1r2) = frag_degree_totals(cfg, part);
    let t_br1 = cfg.zeta_br * d_br1 as f64 / n * (a - cfg.phi).cos();
    let t_r1b = cfg.zeta_rb * d_r1b as f64 / m1 * (a + cfg.psi).cos();
    let t_br2 = cfg.zeta_br * d_br2 as f64 / n * (a + b - cfg.phi).cos();
    let t_r2b = cfg.zeta_rb * d_r2b as f64 / m2 * (a + b + cfg.psi).cos();
    let t_rr1 = cfg.sigma_r * d_r1r2 as f64 / m1 * b.cos();
    let t_rr = cfg.sigma_r * d_r1r2 as f64 * (1.0 / m1 + 1.0 / m2) * b.cos();
    let j11 = -t_br1 - t_r1b - t_br2;
    let j12 = t_rr1 - t_br2;
    let j21 = t_r1b - t_r2b;
    let j22 = -t_r2b - t_rr;
    j11 + j22 < 0.0 && j11 * j22 - j12 * j21 > 0.0
}

/// Steady state selected by reduced-ODE stability, with residual validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FragSteadyState {
    pub a_br1: f64,
    pub a_r1r2: f64,
    /// +1 or -1: which quadratic branch this came from.
    pub branch_sign: f64,
}

/// Pick the branch whose angles form a dynamically stable fixed point of
/// the reduced system. Returns `None` when no branch yields real angles
/// with a stable Jacobian.
pub fn frag_stable_state(
    cfg: &ModelConfig,
    part: &RedPartition,
    angles: &FragAngles,
) -> Option<FragSteadyState> {
    for (sign, branch) in [(1.0, &angles.plus), (-1.0, &angles.minus)] {
        let (Some(a), Some(b)) = (branch.a_br1, branch.a_r1r2) else {
            continue;
        };
        let (f1, f2) = frag_reduced_rhs(cfg, part, a, b);
        let scale = 1.0 + cfg.zeta_br.abs() + cfg.zeta_rb.abs() + cfg.sigma_r.abs();
        if f1.abs() > ROOT_RESIDUAL_TOL * scale || f2.abs() > ROOT_RESIDUAL_TOL * scale {
            continue;
        }
        if frag_reduced_stable(cfg, part, a, b) {
            return Some(FragSteadyState {
                a_br1: a,
                a_r1r2: b,
                branch_sign: sign,
            });
        }
    }
    None
}

/// Taylor-lemma inequalities for the three-cluster ansatz; the Blue–R2 angle
/// in the third condition is eliminated through the angle sum.
pub fn taylor_stability_three(
    cfg: &ModelConfig,
    part: &RedPartition,
    a_br1: f64,
    a_r1r2: f64,
) -> (bool, bool, bool) {
    let (_, d_r1b, _, _, d_r1r2) = frag_degree_totals(cfg, part);
    let first = (cfg.phi - a_br1).cos() >= 0.0;
    let second = a_r1r2.cos() >= 0.0;
    let g = cfg.zeta_rb * d_r1b as f64;
    let third = if g == 0.0 {
        true
    } else {
        (cfg.psi + a_br1 + a_r1r2).cos()
            >= -(cfg.sigma_r * d_r1r2 as f64 / g) * a_r1r2.cos()
    };
    (first, second, third)
}

/// RK4 on the reduced two-angle system; the brute-force oracle validating
/// the closed-form steady angles and the onset of time dependence.
/// Returns `(times, a_br1, a_r1r2)`, both series unwrapped.
pub fn frag_centroid_ode_oracle(
    cfg: &ModelConfig,
    part: &RedPartition,
    init: (f64, f64),
    t_end: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let dt = 1e-3;
    let sample_every = 10usize;
    let steps = (t_end / dt).round() as usize;
    let (mut a, mut b) = init;
    let mut times = vec![0.0];
    let mut aa = vec![a];
    let mut bb = vec![b];
    for step in 0..steps {
        let (k1a, k1b) = frag_reduced_rhs(cfg, part, a, b);
        let (k2a, k2b) = frag_reduced_rhs(cfg, part, a + 0.5 * dt * k1a, b + 0.5 * dt * k1b);
        let (k3a, k3b) = frag_reduced_rhs(cfg, part, a + 0.5 * dt * k2a, b + 0.5 * dt * k2b);
        let (k4a, k4b) = frag_reduced_rhs(cfg, part, a + dt * k3a, b + dt * k3b);
        a += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        b += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        if (step + 1) % sample_every == 0 {
            times.push((step + 1) as f64 * dt);
            aa.push(a);
            bb.push(b);
        }
    }
    (times, aa, bb)
}

/// Bisect `|sin(alpha_R1R2)|(zeta) = 1` over `[lo, hi]`, varying both cross
/// couplings together; the branch is fixed to the one that is stable at the
/// lower end of the bracket.
pub fn critical_zeta_frag(
    cfg: &ModelConfig,
    part: &RedPartition,
    lo: f64,
    hi: f64,
) -> Result<f64, FixedPointError> {
    let at = |zeta: f64| -> Result<ThreeClusterCoefficients, FixedPointError> {
        let mut c = cfg.clone();
        c.zeta_br = zeta;
        c.zeta_rb = zeta;
        three_cluster_coeffs(&c, part)
    };
    let cfg_at = |zeta: f64| {
        let mut c = cfg.clone();
        c.zeta_br = zeta;
        c.zeta_rb = zeta;
        c
    };
    let c_lo = cfg_at(lo);
    let angles_lo = frag_angles(&at(lo)?)?;
    let state = frag_stable_state(&c_lo, part, &angles_lo).ok_or(FixedPointError::Bracket(lo, hi))?;
    let sign = state.branch_sign;
    let g = |zeta: f64| -> Result<f64, FixedPointError> {
        let co = at(zeta)?;
        let angles = frag_angles(&co)?;
        let branch = if sign > 0.0 { &angles.plus } else { &angles.minus };
        match branch.sin_a_r1r2 {
            Some(s) => Ok(s.abs() - 1.0),
            // Complex branch: treat as beyond threshold.
            None => Ok(1.0),
        }
    };
    let (mut a, mut b) = (lo, hi);
    let ga = g(a)?;
    let gb = g(b)?;
    if ga >= 0.0 || gb < 0.0 {
        return Err(FixedPointError::Bracket(lo, hi));
    }
    while b - a > 1e-9 {
        let mid = 0.5 * (a + b);
        if g(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

// ---------------------------------------------------------------------------
// Aggregated report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ansatz {
    TwoCluster,
    ThreeCluster,
}

/// One candidate fixed point with every stability verdict attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// +1 / -1 quadratic branch.
    pub branch_sign: f64,
    /// `[alpha]` for two clusters, `[a_br1, a_r1r2]` for three.
    pub angles: Vec<f64>,
    pub complex: bool,
    pub exists: bool,
    pub ode_stable: Option<bool>,
    pub lambda1: Option<f64>,
    pub spectral_stable: Option<bool>,
    pub lemma_ok: Option<bool>,
    /// ODE and spectral verdicts disagree; reported, never resolved.
    pub disagreement: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub ansatz: Ansatz,
    /// K or J.
    pub discriminant: f64,
    pub candidates: Vec<Candidate>,
}

pub fn two_cluster_report(cfg: &ModelConfig) -> Result<FixedPointReport, FixedPointError> {
    let coeffs = two_cluster_coeffs(cfg);
    let steady = alpha_steady(&coeffs)?;
    let mut candidates = Vec::new();
    for (sign, root) in [(1.0, &steady.plus), (-1.0, &steady.minus)] {
        match root {
            SinRoot::Complex { .. } => candidates.push(Candidate {
                branch_sign: sign,
                angles: vec![],
                complex: true,
                exists: false,
                ode_stable: None,
                lambda1: None,
                spectral_stable: None,
                lemma_ok: None,
                disagreement: false,
            }),
            SinRoot::Real { sin_alpha, angles } => {
                if angles.is_empty() {
                    candidates.push(Candidate {
                        branch_sign: sign,
                        angles: vec![],
                        complex: false,
                        exists: sin_alpha.abs() <= 1.0,
                        ode_stable: None,
                        lambda1: None,
                        spectral_stable: None,
                        lemma_ok: None,
                        disagreement: false,
                    });
                }
                for &a in angles {
                    let ode_stable = steady_derivative(&coeffs, a) < 0.0;
                    let sl = build_super_laplacian(cfg, a);
                    let tol = default_zero_tol(&sl.m);
                    let lam = lowest_nonzero_eigenvalue(&sl.m, tol)?;
                    let spectral_stable = lam.re >= -tol;
                    let (l1, l2) = taylor_stability_two(cfg, a);
                    candidates.push(Candidate {
                        branch_sign: sign,
                        angles: vec![a],
                        complex: false,
                        exists: true,
                        ode_stable: Some(ode_stable),
                        lambda1: Some(lam.re),
                        spectral_stable: Some(spectral_stable),
                        lemma_ok: Some(l1 && l2),
                        disagreement: ode_stable != spectral_stable,
                    });
                }
            }
        }
    }
    Ok(FixedPointReport {
        ansatz: Ansatz::TwoCluster,
        discriminant: coeffs.k,
        candidates,
    })
}

pub fn three_cluster_report(
    cfg: &ModelConfig,
    part: &RedPartition,
) -> Result<FixedPointReport, FixedPointError> {
    let coeffs = three_cluster_coeffs(cfg, part)?;
    let angles = frag_angles(&coeffs)?;
    let mut candidates = Vec::new();
    for (sign, branch) in [(1.0, &angles.plus), (-1.0, &angles.minus)] {
        if branch.complex {
            candidates.push(Candidate {
                branch_sign: sign,
                angles: vec![],
                complex: true,
                exists: false,
                ode_stable: None,
                lambda1: None,
                spectral_stable: None,
                lemma_ok: None,
                disagreement: false,
            });
            continue;
        }
        let (Some(a), Some(b)) = (branch.a_br1, branch.a_r1r2) else {
            candidates.push(Candidate {
                branch_sign: sign,
                angles: branch.a_br1.into_iter().collect(),
                complex: false,
                exists: false,
                ode_stable: None,
                lambda1: None,
                spectral_stable: None,
                lemma_ok: None,
                disagreement: false,
            });
            continue;
        };
        let ode_stable = frag_reduced_stable(cfg, part, a, b);
        let fl = build_frag_super_laplacian(cfg, part, a, b);
        let tol = default_zero_tol(&fl.m);
        let lam = lowest_nonzero_eigenvalue(&fl.m, tol)?;
        let spectral_stable = lam.re >= -tol;
        let (t1, t2, t3) = taylor_stability_three(cfg, part, a, b);
        candidates.push(Candidate {
            branch_sign: sign,
            angles: vec![a, b],
            complex: false,
            exists: true,
            ode_stable: Some(ode_stable),
            lambda1: Some(lam.re),
            spectral_stable: Some(spectral_stable),
            lemma_ok: Some(t1 && t2 && t3),
            disagreement: ode_stable != spectral_stable,
        });
    }
    Ok(FixedPointReport {
        ansatz: Ansatz::ThreeCluster,
        discriminant: coeffs.j,
        candidates,
    })
}
