//! Full nonlinear Blue-vs-Red vector field and fixed-step RK4 integration.

use crate::graph::{CrossNetwork, Graph};
use crate::wrap_angle;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {what}: {value}")]
    NonFinite { what: String, value: f64 },
    #[error("state diverged (non-finite) at t = {t}")]
    Divergence { t: f64 },
}

/// Everything defining one Blue-vs-Red system: both networks, the cross
/// network, couplings, frustrations, and per-node natural frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub blue: Graph,
    pub red: Graph,
    pub cross: CrossNetwork,
    pub sigma_b: f64,
    pub sigma_r: f64,
    pub zeta_br: f64,
    pub zeta_rb: f64,
    /// Blue frustration, wrapped into `(-pi, pi]`.
    pub phi: f64,
    /// Red frustration, wrapped into `(-pi, pi]`.
    pub psi: f64,
    pub omega: Vec<f64>,
    pub nu: Vec<f64>,
}

impl ModelConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        blue: Graph,
        red: Graph,
        cross: CrossNetwork,
        sigma_b: f64,
        sigma_r: f64,
        zeta_br: f64,
        zeta_rb: f64,
        phi: f64,
        psi: f64,
        omega: Vec<f64>,
        nu: Vec<f64>,
    ) -> Result<Self, DynamicsError> {
        if cross.n_blue() != blue.n() || cross.n_red() != red.n() {
            return Err(DynamicsError::Dimension(format!(
                "cross blocks are {}x{}, populations are {} and {}",
                cross.n_blue(),
                cross.n_red(),
                blue.n(),
                red.n()
            )));
        }
        if omega.len() != blue.n() || nu.len() != red.n() {
            return Err(DynamicsError::Dimension(format!(
                "|omega| = {}, |nu| = {}, expected {} and {}",
                omega.len(),
                nu.len(),
                blue.n(),
                red.n()
            )));
        }
        for (what, vals) in [("omega", &omega), ("nu", &nu)] {
            if let Some(&bad) = vals.iter().find(|v| !v.is_finite()) {
                return Err(DynamicsError::NonFinite {
                    what: what.into(),
                    value: bad,
                });
            }
        }
        for (what, v) in [
            ("sigma_b", sigma_b),
            ("sigma_r", sigma_r),
            ("zeta_br", zeta_br),
            ("zeta_rb", zeta_rb),
            ("phi", phi),
            ("psi", psi),
        ] {
            if !v.is_finite() {
                return Err(DynamicsError::NonFinite {
                    what: what.into(),
                    value: v,
                });
            }
        }
        Ok(ModelConfig {
            blue,
            red,
            cross,
            sigma_b,
            sigma_r,
            zeta_br,
            zeta_rb,
            phi: wrap_angle(phi),
            psi: wrap_angle(psi),
            omega,
            nu,
        })
    }

    pub fn n_blue(&self) -> usize {
        self.blue.n()
    }

    pub fn n_red(&self) -> usize {
        self.red.n()
    }

    pub fn omega_mean(&self) -> f64 {
        self.omega.iter().sum::<f64>() / self.omega.len() as f64
    }

    pub fn nu_mean(&self) -> f64 {
        self.nu.iter().sum::<f64>() / self.nu.len() as f64
    }

    /// Precompute adjacency lists for repeated RHS evaluation.
    pub fn compile(&self) -> CompiledModel<'_> {
        let n = self.n_blue();
        let m = self.n_red();
        let blue_nbrs: Vec<Vec<usize>> = (0..n).map(|i| self.blue.neighbors(i)).collect();
        let red_nbrs: Vec<Vec<usize>> = (0..m).map(|i| self.red.neighbors(i)).collect();
        let br_nbrs: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..m).filter(|&j| self.cross.a_br[[i, j]] != 0).collect())
            .collect();
        let rb_nbrs: Vec<Vec<usize>> = (0..m)
            .map(|i| (0..n).filter(|&j| self.cross.a_rb[[i, j]] != 0).collect())
            .collect();
        CompiledModel {
            cfg: self,
            blue_nbrs,
            red_nbrs,
            br_nbrs,
            rb_nbrs,
        }
    }
}

/// Phases of both populations at a time point. Angles accumulate (they are
/// never reduced mod 2*pi) so winding stays observable.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub beta: Vec<f64>,
    pub rho: Vec<f64>,
    pub t: f64,
}

impl PhaseState {
    pub fn zeros(n: usize, m: usize) -> Self {
        PhaseState {
            beta: vec![0.0; n],
            rho: vec![0.0; m],
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.beta.iter().chain(self.rho.iter()).all(|v| v.is_finite())
    }
}

/// Adjacency-list view of a [`ModelConfig`], used by the integrator.
pub struct CompiledModel<'a> {
    pub cfg: &'a ModelConfig,
    blue_nbrs: Vec<Vec<usize>>,
    red_nbrs: Vec<Vec<usize>>,
    br_nbrs: Vec<Vec<usize>>,
    rb_nbrs: Vec<Vec<usize>>,
}

impl CompiledModel<'_> {
    /// Phase velocities at `(beta, rho)` written into `out` (length N+M,
    /// Blue then Red).
    fn rhs_into(&self, beta: &[f64], rho: &[f64], out: &mut [f64]) {
        let cfg = self.cfg;
        let n = beta.len();
        for i in 0..n {
            let mut v = cfg.omega[i];
            let bi = beta[i];
            for &j in &self.blue_nbrs[i] {
                v += cfg.sigma_b * (beta[j] - bi).sin();
            }
            for &j in &self.br_nbrs[i] {
                v += cfg.zeta_br * (rho[j] + cfg.phi - bi).sin();
            }
            out[i] = v;
        }
        for i in 0..rho.len() {
            let mut v = cfg.nu[i];
            let ri = rho[i];
            for &j in &self.red_nbrs[i] {
                v += cfg.sigma_r * (rho[j] - ri).sin();
            }
            for &j in &self.rb_nbrs[i] {
                v += cfg.zeta_rb * (beta[j] + cfg.psi - ri).sin();
            }
            out[n + i] = v;
        }
    }
}

/// Right-hand sides of the equations of motion for both populations,
/// Blue entries first. Pure function of `(cfg, s)`.
pub fn rhs(cfg: &ModelConfig, s: &PhaseState) -> Vec<f64> {
    assert_eq!(s.beta.len(), cfg.n_blue(), "beta dimension");
    assert_eq!(s.rho.len(), cfg.n_red(), "rho dimension");
    let mut out = vec![0.0; cfg.n_blue() + cfg.n_red()];
    cfg.compile().rhs_into(&s.beta, &s.rho, &mut out);
    out
}

/// Integrator bookkeeping attached to a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorMeta {
    pub dt: f64,
    pub method: String,
    pub rhs_evals: u64,
}

/// Sampled solution of the equations of motion on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n_blue: usize,
    pub n_red: usize,
    pub times: Vec<f64>,
    /// One snapshot per sample: `beta` then `rho`, length `n_blue + n_red`.
    pub states: Vec<Vec<f64>>,
    pub meta: IntegratorMeta,
}

impl Trajectory {
    pub fn beta_at(&self, k: usize) -> &[f64] {
        &self.states[k][..self.n_blue]
    }

    pub fn rho_at(&self, k: usize) -> &[f64] {
        &self.states[k][self.n_blue..]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> PhaseState {
        let last = self.states.len() - 1;
        PhaseState {
            beta: self.beta_at(last).to_vec(),
            rho: self.rho_at(last).to_vec(),
            t: self.times[last],
        }
    }

    /// CSV export: `t,beta_0..beta_{N-1},rho_0..rho_{M-1}`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..self.n_blue {
            out.push_str(&format!(",beta_{i}"));
        }
        for i in 0..self.n_red {
            out.push_str(&format!(",rho_{i}"));
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t}"));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Classical fixed-step RK4 integration of [`rhs`] from `s0` to (within one
/// step of) `t_end`, sampling every `sample_every` steps. Deterministic:
/// identical inputs give bit-identical trajectories.
pub fn integrate(
    cfg: &ModelConfig,
    s0: &PhaseState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Trajectory, DynamicsError> {
    assert!(dt > 0.0, "dt must be positive");
    assert!(t_end > s0.t, "t_end must exceed the initial time");
    assert!(sample_every >= 1, "sample_every must be >= 1");
    assert_eq!(s0.beta.len(), cfg.n_blue(), "beta dimension");
    assert_eq!(s0.rho.len(), cfg.n_red(), "rho dimension");

    let model = cfg.compile();
    let n = cfg.n_blue();
    let m = cfg.n_red();
    let dim = n + m;
    let steps = ((t_end - s0.t) / dt).round().max(1.0) as u64;

    let mut y: Vec<f64> = s0.beta.iter().chain(s0.rho.iter()).copied().collect();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let mut rhs_evals = 0u64;

    let mut times = Vec::with_capacity(steps as usize / sample_every + 2);
    let mut states = Vec::with_capacity(times.capacity());
    times.push(s0.t);
    states.push(y.clone());

    for step in 0..steps {
        let t = s0.t + step as f64 * dt;
        model.rhs_into(&y[..n], &y[n..], &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        model.rhs_into(&tmp[..n], &tmp[n..], &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        model.rhs_into(&tmp[..n], &tmp[n..], &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + dt * k3[i];
        }
        model.rhs_into(&tmp[..n], &tmp[n..], &mut k4);
        rhs_evals += 4;
        for i in 0..dim {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::Divergence { t: t + dt });
        }
        if (step + 1) % sample_every as u64 == 0 {
            times.push(s0.t + (step + 1) as f64 * dt);
            states.push(y.clone());
        }
    }

    Ok(Trajectory {
        n_blue: n,
        n_red: m,
        times,
        states,
        meta: IntegratorMeta {
            dt,
            method: "rk4".into(),
            rhs_evals,
        },
    })
}

/// Outcome of the Richardson step-halving self-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceProbe {
    /// Errors at the floor of double precision; the ratio is meaningless
    /// (e.g. linear flows, which RK4 integrates exactly).
    Exact,
    /// Measured order `log2(err(dt) / err(dt/2))`.
    Order(f64),
}

/// Base step used by [`order_of_convergence_probe`] and by experiment runs
/// unless a config overrides it.
pub const DEFAULT_DT: f64 = 0.01;

/// Integrate at dt, dt/2, dt/4 and report the Richardson error ratio as a
/// measured convergence order; 4th-order accuracy lands in `[3.5, 4.5]` on
/// smooth trajectories.
pub fn order_of_convergence_probe(
    cfg: &ModelConfig,
    s0: &PhaseState,
    t_end: f64,
) -> Result<ConvergenceProbe, DynamicsError> {
    let run = |dt: f64| -> Result<Vec<f64>, DynamicsError> {
        let steps = ((t_end - s0.t) / dt).round().max(1.0) as usize;
        let traj = integrate(cfg, s0, t_end, dt, steps)?;
        let fin = traj.final_state();
        Ok(fin.beta.into_iter().chain(fin.rho).collect())
    };
    let a = run(DEFAULT_DT)?;
    let b = run(DEFAULT_DT / 2.0)?;
    let c = run(DEFAULT_DT / 4.0)?;
    let max_diff = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0f64, f64::max)
    };
    let scale = a.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let err1 = max_diff(&a, &b);
    let err2 = max_diff(&b, &c);
    // Flows the method integrates exactly differ between step sizes only by
    // accumulated rounding (~1e-13 here); genuine dt^4-limited runs sit
    // orders of magnitude above this threshold.
    if err1.max(err2) < 1e-12 * scale.max(1.0) {
        return Ok(ConvergenceProbe::Exact);
    }
    Ok(ConvergenceProbe::Order((err1 / err2).log2()))
}
