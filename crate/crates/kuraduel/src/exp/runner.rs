//! Experiment orchestration: realize a config into a concrete model
//! (recording every generated input), run the requested study, and persist
//! plot-ready CSV plus a manifest that makes the run reproducible.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{integrate, ModelConfig, PhaseState, Trajectory};
use crate::exp::config::{
    grid_points, parse, parse_grid, print, ExperimentConfig, FrequencySpec, InitSpec, NetworkSpec,
};
use crate::exp::manifest::{sha256_hex, OutputRecord, RealizedInputs, RunManifest};
use crate::exp::RunError;
use crate::fixedpoint::{
    critical_zeta_frag, frag_angles, frag_stable_state, optimize_phi, three_cluster_coeffs,
    two_cluster_report, FixedPointError,
};
use crate::graph::{
    complete_kary_tree, erdos_renyi, leaf_matching_cross, partition_red, read_edge_list,
    write_edge_list, CrossNetwork, Graph, RedPartition,
};
use crate::linearized::{
    build_frag_super_laplacian, build_super_laplacian, default_zero_tol,
    lowest_nonzero_eigenvalue,
};
use crate::measures::{
    centroids, classify_fragmentation, detect_lock, measures_csv, order_params, FragThresholds,
};

/// A config made concrete: generated graphs, realized frequency vectors,
/// and the initial state.
pub struct Realized {
    pub cfg: ExperimentConfig,
    pub model: ModelConfig,
    pub partition: Option<RedPartition>,
    pub init: PhaseState,
    pub inputs: RealizedInputs,
}

fn build_network(
    spec: &NetworkSpec,
    base_dir: &Path,
    seed_override: Option<u64>,
) -> Result<Graph, RunError> {
    match spec {
        NetworkSpec::Tree { branching, depth } => complete_kary_tree(*branching, *depth)
            .map_err(|e| RunError::Config(e.to_string())),
        NetworkSpec::Er {
            n,
            p,
            seed,
            connected,
        } => {
            let seed = seed_override.unwrap_or(*seed);
            erdos_renyi(*n, *p, seed, *connected).map_err(|e| RunError::Numerical(e.to_string()))
        }
        NetworkSpec::Edges { path } => {
            let full = base_dir.join(path);
            let text = fs::read_to_string(&full)
                .map_err(|e| RunError::Config(format!("cannot read {}: {e}", full.display())))?;
            read_edge_list(&text).map_err(|e| RunError::Config(e.to_string()))
        }
    }
}

fn realize_frequencies(spec: &FrequencySpec, n: usize, seed_override: Option<u64>) -> Vec<f64> {
    match spec {
        FrequencySpec::Uniform { seed } => {
            let seed = seed_override.unwrap_or(*seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
        }
        FrequencySpec::Explicit(vals) => vals.clone(),
    }
}

/// Build the concrete model from a parsed config. `seed_override`, when set
/// (the KURADUEL_SEED escape hatch), replaces each generator seed by a
/// derived one: blue +0, red +1, omega +2, nu +3, init +4.
pub fn realize(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    seed_override: Option<u64>,
) -> Result<Realized, RunError> {
    let blue = build_network(&cfg.blue, base_dir, seed_override)?;
    let red = build_network(&cfg.red, base_dir, seed_override.map(|s| s + 1))?;
    let cross = leaf_matching_cross(&blue, &red, cfg.cross_symmetric)
        .map_err(|e| RunError::Config(e.to_string()))?;
    let omega = realize_frequencies(&cfg.omega, blue.n(), seed_override.map(|s| s + 2));
    let nu = realize_frequencies(&cfg.nu, red.n(), seed_override.map(|s| s + 3));
    let model = ModelConfig::new(
        blue,
        red,
        cross,
        cfg.sigma_b,
        cfg.sigma_r,
        cfg.zeta_br,
        cfg.zeta_rb,
        cfg.phi,
        cfg.psi,
        omega,
        nu,
    )
    .map_err(|e| RunError::Config(e.to_string()))?;
    let partition = partition_red(&model.red, &model.cross).ok();
    let init = match &cfg.init {
        InitSpec::Zero => PhaseState::zeros(model.n_blue(), model.n_red()),
        InitSpec::Random { seed } => {
            let seed = seed_override.map(|s| s + 4).unwrap_or(*seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = |n: usize| -> Vec<f64> {
                (0..n).map(|_| rng.gen_range(-PI..PI)).collect()
            };
            PhaseState {
                beta: draw(model.n_blue()),
                rho: draw(model.n_red()),
                t: 0.0,
            }
        }
    };
    let mut cross_pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..model.n_blue() {
        for j in 0..model.n_red() {
            if model.cross.a_br[[i, j]] != 0 {
                cross_pairs.push((i, j));
            }
        }
    }
    let inputs = RealizedInputs {
        blue_edges: write_edge_list(&model.blue),
        red_edges: write_edge_list(&model.red),
        cross_pairs,
        cross_symmetric: cfg.cross_symmetric,
        omega: model.omega.clone(),
        nu: model.nu.clone(),
        init_beta: init.beta.clone(),
        init_rho: init.rho.clone(),
    };
    Ok(Realized {
        cfg: cfg.clone(),
        model,
        partition,
        init,
        inputs,
    })
}

/// Rebuild a [`Realized`] straight from a manifest's recorded inputs, with
/// no RNG involved, so a rerun is bit-identical.
pub fn realize_from_manifest(m: &RunManifest) -> Result<Realized, RunError> {
    let cfg = parse(&m.config_text).map_err(|e| RunError::Config(e.to_string()))?;
    let blue =
        read_edge_list(&m.realized.blue_edges).map_err(|e| RunError::Config(e.to_string()))?;
    let red = read_edge_list(&m.realized.red_edges).map_err(|e| RunError::Config(e.to_string()))?;
    let mut cross = CrossNetwork::empty(blue.n(), red.n());
    for &(i, j) in &m.realized.cross_pairs {
        cross.a_br[[i, j]] = 1;
        if m.realized.cross_symmetric {
            cross.a_rb[[j, i]] = 1;
        }
    }
    let model = ModelConfig::new(
        blue,
        red,
        cross,
        cfg.sigma_b,
        cfg.sigma_r,
        cfg.zeta_br,
        cfg.zeta_rb,
        cfg.phi,
        cfg.psi,
        m.realized.omega.clone(),
        m.realized.nu.clone(),
    )
    .map_err(|e| RunError::Config(e.to_string()))?;
    let partition = partition_red(&model.red, &model.cross).ok();
    let init = PhaseState {
        beta: m.realized.init_beta.clone(),
        rho: m.realized.init_rho.clone(),
        t: 0.0,
    };
    Ok(Realized {
        cfg,
        model,
        partition,
        init,
        inputs: m.realized.clone(),
    })
}

/// Collects output files and finalizes the manifest. The manifest is written
/// before any result file, so a crash leaves a valid manifest flagged
/// incomplete.
struct RunSession {
    out_dir: PathBuf,
    manifest: RunManifest,
}

impl RunSession {
    fn start(
        out_dir: &Path,
        command: &str,
        grid: Option<String>,
        config_text: String,
        seed_override: Option<u64>,
        inputs: &RealizedInputs,
    ) -> Result<Self, RunError> {
        fs::create_dir_all(out_dir)?;
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            grid,
            config_hash: sha256_hex(config_text.as_bytes()),
            config_text,
            seed_override,
            complete: false,
            error: None,
            realized: inputs.clone(),
            outputs: Vec::new(),
        };
        let session = RunSession {
            out_dir: out_dir.to_path_buf(),
            manifest,
        };
        session.write_manifest()?;
        Ok(session)
    }

    fn write_manifest(&self) -> Result<(), RunError> {
        fs::write(self.out_dir.join("manifest.json"), self.manifest.to_json())?;
        Ok(())
    }

    /// Write an output file, prefixing CSVs with the config-hash comment.
    fn emit(&mut self, name: &str, body: &str) -> Result<(), RunError> {
        let content = if name.ends_with(".csv") {
            format!("# config_hash={}\n{}", self.manifest.config_hash, body)
        } else {
            body.to_string()
        };
        fs::write(self.out_dir.join(name), &content)?;
        self.manifest.outputs.push(OutputRecord {
            path: name.to_string(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }

    fn fail(mut self, msg: &str) -> Result<(), RunError> {
        self.manifest.error = Some(msg.to_string());
        self.write_manifest()
    }

    fn finish(mut self) -> Result<RunManifest, RunError> {
        self.manifest.complete = true;
        self.write_manifest()?;
        Ok(self.manifest)
    }
}

fn trailing_mean(xs: &[f64], frac: f64) -> f64 {
    let window = ((xs.len() as f64 * frac) as usize).max(1);
    let start = xs.len() - window;
    xs[start..].iter().sum::<f64>() / window as f64
}

fn fixedpoint_err(e: FixedPointError) -> RunError {
    match e {
        FixedPointError::Linearized(inner) => RunError::Numerical(inner.to_string()),
        other => RunError::Infeasible(other.to_string()),
    }
}

fn run_trajectory(r: &Realized, model: &ModelConfig) -> Result<Trajectory, RunError> {
    integrate(model, &r.init, r.cfg.t_end, r.cfg.dt, r.cfg.sample_every)
        .map_err(|e| RunError::Numerical(e.to_string()))
}

/// `simulate`: integrate the full system and emit trajectory + measures CSV.
pub fn cmd_simulate(r: &Realized, out_dir: &Path, seed_override: Option<u64>) -> Result<RunManifest, RunError> {
    let mut session = RunSession::start(
        out_dir,
        "simulate",
        None,
        print(&r.cfg),
        seed_override,
        &r.inputs,
    )?;
    let traj = match run_trajectory(r, &r.model) {
        Ok(t) => t,
        Err(e) => {
            let msg = e.to_string();
            session.fail(&msg)?;
            return Err(e);
        }
    };
    let order = order_params(&traj, r.partition.as_ref());
    let cent = centroids(&traj, r.partition.as_ref());
    session.emit("trajectory.csv", &traj.to_csv())?;
    session.emit("measures.csv", &measures_csv(&order, &cent))?;
    session.finish()
}

/// `spectrum`: sweep the lowest super-Laplacian eigenvalue over the centroid
/// angle and mark the steady-state roots.
pub fn cmd_spectrum(
    r: &Realized,
    out_dir: &Path,
    grid: Option<&str>,
    seed_override: Option<u64>,
) -> Result<RunManifest, RunError> {
    let spec = match grid {
        Some(g) => parse_grid(g).map_err(RunError::Config)?,
        None => {
            let k = r.cfg.analysis.alpha_points.max(2);
            (-PI, PI, 2.0 * PI / (k - 1) as f64)
        }
    };
    // The resolved spec is recorded in full precision so a rerun rebuilds
    // bit-identical grid points.
    let alphas = grid_points(spec);
    let grid_str = format!("{}:{}:{}", spec.0, spec.1, spec.2);
    let mut session = RunSession::start(
        out_dir,
        "spectrum",
        Some(grid_str),
        print(&r.cfg),
        seed_override,
        &r.inputs,
    )?;

    let rows: Result<Vec<(f64, f64, f64)>, RunError> = alphas
        .par_iter()
        .map(|&a| {
            let sl = build_super_laplacian(&r.model, a);
            let lam = lowest_nonzero_eigenvalue(&sl.m, default_zero_tol(&sl.m))
                .map_err(|e| RunError::Numerical(e.to_string()))?;
            Ok((a, lam.re, lam.im))
        })
        .collect();
    let mut sweep = String::from("alpha,re_lambda_1,im_lambda_1\n");
    for (a, re, im) in rows? {
        sweep.push_str(&format!("{a},{re},{im}\n"));
    }
    session.emit("spectrum_sweep.csv", &sweep)?;

    let report = two_cluster_report(&r.model).map_err(fixedpoint_err)?;
    let mut roots = String::from("alpha,re_lambda_1,im_lambda_1,stable\n");
    for c in &report.candidates {
        if let (Some(&a), Some(l)) = (c.angles.first(), c.lambda1) {
            roots.push_str(&format!(
                "{a},{l},0,{}\n",
                c.ode_stable.unwrap_or(false)
            ));
        }
    }
    session.emit("spectrum_roots.csv", &roots)?;

    // Full spectrum at the stable root (falling back to alpha = 0).
    let alpha0 = report
        .candidates
        .iter()
        .find(|c| c.ode_stable == Some(true))
        .and_then(|c| c.angles.first().copied())
        .unwrap_or(0.0);
    let sl = build_super_laplacian(&r.model, alpha0);
    let evals = crate::linearized::eigenvalues(&sl.m)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let mut full = format!("# alpha={alpha0}\nindex,re,im\n");
    for (i, ev) in evals.iter().enumerate() {
        full.push_str(&format!("{i},{},{}\n", ev.re, ev.im));
    }
    session.emit("spectrum_full.csv", &full)?;
    session.finish()
}

/// `optimize`: scan the stable steady angle over the frustration grid,
/// report the turning point, and spot-check against full simulations.
pub fn cmd_optimize(
    r: &Realized,
    out_dir: &Path,
    grid: Option<&str>,
    seed_override: Option<u64>,
) -> Result<RunManifest, RunError> {
    let spec = match grid {
        Some(g) => parse_grid(g).map_err(RunError::Config)?,
        None => r.cfg.analysis.phi_grid,
    };
    let phis = grid_points(spec);
    let mut session = RunSession::start(
        out_dir,
        "optimize",
        Some(format!("{}:{}:{}", spec.0, spec.1, spec.2)),
        print(&r.cfg),
        seed_override,
        &r.inputs,
    )?;

    let result = match optimize_phi(&r.model, r.model.psi, &phis) {
        Ok(res) => res,
        Err(e) => {
            let mapped = fixedpoint_err(e);
            session.fail(&mapped.to_string())?;
            return Err(mapped);
        }
    };
    let mut scan = String::from("phi,alpha_stable,alpha_unstable,K,lambda1_at_stable\n");
    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    for row in &result.rows {
        scan.push_str(&format!(
            "{},{},{},{},{}\n",
            row.phi,
            fmt_opt(row.alpha_stable),
            fmt_opt(row.alpha_unstable),
            row.k,
            fmt_opt(row.lambda1_at_stable)
        ));
    }
    session.emit("phi_scan.csv", &scan)?;

    // Numerical alpha at the end of a full run, for curve overlays.
    let spots: Result<Vec<(f64, f64)>, RunError> = r
        .cfg
        .analysis
        .spot_phis
        .par_iter()
        .map(|&phi| {
            let mut model = r.model.clone();
            model.phi = phi;
            let traj = run_trajectory(r, &model)?;
            let cent = centroids(&traj, None);
            Ok((phi, trailing_mean(&cent.alpha, r.cfg.analysis.lock_window_frac)))
        })
        .collect();
    let mut spot_csv = String::from("phi,alpha_numeric\n");
    for (phi, a) in spots? {
        spot_csv.push_str(&format!("{phi},{a}\n"));
    }
    session.emit("spot_checks.csv", &spot_csv)?;
    session.emit(
        "optimize_report.txt",
        &format!(
            "phi_opt = {}\nphi_opt_over_pi = {}\nalpha_opt = {}\n",
            result.phi_opt,
            result.phi_opt / PI,
            result.alpha_opt
        ),
    )?;
    session.finish()
}

struct FragRow {
    zeta: f64,
    sin_a_br1: Option<f64>,
    sin_a_r1r2: Option<f64>,
    j: f64,
    exists: bool,
    o_b: f64,
    o_r: f64,
    o_r1: f64,
    o_r2: f64,
    a_br1_num: f64,
    a_r1r2_num: f64,
    a_br1_ana: Option<f64>,
    a_r1r2_ana: Option<f64>,
    lambda1_ana: Option<f64>,
    lambda1_num: f64,
    r1r2_locked: bool,
    state: &'static str,
}

/// `fragmentation`: sweep the cross coupling, comparing analytic three-
/// cluster angles against full simulations, and report both thresholds.
pub fn cmd_fragmentation(
    r: &Realized,
    out_dir: &Path,
    grid: Option<&str>,
    seed_override: Option<u64>,
) -> Result<RunManifest, RunError> {
    let part = r
        .partition
        .as_ref()
        .ok_or_else(|| RunError::Infeasible("degenerate red partition".into()))?;
    let spec = match grid {
        Some(g) => parse_grid(g).map_err(RunError::Config)?,
        None => r.cfg.analysis.zeta_grid,
    };
    let zetas = grid_points(spec);
    let mut session = RunSession::start(
        out_dir,
        "fragmentation",
        Some(format!("{}:{}:{}", spec.0, spec.1, spec.2)),
        print(&r.cfg),
        seed_override,
        &r.inputs,
    )?;

    let thresholds = FragThresholds {
        locked: r.cfg.analysis.locked_threshold,
        splay: r.cfg.analysis.splay_threshold,
        window_frac: r.cfg.analysis.lock_window_frac,
        slope_tol: r.cfg.analysis.lock_slope_tol,
    };

    let rows: Result<Vec<FragRow>, RunError> = zetas
        .par_iter()
        .map(|&zeta| {
            let mut model = r.model.clone();
            model.zeta_br = zeta;
            model.zeta_rb = zeta;
            let coeffs = three_cluster_coeffs(&model, part).map_err(fixedpoint_err)?;
            let angles = frag_angles(&coeffs).map_err(fixedpoint_err)?;
            let stable = frag_stable_state(&model, part, &angles);
            let (sin_b, sin_r, a_ana, b_ana) = match stable {
                Some(st) => {
                    let branch = if st.branch_sign > 0.0 {
                        &angles.plus
                    } else {
                        &angles.minus
                    };
                    (
                        branch.sin_a_br1,
                        branch.sin_a_r1r2,
                        Some(st.a_br1),
                        Some(st.a_r1r2),
                    )
                }
                None => {
                    // No stable fixed point: report the + branch values.
                    (
                        angles.plus.sin_a_br1,
                        angles.plus.sin_a_r1r2,
                        angles.plus.a_br1,
                        angles.plus.a_r1r2,
                    )
                }
            };
            let exists = stable.is_some();

            let traj = run_trajectory(r, &model)?;
            let order = order_params(&traj, Some(part));
            let cent = centroids(&traj, Some(part));
            let pc = cent.partition.as_ref().unwrap();
            let frac = thresholds.window_frac;
            let a_num = trailing_mean(&pc.alpha_br1, frac);
            let b_num = trailing_mean(&pc.alpha_r1r2, frac);
            let window = ((cent.times.len() as f64 * frac) as usize).max(2);
            let lock = detect_lock(
                &cent.times,
                &pc.alpha_r1r2,
                window,
                thresholds.slope_tol,
                0,
            )
            .map_err(|e| RunError::Numerical(e.to_string()))?;
            let state = classify_fragmentation(&order, &cent, &thresholds)
                .map_err(|e| RunError::Numerical(e.to_string()))?;

            let lambda1_ana = match (a_ana, b_ana) {
                (Some(a), Some(b)) => {
                    let fl = build_frag_super_laplacian(&model, part, a, b);
                    Some(
                        lowest_nonzero_eigenvalue(&fl.m, default_zero_tol(&fl.m))
                            .map_err(|e| RunError::Numerical(e.to_string()))?
                            .re,
                    )
                }
                _ => None,
            };
            let fl_num = build_frag_super_laplacian(
                &model,
                part,
                crate::wrap_angle(a_num),
                crate::wrap_angle(b_num),
            );
            let lambda1_num = lowest_nonzero_eigenvalue(&fl_num.m, default_zero_tol(&fl_num.m))
                .map_err(|e| RunError::Numerical(e.to_string()))?
                .re;

            Ok(FragRow {
                zeta,
                sin_a_br1: sin_b,
                sin_a_r1r2: sin_r,
                j: coeffs.j,
                exists,
                o_b: trailing_mean(&order.o_b, frac),
                o_r: trailing_mean(&order.o_r, frac),
                o_r1: trailing_mean(order.o_r1.as_ref().unwrap(), frac),
                o_r2: trailing_mean(order.o_r2.as_ref().unwrap(), frac),
                a_br1_num: a_num,
                a_r1r2_num: b_num,
                a_br1_ana: a_ana,
                a_r1r2_ana: b_ana,
                lambda1_ana,
                lambda1_num,
                r1r2_locked: lock.locked,
                state: state.as_str(),
            })
        })
        .collect();
    let rows = match rows {
        Ok(rows) => rows,
        Err(e) => {
            session.fail(&e.to_string())?;
            return Err(e);
        }
    };

    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
    let mut scan = String::from("zeta,sin_a_br1,sin_a_r1r2,J,exists\n");
    let mut detail = String::from(
        "zeta,o_b,o_r,o_r1,o_r2,a_br1_num,a_r1r2_num,a_br1_ana,a_r1r2_ana,lambda1_ana,lambda1_num,r1r2_locked,state\n",
    );
    for row in &rows {
        scan.push_str(&format!(
            "{},{},{},{},{}\n",
            row.zeta,
            fmt_opt(row.sin_a_br1),
            fmt_opt(row.sin_a_r1r2),
            row.j,
            row.exists
        ));
        detail.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.zeta,
            row.o_b,
            row.o_r,
            row.o_r1,
            row.o_r2,
            row.a_br1_num,
            row.a_r1r2_num,
            fmt_opt(row.a_br1_ana),
            fmt_opt(row.a_r1r2_ana),
            fmt_opt(row.lambda1_ana),
            row.lambda1_num,
            row.r1r2_locked,
            row.state
        ));
    }
    session.emit("frag_scan.csv", &scan)?;
    session.emit("frag_detail.csv", &detail)?;

    // Analytic onset: |sin alpha_R1R2| crossing one. Numeric onset: first
    // grid point where the R1-R2 angle stops locking.
    let analytic = critical_zeta_frag(&r.model, part, zetas[0], zetas[zetas.len() - 1]).ok();
    let numeric = rows
        .windows(2)
        .find(|w| w[0].r1r2_locked && !w[1].r1r2_locked)
        .map(|w| (w[0].zeta, w[1].zeta));
    let mut report = String::new();
    report.push_str(&format!(
        "zeta_crit_analytic = {}\n",
        analytic.map(|z| format!("{z}")).unwrap_or_else(|| "none-in-range".into())
    ));
    match numeric {
        Some((lo, hi)) => report.push_str(&format!(
            "zeta_lock_loss_numeric_bracket = {lo}:{hi}\nzeta_lock_loss_numeric = {}\n",
            0.5 * (lo + hi)
        )),
        None => report.push_str("zeta_lock_loss_numeric = none-in-range\n"),
    }
    session.emit("frag_report.txt", &report)?;
    session.finish()
}

/// `rerun`: reproduce a previous run from its manifest and verify that the
/// outputs hash identically.
pub fn cmd_rerun(manifest_path: &Path, out_dir: &Path) -> Result<RunManifest, RunError> {
    let text = fs::read_to_string(manifest_path)?;
    let old = RunManifest::from_json(&text)
        .map_err(|e| RunError::Config(format!("bad manifest: {e}")))?;
    if !old.config_hash_valid() {
        return Err(RunError::Checksum(
            "manifest config text does not match its recorded hash".into(),
        ));
    }
    let realized = realize_from_manifest(&old)?;
    let grid = old.grid.as_deref();
    let new = match old.command.as_str() {
        "simulate" => cmd_simulate(&realized, out_dir, old.seed_override)?,
        "spectrum" => cmd_spectrum(&realized, out_dir, grid, old.seed_override)?,
        "optimize" => cmd_optimize(&realized, out_dir, grid, old.seed_override)?,
        "fragmentation" => cmd_fragmentation(&realized, out_dir, grid, old.seed_override)?,
        other => {
            return Err(RunError::Config(format!(
                "manifest command {other:?} is not rerunnable"
            )))
        }
    };
    for rec in &old.outputs {
        let found = new
            .outputs
            .iter()
            .find(|r| r.path == rec.path)
            .ok_or_else(|| RunError::Checksum(format!("output {} missing in rerun", rec.path)))?;
        if found.sha256 != rec.sha256 {
            return Err(RunError::Checksum(format!(
                "output {} differs from the recorded run",
                rec.path
            )));
        }
    }
    Ok(new)
}
