//! Synchronization order parameters, centroid-angle series, lock detection,
//! and fragmentation classification over trajectories.

use crate::dynamics::Trajectory;
use crate::graph::RedPartition;
use crate::wrap_angle;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasuresError {
    #[error("series too short for a window of {window} samples (have {len})")]
    Window { window: usize, len: usize },
}

/// Kuramoto order parameters per population (and per Red fragment when a
/// partition is supplied): the modulus of the mean unit phasor, in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSeries {
    pub times: Vec<f64>,
    pub o_b: Vec<f64>,
    pub o_r: Vec<f64>,
    pub o_r1: Option<Vec<f64>>,
    pub o_r2: Option<Vec<f64>>,
}

fn phasor_modulus(phases: impl Iterator<Item = f64>, count: usize) -> f64 {
    let (mut c, mut s) = (0.0f64, 0.0f64);
    for p in phases {
        c += p.cos();
        s += p.sin();
    }
    (c * c + s * s).sqrt() / count as f64
}

pub fn order_params(traj: &Trajectory, partition: Option<&RedPartition>) -> OrderSeries {
    let n = traj.n_blue;
    let m = traj.n_red;
    let mut o_b = Vec::with_capacity(traj.len());
    let mut o_r = Vec::with_capacity(traj.len());
    let mut o_r1 = partition.map(|_| Vec::with_capacity(traj.len()));
    let mut o_r2 = partition.map(|_| Vec::with_capacity(traj.len()));
    for k in 0..traj.len() {
        let beta = traj.beta_at(k);
        let rho = traj.rho_at(k);
        o_b.push(phasor_modulus(beta.iter().copied(), n));
        o_r.push(phasor_modulus(rho.iter().copied(), m));
        if let Some(p) = partition {
            o_r1.as_mut()
                .unwrap()
                .push(phasor_modulus(p.r1.iter().map(|&i| rho[i]), p.m1()));
            o_r2.as_mut()
                .unwrap()
                .push(phasor_modulus(p.r2.iter().map(|&i| rho[i]), p.m2()));
        }
    }
    OrderSeries {
        times: traj.times.clone(),
        o_b,
        o_r,
        o_r1,
        o_r2,
    }
}

/// Centroid angles of the three-cluster split.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCentroids {
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub alpha_br1: Vec<f64>,
    pub alpha_r1r2: Vec<f64>,
    /// Always `alpha_br1 + alpha_r1r2` by construction, so the three-angle
    /// sum identity holds identically.
    pub alpha_br2: Vec<f64>,
}

/// Population centroids: arithmetic means of the unwrapped phases (the
/// linear definition the analysis uses), with circular means kept as a
/// secondary diagnostic and wrapped copies for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidSeries {
    pub times: Vec<f64>,
    pub b: Vec<f64>,
    pub p: Vec<f64>,
    /// `B - P`, unwrapped (winding observable).
    pub alpha: Vec<f64>,
    pub alpha_wrapped: Vec<f64>,
    /// Circular means (argument of the mean phasor), wrapped.
    pub circ_b: Vec<f64>,
    pub circ_p: Vec<f64>,
    pub partition: Option<PartitionCentroids>,
}

pub fn centroids(traj: &Trajectory, partition: Option<&RedPartition>) -> CentroidSeries {
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let circ = |xs: &[f64]| {
        let (mut c, mut s) = (0.0f64, 0.0f64);
        for x in xs {
            c += x.cos();
            s += x.sin();
        }
        s.atan2(c)
    };
    let mut out = CentroidSeries {
        times: traj.times.clone(),
        b: Vec::with_capacity(traj.len()),
        p: Vec::with_capacity(traj.len()),
        alpha: Vec::with_capacity(traj.len()),
        alpha_wrapped: Vec::with_capacity(traj.len()),
        circ_b: Vec::with_capacity(traj.len()),
        circ_p: Vec::with_capacity(traj.len()),
        partition: partition.map(|_| PartitionCentroids {
            p1: Vec::with_capacity(traj.len()),
            p2: Vec::with_capacity(traj.len()),
            alpha_br1: Vec::with_capacity(traj.len()),
            alpha_r1r2: Vec::with_capacity(traj.len()),
            alpha_br2: Vec::with_capacity(traj.len()),
        }),
    };
    for k in 0..traj.len() {
        let beta = traj.beta_at(k);
        let rho = traj.rho_at(k);
        let b = mean(beta);
        let p = mean(rho);
        out.b.push(b);
        out.p.push(p);
        out.alpha.push(b - p);
        out.alpha_wrapped.push(wrap_angle(b - p));
        out.circ_b.push(circ(beta));
        out.circ_p.push(circ(rho));
        if let (Some(part), Some(pc)) = (partition, out.partition.as_mut()) {
            let p1 = part.r1.iter().map(|&i| rho[i]).sum::<f64>() / part.m1() as f64;
            let p2 = part.r2.iter().map(|&i| rho[i]).sum::<f64>() / part.m2() as f64;
            let a_br1 = b - p1;
            let a_r1r2 = p1 - p2;
            pc.p1.push(p1);
            pc.p2.push(p2);
            pc.alpha_br1.push(a_br1);
            pc.alpha_r1r2.push(a_r1r2);
            pc.alpha_br2.push(a_br1 + a_r1r2);
        }
    }
    out
}

/// Outcome of plateau/winding detection on an angle series.
#[derive(Debug, Clone, PartialEq)]
pub struct LockReport {
    pub locked: bool,
    /// Trailing-window mean, wrapped to `(-pi, pi]`.
    pub plateau: f64,
    /// Number of trailing samples inspected.
    pub window: usize,
    /// 2*pi slips inside the detection window.
    pub winding_count: usize,
    /// Max |d(alpha)/dt| (finite differences) over the window.
    pub max_slope: f64,
    /// Mean spacing of slip timestamps over the whole series, when the
    /// series winds.
    pub period_estimate: Option<f64>,
}

/// Default trailing window: the last tenth of the samples.
pub const LOCK_WINDOW_FRAC: f64 = 0.1;
/// Default slope tolerance (rad per time unit).
pub const LOCK_SLOPE_TOL: f64 = 1e-3;

/// Detect locking of an (unwrapped) angle series over the trailing window:
/// locked iff the finite-difference slope stays below `slope_tol` and at
/// most `wind_tol` slips occur in the window. A slip is a jump of the
/// wrapped series exceeding pi between consecutive samples.
pub fn detect_lock(
    times: &[f64],
    series: &[f64],
    window: usize,
    slope_tol: f64,
    wind_tol: usize,
) -> Result<LockReport, MeasuresError> {
    let len = series.len();
    if window >= len || window < 2 {
        return Err(MeasuresError::Window { window, len });
    }
    let start = len - window;
    let mut max_slope = 0.0f64;
    for k in (start + 1)..len {
        let dt = times[k] - times[k - 1];
        max_slope = max_slope.max(((series[k] - series[k - 1]) / dt).abs());
    }
    // Slip timestamps over the whole series.
    let mut slips = Vec::new();
    for k in 1..len {
        let jump = wrap_angle(series[k]) - wrap_angle(series[k - 1]);
        if jump.abs() > std::f64::consts::PI {
            slips.push(times[k]);
        }
    }
    let winding_count = slips.iter().filter(|&&t| t >= times[start]).count();
    let locked = max_slope < slope_tol && winding_count <= wind_tol;
    let plateau = wrap_angle(series[start..].iter().sum::<f64>() / window as f64);
    let period_estimate = if slips.len() >= 2 {
        Some((slips[slips.len() - 1] - slips[0]) / (slips.len() - 1) as f64)
    } else {
        None
    };
    Ok(LockReport {
        locked,
        plateau,
        window,
        winding_count,
        max_slope,
        period_estimate,
    })
}

/// Convenience wrapper using the default trailing window and slope tolerance.
pub fn detect_lock_default(times: &[f64], series: &[f64]) -> Result<LockReport, MeasuresError> {
    let window = ((series.len() as f64 * LOCK_WINDOW_FRAC) as usize).max(2);
    detect_lock(times, series, window, LOCK_SLOPE_TOL, 0)
}

/// Classification thresholds on trailing-window order parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FragThresholds {
    /// Order parameter at or above which a cluster counts as locked.
    pub locked: f64,
    /// Order parameter at or below which a fragment counts as splayed.
    pub splay: f64,
    pub window_frac: f64,
    pub slope_tol: f64,
}

impl Default for FragThresholds {
    fn default() -> Self {
        FragThresholds {
            locked: 0.99,
            splay: 0.3,
            window_frac: LOCK_WINDOW_FRAC,
            slope_tol: LOCK_SLOPE_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FragState {
    Locked2Cluster,
    Locked3Cluster,
    SplayR2,
    Evaporated,
}

impl FragState {
    pub fn as_str(&self) -> &'static str {
        match self {
            FragState::Locked2Cluster => "locked-2cluster",
            FragState::Locked3Cluster => "locked-3cluster",
            FragState::SplayR2 => "splay-R2",
            FragState::Evaporated => "evaporated",
        }
    }
}

fn trailing_mean(xs: &[f64], window: usize) -> f64 {
    let start = xs.len().saturating_sub(window);
    let slice = &xs[start..];
    slice.iter().sum::<f64>() / slice.len() as f64
}

/// State tag from trailing-window order parameters and centroid lock flags.
/// Requires partitioned order parameters and centroid angles.
pub fn classify_fragmentation(
    order: &OrderSeries,
    cent: &CentroidSeries,
    thresholds: &FragThresholds,
) -> Result<FragState, MeasuresError> {
    let o_r1 = order
        .o_r1
        .as_ref()
        .expect("classification requires a partition");
    let o_r2 = order.o_r2.as_ref().unwrap();
    let pc = cent
        .partition
        .as_ref()
        .expect("classification requires partitioned centroids");
    let window = ((order.times.len() as f64 * thresholds.window_frac) as usize).max(2);
    let alpha_lock = detect_lock(&cent.times, &cent.alpha, window, thresholds.slope_tol, 0)?;
    let r1r2_lock = detect_lock(
        &cent.times,
        &pc.alpha_r1r2,
        window,
        thresholds.slope_tol,
        0,
    )?;
    let ob = trailing_mean(&order.o_b, window);
    let or_ = trailing_mean(&order.o_r, window);
    let or1 = trailing_mean(o_r1, window);
    let or2 = trailing_mean(o_r2, window);
    let state = if alpha_lock.locked && ob >= thresholds.locked && or_ >= thresholds.locked {
        FragState::Locked2Cluster
    } else if r1r2_lock.locked && ob >= thresholds.locked && or1 >= thresholds.locked {
        FragState::Locked3Cluster
    } else if or1 >= thresholds.locked && or2 <= thresholds.splay {
        FragState::SplayR2
    } else {
        FragState::Evaporated
    };
    Ok(state)
}

/// Measures CSV: `t,O_B,O_R,O_R1,O_R2,alpha,alpha_br1,alpha_r1r2`
/// with empty cells for absent columns.
pub fn measures_csv(order: &OrderSeries, cent: &CentroidSeries) -> String {
    let mut out = String::from("t,O_B,O_R,O_R1,O_R2,alpha,alpha_br1,alpha_r1r2\n");
    for k in 0..order.times.len() {
        let (r1, r2) = match (&order.o_r1, &order.o_r2) {
            (Some(a), Some(b)) => (format!("{}", a[k]), format!("{}", b[k])),
            _ => (String::new(), String::new()),
        };
        let (ab, ar) = match &cent.partition {
            Some(pc) => (
                format!("{}", pc.alpha_br1[k]),
                format!("{}", pc.alpha_r1r2[k]),
            ),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            order.times[k], order.o_b[k], order.o_r[k], r1, r2, cent.alpha[k], ab, ar
        ));
    }
    out
}
