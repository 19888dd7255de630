//! Flat key-value experiment configs with `[section]` headers. The format is
//! line-oriented: blank lines and `#` comments are ignored, values are
//! `key = value`, and angles accept a `pi` suffix (`0.2pi`). Printing is
//! canonical, so `parse(print(cfg)) == cfg`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("config error at line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSpec {
    Tree { branching: usize, depth: usize },
    Er { n: usize, p: f64, seed: u64, connected: bool },
    /// Edge-list file, path relative to the config file.
    Edges { path: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrequencySpec {
    /// Per-node draws from the uniform distribution on [0, 1).
    Uniform { seed: u64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Zero,
    /// Uniform phases on (-pi, pi].
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSettings {
    pub lock_window_frac: f64,
    pub lock_slope_tol: f64,
    pub locked_threshold: f64,
    pub splay_threshold: f64,
    /// Points for the lambda_1(alpha) sweep over (-pi, pi].
    pub alpha_points: usize,
    /// Frustrations at which the optimizer spot-checks the numerical alpha.
    pub spot_phis: Vec<f64>,
    /// (lo, hi, step) for the frustration scan.
    pub phi_grid: (f64, f64, f64),
    /// (lo, hi, step) for the cross-coupling scan.
    pub zeta_grid: (f64, f64, f64),
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            lock_window_frac: 0.1,
            lock_slope_tol: 1e-3,
            locked_threshold: 0.99,
            splay_threshold: 0.3,
            alpha_points: 721,
            spot_phis: Vec::new(),
            phi_grid: (0.0, 0.99 * PI, 0.005 * PI),
            zeta_grid: (0.5, 5.0, 0.25),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub blue: NetworkSpec,
    pub red: NetworkSpec,
    pub cross_symmetric: bool,
    pub sigma_b: f64,
    pub sigma_r: f64,
    pub zeta_br: f64,
    pub zeta_rb: f64,
    pub phi: f64,
    pub psi: f64,
    pub omega: FrequencySpec,
    pub nu: FrequencySpec,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub init: InitSpec,
    pub analysis: AnalysisSettings,
    pub out_dir: Option<String>,
}

/// Parse a number, allowing a `pi` suffix: `0.2pi`, `pi`, `-pi`.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(prefix) = t.strip_suffix("pi") {
        let factor = match prefix.trim() {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| format!("bad number {t:?}"))?,
        };
        return Ok(factor * PI);
    }
    t.parse::<f64>().map_err(|_| format!("bad number {t:?}"))
}

/// Parse a `lo:hi:step` grid specification (numbers may carry `pi`).
pub fn parse_grid(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:step, got {s:?}"));
    }
    let lo = parse_number(parts[0])?;
    let hi = parse_number(parts[1])?;
    let step = parse_number(parts[2])?;
    if step <= 0.0 || hi < lo {
        return Err(format!("bad grid bounds in {s:?}"));
    }
    Ok((lo, hi, step))
}

/// Expand a `(lo, hi, step)` grid to explicit points (inclusive of `hi` up
/// to rounding).
pub fn grid_points((lo, hi, step): (f64, f64, f64)) -> Vec<f64> {
    let count = ((hi - lo) / step + 0.5).floor() as usize + 1;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

fn kv_map(body: &str, line0: usize) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| err(line0, format!("expected key=value, got {part:?}")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_network(s: &str, line: usize) -> Result<NetworkSpec, ConfigError> {
    let (kind, body) = s
        .split_once(':')
        .ok_or_else(|| err(line, format!("expected kind:args, got {s:?}")))?;
    match kind.trim() {
        "tree" => {
            let kv = kv_map(body, line)?;
            let get = |k: &str| {
                kv.get(k)
                    .ok_or_else(|| err(line, format!("tree spec missing {k}")))
            };
            Ok(NetworkSpec::Tree {
                branching: get("branching")?
                    .parse()
                    .map_err(|_| err(line, "bad branching"))?,
                depth: get("depth")?.parse().map_err(|_| err(line, "bad depth"))?,
            })
        }
        "er" => {
            let kv = kv_map(body, line)?;
            let get = |k: &str| {
                kv.get(k)
                    .ok_or_else(|| err(line, format!("er spec missing {k}")))
            };
            Ok(NetworkSpec::Er {
                n: get("n")?.parse().map_err(|_| err(line, "bad n"))?,
                p: parse_number(get("p")?).map_err(|m| err(line, m))?,
                seed: get("seed")?.parse().map_err(|_| err(line, "bad seed"))?,
                connected: get("connected")?
                    .parse()
                    .map_err(|_| err(line, "bad connected flag"))?,
            })
        }
        "edges" => Ok(NetworkSpec::Edges {
            path: body.trim().to_string(),
        }),
        other => Err(err(line, format!("unknown network kind {other:?}"))),
    }
}

fn parse_frequency(s: &str, line: usize) -> Result<FrequencySpec, ConfigError> {
    let (kind, body) = s
        .split_once(':')
        .ok_or_else(|| err(line, format!("expected kind:args, got {s:?}")))?;
    match kind.trim() {
        "uniform" => {
            let kv = kv_map(body, line)?;
            let seed = kv
                .get("seed")
                .ok_or_else(|| err(line, "uniform spec missing seed"))?
                .parse()
                .map_err(|_| err(line, "bad seed"))?;
            Ok(FrequencySpec::Uniform { seed })
        }
        "explicit" => {
            let vals: Result<Vec<f64>, _> = body.split(',').map(parse_number).collect();
            Ok(FrequencySpec::Explicit(vals.map_err(|m| err(line, m))?))
        }
        other => Err(err(line, format!("unknown frequency kind {other:?}"))),
    }
}

fn parse_init(s: &str, line: usize) -> Result<InitSpec, ConfigError> {
    if s.trim() == "zero" {
        return Ok(InitSpec::Zero);
    }
    if let Some(body) = s.trim().strip_prefix("random:") {
        let kv = kv_map(body, line)?;
        let seed = kv
            .get("seed")
            .ok_or_else(|| err(line, "random init missing seed"))?
            .parse()
            .map_err(|_| err(line, "bad seed"))?;
        return Ok(InitSpec::Random { seed });
    }
    Err(err(line, format!("unknown init spec {s:?}")))
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    // (value, line number) per section/key.
    let mut sections: BTreeMap<String, BTreeMap<String, (String, usize)>> = BTreeMap::new();
    let mut current = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, "unterminated section header"))?;
            current = name.trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        if current.is_empty() {
            return Err(err(line_no, "key outside any [section]"));
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected key = value, got {line:?}")))?;
        let prev = sections
            .get_mut(&current)
            .unwrap()
            .insert(k.trim().to_string(), (v.trim().to_string(), line_no));
        if prev.is_some() {
            return Err(err(line_no, format!("duplicate key {:?}", k.trim())));
        }
    }

    const KNOWN: &[(&str, &[&str])] = &[
        ("networks", &["blue", "red"]),
        ("cross", &["kind", "symmetric"]),
        ("couplings", &["sigma_b", "sigma_r", "zeta_br", "zeta_rb"]),
        ("frustrations", &["phi", "psi"]),
        ("frequencies", &["omega", "nu"]),
        ("integration", &["dt", "t_end", "sample_every", "init"]),
        (
            "analysis",
            &[
                "lock_window_frac",
                "lock_slope_tol",
                "locked_threshold",
                "splay_threshold",
                "alpha_points",
                "spot_phis",
                "phi_grid",
                "zeta_grid",
            ],
        ),
        ("output", &["dir"]),
    ];
    for (sec, keys) in &sections {
        let Some((_, allowed)) = KNOWN.iter().find(|(s, _)| s == sec) else {
            return Err(err(0, format!("unknown section [{sec}]")));
        };
        for (key, (_, line)) in keys {
            if !allowed.contains(&key.as_str()) {
                return Err(err(*line, format!("unknown key {key:?} in [{sec}]")));
            }
        }
    }

    let get = |section: &str, key: &str| -> Result<(String, usize), ConfigError> {
        sections
            .get(section)
            .and_then(|m| m.get(key))
            .cloned()
            .ok_or_else(|| err(0, format!("missing key {key:?} in section [{section}]")))
    };
    let get_opt = |section: &str, key: &str| -> Option<(String, usize)> {
        sections.get(section).and_then(|m| m.get(key)).cloned()
    };

    let (blue_s, blue_l) = get("networks", "blue")?;
    let (red_s, red_l) = get("networks", "red")?;
    let blue = parse_network(&blue_s, blue_l)?;
    let red = parse_network(&red_s, red_l)?;

    let (kind_s, kind_l) = get("cross", "kind")?;
    if kind_s != "leaf-match" {
        return Err(err(kind_l, format!("unknown cross kind {kind_s:?}")));
    }
    let (sym_s, sym_l) = get("cross", "symmetric")?;
    let cross_symmetric: bool = sym_s
        .parse()
        .map_err(|_| err(sym_l, "bad symmetric flag"))?;

    let num = |pair: (String, usize)| -> Result<f64, ConfigError> {
        parse_number(&pair.0).map_err(|m| err(pair.1, m))
    };
    let sigma_b = num(get("couplings", "sigma_b")?)?;
    let sigma_r = num(get("couplings", "sigma_r")?)?;
    let zeta_br = num(get("couplings", "zeta_br")?)?;
    let zeta_rb = num(get("couplings", "zeta_rb")?)?;
    let phi = num(get("frustrations", "phi")?)?;
    let psi = num(get("frustrations", "psi")?)?;

    let (om_s, om_l) = get("frequencies", "omega")?;
    let (nu_s, nu_l) = get("frequencies", "nu")?;
    let omega = parse_frequency(&om_s, om_l)?;
    let nu = parse_frequency(&nu_s, nu_l)?;

    let dt = num(get("integration", "dt")?)?;
    let t_end = num(get("integration", "t_end")?)?;
    let (se_s, se_l) = get("integration", "sample_every")?;
    let sample_every: usize = se_s
        .parse()
        .map_err(|_| err(se_l, "bad sample_every"))?;
    let (init_s, init_l) = get("integration", "init")?;
    let init = parse_init(&init_s, init_l)?;
    if dt <= 0.0 {
        return Err(err(0, "dt must be positive"));
    }
    if t_end <= 0.0 {
        return Err(err(0, "t_end must be positive"));
    }
    if sample_every == 0 {
        return Err(err(se_l, "sample_every must be >= 1"));
    }

    let mut analysis = AnalysisSettings::default();
    if let Some(p) = get_opt("analysis", "lock_window_frac") {
        analysis.lock_window_frac = num(p)?;
    }
    if let Some(p) = get_opt("analysis", "lock_slope_tol") {
        analysis.lock_slope_tol = num(p)?;
    }
    if let Some(p) = get_opt("analysis", "locked_threshold") {
        analysis.locked_threshold = num(p)?;
    }
    if let Some(p) = get_opt("analysis", "splay_threshold") {
        analysis.splay_threshold = num(p)?;
    }
    if let Some((s, l)) = get_opt("analysis", "alpha_points") {
        analysis.alpha_points = s.parse().map_err(|_| err(l, "bad alpha_points"))?;
    }
    if let Some((s, l)) = get_opt("analysis", "spot_phis") {
        let vals: Result<Vec<f64>, _> = s.split(',').map(parse_number).collect();
        analysis.spot_phis = vals.map_err(|m| err(l, m))?;
    }
    if let Some((s, l)) = get_opt("analysis", "phi_grid") {
        analysis.phi_grid = parse_grid(&s).map_err(|m| err(l, m))?;
    }
    if let Some((s, l)) = get_opt("analysis", "zeta_grid") {
        analysis.zeta_grid = parse_grid(&s).map_err(|m| err(l, m))?;
    }

    let out_dir = get_opt("output", "dir").map(|(s, _)| s);

    Ok(ExperimentConfig {
        blue,
        red,
        cross_symmetric,
        sigma_b,
        sigma_r,
        zeta_br,
        zeta_rb,
        phi,
        psi,
        omega,
        nu,
        dt,
        t_end,
        sample_every,
        init,
        analysis,
        out_dir,
    })
}

fn print_network(n: &NetworkSpec) -> String {
    match n {
        NetworkSpec::Tree { branching, depth } => {
            format!("tree:branching={branching},depth={depth}")
        }
        NetworkSpec::Er {
            n,
            p,
            seed,
            connected,
        } => format!("er:n={n},p={p},seed={seed},connected={connected}"),
        NetworkSpec::Edges { path } => format!("edges:{path}"),
    }
}

fn print_frequency(f: &FrequencySpec) -> String {
    match f {
        FrequencySpec::Uniform { seed } => format!("uniform:seed={seed}"),
        FrequencySpec::Explicit(vals) => {
            let body: Vec<String> = vals.iter().map(|v| format!("{v}")).collect();
            format!("explicit:{}", body.join(","))
        }
    }
}

/// Canonical text form; parsing it reproduces the config exactly.
pub fn print(cfg: &ExperimentConfig) -> String {
    let a = &cfg.analysis;
    let mut out = String::new();
    out.push_str("[networks]\n");
    out.push_str(&format!("blue = {}\n", print_network(&cfg.blue)));
    out.push_str(&format!("red = {}\n", print_network(&cfg.red)));
    out.push_str("\n[cross]\n");
    out.push_str("kind = leaf-match\n");
    out.push_str(&format!("symmetric = {}\n", cfg.cross_symmetric));
    out.push_str("\n[couplings]\n");
    out.push_str(&format!("sigma_b = {}\n", cfg.sigma_b));
    out.push_str(&format!("sigma_r = {}\n", cfg.sigma_r));
    out.push_str(&format!("zeta_br = {}\n", cfg.zeta_br));
    out.push_str(&format!("zeta_rb = {}\n", cfg.zeta_rb));
    out.push_str("\n[frustrations]\n");
    out.push_str(&format!("phi = {}\n", cfg.phi));
    out.push_str(&format!("psi = {}\n", cfg.psi));
    out.push_str("\n[frequencies]\n");
    out.push_str(&format!("omega = {}\n", print_frequency(&cfg.omega)));
    out.push_str(&format!("nu = {}\n", print_frequency(&cfg.nu)));
    out.push_str("\n[integration]\n");
    out.push_str(&format!("dt = {}\n", cfg.dt));
    out.push_str(&format!("t_end = {}\n", cfg.t_end));
    out.push_str(&format!("sample_every = {}\n", cfg.sample_every));
    let init = match &cfg.init {
        InitSpec::Zero => "zero".to_string(),
        InitSpec::Random { seed } => format!("random:seed={seed}"),
    };
    out.push_str(&format!("init = {init}\n"));
    out.push_str("\n[analysis]\n");
    out.push_str(&format!("lock_window_frac = {}\n", a.lock_window_frac));
    out.push_str(&format!("lock_slope_tol = {}\n", a.lock_slope_tol));
    out.push_str(&format!("locked_threshold = {}\n", a.locked_threshold));
    out.push_str(&format!("splay_threshold = {}\n", a.splay_threshold));
    out.push_str(&format!("alpha_points = {}\n", a.alpha_points));
    if !a.spot_phis.is_empty() {
        let body: Vec<String> = a.spot_phis.iter().map(|v| format!("{v}")).collect();
        out.push_str(&format!("spot_phis = {}\n", body.join(",")));
    }
    out.push_str(&format!(
        "phi_grid = {}:{}:{}\n",
        a.phi_grid.0, a.phi_grid.1, a.phi_grid.2
    ));
    out.push_str(&format!(
        "zeta_grid = {}:{}:{}\n",
        a.zeta_grid.0, a.zeta_grid.1, a.zeta_grid.2
    ));
    if let Some(dir) = &cfg.out_dir {
        out.push_str("\n[output]\n");
        out.push_str(&format!("dir = {dir}\n"));
    }
    out
}
