//! Blue/Red network construction: undirected population graphs, the
//! Blue↔Red cross-network, Laplacians, degree bookkeeping, and the
//! edge-list text format.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node count overflows for branching {branching}, depth {depth}")]
    Size { branching: usize, depth: usize },
    #[error("could not sample a connected graph in {0} attempts")]
    RetryExhausted(usize),
    #[error("red network too small: need at least {needed} nodes, got {got}")]
    Dimension { needed: usize, got: usize },
    #[error("degenerate red partition: R1 has {m1} nodes, R2 has {m2}")]
    DegeneratePartition { m1: usize, m2: usize },
    #[error("edge list parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Undirected simple graph stored as a dense symmetric 0/1 adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    adjacency: Array2<u8>,
}

impl Graph {
    /// Graph on `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adjacency: Array2::zeros((n, n)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[[u, v]] != 0
    }

    /// Insert the undirected edge `{u, v}`. Self-loops are rejected by debug
    /// assertion; duplicates are idempotent.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v, "self-loop {u}");
        self.adjacency[[u, v]] = 1;
        self.adjacency[[v, u]] = 1;
    }

    /// Edges as sorted `(u, v)` pairs with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn degree(&self, u: usize) -> usize {
        (0..self.n).filter(|&v| self.has_edge(u, v)).count()
    }

    /// Per-node degree vector (row sums of the adjacency matrix).
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|u| self.degree(u)).collect()
    }

    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        (0..self.n).filter(|&v| self.has_edge(u, v)).collect()
    }

    /// Dense f64 copy of the adjacency matrix.
    pub fn adjacency_f64(&self) -> Array2<f64> {
        self.adjacency.mapv(|x| x as f64)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    pub fn connected_components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut comps = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            comps += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                for v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        comps
    }

    /// Leaves under the breadth-first tree numbering used by
    /// [`complete_kary_tree`]: children always carry larger indices than their
    /// parent, so a node is a leaf exactly when all its neighbors are smaller.
    /// An isolated node counts as a leaf (one-node tree).
    pub fn tree_leaves(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&u| self.neighbors(u).iter().all(|&v| v < u))
            .collect()
    }
}

/// Graph Laplacian `L = D - A`.
pub fn laplacian(g: &Graph) -> Array2<f64> {
    let n = g.n();
    let mut l = -g.adjacency_f64();
    for (u, d) in g.degrees().into_iter().enumerate() {
        l[[u, u]] = d as f64;
    }
    debug_assert_eq!(l.nrows(), n);
    l
}

/// Complete `branching`-ary tree of the given depth with breadth-first node
/// numbering (root = 0, children of `i` are `b*i + 1 ..= b*i + b`).
pub fn complete_kary_tree(branching: usize, depth: usize) -> Result<Graph, GraphError> {
    assert!(branching >= 1, "branching must be >= 1");
    let size_err = || GraphError::Size { branching, depth };
    // Node count: (b^(depth+1) - 1) / (b - 1), or depth + 1 for b = 1.
    let n: usize = if branching == 1 {
        depth.checked_add(1).ok_or_else(size_err)?
    } else {
        let mut total: usize = 0;
        let mut level: usize = 1;
        for _ in 0..=depth {
            total = total.checked_add(level).ok_or_else(size_err)?;
            level = level.checked_mul(branching).ok_or_else(size_err)?;
        }
        total
    };
    // Guard dense allocation as well.
    n.checked_mul(n).ok_or_else(size_err)?;
    let mut g = Graph::empty(n);
    for i in 0..n {
        for c in 1..=branching {
            let child = branching * i + c;
            if child >= n {
                break;
            }
            g.add_edge(i, child);
        }
    }
    Ok(g)
}

/// Default retry cap when conditioning an Erdős–Rényi draw on connectivity.
pub const ER_RETRY_CAP: usize = 1000;

/// Erdős–Rényi G(n, p): each unordered pair is linked independently with
/// probability `p`. Deterministic for a fixed seed. With `require_connected`,
/// resamples on a fresh RNG substream per attempt up to [`ER_RETRY_CAP`].
pub fn erdos_renyi(
    n: usize,
    p: f64,
    seed: u64,
    require_connected: bool,
) -> Result<Graph, GraphError> {
    erdos_renyi_capped(n, p, seed, require_connected, ER_RETRY_CAP)
}

pub fn erdos_renyi_capped(
    n: usize,
    p: f64,
    seed: u64,
    require_connected: bool,
    retry_cap: usize,
) -> Result<Graph, GraphError> {
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    let attempts = if require_connected { retry_cap } else { 1 };
    for attempt in 0..attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(p) {
                    g.add_edge(u, v);
                }
            }
        }
        if !require_connected || g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::RetryExhausted(retry_cap))
}

/// Directed cross-network blocks between the populations: `a_br` is N×M
/// (Blue→Red links), `a_rb` is M×N (Red→Blue).
#[derive(Debug, Clone, PartialEq)]
pub struct CrossNetwork {
    pub a_br: Array2<u8>,
    pub a_rb: Array2<u8>,
}

impl CrossNetwork {
    pub fn empty(n: usize, m: usize) -> Self {
        CrossNetwork {
            a_br: Array2::zeros((n, m)),
            a_rb: Array2::zeros((m, n)),
        }
    }

    pub fn n_blue(&self) -> usize {
        self.a_br.nrows()
    }

    pub fn n_red(&self) -> usize {
        self.a_br.ncols()
    }

    /// True when `a_rb` is exactly the transpose of `a_br`.
    pub fn is_symmetric(&self) -> bool {
        self.a_rb == self.a_br.t()
    }

    pub fn a_br_f64(&self) -> Array2<f64> {
        self.a_br.mapv(|x| x as f64)
    }

    pub fn a_rb_f64(&self) -> Array2<f64> {
        self.a_rb.mapv(|x| x as f64)
    }
}

/// One-to-one coupling of Blue leaves to identically indexed Red nodes.
/// `a_br[i][i] = 1` exactly for each leaf `i` of the Blue tree; the symmetric
/// flag mirrors the links back as `a_rb = a_br^T`.
pub fn leaf_matching_cross(
    blue: &Graph,
    red: &Graph,
    symmetric: bool,
) -> Result<CrossNetwork, GraphError> {
    let leaves = blue.tree_leaves();
    if let Some(&max_leaf) = leaves.iter().max() {
        if max_leaf >= red.n() {
            return Err(GraphError::Dimension {
                needed: max_leaf + 1,
                got: red.n(),
            });
        }
    }
    let mut x = CrossNetwork::empty(blue.n(), red.n());
    for &i in &leaves {
        x.a_br[[i, i]] = 1;
        if symmetric {
            x.a_rb[[i, i]] = 1;
        }
    }
    Ok(x)
}

/// Row sums of both cross blocks plus the grand total of `a_br`.
pub fn cross_degrees(x: &CrossNetwork) -> (Vec<usize>, Vec<usize>, usize) {
    let d_br: Vec<usize> = x
        .a_br
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|&v| v as usize).sum())
        .collect();
    let d_rb: Vec<usize> = x
        .a_rb
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|&v| v as usize).sum())
        .collect();
    let total = d_br.iter().sum();
    (d_br, d_rb, total)
}

/// Partition of the Red population into the cross-linked part R1 and the
/// remainder R2, with the boundary degree totals the three-cluster analysis
/// needs. Index lists are sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct RedPartition {
    pub r1: Vec<usize>,
    pub r2: Vec<usize>,
    /// Number of Red-internal edges between R1 and R2.
    pub d_t_r1r2: usize,
    /// Total Blue→R1 links.
    pub d_t_br1: usize,
    /// Total R1→Blue links.
    pub d_t_r1b: usize,
}

impl RedPartition {
    pub fn m1(&self) -> usize {
        self.r1.len()
    }

    pub fn m2(&self) -> usize {
        self.r2.len()
    }
}

/// Split Red into R1 = nodes with at least one incoming or outgoing cross
/// link, R2 = the rest. Errors when either side is empty (the three-cluster
/// analysis is undefined there).
pub fn partition_red(red: &Graph, x: &CrossNetwork) -> Result<RedPartition, GraphError> {
    let m = red.n();
    assert_eq!(x.n_red(), m, "cross network red dimension mismatch");
    let n = x.n_blue();
    let mut linked = vec![false; m];
    for (j, flag) in linked.iter_mut().enumerate() {
        for i in 0..n {
            if x.a_br[[i, j]] != 0 || x.a_rb[[j, i]] != 0 {
                *flag = true;
                break;
            }
        }
    }
    let r1: Vec<usize> = (0..m).filter(|&j| linked[j]).collect();
    let r2: Vec<usize> = (0..m).filter(|&j| !linked[j]).collect();
    if r1.is_empty() || r2.is_empty() {
        return Err(GraphError::DegeneratePartition {
            m1: r1.len(),
            m2: r2.len(),
        });
    }
    let mut d_t_r1r2 = 0;
    for &a in &r1 {
        for &b in &r2 {
            if red.has_edge(a, b) {
                d_t_r1r2 += 1;
            }
        }
    }
    let mut d_t_br1 = 0;
    let mut d_t_r1b = 0;
    for &j in &r1 {
        for i in 0..n {
            d_t_br1 += x.a_br[[i, j]] as usize;
            d_t_r1b += x.a_rb[[j, i]] as usize;
        }
    }
    Ok(RedPartition {
        r1,
        r2,
        d_t_r1r2,
        d_t_br1,
        d_t_r1b,
    })
}

/// Parse the edge-list text format: a `nodes K` header, then `u v` lines with
/// 0-based indices. Blank lines and `#` comments are ignored.
pub fn read_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut g: Option<Graph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |line: usize, msg: String| GraphError::Parse { line, msg };
        if let Some(rest) = line.strip_prefix("nodes") {
            if g.is_some() {
                return Err(parse(line_no, "duplicate 'nodes' header".into()));
            }
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| parse(line_no, format!("bad node count {:?}", rest.trim())))?;
            g = Some(Graph::empty(n));
            continue;
        }
        let g = g
            .as_mut()
            .ok_or_else(|| parse(line_no, "edge before 'nodes' header".into()))?;
        let mut parts = line.split_whitespace();
        let u: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse(line_no, format!("expected 'u v', got {line:?}")))?;
        let v: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse(line_no, format!("expected 'u v', got {line:?}")))?;
        if parts.next().is_some() {
            return Err(parse(line_no, format!("trailing tokens in {line:?}")));
        }
        if u >= g.n() || v >= g.n() {
            return Err(parse(
                line_no,
                format!("node index out of range: {} (n = {})", u.max(v), g.n()),
            ));
        }
        if u == v {
            return Err(parse(line_no, format!("self-loop at node {u}")));
        }
        if g.has_edge(u, v) {
            return Err(parse(line_no, format!("duplicate edge {u} {v}")));
        }
        g.add_edge(u, v);
    }
    g.ok_or(GraphError::Parse {
        line: 0,
        msg: "missing 'nodes' header".into(),
    })
}

/// Inverse of [`read_edge_list`]: header plus sorted `u v` lines.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("nodes {}\n", g.n());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}
