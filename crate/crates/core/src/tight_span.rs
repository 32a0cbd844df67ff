//! Finite metric spaces, points of their tight span, and the tight span of
//! a tree metric as a bicombed space.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::report::{sweep, Outcome, PropertyReport, Tally};
use crate::rng::{self, SampleRng};
use crate::space::{BicombingSpace, DistanceMode, Isometry};

/// Slack for comparisons on metrics built from floating-point weights.
const EXACT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetric {
    pub n: usize,
    pub d: Vec<Vec<f64>>,
}

impl FiniteMetric {
    /// Checks symmetry, zero diagonal, positivity off the diagonal and the
    /// triangle inequality, all without tolerance.
    pub fn new(d: Vec<Vec<f64>>) -> Result<Self> {
        let n = d.len();
        for (i, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(Error::SizeMismatch { expected: n, got: row.len() });
            }
            if row[i] != 0.0 {
                return Err(domain(format!("d({i},{i}) = {} is not zero", row[i])));
            }
            for j in 0..n {
                if !(row[j].is_finite() && row[j] >= 0.0) || row[j] != d[j][i] {
                    return Err(domain(format!("d({i},{j}) = {} is negative, infinite or asymmetric", row[j])));
                }
                if i != j && row[j] == 0.0 {
                    return Err(domain(format!("points {i} and {j} coincide")));
                }
                for k in 0..n {
                    if row[k] > row[j] + d[j][k] {
                        return Err(domain(format!("triangle inequality fails for ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(FiniteMetric { n, d })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().flatten().fold(0.0, |a: f64, &b| a.max(b))
    }

    pub fn to_csv(&self) -> String {
        self.d
            .iter()
            .map(|row| row.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?);
        }
        FiniteMetric::new(rows)
    }
}

/// A weighted edge `(u, v, w)`.
pub type Edge = (usize, usize, f64);

/// Parse `u v [weight]` lines (0-indexed, `#` comments). A line with a
/// single index declares a vertex. Returns the vertex count and the edges.
pub fn parse_edge_list(text: &str) -> Result<(usize, Vec<Edge>)> {
    let mut n = 0;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let idx = |s: &str| s.parse::<usize>().map_err(|e| parse_err(format!("bad vertex {s:?}: {e}")));
        match fields.len() {
            1 => n = n.max(idx(fields[0])? + 1),
            2 | 3 => {
                let (u, v) = (idx(fields[0])?, idx(fields[1])?);
                let w = match fields.get(2) {
                    Some(s) => s.parse::<f64>().map_err(|e| parse_err(format!("bad weight {s:?}: {e}")))?,
                    None => 1.0,
                };
                n = n.max(u + 1).max(v + 1);
                edges.push((u, v, w));
            }
            _ => return Err(parse_err(format!("expected `u v [weight]`, got {line:?}"))),
        }
    }
    Ok((n, edges))
}

fn components(n: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            comp.push(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Shortest-path metric of a connected graph (Floyd-Warshall; exact for
/// integer weights).
pub fn graph_metric(n: usize, edges: &[Edge]) -> Result<FiniteMetric> {
    if n == 0 {
        return Err(domain("graph has no vertices"));
    }
    for &(u, v, w) in edges {
        if u >= n || v >= n {
            return Err(domain(format!("edge ({u}, {v}) names a vertex outside 0..{n}")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(domain(format!("edge ({u}, {v}) has weight {w}; weights must be positive")));
        }
    }
    let comps = components(n, edges);
    if comps.len() > 1 {
        return Err(Error::Disconnected { components: comps });
    }
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        if u != v && w < d[u][v] {
            d[u][v] = w;
            d[v][u] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMetric::new(d)
}

/// A function `f` on the points with `f(x) + f(y) >= d(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleFunction {
    pub values: Vec<f64>,
}

impl AdmissibleFunction {
    pub fn new(values: Vec<f64>, d: &FiniteMetric) -> Result<Self> {
        if values.len() != d.n {
            return Err(Error::SizeMismatch { expected: d.n, got: values.len() });
        }
        for i in 0..d.n {
            for j in 0..d.n {
                if values[i] + values[j] < d.get(i, j) {
                    return Err(Error::Precondition(format!(
                        "f({i}) + f({j}) = {} < d = {}",
                        values[i] + values[j],
                        d.get(i, j)
                    )));
                }
            }
        }
        Ok(AdmissibleFunction { values })
    }
}

/// `p(g)(x) = max_y (d(x, y) - g(y))`.
pub fn p_map(g: &[f64], d: &FiniteMetric) -> Vec<f64> {
    (0..d.n).map(|x| (0..d.n).map(|y| d.get(x, y) - g[y]).fold(f64::NEG_INFINITY, f64::max)).collect()
}

/// `max_x |f(x) - p(f)(x)|`.
pub fn extremality_residual(f: &[f64], d: &FiniteMetric) -> f64 {
    p_map(f, d).iter().zip(f).map(|(p, v)| (p - v).abs()).fold(0.0, f64::max)
}

/// Whether `f(x) = max_y (d(x, y) - f(y))` for all `x`, with the residual.
pub fn is_extremal(f: &AdmissibleFunction, d: &FiniteMetric, tol: f64) -> Result<(bool, f64)> {
    AdmissibleFunction::new(f.values.clone(), d)?;
    let r = extremality_residual(&f.values, d);
    Ok((r <= tol, r))
}

/// Kuratowski image `e(x) = d(x, ·)`.
pub fn kuratowski(x: usize, d: &FiniteMetric) -> Result<AdmissibleFunction> {
    if x >= d.n {
        return Err(domain(format!("index {x} outside 0..{}", d.n)));
    }
    Ok(AdmissibleFunction { values: d.d[x].clone() })
}

pub fn linf_distance(f: &AdmissibleFunction, g: &AdmissibleFunction) -> Result<f64> {
    if f.values.len() != g.values.len() {
        return Err(Error::SizeMismatch { expected: f.values.len(), got: g.values.len() });
    }
    Ok(f.values.iter().zip(&g.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Iterate `g -> (g + p(g)) / 2` until the step is at most `tol`.
pub fn project_extremal(
    g: &AdmissibleFunction,
    d: &FiniteMetric,
    tol: f64,
    max_iter: usize,
) -> Result<AdmissibleFunction> {
    let mut cur = AdmissibleFunction::new(g.values.clone(), d)?.values;
    for _ in 0..max_iter {
        let p = p_map(&cur, d);
        let next: Vec<f64> = cur.iter().zip(&p).map(|(a, b)| 0.5 * (a + b)).collect();
        let step = next.iter().zip(&cur).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        cur = next;
        if step <= tol {
            return Ok(AdmissibleFunction { values: cur });
        }
    }
    Err(Error::NoConvergence(format!("projection did not settle to {tol:e} within {max_iter} iterations")))
}

/// Four-point constant: half the gap between the two largest of
/// `d(x,y) + d(z,w)`, `d(x,z) + d(y,w)`, `d(x,w) + d(y,z)`, maximized.
pub fn four_point_delta(d: &FiniteMetric) -> f64 {
    let n = d.n;
    let mut delta: f64 = 0.0;
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                for w in z + 1..n {
                    let mut s = [d.get(x, y) + d.get(z, w), d.get(x, z) + d.get(y, w), d.get(x, w) + d.get(y, z)];
                    s.sort_by(|a, b| b.total_cmp(a));
                    delta = delta.max(0.5 * (s[0] - s[1]));
                }
            }
        }
    }
    delta
}

/// Random admissible function: either a Kuratowski image raised by
/// nonnegative noise, or values spread around the diameter.
pub fn random_admissible(d: &FiniteMetric, rng: &mut SampleRng) -> AdmissibleFunction {
    let diam = d.diameter();
    let values = if rng::unit(rng) < 0.5 {
        let x = (rng::unit(rng) * d.n as f64) as usize % d.n;
        d.d[x].iter().map(|v| v + diam * rng::unit(rng)).collect()
    } else {
        (0..d.n).map(|_| diam * rng::uniform(rng, 0.5, 1.5)).collect()
    };
    AdmissibleFunction { values }
}

/// Projected random admissible functions lie within `δ + 1/2 + tol` of the
/// Kuratowski image.
pub fn covering_radius_check(d: &FiniteMetric, delta: f64, samples: usize, seed: u64, tol: f64) -> PropertyReport {
    let tally = Tally::new("covering_radius", "tight-span", seed, tol, DistanceMode::Exact);
    sweep(tally, samples, seed, |_, rng| {
        let g = random_admissible(d, rng);
        match project_extremal(&g, d, 1e-12, 10_000) {
            Ok(f) => {
                let (best, x) = (0..d.n)
                    .map(|x| (linf_distance(&f, &kuratowski(x, d).expect("index")).expect("sizes"), x))
                    .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
                Outcome::new(best - (delta + 0.5), json!({"f": f.values, "nearest": x, "distance": best}))
            }
            Err(e) => Outcome::new(f64::INFINITY, json!({"g": g.values, "error": e.to_string()})),
        }
    })
    .with_details(json!({"delta": delta, "n": d.n}))
}

/// A tree with positive edge lengths; `original[i]` is the node of metric
/// point `i`, the remaining nodes are branch points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTree {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    pub original: Vec<usize>,
}

impl WeightedTree {
    fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        adj
    }

    /// Node path from `a` to `b`.
    fn path(&self, adj: &[Vec<(usize, f64)>], a: usize, b: usize) -> Vec<usize> {
        let mut parent = vec![usize::MAX; self.nodes];
        parent[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        let mut out = vec![b];
        while *out.last().expect("nonempty") != a {
            out.push(parent[*out.last().expect("nonempty")]);
        }
        out.reverse();
        out
    }

    fn weight(&self, u: usize, v: usize) -> f64 {
        self.edges.iter().find(|&&(a, b, _)| (a, b) == (u, v) || (a, b) == (v, u)).map(|e| e.2).expect("edge exists")
    }

    fn split(&mut self, u: usize, v: usize, at: f64) -> usize {
        let w = self.weight(u, v);
        self.edges.retain(|&(a, b, _)| !((a, b) == (u, v) || (a, b) == (v, u)));
        let m = self.nodes;
        self.nodes += 1;
        self.edges.push((u, m, at));
        self.edges.push((m, v, w - at));
        m
    }
}

/// Tree realizing a metric with four-point constant 0, with branch points
/// added where needed. Points are inserted one at a time and attached where
/// their Gromov products say they branch off.
pub fn tree_realization(d: &FiniteMetric) -> Result<WeightedTree> {
    let delta = four_point_delta(d);
    if delta > EXACT * (1.0 + d.diameter()) {
        return Err(Error::Precondition(format!("metric is not a tree metric (four-point constant {delta})")));
    }
    let mut t = WeightedTree { nodes: 1, edges: Vec::new(), original: vec![0] };
    for z in 1..d.n {
        // Branch point on the path from point 0 toward the best b.
        let (mut reach, mut far) = (0.0, 0);
        for b in 1..z {
            let g = 0.5 * (d.get(0, z) + d.get(0, b) - d.get(z, b));
            if g > reach {
                reach = g;
                far = b;
            }
        }
        let leg = d.get(0, z) - reach;
        let adj = t.adjacency();
        let path = t.path(&adj, t.original[0], t.original[far]);
        let mut walked = 0.0;
        let mut attach = *path.last().expect("nonempty");
        for w in path.windows(2) {
            let len = t.weight(w[0], w[1]);
            if (reach - walked).abs() <= EXACT * (1.0 + reach) {
                attach = w[0];
                break;
            }
            if reach < walked + len - EXACT * (1.0 + reach) {
                attach = t.split(w[0], w[1], reach - walked);
                break;
            }
            walked += len;
        }
        if leg <= EXACT * (1.0 + reach) {
            if t.original.contains(&attach) {
                return Err(domain(format!("point {z} coincides with an earlier point")));
            }
            t.original.push(attach);
        } else {
            let m = t.nodes;
            t.nodes += 1;
            t.edges.push((attach, m, leg));
            t.original.push(m);
        }
    }
    Ok(t)
}

/// Point on edge `(a, b)` at distance `s` from `a`; nodes have `a == b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    pub a: usize,
    pub b: usize,
    pub s: f64,
}

/// The metric tree with its unique geodesic bicombing.
#[derive(Debug, Clone)]
pub struct TreeSpace {
    pub tree: WeightedTree,
    adj: Vec<Vec<(usize, f64)>>,
    node_dist: Vec<Vec<f64>>,
    /// Node permutations induced by isometries of the metric.
    automorphisms: Vec<Vec<usize>>,
}

impl TreeSpace {
    pub fn new(tree: WeightedTree) -> Self {
        let adj = tree.adjacency();
        let node_dist = (0..tree.nodes)
            .map(|s| {
                let mut dist = vec![f64::INFINITY; tree.nodes];
                dist[s] = 0.0;
                let mut queue = VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    for &(v, w) in &adj[u] {
                        if dist[v].is_infinite() {
                            dist[v] = dist[u] + w;
                            queue.push_back(v);
                        }
                    }
                }
                dist
            })
            .collect();
        let mut space = TreeSpace { tree, adj, node_dist, automorphisms: Vec::new() };
        space.automorphisms = space.find_automorphisms(64);
        space
    }

    pub fn node(&self, v: usize) -> TreePoint {
        TreePoint { a: v, b: v, s: 0.0 }
    }

    fn edge_len(&self, p: &TreePoint) -> f64 {
        if p.a == p.b {
            0.0
        } else {
            self.tree.weight(p.a, p.b)
        }
    }

    /// Canonical form: nodes as `(v, v, 0)`, edge points with `a < b`.
    fn canon(&self, a: usize, b: usize, s: f64) -> TreePoint {
        if a == b || s <= 0.0 {
            return self.node(a);
        }
        let w = self.tree.weight(a, b);
        if s >= w {
            return self.node(b);
        }
        if a < b {
            TreePoint { a, b, s }
        } else {
            TreePoint { a: b, b: a, s: w - s }
        }
    }

    /// Ends of the carrying edge with the distances to them.
    fn ends(&self, p: &TreePoint) -> [(usize, f64); 2] {
        [(p.a, p.s), (p.b, self.edge_len(p) - p.s)]
    }

    /// Distance plus the ends of `p` and `q` that the geodesic passes.
    fn route(&self, p: &TreePoint, q: &TreePoint) -> (f64, usize, usize) {
        if p.a == q.a && p.b == q.b && p.a != p.b {
            return ((p.s - q.s).abs(), usize::MAX, usize::MAX);
        }
        let mut best = (f64::INFINITY, 0, 0);
        for (u, du) in self.ends(p) {
            for (v, dv) in self.ends(q) {
                let total = du + self.node_dist[u][v] + dv;
                if total < best.0 {
                    best = (total, u, v);
                }
            }
        }
        best
    }

    /// Isometries of the metric on the original points, as node maps.
    fn find_automorphisms(&self, cap: usize) -> Vec<Vec<usize>> {
        let n = self.tree.original.len();
        let dist = |i: usize, j: usize| self.node_dist[self.tree.original[i]][self.tree.original[j]];
        let mut perms = Vec::new();
        let mut cur = Vec::with_capacity(n);
        let mut used = vec![false; n];
        fn go(
            n: usize,
            dist: &dyn Fn(usize, usize) -> f64,
            cur: &mut Vec<usize>,
            used: &mut [bool],
            out: &mut Vec<Vec<usize>>,
            cap: usize,
        ) {
            if out.len() >= cap {
                return;
            }
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            let i = cur.len();
            for c in 0..n {
                if used[c] || (0..i).any(|j| dist(i, j) != dist(c, cur[j])) {
                    continue;
                }
                used[c] = true;
                cur.push(c);
                go(n, dist, cur, used, out, cap);
                cur.pop();
                used[c] = false;
            }
        }
        go(n, &dist, &mut cur, &mut used, &mut perms, cap);
        // Extend to all nodes: a node goes to the node with the permuted
        // distance profile.
        let profile = |v: usize| -> Vec<f64> { (0..n).map(|i| self.node_dist[v][self.tree.original[i]]).collect() };
        perms
            .into_iter()
            .filter_map(|perm| {
                (0..self.tree.nodes)
                    .map(|v| {
                        let pv = profile(v);
                        let want: Vec<f64> =
                            (0..n).map(|i| pv[perm.iter().position(|&c| c == i).expect("perm")]).collect();
                        (0..self.tree.nodes).find(|&u| profile(u) == want)
                    })
                    .collect::<Option<Vec<usize>>>()
            })
            .collect()
    }

    fn map_point(&self, perm: &[usize], p: &TreePoint) -> TreePoint {
        if p.a == p.b {
            return self.node(perm[p.a]);
        }
        self.canon(perm[p.a], perm[p.b], p.s)
    }
}

impl BicombingSpace for TreeSpace {
    type Point = TreePoint;

    fn name(&self) -> String {
        "tree".into()
    }

    fn dist(&self, x: &TreePoint, y: &TreePoint) -> f64 {
        if x == y {
            return 0.0;
        }
        self.route(x, y).0
    }

    fn bicombe(&self, x: &TreePoint, y: &TreePoint, t: f64) -> TreePoint {
        if t <= 0.0 || x == y {
            return *x;
        }
        if t >= 1.0 {
            return *y;
        }
        let (total, u, v) = self.route(x, y);
        if u == usize::MAX {
            return self.canon(x.a, x.b, x.s + t * (y.s - x.s));
        }
        let mut left = t * total;
        // Leg from x to its exit node u.
        let first = if u == x.a { x.s } else { self.edge_len(x) - x.s };
        if left <= first {
            return if u == x.a { self.canon(x.a, x.b, x.s - left) } else { self.canon(x.a, x.b, x.s + left) };
        }
        left -= first;
        let path = self.tree.path(&self.adj, u, v);
        for w in path.windows(2) {
            let len = self.tree.weight(w[0], w[1]);
            if left <= len {
                return self.canon(w[0], w[1], left);
            }
            left -= len;
        }
        // Last leg from v into y's edge.
        let other = if v == y.a { y.b } else { y.a };
        if y.a == y.b {
            return *y;
        }
        self.canon(v, other, left)
    }

    fn sample(&self, rng: &mut SampleRng, _scale: f64) -> TreePoint {
        if self.tree.edges.is_empty() || rng::unit(rng) < 0.2 {
            let v = (rng::unit(rng) * self.tree.nodes as f64) as usize % self.tree.nodes;
            return self.node(v);
        }
        let e = self.tree.edges[(rng::unit(rng) * self.tree.edges.len() as f64) as usize % self.tree.edges.len()];
        self.canon(e.0, e.1, e.2 * rng::unit(rng))
    }

    fn base_point(&self) -> TreePoint {
        self.node(self.tree.original[0])
    }

    fn isometries(&self) -> Vec<Isometry<TreePoint>> {
        self.automorphisms
            .iter()
            .enumerate()
            .map(|(i, perm)| {
                let me = self.clone();
                let perm = perm.clone();
                Isometry::new(format!("automorphism-{i}"), move |p: &TreePoint| me.map_point(&perm, p))
            })
            .collect()
    }
}

/// The tight span of a tree metric: the tree itself with its geodesics.
pub fn tree_tight_span(d: &FiniteMetric) -> Result<(WeightedTree, TreeSpace)> {
    let tree = tree_realization(d)?;
    Ok((tree.clone(), TreeSpace::new(tree)))
}

/// Random tree on `n` vertices with integer weights in `1..=max_w`.
pub fn random_tree(n: usize, max_w: u32, rng: &mut SampleRng) -> Vec<Edge> {
    (1..n)
        .map(|v| {
            let u = (rng::unit(rng) * v as f64) as usize % v;
            let w = 1 + (rng::unit(rng) * max_w as f64) as u32 % max_w;
            (u, v, w as f64)
        })
        .collect()
}

/// Random connected graph on `n` vertices with unit edges.
pub fn random_connected_graph(n: usize, extra: usize, rng: &mut SampleRng) -> Vec<Edge> {
    let mut edges: Vec<Edge> = random_tree(n, 1, rng);
    for _ in 0..extra {
        let u = (rng::unit(rng) * n as f64) as usize % n;
        let v = (rng::unit(rng) * n as f64) as usize % n;
        if u != v {
            edges.push((u, v, 1.0));
        }
    }
    edges
}

fn random_graph_metric(rng: &mut SampleRng, min_n: usize, max_n: usize) -> FiniteMetric {
    let n = min_n + (rng::unit(rng) * (max_n - min_n + 1) as f64) as usize % (max_n - min_n + 1);
    let extra = (rng::unit(rng) * n as f64) as usize;
    graph_metric(n, &random_connected_graph(n, extra, rng)).expect("connected by construction")
}

/// Project random admissible functions on random 6-point graph metrics;
/// the residual after at most `max_iter` steps must be within `tol`.
pub fn projection_sweep(n: usize, tol: f64, max_iter: usize, seed: u64) -> PropertyReport {
    let tally = Tally::new("projection", "tight-span", seed, tol, DistanceMode::Exact);
    sweep(tally, n, seed, |_, rng| {
        let d = random_graph_metric(rng, 6, 6);
        let g = random_admissible(&d, rng);
        match project_extremal(&g, &d, 1e-13, max_iter) {
            Ok(f) => {
                let r = extremality_residual(&f.values, &d);
                Outcome::new(r, json!({"d": d.d, "g": g.values, "f": f.values, "residual": r}))
            }
            Err(e) => Outcome::new(f64::INFINITY, json!({"d": d.d, "g": g.values, "error": e.to_string()})),
        }
    })
}

/// Four-point constant of random integer trees must be exactly 0; the
/// first sample is the unit 4-cycle, which must give exactly 1.
pub fn four_point_sweep(n: usize, seed: u64) -> PropertyReport {
    let tally = Tally::new("four_point", "tight-span", seed, 0.0, DistanceMode::Exact);
    sweep(tally, n + 1, seed, |i, rng| {
        if i == 0 {
            let d = graph_metric(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).expect("cycle");
            let delta = four_point_delta(&d);
            return Outcome::new((delta - 1.0).abs(), json!({"graph": "unit 4-cycle", "delta": delta}));
        }
        let size = 4 + (rng::unit(rng) * 7.0) as usize;
        let edges = random_tree(size, 5, rng);
        let delta = four_point_delta(&graph_metric(size, &edges).expect("tree"));
        Outcome::new(delta, json!({"edges": edges, "delta": delta}))
    })
}

/// `|e(x) - e(y)|_inf = d(x, y)` exactly on random integer graph metrics.
pub fn kuratowski_sweep(n: usize, seed: u64) -> PropertyReport {
    let tally = Tally::new("kuratowski", "tight-span", seed, 0.0, DistanceMode::Exact);
    sweep(tally, n, seed, |_, rng| {
        let d = random_graph_metric(rng, 2, 10);
        let mut worst = Outcome::new(0.0, json!({"d": d.d}));
        for x in 0..d.n {
            for y in 0..d.n {
                let e = linf_distance(&kuratowski(x, &d).expect("index"), &kuratowski(y, &d).expect("index"))
                    .expect("sizes");
                let gap = (e - d.get(x, y)).abs();
                worst = worst.worst(Outcome::new(gap, json!({"d": d.d, "x": x, "y": y, "linf": e})));
            }
        }
        worst
    })
}

/// Covering-radius check on `graphs` random connected graphs with at most
/// `max_vertices` vertices, `samples` projections each.
pub fn covering_sweep(graphs: usize, max_vertices: usize, samples: usize, tol: f64, seed: u64) -> PropertyReport {
    let parts = (0..graphs as u64)
        .map(|i| {
            let mut rng = rng::stream(seed, i);
            let d = random_graph_metric(&mut rng, 2, max_vertices.max(2));
            covering_radius_check(&d, four_point_delta(&d), samples, seed.wrapping_add(i), tol)
        })
        .collect();
    let mut out = PropertyReport::combine("covering_radius", parts);
    out.seed = seed;
    out
}

/// Closed-form cases: two-point extremal functions are exactly the
/// `(a, D - a)`, and tripod legs equal the Gromov products.
pub fn small_cases_check(tol: f64) -> PropertyReport {
    let mut tally = Tally::new("small_cases", "tight-span", 0, tol, DistanceMode::Exact);
    let big = 3.0;
    let d = FiniteMetric::new(vec![vec![0.0, big], vec![big, 0.0]]).expect("two points");
    for i in 0..=12 {
        for j in 0..=12 {
            let f = vec![0.5 * i as f64, 0.5 * j as f64];
            if f[0] + f[1] < big {
                continue;
            }
            let residual = extremality_residual(&f, &d);
            let expected = f[0] + f[1] == big;
            // Extremal iff the values sum to D.
            let wrong = (residual == 0.0) != expected;
            tally.push(Outcome::new(if wrong { 1.0 } else { 0.0 }, json!({"f": f, "residual": residual})));
        }
    }
    let legs = [1.0, 2.0, 3.0];
    let tri = FiniteMetric::new(
        (0..3).map(|i| (0..3).map(|j| if i == j { 0.0 } else { legs[i] + legs[j] }).collect()).collect(),
    )
    .expect("tripod");
    match tree_tight_span(&tri) {
        Ok((tree, space)) => {
            let center = (0..tree.nodes).find(|v| !tree.original.contains(v));
            for (i, leg) in legs.iter().enumerate() {
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                let gromov = 0.5 * (tri.get(i, j) + tri.get(i, k) - tri.get(j, k));
                let to_center =
                    center.map(|c| space.dist(&space.node(c), &space.node(tree.original[i]))).unwrap_or(f64::INFINITY);
                let gap = (gromov - leg).abs().max((to_center - leg).abs());
                tally.push(Outcome::new(gap, json!({"leg": i, "gromov": gromov, "to_branch_point": to_center})));
            }
        }
        Err(e) => tally.push(Outcome::new(f64::INFINITY, json!({"error": e.to_string()}))),
    }
    tally.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_and_single_vertex() {
        let d = graph_metric(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(d.get(0, 2), 2.0);
        let one = graph_metric(1, &[]).unwrap();
        assert_eq!(one.d, vec![vec![0.0]]);
    }

    #[test]
    fn disconnected_graph_names_components() {
        match graph_metric(4, &[(0, 1, 1.0), (2, 3, 1.0)]) {
            Err(Error::Disconnected { components }) => assert_eq!(components, vec![vec![0, 1], vec![2, 3]]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn edge_list_parsing() {
        let (n, e) = parse_edge_list("# square\n0 1\n1 2 2.5\n\n2 3 # tail\n5\n").unwrap();
        assert_eq!(n, 6);
        assert_eq!(e, vec![(0, 1, 1.0), (1, 2, 2.5), (2, 3, 1.0)]);
        assert!(matches!(parse_edge_list("0 x"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn two_point_extremal_segment() {
        let d = FiniteMetric::new(vec![vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap();
        for a in [0.0, 1.0, 2.5, 3.0] {
            let f = AdmissibleFunction::new(vec![a, 3.0 - a], &d).unwrap();
            assert!(is_extremal(&f, &d, 0.0).unwrap().0);
        }
        let f = AdmissibleFunction::new(vec![3.0, 3.0], &d).unwrap();
        assert!(!is_extremal(&f, &d, 1e-9).unwrap().0);
        let p = project_extremal(&f, &d, 1e-12, 100).unwrap();
        assert_eq!(p.values, vec![1.5, 1.5]);
        assert!(is_extremal(&AdmissibleFunction { values: vec![0.0, 0.0] }, &d, 0.0).is_err());
    }

    #[test]
    fn four_cycle_delta_is_one() {
        let d = graph_metric(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert_eq!(four_point_delta(&d), 1.0);
        let small = graph_metric(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(four_point_delta(&small), 0.0);
    }

    #[test]
    fn tripod_gets_a_branch_point() {
        let d = FiniteMetric::new(vec![vec![0.0, 2.0, 2.0], vec![2.0, 0.0, 2.0], vec![2.0, 2.0, 0.0]]).unwrap();
        let (tree, space) = tree_tight_span(&d).unwrap();
        assert_eq!(tree.nodes, 4);
        let mid = space.bicombe(&space.node(tree.original[0]), &space.node(tree.original[1]), 0.5);
        assert!(mid.a == mid.b && !tree.original.contains(&mid.a));
        assert_eq!(space.isometries().len(), 6);
        let c4 = graph_metric(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        assert!(tree_tight_span(&c4).is_err());
    }
}
