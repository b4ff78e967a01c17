//! Bounded-degree obstruction graphs and the regular-map search.
//!
//! A *regular map* here is a vertex map `f` between connected graphs subject
//! to two conditions for a constant `K`: every fiber has at most `K`
//! elements, and images of adjacent vertices are at graph distance at most
//! `K`. The obstruction graphs `Delta_k` are paths with one perfect matching
//! of diagonals added per level; levels are grown until an exhaustive
//! backtracking search certifies that no regular map with `K = k` and a
//! pinned root image exists. Counting shows why certification must succeed
//! for large levels: the diagonals can be rewired in `L!` ways while the
//! number of level graphs admitting a regular map only grows exponentially
//! in the level size.

use num_bigint::BigUint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{GraphExchange, VertexRecord};

/// Plain adjacency-list graph for the combinatorial side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleGraph {
    adjacency: Vec<Vec<u32>>,
}

impl SimpleGraph {
    pub fn new(n: usize) -> SimpleGraph {
        SimpleGraph {
            adjacency: vec![Vec::new(); n],
        }
    }

    pub fn path(n: usize) -> SimpleGraph {
        let mut g = SimpleGraph::new(n);
        for i in 1..n {
            g.add_edge((i - 1) as u32, i as u32);
        }
        g
    }

    pub fn cycle(n: usize) -> SimpleGraph {
        let mut g = SimpleGraph::path(n);
        if n > 2 {
            g.add_edge(0, (n - 1) as u32);
        }
        g
    }

    pub fn add_edge(&mut self, a: u32, b: u32) {
        if a == b {
            return;
        }
        if !self.adjacency[a as usize].contains(&b) {
            self.adjacency[a as usize].push(b);
            self.adjacency[b as usize].push(a);
            self.adjacency[a as usize].sort_unstable();
            self.adjacency[b as usize].sort_unstable();
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(|n| n.len()).max().unwrap_or(0)
    }

    pub fn bfs_distances(&self, start: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = std::collections::VecDeque::new();
        dist[start as usize] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn bfs_order(&self, start: u32) -> Vec<u32> {
        let mut seen = vec![false; self.vertex_count()];
        let mut order = Vec::with_capacity(self.vertex_count());
        let mut queue = std::collections::VecDeque::new();
        seen[start as usize] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in self.neighbors(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
        order
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0 || self.bfs_order(0).len() == self.vertex_count()
    }

    pub fn to_exchange(&self) -> GraphExchange {
        let vertices = (0..self.vertex_count() as u32)
            .map(|id| VertexRecord {
                id,
                coords: Vec::new(),
            })
            .collect();
        let mut edges = Vec::with_capacity(self.edge_count());
        for v in 0..self.vertex_count() as u32 {
            for &w in self.neighbors(v) {
                if v < w {
                    edges.push([v, w]);
                }
            }
        }
        GraphExchange {
            vertices,
            edges,
            r: None,
            lambda: None,
        }
    }

    pub fn from_exchange(exchange: &GraphExchange) -> Result<SimpleGraph> {
        let n = exchange.vertices.len();
        let mut g = SimpleGraph::new(n);
        for [a, b] in &exchange.edges {
            if *a as usize >= n || *b as usize >= n {
                return Err(Error::Input(format!("edge [{a},{b}] outside vertex set")));
            }
            g.add_edge(*a, *b);
        }
        Ok(g)
    }
}

/// Term `k` of the ruler sequence 1, 2, 1, 3, 1, 2, 1, 4, ...: the 2-adic
/// valuation of `k` plus one. Every value appears infinitely often.
pub fn ruler_sequence(k: u64) -> u32 {
    assert!(k >= 1, "ruler sequence starts at k = 1");
    k.trailing_zeros() + 1
}

/// Violations of the two regular-map conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularMapViolations {
    /// Target vertices whose fiber exceeds `K`.
    pub multiplicity: Vec<u32>,
    /// Source edges whose endpoint images are farther than `K` apart.
    pub displacement: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularMapReport {
    pub ok: bool,
    pub violations: RegularMapViolations,
}

/// Checks a total assignment against both conditions.
pub fn regular_map_check(
    source: &SimpleGraph,
    target: &SimpleGraph,
    k: u32,
    assignment: &[u32],
) -> Result<RegularMapReport> {
    if assignment.len() != source.vertex_count() {
        return Err(Error::Input(format!(
            "assignment covers {} vertices, source has {}",
            assignment.len(),
            source.vertex_count()
        )));
    }
    let tn = target.vertex_count() as u32;
    for (v, h) in assignment.iter().enumerate() {
        if *h >= tn {
            return Err(Error::Input(format!(
                "vertex {v} maps to {h}, outside the target vertex set"
            )));
        }
    }
    let mut fibers = vec![0u32; tn as usize];
    for h in assignment {
        fibers[*h as usize] += 1;
    }
    let multiplicity: Vec<u32> = (0..tn).filter(|&h| fibers[h as usize] > k).collect();

    let mut displacement = Vec::new();
    // One BFS per distinct used image vertex.
    let mut dist_cache: std::collections::HashMap<u32, Vec<u32>> =
        std::collections::HashMap::new();
    for v in 0..source.vertex_count() as u32 {
        for &w in source.neighbors(v) {
            if v < w {
                let (a, b) = (assignment[v as usize], assignment[w as usize]);
                let row = dist_cache
                    .entry(a)
                    .or_insert_with(|| target.bfs_distances(a));
                let d = row[b as usize];
                if d == u32::MAX || d > k {
                    displacement.push((v, w));
                }
            }
        }
    }
    let ok = multiplicity.is_empty() && displacement.is_empty();
    Ok(RegularMapReport {
        ok,
        violations: RegularMapViolations {
            multiplicity,
            displacement,
        },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// A witness assignment when one exists.
    pub witness: Option<Vec<u32>>,
    /// True when the search space was exhausted without a witness.
    pub exhausted: bool,
    pub nodes_explored: u64,
}

/// Backtracking search for a regular map `Delta -> Gamma` with constant `K`.
///
/// Vertices of `Delta` are assigned in BFS order from vertex 0; candidate
/// images for a vertex are the `K`-ball around the image of its first
/// already-assigned neighbor, iterated in ascending order, pruned by fiber
/// counters and by the displacement condition against every assigned
/// neighbor. With a pinned root the search space is implicitly restricted to
/// the `K |Delta|`-ball around the root image, which loses nothing because
/// displacement bounds every image's distance from the root image.
pub fn exists_regular_map(
    delta: &SimpleGraph,
    gamma: &SimpleGraph,
    k: u32,
    root_image: Option<u32>,
    node_budget: u64,
) -> Result<SearchOutcome> {
    if delta.vertex_count() == 0 {
        return Ok(SearchOutcome {
            witness: Some(Vec::new()),
            exhausted: false,
            nodes_explored: 0,
        });
    }
    if !delta.is_connected() {
        return Err(Error::precondition(
            "exists_regular_map",
            "source graph must be connected",
        ));
    }
    if let Some(h) = root_image {
        if h as usize >= gamma.vertex_count() {
            return Err(Error::Input(format!(
                "root image {h} outside the target vertex set"
            )));
        }
    }

    // Fiber capacity: k per target vertex, so a source larger than
    // k |Gamma| admits no total map at all.
    if delta.vertex_count() as u64 > (k as u64) * (gamma.vertex_count() as u64) {
        return Ok(SearchOutcome {
            witness: None,
            exhausted: true,
            nodes_explored: 0,
        });
    }

    let order = delta.bfs_order(0);
    let n = order.len();
    // position of each vertex in the assignment order
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v as usize] = i;
    }
    // for each vertex, its neighbors that come earlier in the order
    let earlier: Vec<Vec<u32>> = order
        .iter()
        .map(|&v| {
            delta
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| pos[w as usize] < pos[v as usize])
                .collect()
        })
        .collect();

    let tn = gamma.vertex_count();
    let mut dist_rows: Vec<Option<Vec<u32>>> = vec![None; tn];
    let mut ball_rows: Vec<Option<Vec<u32>>> = vec![None; tn];

    let mut assignment = vec![u32::MAX; n];
    let mut fibers = vec![0u32; tn];
    // Per-depth candidate list and cursor.
    let mut cand_stack: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut cursor = vec![0usize; n];
    let mut nodes: u64 = 0;

    let root_candidates: Vec<u32> = match root_image {
        Some(h) => vec![h],
        None => (0..tn as u32).collect(),
    };

    let mut depth = 0usize;
    cand_stack[0] = root_candidates;
    cursor[0] = 0;

    let budget_error = |nodes: u64| -> Error {
        // A priori search-space size of the style d^(K |Delta|); saturate.
        let d = (gamma.max_degree() + 1) as f64;
        let log_est = (k as f64) * (n as f64) * d.ln();
        let required = if log_est > 88.0 {
            u128::MAX
        } else {
            log_est.exp() as u128
        };
        let _ = nodes;
        Error::Resource {
            op: "exists_regular_map".into(),
            required,
            budget: node_budget as u128,
        }
    };

    loop {
        // Advance the cursor at the current depth.
        let v = order[depth] as usize;
        let mut advanced = false;
        while cursor[depth] < cand_stack[depth].len() {
            let h = cand_stack[depth][cursor[depth]];
            cursor[depth] += 1;
            nodes += 1;
            if nodes > node_budget {
                return Err(budget_error(nodes));
            }
            if fibers[h as usize] >= k {
                continue;
            }
            // Displacement against every earlier-assigned neighbor.
            let mut feasible = true;
            for &w in &earlier[depth] {
                let img = assignment[w as usize];
                let row = dist_rows[img as usize]
                    .get_or_insert_with(|| gamma.bfs_distances(img));
                let dd = row[h as usize];
                if dd == u32::MAX || dd > k {
                    feasible = false;
                    break;
                }
            }
            if !feasible {
                continue;
            }
            assignment[v] = h;
            fibers[h as usize] += 1;
            advanced = true;
            break;
        }

        if !advanced {
            // Backtrack.
            if depth == 0 {
                return Ok(SearchOutcome {
                    witness: None,
                    exhausted: true,
                    nodes_explored: nodes,
                });
            }
            depth -= 1;
            let pv = order[depth] as usize;
            fibers[assignment[pv] as usize] -= 1;
            assignment[pv] = u32::MAX;
            continue;
        }

        if depth + 1 == n {
            let witness: Vec<u32> = (0..n).map(|v| assignment[v]).collect();
            return Ok(SearchOutcome {
                witness: Some(witness),
                exhausted: false,
                nodes_explored: nodes,
            });
        }

        // Candidates for the next vertex: the K-ball around the image of
        // its first earlier neighbor (BFS order guarantees one).
        depth += 1;
        let anchor = earlier[depth][0];
        let img = assignment[anchor as usize] as usize;
        let ball = ball_rows[img].get_or_insert_with(|| {
            let row = dist_rows[img].get_or_insert_with(|| gamma.bfs_distances(img as u32));
            (0..tn as u32)
                .filter(|&h| row[h as usize] <= k)
                .collect()
        });
        cand_stack[depth] = ball.clone();
        cursor[depth] = 0;
    }
}

/// Independent reference search used by the verification suites: full
/// enumeration of all `|Gamma|^|Delta|` assignments.
pub mod oracle {
    use super::*;

    /// Returns a witness or proves exhaustion by enumerating every map.
    pub fn brute_force_regular_map(
        delta: &SimpleGraph,
        gamma: &SimpleGraph,
        k: u32,
        root_image: Option<u32>,
    ) -> Option<Vec<u32>> {
        let n = delta.vertex_count();
        let t = gamma.vertex_count() as u64;
        let total = (t as f64).powi(n as i32);
        assert!(
            total <= 1.5e6,
            "brute force limited to about 1e6 maps, got {total}"
        );
        let mut assignment = vec![0u32; n];
        loop {
            let mut check_root = true;
            if let Some(h) = root_image {
                check_root = assignment[0] == h;
            }
            if check_root {
                if let Ok(report) = regular_map_check(delta, gamma, k, &assignment) {
                    if report.ok {
                        return Some(assignment);
                    }
                }
            }
            // Mixed-radix increment.
            let mut i = 0;
            loop {
                if i == n {
                    return None;
                }
                assignment[i] += 1;
                if (assignment[i] as u64) < t {
                    break;
                }
                assignment[i] = 0;
                i += 1;
            }
        }
    }
}

/// Exact counting bound: rewirable diagonals versus mappable graphs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountBound {
    /// `d^(k S) (k d^k)^S`: an upper bound for the number of level graphs
    /// admitting a regular map with constant `k` into a graph of degree
    /// `< d` — exponential in `S`.
    pub maps_upper: BigUint,
    /// `L!`: the number of diagonal rewirings — superexponential in `S`
    /// along `L = S/4`.
    pub graphs_count: BigUint,
}

pub fn count_bound(d: u64, k: u32, s: u64, l: u64) -> Result<CountBound> {
    if d < 2 || k < 1 || s < 1 || l < 1 {
        return Err(Error::precondition(
            "count_bound",
            "need d >= 2, k >= 1, s >= 1, l >= 1",
        ));
    }
    let d = BigUint::from(d);
    let maps_upper = d.pow((k as u64 * s) as u32)
        * (BigUint::from(k) * d.pow(k)).pow(s as u32);
    let mut graphs_count = BigUint::from(1u32);
    for i in 2..=l {
        graphs_count *= BigUint::from(i);
    }
    Ok(CountBound {
        maps_upper,
        graphs_count,
    })
}

/// One certified level of the obstruction graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaLevel {
    /// Total vertex count after this level (`S_k`).
    pub s: u64,
    /// Diagonals added in this level, as vertex index pairs.
    pub matching: Vec<(u32, u32)>,
    pub certificate: LevelCertificate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelCertificate {
    pub k: u32,
    /// Pinned root image (ruler-sequence target vertex).
    pub root_image: u32,
    pub nodes_explored: u64,
    pub exhausted: bool,
    /// Level sizes tried before the certified one.
    pub sizes_tried: Vec<u64>,
    /// Matchings tried at the certified size before the certified one.
    pub matchings_tried: u64,
    pub seed: u64,
}

/// The growing obstruction graph: a path with one matching per level.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DeltaGraph {
    pub levels: Vec<DeltaLevel>,
}

impl DeltaGraph {
    pub fn vertex_count(&self) -> u64 {
        self.levels.last().map(|l| l.s).unwrap_or(0)
    }

    pub fn level_sizes(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.s).collect()
    }

    pub fn graph(&self) -> SimpleGraph {
        let n = self.vertex_count() as usize;
        let mut g = SimpleGraph::path(n);
        for level in &self.levels {
            for &(a, b) in &level.matching {
                g.add_edge(a, b);
            }
        }
        g
    }

    /// Structural invariants: degree at most 3, diagonals local to their
    /// level interval, matchings between the first and last L elements.
    pub fn verify_structure(&self) -> Result<()> {
        let g = self.graph();
        if g.max_degree() > 3 {
            return Err(Error::precondition(
                "DeltaGraph::verify_structure",
                format!("degree {} exceeds 3", g.max_degree()),
            ));
        }
        let mut prev_s = 0u64;
        for (idx, level) in self.levels.iter().enumerate() {
            if level.s <= prev_s {
                return Err(Error::precondition(
                    "DeltaGraph::verify_structure",
                    format!("level {idx} does not grow: {} after {prev_s}", level.s),
                ));
            }
            let len = level.s - prev_s;
            let l = (len / 4) as usize;
            if level.matching.len() != l {
                return Err(Error::precondition(
                    "DeltaGraph::verify_structure",
                    format!("level {idx}: {} diagonals, expected {l}", level.matching.len()),
                ));
            }
            let a_range = prev_s..prev_s + l as u64;
            let b_range = level.s - l as u64..level.s;
            let mut seen_a = std::collections::HashSet::new();
            let mut seen_b = std::collections::HashSet::new();
            for &(a, b) in &level.matching {
                let (a, b) = (a as u64, b as u64);
                if !a_range.contains(&a) || !b_range.contains(&b) {
                    return Err(Error::precondition(
                        "DeltaGraph::verify_structure",
                        format!("level {idx}: diagonal ({a},{b}) outside its interval"),
                    ));
                }
                if !seen_a.insert(a) || !seen_b.insert(b) {
                    return Err(Error::precondition(
                        "DeltaGraph::verify_structure",
                        format!("level {idx}: diagonal endpoints repeat at ({a},{b})"),
                    ));
                }
            }
            prev_s = level.s;
        }
        Ok(())
    }
}

/// Budgets for level construction, exposed on the command line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaBudgets {
    /// Largest level size to try.
    pub max_sk: u64,
    /// How many level sizes to try along the geometric schedule.
    pub max_candidates: usize,
    /// Matchings per candidate size (identity and lexicographic first, then
    /// seeded samples).
    pub max_matchings: u64,
    /// Node budget per backtracking search.
    pub search_node_budget: u64,
}

impl Default for DeltaBudgets {
    fn default() -> Self {
        DeltaBudgets {
            max_sk: 4096,
            max_candidates: 12,
            max_matchings: 64,
            search_node_budget: 20_000_000,
        }
    }
}

/// Grows one level: tries candidate sizes on a geometric schedule and
/// matchings in deterministic-then-sampled order until the backtracking
/// search certifies that no regular map with `K = k` and the pinned
/// ruler-sequence root exists.
pub fn build_delta_level(
    gamma: &SimpleGraph,
    k: u32,
    delta: &DeltaGraph,
    budgets: &DeltaBudgets,
    seed: u64,
) -> Result<DeltaLevel> {
    let n_k = ruler_sequence(k as u64) as u64;
    let root_image = ((n_k - 1) % gamma.vertex_count() as u64) as u32;
    build_delta_level_with_root(gamma, k, delta, root_image, budgets, seed)
}

pub fn build_delta_level_with_root(
    gamma: &SimpleGraph,
    k: u32,
    delta: &DeltaGraph,
    root_image: u32,
    budgets: &DeltaBudgets,
    seed: u64,
) -> Result<DeltaLevel> {
    let prev_s = delta.vertex_count();
    let mut size = (prev_s + 8).max(prev_s * 2).max(8);
    let mut sizes_tried = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6465_6c74);

    for _ in 0..budgets.max_candidates {
        if size > budgets.max_sk {
            break;
        }
        let l = ((size - prev_s) / 4) as usize;
        if l == 0 {
            size = size * 3 / 2 + 4;
            continue;
        }
        let a_base = prev_s as u32;
        let b_base = (size - l as u64) as u32;

        let mut matchings_tried = 0u64;
        let mut perm: Vec<u32> = (0..l as u32).collect();
        let mut use_lex = true;
        while matchings_tried < budgets.max_matchings {
            let matching: Vec<(u32, u32)> = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| (a_base + i as u32, b_base + j))
                .collect();

            let mut candidate = delta.clone();
            candidate.levels.push(DeltaLevel {
                s: size,
                matching: matching.clone(),
                certificate: LevelCertificate {
                    k,
                    root_image,
                    nodes_explored: 0,
                    exhausted: false,
                    sizes_tried: Vec::new(),
                    matchings_tried: 0,
                    seed,
                },
            });
            let graph = candidate.graph();
            let outcome =
                exists_regular_map(&graph, gamma, k, Some(root_image), budgets.search_node_budget)?;
            matchings_tried += 1;
            if outcome.exhausted {
                return Ok(DeltaLevel {
                    s: size,
                    matching,
                    certificate: LevelCertificate {
                        k,
                        root_image,
                        nodes_explored: outcome.nodes_explored,
                        exhausted: true,
                        sizes_tried,
                        matchings_tried: matchings_tried - 1,
                        seed,
                    },
                });
            }

            // Next matching: lexicographic while they last, then samples.
            if use_lex {
                if !next_permutation(&mut perm) {
                    use_lex = false;
                }
            }
            if !use_lex {
                for i in 0..perm.len() {
                    let j = rng.gen_range(i..perm.len());
                    perm.swap(i, j);
                }
            }
        }
        sizes_tried.push(size);
        size = (size * 2).max(size + 8);
    }
    Err(Error::Resource {
        op: "build_delta_level".into(),
        required: size as u128,
        budget: budgets.max_sk as u128,
    })
}

/// Grows `levels` levels against a sequence of targets: level `k` certifies
/// against the target indexed by the ruler sequence, so every target is hit
/// infinitely often as levels accumulate.
pub fn build_delta_sequence(
    gammas: &[SimpleGraph],
    levels: u32,
    budgets: &DeltaBudgets,
    seed: u64,
) -> Result<DeltaGraph> {
    if gammas.is_empty() {
        return Err(Error::precondition("build_delta_sequence", "no target graphs"));
    }
    let mut delta = DeltaGraph::default();
    for k in 1..=levels {
        let n_k = ruler_sequence(k as u64);
        let gamma = &gammas[(n_k as usize - 1) % gammas.len()];
        let root = ((n_k as usize - 1) % gamma.vertex_count()) as u32;
        let level = build_delta_level_with_root(gamma, k, &delta, root, budgets, seed ^ k as u64)?;
        delta.levels.push(level);
    }
    Ok(delta)
}

fn next_permutation(perm: &mut [u32]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

// ---------------------------------------------------------------------------
// sphere-tube metric graph

/// Weighted coarse model of a manifold built from unit spheres joined by
/// tubes along the edges of a degree-at-most-3 graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricGraph {
    /// `sphere` nodes come first (one per source vertex), then one `tube`
    /// node per source edge.
    pub sphere_nodes: usize,
    pub adjacency: Vec<Vec<(u32, f64)>>,
}

/// Convention: spheres sit at the antipodes of their attachment circles, so
/// crossing a sphere costs pi and a tube has length 1; a sphere-tube edge
/// carries half of each.
pub fn sphere_tube_graph(delta: &SimpleGraph) -> Result<MetricGraph> {
    if !delta.is_connected() {
        return Err(Error::precondition("sphere_tube_graph", "graph must be connected"));
    }
    if delta.max_degree() > 3 {
        return Err(Error::precondition(
            "sphere_tube_graph",
            format!("degree {} exceeds 3", delta.max_degree()),
        ));
    }
    let n = delta.vertex_count();
    let mut edges = Vec::new();
    for v in 0..n as u32 {
        for &w in delta.neighbors(v) {
            if v < w {
                edges.push((v, w));
            }
        }
    }
    let mut adjacency = vec![Vec::new(); n + edges.len()];
    let half = (std::f64::consts::PI + 1.0) / 2.0;
    for (i, (v, w)) in edges.iter().enumerate() {
        let tube = (n + i) as u32;
        adjacency[*v as usize].push((tube, half));
        adjacency[tube as usize].push((*v, half));
        adjacency[*w as usize].push((tube, half));
        adjacency[tube as usize].push((*w, half));
    }
    Ok(MetricGraph {
        sphere_nodes: n,
        adjacency,
    })
}

/// Dijkstra distance between two nodes of the metric graph.
pub fn metric_graph_distance(g: &MetricGraph, a: u32, b: u32) -> f64 {
    #[derive(PartialEq)]
    struct Entry(f64, u32);
    impl Eq for Entry {}
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            other.0.partial_cmp(&self.0).unwrap()
        }
    }
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    let n = g.adjacency.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = std::collections::BinaryHeap::new();
    dist[a as usize] = 0.0;
    heap.push(Entry(0.0, a));
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        if v == b {
            return d;
        }
        for &(w, len) in &g.adjacency[v as usize] {
            let nd = d + len;
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                heap.push(Entry(nd, w));
            }
        }
    }
    dist[b as usize]
}
