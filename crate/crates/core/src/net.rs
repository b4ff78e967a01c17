//! Maximal r-separated nets, intersection graphs, and growth classification.
//!
//! A net is a maximal set of sample points at pairwise distance at least `r`,
//! built by a greedy pass in the stored (seeded-shuffle) order of the point
//! set. Over the net vertices, the intersection graph at inflation `lambda`
//! joins two vertices exactly when their open `lambda r`-balls meet, i.e. when
//! `d(v, w) < 2 lambda r`. Shortest-path balls of these graphs are counted by
//! BFS and fitted against polynomial and exponential growth hypotheses.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::PointIndex;
use crate::models::{ManifoldModel, Point, PointSet};

/// A maximal `r`-separated subset of a sampled region.
#[derive(Debug, Clone)]
pub struct Net {
    pub model: ManifoldModel,
    pub r: f64,
    pub vertices: Vec<Point>,
    /// Seed of the source point set (generation provenance).
    pub source_seed: u64,
    index: PointIndex,
}

/// Verification report for the net axioms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetReport {
    pub separation_ok: bool,
    /// Least pairwise vertex distance observed (within a 2r search window).
    pub min_separation: f64,
    /// Greatest distance from a source point to the net.
    pub cover_radius: f64,
    pub lebesgue_ok: bool,
    pub lebesgue_centers_checked: usize,
}

impl Net {
    /// Greedy net construction in the stored order of `points`.
    ///
    /// A point is kept iff it lies at distance `>= r` from every point kept
    /// so far, so separation and maximality relative to the source hold by
    /// construction and are re-checked exactly by [`verify_net`].
    pub fn build(points: &PointSet, r: f64) -> Result<Net> {
        if !(r > 0.0) {
            return Err(Error::precondition("build_net", "r must be positive"));
        }
        if points.is_empty() {
            return Err(Error::precondition("build_net", "point set is empty"));
        }
        let model = points.model.clone();
        let mut index = PointIndex::new(&model, r)?;
        let mut vertices: Vec<Point> = Vec::new();
        for p in &points.points {
            if !index.has_within_open(p, r) {
                index.insert(vertices.len() as u32, p);
                vertices.push(p.clone());
            }
        }
        Ok(Net {
            model,
            r,
            vertices,
            source_seed: points.seed,
            index,
        })
    }

    /// Wraps an explicit vertex list (fixtures, deserialization). The list is
    /// not required to be separated; run [`verify_net`] to certify it.
    pub fn from_vertices(
        model: ManifoldModel,
        r: f64,
        vertices: Vec<Point>,
        source_seed: u64,
    ) -> Result<Net> {
        if !(r > 0.0) {
            return Err(Error::precondition("Net::from_vertices", "r must be positive"));
        }
        let mut index = PointIndex::new(&model, r)?;
        for (i, v) in vertices.iter().enumerate() {
            model.validate_point(v)?;
            index.insert(i as u32, v);
        }
        Ok(Net {
            model,
            r,
            vertices,
            source_seed,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Net vertices strictly within `radius` of `p`, as `(id, distance)`.
    pub fn vertices_within(&self, p: &[f64], radius: f64) -> Vec<(u32, f64)> {
        self.index.within_open(p, radius)
    }

    /// Distance from `p` to the nearest net vertex.
    pub fn nearest_vertex_distance(&self, p: &[f64]) -> f64 {
        self.index.nearest_distance(p, self.r)
    }

    /// Empirical `N_lambda`: the largest number of net vertices in any open
    /// `lambda r`-ball centered at a net vertex or at one of `extra_centers`.
    pub fn count_n_lambda(&self, lambda: f64, extra_centers: Option<&PointSet>) -> usize {
        let radius = lambda * self.r;
        let over_vertices = self
            .vertices
            .par_iter()
            .map(|v| self.vertices_within(v, radius).len())
            .max()
            .unwrap_or(0);
        let over_extra = extra_centers
            .map(|ps| {
                ps.points
                    .par_iter()
                    .map(|p| self.vertices_within(p, radius).len())
                    .max()
                    .unwrap_or(0)
            })
            .unwrap_or(0);
        over_vertices.max(over_extra)
    }

    /// Exact verification of separation, covering, and the sampled Lebesgue
    /// property of the doubled cover.
    pub fn verify(&self, points: &PointSet, lebesgue_centers: usize, seed: u64) -> NetReport {
        let r = self.r;
        // Separation: no other vertex strictly inside the r-ball.
        let (sep_ok, min_sep) = self
            .vertices
            .par_iter()
            .enumerate()
            .map(|(i, v)| {
                let near = self.vertices_within(v, 2.0 * r);
                let mut ok = true;
                let mut min_d = f64::INFINITY;
                for (j, d) in near {
                    if j as usize != i {
                        min_d = min_d.min(d);
                        if d < r {
                            ok = false;
                        }
                    }
                }
                (ok, min_d)
            })
            .reduce(
                || (true, f64::INFINITY),
                |(a_ok, a_min), (b_ok, b_min)| (a_ok && b_ok, a_min.min(b_min)),
            );

        // Covering: every source point is within r of the net.
        let cover_radius = points
            .points
            .par_iter()
            .map(|p| self.index.nearest_distance(p, r))
            .reduce(|| 0.0, f64::max);

        // Lebesgue number r for the doubled cover: each sampled r-ball
        // B(x, r) fits in 2B_v for the nearest vertex v, checked by probing
        // points of the ball directly.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c65_6265);
        let n_centers = lebesgue_centers.min(points.len());
        let mut lebesgue_ok = true;
        let dim = self.model.dim();
        for _ in 0..n_centers {
            let x = &points.points[rng.gen_range(0..points.len())];
            let near = self.vertices_within(x, r);
            let Some((v_id, _)) = near
                .iter()
                .copied()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            else {
                lebesgue_ok = false;
                continue;
            };
            let v = &self.vertices[v_id as usize];
            for _ in 0..24 {
                let t = rng.gen_range(0.0..r);
                let mut dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n < 1e-9 {
                    continue;
                }
                dir.iter_mut().for_each(|c| *c *= t / n);
                if let Ok(y) = self.model.exp_map(x, &dir) {
                    if self.model.distance_unchecked(&y, v) >= 2.0 * r {
                        lebesgue_ok = false;
                    }
                }
            }
        }

        NetReport {
            separation_ok: sep_ok && min_sep >= r,
            min_separation: min_sep,
            cover_radius,
            lebesgue_ok,
            lebesgue_centers_checked: n_centers,
        }
    }
}

/// Intersection graph of the inflated ball cover, in CSR adjacency form.
#[derive(Debug, Clone)]
pub struct IntersectionGraph {
    pub lambda: f64,
    pub r: f64,
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl IntersectionGraph {
    /// Adjacency rule: `v ~ w` iff `d(v, w) < 2 lambda r` and `v != w`
    /// (open balls of radius `lambda r` intersect).
    pub fn build(net: &Net, lambda: f64) -> Result<IntersectionGraph> {
        if !(lambda >= 1.0) {
            return Err(Error::precondition("intersection_graph", "lambda must be >= 1"));
        }
        let cutoff = 2.0 * lambda * net.r;
        // Query in spatially sorted order so consecutive scans reuse hot
        // buckets; results land in id-indexed slots either way.
        let mut order: Vec<u32> = (0..net.len() as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            let pa = &net.vertices[a as usize];
            let pb = &net.vertices[b as usize];
            pa.partial_cmp(pb).unwrap()
        });
        let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); net.len()];
        let slots: Vec<(u32, Vec<u32>)> = order
            .par_iter()
            .map(|&i| {
                let v = &net.vertices[i as usize];
                let mut nbrs: Vec<u32> = net
                    .vertices_within(v, cutoff)
                    .into_iter()
                    .filter(|(j, _)| *j != i)
                    .map(|(j, _)| j)
                    .collect();
                nbrs.sort_unstable();
                (i, nbrs)
            })
            .collect();
        for (i, nbrs) in slots {
            adjacency[i as usize] = nbrs;
        }
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        let mut total = 0u64;
        offsets.push(0u32);
        for nbrs in &adjacency {
            total += nbrs.len() as u64;
            if total > u32::MAX as u64 {
                return Err(Error::Resource {
                    op: "intersection_graph".into(),
                    required: total as u128,
                    budget: u32::MAX as u128,
                });
            }
            offsets.push(total as u32);
        }
        let mut targets = Vec::with_capacity(total as usize);
        for nbrs in adjacency {
            targets.extend(nbrs);
        }
        Ok(IntersectionGraph {
            lambda,
            r: net.r,
            offsets,
            targets,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        let lo = self.offsets[v as usize] as usize;
        let hi = self.offsets[v as usize + 1] as usize;
        &self.targets[lo..hi]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.neighbors(v).len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count() as u32)
            .into_par_iter()
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// BFS distances from `start`; unreachable vertices get `u32::MAX`.
    pub fn bfs_distances(&self, start: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[start as usize] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &w in self.neighbors(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Cumulative ball sizes `|B(center, R)|` for `R = 0..=r_max`.
    pub fn ball_counts(&self, center: u32, r_max: u32) -> Vec<u64> {
        let dist = self.bfs_distances(center);
        let mut counts = vec![0u64; r_max as usize + 1];
        for d in dist {
            if d != u32::MAX && d <= r_max {
                counts[d as usize] += 1;
            }
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        counts
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return true;
        }
        let dist = self.bfs_distances(0);
        dist.iter().all(|&d| d != u32::MAX)
    }

    /// Graph exchange JSON (`{vertices, edges, r, lambda}`).
    pub fn to_exchange(&self, net: &Net) -> GraphExchange {
        let vertices = net
            .vertices
            .iter()
            .enumerate()
            .map(|(id, coords)| VertexRecord {
                id: id as u32,
                coords: coords.clone(),
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
            r: Some(self.r),
            lambda: Some(self.lambda),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: u32,
    pub coords: Vec<f64>,
}

/// Shared graph exchange format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphExchange {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<[u32; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

/// Outcome of checking `2 lambda r |v-w|_Gamma >= |v-w|_M` on sampled pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceComparisonReport {
    /// Largest `|v-w|_M - 2 lambda r |v-w|_Gamma`; nonpositive when the
    /// comparison holds.
    pub max_violation: f64,
    pub pairs_checked: usize,
    pub disconnected_skipped: usize,
}

/// Samples `n_pairs` vertex pairs and evaluates the distance comparison.
///
/// Pairs are grouped by BFS source so each source needs one traversal.
pub fn check_distance_comparison(
    net: &Net,
    graph: &IntersectionGraph,
    n_pairs: usize,
    seed: u64,
) -> Result<DistanceComparisonReport> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(Error::precondition("check_distance_comparison", "empty graph"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6469_7374);
    let n_sources = ((n_pairs + 199) / 200).clamp(1, 64).min(n);
    let per_source = (n_pairs + n_sources - 1) / n_sources;
    let sources: Vec<u32> = (0..n_sources).map(|_| rng.gen_range(0..n as u32)).collect();
    let targets: Vec<Vec<u32>> = sources
        .iter()
        .map(|_| (0..per_source).map(|_| rng.gen_range(0..n as u32)).collect())
        .collect();

    let factor = 2.0 * graph.lambda * net.r;
    let results: Vec<(f64, usize, usize)> = sources
        .par_iter()
        .zip(targets.par_iter())
        .map(|(&s, tgts)| {
            let dist = graph.bfs_distances(s);
            let mut max_violation = f64::NEG_INFINITY;
            let mut checked = 0usize;
            let mut skipped = 0usize;
            for &t in tgts {
                if dist[t as usize] == u32::MAX {
                    skipped += 1;
                    continue;
                }
                let dm = net
                    .model
                    .distance_unchecked(&net.vertices[s as usize], &net.vertices[t as usize]);
                let violation = dm - factor * dist[t as usize] as f64;
                max_violation = max_violation.max(violation);
                checked += 1;
            }
            (max_violation, checked, skipped)
        })
        .collect();

    let mut max_violation = f64::NEG_INFINITY;
    let mut pairs_checked = 0;
    let mut disconnected_skipped = 0;
    for (v, c, s) in results {
        max_violation = max_violation.max(v);
        pairs_checked += c;
        disconnected_skipped += s;
    }
    Ok(DistanceComparisonReport {
        max_violation,
        pairs_checked,
        disconnected_skipped,
    })
}

/// Growth classification outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Growth {
    Polynomial(u32),
    Exponential,
    Inconclusive,
}

/// Ball-count table plus fits of both growth hypotheses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthFit {
    /// `(R, max over sampled centers of |B(x, R)|)`.
    pub table: Vec<(u32, u64)>,
    pub fitted_exponent: f64,
    pub poly_log_coeff: f64,
    pub exp_rate: f64,
    pub exp_log_coeff: f64,
    pub poly_residual: f64,
    pub exp_residual: f64,
    pub fit_window: (u32, u32),
    pub classification: Growth,
}

impl GrowthFit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,count\n");
        for (r, c) in &self.table {
            out.push_str(&format!("{r},{c}\n"));
        }
        out
    }
}

/// BFS ball counts from the given centers with a residual-ratio fit.
///
/// The polynomial hypothesis regresses `log |B|` on `log R`, the exponential
/// hypothesis regresses `log |B|` on `R`, both over the top half of the radii
/// that precede saturation. A hypothesis wins when its RMS residual is below
/// `margin` times the other's; otherwise the fit is inconclusive.
///
/// `r_max` must stay inside the range where balls are unclipped by the
/// sampled region boundary (graph radius `R` reaches manifold distance up to
/// `2 lambda r R`); clipped tails bend both hypotheses.
pub fn graph_growth(
    graph: &IntersectionGraph,
    centers: &[u32],
    r_max: u32,
    margin: f64,
) -> Result<GrowthFit> {
    if centers.is_empty() {
        return Err(Error::precondition("graph_growth", "no centers"));
    }
    if r_max < 1 {
        return Err(Error::precondition("graph_growth", "r_max must be >= 1"));
    }
    let per_center: Vec<Vec<u64>> = centers
        .par_iter()
        .map(|&c| graph.ball_counts(c, r_max))
        .collect();
    let mut table = Vec::with_capacity(r_max as usize + 1);
    for radius in 0..=r_max {
        let maxc = per_center
            .iter()
            .map(|c| c[radius as usize])
            .max()
            .unwrap();
        table.push((radius, maxc));
    }
    // Monotonicity holds by construction of cumulative counts.
    for w in table.windows(2) {
        debug_assert!(w[1].1 >= w[0].1);
    }

    // Saturated tail: counts stop growing once BFS exhausts the component.
    let mut r_end = r_max;
    for w in table.windows(2) {
        if w[1].1 == w[0].1 {
            r_end = w[0].0;
            break;
        }
    }
    let lo = ((r_end as f64 / 2.0).ceil() as u32).max(2);
    let window: Vec<(f64, f64)> = table
        .iter()
        .filter(|(r, _)| *r >= lo && *r <= r_end)
        .map(|(r, c)| (*r as f64, (*c as f64).ln()))
        .collect();

    if window.len() < 4 {
        return Ok(GrowthFit {
            table,
            fitted_exponent: f64::NAN,
            poly_log_coeff: f64::NAN,
            exp_rate: f64::NAN,
            exp_log_coeff: f64::NAN,
            poly_residual: f64::NAN,
            exp_residual: f64::NAN,
            fit_window: (lo, r_end),
            classification: Growth::Inconclusive,
        });
    }

    let poly_pts: Vec<(f64, f64)> = window.iter().map(|(r, lc)| (r.ln(), *lc)).collect();
    let (poly_slope, poly_icept, poly_res) = least_squares(&poly_pts);
    let (exp_slope, exp_icept, exp_res) = least_squares(&window);

    let classification = if exp_res < margin * poly_res {
        Growth::Exponential
    } else if poly_res < margin * exp_res {
        Growth::Polynomial(poly_slope.round().max(0.0) as u32)
    } else {
        Growth::Inconclusive
    };

    Ok(GrowthFit {
        table,
        fitted_exponent: poly_slope,
        poly_log_coeff: poly_icept,
        exp_rate: exp_slope,
        exp_log_coeff: exp_icept,
        poly_residual: poly_res,
        exp_residual: exp_res,
        fit_window: (lo, r_end),
        classification,
    })
}

/// Slope, intercept and RMS residual of an ordinary least-squares line.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|(x, _)| x).sum();
    let sy: f64 = pts.iter().map(|(_, y)| y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let icept = (sy - slope * sx) / n;
    let rss: f64 = pts
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + icept);
            e * e
        })
        .sum();
    (slope, icept, (rss / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_points(spacing: f64, side: f64, seed: u64) -> PointSet {
        let model = ManifoldModel::euclidean(2);
        let k = (side / spacing).round() as i64;
        let mut points = Vec::new();
        for i in 0..=k {
            for j in 0..=k {
                points.push(vec![i as f64 * spacing, j as f64 * spacing]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        points.shuffle(&mut rng);
        PointSet { model, seed, points }
    }

    #[test]
    fn single_point_net() {
        let ps = PointSet {
            model: ManifoldModel::euclidean(2),
            seed: 0,
            points: vec![vec![0.0, 0.0]],
        };
        let net = Net::build(&ps, 1.0).unwrap();
        assert_eq!(net.len(), 1);
    }

    #[test]
    fn radius_beyond_diameter_gives_single_vertex() {
        let ps = grid_points(0.5, 2.0, 1);
        let net = Net::build(&ps, 100.0).unwrap();
        assert_eq!(net.len(), 1);
    }

    #[test]
    fn grid_net_separation_and_maximality_exact() {
        let ps = grid_points(0.1, 10.0, 2);
        let net = Net::build(&ps, 1.0).unwrap();

        // Exhaustive pairwise oracle for separation.
        for i in 0..net.len() {
            for j in (i + 1)..net.len() {
                let d = net
                    .model
                    .distance_unchecked(&net.vertices[i], &net.vertices[j]);
                assert!(d >= 1.0, "pair {i},{j} at distance {d}");
            }
        }
        // Exhaustive coverage oracle for maximality.
        for p in &ps.points {
            let min_d = net
                .vertices
                .iter()
                .map(|v| net.model.distance_unchecked(p, v))
                .fold(f64::INFINITY, f64::min);
            assert!(min_d < 1.0);
        }
        // Size bounds from covering (r-balls cover the square) and packing
        // (r/2-balls are disjoint inside the inflated square).
        let area = 10.0f64 * 10.0;
        let lower = area / (std::f64::consts::PI * 1.0);
        let upper = (10.0 + 1.0) * (10.0 + 1.0) / (std::f64::consts::PI * 0.25);
        let n = net.len() as f64;
        assert!(n >= lower.floor(), "net size {n} below covering bound {lower}");
        assert!(n <= upper.ceil(), "net size {n} above packing bound {upper}");

        let report = net.verify(&ps, 200, 7);
        assert!(report.separation_ok);
        assert!(report.cover_radius < 1.0);
        assert!(report.lebesgue_ok);
    }

    #[test]
    fn deleted_vertex_is_flagged_by_cover_radius() {
        let ps = grid_points(0.1, 6.0, 3);
        let net = Net::build(&ps, 1.0).unwrap();
        let mut vertices = net.vertices.clone();
        vertices.remove(0);
        let broken = Net::from_vertices(net.model.clone(), 1.0, vertices, ps.seed).unwrap();
        let report = broken.verify(&ps, 50, 7);
        // The removed vertex's own position is a source point at distance
        // >= r from every remaining vertex.
        assert!(report.cover_radius >= 1.0);
    }

    #[test]
    fn intersection_graph_trivial_and_boundary_cases() {
        let model = ManifoldModel::euclidean(2);
        let net1 = Net::from_vertices(model.clone(), 1.0, vec![vec![0.0, 0.0]], 0).unwrap();
        let g1 = IntersectionGraph::build(&net1, 1.0).unwrap();
        assert_eq!(g1.vertex_count(), 1);
        assert_eq!(g1.edge_count(), 0);

        // Open-rule boundary: adjacent strictly below 2 lambda r, not at it.
        let delta = 1e-9;
        let lambda = 1.5;
        let near = Net::from_vertices(
            model.clone(),
            1.0,
            vec![vec![0.0, 0.0], vec![2.0 * lambda - delta, 0.0]],
            0,
        )
        .unwrap();
        let g_near = IntersectionGraph::build(&near, lambda).unwrap();
        assert_eq!(g_near.edge_count(), 1);

        let at = Net::from_vertices(
            model,
            1.0,
            vec![vec![0.0, 0.0], vec![2.0 * lambda, 0.0]],
            0,
        )
        .unwrap();
        let g_at = IntersectionGraph::build(&at, lambda).unwrap();
        assert_eq!(g_at.edge_count(), 0);
    }

    #[test]
    fn every_edge_is_shorter_than_cutoff() {
        let ps = grid_points(0.2, 8.0, 4);
        let net = Net::build(&ps, 1.0).unwrap();
        let g = IntersectionGraph::build(&net, 2.0).unwrap();
        for v in 0..g.vertex_count() as u32 {
            for &w in g.neighbors(v) {
                let d = net
                    .model
                    .distance_unchecked(&net.vertices[v as usize], &net.vertices[w as usize]);
                assert!(d < 4.0);
            }
        }
        // Degree bound from the empirical packing count.
        let n4 = net.count_n_lambda(4.0, None);
        assert!(g.max_degree() <= n4 - 1);
    }

    #[test]
    fn n_lambda_cases() {
        let ps = grid_points(0.2, 8.0, 5);
        let net = Net::build(&ps, 1.0).unwrap();
        // Radius below the separation: only the center vertex itself.
        assert_eq!(net.count_n_lambda(0.4, None), 1);
        // lambda = 2 with r = 1: disks of radius 1/2 packed in radius 2.5.
        let n2 = net.count_n_lambda(2.0, None);
        assert!(n2 <= 25, "N_2 = {n2}");
        // Exhaustive oracle at vertex centers.
        let oracle = net
            .vertices
            .iter()
            .map(|v| {
                net.vertices
                    .iter()
                    .filter(|w| net.model.distance_unchecked(v, w) < 2.0)
                    .count()
            })
            .max()
            .unwrap();
        assert_eq!(n2, oracle);

        let empty = Net::from_vertices(ManifoldModel::euclidean(2), 1.0, vec![], 0).unwrap();
        assert_eq!(empty.count_n_lambda(2.0, None), 0);
    }

    #[test]
    fn distance_comparison_holds_on_euclidean_net() {
        let ps = grid_points(0.2, 10.0, 6);
        let net = Net::build(&ps, 1.0).unwrap();
        for lambda in [1.0, 2.0] {
            let g = IntersectionGraph::build(&net, lambda).unwrap();
            let report = check_distance_comparison(&net, &g, 10_000, 11).unwrap();
            assert!(
                report.max_violation <= 0.0,
                "lambda {lambda}: violation {}",
                report.max_violation
            );
            assert_eq!(report.disconnected_skipped, 0);
        }
    }

    #[test]
    fn bfs_distances_match_floyd_warshall_on_small_graph() {
        let ps = grid_points(0.7, 3.5, 8);
        let net = Net::build(&ps, 0.7).unwrap();
        let g = IntersectionGraph::build(&net, 1.0).unwrap();
        let n = g.vertex_count();
        // Independent oracle: Floyd-Warshall over the same adjacency.
        let inf = u32::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for v in 0..n {
            d[v][v] = 0;
            for &w in g.neighbors(v as u32) {
                d[v][w as usize] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let alt = d[i][k].saturating_add(d[k][j]);
                    if alt < d[i][j] {
                        d[i][j] = alt;
                    }
                }
            }
        }
        for s in 0..n {
            let bfs = g.bfs_distances(s as u32);
            for t in 0..n {
                let want = if d[s][t] >= inf { u32::MAX } else { d[s][t] };
                assert_eq!(bfs[t], want, "distance {s}->{t}");
            }
        }
    }

    #[test]
    fn path_graph_growth_is_linear() {
        let model = ManifoldModel::euclidean(1);
        let vertices: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64]).collect();
        let net = Net::from_vertices(model, 1.0, vertices, 0).unwrap();
        let g = IntersectionGraph::build(&net, 1.0).unwrap();
        assert_eq!(g.edge_count(), 199);
        let fit = graph_growth(&g, &[100], 40, 0.5).unwrap();
        assert_eq!(fit.classification, Growth::Polynomial(1));
        // |B(x, R)| = 2R + 1 before saturation.
        for (r, c) in fit.table.iter().take(20) {
            assert_eq!(*c, 2 * *r as u64 + 1);
        }
    }

    #[test]
    fn euclidean_net_growth_is_quadratic() {
        let ps = grid_points(0.2, 24.0, 9);
        let net = Net::build(&ps, 0.5).unwrap();
        let g = IntersectionGraph::build(&net, 1.0).unwrap();
        assert!(g.is_connected());
        // Center vertex: nearest to the middle of the square.
        let mid = vec![12.0, 12.0];
        let center = (0..net.len())
            .min_by(|&a, &b| {
                let da = net.model.distance_unchecked(&net.vertices[a], &mid);
                let db = net.model.distance_unchecked(&net.vertices[b], &mid);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap() as u32;
        let fit = graph_growth(&g, &[center], 18, 0.5).unwrap();
        match &fit.classification {
            Growth::Polynomial(d) => assert_eq!(*d, 2),
            other => panic!("expected quadratic growth, got {other:?}"),
        }
        assert!(
            (1.7..=2.3).contains(&fit.fitted_exponent),
            "exponent {}",
            fit.fitted_exponent
        );
    }

    #[test]
    fn hyperbolic_net_growth_is_exponential() {
        let model = ManifoldModel::hyperbolic_plane();
        let ps = model.sample_region(&[0.0, 0.0], 9.0, 0.45, 10).unwrap();
        let net = Net::build(&ps, 0.5).unwrap();
        let g = IntersectionGraph::build(&net, 1.0).unwrap();
        let center = (0..net.len())
            .min_by(|&a, &b| {
                let da = crate::models::norm(&net.vertices[a]);
                let db = crate::models::norm(&net.vertices[b]);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap() as u32;
        let fit = graph_growth(&g, &[center], 11, 0.5).unwrap();
        assert_eq!(fit.classification, Growth::Exponential, "fit {fit:?}");
        // Ball counts should track the area curve up to bounded factors.
        let area_9 = 2.0 * std::f64::consts::PI * (9f64.cosh() - 1.0);
        let total = net.len() as f64;
        assert!(total > area_9 / 4.0 && total < area_9 * 8.0);
    }

    #[test]
    fn euclidean_growth_degree_is_two_for_each_inflation() {
        // The fitted degree of the net graph matches the plane's growth
        // degree at every tested inflation. Larger inflations reach farther
        // per BFS step, so their radii shrink to stay clear of the boundary.
        let ps = grid_points(0.25, 56.0, 14);
        let net = Net::build(&ps, 0.5).unwrap();
        let mid = vec![28.0, 28.0];
        let center = (0..net.len())
            .min_by(|&a, &b| {
                let da = net.model.distance_unchecked(&net.vertices[a], &mid);
                let db = net.model.distance_unchecked(&net.vertices[b], &mid);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap() as u32;
        for (lambda, r_max) in [(1.0, 20u32), (2.0, 12), (4.0, 7)] {
            let g = IntersectionGraph::build(&net, lambda).unwrap();
            let fit = graph_growth(&g, &[center], r_max, 0.5).unwrap();
            match &fit.classification {
                Growth::Polynomial(d) => {
                    assert_eq!(*d, 2, "lambda {lambda}: degree {d} ({fit:?})")
                }
                other => panic!("lambda {lambda}: classified {other:?} ({fit:?})"),
            }
        }
    }

    #[test]
    fn growth_monotone_for_every_center() {
        let ps = grid_points(0.25, 8.0, 12);
        let net = Net::build(&ps, 0.5).unwrap();
        let g = IntersectionGraph::build(&net, 1.0).unwrap();
        for c in [0u32, 5, 17] {
            let counts = g.ball_counts(c, 20);
            for w in counts.windows(2) {
                assert!(w[1] >= w[0]);
            }
        }
    }

    #[test]
    fn graph_exchange_round_trip() {
        let ps = grid_points(0.5, 3.0, 13);
        let net = Net::build(&ps, 0.8).unwrap();
        let g = IntersectionGraph::build(&net, 1.0).unwrap();
        let exchange = g.to_exchange(&net);
        let text = serde_json::to_string(&exchange).unwrap();
        let back: GraphExchange = serde_json::from_str(&text).unwrap();
        assert_eq!(back.vertices.len(), net.len());
        assert_eq!(back.edges.len(), g.edge_count());
        assert_eq!(back.lambda, Some(1.0));
    }
}
