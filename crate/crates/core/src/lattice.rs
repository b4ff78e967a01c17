//! Parity-colored lattice maps and their calibration.
//!
//! `Z^n` with the `l_inf`-distance-1 adjacency is properly colored by the
//! parity pattern of the coordinates (2^n colors). Appending the standard
//! basis vector of the color to each lattice point gives a map into
//! `R^{n + 2^n}` that, after scaling, keeps convex hulls of disjoint cliques
//! at distance at least 1 while adjacent vertices stay within a reported
//! diameter `rho`. The calibration here finds the least such scale over an
//! exhaustive clique enumeration in a box (small `n`) or over structured and
//! sampled clique families (larger `n`, where subset enumeration is
//! hopeless), and certifies the outcome pair by pair.
//!
//! Cliques of this lattice graph are exactly the vertex subsets of unit
//! cells: pairwise `l_inf` distance at most 1 forces at most two values per
//! axis.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ManifoldKind;
use crate::net::{IntersectionGraph, Net};
use crate::sparsevec::SparseVec;

/// Color of a lattice point: the binary code of its coordinate parities.
///
/// Vertices at `l_inf` distance 1 differ in at least one coordinate by
/// exactly 1, hence in at least one parity bit.
pub fn parity_color(v: &[i64]) -> u32 {
    debug_assert!(v.len() <= 20);
    let mut c = 0u32;
    for (bit, x) in v.iter().enumerate() {
        c |= ((x.rem_euclid(2)) as u32) << bit;
    }
    c
}

/// The scaled map `v -> scale * (v ++ e_color(v))` into `R^{n + 2^n}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiMap {
    pub n: usize,
    pub scale: f64,
    pub color_count: u64,
    /// Max image distance of adjacent lattice vertices: `scale * sqrt(n+2)`.
    pub rho: f64,
    /// Target dimension `n + 2^n`.
    pub d: usize,
}

impl PhiMap {
    pub fn new(n: usize, scale: f64) -> Result<PhiMap> {
        if n == 0 || n > 20 {
            return Err(Error::precondition("PhiMap::new", "n must be in 1..=20"));
        }
        if !(scale > 0.0) {
            return Err(Error::precondition("PhiMap::new", "scale must be positive"));
        }
        let color_count = 1u64 << n;
        Ok(PhiMap {
            n,
            scale,
            color_count,
            rho: scale * ((n as f64) + 2.0).sqrt(),
            d: n + color_count as usize,
        })
    }

    /// Dense image; the color slot sits after the lattice block.
    pub fn eval_dense(&self, v: &[i64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (i, x) in v.iter().enumerate() {
            out[i] = self.scale * (*x as f64);
        }
        out[self.n + parity_color(v) as usize] = self.scale;
        out
    }

    /// Sparse image, for high-dimensional use.
    pub fn eval_sparse(&self, v: &[i64]) -> SparseVec {
        let mut entries: Vec<(u32, f64)> = v
            .iter()
            .enumerate()
            .map(|(i, x)| (i as u32, self.scale * (*x as f64)))
            .collect();
        entries.push(((self.n as u32) + parity_color(v), self.scale));
        SparseVec::from_entries(entries)
    }

    /// `<Phi(v), Phi(w)>` in closed form.
    pub fn image_dot(&self, v: &[i64], w: &[i64]) -> f64 {
        let lat: i64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
        let color = if parity_color(v) == parity_color(w) { 1.0 } else { 0.0 };
        self.scale * self.scale * (lat as f64 + color)
    }

    /// `|Phi(v) - Phi(w)|`.
    pub fn image_distance(&self, v: &[i64], w: &[i64]) -> f64 {
        let lat: i64 = v.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
        let color = if parity_color(v) == parity_color(w) { 0.0 } else { 2.0 };
        self.scale * (lat as f64 + color).sqrt()
    }
}

/// A clique of the lattice graph: distinct points, pairwise `l_inf <= 1`.
pub type Clique = Vec<Vec<i64>>;

fn linf(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or(0)
}

fn validate_clique(op: &str, label: &str, c: &Clique, n: usize, max: u64) -> Result<()> {
    if c.is_empty() {
        return Err(Error::precondition(op, format!("clique {label} is empty")));
    }
    if c.len() as u64 > max {
        return Err(Error::precondition(
            op,
            format!("clique {label} has {} points, limit {max}", c.len()),
        ));
    }
    for p in c {
        if p.len() != n {
            return Err(Error::precondition(
                op,
                format!("clique {label} has a point of dimension {}, expected {n}", p.len()),
            ));
        }
    }
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            if c[i] == c[j] {
                return Err(Error::precondition(
                    op,
                    format!("clique {label} repeats point {:?}", c[i]),
                ));
            }
            if linf(&c[i], &c[j]) > 1 {
                return Err(Error::precondition(
                    op,
                    format!(
                        "clique {label}: points {:?} and {:?} are not adjacent",
                        c[i], c[j]
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Minimal Euclidean distance between `Conv[Phi(A)]` and `Conv[Phi(B)]`.
///
/// Solved as a convex quadratic over the product of barycentric simplices by
/// projected gradient with a `1/L` step, 5 seeded restarts and a 10^4
/// iteration cap. The Gram matrix of the generators is closed-form, so the
/// cost does not depend on the target dimension.
pub fn clique_hull_distance(a: &Clique, b: &Clique, phi: &PhiMap) -> Result<f64> {
    let op = "clique_hull_distance";
    validate_clique(op, "A", a, phi.n, phi.color_count)?;
    validate_clique(op, "B", b, phi.n, phi.color_count)?;
    for p in a {
        if b.contains(p) {
            return Err(Error::precondition(
                op,
                format!("cliques are not disjoint: both contain {p:?}"),
            ));
        }
    }
    Ok(hull_distance_unchecked(a, b, phi))
}

pub(crate) fn hull_distance_unchecked(a: &Clique, b: &Clique, phi: &PhiMap) -> f64 {
    let ka = a.len();
    let kb = b.len();
    let m = ka + kb;
    // Signed Gram: the objective is |sum_i alpha_i Phi(a_i) - sum_j beta_j Phi(b_j)|^2.
    // Generators are anchored at Phi(a[0]) first; the difference of two
    // barycenters is translation invariant and the anchored Gram keeps the
    // step size of the solver tied to the clique diameter, not to the
    // cliques' absolute position.
    let mut gram = vec![vec![0.0f64; m]; m];
    let point = |i: usize| -> &Vec<i64> {
        if i < ka {
            &a[i]
        } else {
            &b[i - ka]
        }
    };
    let anchor = &a[0];
    let tt = phi.image_dot(anchor, anchor);
    for i in 0..m {
        for j in i..m {
            let sign = if (i < ka) == (j < ka) { 1.0 } else { -1.0 };
            let g = phi.image_dot(point(i), point(j)) - phi.image_dot(point(i), anchor)
                - phi.image_dot(anchor, point(j))
                + tt;
            let g = sign * g;
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let lips = 2.0 * power_iteration_lmax(&gram).max(1e-12);

    let objective = |z: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            let zi = z[i];
            if zi == 0.0 {
                continue;
            }
            let row = &gram[i];
            let mut inner = 0.0;
            for j in 0..m {
                inner += row[j] * z[j];
            }
            acc += zi * inner;
        }
        acc
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x68756c6c);
    let mut best = f64::INFINITY;
    for seed_idx in 0..5 {
        let mut z = vec![0.0f64; m];
        if seed_idx == 0 {
            for x in z[..ka].iter_mut() {
                *x = 1.0 / ka as f64;
            }
            for x in z[ka..].iter_mut() {
                *x = 1.0 / kb as f64;
            }
        } else {
            for x in z.iter_mut() {
                *x = rng.gen_range(0.01..1.0);
            }
            project_simplex(&mut z[..ka]);
            project_simplex(&mut z[ka..]);
        }
        let mut grad = vec![0.0f64; m];
        let mut prev_obj = f64::INFINITY;
        for iter in 0..10_000 {
            for i in 0..m {
                let mut g = 0.0;
                for j in 0..m {
                    g += gram[i][j] * z[j];
                }
                grad[i] = 2.0 * g;
            }
            for i in 0..m {
                z[i] -= grad[i] / lips;
            }
            project_simplex(&mut z[..ka]);
            project_simplex(&mut z[ka..]);
            if iter % 32 == 31 {
                let obj = objective(&z);
                if (prev_obj - obj).abs() <= 1e-15 * (1.0 + obj.abs()) {
                    break;
                }
                prev_obj = obj;
            }
        }
        best = best.min(objective(&z));
    }
    best.max(0.0).sqrt()
}

/// Distance from a point to the convex hull of sparse generators, by the
/// same projected-gradient scheme over one simplex.
pub fn point_to_hull_distance(gens: &[SparseVec], point: &SparseVec) -> f64 {
    let m = gens.len();
    if m == 0 {
        return f64::INFINITY;
    }
    // Work with the translated generators g_i - p: for simplex weights the
    // combination satisfies sum alpha_i g_i - p = sum alpha_i (g_i - p).
    let shifted: Vec<SparseVec> = gens.iter().map(|g| g.sub(point)).collect();
    let mut gram = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in i..m {
            let g = shifted[i].dot(&shifted[j]);
            gram[i][j] = g;
            gram[j][i] = g;
        }
    }
    let lips = 2.0 * power_iteration_lmax(&gram).max(1e-12);
    let mut alpha = vec![1.0 / m as f64; m];
    for _ in 0..10_000 {
        let mut grad = vec![0.0f64; m];
        for i in 0..m {
            let mut g = 0.0;
            for j in 0..m {
                g += 2.0 * gram[i][j] * alpha[j];
            }
            grad[i] = g;
        }
        let mut moved = 0.0;
        for i in 0..m {
            let next = alpha[i] - grad[i] / lips;
            moved += (next - alpha[i]).abs();
            alpha[i] = next;
        }
        project_simplex(&mut alpha);
        if moved < 1e-16 {
            break;
        }
    }
    // Final value from the explicit combination; the Gram form squares the
    // rounding noise and cannot resolve residuals near zero.
    let mut acc = SparseVec::new();
    for (g, a) in shifted.iter().zip(&alpha) {
        acc = acc.axpy(*a, g);
    }
    acc.norm()
}

/// Euclidean projection onto the probability simplex (sort-based).
fn project_simplex(z: &mut [f64]) {
    let k = z.len();
    if k == 0 {
        return;
    }
    if k == 1 {
        z[0] = 1.0;
        return;
    }
    let mut u: Vec<f64> = z.to_vec();
    u.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        css += ui;
        let t = (css - 1.0) / (i as f64 + 1.0);
        if i + 1 == k || u[i + 1] <= t {
            theta = t;
            break;
        }
    }
    for x in z.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

fn power_iteration_lmax(gram: &[Vec<f64>]) -> f64 {
    let m = gram.len();
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut lambda = 0.0;
    for _ in 0..80 {
        let mut w = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                w[i] += gram[i][j] * v[j];
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        lambda = norm;
        for i in 0..m {
            v[i] = w[i] / norm;
        }
    }
    lambda
}

/// Independent reference implementations for the hull distance.
///
/// These deliberately avoid the Gram shortcut and the projected-gradient
/// path: images are materialized densely and the barycentric domain is
/// searched on explicit simplex grids.
pub mod oracle {
    use super::*;

    fn dense_images(c: &Clique, phi: &PhiMap) -> Vec<Vec<f64>> {
        c.iter().map(|p| phi.eval_dense(p)).collect()
    }

    fn combo(points: &[Vec<f64>], weights: &[f64], d: usize) -> Vec<f64> {
        let mut out = vec![0.0; d];
        for (p, w) in points.iter().zip(weights) {
            for i in 0..d {
                out[i] += w * p[i];
            }
        }
        out
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// All nonnegative integer vectors of length `k` summing to `m`, scaled
    /// by `1/m`, optionally restricted to a window around `center`.
    fn simplex_grid(k: usize, m: i64, window: Option<(&[i64], i64)>) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let mut cur = vec![0i64; k];
        fn rec(
            k: usize,
            m: i64,
            idx: usize,
            left: i64,
            cur: &mut Vec<i64>,
            window: Option<(&[i64], i64)>,
            out: &mut Vec<Vec<f64>>,
        ) {
            if idx + 1 == k {
                cur[idx] = left;
                let ok = match window {
                    Some((c, w)) => (cur[idx] - c[idx]).abs() <= w,
                    None => true,
                };
                if ok {
                    out.push(cur.iter().map(|x| *x as f64 / m as f64).collect());
                }
                return;
            }
            let (lo, hi) = match window {
                Some((c, w)) => ((c[idx] - w).max(0), (c[idx] + w).min(left)),
                None => (0, left),
            };
            for v in lo..=hi {
                cur[idx] = v;
                rec(k, m, idx + 1, left - v, cur, window, out);
            }
        }
        rec(k, m, 0, m, &mut cur, window, &mut out);
        out
    }

    /// Single-level dense grid search at resolution `1/m`.
    pub fn hull_distance_grid(a: &Clique, b: &Clique, phi: &PhiMap, m: i64) -> f64 {
        let pa = dense_images(a, phi);
        let pb = dense_images(b, phi);
        let ga = simplex_grid(a.len(), m, None);
        let gb = simplex_grid(b.len(), m, None);
        let mut best = f64::INFINITY;
        for wa in &ga {
            let qa = combo(&pa, wa, phi.d);
            for wb in &gb {
                let qb = combo(&pb, wb, phi.d);
                best = best.min(dist(&qa, &qb));
            }
        }
        best
    }

    /// Iteratively refined local grid search: a global pass at resolution
    /// 1/8, then window-of-two refinements doubling the resolution per level.
    pub fn hull_distance_refined(a: &Clique, b: &Clique, phi: &PhiMap, levels: usize) -> f64 {
        let pa = dense_images(a, phi);
        let pb = dense_images(b, phi);
        let eval = |wa: &[f64], wb: &[f64]| -> f64 {
            dist(&combo(&pa, wa, phi.d), &combo(&pb, wb, phi.d))
        };

        let mut m: i64 = 8;
        let mut best = f64::INFINITY;
        let mut best_wa: Vec<f64> = Vec::new();
        let mut best_wb: Vec<f64> = Vec::new();
        for wa in simplex_grid(a.len(), m, None) {
            for wb in simplex_grid(b.len(), m, None) {
                let d = eval(&wa, &wb);
                if d < best {
                    best = d;
                    best_wa = wa.clone();
                    best_wb = wb.clone();
                }
            }
        }
        for _ in 0..levels {
            m *= 2;
            let ca: Vec<i64> = best_wa.iter().map(|w| (w * m as f64).round() as i64).collect();
            let cb: Vec<i64> = best_wb.iter().map(|w| (w * m as f64).round() as i64).collect();
            for wa in simplex_grid(a.len(), m, Some((&ca, 3))) {
                for wb in simplex_grid(b.len(), m, Some((&cb, 3))) {
                    let d = eval(&wa, &wb);
                    if d < best {
                        best = d;
                        best_wa = wa.clone();
                        best_wb = wb.clone();
                    }
                }
            }
        }
        best
    }
}

/// Enumerates the distinct cliques whose points lie in `[0, box_radius]^n`.
pub fn enumerate_box_cliques(n: usize, box_radius: i64) -> Result<Vec<Clique>> {
    if n == 0 || box_radius < 2 {
        return Err(Error::precondition(
            "enumerate_box_cliques",
            "need n >= 1 and box_radius >= 2",
        ));
    }
    let corners_per_cell = 1usize << n;
    let cells = (box_radius as u128).pow(n as u32);
    let estimate = cells * (1u128 << corners_per_cell);
    if estimate > 40_000_000 {
        return Err(Error::Resource {
            op: "enumerate_box_cliques".into(),
            required: estimate,
            budget: 40_000_000,
        });
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut cliques = Vec::new();
    let mut base = vec![0i64; n];
    'outer: loop {
        // Corners of the unit cell at `base`.
        let corners: Vec<Vec<i64>> = (0..corners_per_cell)
            .map(|mask| {
                (0..n)
                    .map(|i| base[i] + ((mask >> i) & 1) as i64)
                    .collect()
            })
            .collect();
        for subset in 1..(1u64 << corners_per_cell) {
            let clique: Clique = (0..corners_per_cell)
                .filter(|i| (subset >> i) & 1 == 1)
                .map(|i| corners[i].clone())
                .collect();
            let mut key: Vec<i64> = Vec::with_capacity(clique.len() * n);
            for p in &clique {
                key.extend(p);
            }
            if seen.insert(key) {
                cliques.push(clique);
            }
        }
        for i in 0..n {
            base[i] += 1;
            if base[i] <= box_radius - 1 {
                continue 'outer;
            }
            base[i] = 0;
        }
        break;
    }
    Ok(cliques)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub n: usize,
    pub box_radius: i64,
    pub scale: f64,
    pub rho: f64,
    /// Least hull distance over disjoint clique pairs at unit scale.
    pub min_distance_at_unit_scale: f64,
    /// Least hull distance re-verified at the calibrated scale.
    pub min_distance_at_scale: f64,
    pub extremal_pair: (Clique, Clique),
    pub cliques: usize,
    pub disjoint_pairs: usize,
    /// Pairs certified by the per-axis bounding-box gap alone during the
    /// verification sweep (the bound is exact, so no solve is needed).
    pub pairs_certified_by_bound: usize,
}

/// Per-axis bounding boxes give an exact lower bound on the hull distance:
/// every hull point has its `i`-th lattice coordinate inside the clique's
/// `i`-th coordinate range.
fn box_gap_lower_bound(a: &Clique, b: &Clique) -> f64 {
    let n = a[0].len();
    let mut acc = 0i64;
    for i in 0..n {
        let (mut alo, mut ahi) = (i64::MAX, i64::MIN);
        for p in a {
            alo = alo.min(p[i]);
            ahi = ahi.max(p[i]);
        }
        let (mut blo, mut bhi) = (i64::MAX, i64::MIN);
        for p in b {
            blo = blo.min(p[i]);
            bhi = bhi.max(p[i]);
        }
        let gap = (blo - ahi).max(alo - bhi).max(0);
        acc += gap * gap;
    }
    (acc as f64).sqrt()
}

/// Exhaustive calibration over a box.
///
/// Finds (bisection to 1e-3) the least scale at which every pair of disjoint
/// cliques in the box keeps hull distance at least 1, then re-verifies every
/// pair at the returned scale: pairs whose bounding-box gap already certifies
/// the bound are counted as such, all others are re-solved.
pub fn calibrate_scale(n: usize, box_radius: i64) -> Result<CalibrationReport> {
    let cliques = enumerate_box_cliques(n, box_radius)?;
    let unit = PhiMap::new(n, 1.0)?;

    let pair_indices: Vec<(usize, usize)> = (0..cliques.len())
        .flat_map(|i| ((i + 1)..cliques.len()).map(move |j| (i, j)))
        .collect();

    let disjoint: Vec<(usize, usize)> = pair_indices
        .into_iter()
        .filter(|(i, j)| cliques[*i].iter().all(|p| !cliques[*j].contains(p)))
        .collect();

    // Minimum at unit scale. The box-gap bound prunes distant pairs: the
    // overall minimum is at most sqrt(2) (any two disjoint corner singletons
    // of one cell), so pairs with a larger gap bound cannot be extremal.
    let coarse_cap = 2.0f64.sqrt() + 1e-9;
    let evaluated: Vec<(usize, usize, f64)> = disjoint
        .par_iter()
        .filter(|(i, j)| box_gap_lower_bound(&cliques[*i], &cliques[*j]) <= coarse_cap)
        .map(|&(i, j)| {
            (
                i,
                j,
                hull_distance_unchecked(&cliques[i], &cliques[j], &unit),
            )
        })
        .collect();
    let (ei, ej, min_unit) = evaluated
        .iter()
        .copied()
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
        .ok_or_else(|| Error::precondition("calibrate_scale", "no disjoint clique pairs"))?;
    if !(min_unit > 0.0) {
        return Err(Error::numeric(
            "calibrate_scale",
            "degenerate zero hull distance at unit scale",
        ));
    }

    // Bisection on the scale. Hull distances are homogeneous in the scale
    // (property-tested), so the predicate reduces to `s * min_unit >= 1`.
    let mut lo = 0.0f64;
    let mut hi = 2.0 / min_unit;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if mid * min_unit >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let scale = hi;
    let phi = PhiMap::new(n, scale)?;

    // Verification sweep at the calibrated scale, every disjoint pair.
    let results: Vec<(f64, bool)> = disjoint
        .par_iter()
        .map(|&(i, j)| {
            let lb = scale * box_gap_lower_bound(&cliques[i], &cliques[j]);
            if lb >= 1.0 {
                (lb, true)
            } else {
                (hull_distance_unchecked(&cliques[i], &cliques[j], &phi), false)
            }
        })
        .collect();
    let mut min_at_scale = f64::INFINITY;
    let mut by_bound = 0usize;
    for (d, certified) in &results {
        if *certified {
            by_bound += 1;
        } else {
            min_at_scale = min_at_scale.min(*d);
        }
    }

    // rho: enumerate adjacent lattice pairs of the box.
    let mut rho: f64 = 0.0;
    let mut base = vec![0i64; n];
    'outer: loop {
        for step_mask in 0..(3usize.pow(n as u32)) {
            let mut w = base.clone();
            let mut s = step_mask;
            let mut nonzero = false;
            let mut inside = true;
            for x in w.iter_mut() {
                let d = (s % 3) as i64 - 1;
                s /= 3;
                *x += d;
                if d != 0 {
                    nonzero = true;
                }
                if *x < 0 || *x > box_radius {
                    inside = false;
                }
            }
            if nonzero && inside {
                rho = rho.max(phi.image_distance(&base, &w));
            }
        }
        for i in 0..n {
            base[i] += 1;
            if base[i] <= box_radius {
                continue 'outer;
            }
            base[i] = 0;
        }
        break;
    }

    Ok(CalibrationReport {
        n,
        box_radius,
        scale,
        rho,
        min_distance_at_unit_scale: min_unit,
        min_distance_at_scale: min_at_scale,
        extremal_pair: (cliques[ei].clone(), cliques[ej].clone()),
        cliques: cliques.len(),
        disjoint_pairs: disjoint.len(),
        pairs_certified_by_bound: by_bound,
    })
}

/// Scale selection for lattice dimensions where box enumeration is
/// impossible (the subsets of a single cell already number `2^(2^n)`).
///
/// The required scale is the reciprocal of the least hull distance over:
/// axis-aligned segment pairs (the low-dimensional extremal configuration),
/// sampled disjoint subset pairs of one cell and of adjacent cells with
/// sizes up to `max_clique`, and any caller-supplied realized pairs.
pub fn calibrate_scale_sampled(
    n: usize,
    max_clique: usize,
    samples: usize,
    seed: u64,
    realized_pairs: &[(Clique, Clique)],
) -> Result<CalibrationReport> {
    let unit = PhiMap::new(n, 1.0)?;
    let mut pairs: Vec<(Clique, Clique)> = Vec::new();

    // Family 1: collinear segment pairs along each axis.
    for axis in 0..n {
        let mk = |t: i64| -> Vec<i64> {
            let mut p = vec![0i64; n];
            p[axis] = t;
            p
        };
        pairs.push((vec![mk(0), mk(1)], vec![mk(2), mk(3)]));
        pairs.push((vec![mk(0)], vec![mk(1)]));
    }

    // Family 2: sampled disjoint subset pairs of one cell and of two
    // adjacent cells.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7363616c);
    let cell: Vec<Vec<i64>> = (0..(1usize << n.min(20)))
        .map(|mask| (0..n).map(|i| ((mask >> i) & 1) as i64).collect())
        .collect();
    let cap = max_clique.clamp(1, cell.len() / 2);
    for _ in 0..samples {
        let ka = rng.gen_range(1..=cap);
        let kb = rng.gen_range(1..=cap);
        let mut picks: Vec<usize> = (0..cell.len()).collect();
        for i in 0..(ka + kb).min(picks.len()) {
            let j = rng.gen_range(i..picks.len());
            picks.swap(i, j);
        }
        let a: Clique = picks[..ka].iter().map(|&i| cell[i].clone()).collect();
        let mut b: Clique = picks[ka..ka + kb].iter().map(|&i| cell[i].clone()).collect();
        // Half the samples shift B into an adjacent cell (colors then
        // partially coincide with A's).
        if rng.gen_bool(0.5) {
            let axis = rng.gen_range(0..n);
            let dir = if rng.gen_bool(0.5) { 1 } else { -1 };
            for p in b.iter_mut() {
                p[axis] += dir;
            }
            b.retain(|p| !a.contains(p));
            if b.is_empty() {
                continue;
            }
        }
        pairs.push((a, b));
    }

    for (a, b) in realized_pairs {
        validate_clique("calibrate_scale_sampled", "realized A", a, n, unit.color_count)?;
        validate_clique("calibrate_scale_sampled", "realized B", b, n, unit.color_count)?;
        if a.iter().any(|p| b.contains(p)) {
            return Err(Error::precondition(
                "calibrate_scale_sampled",
                "realized pair is not disjoint",
            ));
        }
        pairs.push((a.clone(), b.clone()));
    }

    // Ascending bounding-box gaps let the sweep stop as soon as the bound
    // alone exceeds the running minimum (the bound never overestimates).
    let mut by_bound: Vec<(usize, f64)> = pairs
        .iter()
        .enumerate()
        .map(|(i, (a, b))| (i, box_gap_lower_bound(a, b)))
        .collect();
    by_bound.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap().then(x.0.cmp(&y.0)));
    let mut min_unit = f64::INFINITY;
    let mut arg = 0usize;
    let mut cursor = 0usize;
    while cursor < by_bound.len() {
        if by_bound[cursor].1 >= min_unit {
            break;
        }
        let chunk_end = (cursor + 256).min(by_bound.len());
        let evaluated: Vec<(usize, f64)> = by_bound[cursor..chunk_end]
            .par_iter()
            .filter(|(_, lb)| *lb < min_unit)
            .map(|(i, _)| (*i, hull_distance_unchecked(&pairs[*i].0, &pairs[*i].1, &unit)))
            .collect();
        for (i, d) in evaluated {
            if d < min_unit {
                min_unit = d;
                arg = i;
            }
        }
        cursor = chunk_end;
    }
    if !(min_unit > 0.0) && min_unit.is_finite() {
        return Err(Error::numeric(
            "calibrate_scale_sampled",
            "degenerate zero hull distance",
        ));
    }

    let mut lo = 0.0f64;
    let mut hi = 2.0 / min_unit;
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if mid * min_unit >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let scale = hi;
    let phi = PhiMap::new(n, scale)?;
    let min_at_scale = pairs
        .par_iter()
        .map(|(a, b)| {
            let lb = scale * box_gap_lower_bound(a, b);
            if lb >= 1.5 {
                lb
            } else {
                hull_distance_unchecked(a, b, &phi)
            }
        })
        .reduce(|| f64::INFINITY, f64::min);

    Ok(CalibrationReport {
        n,
        box_radius: 0,
        scale,
        rho: phi.rho,
        min_distance_at_unit_scale: min_unit,
        min_distance_at_scale: min_at_scale,
        extremal_pair: pairs[arg].clone(),
        cliques: 0,
        disjoint_pairs: pairs.len(),
        pairs_certified_by_bound: 0,
    })
}

/// Integer coordinates for graph vertices; the subgraph condition requires
/// the assignment to be injective with `l_inf` distance exactly 1 across
/// every edge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeCoords {
    pub n: usize,
    pub coords: BTreeMap<u32, Vec<i64>>,
}

impl LatticeCoords {
    pub fn get(&self, v: u32) -> Option<&Vec<i64>> {
        self.coords.get(&v)
    }
}

/// Witnesses of a failed lattice assignment; a normal search outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedFailure {
    /// Edges whose endpoints land farther than `l_inf` 1 apart.
    pub violating_edges: Vec<(u32, u32)>,
    /// Distinct vertices mapped to the same lattice point.
    pub colliding_pairs: Vec<(u32, u32)>,
}

#[derive(Debug, Clone)]
pub enum EmbedOutcome {
    Embedded(LatticeCoords),
    Failed(EmbedFailure),
}

/// Exhaustive verification of the subgraph condition.
pub fn verify_lattice_coords(
    graph: &IntersectionGraph,
    coords: &LatticeCoords,
) -> std::result::Result<(), EmbedFailure> {
    let mut seen: HashMap<&Vec<i64>, u32> = HashMap::new();
    let mut colliding = Vec::new();
    for (v, p) in &coords.coords {
        if let Some(prev) = seen.insert(p, *v) {
            colliding.push((prev, *v));
        }
    }
    let mut violating = Vec::new();
    for v in 0..graph.vertex_count() as u32 {
        for &w in graph.neighbors(v) {
            if v < w {
                match (coords.get(v), coords.get(w)) {
                    (Some(a), Some(b)) if linf(a, b) <= 1 => {}
                    _ => violating.push((v, w)),
                }
            }
        }
    }
    if violating.is_empty() && colliding.is_empty() {
        Ok(())
    } else {
        Err(EmbedFailure {
            violating_edges: violating,
            colliding_pairs: colliding,
        })
    }
}

/// Pluggable producer of lattice coordinates for a graph.
pub trait LatticeEmbedder {
    fn embed(&self, net: &Net, graph: &IntersectionGraph) -> Result<EmbedOutcome>;
}

/// Grid snapping for nets of flat models.
///
/// Each vertex is rounded to `shifts` copies of a pitch-`p` grid, the copies
/// offset by `j p / shifts` along every axis. One copy (`shifts = 1`) is
/// plain snapping. With `pitch >= 2 lambda r` every edge spans at most one
/// cell per block; with `pitch / shifts < r / sqrt(dim)` two distinct net
/// vertices always disagree in some block, because their widest coordinate
/// gap crosses one of the shifted rounding boundaries, which are spaced
/// `pitch / shifts` apart. Under both constraints the assignment is
/// injective with edge `l_inf` exactly 1. The outcome is verified
/// exhaustively either way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSnapEmbedder {
    pub pitch: f64,
    pub shifts: usize,
}

impl GridSnapEmbedder {
    pub fn plain(pitch: f64) -> Self {
        GridSnapEmbedder { pitch, shifts: 1 }
    }

    /// Parameters satisfying both snap constraints for a net of separation
    /// `r` and a graph of inflation `lambda`.
    pub fn injective_for(r: f64, lambda: f64, dim: usize) -> Self {
        let pitch = 2.0 * lambda * r;
        let shifts = (pitch * (dim as f64).sqrt() / r).floor() as usize + 1;
        GridSnapEmbedder { pitch, shifts }
    }

    pub fn lattice_dim(&self, model_dim: usize) -> usize {
        model_dim * self.shifts
    }
}

impl LatticeEmbedder for GridSnapEmbedder {
    fn embed(&self, net: &Net, graph: &IntersectionGraph) -> Result<EmbedOutcome> {
        if !matches!(net.model.kind, ManifoldKind::Euclidean(_)) {
            return Err(Error::precondition(
                "GridSnapEmbedder::embed",
                "grid snapping requires a Euclidean model (wrap seams break it on the torus)",
            ));
        }
        let dim = net.model.dim();
        let mut coords = BTreeMap::new();
        for (v, p) in net.vertices.iter().enumerate() {
            let mut c = Vec::with_capacity(dim * self.shifts);
            for j in 0..self.shifts {
                let offset = self.pitch * j as f64 / self.shifts as f64;
                for x in p {
                    c.push(((x + offset) / self.pitch).round() as i64);
                }
            }
            coords.insert(v as u32, c);
        }
        let coords = LatticeCoords {
            n: dim * self.shifts,
            coords,
        };
        match verify_lattice_coords(graph, &coords) {
            Ok(()) => Ok(EmbedOutcome::Embedded(coords)),
            Err(failure) => Ok(EmbedOutcome::Failed(failure)),
        }
    }
}
