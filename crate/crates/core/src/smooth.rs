//! The smooth factors of the embedding.
//!
//! Two maps are built over nets of a model manifold:
//!
//! * the *separating* factor `f1`, the barycenter of calibrated lattice
//!   images weighted by a partition of unity over a fine net, which pushes
//!   points at model distance `>= 4r` to image distance `>= 1`;
//! * the *locally bi-Lipschitz* factor `f2`, a direct sum over color classes
//!   of windowed normal charts `x -> bump(2 |log_v x| / r) * log_v x`.
//!
//! The direct sum `eps f1 (+) eps f2` is then an embedding whose scale `eps`
//! is chosen so the pulled-back metric stays below half the model metric.
//! All claims are certified empirically over declared, seeded sample sets.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet4;
use crate::lattice::{LatticeCoords, PhiMap};
use crate::models::{ManifoldModel, Point};
use crate::net::{IntersectionGraph, Net};
use crate::sparsevec::SparseVec;

// ---------------------------------------------------------------------------
// bump function

fn g_piece(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// The canonical smooth step: 1 on `t <= 1`, 0 on `t >= 2`, and
/// `g(2-t) / (g(2-t) + g(t-1))` in between, with `g(s) = exp(-1/s)`.
pub fn bump(t: f64) -> f64 {
    if t <= 1.0 {
        1.0
    } else if t >= 2.0 {
        0.0
    } else {
        let a = g_piece(2.0 - t);
        let b = g_piece(t - 1.0);
        a / (a + b)
    }
}

/// Value and derivatives 1..=4 of the bump at `t` (exact jets off the
/// junctions; on the plateaus everything vanishes).
pub fn bump_jet(t: f64) -> Jet4 {
    if t <= 1.0 {
        Jet4::constant(1.0)
    } else if t >= 2.0 {
        Jet4::constant(0.0)
    } else {
        let x = Jet4::variable(t);
        let a = Jet4::constant(2.0).sub(&x).recip().neg().exp();
        let b = x.sub(&Jet4::constant(1.0)).recip().neg().exp();
        a.div(&a.add(&b))
    }
}

// ---------------------------------------------------------------------------
// partition of unity

/// Partition of unity subordinate to the doubled balls of a net.
///
/// `psi_v(x) = bump(d(v, x) / r)`, normalized by the total. Supports are the
/// open `2r`-balls; on points covered by the net within `r` some weight sits
/// on its plateau, so the total is at least 1.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub net: Net,
}

/// Support and normalized weights of the partition at one point.
#[derive(Debug, Clone)]
pub struct PartitionEval {
    /// `(vertex id, weight)` with positive weights, ids ascending.
    pub support: Vec<(u32, f64)>,
    /// Unnormalized total, the quantity bounded by `[1, N_2]`.
    pub psi_total: f64,
}

impl PartitionOfUnity {
    pub fn new(net: Net) -> Self {
        PartitionOfUnity { net }
    }

    pub fn r(&self) -> f64 {
        self.net.r
    }

    pub fn eval(&self, x: &[f64]) -> Result<PartitionEval> {
        let r = self.net.r;
        let near = self.net.vertices_within(x, 2.0 * r);
        let mut support: Vec<(u32, f64)> = Vec::with_capacity(near.len());
        let mut total = 0.0;
        for (v, d) in near {
            let psi = bump(d / r);
            if psi > 0.0 {
                support.push((v, psi));
                total += psi;
            }
        }
        if support.is_empty() {
            return Err(Error::Coverage { point: x.to_vec() });
        }
        for (_, w) in support.iter_mut() {
            *w /= total;
        }
        Ok(PartitionEval {
            support,
            psi_total: total,
        })
    }
}

// ---------------------------------------------------------------------------
// locally bi-Lipschitz factor

/// Color classes of the doubled-cover intersection graph plus the windowed
/// normal charts summed per class.
#[derive(Debug, Clone)]
pub struct LocalChartStack {
    pub net: Net,
    /// Class of each net vertex (first-fit greedy in net order).
    pub classes: Vec<u32>,
    pub n_classes: usize,
}

impl LocalChartStack {
    /// Colors the graph `Gamma_2` of the net greedily and verifies that the
    /// doubled balls are exactly disjoint within every class.
    pub fn build(net: Net) -> Result<LocalChartStack> {
        let gamma2 = IntersectionGraph::build(&net, 2.0)?;
        let n = net.len();
        let mut classes = vec![u32::MAX; n];
        let mut n_classes = 0u32;
        for v in 0..n {
            let mut used: Vec<bool> = vec![false; n_classes as usize + 1];
            for &w in gamma2.neighbors(v as u32) {
                let c = classes[w as usize];
                if c != u32::MAX {
                    used[c as usize] = true;
                }
            }
            let c = (0..=n_classes).find(|&c| !used[c as usize]).unwrap();
            classes[v] = c;
            n_classes = n_classes.max(c + 1);
        }

        let stack = LocalChartStack {
            net,
            classes,
            n_classes: n_classes as usize,
        };
        stack.verify_class_disjointness()?;
        Ok(stack)
    }

    /// Within a class, doubled balls must be pairwise disjoint:
    /// `d(v, w) >= 4r` exactly.
    fn verify_class_disjointness(&self) -> Result<()> {
        let r = self.net.r;
        for (v, p) in self.net.vertices.iter().enumerate() {
            for (w, d) in self.net.vertices_within(p, 4.0 * r) {
                if w as usize != v && self.classes[w as usize] == self.classes[v] {
                    return Err(Error::precondition(
                        "LocalChartStack::build",
                        format!("class {} repeats within 4r: vertices {v},{w} at {d}", self.classes[v]),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `f2(x)`: blocks of dimension `dim` per class; the class of a vertex
    /// `v` with `x` in its support receives `bump(2 |log_v x| / r) log_v x`.
    pub fn eval(&self, model: &ManifoldModel, x: &[f64]) -> Result<Vec<f64>> {
        let r = self.net.r;
        let dim = model.dim();
        let mut out = vec![0.0; self.n_classes * dim];
        for (v, d) in self.net.vertices_within(x, r) {
            let window = bump(2.0 * d / r);
            if window == 0.0 {
                continue;
            }
            let log = model.log_map(&self.net.vertices[v as usize], x)?;
            let block = self.classes[v as usize] as usize * dim;
            for (i, c) in log.iter().enumerate() {
                out[block + i] += window * c;
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// the combined stack

/// The full map stack `eps f1 (+) eps f2`.
#[derive(Debug, Clone)]
pub struct SmoothMapStack {
    pub model: ManifoldModel,
    pub partition: PartitionOfUnity,
    pub lattice: LatticeCoords,
    pub phi: PhiMap,
    pub local: LocalChartStack,
    pub epsilon: f64,
}

impl SmoothMapStack {
    pub fn new(
        model: ManifoldModel,
        partition: PartitionOfUnity,
        lattice: LatticeCoords,
        phi: PhiMap,
        local: LocalChartStack,
    ) -> Result<SmoothMapStack> {
        if partition.net.model != model || local.net.model != model {
            return Err(Error::Config(
                "stack nets must live on the stack's model".into(),
            ));
        }
        if lattice.n != phi.n {
            return Err(Error::Config(format!(
                "lattice dimension {} does not match the map dimension {}",
                lattice.n, phi.n
            )));
        }
        Ok(SmoothMapStack {
            model,
            partition,
            lattice,
            phi,
            local,
            epsilon: 1.0,
        })
    }

    /// Dimension of the separating block.
    pub fn d1(&self) -> usize {
        self.phi.d
    }

    /// Dimension of the chart block.
    pub fn d2(&self) -> usize {
        self.local.n_classes * self.model.dim()
    }

    /// `f1(x) = sum_v phi_v(x) Phi(coords(v))`, a point of the convex hull
    /// of the support's images.
    pub fn f1_eval(&self, x: &[f64]) -> Result<SparseVec> {
        let eval = self.partition.eval(x)?;
        let mut acc = SparseVec::new();
        for (v, w) in &eval.support {
            let coords = self.lattice.get(*v).ok_or_else(|| {
                Error::Config(format!("no lattice coordinates for net vertex {v}"))
            })?;
            acc = acc.axpy(*w, &self.phi.eval_sparse(coords));
        }
        Ok(acc)
    }

    pub fn f2_eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.local.eval(&self.model, x)
    }

    /// Unscaled `f1 (+) f2`, the map whose pullback sets the scale.
    pub fn unscaled_eval(&self, x: &[f64]) -> Result<SparseVec> {
        let f1 = self.f1_eval(x)?;
        let f2 = self.f2_eval(x)?;
        let offset = self.d1() as u32;
        let mut entries: Vec<(u32, f64)> = f1.entries().to_vec();
        for (i, v) in f2.iter().enumerate() {
            if *v != 0.0 {
                entries.push((offset + i as u32, *v));
            }
        }
        Ok(SparseVec::from_entries(entries))
    }

    /// `(eps f1, eps f2)`.
    pub fn combined_eval(&self, x: &[f64]) -> Result<SparseVec> {
        if !(self.epsilon > 0.0) {
            return Err(Error::precondition("combined_map", "epsilon must be positive"));
        }
        Ok(self.unscaled_eval(x)?.scale(self.epsilon))
    }
}

// ---------------------------------------------------------------------------
// scale selection

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub epsilon: f64,
    /// Largest sampled value of (pullback metric) / (model metric), i.e. the
    /// largest squared directional stretch.
    pub sup_ratio: f64,
    pub samples_used: usize,
    pub directions_per_sample: usize,
    pub fd_step: f64,
    pub seed: u64,
}

/// Default safety margin in the scale selection.
pub const EPSILON_MARGIN: f64 = 1.25;

/// Chooses `eps` with `eps^2 * sup_ratio * margin = 1/2`, the sup taken over
/// finite-difference directional stretches at the sampled points.
pub fn choose_epsilon_for_map<F>(
    f: F,
    model: &ManifoldModel,
    samples: &[Point],
    directions_per_sample: usize,
    fd_step: f64,
    seed: u64,
    margin: f64,
) -> Result<EpsilonReport>
where
    F: Fn(&[f64]) -> Result<SparseVec> + Sync,
{
    if samples.is_empty() || directions_per_sample == 0 {
        return Err(Error::precondition("choose_epsilon", "no samples or directions"));
    }
    if fd_step < 1e-7 {
        return Err(Error::numeric("choose_epsilon", "finite-difference step underflow"));
    }
    let dim = model.dim();
    let jobs: Vec<(Point, Vec<f64>)> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6570_7300);
        let mut out = Vec::with_capacity(samples.len() * directions_per_sample);
        for x in samples {
            for _ in 0..directions_per_sample {
                let mut u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
                let n = u.iter().map(|c| c * c).sum::<f64>().sqrt();
                if n < 1e-6 {
                    continue;
                }
                u.iter_mut().for_each(|c| *c /= n);
                out.push((x.clone(), u));
            }
        }
        out
    };
    let sup_ratio = jobs
        .par_iter()
        .map(|(x, u)| -> Result<f64> {
            let vp: Vec<f64> = u.iter().map(|c| c * fd_step).collect();
            let vm: Vec<f64> = u.iter().map(|c| -c * fd_step).collect();
            let xp = model.exp_map(x, &vp)?;
            let xm = model.exp_map(x, &vm)?;
            let fp = f(&xp)?;
            let fm = f(&xm)?;
            let stretch = fp.dist(&fm) / (2.0 * fd_step);
            Ok(stretch * stretch)
        })
        .try_reduce(|| 0.0f64, |a, b| Ok(a.max(b)))?;
    if !(sup_ratio > 1e-12) {
        return Err(Error::numeric(
            "choose_epsilon",
            format!("degenerate stretch estimate {sup_ratio}"),
        ));
    }
    if !(margin >= 1.0) {
        return Err(Error::precondition("choose_epsilon", "margin must be at least 1"));
    }
    let epsilon = (1.0 / (2.0 * sup_ratio * margin).sqrt()).min(1.0);
    Ok(EpsilonReport {
        epsilon,
        sup_ratio,
        samples_used: samples.len(),
        directions_per_sample,
        fd_step,
        seed,
    })
}

/// Scale selection for a stack's unscaled direct sum.
pub fn choose_epsilon(
    stack: &SmoothMapStack,
    samples: &[Point],
    directions_per_sample: usize,
    seed: u64,
    margin: f64,
) -> Result<EpsilonReport> {
    choose_epsilon_for_map(
        |x| stack.unscaled_eval(x),
        &stack.model,
        samples,
        directions_per_sample,
        1e-3,
        seed,
        margin,
    )
}

// ---------------------------------------------------------------------------
// uniform-smoothness estimates

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivativeBounds {
    /// `c[k-1]` estimates the sup of the k-th derivative along unit-speed
    /// geodesics, `k = 1..=k_max`.
    pub c: Vec<f64>,
    pub n_geodesics: usize,
    pub fd_step: f64,
    pub seed: u64,
}

/// Central finite-difference estimates of `sup |d^k/dt^k (f o gamma)|` over
/// random unit-speed geodesics through the sampled base points.
pub fn derivative_bounds<F>(
    f: F,
    model: &ManifoldModel,
    base_points: &[Point],
    k_max: usize,
    n_geodesics: usize,
    fd_step: f64,
    seed: u64,
) -> Result<DerivativeBounds>
where
    F: Fn(&[f64]) -> Result<SparseVec> + Sync,
{
    if k_max == 0 || k_max > 4 {
        return Err(Error::precondition("derivative_bounds", "k_max must be in 1..=4"));
    }
    if fd_step < 1e-5 {
        return Err(Error::numeric("derivative_bounds", "step-size underflow"));
    }
    if base_points.is_empty() {
        return Err(Error::precondition("derivative_bounds", "no base points"));
    }
    let dim = model.dim();
    let geodesics: Vec<(Point, Vec<f64>)> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6465_7276);
        (0..n_geodesics)
            .map(|_| {
                let x = base_points[rng.gen_range(0..base_points.len())].clone();
                let mut u: Vec<f64>;
                loop {
                    let cand: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
                    let n = cand.iter().map(|c| c * c).sum::<f64>().sqrt();
                    if n > 1e-6 {
                        u = cand;
                        u.iter_mut().for_each(|c| *c /= n);
                        break;
                    }
                }
                (x, u)
            })
            .collect()
    };

    // Stencil coefficients on offsets -2..=2, per order.
    let stencils: [[f64; 5]; 4] = [
        [0.0, -0.5, 0.0, 0.5, 0.0],
        [0.0, 1.0, -2.0, 1.0, 0.0],
        [-0.5, 1.0, 0.0, -1.0, 0.5],
        [1.0, -4.0, 6.0, -4.0, 1.0],
    ];

    let per_geo: Vec<Vec<f64>> = geodesics
        .par_iter()
        .map(|(x, u)| -> Result<Vec<f64>> {
            let mut maxima = vec![0.0f64; k_max];
            // Three stencil centers along the geodesic.
            for center in [-0.5f64, 0.0, 0.5] {
                let mut values: Vec<SparseVec> = Vec::with_capacity(5);
                for off in -2i32..=2 {
                    let t = center + off as f64 * fd_step;
                    let v: Vec<f64> = u.iter().map(|c| c * t).collect();
                    let y = model.exp_map(x, &v)?;
                    values.push(f(&y)?);
                }
                for k in 1..=k_max {
                    let coeffs = &stencils[k - 1];
                    let mut acc = SparseVec::new();
                    for (i, val) in values.iter().enumerate() {
                        if coeffs[i] != 0.0 {
                            acc = acc.axpy(coeffs[i], val);
                        }
                    }
                    let est = acc.norm() / fd_step.powi(k as i32);
                    maxima[k - 1] = maxima[k - 1].max(est);
                }
            }
            Ok(maxima)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut c = vec![0.0f64; k_max];
    for m in per_geo {
        for k in 0..k_max {
            c[k] = c[k].max(m[k]);
        }
    }
    Ok(DerivativeBounds {
        c,
        n_geodesics,
        fd_step,
        seed,
    })
}

// ---------------------------------------------------------------------------
// distortion scan for the chart factor

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistortionReport {
    /// `(lower, upper)` empirical bi-Lipschitz constants per ball.
    pub per_ball: Vec<(f64, f64)>,
    pub lower: f64,
    pub upper: f64,
    pub pairs_per_ball: usize,
    pub seed: u64,
}

/// Empirical bi-Lipschitz constants of `f2` over unit balls at the given
/// centers: min and max of `|f2(x) - f2(y)| / d(x, y)` over sampled pairs
/// inside each ball.
pub fn f2_distortion_scan(
    stack: &SmoothMapStack,
    centers: &[Point],
    pairs_per_ball: usize,
    seed: u64,
) -> Result<DistortionReport> {
    if centers.is_empty() {
        return Err(Error::precondition("f2_distortion_scan", "no ball centers"));
    }
    let model = &stack.model;
    let dim = model.dim();
    let per_ball: Vec<(f64, f64)> = centers
        .par_iter()
        .enumerate()
        .map(|(ci, c)| -> Result<(f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0xba11 + ci as u64));
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            let mut done = 0;
            while done < pairs_per_ball {
                let mut draw = || -> Result<Point> {
                    loop {
                        let t: f64 = rng.gen_range(0.0..1.0f64);
                        let mut u: Vec<f64> =
                            (0..dim).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
                        let n = u.iter().map(|c| c * c).sum::<f64>().sqrt();
                        if n > 1e-6 {
                            u.iter_mut().for_each(|z| *z *= t / n);
                            return model.exp_map(c, &u);
                        }
                    }
                };
                let x = draw()?;
                let y = draw()?;
                let d = model.distance_unchecked(&x, &y);
                if d < 1e-9 {
                    continue;
                }
                let fx = stack.f2_eval(&x)?;
                let fy = stack.f2_eval(&y)?;
                let img: f64 = fx
                    .iter()
                    .zip(&fy)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                let ratio = img / d;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
                done += 1;
            }
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>>>()?;
    let lower = per_ball.iter().map(|(l, _)| *l).fold(f64::INFINITY, f64::min);
    let upper = per_ball.iter().map(|(_, h)| *h).fold(0.0, f64::max);
    Ok(DistortionReport {
        per_ball,
        lower,
        upper,
        pairs_per_ball,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{EmbedOutcome, GridSnapEmbedder, LatticeEmbedder};
    use crate::models::PointSet;
    use rand::seq::SliceRandom;

    #[test]
    fn bump_plateaus_and_midpoint() {
        assert_eq!(bump(0.5), 1.0);
        assert_eq!(bump(1.0), 1.0);
        assert_eq!(bump(3.0), 0.0);
        assert_eq!(bump(2.0), 0.0);
        assert!((bump(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bump_monotone_nonincreasing() {
        let mut prev = f64::INFINITY;
        for k in 0..=400 {
            let t = 0.5 + 2.0 * k as f64 / 400.0;
            let v = bump(t);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn bump_junction_derivatives_vanish() {
        // One-sided proxies just off the junctions: all derivative orders
        // are killed by the essential singularity of exp(-1/s).
        for t in [1.0 + 1e-2, 1.0 + 1e-3, 2.0 - 1e-2, 2.0 - 1e-3] {
            let j = bump_jet(t);
            for k in 1..=4 {
                assert!(
                    j.derivative(k).abs() < 1e-9,
                    "t={t} k={k}: {}",
                    j.derivative(k)
                );
            }
        }
        // Exactly on the plateaus the jets are constant.
        for t in [0.9, 1.0, 2.0, 2.5] {
            let j = bump_jet(t);
            for k in 1..=4 {
                assert_eq!(j.derivative(k), 0.0);
            }
        }
    }

    #[test]
    fn bump_jet_matches_finite_differences_in_interior() {
        let h = 1e-3;
        for t in [1.3, 1.5, 1.8] {
            let j = bump_jet(t);
            let fd1 = (bump(t + h) - bump(t - h)) / (2.0 * h);
            assert!((j.derivative(1) - fd1).abs() < 1e-5);
        }
    }

    fn grid_point_set(spacing: f64, side: f64, seed: u64) -> PointSet {
        let model = ManifoldModel::euclidean(2);
        let k = (side / spacing).round() as i64;
        let mut points = Vec::new();
        for i in 0..=k {
            for j in 0..=k {
                points.push(vec![i as f64 * spacing, j as f64 * spacing]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        points.shuffle(&mut rng);
        PointSet {
            model,
            seed,
            points,
        }
    }

    /// A small but full stack over an 8x8 Euclidean patch: fine net at
    /// r = 1/4 for the partition, unit net for the charts.
    fn small_stack() -> (SmoothMapStack, PointSet) {
        let ps = grid_point_set(0.1, 8.0, 21);
        let fine = Net::build(&ps, 0.25).unwrap();
        let gamma2 = IntersectionGraph::build(&fine, 2.0).unwrap();
        let embedder = GridSnapEmbedder::injective_for(0.25, 2.0, 2);
        let coords = match embedder.embed(&fine, &gamma2).unwrap() {
            EmbedOutcome::Embedded(c) => c,
            EmbedOutcome::Failed(f) => panic!("snap failed: {f:?}"),
        };
        let n_dims = coords.n;
        let phi = PhiMap::new(n_dims, 3.0).unwrap();
        let partition = PartitionOfUnity::new(fine);
        let coarse = Net::build(&ps, 1.0).unwrap();
        let local = LocalChartStack::build(coarse).unwrap();
        let stack = SmoothMapStack::new(
            ManifoldModel::euclidean(2),
            partition,
            coords,
            phi,
            local,
        )
        .unwrap();
        (stack, ps)
    }

    #[test]
    fn partition_weights_normalize_and_support_is_clique() {
        let (stack, ps) = small_stack();
        let part = &stack.partition;
        let r = part.r();
        let n2 = part.net.count_n_lambda(2.0, Some(&ps)) as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let x = &ps.points[rng.gen_range(0..ps.len())];
            let eval = part.eval(x).unwrap();
            let total: f64 = eval.support.iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() <= 1e-12, "sum {total}");
            assert!(eval.psi_total >= 1.0 - 1e-12, "psi {}", eval.psi_total);
            assert!(eval.psi_total <= n2 + 1e-12);
            // Support members pairwise within 4r: a clique of Gamma_2.
            for i in 0..eval.support.len() {
                for j in (i + 1)..eval.support.len() {
                    let a = &part.net.vertices[eval.support[i].0 as usize];
                    let b = &part.net.vertices[eval.support[j].0 as usize];
                    assert!(part.net.model.distance_unchecked(a, b) < 4.0 * r);
                }
            }
        }
    }

    #[test]
    fn far_supports_are_disjoint() {
        let (stack, ps) = small_stack();
        let part = &stack.partition;
        let threshold = 4.0 * part.r();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 1500 {
            let x = &ps.points[rng.gen_range(0..ps.len())];
            let y = &ps.points[rng.gen_range(0..ps.len())];
            if part.net.model.distance_unchecked(x, y) < threshold {
                continue;
            }
            let ex = part.eval(x).unwrap();
            let ey = part.eval(y).unwrap();
            for (v, _) in &ex.support {
                assert!(!ey.support.iter().any(|(w, _)| w == v));
            }
            checked += 1;
        }
    }

    #[test]
    fn singleton_support_maps_to_vertex_image() {
        // A single isolated vertex: f1 equals its lattice image exactly.
        let model = ManifoldModel::euclidean(2);
        let net = Net::from_vertices(model.clone(), 0.25, vec![vec![0.0, 0.0]], 0).unwrap();
        let graph = IntersectionGraph::build(&net, 2.0).unwrap();
        let coords = match GridSnapEmbedder::plain(1.0).embed(&net, &graph).unwrap() {
            EmbedOutcome::Embedded(c) => c,
            _ => unreachable!(),
        };
        let phi = PhiMap::new(2, 2.0).unwrap();
        let partition = PartitionOfUnity::new(net);
        let coarse =
            Net::from_vertices(model.clone(), 1.0, vec![vec![0.0, 0.0]], 0).unwrap();
        let local = LocalChartStack::build(coarse).unwrap();
        let stack = SmoothMapStack::new(model, partition, coords.clone(), phi.clone(), local)
            .unwrap();
        let img = stack.f1_eval(&[0.05, 0.0]).unwrap();
        let expected = phi.eval_sparse(coords.get(0).unwrap());
        assert!(img.dist(&expected) < 1e-12);
    }

    #[test]
    fn f1_image_lies_in_support_hull() {
        let (stack, ps) = small_stack();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..300 {
            let x = &ps.points[rng.gen_range(0..ps.len())];
            let img = stack.f1_eval(x).unwrap();
            let eval = stack.partition.eval(x).unwrap();
            let gens: Vec<SparseVec> = eval
                .support
                .iter()
                .map(|(v, _)| stack.phi.eval_sparse(stack.lattice.get(*v).unwrap()))
                .collect();
            let resid = crate::lattice::point_to_hull_distance(&gens, &img);
            assert!(resid < 1e-9, "hull residual {resid}");
        }
    }

    #[test]
    fn missing_lattice_coords_is_config_error() {
        let (mut stack, ps) = small_stack();
        stack.lattice.coords.remove(&0);
        let x = ps.points[0].clone();
        // Some evaluation point has vertex 0 in its support.
        let v0 = stack.partition.net.vertices[0].clone();
        match stack.f1_eval(&v0) {
            Err(Error::Config(_)) => {}
            other => panic!("expected config error, got {other:?}"),
        }
        let _ = x;
    }

    #[test]
    fn f2_vanishes_at_net_vertex_block() {
        let (stack, _) = small_stack();
        let v0 = stack.local.net.vertices[0].clone();
        let img = stack.f2_eval(&v0).unwrap();
        let dim = stack.model.dim();
        let block = stack.local.classes[0] as usize * dim;
        // The vertex's own chart contributes log_v(v) = 0; other supports
        // are zero there by class disjointness.
        assert!(img[block].abs() < 1e-12 && img[block + 1].abs() < 1e-12);
    }

    #[test]
    fn f2_is_near_isometric_on_the_plateau() {
        let (stack, _) = small_stack();
        // Points near a chart center sit on the window plateau, where the
        // chart is the exact normal coordinate map.
        let v = stack.local.net.vertices[3].clone();
        let model = stack.model.clone();
        let x = model.exp_map(&v, &[0.05, 0.02]).unwrap();
        let y = model.exp_map(&v, &[-0.03, 0.08]).unwrap();
        let fx = stack.f2_eval(&x).unwrap();
        let fy = stack.f2_eval(&y).unwrap();
        let img: f64 = fx
            .iter()
            .zip(&fy)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let d = model.distance_unchecked(&x, &y);
        assert!(
            (img / d - 1.0).abs() < 1e-9,
            "plateau distortion {}",
            img / d
        );
    }

    #[test]
    fn f2_distortion_positive_on_unit_balls() {
        let (stack, ps) = small_stack();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let centers: Vec<Point> = (0..10)
            .map(|_| {
                // Keep balls inside the sampled patch.
                loop {
                    let p = &ps.points[rng.gen_range(0..ps.len())];
                    if p[0] > 1.5 && p[0] < 6.5 && p[1] > 1.5 && p[1] < 6.5 {
                        return p.clone();
                    }
                }
            })
            .collect();
        let report = f2_distortion_scan(&stack, &centers, 800, 9).unwrap();
        assert!(report.lower > 0.0, "lower constant {}", report.lower);
        assert!(report.upper.is_finite());
        // Determinism: same seed, same constants.
        let again = f2_distortion_scan(&stack, &centers, 800, 9).unwrap();
        assert_eq!(report.per_ball, again.per_ball);
    }

    #[test]
    fn epsilon_formula_on_isometric_fixture() {
        // f = identity into the first two coordinates: sup_ratio is exactly
        // 1, so eps = 1/sqrt(2.5).
        let model = ManifoldModel::euclidean(2);
        let samples: Vec<Point> = vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![-3.0, 0.5]];
        let f = |x: &[f64]| {
            Ok(SparseVec::from_entries(
                x.iter().enumerate().map(|(i, v)| (i as u32, *v)).collect(),
            ))
        };
        let report = choose_epsilon_for_map(f, &model, &samples, 8, 1e-3, 3, EPSILON_MARGIN).unwrap();
        assert!((report.sup_ratio - 1.0).abs() < 1e-6);
        assert!((report.epsilon - 1.0 / 2.5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn doubling_the_map_halves_epsilon() {
        let model = ManifoldModel::euclidean(2);
        let samples: Vec<Point> = vec![vec![0.0, 0.0], vec![2.0, -1.0]];
        let f1 = |x: &[f64]| {
            Ok(SparseVec::from_entries(
                x.iter().enumerate().map(|(i, v)| (i as u32, *v)).collect(),
            ))
        };
        let f2 = |x: &[f64]| {
            Ok(SparseVec::from_entries(
                x.iter().enumerate().map(|(i, v)| (i as u32, 2.0 * *v)).collect(),
            ))
        };
        let r1 = choose_epsilon_for_map(f1, &model, &samples, 8, 1e-3, 3, EPSILON_MARGIN).unwrap();
        let r2 = choose_epsilon_for_map(f2, &model, &samples, 8, 1e-3, 3, EPSILON_MARGIN).unwrap();
        let ratio = r2.epsilon / r1.epsilon;
        assert!((ratio - 0.5).abs() < 0.05 * 0.5, "ratio {ratio}");
    }

    #[test]
    fn epsilon_stable_under_doubling_directions() {
        let (stack, ps) = small_stack();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let samples: Vec<Point> = (0..40)
            .map(|_| {
                loop {
                    let p = &ps.points[rng.gen_range(0..ps.len())];
                    if p[0] > 1.0 && p[0] < 7.0 && p[1] > 1.0 && p[1] < 7.0 {
                        return p.clone();
                    }
                }
            })
            .collect();
        let a = choose_epsilon(&stack, &samples, 6, 5, EPSILON_MARGIN).unwrap();
        let b = choose_epsilon(&stack, &samples, 12, 5, EPSILON_MARGIN).unwrap();
        let rel = (a.sup_ratio - b.sup_ratio).abs() / b.sup_ratio;
        assert!(rel < 0.10, "ratio drift {rel}");
    }

    #[test]
    fn degenerate_map_is_numeric_error() {
        let model = ManifoldModel::euclidean(2);
        let samples: Vec<Point> = vec![vec![0.0, 0.0]];
        let f = |_x: &[f64]| Ok(SparseVec::new());
        let err = choose_epsilon_for_map(f, &model, &samples, 4, 1e-3, 3, EPSILON_MARGIN).unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
    }

    #[test]
    fn derivative_bounds_constant_and_linear_maps() {
        let model = ManifoldModel::euclidean(2);
        let base: Vec<Point> = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let constant = |_x: &[f64]| Ok(SparseVec::from_entries(vec![(0, 7.5)]));
        let b = derivative_bounds(constant, &model, &base, 4, 20, 0.05, 3).unwrap();
        for k in 0..4 {
            assert!(b.c[k] < 1e-8, "constant map C_{} = {}", k + 1, b.c[k]);
        }
        // Linear map with operator norm sqrt(5) on the diagonal direction.
        let linear = |x: &[f64]| {
            Ok(SparseVec::from_entries(vec![
                (0, 2.0 * x[0]),
                (1, x[1]),
            ]))
        };
        let b = derivative_bounds(linear, &model, &base, 4, 40, 0.05, 3).unwrap();
        assert!(b.c[0] <= 2.0 + 1e-6);
        assert!(b.c[0] >= 1.0);
        assert!(b.c[1] < 1e-6, "linear map C_2 = {}", b.c[1]);
    }

    #[test]
    fn derivative_bounds_of_f1_stable_under_more_geodesics() {
        let (stack, ps) = small_stack();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let base: Vec<Point> = (0..30)
            .map(|_| loop {
                let p = &ps.points[rng.gen_range(0..ps.len())];
                if p[0] > 1.5 && p[0] < 6.5 && p[1] > 1.5 && p[1] < 6.5 {
                    break p.clone();
                }
            })
            .collect();
        let f = |x: &[f64]| stack.f1_eval(x);
        let b1 = derivative_bounds(&f, &stack.model, &base, 4, 60, 0.02, 7).unwrap();
        let b2 = derivative_bounds(&f, &stack.model, &base, 4, 120, 0.02, 7).unwrap();
        for k in 0..4 {
            assert!(b1.c[k].is_finite() && b2.c[k].is_finite());
            assert!(
                b2.c[k] <= b1.c[k] * 1.2 + 1e-9 || b1.c[k] <= b2.c[k] * 1.2 + 1e-9,
                "C_{} unstable: {} vs {}",
                k + 1,
                b1.c[k],
                b2.c[k]
            );
        }
    }

    #[test]
    fn step_underflow_is_numeric_error() {
        let model = ManifoldModel::euclidean(2);
        let base: Vec<Point> = vec![vec![0.0, 0.0]];
        let f = |_x: &[f64]| Ok(SparseVec::new());
        let err = derivative_bounds(f, &model, &base, 2, 4, 1e-9, 3).unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
    }

    #[test]
    fn combined_map_requires_positive_epsilon() {
        let (mut stack, _) = small_stack();
        stack.epsilon = 0.0;
        let err = stack.combined_eval(&[4.0, 4.0]).unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
    }
}
