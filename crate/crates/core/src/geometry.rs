//! Curvature-side certification.
//!
//! A `SffSample` holds the components of a second fundamental form on a
//! 2-dimensional tangent space, one symmetric 2x2 matrix per orthonormal
//! normal direction. Writing `s(u, u)` per normal as
//! `m + p cos 2t + q sin 2t` with `m = tr/2`, `p = (a - c)/2`, `q = b`,
//! circle averages have closed forms:
//!
//! * `h = avg s(u,u)`, so `|h|^2 = sum_k m_k^2`;
//! * `h_hat = avg |s(u,u)|^2 = sum_k (m_k^2 + (p_k^2 + q_k^2)/2)`;
//! * the Gauss curvature `K = 3 |h|^2 - 2 h_hat`, which reduces to
//!   `sum_k det s_k`, the Gauss equation — a useful cross-check.
//!
//! Reach is estimated from embedded samples with tangent frames by the
//! Federer quotient `|y - x|^2 / (2 dist(y - x, T_x))`: its infimum over the
//! manifold is the reach, so a pair scan gives a sampling-biased estimate
//! (the bias is from above: sampling can only miss the infimum).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Point;
use crate::net::Net;
use crate::smooth::SmoothMapStack;
use crate::sparsevec::SparseVec;

/// Second fundamental form on a 2-plane, one symmetric matrix per normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SffSample {
    pub forms: Vec<[[f64; 2]; 2]>,
}

impl SffSample {
    pub fn new(forms: Vec<[[f64; 2]; 2]>) -> Result<SffSample> {
        if forms.is_empty() {
            return Err(Error::precondition("SffSample::new", "codimension must be >= 1"));
        }
        for (k, m) in forms.iter().enumerate() {
            if m[0][1] != m[1][0] {
                return Err(Error::precondition(
                    "SffSample::new",
                    format!("form {k} is not symmetric: {} vs {}", m[0][1], m[1][0]),
                ));
            }
            if m.iter().flatten().any(|x| !x.is_finite()) {
                return Err(Error::precondition("SffSample::new", "non-finite entry"));
            }
        }
        Ok(SffSample { forms })
    }

    pub fn codim(&self) -> usize {
        self.forms.len()
    }

    /// `s(u, u)` for `u = (cos t, sin t)`, one component per normal.
    pub fn normal_value(&self, t: f64) -> Vec<f64> {
        let (c, s) = (t.cos(), t.sin());
        self.forms
            .iter()
            .map(|m| m[0][0] * c * c + 2.0 * m[0][1] * c * s + m[1][1] * s * s)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureValues {
    /// `|h|^2`, the squared norm of the mean of `s(u,u)` over the circle.
    pub h_norm2: f64,
    /// `h_hat`, the mean of `|s(u,u)|^2` over the circle.
    pub h_hat: f64,
    /// `K = 3 |h|^2 - 2 h_hat`.
    pub k: f64,
}

/// Closed-form circle averages.
pub fn gauss_curvature(sff: &SffSample) -> CurvatureValues {
    let mut h_norm2 = 0.0;
    let mut h_hat = 0.0;
    for m in &sff.forms {
        let mean = 0.5 * (m[0][0] + m[1][1]);
        let p = 0.5 * (m[0][0] - m[1][1]);
        let q = m[0][1];
        h_norm2 += mean * mean;
        h_hat += mean * mean + 0.5 * (p * p + q * q);
    }
    CurvatureValues {
        h_norm2,
        h_hat,
        k: 3.0 * h_norm2 - 2.0 * h_hat,
    }
}

/// Quadrature oracle for the circle averages (uniform grid over a period).
pub fn gauss_curvature_quadrature(sff: &SffSample, n_points: usize) -> CurvatureValues {
    let codim = sff.codim();
    let mut h = vec![0.0; codim];
    let mut h_hat = 0.0;
    for i in 0..n_points {
        let t = std::f64::consts::PI * (i as f64) / (n_points as f64);
        let v = sff.normal_value(t);
        for (acc, x) in h.iter_mut().zip(&v) {
            *acc += x;
        }
        h_hat += v.iter().map(|x| x * x).sum::<f64>();
    }
    let n = n_points as f64;
    let h_norm2 = h.iter().map(|x| (x / n) * (x / n)).sum();
    let h_hat = h_hat / n;
    CurvatureValues {
        h_norm2,
        h_hat,
        k: 3.0 * h_norm2 - 2.0 * h_hat,
    }
}

/// `max_u |s(u, u)|` over unit tangent vectors, resolved well below 1e-9.
///
/// With `s(u,u) = m + p cos 2t + q sin 2t` per normal, the squared norm is
/// the degree-4 trigonometric polynomial
/// `A0 + A1 cos 2t + B1 sin 2t + A2 cos 4t + B2 sin 4t`,
/// which has at most four local maxima per period: a 256-point grid locates
/// them all and guarded Newton steps on the closed-form derivative polish
/// each to machine precision.
pub fn max_normal_curvature(sff: &SffSample) -> f64 {
    let (mut a0, mut a1, mut b1, mut a2, mut b2) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    for m in &sff.forms {
        let mean = 0.5 * (m[0][0] + m[1][1]);
        let p = 0.5 * (m[0][0] - m[1][1]);
        let q = m[0][1];
        a0 += mean * mean + 0.5 * (p * p + q * q);
        a1 += 2.0 * mean * p;
        b1 += 2.0 * mean * q;
        a2 += 0.5 * (p * p - q * q);
        b2 += p * q;
    }
    let f = |t: f64| {
        a0 + a1 * (2.0 * t).cos()
            + b1 * (2.0 * t).sin()
            + a2 * (4.0 * t).cos()
            + b2 * (4.0 * t).sin()
    };
    let fp = |t: f64| {
        -2.0 * a1 * (2.0 * t).sin() + 2.0 * b1 * (2.0 * t).cos() - 4.0 * a2 * (4.0 * t).sin()
            + 4.0 * b2 * (4.0 * t).cos()
    };
    let fpp = |t: f64| {
        -4.0 * a1 * (2.0 * t).cos() - 4.0 * b1 * (2.0 * t).sin()
            - 16.0 * a2 * (4.0 * t).cos()
            - 16.0 * b2 * (4.0 * t).sin()
    };
    const GRID: usize = 256;
    let period = std::f64::consts::PI;
    let values: Vec<f64> = (0..GRID)
        .map(|i| f(period * i as f64 / GRID as f64))
        .collect();
    let mut best = f64::NEG_INFINITY;
    for i in 0..GRID {
        let prev = values[(i + GRID - 1) % GRID];
        let next = values[(i + 1) % GRID];
        let v = values[i];
        best = best.max(v);
        if v >= prev && v >= next {
            // Newton refinement of the interior local maximum.
            let mut t = period * i as f64 / GRID as f64;
            for _ in 0..40 {
                let d2 = fpp(t);
                if d2 >= -1e-12 {
                    break;
                }
                let step = fp(t) / d2;
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            best = best.max(f(t));
        }
    }
    best.max(0.0).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionalBoundsCheck {
    /// False when the normal-curvature hypothesis fails; the curvature
    /// bounds are then vacuous and `passes` is not meaningful.
    pub applicable: bool,
    pub passes: bool,
    pub k: f64,
    pub max_normal_curvature: f64,
}

const BOUNDS_TOL: f64 = 1e-9;

/// Checks `K` against `[-2, 1]` under the hypothesis of normal curvatures
/// at most 1.
pub fn sectional_bounds_check(sff: &SffSample) -> SectionalBoundsCheck {
    let mnc = max_normal_curvature(sff);
    let k = gauss_curvature(sff).k;
    let applicable = mnc <= 1.0 + BOUNDS_TOL;
    SectionalBoundsCheck {
        applicable,
        passes: !applicable || ((-2.0 - BOUNDS_TOL..=1.0 + BOUNDS_TOL).contains(&k)),
        k,
        max_normal_curvature: mnc,
    }
}

/// Exact bracket for the squared normal-curvature maximum from the
/// trigonometric coefficients: the circle mean is a lower bound, the mean
/// plus the harmonic amplitudes an upper bound.
fn normal_curvature_sq_bracket(sff: &SffSample) -> (f64, f64) {
    let (mut a0, mut a1, mut b1, mut a2, mut b2) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    for m in &sff.forms {
        let mean = 0.5 * (m[0][0] + m[1][1]);
        let p = 0.5 * (m[0][0] - m[1][1]);
        let q = m[0][1];
        a0 += mean * mean + 0.5 * (p * p + q * q);
        a1 += 2.0 * mean * p;
        b1 += 2.0 * mean * q;
        a2 += 0.5 * (p * p - q * q);
        b2 += p * q;
    }
    let amp = (a1 * a1 + b1 * b1).sqrt() + (a2 * a2 + b2 * b2).sqrt();
    (a0, a0 + amp)
}

/// Rejection-samples a form with normal curvatures at most 1: entries
/// uniform in [-1.5, 1.5], kept when admissible. The exact coefficient
/// bracket settles most candidates without running the maximizer.
pub fn sample_admissible_sff(codim: usize, rng: &mut ChaCha8Rng) -> SffSample {
    loop {
        let forms: Vec<[[f64; 2]; 2]> = (0..codim)
            .map(|_| {
                let a = rng.gen_range(-1.5..1.5);
                let b = rng.gen_range(-1.5..1.5);
                let c = rng.gen_range(-1.5..1.5);
                [[a, b], [b, c]]
            })
            .collect();
        let sff = SffSample { forms };
        let (lo, hi) = normal_curvature_sq_bracket(&sff);
        if lo > 1.0 {
            continue;
        }
        if hi <= 1.0 || max_normal_curvature(&sff) <= 1.0 {
            return sff;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionalSweepReport {
    pub samples: usize,
    pub violations: usize,
    pub min_k: f64,
    pub max_k: f64,
    pub max_closed_vs_quadrature_gap: f64,
    pub seed: u64,
}

/// Monte-Carlo sweep of the curvature bounds over admissible forms with
/// codimension up to `max_codim`, cross-checking closed forms against the
/// quadrature oracle.
pub fn sectional_bounds_sweep(n_samples: usize, max_codim: usize, seed: u64) -> SectionalSweepReport {
    let chunk = |start: usize, count: usize| -> (usize, f64, f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (start as u64).wrapping_mul(0x9e37));
        let mut violations = 0;
        let mut min_k = f64::INFINITY;
        let mut max_k = f64::NEG_INFINITY;
        let mut max_gap: f64 = 0.0;
        for i in 0..count {
            let codim = 1 + (start + i) % max_codim;
            let sff = sample_admissible_sff(codim, &mut rng);
            let check = sectional_bounds_check(&sff);
            if !check.passes {
                violations += 1;
            }
            min_k = min_k.min(check.k);
            max_k = max_k.max(check.k);
            let closed = gauss_curvature(&sff);
            let quad = gauss_curvature_quadrature(&sff, 1024);
            max_gap = max_gap
                .max((closed.h_norm2 - quad.h_norm2).abs())
                .max((closed.h_hat - quad.h_hat).abs())
                .max((closed.k - quad.k).abs());
        }
        (violations, min_k, max_k, max_gap)
    };
    let n_chunks = 32;
    let per = (n_samples + n_chunks - 1) / n_chunks;
    let results: Vec<(usize, f64, f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| chunk(c * per, per.min(n_samples.saturating_sub(c * per))))
        .collect();
    let mut violations = 0;
    let mut min_k = f64::INFINITY;
    let mut max_k = f64::NEG_INFINITY;
    let mut max_gap: f64 = 0.0;
    for (v, lo, hi, gap) in results {
        violations += v;
        min_k = min_k.min(lo);
        max_k = max_k.max(hi);
        max_gap = max_gap.max(gap);
    }
    SectionalSweepReport {
        samples: n_samples,
        violations,
        min_k,
        max_k,
        max_closed_vs_quadrature_gap: max_gap,
        seed,
    }
}

// ---------------------------------------------------------------------------
// reach estimation

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReachReport {
    /// Infimum of the Federer quotient over evaluated pairs. A sampling
    /// estimate: the true reach can only be lower than the sampled value by
    /// what sampling missed, never higher.
    pub reach_estimate: f64,
    /// Largest normal curvature seen among local pairs (pair distance at
    /// most `local_scale`): the reciprocal of the local quotient.
    pub max_normal_curvature_estimate: f64,
    /// Ordered pair realizing the infimum.
    pub witness: Option<(u32, u32)>,
    pub n_pairs: usize,
    pub pairs_skipped: usize,
    pub local_scale: f64,
}

/// Numerator floor: pairs closer than this (squared) are noise.
const REACH_NUMERATOR_FLOOR: f64 = 1e-6;

/// Pairwise Federer-quotient estimate of the reach of an embedded sample.
///
/// `frames[i]` is an orthonormal basis of the tangent plane at `points[i]`
/// (checked to 1e-9). The quotient for the ordered pair `(x, y)` is
/// `|y - x|^2 / (2 |P_N (y - x)|)` with `P_N` the projection onto the normal
/// space at `x`; pairs with `|y - x|^2` under the resolution floor are
/// skipped and pairs with vanishing normal part contribute nothing (their
/// quotient is infinite).
pub fn reach_estimate(
    points: &[Vec<f64>],
    frames: &[Vec<Vec<f64>>],
    local_scale: f64,
) -> Result<ReachReport> {
    if points.len() < 2 {
        return Err(Error::precondition("reach_estimate", "need at least 2 points"));
    }
    if points.len() != frames.len() {
        return Err(Error::precondition("reach_estimate", "points/frames length mismatch"));
    }
    let dim = points[0].len();
    for (i, frame) in frames.iter().enumerate() {
        for (a, va) in frame.iter().enumerate() {
            if va.len() != dim {
                return Err(Error::precondition(
                    "reach_estimate",
                    format!("frame {i} vector {a} has wrong dimension"),
                ));
            }
            let n: f64 = va.iter().map(|x| x * x).sum();
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::precondition(
                    "reach_estimate",
                    format!("frame {i} vector {a} is not unit ({n})"),
                ));
            }
            for vb in frame.iter().skip(a + 1) {
                let d: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                if d.abs() > 1e-9 {
                    return Err(Error::precondition(
                        "reach_estimate",
                        format!("frame {i} is not orthogonal (dot {d})"),
                    ));
                }
            }
        }
    }

    let n = points.len();
    let results: Vec<(f64, u32, u32, f64, usize, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = &points[i];
            let frame = &frames[i];
            let mut best = f64::INFINITY;
            let mut witness = (u32::MAX, u32::MAX);
            let mut mnc: f64 = 0.0;
            let mut evaluated = 0usize;
            let mut skipped = 0usize;
            let mut diff = vec![0.0f64; dim];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let y = &points[j];
                let mut num = 0.0;
                for k in 0..dim {
                    let d = y[k] - x[k];
                    diff[k] = d;
                    num += d * d;
                }
                if num < REACH_NUMERATOR_FLOOR {
                    skipped += 1;
                    continue;
                }
                let mut tangent2 = 0.0;
                for v in frame {
                    let mut dot = 0.0;
                    for k in 0..dim {
                        dot += diff[k] * v[k];
                    }
                    tangent2 += dot * dot;
                }
                let normal2 = (num - tangent2).max(0.0);
                let normal = normal2.sqrt();
                evaluated += 1;
                if normal < 1e-12 {
                    continue;
                }
                let q = num / (2.0 * normal);
                if q < best {
                    best = q;
                    witness = (i as u32, j as u32);
                }
                if num.sqrt() <= local_scale {
                    mnc = mnc.max(1.0 / q);
                }
            }
            (best, witness.0, witness.1, mnc, evaluated, skipped)
        })
        .collect();

    let mut reach = f64::INFINITY;
    let mut witness = None;
    let mut mnc: f64 = 0.0;
    let mut n_pairs = 0;
    let mut pairs_skipped = 0;
    for (best, wi, wj, m, ev, sk) in results {
        if best < reach {
            reach = best;
            witness = Some((wi, wj));
        }
        mnc = mnc.max(m);
        n_pairs += ev;
        pairs_skipped += sk;
    }
    Ok(ReachReport {
        reach_estimate: reach,
        max_normal_curvature_estimate: mnc,
        witness,
        n_pairs,
        pairs_skipped,
        local_scale,
    })
}

// ---------------------------------------------------------------------------
// tube thickness of the combined map

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TubednessReport {
    pub reach: ReachReport,
    pub epsilon: f64,
    /// True when no sampled far pair (model distance >= far_threshold) comes
    /// closer than `epsilon (1 - 1e-6)` in the image: near-collisions of far
    /// points are exactly what kills a tubular neighborhood.
    pub far_pair_ok: bool,
    pub min_far_image_distance: f64,
    pub far_threshold: f64,
    pub n_far_pairs: usize,
    pub points_used: usize,
    pub seed: u64,
}

/// Evaluates the combined map over a region sample, builds pushforward
/// frames by central differences, and runs the reach estimate plus the
/// far-pair separation check.
pub fn tubedness_check(
    stack: &SmoothMapStack,
    samples: &[Point],
    max_points: usize,
    far_threshold: f64,
    seed: u64,
) -> Result<TubednessReport> {
    if samples.len() < 2 {
        return Err(Error::precondition("tubedness_check", "need at least 2 samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7475_6265);
    let mut picks: Vec<usize> = (0..samples.len()).collect();
    for i in 0..picks.len() {
        let j = rng.gen_range(i..picks.len());
        picks.swap(i, j);
    }
    picks.truncate(max_points);
    picks.sort_unstable();
    let base: Vec<&Point> = picks.iter().map(|&i| &samples[i]).collect();

    let dim = stack.model.dim();
    let fd_step = 1e-4 * stack.partition.r();

    // Sparse images and frame differences, then a compact densification
    // over the union of their supports.
    struct PerPoint {
        image: SparseVec,
        frame_diffs: Vec<SparseVec>,
    }
    let evaluated: Vec<PerPoint> = base
        .par_iter()
        .map(|x| -> Result<PerPoint> {
            let image = stack.combined_eval(x)?;
            let mut frame_diffs = Vec::with_capacity(dim);
            for k in 0..dim {
                let mut dir = vec![0.0; dim];
                dir[k] = fd_step;
                let xp = stack.model.exp_map(x, &dir)?;
                dir[k] = -fd_step;
                let xm = stack.model.exp_map(x, &dir)?;
                let fp = stack.combined_eval(&xp)?;
                let fm = stack.combined_eval(&xm)?;
                frame_diffs.push(fp.sub(&fm));
            }
            Ok(PerPoint { image, frame_diffs })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut index_set: std::collections::BTreeSet<u32> = std::collections::BTreeSet::new();
    for pp in &evaluated {
        for (i, _) in pp.image.entries() {
            index_set.insert(*i);
        }
        for fd in &pp.frame_diffs {
            for (i, _) in fd.entries() {
                index_set.insert(*i);
            }
        }
    }
    let remap: std::collections::HashMap<u32, usize> = index_set
        .iter()
        .enumerate()
        .map(|(new, old)| (*old, new))
        .collect();
    let dense_dim = remap.len();
    let densify = |v: &SparseVec| -> Vec<f64> {
        let mut out = vec![0.0; dense_dim];
        for (i, x) in v.entries() {
            out[remap[i]] = *x;
        }
        out
    };

    let mut points = Vec::with_capacity(evaluated.len());
    let mut frames = Vec::with_capacity(evaluated.len());
    for (pi, pp) in evaluated.iter().enumerate() {
        points.push(densify(&pp.image));
        // Gram-Schmidt over the pushforward differences.
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for fd in &pp.frame_diffs {
            let mut v = densify(fd);
            for prev in &frame {
                let dot: f64 = v.iter().zip(prev).map(|(a, b)| a * b).sum();
                for (a, b) in v.iter_mut().zip(prev) {
                    *a -= dot * b;
                }
            }
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n < 1e-13 {
                return Err(Error::numeric(
                    "tubedness_check",
                    format!("rank-deficient frame at sample {pi} ({:?})", base[pi]),
                ));
            }
            v.iter_mut().for_each(|x| *x /= n);
            frame.push(v);
        }
        frames.push(frame);
    }

    let reach = reach_estimate(&points, &frames, 4.0 * stack.partition.r())?;

    // Far pairs must stay separated in the image.
    let model = &stack.model;
    let pair_results: Vec<(f64, usize)> = (0..base.len())
        .into_par_iter()
        .map(|i| {
            let mut min_img = f64::INFINITY;
            let mut count = 0usize;
            for j in (i + 1)..base.len() {
                if model.distance_unchecked(base[i], base[j]) >= far_threshold {
                    let d2: f64 = points[i]
                        .iter()
                        .zip(&points[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    min_img = min_img.min(d2.sqrt());
                    count += 1;
                }
            }
            (min_img, count)
        })
        .collect();
    let mut min_far = f64::INFINITY;
    let mut n_far = 0usize;
    for (m, c) in pair_results {
        min_far = min_far.min(m);
        n_far += c;
    }
    let far_pair_ok = min_far >= stack.epsilon * (1.0 - 1e-6);

    Ok(TubednessReport {
        reach,
        epsilon: stack.epsilon,
        far_pair_ok,
        min_far_image_distance: min_far,
        far_threshold,
        n_far_pairs: n_far,
        points_used: base.len(),
        seed,
    })
}

/// Exact tangent frames for a sampled round sphere, for estimator controls.
pub fn sphere_tangent_frames(points: &[Vec<f64>], radius: f64) -> Vec<Vec<Vec<f64>>> {
    points
        .iter()
        .map(|p| {
            let u: Vec<f64> = p.iter().map(|x| x / radius).collect();
            let pick = if u[2].abs() <= 0.9 {
                [0.0, 0.0, 1.0]
            } else {
                [1.0, 0.0, 0.0]
            };
            let c = [
                pick[1] * u[2] - pick[2] * u[1],
                pick[2] * u[0] - pick[0] * u[2],
                pick[0] * u[1] - pick[1] * u[0],
            ];
            let cn = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            let e1: Vec<f64> = c.iter().map(|x| x / cn).collect();
            let e2 = vec![
                u[1] * e1[2] - u[2] * e1[1],
                u[2] * e1[0] - u[0] * e1[2],
                u[0] * e1[1] - u[1] * e1[0],
            ];
            vec![e1, e2]
        })
        .collect()
}

/// Spaced subsample of a net's vertices (deterministic), for scan budgets.
pub fn subsample_vertices(net: &Net, max_count: usize, seed: u64) -> Vec<Point> {
    let mut idx: Vec<usize> = (0..net.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..idx.len() {
        let j = rng.gen_range(i..idx.len());
        idx.swap(i, j);
    }
    idx.truncate(max_count);
    idx.into_iter().map(|i| net.vertices[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ManifoldModel;

    #[test]
    fn umbilic_form_reaches_upper_bound() {
        let sff = SffSample::new(vec![[[1.0, 0.0], [0.0, 1.0]]]).unwrap();
        let c = gauss_curvature(&sff);
        assert_eq!(c.h_norm2, 1.0);
        assert_eq!(c.h_hat, 1.0);
        assert_eq!(c.k, 1.0);
        let q = gauss_curvature_quadrature(&sff, 1024);
        assert!((q.k - 1.0).abs() < 1e-10);
        assert!((max_normal_curvature(&sff) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn saddle_form() {
        let sff = SffSample::new(vec![[[1.0, 0.0], [0.0, -1.0]]]).unwrap();
        let c = gauss_curvature(&sff);
        assert_eq!(c.h_norm2, 0.0);
        // avg of cos^2(2t) is 1/2.
        assert!((c.h_hat - 0.5).abs() < 1e-15);
        assert!((c.k + 1.0).abs() < 1e-15);
        let q = gauss_curvature_quadrature(&sff, 1024);
        assert!((q.h_hat - 0.5).abs() < 1e-12);
    }

    #[test]
    fn codim_two_witness_reaches_lower_bound() {
        // s(u,u) = (cos 2t, sin 2t): h = 0, h_hat = 1, K = -2.
        let sff = SffSample::new(vec![
            [[1.0, 0.0], [0.0, -1.0]],
            [[0.0, 1.0], [1.0, 0.0]],
        ])
        .unwrap();
        let c = gauss_curvature(&sff);
        assert_eq!(c.h_norm2, 0.0);
        assert!((c.h_hat - 1.0).abs() < 1e-15);
        assert!((c.k + 2.0).abs() < 1e-15);
        let q = gauss_curvature_quadrature(&sff, 1024);
        assert!((q.k + 2.0).abs() < 1e-10);
        // The witness sits exactly on the normal-curvature boundary.
        assert!((max_normal_curvature(&sff) - 1.0).abs() < 1e-9);
        let check = sectional_bounds_check(&sff);
        assert!(check.applicable && check.passes);
    }

    #[test]
    fn gauss_equation_cross_check() {
        // K equals the sum of determinants of the component forms.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let sff = sample_admissible_sff(3, &mut rng);
            let c = gauss_curvature(&sff);
            let det_sum: f64 = sff
                .forms
                .iter()
                .map(|m| m[0][0] * m[1][1] - m[0][1] * m[1][0])
                .sum();
            assert!((c.k - det_sum).abs() < 1e-12);
        }
    }

    #[test]
    fn asymmetric_form_is_rejected() {
        let err = SffSample::new(vec![[[1.0, 0.5], [0.2, 1.0]]]).unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
    }

    #[test]
    fn max_normal_curvature_examples() {
        let zero = SffSample::new(vec![[[0.0, 0.0], [0.0, 0.0]]]).unwrap();
        assert_eq!(max_normal_curvature(&zero), 0.0);
        let diag = SffSample::new(vec![[[2.0, 0.0], [0.0, 1.0]]]).unwrap();
        // Dense grid oracle.
        let oracle = (0..200_000)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 200_000.0;
                diag.normal_value(t)[0].abs()
            })
            .fold(0.0f64, f64::max);
        let got = max_normal_curvature(&diag);
        assert!((got - 2.0).abs() < 1e-9);
        assert!(got >= oracle - 1e-9);
    }

    #[test]
    fn max_normal_curvature_matches_dense_grid_refinement() {
        // Oracle: 1e-4-resolution grid with shrinking-window refinement.
        let oracle = |sff: &SffSample| -> f64 {
            let norm_at = |t: f64| -> f64 {
                sff.normal_value(t).iter().map(|x| x * x).sum::<f64>().sqrt()
            };
            let period = std::f64::consts::PI;
            let coarse = 1e-4 * period;
            let n = (period / coarse).ceil() as usize;
            let mut best_t = 0.0;
            let mut best = f64::NEG_INFINITY;
            for i in 0..n {
                let t = i as f64 * coarse;
                let v = norm_at(t);
                if v > best {
                    best = v;
                    best_t = t;
                }
            }
            let mut step = coarse;
            while step > 1e-11 {
                let fine = step / 20.0;
                for i in -20i32..=20 {
                    let t = best_t + i as f64 * fine;
                    let v = norm_at(t);
                    if v > best {
                        best = v;
                        best_t = t;
                    }
                }
                step = fine;
            }
            best
        };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..60 {
            let codim = 1 + rng.gen_range(0..3usize);
            let forms: Vec<[[f64; 2]; 2]> = (0..codim)
                .map(|_| {
                    let a = rng.gen_range(-2.0..2.0);
                    let b = rng.gen_range(-2.0..2.0);
                    let c = rng.gen_range(-2.0..2.0);
                    [[a, b], [b, c]]
                })
                .collect();
            let sff = SffSample::new(forms).unwrap();
            let fast = max_normal_curvature(&sff);
            let slow = oracle(&sff);
            assert!((fast - slow).abs() < 1e-9, "fast {fast} oracle {slow}");
        }
    }

    #[test]
    fn scaled_form_is_not_applicable() {
        let sff = SffSample::new(vec![[[2.0, 0.0], [0.0, 2.0]]]).unwrap();
        let check = sectional_bounds_check(&sff);
        assert!(!check.applicable);
    }

    #[test]
    fn bounds_sweep_has_no_violations() {
        let report = sectional_bounds_sweep(2000, 3, 7);
        assert_eq!(report.violations, 0);
        assert!(report.min_k >= -2.0 - 1e-9);
        assert!(report.max_k <= 1.0 + 1e-9);
        assert!(report.max_closed_vs_quadrature_gap < 1e-10);
    }

    fn sphere_cloud(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| loop {
                let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
                let n2: f64 = v.iter().map(|x| x * x).sum();
                if n2 > 1e-2 {
                    let n = n2.sqrt();
                    break v.iter().map(|x| x / n).collect();
                }
            })
            .collect()
    }

    #[test]
    fn unit_sphere_reach_is_one() {
        let points = sphere_cloud(1500, 5);
        let frames = sphere_tangent_frames(&points, 1.0);
        let report = reach_estimate(&points, &frames, 0.3).unwrap();
        // The Federer quotient is exactly 1 for every sphere pair.
        assert!(
            (0.95..=1.0 + 1e-9).contains(&report.reach_estimate),
            "estimate {}",
            report.reach_estimate
        );
        assert!(report.max_normal_curvature_estimate <= 1.0 + 1e-6);
        // Invariant: reach <= 1 / max normal curvature.
        assert!(
            report.reach_estimate
                <= 1.0 / report.max_normal_curvature_estimate + 1e-6
        );
        assert!(report.witness.is_some());
    }

    #[test]
    fn affine_plane_has_infinite_reach() {
        let mut points = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                points.push(vec![i as f64 * 0.1, j as f64 * 0.1, 0.0]);
            }
        }
        let frames: Vec<Vec<Vec<f64>>> = points
            .iter()
            .map(|_| vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])
            .collect();
        let report = reach_estimate(&points, &frames, 0.3).unwrap();
        assert!(report.reach_estimate.is_infinite());
        assert!(report.witness.is_none());
    }

    #[test]
    fn parallel_planes_bound_reach_by_half_gap() {
        let delta = 0.05;
        let mut points = Vec::new();
        for i in 0..12 {
            for j in 0..12 {
                points.push(vec![i as f64 * 0.2, j as f64 * 0.2, delta]);
                points.push(vec![i as f64 * 0.2, j as f64 * 0.2, -delta]);
            }
        }
        let frames: Vec<Vec<Vec<f64>>> = points
            .iter()
            .map(|_| vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])
            .collect();
        let report = reach_estimate(&points, &frames, 0.3).unwrap();
        assert!(
            report.reach_estimate <= delta * 1.01,
            "estimate {} vs gap {delta}",
            report.reach_estimate
        );
    }

    #[test]
    fn federer_quotient_invariant_under_rigid_motion() {
        let points = sphere_cloud(300, 9);
        let frames = sphere_tangent_frames(&points, 1.0);
        let before = reach_estimate(&points, &frames, 0.3).unwrap();

        // A rotation from a seeded quaternion-free Gram-Schmidt plus a shift.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        while basis.len() < 3 {
            let mut v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                for (a, c) in v.iter_mut().zip(b) {
                    *a -= d * c;
                }
            }
            let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 {
                v.iter_mut().for_each(|x| *x /= n);
                basis.push(v);
            }
        }
        let shift = [0.7, -1.1, 2.4];
        let apply = |p: &[f64]| -> Vec<f64> {
            (0..3)
                .map(|i| {
                    basis[i].iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + shift[i]
                })
                .collect()
        };
        let moved: Vec<Vec<f64>> = points.iter().map(|p| apply(p)).collect();
        let moved_frames: Vec<Vec<Vec<f64>>> = frames
            .iter()
            .map(|f| {
                f.iter()
                    .map(|v| {
                        (0..3)
                            .map(|i| basis[i].iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let after = reach_estimate(&moved, &moved_frames, 0.3).unwrap();
        assert!(
            (before.reach_estimate - after.reach_estimate).abs() < 1e-9,
            "{} vs {}",
            before.reach_estimate,
            after.reach_estimate
        );
    }

    #[test]
    fn degenerate_frame_is_rejected() {
        let points = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]];
        let frames = vec![
            vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        ];
        let err = reach_estimate(&points, &frames, 0.3).unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
    }

    #[test]
    fn artificial_collision_is_flagged_by_far_pair_scan() {
        // Two far base points with nearly identical images: the minimum far
        // image distance collapses under any positive threshold.
        let images = [
            vec![0.0, 0.0],
            vec![1e-9, 0.0],
            vec![5.0, 5.0],
        ];
        let bases = [
            vec![0.0, 0.0],
            vec![10.0, 0.0],
            vec![3.0, 3.0],
        ];
        let model = ManifoldModel::euclidean(2);
        let mut min_far = f64::INFINITY;
        for i in 0..3 {
            for j in (i + 1)..3 {
                if model.distance_unchecked(&bases[i], &bases[j]) >= 1.0 {
                    let d: f64 = images[i]
                        .iter()
                        .zip(&images[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    min_far = min_far.min(d);
                }
            }
        }
        let epsilon = 0.5;
        assert!(min_far < epsilon * (1.0 - 1e-6));
    }
}
