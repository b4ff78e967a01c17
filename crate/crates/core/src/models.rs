//! Analytic model manifolds.
//!
//! Every model here has closed-form distance, exponential and logarithm maps,
//! and metric ball volumes; nothing in the main path integrates an ODE. The
//! models are the substrate the discretization pipeline runs on:
//!
//! * `Euclidean(n)` — flat space, points in `R^n`;
//! * `FlatTorus` — fundamental-domain coordinates `[0, L_i)` per axis, the
//!   geodesic distance being the minimum over lattice shifts (computed per
//!   axis, which is equivalent for the product metric);
//! * `Sphere(a)` — the round 2-sphere of radius `a`, points stored as ambient
//!   `R^3` vectors of norm `a`;
//! * `HyperbolicPlane` — curvature −1 in Poincaré-disk coordinates, with the
//!   Möbius gyrovector forms of exp and log.
//!
//! Tangent vectors are expressed in a canonical orthonormal frame at the base
//! point, so the Euclidean norm of a tangent vector equals its metric length.
//! This is the isometry `T_p M -> R^n` that the locally bi-Lipschitz factor of
//! the embedding stack consumes directly.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intrinsic coordinates of a point of a model manifold.
pub type Point = Vec<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum ManifoldKind {
    /// `R^n` with the standard metric.
    Euclidean(usize),
    /// Flat torus with the given period per axis.
    FlatTorus(Vec<f64>),
    /// Round 2-sphere of the given radius, embedded in `R^3`.
    Sphere(f64),
    /// Hyperbolic plane of curvature −1, Poincaré-disk coordinates.
    HyperbolicPlane,
}

/// A model manifold together with its closed-form invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldModel {
    pub kind: ManifoldKind,
}

/// A finite, deterministically generated sample of a region of a model.
///
/// The stored order is the (seeded) shuffle applied at sampling time; greedy
/// net construction consumes the points in exactly this order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSet {
    pub model: ManifoldModel,
    pub seed: u64,
    pub points: Vec<Point>,
}

const BOUNDARY_MARGIN: f64 = 1e-12;

impl ManifoldModel {
    pub fn new(kind: ManifoldKind) -> Self {
        ManifoldModel { kind }
    }

    pub fn euclidean(n: usize) -> Self {
        Self::new(ManifoldKind::Euclidean(n))
    }

    pub fn flat_torus(periods: Vec<f64>) -> Self {
        Self::new(ManifoldKind::FlatTorus(periods))
    }

    pub fn sphere(radius: f64) -> Self {
        Self::new(ManifoldKind::Sphere(radius))
    }

    pub fn hyperbolic_plane() -> Self {
        Self::new(ManifoldKind::HyperbolicPlane)
    }

    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match &self.kind {
            ManifoldKind::Euclidean(n) => *n,
            ManifoldKind::FlatTorus(periods) => periods.len(),
            ManifoldKind::Sphere(_) => 2,
            ManifoldKind::HyperbolicPlane => 2,
        }
    }

    /// Number of stored coordinates per point (3 for the ambient sphere).
    pub fn coord_len(&self) -> usize {
        match &self.kind {
            ManifoldKind::Sphere(_) => 3,
            _ => self.dim(),
        }
    }

    /// Short label used in CSV headers and file names.
    pub fn kind_label(&self) -> String {
        match &self.kind {
            ManifoldKind::Euclidean(n) => format!("euclidean{n}"),
            ManifoldKind::FlatTorus(periods) => {
                let parts: Vec<String> = periods.iter().map(|p| format!("{p}")).collect();
                format!("torus[{}]", parts.join(","))
            }
            ManifoldKind::Sphere(a) => format!("sphere{a}"),
            ManifoldKind::HyperbolicPlane => "hyperbolic".to_string(),
        }
    }

    /// Closed-form bounds `(lower, upper)` on the sectional curvature.
    pub fn curvature_bounds(&self) -> (f64, f64) {
        match &self.kind {
            ManifoldKind::Euclidean(_) | ManifoldKind::FlatTorus(_) => (0.0, 0.0),
            ManifoldKind::Sphere(a) => {
                let k = 1.0 / (a * a);
                (k, k)
            }
            ManifoldKind::HyperbolicPlane => (-1.0, -1.0),
        }
    }

    /// Closed-form injectivity radius (`f64::INFINITY` when unbounded).
    pub fn injectivity_radius(&self) -> f64 {
        match &self.kind {
            ManifoldKind::Euclidean(_) | ManifoldKind::HyperbolicPlane => f64::INFINITY,
            ManifoldKind::FlatTorus(periods) => {
                0.5 * periods.iter().cloned().fold(f64::INFINITY, f64::min)
            }
            ManifoldKind::Sphere(a) => std::f64::consts::PI * a,
        }
    }

    /// Checks the chart-domain constraints of a point.
    pub fn validate_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.coord_len() {
            return Err(Error::domain(
                self.kind_label(),
                format!("expected {} coordinates, got {}", self.coord_len(), p.len()),
            ));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain(self.kind_label(), "non-finite coordinate"));
        }
        match &self.kind {
            ManifoldKind::Euclidean(_) => Ok(()),
            ManifoldKind::FlatTorus(periods) => {
                for (x, l) in p.iter().zip(periods) {
                    if *x < -BOUNDARY_MARGIN || *x >= *l + BOUNDARY_MARGIN {
                        return Err(Error::domain(
                            self.kind_label(),
                            format!("coordinate {x} outside fundamental domain [0, {l})"),
                        ));
                    }
                }
                Ok(())
            }
            ManifoldKind::Sphere(a) => {
                let norm = norm(p);
                if (norm - a).abs() > 1e-9 * a.max(1.0) {
                    return Err(Error::domain(
                        self.kind_label(),
                        format!("ambient norm {norm} differs from radius {a}"),
                    ));
                }
                Ok(())
            }
            ManifoldKind::HyperbolicPlane => {
                let norm = norm(p);
                if norm >= 1.0 {
                    return Err(Error::domain(
                        self.kind_label(),
                        format!("disk norm {norm} >= 1"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Geodesic distance between two points of the model.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    /// Distance without domain validation; used in inner loops where the
    /// inputs were validated at construction time.
    pub fn distance_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        match &self.kind {
            ManifoldKind::Euclidean(_) => dist_euclid(p, q),
            ManifoldKind::FlatTorus(periods) => {
                let mut acc = 0.0;
                for i in 0..periods.len() {
                    let d = wrap_delta(q[i] - p[i], periods[i]);
                    acc += d * d;
                }
                acc.sqrt()
            }
            ManifoldKind::Sphere(a) => {
                let (u, v) = (scale(p, 1.0 / a), scale(q, 1.0 / a));
                let c = cross3(&u, &v);
                (*a) * norm(&c).atan2(dot(&u, &v))
            }
            ManifoldKind::HyperbolicPlane => {
                let w = mobius_add(&neg(p), q);
                2.0 * norm(&w).atanh()
            }
        }
    }

    /// `exp_p(v)` for a tangent vector `v` in the canonical frame at `p`.
    pub fn exp_map(&self, p: &[f64], v: &[f64]) -> Result<Point> {
        self.validate_point(p)?;
        if v.len() != self.dim() {
            return Err(Error::domain(
                self.kind_label(),
                format!("tangent vector of length {}, expected {}", v.len(), self.dim()),
            ));
        }
        match &self.kind {
            ManifoldKind::Euclidean(_) => Ok(p.iter().zip(v).map(|(a, b)| a + b).collect()),
            ManifoldKind::FlatTorus(periods) => Ok(p
                .iter()
                .zip(v)
                .zip(periods)
                .map(|((a, b), l)| wrap_coord(a + b, *l))
                .collect()),
            ManifoldKind::Sphere(a) => {
                let t = norm(v);
                if t < 1e-300 {
                    return Ok(p.to_vec());
                }
                let (e1, e2) = sphere_frame(p, *a);
                let dir: Vec<f64> = (0..3)
                    .map(|i| (v[0] * e1[i] + v[1] * e2[i]) / t)
                    .collect();
                let u = scale(p, 1.0 / a);
                let ang = t / a;
                Ok((0..3)
                    .map(|i| a * (ang.cos() * u[i] + ang.sin() * dir[i]))
                    .collect())
            }
            ManifoldKind::HyperbolicPlane => {
                let t = norm(v);
                if t < 1e-300 {
                    return Ok(p.to_vec());
                }
                let dir = scale(v, 1.0 / t);
                let x0 = scale(&dir, (t / 2.0).tanh());
                Ok(mobius_add(p, &x0))
            }
        }
    }

    /// `log_p(q)` in the canonical frame at `p`.
    ///
    /// Requires `d(p, q)` strictly below the injectivity radius.
    pub fn log_map(&self, p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        let d = self.distance_unchecked(p, q);
        let inj = self.injectivity_radius();
        if d >= inj {
            return Err(Error::range(
                "log_map",
                format!("distance {d} is not below the injectivity radius {inj}"),
            ));
        }
        match &self.kind {
            ManifoldKind::Euclidean(_) => Ok(q.iter().zip(p).map(|(a, b)| a - b).collect()),
            ManifoldKind::FlatTorus(periods) => Ok(q
                .iter()
                .zip(p)
                .zip(periods)
                .map(|((a, b), l)| wrap_delta(a - b, *l))
                .collect()),
            ManifoldKind::Sphere(a) => {
                let u = scale(p, 1.0 / a);
                let v = scale(q, 1.0 / a);
                let cos_t = dot(&u, &v);
                let c = cross3(&u, &v);
                let sin_t = norm(&c);
                let ang = sin_t.atan2(cos_t);
                if ang < 1e-300 {
                    return Ok(vec![0.0, 0.0]);
                }
                // Component of v orthogonal to u, renormalized.
                let w: Vec<f64> = (0..3).map(|i| v[i] - cos_t * u[i]).collect();
                let wn = norm(&w);
                let dir = scale(&w, 1.0 / wn);
                let (e1, e2) = sphere_frame(p, *a);
                let len = a * ang;
                Ok(vec![len * dot(&dir, &e1), len * dot(&dir, &e2)])
            }
            ManifoldKind::HyperbolicPlane => {
                let w = mobius_add(&neg(p), q);
                let wn = norm(&w);
                if wn < 1e-300 {
                    return Ok(vec![0.0, 0.0]);
                }
                let t = 2.0 * wn.atanh();
                Ok(scale(&w, t / wn))
            }
        }
    }

    /// Closed-form volume of the metric ball of radius `R`.
    ///
    /// For the flat torus the exact value is implemented for 1 and 2 periods
    /// over the whole range, and for any number of periods in the regimes
    /// where the ball is still embedded or already covers everything.
    pub fn ball_volume(&self, radius: f64) -> Result<f64> {
        if radius < 0.0 {
            return Err(Error::range("ball_volume", "negative radius"));
        }
        match &self.kind {
            ManifoldKind::Euclidean(n) => Ok(unit_ball_volume(*n) * radius.powi(*n as i32)),
            ManifoldKind::Sphere(a) => {
                let r = radius.min(std::f64::consts::PI * a);
                Ok(2.0 * std::f64::consts::PI * a * a * (1.0 - (r / a).cos()))
            }
            ManifoldKind::HyperbolicPlane => {
                Ok(2.0 * std::f64::consts::PI * (radius.cosh() - 1.0))
            }
            ManifoldKind::FlatTorus(periods) => torus_ball_volume(periods, radius),
        }
    }

    /// Deterministic covering sample of the ball `B(center, radius)`.
    ///
    /// The returned points are within `spacing` of every point of the ball
    /// and are shuffled by `seed`; the default point budget is 30 million.
    pub fn sample_region(
        &self,
        center: &[f64],
        radius: f64,
        spacing: f64,
        seed: u64,
    ) -> Result<PointSet> {
        self.sample_region_with_budget(center, radius, spacing, seed, 30_000_000)
    }

    pub fn sample_region_with_budget(
        &self,
        center: &[f64],
        radius: f64,
        spacing: f64,
        seed: u64,
        max_points: u64,
    ) -> Result<PointSet> {
        self.validate_point(center)?;
        if radius < 0.0 || spacing <= 0.0 {
            return Err(Error::range(
                "sample_region",
                "radius must be >= 0 and spacing > 0",
            ));
        }
        if radius == 0.0 {
            return Ok(PointSet {
                model: self.clone(),
                seed,
                points: vec![center.to_vec()],
            });
        }
        let required = self.sample_count_estimate(radius, spacing);
        if required > max_points as u128 {
            return Err(Error::Resource {
                op: "sample_region".into(),
                required,
                budget: max_points as u128,
            });
        }

        let mut points = match &self.kind {
            ManifoldKind::Euclidean(_) => self.sample_euclidean(center, radius, spacing),
            ManifoldKind::FlatTorus(periods) => {
                sample_torus(self, periods, center, radius, spacing)
            }
            ManifoldKind::Sphere(a) => sample_sphere(*a, center, radius, spacing),
            ManifoldKind::HyperbolicPlane => sample_hyperbolic(center, radius, spacing),
        };

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        points.shuffle(&mut rng);
        Ok(PointSet {
            model: self.clone(),
            seed,
            points,
        })
    }

    fn sample_count_estimate(&self, radius: f64, spacing: f64) -> u128 {
        let n = self.dim();
        let vol = match &self.kind {
            ManifoldKind::FlatTorus(periods) => {
                let full: f64 = periods.iter().product();
                full.min(unit_ball_volume(n) * radius.powi(n as i32))
            }
            _ => self.ball_volume(radius).unwrap_or(f64::INFINITY),
        };
        let cell = (spacing / (n as f64).sqrt()).powi(n as i32);
        let est = (vol / cell).ceil();
        if est.is_finite() {
            est as u128
        } else {
            u128::MAX
        }
    }

    fn sample_euclidean(&self, center: &[f64], radius: f64, spacing: f64) -> Vec<Point> {
        let n = self.dim();
        let pitch = euclid_pitch(n, spacing);
        let reach = radius + pitch;
        let span = (reach / pitch).ceil() as i64;
        let mut points = Vec::new();
        let mut idx = vec![-span; n];
        'outer: loop {
            let p: Vec<f64> = idx
                .iter()
                .zip(center)
                .map(|(k, c)| c + (*k as f64) * pitch)
                .collect();
            if dist_euclid(&p, center) <= reach {
                points.push(p);
            }
            for i in 0..n {
                idx[i] += 1;
                if idx[i] <= span {
                    continue 'outer;
                }
                idx[i] = -span;
            }
            break;
        }
        points
    }
}

/// Grid pitch guaranteeing that the half-diagonal of a grid cell is below the
/// requested spacing.
fn euclid_pitch(n: usize, spacing: f64) -> f64 {
    if n <= 3 {
        spacing
    } else {
        1.999 * spacing / (n as f64).sqrt()
    }
}

fn sample_torus(
    model: &ManifoldModel,
    periods: &[f64],
    center: &[f64],
    radius: f64,
    spacing: f64,
) -> Vec<Point> {
    let n = periods.len();
    let base = euclid_pitch(n, spacing);
    // Pitch divides each period evenly so the grid is seam-free.
    let pitches: Vec<f64> = periods.iter().map(|l| l / (l / base).ceil()).collect();
    let counts: Vec<i64> = periods
        .iter()
        .zip(&pitches)
        .map(|(l, h)| (l / h).round() as i64)
        .collect();
    let reach = radius + base;
    let mut points = Vec::new();
    let mut idx = vec![0i64; n];
    'outer: loop {
        let p: Vec<f64> = idx
            .iter()
            .zip(&pitches)
            .zip(periods)
            .map(|((k, h), l)| wrap_coord((*k as f64) * h, *l))
            .collect();
        if model.distance_unchecked(&p, center) <= reach {
            points.push(p);
        }
        for i in 0..n {
            idx[i] += 1;
            if idx[i] < counts[i] {
                continue 'outer;
            }
            idx[i] = 0;
        }
        break;
    }
    points
}

fn sample_sphere(a: f64, center: &[f64], radius: f64, spacing: f64) -> Vec<Point> {
    let step = spacing / std::f64::consts::SQRT_2;
    let max_ang = ((radius + step) / a).min(std::f64::consts::PI);
    let d_phi = step / a;
    let rot = rotation_from_pole(center, a);
    let mut points = vec![apply_rot(&rot, &[0.0, 0.0, a])];
    let rings = (max_ang / d_phi).ceil() as usize;
    for k in 1..=rings {
        let phi = (k as f64) * d_phi;
        if phi > std::f64::consts::PI {
            break;
        }
        let ring_r = a * phi.sin().abs().max(1e-12);
        let m = ((2.0 * std::f64::consts::PI * ring_r) / step).ceil().max(1.0) as usize;
        for j in 0..m {
            let th = 2.0 * std::f64::consts::PI * (j as f64) / (m as f64);
            let p = [
                a * phi.sin() * th.cos(),
                a * phi.sin() * th.sin(),
                a * phi.cos(),
            ];
            points.push(apply_rot(&rot, &p));
        }
    }
    points
}

/// Geodesic polar rings around `center`, ring spacing `s/2` and angular
/// spacing at most `3s/4` measured mid-band. Any ball point is within `s/4`
/// of its nearest ring radially and within `3s/8` along it, which keeps the
/// covering bound `5s/8 < s` rigorous at every spacing.
fn sample_hyperbolic(center: &[f64], radius: f64, spacing: f64) -> Vec<Point> {
    let d_rho = spacing / 2.0;
    let arc_step = 0.75 * spacing;
    let mut points = vec![center.to_vec()];
    let rings = ((radius + d_rho) / d_rho).ceil() as usize;
    for k in 1..=rings {
        let rho = (k as f64) * d_rho;
        if rho > radius + d_rho {
            break;
        }
        let circ = 2.0 * std::f64::consts::PI * (rho + d_rho / 2.0).sinh();
        let m = (circ / arc_step).ceil().max(1.0) as usize;
        let disk_r = (rho / 2.0).tanh();
        for j in 0..m {
            let th = 2.0 * std::f64::consts::PI * (j as f64) / (m as f64);
            let x0 = [disk_r * th.cos(), disk_r * th.sin()];
            points.push(mobius_add(center, &x0));
        }
    }
    points
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV serialization: a `# model=<kind> seed=<n>` header line, then one
    /// point per row.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# model={} seed={}\n", self.model.kind_label(), self.seed);
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(model: ManifoldModel, text: &str) -> Result<Self> {
        let mut seed = 0u64;
        let mut points = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(s) = tok.strip_prefix("seed=") {
                        seed = s
                            .parse()
                            .map_err(|_| Error::Input(format!("bad seed token {tok}")))?;
                    }
                }
                continue;
            }
            let p: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let p = p.map_err(|_| Error::Input(format!("bad point row: {line}")))?;
            model.validate_point(&p)?;
            points.push(p);
        }
        Ok(PointSet {
            model,
            seed,
            points,
        })
    }
}

// ---------------------------------------------------------------------------
// vector helpers

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist_euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Signed representative of `d` modulo `period` with the least absolute value.
fn wrap_delta(d: f64, period: f64) -> f64 {
    let mut r = d % period;
    if r > period / 2.0 {
        r -= period;
    } else if r < -period / 2.0 {
        r += period;
    }
    r
}

fn wrap_coord(x: f64, period: f64) -> f64 {
    let mut r = x % period;
    if r < 0.0 {
        r += period;
    }
    if r >= period {
        r -= period;
    }
    r
}

/// Möbius addition on the Poincaré disk (curvature −1 convention).
pub(crate) fn mobius_add(u: &[f64], w: &[f64]) -> Vec<f64> {
    let uw = dot(u, w);
    let u2 = dot(u, u);
    let w2 = dot(w, w);
    let denom = 1.0 + 2.0 * uw + u2 * w2;
    let cu = (1.0 + 2.0 * uw + w2) / denom;
    let cw = (1.0 - u2) / denom;
    u.iter().zip(w).map(|(a, b)| cu * a + cw * b).collect()
}

/// Deterministic orthonormal tangent frame on the sphere of radius `a`.
fn sphere_frame(p: &[f64], a: f64) -> (Vec<f64>, Vec<f64>) {
    let u = scale(p, 1.0 / a);
    // Project the ambient axis least aligned with p.
    let pick = if u[2].abs() <= 0.9 {
        [0.0, 0.0, 1.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let c = cross3(&pick, &u);
    let cn = norm(&c);
    let e1 = scale(&c, 1.0 / cn);
    let e2v = cross3(&u, &e1);
    (e1, e2v.to_vec())
}

/// Rotation matrix taking the north pole `(0,0,a)` to `center`.
fn rotation_from_pole(center: &[f64], a: f64) -> [[f64; 3]; 3] {
    let t = scale(center, 1.0 / a);
    let pole = [0.0, 0.0, 1.0];
    let c = dot(&pole, &t);
    let axis = cross3(&pole, &t);
    let s = norm(&axis);
    if s < 1e-15 {
        if c > 0.0 {
            return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        }
        // Antipodal: rotate by pi around the x axis.
        return [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
    }
    let k = scale(&axis, 1.0 / s);
    // Rodrigues formula.
    let mut m = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let kk = k[i] * k[j] * (1.0 - c);
            let eye = if i == j { c } else { 0.0 };
            m[i][j] = eye + kk;
        }
    }
    m[0][1] += -k[2] * s;
    m[0][2] += k[1] * s;
    m[1][0] += k[2] * s;
    m[1][2] += -k[0] * s;
    m[2][0] += -k[1] * s;
    m[2][1] += k[0] * s;
    m
}

fn apply_rot(m: &[[f64; 3]; 3], p: &[f64]) -> Vec<f64> {
    (0..3).map(|i| dot(&m[i], p)).collect()
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / (n as f64),
    }
}

/// Exact volume of a metric ball in a flat torus.
///
/// The metric ball lifts to `{|x| < R}` inside the centered fundamental cell,
/// so the volume is the volume of a ball intersected with a box.
fn torus_ball_volume(periods: &[f64], radius: f64) -> Result<f64> {
    let n = periods.len();
    let half: Vec<f64> = periods.iter().map(|l| l / 2.0).collect();
    let full: f64 = periods.iter().product();
    let circum: f64 = half.iter().map(|h| h * h).sum::<f64>().sqrt();
    let inj = half.iter().cloned().fold(f64::INFINITY, f64::min);
    if radius <= inj {
        return Ok(unit_ball_volume(n) * radius.powi(n as i32));
    }
    if radius >= circum {
        return Ok(full);
    }
    match n {
        1 => Ok((2.0 * radius).min(full)),
        2 => {
            let (a, b) = (half[0], half[1]);
            let seg = |s: f64| {
                if radius > s {
                    radius * radius * (s / radius).acos() - s * (radius * radius - s * s).sqrt()
                } else {
                    0.0
                }
            };
            Ok(std::f64::consts::PI * radius * radius - 2.0 * seg(a) - 2.0 * seg(b))
        }
        _ => Err(Error::range(
            "ball_volume",
            format!(
                "no closed form for a {n}-torus ball with radius {radius} between the \
                 injectivity radius and the circumradius"
            ),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    const PI: f64 = std::f64::consts::PI;

    /// Composite Simpson quadrature, the oracle for the analytic formulas.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn closed_form_curvature_and_injectivity() {
        let e = ManifoldModel::euclidean(3);
        assert_eq!(e.curvature_bounds(), (0.0, 0.0));
        assert_eq!(e.injectivity_radius(), f64::INFINITY);

        let s = ManifoldModel::sphere(2.0);
        assert_eq!(s.curvature_bounds(), (0.25, 0.25));
        assert!((s.injectivity_radius() - 2.0 * PI).abs() < 1e-15);

        let h = ManifoldModel::hyperbolic_plane();
        assert_eq!(h.curvature_bounds(), (-1.0, -1.0));
        assert_eq!(h.injectivity_radius(), f64::INFINITY);

        let t = ManifoldModel::flat_torus(vec![2.0, 3.0, 1.5]);
        assert_eq!(t.curvature_bounds(), (0.0, 0.0));
        assert_eq!(t.injectivity_radius(), 0.75);
    }

    #[test]
    fn euclidean_pythagoras() {
        let m = ManifoldModel::euclidean(2);
        assert_eq!(m.distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn hyperbolic_diameter_distance_matches_quadrature() {
        let m = ManifoldModel::hyperbolic_plane();
        let d = m.distance(&[0.0, 0.0], &[0.5, 0.0]).unwrap();
        // Oracle: integrate the conformal factor 2/(1-t^2) along the diameter.
        let oracle = simpson(|t| 2.0 / (1.0 - t * t), 0.0, 0.5, 4096);
        assert!((d - oracle).abs() < 1e-10, "d={d} oracle={oracle}");
        assert!((d - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_distance_agrees_with_arcosh_form() {
        let m = ManifoldModel::hyperbolic_plane();
        let pts = [
            (vec![0.1, 0.2], vec![-0.4, 0.35]),
            (vec![0.0, 0.0], vec![0.9, 0.0]),
            (vec![0.7, -0.1], vec![0.65, 0.3]),
        ];
        for (p, q) in &pts {
            let d = m.distance(p, q).unwrap();
            let num = dist_euclid(p, q).powi(2);
            let den = (1.0 - dot(p, p)) * (1.0 - dot(q, q));
            let oracle = (1.0 + 2.0 * num / den).acosh();
            assert!((d - oracle).abs() < 1e-10, "d={d} oracle={oracle}");
        }
    }

    #[test]
    fn torus_wraparound() {
        let m = ManifoldModel::flat_torus(vec![1.0]);
        let d = m.distance(&[0.1], &[0.9]).unwrap();
        assert!((d - 0.2).abs() < 1e-12);
    }

    #[test]
    fn sphere_quarter_circle_exp() {
        let m = ManifoldModel::sphere(1.0);
        let north = vec![0.0, 0.0, 1.0];
        let q = m.exp_map(&north, &[PI / 2.0, 0.0]).unwrap();
        // Lands on the equator.
        assert!(q[2].abs() < 1e-12, "q={q:?}");
        assert!((norm(&q) - 1.0).abs() < 1e-12);
        let d = m.distance(&north, &q).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_exp_is_translation() {
        let m = ManifoldModel::euclidean(3);
        let p = vec![1.0, -2.0, 0.5];
        let v = vec![0.25, 0.5, -1.0];
        let q = m.exp_map(&p, &v).unwrap();
        assert_eq!(q, vec![1.25, -1.5, -0.5]);
    }

    #[test]
    fn hyperbolic_log_norm_equals_distance() {
        let m = ManifoldModel::hyperbolic_plane();
        let v = m.log_map(&[0.0, 0.0], &[0.5, 0.0]).unwrap();
        assert!((norm(&v) - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn exp_log_round_trip_all_models() {
        let models = [
            ManifoldModel::euclidean(2),
            ManifoldModel::flat_torus(vec![1.0, 2.0]),
            ManifoldModel::sphere(1.5),
            ManifoldModel::hyperbolic_plane(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in &models {
            let inj = m.injectivity_radius().min(4.0);
            let mut max_err: f64 = 0.0;
            for _ in 0..2500 {
                let p = random_point(m, &mut rng);
                let t = rng.gen_range(0.0..inj * 0.95);
                let th = rng.gen_range(0.0..2.0 * PI);
                let v = vec![t * th.cos(), t * th.sin()];
                let q = m.exp_map(&p, &v).unwrap();
                let w = m.log_map(&p, &q).unwrap();
                let q2 = m.exp_map(&p, &w).unwrap();
                let err = m.distance_unchecked(&q, &q2);
                max_err = max_err.max(err);
                // |log| must equal the distance.
                let d = m.distance_unchecked(&p, &q);
                assert!((norm(&w) - d).abs() < 1e-9, "{}: |log|={} d={}", m.kind_label(), norm(&w), d);
            }
            assert!(max_err < 1e-9, "{}: round trip error {max_err}", m.kind_label());
        }
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let models = [
            ManifoldModel::euclidean(2),
            ManifoldModel::flat_torus(vec![1.0, 1.5]),
            ManifoldModel::sphere(1.0),
            ManifoldModel::hyperbolic_plane(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in &models {
            for _ in 0..10_000 {
                let p = random_point(m, &mut rng);
                let q = random_point(m, &mut rng);
                let r = random_point(m, &mut rng);
                let dpq = m.distance_unchecked(&p, &q);
                let dqp = m.distance_unchecked(&q, &p);
                let dpr = m.distance_unchecked(&p, &r);
                let dqr = m.distance_unchecked(&q, &r);
                assert!(dpq >= 0.0);
                assert!((dpq - dqp).abs() < 1e-9, "{}: symmetry", m.kind_label());
                assert!(
                    dpr <= dpq + dqr + 1e-9,
                    "{}: triangle {dpr} > {dpq} + {dqr}",
                    m.kind_label()
                );
                let dpp = m.distance_unchecked(&p, &p);
                assert!(dpp < 1e-12);
            }
        }
    }

    #[test]
    fn log_outside_injectivity_is_range_error() {
        let m = ManifoldModel::flat_torus(vec![1.0]);
        let err = m.log_map(&[0.0], &[0.5]).unwrap_err();
        assert!(matches!(err, Error::Range { .. }));
    }

    #[test]
    fn invalid_coordinates_are_domain_errors() {
        let m = ManifoldModel::hyperbolic_plane();
        assert!(matches!(
            m.distance(&[1.5, 0.0], &[0.0, 0.0]),
            Err(Error::Domain { .. })
        ));
        let s = ManifoldModel::sphere(1.0);
        assert!(matches!(
            s.validate_point(&[2.0, 0.0, 0.0]),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn ball_volume_examples() {
        let e2 = ManifoldModel::euclidean(2);
        assert!((e2.ball_volume(1.0).unwrap() - PI).abs() < 1e-12);

        let h = ManifoldModel::hyperbolic_plane();
        let v = h.ball_volume(1.0).unwrap();
        // Oracle: integrate the area element sinh(r) dr dtheta.
        let oracle = 2.0 * PI * simpson(|r| r.sinh(), 0.0, 1.0, 4096);
        assert!((v - oracle).abs() < 1e-9, "v={v} oracle={oracle}");
        assert!((v - 2.0 * PI * (1f64.cosh() - 1.0)).abs() < 1e-12);

        let s = ManifoldModel::sphere(1.0);
        assert!((s.ball_volume(PI).unwrap() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn ball_volume_monotone_and_hyperbolic_growth_limit() {
        let h = ManifoldModel::hyperbolic_plane();
        let mut prev = 0.0;
        for k in 1..200 {
            let r = 0.1 * k as f64;
            let v = h.ball_volume(r).unwrap();
            assert!(v > prev);
            prev = v;
        }
        // vol B(R) / e^R approaches pi from below for large R.
        let mut prev_ratio = 0.0;
        for r in [4.0, 6.0, 8.0, 12.0, 16.0] {
            let ratio = h.ball_volume(r).unwrap() / r.exp();
            assert!(ratio > prev_ratio);
            prev_ratio = ratio;
        }
        assert!((prev_ratio - PI).abs() < 1e-4);

        let e3 = ManifoldModel::euclidean(3);
        let mut prev = 0.0;
        for k in 1..50 {
            let v = e3.ball_volume(0.2 * k as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn torus_ball_volume_regimes() {
        let t = ManifoldModel::flat_torus(vec![1.0, 1.0]);
        // Small radius: Euclidean disk.
        assert!((t.ball_volume(0.3).unwrap() - PI * 0.09).abs() < 1e-12);
        // Covering radius and beyond: the whole torus.
        assert!((t.ball_volume(0.8).unwrap() - 1.0).abs() < 1e-12);
        // Middle regime, exact disk-minus-segments value, checked against a
        // quadrature oracle over horizontal slices.
        let r: f64 = 0.6;
        let v = t.ball_volume(r).unwrap();
        let oracle = simpson(
            |y: f64| {
                let w = (r * r - y * y).max(0.0).sqrt().min(0.5);
                2.0 * w
            },
            -0.5,
            0.5,
            200_000,
        );
        assert!((v - oracle).abs() < 1e-7, "v={v} oracle={oracle}");
        // Strict growth across the regime boundaries.
        let mut prev = 0.0;
        for k in 1..70 {
            let v = t.ball_volume(0.01 * k as f64).unwrap();
            assert!(v > prev, "not increasing at {}", 0.01 * k as f64);
            prev = v;
        }
    }

    #[test]
    fn sample_region_zero_radius() {
        let m = ManifoldModel::euclidean(2);
        let ps = m.sample_region(&[1.0, 2.0], 0.0, 0.1, 3).unwrap();
        assert_eq!(ps.points, vec![vec![1.0, 2.0]]);
    }

    #[test]
    fn sample_region_count_matches_area_estimate() {
        let m = ManifoldModel::euclidean(2);
        let ps = m.sample_region(&[0.0, 0.0], 10.0, 0.1, 1).unwrap();
        let expected = PI * 100.0 / 0.01;
        let ratio = ps.len() as f64 / expected;
        assert!((0.95..1.1).contains(&ratio), "count {} ratio {ratio}", ps.len());
    }

    #[test]
    fn sample_region_covers_spot_check_grid() {
        let models = [
            ManifoldModel::euclidean(2),
            ManifoldModel::hyperbolic_plane(),
            ManifoldModel::sphere(1.0),
            ManifoldModel::flat_torus(vec![2.0, 2.0]),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for m in &models {
            let center = random_point(m, &mut rng);
            let (radius, spacing) = (2.0, 0.25);
            let ps = m.sample_region(&center, radius, spacing, 7).unwrap();
            // Spot check: random probes in the ball must be near a sample.
            for _ in 0..400 {
                let t = rng.gen_range(0.0..radius);
                let th = rng.gen_range(0.0..2.0 * PI);
                let probe = m
                    .exp_map(&center, &[t * th.cos(), t * th.sin()])
                    .unwrap();
                let mind = ps
                    .points
                    .iter()
                    .map(|p| m.distance_unchecked(&probe, p))
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    mind <= spacing * (1.0 + 1e-9),
                    "{}: probe at {t} uncovered, nearest {mind}",
                    m.kind_label()
                );
            }
        }
    }

    #[test]
    fn hyperbolic_sample_count_grows_like_cosh() {
        let m = ManifoldModel::hyperbolic_plane();
        let c = [0.0, 0.0];
        let n5 = m.sample_region(&c, 5.0, 0.2, 1).unwrap().len() as f64;
        let n8 = m.sample_region(&c, 8.0, 0.2, 1).unwrap().len() as f64;
        let growth = n8 / n5;
        let expected = (8f64.cosh() - 1.0) / (5f64.cosh() - 1.0);
        assert!(
            (growth / expected - 1.0).abs() < 0.25,
            "growth {growth} vs cosh ratio {expected}"
        );
    }

    #[test]
    fn sample_region_budget_error_reports_required_count() {
        let m = ManifoldModel::euclidean(2);
        let err = m
            .sample_region_with_budget(&[0.0, 0.0], 10.0, 0.001, 1, 10_000)
            .unwrap_err();
        match err {
            Error::Resource { required, budget, .. } => {
                assert!(required > budget);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn sample_region_deterministic_for_fixed_seed() {
        let m = ManifoldModel::hyperbolic_plane();
        let a = m.sample_region(&[0.1, 0.0], 3.0, 0.2, 42).unwrap();
        let b = m.sample_region(&[0.1, 0.0], 3.0, 0.2, 42).unwrap();
        assert_eq!(a.points, b.points);
        let c = m.sample_region(&[0.1, 0.0], 3.0, 0.2, 43).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn point_set_csv_round_trip() {
        let m = ManifoldModel::euclidean(2);
        let ps = m.sample_region(&[0.0, 0.0], 1.0, 0.5, 9).unwrap();
        let text = ps.to_csv();
        assert!(text.starts_with("# model=euclidean2 seed=9\n"));
        let back = PointSet::from_csv(m, &text).unwrap();
        assert_eq!(back.seed, 9);
        assert_eq!(back.points, ps.points);
    }

    pub(crate) fn random_point(m: &ManifoldModel, rng: &mut ChaCha8Rng) -> Point {
        match &m.kind {
            ManifoldKind::Euclidean(n) => (0..*n).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            ManifoldKind::FlatTorus(periods) => {
                periods.iter().map(|l| rng.gen_range(0.0..*l)).collect()
            }
            ManifoldKind::Sphere(a) => loop {
                let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = norm(&v);
                if n > 1e-3 {
                    return v.iter().map(|x| x * a / n).collect();
                }
            },
            ManifoldKind::HyperbolicPlane => loop {
                let v: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.95..0.95)).collect();
                if norm(&v) < 0.95 {
                    return v;
                }
            },
        }
    }
}
