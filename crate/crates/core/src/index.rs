//! Range-query acceleration for net construction and verification.
//!
//! The flat models and the ambient sphere use a uniform grid hash. The
//! hyperbolic plane needs its own structure: Poincaré-disk coordinates crush
//! metric balls near the boundary, so a coordinate grid degenerates there.
//! Points are bucketed instead by geodesic polar coordinates around the disk
//! origin, in radial bands subdivided into sectors whose angular width tracks
//! `sinh(rho)`, so a bucket has bounded metric diameter at every radius.
//!
//! The index promises no false negatives: every point within the query radius
//! of the query point is visited. Candidate windows are padded and callers
//! apply the exact distance predicate themselves, so all checks built on top
//! of the index remain exact. Coordinates are stored inline in the buckets;
//! the scans are bandwidth-bound and must not chase pointers.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};
use std::ops::ControlFlow;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::models::{ManifoldKind, ManifoldModel};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Multiplicative pad applied to query windows (never to the exact predicate).
const WINDOW_PAD: f64 = 1.0 + 1e-9;
/// Band table size; bands beyond it fall back to direct evaluation.
const MAX_BAND: usize = 96;

/// Multiplicative hashing; bucket keys are already well-mixed integers.
#[derive(Default)]
pub struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }
    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 = (self.0 ^ *b as u64).wrapping_mul(0x517c_c1b7_2722_0a95);
        }
    }
    fn write_u64(&mut self, n: u64) {
        self.0 = (self.0 ^ n).wrapping_mul(0x517c_c1b7_2722_0a95);
    }
}

type Buckets = HashMap<u64, SmallVec<[Entry; 2]>, BuildHasherDefault<KeyHasher>>;

#[derive(Debug, Clone, Copy)]
struct Entry {
    id: u32,
    coords: [f64; 3],
    /// Polar scheme only: hyperboloid coordinates
    /// `(cosh rho, sinh rho cos theta, sinh rho sin theta)`; the Minkowski
    /// product of two of these is `cosh` of their distance, so the
    /// candidate prefilter needs three multiplications and no trig.
    aux: [f64; 3],
}

/// Precomputed band-boundary data for the polar scheme.
#[derive(Debug, Clone, Copy)]
struct BandInfo {
    cosh_lo: f64,
    sinh_lo: f64,
    sectors: u64,
}

#[derive(Debug, Clone)]
enum Scheme {
    /// Uniform grid over the coordinates; torus variants wrap.
    Grid { dims: usize, wrap: Option<Vec<i64>> },
    /// Radial bands and sectors in geodesic polar coordinates.
    HyperbolicPolar,
}

#[derive(Debug, Clone)]
pub struct PointIndex {
    model: ManifoldModel,
    coord_len: usize,
    cell: f64,
    scheme: Scheme,
    buckets: Buckets,
    bands: Vec<BandInfo>,
    len: usize,
}

impl PointIndex {
    pub fn new(model: &ManifoldModel, cell: f64) -> Result<Self> {
        if !(cell > 0.0) {
            return Err(Error::precondition("PointIndex::new", "cell size must be positive"));
        }
        let scheme = match &model.kind {
            ManifoldKind::Euclidean(n) => {
                if *n > 3 {
                    return Err(Error::precondition(
                        "PointIndex::new",
                        "grid index supports at most 3 coordinates",
                    ));
                }
                Scheme::Grid { dims: *n, wrap: None }
            }
            ManifoldKind::FlatTorus(periods) => {
                if periods.len() > 3 {
                    return Err(Error::precondition(
                        "PointIndex::new",
                        "grid index supports at most 3 coordinates",
                    ));
                }
                let counts: Vec<i64> = periods
                    .iter()
                    .map(|l| ((l / cell).floor() as i64).max(1))
                    .collect();
                Scheme::Grid {
                    dims: periods.len(),
                    wrap: Some(counts),
                }
            }
            ManifoldKind::Sphere(_) => Scheme::Grid { dims: 3, wrap: None },
            ManifoldKind::HyperbolicPlane => Scheme::HyperbolicPolar,
        };
        let bands = if matches!(scheme, Scheme::HyperbolicPolar) {
            (0..=MAX_BAND + 1)
                .map(|b| {
                    let rho_lo = b as f64 * cell;
                    let rho_mid = rho_lo + 0.5 * cell;
                    let circ = TWO_PI * rho_mid.sinh();
                    BandInfo {
                        cosh_lo: rho_lo.cosh(),
                        sinh_lo: rho_lo.sinh(),
                        sectors: ((circ / cell).ceil() as u64).max(1),
                    }
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(PointIndex {
            model: model.clone(),
            coord_len: model.coord_len(),
            cell,
            scheme,
            buckets: Buckets::default(),
            bands,
            len: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, id: u32, p: &[f64]) {
        let key = self.bucket_key(p);
        let mut coords = [0.0f64; 3];
        coords[..p.len()].copy_from_slice(p);
        let aux = match self.scheme {
            Scheme::HyperbolicPolar => {
                let (rho, theta) = polar_of(p);
                let sh = rho.sinh();
                [rho.cosh(), sh * theta.cos(), sh * theta.sin()]
            }
            _ => [0.0; 3],
        };
        self.buckets
            .entry(key)
            .or_default()
            .push(Entry { id, coords, aux });
        self.len += 1;
    }

    /// Visits candidate entries until the visitor breaks. Every stored point
    /// within `radius` of `p` is offered; extra points may be offered too.
    /// With `prioritize_own`, the query point's own bucket is scanned first
    /// and early-exiting callers usually stop there.
    fn search_entries<F: FnMut(&Entry) -> ControlFlow<()>>(
        &self,
        p: &[f64],
        radius: f64,
        prioritize_own: bool,
        mut f: F,
    ) -> ControlFlow<()> {
        let skip = if prioritize_own {
            let own = self.bucket_key(p);
            if let Some(bucket) = self.buckets.get(&own) {
                for entry in bucket {
                    f(entry)?;
                }
            }
            Some(own)
        } else {
            None
        };
        match &self.scheme {
            Scheme::Grid { dims, wrap } => {
                self.grid_candidates(*dims, wrap.as_deref(), p, radius, skip, &mut f)
            }
            Scheme::HyperbolicPolar => self.polar_candidates(p, radius, skip, &mut f),
        }
    }

    /// Visits every stored id whose point can lie within `radius` of `p`.
    pub fn for_each_candidate<F: FnMut(u32, &[f64])>(&self, p: &[f64], radius: f64, mut f: F) {
        let _ = self.search_entries(p, radius, false, |entry| {
            f(entry.id, &entry.coords[..self.coord_len]);
            ControlFlow::Continue(())
        });
    }

    /// Query-side hyperboloid coordinates plus the absolute rounding bound
    /// for the Minkowski product: the terms reach `cosh(rho0) cosh(rho0+q)`
    /// before cancelling, so the bound scales with them.
    fn polar_prefilter(&self, rho0: f64, theta0: f64, radius: f64) -> ([f64; 3], f64) {
        let c0 = rho0.cosh();
        let s0 = rho0.sinh();
        let err = 8.0 * c0 * (rho0 + radius).cosh() * f64::EPSILON;
        ([c0, s0 * theta0.cos(), s0 * theta0.sin()], err)
    }

    /// Ids with exact model distance to `p` strictly below `radius`,
    /// ascending by id. The polar scheme prunes candidates by the
    /// law-of-cosines value with a sound error bound; survivors are decided
    /// by the exact model distance.
    pub fn within_open(&self, p: &[f64], radius: f64) -> Vec<(u32, f64)> {
        let mut out = Vec::new();
        match &self.scheme {
            Scheme::HyperbolicPolar => {
                let (rho0, theta0) = polar_of(p);
                let (q0, err) = self.polar_prefilter(rho0, theta0, radius);
                let cq = radius.cosh();
                let _ = self.search_entries(p, radius, false, |entry| {
                    let chd =
                        q0[0] * entry.aux[0] - q0[1] * entry.aux[1] - q0[2] * entry.aux[2];
                    if chd - err <= cq {
                        let d = self.model.distance_unchecked(p, &entry.coords[..2]);
                        if d < radius {
                            out.push((entry.id, d));
                        }
                    }
                    ControlFlow::Continue(())
                });
            }
            _ => {
                let _ = self.search_entries(p, radius, false, |entry| {
                    let d = self
                        .model
                        .distance_unchecked(p, &entry.coords[..self.coord_len]);
                    if d < radius {
                        out.push((entry.id, d));
                    }
                    ControlFlow::Continue(())
                });
            }
        }
        out.sort_unstable_by_key(|(id, _)| *id);
        out
    }

    /// True when some stored point lies strictly within `radius` of `p`.
    /// Scans the query's own bucket first; greedy-net rejections almost
    /// always terminate there.
    pub fn has_within_open(&self, p: &[f64], radius: f64) -> bool {
        match &self.scheme {
            Scheme::HyperbolicPolar => {
                let (rho0, theta0) = polar_of(p);
                let (q0, err) = self.polar_prefilter(rho0, theta0, radius);
                let cq = radius.cosh();
                self.search_entries(p, radius, true, |entry| {
                    let chd =
                        q0[0] * entry.aux[0] - q0[1] * entry.aux[1] - q0[2] * entry.aux[2];
                    if chd - err <= cq
                        && self.model.distance_unchecked(p, &entry.coords[..2]) < radius
                    {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                })
                .is_break()
            }
            _ => self
                .search_entries(p, radius, true, |entry| {
                    if self
                        .model
                        .distance_unchecked(p, &entry.coords[..self.coord_len])
                        < radius
                    {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                })
                .is_break(),
        }
    }

    /// Distance to the nearest stored point, searched with growing windows.
    pub fn nearest_distance(&self, p: &[f64], start_radius: f64) -> f64 {
        let mut radius = start_radius.max(self.cell);
        for _ in 0..48 {
            let mut best = f64::INFINITY;
            for (_, d) in self.within_open(p, radius) {
                if d < best {
                    best = d;
                }
            }
            if best <= radius {
                return best;
            }
            radius *= 2.0;
        }
        f64::INFINITY
    }

    fn bucket_key(&self, p: &[f64]) -> u64 {
        match &self.scheme {
            Scheme::Grid { dims, wrap } => {
                let mut coords = [0i64; 3];
                for i in 0..*dims {
                    let mut g = (p[i] / self.cell).floor() as i64;
                    if let Some(counts) = wrap {
                        g = g.rem_euclid(counts[i]);
                    }
                    coords[i] = g;
                }
                pack_grid(&coords[..*dims])
            }
            Scheme::HyperbolicPolar => {
                let (rho, theta) = polar_of(p);
                let band = (rho / self.cell).floor() as u64;
                let m = self.sectors_in_band(band);
                let sector =
                    ((theta / TWO_PI * m as f64).floor() as i64).rem_euclid(m as i64) as u64;
                (band << 40) | sector
            }
        }
    }

    fn sectors_in_band(&self, band: u64) -> u64 {
        match self.bands.get(band as usize) {
            Some(info) => info.sectors,
            None => {
                let rho_mid = (band as f64 + 0.5) * self.cell;
                let circ = TWO_PI * rho_mid.sinh();
                ((circ / self.cell).ceil() as u64).max(1)
            }
        }
    }

    fn grid_candidates<F: FnMut(&Entry) -> ControlFlow<()>>(
        &self,
        dims: usize,
        wrap: Option<&[i64]>,
        p: &[f64],
        radius: f64,
        skip: Option<u64>,
        f: &mut F,
    ) -> ControlFlow<()> {
        let reach = (radius * WINDOW_PAD / self.cell).ceil() as i64;
        // Distinct cell coordinates per axis; a wrapping window that spans a
        // full period must visit each cell exactly once.
        let axes: Vec<Vec<i64>> = (0..dims)
            .map(|i| {
                let base = (p[i] / self.cell).floor() as i64;
                match wrap {
                    Some(counts) if 2 * reach + 1 >= counts[i] => (0..counts[i]).collect(),
                    Some(counts) => (base - reach..=base + reach)
                        .map(|g| g.rem_euclid(counts[i]))
                        .collect(),
                    None => (base - reach..=base + reach).collect(),
                }
            })
            .collect();
        let mut cursor = vec![0usize; dims];
        'outer: loop {
            let mut coords = [0i64; 3];
            for i in 0..dims {
                coords[i] = axes[i][cursor[i]];
            }
            let key = pack_grid(&coords[..dims]);
            if skip != Some(key) {
                if let Some(bucket) = self.buckets.get(&key) {
                    for entry in bucket {
                        f(entry)?;
                    }
                }
            }
            for i in 0..dims {
                cursor[i] += 1;
                if cursor[i] < axes[i].len() {
                    continue 'outer;
                }
                cursor[i] = 0;
            }
            break;
        }
        ControlFlow::Continue(())
    }

    fn polar_candidates<F: FnMut(&Entry) -> ControlFlow<()>>(
        &self,
        p: &[f64],
        radius: f64,
        skip: Option<u64>,
        f: &mut F,
    ) -> ControlFlow<()> {
        let (rho0, theta0) = polar_of(p);
        let q = radius * WINDOW_PAD + 1e-12;
        let c0 = rho0.cosh();
        let s0 = rho0.sinh();
        let cq = q.cosh();
        let band_lo = (((rho0 - q) / self.cell).floor().max(0.0)) as u64;
        let band_hi = ((rho0 + q) / self.cell).floor() as u64;
        for band in band_lo..=band_hi {
            let m = self.sectors_in_band(band);
            let rho_lo = band as f64 * self.cell;
            let full = rho0 <= q + self.cell || rho_lo <= q + self.cell;
            let window = if full {
                std::f64::consts::PI
            } else {
                self.max_angle_within(c0, s0, cq, band)
            };
            let half_sectors = ((window / TWO_PI * m as f64).ceil() as i64) + 1;
            let center = (theta0 / TWO_PI * m as f64).floor() as i64;
            let span = (2 * half_sectors + 1).min(m as i64);
            let start = center - half_sectors;
            for k in 0..span {
                let sector = (start + k).rem_euclid(m as i64) as u64;
                let key = (band << 40) | sector;
                if skip != Some(key) {
                    if let Some(bucket) = self.buckets.get(&key) {
                        for entry in bucket {
                            f(entry)?;
                        }
                    }
                }
            }
        }
        ControlFlow::Continue(())
    }
}

fn pack_grid(coords: &[i64]) -> u64 {
    // 21 bits per signed axis; regions used here span far fewer cells.
    let mut key = 0u64;
    for c in coords {
        let biased = (c + (1 << 20)) as u64 & ((1 << 21) - 1);
        key = (key << 21) | biased;
    }
    key
}

pub(crate) fn polar_of(p: &[f64]) -> (f64, f64) {
    let norm = (p[0] * p[0] + p[1] * p[1]).sqrt().min(1.0 - 1e-15);
    let rho = 2.0 * norm.atanh();
    let theta = {
        let t = p[1].atan2(p[0]);
        if t < 0.0 {
            t + TWO_PI
        } else {
            t
        }
    };
    (rho, theta)
}

impl PointIndex {
    /// Largest angular separation a point in the radial band can have from a
    /// center at radius `rho0` while staying within distance `q`.
    ///
    /// From the hyperbolic law of cosines the window is
    /// `acos((cosh rho0 cosh rho - cosh q) / (sinh rho0 sinh rho))`
    /// minimized over the band. The minimizer is a band edge (tabulated
    /// cosh/sinh) or the interior critical radius `cosh rho = cosh rho0 /
    /// cosh q`, where the value reduces to `sqrt(cosh^2 rho0 - cosh^2 q) /
    /// sinh rho0`.
    fn max_angle_within(&self, c0: f64, s0: f64, cq: f64, band: u64) -> f64 {
        let edge = |info: &BandInfo| -> f64 {
            let den = s0 * info.sinh_lo;
            if den <= 0.0 {
                return -1.0;
            }
            (c0 * info.cosh_lo - cq) / den
        };
        let (lo, hi) = match (
            self.bands.get(band as usize),
            self.bands.get(band as usize + 1),
        ) {
            (Some(a), Some(b)) => (*a, *b),
            _ => {
                let mk = |rho: f64| BandInfo {
                    cosh_lo: rho.cosh(),
                    sinh_lo: rho.sinh(),
                    sectors: 1,
                };
                (
                    mk(band as f64 * self.cell),
                    mk((band + 1) as f64 * self.cell),
                )
            }
        };
        let mut worst = edge(&lo).min(edge(&hi));
        // Interior critical point, when its radius falls inside the band.
        let crit_cosh = c0 / cq;
        if crit_cosh > lo.cosh_lo && crit_cosh < hi.cosh_lo && c0 > cq {
            worst = worst.min((c0 * c0 - cq * cq).sqrt() / s0);
        }
        worst.clamp(-1.0, 1.0).acos()
    }
}
