//! Pipeline orchestration for the certification toolkit.
//!
//! The `pipeline` entry point chains sampling, net construction, graph
//! checks, lattice snapping, scale calibration, both embedding factors, the
//! combined map, and the reach certification, writing one artifact per stage
//! and a versioned summary with every certificate and the content hash of
//! every artifact it consumed. All randomness derives from the root seed by
//! stage labels, so a fixed configuration reproduces every JSON/CSV byte.

pub mod config;
pub mod plot;

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use tubed_core::error::{Error, Result};
use tubed_core::geometry::{tubedness_check, TubednessReport};
use tubed_core::lattice::{
    calibrate_scale, calibrate_scale_sampled, CalibrationReport, Clique, EmbedOutcome,
    GridSnapEmbedder, LatticeCoords, LatticeEmbedder, PhiMap,
};
use tubed_core::models::{ManifoldKind, Point, PointSet};
use tubed_core::net::{
    check_distance_comparison, graph_growth, DistanceComparisonReport, GrowthFit,
    IntersectionGraph, Net, NetReport,
};
use tubed_core::rng::derive_seed;
use tubed_core::smooth::{
    choose_epsilon, derivative_bounds, f2_distortion_scan, EpsilonReport,
    LocalChartStack, PartitionOfUnity, SmoothMapStack,
};

pub use config::{parse_model, resolve_out_dir, write_artifact, PipelineConfig};

// ---------------------------------------------------------------------------
// summary schema (v1)

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleStage {
    pub kind: String,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetStage {
    pub size: usize,
    pub report: NetReport,
    pub n2: usize,
    pub n4: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphStage {
    pub lambda: f64,
    pub edges: usize,
    pub max_degree: usize,
    pub degree_bound_n2lambda: usize,
    pub connected: bool,
    pub distance_comparison: DistanceComparisonReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeStage {
    pub dims: usize,
    pub vertices: usize,
    pub pitch: f64,
    pub shifts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleStage {
    /// Family-plus-realized-pair calibration actually driving the map.
    pub sampled: CalibrationReport,
    /// Exhaustive reference calibration in low dimension.
    pub reference_box: Option<CalibrationReport>,
    pub realized_pairs_used: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionStage {
    pub evaluations: usize,
    pub max_normalization_error: f64,
    pub psi_min: f64,
    pub psi_max: f64,
    pub n2_bound: usize,
    pub supports_are_cliques: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationStage {
    pub pairs: usize,
    pub min_image_distance: f64,
    pub far_threshold: f64,
    pub disjoint_support_pairs_checked: usize,
    pub disjoint_support_violations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct F2Stage {
    pub classes: usize,
    pub class_bound_n4: usize,
    pub d2: usize,
    pub distortion_lower: f64,
    pub distortion_upper: f64,
    pub balls: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombineStage {
    pub epsilon: EpsilonReport,
    pub d1: usize,
    pub d2: usize,
    pub derivative_bounds: Vec<f64>,
    pub injectivity_pairs: usize,
    /// Least image distance among sampled distinct pairs, against the
    /// resolution `1e-6 * epsilon`.
    pub min_image_distance: f64,
    pub injectivity_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stages {
    pub sample: SampleStage,
    pub net: NetStage,
    pub graphs: Vec<GraphStage>,
    pub growth: GrowthFit,
    pub lattice: LatticeStage,
    pub scale: ScaleStage,
    pub partition: PartitionStage,
    pub f1: SeparationStage,
    pub f2: F2Stage,
    pub combine: CombineStage,
    pub reach: TubednessReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryV1 {
    pub version: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub stages: Stages,
    pub artifact_hashes: BTreeMap<String, String>,
}

// ---------------------------------------------------------------------------
// stack assembly

/// Everything the map stages need, rebuilt deterministically from a config.
pub struct BuiltStack {
    pub points: PointSet,
    pub net_sizes: (usize, usize),
    pub stack: SmoothMapStack,
    pub fine_report: NetReport,
    pub n2: usize,
    pub n4: usize,
    pub embedder: GridSnapEmbedder,
    pub scale_stage: ScaleStage,
    pub epsilon_report: EpsilonReport,
    /// Source points at a safe distance from the region boundary, where the
    /// unit-ball and partition checks are meaningful.
    pub interior: Vec<Point>,
}

fn interior_points(ps: &PointSet, center: &[f64], radius: f64, margin: f64) -> Vec<Point> {
    ps.points
        .iter()
        .filter(|p| ps.model.distance_unchecked(p, center) <= radius - margin)
        .cloned()
        .collect()
}

/// Builds the full map stack for a flat configuration.
pub fn build_stack(cfg: &PipelineConfig) -> Result<BuiltStack> {
    cfg.validate()?;
    if !matches!(cfg.model, ManifoldKind::Euclidean(_)) {
        return Err(Error::Config(
            "the map stack requires a Euclidean model; curved models must be \
             rescaled into the flat regime before entering"
                .into(),
        ));
    }
    let model = cfg.model();
    let seed = cfg.seed;
    let ps = model.sample_region_with_budget(
        &cfg.region.center,
        cfg.region.radius,
        cfg.spacing,
        derive_seed(seed, "sample"),
        cfg.budgets.max_points,
    )?;

    let fine = Net::build(&ps, cfg.net_r)?;
    let fine_report = fine.verify(&ps, cfg.budgets.lebesgue_centers, derive_seed(seed, "verify"));
    let n2 = fine.count_n_lambda(2.0, Some(&ps));
    let n4 = fine.count_n_lambda(4.0, Some(&ps));

    let gamma2 = IntersectionGraph::build(&fine, 2.0)?;
    let embedder = GridSnapEmbedder::injective_for(cfg.net_r, 2.0, model.dim());
    let coords = match embedder.embed(&fine, &gamma2)? {
        EmbedOutcome::Embedded(c) => c,
        EmbedOutcome::Failed(f) => {
            return Err(Error::Config(format!(
                "lattice snap failed: {} violating edges, {} collisions",
                f.violating_edges.len(),
                f.colliding_pairs.len()
            )))
        }
    };

    // Scale selection: structured families plus support pairs realized by
    // the net across the binding distance shell.
    let interior = interior_points(&ps, &cfg.region.center, cfg.region.radius, 1.5);
    if interior.len() < 16 {
        return Err(Error::Config(
            "region too small: almost no interior sample points".into(),
        ));
    }
    let partition = PartitionOfUnity::new(fine);
    let realized = realized_support_pairs(
        &partition,
        &coords,
        &interior,
        cfg.budgets.realized_pairs,
        derive_seed(seed, "realized-pairs"),
    )?;
    let sampled = calibrate_scale_sampled(
        coords.n,
        n2.max(2),
        cfg.budgets.calibration_samples,
        derive_seed(seed, "calibrate"),
        &realized,
    )?;
    let reference_box = if model.dim() <= 2 {
        Some(calibrate_scale(model.dim(), cfg.calibration_box)?)
    } else {
        None
    };
    let scale_stage = ScaleStage {
        realized_pairs_used: realized.len(),
        sampled: sampled.clone(),
        reference_box,
    };
    let phi = PhiMap::new(coords.n, sampled.scale)?;

    let unit_net = Net::build(&ps, 1.0)?;
    let local = LocalChartStack::build(unit_net)?;

    let mut stack = SmoothMapStack::new(model, partition, coords, phi, local)?;

    // Scale for the direct sum.
    let eps_samples: Vec<Point> = spaced_subset(
        &interior,
        cfg.budgets.epsilon_samples,
        derive_seed(seed, "epsilon-points"),
    );
    let epsilon_report = choose_epsilon(
        &stack,
        &eps_samples,
        cfg.budgets.epsilon_directions,
        derive_seed(seed, "epsilon"),
        cfg.epsilon_margin,
    )?;
    stack.epsilon = epsilon_report.epsilon;

    Ok(BuiltStack {
        net_sizes: (stack.partition.net.len(), stack.local.net.len()),
        fine_report,
        n2,
        n4,
        embedder,
        scale_stage,
        epsilon_report,
        interior,
        stack,
        points: ps,
    })
}

fn spaced_subset(points: &[Point], count: usize, seed: u64) -> Vec<Point> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..idx.len() {
        let j = rng.gen_range(i..idx.len());
        idx.swap(i, j);
    }
    idx.truncate(count);
    idx.into_iter().map(|i| points[i].clone()).collect()
}

/// Support-coordinate clique pairs realized by points across the binding
/// distance shell `[4r, 14r]`.
fn realized_support_pairs(
    partition: &PartitionOfUnity,
    coords: &LatticeCoords,
    interior: &[Point],
    count: usize,
    seed: u64,
) -> Result<Vec<(Clique, Clique)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold = 4.0 * partition.r();
    let mut out = Vec::new();
    // Hull distances are translation invariant, so pairs are deduplicated by
    // the translate that moves the first support point to the origin.
    let mut seen: std::collections::HashSet<Vec<i64>> = std::collections::HashSet::new();
    let mut attempts = 0usize;
    while attempts < count * 12 && out.len() < count {
        attempts += 1;
        let x = &interior[rng.gen_range(0..interior.len())];
        let y = &interior[rng.gen_range(0..interior.len())];
        let d = partition.net.model.distance_unchecked(x, y);
        if d < threshold || d > 14.0 * partition.r() {
            continue;
        }
        let sx = partition.eval(x)?;
        let sy = partition.eval(y)?;
        let clique = |s: &tubed_core::smooth::PartitionEval| -> Result<Clique> {
            let mut c: Clique = s
                .support
                .iter()
                .map(|(v, _)| {
                    coords
                        .get(*v)
                        .cloned()
                        .ok_or_else(|| Error::Config(format!("missing coords for vertex {v}")))
                })
                .collect::<Result<_>>()?;
            c.sort();
            Ok(c)
        };
        let a = clique(&sx)?;
        let b = clique(&sy)?;
        let anchor = a[0].clone();
        let mut key = Vec::with_capacity((a.len() + b.len() + 1) * anchor.len());
        for p in a.iter().chain(b.iter()) {
            for (c, o) in p.iter().zip(&anchor) {
                key.push(c - o);
            }
        }
        key.push(a.len() as i64);
        if seen.insert(key) {
            out.push((a, b));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// scans over a built stack

pub fn partition_scan(built: &BuiltStack, count: usize, seed: u64) -> Result<PartitionStage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let partition = &built.stack.partition;
    let r = partition.r();
    let mut max_err: f64 = 0.0;
    let mut psi_min = f64::INFINITY;
    let mut psi_max: f64 = 0.0;
    let mut cliques_ok = true;
    for _ in 0..count {
        let x = &built.interior[rng.gen_range(0..built.interior.len())];
        let eval = partition.eval(x)?;
        let total: f64 = eval.support.iter().map(|(_, w)| w).sum();
        max_err = max_err.max((total - 1.0).abs());
        psi_min = psi_min.min(eval.psi_total);
        psi_max = psi_max.max(eval.psi_total);
        for i in 0..eval.support.len() {
            for j in (i + 1)..eval.support.len() {
                let a = &partition.net.vertices[eval.support[i].0 as usize];
                let b = &partition.net.vertices[eval.support[j].0 as usize];
                if partition.net.model.distance_unchecked(a, b) >= 4.0 * r {
                    cliques_ok = false;
                }
            }
        }
    }
    Ok(PartitionStage {
        evaluations: count,
        max_normalization_error: max_err,
        psi_min,
        psi_max,
        n2_bound: built.n2,
        supports_are_cliques: cliques_ok,
        seed,
    })
}

/// Far-pair separation of the unscaled separating factor, plus the
/// disjoint-support certificate. Half of the pairs are drawn from the
/// binding shell just above the threshold.
pub fn f1_separation_scan(built: &BuiltStack, pairs: usize, seed: u64) -> Result<SeparationStage> {
    let stack = &built.stack;
    let model = &stack.model;
    let far = 4.0 * stack.partition.r();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_dist = f64::INFINITY;
    let mut done = 0usize;
    let mut support_checked = 0usize;
    let mut support_violations = 0usize;
    let mut attempts = 0usize;
    while done < pairs && attempts < pairs * 200 {
        attempts += 1;
        let x = &built.interior[rng.gen_range(0..built.interior.len())];
        let y = &built.interior[rng.gen_range(0..built.interior.len())];
        let d = model.distance_unchecked(x, y);
        if d < far {
            continue;
        }
        // Half the budget focuses on the shell where separation binds.
        if done % 2 == 0 && d > far * 3.0 {
            continue;
        }
        let fx = stack.f1_eval(x)?;
        let fy = stack.f1_eval(y)?;
        min_dist = min_dist.min(fx.dist(&fy));
        if done % 16 == 0 {
            let sx = stack.partition.eval(x)?;
            let sy = stack.partition.eval(y)?;
            support_checked += 1;
            if sx
                .support
                .iter()
                .any(|(v, _)| sy.support.iter().any(|(w, _)| v == w))
            {
                support_violations += 1;
            }
        }
        done += 1;
    }
    if done < pairs {
        return Err(Error::precondition(
            "f1_separation_scan",
            format!("could only form {done} of {pairs} far pairs"),
        ));
    }
    Ok(SeparationStage {
        pairs: done,
        min_image_distance: min_dist,
        far_threshold: far,
        disjoint_support_pairs_checked: support_checked,
        disjoint_support_violations: support_violations,
        seed,
    })
}

pub fn combined_injectivity_scan(
    built: &BuiltStack,
    pairs: usize,
    seed: u64,
) -> Result<(usize, f64, bool)> {
    let stack = &built.stack;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_dist = f64::INFINITY;
    let mut done = 0;
    while done < pairs {
        let x = &built.interior[rng.gen_range(0..built.interior.len())];
        let y = &built.interior[rng.gen_range(0..built.interior.len())];
        let d = stack.model.distance_unchecked(x, y);
        if d < 1e-9 {
            continue;
        }
        let fx = stack.combined_eval(x)?;
        let fy = stack.combined_eval(y)?;
        min_dist = min_dist.min(fx.dist(&fy));
        done += 1;
    }
    let ok = min_dist >= 1e-6 * stack.epsilon;
    Ok((done, min_dist, ok))
}

// ---------------------------------------------------------------------------
// the pipeline

pub fn run_pipeline(cfg: &PipelineConfig, out_dir: &Path) -> Result<SummaryV1> {
    let seed = cfg.seed;
    let mut hashes = BTreeMap::new();

    let built = build_stack(cfg)?;
    let model = cfg.model();

    // sample artifact
    let csv = built.points.to_csv();
    let (_, h) = write_artifact(out_dir, "points.csv", csv.as_bytes())?;
    hashes.insert("points.csv".to_string(), h);
    let sample_stage = SampleStage {
        kind: model.kind_label(),
        count: built.points.len(),
        seed: derive_seed(seed, "sample"),
    };

    // net artifact
    let net_stage = NetStage {
        size: built.net_sizes.0,
        report: built.fine_report.clone(),
        n2: built.n2,
        n4: built.n4,
    };
    let (_, h) = write_artifact(
        out_dir,
        "net_report.json",
        serde_json::to_string_pretty(&net_stage)?.as_bytes(),
    )?;
    hashes.insert("net_report.json".to_string(), h);

    // graphs and the distance comparison
    let fine = &built.stack.partition.net;
    let mut graph_stages = Vec::new();
    let mut growth_fit: Option<GrowthFit> = None;
    for &lambda in &cfg.lambdas {
        let graph = IntersectionGraph::build(fine, lambda)?;
        let cmp = check_distance_comparison(
            fine,
            &graph,
            cfg.budgets.pair_checks,
            derive_seed(seed, &format!("dist-{lambda}")),
        )?;
        let n2l = fine.count_n_lambda(2.0 * lambda, None);
        graph_stages.push(GraphStage {
            lambda,
            edges: graph.edge_count(),
            max_degree: graph.max_degree(),
            degree_bound_n2lambda: n2l,
            connected: graph.is_connected(),
            distance_comparison: cmp,
        });
        if lambda == 1.0 {
            let center = nearest_vertex(fine, &cfg.region.center);
            let fit = graph_growth(&graph, &[center], cfg.budgets.growth_r_max, 0.5)?;
            let (_, h) =
                write_artifact(out_dir, "growth.csv", fit.to_csv().as_bytes())?;
            hashes.insert("growth.csv".to_string(), h);
            let (_, h) = write_artifact(
                out_dir,
                "growth.json",
                serde_json::to_string_pretty(&fit)?.as_bytes(),
            )?;
            hashes.insert("growth.json".to_string(), h);
            let svg = plot::growth_curve(&[plot::Series {
                label: format!("{} net", model.kind_label()),
                points: fit
                    .table
                    .iter()
                    .map(|(r, c)| (*r as f64, *c as f64))
                    .collect(),
            }]);
            write_artifact(out_dir, "growth.svg", svg.as_bytes())?;
            growth_fit = Some(fit);
        }

        if lambda == 1.0 {
            let exchange = graph.to_exchange(fine);
            let (_, h) = write_artifact(
                out_dir,
                "graph_lambda1.json",
                serde_json::to_string(&exchange)?.as_bytes(),
            )?;
            hashes.insert("graph_lambda1.json".to_string(), h);
        }
    }
    let growth_fit = growth_fit.ok_or_else(|| {
        Error::Config("lambda list must contain 1 for the growth stage".into())
    })?;

    // lattice artifact
    let lattice_stage = LatticeStage {
        dims: built.stack.lattice.n,
        vertices: built.stack.lattice.coords.len(),
        pitch: built.embedder.pitch,
        shifts: built.embedder.shifts,
    };
    let (_, h) = write_artifact(
        out_dir,
        "lattice.json",
        serde_json::to_string(&built.stack.lattice)?.as_bytes(),
    )?;
    hashes.insert("lattice.json".to_string(), h);

    // calibration artifact
    let (_, h) = write_artifact(
        out_dir,
        "calibration.json",
        serde_json::to_string_pretty(&built.scale_stage)?.as_bytes(),
    )?;
    hashes.insert("calibration.json".to_string(), h);

    // partition and f1 checks
    let partition_stage = partition_scan(
        &built,
        cfg.budgets.partition_checks,
        derive_seed(seed, "partition-scan"),
    )?;
    let f1_stage = f1_separation_scan(
        &built,
        cfg.budgets.far_pair_checks,
        derive_seed(seed, "f1-pairs"),
    )?;
    let (_, h) = write_artifact(
        out_dir,
        "f1_check.json",
        serde_json::to_string_pretty(&f1_stage)?.as_bytes(),
    )?;
    hashes.insert("f1_check.json".to_string(), h);

    // f2 distortion
    let centers = spaced_subset(
        &built.interior,
        cfg.budgets.distortion_balls,
        derive_seed(seed, "distortion-centers"),
    );
    let distortion = f2_distortion_scan(
        &built.stack,
        &centers,
        cfg.budgets.distortion_pairs,
        derive_seed(seed, "distortion"),
    )?;
    let (_, h) = write_artifact(
        out_dir,
        "f2_distortion.json",
        serde_json::to_string_pretty(&distortion)?.as_bytes(),
    )?;
    hashes.insert("f2_distortion.json".to_string(), h);
    let svg = plot::distortion_histogram(
        &distortion
            .per_ball
            .iter()
            .flat_map(|(lo, hi)| [*lo, *hi])
            .collect::<Vec<f64>>(),
        24,
    );
    write_artifact(out_dir, "distortion.svg", svg.as_bytes())?;
    let f2_stage = F2Stage {
        classes: built.stack.local.n_classes,
        class_bound_n4: built.stack.local.net.count_n_lambda(4.0, None),
        d2: built.stack.d2(),
        distortion_lower: distortion.lower,
        distortion_upper: distortion.upper,
        balls: centers.len(),
    };

    // combined map checks
    let (inj_pairs, min_img, inj_ok) = combined_injectivity_scan(
        &built,
        cfg.budgets.pair_checks,
        derive_seed(seed, "injectivity"),
    )?;
    let deriv_base = spaced_subset(
        &built.interior,
        cfg.budgets.epsilon_samples,
        derive_seed(seed, "derivative-points"),
    );
    let stack_ref = &built.stack;
    let bounds = derivative_bounds(
        |x| stack_ref.combined_eval(x),
        &stack_ref.model,
        &deriv_base,
        4,
        cfg.budgets.geodesic_count,
        0.02,
        derive_seed(seed, "derivatives"),
    )?;
    let combine_stage = CombineStage {
        epsilon: built.epsilon_report.clone(),
        d1: built.stack.d1(),
        d2: built.stack.d2(),
        derivative_bounds: bounds.c.clone(),
        injectivity_pairs: inj_pairs,
        min_image_distance: min_img,
        injectivity_ok: inj_ok,
    };
    let (_, h) = write_artifact(
        out_dir,
        "epsilon.json",
        serde_json::to_string_pretty(&combine_stage)?.as_bytes(),
    )?;
    hashes.insert("epsilon.json".to_string(), h);

    // scatter plot of a projection of the combined image
    let scatter_points: Vec<(f64, f64)> = spaced_subset(
        &built.interior,
        600,
        derive_seed(seed, "scatter"),
    )
    .iter()
    .map(|x| {
        let img = built.stack.combined_eval(x).unwrap();
        let dense = img.entries();
        let mut xy = (0.0, 0.0);
        for (i, v) in dense {
            if *i == 0 {
                xy.0 = *v;
            }
            if *i == 1 {
                xy.1 = *v;
            }
        }
        xy
    })
    .collect();
    let svg = plot::embedding_scatter(&scatter_points);
    write_artifact(out_dir, "scatter.svg", svg.as_bytes())?;

    // reach certification
    let reach = tubedness_check(
        &built.stack,
        &built.interior,
        cfg.budgets.reach_points,
        4.0 * built.stack.partition.r(),
        derive_seed(seed, "reach"),
    )?;
    let (_, h) = write_artifact(
        out_dir,
        "reach.json",
        serde_json::to_string_pretty(&reach)?.as_bytes(),
    )?;
    hashes.insert("reach.json".to_string(), h);

    let summary = SummaryV1 {
        version: "v1".to_string(),
        seed,
        config: cfg.clone(),
        stages: Stages {
            sample: sample_stage,
            net: net_stage,
            graphs: graph_stages,
            growth: growth_fit,
            lattice: lattice_stage,
            scale: built.scale_stage.clone(),
            partition: partition_stage,
            f1: f1_stage,
            f2: f2_stage,
            combine: combine_stage,
            reach,
        },
        artifact_hashes: hashes,
    };
    let bytes = serde_json::to_string_pretty(&summary)?;
    write_artifact(out_dir, "summary.json", bytes.as_bytes())?;
    Ok(summary)
}

fn nearest_vertex(net: &Net, point: &[f64]) -> u32 {
    let mut best = 0u32;
    let mut best_d = f64::INFINITY;
    for (i, v) in net.vertices.iter().enumerate() {
        let d = net.model.distance_unchecked(v, point);
        if d < best_d {
            best_d = d;
            best = i as u32;
        }
    }
    best
}

/// Batch map evaluation: reads a CSV of points, writes a CSV of images with
/// a header recording the scale and dimensions.
pub fn eval_batch(
    built: &BuiltStack,
    which: MapChoice,
    input: &PointSet,
) -> Result<String> {
    let stack = &built.stack;
    let (d1, d2) = (stack.d1(), stack.d2());
    let mut out = format!(
        "# epsilon={} d1={} d2={} seed={}\n",
        stack.epsilon,
        d1,
        d2,
        stack.partition.net.source_seed
    );
    for p in &input.points {
        let dense: Vec<f64> = match which {
            MapChoice::F1 => stack.f1_eval(p)?.to_dense(d1),
            MapChoice::F2 => stack.f2_eval(p)?,
            MapChoice::Combined => stack.combined_eval(p)?.to_dense(d1 + d2),
        };
        let row: Vec<String> = dense.iter().map(|x| format!("{x}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub enum MapChoice {
    F1,
    F2,
    Combined,
}
