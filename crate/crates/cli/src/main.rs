use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tubed_cli::config::{parse_model, resolve_out_dir, write_artifact, PipelineConfig};
use tubed_cli::{build_stack, eval_batch, run_pipeline, MapChoice};
use tubed_core::error::Error;
use tubed_core::geometry::{sectional_bounds_sweep, sphere_tangent_frames, reach_estimate};
use tubed_core::lattice::{calibrate_scale, EmbedOutcome, GridSnapEmbedder, LatticeEmbedder};
use tubed_core::models::{ManifoldModel, PointSet};
use tubed_core::net::{check_distance_comparison, graph_growth, IntersectionGraph, Net};
use tubed_core::rng::derive_seed;
use tubed_core::universal::{build_delta_level, DeltaBudgets, DeltaGraph, SimpleGraph};

/// Certified discretization and embedding pipeline.
#[derive(Parser)]
#[command(name = "tubed", version, about)]
struct Cli {
    /// Output directory (or set TUBED_OUT_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a covering point set of a model region.
    Sample {
        /// Model label: euclidean<n>, hyperbolic, sphere:<r>, torus:<p,..>.
        #[arg(long)]
        model: String,
        #[arg(long, value_delimiter = ',')]
        center: Vec<f64>,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        spacing: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Build and verify a maximal separated net over a sampled point set.
    Net {
        #[arg(long)]
        model: String,
        /// Points CSV produced by `sample`.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 500)]
        lebesgue_centers: usize,
    },
    /// Intersection graph of a net with checks.
    Graph {
        #[arg(long)]
        model: String,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
    },
    /// BFS growth classification of a net graph.
    Growth {
        #[arg(long)]
        model: String,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 20)]
        r_max: u32,
    },
    /// Snap a net to lattice coordinates and verify the subgraph condition.
    Lattice {
        #[arg(long)]
        model: String,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
    },
    /// Exhaustive box calibration of the parity lattice map.
    Calibrate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        box_radius: i64,
    },
    /// Evaluate the separating factor on a batch of points.
    F1 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Evaluate the chart factor on a batch of points.
    F2 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Evaluate the combined map on a batch of points.
    Combine {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Reach certification of the combined map (includes the sphere control).
    Reach {
        #[arg(long)]
        config: PathBuf,
    },
    /// Monte-Carlo sweep of the curvature bounds.
    Gauss {
        #[arg(long, default_value_t = 10_000)]
        sweep: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_codim: usize,
    },
    /// Grow certified obstruction-graph levels against a target graph.
    Universal {
        /// Path target length (or provide --gamma for a graph JSON).
        #[arg(long, default_value_t = 50)]
        gamma_path: usize,
        /// Graph exchange JSON for the target.
        #[arg(long)]
        gamma: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        levels: u32,
        #[arg(long, default_value_t = 4096)]
        max_sk: u64,
        #[arg(long, default_value_t = 12)]
        max_candidates: usize,
        #[arg(long, default_value_t = 64)]
        max_matchings: u64,
        #[arg(long, default_value_t = 20_000_000)]
        search_node_budget: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Full pipeline with a summary certificate.
    Pipeline {
        /// Pipeline configuration JSON; flags below override a default
        /// Euclidean-plane configuration when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "euclidean2")]
        model: String,
        #[arg(long, default_value_t = 8.0)]
        region_radius: f64,
        #[arg(long, default_value_t = 0.25)]
        r: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load_points(model: &ManifoldModel, path: &PathBuf) -> Result<PointSet, Error> {
    let text = std::fs::read_to_string(path)?;
    PointSet::from_csv(model.clone(), &text)
}

fn run_batch(
    out_dir: &PathBuf,
    config: &PathBuf,
    points: &PathBuf,
    which: MapChoice,
    name: &str,
) -> Result<(), Error> {
    let cfg = PipelineConfig::from_file(config)?;
    let built = build_stack(&cfg)?;
    let input = load_points(&cfg.model(), points)?;
    let csv = eval_batch(&built, which, &input)?;
    let (path, _) = write_artifact(out_dir, name, csv.as_bytes())?;
    println!("wrote {} images to {}", input.len(), path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let out_dir = resolve_out_dir(cli.out_dir);
    match cli.command {
        Command::Sample {
            model,
            center,
            radius,
            spacing,
            seed,
        } => {
            let model = ManifoldModel::new(parse_model(&model)?);
            let ps = model.sample_region(&center, radius, spacing, seed)?;
            let (path, _) = write_artifact(&out_dir, "points.csv", ps.to_csv().as_bytes())?;
            let descriptor = serde_json::to_string_pretty(&model)?;
            write_artifact(&out_dir, "model.json", descriptor.as_bytes())?;
            println!("wrote {} points to {}", ps.len(), path.display());
        }
        Command::Net {
            model,
            points,
            r,
            lebesgue_centers,
        } => {
            let model = ManifoldModel::new(parse_model(&model)?);
            let ps = load_points(&model, &points)?;
            let net = Net::build(&ps, r)?;
            let report = net.verify(&ps, lebesgue_centers, derive_seed(ps.seed, "verify"));
            let (path, _) = write_artifact(
                &out_dir,
                "net_report.json",
                serde_json::to_string_pretty(&report)?.as_bytes(),
            )?;
            println!(
                "net size {} | separation_ok={} cover_radius={:.6} lebesgue_ok={} -> {}",
                net.len(),
                report.separation_ok,
                report.cover_radius,
                report.lebesgue_ok,
                path.display()
            );
        }
        Command::Graph {
            model,
            points,
            r,
            lambda,
            pairs,
        } => {
            let model = ManifoldModel::new(parse_model(&model)?);
            let ps = load_points(&model, &points)?;
            let net = Net::build(&ps, r)?;
            let graph = IntersectionGraph::build(&net, lambda)?;
            let cmp = check_distance_comparison(&net, &graph, pairs, derive_seed(ps.seed, "dist"))?;
            let exchange = graph.to_exchange(&net);
            let (path, _) = write_artifact(
                &out_dir,
                "graph.json",
                serde_json::to_string(&exchange)?.as_bytes(),
            )?;
            println!(
                "graph: {} vertices, {} edges, max degree {} | distance comparison max violation {:.3e} over {} pairs -> {}",
                graph.vertex_count(),
                graph.edge_count(),
                graph.max_degree(),
                cmp.max_violation,
                cmp.pairs_checked,
                path.display()
            );
        }
        Command::Growth {
            model,
            points,
            r,
            lambda,
            r_max,
        } => {
            let model = ManifoldModel::new(parse_model(&model)?);
            let ps = load_points(&model, &points)?;
            let net = Net::build(&ps, r)?;
            let graph = IntersectionGraph::build(&net, lambda)?;
            let center = (0..net.len() as u32)
                .min_by(|&a, &b| {
                    let da = net
                        .model
                        .distance_unchecked(&net.vertices[a as usize], &ps.points[0]);
                    let db = net
                        .model
                        .distance_unchecked(&net.vertices[b as usize], &ps.points[0]);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap_or(0);
            let fit = graph_growth(&graph, &[center], r_max, 0.5)?;
            write_artifact(&out_dir, "growth.csv", fit.to_csv().as_bytes())?;
            let (path, _) = write_artifact(
                &out_dir,
                "growth.json",
                serde_json::to_string_pretty(&fit)?.as_bytes(),
            )?;
            println!(
                "growth: {:?} (fitted exponent {:.3}) -> {}",
                fit.classification, fit.fitted_exponent, path.display()
            );
        }
        Command::Lattice {
            model,
            points,
            r,
            lambda,
        } => {
            let model = ManifoldModel::new(parse_model(&model)?);
            let dim = model.dim();
            let ps = load_points(&model, &points)?;
            let net = Net::build(&ps, r)?;
            let graph = IntersectionGraph::build(&net, lambda)?;
            let embedder = GridSnapEmbedder::injective_for(r, lambda, dim);
            match embedder.embed(&net, &graph)? {
                EmbedOutcome::Embedded(coords) => {
                    let (path, _) = write_artifact(
                        &out_dir,
                        "lattice.json",
                        serde_json::to_string(&coords)?.as_bytes(),
                    )?;
                    println!(
                        "lattice coordinates in Z^{} for {} vertices (verified) -> {}",
                        coords.n,
                        coords.coords.len(),
                        path.display()
                    );
                }
                EmbedOutcome::Failed(f) => {
                    let (path, _) = write_artifact(
                        &out_dir,
                        "lattice_failure.json",
                        serde_json::to_string_pretty(&f)?.as_bytes(),
                    )?;
                    println!(
                        "snap failed: {} violating edges, {} collisions -> {}",
                        f.violating_edges.len(),
                        f.colliding_pairs.len(),
                        path.display()
                    );
                }
            }
        }
        Command::Calibrate { n, box_radius } => {
            let report = calibrate_scale(n, box_radius)?;
            let (path, _) = write_artifact(
                &out_dir,
                "calibration.json",
                serde_json::to_string_pretty(&report)?.as_bytes(),
            )?;
            println!(
                "scale {:.6}, rho {:.6}, min hull distance {:.9} over {} disjoint pairs -> {}",
                report.scale,
                report.rho,
                report.min_distance_at_scale,
                report.disjoint_pairs,
                path.display()
            );
        }
        Command::F1 { config, points } => {
            run_batch(&out_dir, &config, &points, MapChoice::F1, "f1_images.csv")?
        }
        Command::F2 { config, points } => {
            run_batch(&out_dir, &config, &points, MapChoice::F2, "f2_images.csv")?
        }
        Command::Combine { config, points } => run_batch(
            &out_dir,
            &config,
            &points,
            MapChoice::Combined,
            "combined_images.csv",
        )?,
        Command::Reach { config } => {
            let cfg = PipelineConfig::from_file(&config)?;
            let built = build_stack(&cfg)?;
            let report = tubed_core::geometry::tubedness_check(
                &built.stack,
                &built.interior,
                cfg.budgets.reach_points,
                4.0 * built.stack.partition.r(),
                derive_seed(cfg.seed, "reach"),
            )?;
            // Control: the estimator on a unit sphere returns its radius.
            let sphere = ManifoldModel::sphere(1.0);
            let cloud = sphere.sample_region(
                &[0.0, 0.0, 1.0],
                std::f64::consts::PI,
                0.08,
                derive_seed(cfg.seed, "sphere-control"),
            )?;
            let frames = sphere_tangent_frames(&cloud.points, 1.0);
            let control = reach_estimate(&cloud.points, &frames, 0.3)?;
            let (path, _) = write_artifact(
                &out_dir,
                "reach.json",
                serde_json::to_string_pretty(&report)?.as_bytes(),
            )?;
            println!(
                "reach estimate {:.6} (far pairs ok: {}) | sphere control {:.4} -> {}",
                report.reach.reach_estimate,
                report.far_pair_ok,
                control.reach_estimate,
                path.display()
            );
        }
        Command::Gauss {
            sweep,
            seed,
            max_codim,
        } => {
            let report = sectional_bounds_sweep(sweep, max_codim, seed);
            let (path, _) = write_artifact(
                &out_dir,
                "gauss_report.json",
                serde_json::to_string_pretty(&report)?.as_bytes(),
            )?;
            println!(
                "curvature sweep: {} samples, {} violations, K range [{:.6}, {:.6}] -> {}",
                report.samples, report.violations, report.min_k, report.max_k, path.display()
            );
            if report.violations > 0 {
                return Err(Error::numeric("gauss", "curvature bound violations"));
            }
        }
        Command::Universal {
            gamma_path,
            gamma,
            levels,
            max_sk,
            max_candidates,
            max_matchings,
            search_node_budget,
            seed,
        } => {
            let target = match gamma {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    let exchange = serde_json::from_str(&text)?;
                    SimpleGraph::from_exchange(&exchange)?
                }
                None => SimpleGraph::path(gamma_path),
            };
            let budgets = DeltaBudgets {
                max_sk,
                max_candidates,
                max_matchings,
                search_node_budget,
            };
            let mut delta = DeltaGraph::default();
            for k in 1..=levels {
                let level = build_delta_level(&target, k, &delta, &budgets, seed ^ k as u64)?;
                println!(
                    "level {k}: size {} certified (nodes explored {})",
                    level.s, level.certificate.nodes_explored
                );
                delta.levels.push(level);
            }
            delta.verify_structure()?;
            let (path, _) = write_artifact(
                &out_dir,
                "delta.json",
                serde_json::to_string_pretty(&delta)?.as_bytes(),
            )?;
            write_artifact(
                &out_dir,
                "delta_graph.json",
                serde_json::to_string(&delta.graph().to_exchange())?.as_bytes(),
            )?;
            println!("obstruction graph with levels {:?} -> {}", delta.level_sizes(), path.display());
        }
        Command::Pipeline {
            config,
            model,
            region_radius,
            r,
            seed,
        } => {
            let cfg = match config {
                Some(path) => PipelineConfig::from_file(&path)?,
                None => {
                    let mut cfg = PipelineConfig::euclidean_default(region_radius, seed);
                    cfg.model = parse_model(&model)?;
                    cfg.net_r = r;
                    cfg
                }
            };
            let summary = run_pipeline(&cfg, &out_dir)?;
            println!(
                "pipeline done: f1 min far separation {:.4}, reach estimate {:.6}, epsilon {:.4} -> {}",
                summary.stages.f1.min_image_distance,
                summary.stages.reach.reach.reach_estimate,
                summary.stages.combine.epsilon.epsilon,
                out_dir.join("summary.json").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
