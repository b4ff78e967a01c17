//! Timing harness for the hyperbolic net/growth path at scale.
//!
//! Run with `cargo run --release -p tubed-core --example bench_growth`.

use std::time::Instant;
use tubed_core::models::ManifoldModel;
use tubed_core::net::{graph_growth, IntersectionGraph, Net};

fn main() {
    let model = ManifoldModel::hyperbolic_plane();
    let t0 = Instant::now();
    let ps = model
        .sample_region_with_budget(&[0.0, 0.0], 14.0, 0.9, 43, 30_000_000)
        .unwrap();
    eprintln!("sample: {} points in {:.2?}", ps.len(), t0.elapsed());
    let t1 = Instant::now();
    let net = Net::build(&ps, 1.0).unwrap();
    eprintln!("net: {} vertices in {:.2?}", net.len(), t1.elapsed());
    drop(ps);
    let t2 = Instant::now();
    let graph = IntersectionGraph::build(&net, 1.0).unwrap();
    eprintln!("graph: {} edges in {:.2?}", graph.edge_count(), t2.elapsed());
    let t3 = Instant::now();
    let center = (0..net.len())
        .min_by(|&a, &b| {
            let na: f64 = net.vertices[a].iter().map(|x| x * x).sum();
            let nb: f64 = net.vertices[b].iter().map(|x| x * x).sum();
            na.partial_cmp(&nb).unwrap()
        })
        .unwrap() as u32;
    let fit = graph_growth(&graph, &[center], 8, 0.5).unwrap();
    eprintln!("growth: {:?} in {:.2?}", fit.classification, t3.elapsed());
    eprintln!("total {:.2?}", t0.elapsed());
}
