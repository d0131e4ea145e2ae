use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use s3s3::{
    classify, construct_example, integrate_case1a, integrate_case1b, residual,
    AnalysisConfig, ExampleParams, FrameStateS3, PathSegment, TorusGrid, TorusInit,
};

fn ambient_curvature(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pt = s3s3::ambient::random_point(&mut rng);
    let x = s3s3::ambient::random_tangent(&mut rng, &pt);
    let y = s3s3::ambient::random_tangent(&mut rng, &pt);
    let z = s3s3::ambient::random_tangent(&mut rng, &pt);
    c.bench_function("ambient_curvature", |b| {
        b.iter(|| s3s3::ambient::curvature_r(black_box(&x), black_box(&y), black_box(&z)))
    });
}

fn point_analysis(c: &mut Criterion) {
    let ex = construct_example("4.6", &ExampleParams::default()).unwrap();
    let cfg = AnalysisConfig::default();
    c.bench_function("point_analysis", |b| {
        b.iter(|| s3s3::PointAnalysis::at(black_box(&ex), black_box([0.1, 0.2, 0.15]), &cfg))
    });
}

fn residual_gauss(c: &mut Criterion) {
    let ex = construct_example("4.8", &ExampleParams::default()).unwrap();
    let cfg = AnalysisConfig::default();
    let samples = [[0.1, 0.2, 0.3], [-0.2, 0.4, 0.1], [0.3, -0.1, 0.2], [0.0, 0.1, -0.3]];
    c.bench_function("residual_gauss", |b| {
        b.iter(|| residual(black_box("gauss"), &ex, black_box(&samples), &cfg))
    });
}

fn classify_torus(c: &mut Criterion) {
    let ex = construct_example("4.8", &ExampleParams::default()).unwrap();
    let cfg = AnalysisConfig::default();
    let grid = [[0.1, 0.2, 0.3]];
    c.bench_function("classify_torus", |b| {
        b.iter(|| classify(black_box(&ex), black_box(&grid), &cfg))
    });
}

fn frame_flow(c: &mut Criterion) {
    let init = FrameStateS3::standard();
    let path = [PathSegment { direction: 0, length: 0.1 }];
    c.bench_function("frame_flow_100_steps", |b| {
        b.iter(|| integrate_case1a(black_box(&path), 1e-3, &init))
    });
}

fn torus_march(c: &mut Criterion) {
    let grid = TorusGrid::cube(0.5, 1e-2, 5).unwrap();
    let init = TorusInit::default();
    c.bench_function("torus_march_50_steps", |b| {
        b.iter(|| integrate_case1b(black_box(&grid), &init))
    });
}

criterion_group!(
    benches,
    ambient_curvature,
    point_analysis,
    residual_gauss,
    classify_torus,
    frame_flow,
    torus_march
);
criterion_main!(benches);
