//! Sequential vs parallel kernel comparison, plus the end-to-end pipeline.
//!
//! The parallel benches exist only with the default `rayon` feature;
//! `cargo bench --no-default-features` measures the sequential fallback
//! alone.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use sizefit_core::collar::{erode_collar_seq, CollarRect};
use sizefit_core::fixture::{default_palette, make_fixture, FixtureDescriptor, FixturePreset};
use sizefit_core::geometry::SizeSpec;
use sizefit_core::overlap::closest_pair_seq;
use sizefit_core::pipeline::{run_job, RunOptions};
use sizefit_core::resize::scale_region_seq;
use sizefit_core::segmap::{Pixel, Region, SegMap};

#[cfg(feature = "rayon")]
use sizefit_core::{
    collar::erode_collar_par, overlap::closest_pair_par, resize::scale_region_par,
};

/// Filled ellipse with the given half-axes.
fn ellipse(cx: i32, cy: i32, rx: i32, ry: i32) -> Region {
    let mut pixels = Vec::new();
    for y in cy - ry..=cy + ry {
        for x in cx - rx..=cx + rx {
            let fx = (x - cx) as f64 / rx as f64;
            let fy = (y - cy) as f64 / ry as f64;
            if fx * fx + fy * fy <= 1.0 {
                pixels.push(Pixel::new(x, y));
            }
        }
    }
    Region::from_pixels(4, pixels).unwrap()
}

fn bench_scale_region(c: &mut Criterion) {
    let region = ellipse(160, 200, 90, 130);
    let anchor = region.centroid();
    let mut group = c.benchmark_group("scale_region");
    group.bench_function("seq", |b| {
        b.iter(|| scale_region_seq(black_box(&region), 1.6, 1.6, anchor).unwrap())
    });
    #[cfg(feature = "rayon")]
    group.bench_function("par", |b| {
        b.iter(|| scale_region_par(black_box(&region), 1.6, 1.6, anchor).unwrap())
    });
    group.finish();
}

fn bench_closest_pair(c: &mut Criterion) {
    let a = ellipse(100, 150, 80, 120);
    let b_region = ellipse(320, 170, 90, 110);
    let mut group = c.benchmark_group("closest_pair");
    group.bench_function("seq", |bench| {
        bench.iter(|| closest_pair_seq(black_box(&a), black_box(&b_region)).unwrap())
    });
    #[cfg(feature = "rayon")]
    group.bench_function("par", |bench| {
        bench.iter(|| closest_pair_par(black_box(&a), black_box(&b_region)).unwrap())
    });
    group.finish();
}

fn erosion_input() -> (SegMap, CollarRect) {
    let mut map = SegMap::filled(512, 512, 0, default_palette()).unwrap();
    let torso = ellipse(256, 280, 170, 200);
    map.write_region(torso.pixels(), 4).unwrap();
    let rect = CollarRect {
        center: (256.0, 120.0),
        s_x: 260.0,
        s_y: 220.0,
    };
    (map, rect)
}

fn bench_erode_collar(c: &mut Criterion) {
    let (map, rect) = erosion_input();
    let mut group = c.benchmark_group("erode_collar");
    group.bench_function("seq", |b| {
        b.iter_batched(
            || map.clone(),
            |mut m| erode_collar_seq(&mut m, &rect, 3).unwrap(),
            BatchSize::LargeInput,
        )
    });
    #[cfg(feature = "rayon")]
    group.bench_function("par", |b| {
        b.iter_batched(
            || map.clone(),
            |mut m| erode_collar_par(&mut m, &rect, 3).unwrap(),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let fixture = make_fixture(&FixtureDescriptor::preset(FixturePreset::CrossingArm), 7).unwrap();
    let spec = SizeSpec::new(66.0, 47.0, 66.0 * 1.4, 51.0).unwrap();
    let options = RunOptions::default();
    c.bench_function("pipeline/run_job", |b| {
        b.iter(|| {
            run_job(
                black_box(&fixture.map),
                black_box(&fixture.pose),
                &spec,
                &options,
            )
            .unwrap()
        })
    });
}

fn config() -> Criterion {
    Criterion::default()
        .sample_size(10)
        .warm_up_time(Duration::from_millis(300))
        .measurement_time(Duration::from_millis(900))
}

criterion_group! {
    name = benches;
    config = config();
    targets = bench_scale_region, bench_closest_pair, bench_erode_collar, bench_pipeline
}
criterion_main!(benches);
