use criterion::{criterion_group, criterion_main, Criterion};
use skewdyn::entropy::{separated_count, SingleMap};
use skewdyn::hitting::certify_frequent_hitting;
use skewdyn::spaces::Ball;
use skewdyn::{FiniteWord, Point, Symbol};
use skewdyn_bench::{circle_grid, preset_system, space_of, torus_grid};
use std::hint::black_box;

fn search(c: &mut Criterion) {
    let golden = preset_system("golden-rotation");
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("certify golden eps=0.05", |b| {
        b.iter(|| certify_frequent_hitting(&golden, black_box(0.05), 1000, 0.05 / 8.0, 0).unwrap())
    });
    let cat = preset_system("cat-map");
    let word = FiniteWord::from_values(&[1, 1, 1]).unwrap();
    let ball = Ball::new(Point::torus(&[0.3, 0.6]), 0.05);
    g.bench_function("image_inner_radius cat^3", |b| {
        b.iter(|| cat.image_inner_radius(&word, black_box(&ball), 0.0005).unwrap())
    });
    let one = Symbol::new(1).unwrap();
    let pts = torus_grid(200);
    assert_eq!(space_of(&pts), *cat.space());
    g.bench_function("separated_count cat 40k n=6", |b| {
        b.iter(|| separated_count(&SingleMap { system: &cat, symbol: one }, black_box(&pts), 6, 0.125))
    });
    let circle = circle_grid(20_000);
    g.bench_function("separated_count rotation 20k n=20", |b| {
        b.iter(|| separated_count(&SingleMap { system: &golden, symbol: one }, black_box(&circle), 20, 0.05))
    });
    g.finish();
}

criterion_group!(benches, search);
criterion_main!(benches);
