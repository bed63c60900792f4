use criterion::{criterion_group, criterion_main, Criterion};
use skewdyn::cocycle::{directional_exponent_trace, lyapunov_spectrum};
use skewdyn::irregular::birkhoff_trace;
use skewdyn::presets::different_types_b;
use skewdyn::{Point, Symbol, WordStream};
use skewdyn_bench::preset_system;
use std::hint::black_box;

fn orbits(c: &mut Criterion) {
    let ms = preset_system("morse-smale-rotation");
    let omega = WordStream::random(2, 1);
    c.bench_function("skew_orbit 10^5", |b| {
        b.iter(|| ms.skew_orbit(black_box(&omega), &Point::circle(0.1), 100_000).unwrap())
    });
    let psi = |_: Symbol, p: &Point| (std::f64::consts::TAU * p.coords()[0]).cos();
    c.bench_function("birkhoff_trace 10^5", |b| {
        b.iter(|| birkhoff_trace(&ms, black_box(&omega), &Point::circle(0.1), &psi, 100_000).unwrap())
    });
    let cb = different_types_b();
    c.bench_function("lyapunov_spectrum 3x3 n=5000", |b| {
        b.iter(|| lyapunov_spectrum(&cb, black_box(&omega), 5000).unwrap())
    });
    c.bench_function("directional_exponent_trace 3x3 n=5000", |b| {
        b.iter(|| directional_exponent_trace(&cb, black_box(&omega), &[1.0, 1.0, 1.0], 5000).unwrap())
    });
}

criterion_group!(benches, orbits);
criterion_main!(benches);
