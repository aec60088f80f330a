use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use conmod::packs::chem::{balance_search, elem_balance_matrix, parse_formula, ElementTable};
use conmod::packs::phys;
use conmod::registry;
use conmod::render::{animate_with, sample_plot_with};
use conmod::Exec;

fn plot_sampling(c: &mut Criterion) {
    let model = phys::ball_model().unwrap();
    let (fns, range) = registry::graph_functions(&model, "b").unwrap();
    let spec = registry::plot_spec(&model, "b", &fns, range, 200).unwrap();
    let mut group = c.benchmark_group("plot_sampling");
    group.sample_size(10);
    for &exec in Exec::all() {
        group.bench_with_input(BenchmarkId::from_parameter(exec.name()), &exec, |b, &exec| {
            b.iter(|| sample_plot_with(&spec, exec).unwrap())
        });
    }
    group.finish();
}

fn animation(c: &mut Criterion) {
    let model = phys::ball_model().unwrap();
    let spec = registry::animation_spec(&model, "b", None, 60).unwrap();
    let mut group = c.benchmark_group("animation_60_frames");
    group.sample_size(10);
    for &exec in Exec::all() {
        group.bench_with_input(BenchmarkId::from_parameter(exec.name()), &exec, |b, &exec| {
            b.iter(|| animate_with(&model, &spec, exec).unwrap())
        });
    }
    group.finish();
}

fn balance(c: &mut Criterion) {
    let table = ElementTable::builtin();
    let f = |s: &str| parse_formula(s, &table).unwrap();
    // photosynthesis forced through the search route
    let problem = elem_balance_matrix(&[f("CO2"), f("H2O")], &[f("C6H12O6"), f("O2")]);
    let mut group = c.benchmark_group("balance_search");
    group.sample_size(10);
    for &exec in Exec::all() {
        group.bench_with_input(BenchmarkId::from_parameter(exec.name()), &exec, |b, &exec| {
            b.iter(|| balance_search(&problem, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, plot_sampling, animation, balance);
criterion_main!(benches);
