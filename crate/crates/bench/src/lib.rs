//! Shared fixtures for the criterion benches under `benches/`.

use bruen_core::graphs;
use bruen_core::symmetry::{self, vertex_orbits};
use bruen_core::{make_field, Elem, FieldCtx, FieldOptions, Graph, SearchConfig};

pub fn field(q: u64) -> FieldCtx {
    make_field(q, &FieldOptions::default()).expect("bundled field")
}

/// A fixed spread of nonzero elements, for arithmetic loops.
pub fn sample_elements(ctx: &FieldCtx, count: usize) -> Vec<Elem> {
    let m = ctx.order() as u64;
    (0..count as u64)
        .map(|i| Elem::from_log(((i * 2_654_435_761) % m) as u32))
        .collect()
}

/// Γ_X together with an orbit-starter search configuration.
pub fn gamma_with_starters(q: u64) -> (Graph, SearchConfig) {
    let ctx = field(q);
    let graph = graphs::build_gamma(&ctx);
    let gens = symmetry::stabilizer_generators(&ctx, &graph, None);
    let cfg = SearchConfig {
        starters: Some(vertex_orbits(graph.n(), &gens).starter_set()),
        threads: 1,
        ..SearchConfig::default()
    };
    (graph, cfg)
}
