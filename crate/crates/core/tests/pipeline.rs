mod common;

use bruen_core::chains::{self, chain_size, Chain};
use bruen_core::clique::{self, SearchConfig};
use bruen_core::graphs::{self, ConeRule, GraphKind};
use bruen_core::io;
use bruen_core::symmetry::{self, vertex_orbits};
use common::field;

#[test]
fn clique_number_reaches_bound_for_small_q() {
    for q in [5, 7, 9, 11, 13] {
        let ctx = field(q);
        let g = graphs::build_gamma(&ctx);
        let gens = symmetry::stabilizer_generators(&ctx, &g, None);
        let cfg = SearchConfig {
            starters: Some(vertex_orbits(g.n(), &gens).starter_set()),
            ..SearchConfig::default()
        };
        let r = clique::max_clique(g.adjacency(), &cfg);
        assert_eq!(r.omega, Some(g.clique_bound()), "q={q}");
        assert!(g.adjacency().is_clique(&r.witness));
        let chain = chains::clique_to_chain(&ctx, &g, &r.witness).unwrap();
        assert_eq!(chain.len(), chain_size(q));
        let report = chains::verify_chain(&ctx, &chain).unwrap();
        assert!(
            report.passed() && report.extended_passed(),
            "q={q}\n{report}"
        );
    }
}

#[test]
fn chain_classes_q5_q7() {
    for (q, classes) in [(5, 1), (7, 2)] {
        let ctx = field(q);
        let g = graphs::build_gamma(&ctx);
        let gens = symmetry::stabilizer_generators(&ctx, &g, None);
        let c = chains::find_chain_classes(&ctx, &g, &gens, 1);
        assert_eq!(c.class_count(), classes, "q={q}");
        assert_eq!(c.class_sizes.iter().sum::<usize>(), c.total_cliques);
    }
}

#[test]
fn corpus_chains_map_to_cliques() {
    for (name, file) in chains::corpus().into_iter().filter(|(_, f)| f.q <= 13) {
        let ctx = field(file.q);
        let chain = file.to_chain(&ctx).unwrap();
        let report = chains::verify_chain(&ctx, &chain).unwrap();
        assert!(report.passed() && report.extended_passed(), "{name}");
        let g = graphs::build_gamma(&ctx);
        let clique = chains::chain_to_clique(&chain, &g).unwrap();
        assert!(g.adjacency().is_clique(&clique), "{name}");
        let back = chains::clique_to_chain(&ctx, &g, &clique).unwrap();
        assert_eq!(back.points(), chain.points(), "{name}");
    }
}

#[test]
fn perturbed_chain_fails() {
    let (_, file) = chains::corpus()
        .into_iter()
        .find(|(n, _)| *n == "q07a")
        .unwrap();
    let ctx = field(7);
    let mut exps = file.exponents.clone();
    exps[2] += 1;
    let chain = Chain::from_exponents(&ctx, &exps).unwrap();
    let report = chains::verify_chain(&ctx, &chain).unwrap();
    assert!(!report.passed());
}

#[test]
fn degree_pattern_and_coclique() {
    for q in [5, 7, 9, 11] {
        let ctx = field(q);
        let gamma = graphs::build_gamma(&ctx);
        let delta = graphs::build_delta(&ctx);
        let degrees = gamma.degree_set();
        assert_eq!(degrees.len(), if q % 4 == 1 { 1 } else { 2 }, "q={q}");
        let y = graphs::tangent_cone_points(&ctx)
            .into_iter()
            .find(|p| p.kind(&ctx) == bruen_core::PointKind::EvenExternal)
            .unwrap();
        let cc = graphs::coclique_from_cone(&ctx, &delta, y).unwrap();
        assert_eq!(cc.len() as u64, q * (q - 1) / 2, "q={q}");
        assert!(delta.adjacency().is_independent(&cc), "q={q}");
    }
}

#[test]
fn four_sign_and_fast_graphs_agree() {
    for q in [5, 7, 9, 11, 13] {
        let ctx = field(q);
        for kind in [GraphKind::Gamma, GraphKind::Delta] {
            let a = graphs::build_graph(&ctx, kind, ConeRule::Fast);
            let b = graphs::build_graph(&ctx, kind, ConeRule::FourSign);
            assert_eq!(
                a.adjacency().edges().collect::<Vec<_>>(),
                b.adjacency().edges().collect::<Vec<_>>()
            );
        }
    }
}

#[test]
fn dimacs_file_round_trip() {
    let ctx = field(9);
    let g = graphs::build_gamma(&ctx);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.dimacs");
    io::write_dimacs(g.adjacency(), &io::graph_comments(&g), &path).unwrap();
    let back = io::read_dimacs(&path).unwrap();
    assert_eq!(
        back.edges().collect::<Vec<_>>(),
        g.adjacency().edges().collect::<Vec<_>>()
    );
    let r = clique::max_clique(&back, &SearchConfig::default());
    assert_eq!(r.omega, Some(5));
}
