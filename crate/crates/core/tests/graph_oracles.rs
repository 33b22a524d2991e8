mod common;

use std::collections::BTreeSet;

use common::*;
use ggl::graph::{
    ball_growth_bound, enumerate_paths, fiber_ball_representations, graph_fiber_ball, phi_growth, sample_boundary_paths,
    simple_cycles_at, DirectedGraph,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Closed walks at `v` of length at most `max_len` that meet `v` only at
/// their ends.
fn brute_simple_cycles(g: &DirectedGraph, v: usize, max_len: usize) -> BTreeSet<Vec<usize>> {
    fn walk(g: &DirectedGraph, v: usize, at: usize, left: usize, stack: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        for e in 0..g.n_edges() {
            if g.edge(e).src != at {
                continue;
            }
            stack.push(e);
            if g.edge(e).rng == v {
                out.insert(stack.clone());
            } else if left > 1 {
                walk(g, v, g.edge(e).rng, left - 1, stack, out);
            }
            stack.pop();
        }
    }
    let mut out = BTreeSet::new();
    walk(g, v, v, max_len, &mut Vec::new(), &mut out);
    out
}

fn small_graphs(seed: u64, count: usize) -> Vec<DirectedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        DirectedGraph::toeplitz(),
        DirectedGraph::single_loop(),
        DirectedGraph::double_loop(),
        DirectedGraph::cycle(4).unwrap(),
        DirectedGraph::chain(4).unwrap(),
    ];
    out.extend((0..count).map(|i| random_graph(&mut rng, 4, 5, i % 3 == 0)));
    out
}

#[test]
fn phi_matches_path_enumeration() {
    for g in small_graphs(1, 40) {
        for v in 0..g.n_vertices() {
            for n in 0..=7 {
                let brute = brute_paths(&g, v, n);
                assert_eq!(phi_growth(&g, v, n).unwrap(), brute.len() as u64);
                let lib: BTreeSet<Vec<usize>> = enumerate_paths(&g, v, n).unwrap().into_iter().map(|p| p.edges).collect();
                assert_eq!(lib, brute.into_iter().collect::<BTreeSet<_>>());
            }
        }
    }
}

#[test]
fn simple_cycle_census_matches_walks() {
    for g in small_graphs(2, 60) {
        let cap = g.n_vertices() * g.n_edges();
        for v in 0..g.n_vertices() {
            let brute = brute_simple_cycles(&g, v, cap.max(1));
            let lib: BTreeSet<Vec<usize>> = simple_cycles_at(&g, v, 1000).unwrap().into_iter().map(|p| p.edges).collect();
            assert_eq!(lib, brute, "vertex {v} of\n{}", g.to_text());
        }
    }
}

#[test]
fn representations_and_growth_sandwich() {
    for g in small_graphs(3, 20) {
        for x in sample_boundary_paths(&g) {
            for n in 0..=6 {
                let ball = graph_fiber_ball(&g, &x, n).unwrap();
                let reps = fiber_ball_representations(&g, &x, n).unwrap();
                let (lo, hi) = ball_growth_bound(&g, &x, n).unwrap();
                assert_eq!(reps.len() as u64, hi);
                assert!(lo as usize <= ball.len() && ball.len() <= reps.len());
                assert_eq!(ball.profile(), brute_ball_profile(&g, &x, n));
            }
        }
    }
}
