use cosetpack::clique::Bits;
use cosetpack::cube::{
    dual, grid, hypercube, path, random_tree, random_wallspace, verify_median, walls_of, Corpus, Graph, MedianGraph,
    DUAL_LIMIT, EXHAUSTIVE_LIMIT,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent median oracle: brute-force search for the vertex minimising
/// total distance, which in a median graph is the median.
fn brute_median(g: &MedianGraph, u: usize, v: usize, w: usize) -> usize {
    (0..g.len())
        .min_by_key(|&x| (g.dist(u, x) + g.dist(v, x) + g.dist(w, x), x))
        .unwrap()
}

/// Convex hull as the intersection of all halfspaces containing the set.
fn halfspace_hull(g: &MedianGraph, s: &Bits) -> Bits {
    let mut out = Bits::from_indices(g.len(), 0..g.len());
    for h in g.hyperplanes().unwrap() {
        for side in &h.sides {
            if s.is_subset(side) {
                out.and_assign(side);
            }
        }
    }
    out
}

fn check_graph(name: &str, g: &MedianGraph, rng: &mut ChaCha8Rng) {
    let n = g.len();
    let hs = g.hyperplanes().unwrap();
    assert_eq!(g.square_classes(), g.djokovic_classes(), "{name}");
    for h in &hs {
        assert!(g.is_convex(&h.carrier), "{name}");
        assert!(g.is_convex(&h.sides[0]) && g.is_convex(&h.sides[1]), "{name}");
    }
    let delta = g.delta_graph();
    if n <= 64 {
        assert_eq!(delta.graph().edges(), g.delta_graph_by_cubes().edges(), "{name}");
    }
    for u in 0..n {
        for v in 0..n {
            assert!(delta.dist(u, v) <= g.dist(u, v));
        }
    }
    for _ in 0..5 {
        let pts: Vec<usize> = (0..3).map(|_| rng.gen_range(0..n)).collect();
        let s = g.set(&pts);
        let hull = g.hull(&s);
        assert_eq!(hull, halfspace_hull(g, &s), "{name}");
        for k in 1..=3 {
            assert!(g.is_convex(&delta.neighborhood(&hull, k)), "{name}");
        }
        assert_eq!(g.median(pts[0], pts[1], pts[2]), brute_median(g, pts[0], pts[1], pts[2]));
    }
    let ws = walls_of(g).unwrap();
    let d = dual(&ws, DUAL_LIMIT).unwrap();
    assert!(d.principal_map_is_isomorphism(&ws, g.graph()), "{name}");
}

#[test]
fn small_corpus() {
    let corpus = Corpus::standard(11, 30, EXHAUSTIVE_LIMIT).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for e in &corpus.entries {
        let g = MedianGraph::new(e.graph.clone()).unwrap();
        assert!(g.verdict().exhaustive);
        check_graph(&e.name, &g, &mut rng);
    }
}

#[test]
fn interval_neighborhood_exhaustive_small() {
    for g in [hypercube(3), grid(3, 3), path(5)] {
        let m = MedianGraph::new(g).unwrap();
        let d = m.delta_graph();
        let n = m.len();
        for r in 0..n {
            for s in 0..n {
                for t in 0..n {
                    for u in 0..n {
                        let out = m.check_interval_neighborhood(&d, r, s, t, u);
                        assert!(!out.precondition || out.holds);
                    }
                }
            }
        }
    }
}

#[test]
fn non_median_graphs() {
    // K_{2,3} is bipartite but not median.
    let k23 = Graph::new(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
    let v = verify_median(&k23).unwrap();
    assert!(!v.median);
    assert!(MedianGraph::new(k23).is_err());
}

#[test]
fn json_round_trip() {
    let g = grid(2, 3);
    let j = serde_json::to_string(&g.to_json()).unwrap();
    let back = Graph::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
    assert_eq!(back, g);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn trees_are_median_with_edge_hyperplanes(n in 1usize..30, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = MedianGraph::new(random_tree(n, &mut rng)).unwrap();
        let hs = t.hyperplanes().unwrap();
        prop_assert_eq!(hs.len(), n - 1);
        prop_assert!(t.dimension().unwrap() <= 1);
        prop_assert_eq!(t.delta_graph().graph().edges(), t.graph().edges());
    }

    #[test]
    fn duals_are_median_and_round_trip(points in 2usize..8, walls in 1usize..8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ws = random_wallspace(points, walls, &mut rng);
        let d = dual(&ws, DUAL_LIMIT).unwrap();
        let g = &d.median;
        // Every wall shows up as exactly one hyperplane.
        prop_assert_eq!(g.hyperplanes().unwrap().len(), ws.walls.len());
        let back = walls_of(g).unwrap();
        let again = dual(&back, DUAL_LIMIT).unwrap();
        prop_assert!(again.principal_map_is_isomorphism(&back, g.graph()));
        prop_assert!(petgraph::algo::is_isomorphic(&again.median.graph().to_petgraph(), &g.graph().to_petgraph()));
    }

    #[test]
    fn helly_on_random_hulls(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = MedianGraph::new(grid(4, 5)).unwrap();
        let k = rng.gen_range(3..=5);
        let pts: Vec<usize> = (0..k).map(|_| rng.gen_range(0..g.len())).collect();
        let sets: Vec<Bits> = (0..k).map(|i| {
            let mut s: Vec<usize> = pts.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &p)| p).collect();
            s.push(rng.gen_range(0..g.len()));
            g.hull(&g.set(&s))
        }).collect();
        let out = g.helly(&sets).unwrap();
        let v = out.vertex.unwrap();
        prop_assert!(sets.iter().all(|s| s.get(v)));
    }
}
