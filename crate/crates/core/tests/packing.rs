use std::collections::HashSet;
use std::sync::Arc;

use cosetpack::cayley::{Ball, DEFAULT_BUDGET};
use cosetpack::group::{Descriptor, Element, Group};
use cosetpack::packing::{
    enumerate_cosets, normal_close_count, packing_profile, Mode, ProfileOptions, SubgroupHandle,
};
use cosetpack::word::{free_ball, Word};
use cosetpack::Error;
use proptest::prelude::*;

fn free(rank: usize) -> Arc<Group> {
    Group::new(&Descriptor::Free { rank, labels: None }).unwrap()
}

fn z2() -> Arc<Group> {
    Group::new(&Descriptor::FreeAbelian {
        rank: 2,
        generators: None,
        labels: None,
    })
    .unwrap()
}

fn cyclic(n: usize) -> Arc<Group> {
    let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
    Group::new(&Descriptor::Finite {
        table,
        generators: Some(vec![1]),
        labels: None,
    })
    .unwrap()
}

fn handle(g: &Arc<Group>, gens: &[&str]) -> SubgroupHandle {
    let ws: Vec<Word> = gens.iter().map(|s| g.parse(s).unwrap()).collect();
    SubgroupHandle::new(g, &ws).unwrap()
}

fn opts() -> ProfileOptions {
    ProfileOptions::default()
}

/// Brute-force coset distance in a free group: minimum of |h1^-1 x^-1 y h2|
/// over h1, h2 in H with both factors ranging over a finite word list.
fn brute_free_coset_dist(g: &Arc<Group>, hs: &[Element], x: &Element, y: &Element) -> usize {
    let z = g.mul(&g.inv(x), y);
    let mut best = usize::MAX;
    for h1 in hs {
        for h2 in hs {
            let e = g.mul(&g.mul(h1, &z), h2);
            best = best.min(g.render(&e).len());
        }
    }
    best
}

#[test]
fn enumerate_examples() {
    let g = z2();
    let reps: Vec<String> = enumerate_cosets(&handle(&g, &["a"]), 3, DEFAULT_BUDGET)
        .unwrap()
        .iter()
        .map(|c| g.format_word(&c.rep))
        .collect();
    assert_eq!(reps.len(), 7);
    let expect: HashSet<String> = ["", "b", "b^-1", "b^2", "b^-2", "b^3", "b^-3"]
        .iter()
        .map(|s| g.format(&g.parse_element(s).unwrap()))
        .collect();
    let got: HashSet<String> = reps.into_iter().collect();
    assert_eq!(got, expect);

    let f = free(2);
    let reps: Vec<String> = enumerate_cosets(&handle(&f, &["a"]), 1, DEFAULT_BUDGET)
        .unwrap()
        .iter()
        .map(|c| f.format_word(&c.rep))
        .collect();
    assert_eq!(reps, vec!["", "b", "b^-1"]);

    let c3 = cyclic(3);
    let all = handle(&c3, &["a"]);
    assert_eq!(enumerate_cosets(&all, 3, DEFAULT_BUDGET).unwrap().len(), 1);
}

#[test]
fn coset_distance_examples() {
    let g = z2();
    let h = handle(&g, &["a"]);
    let m = h.metric(10).unwrap();
    let one = g.identity().clone();
    assert_eq!(m.distance(&one, &one).value, 0);
    for k in -5i64..=5 {
        let x = Element::Abelian(vec![3, k]);
        let c = m.distance(&one, &x);
        assert!(c.exact);
        assert_eq!(c.value, k.unsigned_abs());
    }

    let f = free(2);
    let h = handle(&f, &["a"]);
    let m = h.metric(6).unwrap();
    let b = f.parse_element("b").unwrap();
    let bi = f.parse_element("b^-1").unwrap();
    let c = m.distance(&b, &bi);
    assert_eq!((c.value, c.exact), (2, true));
    let hs: Vec<Element> = (-6..=6).map(|k| f.parse_element(&format!("a^{k}")).unwrap()).collect();
    assert_eq!(brute_free_coset_dist(&f, &hs, &b, &bi), 2);
    for j in -2i64..=2 {
        for k in -2i64..=2 {
            let x = f.parse_element(&format!("a^{j}*b")).unwrap();
            let y = f.parse_element(&format!("a^{k}*b")).unwrap();
            let d = m.distance(&x, &y).value as i64;
            let expect = if j == k { 0 } else { (j - k).abs() + 2 };
            assert_eq!(d, expect);
        }
    }
}

#[test]
fn z2_profile_is_linear() {
    let g = z2();
    let p = packing_profile(&handle(&g, &["a"]), 6, 20, &opts()).unwrap();
    for row in &p.rows {
        assert_eq!(row.n_lower, row.d);
        assert!(row.saturated);
        assert!(row.distances.iter().all(|c| c.cert.exact && (c.cert.value as usize) < row.d));
    }
}

#[test]
fn tree_profile_small() {
    let f = free(2);
    let p = packing_profile(&handle(&f, &["a"]), 3, 4, &opts()).unwrap();
    let n: Vec<usize> = p.rows.iter().map(|r| r.n_lower).collect();
    assert_eq!(n[0], 1);
    assert_eq!(n[1], 2);
    assert!(p.rows[1].saturated);
    // Both modes must agree.
    let mut o = opts();
    o.mode = Mode::Anchored;
    let q = packing_profile(&handle(&f, &["a"]), 3, 4, &o).unwrap();
    let m: Vec<usize> = q.rows.iter().map(|r| r.n_lower).collect();
    assert_eq!(n, m);
}

#[test]
fn tree_profile_matches_brute_force() {
    // Independent route: coset distances by brute force over H-elements,
    // closeness cliques found by exhaustive subset search.
    let f = free(2);
    let h = handle(&f, &["a"]);
    let r = 3;
    let cosets = enumerate_cosets(&h, r, DEFAULT_BUDGET).unwrap();
    let hs: Vec<Element> = (-8..=8).map(|k| f.parse_element(&format!("a^{k}")).unwrap()).collect();
    let n = cosets.len();
    let mut dist = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            dist[i][j] = brute_free_coset_dist(&f, &hs, &cosets[i].element, &cosets[j].element);
        }
    }
    let p = packing_profile(&h, 3, r, &opts()).unwrap();
    for row in &p.rows {
        // Greedy lower bound and simple upper bound via all triples.
        let close = |i: usize, j: usize| dist[i][j] < row.d;
        let mut best = 1;
        for i in 0..n {
            for j in i + 1..n {
                if close(i, j) {
                    best = best.max(2);
                    for k in j + 1..n {
                        if close(i, k) && close(j, k) {
                            best = best.max(3);
                        }
                    }
                }
            }
        }
        assert_eq!(row.n_lower.min(3), best, "D = {}", row.d);
    }
}

#[test]
fn finite_index_profiles() {
    // Index 2 and index 3 subgroups of Z: N(D) ≤ index, equality for large D.
    let z = Group::new(&Descriptor::FreeAbelian {
        rank: 1,
        generators: None,
        labels: None,
    })
    .unwrap();
    for k in [2usize, 3] {
        let h = handle(&z, &[&format!("a^{k}")]);
        let p = packing_profile(&h, 5, 8, &opts()).unwrap();
        for row in &p.rows {
            assert!(row.n_lower <= k);
        }
        assert_eq!(p.rows.last().unwrap().n_lower, k);
    }
    let f = free(2);
    let h = handle(&f, &["a^2", "b", "a*b*a^-1"]);
    let p = packing_profile(&h, 3, 4, &opts()).unwrap();
    assert!(p.rows.iter().all(|r| r.n_lower <= 2));
    assert_eq!(p.rows[2].n_lower, 2);

    // Finite backend: for D beyond the diameter every coset is close.
    let c6 = cyclic(6);
    let h = handle(&c6, &["a^3"]);
    let p = packing_profile(&h, 5, 5, &opts()).unwrap();
    assert_eq!(p.rows.last().unwrap().n_lower, 3);
}

#[test]
fn normal_counts() {
    let g = z2();
    let n = normal_close_count(&handle(&g, &["a"]), 3, 6, 1, DEFAULT_BUDGET).unwrap();
    assert_eq!(n.count, 5);
    assert!(n.saturated);
    let whole = normal_close_count(&handle(&g, &["a", "b"]), 4, 4, 1, DEFAULT_BUDGET).unwrap();
    assert_eq!(whole.count, 1);

    let fz = Group::new(&Descriptor::DirectProduct {
        left: Box::new(Descriptor::Free { rank: 2, labels: None }),
        right: Box::new(Descriptor::FreeAbelian {
            rank: 1,
            generators: None,
            labels: Some(vec!["c".into()]),
        }),
    })
    .unwrap();
    let n = normal_close_count(&handle(&fz, &["c"]), 2, 4, 1, DEFAULT_BUDGET).unwrap();
    assert_eq!(n.count, 5);

    let f = free(2);
    let err = normal_close_count(&handle(&f, &["a"]), 2, 3, 1, DEFAULT_BUDGET).unwrap_err();
    assert!(matches!(err, Error::Refused(_)));
}

#[test]
fn enumerative_oracle_needs_radius() {
    let f = free(2);
    let gens = vec![f.parse("a").unwrap()];
    let h = SubgroupHandle::enumerative(&f, &gens, 3, DEFAULT_BUDGET).unwrap();
    assert!(!h.is_exact());
    assert!(matches!(enumerate_cosets(&h, 2, DEFAULT_BUDGET), Err(Error::Refused(_))));
    assert!(enumerate_cosets(&h, 1, DEFAULT_BUDGET).is_ok());
}

#[test]
fn stallings_distances_match_ball_search() {
    // Coset distances via the double-coset automaton against the minimum of
    // word lengths over explicit coset elements in a ball.
    let f = free(2);
    let h = handle(&f, &["a^2", "b*a*b^-1"]);
    let m = h.metric(8).unwrap();
    let ball = Ball::new(&f, 7, DEFAULT_BUDGET).unwrap();
    let members: Vec<&Element> = ball.elements().iter().filter(|e| h.member(e)).collect();
    for zw in free_ball(2, 3) {
        let z = f.eval(&zw);
        let mut best = u64::MAX;
        for h1 in &members {
            for h2 in &members {
                let e = f.mul(&f.mul(h1, &z), h2);
                best = best.min(f.render(&e).len() as u64);
            }
        }
        let c = m.double_coset(&z);
        assert!(c.exact);
        assert_eq!(c.value, best, "z = {}", f.format_word(&zw));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn profiles_are_monotone_and_translation_invariant(
        gens in proptest::collection::vec("[ab]{1,3}", 1..3),
        shift in "[abAB]{0,3}",
    ) {
        let f = free(2);
        let ws: Vec<Word> = gens.iter().map(|s| {
            let parts: Vec<String> = s.chars().map(|c| c.to_string()).collect();
            f.parse(&parts.join("*")).unwrap()
        }).collect();
        let h = SubgroupHandle::new(&f, &ws).unwrap();
        let p = packing_profile(&h, 3, 3, &opts()).unwrap();
        for w in p.rows.windows(2) {
            prop_assert!(w[0].n_lower <= w[1].n_lower);
        }
        for row in &p.rows {
            for a in 0..row.family.len() {
                for b in a + 1..row.family.len() {
                    prop_assert!(!h.same_coset(&row.family[a].element, &row.family[b].element));
                }
            }
            prop_assert!(row.distances.iter().all(|c| c.cert.exact && (c.cert.value as usize) < row.d));
        }
        let parts: Vec<String> = shift.chars().map(|c| match c {
            'A' => "a^-1".to_string(),
            'B' => "b^-1".to_string(),
            c => c.to_string(),
        }).collect();
        let g = f.parse_element(&parts.join("*")).unwrap();
        let mut o = opts();
        o.mode = Mode::Anchored;
        let base = packing_profile(&h, 3, 3, &o).unwrap();
        o.center = Some(g);
        let moved = packing_profile(&h, 3, 3, &o).unwrap();
        let a: Vec<usize> = base.rows.iter().map(|r| r.n_lower).collect();
        let b: Vec<usize> = moved.rows.iter().map(|r| r.n_lower).collect();
        prop_assert_eq!(a, b);
        let q = packing_profile(&h, 3, 4, &opts()).unwrap();
        for (x, y) in p.rows.iter().zip(&q.rows) {
            prop_assert!(x.n_lower <= y.n_lower);
        }
    }
}
