use cosetpack::stallings::{
    commensurator_ball, double_coset_automaton, double_coset_length, fiber_product, height, intersection, width,
    CoreGraph,
};
use cosetpack::word::{self, free_ball, inverse_word, reduce, Letter, Word};
use proptest::prelude::*;

fn w(s: &str) -> Word {
    word::parse(s, &word::default_labels(2)).unwrap()
}

fn core(gens: &[&str]) -> CoreGraph {
    let gens: Vec<Word> = gens.iter().map(|s| w(s)).collect();
    CoreGraph::fold(2, &gens)
}

fn cat(parts: &[&[Letter]]) -> Word {
    reduce(&parts.concat())
}

fn words() -> impl Strategy<Value = Word> {
    proptest::collection::vec(0usize..4, 0..8).prop_map(|c| reduce(&c.into_iter().map(Letter::from_code).collect::<Word>()))
}

fn gens() -> impl Strategy<Value = Vec<Word>> {
    proptest::collection::vec(
        proptest::collection::vec(0usize..4, 1..5)
            .prop_map(|c| reduce(&c.into_iter().map(Letter::from_code).collect::<Word>())),
        1..3,
    )
}

/// Elements of `⟨w⟩` of the form `w^k` with `|k| ≤ n`.
fn powers(g: &[Letter], n: usize) -> Vec<Word> {
    let mut out = vec![Vec::new()];
    let mut p: Word = Vec::new();
    let mut q: Word = Vec::new();
    for _ in 0..n {
        p = cat(&[&p, g]);
        q = cat(&[&q, &inverse_word(g)]);
        out.push(p.clone());
        out.push(q.clone());
    }
    out
}

#[test]
fn fold_examples() {
    let c = core(&["a", "b*a*b^-1"]);
    assert_eq!(c.rank(), 2);
    assert!(c.member(&w("b*a^3*b^-1*a^-2")));
    assert!(!c.member(&w("b")));
    assert_eq!(core(&["a*b", "b^-1"]).index(), Some(1));
}

#[test]
fn proper_powers_have_height_and_width_k() {
    for k in 1..=4usize {
        let c = CoreGraph::fold(2, &[w(&format!("a^{k}"))]);
        assert_eq!(height(&c).height, Some(k));
        let r = width(&c, 6);
        assert!(r.completeness.exact);
        assert_eq!(r.width, Some(k));
    }
    let c = core(&["a*b^2"]);
    assert_eq!(height(&c).height, Some(1));
    assert_eq!(width(&c, 6).width, Some(1));
}

#[test]
fn commensurator_of_cyclic_subgroups() {
    let got = commensurator_ball(&core(&["a^2"]), 3);
    let expect: Vec<Word> = free_ball(2, 3)
        .into_iter()
        .filter(|g| g.iter().all(|l| l.gen() == 0))
        .collect();
    assert_eq!(got, expect);
    // A finite-index subgroup is commensurated by everything.
    assert_eq!(commensurator_ball(&core(&["a^2", "b", "a*b*a^-1"]), 2).len(), free_ball(2, 2).len());
}

#[test]
fn fiber_product_of_axes() {
    let r = fiber_product(&core(&["a"]), &core(&["a"]));
    let nontrivial: Vec<_> = r.nontrivial().collect();
    assert_eq!(nontrivial.len(), 1);
    assert!(nontrivial[0].representative.is_empty());
    let r = fiber_product(&core(&["a^2"]), &core(&["a^3"]));
    // H ∩ aKa^-1 is <a^6> for every shift.
    assert_eq!(r.nontrivial().count(), 1);
    assert!(r.nontrivial().all(|e| e.intersection.rank() == 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_of_generators_are_members(gs in gens(), picks in proptest::collection::vec((0usize..2, any::<bool>()), 0..5)) {
        let c = CoreGraph::fold(2, &gs);
        let mut x: Word = Vec::new();
        for (i, inv) in picks {
            let g = &gs[i % gs.len()];
            let g = if inv { inverse_word(g) } else { g.clone() };
            x = cat(&[&x, &g]);
        }
        prop_assert!(c.member(&x));
        for b in c.basis() {
            prop_assert!(c.member(&b));
        }
        prop_assert_eq!(CoreGraph::fold(2, &c.basis()).num_vertices(), c.num_vertices());
    }

    #[test]
    fn intersection_membership_is_conjunction(g1 in gens(), g2 in gens(), x in words()) {
        let (c1, c2) = (CoreGraph::fold(2, &g1), CoreGraph::fold(2, &g2));
        let i = intersection(&c1, &c2);
        prop_assert_eq!(i.member(&x), c1.member(&x) && c2.member(&x));
    }

    #[test]
    fn conjugation_moves_membership(gs in gens(), g in words(), x in words()) {
        let c = CoreGraph::fold(2, &gs);
        let conj = c.conjugated(&g);
        prop_assert_eq!(conj.member(&x), c.member(&cat(&[&g, &x, &inverse_word(&g)])));
    }

    #[test]
    fn double_coset_lengths_match_brute_force(h in words(), k in words(), g in words()) {
        prop_assume!(!h.is_empty() && !k.is_empty());
        let (ch, ck) = (CoreGraph::fold(2, std::slice::from_ref(&h)), CoreGraph::fold(2, std::slice::from_ref(&k)));
        let auto = double_coset_automaton(&ch, &g, &ck);
        prop_assert_eq!(auto.length, double_coset_length(&ch, &g, &ck));
        prop_assert_eq!(auto.element.len(), auto.length);
        // Exponents beyond this bound only lengthen the product.
        let n = g.len() + h.len() + k.len() + 2;
        let mut best = usize::MAX;
        for x in powers(&h, n) {
            for y in powers(&k, n) {
                best = best.min(cat(&[&x, &g, &y]).len());
            }
        }
        prop_assert_eq!(auto.length, best);
    }
}
