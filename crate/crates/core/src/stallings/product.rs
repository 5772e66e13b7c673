use std::collections::{HashMap, VecDeque};

use super::{double_coset_length, CoreGraph};
use crate::word::{self, Word};

/// One component of the product of two core graphs.
#[derive(Clone, Debug)]
pub struct DoubleCosetEntry {
    /// Shortlex-least `w_u w_v^-1` over the pairs `(u, v)` of the component.
    pub representative: Word,
    /// Graph of `H ∩ gKg^-1` for `g` the representative.
    pub intersection: CoreGraph,
    /// Betti number of the component.
    pub rank: usize,
    pub shortest_length: usize,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct DoubleCosetReport {
    pub entries: Vec<DoubleCosetEntry>,
}

impl DoubleCosetReport {
    pub fn nontrivial(&self) -> impl Iterator<Item = &DoubleCosetEntry> {
        self.entries.iter().filter(|e| e.rank >= 1)
    }
}

fn product_component(c1: &CoreGraph, c2: &CoreGraph, start: (usize, usize)) -> (Vec<(usize, usize)>, usize) {
    let rank = c1.rank_of_ambient();
    let mut seen = HashMap::from([(start, 0usize)]);
    let mut order = vec![start];
    let mut q = VecDeque::from([start]);
    let mut edges = 0;
    while let Some((u, v)) = q.pop_front() {
        for l in word::alphabet(rank) {
            if let (Some(a), Some(b)) = (c1.step(u, l), c2.step(v, l)) {
                if !l.is_inverse() {
                    edges += 1;
                }
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry((a, b)) {
                    e.insert(order.len());
                    order.push((a, b));
                    q.push_back((a, b));
                }
            }
        }
    }
    let betti = edges + 1 - order.len();
    (order, betti)
}

/// Graph of `H ∩ K`: the basepoint component of the product, pruned.
pub fn intersection(c1: &CoreGraph, c2: &CoreGraph) -> CoreGraph {
    let rank = c1.rank_of_ambient();
    let (pairs, _) = product_component(c1, c2, (0, 0));
    let index: HashMap<(usize, usize), u32> = pairs.iter().enumerate().map(|(i, &p)| (p, i as u32)).collect();
    let raw: Vec<Vec<Option<u32>>> = pairs
        .iter()
        .map(|&(u, v)| {
            word::alphabet(rank)
                .into_iter()
                .map(|l| match (c1.step(u, l), c2.step(v, l)) {
                    (Some(a), Some(b)) => Some(index[&(a, b)]),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let alive = vec![true; raw.len()];
    CoreGraph::from_raw(rank, raw, alive, true)
}

/// Graph of `H ∩ gHg^-1`.
pub fn conjugate_intersection(core: &CoreGraph, g: &[crate::word::Letter]) -> CoreGraph {
    let conj = core.conjugated(&word::inverse_word(g));
    intersection(core, &conj)
}

/// Components of `Γ_H × Γ_K`, one entry each, sorted by representative.
pub fn fiber_product(c1: &CoreGraph, c2: &CoreGraph) -> DoubleCosetReport {
    let t1 = c1.tree_words();
    let t2 = c2.tree_words();
    let mut done = vec![vec![false; c2.num_vertices()]; c1.num_vertices()];
    let mut entries = Vec::new();
    for u in 0..c1.num_vertices() {
        for v in 0..c2.num_vertices() {
            if done[u][v] {
                continue;
            }
            let (pairs, betti) = product_component(c1, c2, (u, v));
            for &(a, b) in &pairs {
                done[a][b] = true;
            }
            let representative = pairs
                .iter()
                .map(|&(a, b)| {
                    let mut w = t1[a].clone();
                    w.extend(word::inverse_word(&t2[b]));
                    word::reduce(&w)
                })
                .min_by(|x, y| (x.len(), x).cmp(&(y.len(), y)))
                .unwrap();
            let conj = c2.conjugated(&word::inverse_word(&representative));
            let inter = intersection(c1, &conj);
            let shortest_length = double_coset_length(c1, &representative, c2);
            entries.push(DoubleCosetEntry {
                representative,
                intersection: inter,
                rank: betti,
                shortest_length,
                pairs,
            });
        }
    }
    entries.sort_by(|a, b| (a.representative.len(), &a.representative).cmp(&(b.representative.len(), &b.representative)));
    DoubleCosetReport { entries }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{core, w};
    use super::*;

    #[test]
    fn cyclic_with_itself() {
        let h = core(&["a"]);
        let rep = fiber_product(&h, &h);
        assert_eq!(rep.entries.len(), 1);
        assert_eq!(rep.entries[0].rank, 1);
        assert!(rep.entries[0].representative.is_empty());
        assert_eq!(rep.entries[0].intersection, h);
    }

    #[test]
    fn whole_group_with_itself() {
        let f = core(&["a", "b"]);
        let rep = fiber_product(&f, &f);
        assert_eq!(rep.entries.len(), 1);
        assert_eq!(rep.entries[0].rank, 2);
    }

    #[test]
    fn conjugate_intersections() {
        let h = core(&["a"]);
        assert_eq!(conjugate_intersection(&h, &w("a")), h);
        assert!(conjugate_intersection(&h, &w("b")).is_trivial());
        let k = core(&["a^2", "b"]);
        let i = conjugate_intersection(&k, &w("a"));
        assert!(i.member(&w("a^2")));
        assert!(!i.member(&w("b")));
    }
}
