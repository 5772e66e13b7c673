//! Height, width and commensurators of subgroups of free groups.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{conjugate_intersection, intersection, CoreGraph};
use crate::clique;
use crate::word::{self, Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completeness {
    pub exact: bool,
    pub search_bound: usize,
    /// Confinement bound `2·ecc + 2` the sweep is measured against.
    pub bound: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightWidthReport {
    pub height: Option<usize>,
    /// Coset representatives `g_i` of the height witness.
    pub height_witness: Vec<Word>,
    pub width: Option<usize>,
    pub width_witness: Vec<Word>,
    pub completeness: Completeness,
}

impl HeightWidthReport {
    fn empty() -> Self {
        HeightWidthReport {
            height: None,
            height_witness: Vec::new(),
            width: None,
            width_witness: Vec::new(),
            completeness: Completeness {
                exact: true,
                search_bound: 0,
                bound: 0,
                note: None,
            },
        }
    }
}

/// Component of a tuple in the n-fold product of `core` with itself.
/// Returns the tuples of the component and its Betti number.
fn tuple_component(core: &CoreGraph, start: &[usize]) -> (Vec<Vec<usize>>, usize) {
    let rank = core.rank_of_ambient();
    let mut seen: HashMap<Vec<usize>, ()> = HashMap::from([(start.to_vec(), ())]);
    let mut order = vec![start.to_vec()];
    let mut q = VecDeque::from([start.to_vec()]);
    let mut edges = 0;
    while let Some(t) = q.pop_front() {
        for l in word::alphabet(rank) {
            let next: Option<Vec<usize>> = t.iter().map(|&v| core.step(v, l)).collect();
            if let Some(next) = next {
                if !l.is_inverse() {
                    edges += 1;
                }
                if !seen.contains_key(&next) {
                    seen.insert(next.clone(), ());
                    order.push(next.clone());
                    q.push_back(next);
                }
            }
        }
    }
    let betti = edges + 1 - order.len();
    (order, betti)
}

/// Exact height: the largest `n` such that some `n` distinct cosets `g_iH`
/// have `∩ g_i H g_i^-1` nontrivial.
///
/// Nontrivial common intersections are carried by components of the n-fold
/// product of the core graph with itself whose tuples have distinct
/// coordinates and whose Betti number is positive; tuples `(v_i)` give
/// cosets `w_{v_i}^-1 H` with `w_v` the tree word of `v`. Such a component
/// projects onto one of the same kind in the (n-1)-fold product, so the
/// search grows surviving components one coordinate at a time.
pub fn height(core: &CoreGraph) -> HeightWidthReport {
    let mut report = HeightWidthReport::empty();
    if core.is_trivial() {
        report.height = Some(0);
        return report;
    }
    let n = core.num_vertices();
    let tree = core.tree_words();
    // Surviving components at the current level, keyed by the least sorted
    // coordinate set they contain (coordinate order is irrelevant).
    let mut level: Vec<Vec<Vec<usize>>> = Vec::new();
    {
        let mut done = vec![false; n];
        for v in 0..n {
            if done[v] {
                continue;
            }
            let (tuples, betti) = tuple_component(core, &[v]);
            for t in &tuples {
                done[t[0]] = true;
            }
            if betti >= 1 {
                level.push(tuples);
            }
        }
    }
    let mut best: Vec<usize> = vec![0];
    let mut h = 1;
    loop {
        let mut next_level: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut keys: BTreeSet<Vec<usize>> = BTreeSet::new();
        for comp in &level {
            let mut done: BTreeSet<Vec<usize>> = BTreeSet::new();
            for t in comp {
                for v in 0..n {
                    if t.contains(&v) {
                        continue;
                    }
                    let mut start = t.clone();
                    start.push(v);
                    if done.contains(&start) {
                        continue;
                    }
                    let (tuples, betti) = tuple_component(core, &start);
                    for x in &tuples {
                        done.insert(x.clone());
                    }
                    if betti == 0 {
                        continue;
                    }
                    let key = tuples
                        .iter()
                        .map(|x| {
                            let mut s = x.clone();
                            s.sort_unstable();
                            s
                        })
                        .min()
                        .unwrap();
                    if keys.insert(key) {
                        next_level.push(tuples);
                    }
                }
            }
        }
        if next_level.is_empty() {
            break;
        }
        h += 1;
        best = next_level
            .iter()
            .map(|c| c.iter().min().unwrap().clone())
            .min()
            .unwrap();
        level = next_level;
    }
    report.height = Some(h);
    report.height_witness = best.iter().map(|&v| word::inverse_word(&tree[v])).collect();
    report
}

/// Core graph of `∩ g_i H g_i^-1`.
pub fn common_conjugate_intersection(core: &CoreGraph, gs: &[Word]) -> CoreGraph {
    let mut acc: Option<CoreGraph> = None;
    for g in gs {
        let c = core.conjugated(&word::inverse_word(g));
        acc = Some(match acc {
            None => c,
            Some(a) => intersection(&a, &c),
        });
    }
    acc.unwrap_or_else(|| core.clone())
}

/// Canonical key of the coset `gH`: the Schreier-graph vertex `H g^-1`,
/// given as the core vertex reached by `g^-1` and the leftover tree path.
fn coset_vertex(core: &CoreGraph, g: &[Letter]) -> (usize, Word) {
    let gi = word::inverse_word(g);
    let (c, read) = core.read_prefix(0, &gi);
    (c, gi[read..].to_vec())
}

/// Decides whether `H ∩ zHz^-1` is nontrivial, given the Betti numbers of
/// the components of `Γ_H × Γ_H`.
fn conjugate_nontrivial(core: &CoreGraph, comp_rank: &[Vec<usize>], z: &[Letter]) -> bool {
    // A nontrivial reduced x ∈ H ∩ zHz^-1 is a loop at (base, Hz^-1) in the
    // product of Schreier graphs; from a tree vertex it must first climb
    // back to the core along t^-1.
    let (c, t) = coset_vertex(core, &word::reduce(z));
    match core.read_from(0, &word::inverse_word(&t)) {
        Some(u) => comp_rank[u][c] >= 1,
        None => false,
    }
}

fn product_ranks(core: &CoreGraph) -> Vec<Vec<usize>> {
    let n = core.num_vertices();
    let mut out = vec![vec![usize::MAX; n]; n];
    for u in 0..n {
        for v in 0..n {
            if out[u][v] != usize::MAX {
                continue;
            }
            let (tuples, betti) = tuple_component_pair(core, u, v);
            for (a, b) in tuples {
                out[a][b] = betti;
            }
        }
    }
    out
}

fn tuple_component_pair(core: &CoreGraph, u: usize, v: usize) -> (Vec<(usize, usize)>, usize) {
    let (tuples, betti) = tuple_component(core, &[u, v]);
    (tuples.into_iter().map(|t| (t[0], t[1])).collect(), betti)
}

/// Width: the largest family of distinct cosets `g_iH` with every
/// `g_iHg_i^-1 ∩ g_jHg_j^-1` nontrivial, searched over the cosets meeting
/// the ball of radius `search_bound`.
///
/// Conjugates with nontrivial intersection have crossing axes, so the lifts
/// of their core graphs pairwise meet in the Cayley tree and (Helly) share a
/// point; translating it to the identity puts every coset of the family
/// within `ecc` of it. The sweep is therefore complete once `search_bound`
/// reaches the confinement bound `2·ecc + 2`.
pub fn width(core: &CoreGraph, search_bound: usize) -> HeightWidthReport {
    let mut report = HeightWidthReport::empty();
    let ecc = core.base_eccentricity() as usize;
    let bound = 2 * ecc + 2;
    report.completeness = Completeness {
        exact: search_bound >= bound,
        search_bound,
        bound,
        note: (search_bound < bound).then(|| {
            format!("search bound {search_bound} is below the confinement bound {bound}; width is a lower bound")
        }),
    };
    if core.is_trivial() {
        report.width = Some(0);
        report.completeness.exact = true;
        report.completeness.note = None;
        return report;
    }
    let rank = core.rank_of_ambient();
    let mut reps: Vec<Word> = Vec::new();
    let mut seen = HashMap::new();
    for g in word::free_ball(rank, search_bound) {
        let key = coset_vertex(core, &g);
        if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
            e.insert(reps.len());
            reps.push(g);
        }
    }
    let ranks = product_ranks(core);
    let mut graph = clique::Graph::new(reps.len());
    for i in 0..reps.len() {
        let gi = word::inverse_word(&reps[i]);
        for j in i + 1..reps.len() {
            let mut z = gi.clone();
            z.extend_from_slice(&reps[j]);
            if conjugate_nontrivial(core, &ranks, &z) {
                graph.add_edge(i, j);
            }
        }
    }
    let best = clique::max_clique(&graph);
    let witness: Vec<Word> = best.iter().map(|&i| reps[i].clone()).collect();
    for i in 0..witness.len() {
        for j in i + 1..witness.len() {
            let mut z = word::inverse_word(&witness[i]);
            z.extend_from_slice(&witness[j]);
            assert!(
                !conjugate_intersection(core, &word::reduce(&z)).is_trivial(),
                "width witness pair failed independent verification"
            );
        }
    }
    report.width = Some(witness.len());
    report.width_witness = witness;
    report
}

/// Whether `K` has finite index in `L`, for `K ≤ L`.
pub fn finite_index_in(k: &CoreGraph, l: &CoreGraph) -> bool {
    if l.is_trivial() {
        return true;
    }
    if k.is_trivial() {
        return false;
    }
    // Move L's basepoint onto its cyclic part; then K has finite index iff
    // the immersion of its graph into L's is a covering.
    let hair = l.hair().expect("nontrivial subgroup has a cyclic part");
    let l2 = l.conjugated(&hair);
    let k2 = k.conjugated(&hair);
    let rank = l.rank_of_ambient();
    let mut image = vec![usize::MAX; k2.num_vertices()];
    image[0] = 0;
    let mut q = VecDeque::from([0usize]);
    while let Some(v) = q.pop_front() {
        let iv = image[v];
        for x in word::alphabet(rank) {
            match (k2.step(v, x), l2.step(iv, x)) {
                (Some(t), Some(it)) => {
                    if image[t] == usize::MAX {
                        image[t] = it;
                        q.push_back(t);
                    } else if image[t] != it {
                        return false;
                    }
                }
                (None, None) => {}
                _ => return false,
            }
        }
    }
    true
}

/// Elements `g` with `|g| ≤ r` such that `H ∩ gHg^-1` has finite index in
/// both `H` and `gHg^-1`, in shortlex order.
pub fn commensurator_ball(core: &CoreGraph, r: usize) -> Vec<Word> {
    let rank = core.rank_of_ambient();
    word::free_ball(rank, r)
        .into_iter()
        .filter(|g| {
            let conj = core.conjugated(&word::inverse_word(g));
            let inter = intersection(core, &conj);
            finite_index_in(&inter, core) && finite_index_in(&inter, &conj)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::tests::{core, w};
    use super::*;

    #[test]
    fn height_examples() {
        assert_eq!(height(&core(&["a"])).height, Some(1));
        assert_eq!(height(&core(&["a", "b"])).height, Some(1));
        assert_eq!(height(&core(&[])).height, Some(0));
        let r = height(&core(&["a^2", "a*b"]));
        assert_eq!(r.height, Some(2));
        let inter = common_conjugate_intersection(&core(&["a^2", "a*b"]), &r.height_witness);
        assert!(!inter.is_trivial());
    }

    #[test]
    fn width_examples() {
        let r = width(&core(&["a"]), 4);
        assert_eq!(r.width, Some(1));
        assert!(r.completeness.exact);
        assert_eq!(width(&core(&[]), 0).width, Some(0));
        let low = width(&core(&["a"]), 1);
        assert!(!low.completeness.exact);
        assert!(low.completeness.note.is_some());
    }

    #[test]
    fn finite_index_cases() {
        let f = core(&["a", "b"]);
        let h = core(&["a^2", "b", "a*b*a^-1"]);
        assert!(finite_index_in(&h, &f));
        assert!(!finite_index_in(&core(&["a"]), &f));
        assert!(finite_index_in(&core(&["a^2"]), &core(&["a"])));
        assert!(!finite_index_in(&core(&[]), &core(&["a"])));
        // Basepoint on a hair.
        assert!(finite_index_in(&core(&["b*a^3*b^-1"]), &core(&["b*a*b^-1"])));
    }

    #[test]
    fn commensurator_of_a_squared() {
        let got = commensurator_ball(&core(&["a^2"]), 1);
        assert_eq!(got, vec![w(""), w("a"), w("a^-1")]);
    }
}
