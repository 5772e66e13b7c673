//! Shortest elements of double cosets `H g K` in a free group.
//!
//! Two independent routes: an automaton for `L_H · g · L_K` saturated under
//! free cancellation (returns a witness word), and a direct search on the
//! Schreier graph of `K` that returns only the length and is cheap enough to
//! run on millions of coset pairs.

use std::collections::VecDeque;

use super::CoreGraph;
use crate::word::{self, Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCosetShortest {
    pub element: Word,
    pub length: usize,
}

/// Shortest reduced word in `H g K`, by shortest-path search in the
/// cancellation-saturated automaton of `L_H · g · L_K`.
pub fn double_coset_automaton(h: &CoreGraph, g: &[Letter], k: &CoreGraph) -> DoubleCosetShortest {
    let rank = h.rank_of_ambient();
    let g = word::reduce(g);
    let nh = h.num_vertices();
    let nk = k.num_vertices();
    // States: H vertices, then interior chain states, then K vertices.
    let chain = g.len().saturating_sub(1);
    let n = nh + chain + nk;
    let chain_state = |i: usize| -> usize {
        // i-th state along g, 0 = H base, len = K base.
        if i == 0 {
            0
        } else if i == g.len() {
            nh + chain
        } else {
            nh + i - 1
        }
    };
    let nl = 2 * rank;
    let mut delta: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); nl]; n];
    for v in 0..nh {
        for l in word::alphabet(rank) {
            if let Some(t) = h.step(v, l) {
                delta[v][l.code()].push(t);
            }
        }
    }
    for v in 0..nk {
        for l in word::alphabet(rank) {
            if let Some(t) = k.step(v, l) {
                delta[nh + chain + v][l.code()].push(nh + chain + t);
            }
        }
    }
    let mut eps = vec![vec![false; n]; n];
    for (i, &l) in g.iter().enumerate() {
        delta[chain_state(i)][l.code()].push(chain_state(i + 1));
    }
    if g.is_empty() {
        eps[0][nh + chain] = true;
    }
    for (i, row) in eps.iter_mut().enumerate() {
        row[i] = true;
    }
    // Saturate: p -x-> r ~> s -x^-1-> q (with ε-closures) gives p -ε-> q.
    loop {
        close(&mut eps);
        let mut changed = false;
        for p in 0..n {
            for x in 0..nl {
                let mut after_x = vec![false; n];
                for &r in &delta[p][x] {
                    for s in 0..n {
                        if eps[r][s] {
                            after_x[s] = true;
                        }
                    }
                }
                for s in 0..n {
                    if !after_x[s] {
                        continue;
                    }
                    for &q in &delta[s][x ^ 1] {
                        if !eps[p][q] {
                            eps[p][q] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // 0-1 BFS from H base to K base.
    let target = nh + chain;
    let mut dist = vec![usize::MAX; n];
    let mut back: Vec<Option<(usize, Option<Letter>)>> = vec![None; n];
    dist[0] = 0;
    let mut dq = VecDeque::from([0usize]);
    while let Some(p) = dq.pop_front() {
        for q in 0..n {
            if eps[p][q] && dist[p] < dist[q] {
                dist[q] = dist[p];
                back[q] = Some((p, None));
                dq.push_front(q);
            }
        }
        for x in 0..nl {
            for &q in &delta[p][x] {
                if dist[p] + 1 < dist[q] {
                    dist[q] = dist[p] + 1;
                    back[q] = Some((p, Some(Letter::from_code(x))));
                    dq.push_back(q);
                }
            }
        }
    }
    let mut w = Vec::new();
    let mut cur = target;
    while cur != 0 {
        let (p, l) = back[cur].expect("target reachable");
        if let Some(l) = l {
            w.push(l);
        }
        cur = p;
    }
    w.reverse();
    let element = word::reduce(&w);
    DoubleCosetShortest {
        length: element.len(),
        element,
    }
}

fn close(eps: &mut [Vec<bool>]) {
    let n = eps.len();
    for m in 0..n {
        for i in 0..n {
            if eps[i][m] {
                for j in 0..n {
                    if eps[m][j] {
                        eps[i][j] = true;
                    }
                }
            }
        }
    }
}

/// Precomputed data for [`double_coset_length`]-style queries with fixed
/// `H` and `K`.
#[derive(Clone, Debug)]
pub struct DoubleCosetOracle<'a> {
    h: &'a CoreGraph,
    k: &'a CoreGraph,
    /// Undirected distance to the basepoint in each graph.
    dist_h: Vec<u32>,
    dist_k: Vec<u32>,
}

impl<'a> DoubleCosetOracle<'a> {
    pub fn new(h: &'a CoreGraph, k: &'a CoreGraph) -> Self {
        DoubleCosetOracle {
            h,
            k,
            dist_h: h.distances_from(0),
            dist_k: k.distances_from(0),
        }
    }

    /// Length of the shortest element of `H g K`.
    ///
    /// `min_{h} |h g K|` is the distance in the Schreier graph of `K` from the
    /// basepoint to the vertex reached by `g^-1 h`. A reduced `h` traces a
    /// path in the core of `H`; in the Schreier graph of `K` that path first
    /// climbs out of the hanging tree containing `g^-1`, may wander in the
    /// core of `K`, then descends into a tree, after which every letter adds
    /// one to the depth.
    pub fn length(&self, g: &[Letter]) -> usize {
        let gi: Word = word::inverse_word(&word::reduce(g));
        self.length_inv(&gi)
    }

    /// As [`Self::length`], taking the reduced word of `g^-1`.
    pub fn length_inv(&self, gi: &[Letter]) -> usize {
        let (h, k) = (self.h, self.k);
        let nl = 2 * h.rank_of_ambient();
        let (c0, read) = k.read_prefix(0, gi);
        let t0 = &gi[read..];
        let nh = h.num_vertices();
        let mut best = usize::MAX;
        let dk0 = self.dist_k[c0] as usize;
        // Ascent: position (c0, t0[..i]), H-state u.
        let mut u = 0usize;
        let mut i = t0.len();
        loop {
            let depth = dk0 + i;
            if u == 0 {
                best = best.min(depth);
            }
            let up = if i > 0 { Some(t0[i - 1].inverse()) } else { None };
            for x in 0..nl {
                let l = Letter::from_code(x);
                if Some(l) == up {
                    continue;
                }
                if i == 0 && k.step(c0, l).is_some() {
                    continue;
                }
                if let Some(t) = h.step(u, l) {
                    best = best.min(depth + 1 + self.dist_h[t] as usize);
                }
            }
            match up {
                Some(l) => match h.step(u, l) {
                    Some(t) => {
                        u = t;
                        i -= 1;
                    }
                    None => return best,
                },
                None => break,
            }
        }
        // Core phase: reachable pairs (c, u) from (c0, u).
        let nk = k.num_vertices();
        let mut seen = vec![false; nk * nh];
        let mut stack = vec![(c0, u)];
        seen[c0 * nh + u] = true;
        while let Some((c, u)) = stack.pop() {
            let depth = self.dist_k[c] as usize;
            if u == 0 {
                best = best.min(depth);
            }
            for x in 0..nl {
                let l = Letter::from_code(x);
                let Some(t) = h.step(u, l) else { continue };
                match k.step(c, l) {
                    Some(c2) => {
                        if !seen[c2 * nh + t] {
                            seen[c2 * nh + t] = true;
                            stack.push((c2, t));
                        }
                    }
                    None => best = best.min(depth + 1 + self.dist_h[t] as usize),
                }
            }
        }
        best
    }
}

/// Length of the shortest element of `H g K` (fast route).
pub fn double_coset_length(h: &CoreGraph, g: &[Letter], k: &CoreGraph) -> usize {
    DoubleCosetOracle::new(h, k).length(g)
}
