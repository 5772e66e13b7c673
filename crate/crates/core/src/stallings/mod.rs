//! Stallings core graphs for finitely generated subgroups of free groups.

mod dcs;
mod hw;
mod product;

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::word::{self, Letter, Word};

pub use dcs::{double_coset_automaton, double_coset_length, DoubleCosetOracle, DoubleCosetShortest};
pub use hw::{common_conjugate_intersection, commensurator_ball, finite_index_in, height, width, Completeness, HeightWidthReport};
pub use product::{conjugate_intersection, fiber_product, intersection, DoubleCosetEntry, DoubleCosetReport};

/// A folded graph with basepoint 0. `next[v][l]` is the endpoint of the edge
/// read by letter `l` from `v`; inverse letters traverse edges backwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreGraph {
    rank: usize,
    next: Vec<Vec<Option<u32>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreGraphJson {
    pub vertices: usize,
    pub basepoint: usize,
    pub edges: Vec<EdgeJson>,
}

struct Folder {
    parent: Vec<u32>,
    adj: Vec<HashMap<u16, u32>>,
    pending: Vec<(u32, u16, u32)>,
}

impl Folder {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn new_vertex(&mut self) -> u32 {
        let v = self.parent.len() as u32;
        self.parent.push(v);
        self.adj.push(HashMap::new());
        v
    }

    fn add_edge(&mut self, u: u32, l: u16, v: u32) {
        self.pending.push((u, l, v));
        while let Some((u, l, v)) = self.pending.pop() {
            let (u, v) = (self.find(u), self.find(v));
            match self.adj[u as usize].get(&l).copied() {
                Some(w) => {
                    let w = self.find(w);
                    if w != v {
                        // Fold: identify w and v. Keep the smaller id so the
                        // basepoint 0 always survives.
                        let (keep, gone) = if w < v { (w, v) } else { (v, w) };
                        self.parent[gone as usize] = keep;
                        let moved: Vec<(u16, u32)> = self.adj[gone as usize].drain().collect();
                        for (l2, t) in moved {
                            self.pending.push((keep, l2, t));
                        }
                    }
                }
                None => {
                    self.adj[u as usize].insert(l, v);
                    self.pending.push((v, l ^ 1, u));
                }
            }
        }
    }
}

impl CoreGraph {
    /// Folds the wedge of the generator loops and prunes to the core (the
    /// basepoint is kept even if it has degree one).
    pub fn fold(rank: usize, gens: &[Word]) -> CoreGraph {
        let mut f = Folder {
            parent: Vec::new(),
            adj: Vec::new(),
            pending: Vec::new(),
        };
        let base = f.new_vertex();
        for g in gens {
            let g = word::reduce(g);
            if g.is_empty() {
                continue;
            }
            let mut cur = base;
            for (i, &l) in g.iter().enumerate() {
                let nxt = if i + 1 == g.len() { base } else { f.new_vertex() };
                f.add_edge(cur, l.code() as u16, nxt);
                cur = nxt;
            }
        }
        let mut raw: Vec<Vec<Option<u32>>> = vec![vec![None; 2 * rank]; f.parent.len()];
        for v in 0..f.parent.len() as u32 {
            if f.find(v) != v {
                continue;
            }
            let entries: Vec<(u16, u32)> = f.adj[v as usize].iter().map(|(&l, &t)| (l, t)).collect();
            for (l, t) in entries {
                raw[v as usize][l as usize] = Some(f.find(t));
            }
        }
        let alive: Vec<bool> = (0..f.parent.len() as u32).map(|v| f.find(v) == v).collect();
        CoreGraph::from_raw(rank, raw, alive, true)
    }

    /// Builds a graph from a transition table over arbitrary vertex ids,
    /// keeping live vertices reachable from vertex 0, optionally pruning
    /// degree-one vertices other than 0, and renumbering in BFS order.
    pub(crate) fn from_raw(rank: usize, mut raw: Vec<Vec<Option<u32>>>, mut alive: Vec<bool>, prune: bool) -> CoreGraph {
        if prune {
            let deg = |raw: &Vec<Vec<Option<u32>>>, v: usize| raw[v].iter().filter(|x| x.is_some()).count();
            let mut stack: Vec<usize> = (1..raw.len()).filter(|&v| alive[v] && deg(&raw, v) <= 1).collect();
            while let Some(v) = stack.pop() {
                if !alive[v] || deg(&raw, v) > 1 || v == 0 {
                    continue;
                }
                alive[v] = false;
                for l in 0..2 * rank {
                    if let Some(t) = raw[v][l].take() {
                        let t = t as usize;
                        raw[t][l ^ 1] = None;
                        if t != 0 && alive[t] && deg(&raw, t) <= 1 {
                            stack.push(t);
                        }
                    }
                }
            }
        }
        // BFS renumbering from 0.
        let mut id = vec![u32::MAX; raw.len()];
        let mut order = vec![0usize];
        id[0] = 0;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for l in 0..2 * rank {
                if let Some(t) = raw[v][l] {
                    let t = t as usize;
                    if alive[t] && id[t] == u32::MAX {
                        id[t] = order.len() as u32;
                        order.push(t);
                    }
                }
            }
        }
        let next = order
            .iter()
            .map(|&v| {
                (0..2 * rank)
                    .map(|l| raw[v][l].map(|t| id[t as usize]))
                    .collect()
            })
            .collect();
        CoreGraph { rank, next }
    }

    pub fn rank_of_ambient(&self) -> usize {
        self.rank
    }

    pub fn num_vertices(&self) -> usize {
        self.next.len()
    }

    pub fn num_edges(&self) -> usize {
        self.next
            .iter()
            .map(|row| (0..self.rank).filter(|&g| row[2 * g].is_some()).count())
            .sum()
    }

    /// Rank of the subgroup (first Betti number of the graph).
    pub fn rank(&self) -> usize {
        self.num_edges() + 1 - self.num_vertices()
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    pub fn step(&self, v: usize, l: Letter) -> Option<usize> {
        self.next[v][l.code()].map(|t| t as usize)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.next[v].iter().filter(|x| x.is_some()).count()
    }

    pub fn read_from(&self, v: usize, w: &[Letter]) -> Option<usize> {
        let mut cur = v;
        for &l in w {
            cur = self.step(cur, l)?;
        }
        Some(cur)
    }

    /// Reads as much of `w` as possible from `v`; returns the vertex reached
    /// and the number of letters consumed.
    pub fn read_prefix(&self, v: usize, w: &[Letter]) -> (usize, usize) {
        let mut cur = v;
        for (i, &l) in w.iter().enumerate() {
            match self.step(cur, l) {
                Some(t) => cur = t,
                None => return (cur, i),
            }
        }
        (cur, w.len())
    }

    pub fn member(&self, w: &[Letter]) -> bool {
        self.read_from(0, &word::reduce(w)) == Some(0)
    }

    /// Every vertex carries every letter: the subgroup has finite index.
    pub fn is_covering(&self) -> bool {
        self.next.iter().all(|row| row.iter().all(|x| x.is_some()))
    }

    /// Index in the ambient free group when finite.
    pub fn index(&self) -> Option<usize> {
        self.is_covering().then_some(self.num_vertices())
    }

    /// Undirected BFS distances from `src`.
    pub fn distances_from(&self, src: usize) -> Vec<u32> {
        let mut d = vec![u32::MAX; self.num_vertices()];
        d[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(v) = q.pop_front() {
            for l in 0..2 * self.rank {
                if let Some(t) = self.next[v][l] {
                    if d[t as usize] == u32::MAX {
                        d[t as usize] = d[v] + 1;
                        q.push_back(t as usize);
                    }
                }
            }
        }
        d
    }

    /// Largest distance from the basepoint to a vertex.
    pub fn base_eccentricity(&self) -> u32 {
        self.distances_from(0).into_iter().max().unwrap_or(0)
    }

    /// Shortlex-least geodesic word from the basepoint to each vertex.
    pub fn tree_words(&self) -> Vec<Word> {
        let n = self.num_vertices();
        let mut words: Vec<Option<Word>> = vec![None; n];
        words[0] = Some(Vec::new());
        let mut q = VecDeque::from([0usize]);
        while let Some(v) = q.pop_front() {
            for l in word::alphabet(self.rank) {
                if let Some(t) = self.step(v, l) {
                    if words[t].is_none() {
                        let mut w = words[v].clone().unwrap();
                        w.push(l);
                        words[t] = Some(w);
                        q.push_back(t);
                    }
                }
            }
        }
        words.into_iter().map(|w| w.unwrap()).collect()
    }

    /// Free basis read off the BFS spanning tree: one generator per non-tree
    /// edge.
    pub fn basis(&self) -> Vec<Word> {
        let tree = self.tree_words();
        let mut tree_edge = vec![vec![false; 2 * self.rank]; self.num_vertices()];
        for (v, w) in tree.iter().enumerate() {
            if let Some(&l) = w.last() {
                let u = self.read_from(0, &w[..w.len() - 1]).unwrap();
                tree_edge[u][l.code()] = true;
                tree_edge[v][l.inverse().code()] = true;
            }
        }
        let mut out = Vec::new();
        for u in 0..self.num_vertices() {
            for g in 0..self.rank {
                let l = Letter::new(g, false);
                if let Some(v) = self.step(u, l) {
                    if !tree_edge[u][l.code()] {
                        let mut w = tree[u].clone();
                        w.push(l);
                        w.extend(word::inverse_word(&tree[v]));
                        out.push(word::reduce(&w));
                    }
                }
            }
        }
        out
    }

    /// Word of the path from the basepoint to the nearest vertex of the
    /// 2-core (the graph with every degree-one vertex, basepoint included,
    /// pruned away). Empty when the basepoint already lies on a cycle; `None`
    /// for the trivial subgroup.
    pub fn hair(&self) -> Option<Word> {
        let n = self.num_vertices();
        let mut deg: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut alive = vec![true; n];
        let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
        while let Some(v) = stack.pop() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for l in 0..2 * self.rank {
                if let Some(t) = self.next[v][l] {
                    let t = t as usize;
                    if alive[t] {
                        deg[t] -= 1;
                        if deg[t] <= 1 {
                            stack.push(t);
                        }
                    }
                }
            }
        }
        let tree = self.tree_words();
        (0..n).filter(|&v| alive[v]).map(|v| tree[v].clone()).min_by(|a, b| (a.len(), a).cmp(&(b.len(), b)))
    }

    pub fn to_json(&self, labels: &[String]) -> CoreGraphJson {
        let mut edges = Vec::new();
        for v in 0..self.num_vertices() {
            for g in 0..self.rank {
                if let Some(t) = self.next[v][2 * g] {
                    edges.push(EdgeJson {
                        from: v,
                        to: t as usize,
                        label: labels[g].clone(),
                    });
                }
            }
        }
        CoreGraphJson {
            vertices: self.num_vertices(),
            basepoint: 0,
            edges,
        }
    }

    /// Subgroup generated by the loops of `g`'s graph, conjugated: the graph
    /// of `w^-1 H w`.
    pub fn conjugated(&self, w: &[Letter]) -> CoreGraph {
        let wi = word::inverse_word(w);
        let gens: Vec<Word> = self
            .basis()
            .iter()
            .map(|b| {
                let mut x = wi.clone();
                x.extend_from_slice(b);
                x.extend_from_slice(w);
                word::reduce(&x)
            })
            .collect();
        CoreGraph::fold(self.rank, &gens)
    }
}
