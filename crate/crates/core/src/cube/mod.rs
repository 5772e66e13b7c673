//! Finite median graphs (1-skeleta of CAT(0) cube complexes): medians,
//! intervals, convexity, hyperplanes, the Δ-graph and Sageev duals.

mod corpus;
mod delta;
mod dual;
mod hyperplanes;

pub use corpus::{
    grid, helly_family, helly_trials, hypercube, path, random_tree, random_wallspace, Corpus, CorpusEntry, HellyTrials,
};
pub use delta::{DeltaGraph, IntervalNeighborhood, PackingCheck};
pub use dual::{dual, principal_orientation, walls_of, Dual, Wallspace, DUAL_LIMIT};
pub use hyperplanes::{Hyperplane, HyperplaneJson};

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clique::Bits;
use crate::error::{Error, Result};

/// Exhaustive triple verification up to this many vertices; sampled beyond.
pub const EXHAUSTIVE_LIMIT: usize = 400;
const SAMPLED_TRIPLES: usize = 200_000;

/// A finite simple graph as sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

/// `{"vertices": n, "edges": [[u, v], ...]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Malformed(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::Malformed(format!("loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Ok(Graph { adj })
    }

    pub fn from_json(j: &GraphJson) -> Result<Graph> {
        let edges: Vec<(usize, usize)> = j.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::new(j.vertices, &edges)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.len(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, a) in self.adj.iter().enumerate() {
            for &v in a {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// BFS distances from `s`; `u32::MAX` for unreachable vertices.
    pub fn bfs(&self, s: usize) -> Vec<u32> {
        let mut d = vec![u32::MAX; self.len()];
        d[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if d[v] == u32::MAX {
                    d[v] = d[u] + 1;
                    q.push_back(v);
                }
            }
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        self.is_empty() || self.bfs(0).iter().all(|&d| d != u32::MAX)
    }

    pub fn to_petgraph(&self) -> petgraph::graph::UnGraph<(), ()> {
        let mut g = petgraph::graph::UnGraph::with_capacity(self.len(), 0);
        for _ in 0..self.len() {
            g.add_node(());
        }
        for (u, v) in self.edges() {
            g.add_edge((u as u32).into(), (v as u32).into(), ());
        }
        g
    }
}

/// Outcome of the median test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedianVerdict {
    pub median: bool,
    /// False when triples were sampled rather than enumerated.
    pub exhaustive: bool,
    pub triples_checked: u64,
    /// A triple whose pairwise intervals do not meet in exactly one vertex.
    pub counterexample: Option<[usize; 3]>,
    /// The triple intersection at the counterexample.
    pub meet: Option<Vec<usize>>,
}

/// A connected graph certified median, with all-pairs distances.
#[derive(Clone, Debug)]
pub struct MedianGraph {
    graph: Graph,
    dist: Vec<Vec<u32>>,
    verdict: MedianVerdict,
    /// Row-major interval table, kept for graphs verified exhaustively.
    intervals: Option<Vec<Bits>>,
}

fn all_distances(g: &Graph) -> Result<Vec<Vec<u32>>> {
    if g.is_empty() {
        return Err(Error::Malformed("graph has no vertices".into()));
    }
    let dist: Vec<Vec<u32>> = (0..g.len()).map(|s| g.bfs(s)).collect();
    if dist[0].contains(&u32::MAX) {
        return Err(Error::Malformed("graph is disconnected".into()));
    }
    Ok(dist)
}

fn interval_from(dist: &[Vec<u32>], u: usize, v: usize) -> Bits {
    let n = dist.len();
    let d = dist[u][v];
    Bits::from_indices(n, (0..n).filter(|&x| dist[u][x] + dist[x][v] == d))
}

/// Checks the median property: every triple's pairwise intervals meet in
/// exactly one vertex. Exhaustive up to [`EXHAUSTIVE_LIMIT`] vertices.
pub fn verify_median(g: &Graph) -> Result<MedianVerdict> {
    let dist = all_distances(g)?;
    Ok(verify_with(&dist).0)
}

fn verify_with(dist: &[Vec<u32>]) -> (MedianVerdict, Option<Vec<Bits>>) {
    let n = dist.len();
    let fail = |t: [usize; 3], meet: &Bits, checked| MedianVerdict {
        median: false,
        exhaustive: n <= EXHAUSTIVE_LIMIT,
        triples_checked: checked,
        counterexample: Some(t),
        meet: Some(meet.iter().collect()),
    };
    if n <= EXHAUSTIVE_LIMIT {
        let iv: Vec<Bits> = (0..n * n).map(|k| interval_from(dist, k / n, k % n)).collect();
        let mut checked = 0u64;
        for u in 0..n {
            for v in u..n {
                for w in v..n {
                    checked += 1;
                    let mut m = iv[u * n + v].and(&iv[v * n + w]);
                    m.and_assign(&iv[u * n + w]);
                    if m.count() != 1 {
                        return (fail([u, v, w], &m, checked), None);
                    }
                }
            }
        }
        let verdict = MedianVerdict {
            median: true,
            exhaustive: true,
            triples_checked: checked,
            counterexample: None,
            meet: None,
        };
        (verdict, Some(iv))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d656469616e);
        for k in 0..SAMPLED_TRIPLES {
            let t = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
            let mut m = interval_from(dist, t[0], t[1]).and(&interval_from(dist, t[1], t[2]));
            m.and_assign(&interval_from(dist, t[0], t[2]));
            if m.count() != 1 {
                return (fail(t, &m, k as u64 + 1), None);
            }
        }
        let verdict = MedianVerdict {
            median: true,
            exhaustive: false,
            triples_checked: SAMPLED_TRIPLES as u64,
            counterexample: None,
            meet: None,
        };
        (verdict, None)
    }
}

impl MedianGraph {
    /// Verifies `g` and keeps it; non-median input is refused with the
    /// counterexample triple.
    pub fn new(g: Graph) -> Result<MedianGraph> {
        let dist = all_distances(&g)?;
        let (verdict, intervals) = verify_with(&dist);
        if !verdict.median {
            let t = verdict.counterexample.unwrap();
            return Err(Error::Refused(format!(
                "not a median graph: vertices {}, {}, {} have median set {:?}",
                t[0],
                t[1],
                t[2],
                verdict.meet.as_ref().unwrap()
            )));
        }
        Ok(MedianGraph {
            graph: g,
            dist,
            verdict,
            intervals,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn verdict(&self) -> &MedianVerdict {
        &self.verdict
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn dist(&self, u: usize, v: usize) -> u32 {
        self.dist[u][v]
    }

    pub fn interval(&self, u: usize, v: usize) -> Bits {
        match &self.intervals {
            Some(iv) => iv[u * self.len() + v].clone(),
            None => interval_from(&self.dist, u, v),
        }
    }

    /// The unique vertex on geodesics between each pair of `u, v, w`.
    pub fn median(&self, u: usize, v: usize, w: usize) -> usize {
        let d = &self.dist;
        (0..self.len())
            .find(|&x| {
                d[u][x] + d[x][v] == d[u][v] && d[v][x] + d[x][w] == d[v][w] && d[u][x] + d[x][w] == d[u][w]
            })
            .expect("verified median graph")
    }

    pub fn set(&self, items: &[usize]) -> Bits {
        Bits::from_indices(self.len(), items.iter().copied())
    }

    /// Whether every interval between members of `s` stays in `s`.
    pub fn is_convex(&self, s: &Bits) -> bool {
        let members: Vec<usize> = s.iter().collect();
        for (i, &x) in members.iter().enumerate() {
            for &y in &members[i + 1..] {
                if !self.interval(x, y).is_subset(s) {
                    return false;
                }
            }
        }
        true
    }

    /// Smallest convex set containing `s`: closure under intervals.
    pub fn hull(&self, s: &Bits) -> Bits {
        let mut cur = s.clone();
        let mut members: Vec<usize> = Vec::new();
        let mut pending: Vec<usize> = s.iter().collect();
        while let Some(x) = pending.pop() {
            for &y in &members {
                let iv = self.interval(x, y);
                for z in iv.iter() {
                    if !cur.get(z) {
                        cur.set(z);
                        pending.push(z);
                    }
                }
            }
            members.push(x);
        }
        cur
    }

    /// Common vertex of pairwise-meeting convex sets; the least such index.
    pub fn helly(&self, sets: &[Bits]) -> Result<HellyOutcome> {
        for (i, s) in sets.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Malformed(format!("set {i} is empty")));
            }
            if !self.is_convex(s) {
                return Err(Error::Malformed(format!("set {i} is not convex")));
            }
        }
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if !sets[i].intersects(&sets[j]) {
                    return Ok(HellyOutcome {
                        vertex: None,
                        disjoint_pair: Some((i, j)),
                    });
                }
            }
        }
        let mut all = Bits::from_indices(self.len(), 0..self.len());
        for s in sets {
            all.and_assign(s);
        }
        let vertex = all.iter().next();
        Ok(HellyOutcome {
            vertex,
            disjoint_pair: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HellyOutcome {
    /// A common vertex; `None` with pairwise-meeting input would contradict
    /// the Helly property.
    pub vertex: Option<usize>,
    /// A pair of disjoint sets, when the input does not meet pairwise.
    pub disjoint_pair: Option<(usize, usize)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        let e: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &e).unwrap()
    }

    #[test]
    fn median_examples() {
        assert!(verify_median(&hypercube(3)).unwrap().median);
        assert!(!verify_median(&cycle(3)).unwrap().median);
        let c6 = verify_median(&cycle(6)).unwrap();
        assert!(!c6.median);
        assert_eq!(c6.meet.as_ref().map(|m| m.len()), Some(0));
        assert!(verify_median(&Graph::new(2, &[]).unwrap()).is_err());
    }

    #[test]
    fn medians_intervals_hulls() {
        let q3 = MedianGraph::new(hypercube(3)).unwrap();
        // Vertex labels are bit masks.
        assert_eq!(q3.median(0b000, 0b011, 0b101), 0b001);
        assert_eq!(q3.median(5, 5, 2), 5);
        assert_eq!(q3.interval(0, 7).count(), 8);
        assert_eq!(q3.interval(3, 3).iter().collect::<Vec<_>>(), vec![3]);

        let g = MedianGraph::new(grid(3, 3)).unwrap();
        assert_eq!(g.hull(&g.set(&[0, 8])).count(), 9);
        assert_eq!(g.hull(&g.set(&[0, 1])).iter().collect::<Vec<_>>(), vec![0, 1]);
        assert!(g.is_convex(&g.set(&[0, 1, 3, 4])));
        assert!(!g.is_convex(&g.set(&[0, 4])));
    }

    #[test]
    fn helly_examples() {
        let q3 = MedianGraph::new(hypercube(3)).unwrap();
        // Facets x0 = 0, x1 = 0, x2 = 0.
        let facets: Vec<Bits> = (0..3)
            .map(|b| Bits::from_indices(8, (0..8).filter(|v| v >> b & 1 == 0)))
            .collect();
        assert_eq!(q3.helly(&facets).unwrap().vertex, Some(0));
        assert!(q3.helly(&[q3.set(&[0, 1, 2])]).is_err());
        let t = MedianGraph::new(path(5)).unwrap();
        let out = t.helly(&[t.set(&[0, 1, 2]), t.set(&[2, 3]), t.set(&[1, 2, 3, 4])]).unwrap();
        assert_eq!(out.vertex, Some(2));
    }
}
