//! The Δ-graph (vertices joined when they share a cube) and the arguments
//! built on it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Graph, Hyperplane, MedianGraph};
use crate::clique::Bits;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct DeltaGraph {
    graph: Graph,
    dist: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalNeighborhood {
    /// Whether `t` and `u` lie in the Δ-1-neighbourhood of `[r, s]`.
    pub precondition: bool,
    /// Whether all of `[t, u]` does.
    pub holds: bool,
    /// Vertices of `[t, u]` outside the neighbourhood.
    pub missing: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackingCheck {
    /// Whether the carriers are pairwise within Δ-distance `D′`.
    pub pairwise_close: bool,
    /// A vertex within `D′` of every carrier, minimising the largest such
    /// distance (least index on ties).
    pub vertex: Option<usize>,
    pub max_distance: Option<u32>,
    /// Hyperplanes with vertices of the Δ-ball of radius `D′` at `vertex` on
    /// both sides.
    pub crossing_count: usize,
    pub ball_size: usize,
}

impl DeltaGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn dist(&self, u: usize, v: usize) -> u32 {
        self.dist[u][v]
    }

    /// Δ-distance from `v` to a nonempty set.
    pub fn dist_to(&self, v: usize, s: &Bits) -> u32 {
        s.iter().map(|x| self.dist[v][x]).min().unwrap_or(u32::MAX)
    }

    /// Vertices within Δ-distance `n` of `s`.
    pub fn neighborhood(&self, s: &Bits, n: u32) -> Bits {
        let len = self.graph.len();
        let mut d = vec![u32::MAX; len];
        let mut q = VecDeque::new();
        for x in s.iter() {
            d[x] = 0;
            q.push_back(x);
        }
        let mut out = s.clone();
        while let Some(u) = q.pop_front() {
            if d[u] == n {
                continue;
            }
            for &v in self.graph.neighbors(u) {
                if d[v] == u32::MAX {
                    d[v] = d[u] + 1;
                    out.set(v);
                    q.push_back(v);
                }
            }
        }
        out
    }
}

impl MedianGraph {
    /// Two vertices share a cube iff their interval has `2^d` vertices.
    pub fn delta_graph(&self) -> DeltaGraph {
        let n = self.len();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let d = self.dist(u, v);
                if d < usize::BITS && self.interval(u, v).count() == 1usize << d {
                    edges.push((u, v));
                }
            }
        }
        let graph = Graph::new(n, &edges).expect("indices in range");
        let dist = (0..n).map(|s| graph.bfs(s)).collect();
        DeltaGraph { graph, dist }
    }

    /// Cubes found by growing from each vertex along neighbour sets whose
    /// every face closes up; each cube is listed once as a sorted vertex set.
    pub fn cubes(&self) -> Vec<Vec<usize>> {
        let g = self.graph();
        let mut found = std::collections::BTreeSet::new();
        for base in 0..self.len() {
            let nbrs = g.neighbors(base);
            let k = nbrs.len();
            if k > 16 {
                continue;
            }
            for mask in 1u32..(1 << k) {
                let dirs: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| nbrs[i]).collect();
                if let Some(verts) = self.span_cube(base, &dirs) {
                    found.insert(verts);
                }
            }
        }
        found.into_iter().collect()
    }

    /// Vertices of the cube at `base` spanned by the neighbours `dirs`.
    fn span_cube(&self, base: usize, dirs: &[usize]) -> Option<Vec<usize>> {
        let g = self.graph();
        let k = dirs.len();
        let mut at = vec![usize::MAX; 1 << k];
        at[0] = base;
        for (i, &d) in dirs.iter().enumerate() {
            at[1 << i] = d;
        }
        for t in 1usize..(1 << k) {
            if t.count_ones() < 2 {
                continue;
            }
            // Close the square on two lower faces.
            let i = t.trailing_zeros() as usize;
            let j = (t & !(1 << i)).trailing_zeros() as usize;
            let (a, b, c) = (at[t & !(1 << i)], at[t & !(1 << j)], at[t & !(1 << i) & !(1 << j)]);
            let x = g
                .neighbors(a)
                .iter()
                .copied()
                .find(|&x| x != c && g.has_edge(x, b))?;
            // Every lower face must be adjacent.
            for m in 0..k {
                if t >> m & 1 == 1 && !g.has_edge(x, at[t & !(1 << m)]) {
                    return None;
                }
            }
            at[t] = x;
        }
        let mut v = at;
        v.sort_unstable();
        v.dedup();
        (v.len() == 1 << k).then_some(v)
    }

    /// Δ-graph from explicit cube enumeration.
    pub fn delta_graph_by_cubes(&self) -> Graph {
        let mut edges = Vec::new();
        for c in self.cubes() {
            for (i, &u) in c.iter().enumerate() {
                for &v in &c[i + 1..] {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(self.len(), &edges).expect("indices in range")
    }

    /// Every vertex of `[t, u]` lies within Δ-distance 1 of `[r, s]` when `t`
    /// and `u` do.
    pub fn check_interval_neighborhood(
        &self,
        delta: &DeltaGraph,
        r: usize,
        s: usize,
        t: usize,
        u: usize,
    ) -> IntervalNeighborhood {
        let nb = delta.neighborhood(&self.interval(r, s), 1);
        let precondition = nb.get(t) && nb.get(u);
        let missing: Vec<usize> = self.interval(t, u).iter().filter(|&x| !nb.get(x)).collect();
        IntervalNeighborhood {
            precondition,
            holds: missing.is_empty(),
            missing,
        }
    }

    /// Given carriers pairwise within Δ-distance `d_prime`, finds a vertex
    /// within `d_prime` of all of them by intersecting their convex
    /// Δ-neighbourhoods.
    pub fn hyperplane_packing_check(
        &self,
        delta: &DeltaGraph,
        hyperplanes: &[Hyperplane],
        chosen: &[usize],
        d_prime: u32,
    ) -> Result<PackingCheck> {
        for &i in chosen {
            if i >= hyperplanes.len() {
                return Err(Error::Malformed(format!("no hyperplane {i}")));
            }
        }
        let carriers: Vec<&Bits> = chosen.iter().map(|&i| &hyperplanes[i].carrier).collect();
        let pairwise_close = carriers.iter().enumerate().all(|(a, x)| {
            carriers[a + 1..]
                .iter()
                .all(|y| x.iter().map(|v| delta.dist_to(v, y)).min().unwrap() <= d_prime)
        });
        let empty = PackingCheck {
            pairwise_close,
            vertex: None,
            max_distance: None,
            crossing_count: 0,
            ball_size: 0,
        };
        if !pairwise_close || chosen.is_empty() {
            return Ok(empty);
        }
        let nbhds: Vec<Bits> = carriers.iter().map(|c| delta.neighborhood(c, d_prime)).collect();
        for (k, nb) in nbhds.iter().enumerate() {
            if !self.is_convex(nb) {
                return Err(Error::Consistency(format!(
                    "Δ-neighbourhood of carrier {} is not convex",
                    chosen[k]
                )));
            }
        }
        let helly = self.helly(&nbhds)?;
        if helly.vertex.is_none() {
            return Err(Error::Consistency("pairwise-meeting convex sets have no common vertex".into()));
        }
        let mut common = nbhds[0].clone();
        for nb in &nbhds[1..] {
            common.and_assign(nb);
        }
        let (p, far) = common
            .iter()
            .map(|v| (v, carriers.iter().map(|c| delta.dist_to(v, c)).max().unwrap()))
            .min_by_key(|&(v, m)| (m, v))
            .unwrap();
        let ball = delta.neighborhood(&self.set(&[p]), d_prime);
        let crossing_count = hyperplanes
            .iter()
            .filter(|h| ball.intersects(&h.sides[0]) && ball.intersects(&h.sides[1]))
            .count();
        Ok(PackingCheck {
            vertex: Some(p),
            max_distance: Some(far),
            crossing_count,
            ball_size: ball.count(),
            ..empty
        })
    }
}
