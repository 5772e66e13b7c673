//! Hyperplanes (edge Θ-classes), halfspaces, carriers and dimension.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MedianGraph;
use crate::clique::{self, Bits};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperplane {
    /// Edges `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// `sides[0]` holds the lower endpoint of the first edge.
    pub sides: [Bits; 2],
    /// Endpoints of the class's edges.
    pub carrier: Bits,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneJson {
    pub edges: Vec<[usize; 2]>,
    pub sides: [Vec<usize>; 2],
    pub carrier: Vec<usize>,
}

impl Hyperplane {
    pub fn separates(&self, u: usize, v: usize) -> bool {
        self.sides[0].get(u) != self.sides[0].get(v)
    }

    /// Whether all four quadrants with `other` are nonempty.
    pub fn crosses(&self, other: &Hyperplane) -> bool {
        self.sides
            .iter()
            .all(|a| other.sides.iter().all(|b| a.intersects(b)))
    }

    pub fn to_json(&self) -> HyperplaneJson {
        HyperplaneJson {
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            sides: [self.sides[0].iter().collect(), self.sides[1].iter().collect()],
            carrier: self.carrier.iter().collect(),
        }
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let n = self.0[c];
            self.0[c] = r;
            c = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            self.0[hi] = lo;
        }
    }
}

impl MedianGraph {
    /// Edge classes under the transitive closure of square opposition, as a
    /// class index per edge of `graph().edges()`.
    pub fn square_classes(&self) -> Vec<usize> {
        let g = self.graph();
        let edges = g.edges();
        let index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let mut dsu = Dsu((0..edges.len()).collect());
        for (i, &(u, v)) in edges.iter().enumerate() {
            // Squares u - v - y - x - u.
            for &x in g.neighbors(u) {
                if x == v {
                    continue;
                }
                for &y in g.neighbors(v) {
                    if y != u && y != x && g.has_edge(x, y) {
                        dsu.union(i, index[&key(x, y)]);
                    }
                }
            }
        }
        relabel((0..edges.len()).map(|i| dsu.find(i)).collect())
    }

    /// Edge classes under the Djoković–Winkler relation: `uv Θ xy` iff
    /// `d(u,x) + d(v,y) ≠ d(u,y) + d(v,x)`.
    pub fn djokovic_classes(&self) -> Vec<usize> {
        let edges = self.graph().edges();
        let mut dsu = Dsu((0..edges.len()).collect());
        for (i, &(u, v)) in edges.iter().enumerate() {
            for (j, &(x, y)) in edges.iter().enumerate().skip(i + 1) {
                if self.dist(u, x) + self.dist(v, y) != self.dist(u, y) + self.dist(v, x) {
                    dsu.union(i, j);
                }
            }
        }
        relabel((0..edges.len()).map(|i| dsu.find(i)).collect())
    }

    /// Hyperplanes in order of their least edge. Fails with a consistency
    /// error if the wall-metric identity breaks for some pair.
    pub fn hyperplanes(&self) -> Result<Vec<Hyperplane>> {
        let edges = self.graph().edges();
        let classes = self.square_classes();
        let k = classes.iter().copied().max().map_or(0, |m| m + 1);
        let n = self.len();
        let mut out: Vec<Hyperplane> = (0..k)
            .map(|_| Hyperplane {
                edges: Vec::new(),
                sides: [Bits::new(n), Bits::new(n)],
                carrier: Bits::new(n),
            })
            .collect();
        for (e, &c) in edges.iter().zip(&classes) {
            out[c].edges.push(*e);
            out[c].carrier.set(e.0);
            out[c].carrier.set(e.1);
        }
        for h in &mut out {
            let (u, v) = h.edges[0];
            for x in 0..n {
                let side = (self.dist(x, u) > self.dist(x, v)) as usize;
                h.sides[side].set(x);
            }
            for &(a, b) in &h.edges {
                if !h.separates(a, b) {
                    return Err(Error::Consistency(format!(
                        "edge ({a}, {b}) does not cross its own hyperplane"
                    )));
                }
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                let sep = out.iter().filter(|h| h.separates(u, v)).count() as u32;
                if sep != self.dist(u, v) {
                    return Err(Error::Consistency(format!(
                        "{sep} hyperplanes separate {u} and {v} at distance {}",
                        self.dist(u, v)
                    )));
                }
            }
        }
        Ok(out)
    }

    /// Largest family of pairwise crossing hyperplanes.
    pub fn dimension(&self) -> Result<usize> {
        let hs = self.hyperplanes()?;
        Ok(dimension_of(&hs))
    }
}

pub(crate) fn dimension_of(hs: &[Hyperplane]) -> usize {
    let mut g = clique::Graph::new(hs.len());
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            if hs[i].crosses(&hs[j]) {
                g.add_edge(i, j);
            }
        }
    }
    clique::max_clique(&g).len()
}

/// Renumbers class representatives as 0, 1, ... in order of first use.
fn relabel(roots: Vec<usize>) -> Vec<usize> {
    let mut map = HashMap::new();
    roots
        .into_iter()
        .map(|r| {
            let next = map.len();
            *map.entry(r).or_insert(next)
        })
        .collect()
}
