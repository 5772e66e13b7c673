//! Sageev duals of finite wallspaces.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Graph, MedianGraph};
use crate::clique::Bits;
use crate::error::{Error, Result};

/// Default cap on the number of dual vertices.
pub const DUAL_LIMIT: usize = 4096;

/// `{"points": n, "walls": [[side-0 point indices], ...]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wallspace {
    pub points: usize,
    pub walls: Vec<Vec<usize>>,
}

/// The dual median graph with the orientation behind each vertex (bit `i`
/// set when the side away from the wall's listed points is chosen).
#[derive(Clone, Debug)]
pub struct Dual {
    pub median: MedianGraph,
    pub orientations: Vec<u64>,
}

impl Wallspace {
    fn halfspaces(&self) -> Result<Vec<[Bits; 2]>> {
        if self.points == 0 {
            return Err(Error::Malformed("wallspace has no points".into()));
        }
        if self.walls.len() > 64 {
            return Err(Error::Unsupported(format!(
                "{} walls; at most 64 are supported",
                self.walls.len()
            )));
        }
        let mut out: Vec<[Bits; 2]> = Vec::new();
        for (i, w) in self.walls.iter().enumerate() {
            if let Some(&p) = w.iter().find(|&&p| p >= self.points) {
                return Err(Error::Malformed(format!("wall {i} names point {p} of {}", self.points)));
            }
            let side0 = Bits::from_indices(self.points, w.iter().copied());
            let side1 = Bits::from_indices(self.points, (0..self.points).filter(|&p| !side0.get(p)));
            if side0.is_empty() || side1.is_empty() {
                return Err(Error::Malformed(format!("wall {i} is trivial")));
            }
            if let Some(j) = out.iter().position(|h| h[0] == side0 || h[0] == side1) {
                return Err(Error::Malformed(format!("walls {j} and {i} coincide")));
            }
            out.push([side0, side1]);
        }
        Ok(out)
    }
}

/// Orientation choosing, for every wall, the side containing `p`.
pub fn principal_orientation(ws: &Wallspace, p: usize) -> u64 {
    let mut o = 0u64;
    for (i, w) in ws.walls.iter().enumerate() {
        if !w.contains(&p) {
            o |= 1 << i;
        }
    }
    o
}

/// Consistent orientations reachable from the principal orientation of
/// point 0 by single flips, in BFS order, joined when they differ on one
/// wall. Refuses once more than `limit` vertices appear.
pub fn dual(ws: &Wallspace, limit: usize) -> Result<Dual> {
    let hs = ws.halfspaces()?;
    let k = hs.len();
    // clash[i][a] has bit j·2 + b set when halfspace (i, a) misses (j, b).
    let mut clash = vec![[(0u64, 0u64); 2]; k];
    for i in 0..k {
        for a in 0..2 {
            for (j, hj) in hs.iter().enumerate() {
                if !hs[i][a].intersects(&hj[0]) {
                    clash[i][a].0 |= 1 << j;
                }
                if !hs[i][a].intersects(&hj[1]) {
                    clash[i][a].1 |= 1 << j;
                }
            }
        }
    }
    let consistent = |o: u64| {
        (0..k).all(|i| {
            let (m0, m1) = clash[i][(o >> i & 1) as usize];
            m0 & !o == 0 && m1 & o == 0
        })
    };
    let start = principal_orientation(ws, 0);
    debug_assert!(consistent(start));
    let mut index = HashMap::from([(start, 0usize)]);
    let mut orientations = vec![start];
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    let mut depth = vec![0usize];
    while let Some(u) = queue.pop_front() {
        let o = orientations[u];
        for i in 0..k {
            let f = o ^ (1 << i);
            if !consistent(f) {
                continue;
            }
            let v = match index.get(&f) {
                Some(&v) => v,
                None => {
                    if orientations.len() >= limit {
                        return Err(Error::Budget {
                            budget: limit,
                            layer: depth[u] + 1,
                            elements: orientations.len(),
                        });
                    }
                    let v = orientations.len();
                    index.insert(f, v);
                    orientations.push(f);
                    depth.push(depth[u] + 1);
                    queue.push_back(v);
                    v
                }
            };
            if u < v {
                edges.push((u, v));
            }
        }
    }
    let graph = Graph::new(orientations.len(), &edges)?;
    let median = MedianGraph::new(graph).map_err(|e| Error::Consistency(format!("dual is not median: {e}")))?;
    Ok(Dual { median, orientations })
}

/// The wallspace of a median graph's hyperplanes over its vertices.
pub fn walls_of(g: &MedianGraph) -> Result<Wallspace> {
    let hs = g.hyperplanes()?;
    Ok(Wallspace {
        points: g.len(),
        walls: hs.iter().map(|h| h.sides[0].iter().collect()).collect(),
    })
}

impl Dual {
    /// Checks that `v ↦ principal orientation of v` is an isomorphism from
    /// `g` onto this dual, where `ws = walls_of(g)`.
    pub fn principal_map_is_isomorphism(&self, ws: &Wallspace, g: &Graph) -> bool {
        let index: HashMap<u64, usize> = self.orientations.iter().enumerate().map(|(i, &o)| (o, i)).collect();
        let Some(map) = (0..g.len())
            .map(|v| index.get(&principal_orientation(ws, v)).copied())
            .collect::<Option<Vec<usize>>>()
        else {
            return false;
        };
        let dg = self.median.graph();
        let mut seen = vec![false; dg.len()];
        for &m in &map {
            if std::mem::replace(&mut seen[m], true) {
                return false;
            }
        }
        dg.len() == g.len()
            && g.edges().len() == dg.edges().len()
            && g.edges().iter().all(|&(u, v)| dg.has_edge(map[u], map[v]))
    }
}
