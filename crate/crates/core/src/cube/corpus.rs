//! Seeded regression corpus of median graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dual::{dual, Wallspace};
use super::{Graph, MedianGraph};
use crate::clique::Bits;
use crate::error::Result;

/// Path on `n` vertices `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Graph {
    let e: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    Graph::new(n, &e).expect("valid path")
}

/// `P_m × P_n` with vertex `r·n + c`.
pub fn grid(m: usize, n: usize) -> Graph {
    let mut e = Vec::new();
    for r in 0..m {
        for c in 0..n {
            if c + 1 < n {
                e.push((r * n + c, r * n + c + 1));
            }
            if r + 1 < m {
                e.push((r * n + c, (r + 1) * n + c));
            }
        }
    }
    Graph::new(m * n, &e).expect("valid grid")
}

/// `Q_d` on bit masks.
pub fn hypercube(d: usize) -> Graph {
    let n = 1usize << d;
    let mut e = Vec::new();
    for v in 0..n {
        for b in 0..d {
            if v >> b & 1 == 0 {
                e.push((v, v | 1 << b));
            }
        }
    }
    Graph::new(n, &e).expect("valid hypercube")
}

/// Uniform random recursive tree: vertex `i` attaches to a random earlier one.
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let e: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    Graph::new(n, &e).expect("valid tree")
}

/// Distinct nontrivial walls over `points` points (fewer than requested if
/// the point set cannot carry that many).
pub fn random_wallspace<R: Rng>(points: usize, walls: usize, rng: &mut R) -> Wallspace {
    let mut chosen: Vec<u64> = Vec::new();
    let full = (1u64 << points) - 1;
    let mut attempts = 0;
    while chosen.len() < walls && attempts < 1000 {
        attempts += 1;
        let m = rng.gen_range(1..full);
        // Normalise so point 0 is on side 0.
        let m = if m & 1 == 1 { m } else { full ^ m };
        if m != full && !chosen.contains(&m) {
            chosen.push(m);
        }
    }
    Wallspace {
        points,
        walls: chosen
            .iter()
            .map(|m| (0..points).filter(|p| m >> p & 1 == 1).collect())
            .collect(),
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub graph: Graph,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    /// Random wallspaces skipped because their dual exceeded the cap.
    pub skipped_duals: usize,
}

impl Corpus {
    /// Trees up to 50 vertices, grids up to 6×6, `Q_2`–`Q_4`, and `duals`
    /// duals of random wallspaces (at most 12 walls over at most 10 points)
    /// whose dual has at most `dual_cap` vertices.
    pub fn standard(seed: u64, duals: usize, dual_cap: usize) -> Result<Corpus> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::new();
        let mut push = |name: String, graph: Graph| entries.push(CorpusEntry { name, graph });
        for n in 1..=50 {
            push(format!("tree{n}"), random_tree(n, &mut rng));
        }
        push("path50".into(), path(50));
        let star: Vec<(usize, usize)> = (1..50).map(|i| (0, i)).collect();
        push("star50".into(), Graph::new(50, &star)?);
        for m in 1..=6 {
            for n in m..=6 {
                push(format!("grid{m}x{n}"), grid(m, n));
            }
        }
        for d in 2..=4 {
            push(format!("Q{d}"), hypercube(d));
        }
        let mut made = 0;
        let mut skipped = 0;
        while made < duals {
            let points = rng.gen_range(2..=10);
            let walls = rng.gen_range(1..=12);
            let mut ws = random_wallspace(points, walls, &mut rng);
            ws.walls.shuffle(&mut rng);
            match dual(&ws, dual_cap + 1) {
                Ok(d) if d.median.len() <= dual_cap => {
                    push(format!("dual{made}"), d.median.graph().clone());
                    made += 1;
                }
                Ok(_) | Err(crate::Error::Budget { .. }) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(Corpus {
            entries,
            skipped_duals: skipped,
        })
    }
}

/// `k` convex sets meeting pairwise: set `i` is the hull of the anchor
/// points other than the `i`-th plus one random vertex, so sets `i` and `j`
/// share every remaining anchor.
pub fn helly_family<R: Rng>(g: &MedianGraph, k: usize, rng: &mut R) -> Vec<Bits> {
    let n = g.len();
    let anchors: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
    (0..k)
        .map(|i| {
            let mut pts: Vec<usize> = anchors
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &p)| p)
                .collect();
            pts.push(rng.gen_range(0..n));
            g.hull(&g.set(&pts))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HellyTrials {
    pub trials: u64,
    pub seed: u64,
    pub failures: u64,
    /// Index of the first trial whose family had no common vertex.
    pub first_failure: Option<u64>,
}

/// Runs `trials` Helly checks on families of 3 to 5 random hulls.
pub fn helly_trials(g: &MedianGraph, trials: u64, seed: u64) -> Result<HellyTrials> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = HellyTrials {
        trials,
        seed,
        failures: 0,
        first_failure: None,
    };
    for t in 0..trials {
        let k = rng.gen_range(3..=5);
        let sets = helly_family(g, k, &mut rng);
        let ok = match g.helly(&sets)?.vertex {
            Some(v) => sets.iter().all(|s| s.get(v)),
            None => false,
        };
        if !ok {
            out.failures += 1;
            out.first_failure.get_or_insert(t);
        }
    }
    Ok(out)
}
