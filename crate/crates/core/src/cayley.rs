//! Exhaustive Cayley-graph balls and word-metric queries.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::word::{Letter, Word};

/// Default element budget for ball construction.
pub const DEFAULT_BUDGET: usize = 4_000_000;

/// The ball of radius `radius` about the identity, enumerated breadth-first
/// in letter order. The parent path of each element spells its
/// shortlex-least geodesic.
#[derive(Clone, Debug)]
pub struct Ball {
    group: Arc<Group>,
    radius: usize,
    elements: Vec<Element>,
    dist: Vec<u32>,
    parent: Vec<Option<(u32, Letter)>>,
    index: HashMap<Element, u32>,
    /// `layer_start[k]` is the index of the first element at distance `k`.
    layer_start: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceCert {
    pub value: u64,
    /// True when `value` is the word-metric distance; otherwise an upper bound
    /// from a normal word.
    pub exact: bool,
    pub radius_used: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallEntryJson {
    pub word: String,
    pub dist: u32,
    pub parent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallJson {
    pub radius: usize,
    pub elements: Vec<BallEntryJson>,
}

impl Ball {
    /// Builds the ball, refusing (with the layer reached) once more than
    /// `budget` elements would be held.
    pub fn new(group: &Arc<Group>, radius: usize, budget: usize) -> Result<Ball> {
        let mut b = Ball {
            group: group.clone(),
            radius: 0,
            elements: vec![group.identity().clone()],
            dist: vec![0],
            parent: vec![None],
            index: HashMap::from([(group.identity().clone(), 0)]),
            layer_start: vec![0, 1],
        };
        let letters = group.letters();
        for layer in 1..=radius {
            let (lo, hi) = (b.layer_start[layer - 1], b.layer_start[layer]);
            for i in lo..hi {
                for &l in &letters {
                    let y = group.mul_letter(&b.elements[i], l);
                    if b.index.contains_key(&y) {
                        continue;
                    }
                    if b.elements.len() >= budget {
                        return Err(Error::Budget {
                            budget,
                            layer,
                            elements: b.elements.len(),
                        });
                    }
                    b.index.insert(y.clone(), b.elements.len() as u32);
                    b.elements.push(y);
                    b.dist.push(layer as u32);
                    b.parent.push(Some((i as u32, l)));
                }
            }
            b.layer_start.push(b.elements.len());
            b.radius = layer;
        }
        Ok(b)
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn dist_at(&self, i: usize) -> u32 {
        self.dist[i]
    }

    pub fn index_of(&self, x: &Element) -> Option<usize> {
        self.index.get(x).map(|&i| i as usize)
    }

    /// Elements at distance at most `r` (a prefix of the enumeration).
    pub fn prefix(&self, r: usize) -> &[Element] {
        let end = self.layer_start[(r + 1).min(self.layer_start.len() - 1)];
        &self.elements[..end]
    }

    /// Number of elements at distance at most `r`, for `r ≤ radius`.
    pub fn size_at(&self, r: usize) -> usize {
        self.layer_start[(r + 1).min(self.layer_start.len() - 1)]
    }

    /// Word length of `x`, if it lies in the ball.
    pub fn length(&self, x: &Element) -> Option<u32> {
        self.index_of(x).map(|i| self.dist[i])
    }

    /// Shortlex-least geodesic word of the element at index `i`.
    pub fn word_at(&self, i: usize) -> Word {
        let mut w = Vec::with_capacity(self.dist[i] as usize);
        let mut cur = i;
        while let Some((p, l)) = self.parent[cur] {
            w.push(l);
            cur = p as usize;
        }
        w.reverse();
        w
    }

    /// Distance certificate for `d(x, y) = |x^-1 y|`.
    pub fn dist(&self, x: &Element, y: &Element) -> DistanceCert {
        let z = self.group.mul(&self.group.inv(x), y);
        match self.length(&z) {
            Some(d) => DistanceCert {
                value: d as u64,
                exact: true,
                radius_used: self.radius,
            },
            None => DistanceCert {
                value: self.group.render(&z).len() as u64,
                exact: false,
                radius_used: self.radius,
            },
        }
    }

    /// A geodesic word `w` with `x·w = y`.
    pub fn geodesic(&self, x: &Element, y: &Element) -> Result<Word> {
        let z = self.group.mul(&self.group.inv(x), y);
        match self.index_of(&z) {
            Some(i) => Ok(self.word_at(i)),
            None => Err(Error::Refused(format!(
                "distance is not certified inside the radius-{} ball",
                self.radius
            ))),
        }
    }

    pub fn to_json(&self) -> BallJson {
        let labels = self.group.labels();
        BallJson {
            radius: self.radius,
            elements: (0..self.len())
                .map(|i| BallEntryJson {
                    word: self.group.format_word(&self.word_at(i)),
                    dist: self.dist[i],
                    parent: self.parent[i].map(|(_, l)| crate::word::render(&[l], labels)),
                })
                .collect(),
        }
    }
}

/// `ρ(n) = max{ |g|_1 : |g|_2 ≤ n }` for two balls over generating sets of the
/// same group (elements must be comparable across the two backends).
/// `None` when `n` exceeds the second ball or some element of it is missing
/// from the first.
pub fn reindex(first: &Ball, second: &Ball, n: usize) -> Option<u32> {
    if n > second.radius() {
        return None;
    }
    let mut best = 0;
    for x in second.prefix(n) {
        best = best.max(first.length(x)?);
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Descriptor;

    fn free2() -> Arc<Group> {
        Group::new(&Descriptor::Free { rank: 2, labels: None }).unwrap()
    }

    fn z2() -> Arc<Group> {
        Group::new(&Descriptor::FreeAbelian {
            rank: 2,
            generators: None,
            labels: None,
        })
        .unwrap()
    }

    #[test]
    fn free_ball_sizes() {
        let g = free2();
        let b = Ball::new(&g, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(Ball::new(&g, 1, DEFAULT_BUDGET).unwrap().len(), 5);
        assert_eq!(b.len(), 53);
        // Independent count: 1 + sum 4·3^(k-1).
        let expect: usize = 1 + (1..=3).map(|k| 4 * 3usize.pow(k - 1)).sum::<usize>();
        assert_eq!(b.len(), expect);
    }

    #[test]
    fn abelian_ball_and_distances() {
        let g = z2();
        let b = Ball::new(&g, 4, DEFAULT_BUDGET).unwrap();
        let brute = (-4i64..=4).flat_map(|x| (-4i64..=4).map(move |y| (x, y))).filter(|(x, y)| x.abs() + y.abs() <= 4).count();
        assert_eq!(b.len(), brute);
        assert_eq!(b.len(), 41);
        let b7 = Ball::new(&g, 7, DEFAULT_BUDGET).unwrap();
        let d = b7.dist(g.identity(), &Element::Abelian(vec![3, 4]));
        assert_eq!((d.value, d.exact), (7, true));
        let far = b.dist(g.identity(), &Element::Abelian(vec![3, 4]));
        assert_eq!((far.value, far.exact), (7, false));
    }

    #[test]
    fn geodesics() {
        let g = free2();
        let b = Ball::new(&g, 3, DEFAULT_BUDGET).unwrap();
        let ab = g.parse_element("a*b").unwrap();
        assert_eq!(g.format_word(&b.geodesic(g.identity(), &ab).unwrap()), "a*b");
        assert!(b.geodesic(g.identity(), g.identity()).unwrap().is_empty());
        let far = g.parse_element("a^4").unwrap();
        assert!(matches!(b.geodesic(g.identity(), &far), Err(Error::Refused(_))));
    }

    #[test]
    fn budget_is_all_or_nothing() {
        let err = Ball::new(&free2(), 5, 100).unwrap_err();
        assert!(matches!(err, Error::Budget { layer: 4, .. }), "{err:?}");
    }
}
