//! Free products viewed as hyperbolic relative to their two factors.
//!
//! Peripheral cosets `gP` are labelled by their unique shortest element:
//! `g` with its last syllable dropped when that syllable lies in `P`. Every
//! S-distance below comes from the factors' closed length formulas.

mod constants;
mod packing;
mod sigma;
mod transition;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use constants::{measure_constants, CampaignConfig, ConstantEstimates, Estimate};
pub use packing::{
    rel_packing_profile, CommonPointWitness, OutcomeJson, PeripheralWitness, RelOutcomeRow, RelPackingOptions,
    RelPackingOutcome, RelPackingProfile,
};
pub use sigma::{rel_qc_sigma, SigmaEstimate, SigmaSample};
pub use transition::{transition_points, Annotation, TransitionReport};

use crate::cayley::{Ball, DistanceCert};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::word::{Letter, Word};

/// A left coset `rep · P_factor` with `rep` its shortest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeripheralCoset {
    pub rep: Element,
    pub factor: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeripheralLabel {
    pub rep: String,
    pub factor: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelMethod {
    Syllable,
    Bfs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelDistanceCert {
    pub value: u64,
    pub method: RelMethod,
    /// For BFS: the radius of the enumeration the search ran in. The value
    /// is then an upper bound for the relative distance.
    pub radius_used: usize,
    pub s_distance: DistanceCert,
}

/// The free-product backend together with its two factors as peripheral
/// subgroups.
#[derive(Clone, Debug)]
pub struct PeripheralStructure {
    group: Arc<Group>,
    factors: [Arc<Group>; 2],
}

impl PeripheralStructure {
    pub fn new(group: &Arc<Group>) -> Result<Self> {
        let Some((l, r)) = group.factors().filter(|_| group.is_free_product()) else {
            return Err(Error::Unsupported(
                "relative metrics are implemented for free-product backends only".into(),
            ));
        };
        for f in [l, r] {
            if !f.has_length_formula() {
                return Err(Error::Unsupported(format!(
                    "factor {:?} has no closed word-length formula",
                    f.descriptor()
                )));
            }
        }
        Ok(PeripheralStructure {
            group: group.clone(),
            factors: [l.clone(), r.clone()],
        })
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn factor(&self, f: usize) -> &Arc<Group> {
        &self.factors[f]
    }

    pub fn syllables<'a>(&self, x: &'a Element) -> &'a [(u8, Element)] {
        match x {
            Element::FreeProd(s) => s,
            _ => panic!("expected a free-product element"),
        }
    }

    /// Word length over `S`.
    pub fn s_length(&self, x: &Element) -> u64 {
        self.group.word_length_formula(x).expect("factors have length formulas")
    }

    pub fn s_dist(&self, x: &Element, y: &Element) -> u64 {
        self.s_length(&self.group.mul(&self.group.inv(x), y))
    }

    /// Relative length: the number of syllables.
    pub fn rel_length(&self, x: &Element) -> u64 {
        self.syllables(x).len() as u64
    }

    /// The coset `g P_f`.
    pub fn coset(&self, g: &Element, f: usize) -> PeripheralCoset {
        let s = self.syllables(g);
        let rep = match s.last() {
            Some((last, _)) if *last as usize == f => Element::FreeProd(s[..s.len() - 1].to_vec()),
            _ => g.clone(),
        };
        PeripheralCoset { rep, factor: f }
    }

    /// The two peripheral cosets through `x`.
    pub fn cosets_at(&self, x: &Element) -> [PeripheralCoset; 2] {
        [self.coset(x, 0), self.coset(x, 1)]
    }

    pub fn contains(&self, c: &PeripheralCoset, x: &Element) -> bool {
        self.coset(x, c.factor).rep == c.rep
    }

    /// `d_S(x, gP)`: the length of the shortest element of `x^-1 g P`.
    pub fn dist_to_coset(&self, x: &Element, c: &PeripheralCoset) -> u64 {
        let z = self.group.mul(&self.group.inv(x), &c.rep);
        self.s_length(&self.coset(&z, c.factor).rep)
    }

    /// `d_S(gP, g'P')` as the least `d_S(x, g'P')` over `x ∈ gP`, attained
    /// at the projection of `g'` (tree structure of free products).
    pub fn coset_distance(&self, a: &PeripheralCoset, b: &PeripheralCoset) -> u64 {
        // Points of `a` nearest `b`: `a.rep · p` where `p` is the syllable of
        // `a.rep^-1 b.rep` in `a`'s factor, if it leads.
        let z = self.group.mul(&self.group.inv(&a.rep), &b.rep);
        let s = self.syllables(&z);
        let p = match s.first() {
            Some((f, y)) if *f as usize == a.factor => self.group.inject(a.factor, y),
            _ => self.group.identity().clone(),
        };
        self.dist_to_coset(&self.group.mul(&a.rep, &p), b)
    }

    pub fn label(&self, c: &PeripheralCoset) -> PeripheralLabel {
        PeripheralLabel {
            rep: self.group.format(&c.rep),
            factor: c.factor,
        }
    }

    /// The relative geodesic from `x` to `y`: the vertices `x·t_1⋯t_i` for
    /// the syllables `t_i` of `x^-1 y`.
    pub fn rel_geodesic(&self, x: &Element, y: &Element) -> Vec<Element> {
        let z = self.group.mul(&self.group.inv(x), y);
        let mut out = vec![x.clone()];
        let mut cur = x.clone();
        for (f, t) in self.syllables(&z) {
            cur = self.group.mul(&cur, &self.group.inject(*f as usize, t));
            out.push(cur.clone());
        }
        out
    }

    /// The S-geodesic from `x` spelled by the normal word of `x^-1 y`.
    pub fn s_geodesic(&self, x: &Element, y: &Element) -> (Word, Vec<Element>) {
        let z = self.group.mul(&self.group.inv(x), y);
        let w = self.group.render(&z);
        (w.clone(), self.path(x, &w))
    }

    /// Vertices `x, x·w_1, x·w_1 w_2, ...`.
    pub fn path(&self, x: &Element, w: &[Letter]) -> Vec<Element> {
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut cur = x.clone();
        out.push(cur.clone());
        for &l in w {
            cur = self.group.mul_letter(&cur, l);
            out.push(cur.clone());
        }
        out
    }

    /// Syllable-count relative distance.
    pub fn rel_dist(&self, x: &Element, y: &Element) -> RelDistanceCert {
        let z = self.group.mul(&self.group.inv(x), y);
        RelDistanceCert {
            value: self.rel_length(&z),
            method: RelMethod::Syllable,
            radius_used: 0,
            s_distance: DistanceCert {
                value: self.s_length(&z),
                exact: true,
                radius_used: 0,
            },
        }
    }

    /// The union of `ys` and every peripheral coset meeting their
    /// `nu`-neighbourhood. Points must lie in the ball of radius `r - nu`.
    pub fn saturation(&self, ys: &[Element], nu: usize, r: usize) -> Result<Saturation> {
        if nu > r {
            return Err(Error::Malformed(format!("ν = {nu} exceeds the radius {r}")));
        }
        for y in ys {
            let len = self.s_length(y);
            if len > (r - nu) as u64 {
                return Err(Error::Malformed(format!(
                    "{} has length {len}, outside the ball of radius {}",
                    self.group.format(y),
                    r - nu
                )));
            }
        }
        let ball = Ball::new(&self.group, nu, crate::cayley::DEFAULT_BUDGET)?;
        // Every point of N_ν(Y) is y·s with |s| ≤ ν, so this enumeration is
        // complete; each coset keeps its first witness.
        let mut found: BTreeMap<PeripheralCoset, (usize, Element)> = BTreeMap::new();
        for (k, y) in ys.iter().enumerate() {
            for s in ball.elements() {
                let z = self.group.mul(y, s);
                for c in self.cosets_at(&z) {
                    found.entry(c).or_insert_with(|| (k, z.clone()));
                }
            }
        }
        let mut cosets = Vec::new();
        for (c, (k, z)) in found {
            let d = self.s_dist(&ys[k], &z);
            if !self.contains(&c, &z) || d > nu as u64 || self.s_length(&z) > r as u64 {
                return Err(Error::Consistency("saturation witness does not re-verify".into()));
            }
            cosets.push(SaturatedCoset {
                coset: c,
                witness: z,
                from: k,
                distance: d,
            });
        }
        Ok(Saturation {
            points: ys.to_vec(),
            cosets,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturatedCoset {
    pub coset: PeripheralCoset,
    /// A point of the coset within `ν` of `points[from]`.
    pub witness: Element,
    pub from: usize,
    pub distance: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Saturation {
    pub points: Vec<Element>,
    /// In label order.
    pub cosets: Vec<SaturatedCoset>,
}

/// Relative distances by breadth-first search inside a ball, where a step
/// is an S-letter or a jump between two ball elements of one peripheral
/// coset.
#[derive(Clone, Debug)]
pub struct RelBfs {
    ball: Ball,
    letters: Vec<Vec<u32>>,
    /// Coset class of each element, per factor.
    class: [Vec<u32>; 2],
    members: [Vec<Vec<u32>>; 2],
}

impl RelBfs {
    pub fn new(ps: &PeripheralStructure, radius: usize, budget: usize) -> Result<Self> {
        let ball = Ball::new(ps.group(), radius, budget)?;
        let grp = ps.group();
        let alphabet = grp.letters();
        let letters = ball
            .elements()
            .iter()
            .map(|x| {
                alphabet
                    .iter()
                    .filter_map(|&l| ball.index_of(&grp.mul_letter(x, l)).map(|i| i as u32))
                    .collect()
            })
            .collect();
        let mut class: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        let mut members: [Vec<Vec<u32>>; 2] = [Vec::new(), Vec::new()];
        for f in 0..2 {
            let mut ids: HashMap<Element, u32> = HashMap::new();
            for (i, x) in ball.elements().iter().enumerate() {
                let key = ps.coset(x, f).rep;
                let next = ids.len() as u32;
                let id = *ids.entry(key).or_insert(next);
                if id as usize == members[f].len() {
                    members[f].push(Vec::new());
                }
                members[f][id as usize].push(i as u32);
                class[f].push(id);
            }
        }
        Ok(RelBfs {
            ball,
            letters,
            class,
            members,
        })
    }

    pub fn ball(&self) -> &Ball {
        &self.ball
    }

    /// Relative distances from ball element `src` to every ball element.
    pub fn distances_from(&self, src: usize) -> Vec<u32> {
        let n = self.ball.len();
        let mut dist = vec![u32::MAX; n];
        let mut used = [
            vec![false; self.members[0].len()],
            vec![false; self.members[1].len()],
        ];
        let mut queue = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(u) = queue.pop_front() {
            let du = dist[u] + 1;
            for &v in &self.letters[u] {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = du;
                    queue.push_back(v as usize);
                }
            }
            for f in 0..2 {
                let c = self.class[f][u] as usize;
                if std::mem::replace(&mut used[f][c], true) {
                    continue;
                }
                for &v in &self.members[f][c] {
                    if dist[v as usize] == u32::MAX {
                        dist[v as usize] = du;
                        queue.push_back(v as usize);
                    }
                }
            }
        }
        dist
    }

    /// BFS relative distance between two ball elements.
    pub fn rel_dist(&self, x: &Element, y: &Element) -> Result<RelDistanceCert> {
        let (Some(i), Some(j)) = (self.ball.index_of(x), self.ball.index_of(y)) else {
            return Err(Error::Refused(format!(
                "both points must lie in the radius-{} enumeration",
                self.ball.radius()
            )));
        };
        let d = self.distances_from(i)[j];
        Ok(RelDistanceCert {
            value: d as u64,
            method: RelMethod::Bfs,
            radius_used: self.ball.radius(),
            s_distance: self.ball.dist(x, y),
        })
    }

    /// Compares the BFS and syllable routes on every pair of the ball.
    pub fn agreement(&self, ps: &PeripheralStructure) -> Agreement {
        let n = self.ball.len();
        let elems = self.ball.elements();
        let grp = ps.group();
        let mut out = Agreement {
            radius: self.ball.radius(),
            pairs: 0,
            disagreements: Vec::new(),
            above_s_distance: 0,
        };
        for i in 0..n {
            let bfs = self.distances_from(i);
            let xi = grp.inv(&elems[i]);
            for j in i..n {
                let z = grp.mul(&xi, &elems[j]);
                let syl = ps.rel_length(&z);
                out.pairs += 1;
                if bfs[j] as u64 != syl && out.disagreements.len() < 16 {
                    out.disagreements.push((grp.format(&elems[i]), grp.format(&elems[j]), bfs[j] as u64, syl));
                }
                if syl > ps.s_length(&z) {
                    out.above_s_distance += 1;
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agreement {
    pub radius: usize,
    /// Unordered pairs compared (including `x = y`).
    pub pairs: u64,
    /// Up to 16 pairs `(x, y, bfs, syllable)` where the routes differ.
    pub disagreements: Vec<(String, String, u64, u64)>,
    /// Pairs whose relative distance exceeds their S-distance.
    pub above_s_distance: u64,
}

impl Agreement {
    pub fn holds(&self) -> bool {
        self.disagreements.is_empty() && self.above_s_distance == 0
    }
}
