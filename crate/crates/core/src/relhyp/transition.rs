//! (ε,R)-deep and transition points along S-geodesics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{PeripheralCoset, PeripheralLabel, PeripheralStructure};
use crate::cayley::Ball;
use crate::error::{Error, Result};
use crate::group::Element;
use crate::word::Letter;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Annotation {
    Transition,
    /// Every coset the vertex is deep in, in label order.
    Deep(Vec<PeripheralCoset>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionReport {
    pub epsilon: usize,
    pub r: usize,
    pub vertices: Vec<Element>,
    pub annotations: Vec<Annotation>,
    /// Maximal runs `(first, last)` of deep vertices.
    pub components: Vec<(usize, usize)>,
    /// Vertices deep in several cosets, and components whose vertices
    /// disagree on their coset.
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub index: usize,
    pub element: String,
    pub deep_in: Vec<PeripheralLabel>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionJson {
    pub epsilon: usize,
    pub r: usize,
    pub vertices: Vec<VertexJson>,
    pub components: Vec<[usize; 2]>,
    pub violations: Vec<String>,
}

impl TransitionReport {
    pub fn is_transition(&self, i: usize) -> bool {
        self.annotations[i] == Annotation::Transition
    }

    pub fn transition_vertices(&self) -> Vec<&Element> {
        (0..self.vertices.len())
            .filter(|&i| self.is_transition(i))
            .map(|i| &self.vertices[i])
            .collect()
    }

    pub fn to_json(&self, ps: &PeripheralStructure) -> TransitionJson {
        TransitionJson {
            epsilon: self.epsilon,
            r: self.r,
            vertices: self
                .vertices
                .iter()
                .zip(&self.annotations)
                .enumerate()
                .map(|(index, (x, a))| VertexJson {
                    index,
                    element: ps.group().format(x),
                    deep_in: match a {
                        Annotation::Transition => Vec::new(),
                        Annotation::Deep(cs) => cs.iter().map(|c| ps.label(c)).collect(),
                    },
                })
                .collect(),
            components: self.components.iter().map(|&(a, b)| [a, b]).collect(),
            violations: self.violations.clone(),
        }
    }
}

/// Annotates the vertices of the path spelled by `geo` from `start`, which
/// must be an S-geodesic.
pub fn transition_points(
    ps: &PeripheralStructure,
    start: &Element,
    geo: &[Letter],
    epsilon: usize,
    r: usize,
) -> Result<TransitionReport> {
    let grp = ps.group();
    let end = grp.mul(&grp.inv(start), &ps.path(start, geo)[geo.len()]);
    if ps.s_length(&end) != geo.len() as u64 {
        return Err(Error::Refused(format!(
            "{} is not an S-geodesic",
            grp.format_word(geo)
        )));
    }
    let ball = Ball::new(grp, epsilon, crate::cayley::DEFAULT_BUDGET)?;
    Ok(annotate(ps, ps.path(start, geo), &ball, r))
}

/// Annotation of geodesic vertices with a precomputed ε-ball.
pub(crate) fn annotate(ps: &PeripheralStructure, vertices: Vec<Element>, eps_ball: &Ball, r: usize) -> TransitionReport {
    let grp = ps.group();
    let epsilon = eps_ball.radius();
    let n = vertices.len() - 1;
    let mut annotations = vec![Annotation::Transition; n + 1];
    if n >= 2 * r {
        for i in r..=n - r {
            let mut near = BTreeSet::new();
            for s in eps_ball.elements() {
                for c in ps.cosets_at(&grp.mul(&vertices[i], s)) {
                    near.insert(c);
                }
            }
            let deep: Vec<PeripheralCoset> = near
                .into_iter()
                .filter(|c| (i - r..=i + r).all(|j| ps.dist_to_coset(&vertices[j], c) <= epsilon as u64))
                .collect();
            if !deep.is_empty() {
                annotations[i] = Annotation::Deep(deep);
            }
        }
    }
    let mut components = Vec::new();
    let mut violations = Vec::new();
    let mut i = 0;
    while i <= n {
        if let Annotation::Deep(cs) = &annotations[i] {
            let first = i;
            let mut common: BTreeSet<&PeripheralCoset> = cs.iter().collect();
            while i < n && matches!(annotations[i + 1], Annotation::Deep(_)) {
                i += 1;
                if let Annotation::Deep(next) = &annotations[i] {
                    common.retain(|c| next.contains(c));
                }
            }
            components.push((first, i));
            if common.len() != 1 {
                violations.push(format!(
                    "deep component {first}..={i} is deep in {} common cosets",
                    common.len()
                ));
            }
        }
        i += 1;
    }
    for (i, a) in annotations.iter().enumerate() {
        if let Annotation::Deep(cs) = a {
            if cs.len() > 1 {
                violations.push(format!("vertex {i} is deep in {} cosets", cs.len()));
            }
        }
    }
    TransitionReport {
        epsilon,
        r,
        vertices,
        annotations,
        components,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::z2_star_z;
    use super::*;

    fn run(w: &str, eps: usize, r: usize) -> TransitionReport {
        let ps = z2_star_z();
        let g = ps.group().clone();
        transition_points(&ps, g.identity(), &g.parse(w).unwrap(), eps, r).unwrap()
    }

    #[test]
    fn inside_one_coset() {
        // Length 2R + 2 with R = 3.
        let rep = run("a^8", 0, 3);
        let deep: Vec<usize> = (0..=8).filter(|&i| !rep.is_transition(i)).collect();
        assert_eq!(deep, vec![3, 4, 5]);
        assert_eq!(rep.components, vec![(3, 5)]);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn short_geodesics_are_all_transition() {
        let rep = run("a^5", 1, 3);
        assert!((0..=5).all(|i| rep.is_transition(i)));
    }

    #[test]
    fn two_components() {
        let rep = run("a^8*c*a^8", 1, 3);
        assert_eq!(rep.components.len(), 2);
        let coset = |k: usize| match &rep.annotations[rep.components[k].0] {
            Annotation::Deep(cs) => cs[0].clone(),
            _ => unreachable!(),
        };
        assert_ne!(coset(0), coset(1));
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn rejects_non_geodesics() {
        let ps = z2_star_z();
        let g = ps.group().clone();
        let w = g.parse("a*b*a^-1").unwrap();
        assert!(transition_points(&ps, g.identity(), &w, 1, 3).is_err());
    }
}
