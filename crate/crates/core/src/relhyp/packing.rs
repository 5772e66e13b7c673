//! Packing profiles with each maximal family classified as gathering
//! around a common point or along a peripheral coset.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{PeripheralCoset, PeripheralLabel, PeripheralStructure};
use crate::cayley::{Ball, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::group::Element;
use crate::packing::{packing_profile, Coset, Mode, Oracle, PackingProfile, ProfileOptions, SubgroupHandle};
use crate::word::Word;

#[derive(Clone, Debug)]
pub struct RelPackingOptions {
    pub step: usize,
    pub mode: Mode,
    pub budget: usize,
    /// Largest closeness accepted for a peripheral coset; defaults to
    /// `D_max + 2`.
    pub m_max: Option<u64>,
    /// Power `T` of the generators used to probe how far a coset runs along
    /// a peripheral coset; defaults to `2·m_max + 2`.
    pub power: Option<i64>,
}

impl Default for RelPackingOptions {
    fn default() -> Self {
        RelPackingOptions {
            step: 1,
            mode: Mode::Anchored,
            budget: DEFAULT_BUDGET,
            m_max: None,
            power: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommonPointWitness {
    /// `point · shift` lies in the member coset.
    pub shift: Word,
    pub distance: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeripheralWitness {
    /// Index of the generator `w` of `H` whose powers `a·w^{±T}` lie close
    /// to the coset.
    pub generator: usize,
    pub plus: u64,
    pub minus: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelPackingOutcome {
    CommonPoint {
        point: Element,
        m: u64,
        /// One per family member.
        witnesses: Vec<CommonPointWitness>,
    },
    Peripheral {
        coset: PeripheralCoset,
        m: u64,
        unique: bool,
        /// Other enumerated cosets passing the same test.
        others: Vec<PeripheralCoset>,
        power: i64,
        witnesses: Vec<PeripheralWitness>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeJson {
    CommonPoint {
        point: String,
        m: u64,
        witnesses: Vec<(String, u64)>,
    },
    Peripheral {
        coset: PeripheralLabel,
        m: u64,
        unique: bool,
        others: Vec<PeripheralLabel>,
        power: i64,
        witnesses: Vec<PeripheralWitness>,
    },
}

impl RelPackingOutcome {
    pub fn m(&self) -> u64 {
        match self {
            RelPackingOutcome::CommonPoint { m, .. } | RelPackingOutcome::Peripheral { m, .. } => *m,
        }
    }

    pub fn to_json(&self, ps: &PeripheralStructure) -> OutcomeJson {
        let g = ps.group();
        match self {
            RelPackingOutcome::CommonPoint { point, m, witnesses } => OutcomeJson::CommonPoint {
                point: g.format(point),
                m: *m,
                witnesses: witnesses.iter().map(|w| (g.format_word(&w.shift), w.distance)).collect(),
            },
            RelPackingOutcome::Peripheral {
                coset,
                m,
                unique,
                others,
                power,
                witnesses,
            } => OutcomeJson::Peripheral {
                coset: ps.label(coset),
                m: *m,
                unique: *unique,
                others: others.iter().map(|c| ps.label(c)).collect(),
                power: *power,
                witnesses: witnesses.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelOutcomeRow {
    pub d: usize,
    pub outcome: RelPackingOutcome,
    /// Whether every certificate of the outcome re-verified independently.
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelPackingProfile {
    pub profile: PackingProfile,
    pub m_max: u64,
    pub rows: Vec<RelOutcomeRow>,
}

fn check_oracle(h: &SubgroupHandle) -> Result<()> {
    match h.oracle() {
        Oracle::FreeFactor { .. } | Oracle::Cyclic { .. } | Oracle::Whole | Oracle::Trivial => Ok(()),
        _ => Err(Error::Refused(format!(
            "no oracle for the intersections H ∩ gPg^-1 with peripheral conjugates is available for the {} oracle",
            h.oracle_name()
        ))),
    }
}

struct Classifier<'a> {
    ps: &'a PeripheralStructure,
    h: &'a SubgroupHandle,
    gens: Vec<(usize, Element)>,
    ball: Ball,
    m_max: u64,
    power: i64,
}

impl Classifier<'_> {
    /// `d_S(p, aH)` with a shortest shift, searched inside the ball.
    fn dist(&self, p: &Element, a: &Element, limit: u64) -> Option<(u64, Word)> {
        let grp = self.ps.group();
        // p s ∈ aH  iff  a^-1 p s ∈ H.
        let q = grp.mul(&grp.inv(a), p);
        let end = self.ball.size_at((limit as usize).min(self.ball.radius()));
        (0..end)
            .find(|&i| self.h.member(&grp.mul(&q, self.ball.element(i))))
            .map(|i| (self.ball.dist_at(i) as u64, self.ball.word_at(i)))
    }

    /// Whether the coset `c` equals the member coset `aH`.
    fn is_member(&self, c: &PeripheralCoset, a: &Element) -> bool {
        match self.h.oracle() {
            Oracle::FreeFactor { side, sub } => {
                let f = self.ps.factor(*side);
                *side == c.factor
                    && (0..f.ngens()).all(|i| sub.member(f.generator(i)))
                    && self.ps.coset(a, *side) == *c
            }
            _ => false,
        }
    }

    fn probes(&self, a: &Element, w: &Element) -> [Element; 2] {
        let grp = self.ps.group();
        [
            grp.mul(a, &grp.pow(w, self.power)),
            grp.mul(a, &grp.pow(w, -self.power)),
        ]
    }

    /// Best generator witness for `c` against member `a`.
    fn peripheral_witness(&self, c: &PeripheralCoset, a: &Element) -> Option<PeripheralWitness> {
        self.gens
            .iter()
            .map(|(j, w)| {
                let [p, q] = self.probes(a, w);
                PeripheralWitness {
                    generator: *j,
                    plus: self.ps.dist_to_coset(&p, c),
                    minus: self.ps.dist_to_coset(&q, c),
                }
            })
            .min_by_key(|w| (w.plus.max(w.minus), w.generator))
    }

    fn classify(&self, family: &[Coset]) -> RelPackingOutcome {
        let grp = self.ps.group();
        // Cosets near both far probes of some generator at the first member.
        let mut candidates = BTreeSet::new();
        let near = self.ball.prefix(self.m_max as usize);
        for (_, w) in &self.gens {
            let [p, q] = self.probes(&family[0].element, w);
            let around = |x: &Element| -> BTreeSet<PeripheralCoset> {
                near.iter().flat_map(|s| self.ps.cosets_at(&grp.mul(x, s))).collect()
            };
            let qs = around(&q);
            candidates.extend(around(&p).into_iter().filter(|c| qs.contains(c)));
        }
        let mut passing: Vec<(u64, PeripheralCoset, Vec<PeripheralWitness>)> = Vec::new();
        for c in candidates {
            if family.iter().any(|f| self.is_member(&c, &f.element)) {
                continue;
            }
            let Some(ws) = family
                .iter()
                .map(|f| self.peripheral_witness(&c, &f.element))
                .collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            let m = ws.iter().map(|w| w.plus.max(w.minus)).max().unwrap_or(0);
            if m <= self.m_max {
                passing.push((m, c, ws));
            }
        }
        passing.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        if let Some((m, coset, witnesses)) = passing.first().cloned() {
            return RelPackingOutcome::Peripheral {
                coset,
                m,
                unique: passing.len() == 1,
                others: passing[1..].iter().map(|p| p.1.clone()).collect(),
                power: self.power,
                witnesses,
            };
        }
        // Common point among the vertices of geodesics between members.
        let mut points: Vec<Element> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, a) in family.iter().enumerate() {
            for b in &family[i..] {
                for v in self.ps.s_geodesic(&a.element, &b.element).1 {
                    if seen.insert(v.clone()) {
                        points.push(v);
                    }
                }
            }
        }
        let mut best: Option<(u64, Element, Vec<CommonPointWitness>)> = None;
        for p in points {
            let limit = best.as_ref().map_or(self.ball.radius() as u64, |b| b.0);
            let mut ws = Vec::new();
            for f in family {
                match self.dist(&p, &f.element, limit) {
                    Some((d, shift)) => ws.push(CommonPointWitness { shift, distance: d }),
                    None => break,
                }
            }
            if ws.len() < family.len() {
                continue;
            }
            let m = ws.iter().map(|w| w.distance).max().unwrap_or(0);
            if best.as_ref().is_none_or(|b| m < b.0) {
                best = Some((m, p, ws));
            }
        }
        match best {
            Some((m, point, witnesses)) => RelPackingOutcome::CommonPoint { point, m, witnesses },
            None => {
                // Nothing inside the ball: fall back to the first member's
                // representative with normal-word witnesses.
                let p = family[0].element.clone();
                let witnesses: Vec<CommonPointWitness> = family
                    .iter()
                    .map(|f| {
                        let shift = grp.render(&grp.mul(&grp.inv(&p), &f.element));
                        CommonPointWitness {
                            distance: shift.len() as u64,
                            shift,
                        }
                    })
                    .collect();
                let m = witnesses.iter().map(|w| w.distance).max().unwrap_or(0);
                RelPackingOutcome::CommonPoint {
                    point: p,
                    m,
                    witnesses,
                }
            }
        }
    }

    /// Re-checks every certificate from scratch.
    fn verify(&self, family: &[Coset], outcome: &RelPackingOutcome, profile_row: &crate::packing::ProfileRow) -> bool {
        let grp = self.ps.group();
        match outcome {
            RelPackingOutcome::CommonPoint { point, m, witnesses } => {
                if witnesses.len() != family.len() {
                    return false;
                }
                let ok = family.iter().zip(witnesses).all(|(f, w)| {
                    let x = grp.mul(point, &grp.eval(&w.shift));
                    self.h.same_coset(&x, &f.element) && w.shift.len() as u64 == w.distance && w.distance <= *m
                });
                // Pairwise coset distances cannot exceed the route through
                // the point.
                ok && profile_row.distances.iter().all(|pc| {
                    pc.cert.value <= witnesses[pc.i].distance + witnesses[pc.j].distance || !pc.cert.exact
                })
            }
            RelPackingOutcome::Peripheral {
                coset,
                m,
                others,
                power,
                witnesses,
                ..
            } => {
                let check = |c: &PeripheralCoset, ws: Option<&Vec<PeripheralWitness>>| {
                    family.iter().enumerate().all(|(i, f)| {
                        let best = self
                            .gens
                            .iter()
                            .map(|(j, w)| {
                                let p = grp.mul(&f.element, &grp.pow(w, *power));
                                let q = grp.mul(&f.element, &grp.pow(w, -*power));
                                let ok = self.h.same_coset(&p, &f.element) && self.h.same_coset(&q, &f.element);
                                let (dp, dq) = (self.ps.dist_to_coset(&p, c), self.ps.dist_to_coset(&q, c));
                                if let Some(ws) = ws {
                                    if ws[i].generator == *j && (ws[i].plus, ws[i].minus) != (dp, dq) {
                                        return u64::MAX;
                                    }
                                }
                                if ok {
                                    dp.max(dq)
                                } else {
                                    u64::MAX
                                }
                            })
                            .min()
                            .unwrap_or(u64::MAX);
                        best <= *m.max(&self.m_max)
                    })
                };
                witnesses.len() == family.len()
                    && witnesses.iter().all(|w| w.plus.max(w.minus) <= *m)
                    && check(coset, Some(witnesses))
                    && others.iter().all(|c| check(c, None))
            }
        }
    }
}

/// Packing profile of `H` with the point/peripheral classification of each
/// maximal family.
pub fn rel_packing_profile(
    ps: &PeripheralStructure,
    h: &SubgroupHandle,
    d_max: usize,
    r: usize,
    opts: &RelPackingOptions,
) -> Result<RelPackingProfile> {
    if h.group().descriptor() != ps.group().descriptor() {
        return Err(Error::Malformed("subgroup lives in a different group".into()));
    }
    check_oracle(h)?;
    let profile = packing_profile(
        h,
        d_max,
        r,
        &ProfileOptions {
            step: opts.step,
            mode: opts.mode,
            budget: opts.budget,
            center: None,
        },
    )?;
    let grp = ps.group();
    let m_max = opts.m_max.unwrap_or(d_max as u64 + 2);
    let power = opts.power.unwrap_or(2 * m_max as i64 + 2);
    let gens = h
        .generators()
        .iter()
        .enumerate()
        .map(|(j, w)| (j, grp.eval(w)))
        .filter(|(_, x)| !grp.is_identity(x))
        .collect();
    let classifier = Classifier {
        ps,
        h,
        gens,
        ball: Ball::new(grp, r.max(m_max as usize), opts.budget)?,
        m_max,
        power,
    };
    let rows = profile
        .rows
        .iter()
        .map(|row| {
            let outcome = classifier.classify(&row.family);
            let verified = classifier.verify(&row.family, &outcome, row);
            RelOutcomeRow {
                d: row.d,
                outcome,
                verified,
            }
        })
        .collect();
    Ok(RelPackingProfile { profile, m_max, rows })
}
