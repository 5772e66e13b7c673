//! Executable shadows of the transfer laws for bounded packing.

use std::collections::HashMap;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::handle::{Oracle, SubgroupHandle};
use super::profile::{cosets_from, family_sizes};
use crate::cayley::{reindex, Ball, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::group::{Descriptor, Element, Group};
use crate::stallings;
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Metric,
    Quotient,
    Intersection,
    Commensurability,
    Transitivity,
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Law> {
        Ok(match s {
            "metric" => Law::Metric,
            "quotient" => Law::Quotient,
            "intersection" => Law::Intersection,
            "commensurability" => Law::Commensurability,
            "transitivity" => Law::Transitivity,
            _ => return Err(Error::Malformed(format!("unknown transfer law `{s}`"))),
        })
    }
}

/// A concrete instance. Which fields are read depends on the law:
///
/// * metric: `group`, `subgroup`, `alt_group` (same group, second
///   generating set) and `alt_subgroup` (the same subgroup over it);
/// * quotient: `group`, `subgroup` (H) and `normal` (N);
/// * intersection: `group`, `subgroup` (H) and `other` (K);
/// * commensurability and transitivity: `group`, `subgroup` (H) and `other`
///   (an overgroup K of H).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawInstance {
    pub group: Descriptor,
    #[serde(default)]
    pub subgroup: Vec<String>,
    #[serde(default)]
    pub other: Vec<String>,
    #[serde(default)]
    pub normal: Vec<String>,
    #[serde(default)]
    pub alt_group: Option<Descriptor>,
    #[serde(default)]
    pub alt_subgroup: Option<Vec<String>>,
    #[serde(default = "default_d_max")]
    pub d_max: usize,
    #[serde(default = "default_radius")]
    pub radius: usize,
}

fn default_d_max() -> usize {
    5
}

fn default_radius() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawCheck {
    pub name: String,
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: Law,
    pub holds: bool,
    /// Inequalities or equalities checked, `lhs ≤ rhs` (or `lhs = rhs` for the
    /// quotient law).
    pub checks: Vec<LawCheck>,
    /// Pairs compared or edges examined.
    pub pairs: usize,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl LawReport {
    fn new(law: Law) -> Self {
        LawReport {
            law,
            holds: true,
            checks: Vec::new(),
            pairs: 0,
            violations: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn le(&mut self, name: String, lhs: u64, rhs: u64) {
        let holds = lhs <= rhs;
        if !holds {
            self.violations.push(format!("{name}: {lhs} > {rhs}"));
        }
        self.checks.push(LawCheck { name, lhs, rhs, holds });
    }

    fn finish(mut self) -> Self {
        self.holds = self.violations.is_empty();
        self
    }
}

fn words(g: &Group, ws: &[String]) -> Result<Vec<Word>> {
    ws.iter().map(|s| g.parse(s)).collect()
}

/// Family sizes `N(D)` for `D = 1..=d_max` over cosets meeting ball(r).
fn sizes(h: &SubgroupHandle, ball: &Ball, r: usize, d_max: usize) -> Result<Vec<usize>> {
    let metric = h.metric(d_max)?;
    let cosets = cosets_from(h, ball.prefix(r));
    Ok(family_sizes(&metric, cosets, d_max))
}

pub fn check_transfer_law(law: Law, inst: &LawInstance) -> Result<LawReport> {
    let g = Group::new(&inst.group)?;
    if inst.d_max == 0 {
        return Err(Error::Malformed("d_max must be at least 1".into()));
    }
    match law {
        Law::Metric => metric_law(&g, inst),
        Law::Quotient => quotient_law(&g, inst),
        Law::Intersection => intersection_law(&g, inst),
        Law::Commensurability => commensurability_law(&g, inst),
        Law::Transitivity => transitivity_law(&g, inst),
    }
}

fn metric_law(g1: &Arc<Group>, inst: &LawInstance) -> Result<LawReport> {
    let desc2 = inst
        .alt_group
        .as_ref()
        .ok_or_else(|| Error::Malformed("metric law needs `alt_group`".into()))?;
    let g2 = Group::new(desc2)?;
    let h1 = SubgroupHandle::new(g1, &words(g1, &inst.subgroup)?)?;
    let alt = inst.alt_subgroup.as_ref().unwrap_or(&inst.subgroup);
    let h2 = SubgroupHandle::new(&g2, &words(&g2, alt)?)?;
    let d = inst.d_max;
    // ρ(n) = max{|x|_1 : |x|_2 ≤ n} and the reverse comparison.
    let reach = |first: &Ball, second: &Ball, n: usize| -> Result<usize> {
        reindex(first, second, n)
            .map(|v| v as usize)
            .ok_or_else(|| Error::Refused(format!("ball too small to compute the reindexing function at {n}")))
    };
    let small1 = Ball::new(g1, d, DEFAULT_BUDGET)?;
    let small2 = Ball::new(&g2, d, DEFAULT_BUDGET)?;
    // Each generator of one set has bounded length in the other, so
    // ρ(n) ≤ n · max generator length; size balls accordingly.
    let stretch = |from: &Arc<Group>, ball: &Ball| -> Result<usize> {
        let mut m = 1;
        for l in from.letters() {
            let x = from.letter_element(l);
            m = m.max(ball.length(x).ok_or_else(|| {
                Error::Refused("a generator is not within the comparison ball".into())
            })? as usize);
        }
        Ok(m)
    };
    let big1 = Ball::new(g1, stretch(&g2, &small1)? * d, DEFAULT_BUDGET)?;
    let big2 = Ball::new(&g2, stretch(g1, &small2)? * d, DEFAULT_BUDGET)?;
    let rho: Vec<usize> = (0..=d).map(|n| reach(&big1, &big2, n)).collect::<Result<_>>()?;
    let rho12: Vec<usize> = (0..=d).map(|n| reach(&big2, &big1, n)).collect::<Result<_>>()?;
    let rho21 = rho.clone();
    let top = (1..=d)
        .map(|k| rho[k].max(rho12[k - 1] + 1).max(rho21[k - 1] + 1))
        .max()
        .unwrap();
    let r = inst.radius.max(top);
    let ball1 = Ball::new(g1, r + 1, DEFAULT_BUDGET)?;
    let ball2 = Ball::new(&g2, r + 1, DEFAULT_BUDGET)?;
    let n1 = sizes(&h1, &ball1, r, top)?;
    let n2 = sizes(&h2, &ball2, r, top)?;
    let mut rep = LawReport::new(Law::Metric);
    for k in 1..=d {
        rep.le(format!("N1({k}) <= N2(rho({k}))"), n1[k - 1] as u64, n2[rho[k] - 1] as u64);
        rep.le(
            format!("N1({k}) <= N2(rho12({})+1)", k - 1),
            n1[k - 1] as u64,
            n2[rho12[k - 1]] as u64,
        );
        rep.le(
            format!("N2({k}) <= N1(rho21({})+1)", k - 1),
            n2[k - 1] as u64,
            n1[rho21[k - 1]] as u64,
        );
    }
    rep.notes.push(format!("rho = {:?}", &rho[1..]));
    rep.notes.push(format!("N1 = {n1:?}"));
    rep.notes.push(format!("N2 = {n2:?}"));
    rep.pairs = n1.len() + n2.len();
    Ok(rep.finish())
}

fn quotient_law(g: &Arc<Group>, inst: &LawInstance) -> Result<LawReport> {
    let hw = words(g, &inst.subgroup)?;
    let nw = words(g, &inst.normal)?;
    let mut hn_gens = hw.clone();
    hn_gens.extend(nw.iter().cloned());
    let hn = SubgroupHandle::new(g, &hn_gens)?;
    let q = Group::quotient(g, &nw)?;
    let hbar = SubgroupHandle::new(&q, &hw)?;
    let r = inst.radius;
    let ball = Ball::new(g, r, DEFAULT_BUDGET)?;
    let mg = hn.metric(2 * r)?;
    let mq = hbar.metric(2 * r)?;
    let mut rep = LawReport::new(Law::Quotient);
    let elems = ball.elements();
    let proj: Vec<Element> = elems.iter().map(|x| q.project(x)).collect::<Result<_>>()?;
    for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            let a = mg.distance(&elems[i], &elems[j]);
            let b = mq.distance(&proj[i], &proj[j]);
            rep.pairs += 1;
            if !(a.exact && b.exact) {
                return Err(Error::Refused(format!(
                    "coset distance between {} and {} is not certified",
                    g.format(&elems[i]),
                    g.format(&elems[j])
                )));
            }
            if a.value != b.value {
                rep.violations.push(format!(
                    "d(xHN, yHN) = {} but d(xH', yH') = {} for x = {}, y = {}",
                    a.value,
                    b.value,
                    g.format(&elems[i]),
                    g.format(&elems[j])
                ));
            }
        }
    }
    rep.checks.push(LawCheck {
        name: "distance mismatches".into(),
        lhs: rep.violations.len() as u64,
        rhs: 0,
        holds: rep.violations.is_empty(),
    });
    Ok(rep.finish())
}

/// Generators of `H ∩ K` where an oracle can compute them.
fn intersection_handle(h: &SubgroupHandle, k: &SubgroupHandle) -> Result<SubgroupHandle> {
    let g = h.group();
    let gens: Vec<Word> = match (h.oracle(), k.oracle()) {
        (Oracle::Stallings { core: a, .. }, Oracle::Stallings { core: b, .. }) => {
            stallings::intersection(a, b).basis()
        }
        (Oracle::Lattice(a), Oracle::Lattice(b)) if g.abelian_modulus().is_some_and(|(_, m)| m.is_none()) => a
            .intersect(b)?
            .basis()
            .iter()
            .map(|v| g.render(&Element::Abelian(v.clone())))
            .collect(),
        _ => {
            return Err(Error::Unsupported(
                "intersection law needs two Stallings or two lattice oracles".into(),
            ))
        }
    };
    SubgroupHandle::new(g, &gens)
}

fn intersection_law(g: &Arc<Group>, inst: &LawInstance) -> Result<LawReport> {
    let h = SubgroupHandle::new(g, &words(g, &inst.subgroup)?)?;
    let k = SubgroupHandle::new(g, &words(g, &inst.other)?)?;
    let l = intersection_handle(&h, &k)?;
    let r = inst.radius;
    let d = inst.d_max;
    let ball = Ball::new(g, r, DEFAULT_BUDGET)?;
    let hs: Vec<Element> = ball.elements().iter().filter(|x| h.member(x)).cloned().collect();
    let lcosets = cosets_from(&l, &hs);
    let mut rep = LawReport::new(Law::Intersection);
    // Injectivity of hL ↦ hK.
    let mut image: HashMap<Element, usize> = HashMap::new();
    for (i, c) in lcosets.iter().enumerate() {
        if let Some(j) = image.insert(k.coset_key(&c.element), i) {
            rep.violations.push(format!(
                "{} and {} give the same K-coset",
                g.format(&lcosets[j].element),
                g.format(&c.element)
            ));
        }
    }
    let ml = l.metric(2 * r)?;
    let mk = k.metric(2 * r)?;
    let mut edges = 0u64;
    let mut kept = 0u64;
    for i in 0..lcosets.len() {
        for j in i + 1..lcosets.len() {
            rep.pairs += 1;
            let dl = ml.distance(&lcosets[i].element, &lcosets[j].element);
            if !dl.exact || dl.value as usize >= d {
                continue;
            }
            edges += 1;
            let dk = mk.distance(&lcosets[i].element, &lcosets[j].element);
            if dk.exact && dk.value <= dl.value {
                kept += 1;
            } else {
                rep.violations.push(format!(
                    "edge {} -- {} at distance {} lost (K-distance {})",
                    g.format(&lcosets[i].element),
                    g.format(&lcosets[j].element),
                    dl.value,
                    dk.value
                ));
            }
        }
    }
    rep.checks.push(LawCheck {
        name: "closeness edges preserved".into(),
        lhs: edges,
        rhs: kept,
        holds: edges == kept,
    });
    let ball1 = Ball::new(g, r + 1, DEFAULT_BUDGET)?;
    let nl = sizes(&l, &ball1, r, d)?;
    rep.notes.push(format!(
        "H ∩ K generated by [{}]",
        l.generators().iter().map(|w| g.format_word(w)).collect::<Vec<_>>().join(", ")
    ));
    rep.notes.push(format!("N(H ∩ K) = {nl:?}"));
    rep.notes.push(format!(
        "ball sizes = {:?}",
        (0..d).map(|k| ball1.size_at(k)).collect::<Vec<_>>()
    ));
    Ok(rep.finish())
}

fn overgroup(g: &Arc<Group>, inst: &LawInstance) -> Result<(SubgroupHandle, SubgroupHandle)> {
    let h = SubgroupHandle::new(g, &words(g, &inst.subgroup)?)?;
    let k = SubgroupHandle::new(g, &words(g, &inst.other)?)?;
    for w in h.generators() {
        if !k.member(&g.eval(w)) {
            return Err(Error::Malformed(format!(
                "{} is not in the overgroup",
                g.format_word(w)
            )));
        }
    }
    Ok((h, k))
}

/// `d(x, H)` as the least `|s|` with `x s ∈ H`, scanning a ball.
fn dist_to(h: &SubgroupHandle, ball: &Ball, x: &Element) -> Option<u32> {
    let g = h.group();
    (0..ball.len()).find(|&i| h.member(&g.mul(x, ball.element(i)))).map(|i| ball.dist_at(i))
}

fn commensurability_law(g: &Arc<Group>, inst: &LawInstance) -> Result<LawReport> {
    // H ≤ K with finite index: K lies in the C-neighbourhood of H, so
    // distinct K-cosets that are pairwise < D apart give distinct H-cosets
    // pairwise < D + 2C apart.
    let (h, k) = overgroup(g, inst)?;
    let r = inst.radius;
    let d = inst.d_max;
    let ball = Ball::new(g, r, DEFAULT_BUDGET)?;
    let mut c = 0;
    for x in ball.elements().iter().filter(|x| k.member(x)) {
        let v = dist_to(&h, &ball, x)
            .ok_or_else(|| Error::Refused("H is not within the ball's reach of K; index too large".into()))?;
        c = c.max(v as usize);
    }
    let top = d + 2 * c;
    let big = Ball::new(g, r.max(top) + 1, DEFAULT_BUDGET)?;
    let rr = r.max(top);
    let nk = sizes(&k, &big, rr, d)?;
    let nh = sizes(&h, &big, rr, top)?;
    let mut rep = LawReport::new(Law::Commensurability);
    for dd in 1..=d {
        rep.le(
            format!("N_K({dd}) <= N_H({dd}+2C)"),
            nk[dd - 1] as u64,
            nh[dd + 2 * c - 1] as u64,
        );
    }
    rep.pairs = nk.len() + nh.len();
    rep.notes.push(format!("C = {c}"));
    rep.notes.push(format!("N_K = {nk:?}"));
    rep.notes.push(format!("N_H = {nh:?}"));
    Ok(rep.finish())
}

fn transitivity_law(g: &Arc<Group>, inst: &LawInstance) -> Result<LawReport> {
    // H ≤ K: a close family of H-cosets meets at most N(G,K,D) cosets of K,
    // and inside one K-coset at most N(K,H,D) of them (K with the metric
    // restricted from G).
    let (h, k) = overgroup(g, inst)?;
    let r = inst.radius;
    let d = inst.d_max;
    let ball = Ball::new(g, r, DEFAULT_BUDGET)?;
    let nh = sizes(&h, &ball, r, d)?;
    let nk = sizes(&k, &ball, r, d)?;
    let inside: Vec<Element> = ball.elements().iter().filter(|x| k.member(x)).cloned().collect();
    let metric = h.metric(d)?;
    let nkh = family_sizes(&metric, cosets_from(&h, &inside), d);
    let mut rep = LawReport::new(Law::Transitivity);
    for dd in 1..=d {
        rep.le(
            format!("N(G,H,{dd}) <= N(G,K,{dd}) * N(K,H,{dd})"),
            nh[dd - 1] as u64,
            (nk[dd - 1] * nkh[dd - 1]) as u64,
        );
    }
    rep.pairs = 3 * d;
    rep.notes.push(format!("N(G,H) = {nh:?}"));
    rep.notes.push(format!("N(G,K) = {nk:?}"));
    rep.notes.push(format!("N(K,H) = {nkh:?}"));
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2(gens: Option<Vec<Vec<i64>>>) -> Descriptor {
        Descriptor::FreeAbelian {
            rank: 2,
            generators: gens,
            labels: None,
        }
    }

    fn inst(group: Descriptor) -> LawInstance {
        LawInstance {
            group,
            subgroup: Vec::new(),
            other: Vec::new(),
            normal: Vec::new(),
            alt_group: None,
            alt_subgroup: None,
            d_max: 5,
            radius: 8,
        }
    }

    #[test]
    fn unknown_law() {
        assert!("metrics".parse::<Law>().is_err());
        assert_eq!("quotient".parse::<Law>().unwrap(), Law::Quotient);
    }

    #[test]
    fn metric_law_on_z2() {
        let mut i = inst(z2(None));
        i.alt_group = Some(z2(Some(vec![vec![1, 0], vec![0, 1], vec![1, 1]])));
        i.subgroup = vec!["a".into()];
        let rep = check_transfer_law(Law::Metric, &i).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert_eq!(rep.notes[0], "rho = [2, 4, 6, 8, 10]");
    }

    #[test]
    fn quotient_law_on_z2() {
        let mut i = inst(z2(None));
        i.subgroup = vec!["a^2".into()];
        i.normal = vec!["b".into()];
        i.radius = 4;
        let rep = check_transfer_law(Law::Quotient, &i).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert_eq!(rep.pairs, 41 * 40 / 2);
    }

    #[test]
    fn intersection_law_on_axes() {
        let mut i = inst(z2(None));
        i.subgroup = vec!["a".into()];
        i.other = vec!["b".into()];
        i.radius = 6;
        let rep = check_transfer_law(Law::Intersection, &i).unwrap();
        assert!(rep.holds, "{rep:?}");
        // 13 points of the axis; pairs at distance < 5 are |i - j| ≤ 4.
        assert_eq!(rep.checks[0].lhs, (1..=4).map(|k| 13 - k).sum::<u64>());
    }

    #[test]
    fn commensurability_and_transitivity() {
        let mut i = inst(z2(None));
        i.subgroup = vec!["a^2".into()];
        i.other = vec!["a".into()];
        i.radius = 6;
        let rep = check_transfer_law(Law::Commensurability, &i).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert_eq!(rep.notes[0], "C = 1");
        let rep = check_transfer_law(Law::Transitivity, &i).unwrap();
        assert!(rep.holds, "{rep:?}");
    }

    #[test]
    fn free_group_intersection() {
        let mut i = inst(Descriptor::Free { rank: 2, labels: None });
        i.subgroup = vec!["a".into(), "b^2".into()];
        i.other = vec!["a^2".into(), "b".into()];
        i.radius = 4;
        i.d_max = 3;
        let rep = check_transfer_law(Law::Intersection, &i).unwrap();
        assert!(rep.holds, "{rep:?}");
    }
}
