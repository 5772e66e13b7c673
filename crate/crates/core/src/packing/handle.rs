//! Subgroups together with a membership oracle and a coset metric.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::cayley::{Ball, DistanceCert, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::lattice::Lattice;
use crate::stallings::{CoreGraph, DoubleCosetOracle};
use crate::word::{self, Word};

/// How membership and coset distances are decided.
#[derive(Clone, Debug)]
pub enum Oracle {
    /// Folded graph in a free group.
    Stallings { core: CoreGraph, tree: Vec<Word> },
    /// Subgroup of Z^r (or of a lattice quotient), given by the lattice of
    /// coordinate vectors it covers.
    Lattice(Lattice),
    /// Subgroup of a finite table.
    Table { members: Vec<bool>, normal: bool },
    /// Subgroup inside one factor of a direct product.
    DirectFactor { side: usize, sub: Box<SubgroupHandle> },
    /// Subgroup inside one factor of a free product.
    FreeFactor { side: usize, sub: Box<SubgroupHandle> },
    /// `⟨w⟩` in a free product with `w` cyclically reduced of syllable
    /// length at least two.
    Cyclic { w: Element, syllables: usize },
    Whole,
    Trivial,
    /// Elements of `H` found inside a ball; decisions are trustworthy only
    /// inside that ball.
    Enumerative { radius: usize, members: HashSet<Element> },
}

#[derive(Clone, Debug)]
pub struct SubgroupHandle {
    group: Arc<Group>,
    gens: Vec<Word>,
    oracle: Oracle,
}

fn syllables(x: &Element) -> &[(u8, Element)] {
    match x {
        Element::FreeProd(s) => s,
        _ => panic!("expected a free-product element"),
    }
}

fn pair(x: &Element) -> (&Element, &Element) {
    match x {
        Element::Pair(a, b) => (a, b),
        _ => panic!("expected a direct-product element"),
    }
}

/// Lowers a word of a product backend to the factor words of `side`, or
/// `None` when it uses letters of the other factor.
fn factor_word(g: &Group, w: &[crate::word::Letter], side: usize) -> Option<Word> {
    let mut out = Vec::new();
    for &l in w {
        let (s, fl) = g.split_letter(l)?;
        if s != side {
            return None;
        }
        out.push(fl);
    }
    Some(out)
}

impl SubgroupHandle {
    /// Chooses the strongest available oracle for `⟨gens⟩`.
    pub fn new(group: &Arc<Group>, gens: &[Word]) -> Result<SubgroupHandle> {
        for w in gens {
            if let Some(l) = w.iter().find(|l| l.gen() >= group.ngens()) {
                return Err(Error::UnknownLetter(format!("generator index {}", l.gen())));
            }
        }
        let gens: Vec<Word> = gens.to_vec();
        let nontrivial: Vec<&Word> = gens.iter().filter(|w| !group.is_identity(&group.eval(w))).collect();
        let oracle = if nontrivial.is_empty() {
            Oracle::Trivial
        } else if let Some(rank) = group.free_rank() {
            let core = CoreGraph::fold(rank, &gens);
            let tree = core.tree_words();
            if core.is_covering() && core.num_vertices() == 1 {
                Oracle::Whole
            } else {
                Oracle::Stallings { core, tree }
            }
        } else if let Some((rank, modulus)) = group.abelian_modulus() {
            let mut vecs: Vec<Vec<i64>> = modulus.map(|l| l.basis().to_vec()).unwrap_or_default();
            for w in &gens {
                let Element::Abelian(v) = group.eval(w) else { unreachable!() };
                vecs.push(v);
            }
            Oracle::Lattice(Lattice::new(rank, &vecs)?)
        } else if let Some(elems) = group.finite_elements() {
            let n = elems.len();
            let mut members = vec![false; n];
            let id = match group.identity() {
                Element::Finite(i) => *i as usize,
                _ => unreachable!(),
            };
            members[id] = true;
            let gen_elems: Vec<Element> = gens.iter().map(|w| group.eval(w)).collect();
            let mut stack = vec![group.identity().clone()];
            while let Some(x) = stack.pop() {
                for g in &gen_elems {
                    for y in [group.mul(&x, g), group.mul(&x, &group.inv(g))] {
                        let Element::Finite(i) = y else { unreachable!() };
                        if !members[i as usize] {
                            members[i as usize] = true;
                            stack.push(y);
                        }
                    }
                }
            }
            let normal = (0..n).filter(|&h| members[h]).all(|h| {
                elems.iter().all(|g| {
                    let c = group.conj(g, &elems[h]);
                    let Element::Finite(i) = c else { unreachable!() };
                    members[i as usize]
                })
            });
            if members.iter().all(|&m| m) {
                Oracle::Whole
            } else {
                Oracle::Table { members, normal }
            }
        } else if let Some((left, right)) = group.factors() {
            let direct = group.is_direct_product();
            let mut oracle = None;
            for (side, factor) in [(0usize, left), (1usize, right)] {
                let lowered: Option<Vec<Word>> = gens.iter().map(|w| factor_word(group, w, side)).collect();
                if let Some(lowered) = lowered {
                    let sub = SubgroupHandle::new(factor, &lowered)?;
                    oracle = Some(if direct {
                        Oracle::DirectFactor { side, sub: Box::new(sub) }
                    } else {
                        Oracle::FreeFactor { side, sub: Box::new(sub) }
                    });
                    break;
                }
            }
            match oracle {
                Some(o) => o,
                None => {
                    let all_gens = group.letters().iter().filter(|l| !l.is_inverse()).all(|&l| {
                        let e = group.letter_element(l);
                        gens.iter().any(|w| group.eval(w) == *e)
                    });
                    if all_gens {
                        Oracle::Whole
                    } else if !direct && nontrivial.len() == 1 {
                        let w = group.eval(nontrivial[0]);
                        let s = syllables(&w);
                        let cyclic = s.len() >= 2 && s.first().map(|x| x.0) != s.last().map(|x| x.0);
                        if cyclic {
                            Oracle::Cyclic {
                                syllables: s.len(),
                                w,
                            }
                        } else {
                            return Err(Error::Unsupported(format!(
                                "cyclic subgroup generator {} is not cyclically reduced; conjugate it first or use an enumerative oracle",
                                group.format_word(nontrivial[0])
                            )));
                        }
                    } else {
                        return Err(Error::Unsupported(
                            "no exact membership oracle for this subgroup of a product; use an enumerative oracle".into(),
                        ));
                    }
                }
            }
        } else {
            return Err(Error::Unsupported(
                "no exact membership oracle for subgroups of this backend; use an enumerative oracle".into(),
            ));
        };
        Ok(SubgroupHandle {
            group: group.clone(),
            gens,
            oracle,
        })
    }

    /// Fallback oracle: the elements of `H` reachable from the identity by
    /// generator steps that stay inside the ball of radius `radius`.
    pub fn enumerative(group: &Arc<Group>, gens: &[Word], radius: usize, budget: usize) -> Result<SubgroupHandle> {
        let ball = Ball::new(group, radius, budget)?;
        let gen_elems: Vec<Element> = gens.iter().map(|w| group.eval(w)).collect();
        let mut members: HashSet<Element> = HashSet::from([group.identity().clone()]);
        let mut stack = vec![group.identity().clone()];
        while let Some(x) = stack.pop() {
            for g in &gen_elems {
                for y in [group.mul(&x, g), group.mul(&x, &group.inv(g))] {
                    if ball.index_of(&y).is_some() && members.insert(y.clone()) {
                        stack.push(y);
                    }
                }
            }
        }
        Ok(SubgroupHandle {
            group: group.clone(),
            gens: gens.to_vec(),
            oracle: Oracle::Enumerative { radius, members },
        })
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn generators(&self) -> &[Word] {
        &self.gens
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn oracle_name(&self) -> &'static str {
        match self.oracle {
            Oracle::Stallings { .. } => "stallings",
            Oracle::Lattice(_) => "lattice",
            Oracle::Table { .. } => "table",
            Oracle::DirectFactor { .. } => "direct_factor",
            Oracle::FreeFactor { .. } => "free_factor",
            Oracle::Cyclic { .. } => "cyclic",
            Oracle::Whole => "whole",
            Oracle::Trivial => "trivial",
            Oracle::Enumerative { .. } => "enumerative",
        }
    }

    /// False for the enumerative fallback, whose answers only hold inside
    /// its ball.
    pub fn is_exact(&self) -> bool {
        match &self.oracle {
            Oracle::Enumerative { .. } => false,
            Oracle::DirectFactor { sub, .. } | Oracle::FreeFactor { sub, .. } => sub.is_exact(),
            _ => true,
        }
    }

    pub fn core(&self) -> Option<&CoreGraph> {
        match &self.oracle {
            Oracle::Stallings { core, .. } => Some(core),
            _ => None,
        }
    }

    /// Whether `H` is normal, when the oracle can tell without search.
    pub fn is_normal_known(&self) -> Option<bool> {
        match &self.oracle {
            Oracle::Lattice(_) | Oracle::Whole | Oracle::Trivial => Some(true),
            Oracle::Table { normal, .. } => Some(*normal),
            Oracle::DirectFactor { sub, .. } => sub.is_normal_known(),
            Oracle::Stallings { core, .. } => {
                if !core.is_covering() {
                    return Some(false);
                }
                let letters = word::alphabet(core.rank_of_ambient());
                Some(core.basis().iter().all(|b| {
                    letters.iter().all(|&l| {
                        let mut c = vec![l];
                        c.extend_from_slice(b);
                        c.push(l.inverse());
                        core.member(&c)
                    })
                }))
            }
            Oracle::FreeFactor { sub, .. } => match sub.oracle {
                Oracle::Trivial => Some(true),
                _ => Some(false),
            },
            Oracle::Cyclic { .. } => Some(false),
            Oracle::Enumerative { .. } => None,
        }
    }

    /// Canonical label of the coset `gH`: two elements get the same key iff
    /// they lie in the same coset.
    pub fn coset_key(&self, g: &Element) -> Element {
        let grp = &self.group;
        match &self.oracle {
            Oracle::Stallings { core, tree } => {
                let Element::Free(w) = g else { unreachable!() };
                let gi = word::inverse_word(w);
                let (c, read) = core.read_prefix(0, &gi);
                let mut p = tree[c].clone();
                p.extend_from_slice(&gi[read..]);
                Element::Free(word::inverse_word(&word::reduce(&p)))
            }
            Oracle::Lattice(l) => {
                let Element::Abelian(v) = g else { unreachable!() };
                Element::Abelian(l.reduce(v))
            }
            Oracle::Table { members, .. } => {
                let best = members
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m)
                    .map(|(h, _)| match grp.mul(g, &Element::Finite(h as u32)) {
                        Element::Finite(i) => i,
                        _ => unreachable!(),
                    })
                    .min()
                    .unwrap();
                Element::Finite(best)
            }
            Oracle::DirectFactor { side, sub } => {
                let (a, b) = pair(g);
                if *side == 0 {
                    Element::Pair(Box::new(sub.coset_key(a)), Box::new(b.clone()))
                } else {
                    Element::Pair(Box::new(a.clone()), Box::new(sub.coset_key(b)))
                }
            }
            Oracle::FreeFactor { side, sub } => {
                let s = syllables(g);
                match s.last() {
                    Some((f, x)) if *f as usize == *side => {
                        let k = sub.coset_key(x);
                        let mut out: Vec<(u8, Element)> = s[..s.len() - 1].to_vec();
                        if k != sub.coset_key(sub.group.identity()) {
                            out.push((*f, k));
                        }
                        Element::FreeProd(out)
                    }
                    _ => g.clone(),
                }
            }
            Oracle::Cyclic { w, .. } => {
                // Beyond the cancellation range each further power adds a
                // full period, so the minimum lies inside it.
                right_range(grp, g, w)
                    .into_iter()
                    .map(|m| grp.mul(g, &grp.pow(w, m)))
                    .min_by(|x, y| (syllables(x).len(), x).cmp(&(syllables(y).len(), y)))
                    .unwrap()
            }
            Oracle::Whole => grp.identity().clone(),
            Oracle::Trivial => g.clone(),
            Oracle::Enumerative { members, .. } => members.iter().map(|h| grp.mul(g, h)).min().unwrap(),
        }
    }

    pub fn member(&self, x: &Element) -> bool {
        self.coset_key(x) == self.coset_key(self.group.identity())
    }

    pub fn same_coset(&self, x: &Element, y: &Element) -> bool {
        self.coset_key(x) == self.coset_key(y)
    }

    /// Distance structure for coset queries. `radius` bounds the balls used
    /// by ball-backed routes; distances beyond it come back inexact.
    pub fn metric(&self, radius: usize) -> Result<CosetMetric<'_>> {
        let grp = &self.group;
        let route = match &self.oracle {
            Oracle::Stallings { core, .. } => Route::Stallings(DoubleCosetOracle::new(core, core)),
            Oracle::Lattice(_) | Oracle::Whole | Oracle::Trivial => normal_route(self, radius)?,
            Oracle::Table { normal: true, .. } => normal_route(self, radius)?,
            Oracle::Table { members, normal: false } => {
                let order = members.len();
                let ball = Ball::new(grp, order, DEFAULT_BUDGET)?;
                let hs = members
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m)
                    .map(|(i, _)| Element::Finite(i as u32))
                    .collect();
                Route::Brute { members: hs, ball }
            }
            Oracle::DirectFactor { side, sub } => {
                let (l, r) = grp.factors().unwrap();
                let other = if *side == 0 { r } else { l };
                Route::DirectFactor {
                    side: *side,
                    sub: Box::new(sub.metric(radius)?),
                    other: Lengths::new(other, radius)?,
                }
            }
            Oracle::FreeFactor { side, sub } => {
                if sub.is_normal_known() != Some(true) {
                    return Err(Error::Unsupported(
                        "coset distances for a non-normal subgroup inside a free factor are not implemented".into(),
                    ));
                }
                let (l, r) = grp.factors().unwrap();
                Route::FreeFactor {
                    side: *side,
                    sub: Box::new(sub.metric(radius)?),
                    lengths: [Lengths::new(l, radius)?, Lengths::new(r, radius)?],
                }
            }
            Oracle::Cyclic { .. } => {
                let (l, r) = grp.factors().unwrap();
                Route::Cyclic {
                    lengths: [Lengths::new(l, radius)?, Lengths::new(r, radius)?],
                }
            }
            Oracle::Enumerative { members, .. } => {
                let ball = Ball::new(grp, radius, DEFAULT_BUDGET)?;
                Route::Brute {
                    members: members.iter().cloned().collect(),
                    ball,
                }
            }
        };
        Ok(CosetMetric { handle: self, route })
    }
}

fn normal_route(h: &SubgroupHandle, radius: usize) -> Result<Route<'_>> {
    let ball = Ball::new(&h.group, radius, DEFAULT_BUDGET)?;
    let mut map: HashMap<Element, u32> = HashMap::new();
    for (i, x) in ball.elements().iter().enumerate() {
        map.entry(h.coset_key(x)).or_insert(ball.dist_at(i));
    }
    Ok(Route::Normal { map, radius: ball.radius() })
}

/// Word lengths in one backend: a closed formula when available, else a
/// ball lookup.
#[derive(Clone, Debug)]
pub struct Lengths {
    group: Arc<Group>,
    ball: Option<Ball>,
}

impl Lengths {
    pub fn new(group: &Arc<Group>, radius: usize) -> Result<Self> {
        let ball = if group.has_length_formula() {
            None
        } else {
            Some(Ball::new(group, radius, DEFAULT_BUDGET)?)
        };
        Ok(Lengths {
            group: group.clone(),
            ball,
        })
    }

    /// `(value, exact, radius)`; inexact values are normal-word upper bounds
    /// for elements outside the ball.
    pub fn length(&self, x: &Element) -> DistanceCert {
        if let Some(v) = self.group.word_length_formula(x) {
            return DistanceCert {
                value: v,
                exact: true,
                radius_used: 0,
            };
        }
        let ball = self.ball.as_ref().expect("ball present without a formula");
        match ball.length(x) {
            Some(d) => DistanceCert {
                value: d as u64,
                exact: true,
                radius_used: ball.radius(),
            },
            None => DistanceCert {
                value: self.group.render(x).len() as u64,
                exact: false,
                radius_used: ball.radius(),
            },
        }
    }
}

#[derive(Clone, Debug)]
enum Route<'a> {
    Stallings(DoubleCosetOracle<'a>),
    Normal { map: HashMap<Element, u32>, radius: usize },
    Brute { members: Vec<Element>, ball: Ball },
    DirectFactor { side: usize, sub: Box<CosetMetric<'a>>, other: Lengths },
    FreeFactor { side: usize, sub: Box<CosetMetric<'a>>, lengths: [Lengths; 2] },
    Cyclic { lengths: [Lengths; 2] },
}

/// Coset distances `d(g1 H, g2 H)`, i.e. shortest lengths in `H g1^-1 g2 H`.
///
/// Certificates: `exact` means the value is the distance. Otherwise the
/// value is an upper bound and the distance exceeds `radius_used`.
#[derive(Clone, Debug)]
pub struct CosetMetric<'a> {
    handle: &'a SubgroupHandle,
    route: Route<'a>,
}

fn add(a: DistanceCert, b: DistanceCert) -> DistanceCert {
    DistanceCert {
        value: a.value + b.value,
        exact: a.exact && b.exact,
        radius_used: if a.exact { b.radius_used } else { a.radius_used },
    }
}

fn exact(v: u64) -> DistanceCert {
    DistanceCert {
        value: v,
        exact: true,
        radius_used: 0,
    }
}

impl CosetMetric<'_> {
    pub fn handle(&self) -> &SubgroupHandle {
        self.handle
    }

    pub fn distance(&self, g1: &Element, g2: &Element) -> DistanceCert {
        let grp = &self.handle.group;
        self.double_coset(&grp.mul(&grp.inv(g1), g2))
    }

    /// `d(H, gH)`.
    pub fn from_subgroup(&self, g: &Element) -> DistanceCert {
        self.double_coset(g)
    }

    /// Shortest length in `H z H`.
    pub fn double_coset(&self, z: &Element) -> DistanceCert {
        let grp = &self.handle.group;
        match &self.route {
            Route::Stallings(o) => {
                let Element::Free(w) = z else { unreachable!() };
                exact(o.length(w) as u64)
            }
            Route::Normal { map, radius } => match map.get(&self.handle.coset_key(z)) {
                Some(&d) => DistanceCert {
                    value: d as u64,
                    exact: true,
                    radius_used: *radius,
                },
                None => DistanceCert {
                    value: grp.render(z).len() as u64,
                    exact: false,
                    radius_used: *radius,
                },
            },
            Route::Brute { members, ball } => {
                let mut best: Option<u32> = None;
                for h1 in members {
                    let left = grp.mul(h1, z);
                    for h2 in members {
                        if let Some(d) = ball.length(&grp.mul(&left, h2)) {
                            best = Some(best.map_or(d, |b| b.min(d)));
                        }
                    }
                }
                let complete = matches!(self.handle.oracle, Oracle::Table { .. });
                match best {
                    Some(d) if complete => DistanceCert {
                        value: d as u64,
                        exact: true,
                        radius_used: ball.radius(),
                    },
                    Some(d) => DistanceCert {
                        value: d as u64,
                        exact: false,
                        radius_used: 0,
                    },
                    None => DistanceCert {
                        value: grp.render(z).len() as u64,
                        exact: false,
                        radius_used: 0,
                    },
                }
            }
            Route::DirectFactor { side, sub, other } => {
                let (a, b) = pair(z);
                let (inside, outside) = if *side == 0 { (a, b) } else { (b, a) };
                add(sub.double_coset(inside), other.length(outside))
            }
            Route::FreeFactor { side, sub, lengths } => {
                let s = syllables(z);
                let mut total = exact(0);
                for (i, (f, x)) in s.iter().enumerate() {
                    let f = *f as usize;
                    let end = i == 0 || i + 1 == s.len();
                    let part = if f == *side && end {
                        // Normal in the factor, so one-sided and two-sided
                        // minima agree.
                        sub.double_coset(x)
                    } else {
                        lengths[f].length(x)
                    };
                    total = add(total, part);
                }
                total
            }
            Route::Cyclic { lengths } => {
                let Oracle::Cyclic { w, .. } = &self.handle.oracle else { unreachable!() };
                let len = |x: &Element| {
                    syllables(x)
                        .iter()
                        .fold(exact(0), |acc, (f, y)| add(acc, lengths[*f as usize].length(y)))
                };
                let mut best: Option<DistanceCert> = None;
                let mut consider = |x: Element| {
                    let c = len(&x);
                    if best.is_none_or(|b| c.value < b.value) {
                        best = Some(c);
                    }
                };
                for n in left_range(grp, z, w) {
                    let z1 = grp.mul(&grp.pow(w, n), z);
                    for m in right_range(grp, &z1, w) {
                        consider(grp.mul(&z1, &grp.pow(w, m)));
                    }
                }
                for m in right_range(grp, z, w) {
                    let z2 = grp.mul(z, &grp.pow(w, m));
                    for n in left_range(grp, &z2, w) {
                        consider(grp.mul(&grp.pow(w, n), &z2));
                    }
                }
                best.unwrap()
            }
        }
    }
}

/// Number of leading syllables of `z` agreeing with the periodic sequence
/// `p p p ...`.
fn periodic_prefix(z: &[(u8, Element)], p: &[(u8, Element)]) -> usize {
    z.iter().zip(p.iter().cycle()).take_while(|(a, b)| a == b).count()
}

/// Exponents `n` for which `w^n z` can cancel into `z`, padded by two
/// periods on each side: outside this range `|w^n z|` grows by a full
/// period with every step.
pub(crate) fn left_range(grp: &Group, z: &Element, w: &Element) -> std::ops::RangeInclusive<i64> {
    let zs = syllables(z);
    let ws = syllables(w);
    let winv = grp.inv(w);
    let m = ws.len();
    let pos = periodic_prefix(zs, syllables(&winv)) / m + 2;
    let neg = periodic_prefix(zs, ws) / m + 2;
    -(neg as i64)..=pos as i64
}

/// Exponents `m` for which `z w^m` can cancel into `z`.
pub(crate) fn right_range(grp: &Group, z: &Element, w: &Element) -> Vec<i64> {
    let r = left_range(grp, &grp.inv(z), w);
    r.rev().map(|n| -n).collect()
}
