//! Exact group arithmetic for a fixed roster of backends.
//!
//! Every backend multiplies canonical [`Element`]s and renders each element as a
//! normal word over its generator alphabet. The word metric is never read off
//! a normal word; see [`crate::cayley`] for that.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::word::{self, Letter, Word};

/// Canonical form of a group element. The variant in use is fixed by the
/// backend that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    /// Freely reduced word in the free basis.
    Free(Word),
    /// Coordinates in Z^r (also used for lattice quotients, reduced).
    Abelian(Vec<i64>),
    /// `(a, b, c)` with `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
    Heis(i64, i64, i64),
    /// `(k, num / |n|^e)` with `e` minimal; product
    /// `(k1,q1)(k2,q2) = (k1+k2, q1 + n^k1 q2)`.
    Bs { k: i64, num: BigInt, e: u32 },
    /// Index into a multiplication table.
    Finite(u32),
    Pair(Box<Element>, Box<Element>),
    /// Alternating nontrivial syllables tagged with the factor (0 or 1).
    FreeProd(Vec<(u8, Element)>),
}

/// JSON backend descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Descriptor {
    Free {
        rank: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    FreeAbelian {
        rank: usize,
        /// Generating vectors; defaults to the standard basis. Must contain
        /// the standard basis so that normal words exist.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<Vec<i64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Heisenberg {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    BaumslagSolitar {
        n: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Finite {
        /// Row-major multiplication table: `table[i][j]` is the index of `i*j`.
        table: Vec<Vec<usize>>,
        /// Generating elements; defaults to every non-identity element.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    DirectProduct {
        left: Box<Descriptor>,
        right: Box<Descriptor>,
    },
    FreeProduct {
        left: Box<Descriptor>,
        right: Box<Descriptor>,
    },
    Quotient {
        base: Box<Descriptor>,
        normal: Vec<String>,
    },
}

#[derive(Debug)]
struct FiniteTable {
    n: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: u32,
    /// Shortlex-least geodesic word of each element over the generators.
    words: Vec<Word>,
}

impl FiniteTable {
    fn mul(&self, x: u32, y: u32) -> u32 {
        self.mul[x as usize * self.n + y as usize]
    }
}

#[derive(Debug)]
enum Kind {
    Free {
        rank: usize,
    },
    FreeAbelian {
        rank: usize,
        /// `standard[i]` = generator index of the i-th basis vector.
        standard: Vec<usize>,
        /// True when the generating set is exactly the standard basis.
        plain: bool,
    },
    Heisenberg,
    Bs {
        n: i64,
    },
    Finite(FiniteTable),
    Direct(Arc<Group>, Arc<Group>),
    FreeProduct(Arc<Group>, Arc<Group>),
    /// Z^r modulo a lattice of deficient rank (full-rank quotients become
    /// finite tables).
    LatticeQuotient {
        lattice: Lattice,
        standard: Vec<usize>,
    },
}

#[derive(Debug)]
pub struct QuotientInfo {
    pub base: Arc<Group>,
    pub normal: Vec<Word>,
}

/// An immutable group backend.
#[derive(Debug)]
pub struct Group {
    descriptor: Descriptor,
    kind: Kind,
    labels: Vec<String>,
    gens: Vec<Element>,
    gen_invs: Vec<Element>,
    identity: Element,
    quotient: Option<QuotientInfo>,
}

fn check_labels(labels: Option<&Vec<String>>, n: usize, default: Vec<String>) -> Result<Vec<String>> {
    let labels = match labels {
        Some(l) => l.clone(),
        None => default,
    };
    if labels.len() != n {
        return Err(Error::Malformed(format!(
            "expected {n} labels, got {}",
            labels.len()
        )));
    }
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() || l.contains(['*', '^', ' ']) || l == "1" {
            return Err(Error::Malformed(format!("invalid label {l:?}")));
        }
        if labels[..i].contains(l) {
            return Err(Error::Malformed(format!("duplicate label {l:?}")));
        }
    }
    Ok(labels)
}

/// Renames labels of the right factor that collide with the left factor to
/// the first unused single lowercase letter.
fn merge_labels(left: &[String], right: &[String]) -> Vec<String> {
    let mut out: Vec<String> = left.to_vec();
    for l in right {
        if out.contains(l) {
            let fresh = (0..)
                .map(word::default_label)
                .find(|c| !out.contains(c) && !right.contains(c))
                .unwrap();
            out.push(fresh);
        } else {
            out.push(l.clone());
        }
    }
    out
}

impl Group {
    /// Builds a backend from a descriptor.
    pub fn new(desc: &Descriptor) -> Result<Arc<Group>> {
        let g = match desc {
            Descriptor::Free { rank, labels } => {
                if *rank == 0 {
                    return Err(Error::Malformed("free group rank must be at least 1".into()));
                }
                let labels = check_labels(labels.as_ref(), *rank, word::default_labels(*rank))?;
                let gens = (0..*rank)
                    .map(|i| Element::Free(vec![Letter::new(i, false)]))
                    .collect();
                Group::assemble(desc.clone(), Kind::Free { rank: *rank }, labels, gens, None)
            }
            Descriptor::FreeAbelian {
                rank,
                generators,
                labels,
            } => {
                if *rank == 0 {
                    return Err(Error::Malformed("free abelian rank must be at least 1".into()));
                }
                let basis: Vec<Vec<i64>> = (0..*rank)
                    .map(|i| (0..*rank).map(|j| (i == j) as i64).collect())
                    .collect();
                let vecs = generators.clone().unwrap_or_else(|| basis.clone());
                for v in &vecs {
                    if v.len() != *rank {
                        return Err(Error::Malformed(format!(
                            "generator {v:?} does not have length {rank}"
                        )));
                    }
                }
                let standard = basis
                    .iter()
                    .map(|e| vecs.iter().position(|v| v == e))
                    .collect::<Option<Vec<usize>>>()
                    .ok_or_else(|| {
                        Error::Malformed(
                            "free abelian generating set must contain the standard basis".into(),
                        )
                    })?;
                let plain = vecs.len() == *rank;
                let labels = check_labels(labels.as_ref(), vecs.len(), word::default_labels(vecs.len()))?;
                let gens = vecs.into_iter().map(Element::Abelian).collect();
                Group::assemble(
                    desc.clone(),
                    Kind::FreeAbelian {
                        rank: *rank,
                        standard,
                        plain,
                    },
                    labels,
                    gens,
                    None,
                )
            }
            Descriptor::Heisenberg { labels } => {
                let labels = check_labels(labels.as_ref(), 2, vec!["x".into(), "y".into()])?;
                let gens = vec![Element::Heis(1, 0, 0), Element::Heis(0, 1, 0)];
                Group::assemble(desc.clone(), Kind::Heisenberg, labels, gens, None)
            }
            Descriptor::BaumslagSolitar { n, labels } => {
                if *n == 0 {
                    return Err(Error::Malformed("Baumslag-Solitar parameter n must be nonzero".into()));
                }
                let labels = check_labels(labels.as_ref(), 2, vec!["a".into(), "t".into()])?;
                let gens = vec![
                    Element::Bs {
                        k: 0,
                        num: BigInt::one(),
                        e: 0,
                    },
                    Element::Bs {
                        k: 1,
                        num: BigInt::zero(),
                        e: 0,
                    },
                ];
                Group::assemble(desc.clone(), Kind::Bs { n: *n }, labels, gens, None)
            }
            Descriptor::Finite {
                table,
                generators,
                labels,
            } => {
                let (mul, inv, identity, n) = validate_table(table)?;
                let gen_idx: Vec<usize> = match generators {
                    Some(g) => g.clone(),
                    None => (0..n).filter(|&i| i != identity as usize).collect(),
                };
                if gen_idx.iter().any(|&i| i >= n) {
                    return Err(Error::Malformed("finite generator index out of range".into()));
                }
                let labels = check_labels(labels.as_ref(), gen_idx.len(), word::default_labels(gen_idx.len()))?;
                let ft = finite_table(n, mul, inv, identity, &gen_idx)?;
                let gens = gen_idx.iter().map(|&i| Element::Finite(i as u32)).collect();
                Group::assemble(desc.clone(), Kind::Finite(ft), labels, gens, None)
            }
            Descriptor::DirectProduct { left, right } => {
                let l = Group::new(left)?;
                let r = Group::new(right)?;
                Group::direct(desc.clone(), l, r, None)
            }
            Descriptor::FreeProduct { left, right } => {
                let l = Group::new(left)?;
                let r = Group::new(right)?;
                Group::free_product(desc.clone(), l, r)
            }
            Descriptor::Quotient { base, normal } => {
                let b = Group::new(base)?;
                let words = normal
                    .iter()
                    .map(|s| b.parse(s))
                    .collect::<Result<Vec<_>>>()?;
                return Group::quotient(&b, &words);
            }
        };
        Ok(Arc::new(g))
    }

    fn assemble(
        descriptor: Descriptor,
        kind: Kind,
        labels: Vec<String>,
        gens: Vec<Element>,
        quotient: Option<QuotientInfo>,
    ) -> Group {
        let mut g = Group {
            descriptor,
            kind,
            labels,
            gens,
            gen_invs: Vec::new(),
            identity: Element::Free(Vec::new()),
            quotient,
        };
        g.identity = g.compute_identity();
        g.gen_invs = g.gens.iter().map(|x| g.inv(x)).collect();
        g
    }

    fn direct(desc: Descriptor, l: Arc<Group>, r: Arc<Group>, quotient: Option<QuotientInfo>) -> Group {
        let labels = merge_labels(&l.labels, &r.labels);
        let mut gens = Vec::new();
        for x in &l.gens {
            gens.push(Element::Pair(Box::new(x.clone()), Box::new(r.identity().clone())));
        }
        for y in &r.gens {
            gens.push(Element::Pair(Box::new(l.identity().clone()), Box::new(y.clone())));
        }
        Group::assemble(desc, Kind::Direct(l, r), labels, gens, quotient)
    }

    fn free_product(desc: Descriptor, l: Arc<Group>, r: Arc<Group>) -> Group {
        let labels = merge_labels(&l.labels, &r.labels);
        let mut gens = Vec::new();
        for (f, side) in [(0u8, &l), (1u8, &r)] {
            for x in &side.gens {
                if side.is_identity(x) {
                    gens.push(Element::FreeProd(Vec::new()));
                } else {
                    gens.push(Element::FreeProd(vec![(f, x.clone())]));
                }
            }
        }
        Group::assemble(desc, Kind::FreeProduct(l, r), labels, gens, None)
    }

    fn compute_identity(&self) -> Element {
        match &self.kind {
            Kind::Free { .. } => Element::Free(Vec::new()),
            Kind::FreeAbelian { rank, .. } => Element::Abelian(vec![0; *rank]),
            Kind::LatticeQuotient { lattice, .. } => Element::Abelian(vec![0; lattice.rank()]),
            Kind::Heisenberg => Element::Heis(0, 0, 0),
            Kind::Bs { .. } => Element::Bs {
                k: 0,
                num: BigInt::zero(),
                e: 0,
            },
            Kind::Finite(t) => Element::Finite(t.identity),
            Kind::Direct(l, r) => Element::Pair(Box::new(l.identity().clone()), Box::new(r.identity().clone())),
            Kind::FreeProduct(..) => Element::FreeProd(Vec::new()),
        }
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn letters(&self) -> Vec<Letter> {
        word::alphabet(self.ngens())
    }

    pub fn identity(&self) -> &Element {
        &self.identity
    }

    pub fn is_identity(&self, x: &Element) -> bool {
        x == &self.identity
    }

    pub fn generator(&self, i: usize) -> &Element {
        &self.gens[i]
    }

    pub fn letter_element(&self, l: Letter) -> &Element {
        if l.is_inverse() {
            &self.gen_invs[l.gen()]
        } else {
            &self.gens[l.gen()]
        }
    }

    pub fn quotient_info(&self) -> Option<&QuotientInfo> {
        self.quotient.as_ref()
    }

    /// Rank when this backend is a free group on its standard basis.
    pub fn free_rank(&self) -> Option<usize> {
        match self.kind {
            Kind::Free { rank } if self.quotient.is_none() => Some(rank),
            _ => None,
        }
    }

    /// Rank when this backend is Z^r (any generating set containing the
    /// standard basis).
    pub fn free_abelian_rank(&self) -> Option<usize> {
        match self.kind {
            Kind::FreeAbelian { rank, .. } => Some(rank),
            _ => None,
        }
    }

    pub fn is_abelian(&self) -> bool {
        match &self.kind {
            Kind::FreeAbelian { .. } | Kind::LatticeQuotient { .. } => true,
            Kind::Free { rank } => *rank == 1,
            Kind::Heisenberg => false,
            Kind::Bs { n } => *n == 1,
            Kind::Finite(t) => (0..t.n as u32).all(|x| (0..t.n as u32).all(|y| t.mul(x, y) == t.mul(y, x))),
            Kind::Direct(l, r) => l.is_abelian() && r.is_abelian(),
            Kind::FreeProduct(l, r) => l.order() == Some(1) && r.is_abelian() || r.order() == Some(1) && l.is_abelian(),
        }
    }

    /// The two factors of a direct or free product.
    pub fn factors(&self) -> Option<(&Arc<Group>, &Arc<Group>)> {
        match &self.kind {
            Kind::Direct(l, r) | Kind::FreeProduct(l, r) => Some((l, r)),
            _ => None,
        }
    }

    pub fn is_free_product(&self) -> bool {
        matches!(self.kind, Kind::FreeProduct(..))
    }

    pub fn is_direct_product(&self) -> bool {
        matches!(self.kind, Kind::Direct(..))
    }

    pub fn is_finite_table(&self) -> bool {
        matches!(self.kind, Kind::Finite(_))
    }

    /// For Z^r and its lattice quotients: the coordinate rank and, for a
    /// quotient, the lattice divided out. Elements are `Element::Abelian`
    /// coordinate vectors in both cases.
    pub fn abelian_modulus(&self) -> Option<(usize, Option<&Lattice>)> {
        match &self.kind {
            Kind::FreeAbelian { rank, .. } => Some((*rank, None)),
            Kind::LatticeQuotient { lattice, .. } => Some((lattice.rank(), Some(lattice))),
            _ => None,
        }
    }

    /// Number of generators contributed by the left factor of a product.
    pub fn left_ngens(&self) -> Option<usize> {
        self.factors().map(|(l, _)| l.ngens())
    }

    pub fn order(&self) -> Option<u64> {
        match &self.kind {
            Kind::Finite(t) => Some(t.n as u64),
            Kind::Direct(l, r) => Some(l.order()? * r.order()?),
            Kind::FreeProduct(l, r) => match (l.order(), r.order()) {
                (Some(1), o) | (o, Some(1)) => o,
                _ => None,
            },
            _ => None,
        }
    }

    /// Elements of a finite backend in table order.
    pub fn finite_elements(&self) -> Option<Vec<Element>> {
        match &self.kind {
            Kind::Finite(t) => Some((0..t.n as u32).map(Element::Finite).collect()),
            _ => None,
        }
    }

    pub fn parse(&self, s: &str) -> Result<Word> {
        word::parse(s, &self.labels)
    }

    pub fn parse_element(&self, s: &str) -> Result<Element> {
        Ok(self.eval(&self.parse(s)?))
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        word::render(w, &self.labels)
    }

    pub fn format(&self, x: &Element) -> String {
        self.format_word(&self.render(x))
    }

    /// Normal form of a word.
    pub fn eval(&self, w: &[Letter]) -> Element {
        if let Kind::Free { .. } = self.kind {
            return Element::Free(word::reduce(w));
        }
        let mut x = self.identity.clone();
        for &l in w {
            x = self.mul_letter(&x, l);
        }
        x
    }

    pub fn mul_letter(&self, x: &Element, l: Letter) -> Element {
        match (&self.kind, x) {
            (Kind::Free { .. }, Element::Free(w)) => {
                let mut w = w.clone();
                if w.last() == Some(&l.inverse()) {
                    w.pop();
                } else {
                    w.push(l);
                }
                Element::Free(w)
            }
            (Kind::FreeAbelian { .. }, Element::Abelian(v)) => {
                let Element::Abelian(g) = &self.gens[l.gen()] else { unreachable!() };
                let s = if l.is_inverse() { -1 } else { 1 };
                Element::Abelian(v.iter().zip(g).map(|(a, b)| a + s * b).collect())
            }
            _ => self.mul(x, self.letter_element(l)),
        }
    }

    pub fn mul(&self, x: &Element, y: &Element) -> Element {
        match (&self.kind, x, y) {
            (Kind::Free { .. }, Element::Free(a), Element::Free(b)) => {
                let mut w = a.clone();
                for &l in b {
                    if w.last() == Some(&l.inverse()) {
                        w.pop();
                    } else {
                        w.push(l);
                    }
                }
                Element::Free(w)
            }
            (Kind::FreeAbelian { .. }, Element::Abelian(a), Element::Abelian(b)) => {
                Element::Abelian(a.iter().zip(b).map(|(p, q)| p + q).collect())
            }
            (Kind::LatticeQuotient { lattice, .. }, Element::Abelian(a), Element::Abelian(b)) => {
                let s: Vec<i64> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                Element::Abelian(lattice.reduce(&s))
            }
            (Kind::Heisenberg, &Element::Heis(a, b, c), &Element::Heis(a2, b2, c2)) => {
                Element::Heis(a + a2, b + b2, c + c2 + a * b2)
            }
            (Kind::Bs { n }, Element::Bs { k: k1, num: n1, e: e1 }, Element::Bs { k: k2, num: n2, e: e2 }) => {
                bs_mul(*n, *k1, n1, *e1, *k2, n2, *e2)
            }
            (Kind::Finite(t), &Element::Finite(a), &Element::Finite(b)) => Element::Finite(t.mul(a, b)),
            (Kind::Direct(l, r), Element::Pair(a1, a2), Element::Pair(b1, b2)) => {
                Element::Pair(Box::new(l.mul(a1, b1)), Box::new(r.mul(a2, b2)))
            }
            (Kind::FreeProduct(l, r), Element::FreeProd(a), Element::FreeProd(b)) => {
                Element::FreeProd(fp_mul(l, r, a, b))
            }
            _ => panic!("element does not belong to this backend: {x:?} * {y:?}"),
        }
    }

    pub fn inv(&self, x: &Element) -> Element {
        match (&self.kind, x) {
            (Kind::Free { .. }, Element::Free(w)) => Element::Free(word::inverse_word(w)),
            (Kind::FreeAbelian { .. }, Element::Abelian(v)) => Element::Abelian(v.iter().map(|a| -a).collect()),
            (Kind::LatticeQuotient { lattice, .. }, Element::Abelian(v)) => {
                Element::Abelian(lattice.reduce(&v.iter().map(|a| -a).collect::<Vec<_>>()))
            }
            (Kind::Heisenberg, &Element::Heis(a, b, c)) => Element::Heis(-a, -b, -c + a * b),
            (Kind::Bs { n }, Element::Bs { k, num, e }) => {
                // (k,q)^-1 = (-k, -n^-k q)
                let (pn, pe) = bs_scale(*n, -*k, num, *e);
                let (num, e) = bs_normalize(*n, -pn, pe);
                Element::Bs { k: -*k, num, e }
            }
            (Kind::Finite(t), &Element::Finite(a)) => Element::Finite(t.inv[a as usize]),
            (Kind::Direct(l, r), Element::Pair(a, b)) => Element::Pair(Box::new(l.inv(a)), Box::new(r.inv(b))),
            (Kind::FreeProduct(l, r), Element::FreeProd(s)) => Element::FreeProd(
                s.iter()
                    .rev()
                    .map(|(f, x)| (*f, if *f == 0 { l.inv(x) } else { r.inv(x) }))
                    .collect(),
            ),
            _ => panic!("element does not belong to this backend: {x:?}"),
        }
    }

    pub fn pow(&self, x: &Element, k: i64) -> Element {
        let base = if k < 0 { self.inv(x) } else { x.clone() };
        let mut acc = self.identity.clone();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        acc
    }

    pub fn conj(&self, g: &Element, x: &Element) -> Element {
        self.mul(&self.mul(g, x), &self.inv(g))
    }

    /// A normal word representing `x`; `eval(render(x)) == x`.
    pub fn render(&self, x: &Element) -> Word {
        match (&self.kind, x) {
            (Kind::Free { .. }, Element::Free(w)) => w.clone(),
            (Kind::FreeAbelian { standard, .. }, Element::Abelian(v))
            | (Kind::LatticeQuotient { standard, .. }, Element::Abelian(v)) => {
                let mut w = Vec::new();
                for (i, &c) in v.iter().enumerate() {
                    let l = Letter::new(standard[i], c < 0);
                    w.extend(std::iter::repeat_n(l, c.unsigned_abs() as usize));
                }
                w
            }
            (Kind::Heisenberg, &Element::Heis(a, b, c)) => {
                let (x, y) = (0, 1);
                let mut w = Vec::new();
                w.extend(std::iter::repeat_n(Letter::new(x, a < 0), a.unsigned_abs() as usize));
                w.extend(std::iter::repeat_n(Letter::new(y, b < 0), b.unsigned_abs() as usize));
                let z = c - a * b;
                let comm = if z >= 0 {
                    [Letter::new(x, false), Letter::new(y, false), Letter::new(x, true), Letter::new(y, true)]
                } else {
                    [Letter::new(y, false), Letter::new(x, false), Letter::new(y, true), Letter::new(x, true)]
                };
                for _ in 0..z.unsigned_abs() {
                    w.extend_from_slice(&comm);
                }
                w
            }
            (Kind::Bs { n }, Element::Bs { k, num, e }) => {
                let (p, m, s) = bs_normal_word(*n, *k, num, *e);
                let (a, t) = (0, 1);
                let mut w = Vec::new();
                w.extend(std::iter::repeat_n(Letter::new(t, true), p as usize));
                let mi = m.abs().to_u64().expect("Baumslag-Solitar normal word too long to render");
                w.extend(std::iter::repeat_n(Letter::new(a, m.is_negative()), mi as usize));
                w.extend(std::iter::repeat_n(Letter::new(t, false), s as usize));
                w
            }
            (Kind::Finite(t), &Element::Finite(a)) => t.words[a as usize].clone(),
            (Kind::Direct(l, r), Element::Pair(a, b)) => {
                let off = l.ngens();
                let mut w = l.render(a);
                w.extend(r.render(b).into_iter().map(|x| Letter::new(x.gen() + off, x.is_inverse())));
                w
            }
            (Kind::FreeProduct(l, r), Element::FreeProd(s)) => {
                let off = l.ngens();
                let mut w = Vec::new();
                for (f, x) in s {
                    if *f == 0 {
                        w.extend(l.render(x));
                    } else {
                        w.extend(r.render(x).into_iter().map(|y| Letter::new(y.gen() + off, y.is_inverse())));
                    }
                }
                w
            }
            _ => panic!("element does not belong to this backend: {x:?}"),
        }
    }

    /// Word length from a closed formula, where one is known to equal the word
    /// metric: free groups, Z^r on the standard basis, finite tables, and
    /// direct/free products of such.
    pub fn word_length_formula(&self, x: &Element) -> Option<u64> {
        match (&self.kind, x) {
            (Kind::Free { .. }, Element::Free(w)) => Some(w.len() as u64),
            (Kind::FreeAbelian { plain: true, .. }, Element::Abelian(v)) => {
                Some(v.iter().map(|c| c.unsigned_abs()).sum())
            }
            (Kind::Finite(t), &Element::Finite(a)) => Some(t.words[a as usize].len() as u64),
            (Kind::Direct(l, r), Element::Pair(a, b)) => Some(l.word_length_formula(a)? + r.word_length_formula(b)?),
            (Kind::FreeProduct(l, r), Element::FreeProd(s)) => {
                let mut total = 0;
                for (f, y) in s {
                    total += if *f == 0 { l.word_length_formula(y)? } else { r.word_length_formula(y)? };
                }
                Some(total)
            }
            _ => None,
        }
    }

    pub fn has_length_formula(&self) -> bool {
        match &self.kind {
            Kind::Free { .. } | Kind::Finite(_) => true,
            Kind::FreeAbelian { plain, .. } => *plain,
            Kind::Direct(l, r) | Kind::FreeProduct(l, r) => l.has_length_formula() && r.has_length_formula(),
            _ => false,
        }
    }

    /// Embeds an element of one factor of a product into the product.
    pub fn inject(&self, side: usize, x: &Element) -> Element {
        match &self.kind {
            Kind::Direct(l, r) => {
                if side == 0 {
                    Element::Pair(Box::new(x.clone()), Box::new(r.identity().clone()))
                } else {
                    Element::Pair(Box::new(l.identity().clone()), Box::new(x.clone()))
                }
            }
            Kind::FreeProduct(l, r) => {
                let f = if side == 0 { l } else { r };
                if f.is_identity(x) {
                    Element::FreeProd(Vec::new())
                } else {
                    Element::FreeProd(vec![(side as u8, x.clone())])
                }
            }
            _ => panic!("inject on a backend that is not a product"),
        }
    }

    /// Maps a letter of a product backend to `(side, letter in that factor)`.
    pub fn split_letter(&self, l: Letter) -> Option<(usize, Letter)> {
        let off = self.left_ngens()?;
        Some(if l.gen() < off {
            (0, l)
        } else {
            (1, Letter::new(l.gen() - off, l.is_inverse()))
        })
    }

    /// Builds the quotient of `base` by the normal closure of `normal`.
    ///
    /// Supported: Z^r (and its lattice quotients) by any sublattice, free
    /// groups by finite-index normal subgroups, finite tables by normal
    /// subgroups, and direct products by subgroups generated inside the
    /// factors. The quotient keeps the base alphabet.
    pub fn quotient(base: &Arc<Group>, normal: &[Word]) -> Result<Arc<Group>> {
        let desc = Descriptor::Quotient {
            base: Box::new(base.descriptor.clone()),
            normal: normal.iter().map(|w| base.format_word(w)).collect(),
        };
        let info = QuotientInfo {
            base: base.clone(),
            normal: normal.to_vec(),
        };
        let labels = base.labels.clone();
        let g = match &base.kind {
            Kind::FreeAbelian { rank, standard, .. } => {
                let mut vecs = Vec::new();
                for w in normal {
                    let Element::Abelian(v) = base.eval(w) else { unreachable!() };
                    vecs.push(v);
                }
                lattice_quotient(desc, *rank, standard.clone(), &vecs, base, labels, info)?
            }
            Kind::LatticeQuotient { lattice, standard } => {
                let mut vecs: Vec<Vec<i64>> = lattice.basis().to_vec();
                for w in normal {
                    let Element::Abelian(v) = base.eval(w) else { unreachable!() };
                    vecs.push(v);
                }
                lattice_quotient(desc, lattice.rank(), standard.clone(), &vecs, base, labels, info)?
            }
            Kind::Free { rank } => {
                let core = crate::stallings::CoreGraph::fold(*rank, normal);
                if !core.is_covering() {
                    return Err(Error::Unsupported(
                        "quotient of a free group requires a finite-index normal subgroup; the given subgroup has infinite index".into(),
                    ));
                }
                for w in normal {
                    for l in base.letters() {
                        let mut c = vec![l];
                        c.extend_from_slice(w);
                        c.push(l.inverse());
                        if !core.member(&c) {
                            return Err(Error::Unsupported(format!(
                                "subgroup is not normal: {} conjugated by {} leaves it",
                                base.format_word(w),
                                base.format_word(&[l])
                            )));
                        }
                    }
                }
                let n = core.num_vertices();
                let paths = core.tree_words();
                let mut mul = vec![0u32; n * n];
                for u in 0..n {
                    for v in 0..n {
                        mul[u * n + v] = core.read_from(u, &paths[v]).expect("complete graph") as u32;
                    }
                }
                let inv: Vec<u32> = (0..n)
                    .map(|v| (0..n).find(|&u| mul[v * n + u] == 0).unwrap() as u32)
                    .collect();
                let gen_idx: Vec<usize> = (0..*rank)
                    .map(|i| core.read_from(0, &[Letter::new(i, false)]).unwrap())
                    .collect();
                let ft = finite_table(n, mul, inv, 0, &gen_idx)?;
                let gens = gen_idx.iter().map(|&i| Element::Finite(i as u32)).collect();
                Group::assemble(desc, Kind::Finite(ft), labels, gens, Some(info))
            }
            Kind::Finite(t) => {
                let n = t.n;
                let mut sub: Vec<u32> = normal
                    .iter()
                    .map(|w| match base.eval(w) {
                        Element::Finite(i) => i,
                        _ => unreachable!(),
                    })
                    .collect();
                sub.push(t.identity);
                let subgroup = finite_closure(t, &sub);
                for &h in &subgroup {
                    for g in 0..n as u32 {
                        let c = t.mul(t.mul(g, h), t.inv[g as usize]);
                        if !subgroup.contains(&c) {
                            return Err(Error::Unsupported(
                                "quotient of a finite backend requires a normal subgroup".into(),
                            ));
                        }
                    }
                }
                // Coset of g = min over g*h.
                let key = |g: u32| subgroup.iter().map(|&h| t.mul(g, h)).min().unwrap();
                let mut reps: Vec<u32> = (0..n as u32).map(key).collect();
                reps.sort_unstable();
                reps.dedup();
                let m = reps.len();
                let idx = |g: u32| reps.binary_search(&key(g)).unwrap();
                let mut mul = vec![0u32; m * m];
                for i in 0..m {
                    for j in 0..m {
                        mul[i * m + j] = idx(t.mul(reps[i], reps[j])) as u32;
                    }
                }
                let inv: Vec<u32> = (0..m).map(|i| idx(t.inv[reps[i] as usize]) as u32).collect();
                let identity = idx(t.identity) as u32;
                let gen_idx: Vec<usize> = base
                    .gens
                    .iter()
                    .map(|g| match g {
                        Element::Finite(i) => idx(*i),
                        _ => unreachable!(),
                    })
                    .collect();
                let ft = finite_table(m, mul, inv, identity, &gen_idx)?;
                let gens = gen_idx.iter().map(|&i| Element::Finite(i as u32)).collect();
                Group::assemble(desc, Kind::Finite(ft), labels, gens, Some(info))
            }
            Kind::Direct(l, r) => {
                let mut left_words = Vec::new();
                let mut right_words = Vec::new();
                for w in normal {
                    let Element::Pair(x, y) = base.eval(w) else { unreachable!() };
                    if r.is_identity(&y) {
                        left_words.push(l.render(&x));
                    } else if l.is_identity(&x) {
                        right_words.push(r.render(&y));
                    } else {
                        return Err(Error::Unsupported(format!(
                            "direct product quotients need normal generators inside one factor; {} is mixed",
                            base.format_word(w)
                        )));
                    }
                }
                let lq = if left_words.is_empty() { l.clone() } else { Group::quotient(l, &left_words)? };
                let rq = if right_words.is_empty() { r.clone() } else { Group::quotient(r, &right_words)? };
                let mut g = Group::direct(desc, lq, rq, Some(info));
                g.labels = labels;
                g
            }
            _ => {
                return Err(Error::Unsupported(
                    "quotients are supported for free abelian, free, finite and direct product backends only".into(),
                ))
            }
        };
        Ok(Arc::new(g))
    }

    /// Projection from the base of a quotient backend.
    pub fn project(&self, x: &Element) -> Result<Element> {
        let info = self
            .quotient
            .as_ref()
            .ok_or_else(|| Error::Unsupported("projection requested on a backend that is not a quotient".into()))?;
        Ok(self.eval(&info.base.render(x)))
    }
}

fn validate_table(table: &[Vec<usize>]) -> Result<(Vec<u32>, Vec<u32>, u32, usize)> {
    let n = table.len();
    if n == 0 {
        return Err(Error::Malformed("empty multiplication table".into()));
    }
    if n > 4096 {
        return Err(Error::Malformed("multiplication tables are limited to 4096 elements".into()));
    }
    let mut mul = vec![0u32; n * n];
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Malformed(format!("row {i} has length {}, expected {n}", row.len())));
        }
        for (j, &x) in row.iter().enumerate() {
            if x >= n {
                return Err(Error::Malformed(format!("entry ({i},{j}) = {x} out of range")));
            }
            mul[i * n + j] = x as u32;
        }
    }
    let m = |a: usize, b: usize| mul[a * n + b] as usize;
    let identity = (0..n)
        .find(|&e| (0..n).all(|x| m(e, x) == x && m(x, e) == x))
        .ok_or_else(|| Error::Malformed("table has no identity element".into()))?;
    let mut inv = vec![0u32; n];
    for x in 0..n {
        let y = (0..n)
            .find(|&y| m(x, y) == identity && m(y, x) == identity)
            .ok_or_else(|| Error::Malformed(format!("element {x} has no inverse")))?;
        inv[x] = y as u32;
    }
    for a in 0..n {
        for b in 0..n {
            let ab = m(a, b);
            for c in 0..n {
                if m(ab, c) != m(a, m(b, c)) {
                    return Err(Error::Malformed(format!("table is not associative at ({a},{b},{c})")));
                }
            }
        }
    }
    Ok((mul, inv, identity as u32, n))
}

fn finite_table(n: usize, mul: Vec<u32>, inv: Vec<u32>, identity: u32, gens: &[usize]) -> Result<FiniteTable> {
    let mut t = FiniteTable {
        n,
        mul,
        inv,
        identity,
        words: vec![Vec::new(); n],
    };
    // BFS in letter order gives shortlex-least geodesics.
    let mut seen = vec![false; n];
    seen[identity as usize] = true;
    let mut queue = std::collections::VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for l in word::alphabet(gens.len()) {
            let g = gens[l.gen()] as u32;
            let g = if l.is_inverse() { t.inv[g as usize] } else { g };
            let y = t.mul(x, g);
            if !seen[y as usize] {
                seen[y as usize] = true;
                let mut w = t.words[x as usize].clone();
                w.push(l);
                t.words[y as usize] = w;
                queue.push_back(y);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Malformed("finite generators do not generate the group".into()));
    }
    Ok(t)
}

fn finite_closure(t: &FiniteTable, gens: &[u32]) -> Vec<u32> {
    let mut set = std::collections::BTreeSet::from([t.identity]);
    let mut frontier: Vec<u32> = vec![t.identity];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            for y in [t.mul(x, g), t.mul(x, t.inv[g as usize])] {
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    set.into_iter().collect()
}

fn lattice_quotient(
    desc: Descriptor,
    rank: usize,
    standard: Vec<usize>,
    vecs: &[Vec<i64>],
    base: &Arc<Group>,
    labels: Vec<String>,
    info: QuotientInfo,
) -> Result<Group> {
    let lattice = Lattice::new(rank, vecs)?;
    if let Some(index) = lattice.index() {
        // Finite quotient: enumerate the box of reduced representatives.
        let basis = lattice.basis();
        let bounds: Vec<i64> = (0..rank).map(|i| basis[i][i]).collect();
        if index > 4096 {
            return Err(Error::Unsupported(format!("finite quotient of order {index} is too large")));
        }
        let mut reps: Vec<Vec<i64>> = vec![Vec::new()];
        for &b in &bounds {
            reps = reps
                .into_iter()
                .flat_map(|r| {
                    (0..b).map(move |x| {
                        let mut r = r.clone();
                        r.push(x);
                        r
                    })
                })
                .collect();
        }
        reps.sort();
        let n = reps.len();
        let idx = |v: &[i64]| reps.binary_search(&lattice.reduce(v)).unwrap();
        let mut mul = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let s: Vec<i64> = reps[i].iter().zip(&reps[j]).map(|(a, b)| a + b).collect();
                mul[i * n + j] = idx(&s) as u32;
            }
        }
        let inv: Vec<u32> = (0..n)
            .map(|i| idx(&reps[i].iter().map(|a| -a).collect::<Vec<_>>()) as u32)
            .collect();
        let identity = idx(&vec![0; rank]) as u32;
        let gen_idx: Vec<usize> = base
            .gens
            .iter()
            .map(|g| match g {
                Element::Abelian(v) => idx(v),
                _ => unreachable!(),
            })
            .collect();
        let ft = finite_table(n, mul, inv, identity, &gen_idx)?;
        let gens = gen_idx.iter().map(|&i| Element::Finite(i as u32)).collect();
        return Ok(Group::assemble(desc, Kind::Finite(ft), labels, gens, Some(info)));
    }
    let gens = base
        .gens
        .iter()
        .map(|g| match g {
            Element::Abelian(v) => Element::Abelian(lattice.reduce(v)),
            _ => unreachable!(),
        })
        .collect();
    Ok(Group::assemble(
        desc,
        Kind::LatticeQuotient { lattice, standard },
        labels,
        gens,
        Some(info),
    ))
}

fn fp_mul(l: &Group, r: &Group, a: &[(u8, Element)], b: &[(u8, Element)]) -> Vec<(u8, Element)> {
    let mut out: Vec<(u8, Element)> = a.to_vec();
    let mut i = 0;
    while i < b.len() {
        let (f, ref s) = b[i];
        match out.last() {
            Some((lf, _)) if *lf == f => {
                let (_, last) = out.pop().unwrap();
                let side = if f == 0 { l } else { r };
                let p = side.mul(&last, s);
                i += 1;
                if !side.is_identity(&p) {
                    out.push((f, p));
                    break;
                }
            }
            _ => break,
        }
    }
    out.extend(b[i..].iter().cloned());
    out
}

/// `num / |n|^e` scaled by `n^k`, unnormalized.
fn bs_scale(n: i64, k: i64, num: &BigInt, e: u32) -> (BigInt, u32) {
    let an = n.unsigned_abs();
    let sign_flip = n < 0 && k.rem_euclid(2) == 1;
    let num = if sign_flip { -num.clone() } else { num.clone() };
    if an == 1 {
        return (num, 0);
    }
    if k >= 0 {
        (num * BigInt::from(an).pow(k as u32), e)
    } else {
        (num, e + k.unsigned_abs() as u32)
    }
}

fn bs_normalize(n: i64, mut num: BigInt, mut e: u32) -> (BigInt, u32) {
    let an = BigInt::from(n.unsigned_abs());
    if n.unsigned_abs() == 1 || num.is_zero() {
        return (num, 0);
    }
    while e > 0 {
        let (q, r) = num.div_rem(&an);
        if !r.is_zero() {
            break;
        }
        num = q;
        e -= 1;
    }
    (num, e)
}

fn bs_mul(n: i64, k1: i64, n1: &BigInt, e1: u32, k2: i64, n2: &BigInt, e2: u32) -> Element {
    let (s2, f2) = bs_scale(n, k1, n2, e2);
    let an = BigInt::from(n.unsigned_abs());
    let e = e1.max(f2);
    let num = if n.unsigned_abs() == 1 {
        n1 + &s2
    } else {
        n1 * an.pow(e - e1) + s2 * an.pow(e - f2)
    };
    let (num, e) = bs_normalize(n, num, e);
    Element::Bs { k: k1 + k2, num, e }
}

/// Normal word `t^-p a^m t^s` with `p` minimal.
fn bs_normal_word(n: i64, k: i64, num: &BigInt, e: u32) -> (u64, BigInt, u64) {
    let p = (e as i64).max(-k).max(0);
    // m = q * n^p = num * sign^p * |n|^(p-e)
    let an = BigInt::from(n.unsigned_abs());
    let mut m = num * an.pow((p - e as i64) as u32);
    if n < 0 && p % 2 == 1 {
        m = -m;
    }
    if n.unsigned_abs() == 1 {
        m = if n < 0 && p % 2 == 1 { -num.clone() } else { num.clone() };
    }
    (p as u64, m, (k + p) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn grp(json: &str) -> Arc<Group> {
        Group::new(&serde_json::from_str(json).unwrap()).unwrap()
    }

    fn nf(g: &Group, s: &str) -> String {
        g.format(&g.parse_element(s).unwrap())
    }

    #[test]
    fn free_alphabet_and_reduction() {
        let g = grp(r#"{"kind":"free","rank":2}"#);
        assert_eq!(g.letters().len(), 4);
        assert_eq!(nf(&g, "a*b*b^-1"), "a");
    }

    #[test]
    fn free_abelian_collects_exponents() {
        let g = grp(r#"{"kind":"free_abelian","rank":2}"#);
        assert_eq!(nf(&g, "a*b*a"), "a*a*b");
    }

    #[test]
    fn baumslag_solitar_relation() {
        let g = grp(r#"{"kind":"baumslag_solitar","n":2}"#);
        assert_eq!(nf(&g, "t*a*t^-1"), "a*a");
        for k in 0..=6u32 {
            let w = format!("t^{k}*a*t^-{k}");
            let expect = g.pow(&g.parse_element("a").unwrap(), 2i64.pow(k));
            assert_eq!(g.parse_element(&w).unwrap(), expect, "k={k}");
        }
        // t^-1 a t is the square root of a.
        let r = g.parse_element("t^-1*a*t").unwrap();
        assert_eq!(g.mul(&r, &r), g.parse_element("a").unwrap());
        assert_eq!(g.format(&r), "t^-1*a*t");
    }

    #[test]
    fn baumslag_solitar_negative_parameter() {
        let g = grp(r#"{"kind":"baumslag_solitar","n":-3}"#);
        let x = g.parse_element("t*a*t^-1").unwrap();
        assert_eq!(x, g.parse_element("a^-3").unwrap());
        let y = g.parse_element("t^-2*a^5*t*a^-1*t^3").unwrap();
        assert_eq!(g.eval(&g.render(&y)), y);
    }

    #[test]
    fn heisenberg_commutator_is_central() {
        let g = grp(r#"{"kind":"heisenberg"}"#);
        let z = g.parse_element("x*y*x^-1*y^-1").unwrap();
        assert_eq!(z, Element::Heis(0, 0, 1));
        let x = g.generator(0).clone();
        assert_eq!(g.mul(&z, &x), g.mul(&x, &z));
        let w = g.parse_element("y^-2*x^3*y*x^-1").unwrap();
        assert_eq!(g.eval(&g.render(&w)), w);
    }

    #[test]
    fn finite_cyclic_group() {
        let g = grp(r#"{"kind":"finite","table":[[0,1,2],[1,2,0],[2,0,1]]}"#);
        assert_eq!(g.order(), Some(3));
        assert_eq!(g.ngens(), 2);
    }

    #[test]
    fn malformed_descriptors_rejected() {
        let bad = [
            r#"{"kind":"baumslag_solitar","n":0}"#,
            r#"{"kind":"free","rank":0}"#,
            r#"{"kind":"finite","table":[[0,1],[0,1]]}"#,
            r#"{"kind":"finite","table":[[0,1,2],[1,0,2],[2,2,0]]}"#,
            r#"{"kind":"free_abelian","rank":2,"generators":[[1,1],[0,1]]}"#,
        ];
        for b in bad {
            let d: Descriptor = serde_json::from_str(b).unwrap();
            assert!(matches!(Group::new(&d), Err(Error::Malformed(_))), "{b}");
        }
    }

    #[test]
    fn lattice_quotients() {
        let z2 = grp(r#"{"kind":"free_abelian","rank":2}"#);
        let q = Group::quotient(&z2, &[z2.parse("b").unwrap()]).unwrap();
        let p = q.project(&z2.parse_element("a^3*b^5").unwrap()).unwrap();
        assert_eq!(q.format(&p), "a*a*a");
        let q2 = Group::quotient(&z2, &[z2.parse("a^2").unwrap(), z2.parse("b").unwrap()]).unwrap();
        assert_eq!(q2.order(), Some(2));
    }

    #[test]
    fn direct_product_factor_quotient() {
        let g = grp(
            r#"{"kind":"direct_product","left":{"kind":"free","rank":2},"right":{"kind":"free_abelian","rank":1}}"#,
        );
        assert_eq!(g.labels(), &["a", "b", "c"]);
        let q = Group::quotient(&g, &[g.parse("c").unwrap()]).unwrap();
        let p = q.project(&g.parse_element("a*c^4*b*c^-1").unwrap()).unwrap();
        assert_eq!(q.format(&p), "a*b");
    }

    #[test]
    fn free_quotient_by_finite_index_normal_subgroup() {
        let f2 = grp(r#"{"kind":"free","rank":2}"#);
        // Kernel of F2 -> Z/2, a,b -> 1.
        let n: Vec<Word> = ["a^2", "a*b", "b*a"].iter().map(|s| f2.parse(s).unwrap()).collect();
        let q = Group::quotient(&f2, &n).unwrap();
        assert_eq!(q.order(), Some(2));
        let x = q.project(&f2.parse_element("a*b^-1*a").unwrap()).unwrap();
        assert_eq!(x, q.parse_element("a").unwrap());
        // <a> is not normal.
        assert!(matches!(
            Group::quotient(&f2, &[f2.parse("a").unwrap()]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn free_product_syllables() {
        let g = grp(
            r#"{"kind":"free_product","left":{"kind":"free_abelian","rank":2},"right":{"kind":"free_abelian","rank":1}}"#,
        );
        assert_eq!(g.labels(), &["a", "b", "c"]);
        let x = g.parse_element("a*c*c^-1*b*a^-1").unwrap();
        assert_eq!(g.format(&x), "b");
        let y = g.parse_element("a^5*c^3").unwrap();
        let Element::FreeProd(s) = &y else { panic!() };
        assert_eq!(s.len(), 2);
        assert_eq!(g.word_length_formula(&y), Some(8));
    }
}
