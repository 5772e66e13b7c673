//! Packing profiles: largest families of pairwise close cosets.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::handle::{CosetMetric, Oracle, SubgroupHandle};
use crate::cayley::{Ball, DistanceCert};
use crate::clique;
use crate::error::{Error, Result};
use crate::group::Element;
use crate::word::{self, Word};

/// Which families are searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// All cosets meeting the ball of radius `R`, all pairs.
    #[default]
    AllPairs,
    /// Families containing `H` itself (every family can be translated to
    /// one), with candidates `h s H` for `h ∈ H` in the ball of radius `R`
    /// and `|s| < D_max`.
    Anchored,
}

#[derive(Clone, Debug)]
pub struct ProfileOptions {
    /// Radius increment used for the saturation rerun.
    pub step: usize,
    pub mode: Mode,
    pub budget: usize,
    /// Left translate applied to the whole instance.
    pub center: Option<Element>,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            step: 1,
            mode: Mode::AllPairs,
            budget: crate::cayley::DEFAULT_BUDGET,
            center: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coset {
    /// Representative word.
    pub rep: Word,
    pub element: Element,
    pub key: Element,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCert {
    pub i: usize,
    pub j: usize,
    pub cert: DistanceCert,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileRow {
    pub d: usize,
    pub n_lower: usize,
    pub saturated: bool,
    pub family: Vec<Coset>,
    /// Certificates for every pair of the family.
    pub distances: Vec<PairCert>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingProfile {
    pub radius: usize,
    pub step: usize,
    pub mode: Mode,
    pub oracle: &'static str,
    /// False when the membership oracle is the enumerative fallback.
    pub oracle_exact: bool,
    /// Number of candidate cosets at radius `R`.
    pub candidates: usize,
    /// Pairs whose closeness could not be decided (inexact certificate below
    /// the threshold); such pairs are treated as far.
    pub undecided_pairs: usize,
    pub rows: Vec<ProfileRow>,
}

/// Cosets meeting the ball of radius `r` (about `center` if given), each
/// with its shortlex-least representative, in shortlex order.
pub fn enumerate_cosets(h: &SubgroupHandle, r: usize, budget: usize) -> Result<Vec<Coset>> {
    check_enumerative(h, r)?;
    let ball = Ball::new(h.group(), r, budget)?;
    Ok(cosets_in_ball(h, &ball, r, None))
}

fn check_enumerative(h: &SubgroupHandle, r: usize) -> Result<()> {
    if let Oracle::Enumerative { radius, .. } = h.oracle() {
        if *radius < 2 * r {
            return Err(Error::Refused(format!(
                "enumerative membership oracle covers radius {radius}; radius {} is required",
                2 * r
            )));
        }
    }
    Ok(())
}

fn cosets_in_ball(h: &SubgroupHandle, ball: &Ball, r: usize, center: Option<&Element>) -> Vec<Coset> {
    let grp = h.group();
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for i in 0..ball.size_at(r) {
        let (element, rep) = match center {
            Some(c) => {
                let e = grp.mul(c, ball.element(i));
                let rep = grp.render(&e);
                (e, rep)
            }
            None => (ball.element(i).clone(), ball.word_at(i)),
        };
        let key = h.coset_key(&element);
        if let std::collections::hash_map::Entry::Vacant(v) = seen.entry(key.clone()) {
            v.insert(out.len());
            out.push(Coset { rep, element, key });
        }
    }
    out
}

/// Pairwise certificates below the threshold `d_max`, as `(i, j, cert)`
/// with `i < j`, plus the number of undecided pairs.
fn close_pairs(metric: &CosetMetric<'_>, cosets: &[Coset], d_max: usize) -> (Vec<PairCert>, usize) {
    let h = metric.handle();
    let rows: Vec<(Vec<PairCert>, usize)> = if let Some(core) = h.core() {
        // Free groups: work on words directly, cancelling the common prefix.
        let oracle = crate::stallings::DoubleCosetOracle::new(core, core);
        let words: Vec<&Word> = cosets
            .iter()
            .map(|c| match &c.element {
                Element::Free(w) => w,
                _ => unreachable!(),
            })
            .collect();
        (0..cosets.len())
            .into_par_iter()
            .map(|i| {
                let mut buf: Word = Vec::with_capacity(64);
                let mut out = Vec::new();
                let x = words[i];
                for (j, y) in words.iter().enumerate().skip(i + 1) {
                    let p = x.iter().zip(y.iter()).take_while(|(a, b)| a == b).count();
                    // (x^-1 y)^-1 = y'^-1 x'
                    buf.clear();
                    buf.extend(y[p..].iter().rev().map(|l| l.inverse()));
                    buf.extend_from_slice(&x[p..]);
                    let d = oracle.length_inv(&buf);
                    if d < d_max {
                        out.push(PairCert {
                            i,
                            j,
                            cert: DistanceCert {
                                value: d as u64,
                                exact: true,
                                radius_used: 0,
                            },
                        });
                    }
                }
                (out, 0)
            })
            .collect()
    } else {
        (0..cosets.len())
            .into_par_iter()
            .map(|i| {
                let mut out = Vec::new();
                let mut undecided = 0;
                for j in i + 1..cosets.len() {
                    let cert = metric.distance(&cosets[i].element, &cosets[j].element);
                    if cert.exact {
                        if (cert.value as usize) < d_max {
                            out.push(PairCert { i, j, cert });
                        }
                    } else if cert.radius_used + 1 < d_max {
                        undecided += 1;
                    }
                }
                (out, undecided)
            })
            .collect()
    };
    let mut pairs = Vec::new();
    let mut undecided = 0;
    for (p, u) in rows {
        pairs.extend(p);
        undecided += u;
    }
    (pairs, undecided)
}

/// Maximum close-family sizes for `D = 1..=d_max` over the given cosets.
pub(super) fn family_sizes(metric: &CosetMetric<'_>, cosets: Vec<Coset>, d_max: usize) -> Vec<usize> {
    let (pairs, undecided) = close_pairs(metric, &cosets, d_max);
    let level = Level {
        cosets,
        anchor: None,
        pairs,
        undecided,
    };
    families(&level, d_max).iter().map(|f| f.len()).collect()
}

pub(super) fn cosets_from(h: &SubgroupHandle, elements: &[Element]) -> Vec<Coset> {
    let grp = h.group();
    let mut seen = std::collections::HashSet::new();
    elements
        .iter()
        .filter_map(|e| {
            let key = h.coset_key(e);
            seen.insert(key.clone()).then(|| Coset {
                rep: grp.render(e),
                element: e.clone(),
                key,
            })
        })
        .collect()
}

struct Level {
    cosets: Vec<Coset>,
    /// Index of `H` itself among the cosets (anchored mode).
    anchor: Option<usize>,
    pairs: Vec<PairCert>,
    undecided: usize,
}

fn families(level: &Level, d_max: usize) -> Vec<Vec<usize>> {
    let n = level.cosets.len();
    (1..=d_max)
        .map(|d| {
            let edges: Vec<(usize, usize)> = level
                .pairs
                .iter()
                .filter(|p| (p.cert.value as usize) < d)
                .map(|p| (p.i, p.j))
                .collect();
            match level.anchor {
                None => clique::max_clique_sparse(n, &edges),
                Some(a) => {
                    // Restrict to the neighbourhood of the anchor.
                    let nbrs: Vec<usize> = edges
                        .iter()
                        .filter_map(|&(i, j)| {
                            if i == a {
                                Some(j)
                            } else if j == a {
                                Some(i)
                            } else {
                                None
                            }
                        })
                        .collect();
                    let pos: HashMap<usize, usize> = nbrs.iter().enumerate().map(|(k, &v)| (v, k)).collect();
                    let sub: Vec<(usize, usize)> = edges
                        .iter()
                        .filter_map(|(i, j)| Some((*pos.get(i)?, *pos.get(j)?)))
                        .collect();
                    let c = if nbrs.is_empty() {
                        Vec::new()
                    } else {
                        clique::max_clique_sparse(nbrs.len(), &sub)
                    };
                    let mut fam: Vec<usize> = std::iter::once(a).chain(c.into_iter().map(|k| nbrs[k])).collect();
                    fam.sort_unstable();
                    fam
                }
            }
        })
        .collect()
}

fn build_level(
    h: &SubgroupHandle,
    metric: &CosetMetric<'_>,
    ball: &Ball,
    r: usize,
    d_max: usize,
    opts: &ProfileOptions,
) -> Level {
    match opts.mode {
        Mode::AllPairs => {
            let cosets = cosets_in_ball(h, ball, r, opts.center.as_ref());
            let (pairs, undecided) = close_pairs(metric, &cosets, d_max);
            Level {
                cosets,
                anchor: None,
                pairs,
                undecided,
            }
        }
        Mode::Anchored => {
            let grp = h.group();
            let base = opts.center.clone().unwrap_or_else(|| grp.identity().clone());
            let mut cosets = vec![Coset {
                rep: grp.render(&base),
                element: base.clone(),
                key: h.coset_key(&base),
            }];
            let mut seen: HashMap<Element, usize> = HashMap::from([(cosets[0].key.clone(), 0)]);
            let shifts = ball.size_at(d_max.saturating_sub(1));
            for i in 0..ball.size_at(r) {
                let x = ball.element(i);
                if !h.member(x) {
                    continue;
                }
                let hx = grp.mul(&base, x);
                for s in 0..shifts {
                    let e = grp.mul(&hx, ball.element(s));
                    let key = h.coset_key(&e);
                    if !seen.contains_key(&key) {
                        seen.insert(key.clone(), cosets.len());
                        let mut rep = grp.render(&base);
                        rep.extend(ball.word_at(i));
                        rep.extend(ball.word_at(s));
                        cosets.push(Coset {
                            rep: word::reduce(&rep),
                            element: e,
                            key,
                        });
                    }
                }
            }
            let (pairs, undecided) = close_pairs(metric, &cosets, d_max);
            Level {
                cosets,
                anchor: Some(0),
                pairs,
                undecided,
            }
        }
    }
}

/// Largest pairwise-close families for `D = 1..=d_max` over the cosets
/// meeting the ball of radius `r`, with a saturation rerun at `r + step`.
pub fn packing_profile(h: &SubgroupHandle, d_max: usize, r: usize, opts: &ProfileOptions) -> Result<PackingProfile> {
    if d_max == 0 {
        return Err(Error::Malformed("D_max must be at least 1".into()));
    }
    if r < d_max {
        return Err(Error::Malformed(format!("radius {r} must be at least D_max = {d_max}")));
    }
    check_enumerative(h, r + opts.step)?;
    let ball = Ball::new(h.group(), r + opts.step, opts.budget)?;
    let metric = h.metric(d_max)?;
    let small = build_level(h, &metric, &ball, r, d_max, opts);
    let large = build_level(h, &metric, &ball, r + opts.step, d_max, opts);
    let fam_small = families(&small, d_max);
    let fam_large = families(&large, d_max);
    let cert_of: HashMap<(usize, usize), DistanceCert> = small.pairs.iter().map(|p| ((p.i, p.j), p.cert)).collect();
    let rows = (1..=d_max)
        .map(|d| {
            let fam = &fam_small[d - 1];
            let mut distances = Vec::new();
            for a in 0..fam.len() {
                for b in a + 1..fam.len() {
                    distances.push(PairCert {
                        i: a,
                        j: b,
                        cert: cert_of[&(fam[a], fam[b])],
                    });
                }
            }
            ProfileRow {
                d,
                n_lower: fam.len(),
                saturated: fam.len() == fam_large[d - 1].len(),
                family: fam.iter().map(|&i| small.cosets[i].clone()).collect(),
                distances,
            }
        })
        .collect();
    Ok(PackingProfile {
        radius: r,
        step: opts.step,
        mode: opts.mode,
        oracle: h.oracle_name(),
        oracle_exact: h.is_exact(),
        candidates: small.cosets.len(),
        undecided_pairs: small.undecided,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalCount {
    pub count: usize,
    pub saturated: bool,
    pub cosets: Vec<Coset>,
}

/// Number of cosets `gN` meeting the ball of radius `r` with `d(N, gN) < d`.
/// `N` must be normal; a violating conjugation is reported otherwise.
pub fn normal_close_count(n: &SubgroupHandle, d: usize, r: usize, step: usize, budget: usize) -> Result<NormalCount> {
    let grp = n.group();
    check_enumerative(n, r + step)?;
    match n.is_normal_known() {
        Some(true) => {}
        Some(false) | None => {
            for g in n.generators() {
                let x = grp.eval(g);
                for l in grp.letters() {
                    let y = grp.letter_element(l);
                    if !n.member(&grp.conj(y, &x)) {
                        return Err(Error::Refused(format!(
                            "subgroup is not normal: {} conjugated by {} leaves it",
                            grp.format_word(g),
                            grp.format_word(&[l])
                        )));
                    }
                }
            }
        }
    }
    let ball = Ball::new(grp, r + step, budget)?;
    let metric = n.metric(d)?;
    let count_at = |radius: usize| -> Vec<Coset> {
        cosets_in_ball(n, &ball, radius, None)
            .into_iter()
            .filter(|c| {
                let cert = metric.from_subgroup(&c.element);
                cert.exact && (cert.value as usize) < d
            })
            .collect()
    };
    let small = count_at(r);
    let large = count_at(r + step);
    Ok(NormalCount {
        count: small.len(),
        saturated: small.len() == large.len(),
        cosets: small,
    })
}
