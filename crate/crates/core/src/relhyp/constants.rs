//! Seeded campaigns measuring the constants of relative hyperbolicity.
//!
//! Every estimate is an observed maximum over its samples, so estimates
//! only grow as campaigns are merged.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sigma::{rel_qc_sigma, SigmaSample};
use super::transition::annotate;
use super::{PeripheralCoset, PeripheralStructure};
use crate::cayley::{Ball, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::group::Element;
use crate::packing::SubgroupHandle;
use crate::word::Word;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Estimate {
    pub observed_max: u64,
    pub samples: u64,
    /// Least sample index attaining the maximum.
    pub argmax: Option<u64>,
    /// Whether the constant is a strict bound (`d < c`), so that the
    /// estimate is one more than the observed maximum.
    pub strict: bool,
}

impl Estimate {
    pub fn new(strict: bool) -> Self {
        Estimate {
            observed_max: 0,
            samples: 0,
            argmax: None,
            strict,
        }
    }

    pub fn single(strict: bool, value: u64, index: u64) -> Self {
        Estimate {
            observed_max: value,
            samples: 1,
            argmax: Some(index),
            strict,
        }
    }

    pub fn merged(&self, other: &Estimate) -> Estimate {
        let pick = match (self.argmax, other.argmax) {
            (None, _) => other,
            (_, None) => self,
            (Some(a), Some(b)) => {
                if (other.observed_max, std::cmp::Reverse(b)) > (self.observed_max, std::cmp::Reverse(a)) {
                    other
                } else {
                    self
                }
            }
        };
        Estimate {
            observed_max: pick.observed_max,
            samples: self.samples + other.samples,
            argmax: pick.argmax,
            strict: self.strict,
        }
    }

    /// The constant suggested by the samples.
    pub fn bound(&self) -> u64 {
        match (self.samples, self.strict) {
            (0, _) => 0,
            (_, true) => self.observed_max + 1,
            (_, false) => self.observed_max,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Sampled points are products of at most this many random letters.
    pub radius: usize,
    /// Samples per sampled constant.
    pub samples: u64,
    pub ngon_max: usize,
    /// Radius of the ball searched exhaustively for isolation and the
    /// triangle and quadrilateral lemmas.
    pub exhaustive_radius: usize,
    pub kappa_rhos: Vec<usize>,
    /// Neighbourhood size for the peripheral quasiconvexity and entry-point
    /// constants.
    pub nu: usize,
    pub eta: usize,
    pub morse_k: Vec<usize>,
    pub lambda_tau: Vec<usize>,
    pub epsilon: usize,
    pub r_deep: usize,
    /// Subgroups (generator words) whose σ is measured.
    pub subgroups: Vec<Vec<String>>,
    pub sigma_radius: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 0,
            radius: 6,
            samples: 500,
            ngon_max: 6,
            exhaustive_radius: 5,
            kappa_rhos: vec![0, 1],
            nu: 1,
            eta: 1,
            morse_k: vec![0, 1, 2],
            lambda_tau: vec![1],
            epsilon: 1,
            r_deep: 3,
            subgroups: Vec::new(),
            sigma_radius: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgonCheck {
    /// Largest distance from a side vertex to the other sides.
    pub thinness: Estimate,
    /// `(n - 2)·ν̂` with the final triangle estimate.
    pub bound: u64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantEstimates {
    pub config: CampaignConfig,
    /// Thin relative triangles, including the fan triangles of every
    /// sampled polygon.
    pub nu: Estimate,
    pub ngon: BTreeMap<usize, NgonCheck>,
    /// Isolation `κ(ρ)`.
    pub kappa: BTreeMap<usize, Estimate>,
    /// Geodesics with endpoints `ν`-close to a peripheral coset stay
    /// `τ`-close to it.
    pub tau: Estimate,
    /// Entry and exit points between two peripheral cosets.
    pub d1: Estimate,
    pub zeta: Estimate,
    pub xi: Estimate,
    /// Hausdorff distance of relative geodesics with `k`-close endpoints.
    pub rho: BTreeMap<usize, Estimate>,
    pub lambda: BTreeMap<usize, Estimate>,
    /// Hausdorff distance from relative-geodesic vertices to the transition
    /// points of an S-geodesic with the same endpoints.
    pub transition_l: Estimate,
    pub sigma: BTreeMap<String, Estimate>,
}

impl ConstantEstimates {
    fn entries(&self) -> Vec<(String, &Estimate)> {
        let mut out = vec![
            ("nu".to_string(), &self.nu),
            ("tau".to_string(), &self.tau),
            ("d1".to_string(), &self.d1),
            ("zeta".to_string(), &self.zeta),
            ("xi".to_string(), &self.xi),
            ("transition_l".to_string(), &self.transition_l),
        ];
        out.extend(self.ngon.iter().map(|(n, c)| (format!("ngon[{n}]"), &c.thinness)));
        out.extend(self.kappa.iter().map(|(k, e)| (format!("kappa[{k}]"), e)));
        out.extend(self.rho.iter().map(|(k, e)| (format!("rho[{k}]"), e)));
        out.extend(self.lambda.iter().map(|(k, e)| (format!("lambda[{k}]"), e)));
        out.extend(self.sigma.iter().map(|(k, e)| (format!("sigma[{k}]"), e)));
        out
    }

    /// Names of the constants whose estimate in `newer` exceeds the one
    /// stored here.
    pub fn regressions(&self, newer: &ConstantEstimates) -> Vec<String> {
        let old: HashMap<String, u64> = self.entries().into_iter().map(|(k, e)| (k, e.bound())).collect();
        newer
            .entries()
            .into_iter()
            .filter(|(k, e)| old.get(k).is_some_and(|&b| e.bound() > b))
            .map(|(k, _)| k)
            .collect()
    }

    /// Folds another campaign in by taking maxima and summing sample counts.
    pub fn merge(&mut self, other: &ConstantEstimates) {
        fn map_merge<K: Ord + Clone>(a: &mut BTreeMap<K, Estimate>, b: &BTreeMap<K, Estimate>) {
            for (k, e) in b {
                a.entry(k.clone()).and_modify(|x| *x = x.merged(e)).or_insert_with(|| e.clone());
            }
        }
        self.nu = self.nu.merged(&other.nu);
        self.tau = self.tau.merged(&other.tau);
        self.d1 = self.d1.merged(&other.d1);
        self.zeta = self.zeta.merged(&other.zeta);
        self.xi = self.xi.merged(&other.xi);
        self.transition_l = self.transition_l.merged(&other.transition_l);
        map_merge(&mut self.kappa, &other.kappa);
        map_merge(&mut self.rho, &other.rho);
        map_merge(&mut self.lambda, &other.lambda);
        map_merge(&mut self.sigma, &other.sigma);
        for (n, c) in &other.ngon {
            self.ngon
                .entry(*n)
                .and_modify(|x| x.thinness = x.thinness.merged(&c.thinness))
                .or_insert_with(|| c.clone());
        }
        let nu = self.nu.bound();
        for (n, c) in self.ngon.iter_mut() {
            c.bound = (*n as u64 - 2) * nu;
            c.within = c.thinness.observed_max < c.bound || c.thinness.samples == 0;
        }
    }
}

struct Sampler<'a> {
    ps: &'a PeripheralStructure,
    letters: Vec<crate::word::Letter>,
    factor_letters: [Vec<crate::word::Letter>; 2],
}

impl<'a> Sampler<'a> {
    fn new(ps: &'a PeripheralStructure) -> Self {
        let grp = ps.group();
        let letters = grp.letters();
        let factor_letters = [0, 1].map(|f| {
            letters
                .iter()
                .copied()
                .filter(|&l| grp.split_letter(l).unwrap().0 == f)
                .collect()
        });
        Sampler {
            ps,
            letters,
            factor_letters,
        }
    }

    fn word(&self, rng: &mut ChaCha8Rng, from: &[crate::word::Letter], max_len: usize) -> Word {
        let n = rng.gen_range(0..=max_len);
        (0..n).map(|_| *from.choose(rng).unwrap()).collect()
    }

    fn point(&self, rng: &mut ChaCha8Rng, max_len: usize) -> Element {
        self.ps.group().eval(&self.word(rng, &self.letters, max_len))
    }

    /// A random point of `c` about its representative.
    fn point_of(&self, rng: &mut ChaCha8Rng, c: &PeripheralCoset, max_len: usize) -> Element {
        let p = self.ps.group().eval(&self.word(rng, &self.factor_letters[c.factor], max_len));
        self.ps.group().mul(&c.rep, &p)
    }

    fn random_coset(&self, rng: &mut ChaCha8Rng, max_len: usize) -> PeripheralCoset {
        let x = self.point(rng, max_len);
        self.ps.coset(&x, rng.gen_range(0..2))
    }

    fn coset_near(&self, rng: &mut ChaCha8Rng, x: &Element, dist: usize) -> PeripheralCoset {
        let y = self.ps.group().mul(x, &self.point(rng, dist));
        self.ps.coset(&y, rng.gen_range(0..2))
    }
}

fn min_dist(ps: &PeripheralStructure, v: &Element, set: &[&Element]) -> u64 {
    set.iter().map(|u| ps.s_dist(u, v)).min().unwrap_or(u64::MAX)
}

/// Largest distance from a vertex of one side to the union of the others.
fn thinness(ps: &PeripheralStructure, sides: &[Vec<Element>]) -> u64 {
    let mut worst = 0;
    for (k, side) in sides.iter().enumerate() {
        let others: Vec<&Element> = sides
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .flat_map(|(_, s)| s.iter())
            .collect();
        for v in side {
            worst = worst.max(min_dist(ps, v, &others));
        }
    }
    worst
}

fn hausdorff(ps: &PeripheralStructure, a: &[&Element], b: &[&Element]) -> u64 {
    let one = |x: &[&Element], y: &[&Element]| x.iter().map(|v| min_dist(ps, v, y)).max().unwrap_or(0);
    one(a, b).max(one(b, a))
}

/// Runs `f` on `samples` independent streams and folds the accepted values.
fn campaign<F>(seed: u64, stream: u64, samples: u64, strict: bool, f: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> Option<u64> + Sync,
{
    (0..samples)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream << 32 | k);
            f(&mut rng).map(|v| Estimate::single(strict, v, k))
        })
        .reduce(|| Estimate::new(strict), |a, b| a.merged(&b))
}

/// Points of a ball with the peripheral cosets within `rho` of each, and
/// the points near each pair of distinct cosets.
struct Corners {
    points: Vec<Element>,
    near: HashMap<PeripheralCoset, Vec<u32>>,
    pairs: HashMap<(PeripheralCoset, PeripheralCoset), Vec<u32>>,
}

impl Corners {
    fn new(ps: &PeripheralStructure, ball: &Ball, rho: usize) -> Self {
        let grp = ps.group();
        let shifts = ball.prefix(rho);
        let mut near: HashMap<PeripheralCoset, Vec<u32>> = HashMap::new();
        let mut pairs: HashMap<(PeripheralCoset, PeripheralCoset), Vec<u32>> = HashMap::new();
        for (i, x) in ball.elements().iter().enumerate() {
            let mut cs: Vec<PeripheralCoset> = shifts
                .iter()
                .flat_map(|s| ps.cosets_at(&grp.mul(x, s)))
                .collect();
            cs.sort();
            cs.dedup();
            for (a, c) in cs.iter().enumerate() {
                near.entry(c.clone()).or_default().push(i as u32);
                for d in &cs[a + 1..] {
                    pairs.entry((c.clone(), d.clone())).or_default().push(i as u32);
                }
            }
        }
        Corners {
            points: ball.elements().to_vec(),
            near,
            pairs,
        }
    }

    fn corner(&self, a: &PeripheralCoset, b: &PeripheralCoset) -> Option<&Vec<u32>> {
        match a.cmp(b) {
            std::cmp::Ordering::Equal => self.near.get(a),
            std::cmp::Ordering::Less => self.pairs.get(&(a.clone(), b.clone())),
            std::cmp::Ordering::Greater => self.pairs.get(&(b.clone(), a.clone())),
        }
    }

    /// Sorted neighbours of each coset (distinct cosets sharing a point).
    fn adjacency(&self) -> BTreeMap<&PeripheralCoset, Vec<&PeripheralCoset>> {
        let mut adj: BTreeMap<&PeripheralCoset, Vec<&PeripheralCoset>> = BTreeMap::new();
        for (a, b) in self.pairs.keys() {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        for v in adj.values_mut() {
            v.sort();
        }
        adj
    }
}

fn kappa(ps: &PeripheralStructure, corners: &Corners) -> Estimate {
    let mut keys: Vec<&(PeripheralCoset, PeripheralCoset)> = corners.pairs.keys().collect();
    keys.sort();
    keys.par_iter()
        .enumerate()
        .map(|(k, key)| {
            let pts = &corners.pairs[*key];
            let mut diam = 0;
            for (a, &i) in pts.iter().enumerate() {
                for &j in &pts[a + 1..] {
                    diam = diam.max(ps.s_dist(&corners.points[i as usize], &corners.points[j as usize]));
                }
            }
            Estimate::single(true, diam, k as u64)
        })
        .reduce(|| Estimate::new(true), |a, b| a.merged(&b))
}

/// Measures every constant of the campaign.
pub fn measure_constants(ps: &PeripheralStructure, cfg: &CampaignConfig) -> Result<ConstantEstimates> {
    if cfg.ngon_max < 3 {
        return Err(Error::Malformed("ngon_max must be at least 3".into()));
    }
    let grp = ps.group();
    let sampler = Sampler::new(ps);
    let (seed, n, r) = (cfg.seed, cfg.samples, cfg.radius);

    // Triangles and polygons; each polygon also contributes its fan
    // triangles from the first vertex to the ν estimate.
    let mut nu = campaign(seed, 0, n, true, |rng| {
        let p: Vec<Element> = (0..3).map(|_| sampler.point(rng, r)).collect();
        let sides: Vec<Vec<Element>> = (0..3).map(|i| ps.rel_geodesic(&p[i], &p[(i + 1) % 3])).collect();
        Some(thinness(ps, &sides))
    });
    let mut ngon = BTreeMap::new();
    for m in 4..=cfg.ngon_max {
        let results: Vec<(u64, u64)> = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((100 + m as u64) << 32 | k);
                let p: Vec<Element> = (0..m).map(|_| sampler.point(&mut rng, r)).collect();
                let sides: Vec<Vec<Element>> = (0..m).map(|i| ps.rel_geodesic(&p[i], &p[(i + 1) % m])).collect();
                let fan = (1..m - 1)
                    .map(|i| {
                        let tri = [
                            ps.rel_geodesic(&p[0], &p[i]),
                            ps.rel_geodesic(&p[i], &p[i + 1]),
                            ps.rel_geodesic(&p[i + 1], &p[0]),
                        ];
                        thinness(ps, &tri)
                    })
                    .max()
                    .unwrap();
                (thinness(ps, &sides), fan)
            })
            .collect();
        let mut thin = Estimate::new(true);
        for (k, &(t, fan)) in results.iter().enumerate() {
            thin = thin.merged(&Estimate::single(true, t, k as u64));
            nu = nu.merged(&Estimate::single(true, fan, n + k as u64));
        }
        ngon.insert(
            m,
            NgonCheck {
                thinness: thin,
                bound: 0,
                within: true,
            },
        );
    }
    // The triangle samples double as the n = 3 polygon data.
    ngon.insert(
        3,
        NgonCheck {
            thinness: nu.clone(),
            bound: 0,
            within: true,
        },
    );

    let ball = Ball::new(grp, cfg.exhaustive_radius, DEFAULT_BUDGET)?;
    let mut kappas = BTreeMap::new();
    for &rho in &cfg.kappa_rhos {
        kappas.insert(rho, kappa(ps, &Corners::new(ps, &ball, rho)));
    }

    let tau = campaign(seed, 1, n, false, |rng| {
        let c = sampler.random_coset(rng, r);
        let x = grp.mul(&sampler.point_of(rng, &c, r), &sampler.point(rng, cfg.nu));
        let y = grp.mul(&sampler.point_of(rng, &c, r), &sampler.point(rng, cfg.nu));
        let (_, path) = ps.s_geodesic(&x, &y);
        path.iter().map(|v| ps.dist_to_coset(v, &c)).max()
    });

    let d1 = campaign(seed, 2, n, true, |rng| {
        let a = sampler.random_coset(rng, r);
        let b = sampler.random_coset(rng, r);
        if a == b {
            return None;
        }
        let ends: Vec<(Element, Element)> = (0..2)
            .map(|_| {
                let p = sampler.point_of(rng, &a, r);
                let q = sampler.point_of(rng, &b, r);
                let (_, path) = ps.s_geodesic(&p, &q);
                let nu = cfg.nu as u64;
                let xi = path.iter().rposition(|v| ps.dist_to_coset(v, &a) <= nu).unwrap();
                let yi = xi + path[xi..].iter().position(|v| ps.dist_to_coset(v, &b) <= nu).unwrap();
                (path[xi].clone(), path[yi].clone())
            })
            .collect();
        Some(ps.s_dist(&ends[0].0, &ends[1].0).max(ps.s_dist(&ends[0].1, &ends[1].1)))
    });

    let corners = Corners::new(ps, &ball, cfg.eta);
    let adj = corners.adjacency();
    let cosets: Vec<&PeripheralCoset> = adj.keys().copied().collect();
    let pick = |rng: &mut ChaCha8Rng, ids: &[u32]| corners.points[*ids.choose(rng).unwrap() as usize].clone();
    let zeta = campaign(seed, 3, n, true, |rng| {
        let a = *cosets.choose(rng)?;
        let b1 = *adj[a].choose(rng)?;
        let b2 = *adj[a].choose(rng)?;
        corners.corner(b1, b2)?;
        let y1 = pick(rng, corners.corner(a, b2)?);
        let y2 = pick(rng, corners.corner(a, b1)?);
        Some(ps.s_dist(&y1, &y2))
    });
    let xi = campaign(seed, 4, n, true, |rng| {
        let step = |rng: &mut ChaCha8Rng, c: &PeripheralCoset| -> PeripheralCoset {
            if rng.gen_bool(0.25) {
                c.clone()
            } else {
                (*adj[c].choose(rng).unwrap()).clone()
            }
        };
        let c0 = (*cosets.choose(rng)?).clone();
        let c1 = step(rng, &c0);
        let c2 = step(rng, &c1);
        let c3 = step(rng, &c2);
        let cs = [c0, c1, c2, c3];
        if cs.iter().all(|c| *c == cs[0]) {
            return None;
        }
        let ys: Vec<Element> = (0..4)
            .map(|i| Some(pick(rng, corners.corner(&cs[(i + 3) % 4], &cs[i])?)))
            .collect::<Option<_>>()?;
        let mut least = u64::MAX;
        for i in 0..4 {
            for j in i + 1..4 {
                least = least.min(ps.s_dist(&ys[i], &ys[j]));
            }
        }
        Some(least)
    });

    let mut rho = BTreeMap::new();
    for (t, &k) in cfg.morse_k.iter().enumerate() {
        let e = campaign(seed, 10 + t as u64, n, false, |rng| {
            let (x, y) = (sampler.point(rng, r), sampler.point(rng, r));
            let x2 = grp.mul(&x, &sampler.point(rng, k));
            let y2 = grp.mul(&y, &sampler.point(rng, k));
            let c = ps.rel_geodesic(&x, &y);
            let c2 = ps.rel_geodesic(&x2, &y2);
            Some(hausdorff(ps, &c.iter().collect::<Vec<_>>(), &c2.iter().collect::<Vec<_>>()))
        });
        rho.insert(k, e);
    }

    let mut lambda = BTreeMap::new();
    for (t, &tau_s) in cfg.lambda_tau.iter().enumerate() {
        let e = campaign(seed, 20 + t as u64, n, false, |rng| {
            let c = ps.rel_geodesic(&sampler.point(rng, r), &sampler.point(rng, r));
            let end = |rng: &mut ChaCha8Rng| {
                let v = c.choose(rng).unwrap();
                let base = if rng.gen_bool(0.5) {
                    v.clone()
                } else {
                    let coset = sampler.coset_near(rng, v, tau_s);
                    sampler.point_of(rng, &coset, r)
                };
                grp.mul(&base, &sampler.point(rng, tau_s))
            };
            let (x0, x1) = (end(rng), end(rng));
            let mut targets: Vec<&Element> = c.iter().collect();
            targets.push(&x0);
            targets.push(&x1);
            ps.rel_geodesic(&x0, &x1).iter().map(|v| min_dist(ps, v, &targets)).max()
        });
        lambda.insert(tau_s, e);
    }

    let eps_ball = Ball::new(grp, cfg.epsilon, DEFAULT_BUDGET)?;
    let transition_l = campaign(seed, 5, n, false, |rng| {
        let (x, y) = (sampler.point(rng, r), sampler.point(rng, r));
        let (_, path) = ps.s_geodesic(&x, &y);
        let rep = annotate(ps, path, &eps_ball, cfg.r_deep);
        let trans = rep.transition_vertices();
        let rel = ps.rel_geodesic(&x, &y);
        Some(hausdorff(ps, &rel.iter().collect::<Vec<_>>(), &trans))
    });

    let mut sigma = BTreeMap::new();
    for gens in &cfg.subgroups {
        let ws: Vec<Word> = gens.iter().map(|s| grp.parse(s)).collect::<Result<_>>()?;
        let h = SubgroupHandle::new(grp, &ws)?;
        let s = rel_qc_sigma(
            ps,
            &h,
            &SigmaSample {
                pairs: n,
                radius: cfg.sigma_radius,
                seed,
            },
        )?;
        sigma.insert(gens.join(","), s.sigma);
    }

    let mut out = ConstantEstimates {
        config: cfg.clone(),
        nu,
        ngon,
        kappa: kappas,
        tau,
        d1,
        zeta,
        xi,
        rho,
        lambda,
        transition_l,
        sigma,
    };
    let nu_hat = out.nu.bound();
    for (m, c) in out.ngon.iter_mut() {
        c.bound = (*m as u64 - 2) * nu_hat;
        c.within = c.thinness.observed_max < c.bound;
        if !c.within {
            return Err(Error::Consistency(format!(
                "relative {m}-gon of thinness {} exceeds ({m} - 2)·ν̂ = {}",
                c.thinness.observed_max, c.bound
            )));
        }
    }
    Ok(out)
}
