//! Sampled relative quasiconvexity constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constants::Estimate;
use super::PeripheralStructure;
use crate::cayley::{Ball, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::group::Element;
use crate::packing::SubgroupHandle;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaSample {
    pub pairs: u64,
    /// Pairs are drawn from the elements of `H` in this ball, which also
    /// serves as the search space for distances to `H`.
    pub radius: usize,
    pub seed: u64,
}

impl Default for SigmaSample {
    fn default() -> Self {
        SigmaSample {
            pairs: 500,
            radius: 6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub sample: SigmaSample,
    /// Elements of `H` found in the ball.
    pub h_elements: usize,
    /// Largest distance from a relative-geodesic vertex to `H`.
    pub sigma: Estimate,
    /// False when some vertex found no element of `H` inside the ball; its
    /// distance is then bounded by the distance to the geodesic's endpoints.
    pub exact: bool,
}

/// `d_S(v, H)` by scanning `ball` in breadth-first order for `v s ∈ H`.
pub(crate) fn dist_to_subgroup(h: &SubgroupHandle, v: &Element, ball: &Ball) -> Option<u64> {
    let grp = h.group();
    (0..ball.len())
        .find(|&i| h.member(&grp.mul(v, ball.element(i))))
        .map(|i| ball.dist_at(i) as u64)
}

pub fn rel_qc_sigma(ps: &PeripheralStructure, h: &SubgroupHandle, sample: &SigmaSample) -> Result<SigmaEstimate> {
    if h.group().descriptor() != ps.group().descriptor() {
        return Err(Error::Malformed("subgroup lives in a different group".into()));
    }
    let ball = Ball::new(ps.group(), sample.radius, DEFAULT_BUDGET)?;
    let members: Vec<&Element> = ball.elements().iter().filter(|x| h.member(x)).collect();
    if members.len() < 2 {
        return Ok(SigmaEstimate {
            sample: sample.clone(),
            h_elements: members.len(),
            sigma: Estimate::new(false),
            exact: true,
        });
    }
    let (sigma, exact) = (0..sample.pairs)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(sample.seed);
            rng.set_stream(k);
            let a = members[rng.gen_range(0..members.len())];
            let b = members[rng.gen_range(0..members.len())];
            let mut worst = 0;
            let mut exact = true;
            for v in ps.rel_geodesic(a, b) {
                let d = match dist_to_subgroup(h, &v, &ball) {
                    Some(d) => d,
                    None => {
                        exact = false;
                        ps.s_dist(&v, a).min(ps.s_dist(&v, b))
                    }
                };
                worst = worst.max(d);
            }
            (Estimate::single(false, worst, k), exact)
        })
        .reduce(
            || (Estimate::new(false), true),
            |(a, x), (b, y)| (a.merged(&b), x && y),
        );
    Ok(SigmaEstimate {
        sample: sample.clone(),
        h_elements: members.len(),
        sigma,
        exact,
    })
}
