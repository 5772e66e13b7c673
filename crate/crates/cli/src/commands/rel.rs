//! Relative metrics in free products.

use cosetpack::relhyp::{
    measure_constants, rel_packing_profile, rel_qc_sigma, transition_points, PeripheralStructure, RelBfs,
    RelPackingOptions, SigmaSample,
};
use serde_json::{json, Value};

use super::{unknown, Ctx, Output};
use crate::CliError;

pub(crate) fn run(ctx: &Ctx, op: &str) -> Result<Output, CliError> {
    let g = ctx.group()?;
    let ps = PeripheralStructure::new(&g)?;
    Ok(match op {
        "dist" => {
            let x = ctx.element(&g, &ctx.cfg.x, "x")?;
            let y = ctx.element(&g, &ctx.cfg.y, "y")?;
            let syl = ps.rel_dist(&x, &y);
            let mut result = json!({
                "x": g.format(&x),
                "y": g.format(&y),
                "syllable": syl,
                "geodesic": ps.rel_geodesic(&x, &y).iter().map(|v| g.format(v)).collect::<Vec<_>>(),
            });
            let mut agree = true;
            if let Some(r) = ctx.cfg.r {
                let bfs = RelBfs::new(&ps, r, ctx.budget())?.rel_dist(&x, &y)?;
                agree = bfs.value == syl.value;
                result["bfs"] = json!(bfs);
                result["routes_agree"] = json!(agree);
            }
            Output::Json {
                certified: json!({ "distance": agree, "s_distance": syl.s_distance.exact }),
                result,
            }
        }
        "saturation" => {
            let nu = ctx.need(&ctx.cfg.nu, "nu")?;
            let r = ctx.radius()?;
            let words = ctx.need(&ctx.cfg.words, "words")?;
            let ys = words.iter().map(|s| g.parse_element(s)).collect::<Result<Vec<_>, _>>()?;
            let sat = ps.saturation(&ys, nu, r)?;
            let cosets: Vec<Value> = sat
                .cosets
                .iter()
                .map(|c| {
                    json!({
                        "coset": ps.label(&c.coset),
                        "witness": g.format(&c.witness),
                        "from": c.from,
                        "distance": c.distance,
                    })
                })
                .collect();
            Output::Json {
                certified: json!({ "complete": true }),
                result: json!({ "nu": nu, "points": words, "cosets": cosets }),
            }
        }
        "transition" => {
            let start = match &ctx.cfg.x {
                Some(s) => g.parse_element(s)?,
                None => g.identity().clone(),
            };
            let w = g.parse(&ctx.need(&ctx.cfg.word, "word")?)?;
            let eps = ctx.need(&ctx.cfg.epsilon, "epsilon")?;
            let r = ctx.need(&ctx.cfg.r_deep, "R_deep")?;
            let rep = transition_points(&ps, &start, &w, eps, r)?;
            Output::Json {
                certified: json!({ "annotations": true, "violations": rep.violations.is_empty() }),
                result: serde_json::to_value(rep.to_json(&ps)).expect("report serializes"),
            }
        }
        "sigma" => {
            let h = ctx.subgroup(&g)?;
            let sample = SigmaSample {
                pairs: ctx.need(&ctx.cfg.samples, "samples")?,
                radius: ctx.radius()?,
                seed: ctx.seed(),
            };
            let s = rel_qc_sigma(&ps, &h, &sample)?;
            Output::Json {
                certified: json!({ "sigma": s.exact, "sampled": true }),
                result: serde_json::to_value(&s).expect("estimate serializes"),
            }
        }
        "constants" => {
            let mut campaign = ctx.need(&ctx.cfg.campaign, "campaign")?;
            if let Some(seed) = ctx.cfg.seed {
                campaign.seed = seed;
            }
            let est = measure_constants(&ps, &campaign)?;
            Output::Json {
                certified: json!({ "observed_maxima": true, "true_constants": false }),
                result: serde_json::to_value(&est).expect("estimates serialize"),
            }
        }
        "packing" => packing(ctx, &ps)?,
        _ => return Err(unknown(ctx)),
    })
}

fn packing(ctx: &Ctx, ps: &PeripheralStructure) -> Result<Output, CliError> {
    let g = ps.group();
    let h = ctx.subgroup(g)?;
    let r = ctx.radius()?;
    let d_max = ctx.need(&ctx.cfg.d_max, "D_max")?;
    let defaults = RelPackingOptions::default();
    let opts = RelPackingOptions {
        step: ctx.cfg.step.unwrap_or(defaults.step),
        mode: ctx.cfg.mode.unwrap_or(defaults.mode),
        budget: ctx.budget(),
        m_max: ctx.cfg.m_max,
        power: ctx.cfg.power,
    };
    let out = rel_packing_profile(ps, &h, d_max, r, &opts)?;
    let rows: Vec<Value> = out
        .profile
        .rows
        .iter()
        .zip(&out.rows)
        .map(|(p, o)| {
            json!({
                "D": p.d,
                "N_lower": p.n_lower,
                "saturated": p.saturated,
                "family": p.family.iter().map(|c| g.format_word(&c.rep)).collect::<Vec<_>>(),
                "outcome": o.outcome.to_json(ps),
                "verified": o.verified,
            })
        })
        .collect();
    let all_verified = out.rows.iter().all(|o| o.verified);
    Ok(Output::Json {
        certified: json!({
            "classification": all_verified,
            "sizes": out.profile.oracle_exact && out.profile.undecided_pairs == 0,
        }),
        result: json!({
            "oracle": h.oracle_name(),
            "R": r,
            "m_max": out.m_max,
            "rows": rows,
        }),
    })
}
