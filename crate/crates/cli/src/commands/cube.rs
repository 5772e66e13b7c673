//! Median graph queries.

use cosetpack::clique::Bits;
use cosetpack::cube::{dual, helly_trials, verify_median, Graph, MedianGraph, DUAL_LIMIT};
use serde_json::{json, Value};

use super::{unknown, Ctx, Output};
use crate::CliError;

fn bits(b: &Bits) -> Vec<usize> {
    b.iter().collect()
}

fn graph(ctx: &Ctx) -> Result<Graph, CliError> {
    let j = ctx.need(&ctx.cfg.graph, "graph")?.load(ctx.base)?;
    Ok(Graph::from_json(&j)?)
}

fn vertices(ctx: &Ctx, g: &MedianGraph, count: Option<usize>) -> Result<Vec<usize>, CliError> {
    let vs = ctx.need(&ctx.cfg.vertices, "vertices")?;
    if let Some(c) = count {
        if vs.len() != c {
            return Err(CliError::Config(format!("`{}` takes {c} vertices", ctx.command)));
        }
    }
    if let Some(&v) = vs.iter().find(|&&v| v >= g.len()) {
        return Err(CliError::Config(format!("vertex {v} is out of range")));
    }
    Ok(vs)
}

pub(crate) fn run(ctx: &Ctx, op: &str) -> Result<Output, CliError> {
    if op == "dual" {
        return dual_op(ctx);
    }
    let raw = graph(ctx)?;
    if op == "verify-median" {
        let v = verify_median(&raw)?;
        return Ok(Output::Json {
            certified: json!({ "median": v.exhaustive }),
            result: serde_json::to_value(&v).expect("verdict serializes"),
        });
    }
    let g = MedianGraph::new(raw)?;
    let exhaustive = g.verdict().exhaustive;
    let out = |result: Value| Output::Json {
        certified: json!({ "median_structure": exhaustive }),
        result,
    };
    Ok(match op {
        "median" => {
            let v = vertices(ctx, &g, Some(3))?;
            out(json!({ "vertices": v, "median": g.median(v[0], v[1], v[2]) }))
        }
        "interval" => {
            let v = vertices(ctx, &g, Some(2))?;
            out(json!({ "vertices": v, "distance": g.dist(v[0], v[1]), "interval": bits(&g.interval(v[0], v[1])) }))
        }
        "hull" => {
            let v = vertices(ctx, &g, None)?;
            let s = g.set(&v);
            out(json!({ "vertices": v, "convex": g.is_convex(&s), "hull": bits(&g.hull(&s)) }))
        }
        "hyperplanes" => {
            let hs = g.hyperplanes()?;
            let js: Vec<_> = hs.iter().map(|h| h.to_json()).collect();
            out(json!({ "count": hs.len(), "hyperplanes": js }))
        }
        "dimension" => out(json!({ "dimension": g.dimension()? })),
        "delta" => {
            let d = g.delta_graph();
            let by_cubes = g.delta_graph_by_cubes();
            let agree = d.graph().edges() == by_cubes.edges();
            let mut r = json!({
                "graph": d.graph().to_json(),
                "routes_agree": agree,
            });
            if let Some(vs) = &ctx.cfg.vertices {
                let v = vertices(ctx, &g, Some(2))?;
                r["vertices"] = json!(vs);
                r["distance"] = json!(d.dist(v[0], v[1]));
            }
            Output::Json {
                certified: json!({ "median_structure": exhaustive, "delta": agree }),
                result: r,
            }
        }
        "helly" => match &ctx.cfg.sets {
            Some(sets) => {
                let bs: Vec<Bits> = sets
                    .iter()
                    .map(|s| {
                        if let Some(&v) = s.iter().find(|&&v| v >= g.len()) {
                            return Err(CliError::Config(format!("vertex {v} is out of range")));
                        }
                        Ok(g.set(s))
                    })
                    .collect::<Result<_, _>>()?;
                out(serde_json::to_value(g.helly(&bs)?).expect("outcome serializes"))
            }
            None => {
                let trials = ctx.need(&ctx.cfg.trials, "sets or trials")?;
                let t = helly_trials(&g, trials, ctx.seed())?;
                out(serde_json::to_value(&t).expect("trials serialize"))
            }
        },
        "packing-check" => {
            let chosen = ctx.need(&ctx.cfg.hyperplanes, "hyperplanes")?;
            let d = ctx.need(&ctx.cfg.d, "D")? as u32;
            let hs = g.hyperplanes()?;
            let delta = g.delta_graph();
            let c = g.hyperplane_packing_check(&delta, &hs, &chosen, d)?;
            out(serde_json::to_value(&c).expect("check serializes"))
        }
        _ => return Err(unknown(ctx)),
    })
}

fn dual_op(ctx: &Ctx) -> Result<Output, CliError> {
    let ws = ctx.need(&ctx.cfg.wallspace, "wallspace")?.load(ctx.base)?;
    let d = dual(&ws, ctx.cfg.limit.unwrap_or(DUAL_LIMIT))?;
    let v = d.median.verdict();
    Ok(Output::Json {
        certified: json!({ "median": v.exhaustive }),
        result: json!({
            "graph": d.median.graph().to_json(),
            "orientations": d.orientations,
            "median": v.median,
        }),
    })
}
