//! Word metrics, coset distances, packing profiles and transfer laws.

use cosetpack::cayley::{Ball, BallJson};
use cosetpack::packing::{check_transfer_law, normal_close_count, packing_profile, ProfileOptions};
use serde_json::json;

use super::{unknown, Ctx, Output};
use crate::CliError;

pub(crate) fn run(ctx: &Ctx, op: &str) -> Result<Output, CliError> {
    match op {
        "ball" => ball(ctx),
        "dist" | "geodesic" => dist(ctx, op == "geodesic"),
        "coset-dist" => coset_dist(ctx),
        "packing-profile" => profile(ctx),
        "normal-count" => normal_count(ctx),
        "transfer-check" => transfer(ctx),
        _ => Err(unknown(ctx)),
    }
}

fn ball(ctx: &Ctx) -> Result<Output, CliError> {
    let g = ctx.group()?;
    let r = ctx.radius()?;
    let b = Ball::new(&g, r, ctx.budget())?;
    let fixture = b.to_json();
    let spheres: Vec<usize> = (0..=r).map(|k| b.size_at(k) - if k == 0 { 0 } else { b.size_at(k - 1) }).collect();
    let mut result = json!({
        "radius": r,
        "size": b.len(),
        "sphere_sizes": spheres,
    });
    if let Some(p) = &ctx.cfg.fixture {
        let old: BallJson = crate::Source::Path(p.clone()).load(ctx.base)?;
        result["fixture_matches"] = json!(old == fixture);
    }
    match &ctx.cfg.fixture_out {
        Some(p) => {
            let mut text = serde_json::to_string_pretty(&fixture).expect("fixture serializes");
            text.push('\n');
            std::fs::write(ctx.base.join(p), text)?;
            result["fixture_written"] = json!(p);
        }
        None => result["fixture"] = serde_json::to_value(&fixture).expect("fixture serializes"),
    }
    Ok(Output::Json {
        certified: json!({ "dist": true, "sphere_sizes": true }),
        result,
    })
}

fn dist(ctx: &Ctx, geodesic: bool) -> Result<Output, CliError> {
    let g = ctx.group()?;
    let r = ctx.radius()?;
    let x = ctx.element(&g, &ctx.cfg.x, "x")?;
    let y = ctx.element(&g, &ctx.cfg.y, "y")?;
    let b = Ball::new(&g, r, ctx.budget())?;
    let cert = b.dist(&x, &y);
    let mut result = json!({ "x": g.format(&x), "y": g.format(&y), "distance": cert });
    if geodesic {
        let w = b.geodesic(&x, &y)?;
        result["geodesic"] = json!(g.format_word(&w));
        result["length"] = json!(w.len());
    }
    Ok(Output::Json {
        certified: json!({ "distance": cert.exact }),
        result,
    })
}

fn coset_dist(ctx: &Ctx) -> Result<Output, CliError> {
    let g = ctx.group()?;
    let r = ctx.radius()?;
    let h = ctx.subgroup(&g)?;
    let x = ctx.element(&g, &ctx.cfg.x, "x")?;
    let y = ctx.element(&g, &ctx.cfg.y, "y")?;
    let cert = h.metric(r)?.distance(&x, &y);
    Ok(Output::Json {
        certified: json!({ "distance": cert.exact && h.is_exact(), "oracle": h.is_exact() }),
        result: json!({
            "oracle": h.oracle_name(),
            "x": g.format(&x),
            "y": g.format(&y),
            "same_coset": h.same_coset(&x, &y),
            "distance": cert,
        }),
    })
}

/// Family representatives; the identity shows as `1` so that the list
/// stays unambiguous.
fn family_cell(g: &cosetpack::group::Group, reps: &[cosetpack::word::Word]) -> String {
    reps.iter()
        .map(|w| if w.is_empty() { "1".to_string() } else { g.format_word(w) })
        .collect::<Vec<_>>()
        .join(" ")
}

fn profile(ctx: &Ctx) -> Result<Output, CliError> {
    let g = ctx.group()?;
    let r = ctx.radius()?;
    let d_max = ctx.need(&ctx.cfg.d_max, "D_max")?;
    let h = ctx.subgroup(&g)?;
    let opts = ProfileOptions {
        step: ctx.cfg.step.unwrap_or(1),
        mode: ctx.cfg.mode.unwrap_or_default(),
        budget: ctx.budget(),
        center: None,
    };
    let p = packing_profile(&h, d_max, r, &opts)?;
    let rows = p
        .rows
        .iter()
        .map(|row| {
            let reps: Vec<_> = row.family.iter().map(|c| c.rep.clone()).collect();
            let exact = p.oracle_exact && p.undecided_pairs == 0 && row.distances.iter().all(|c| c.cert.exact);
            vec![
                row.d.to_string(),
                row.n_lower.to_string(),
                row.saturated.to_string(),
                family_cell(&g, &reps),
                exact.to_string(),
            ]
        })
        .collect();
    Ok(Output::Csv {
        header: vec!["D", "N_lower", "saturated", "family", "certificates_exact"],
        rows,
    })
}

fn normal_count(ctx: &Ctx) -> Result<Output, CliError> {
    let g = ctx.group()?;
    let r = ctx.radius()?;
    let d = ctx.need(&ctx.cfg.d, "D")?;
    let n = ctx.subgroup(&g)?;
    let c = normal_close_count(&n, d, r, ctx.cfg.step.unwrap_or(1), ctx.budget())?;
    let reps: Vec<String> = c.cosets.iter().map(|x| g.format_word(&x.rep)).collect();
    Ok(Output::Json {
        certified: json!({ "count": n.is_exact() && c.saturated, "saturated": c.saturated }),
        result: json!({
            "oracle": n.oracle_name(),
            "D": d,
            "R": r,
            "count": c.count,
            "saturated": c.saturated,
            "cosets": reps,
        }),
    })
}

fn transfer(ctx: &Ctx) -> Result<Output, CliError> {
    let law = ctx.need(&ctx.cfg.law, "law")?.parse()?;
    let inst = ctx.need(&ctx.cfg.instance, "instance")?;
    let report = check_transfer_law(law, &inst)?;
    Ok(Output::Json {
        certified: json!({ "holds": report.holds }),
        result: serde_json::to_value(&report).expect("law report serializes"),
    })
}
