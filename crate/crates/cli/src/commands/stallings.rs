//! Folded graphs of subgroups of free groups.

use cosetpack::stallings::{
    commensurator_ball, double_coset_automaton, double_coset_length, fiber_product, height, width, CoreGraph,
};
use cosetpack::word::{self, Word};
use serde_json::{json, Value};

use super::{unknown, Ctx, Output};
use crate::CliError;

struct Free {
    rank: usize,
    labels: Vec<String>,
}

impl Free {
    fn of(ctx: &Ctx) -> Result<Free, CliError> {
        if let Some(d) = &ctx.cfg.backend {
            let g = cosetpack::group::Group::new(d)?;
            let rank = g.free_rank().ok_or_else(|| {
                CliError::Core(cosetpack::Error::Unsupported(
                    "folded graphs need a free backend".into(),
                ))
            })?;
            return Ok(Free {
                rank,
                labels: g.labels().to_vec(),
            });
        }
        let rank = match ctx.cfg.rank {
            Some(r) => r,
            None => Self::inferred_rank(ctx)?,
        };
        Ok(Free {
            rank,
            labels: word::default_labels(rank),
        })
    }

    /// Without a backend or rank: the smallest rank (at least 2) whose
    /// default labels spell every word of the config.
    fn inferred_rank(ctx: &Ctx) -> Result<usize, CliError> {
        let labels = word::default_labels(26);
        let cfg = ctx.cfg;
        let mut rank = 2;
        let all = cfg.subgroup.iter().chain(&cfg.other).chain(&cfg.words).flatten().chain(&cfg.x);
        for s in all {
            for l in word::parse(s, &labels)? {
                rank = rank.max(l.gen() + 1);
            }
        }
        Ok(rank)
    }

    fn word(&self, s: &str) -> Result<Word, CliError> {
        Ok(word::reduce(&word::parse(s, &self.labels)?))
    }

    fn core(&self, gens: &[String]) -> Result<CoreGraph, CliError> {
        let ws: Vec<Word> = gens.iter().map(|s| self.word(s)).collect::<Result<_, _>>()?;
        Ok(CoreGraph::fold(self.rank, &ws))
    }

    fn show(&self, w: &[word::Letter]) -> String {
        word::render(w, &self.labels)
    }

    fn show_all(&self, ws: &[Word]) -> Vec<String> {
        ws.iter().map(|w| self.show(w)).collect()
    }

    fn summary(&self, c: &CoreGraph) -> Value {
        json!({
            "vertices": c.num_vertices(),
            "edges": c.num_edges(),
            "rank": c.rank(),
            "index": c.index(),
            "basis": self.show_all(&c.basis()),
        })
    }
}

pub(crate) fn run(ctx: &Ctx, op: &str) -> Result<Output, CliError> {
    let f = Free::of(ctx)?;
    let gens = ctx.need(&ctx.cfg.subgroup, "subgroup")?;
    let h = f.core(&gens)?;
    let exact = |result: Value| Output::Json {
        certified: json!({ "exact": true }),
        result,
    };
    Ok(match op {
        "fold" => {
            let mut r = f.summary(&h);
            r["ambient_rank"] = json!(f.rank);
            r["graph"] = serde_json::to_value(h.to_json(&f.labels)).expect("graph serializes");
            exact(r)
        }
        "member" => {
            let words = ctx.need(&ctx.cfg.words, "words")?;
            let rows: Vec<Value> = words
                .iter()
                .map(|s| Ok(json!({ "word": s, "member": h.member(&f.word(s)?) })))
                .collect::<Result<_, CliError>>()?;
            exact(json!({ "members": rows }))
        }
        "dcs" => {
            let k = f.core(&ctx.need(&ctx.cfg.other, "other")?)?;
            let g = f.word(&ctx.need(&ctx.cfg.x, "x")?)?;
            let auto = double_coset_automaton(&h, &g, &k);
            let fast = double_coset_length(&h, &g, &k);
            Output::Json {
                certified: json!({ "length": auto.length == fast, "routes_agree": auto.length == fast }),
                result: json!({
                    "g": f.show(&g),
                    "shortest": f.show(&auto.element),
                    "length": auto.length,
                    "automaton_length": auto.length,
                    "schreier_length": fast,
                }),
            }
        }
        "fiber" => {
            let k = f.core(&ctx.need(&ctx.cfg.other, "other")?)?;
            let report = fiber_product(&h, &k);
            let entries: Vec<Value> = report
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "representative": f.show(&e.representative),
                        "rank": e.rank,
                        "shortest_length": e.shortest_length,
                        "intersection_basis": f.show_all(&e.intersection.basis()),
                        "pairs": e.pairs.len(),
                    })
                })
                .collect();
            exact(json!({
                "components": entries.len(),
                "nontrivial": report.nontrivial().count(),
                "entries": entries,
            }))
        }
        "height" => {
            let r = height(&h);
            exact(json!({ "height": r.height, "witness": f.show_all(&r.height_witness) }))
        }
        "width" => {
            let r = width(&h, ctx.radius()?);
            let c = &r.completeness;
            Output::Json {
                certified: json!({ "width": c.exact }),
                result: json!({
                    "width": r.width,
                    "witness": f.show_all(&r.width_witness),
                    "completeness": {
                        "exact": c.exact,
                        "search_bound": c.search_bound,
                        "bound": c.bound,
                        "note": c.note,
                    },
                }),
            }
        }
        "commensurator" => {
            let r = ctx.radius()?;
            let els = commensurator_ball(&h, r);
            exact(json!({ "R": r, "count": els.len(), "elements": f.show_all(&els) }))
        }
        _ => return Err(unknown(ctx)),
    })
}
