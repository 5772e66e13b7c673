mod cube;
mod group;
mod rel;
mod stallings;

use std::path::Path;
use std::sync::Arc;

use cosetpack::cayley::DEFAULT_BUDGET;
use cosetpack::group::{Element, Group};
use cosetpack::packing::SubgroupHandle;
use cosetpack::word::Word;
use serde_json::Value;

use crate::{CliError, ExperimentConfig};

pub(crate) enum Output {
    /// `certified` holds the certification flag of every number `result`
    /// prints, by name.
    Json { certified: Value, result: Value },
    /// Profile tables; the runner appends the config hash column.
    Csv {
        header: Vec<&'static str>,
        rows: Vec<Vec<String>>,
    },
}

pub(crate) fn dispatch(command: &str, cfg: &ExperimentConfig, base: &Path) -> Result<Output, CliError> {
    let ctx = Ctx { cfg, base, command };
    match command.split_once('.') {
        Some(("stallings", op)) => stallings::run(&ctx, op),
        Some(("cube", op)) => cube::run(&ctx, op),
        Some(("rel", op)) => rel::run(&ctx, op),
        _ => group::run(&ctx, command),
    }
}

pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub base: &'a Path,
    pub command: &'a str,
}

impl Ctx<'_> {
    pub fn need<T: Clone>(&self, field: &Option<T>, name: &str) -> Result<T, CliError> {
        ExperimentConfig::need(field, name, self.command)
    }

    pub fn group(&self) -> Result<Arc<Group>, CliError> {
        Ok(Group::new(&self.need(&self.cfg.backend, "backend")?)?)
    }

    pub fn budget(&self) -> usize {
        self.cfg.budget.unwrap_or(DEFAULT_BUDGET)
    }

    pub fn seed(&self) -> u64 {
        self.cfg.seed.unwrap_or(0)
    }

    pub fn radius(&self) -> Result<usize, CliError> {
        self.need(&self.cfg.r, "R")
    }

    pub fn element(&self, g: &Group, field: &Option<String>, name: &str) -> Result<Element, CliError> {
        Ok(g.parse_element(&self.need(field, name)?)?)
    }

    pub fn words(g: &Group, ws: &[String]) -> Result<Vec<Word>, CliError> {
        Ok(ws.iter().map(|s| g.parse(s)).collect::<Result<_, _>>()?)
    }

    pub fn subgroup(&self, g: &Arc<Group>) -> Result<SubgroupHandle, CliError> {
        let gens = self.need(&self.cfg.subgroup, "subgroup")?;
        Ok(SubgroupHandle::new(g, &Self::words(g, &gens)?)?)
    }
}

pub(crate) fn unknown(ctx: &Ctx) -> CliError {
    CliError::Config(format!("unknown command `{}`", ctx.command))
}
