use std::time::Instant;

use super::{Core, PlanError, Planner};
use crate::query::Path;
use crate::roadmap::Roadmap;
use crate::Configuration;

/// Uniform samples, fully validated nodes and k-nearest edges.
pub struct BasicPrm {
    core: Core,
}

impl BasicPrm {
    pub fn new(core: Core) -> Self {
        Self { core }
    }
}

impl Planner for BasicPrm {
    fn name(&self) -> &'static str {
        "basic"
    }

    fn build(&mut self) -> Result<(), PlanError> {
        while self.core.grow_uniform(|_, q| q) {}
        Ok(())
    }

    fn solve(&mut self, s: Configuration, g: Configuration, deadline: Instant) -> Result<Path, PlanError> {
        self.core.standard_query(s, g, deadline, |c| c.grow_uniform(|_, q| q))
    }

    fn roadmap(&self) -> &Roadmap {
        &self.core.rm
    }

    fn sample_attempts(&self) -> usize {
        self.core.attempts.used
    }

    fn sample_limit(&self) -> usize {
        self.core.attempts.limit
    }
}
