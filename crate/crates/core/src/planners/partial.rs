use std::time::Instant;

use super::lazy::{deferred_query, grow_deferred};
use super::{Core, PlanError, Planner};
use crate::geometry::ValidityMode;
use crate::query::Path;
use crate::roadmap::Roadmap;
use crate::Configuration;

/// Construction with partial checks only; the query re-validates candidate
/// paths in full.
pub struct PartialLazyPrm {
    core: Core,
}

impl PartialLazyPrm {
    pub fn new(core: Core) -> Self {
        Self { core }
    }
}

impl Planner for PartialLazyPrm {
    fn name(&self) -> &'static str {
        "partial"
    }

    fn build(&mut self) -> Result<(), PlanError> {
        while grow_deferred(&mut self.core, Some(ValidityMode::Partial)) {}
        Ok(())
    }

    fn solve(&mut self, s: Configuration, g: Configuration, deadline: Instant) -> Result<Path, PlanError> {
        deferred_query(&mut self.core, s, g, deadline, Some(ValidityMode::Partial))
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
