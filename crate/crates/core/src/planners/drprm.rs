use std::sync::Arc;
use std::time::Instant;

use super::{Core, PlanError, Planner};
use crate::query::Path;
use crate::roadmap::{init_local_components, AdvanceOutcome, EdgeExpansion, ExpansionSettings, Roadmap, Side};
use crate::skeleton::{AcceptanceCriteria, AnnotatedSkeleton};
use crate::Configuration;

/// Dynamic-region roadmap: local components at every skeleton vertex, then
/// region pairs on every skeleton edge grown with validated samples until
/// they meet or block.
pub struct DrPrm {
    core: Core,
    sk: Arc<AnnotatedSkeleton>,
}

impl DrPrm {
    pub fn new(core: Core, sk: Arc<AnnotatedSkeleton>) -> Self {
        Self { core, sk }
    }
}

impl Planner for DrPrm {
    fn name(&self) -> &'static str {
        "drprm"
    }

    fn build(&mut self) -> Result<(), PlanError> {
        let settings = ExpansionSettings::for_env(
            &self.core.env,
            self.core.settings.k,
            self.core.settings.samples_per_iteration,
            self.core.resolution(),
        );
        let Core {
            env, rm, rng, attempts, ..
        } = &mut self.core;
        let sk = &*self.sk;
        let comps = init_local_components(
            rm,
            env,
            sk,
            &AcceptanceCriteria::accept_all(),
            settings.samples_per_iteration,
            &settings,
            rng,
            attempts,
        );
        let mut active: Vec<(EdgeExpansion, usize)> = sk
            .edges()
            .iter()
            .filter_map(|e| {
                let a = comps.get(&e.u)?.first().copied();
                let b = comps.get(&e.v)?.first().copied();
                // advance by roughly one region radius along the intermediates
                let spacing = e.length() / (e.intermediates.len().max(2) - 1) as f64;
                let step = ((settings.radius / spacing).floor() as usize).max(1);
                Some((EdgeExpansion::new(sk, e.id, a, b), step))
            })
            .collect();
        while !active.is_empty() && !attempts.exhausted() {
            for (exp, step) in active.iter_mut() {
                for side in [Side::U, Side::V] {
                    if exp.is_met() {
                        break;
                    }
                    if exp.advance(side, *step, rm, env, sk, &settings, rng, attempts) == AdvanceOutcome::Met {
                        break;
                    }
                }
            }
            active.retain(|(exp, _)| !exp.is_met() && !exp.all_blocked());
        }
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
