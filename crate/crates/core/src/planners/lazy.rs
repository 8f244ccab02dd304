use std::time::Instant;

use super::{Core, PlanError, Planner};
use crate::geometry::ValidityMode;
use crate::query::{shortest_path, EdgeFilter, Path};
use crate::roadmap::{ConnectMode, EdgeStatus, NodeCheck, Roadmap};
use crate::Configuration;

/// Uniform nodes and k-nearest edges inserted unchecked; nodes and edges are
/// validated only when a candidate path uses them.
pub struct LazyPrm {
    core: Core,
}

impl LazyPrm {
    pub fn new(core: Core) -> Self {
        Self { core }
    }
}

/// Add `samples_per_iteration` nodes. `mode` is the node check applied on
/// insertion: `None` defers it, `Partial` rejects poses failing the partial
/// check. Edges follow the same rule. False once out of budget.
pub(super) fn grow_deferred(core: &mut Core, mode: Option<ValidityMode>) -> bool {
    let k = core.settings.k;
    let res = core.resolution();
    let (check, connect) = match mode {
        None => (NodeCheck::Unchecked, ConnectMode::Lazy),
        Some(_) => (NodeCheck::Partial, ConnectMode::Partial),
    };
    for _ in 0..core.settings.samples_per_iteration {
        match core.sample_uniform(mode) {
            None => return false,
            Some(None) => {}
            Some(Some(q)) => {
                let n = core.rm.add_node_checked(q, None, check);
                core.rm.connect_neighbors(&core.env, n, k, connect, res);
            }
        }
    }
    true
}

/// Search over non-invalid edges, fully validate the found path's nodes and
/// then its edges, discard failures and repeat; grow when no path exists.
pub(super) fn deferred_query(
    core: &mut Core,
    s: Configuration,
    g: Configuration,
    deadline: Instant,
    mode: Option<ValidityMode>,
) -> Result<Path, PlanError> {
    core.begin_query();
    let connect = if mode.is_some() {
        ConnectMode::Partial
    } else {
        ConnectMode::Lazy
    };
    let s = core.attach(s, connect)?;
    let g = core.attach(g, connect)?;
    let res = core.resolution();
    loop {
        core.check_deadline(deadline)?;
        let Some(p) = shortest_path(&core.rm, s, g, EdgeFilter::NON_INVALID) else {
            if !grow_deferred(core, mode) {
                return Err(core.exhausted_error(s, g));
            }
            continue;
        };
        let mut nodes_ok = true;
        for &n in &p.nodes {
            if core.rm.node(n).check != NodeCheck::Valid {
                let ok = core.env.is_valid_full(&core.rm.node(n).config);
                core.rm
                    .set_node_check(n, if ok { NodeCheck::Valid } else { NodeCheck::Invalid });
                nodes_ok &= ok;
            }
        }
        if !nodes_ok {
            continue;
        }
        let edges_ok = p
            .edges
            .iter()
            .all(|&e| core.rm.edge(e).status == EdgeStatus::Valid || core.rm.validate_edge(&core.env, e, res));
        if edges_ok {
            return Ok(p);
        }
    }
}

impl Planner for LazyPrm {
    fn name(&self) -> &'static str {
        "lazy"
    }

    fn build(&mut self) -> Result<(), PlanError> {
        while grow_deferred(&mut self.core, None) {}
        Ok(())
    }

    fn solve(&mut self, s: Configuration, g: Configuration, deadline: Instant) -> Result<Path, PlanError> {
        deferred_query(&mut self.core, s, g, deadline, None)
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
