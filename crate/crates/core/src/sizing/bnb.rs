//! Best-bound branch-and-bound.
//!
//! Open nodes are taken from the pool in fixed-size batches ordered by
//! bound and node id, solved (optionally on several threads), and their
//! outcomes applied in node-id order. Batch composition never depends on
//! the thread count, so the search is identical for any `threads`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, info};

use crate::error::{Error, Result};
use crate::lp::{Basis, LpStatus, Prepared};

use super::model::{assemble_milp, MilpModel};
use super::{SizingProblem, SizingSolution, SolverStats};

/// Nodes solved per round.
const BATCH: usize = 8;
/// Distance from an integer below which a count is integral.
const INT_TOL: f64 = 1e-9;
/// Smallest simultaneous flow (kW) that triggers a mode branch.
const COMP_TOL: f64 = 1e-9;
/// Rounding heuristic period, in node ids.
const HEURISTIC_EVERY: u64 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOptions {
    /// Relative gap at which the search stops.
    pub gap_tol: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub threads: usize,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            gap_tol: 1e-6,
            time_limit: None,
            node_limit: None,
            threads: 1,
        }
    }
}

struct Node {
    id: u64,
    bound: f64,
    changes: Vec<(usize, f64, f64)>,
    warm: Option<Arc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Candidate {
    x: Vec<f64>,
    objective: f64,
}

enum Outcome {
    Infeasible,
    Fathomed {
        bound: f64,
    },
    Branch {
        bound: f64,
        children: [Vec<(usize, f64, f64)>; 2],
        basis: Arc<Basis>,
    },
}

struct Evaluated {
    outcome: Outcome,
    candidate: Option<Candidate>,
    iterations: usize,
}

struct Search<'a> {
    problem: &'a SizingProblem,
    model: MilpModel,
    prepared: Prepared,
}

impl Search<'_> {
    fn bounds(&self, changes: &[(usize, f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.model.lp.lower.clone();
        let mut hi = self.model.lp.upper.clone();
        for &(j, l, h) in changes {
            lo[j] = l;
            hi[j] = h;
        }
        (lo, hi)
    }

    fn evaluate(&self, node: &Node) -> Result<Evaluated> {
        let (lo, hi) = self.bounds(&node.changes);
        let (sol, basis) = self.prepared.solve(&lo, &hi, node.warm.as_deref())?;
        let mut iterations = sol.iterations;
        let outcome = match sol.status {
            LpStatus::Infeasible => {
                return Ok(Evaluated {
                    outcome: Outcome::Infeasible,
                    candidate: None,
                    iterations,
                })
            }
            LpStatus::Unbounded => {
                return Err(Error::Numerical("sizing relaxation is unbounded".into()));
            }
            LpStatus::Optimal => sol.objective,
        };
        let x = &sol.x;
        let basis = Arc::new(basis);

        let branch = self.branch_on(x, &lo, &hi);
        let try_heuristic = branch.is_none() || node.id.is_multiple_of(HEURISTIC_EVERY);
        let candidate = if try_heuristic {
            let (cand, it) = self.polish(x, &lo, &hi, &basis)?;
            iterations += it;
            cand
        } else {
            None
        };
        let outcome = match branch {
            Some(children) => Outcome::Branch {
                bound: outcome,
                children,
                basis,
            },
            None => Outcome::Fathomed { bound: outcome },
        };
        Ok(Evaluated {
            outcome,
            candidate,
            iterations,
        })
    }

    /// Bound changes of the two children, or `None` at an integral point.
    fn branch_on(&self, x: &[f64], lo: &[f64], hi: &[f64]) -> Option<[Vec<(usize, f64, f64)>; 2]> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.model.integers {
            let frac = x[j] - x[j].floor();
            let dist = frac.min(1.0 - frac);
            if dist > INT_TOL && best.is_none_or(|(_, d)| dist > d) {
                best = Some((j, dist));
            }
        }
        if let Some((j, _)) = best {
            let down = x[j].floor();
            return Some([vec![(j, lo[j], down)], vec![(j, down + 1.0, hi[j])]]);
        }

        let ix = &self.model.index;
        let mut worst: Option<(usize, usize, f64)> = None;
        for n in 0..ix.participants {
            for t in 0..ix.hours {
                let both = x[ix.p_charge(n, t)].min(x[ix.p_discharge(n, t)]);
                if both > COMP_TOL && worst.is_none_or(|(_, _, w)| both > w) {
                    worst = Some((n, t, both));
                }
            }
        }
        let (n, t, _) = worst?;
        let (pc, pd) = (ix.p_charge(n, t), ix.p_discharge(n, t));
        Some([vec![(pd, lo[pd], 0.0)], vec![(pc, lo[pc], 0.0)]])
    }

    /// Fixes counts to rounded values and every hour to a single battery
    /// mode, then re-solves: the result is integer feasible. Counts are
    /// rounded to nearest first, then down.
    fn polish(
        &self,
        x: &[f64],
        lo: &[f64],
        hi: &[f64],
        warm: &Basis,
    ) -> Result<(Option<Candidate>, usize)> {
        let ix = &self.model.index;
        let eta = self.problem.bess.eta_charge * self.problem.bess.eta_discharge;
        let mut iterations = 0;
        for round_up in [true, false] {
            let (mut l, mut h) = (lo.to_vec(), hi.to_vec());
            for &j in &self.model.integers {
                let v = if round_up {
                    x[j].round()
                } else {
                    (x[j] + INT_TOL).floor()
                };
                let v = v.clamp(l[j], h[j]);
                l[j] = v;
                h[j] = v;
            }
            for n in 0..ix.participants {
                for t in 0..ix.hours {
                    let (pc, pd) = (ix.p_charge(n, t), ix.p_discharge(n, t));
                    let (bc, bd) = (ix.b_charge(n, t), ix.b_discharge(n, t));
                    let charge = if h[pc] == 0.0 {
                        false
                    } else if h[pd] == 0.0 {
                        true
                    } else if x[pc] > COMP_TOL || x[pd] > COMP_TOL {
                        x[pc] * eta >= x[pd]
                    } else {
                        self.problem.pv_per_panel[t] > 0.0
                    };
                    if charge {
                        h[pd] = 0.0;
                        h[bd] = 0.0;
                        l[bc] = h[bc];
                    } else {
                        h[pc] = 0.0;
                        h[bc] = 0.0;
                        l[bd] = h[bd];
                    }
                }
            }
            let (sol, _) = self.prepared.solve(&l, &h, Some(warm))?;
            iterations += sol.iterations;
            if sol.status == LpStatus::Optimal {
                return Ok((
                    Some(Candidate {
                        objective: sol.objective,
                        x: sol.x,
                    }),
                    iterations,
                ));
            }
        }
        Ok((None, iterations))
    }
}

fn tolerance(incumbent: f64, gap_tol: f64) -> f64 {
    gap_tol.max(1e-9) * incumbent.abs().max(1.0)
}

pub fn solve_bnb(problem: &SizingProblem, opts: &BnbOptions) -> Result<SizingSolution> {
    let start = Instant::now();
    let model = assemble_milp(problem)?;
    let prepared = Prepared::new(&model.lp);
    let search = Search {
        problem,
        model,
        prepared,
    };
    let threads = opts.threads.max(1);

    // no installation is always feasible
    let zero_changes: Vec<(usize, f64, f64)> = search
        .model
        .integers
        .iter()
        .map(|&j| (j, 0.0, 0.0))
        .collect();
    let (zl, zh) = search.bounds(&zero_changes);
    let (zero, _) = search.prepared.solve(&zl, &zh, None)?;
    let mut lp_iterations = zero.iterations;
    let mut incumbent = match zero.status {
        LpStatus::Optimal => Some(Candidate {
            objective: zero.objective,
            x: zero.x,
        }),
        _ => None,
    };

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        id: 0,
        bound: f64::INFINITY,
        changes: Vec::new(),
        warm: None,
    });
    let mut next_id = 1u64;
    let mut nodes = 0usize;
    let mut closed_bound = f64::NEG_INFINITY;
    let mut root_infeasible = false;
    let mut limited = false;

    loop {
        let inc = incumbent
            .as_ref()
            .map_or(f64::NEG_INFINITY, |c| c.objective);
        let cutoff = inc + tolerance(inc, opts.gap_tol);
        let mut batch = Vec::with_capacity(BATCH);
        while batch.len() < BATCH {
            match heap.pop() {
                Some(node) if node.bound > cutoff => batch.push(node),
                Some(node) => {
                    closed_bound = closed_bound.max(node.bound);
                    // everything left is below the cutoff as well
                    for rest in heap.drain() {
                        closed_bound = closed_bound.max(rest.bound);
                    }
                }
                None => break,
            }
        }
        if batch.is_empty() {
            break;
        }
        let over_nodes = opts.node_limit.is_some_and(|l| nodes >= l);
        let over_time = opts.time_limit.is_some_and(|l| start.elapsed() >= l);
        if over_nodes || over_time {
            heap.extend(batch);
            limited = true;
            break;
        }

        let results: Vec<Result<Evaluated>> = if threads == 1 || batch.len() == 1 {
            batch.iter().map(|n| search.evaluate(n)).collect()
        } else {
            let chunk = batch.len().div_ceil(threads);
            let search = &search;
            std::thread::scope(|s| {
                let handles: Vec<_> = batch
                    .chunks(chunk)
                    .map(|c| {
                        s.spawn(move || c.iter().map(|n| search.evaluate(n)).collect::<Vec<_>>())
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("branch-and-bound worker panicked"))
                    .collect()
            })
        };

        for (node, res) in batch.into_iter().zip(results) {
            let ev = res?;
            nodes += 1;
            lp_iterations += ev.iterations;
            if let Some(c) = ev.candidate {
                if incumbent.as_ref().is_none_or(|i| c.objective > i.objective) {
                    debug!("node {} improves incumbent to {}", node.id, c.objective);
                    incumbent = Some(c);
                }
            }
            let inc = incumbent
                .as_ref()
                .map_or(f64::NEG_INFINITY, |c| c.objective);
            let cutoff = inc + tolerance(inc, opts.gap_tol);
            match ev.outcome {
                Outcome::Infeasible => {
                    if node.id == 0 {
                        root_infeasible = true;
                    }
                }
                Outcome::Fathomed { bound } => closed_bound = closed_bound.max(bound),
                Outcome::Branch {
                    bound,
                    children,
                    basis,
                } => {
                    if bound <= cutoff {
                        closed_bound = closed_bound.max(bound);
                        continue;
                    }
                    for extra in children {
                        let mut changes = node.changes.clone();
                        changes.extend(extra);
                        heap.push(Node {
                            id: next_id,
                            bound,
                            changes,
                            warm: Some(Arc::clone(&basis)),
                        });
                        next_id += 1;
                    }
                }
            }
        }
        let inc = incumbent
            .as_ref()
            .map_or(f64::NEG_INFINITY, |c| c.objective);
        let open = heap.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
        let bound = open.max(closed_bound).max(inc);
        info!(
            "node={} bound={:.6} incumbent={:.6} gap={:.3e}",
            nodes,
            bound,
            inc,
            (bound - inc) / inc.abs().max(1.0)
        );
    }

    if root_infeasible {
        return Err(Error::Infeasible);
    }
    let best = incumbent.ok_or(Error::Infeasible)?;
    let open = heap.peek().map_or(f64::NEG_INFINITY, |n| n.bound);
    let bound = open.max(closed_bound).max(best.objective);
    let gap = ((bound - best.objective) / best.objective.abs().max(1.0)).max(0.0);
    let proven = !limited;
    Ok(search.solution(
        best.x,
        SolverStats {
            nodes,
            lp_iterations,
            bound,
            gap,
            proven,
        },
    ))
}

impl Search<'_> {
    fn solution(&self, mut x: Vec<f64>, mut stats: SolverStats) -> SizingSolution {
        let ix = &self.model.index;
        let n_pv: Vec<u32> = (0..ix.participants)
            .map(|n| x[ix.n_pv(n)].round() as u32)
            .collect();
        let n_bess: Vec<u32> = (0..ix.participants)
            .map(|n| x[ix.n_bess(n)].round() as u32)
            .collect();
        for n in 0..ix.participants {
            x[ix.n_pv(n)] = f64::from(n_pv[n]);
            x[ix.n_bess(n)] = f64::from(n_bess[n]);
        }
        let dispatch = self.model.dispatch(self.problem, &x);
        let clean = clean_vector(&self.model, &dispatch, x);
        let objective = self.model.net_profit_of(&clean);
        stats.bound = stats.bound.max(objective);
        SizingSolution {
            ids: self
                .problem
                .participants
                .iter()
                .map(|p| p.id.clone())
                .collect(),
            n_pv,
            n_bess,
            dispatch,
            objective,
            stats,
        }
    }
}

/// `x` with flows replaced by the cleaned dispatch values.
pub(crate) fn clean_vector(
    model: &MilpModel,
    dispatch: &crate::dispatch::DispatchSolution,
    mut x: Vec<f64>,
) -> Vec<f64> {
    let ix = &model.index;
    for (n, p) in dispatch.participants.iter().enumerate() {
        for t in 0..ix.hours {
            x[ix.p_self(n, t)] = p.p_self[t];
            x[ix.p_sell(n, t)] = p.p_sell[t];
            x[ix.p_charge(n, t)] = p.p_charge[t];
            x[ix.p_discharge(n, t)] = p.p_discharge[t];
        }
        for t in 0..=ix.hours {
            x[ix.soc(n, t)] = p.soc[t];
        }
    }
    for t in 0..ix.hours {
        x[ix.p_share(t)] = dispatch.p_share[t];
    }
    x
}
