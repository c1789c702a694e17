use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::model::MiqpModel;
use super::qp::{solve_qp, QpOptions, QpOutcome, QpProblem, QpSolution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Best assignment found, binaries exactly 0 or 1. `None` when no
    /// feasible point was found.
    pub assignment: Option<Vec<f64>>,
    /// `+inf` when `assignment` is `None`.
    pub objective: f64,
    pub nodes_explored: usize,
    pub best_bound: f64,
    /// Set by enumeration when another fixing reached the same objective.
    pub tie: bool,
}

impl SolveOutcome {
    pub(crate) fn infeasible(nodes_explored: usize) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            assignment: None,
            objective: f64::INFINITY,
            nodes_explored,
            best_bound: f64::INFINITY,
            tie: false,
        }
    }

    /// Binary part of the assignment as 0/1 bytes.
    pub fn binaries(&self, m: &MiqpModel) -> Option<Vec<u8>> {
        self.assignment.as_ref().map(|x| {
            x[m.binary_range()]
                .iter()
                .map(|&v| (v > 0.5) as u8)
                .collect()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbOptions {
    /// Relative gap `(incumbent - bound) / max(1, |incumbent|)` at which the
    /// search stops.
    pub gap_tol: f64,
    pub node_limit: usize,
    pub int_tol: f64,
    pub qp: QpOptions,
}

impl Default for BbOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            node_limit: 1_000_000,
            int_tol: 1e-6,
            qp: QpOptions::default(),
        }
    }
}

pub fn solve_bb(m: &MiqpModel, gap_tol: f64, node_limit: usize) -> Result<SolveOutcome> {
    solve_bb_with(
        m,
        &BbOptions {
            gap_tol,
            node_limit,
            ..BbOptions::default()
        },
    )
}

struct Node {
    bound: f64,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
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
    // Reversed so that BinaryHeap pops the smallest bound, then smallest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    m: &'a MiqpModel,
    opts: &'a BbOptions,
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes: usize,
    next_id: usize,
    incumbent: Option<(Vec<f64>, f64)>,
}

enum Branch {
    Integral,
    On(usize),
}

impl<'a> Search<'a> {
    fn relax(&mut self, lower: &[f64], upper: &[f64]) -> Result<Option<QpSolution>> {
        self.nodes += 1;
        let p = QpProblem {
            quad: &self.m.quad_diag,
            lin: &self.m.lin_cost,
            rows: &self.m.rows,
            lower,
            upper,
        };
        match solve_qp(&p, &self.opts.qp)? {
            QpOutcome::Optimal(s) => Ok(Some(s)),
            QpOutcome::Infeasible => Ok(None),
        }
    }

    fn make_node(&mut self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Option<Node>> {
        let Some(sol) = self.relax(&lower, &upper)? else {
            return Ok(None);
        };
        let id = self.next_id;
        self.next_id += 1;
        Ok(Some(Node {
            bound: sol.objective,
            id,
            lower,
            upper,
            x: sol.x,
        }))
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.incumbent {
            Some((_, inc)) => inc - bound <= self.opts.gap_tol * inc.abs().max(1.0),
            None => false,
        }
    }

    /// Most fractional free binary, lowest index on ties.
    fn branch_var(&self, node: &Node) -> Branch {
        let mut best: Option<(usize, f64)> = None;
        for i in self.m.binary_range() {
            if node.upper[i] - node.lower[i] < 0.5 {
                continue;
            }
            let v = node.x[i];
            let frac = (v - v.round()).abs();
            if frac > self.opts.int_tol && best.is_none_or(|(_, f)| frac > f) {
                best = Some((i, frac));
            }
        }
        match best {
            Some((i, _)) => Branch::On(i),
            None => Branch::Integral,
        }
    }

    /// Rounds the binaries of an integral relaxation, re-solves the
    /// continuous part and offers the result as incumbent. Returns false when
    /// the rounded fixing is infeasible.
    fn polish(&mut self, node: &Node) -> Result<bool> {
        let mut lower = node.lower.clone();
        let mut upper = node.upper.clone();
        for i in self.m.binary_range() {
            let v = node.x[i].round().clamp(0.0, 1.0);
            lower[i] = v;
            upper[i] = v;
        }
        let Some(sol) = self.relax(&lower, &upper)? else {
            return Ok(false);
        };
        let mut x = sol.x;
        for i in self.m.binary_range() {
            x[i] = lower[i];
        }
        let obj = self.m.objective(&x);
        if self.incumbent.as_ref().is_none_or(|(_, inc)| obj < *inc) {
            self.incumbent = Some((x, obj));
        }
        Ok(true)
    }

    fn children(&mut self, node: &Node, var: usize) -> Result<[Option<Node>; 2]> {
        let mut out = [None, None];
        for (slot, v) in out.iter_mut().zip([0.0, 1.0]) {
            if self.nodes >= self.opts.node_limit {
                break;
            }
            let mut lower = node.lower.clone();
            let mut upper = node.upper.clone();
            lower[var] = v;
            upper[var] = v;
            *slot = self.make_node(lower, upper)?;
        }
        Ok(out)
    }
}

pub fn solve_bb_with(m: &MiqpModel, opts: &BbOptions) -> Result<SolveOutcome> {
    m.validate()?;
    if opts.gap_tol.is_nan() || opts.gap_tol < 0.0 || opts.node_limit == 0 {
        return Err(Error::InvalidParameter {
            name: "gap_tol/node_limit",
            reason: "gap_tol must be >= 0 and node_limit positive".into(),
        });
    }
    let (lower, upper): (Vec<f64>, Vec<f64>) = m.bounds.iter().copied().unzip();
    let mut s = Search {
        m,
        opts,
        lower,
        upper,
        nodes: 0,
        next_id: 0,
        incumbent: None,
    };

    let root = s.make_node(s.lower.clone(), s.upper.clone())?;
    let Some(root) = root else {
        return Ok(SolveOutcome::infeasible(s.nodes));
    };

    let mut heap = BinaryHeap::new();

    // Dive from the root towards the rounded relaxation to find a first
    // incumbent; the sibling at each level joins the best-first queue.
    let mut current = Some(root);
    while let Some(node) = current.take() {
        match s.branch_var(&node) {
            Branch::Integral => {
                if !s.polish(&node)? {
                    heap.push(node);
                }
                break;
            }
            Branch::On(var) => {
                let up_first = node.x[var] >= 0.5;
                let [zero, one] = s.children(&node, var)?;
                let (pref, other) = if up_first { (one, zero) } else { (zero, one) };
                if let Some(o) = other {
                    heap.push(o);
                }
                current = pref.or_else(|| heap.pop());
                if s.nodes >= opts.node_limit {
                    if let Some(c) = current.take() {
                        heap.push(c);
                    }
                }
            }
        }
    }

    let mut limit_hit = false;
    while let Some(node) = heap.pop() {
        if s.prunable(node.bound) {
            heap.push(node);
            break;
        }
        if s.nodes >= opts.node_limit {
            heap.push(node);
            limit_hit = true;
            break;
        }
        match s.branch_var(&node) {
            Branch::Integral => {
                if !s.polish(&node)? {
                    // Rounded fixing infeasible: branch on any free binary
                    // that is not exactly integral.
                    let var = m
                        .binary_range()
                        .filter(|&i| {
                            node.upper[i] - node.lower[i] > 0.5 && node.x[i].fract() != 0.0
                        })
                        .max_by(|&a, &b| {
                            let fa = (node.x[a] - node.x[a].round()).abs();
                            let fb = (node.x[b] - node.x[b].round()).abs();
                            fa.total_cmp(&fb).then(b.cmp(&a))
                        });
                    if let Some(var) = var {
                        for c in s.children(&node, var)?.into_iter().flatten() {
                            heap.push(c);
                        }
                    }
                }
            }
            Branch::On(var) => {
                for c in s.children(&node, var)?.into_iter().flatten() {
                    if !s.prunable(c.bound) {
                        heap.push(c);
                    }
                }
            }
        }
    }
    if !limit_hit && s.nodes >= opts.node_limit && heap.iter().any(|n| !s.prunable(n.bound)) {
        limit_hit = true;
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let nodes_explored = s.nodes;
    Ok(match s.incumbent {
        Some((x, obj)) => SolveOutcome {
            status: if limit_hit {
                SolveStatus::NodeLimit
            } else {
                SolveStatus::Optimal
            },
            assignment: Some(x),
            objective: obj,
            nodes_explored,
            best_bound: open_bound.min(obj),
            tie: false,
        },
        None if limit_hit => SolveOutcome {
            status: SolveStatus::NodeLimit,
            assignment: None,
            objective: f64::INFINITY,
            nodes_explored,
            best_bound: open_bound,
            tie: false,
        },
        None => SolveOutcome::infeasible(nodes_explored),
    })
}
