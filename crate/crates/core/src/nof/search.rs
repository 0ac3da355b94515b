//! Exact minimum one-way NOF cost by exhaustive protocol search.
//!
//! Budgets `(c_1, …, c_k)` with `Σ c_i = C` are tried in lexicographic order
//! for `C = 0, 1, …`. Message tables of players `1..k-1` are enumerated over
//! the views that actually occur, as restricted growth strings (the first
//! occurrence of each message symbol appears in increasing order), which
//! removes relabelings of the alphabet. The last x-player is not enumerated:
//! the protocol is correct iff any two inputs `(x, z)`, `(x, z')` with
//! different target values get different transcripts, so once the earlier
//! messages are fixed the last x-player's table is a proper colouring of a
//! conflict graph on its views with `2^{c_k}` colours, decided exactly by
//! DSATUR backtracking. The output player's rule is then the target value
//! on each `(x, transcript)` class.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{view_key, view_key_space, NofDomain, NofInput, NofTarget, OutputRule, Protocol, Rule, Turn};
use crate::{Error, Result};

pub const SEARCH_DOMAIN_LIMIT: u64 = 1 << 12;
pub const SEARCH_BUDGET_LIMIT: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Smallest correct total budget, `None` if it exceeds `max_budget`.
    pub min_cost: Option<u32>,
    pub budgets: Option<Vec<u32>>,
    /// A witness protocol of cost `min_cost`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Protocol>,
    pub max_budget: u32,
    /// Message tables enumerated plus colourings attempted.
    pub nodes: u64,
}

struct Problem<'a> {
    domain: &'a NofDomain,
    inputs: Vec<NofInput>,
    values: Vec<bool>,
    nodes: u64,
}

pub fn min_occ_nof_exact(target: &dyn NofTarget, max_budget: u32) -> Result<SearchOutcome> {
    if max_budget > SEARCH_BUDGET_LIMIT {
        return Err(Error::InvalidParams(format!("max_budget {max_budget} > {SEARCH_BUDGET_LIMIT}")));
    }
    let domain = target.domain();
    let total = domain.enumerable(SEARCH_DOMAIN_LIMIT)?;
    if domain.k() == 0 {
        return Err(Error::InvalidParams("need at least one x-player".into()));
    }
    let inputs: Vec<NofInput> = (0..total).map(|i| domain.input_at(i)).collect();
    let values = inputs.iter().map(|inp| target.eval(&inp.xs, inp.z)).collect();
    let mut problem = Problem { domain: &domain, inputs, values, nodes: 0 };
    for cost in 0..=max_budget {
        for budgets in compositions(domain.k(), cost) {
            let prior = vec![0u64; problem.inputs.len()];
            let mut tables = Vec::new();
            if problem.solve(0, &budgets, &prior, &mut tables) {
                let protocol = problem.build(target, &budgets, &tables)?;
                return Ok(SearchOutcome {
                    min_cost: Some(cost),
                    budgets: Some(budgets),
                    protocol: Some(protocol),
                    max_budget,
                    nodes: problem.nodes,
                });
            }
        }
    }
    Ok(SearchOutcome { min_cost: None, budgets: None, protocol: None, max_budget, nodes: problem.nodes })
}

/// All `k`-tuples of non-negative integers summing to `total`, lexicographic.
fn compositions(k: usize, total: u32) -> Vec<Vec<u32>> {
    fn go(k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == k {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            go(k, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, total, &mut Vec::new(), &mut out);
    out
}

impl Problem<'_> {
    fn keys(&self, player: usize, prior: &[u64]) -> (Vec<u64>, Vec<usize>) {
        let mut distinct: Vec<u64> = self
            .inputs
            .iter()
            .zip(prior)
            .map(|(inp, &t)| view_key(self.domain, player, inp, t))
            .collect();
        let raw = distinct.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let index: HashMap<u64, usize> = distinct.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let slot = raw.iter().map(|k| index[k]).collect();
        (distinct, slot)
    }

    /// Tries player `player` and everything after it. On success `tables`
    /// holds `(key, message)` lists for every player.
    fn solve(&mut self, player: usize, budgets: &[u32], prior: &[u64], tables: &mut Vec<Vec<(u64, u64)>>) -> bool {
        let k = self.domain.k();
        let bits = budgets[player];
        let (keys, slot) = self.keys(player, prior);
        if player + 1 == k {
            self.nodes += 1;
            return match self.colour_last(bits, prior, &keys, &slot) {
                Some(colours) => {
                    tables.push(keys.into_iter().zip(colours).collect());
                    true
                }
                None => false,
            };
        }
        let alphabet = 1u64 << bits;
        let mut assignment = vec![0u64; keys.len()];
        self.enumerate(0, 0, alphabet, &mut assignment, &mut |this, assignment| {
            this.nodes += 1;
            let next: Vec<u64> = prior.iter().zip(&slot).map(|(&t, &s)| t << bits | assignment[s]).collect();
            tables.push(keys.iter().copied().zip(assignment.iter().copied()).collect());
            if this.solve(player + 1, budgets, &next, tables) {
                return true;
            }
            tables.pop();
            false
        })
    }

    /// Restricted growth strings: position `pos` may use symbols `0..=used` (capped by the alphabet).
    fn enumerate(
        &mut self,
        pos: usize,
        used: u64,
        alphabet: u64,
        assignment: &mut Vec<u64>,
        visit: &mut dyn FnMut(&mut Self, &[u64]) -> bool,
    ) -> bool {
        if pos == assignment.len() {
            return visit(self, assignment);
        }
        let limit = (used + 1).min(alphabet);
        for sym in 0..limit {
            assignment[pos] = sym;
            let used = if sym == used { used + 1 } else { used };
            if self.enumerate(pos + 1, used, alphabet, assignment, visit) {
                return true;
            }
        }
        false
    }

    fn colour_last(&self, bits: u32, prior: &[u64], keys: &[u64], slot: &[usize]) -> Option<Vec<u64>> {
        let z_size = self.domain.z_size as usize;
        let mut edges = Vec::new();
        for (block, _) in self.inputs.chunks(z_size).enumerate() {
            let base = block * z_size;
            for a in base..base + z_size {
                for b in a + 1..base + z_size {
                    if self.values[a] != self.values[b] && prior[a] == prior[b] {
                        edges.push((slot[a], slot[b]));
                    }
                }
            }
        }
        if bits == 0 {
            return edges.is_empty().then(|| vec![0; keys.len()]);
        }
        let mut adj = vec![Vec::new(); keys.len()];
        for (a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        colour_graph(&adj, 1usize << bits).map(|c| c.into_iter().map(|v| v as u64).collect())
    }

    fn build(&self, target: &dyn NofTarget, budgets: &[u32], tables: &[Vec<(u64, u64)>]) -> Result<Protocol> {
        let mut turns = Vec::new();
        let mut prior_bits = 0;
        for (player, (&bits, table)) in budgets.iter().zip(tables).enumerate() {
            if bits == 0 {
                continue;
            }
            let space = view_key_space(self.domain, player, prior_bits)
                .ok_or_else(|| Error::Protocol("table key space overflows".into()))?;
            let mut entries = vec![0u64; space as usize];
            for &(key, msg) in table {
                entries[key as usize] = msg;
            }
            turns.push(Turn { speaker: player, msg_bits: bits, rule: Rule::Table { entries } });
            prior_bits += bits;
        }
        let cost: u32 = budgets.iter().sum();
        let x_total = self.domain.x_total().expect("search domains are small");
        let mut outputs = vec![false; (x_total << cost) as usize];
        let mut p = Protocol::new(
            format!("searched[{}]", target.describe()),
            self.domain.clone(),
            turns,
            OutputRule::Table { entries: outputs.clone() },
            0,
        )?;
        for (inp, &v) in self.inputs.iter().zip(&self.values) {
            let (t, _) = p.simulate(inp, None)?;
            outputs[(self.domain.x_tuple_index(&inp.xs) << cost | t.value()) as usize] = v;
        }
        p.output = OutputRule::Table { entries: outputs };
        Ok(p)
    }
}

/// Exact `m`-colouring by DSATUR backtracking; colours are introduced in order.
pub(crate) fn colour_graph(adj: &[Vec<usize>], m: usize) -> Option<Vec<usize>> {
    const NONE: usize = usize::MAX;
    fn pick(adj: &[Vec<usize>], colours: &[usize]) -> Option<usize> {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in 0..adj.len() {
            if colours[v] != NONE {
                continue;
            }
            let mut seen: Vec<usize> = adj[v].iter().map(|&u| colours[u]).filter(|&c| c != NONE).collect();
            seen.sort_unstable();
            seen.dedup();
            let cand = (seen.len(), adj[v].len(), v);
            if best.is_none_or(|b| (cand.0, cand.1) > (b.0, b.1)) {
                best = Some(cand);
            }
        }
        best.map(|b| b.2)
    }
    fn go(adj: &[Vec<usize>], m: usize, colours: &mut [usize], used: usize) -> bool {
        let Some(v) = pick(adj, colours) else {
            return true;
        };
        for c in 0..(used + 1).min(m) {
            if adj[v].iter().any(|&u| colours[u] == c) {
                continue;
            }
            colours[v] = c;
            if go(adj, m, colours, used.max(c + 1)) {
                return true;
            }
            colours[v] = NONE;
        }
        false
    }
    let mut colours = vec![NONE; adj.len()];
    go(adj, m, &mut colours, 0).then_some(colours)
}
