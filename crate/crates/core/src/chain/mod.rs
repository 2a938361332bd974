//! Explicit-state discrete-time Markov chains.
//!
//! [`build_chain`] composes a [`Model`](crate::model::Model) breadth-first
//! from its initial state. Commands sharing a label fire jointly in every
//! module that declares the label; a state with no enabled alternative
//! becomes absorbing with a probability-1 self-loop.

mod build;
mod scc;

use std::collections::BTreeSet;

use serde::Serialize;

pub use build::{build_chain, var_layout, BuildOptions, Policy, DEFAULT_STATE_CAP};
pub use scc::{classify_terminal, strongly_connected_components, TerminationReport};

use crate::model::{Kind, ModelError, Scope, Valuation, Value, ConstantSet};

/// Row-sum tolerance for stochastic rows.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("nondeterministic state {state}: {} enabled alternatives ({})", .alternatives.len(), .alternatives.join("; "))]
    NondeterministicState {
        state: String,
        alternatives: Vec<String>,
    },
    #[error("modules synchronising on [{label}] both assign `{var}`")]
    ConflictingAssignment { label: String, var: String },
    #[error("state space exceeds the cap of {cap} states")]
    StateSpaceLimitExceeded { cap: usize },
    #[error("branch probabilities of command {command} in module `{module}` sum to {sum}")]
    BranchSum {
        module: String,
        command: usize,
        sum: f64,
    },
    #[error("row {state} sums to {sum}")]
    NotStochastic { state: usize, sum: f64 },
    #[error("state {0} is unreachable from the initial state")]
    Unreachable(usize),
    #[error("malformed chain: {0}")]
    Malformed(String),
}

/// Variable layout of a chain's dense state vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarInfo {
    pub name: String,
    pub kind: Kind,
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainStats {
    pub states: usize,
    pub transitions: usize,
}

/// An explicit, immutable DTMC.
#[derive(Debug, Clone)]
pub struct Chain {
    vars: Vec<VarInfo>,
    constants: ConstantSet,
    /// Flattened state vectors, `vars.len()` slots each.
    states: Vec<i64>,
    initial: usize,
    rows: Vec<Vec<(usize, f64)>>,
    absorbing: Vec<bool>,
}

impl Chain {
    /// Assemble a chain from explicit parts, checking row-stochasticity
    /// and reachability from `initial`.
    pub fn from_parts(
        vars: Vec<VarInfo>,
        constants: ConstantSet,
        states: Vec<Vec<i64>>,
        initial: usize,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self, ChainError> {
        let n = states.len();
        if rows.len() != n || initial >= n.max(1) {
            return Err(ChainError::Malformed(format!(
                "{n} states, {} rows, initial {initial}",
                rows.len()
            )));
        }
        let width = vars.len();
        let mut flat = Vec::with_capacity(n * width);
        for s in &states {
            if s.len() != width {
                return Err(ChainError::Malformed("state width mismatch".into()));
            }
            flat.extend_from_slice(s);
        }
        let mut clean = Vec::with_capacity(n);
        for (i, row) in rows.into_iter().enumerate() {
            let mut row: Vec<(usize, f64)> = row.into_iter().filter(|&(_, p)| p > 0.0).collect();
            row.sort_by_key(|&(t, _)| t);
            row.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            if row.iter().any(|&(t, _)| t >= n) {
                return Err(ChainError::Malformed(format!("row {i} targets a missing state")));
            }
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ChainError::NotStochastic { state: i, sum });
            }
            clean.push(row);
        }
        let chain = Self::assemble(vars, constants, flat, initial, clean);
        let reach = chain.reachable_from(initial);
        if let Some(unreached) = reach.iter().position(|r| !r) {
            return Err(ChainError::Unreachable(unreached));
        }
        Ok(chain)
    }

    pub(crate) fn assemble(
        vars: Vec<VarInfo>,
        constants: ConstantSet,
        states: Vec<i64>,
        initial: usize,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Self {
        let absorbing = rows
            .iter()
            .enumerate()
            .map(|(i, row)| row.len() == 1 && row[0].0 == i)
            .collect();
        Chain {
            vars,
            constants,
            states,
            initial,
            rows,
            absorbing,
        }
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn constants(&self) -> &ConstantSet {
        &self.constants
    }

    pub fn state(&self, idx: usize) -> &[i64] {
        let w = self.vars.len();
        &self.states[idx * w..(idx + 1) * w]
    }

    pub fn row(&self, idx: usize) -> &[(usize, f64)] {
        &self.rows[idx]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn is_absorbing(&self, idx: usize) -> bool {
        self.absorbing[idx]
    }

    pub fn absorbing(&self) -> BTreeSet<usize> {
        (0..self.num_states()).filter(|&i| self.absorbing[i]).collect()
    }

    pub fn stats(&self) -> ChainStats {
        ChainStats {
            states: self.num_states(),
            transitions: self.rows.iter().map(Vec::len).sum(),
        }
    }

    /// Resolution scope for compiling predicates over this chain's states.
    pub fn scope(&self) -> Scope {
        Scope::from_parts(
            self.vars
                .iter()
                .enumerate()
                .map(|(i, v)| (v.name.clone(), i, v.kind)),
            self.constants.clone(),
        )
    }

    pub fn valuation(&self, idx: usize) -> Valuation {
        self.vars
            .iter()
            .zip(self.state(idx))
            .map(|(v, &x)| {
                let value = match v.kind {
                    Kind::Bool => Value::Bool(x != 0),
                    _ => Value::Int(x),
                };
                (v.name.clone(), value)
            })
            .collect()
    }

    /// Human-readable `(x=1, b=true)` rendering of a state.
    pub fn describe_state(&self, idx: usize) -> String {
        describe(&self.vars, self.state(idx))
    }

    pub(crate) fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(s) = stack.pop() {
            for &(t, _) in &self.rows[s] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// JSON dump: variables, states, rows and the absorbing set.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "variables": self.vars,
            "initial": self.initial,
            "states": (0..self.num_states()).map(|i| self.state(i).to_vec()).collect::<Vec<_>>(),
            "rows": self.rows,
            "absorbing": self.absorbing(),
        })
    }
}

pub(crate) fn describe(vars: &[VarInfo], state: &[i64]) -> String {
    let parts: Vec<String> = vars
        .iter()
        .zip(state)
        .map(|(v, &x)| match v.kind {
            Kind::Bool => format!("{}={}", v.name, x != 0),
            _ => format!("{}={x}", v.name),
        })
        .collect();
    format!("({})", parts.join(", "))
}

#[cfg(test)]
mod tests;
