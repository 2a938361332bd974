use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::model::{
    domain_bounds, eval_bool, eval_compiled, ConstantSet, Domain, Expr, Kind, Model, ModelError,
    Scope, Slot,
};

use super::{describe, Chain, ChainError, VarInfo, ROW_SUM_TOLERANCE};

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// How to resolve states with more than one enabled alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    /// Treat nondeterminism as a modelling error.
    #[default]
    Reject,
    /// Mix the alternatives with equal weight.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub policy: Policy,
    pub state_cap: usize,
}

impl Default for BuildOptions {
    /// Reject policy; the cap honours `ASSUREKIT_STATE_CAP` when set.
    fn default() -> Self {
        let state_cap = std::env::var("ASSUREKIT_STATE_CAP")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_STATE_CAP);
        BuildOptions {
            policy: Policy::Reject,
            state_cap,
        }
    }
}

impl BuildOptions {
    pub fn with_policy(mut self, policy: Policy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_state_cap(mut self, cap: usize) -> Self {
        self.state_cap = cap;
        self
    }
}

struct CBranch {
    prob: f64,
    updates: Vec<(usize, Expr<Slot>)>,
}

struct CCommand {
    module: usize,
    label: Option<String>,
    guard: Expr<Slot>,
    branches: Vec<CBranch>,
    /// Source position for diagnostics: (module name, 1-based command index).
    origin: (String, usize),
}

/// Packs a dense state vector into a compact hashable key.
struct Packer {
    fields: Vec<(i64, u32, usize, u32)>, // (lo, bits, word, shift)
    words: usize,
}

impl Packer {
    fn new(vars: &[VarInfo]) -> Self {
        let mut fields = Vec::with_capacity(vars.len());
        let (mut word, mut used) = (0usize, 0u32);
        for v in vars {
            let span = (v.hi - v.lo) as u64;
            let bits = (64 - span.leading_zeros()).max(1);
            if used + bits > 64 {
                word += 1;
                used = 0;
            }
            fields.push((v.lo, bits, word, used));
            used += bits;
        }
        Packer {
            fields,
            words: word + 1,
        }
    }

    fn pack(&self, state: &[i64]) -> Box<[u64]> {
        let mut key = vec![0u64; self.words];
        for (&(lo, _, word, shift), &x) in self.fields.iter().zip(state) {
            key[word] |= ((x - lo) as u64) << shift;
        }
        key.into_boxed_slice()
    }
}

struct Alternative {
    description: String,
    /// (probability, concrete assignments)
    branches: Vec<(f64, Vec<(usize, i64)>)>,
}

/// Dense variable layout of a model, in declaration order.
pub fn var_layout(model: &Model, consts: &ConstantSet) -> Result<Vec<VarInfo>, ModelError> {
    model
        .variables()
        .map(|(_, v)| {
            let (lo, hi) = domain_bounds(v, consts)?;
            let kind = match v.domain {
                Domain::Bool => Kind::Bool,
                Domain::Range { .. } => Kind::Int,
            };
            Ok(VarInfo {
                name: v.name.clone(),
                kind,
                lo,
                hi,
            })
        })
        .collect()
}

/// Compose a model into an explicit chain by breadth-first exploration.
pub fn build_chain(model: &Model, options: BuildOptions) -> Result<Chain, ChainError> {
    let consts = model.constant_values()?;
    let scope = Scope::new(model, consts.clone());

    let vars = var_layout(model, &consts)?;
    let init_vals = model.initial_valuation(&consts)?;
    let init: Vec<i64> = vars
        .iter()
        .map(|v| init_vals[&v.name].to_slot().expect("validated init"))
        .collect();

    let mut commands = Vec::new();
    for (mi, m) in model.modules.iter().enumerate() {
        for (ci, c) in m.commands.iter().enumerate() {
            let ctx = format!("module `{}`", m.name);
            let guard = scope.compile(&c.guard, &ctx)?;
            let mut branches = Vec::with_capacity(c.branches.len());
            let mut sum = 0.0;
            for b in &c.branches {
                let prob = match &b.prob {
                    None => 1.0,
                    Some(p) => eval_compiled(&scope.compile(p, &ctx)?, &[])?
                        .as_f64()
                        .ok_or_else(|| ModelError::TypeError(format!("non-numeric probability in {ctx}")))?,
                };
                if !(0.0..=1.0).contains(&prob) {
                    return Err(ModelError::ProbabilityOutOfRange {
                        context: format!("command {} in {ctx}", ci + 1),
                        value: prob,
                    }
                    .into());
                }
                sum += prob;
                let updates = b
                    .updates
                    .iter()
                    .map(|a| {
                        let (idx, _) = scope.var(&a.var).expect("validated update target");
                        Ok((idx, scope.compile(&a.value, &ctx)?))
                    })
                    .collect::<Result<Vec<_>, ModelError>>()?;
                branches.push(CBranch { prob, updates });
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ChainError::BranchSum {
                    module: m.name.clone(),
                    command: ci + 1,
                    sum,
                });
            }
            commands.push(CCommand {
                module: mi,
                label: c.label.clone(),
                guard,
                branches,
                origin: (m.name.clone(), ci + 1),
            });
        }
    }

    // label -> module -> command indices, in deterministic order
    let mut by_label: BTreeMap<&str, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
    let mut unlabeled = Vec::new();
    for (i, c) in commands.iter().enumerate() {
        match &c.label {
            Some(l) => by_label
                .entry(l.as_str())
                .or_default()
                .entry(c.module)
                .or_default()
                .push(i),
            None => unlabeled.push(i),
        }
    }

    let packer = Packer::new(&vars);
    let width = vars.len();
    let mut index: HashMap<Box<[u64]>, usize> = HashMap::new();
    let mut states: Vec<i64> = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut queue = VecDeque::new();

    index.insert(packer.pack(&init), 0);
    states.extend_from_slice(&init);
    queue.push_back(0usize);

    let mut next = vec![0i64; width];
    while let Some(s) = queue.pop_front() {
        let current: Vec<i64> = states[s * width..(s + 1) * width].to_vec();
        let alternatives = enabled_alternatives(&current, &commands, &unlabeled, &by_label, &vars)?;

        let row: Vec<(usize, f64)> = if alternatives.is_empty() {
            vec![(s, 1.0)]
        } else {
            if alternatives.len() > 1 && options.policy == Policy::Reject {
                return Err(ChainError::NondeterministicState {
                    state: describe(&vars, &current),
                    alternatives: alternatives.into_iter().map(|a| a.description).collect(),
                });
            }
            let weight = 1.0 / alternatives.len() as f64;
            let mut acc: Vec<(usize, f64)> = Vec::new();
            for alt in &alternatives {
                for (p, assigns) in &alt.branches {
                    if *p == 0.0 {
                        continue;
                    }
                    next.copy_from_slice(&current);
                    for &(idx, val) in assigns {
                        next[idx] = val;
                    }
                    let key = packer.pack(&next);
                    let target = match index.get(&key) {
                        Some(&t) => t,
                        None => {
                            let t = index.len();
                            if t >= options.state_cap {
                                return Err(ChainError::StateSpaceLimitExceeded {
                                    cap: options.state_cap,
                                });
                            }
                            index.insert(key, t);
                            states.extend_from_slice(&next);
                            queue.push_back(t);
                            t
                        }
                    };
                    acc.push((target, p * weight));
                }
            }
            acc.sort_by_key(|&(t, _)| t);
            acc.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
            acc
        };
        debug_assert_eq!(rows.len(), s);
        rows.push(row);
    }

    Ok(Chain::assemble(vars, consts, states, 0, rows))
}

fn enabled_alternatives(
    state: &[i64],
    commands: &[CCommand],
    unlabeled: &[usize],
    by_label: &BTreeMap<&str, BTreeMap<usize, Vec<usize>>>,
    vars: &[VarInfo],
) -> Result<Vec<Alternative>, ChainError> {
    let mut out = Vec::new();

    for &ci in unlabeled {
        let c = &commands[ci];
        if eval_bool(&c.guard, state)? {
            let branches = c
                .branches
                .iter()
                .map(|b| Ok((b.prob, concrete_updates(&b.updates, state, vars)?)))
                .collect::<Result<Vec<_>, ChainError>>()?;
            out.push(Alternative {
                description: format!("[] {} #{}", c.origin.0, c.origin.1),
                branches,
            });
        }
    }

    for (label, modules) in by_label {
        let mut per_module: Vec<Vec<usize>> = Vec::with_capacity(modules.len());
        for cmds in modules.values() {
            let mut enabled = Vec::new();
            for &ci in cmds {
                if eval_bool(&commands[ci].guard, state)? {
                    enabled.push(ci);
                }
            }
            if enabled.is_empty() {
                per_module.clear();
                break;
            }
            per_module.push(enabled);
        }
        if per_module.is_empty() {
            continue;
        }
        for choice in cartesian(&per_module) {
            out.push(joint_alternative(label, &choice, commands, state, vars)?);
        }
    }
    Ok(out)
}

/// Joint command: product of branch probabilities, union of assignments.
fn joint_alternative(
    label: &str,
    choice: &[usize],
    commands: &[CCommand],
    state: &[i64],
    vars: &[VarInfo],
) -> Result<Alternative, ChainError> {
    let mut branches: Vec<(f64, Vec<(usize, i64)>)> = vec![(1.0, Vec::new())];
    for &ci in choice {
        let c = &commands[ci];
        let mut extended = Vec::with_capacity(branches.len() * c.branches.len());
        for (p, assigns) in &branches {
            for b in &c.branches {
                let mut merged = assigns.clone();
                for (idx, val) in concrete_updates(&b.updates, state, vars)? {
                    if merged.iter().any(|&(i, _)| i == idx) {
                        return Err(ChainError::ConflictingAssignment {
                            label: label.to_string(),
                            var: vars[idx].name.clone(),
                        });
                    }
                    merged.push((idx, val));
                }
                extended.push((p * b.prob, merged));
            }
        }
        branches = extended;
    }
    let parts: Vec<String> = choice
        .iter()
        .map(|&ci| format!("{} #{}", commands[ci].origin.0, commands[ci].origin.1))
        .collect();
    Ok(Alternative {
        description: format!("[{label}] {}", parts.join(" + ")),
        branches,
    })
}

fn concrete_updates(
    updates: &[(usize, Expr<Slot>)],
    state: &[i64],
    vars: &[VarInfo],
) -> Result<Vec<(usize, i64)>, ChainError> {
    updates
        .iter()
        .map(|(idx, e)| {
            let v = eval_compiled(e, state)?
                .to_slot()
                .ok_or_else(|| ModelError::TypeError("non-integer update".into()))?;
            let info = &vars[*idx];
            if v < info.lo || v > info.hi {
                return Err(ModelError::OutOfDomain {
                    var: info.name.clone(),
                    value: v,
                    lo: info.lo,
                    hi: info.hi,
                }
                .into());
            }
            Ok((*idx, v))
        })
        .collect()
}

fn cartesian(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::with_capacity(sets.len())];
    for set in sets {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                set.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}
