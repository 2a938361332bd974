use std::collections::HashMap;

use crate::chain::Chain;

use super::{Eventuality, PathFormula};

pub type MonitorState = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Eventually,
    Globally,
    Response,
    NextSafety,
    Until,
    /// Lasso atoms: bit mask over atom indices whose truth at the
    /// absorbing state accepts.
    GloballyAny(u32),
}

/// Deterministic monitor over atom valuations.
///
/// Atoms are given as a bit mask in the order of [`PathFormula::atoms`].
/// The monitor state after reading a finite prefix ending in an absorbing
/// state `s` is resolved by [`Monitor::lasso`] on `s`'s atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monitor {
    kind: Kind,
}

const P: u32 = 1;
const Q: u32 = 2;

impl Monitor {
    pub fn num_states(&self) -> usize {
        match self.kind {
            Kind::Eventually | Kind::Globally | Kind::Response => 2,
            Kind::NextSafety | Kind::Until => 3,
            Kind::GloballyAny(_) => 1,
        }
    }

    pub fn initial(&self) -> MonitorState {
        0
    }

    pub fn step(&self, q: MonitorState, atoms: u32) -> MonitorState {
        let phi = atoms & P != 0;
        let psi = atoms & Q != 0;
        match self.kind {
            // 0 pending, 1 accepted
            Kind::Eventually => u8::from(q == 1 || phi),
            // 0 ok, 1 violated
            Kind::Globally => u8::from(q == 1 || !phi),
            // 0 idle, 1 obligation pending
            Kind::Response => {
                if psi {
                    0
                } else if phi {
                    1
                } else {
                    q
                }
            }
            // 0 fresh, 1 φ held at the previous position, 2 violated
            Kind::NextSafety => {
                if q == 2 || (q == 1 && psi) {
                    2
                } else {
                    u8::from(phi)
                }
            }
            // 0 waiting, 1 satisfied, 2 violated
            Kind::Until => match q {
                0 if psi => 1,
                0 if phi => 0,
                0 => 2,
                q => q,
            },
            Kind::GloballyAny(_) => 0,
        }
    }

    /// Acceptance of the infinite suffix `s^ω`, given the monitor state
    /// after reading `s` once.
    pub fn lasso(&self, q: MonitorState, atoms: u32) -> bool {
        let phi = atoms & P != 0;
        let psi = atoms & Q != 0;
        match self.kind {
            Kind::Eventually => q == 1 || phi,
            Kind::Globally => q == 0 && phi,
            Kind::Response => q == 0 || psi,
            Kind::NextSafety => q != 2 && !(phi && psi),
            Kind::Until => q == 1 || (q == 0 && psi),
            Kind::GloballyAny(mask) => atoms & mask != 0,
        }
    }

    /// Run the monitor over a finite prefix ending in an absorbing state.
    pub fn accepts(&self, trace: &[u32]) -> bool {
        let Some((&last, _)) = trace.split_last() else {
            return false;
        };
        let q = trace.iter().fold(self.initial(), |q, &a| self.step(q, a));
        self.lasso(q, last)
    }

    /// Product of `chain` with this monitor. Configurations whose chain
    /// state is absorbing are made terminal; accepting ones are targets.
    pub(crate) fn product(&self, chain: &Chain, masks: &[u32]) -> Product {
        let mut index: HashMap<(usize, MonitorState), usize> = HashMap::new();
        let mut configs: Vec<(usize, MonitorState)> = Vec::new();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut targets = Vec::new();

        let start = (chain.initial(), self.step(self.initial(), masks[chain.initial()]));
        index.insert(start, 0);
        configs.push(start);
        let mut i = 0;
        while i < configs.len() {
            let (s, q) = configs[i];
            if chain.is_absorbing(s) {
                rows.push(vec![(i, 1.0)]);
                if self.lasso(q, masks[s]) {
                    targets.push(i);
                }
            } else {
                let mut row = Vec::with_capacity(chain.row(s).len());
                for &(t, p) in chain.row(s) {
                    let next = (t, self.step(q, masks[t]));
                    let j = *index.entry(next).or_insert_with(|| {
                        configs.push(next);
                        configs.len() - 1
                    });
                    row.push((j, p));
                }
                rows.push(row);
            }
            i += 1;
        }
        Product { rows, targets }
    }
}

pub(crate) struct Product {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub targets: Vec<usize>,
}

/// Monitor for a pattern; atom bit `i` is the `i`-th entry of
/// [`PathFormula::atoms`].
pub fn compile_monitor<E>(path: &PathFormula<E>) -> Monitor {
    let kind = match path {
        PathFormula::Eventually(_) => Kind::Eventually,
        PathFormula::Globally(_) => Kind::Globally,
        PathFormula::Response(..) => Kind::Response,
        PathFormula::NextSafety(..) => Kind::NextSafety,
        PathFormula::Until(..) => Kind::Until,
        PathFormula::GloballyAny(items) => {
            let mut mask = 0u32;
            let mut bit = 0;
            for e in items {
                match e {
                    Eventuality::Eventually(_) => {
                        mask |= 1 << bit;
                        bit += 1;
                    }
                    Eventuality::EventuallyUntil(..) => {
                        mask |= 1 << (bit + 1);
                        bit += 2;
                    }
                }
            }
            Kind::GloballyAny(mask)
        }
    };
    Monitor { kind }
}
