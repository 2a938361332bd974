//! Path-enumeration oracle, independent of monitors and solvers.

use crate::chain::Chain;

use super::{atom_mask, compile_atoms, ensure_terminating, Eventuality, PathFormula, PropError, PropertyQuery};

pub const DEFAULT_PATH_CAP: usize = 1_000_000;

enum Ltl {
    Atom(usize),
    Not(Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    F(Box<Ltl>),
    G(Box<Ltl>),
    X(Box<Ltl>),
    U(Box<Ltl>, Box<Ltl>),
}

fn b(l: Ltl) -> Box<Ltl> {
    Box::new(l)
}

fn to_ltl<E>(path: &PathFormula<E>) -> Ltl {
    use Ltl::*;
    match path {
        PathFormula::Eventually(_) => F(b(Atom(0))),
        PathFormula::Globally(_) => G(b(Atom(0))),
        PathFormula::Response(..) => G(b(Implies(b(Atom(0)), b(F(b(Atom(1))))))),
        PathFormula::NextSafety(..) => G(b(Implies(b(Atom(0)), b(Not(b(X(b(Atom(1))))))))),
        PathFormula::Until(..) => U(b(Atom(0)), b(Atom(1))),
        PathFormula::GloballyAny(items) => {
            let mut next = 0;
            let mut disjuncts = items.iter().map(|e| match e {
                Eventuality::Eventually(_) => {
                    next += 1;
                    F(b(Atom(next - 1)))
                }
                Eventuality::EventuallyUntil(..) => {
                    next += 2;
                    F(b(U(b(Atom(next - 2)), b(Atom(next - 1)))))
                }
            });
            let first = disjuncts.next().expect("at least one eventuality");
            G(b(disjuncts.fold(first, |acc, d| Or(b(acc), b(d)))))
        }
    }
}

/// Truth of `f` at position `i` of the lasso word `w[0..=k] · w[k]^ω`.
/// Position `k` stands for the whole constant suffix.
fn holds(f: &Ltl, w: &[u32], i: usize) -> bool {
    let k = w.len() - 1;
    match f {
        Ltl::Atom(j) => w[i] & (1 << j) != 0,
        Ltl::Not(a) => !holds(a, w, i),
        Ltl::Or(a, c) => holds(a, w, i) || holds(c, w, i),
        Ltl::Implies(a, c) => !holds(a, w, i) || holds(c, w, i),
        Ltl::X(a) => holds(a, w, (i + 1).min(k)),
        Ltl::F(a) => (i..=k).any(|j| holds(a, w, j)),
        Ltl::G(a) => (i..=k).all(|j| holds(a, w, j)),
        Ltl::U(a, c) => (i..=k).any(|j| holds(c, w, j) && (i..j).all(|l| holds(a, w, l))),
    }
}

/// Sum the probabilities of all finite paths to absorbing states whose
/// lasso satisfies the query's path formula.
pub fn brute_force_prob(chain: &Chain, query: &PropertyQuery, path_cap: usize) -> Result<f64, PropError> {
    ensure_terminating(chain)?;
    let compiled = compile_atoms(&query.path, chain.vars(), chain.constants())?;
    let atoms = compiled.atoms();
    let masks = (0..chain.num_states())
        .map(|s| atom_mask(&atoms, chain.state(s)))
        .collect::<Result<Vec<_>, _>>()?;
    let formula = to_ltl(&compiled);

    let mut word = Vec::new();
    let mut visited = 0usize;
    let mut total = 0.0;
    // explicit stack of (state, path probability, depth)
    let mut stack = vec![(chain.initial(), 1.0f64, 0usize)];
    while let Some((s, p, depth)) = stack.pop() {
        visited += 1;
        if visited > path_cap {
            return Err(PropError::PathCapExceeded { cap: path_cap });
        }
        word.truncate(depth);
        word.push(masks[s]);
        if chain.is_absorbing(s) {
            if holds(&formula, &word, 0) {
                total += p;
            }
            continue;
        }
        for &(t, q) in chain.row(s).iter().rev() {
            stack.push((t, p * q, depth + 1));
        }
    }
    Ok(total)
}
