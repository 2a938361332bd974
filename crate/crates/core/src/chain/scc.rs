use serde::Serialize;

use super::Chain;

/// Outcome of the terminating-chain check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TerminationReport {
    pub terminating: bool,
    pub bottom_components: usize,
    /// Bottom components that are not a single absorbing state.
    pub offending: Vec<Vec<usize>>,
}

/// Strongly connected components in reverse topological order
/// (iterative Tarjan, edges with positive probability).
pub fn strongly_connected_components(rows: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = rows.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (node, next edge position)
        let mut work = vec![(root, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if let Some(&(w, p)) = rows[v].get(*pos) {
                *pos += 1;
                if p <= 0.0 {
                    continue;
                }
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

/// A chain terminates when every bottom SCC is a single absorbing state.
pub fn classify_terminal(chain: &Chain) -> TerminationReport {
    let comps = strongly_connected_components(chain.rows());
    let mut comp_of = vec![0usize; chain.num_states()];
    for (c, members) in comps.iter().enumerate() {
        for &s in members {
            comp_of[s] = c;
        }
    }
    let mut bottom = 0;
    let mut offending = Vec::new();
    for (c, members) in comps.iter().enumerate() {
        let leaves = members
            .iter()
            .any(|&s| chain.row(s).iter().any(|&(t, p)| p > 0.0 && comp_of[t] != c));
        if leaves {
            continue;
        }
        bottom += 1;
        if !(members.len() == 1 && chain.is_absorbing(members[0])) {
            offending.push(members.clone());
        }
    }
    TerminationReport {
        terminating: offending.is_empty(),
        bottom_components: bottom,
        offending,
    }
}
