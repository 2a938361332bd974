use serde::Serialize;

use crate::chain::Chain;

use super::PropError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    #[default]
    ValueIteration,
    GaussianElimination,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub solver: Solver,
    /// Value iteration stops once the largest change in a sweep is below this.
    pub epsilon: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            solver: Solver::ValueIteration,
            epsilon: 1e-12,
            max_sweeps: 1_000_000,
        }
    }
}

impl SolverOptions {
    pub fn exact() -> Self {
        SolverOptions {
            solver: Solver::GaussianElimination,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Reachability probability per state.
    pub values: Vec<f64>,
    /// Last sweep's largest change (0 for elimination).
    pub residual: f64,
    pub sweeps: usize,
}

/// Probability of reaching `targets` from every state of `chain`.
pub fn reachability_prob(
    chain: &Chain,
    targets: &[usize],
    options: SolverOptions,
) -> Result<Solution, PropError> {
    reachability_rows(chain.rows(), targets, options)
}

/// As [`reachability_prob`], over bare sparse rows.
pub fn reachability_rows(
    rows: &[Vec<(usize, f64)>],
    targets: &[usize],
    options: SolverOptions,
) -> Result<Solution, PropError> {
    let n = rows.len();
    let mut is_target = vec![false; n];
    for &t in targets {
        is_target[t] = true;
    }
    let can_reach = backward_reachable(rows, &is_target);
    let maybe: Vec<usize> = (0..n).filter(|&s| can_reach[s] && !is_target[s]).collect();

    let mut values: Vec<f64> = is_target.iter().map(|&t| if t { 1.0 } else { 0.0 }).collect();
    if maybe.is_empty() {
        return Ok(Solution {
            values,
            residual: 0.0,
            sweeps: 0,
        });
    }
    match options.solver {
        Solver::ValueIteration => value_iteration(rows, &maybe, &mut values, options),
        Solver::GaussianElimination => {
            gaussian_elimination(rows, &maybe, &is_target, &mut values);
            Ok(Solution {
                values,
                residual: 0.0,
                sweeps: 0,
            })
        }
    }
}

fn backward_reachable(rows: &[Vec<(usize, f64)>], is_target: &[bool]) -> Vec<bool> {
    let n = rows.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, row) in rows.iter().enumerate() {
        for &(t, p) in row {
            if p > 0.0 && t != s {
                preds[t].push(s);
            }
        }
    }
    let mut seen = is_target.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&s| is_target[s]).collect();
    while let Some(t) = stack.pop() {
        for &s in &preds[t] {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}

/// Gauss-Seidel sweeps over the undecided states, last-discovered first so
/// that acyclic chains settle in few sweeps.
fn value_iteration(
    rows: &[Vec<(usize, f64)>],
    maybe: &[usize],
    values: &mut [f64],
    options: SolverOptions,
) -> Result<Solution, PropError> {
    let mut residual = f64::INFINITY;
    for sweep in 1..=options.max_sweeps {
        residual = 0.0;
        for &s in maybe.iter().rev() {
            let v: f64 = rows[s].iter().map(|&(t, p)| p * values[t]).sum();
            residual = residual.max((v - values[s]).abs());
            values[s] = v;
        }
        if residual < options.epsilon {
            return Ok(Solution {
                values: values.to_vec(),
                residual,
                sweeps: sweep,
            });
        }
    }
    Err(PropError::NumericalNonConvergence {
        sweeps: options.max_sweeps,
        residual,
    })
}

/// Solve `(I - A) x = b` on the undecided states with partial pivoting.
fn gaussian_elimination(
    rows: &[Vec<(usize, f64)>],
    maybe: &[usize],
    is_target: &[bool],
    values: &mut [f64],
) {
    let m = maybe.len();
    let mut pos = vec![usize::MAX; rows.len()];
    for (i, &s) in maybe.iter().enumerate() {
        pos[s] = i;
    }
    let width = m + 1;
    let mut a = vec![0.0f64; m * width];
    for (i, &s) in maybe.iter().enumerate() {
        a[i * width + i] += 1.0;
        for &(t, p) in &rows[s] {
            if is_target[t] {
                a[i * width + m] += p;
            } else if pos[t] != usize::MAX {
                a[i * width + pos[t]] -= p;
            }
        }
    }
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x * width + col].abs().total_cmp(&a[y * width + col].abs()))
            .expect("non-empty column");
        if pivot != col {
            for k in 0..width {
                a.swap(col * width + k, pivot * width + k);
            }
        }
        let d = a[col * width + col];
        for k in col..width {
            a[col * width + k] /= d;
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = a[r * width + col];
            if f == 0.0 {
                continue;
            }
            for k in col..width {
                a[r * width + k] -= f * a[col * width + k];
            }
        }
    }
    for (i, &s) in maybe.iter().enumerate() {
        values[s] = a[i * width + m];
    }
}
