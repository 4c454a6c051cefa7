//! Dense two-phase simplex for small equality-constrained LPs.
//!
//! Solves `min c.x  s.t.  A x = b, x >= 0` with Bland's anti-cycling rule.
//! Problem sizes here are tiny (tens of variables, tens of constraints),
//! so a dense tableau is the right tool. Redundant constraints are
//! tolerated; infeasibility within `FEAS_TOL` is reported.

use thiserror::Error;

const FEAS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("infeasible: phase-1 objective {0}")]
    Infeasible(f64),
    #[error("unbounded")]
    Unbounded,
    #[error("dimension mismatch")]
    Dimensions,
}

/// Solves the LP, returning the optimal x.
pub fn solve(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>, LpError> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(LpError::Dimensions);
    }

    // Tableau with artificial variables: columns [x | artificial | rhs].
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = flip * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize sum of artificials. Reduced-cost row: column sums
    // for the structural variables, zero for the (basic) artificials.
    let mut obj = vec![0.0; width];
    for i in 0..m {
        for j in 0..width {
            obj[j] += t[i][j];
        }
    }
    for j in n..n + m {
        obj[j] -= 1.0;
    }
    run_simplex(&mut t, &mut basis, &mut obj, n + m)?;
    let phase1 = obj[width - 1];
    if phase1 > FEAS_TOL {
        return Err(LpError::Infeasible(phase1));
    }
    // Drive any artificial variables out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }

    // Phase 2: original objective expressed in reduced form.
    let mut obj2 = vec![0.0; width];
    for (j, &cj) in c.iter().enumerate() {
        obj2[j] = -cj;
    }
    for i in 0..m {
        let var = basis[i];
        if var < n && c[var] != 0.0 {
            let coef = c[var];
            for j in 0..width {
                obj2[j] += coef * t[i][j];
            }
        }
    }
    run_simplex(&mut t, &mut basis, &mut obj2, n)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][width - 1].max(0.0);
        }
    }
    Ok(x)
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let width = t[row].len();
    let inv = 1.0 / t[row][col];
    for j in 0..width {
        t[row][j] *= inv;
    }
    let pivot_row = t[row].clone();
    for i in 0..t.len() {
        if i != row {
            let factor = t[i][col];
            if factor != 0.0 {
                for j in 0..width {
                    t[i][j] -= factor * pivot_row[j];
                }
            }
        }
    }
    basis[row] = col;
}

fn run_simplex(
    t: &mut Vec<Vec<f64>>,
    basis: &mut Vec<usize>,
    obj: &mut Vec<f64>,
    num_cols: usize,
) -> Result<(), LpError> {
    let m = t.len();
    let width = obj.len();
    loop {
        // Bland: entering column = lowest index with positive reduced cost.
        let Some(col) = (0..num_cols).find(|&j| obj[j] > FEAS_TOL) else {
            return Ok(());
        };
        // Ratio test, ties by lowest basis variable (Bland).
        let mut row: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][col] > PIVOT_TOL {
                let ratio = t[i][width - 1] / t[i][col];
                let better = match row {
                    None => true,
                    Some(r) => {
                        ratio < best - PIVOT_TOL
                            || (ratio < best + PIVOT_TOL && basis[i] < basis[r])
                    }
                };
                if better {
                    best = ratio;
                    row = Some(i);
                }
            }
        }
        let Some(row) = row else {
            return Err(LpError::Unbounded);
        };
        pivot(t, basis, row, col);
        // Update objective row.
        let factor = obj[col];
        if factor != 0.0 {
            for j in 0..width {
                obj[j] -= factor * t[row][j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transportation_2x2() {
        // min x00 + 2 x01 + 3 x10 + x11 with row sums (0.6, 0.4), col sums (0.5, 0.5)
        let c = vec![1.0, 2.0, 3.0, 1.0];
        let a = vec![
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
        ];
        let b = vec![0.6, 0.4, 0.5, 0.5];
        let x = solve(&c, &a, &b).unwrap();
        let cost: f64 = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
        assert!((cost - (0.5 + 2.0 * 0.1 + 0.4)).abs() < 1e-9, "{x:?}");
    }

    #[test]
    fn detects_infeasible() {
        let c = vec![1.0, 1.0];
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = vec![1.0, 2.0];
        assert!(matches!(solve(&c, &a, &b), Err(LpError::Infeasible(_))));
    }

    #[test]
    fn tolerates_redundant_constraints() {
        let c = vec![1.0, 0.0];
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let b = vec![1.0, 2.0];
        let x = solve(&c, &a, &b).unwrap();
        assert!(x[0].abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_vertex_terminates() {
        // Degenerate transportation instance: marginals force a zero cell.
        let c = vec![0.0, 1.0, 1.0, 0.0];
        let a = vec![
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0],
        ];
        let b = vec![1.0, 0.0, 1.0, 0.0];
        let x = solve(&c, &a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
    }
}
