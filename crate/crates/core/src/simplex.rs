//! Dense two-phase simplex method with Bland's rule, sized for the small
//! feasibility problems behind extreme-point and interior tests.

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible { residual: f64 },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let pv = self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x /= pv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (x, p) in row.iter_mut().zip(&prow) {
                        *x -= f * p;
                    }
                }
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (x, p) in obj.iter_mut().zip(&prow) {
                *x -= f * p;
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland-rule iterations on reduced-cost row `obj` restricted to
    /// columns `< allowed`. Returns false when unbounded.
    fn optimize(&mut self, obj: &mut [f64], allowed: usize, tol: f64) -> bool {
        let rhs = self.cols;
        loop {
            let Some(c) = (0..allowed).find(|&j| obj[j] < -tol) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > tol {
                    let ratio = row[rhs] / row[c];
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => {
                            ratio < r - tol * r.abs().max(1.0)
                                || (ratio <= r + tol * r.abs().max(1.0) && self.basis[i] < b)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r, _)) => self.pivot(r, c, obj),
            }
        }
    }
}

/// Minimizes `cᵀx` subject to `A x = b`, `x ≥ 0`, where `a` holds the rows
/// of `A`. Phase one is declared infeasible when the artificial mass stays
/// above `feas_tol`.
pub fn minimize(a: &[Vec<f64>], b: &[f64], c: &[f64], feas_tol: f64) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let tol = 1e-12;
    let cols = n + m;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, ai) in a.iter().enumerate() {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; cols + 1];
        for j in 0..n {
            row[j] = sign * ai[j];
        }
        row[n + i] = 1.0;
        row[cols] = sign * b[i];
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        cols,
    };

    // phase one: minimize the artificial mass
    let mut obj = vec![0.0; cols + 1];
    for row in &t.rows {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[cols] -= row[cols];
    }
    t.optimize(&mut obj, n, tol);
    let residual = -obj[cols];
    if residual > feas_tol {
        return LpOutcome::Infeasible { residual };
    }

    // drive artificials out of the basis; rows where that fails are redundant
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t.rows[i][j].abs() > 1e-9) {
                let mut dummy = vec![0.0; cols + 1];
                t.pivot(i, j, &mut dummy);
            } else {
                t.rows.remove(i);
                t.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }

    // phase two
    let mut obj = vec![0.0; cols + 1];
    obj[..n].copy_from_slice(c);
    for (i, row) in t.rows.iter().enumerate() {
        let cb = c[t.basis[i]];
        if cb != 0.0 {
            for (x, r) in obj.iter_mut().zip(row) {
                *x -= cb * r;
            }
        }
    }
    if !t.optimize(&mut obj, n, tol) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bi) in t.basis.iter().enumerate() {
        if bi < n {
            x[bi] = t.rows[i][cols].max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}

/// Is `target` a convex combination of `points`? Returns the weights when it
/// is (up to `tol` in the equality residual).
pub fn convex_combination(points: &[&[f64]], target: &[f64], tol: f64) -> Option<Vec<f64>> {
    let d = target.len();
    let n = points.len();
    if n == 0 {
        return None;
    }
    let mut a: Vec<Vec<f64>> = (0..d)
        .map(|k| points.iter().map(|p| p[k]).collect())
        .collect();
    a.push(vec![1.0; n]);
    let mut b = target.to_vec();
    b.push(1.0);
    match minimize(&a, &b, &vec![0.0; n], tol) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let out = minimize(&a, &[4.0, 6.0], &[-1.0, -1.0, 0.0, 0.0], 1e-10);
        let LpOutcome::Optimal { x, value } = out else {
            panic!("expected optimum")
        };
        assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
        assert!((value + 2.8).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![vec![1.0, 1.0]];
        assert!(matches!(
            minimize(&a, &[-1.0], &[0.0, 0.0], 1e-10),
            LpOutcome::Infeasible { .. }
        ));
        let a = vec![vec![1.0, -1.0]];
        assert_eq!(minimize(&a, &[0.0], &[-1.0, 0.0], 1e-10), LpOutcome::Unbounded);
    }

    #[test]
    fn hull_membership() {
        let sq: Vec<[f64; 2]> = vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        let pts: Vec<&[f64]> = sq.iter().map(|p| p.as_slice()).collect();
        assert!(convex_combination(&pts, &[0.5, 0.0], 1e-10).is_some());
        assert!(convex_combination(&pts, &[0.5, 0.5], 1e-10).is_some());
        assert!(convex_combination(&pts, &[0.6, 0.5], 1e-10).is_none());
    }
}
