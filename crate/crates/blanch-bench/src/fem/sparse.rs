use super::FemError;

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the sparsity pattern from per-row column lists (need not be
    /// sorted or deduplicated) with all values zero.
    pub fn from_pattern(mut columns: Vec<Vec<u32>>) -> Self {
        let n = columns.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for cols in &mut columns {
            cols.sort_unstable();
            cols.dedup();
            col_idx.extend_from_slice(cols);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Adds `value` at `(row, col)`. The entry must exist in the pattern.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        let slot = self.col_idx[lo..hi]
            .binary_search(&(col as u32))
            .unwrap_or_else(|_| panic!("entry ({row}, {col}) not in sparsity pattern"));
        self.values[lo + slot] += value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; self.n];
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                if self.col_idx[k] as usize == row {
                    diag[row] = self.values[k];
                }
            }
        }
        diag
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for row in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            y[row] = acc;
        }
    }

    /// Largest relative asymmetry `|a_ij - a_ji| / max|a|`; zero for an
    /// exactly symmetric matrix.
    pub fn asymmetry(&self) -> f64 {
        let scale = self
            .values
            .iter()
            .fold(0.0_f64, |m, &v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.col_idx[k] as usize;
                if col < row {
                    continue;
                }
                let lo = self.row_ptr[col];
                let hi = self.row_ptr[col + 1];
                let mirrored = match self.col_idx[lo..hi].binary_search(&(row as u32)) {
                    Ok(slot) => self.values[lo + slot],
                    Err(_) => 0.0,
                };
                worst = worst.max((self.values[k] - mirrored).abs() / scale);
            }
        }
        worst
    }
}

/// Matrix-free symmetric positive definite operator for [`pcg`].
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

/// Result of a conjugate gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOutcome {
    pub iterations: usize,
    /// Final `||r|| / ||b||`.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Jacobi-preconditioned conjugate gradient.
///
/// `x` holds the initial guess on entry (warm start) and the solution on
/// exit. `precond_diag` is the diagonal of the operator; nonpositive entries
/// are treated as 1 so masked rows stay harmless. The iteration is strictly
/// sequential and allocation-order deterministic: identical inputs give
/// bitwise identical results.
pub fn pcg(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    precond_diag: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> PcgOutcome {
    let n = op.dim();
    debug_assert_eq!(b.len(), n);
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(precond_diag.len(), n);

    let inv_diag: Vec<f64> = precond_diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return PcgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }

    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = (0..n).map(|i| inv_diag[i] * r[i]).collect();
    let mut p = z.clone();
    let mut rz = r.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
    let mut q = vec![0.0; n];

    let mut res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
    if res <= rel_tol {
        return PcgOutcome {
            iterations: 0,
            relative_residual: res,
            converged: true,
        };
    }

    for iter in 1..=max_iter {
        op.apply(&p, &mut q);
        let pq = p.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
        if pq <= 0.0 {
            // Loss of positive definiteness; report divergence.
            return PcgOutcome {
                iterations: iter,
                relative_residual: res,
                converged: false,
            };
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
        if res <= rel_tol {
            return PcgOutcome {
                iterations: iter,
                relative_residual: res,
                converged: true,
            };
        }
        for i in 0..n {
            z[i] = inv_diag[i] * r[i];
        }
        let rz_next = r.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    PcgOutcome {
        iterations: max_iter,
        relative_residual: res,
        converged: false,
    }
}

/// Convenience wrapper that turns a non-converged solve into an error.
pub(super) fn pcg_or_err(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    precond_diag: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome, FemError> {
    let outcome = pcg(op, b, x, precond_diag, rel_tol, max_iter);
    if outcome.converged {
        Ok(outcome)
    } else {
        Err(FemError::LinearSolveFailed {
            residual: outcome.relative_residual,
            iterations: outcome.iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Dense symmetric test matrix lifted into CSR.
    fn csr_from_dense(dense: &[&[f64]]) -> CsrMatrix {
        let n = dense.len();
        let mut pattern = vec![Vec::new(); n];
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    pattern[i].push(j as u32);
                }
            }
        }
        let mut m = CsrMatrix::from_pattern(pattern);
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m.add(i, j, v);
                }
            }
        }
        m
    }

    #[test]
    fn matvec_matches_dense_product() {
        let m = csr_from_dense(&[
            &[4.0, 1.0, 0.0],
            &[1.0, 3.0, -1.0],
            &[0.0, -1.0, 2.0],
        ]);
        let x = [1.0, 2.0, 3.0];
        let mut y = [0.0; 3];
        m.matvec(&x, &mut y);
        assert_eq!(y, [6.0, 4.0, 4.0]);
        assert_eq!(m.asymmetry(), 0.0);
        assert_eq!(m.diagonal(), vec![4.0, 3.0, 2.0]);
    }

    #[test]
    fn pcg_solves_spd_system_to_tolerance() {
        let m = csr_from_dense(&[
            &[4.0, 1.0, 0.0, 0.0],
            &[1.0, 5.0, 2.0, 0.0],
            &[0.0, 2.0, 6.0, 1.0],
            &[0.0, 0.0, 1.0, 3.0],
        ]);
        let x_true = [1.0, -2.0, 0.5, 4.0];
        let mut b = [0.0; 4];
        m.matvec(&x_true, &mut b);
        let mut x = [0.0; 4];
        let out = pcg(&m, &b, &mut x, &m.diagonal(), 1e-12, 100);
        assert!(out.converged);
        assert!(out.relative_residual <= 1e-12);
        for (got, want) in x.iter().zip(&x_true) {
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn pcg_is_bitwise_deterministic_and_warm_starts() {
        let m = csr_from_dense(&[
            &[10.0, 2.0, 0.0],
            &[2.0, 8.0, 3.0],
            &[0.0, 3.0, 9.0],
        ]);
        let b = [1.0, 2.0, 3.0];
        let diag = m.diagonal();
        let mut x1 = [0.0; 3];
        let mut x2 = [0.0; 3];
        let o1 = pcg(&m, &b, &mut x1, &diag, 1e-10, 50);
        let o2 = pcg(&m, &b, &mut x2, &diag, 1e-10, 50);
        assert_eq!(x1, x2);
        assert_eq!(o1, o2);
        // Warm-starting from the solution finishes immediately.
        let mut x3 = x1;
        let o3 = pcg(&m, &b, &mut x3, &diag, 1e-10, 50);
        assert_eq!(o3.iterations, 0);
    }

    #[test]
    fn zero_rhs_returns_zero_solution() {
        let m = csr_from_dense(&[&[2.0, 0.0], &[0.0, 2.0]]);
        let mut x = [5.0, -3.0];
        let out = pcg(&m, &[0.0, 0.0], &mut x, &m.diagonal(), 1e-10, 10);
        assert!(out.converged);
        assert_eq!(x, [0.0, 0.0]);
    }
}
