//! Left-looking sparse LU with threshold partial pivoting (Gilbert–Peierls).
//!
//! Columns are visited in a fill-reducing order computed by approximate minimum
//! degree on the pattern of `A + A^T`. For each column the sparse triangular
//! solve `L x = A(:, col)` is driven by a depth-first reach over the columns of
//! `L` already computed. The diagonal entry is kept as pivot when
//! `|x_diag| >= threshold * max |x|`; otherwise the largest candidate is used.

use crate::error::{Error, Result};

use super::csr::CsrMatrix;

const NONE: usize = usize::MAX;

/// Column-compressed storage used for the factors.
#[derive(Debug, Clone, Default)]
struct Csc {
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    /// Unit lower factor, diagonal stored first in each column.
    l: Csc,
    /// Upper factor, diagonal stored last in each column.
    u: Csc,
    /// Row `i` of `A` is row `pinv[i]` of `P A Q`.
    pinv: Vec<usize>,
    /// Column `k` of `P A Q` is column `q[k]` of `A`.
    q: Vec<usize>,
    pub off_diagonal_pivots: usize,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L` and `U`, diagonals included.
    pub fn factor_nnz(&self) -> usize {
        self.l.vals.len() + self.u.vals.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        for j in 0..n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.l.col_ptr[j] + 1..self.l.col_ptr[j + 1] {
                    y[self.l.rows[p]] -= self.l.vals[p] * yj;
                }
            }
        }
        for j in (0..n).rev() {
            let last = self.u.col_ptr[j + 1] - 1;
            y[j] /= self.u.vals[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.u.col_ptr[j]..last {
                    y[self.u.rows[p]] -= self.u.vals[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        x
    }
}

/// Fill-reducing column order from AMD on the symmetrised pattern.
pub fn amd_order(a: &CsrMatrix) -> Result<Vec<usize>> {
    let n = a.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    // CSR of A is CSC of A^T; AMD symmetrises internally, so either works.
    let control = amd::Control::default();
    let (perm, _inv, _info) = amd::order::<usize>(n, a.row_offsets(), a.col_indices(), &control)
        .map_err(|s| Error::SingularSystem(format!("ordering failed: {s:?}")))?;
    Ok(perm)
}

/// Factors `A` (given in CSR) as `P A Q = L U`.
pub fn factor(a: &CsrMatrix, q: Vec<usize>, pivot_threshold: f64) -> Result<LuFactors> {
    let n = a.dim();
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.len(),
            context: "column ordering",
        });
    }
    let at = a.transpose();
    let (a_ptr, a_rows, a_vals) = (at.row_offsets(), at.col_indices(), at.values());
    let tiny = f64::EPSILON * a.max_abs() * 1e-3;

    let mut l = Csc::default();
    let mut u = Csc::default();
    let est = 4 * a.nnz() + n;
    l.rows.reserve(est);
    l.vals.reserve(est);
    u.rows.reserve(est);
    u.vals.reserve(est);

    let mut pinv = vec![NONE; n];
    let mut x = vec![0.0; n];
    let mut xi = vec![0usize; n];
    let mut mark = vec![NONE; n];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut off_diagonal_pivots = 0;

    for k in 0..n {
        l.col_ptr.push(l.rows.len());
        u.col_ptr.push(u.rows.len());
        let col = q[k];
        let col_range = a_ptr[col]..a_ptr[col + 1];

        // Reach: rows of x = L \ A(:, col) that can be nonzero, topologically ordered in xi[top..n].
        let mut top = n;
        for &i in &a_rows[col_range.clone()] {
            if mark[i] != k {
                top = dfs(i, &l, &pinv, top, &mut xi, &mut stack, &mut mark, k);
            }
        }

        for &i in &xi[top..n] {
            x[i] = 0.0;
        }
        for p in col_range {
            x[a_rows[p]] = a_vals[p];
        }
        for px in top..n {
            let j = xi[px];
            let jj = pinv[j];
            if jj == NONE {
                continue;
            }
            let xj = x[j];
            for p in l.col_ptr[jj] + 1..l.col_ptr[jj + 1] {
                x[l.rows[p]] -= l.vals[p] * xj;
            }
        }

        let mut ipiv = NONE;
        let mut best = -1.0;
        for &i in &xi[top..n] {
            if pinv[i] == NONE {
                let t = x[i].abs();
                if t > best {
                    best = t;
                    ipiv = i;
                }
            } else {
                u.rows.push(pinv[i]);
                u.vals.push(x[i]);
            }
        }
        if ipiv == NONE || best <= tiny {
            return Err(Error::SingularSystem(format!(
                "no acceptable pivot in column {col} (step {k}, max candidate {best:e})"
            )));
        }
        if pinv[col] == NONE && x[col].abs() >= pivot_threshold * best {
            ipiv = col;
        } else if ipiv != col {
            off_diagonal_pivots += 1;
        }
        let pivot = x[ipiv];
        u.rows.push(k);
        u.vals.push(pivot);
        pinv[ipiv] = k;
        l.rows.push(ipiv);
        l.vals.push(1.0);
        for &i in &xi[top..n] {
            if pinv[i] == NONE {
                l.rows.push(i);
                l.vals.push(x[i] / pivot);
            }
            x[i] = 0.0;
        }
    }
    l.col_ptr.push(l.rows.len());
    u.col_ptr.push(u.rows.len());
    for r in l.rows.iter_mut() {
        *r = pinv[*r];
    }

    Ok(LuFactors {
        n,
        l,
        u,
        pinv,
        q,
        off_diagonal_pivots,
    })
}

/// Iterative depth-first search from row `start` through the graph of `L`;
/// finished nodes are written to `xi[..top]` from the back.
#[allow(clippy::too_many_arguments)]
fn dfs(
    start: usize,
    l: &Csc,
    pinv: &[usize],
    mut top: usize,
    xi: &mut [usize],
    stack: &mut Vec<(usize, usize)>,
    mark: &mut [usize],
    stamp: usize,
) -> usize {
    stack.clear();
    mark[start] = stamp;
    let first = if pinv[start] == NONE { 0 } else { l.col_ptr[pinv[start]] };
    stack.push((start, first));
    while let Some(&(j, mut pos)) = stack.last() {
        let jj = pinv[j];
        let end = if jj == NONE { 0 } else { l.col_ptr[jj + 1] };
        let mut child = NONE;
        while pos < end {
            let i = l.rows[pos];
            pos += 1;
            if mark[i] != stamp {
                child = i;
                break;
            }
        }
        if child == NONE {
            stack.pop();
            top -= 1;
            xi[top] = j;
        } else {
            stack.last_mut().unwrap().1 = pos;
            mark[child] = stamp;
            let start = if pinv[child] == NONE { 0 } else { l.col_ptr[pinv[child]] };
            stack.push((child, start));
        }
    }
    top
}
