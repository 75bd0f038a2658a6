use std::io::Write;

use crate::error::{Error, Result};

/// Square matrix in compressed sparse row form with strictly increasing column
/// indices inside each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from raw parts, checking the storage invariants.
    pub fn from_parts(n: usize, row_offsets: Vec<usize>, col_indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if row_offsets.len() != n + 1 || row_offsets[0] != 0 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: row_offsets.len(),
                context: "row offsets",
            });
        }
        if col_indices.len() != values.len() || *row_offsets.last().unwrap() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                found: col_indices.len(),
                context: "column indices",
            });
        }
        for r in 0..n {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::param("row_offsets", "must be monotone"));
            }
            let cols = &col_indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= n) {
                return Err(Error::param("col_indices", format!("row {r} is not strictly increasing within 0..{n}")));
            }
        }
        Ok(CsrMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        match self.col_indices[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn scaled(&self, factor: f64) -> CsrMatrix {
        CsrMatrix {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for r in 0..n {
            for (c, v) in self.row(r) {
                let k = next[c];
                cols[k] = r;
                vals[k] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            n,
            row_offsets: counts,
            col_indices: cols,
            values: vals,
        }
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        let t = self.transpose();
        t.row_offsets == self.row_offsets && t.col_indices == self.col_indices
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `x^T A y`.
    pub fn quadratic_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.n {
            let mut row = 0.0;
            for (c, v) in self.row(r) {
                row += v * y[c];
            }
            acc += x[r] * row;
        }
        acc
    }

    /// MatrixMarket coordinate dump (`general`, one-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.n, self.n, self.nnz())?;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                writeln!(out, "{} {} {:e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// `A x`.
pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            found: x.len(),
            context: "spmv vector",
        });
    }
    Ok((0..a.n).map(|r| a.row(r).map(|(c, v)| v * x[c]).sum()).collect())
}

/// Coordinate-form accumulator. Duplicates are summed in insertion order when
/// compressed, so the result does not depend on anything but the push sequence.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Triplets { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Triplets {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n && c < self.n);
        self.entries.push((r, c, v));
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Appends every entry of `other` through the index map `map` (`None` drops it).
    pub fn extend_mapped(&mut self, other: &Triplets, map: impl Fn(usize) -> Option<usize>) {
        for &(r, c, v) in &other.entries {
            if let (Some(r), Some(c)) = (map(r), map(c)) {
                self.push(r, c, v);
            }
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let n = self.n;
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        // Stable: equal (row, col) keys keep insertion order.
        order.sort_by_key(|&k| (self.entries[k].0, self.entries[k].1));
        let mut row_offsets = vec![0usize; n + 1];
        let mut col_indices = Vec::with_capacity(order.len());
        let mut values: Vec<f64> = Vec::with_capacity(order.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = self.entries[k];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_offsets[r + 1] += row_offsets[r];
        }
        CsrMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_times_vector() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(spmv(&CsrMatrix::identity(3), &x).unwrap(), x);
    }

    #[test]
    fn zero_row_gives_zero() {
        let mut t = Triplets::new(3);
        t.push(0, 0, 2.0);
        t.push(2, 1, 1.0);
        let y = spmv(&t.to_csr(), &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(y[1], 0.0);
    }

    #[test]
    fn duplicates_are_summed() {
        let mut t = Triplets::new(2);
        t.push(1, 0, 1.0);
        t.push(0, 0, 1.5);
        t.push(1, 0, 2.0);
        let a = t.to_csr();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(1, 0), 3.0);
        assert_eq!(a.get(0, 1), 0.0);
    }

    #[test]
    fn mismatched_vector_is_rejected() {
        assert!(matches!(
            spmv(&CsrMatrix::identity(2), &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matrix_market_header() {
        let mut buf = Vec::new();
        CsrMatrix::identity(2).write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1e0\n"));
    }

    fn symmetric_matrix(n: usize) -> impl Strategy<Value = CsrMatrix> {
        proptest::collection::vec((0..n, 0..n, -5.0f64..5.0), 1..4 * n).prop_map(move |entries| {
            let mut t = Triplets::new(n);
            for (r, c, v) in entries {
                t.push(r, c, v);
                if r != c {
                    t.push(c, r, v);
                }
            }
            t.to_csr()
        })
    }

    proptest! {
        #[test]
        fn symmetric_spmv_is_self_adjoint(
            a in symmetric_matrix(12),
            x in proptest::collection::vec(-1.0f64..1.0, 12),
            y in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let xay: f64 = x.iter().zip(spmv(&a, &y).unwrap()).map(|(a, b)| a * b).sum();
            let yax: f64 = y.iter().zip(spmv(&a, &x).unwrap()).map(|(a, b)| a * b).sum();
            let scale = 1.0 + xay.abs().max(yax.abs());
            prop_assert!((xay - yax).abs() <= 1e-13 * scale);
            prop_assert!(a.is_structurally_symmetric());
        }

        #[test]
        fn transpose_is_an_involution(a in symmetric_matrix(9)) {
            prop_assert_eq!(a.transpose().transpose(), a);
        }
    }
}
