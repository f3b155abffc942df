//! Row-compressed square matrices with nonnegative entries.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square CSR matrix. Columns within a row are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseNonnegMatrix<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

/// Header of the text dump format.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpHeader {
    pub dim: usize,
    pub n: usize,
    pub s: f64,
    pub family_id: String,
}

impl<T: Real> SparseNonnegMatrix<T> {
    /// Builds from per-row `(column, value)` lists; each list must be sorted
    /// by column without repeats.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, T)>>) -> Self {
        debug_assert_eq!(rows.len(), dim);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (c, v) in row {
                debug_assert!(c < dim);
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    /// Dense row-major input; zeros are dropped.
    pub fn from_dense(dim: usize, dense: &[T]) -> Self {
        assert_eq!(dense.len(), dim * dim);
        let rows = (0..dim)
            .map(|r| {
                (0..dim)
                    .filter_map(|c| {
                        let v = dense[r * dim + c];
                        (v != T::zero()).then_some((c, v))
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(dim, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, k: usize) -> (&[usize], &[T]) {
        let (a, b) = (self.row_ptr[k], self.row_ptr[k + 1]);
        (&self.cols[a..b], &self.vals[a..b])
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|i| vals[i]).unwrap_or_else(|_| T::zero())
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// `y = M x`; rows in parallel, each summed left to right.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(k, yk)| {
            let (cols, vals) = self.row(k);
            let mut acc = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                acc = acc + v * x[c];
            }
            *yk = acc;
        });
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { vals: self.vals.iter().map(|&v| v * c).collect(), ..self.clone() }
    }

    /// First negative entry, if any.
    pub fn find_negative(&self) -> Option<(usize, usize, T)> {
        self.entries().find(|&(_, _, v)| v < T::zero())
    }

    /// Text dump: header `dim n s family-id`, then one `row col value` line
    /// per stored entry, values with 17 significant digits.
    pub fn dump(&self, n: usize, s: T, family_id: &str) -> String {
        let mut out = String::with_capacity(32 * (self.nnz() + 1));
        let _ = writeln!(out, "{} {} {:.16e} {}", self.dim, n, s.as_f64(), family_id);
        for (r, c, v) in self.entries() {
            let _ = writeln!(out, "{r} {c} {:.16e}", v.as_f64());
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<(DumpHeader, Self)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| Error::Parse("empty dump".into()))?;
        let mut it = head.splitn(4, ' ');
        let bad = |what: &str| Error::Parse(format!("bad {what}"));
        let dim: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("dim"))?;
        let n: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("n"))?;
        let s: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("s"))?;
        let family_id = it.next().unwrap_or("").to_string();
        let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); dim];
        for line in lines {
            let mut f = line.split_whitespace();
            let r: usize = f.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("row"))?;
            let c: usize = f.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("col"))?;
            let v: f64 = f.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("value"))?;
            if r >= dim || c >= dim {
                return Err(Error::Parse(format!("entry ({r}, {c}) outside dimension {dim}")));
            }
            rows[r].push((c, T::lit(v)));
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Parse("repeated entry".into()));
            }
        }
        Ok((DumpHeader { dim, n, s, family_id }, Self::from_rows(dim, rows)))
    }
}

/// Per-row sums, each accumulated sequentially in column order.
pub fn row_sums<T: Real>(m: &SparseNonnegMatrix<T>) -> Vec<T> {
    (0..m.dim()).map(|k| m.row(k).1.iter().fold(T::zero(), |acc, &v| acc + v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_layout_and_matvec() {
        let m = SparseNonnegMatrix::from_dense(3, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 4.0, 5.0, 0.0]);
        assert_eq!(m.nnz(), 5);
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(1, 0), 0.0);
        let mut y = vec![0.0; 3];
        m.matvec(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 3.0, 9.0]);
        assert_eq!(row_sums(&m), vec![3.0, 3.0, 9.0]);
        assert_eq!(row_sums(&SparseNonnegMatrix::from_dense(2, &[0.0, 7.0, 2.5, 0.0])), vec![7.0, 2.5]);
    }

    #[test]
    fn dump_round_trip() {
        let m = SparseNonnegMatrix::from_dense(2, &[0.1, 1.0 / 3.0, 0.0, 2.0f64.sqrt()]);
        let text = m.dump(1, 0.625, "cf[1,2]");
        assert!(text.starts_with("2 1 6.2500000000000000e-1 cf[1,2]\n"));
        let (h, back) = SparseNonnegMatrix::<f64>::parse_dump(&text).unwrap();
        assert_eq!(h, DumpHeader { dim: 2, n: 1, s: 0.625, family_id: "cf[1,2]".into() });
        assert_eq!(back, m);
    }

    #[test]
    fn dump_rejects_garbage() {
        assert!(SparseNonnegMatrix::<f64>::parse_dump("").is_err());
        assert!(SparseNonnegMatrix::<f64>::parse_dump("2 1 0.5 x\n0 5 1.0\n").is_err());
        assert!(SparseNonnegMatrix::<f64>::parse_dump("2 1 0.5 x\n0 1 1.0\n0 1 2.0\n").is_err());
    }
}
