//! Uncorrected collocation with piecewise polynomials of higher degree.
//!
//! Experimental: the matrices may have negative entries and carry no error
//! bounds, so the computed dimension is an estimate only.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::discretize::{accumulate, Mesh};
use crate::error::{Error, Result};
use crate::ifs::MapFamily;
use crate::scalar::Real;
use crate::solver::secant_bisect;
use crate::sparse::SparseNonnegMatrix;

/// Collocation matrix on the `d·n + 1` equispaced Lagrange nodes of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct HighOrderMatrix<T> {
    pub degree: usize,
    pub dim: usize,
    pub rows: Vec<Vec<(usize, T)>>,
}

/// Values at `t ∈ [0, 1]` of the Lagrange basis on `0, 1/d, …, 1`.
pub fn lagrange_weights<T: Real>(degree: usize, t: T) -> Vec<T> {
    let d = T::count(degree);
    (0..=degree)
        .map(|i| {
            (0..=degree)
                .filter(|&m| m != i)
                .fold(T::one(), |acc, m| acc * (d * t - T::count(m)) / (T::count(i) - T::count(m)))
        })
        .collect()
}

/// First global node index of each mesh piece at the given degree.
fn offsets<T: Real>(mesh: &Mesh<T>, degree: usize) -> (Vec<usize>, usize) {
    let mut offs = Vec::with_capacity(mesh.pieces().len());
    let mut next = 0;
    for p in mesh.pieces() {
        offs.push(next);
        next += degree * p.n + 1;
    }
    (offs, next)
}

/// Collocation nodes: `d + 1` equispaced points per cell, shared at cell ends.
pub fn highorder_nodes<T: Real>(mesh: &Mesh<T>, degree: usize) -> Vec<T> {
    mesh.pieces()
        .iter()
        .flat_map(|p| {
            let m = degree * p.n;
            (0..=m).map(move |i| p.lo + T::count(i) * (p.hi - p.lo) / T::count(m))
        })
        .collect()
}

pub fn assemble_highorder<T: Real>(
    family: &MapFamily<T>,
    mesh: &Mesh<T>,
    degree: usize,
    s: T,
) -> Result<HighOrderMatrix<T>> {
    if degree == 0 {
        return Err(Error::BadParams("degree must be at least 1".into()));
    }
    let (offs, dim) = offsets(mesh, degree);
    let nodes = highorder_nodes(mesh, degree);
    let rows = nodes
        .par_iter()
        .enumerate()
        .with_min_len(64)
        .map(|(_, &x)| {
            let mut row = Vec::with_capacity((degree + 1) * family.len());
            for (j, map) in family.maps().iter().enumerate() {
                let y = map.eval(x);
                let (p, r, t) = mesh.locate_cell(y).map_err(|_| Error::MapEscapesDomain {
                    index: j,
                    x: x.as_f64(),
                    y: y.as_f64(),
                })?;
                let weight = map.weight(x).powf(s);
                let base = offs[p] + degree * r;
                if degree == 1 {
                    // same products and order as the linear collocation matrix
                    accumulate(&mut row, base, weight * (T::one() - t));
                    accumulate(&mut row, base + 1, weight * t);
                } else {
                    for (i, l) in lagrange_weights(degree, t).into_iter().enumerate() {
                        accumulate(&mut row, base + i, weight * l);
                    }
                }
            }
            row.sort_by_key(|e| e.0);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HighOrderMatrix { degree, dim, rows })
}

impl<T: Real> HighOrderMatrix<T> {
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        y.par_iter_mut().zip(&self.rows).with_min_len(256).for_each(|(yk, row)| {
            *yk = row.iter().fold(T::zero(), |acc, &(c, v)| acc + v * x[c]);
        });
    }

    pub fn has_negative(&self) -> bool {
        self.rows.iter().flatten().any(|e| e.1 < T::zero())
    }

    /// Valid only when every entry is nonnegative.
    pub fn to_nonneg(&self) -> Option<SparseNonnegMatrix<T>> {
        (!self.has_negative()).then(|| SparseNonnegMatrix::from_rows(self.dim, self.rows.clone()))
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] = v.as_f64();
            }
        }
        m
    }

    /// Modulus of the dominant eigenvalue: power iteration, or a dense
    /// eigensolve when that stalls and `dim ≤ 2000`.
    pub fn dominant_modulus(&self, tol: T, max_iter: usize) -> Result<T> {
        let n = self.dim;
        let mut w = vec![T::one(); n];
        let mut mw = vec![T::zero(); n];
        let mut prev = T::nan();
        for _ in 0..max_iter {
            self.matvec(&w, &mut mw);
            let top = mw.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
            if !(top > T::zero()) || !top.is_finite() {
                break;
            }
            // w has sup-norm one, so the growth factor is the new sup-norm
            let lambda = top;
            for (wi, &x) in w.iter_mut().zip(&mw) {
                *wi = x / top;
            }
            if (lambda - prev).abs() <= tol * lambda {
                return Ok(lambda);
            }
            prev = lambda;
        }
        if n <= 2000 {
            let ev = self.to_dense().complex_eigenvalues();
            let top = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
            return Ok(T::lit(top));
        }
        Err(Error::PowerDivergence)
    }
}

/// Estimate of the dimension from degree-`d` collocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighOrderEstimate<T> {
    pub s: T,
    pub degree: usize,
    pub unknowns: usize,
    pub evals: usize,
    /// Always false: there are no error bounds behind this value.
    pub certified: bool,
}

pub fn highorder_dimension<T: Real>(
    family: &MapFamily<T>,
    mesh: &Mesh<T>,
    degree: usize,
    root_tol: T,
    s_range: (T, T),
) -> Result<HighOrderEstimate<T>> {
    let unknowns = offsets(mesh, degree).1;
    let log_r = |s: T| -> Result<T> {
        let m = assemble_highorder(family, mesh, degree, s)?;
        Ok(m.dominant_modulus(T::lit(1e-15), 20 * unknowns + 2000)?.ln())
    };
    let r = secant_bisect(log_r, s_range.0, s_range.1, root_tol, 60, 8)?;
    Ok(HighOrderEstimate { s: r.root, degree, unknowns, evals: r.evals, certified: false })
}
