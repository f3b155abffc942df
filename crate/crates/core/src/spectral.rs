//! Spectral-radius enclosures for nonnegative matrices.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::{row_sums, SparseNonnegMatrix};

/// `r_lo ≤ r(M) ≤ r_hi`, valid whether or not the iteration converged.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEnclosure<T> {
    pub r_lo: T,
    pub r_hi: T,
    /// Last iterate, sup-norm 1.
    pub eigvec: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    /// `r_hi - r_lo` after each step.
    pub gaps: Vec<T>,
}

impl<T: Real> SpectralEnclosure<T> {
    pub fn mid(&self) -> T {
        (self.r_lo + self.r_hi) / T::lit(2.0)
    }

    pub fn rel_width(&self) -> T {
        (self.r_hi - self.r_lo) / self.r_hi
    }
}

/// Power-iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions<T> {
    pub tol: T,
    /// `None` means `10·dim + 1000`.
    pub max_iter: Option<usize>,
    /// Give up after this many steps without the gap improving.
    pub stall: usize,
}

impl<T: Real> Default for PowerOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-13), max_iter: None, stall: 200 }
    }
}

/// Collatz–Wielandt bounds `min (Mw)_k/w_k ≤ r(M) ≤ max (Mw)_k/w_k`.
pub fn collatz_wielandt<T: Real>(m: &SparseNonnegMatrix<T>, w: &[T]) -> Result<(T, T)> {
    if w.len() != m.dim() {
        return Err(Error::DimensionMismatch(w.len(), m.dim()));
    }
    check_positive(w)?;
    let mut mw = vec![T::zero(); w.len()];
    m.matvec(w, &mut mw);
    Ok(ratio_range(&mw, w))
}

fn ratio_range<T: Real>(mw: &[T], w: &[T]) -> (T, T) {
    mw.iter().zip(w).fold((T::infinity(), T::neg_infinity()), |(lo, hi), (&a, &b)| {
        let q = a / b;
        (lo.min(q), hi.max(q))
    })
}

fn check_positive<T: Real>(w: &[T]) -> Result<()> {
    match w.iter().position(|&x| !(x > T::zero())) {
        Some(index) => Err(Error::NonPositiveVector { index, value: w[index].as_f64() }),
        None => Ok(()),
    }
}

/// Normalized power iteration from all ones (or `seed`), tracking the
/// Collatz–Wielandt enclosure at every step.
pub fn power_enclosure<T: Real>(
    m: &SparseNonnegMatrix<T>,
    opts: PowerOptions<T>,
    seed: Option<&[T]>,
) -> Result<SpectralEnclosure<T>> {
    let n = m.dim();
    if let Some(k) = row_sums(m).iter().position(|&r| !(r > T::zero())) {
        return Err(Error::ZeroRowSum(k));
    }
    let mut w = match seed {
        Some(s) => {
            if s.len() != n {
                return Err(Error::DimensionMismatch(s.len(), n));
            }
            check_positive(s)?;
            let top = s.iter().copied().fold(T::zero(), T::max);
            s.iter().map(|&x| x / top).collect()
        }
        None => vec![T::one(); n],
    };
    let max_iter = opts.max_iter.unwrap_or(10 * n + 1000).max(1);
    let mut mw = vec![T::zero(); n];
    let (mut lo, mut hi) = (T::zero(), T::infinity());
    let mut gaps = Vec::new();
    let mut best_gap = T::infinity();
    let mut since_best = 0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        m.matvec(&w, &mut mw);
        let (l, u) = ratio_range(&mw, &w);
        // every step's bounds are valid, so keep the tightest
        lo = lo.max(l);
        hi = hi.min(u);
        let gap = hi - lo;
        gaps.push(gap);
        let top = mw.iter().copied().fold(T::zero(), T::max);
        if !(top > T::zero()) || !top.is_finite() {
            return Err(Error::PowerDivergence);
        }
        if mw.iter().any(|&x| !(x > T::zero())) {
            // a zero component makes the ratios meaningless; nudge back into the cone
            let floor = top * T::epsilon();
            for x in mw.iter_mut() {
                *x = x.max(floor);
            }
        }
        for (wi, &x) in w.iter_mut().zip(&mw) {
            *wi = x / top;
        }
        if gap <= opts.tol * hi {
            converged = true;
            break;
        }
        if gap < best_gap {
            best_gap = gap;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.stall {
                break;
            }
        }
    }
    Ok(SpectralEnclosure { r_lo: lo, r_hi: hi, eigvec: w, iterations, converged, gaps })
}

/// Hilbert projective distance between positive vectors.
pub fn hilbert_metric<T: Real>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    check_positive(u)?;
    check_positive(v)?;
    let (lo, hi) = ratio_range(u, v);
    Ok(hi.ln() - lo.ln())
}

/// The cone `K_M` of vectors whose neighbouring entries differ by at most a
/// factor `e^{Mh}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams<T> {
    pub m: T,
    pub h: T,
}

pub fn cone_membership<T: Real>(w: &[T], p: ConeParams<T>) -> bool {
    if w.iter().all(|&x| x == T::zero()) {
        return true;
    }
    let f = (p.m * p.h).exp();
    w.iter().all(|&x| x > T::zero()) && w.windows(2).all(|q| q[1] <= q[0] * f && q[0] <= q[1] * f)
}

/// Midpoint log-convexity of a positive function of `s`.
pub fn logconvex_check<T: Real>(r: impl Fn(T) -> T, s0: T, s1: T) -> bool {
    let mid = r((s0 + s1) / T::lit(2.0));
    mid <= (r(s0) * r(s1)).sqrt() * (T::one() + T::lit(1e-10))
}

/// Sufficient conditions for `K_M` to be mapped into itself:
/// `e^{-M₂h} ≥ (1+c)/2` and `e^{Mh} ≥ 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeDiagnostic {
    pub contraction_ok: bool,
    pub width_ok: bool,
}

pub fn cone_hypotheses<T: Real>(m: T, m2: T, c: T, h: T) -> ConeDiagnostic {
    ConeDiagnostic {
        contraction_ok: (-m2 * h).exp() >= (T::one() + c) / T::lit(2.0),
        width_ok: (m * h).exp() >= T::lit(2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{assemble_one, ErrorModel, Mesh, Which};
    use crate::ifs::MapFamily;

    fn dense(d: usize, v: &[f64]) -> SparseNonnegMatrix<f64> {
        SparseNonnegMatrix::from_dense(d, v)
    }

    #[test]
    fn cw_examples() {
        assert_eq!(collatz_wielandt(&dense(2, &[1.0, 0.0, 0.0, 1.0]), &[0.3, 7.0]).unwrap(), (1.0, 1.0));
        assert_eq!(collatz_wielandt(&dense(2, &[0.0, 1.0, 1.0, 0.0]), &[1.0, 1.0]).unwrap(), (1.0, 1.0));
        assert!(matches!(
            collatz_wielandt(&dense(2, &[1.0, 0.0, 0.0, 1.0]), &[1.0, 0.0]),
            Err(Error::NonPositiveVector { index: 1, .. })
        ));
    }

    #[test]
    fn power_examples() {
        let e = power_enclosure(&dense(1, &[2.5]), PowerOptions::default(), None).unwrap();
        assert_eq!((e.r_lo, e.r_hi, e.iterations), (2.5, 2.5, 1));
        let f = MapFamily::cantor(0.0).unwrap();
        let mesh = Mesh::uniform(0.0, 1.0, 30).unwrap();
        let m = assemble_one(&f, &mesh, 0.3, &ErrorModel::zero(mesh.h()), Which::M).unwrap();
        let e = power_enclosure(&m, PowerOptions::default(), None).unwrap();
        assert_eq!(e.iterations, 1);
        let r = 2.0 * 3f64.powf(-0.3);
        assert!((e.r_lo - r).abs() < 1e-15 && (e.r_hi - r).abs() < 1e-15);
        assert!(matches!(
            power_enclosure(&dense(2, &[1.0, 0.0, 0.0, 0.0]), PowerOptions::default(), None),
            Err(Error::ZeroRowSum(1))
        ));
    }

    #[test]
    fn gap_shrinks_monotonically() {
        let f = MapFamily::mobius(&[1.0, 2.0]).unwrap();
        let mesh = Mesh::uniform(0.0, 1.0, 100).unwrap();
        let m = assemble_one(&f, &mesh, 0.5, &ErrorModel::zero(mesh.h()), Which::M).unwrap();
        let e = power_enclosure(&m, PowerOptions::default(), None).unwrap();
        assert!(e.converged);
        assert!(e.gaps.windows(2).all(|g| g[1] <= g[0]));
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_metric(&[3.0, 6.0], &[1.0, 2.0]).unwrap(), 0.0);
        let d = hilbert_metric(&[1.0, 2.0], &[2.0, 1.0]).unwrap();
        assert!((d - 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn cone_examples() {
        let p = ConeParams { m: 3.0, h: 0.1 };
        assert!(cone_membership(&[2.0; 5], p));
        assert!(cone_membership(&[0.0; 3], p));
        assert!(!cone_membership(&[1.0, (2.0f64 * 0.3).exp()], p));
    }

    #[test]
    fn logconvex_examples() {
        assert!(logconvex_check(|s: f64| 2.0 * 3f64.powf(-s), 0.1, 0.9));
        assert!(logconvex_check(|s: f64| (1.7 * s + 0.2).exp(), -1.0, 2.0));
        assert!(!logconvex_check(|s: f64| 1.0 + s - s * s, 0.0, 1.0));
    }
}
