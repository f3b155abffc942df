//! Collocation of the transfer operator on a uniform mesh.
//!
//! Row `k` of each matrix represents `(L_s w)(x_k) = Σ_j g_j(x_k)^s w(θ_j(x_k))`
//! with `w` replaced by its piecewise linear interpolant. The lower matrix
//! `A_s` and upper matrix `B_s` scale every term by `1 - err(θ_j(x_k))`, where
//! `err` is a certified bound on the relative interpolation error of the
//! positive eigenfunction; `M_s` is the plain collocation matrix.

use rayon::prelude::*;

use crate::bounds::interpolation_bounds;
use crate::error::{Error, Result};
use crate::ifs::{merge_intervals, Interval, MapFamily};
use crate::scalar::Real;
use crate::sparse::SparseNonnegMatrix;

/// Which collocation matrix to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    /// Lower matrix: `r(A_s) ≤ r(L_s)`.
    A,
    /// Uncorrected collocation.
    M,
    /// Upper matrix: `r(L_s) ≤ r(B_s)`.
    B,
}

/// One uniformly meshed interval of a (possibly disconnected) domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshPiece<T> {
    pub lo: T,
    pub hi: T,
    pub n: usize,
    /// Global index of the first node.
    pub offset: usize,
}

impl<T: Real> MeshPiece<T> {
    pub fn h(&self) -> T {
        (self.hi - self.lo) / T::count(self.n)
    }

    /// `x_i = lo + i (hi - lo)/n`.
    pub fn node(&self, i: usize) -> T {
        self.lo + T::count(i) * (self.hi - self.lo) / T::count(self.n)
    }
}

/// Uniform partition of an interval, or of a finite union of disjoint
/// intervals meshed separately with a common target width.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    pieces: Vec<MeshPiece<T>>,
    dim: usize,
    clamp_tol: T,
}

/// Location of a point in the mesh: columns `col`, `col + 1` with hat weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interp<T> {
    pub col: usize,
    pub w_left: T,
    pub w_right: T,
    /// Width of the cell containing the point.
    pub h: T,
}

/// Number of cells of width at most `h` covering a length; snaps to the
/// nearest integer when `len/h` is within rounding of it.
fn cells_for<T: Real>(len: T, h: T) -> usize {
    let q = len / h;
    let r = q.round();
    let n = if (q - r).abs() <= T::lit(1e-9) * r.max(T::one()) { r } else { q.ceil() };
    n.to_usize().unwrap_or(usize::MAX)
}

impl<T: Real> Mesh<T> {
    /// `n` equal subintervals of `[a, b]`.
    pub fn uniform(a: T, b: T, n: usize) -> Result<Self> {
        Self::from_parts(&[(Interval::new(a, b), n)])
    }

    /// Mesh of `iv` with width `h` (rounded so the width divides the length).
    pub fn with_width(iv: Interval<T>, h: T) -> Result<Self> {
        Self::uniform(iv.lo, iv.hi, cells_for(iv.len(), h))
    }

    /// Meshes each interval with width at most `h`; intervals closer than
    /// `h/2` are merged first, and each piece gets at least two cells.
    pub fn from_pieces(ivs: &[Interval<T>], h: T) -> Result<Self> {
        let merged = merge_intervals(ivs.to_vec(), h / T::lit(2.0));
        let parts: Vec<_> = merged.iter().map(|iv| (*iv, cells_for(iv.len(), h).max(2))).collect();
        Self::from_parts(&parts)
    }

    fn from_parts(parts: &[(Interval<T>, usize)]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(parts.len());
        let mut offset = 0;
        for &(iv, n) in parts {
            if n < 2 {
                return Err(Error::MeshTooSmall(n));
            }
            pieces.push(MeshPiece { lo: iv.lo, hi: iv.hi, n, offset });
            offset += n + 1;
        }
        let span =
            pieces.last().map(|p| p.hi).unwrap_or_else(T::zero) - pieces.first().map(|p| p.lo).unwrap_or_else(T::zero);
        Ok(Self { pieces, dim: offset, clamp_tol: T::lit(1e-12) * span })
    }

    pub fn pieces(&self) -> &[MeshPiece<T>] {
        &self.pieces
    }

    /// Number of nodes (matrix dimension).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of subintervals.
    pub fn n(&self) -> usize {
        self.pieces.iter().map(|p| p.n).sum()
    }

    /// Largest cell width.
    pub fn h(&self) -> T {
        self.pieces.iter().map(|p| p.h()).fold(T::zero(), T::max)
    }

    pub fn a(&self) -> T {
        self.pieces[0].lo
    }

    pub fn b(&self) -> T {
        self.pieces[self.pieces.len() - 1].hi
    }

    pub fn nodes(&self) -> Vec<T> {
        self.pieces.iter().flat_map(|p| (0..=p.n).map(move |i| p.node(i))).collect()
    }

    /// Cell containing `y`: `(piece index, cell index within the piece,
    /// local coordinate in [0, 1])`. Points within `1e-12·(b-a)` outside a
    /// piece are clamped into it; a node hit uses the cell whose left end is
    /// the node, except at the right end of a piece.
    pub fn locate_cell(&self, y: T) -> Result<(usize, usize, T)> {
        let tol = self.clamp_tol;
        let idx = self.pieces.partition_point(|p| p.hi + tol < y);
        let piece = self.pieces.get(idx).filter(|p| y >= p.lo - tol).ok_or(Error::OutOfDomain {
            x: y.as_f64(),
            lo: self.a().as_f64(),
            hi: self.b().as_f64(),
        })?;
        let y = y.max(piece.lo).min(piece.hi);
        let h = piece.h();
        let n = piece.n;
        let mut r = ((y - piece.lo) / h).floor().to_usize().unwrap_or(0).min(n - 1);
        if r + 1 < n && y >= piece.node(r + 1) {
            r += 1;
        } else if r > 0 && y < piece.node(r) {
            r -= 1;
        }
        let t = ((y - piece.node(r)) / h).max(T::zero()).min(T::one());
        Ok((idx, r, t))
    }

    /// Cell containing `y` and its hat weights; see [`Mesh::locate_cell`].
    pub fn locate(&self, y: T) -> Result<Interp<T>> {
        let (p, r, w_right) = self.locate_cell(y)?;
        let piece = &self.pieces[p];
        Ok(Interp { col: piece.offset + r, w_left: T::one() - w_right, w_right, h: piece.h() })
    }
}

/// Which part of the family's domain to mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainMode {
    #[default]
    Full,
    /// Union of the images of the domain under all words of this length.
    Reduced(usize),
}

/// Mesh of width at most `h` over the domain selected by `mode`.
pub fn family_mesh<T: Real>(family: &MapFamily<T>, h: T, mode: DomainMode) -> Result<Mesh<T>> {
    if !(h > T::zero()) {
        return Err(Error::ParamOutOfRange { name: "h", value: h.as_f64() });
    }
    match mode {
        DomainMode::Full => Mesh::with_width(family.domain(), h),
        DomainMode::Reduced(k) => Mesh::from_pieces(&family.reduce_domain(k), h),
    }
}

/// `interp_weights(mesh, y)`: see [`Mesh::locate`].
pub fn interp_weights<T: Real>(mesh: &Mesh<T>, y: T) -> Result<Interp<T>> {
    mesh.locate(y)
}

/// Relative interpolation-error model. For `y` in a cell `[x_r, x_{r+1}]`
/// with `Q(y) = (x_{r+1} - y)(y - x_r)`, `err¹(y) = coef_hi·Q(y)` and
/// `err²(y) = coef_lo·Q(y)` satisfy
/// `(1 - err¹) v^I(y) ≤ v(y) ≤ (1 - err²) v^I(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel<T> {
    pub coef_hi: T,
    pub coef_lo: T,
    /// Oscillation rate used in the `exp(±ρh)` factors.
    pub m1_used: T,
    pub h: T,
}

impl<T: Real> ErrorModel<T> {
    /// No correction: `A = B = M`.
    pub fn zero(h: T) -> Self {
        Self { coef_hi: T::zero(), coef_lo: T::zero(), m1_used: T::zero(), h }
    }

    /// From `R_lo ≤ v''/v ≤ R_hi` and `v(x_2) ≤ v(x_1) e^{ρ|x_2-x_1|}`.
    pub fn new(r_lo: T, r_hi: T, osc: T, h: T, s: T) -> Result<Self> {
        let half = T::lit(0.5);
        let up = (osc * h).exp();
        let down = (-osc * h).exp();
        // v(ξ) lies within e^{±ρh} of v^I(y); pick the side that keeps each bound valid
        let coef_hi = half * r_hi * if r_hi >= T::zero() { up } else { down };
        let coef_lo = half * r_lo * if r_lo >= T::zero() { down } else { up };
        let value = coef_hi * h * h / T::lit(4.0);
        if !(value < T::one()) {
            return Err(Error::ErrTooLarge { value: value.as_f64(), h: h.as_f64(), s: s.as_f64() });
        }
        Ok(Self { coef_hi, coef_lo, m1_used: osc, h })
    }

    /// Model for `family` at exponent `s` on cells of width at most `h`.
    pub fn for_family(family: &MapFamily<T>, s: T, h: T) -> Result<Self> {
        let b = interpolation_bounds(family, s)?;
        Self::new(b.r_lo, b.r_hi, b.osc, h, s)
    }

    pub fn err_hi(&self, q: T) -> T {
        self.coef_hi * q
    }

    pub fn err_lo(&self, q: T) -> T {
        self.coef_lo * q
    }

    fn coef(&self, which: Which) -> T {
        match which {
            Which::A => self.coef_hi,
            Which::M => T::zero(),
            Which::B => self.coef_lo,
        }
    }
}

/// Adds `(col, v)` to a short row, keeping first-insertion order for sums.
pub(crate) fn accumulate<T: Real>(row: &mut Vec<(usize, T)>, col: usize, v: T) {
    if v == T::zero() {
        return;
    }
    match row.iter_mut().find(|e| e.0 == col) {
        Some(e) => e.1 = e.1 + v,
        None => row.push((col, v)),
    }
}

fn assemble_row<T: Real>(
    family: &MapFamily<T>,
    mesh: &Mesh<T>,
    s: T,
    coef: T,
    k: usize,
    x: T,
) -> Result<Vec<(usize, T)>> {
    let mut row = Vec::with_capacity(2 * family.len());
    for (j, map) in family.maps().iter().enumerate() {
        let y = map.eval(x);
        let loc = mesh.locate(y).map_err(|_| Error::MapEscapesDomain { index: j, x: x.as_f64(), y: y.as_f64() })?;
        let weight = map.weight(x).powf(s);
        let factor =
            if coef == T::zero() { T::one() } else { T::one() - coef * loc.h * loc.h * loc.w_left * loc.w_right };
        if factor < T::zero() {
            return Err(Error::NegativeEntry { row: k, col: loc.col, value: (weight * factor).as_f64() });
        }
        let scaled = weight * factor;
        accumulate(&mut row, loc.col, scaled * loc.w_left);
        accumulate(&mut row, loc.col + 1, scaled * loc.w_right);
    }
    row.sort_by_key(|e| e.0);
    Ok(row)
}

/// Builds one of `A_s`, `M_s`, `B_s`. Rows are independent and computed in
/// parallel; within a row, contributions are added in map order.
pub fn assemble_one<T: Real>(
    family: &MapFamily<T>,
    mesh: &Mesh<T>,
    s: T,
    model: &ErrorModel<T>,
    which: Which,
) -> Result<SparseNonnegMatrix<T>> {
    let coef = model.coef(which);
    let nodes = mesh.nodes();
    let rows: Vec<Vec<(usize, T)>> = nodes
        .par_iter()
        .enumerate()
        .with_min_len(64)
        .map(|(k, &x)| assemble_row(family, mesh, s, coef, k, x))
        .collect::<Result<_>>()?;
    Ok(SparseNonnegMatrix::from_rows(mesh.dim(), rows))
}

/// The triple `(A_s, M_s, B_s)`.
#[derive(Debug, Clone)]
pub struct Assembled<T> {
    pub a: SparseNonnegMatrix<T>,
    pub m: SparseNonnegMatrix<T>,
    pub b: SparseNonnegMatrix<T>,
}

pub fn assemble<T: Real>(family: &MapFamily<T>, mesh: &Mesh<T>, s: T, model: &ErrorModel<T>) -> Result<Assembled<T>> {
    Ok(Assembled {
        a: assemble_one(family, mesh, s, model, Which::A)?,
        m: assemble_one(family, mesh, s, model, Which::M)?,
        b: assemble_one(family, mesh, s, model, Which::B)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::row_sums;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn mesh_invariants() {
        let m = Mesh::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(m.dim(), 5);
        assert_eq!(m.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(m.h(), 0.25);
        assert!(matches!(Mesh::uniform(0.0, 1.0, 1), Err(Error::MeshTooSmall(1))));
        let w = Mesh::with_width(Interval::new(0.0, 1.0), 0.001).unwrap();
        assert_eq!(w.n(), 1000);
        let w = Mesh::with_width(Interval::new(0.0, 0.01), 0.0004).unwrap();
        assert_eq!(w.n(), 25);
        let last: f64 = *w.nodes().last().unwrap();
        assert!((last - 0.01).abs() <= f64::EPSILON * 0.01);
    }

    #[test]
    fn interp_examples() {
        let m = Mesh::uniform(0.0, 1.0, 4).unwrap();
        for k in 0..4 {
            let i = m.locate(0.25 * k as f64).unwrap();
            assert_eq!((i.col, i.w_left, i.w_right), (k, 1.0, 0.0));
        }
        let i = m.locate(1.0).unwrap();
        assert_eq!((i.col, i.w_left, i.w_right), (3, 0.0, 1.0));
        let i = m.locate(2.0 / 7.0).unwrap();
        assert_eq!(i.col, 1);
        assert!(close(i.w_left, 6.0 / 7.0, 1e-15) && close(i.w_right, 1.0 / 7.0, 1e-14));
        let i = m.locate(0.625).unwrap();
        assert_eq!((i.col, i.w_left, i.w_right), (2, 0.5, 0.5));
        // clamping
        assert_eq!(m.locate(-1e-14).unwrap().col, 0);
        assert!(matches!(m.locate(-1e-6), Err(Error::OutOfDomain { .. })));
        assert!(matches!(m.locate(1.0 + 1e-6), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn split_domain_never_interpolates_across_gaps() {
        let ivs = [Interval::new(1.0 / 3.0, 3.0 / 7.0), Interval::new(0.5, 0.75)];
        let m = Mesh::from_pieces(&ivs, 0.01).unwrap();
        assert_eq!(m.pieces().len(), 2);
        let p0 = m.pieces()[0];
        assert_eq!(m.locate(3.0 / 7.0).unwrap().col, p0.offset + p0.n - 1);
        assert_eq!(m.locate(0.5).unwrap().col, p0.n + 1);
        assert!(m.locate(0.45).is_err());
        // nearby intervals merge
        let close_ivs = [Interval::new(0.0, 0.5), Interval::new(0.502, 1.0)];
        assert_eq!(Mesh::from_pieces(&close_ivs, 0.01).unwrap().pieces().len(), 1);
    }

    #[test]
    fn error_model_examples() {
        // Möbius γ=1, Γ=2, s=0.5, h=0.1: err¹ at a midpoint = 0.05² e^{0.1}
        let f = MapFamily::mobius(&[1.0, 2.0]).unwrap();
        let e = ErrorModel::for_family(&f, 0.5, 0.1).unwrap();
        assert!(close(e.err_hi(0.05 * 0.05), 0.002_762_927_3, 1e-7));
        assert!(close(e.err_hi(0.0025), 0.0025 * 0.1f64.exp(), 1e-14));
        assert!(close(e.coef_lo, 0.5 * 2.0 * 0.5 * 2.0 * 4f64.powi(-2) * (-0.1f64).exp(), 1e-14));
        let z = ErrorModel::for_family(&MapFamily::cantor(0.0).unwrap(), 0.6, 0.1).unwrap();
        assert_eq!((z.coef_hi, z.coef_lo), (0.0, 0.0));
        assert!(matches!(ErrorModel::for_family(&f, 1.0, 1.0), Err(Error::ErrTooLarge { .. })));
        // negative lower ratio bound widens with e^{+ρh}
        let e = ErrorModel::new(-2.0, 2.0, 1.0, 0.1, 0.5).unwrap();
        assert!(close(e.coef_lo, -(0.1f64).exp(), 1e-15));
    }

    #[derive(Debug)]
    struct Gauss(f64);

    impl crate::ifs::SmoothMap<f64> for Gauss {
        fn jet(&self, x: f64) -> crate::jet::Jet3<f64> {
            let u = x + self.0;
            crate::jet::Jet3::new(1.0 / u, -u.powi(-2), 2.0 * u.powi(-3), -6.0 * u.powi(-4))
        }
        fn weight_jet(&self, x: f64) -> crate::jet::Jet3<f64> {
            let u = x + self.0;
            crate::jet::Jet3::new(u.powi(-2), -2.0 * u.powi(-3), 6.0 * u.powi(-4), -24.0 * u.powi(-5))
        }
    }

    #[test]
    fn worked_example_sparsity() {
        let maps: Vec<std::sync::Arc<dyn crate::ifs::SmoothMap<f64>>> =
            vec![std::sync::Arc::new(Gauss(3.0)), std::sync::Arc::new(Gauss(5.0))];
        let f = MapFamily::custom("unit[3,5]", maps, Interval::new(0.0, 1.0), None, 50).unwrap();
        let mesh = Mesh::uniform(0.0, 1.0, 4).unwrap();
        let model = ErrorModel::new(0.1, 1.0, 1.0, 0.25, 0.5).unwrap();
        let t = assemble(&f, &mesh, 0.5, &model).unwrap();
        for k in 0..5 {
            let (cols, _) = t.b.row(k);
            assert!(cols.iter().all(|&c| c <= 2), "row {k}: {cols:?}");
            assert_eq!(t.b.get(k, 3), 0.0);
            assert_eq!(t.b.get(k, 4), 0.0);
        }
    }

    #[test]
    fn cantor_affine_row_sums() {
        let f = MapFamily::cantor(0.0).unwrap();
        let mesh = Mesh::uniform(0.0, 1.0, 37).unwrap();
        let s = 0.4;
        let m = assemble_one(&f, &mesh, s, &ErrorModel::zero(mesh.h()), Which::M).unwrap();
        for r in row_sums(&m) {
            assert!(close(r, 2.0 * 3f64.powf(-s), 1e-14));
        }
        let s = 2f64.ln() / 3f64.ln();
        let m = assemble_one(&f, &mesh, s, &ErrorModel::zero(mesh.h()), Which::M).unwrap();
        assert!(row_sums(&m).iter().all(|r| (r - 1.0).abs() < 1e-14));
    }

    #[test]
    fn single_map_rows() {
        let f = MapFamily::mobius(&[3.0]).unwrap();
        let mesh = Mesh::uniform(0.0, 1.0 / 3.0, 4).unwrap();
        let m = assemble_one(&f, &mesh, 0.7, &ErrorModel::zero(mesh.h()), Which::M).unwrap();
        for k in 0..mesh.dim() {
            let nz = m.row(k).0.len();
            assert!(nz == 1 || nz == 2);
        }
    }

    #[test]
    fn row_sum_ordering() {
        let f = MapFamily::mobius(&[1.0, 2.0]).unwrap();
        let mesh = Mesh::uniform(0.0, 1.0, 50).unwrap();
        let model = ErrorModel::for_family(&f, 0.5, mesh.h()).unwrap();
        let t = assemble(&f, &mesh, 0.5, &model).unwrap();
        let (ra, rb, rm) = (row_sums(&t.a), row_sums(&t.b), row_sums(&t.m));
        for k in 0..mesh.dim() {
            assert!(ra[k] <= rb[k] && rb[k] <= rm[k]);
        }
    }
}
