//! Certified dimension brackets: roots of `s ↦ log r(A_s)` and `s ↦ log r(B_s)`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::discretize::{assemble_one, ErrorModel, Mesh, Which};
use crate::error::{Error, Result};
use crate::ifs::{grid, MapFamily};
use crate::scalar::Real;
use crate::spectral::{power_enclosure, PowerOptions, SpectralEnclosure};

/// Tolerances and search limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Target for `|log r(s)|` at a root.
    pub root_tol: T,
    /// Relative width requested from each spectral enclosure.
    pub radius_tol: T,
    /// Initial sign-change bracket.
    pub s_min: T,
    pub s_max: T,
    /// The bracket may be widened (halving `s_min`, doubling `s_max`) this many times.
    pub expansions: usize,
    pub max_evals: usize,
    pub nudge_steps: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            root_tol: T::lit(1e-12),
            radius_tol: T::lit(1e-13),
            s_min: T::lit(0.01),
            s_max: T::lit(1.5),
            expansions: 8,
            max_evals: 40,
            nudge_steps: 64,
        }
    }
}

type Key = (u64, Which);

/// Memoized spectral enclosures of `A_s`, `M_s`, `B_s` for one family and mesh.
///
/// Safe to share between threads; each matrix kind warm-starts its power
/// iteration from the last eigenvector computed for that kind.
#[derive(Debug)]
pub struct RadiusEvaluator<'a, T> {
    family: &'a MapFamily<T>,
    mesh: &'a Mesh<T>,
    power: PowerOptions<T>,
    cache: Mutex<HashMap<Key, Arc<SpectralEnclosure<T>>>>,
    seeds: Mutex<HashMap<Which, Vec<T>>>,
    evals: AtomicUsize,
}

impl<'a, T: Real> RadiusEvaluator<'a, T> {
    pub fn new(family: &'a MapFamily<T>, mesh: &'a Mesh<T>, radius_tol: T) -> Self {
        Self {
            family,
            mesh,
            power: PowerOptions { tol: radius_tol, ..PowerOptions::default() },
            cache: Mutex::new(HashMap::new()),
            seeds: Mutex::new(HashMap::new()),
            evals: AtomicUsize::new(0),
        }
    }

    pub fn family(&self) -> &MapFamily<T> {
        self.family
    }

    pub fn mesh(&self) -> &Mesh<T> {
        self.mesh
    }

    /// Number of matrices assembled so far.
    pub fn evals(&self) -> usize {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn error_model(&self, s: T, which: Which) -> Result<ErrorModel<T>> {
        match which {
            Which::M => Ok(ErrorModel::zero(self.mesh.h())),
            _ => ErrorModel::for_family(self.family, s, self.mesh.h()),
        }
    }

    pub fn enclosure(&self, s: T, which: Which) -> Result<Arc<SpectralEnclosure<T>>> {
        let key = (s.as_f64().to_bits(), which);
        if let Some(e) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(Arc::clone(e));
        }
        let model = self.error_model(s, which)?;
        let m = assemble_one(self.family, self.mesh, s, &model, which)?;
        self.evals.fetch_add(1, Ordering::Relaxed);
        let seed = self.seeds.lock().expect("seed lock poisoned").get(&which).cloned();
        let e = Arc::new(power_enclosure(&m, self.power, seed.as_deref())?);
        self.seeds.lock().expect("seed lock poisoned").insert(which, e.eigvec.clone());
        let mut cache = self.cache.lock().expect("cache poisoned");
        Ok(Arc::clone(cache.entry(key).or_insert(e)))
    }

    /// `log` of the enclosure midpoint.
    pub fn log_radius(&self, s: T, which: Which) -> Result<T> {
        Ok(self.enclosure(s, which)?.mid().ln())
    }
}

/// Outcome of a one-dimensional root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult<T> {
    pub root: T,
    pub value: T,
    pub evals: usize,
    pub converged: bool,
}

/// Root of a decreasing function by secant steps, falling back to bisection
/// whenever a step leaves the current sign-change bracket.
///
/// If `f(lo) ≤ 0` the lower end is halved, if `f(hi) ≥ 0` the upper end is
/// doubled, at most `expansions` times each.
pub fn secant_bisect<T: Real>(
    mut f: impl FnMut(T) -> Result<T>,
    lo: T,
    hi: T,
    tol: T,
    max_evals: usize,
    expansions: usize,
) -> Result<RootResult<T>> {
    let (mut a, mut b) = (lo, hi);
    let mut evals = 2;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let mut tries = 0;
    while fa <= T::zero() && tries < expansions {
        b = a;
        fb = fa;
        a = a / T::lit(2.0);
        fa = f(a)?;
        evals += 1;
        tries += 1;
    }
    tries = 0;
    while fb >= T::zero() && tries < expansions {
        a = b;
        fa = fb;
        b = b * T::lit(2.0);
        fb = f(b)?;
        evals += 1;
        tries += 1;
    }
    if !(fa > T::zero() && fb < T::zero()) {
        return Err(Error::NoSignChange { lo: a.as_f64(), hi: b.as_f64(), f_lo: fa.as_f64(), f_hi: fb.as_f64() });
    }
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    while evals < max_evals {
        if best.1.abs() <= tol {
            return Ok(RootResult { root: best.0, value: best.1, evals, converged: true });
        }
        let mut x = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x > a && x < b) {
            x = a + (b - a) / T::lit(2.0);
        }
        if x <= a || x >= b {
            // bracket exhausted at floating-point resolution
            break;
        }
        let fx = f(x)?;
        evals += 1;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx > T::zero() {
            a = x;
        } else {
            b = x;
        }
        (x0, f0, x1, f1) = (x1, f1, x, fx);
    }
    Ok(RootResult { root: best.0, value: best.1, evals, converged: best.1.abs() <= tol })
}

/// Root in `s` of `log r` for one matrix kind.
pub fn solve_root<T: Real>(
    ev: &RadiusEvaluator<'_, T>,
    which: Which,
    opts: &SolverOptions<T>,
) -> Result<RootResult<T>> {
    secant_bisect(|s| ev.log_radius(s, which), opts.s_min, opts.s_max, opts.root_tol, opts.max_evals, opts.expansions)
}

/// Certified interval containing the dimension, modulo floating-point rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionBracket<T> {
    pub s_lower: T,
    pub s_upper: T,
    pub mesh_h: T,
    pub family_id: String,
    pub radius_tol: T,
    pub root_tol: T,
    /// Matrices assembled.
    pub evals: usize,
    /// `r_lo(A at s_lower) ≥ 1` and `r_hi(B at s_upper) ≤ 1` both hold.
    pub certified: bool,
    /// Every two-map composition has weight below one on a sample grid.
    pub decreasing_certified: bool,
    /// `r_lo(A_{s_lower})`.
    pub lower_witness: T,
    /// `r_hi(B_{s_upper})`.
    pub upper_witness: T,
}

impl<T: Real> DimensionBracket<T> {
    pub fn width(&self) -> T {
        self.s_upper - self.s_lower
    }

    pub fn contains(&self, s: T) -> bool {
        self.s_lower <= s && s <= self.s_upper
    }

    pub fn intersects(&self, lo: T, hi: T) -> bool {
        self.s_lower <= hi && lo <= self.s_upper
    }
}

/// `max g_i(x) g_j(θ_i(x)) < 1` over two-letter words and a grid of `x`.
pub fn radius_decreasing_check<T: Real>(family: &MapFamily<T>, samples: usize) -> bool {
    let maps = family.maps();
    grid(family.domain(), samples).all(|x| {
        maps.iter().all(|mi| {
            let (y, gi) = (mi.eval(x), mi.weight(x));
            maps.iter().all(|mj| gi * mj.weight(y) < T::one())
        })
    })
}

/// Moves `s` by `step` until `ok(s)` holds, at most `steps` times.
fn nudge<T: Real>(mut s: T, step: T, steps: usize, mut ok: impl FnMut(T) -> Result<(bool, T)>) -> Result<(T, bool, T)> {
    let (mut good, mut witness) = ok(s)?;
    let mut i = 0;
    while !good && i < steps {
        s = s + step;
        (good, witness) = ok(s)?;
        i += 1;
    }
    Ok((s, good, witness))
}

/// Bracket from one evaluator: solve on `B` and step up until `r_hi(B) ≤ 1`,
/// solve on `A` and step down until `r_lo(A) ≥ 1`.
pub fn bracket_with<T: Real>(ev: &RadiusEvaluator<'_, T>, opts: &SolverOptions<T>) -> Result<DimensionBracket<T>> {
    let (upper, lower) = rayon::join(
        || -> Result<(T, bool, T)> {
            let r = solve_root(ev, Which::B, opts)?;
            nudge(r.root, opts.root_tol, opts.nudge_steps, |s| {
                let e = ev.enclosure(s, Which::B)?;
                Ok((e.r_hi <= T::one(), e.r_hi))
            })
        },
        || -> Result<(T, bool, T)> {
            let r = solve_root(ev, Which::A, opts)?;
            nudge(r.root, -opts.root_tol, opts.nudge_steps, |s| {
                let e = ev.enclosure(s, Which::A)?;
                Ok((e.r_lo >= T::one(), e.r_lo))
            })
        },
    );
    let (s_upper, up_ok, upper_witness) = upper?;
    let (s_lower, low_ok, lower_witness) = lower?;
    Ok(DimensionBracket {
        s_lower,
        s_upper,
        mesh_h: ev.mesh().h(),
        family_id: ev.family().id(),
        radius_tol: ev.power.tol,
        root_tol: opts.root_tol,
        evals: ev.evals(),
        certified: up_ok && low_ok && s_lower <= s_upper,
        decreasing_certified: radius_decreasing_check(ev.family(), 1000),
        lower_witness,
        upper_witness,
    })
}

pub fn bracket_dimension<T: Real>(
    family: &MapFamily<T>,
    mesh: &Mesh<T>,
    opts: &SolverOptions<T>,
) -> Result<DimensionBracket<T>> {
    let ev = RadiusEvaluator::new(family, mesh, opts.radius_tol);
    bracket_with(&ev, opts)
}

/// Brackets on a sequence of refining meshes and the fitted order of
/// `width ~ h^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy<T> {
    pub rows: Vec<DimensionBracket<T>>,
    /// Least-squares slope of `log width` against `log h`; `None` if fewer
    /// than two rows have positive width.
    pub order: Option<T>,
}

pub fn convergence_study<T: Real>(
    family: &MapFamily<T>,
    meshes: &[Mesh<T>],
    opts: &SolverOptions<T>,
) -> Result<ConvergenceStudy<T>> {
    if meshes.len() < 2 {
        return Err(Error::BadParams("a study needs at least two meshes".into()));
    }
    if meshes.windows(2).any(|w| !(w[1].h() < w[0].h())) {
        return Err(Error::BadParams("mesh widths must be strictly decreasing".into()));
    }
    let rows = meshes.iter().map(|m| bracket_dimension(family, m, opts)).collect::<Result<Vec<_>>>()?;
    let pts: Vec<(T, T)> =
        rows.iter().filter(|r| r.width() > T::zero()).map(|r| (r.mesh_h.ln(), r.width().ln())).collect();
    Ok(ConvergenceStudy { order: fit_slope(&pts), rows })
}

/// Least-squares slope through `(x, y)` points.
pub fn fit_slope<T: Real>(pts: &[(T, T)]) -> Option<T> {
    if pts.len() < 2 {
        return None;
    }
    let n = T::count(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > T::zero()).then(|| sxy / sxx)
}
