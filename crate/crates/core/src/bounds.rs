//! A-priori bounds on the derivative ratios `D^p v_s / v_s` of the positive
//! eigenfunction of the transfer operator.
//!
//! Two sources of bounds are implemented:
//!
//! * sharp closed forms for continued-fraction (Möbius) families, and
//! * the general recursive bounds `M1`, `M2`, `M3` built from suprema over
//!   words of length `μ`, with the closed-form constants of the perturbed
//!   Cantor family as a cross-check and a refined second-derivative bound
//!   when the eigenfunction is certified increasing and convex.
//!
//! These bounds feed the interpolation-error corrections in
//! [`crate::discretize`].

use crate::error::{Error, Result};
use crate::ifs::{grid, FamilyKind, MapFamily};
use crate::jet::Jet3;
use crate::scalar::Real;

/// Bounds `lo ≤ (-1)^p D^p v / v ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBoundPair<T> {
    pub lo: T,
    pub hi: T,
    pub order: u32,
}

/// Constants controlling the derivative-ratio bounds of a family at a fixed `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConstants<T> {
    pub kappa: T,
    pub mu: usize,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    pub e2: T,
    pub e3: T,
    pub k2: T,
    pub k3: T,
    /// Signed maximum of `(g''g - (1-s)g'^2)/g^2`.
    pub g2: T,
    pub m1: T,
    pub m2: T,
    pub m3: T,
    /// Lower/upper bounds on `v''/v`.
    pub r_lo: T,
    pub r_hi: T,
    /// `v' ≥ 0` and `v'' ≥ 0` hold.
    pub sign_cert: bool,
    /// False when suprema or signs were only established on a sampling grid.
    pub rigorous: bool,
    /// Multiplicative inflation applied to sampled suprema.
    pub safety_factor: T,
}

/// Options for the sampled suprema in [`general_constants`].
#[derive(Debug, Clone, Copy)]
pub struct SupremumOptions<T> {
    /// Grid intervals per word before local refinement.
    pub grid: usize,
    /// Inflation applied to every sampled supremum.
    pub safety: T,
    /// Maximise `K2`, `K3` directly instead of using the crude estimates.
    pub direct_k: bool,
}

impl<T: Real> Default for SupremumOptions<T> {
    fn default() -> Self {
        Self { grid: 2000, safety: T::lit(1.01), direct_k: true }
    }
}

/// `(2s)(2s+1)⋯(2s+p-1)`.
fn rising<T: Real>(s: T, p: u32) -> T {
    let two_s = T::lit(2.0) * s;
    (0..p).fold(T::one(), |acc, i| acc * (two_s + T::count(i as usize)))
}

/// Sharp bounds on `(-1)^p D^p v_s / v_s` for `θ_b(x) = 1/(x+b)` with digits
/// in `[γ, Γ]`, on `[0, A]` with `A ≥ 1/γ`.
pub fn mobius_ratio_bounds<T: Real>(gamma: T, big_gamma: T, a_right: T, s: T, p: u32) -> Result<RatioBoundPair<T>> {
    if !(gamma > T::zero()) || big_gamma < gamma || a_right < gamma.recip() || !(s > T::zero()) || p == 0 {
        return Err(Error::BadParams(format!(
            "need γ > 0, Γ ≥ γ, A ≥ 1/γ, s > 0, p ≥ 1 (γ={gamma}, Γ={big_gamma}, A={a_right}, s={s}, p={p})"
        )));
    }
    let prod = rising(s, p);
    let k = gamma.recip() + big_gamma;
    let pi = p as i32;
    Ok(RatioBoundPair { lo: prod * (k + a_right).powi(-pi), hi: prod * gamma.powi(-pi), order: p })
}

/// `M1 = s C1 / (1 - κ)`.
pub fn bound_m1<T: Real>(s: T, c1: T, kappa: T) -> T {
    s * c1 / (T::one() - kappa)
}

/// `M2 = (s K2 + 2 s C1 M1 κ + M1 E2) / (1 - κ²)`.
pub fn bound_m2<T: Real>(s: T, c: &BoundConstants<T>) -> T {
    let two = T::lit(2.0);
    (s * c.k2 + two * s * c.c1 * c.m1 * c.kappa + c.m1 * c.e2) / (T::one() - c.kappa * c.kappa)
}

/// Third-derivative bound `M3`; uses `c.m1`, `c.m2`.
pub fn bound_m3<T: Real>(s: T, c: &BoundConstants<T>) -> T {
    let three = T::lit(3.0);
    let k = c.kappa;
    let sum = s * c.k3
        + three * s * c.k2 * c.m1 * k
        + three * s * c.c1 * (c.m2 * k * k + c.m1 * c.e2)
        + three * c.m2 * k * c.e2
        + c.m1 * c.e3;
    sum / (T::one() - k * k * k)
}

/// Refined upper bound on `v''/v` valid when `v' ≥ 0` and `v'' ≥ 0`.
pub fn refined_m2_upper<T: Real>(s: T, c: &BoundConstants<T>) -> Result<T> {
    if !c.sign_cert {
        return Err(Error::SignNotCertified(s.as_f64()));
    }
    Ok(refined_m2_formula(s, c.g2, c.c1, c.e2, c.kappa))
}

fn refined_m2_formula<T: Real>(s: T, g2: T, c1: T, e2: T, kappa: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    (s * g2 + two * s * s * c1 * c1 * kappa / (one - kappa) + s * c1 * e2 / (one - kappa)) / (one - kappa * kappa)
}

/// Maximises `f` on `[lo, hi]`: `seeds` equispaced samples, then golden-section
/// search on the two cells around the best sample. Returns `(argmax, max)`.
pub fn maximize_1d<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, seeds: usize, tol: T) -> (T, T) {
    let seeds = seeds.max(2);
    let mut best = (lo, T::neg_infinity());
    let mut best_i = 0;
    for (i, x) in grid(crate::ifs::Interval::new(lo, hi), seeds).enumerate() {
        let v = f(x);
        if v > best.1 || (v.is_nan() && best.1 == T::neg_infinity()) {
            best = (x, v);
            best_i = i;
        }
    }
    if !best.1.is_finite() {
        return best;
    }
    let step = (hi - lo) / T::count(seeds);
    let a0 = if best_i == 0 { lo } else { lo + T::count(best_i - 1) * step };
    let b0 = if best_i + 1 >= seeds { hi } else { lo + T::count(best_i + 1) * step };
    let (x, v) = golden_max(&f, a0, b0, tol);
    if v > best.1 {
        (x, v)
    } else {
        best
    }
}

fn golden_max<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> (T, T) {
    let invphi = T::lit(0.618_033_988_749_894_9);
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `(θ_ω, g_ω)` jets at `x` for the word `ω = (b_1, …, b_μ)`, where
/// `θ_ω = θ_{b_μ} ∘ ⋯ ∘ θ_{b_1}` and `g_ω(x) = ∏ g_{b_{k+1}}(θ_{b_k} ∘ ⋯ ∘ θ_{b_1}(x))`.
fn word_jets<T: Real>(family: &MapFamily<T>, word: &[usize], x: T) -> (Jet3<T>, Jet3<T>) {
    let mut xi = Jet3::variable(x);
    let mut g = Jet3::constant(T::one());
    for &b in word {
        let m = &family.maps()[b];
        g = g * m.weight_jet(xi.v).compose(xi);
        xi = m.jet(xi.v).compose(xi);
    }
    (xi, g)
}

/// All words of length `mu` over `n` letters, lexicographic with `b_1` most significant.
fn words(n: usize, mu: usize) -> Vec<Vec<usize>> {
    let total = n.pow(mu as u32);
    (0..total)
        .map(|mut idx| {
            let mut w = vec![0; mu];
            for slot in w.iter_mut().rev() {
                *slot = idx % n;
                idx /= n;
            }
            w
        })
        .collect()
}

const N_QUANT: usize = 8;

/// `[|g'/g|, |g''/g|, |g'''/g|, |θ''|, |θ'''|, K2-expr, K3-expr, G2-expr]`.
fn quantities<T: Real>(theta: Jet3<T>, g: Jet3<T>, s: T) -> [T; N_QUANT] {
    let one = T::one();
    let (r1, r2, r3) = g.log_ratios();
    let k2_signed = r2 - (one - s) * r1 * r1;
    let k3 = (s - one) * (s - T::lit(2.0)) * r1 * r1 * r1 + T::lit(3.0) * (s - one) * r1 * r2 + r3;
    [r1.abs(), r2.abs(), r3.abs(), theta.d2.abs(), theta.d3.abs(), k2_signed.abs(), k3.abs(), k2_signed]
}

/// Suprema over `ω ∈ B_μ` and `x` in the domain by grid search plus local
/// refinement, then the derived bounds `M1`, `M2`, `M3` at exponent `s`.
pub fn general_constants<T: Real>(family: &MapFamily<T>, s: T, opts: SupremumOptions<T>) -> Result<BoundConstants<T>> {
    let contraction = family.contraction_data()?;
    let domain = family.domain();
    let mut sup = [T::neg_infinity(); N_QUANT];
    for w in words(family.len(), contraction.mu) {
        let eval = |x: T| {
            let (th, g) = word_jets(family, &w, x);
            quantities(th, g, s)
        };
        for (q, slot) in sup.iter_mut().enumerate() {
            let (_, v) = maximize_1d(|x| eval(x)[q], domain.lo, domain.hi, opts.grid, T::lit(1e-12) * domain.len());
            if v.is_nan() {
                return Err(Error::MissingDerivatives("derivative data evaluates to NaN"));
            }
            if v > *slot {
                *slot = v;
            }
        }
    }
    let inflate = |v: T| if v > T::zero() { v * opts.safety } else { v };
    let [c1, c2, c3, e2, e3, k2_direct, k3_direct, g2] = sup.map(inflate);
    let one = T::one();
    let (k2, k3) = if opts.direct_k {
        (k2_direct, k3_direct)
    } else {
        (
            c2 + (one - s).abs() * c1 * c1,
            (s - one).abs() * (s - T::lit(2.0)).abs() * c1 * c1 * c1 + T::lit(3.0) * (s - one).abs() * c1 * c2 + c3,
        )
    };
    let kappa = contraction.kappa;
    let m1 = bound_m1(s, c1, kappa);
    let mut c = BoundConstants {
        kappa,
        mu: contraction.mu,
        c1,
        c2,
        c3,
        e2,
        e3,
        k2,
        k3,
        g2,
        m1,
        m2: T::zero(),
        m3: T::zero(),
        r_lo: T::zero(),
        r_hi: T::zero(),
        sign_cert: false,
        rigorous: false,
        safety_factor: opts.safety,
    };
    c.m2 = bound_m2(s, &c);
    c.m3 = bound_m3(s, &c);
    c.sign_cert = sign_certificate(family, s);
    c.r_lo = -c.m2;
    c.r_hi = c.m2;
    Ok(c)
}

/// Closed-form constants of the perturbed Cantor family at parameter `a`.
pub fn cantor_constants<T: Real>(a: T, s: T) -> Result<BoundConstants<T>> {
    if !(a >= T::zero() && a <= T::one()) {
        return Err(Error::ParamOutOfRange { name: "a", value: a.as_f64() });
    }
    if !(s > T::zero()) {
        return Err(Error::ParamOutOfRange { name: "s", value: s.as_f64() });
    }
    let zero = T::zero();
    let one = T::one();
    let lit = T::lit;
    let kappa = (lit(2.0) + lit(7.0) * a) / (lit(6.0) + lit(4.0) * a);
    if a == zero {
        return Ok(BoundConstants {
            kappa,
            mu: 1,
            c1: zero,
            c2: zero,
            c3: zero,
            e2: zero,
            e3: zero,
            k2: zero,
            k3: zero,
            g2: zero,
            m1: zero,
            m2: zero,
            m3: zero,
            r_lo: zero,
            r_hi: zero,
            sign_cert: true,
            rigorous: true,
            safety_factor: one,
        });
    }
    let c = lit(3.5) * a;
    let c1 =
        if a <= lit(3.0 / 7.0) { c * lit(2.5) / (one + c) } else { c * (lit(3.0) / (lit(7.0) * a)).powf(lit(0.6)) };
    let c2 = if a <= lit(1.0 / 14.0) {
        lit(3.75) * c / (one + c)
    } else {
        lit(3.0) * lit(0.25).powf(lit(0.2)) * c.powf(lit(0.8))
    };
    let e2 = c * lit(5.0) / (lit(6.0) + lit(4.0) * a);
    let e3 = c * lit(3.75) / (lit(3.0) + lit(2.0) * a);
    // K2-type quotient (g''g - (1-s)g'^2)/g^2 in x
    let quotient = |x: T| {
        let den = one + c * x.powf(lit(2.5));
        let r1 = c * lit(2.5) * x.powf(lit(1.5)) / den;
        let r2 = c * lit(3.75) * x.sqrt() / den;
        r2 - (one - s) * r1 * r1
    };
    let tol = lit(1e-12);
    let (_, g2) = maximize_1d(quotient, zero, one, 64, tol);
    let (_, k2) = maximize_1d(|x| quotient(x).abs(), zero, one, 64, tol);
    let m1 = bound_m1(s, c1, kappa);
    let mut bc = BoundConstants {
        kappa,
        mu: 1,
        c1,
        c2,
        // g''' ~ x^{-1/2} near 0
        c3: T::infinity(),
        e2,
        e3,
        k2,
        k3: T::infinity(),
        g2,
        m1,
        m2: zero,
        m3: T::infinity(),
        r_lo: zero,
        r_hi: zero,
        sign_cert: cantor_sign_condition(a, s),
        rigorous: true,
        safety_factor: one,
    };
    bc.m2 = bound_m2(s, &bc);
    if bc.sign_cert {
        bc.r_hi = refined_m2_upper(s, &bc)?;
    } else {
        bc.r_lo = -bc.m2;
        bc.r_hi = bc.m2;
    }
    Ok(bc)
}

fn cantor_sign_condition<T: Real>(a: T, s: T) -> bool {
    if a == T::zero() {
        return true;
    }
    s > T::lit(0.4) * (T::one() - T::lit(3.0) / (T::lit(7.0) * a))
}

/// Whether `v_s' ≥ 0` and `v_s'' ≥ 0` can be asserted. Exact for the
/// closed-form families; a grid check (heuristic) for custom ones.
pub fn sign_certificate<T: Real>(family: &MapFamily<T>, s: T) -> bool {
    match family.kind() {
        FamilyKind::MobiusDigits { .. } => false,
        FamilyKind::PerturbedCantor { a } => cantor_sign_condition(*a, s),
        FamilyKind::Custom { .. } => {
            let zero = T::zero();
            family.maps().iter().all(|m| {
                grid(family.domain(), 1000).all(|x| {
                    let th = m.jet(x);
                    let g = m.weight_jet(x);
                    th.d1 >= zero
                        && th.d2 >= zero
                        && g.d1 >= zero
                        && g.d2 >= zero
                        && g.d2 * g.v - (T::one() - s) * g.d1 * g.d1 >= zero
                })
            })
        }
    }
}

/// `(R_lo, R_hi)` with `R_lo ≤ v_s''/v_s ≤ R_hi` on the domain.
pub fn second_ratio_bounds<T: Real>(family: &MapFamily<T>, s: T) -> Result<(T, T)> {
    match family.kind() {
        FamilyKind::MobiusDigits { gamma, big_gamma, .. } => {
            let b = mobius_ratio_bounds(*gamma, *big_gamma, gamma.recip(), s, 2)?;
            Ok((b.lo, b.hi))
        }
        FamilyKind::PerturbedCantor { a } => {
            let c = cantor_constants(*a, s)?;
            Ok((c.r_lo, c.r_hi))
        }
        FamilyKind::Custom { .. } => {
            let c = general_constants(family, s, SupremumOptions::default())?;
            Ok((-c.m2, c.m2))
        }
    }
}

/// Rate `ρ` with `v_s(x_2) ≤ v_s(x_1) exp(ρ|x_2 - x_1|)`.
pub fn osc_rate<T: Real>(family: &MapFamily<T>, s: T) -> Result<T> {
    match family.kind() {
        FamilyKind::MobiusDigits { gamma, .. } => Ok(T::lit(2.0) * s / *gamma),
        FamilyKind::PerturbedCantor { a } => Ok(cantor_constants(*a, s)?.m1),
        FamilyKind::Custom { .. } => Ok(general_constants(family, s, SupremumOptions::default())?.m1),
    }
}

/// Everything the interpolation-error model needs at a given `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationBounds<T> {
    pub r_lo: T,
    pub r_hi: T,
    pub osc: T,
    /// Closed-form (rather than sampled) bounds.
    pub rigorous: bool,
}

/// Collects `second_ratio_bounds` and `osc_rate` with a single constants pass.
pub fn interpolation_bounds<T: Real>(family: &MapFamily<T>, s: T) -> Result<InterpolationBounds<T>> {
    match family.kind() {
        FamilyKind::MobiusDigits { .. } | FamilyKind::PerturbedCantor { .. } => {
            let (r_lo, r_hi) = second_ratio_bounds(family, s)?;
            Ok(InterpolationBounds { r_lo, r_hi, osc: osc_rate(family, s)?, rigorous: true })
        }
        FamilyKind::Custom { .. } => {
            let c = general_constants(family, s, SupremumOptions::default())?;
            Ok(InterpolationBounds { r_lo: c.r_lo, r_hi: c.r_hi, osc: c.m1, rigorous: false })
        }
    }
}
