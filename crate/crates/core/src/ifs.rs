//! Iterated function systems on an interval: map families, their derivatives
//! and weights, contraction data, domain reduction and continuants.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::scalar::Real;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn len(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Image under a map whose derivative has constant sign.
    fn monotone_image(&self, map: &MapSpec<T>) -> Interval<T> {
        let (p, q) = (map.eval(self.lo), map.eval(self.hi));
        Interval::new(p.min(q), p.max(q))
    }
}

/// A user-supplied C³ contraction with its weight `g`.
///
/// Implementors provide closed-form derivatives; nothing is differentiated
/// automatically, so the rigor of everything downstream rests on these.
pub trait SmoothMap<T>: fmt::Debug + Send + Sync {
    /// `(θ, θ', θ'', θ''')` at `x`.
    fn jet(&self, x: T) -> Jet3<T>;
    /// `(g, g', g'', g''')` at `x`; usually `g = |θ'|`.
    fn weight_jet(&self, x: T) -> Jet3<T>;
    /// Certified bound on `sup |θ'|` over the domain, if known.
    fn lipschitz_bound(&self) -> Option<T> {
        None
    }
}

/// One map of a family.
#[derive(Debug, Clone)]
pub enum MapSpec<T> {
    /// `x ↦ 1/(x + digit)` with weight `(x + digit)^{-2}`.
    Mobius {
        digit: T,
    },
    /// `x ↦ (x + a x^{7/2})/(3 + 2a) + offset` with weight equal to its derivative.
    Cantor {
        a: T,
        offset: T,
    },
    Custom(Arc<dyn SmoothMap<T>>),
}

fn cantor_jet<T: Real>(a: T, offset: T, x: T) -> Jet3<T> {
    let den = T::lit(3.0) + T::lit(2.0) * a;
    if a == T::zero() {
        return Jet3::new(x / den + offset, den.recip(), T::zero(), T::zero());
    }
    let c = T::lit(3.5) * a;
    Jet3::new(
        (x + a * x.powf(T::lit(3.5))) / den + offset,
        (T::one() + c * x.powf(T::lit(2.5))) / den,
        c * T::lit(2.5) * x.powf(T::lit(1.5)) / den,
        c * T::lit(3.75) * x.sqrt() / den,
    )
}

fn cantor_weight_jet<T: Real>(a: T, x: T) -> Jet3<T> {
    let j = cantor_jet(a, T::zero(), x);
    let d4 = if a == T::zero() {
        T::zero()
    } else {
        // unbounded at x = 0: the maps are C³ but not C⁴
        let den = T::lit(3.0) + T::lit(2.0) * a;
        T::lit(3.5 * 2.5 * 1.5 * 0.5) * a / (x.sqrt() * den)
    };
    Jet3::new(j.d1, j.d2, j.d3, d4)
}

impl<T: Real> MapSpec<T> {
    pub fn eval(&self, x: T) -> T {
        match self {
            MapSpec::Mobius { digit } => (x + *digit).recip(),
            MapSpec::Cantor { a, offset } => {
                let den = T::lit(3.0) + T::lit(2.0) * *a;
                if *a == T::zero() {
                    x / den + *offset
                } else {
                    (x + *a * x.powf(T::lit(3.5))) / den + *offset
                }
            }
            MapSpec::Custom(m) => m.jet(x).v,
        }
    }

    pub fn jet(&self, x: T) -> Jet3<T> {
        match self {
            MapSpec::Mobius { digit } => {
                let t = (x + *digit).recip();
                let t2 = t * t;
                Jet3::new(t, -t2, T::lit(2.0) * t2 * t, -T::lit(6.0) * t2 * t2)
            }
            MapSpec::Cantor { a, offset } => cantor_jet(*a, *offset, x),
            MapSpec::Custom(m) => m.jet(x),
        }
    }

    /// Weight `g(x)` used in the transfer operator.
    pub fn weight(&self, x: T) -> T {
        match self {
            MapSpec::Mobius { digit } => {
                let t = (x + *digit).recip();
                t * t
            }
            MapSpec::Cantor { a, .. } => cantor_jet(*a, T::zero(), x).d1,
            MapSpec::Custom(m) => m.weight_jet(x).v,
        }
    }

    pub fn weight_jet(&self, x: T) -> Jet3<T> {
        match self {
            MapSpec::Mobius { digit } => {
                let t = (x + *digit).recip();
                let t2 = t * t;
                Jet3::new(t2, -T::lit(2.0) * t2 * t, T::lit(6.0) * t2 * t2, -T::lit(24.0) * t2 * t2 * t)
            }
            MapSpec::Cantor { a, .. } => cantor_weight_jet(*a, x),
            MapSpec::Custom(m) => m.weight_jet(x),
        }
    }

    /// `θ^{(order)}(x)` for `order ≤ 3`.
    pub fn derivative(&self, x: T, order: u8) -> Result<T> {
        if order == 0 {
            return Ok(self.eval(x));
        }
        let j = self.jet(x);
        match order {
            1 => Ok(j.d1),
            2 => Ok(j.d2),
            3 => Ok(j.d3),
            _ => Err(Error::BadOrder(order)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind<T> {
    /// Continued-fraction digits; `gamma`/`big_gamma` are the least/largest digit.
    MobiusDigits {
        digits: Vec<T>,
        gamma: T,
        big_gamma: T,
    },
    PerturbedCantor {
        a: T,
    },
    Custom {
        id: String,
        lipschitz: Option<T>,
    },
}

/// An immutable, finite family of contractions of a closed interval.
#[derive(Debug, Clone)]
pub struct MapFamily<T> {
    kind: FamilyKind<T>,
    maps: Vec<MapSpec<T>>,
    domain: Interval<T>,
}

/// `(κ, μ)`: every composition of `μ` maps is `κ`-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contraction<T> {
    pub kappa: T,
    pub mu: usize,
    /// False when `κ` was estimated by sampling rather than known in closed form.
    pub certified: bool,
}

pub(crate) fn grid<T: Real>(iv: Interval<T>, n: usize) -> impl Iterator<Item = T> {
    let step = iv.len() / T::count(n);
    (0..=n).map(move |i| if i == n { iv.hi } else { iv.lo + T::count(i) * step })
}

impl<T: Real> MapFamily<T> {
    /// Continued-fraction Cantor set with the given digits, on `[0, 1/γ]`.
    pub fn mobius(digits: &[T]) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let mut sorted = Vec::with_capacity(digits.len());
        for &d in digits {
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NonPositiveDigit(d.as_f64()));
            }
            if sorted.contains(&d) {
                return Err(Error::DuplicateDigit(d.as_f64()));
            }
            sorted.push(d);
        }
        let gamma = sorted.iter().copied().fold(T::infinity(), T::min);
        let big_gamma = sorted.iter().copied().fold(T::zero(), T::max);
        let maps = digits.iter().map(|&d| MapSpec::Mobius { digit: d }).collect();
        Ok(Self {
            kind: FamilyKind::MobiusDigits { digits: digits.to_vec(), gamma, big_gamma },
            maps,
            domain: Interval::new(T::zero(), gamma.recip()),
        })
    }

    /// The two-map perturbation of the middle-thirds Cantor set, `0 ≤ a ≤ 1`.
    pub fn cantor(a: T) -> Result<Self> {
        if !(a >= T::zero() && a <= T::one()) {
            return Err(Error::ParamOutOfRange { name: "a", value: a.as_f64() });
        }
        let shift = (T::lit(2.0) + a) / (T::lit(3.0) + T::lit(2.0) * a);
        Ok(Self {
            kind: FamilyKind::PerturbedCantor { a },
            maps: vec![MapSpec::Cantor { a, offset: T::zero() }, MapSpec::Cantor { a, offset: shift }],
            domain: Interval::new(T::zero(), T::one()),
        })
    }

    /// A family of user-supplied maps. Self-map and positivity checks are done
    /// by sampling (`samples` points per map) plus endpoint images, so they are
    /// not rigorous.
    pub fn custom(
        id: impl Into<String>,
        maps: Vec<Arc<dyn SmoothMap<T>>>,
        domain: Interval<T>,
        lipschitz: Option<T>,
        samples: usize,
    ) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let tol = T::lit(1e-12) * domain.len();
        let samples = samples.max(2);
        for (index, m) in maps.iter().enumerate() {
            let mut sign = 0i8;
            for x in grid(domain, samples) {
                let j = m.jet(x);
                let s = if j.d1 > T::zero() {
                    1
                } else if j.d1 < T::zero() {
                    -1
                } else {
                    0
                };
                if s != 0 {
                    if sign != 0 && s != sign {
                        return Err(Error::DerivativeSignChange { index });
                    }
                    sign = s;
                }
                if !(m.weight_jet(x).v > T::zero()) {
                    return Err(Error::NonPositiveWeight { index, x: x.as_f64() });
                }
            }
            for y in [m.jet(domain.lo).v, m.jet(domain.hi).v] {
                if y < domain.lo - tol || y > domain.hi + tol {
                    return Err(Error::NotSelfMap { index });
                }
            }
        }
        Ok(Self {
            kind: FamilyKind::Custom { id: id.into(), lipschitz },
            maps: maps.into_iter().map(MapSpec::Custom).collect(),
            domain,
        })
    }

    pub fn kind(&self) -> &FamilyKind<T> {
        &self.kind
    }

    pub fn maps(&self) -> &[MapSpec<T>] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn domain(&self) -> Interval<T> {
        self.domain
    }

    pub fn is_mobius(&self) -> bool {
        matches!(self.kind, FamilyKind::MobiusDigits { .. })
    }

    /// `(γ, Γ)` for continued-fraction families.
    pub fn digit_range(&self) -> Option<(T, T)> {
        match self.kind {
            FamilyKind::MobiusDigits { gamma, big_gamma, .. } => Some((gamma, big_gamma)),
            _ => None,
        }
    }

    /// Short stable identifier, e.g. `cf[1,2]` or `cantor[0.5]`.
    pub fn id(&self) -> String {
        match &self.kind {
            FamilyKind::MobiusDigits { digits, .. } => {
                let ds: Vec<String> = digits.iter().map(|d| format!("{d}")).collect();
                format!("cf[{}]", ds.join(","))
            }
            FamilyKind::PerturbedCantor { a } => format!("cantor[{a}]"),
            FamilyKind::Custom { id, .. } => id.clone(),
        }
    }

    /// `θ_j^{(order)}(x)`.
    pub fn eval_map(&self, j: usize, x: T, order: u8) -> Result<T> {
        let map = self.maps.get(j).ok_or(Error::BadIndex { index: j, len: self.maps.len() })?;
        if order > 3 {
            return Err(Error::BadOrder(order));
        }
        let tol = T::lit(1e-12) * self.domain.len();
        if !(x >= self.domain.lo - tol && x <= self.domain.hi + tol) {
            return Err(Error::OutOfDomain { x: x.as_f64(), lo: self.domain.lo.as_f64(), hi: self.domain.hi.as_f64() });
        }
        map.derivative(x, order)
    }

    pub fn contraction_data(&self) -> Result<Contraction<T>> {
        match &self.kind {
            FamilyKind::MobiusDigits { gamma, .. } => {
                let q = T::one() + *gamma * *gamma;
                Ok(Contraction { kappa: (q * q).recip(), mu: 2, certified: true })
            }
            FamilyKind::PerturbedCantor { a } => Ok(Contraction {
                kappa: (T::lit(2.0) + T::lit(7.0) * *a) / (T::lit(6.0) + T::lit(4.0) * *a),
                mu: 1,
                certified: true,
            }),
            FamilyKind::Custom { lipschitz, .. } => {
                let bound = lipschitz.or_else(|| {
                    let per_map: Option<Vec<T>> = self
                        .maps
                        .iter()
                        .map(|m| match m {
                            MapSpec::Custom(c) => c.lipschitz_bound(),
                            _ => None,
                        })
                        .collect();
                    per_map.map(|v| v.into_iter().fold(T::zero(), T::max))
                });
                if let Some(k) = bound {
                    if k < T::one() {
                        return Ok(Contraction { kappa: k, mu: 1, certified: true });
                    }
                }
                let sampled = self
                    .maps
                    .iter()
                    .flat_map(|m| grid(self.domain, 2000).map(move |x| m.jet(x).d1.abs()))
                    .fold(T::zero(), T::max);
                if sampled < T::one() {
                    Ok(Contraction { kappa: sampled, mu: 1, certified: false })
                } else {
                    Err(Error::NoContractionBound(sampled.as_f64()))
                }
            }
        }
    }

    /// Intervals covering the union of all images of the domain under words of
    /// length `iterations`; overlapping or touching intervals are merged.
    pub fn reduce_domain(&self, iterations: usize) -> Vec<Interval<T>> {
        let mut current = vec![self.domain];
        for _ in 0..iterations {
            let images = current.iter().flat_map(|iv| self.maps.iter().map(move |m| iv.monotone_image(m))).collect();
            current = merge_intervals(images, T::zero());
        }
        current
    }
}

/// Sorts intervals and merges those separated by a gap of at most `gap`.
pub fn merge_intervals<T: Real>(mut ivs: Vec<Interval<T>>, gap: T) -> Vec<Interval<T>> {
    ivs.sort_by(|a, b| a.lo.partial_cmp(&b.lo).expect("finite endpoints"));
    let mut out: Vec<Interval<T>> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match out.last_mut() {
            Some(last) if iv.lo - last.hi <= gap => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Continuants of a digit word: `A_0 = 0, A_1 = 1, B_0 = 1, B_1 = b_1` and
/// `X_{k+1} = X_{k-1} + b_{k+1} X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Continuants<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Real> Continuants<T> {
    pub fn new(word: &[T]) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if let Some(&d) = word.iter().find(|d| !(**d > T::zero())) {
            return Err(Error::NonPositiveDigit(d.as_f64()));
        }
        let mut a = vec![T::zero(), T::one()];
        let mut b = vec![T::one(), word[0]];
        for &d in &word[1..] {
            let k = a.len();
            a.push(a[k - 2] + d * a[k - 1]);
            b.push(b[k - 2] + d * b[k - 1]);
        }
        Ok(Self { a, b })
    }

    /// Word length `n`.
    pub fn len(&self) -> usize {
        self.a.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `θ_{b_1} ∘ … ∘ θ_{b_n}(z) = (A_{n-1} z + A_n)/(B_{n-1} z + B_n)`.
    pub fn compose_forward(&self, z: T) -> T {
        let n = self.len();
        (self.a[n - 1] * z + self.a[n]) / (self.b[n - 1] * z + self.b[n])
    }

    /// `θ_{b_n} ∘ … ∘ θ_{b_1}(z) = (A_{n-1} z + B_{n-1})/(A_n z + B_n)`.
    pub fn compose_reverse(&self, z: T) -> T {
        let n = self.len();
        (self.a[n - 1] * z + self.b[n - 1]) / (self.a[n] * z + self.b[n])
    }
}

/// Continuants of `digit_word`.
pub fn continuants<T: Real>(digit_word: &[T]) -> Result<Continuants<T>> {
    Continuants::new(digit_word)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn mobius_family_basics() {
        let f = MapFamily::mobius(&[1.0, 2.0]).unwrap();
        assert_eq!(f.domain(), Interval::new(0.0, 1.0));
        assert_eq!(f.digit_range(), Some((1.0, 2.0)));
        assert_eq!(f.len(), 2);
        assert_eq!(f.id(), "cf[1,2]");

        let g = MapFamily::mobius(&[3.0]).unwrap();
        assert_eq!(g.len(), 1);
        assert!(close(g.domain().hi, 1.0 / 3.0, 1e-16));
        assert!(close(g.eval_map(0, 0.1, 0).unwrap(), 1.0 / 3.1, 1e-15));

        let h = MapFamily::mobius(&[2.0, 4.0, 6.0, 8.0, 10.0]).unwrap();
        assert_eq!(h.domain().hi, 0.5);
        assert_eq!(h.len(), 5);
    }

    #[test]
    fn mobius_family_errors() {
        assert_eq!(MapFamily::<f64>::mobius(&[]).unwrap_err(), Error::EmptyFamily);
        assert_eq!(MapFamily::mobius(&[1.0, 0.0]).unwrap_err(), Error::NonPositiveDigit(0.0));
        assert_eq!(MapFamily::mobius(&[-2.0]).unwrap_err(), Error::NonPositiveDigit(-2.0));
        assert_eq!(MapFamily::mobius(&[2.0, 2.0]).unwrap_err(), Error::DuplicateDigit(2.0));
    }

    #[test]
    fn cantor_family_maps() {
        let f = MapFamily::cantor(0.0).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert!(close(f.eval_map(0, x, 0).unwrap(), x / 3.0, 1e-15));
            assert!(close(f.eval_map(1, x, 0).unwrap(), x / 3.0 + 2.0 / 3.0, 1e-15));
        }
        let f1 = MapFamily::cantor(1.0).unwrap();
        assert!(close(f1.eval_map(0, 0.5, 0).unwrap(), (0.5 + 0.5f64.powf(3.5)) / 5.0, 1e-15));
        assert!(close(f1.eval_map(0, 1.0, 1).unwrap(), 0.9, 1e-15));
        let fh = MapFamily::cantor(0.5).unwrap();
        assert!(close(fh.eval_map(1, 1.0, 0).unwrap(), 1.0, 1e-15));
        assert!(matches!(MapFamily::cantor(1.5), Err(Error::ParamOutOfRange { .. })));
        assert!(matches!(MapFamily::cantor(-0.1), Err(Error::ParamOutOfRange { .. })));
    }

    #[test]
    fn eval_map_plumbing() {
        let f = MapFamily::mobius(&[1.0]).unwrap();
        assert_eq!(f.eval_map(0, 0.0, 0).unwrap(), 1.0);
        assert_eq!(f.eval_map(0, 0.0, 1).unwrap(), -1.0);
        assert_eq!(f.eval_map(0, 0.0, 2).unwrap(), 2.0);
        assert_eq!(f.eval_map(0, 0.0, 3).unwrap(), -6.0);
        assert!(matches!(f.eval_map(0, 1.5, 0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(f.eval_map(3, 0.5, 0), Err(Error::BadIndex { index: 3, len: 1 })));
        assert!(matches!(f.eval_map(0, 0.5, 4), Err(Error::BadOrder(4))));
    }

    #[test]
    fn contraction_constants() {
        let c = MapFamily::mobius(&[1.0, 2.0]).unwrap().contraction_data().unwrap();
        assert_eq!((c.kappa, c.mu), (0.25, 2));
        let c = MapFamily::cantor(1.0).unwrap().contraction_data().unwrap();
        assert!(close(c.kappa, 0.9, 1e-15));
        assert_eq!(c.mu, 1);
        let c = MapFamily::cantor(0.0).unwrap().contraction_data().unwrap();
        assert!(close(c.kappa, 1.0 / 3.0, 1e-15));
    }

    #[test]
    fn domain_reduction_examples() {
        let f = MapFamily::mobius(&[1.0, 2.0]).unwrap();
        assert_eq!(f.reduce_domain(0), vec![f.domain()]);
        let r1 = f.reduce_domain(1);
        assert_eq!(r1.len(), 1);
        assert!(close(r1[0].lo, 1.0 / 3.0, 1e-15) && close(r1[0].hi, 1.0, 1e-15));
        let r2 = f.reduce_domain(2);
        assert_eq!(r2.len(), 2);
        assert!(close(r2[0].lo, 1.0 / 3.0, 1e-15) && close(r2[0].hi, 3.0 / 7.0, 1e-15));
        assert!(close(r2[1].lo, 0.5, 1e-15) && close(r2[1].hi, 0.75, 1e-15));
    }

    #[test]
    fn continuant_examples() {
        let c = continuants(&[5.0]).unwrap();
        assert_eq!(c.a, vec![0.0, 1.0]);
        assert_eq!(c.b, vec![1.0, 5.0]);
        let c = continuants(&[1.0; 4]).unwrap();
        assert_eq!(c.b, vec![1.0, 1.0, 2.0, 3.0, 5.0]);
        let c = continuants(&[2.0, 2.0]).unwrap();
        assert_eq!(c.b[2], 5.0);
        assert_eq!(continuants(&[1.0, 0.0]).unwrap_err(), Error::NonPositiveDigit(0.0));
    }

    #[derive(Debug)]
    struct Halving;

    impl SmoothMap<f64> for Halving {
        fn jet(&self, x: f64) -> Jet3<f64> {
            Jet3::new(0.5 * x, 0.5, 0.0, 0.0)
        }
        fn weight_jet(&self, _x: f64) -> Jet3<f64> {
            Jet3::constant(0.5)
        }
    }

    #[derive(Debug)]
    struct Expanding;

    impl SmoothMap<f64> for Expanding {
        fn jet(&self, x: f64) -> Jet3<f64> {
            Jet3::new(x * x, 2.0 * x, 2.0, 0.0)
        }
        fn weight_jet(&self, x: f64) -> Jet3<f64> {
            Jet3::new(2.0 * x + 1.0, 2.0, 0.0, 0.0)
        }
    }

    #[test]
    fn custom_family_checks() {
        let unit = Interval::new(0.0, 1.0);
        let f = MapFamily::custom("half", vec![Arc::new(Halving) as Arc<dyn SmoothMap<f64>>], unit, None, 100).unwrap();
        let c = f.contraction_data().unwrap();
        assert_eq!(c.kappa, 0.5);
        assert!(!c.certified);

        let g = MapFamily::custom("sq", vec![Arc::new(Expanding) as Arc<dyn SmoothMap<f64>>], unit, None, 100).unwrap();
        assert!(matches!(g.contraction_data(), Err(Error::NoContractionBound(_))));

        let wide = Interval::new(0.0, 2.0);
        assert!(matches!(
            MapFamily::custom("sq", vec![Arc::new(Expanding) as Arc<dyn SmoothMap<f64>>], wide, None, 100),
            Err(Error::NotSelfMap { index: 0 })
        ));
    }
}
