//! The Weil representation `ρ: SL2(F_p) → U(C(F_p))`.
//!
//! `ρ` is assembled from three generator families:
//!
//! * scaling `ρ_a φ(t) = σ(a) φ(a⁻¹t)` for `diag(a, a⁻¹)`,
//! * quadratic modulation `φ(t) ↦ ψ(−½ x t²) φ(t)` for the lower unipotent
//!   `[[1, 0], [x, 1]]`,
//! * the normalized Fourier transform `ν/√p Σ_s ψ(ts) φ(s)` for the Weyl
//!   element `[[0, 1], [−1, 0]]`.
//!
//! With these choices `ρ(g) π(v, z) ρ(g)⁻¹ = π(gv, z)`, where `g` acts on
//! column vectors `(τ, w)`. The scalar `ν` is calibrated per modulus.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeModulus};
use crate::heisenberg::{pi, HeisenbergElement};
use crate::signal::UnitaryOperator;

/// Lower-unipotent parameter whose modulation is `ψ(t²)`: `ρ_T = ρ([[1, 0], [-2, 1]])`.
pub const QUADMOD_LOWER_PARAMETER: i64 = -2;

/// Homomorphism residual accepted by the calibration.
pub const CALIBRATION_TOLERANCE: f64 = 1e-9;

const CACHE_LIMIT: usize = 4096;

/// A 2×2 matrix over `F_p` with determinant 1, row-major.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SL2Element {
    pub a: Fp,
    pub b: Fp,
    pub c: Fp,
    pub d: Fp,
}

impl SL2Element {
    pub fn new(a: Fp, b: Fp, c: Fp, d: Fp) -> Result<Self> {
        if a * d - b * c != a.modulus().one() {
            return Err(Error::NotUnimodular { a: a.value(), b: b.value(), c: c.value(), d: d.value() });
        }
        Ok(SL2Element { a, b, c, d })
    }

    pub fn from_ints(m: PrimeModulus, a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(m.elem(a), m.elem(b), m.elem(c), m.elem(d))
    }

    pub fn identity(m: PrimeModulus) -> Self {
        SL2Element { a: m.one(), b: m.zero(), c: m.zero(), d: m.one() }
    }

    pub fn minus_identity(m: PrimeModulus) -> Self {
        SL2Element { a: -m.one(), b: m.zero(), c: m.zero(), d: -m.one() }
    }

    /// `[[0, 1], [−1, 0]]`.
    pub fn weyl(m: PrimeModulus) -> Self {
        SL2Element { a: m.zero(), b: m.one(), c: -m.one(), d: m.zero() }
    }

    pub fn diagonal(a: Fp) -> Result<Self> {
        let inv = a.inv().map_err(|_| Error::ZeroScaling)?;
        let m = a.modulus();
        Ok(SL2Element { a, b: m.zero(), c: m.zero(), d: inv })
    }

    pub fn lower(x: Fp) -> Self {
        let m = x.modulus();
        SL2Element { a: m.one(), b: m.zero(), c: x, d: m.one() }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.a.modulus()
    }

    pub fn mul(&self, rhs: &SL2Element) -> SL2Element {
        SL2Element {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn inverse(&self) -> SL2Element {
        SL2Element { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn trace(&self) -> Fp {
        self.a + self.d
    }

    pub fn is_central(&self) -> bool {
        let m = self.modulus();
        self.b.is_zero() && self.c.is_zero() && self.a == self.d && (self.a == m.one() || self.a == -m.one())
    }

    /// Action on the column vector `(τ, w)`.
    pub fn act(&self, tau: Fp, w: Fp) -> (Fp, Fp) {
        (self.a * tau + self.b * w, self.c * tau + self.d * w)
    }

    pub fn pow(&self, mut exp: u64) -> SL2Element {
        let mut base = *self;
        let mut acc = SL2Element::identity(self.modulus());
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative order.
    pub fn order(&self) -> u64 {
        let id = SL2Element::identity(self.modulus());
        let mut acc = *self;
        let mut n = 1;
        while acc != id {
            acc = acc.mul(self);
            n += 1;
        }
        n
    }

    pub fn entries(&self) -> [u64; 4] {
        [self.a.value(), self.b.value(), self.c.value(), self.d.value()]
    }

    /// Uniform sample: a uniform nonzero first column, then a uniform
    /// completion to determinant 1.
    pub fn random<R: Rng + ?Sized>(m: PrimeModulus, rng: &mut R) -> Self {
        let p = m.p();
        loop {
            let a = m.elem(rng.random_range(0..p) as i64);
            let c = m.elem(rng.random_range(0..p) as i64);
            let free = m.elem(rng.random_range(0..p) as i64);
            if !a.is_zero() {
                let b = free;
                let d = (m.one() + b * c) * a.inv().expect("nonzero");
                return SL2Element { a, b, c, d };
            } else if !c.is_zero() {
                let d = free;
                let b = (a * d - m.one()) * c.inv().expect("nonzero");
                return SL2Element { a, b, c, d };
            }
        }
    }

    /// All elements in lexicographic `(a, b, c, d)` order.
    pub fn all(m: PrimeModulus) -> Vec<SL2Element> {
        let mut out = Vec::with_capacity(m.size() * (m.size() * m.size() - 1));
        for a in m.elements() {
            for b in m.elements() {
                for c in m.elements() {
                    if a.is_zero() {
                        if b.is_zero() {
                            continue;
                        }
                        // bc = -1
                        if c != -b.inv().expect("nonzero") {
                            continue;
                        }
                        for d in m.elements() {
                            out.push(SL2Element { a, b, c, d });
                        }
                    } else {
                        let d = (m.one() + b * c) * a.inv().expect("nonzero");
                        out.push(SL2Element { a, b, c, d });
                    }
                }
            }
        }
        out.sort();
        out
    }
}

impl fmt::Debug for SL2Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Factorization of `g` into generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decomposition {
    /// `g = lower(x) · weyl · diag(y, y⁻¹) · lower(z)`, used when `b ≠ 0`.
    Cell { x: Fp, y: Fp, z: Fp },
    /// `g = diag(a, a⁻¹) · lower(z)`, used when `b = 0`.
    Borel { a: Fp, z: Fp },
}

pub fn decompose(g: &SL2Element) -> Decomposition {
    if g.b.is_zero() {
        Decomposition::Borel { a: g.a, z: g.a * g.c }
    } else {
        let binv = g.b.inv().expect("nonzero");
        Decomposition::Cell { x: g.d * binv, y: binv, z: g.a * binv }
    }
}

impl Decomposition {
    pub fn compose(&self, m: PrimeModulus) -> SL2Element {
        match *self {
            Decomposition::Cell { x, y, z } => SL2Element::lower(x)
                .mul(&SL2Element::weyl(m))
                .mul(&SL2Element::diagonal(y).expect("nonzero"))
                .mul(&SL2Element::lower(z)),
            Decomposition::Borel { a, z } => {
                SL2Element::diagonal(a).expect("nonzero").mul(&SL2Element::lower(z))
            }
        }
    }
}

/// `ρ_a φ(t) = σ(a) φ(a⁻¹t)`.
pub fn rho_scaling(a: Fp) -> Result<UnitaryOperator> {
    let m = a.modulus();
    let ainv = a.inv().map_err(|_| Error::ZeroScaling)?;
    let sign = a.quadratic_character() as f64;
    Ok(UnitaryOperator::from_fn(m, |row, col| {
        if (ainv * m.elem(row as i64)).index() == col {
            Complex64::new(sign, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Diagonal entries `ψ(−½ x t²)` of `ρ(lower(x))`.
fn lower_phases(x: Fp) -> Vec<Complex64> {
    let m = x.modulus();
    let coef = -(m.half() * x);
    m.elements().map(|t| (coef * t * t).additive_character()).collect()
}

pub fn rho_lower(x: Fp) -> UnitaryOperator {
    let m = x.modulus();
    let diag = lower_phases(x);
    UnitaryOperator::from_fn(m, |r, c| if r == c { diag[r] } else { Complex64::new(0.0, 0.0) })
}

/// `ρ_T φ(t) = ψ(t²) φ(t)`.
pub fn rho_quadmod(m: PrimeModulus) -> UnitaryOperator {
    rho_lower(m.elem(QUADMOD_LOWER_PARAMETER))
}

/// `(ρ_S φ)(t) = ν/√p Σ_s ψ(ts) φ(s)`.
pub fn rho_fourier(m: PrimeModulus, nu: Complex64) -> UnitaryOperator {
    let scale = nu / (m.p() as f64).sqrt();
    UnitaryOperator::from_fn(m, |r, c| {
        scale * (m.elem(r as i64) * m.elem(c as i64)).additive_character()
    })
}

/// Quadratic Gauss sum `Σ_t ψ(t²)`.
pub fn gauss_sum(m: PrimeModulus) -> Complex64 {
    m.elements().map(|t| (t * t).additive_character()).sum()
}

/// Build `ρ(g)` for a given Fourier normalization.
pub fn build_operator(g: &SL2Element, nu: Complex64) -> UnitaryOperator {
    let m = g.modulus();
    let p = m.size();
    match decompose(g) {
        Decomposition::Borel { a, z } => {
            // ρ_a · ρ(lower(z)): entry [t][a⁻¹t] = σ(a) ψ(−½ z (a⁻¹t)²)
            let ainv = a.inv().expect("nonzero");
            let sign = a.quadratic_character() as f64;
            let phases = lower_phases(z);
            let mut mat = DMatrix::from_element(p, p, Complex64::new(0.0, 0.0));
            for t in m.elements() {
                let col = (ainv * t).index();
                mat[(t.index(), col)] = phases[col] * sign;
            }
            UnitaryOperator::from_matrix(m, mat)
        }
        Decomposition::Cell { x, y, z } => {
            let fourier = rho_fourier(m, nu);
            let left = lower_phases(x);
            let right = lower_phases(z);
            let sign = y.quadratic_character() as f64;
            // (F ρ_y)[r][s] = σ(y) F[r][ys]
            let mat = DMatrix::from_fn(p, p, |r, s| {
                let ys = (y * m.elem(s as i64)).index();
                left[r] * fourier.entry(r, ys) * sign * right[s]
            });
            UnitaryOperator::from_matrix(m, mat)
        }
    }
}

/// `max_v ‖ρ(g) π(v, 0) − π(gv, 0) ρ(g)‖` over `v ∈ {(1, 0), (0, 1)}`, which
/// generate `V`. The center acts by scalars and commutes with everything.
pub fn egorov_residual_of(g: &SL2Element, rho_g: &UnitaryOperator) -> f64 {
    let m = g.modulus();
    [(m.one(), m.zero()), (m.zero(), m.one())]
        .into_iter()
        .map(|(tau, w)| {
            let h = HeisenbergElement { tau, w, z: m.zero() };
            let (gt, gw) = g.act(tau, w);
            let gh = HeisenbergElement { tau: gt, w: gw, z: m.zero() };
            (rho_g * &pi(&h)).distance(&(&pi(&gh) * rho_g))
        })
        .fold(0.0, f64::max)
}

/// Outcome of fixing `ν` for one modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub nu: Complex64,
    /// Worst `‖ρ(g₁)ρ(g₂) − ρ(g₁g₂)‖` over the calibration pairs.
    pub homomorphism_residual: f64,
    /// Set when no candidate reached [`CALIBRATION_TOLERANCE`]; `ρ` is then
    /// only a homomorphism up to unit scalars.
    pub projective: bool,
}

fn calibration_pairs(m: PrimeModulus) -> Vec<(SL2Element, SL2Element)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x05c1_u64 ^ m.p());
    let mut gens = vec![
        SL2Element::weyl(m),
        SL2Element::lower(m.one()),
        SL2Element::diagonal(m.primitive_root()).expect("nonzero"),
        SL2Element::minus_identity(m),
    ];
    gens.extend((0..12).map(|_| SL2Element::random(m, &mut rng)));
    let mut pairs = Vec::new();
    for g in &gens {
        for h in &gens {
            pairs.push((*g, *h));
        }
    }
    pairs
}

fn homomorphism_residual(pairs: &[(SL2Element, SL2Element)], nu: Complex64) -> f64 {
    pairs
        .iter()
        .map(|(g, h)| {
            let lhs = &build_operator(g, nu) * &build_operator(h, nu);
            lhs.distance(&build_operator(&g.mul(h), nu))
        })
        .fold(0.0, f64::max)
}

/// `ν` must square to `σ(−1)` because `weyl² = −I` and `ρ(−I) = σ(−1)·parity`;
/// the sign is fixed by the homomorphism test.
pub fn calibrate(m: PrimeModulus) -> Calibration {
    let candidates = if m.elem(-1).quadratic_character() == 1 {
        [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
    } else {
        [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)]
    };
    let pairs = calibration_pairs(m);
    let (nu, residual) = candidates
        .into_iter()
        .map(|nu| (nu, homomorphism_residual(&pairs, nu)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("two candidates");
    let projective = residual >= CALIBRATION_TOLERANCE;
    if projective {
        log::warn!("p = {m}: no Fourier normalization gives a linear representation (residual {residual:.3e}); using projective mode");
    }
    Calibration { nu, homomorphism_residual: residual, projective }
}

/// The calibrated Weil representation for one modulus, with a bounded cache
/// of built operators.
pub struct WeilRepresentation {
    modulus: PrimeModulus,
    calibration: Calibration,
    cache: Mutex<HashMap<SL2Element, Arc<UnitaryOperator>>>,
}

impl WeilRepresentation {
    pub fn new(modulus: PrimeModulus) -> Self {
        WeilRepresentation {
            modulus,
            calibration: calibrate(modulus),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn calibration(&self) -> Calibration {
        self.calibration
    }

    pub fn nu(&self) -> Complex64 {
        self.calibration.nu
    }

    pub fn rho_fourier(&self) -> UnitaryOperator {
        rho_fourier(self.modulus, self.calibration.nu)
    }

    /// `ρ(g)`, bypassing the cache.
    pub fn build(&self, g: &SL2Element) -> Result<UnitaryOperator> {
        if g.modulus() != self.modulus {
            return Err(Error::ModulusMismatch(self.modulus.p(), g.modulus().p()));
        }
        SL2Element::new(g.a, g.b, g.c, g.d)?;
        Ok(build_operator(g, self.calibration.nu))
    }

    /// `ρ(g)`, cached.
    pub fn operator(&self, g: &SL2Element) -> Result<Arc<UnitaryOperator>> {
        if let Some(op) = self.cache.lock().expect("cache lock").get(g) {
            return Ok(Arc::clone(op));
        }
        let op = Arc::new(self.build(g)?);
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() < CACHE_LIMIT {
            cache.insert(*g, Arc::clone(&op));
        }
        Ok(op)
    }

    pub fn egorov_residual(&self, g: &SL2Element) -> Result<f64> {
        Ok(egorov_residual_of(g, &self.build(g)?))
    }
}
