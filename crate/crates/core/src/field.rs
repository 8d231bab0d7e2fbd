//! Exact arithmetic in `F_p` together with the additive character `ψ` and the
//! quadratic character `σ`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted by [`PrimeModulus::new`].
pub const DEFAULT_MAX_P: u64 = 101;

/// Approximate-comparison tolerance threaded through numerical checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(1e-9)
    }
}

impl Tolerance {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// An odd prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        Self::with_max(p, DEFAULT_MAX_P)
    }

    pub fn with_max(p: u64, max: u64) -> Result<Self> {
        if p < 3 || p.is_multiple_of(2) || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if p > max {
            return Err(Error::ModulusTooLarge { p, max });
        }
        Ok(PrimeModulus(p))
    }

    #[inline]
    pub fn p(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn size(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn elem(self, value: i64) -> Fp {
        Fp::new(value, self)
    }

    pub fn zero(self) -> Fp {
        Fp { value: 0, modulus: self }
    }

    pub fn one(self) -> Fp {
        Fp { value: 1, modulus: self }
    }

    /// `1/2 = (p + 1) / 2`.
    pub fn half(self) -> Fp {
        Fp { value: self.0.div_ceil(2), modulus: self }
    }

    pub fn elements(self) -> impl Iterator<Item = Fp> {
        (0..self.0).map(move |value| Fp { value, modulus: self })
    }

    /// Smallest generator of the cyclic group `F_p^×`.
    pub fn primitive_root(self) -> Fp {
        let p = self.0;
        let order = p - 1;
        let factors = prime_factors(order);
        (2..p)
            .map(|g| self.elem(g as i64))
            .find(|g| factors.iter().all(|&q| g.pow(order / q).value != 1))
            .unwrap_or_else(|| self.one())
    }
}

impl TryFrom<u64> for PrimeModulus {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        PrimeModulus::new(p)
    }
}

impl From<PrimeModulus> for u64 {
    fn from(m: PrimeModulus) -> u64 {
        m.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A residue modulo `p`, stored as its least non-negative representative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp {
    value: u64,
    modulus: PrimeModulus,
}

impl Fp {
    pub fn new(value: i64, modulus: PrimeModulus) -> Self {
        let p = modulus.0 as i64;
        Fp { value: value.rem_euclid(p) as u64, modulus }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn index(self) -> usize {
        self.value as usize
    }

    #[inline]
    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn pow(self, mut exp: u64) -> Fp {
        let p = self.modulus.0;
        let mut base = self.value;
        let mut acc = 1 % p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        Fp { value: acc, modulus: self.modulus }
    }

    pub fn inv(self) -> Result<Fp> {
        if self.value == 0 {
            return Err(Error::DivisionByZero(self.modulus.0));
        }
        Ok(self.pow(self.modulus.0 - 2))
    }

    pub fn checked_div(self, rhs: Fp) -> Result<Fp> {
        Ok(self * rhs.inv()?)
    }

    /// Legendre symbol by Euler's criterion: `+1` on nonzero squares, `-1` on
    /// non-squares and `0` at zero.
    pub fn quadratic_character(self) -> i8 {
        if self.value == 0 {
            return 0;
        }
        match self.pow((self.modulus.0 - 1) / 2).value {
            1 => 1,
            _ => -1,
        }
    }

    /// `ψ(t) = exp(2πi t / p)`.
    pub fn additive_character(self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.value as f64 / self.modulus.0 as f64)
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let s = self.value + rhs.value;
        let p = self.modulus.0;
        Fp { value: if s >= p { s - p } else { s }, modulus: self.modulus }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let p = self.modulus.0;
        Fp { value: (self.value + p - rhs.value) % p, modulus: self.modulus }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        debug_assert_eq!(self.modulus, rhs.modulus);
        Fp { value: self.value * rhs.value % self.modulus.0, modulus: self.modulus }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        let p = self.modulus.0;
        Fp { value: (p - self.value) % p, modulus: self.modulus }
    }
}

/// Per-modulus tables of `ψ` and `σ`.
#[derive(Debug, Clone)]
pub struct Characters {
    modulus: PrimeModulus,
    psi: Vec<Complex64>,
    sigma: Vec<i8>,
}

impl Characters {
    pub fn new(modulus: PrimeModulus) -> Self {
        let psi = modulus.elements().map(Fp::additive_character).collect();
        let sigma = modulus.elements().map(Fp::quadratic_character).collect();
        Characters { modulus, psi, sigma }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn psi(&self, t: Fp) -> Complex64 {
        self.psi[t.index()]
    }

    #[inline]
    pub fn sigma(&self, t: Fp) -> i8 {
        self.sigma[t.index()]
    }
}
