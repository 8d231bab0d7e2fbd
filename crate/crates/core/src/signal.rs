//! Signals on `F_p`, dictionaries of signals and dense unitary operators.

use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::tori::TorusKind;

/// Where a signal came from. Together with the system kind this is the
/// dictionary key of a signal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Provenance {
    /// Eigenvector of the line with direction `(alpha, beta)` for the
    /// character `t -> ψ(character * t)` along the line generator.
    Line { line: usize, alpha: u64, beta: u64, character: u64 },
    /// Eigenvector of a maximal torus for the character `k` relative to the
    /// torus generator.
    Torus { kind: TorusKind, torus: usize, k: usize },
    /// Nontrivial multiplicative character `t -> exp(2πi j m / (p-1))` where
    /// `t = g^m` for the smallest primitive root `g`.
    StandardCharacter { j: usize },
    /// `M_w L_τ` applied to entry `base` of an underlying dictionary.
    Extended { tau: u64, w: u64, base: usize },
    External { index: usize },
}

/// A complex function on `F_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    coeffs: Vec<Complex64>,
    modulus: PrimeModulus,
    provenance: Provenance,
}

impl Signal {
    pub fn new(coeffs: Vec<Complex64>, modulus: PrimeModulus, provenance: Provenance) -> Result<Self> {
        if coeffs.len() != modulus.size() {
            return Err(Error::InvalidConfig(format!(
                "signal has {} samples, expected p = {}",
                coeffs.len(),
                modulus
            )));
        }
        Ok(Signal { coeffs, modulus, provenance })
    }

    pub fn delta(modulus: PrimeModulus, a: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); modulus.size()];
        coeffs[a % modulus.size()] = Complex64::new(1.0, 0.0);
        Signal { coeffs, modulus, provenance: Provenance::External { index: a } }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// `⟨self, other⟩ = Σ self(t) · conj(other(t))`.
    pub fn inner(&self, other: &Signal) -> Complex64 {
        inner(&self.coeffs, &other.coeffs)
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: Complex64) -> Signal {
        Signal {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            modulus: self.modulus,
            provenance: self.provenance.clone(),
        }
    }
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Rotate `v` so its first coordinate of magnitude above `threshold` is real
/// and positive.
pub fn normalize_phase(v: &mut [Complex64], threshold: f64) {
    if let Some(lead) = v.iter().find(|c| c.norm() > threshold).copied() {
        let rot = lead.conj() / lead.norm();
        for c in v.iter_mut() {
            *c *= rot;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Heisenberg,
    SplitOscillator,
    NonsplitOscillator,
    Oscillator,
    Extended,
    Standard,
}

impl SystemKind {
    pub fn code(self) -> u32 {
        match self {
            SystemKind::Heisenberg => 0,
            SystemKind::SplitOscillator => 1,
            SystemKind::NonsplitOscillator => 2,
            SystemKind::Oscillator => 3,
            SystemKind::Extended => 4,
            SystemKind::Standard => 5,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => SystemKind::Heisenberg,
            1 => SystemKind::SplitOscillator,
            2 => SystemKind::NonsplitOscillator,
            3 => SystemKind::Oscillator,
            4 => SystemKind::Extended,
            5 => SystemKind::Standard,
            _ => return None,
        })
    }

    pub fn is_oscillator(self) -> bool {
        matches!(
            self,
            SystemKind::SplitOscillator | SystemKind::NonsplitOscillator | SystemKind::Oscillator
        )
    }
}

/// Per-torus record embedded in oscillator dictionaries so character indices
/// can be interpreted against the chosen generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusRecord {
    pub kind: TorusKind,
    pub id: usize,
    pub order: usize,
    /// Generator `[a, b, c, d]`, row-major.
    pub generator: [u64; 4],
    /// `(k, multiplicity)` for every character of the torus that occurs.
    pub spectrum: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DictionaryMetadata {
    pub phase_convention: String,
    /// Calibrated Fourier normalization `[re, im]`, when the Weil
    /// representation was used.
    pub nu: Option<[f64; 2]>,
    pub projective: bool,
    pub tori: Vec<TorusRecord>,
    /// Pairs of dictionary indices whose signals agree up to a unit phase.
    pub collisions: Vec<(usize, usize)>,
}

pub const PHASE_CONVENTION: &str = "first-nonzero-real-positive";

/// An ordered list of unit signals with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalDictionary {
    pub modulus: PrimeModulus,
    pub kind: SystemKind,
    pub signals: Vec<Signal>,
    pub metadata: DictionaryMetadata,
}

impl SignalDictionary {
    pub fn new(modulus: PrimeModulus, kind: SystemKind, signals: Vec<Signal>) -> Self {
        SignalDictionary {
            modulus,
            kind,
            signals,
            metadata: DictionaryMetadata {
                phase_convention: PHASE_CONVENTION.to_string(),
                ..Default::default()
            },
        }
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Signal> {
        self.signals.iter()
    }

    pub fn position(&self, provenance: &Provenance) -> Option<usize> {
        self.signals.iter().position(|s| s.provenance() == provenance)
    }
}

/// A dense `p × p` complex matrix acting on `C(F_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: DMatrix<Complex64>,
    modulus: PrimeModulus,
}

impl UnitaryOperator {
    pub fn identity(modulus: PrimeModulus) -> Self {
        let n = modulus.size();
        UnitaryOperator { matrix: DMatrix::identity(n, n), modulus }
    }

    pub fn from_matrix(modulus: PrimeModulus, matrix: DMatrix<Complex64>) -> Self {
        assert_eq!(matrix.nrows(), modulus.size());
        assert_eq!(matrix.ncols(), modulus.size());
        UnitaryOperator { matrix, modulus }
    }

    pub fn from_fn(modulus: PrimeModulus, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let n = modulus.size();
        UnitaryOperator { matrix: DMatrix::from_fn(n, n, f), modulus }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.matrix.nrows();
        (0..n)
            .map(|r| (0..n).map(|c| self.matrix[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn apply_signal(&self, s: &Signal) -> Signal {
        Signal {
            coeffs: self.apply(s.coeffs()),
            modulus: s.modulus(),
            provenance: s.provenance().clone(),
        }
    }

    pub fn adjoint(&self) -> Self {
        UnitaryOperator { matrix: self.matrix.adjoint(), modulus: self.modulus }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        UnitaryOperator { matrix: &self.matrix * factor, modulus: self.modulus }
    }

    pub fn pow(&self, exp: usize) -> Self {
        let mut acc = UnitaryOperator::identity(self.modulus);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &UnitaryOperator) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }

    /// Frobenius norm of `U U* - I`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        (&self.matrix * self.matrix.adjoint() - DMatrix::<Complex64>::identity(n, n)).norm()
    }
}

impl Mul for &UnitaryOperator {
    type Output = UnitaryOperator;

    fn mul(self, rhs: &UnitaryOperator) -> UnitaryOperator {
        UnitaryOperator { matrix: &self.matrix * &rhs.matrix, modulus: self.modulus }
    }
}
