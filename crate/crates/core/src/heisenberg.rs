//! The Heisenberg group `H = V × F_p`, its representation `π` on `C(F_p)`,
//! matrix coefficients and the chirp (Heisenberg) system.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{Fp, PrimeModulus, Tolerance};
use crate::signal::{
    inner, normalize_phase, Provenance, Signal, SignalDictionary, SystemKind, UnitaryOperator,
};
use crate::spectral::{root_of_unity_eigenspaces, SNAP_TOLERANCE};

/// Coordinates below this magnitude are skipped when fixing the phase.
pub(crate) const PHASE_THRESHOLD: f64 = 1e-8;

/// `(τ, w, z)` with the product
/// `(τ, w, z)(τ', w', z') = (τ + τ', w + w', z + z' + ½(τw' − τ'w))`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct HeisenbergElement {
    pub tau: Fp,
    pub w: Fp,
    pub z: Fp,
}

impl HeisenbergElement {
    pub fn new(tau: Fp, w: Fp, z: Fp) -> Result<Self> {
        let p = tau.modulus();
        for m in [w.modulus(), z.modulus()] {
            if m != p {
                return Err(Error::ModulusMismatch(p.p(), m.p()));
            }
        }
        Ok(HeisenbergElement { tau, w, z })
    }

    pub fn from_ints(m: PrimeModulus, tau: i64, w: i64, z: i64) -> Self {
        HeisenbergElement { tau: m.elem(tau), w: m.elem(w), z: m.elem(z) }
    }

    pub fn identity(m: PrimeModulus) -> Self {
        HeisenbergElement { tau: m.zero(), w: m.zero(), z: m.zero() }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.tau.modulus()
    }

    pub fn mul(&self, rhs: &HeisenbergElement) -> Result<HeisenbergElement> {
        let (a, b) = (self.modulus(), rhs.modulus());
        if a != b {
            return Err(Error::ModulusMismatch(a.p(), b.p()));
        }
        let half = a.half();
        Ok(HeisenbergElement {
            tau: self.tau + rhs.tau,
            w: self.w + rhs.w,
            z: self.z + rhs.z + half * (self.tau * rhs.w - rhs.tau * self.w),
        })
    }

    pub fn inverse(&self) -> HeisenbergElement {
        HeisenbergElement { tau: -self.tau, w: -self.w, z: -self.z }
    }
}

impl fmt::Debug for HeisenbergElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.tau, self.w, self.z)
    }
}

/// `(L_τ s)(t) = s(t + τ)`.
pub fn time_shift(tau: Fp, s: &Signal) -> Signal {
    let p = s.modulus().size();
    let c = s.coeffs();
    let coeffs = (0..p).map(|t| c[(t + tau.index()) % p]).collect();
    Signal::new(coeffs, s.modulus(), s.provenance().clone()).expect("length preserved")
}

/// `(M_w s)(t) = ψ(wt) s(t)`.
pub fn phase_shift(w: Fp, s: &Signal) -> Signal {
    let m = s.modulus();
    let coeffs = m
        .elements()
        .zip(s.coeffs())
        .map(|(t, c)| (w * t).additive_character() * c)
        .collect();
    Signal::new(coeffs, m, s.provenance().clone()).expect("length preserved")
}

/// Phase of `π(τ, w, z)` relative to `M_w L_τ`.
///
/// `π(τ, w, z) = ψ(½τw + z) M_w L_τ`, equivalently `ψ(−½τw + z) L_τ M_w`; with
/// `L_τ φ(t) = φ(t + τ)` this is the form that is a homomorphism for the
/// group law above.
fn pi_prefactor(h: &HeisenbergElement) -> Fp {
    h.modulus().half() * h.tau * h.w + h.z
}

/// `(π(h) v)(t) = ψ(½τw + z + wt) v(t + τ)`.
pub fn apply_pi(h: &HeisenbergElement, v: &[Complex64]) -> Vec<Complex64> {
    let m = h.modulus();
    let p = m.size();
    let base = pi_prefactor(h);
    m.elements()
        .map(|t| (base + h.w * t).additive_character() * v[(t.index() + h.tau.index()) % p])
        .collect()
}

pub fn pi_signal(h: &HeisenbergElement, s: &Signal) -> Signal {
    Signal::new(apply_pi(h, s.coeffs()), s.modulus(), s.provenance().clone()).expect("length preserved")
}

/// Dense matrix of `π(h)`.
pub fn pi(h: &HeisenbergElement) -> UnitaryOperator {
    let m = h.modulus();
    let p = m.size();
    let base = pi_prefactor(h);
    UnitaryOperator::from_fn(m, |row, col| {
        if col == (row + h.tau.index()) % p {
            (base + h.w * m.elem(row as i64)).additive_character()
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `m_{φ,ϕ}(h) = ⟨φ, π(h) ϕ⟩`.
pub fn matrix_coefficient(phi: &Signal, psi: &Signal, h: &HeisenbergElement) -> Complex64 {
    inner(phi.coeffs(), &apply_pi(h, psi.coeffs()))
}

/// `A_φ(h) = ⟨φ, π(h) φ⟩`.
pub fn ambiguity(phi: &Signal, h: &HeisenbergElement) -> Complex64 {
    matrix_coefficient(phi, phi, h)
}

/// Evaluates matrix coefficients on the whole plane `V` (the `z = 0` section).
///
/// For fixed `τ`, `w ↦ m(τ, w, 0)` is `ψ(−½τw)` times the DFT of
/// `t ↦ φ(t)·conj(ϕ(t + τ))`, so a full surface costs `p` FFTs of length `p`.
pub struct CoefficientSurface {
    modulus: PrimeModulus,
    fft: Arc<dyn Fft<f64>>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl CoefficientSurface {
    pub fn new(modulus: PrimeModulus) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(modulus.size());
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        CoefficientSurface {
            modulus,
            fft,
            buffer: vec![Complex64::new(0.0, 0.0); modulus.size()],
            scratch,
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    fn row(&mut self, phi: &[Complex64], psi: &[Complex64], tau: usize) {
        let p = self.modulus.size();
        for t in 0..p {
            self.buffer[t] = phi[t] * psi[(t + tau) % p].conj();
        }
        self.fft.process_with_scratch(&mut self.buffer, &mut self.scratch);
    }

    /// `|m_{φ,ϕ}(τ, w, 0)|` stored at `τ * p + w`.
    pub fn magnitudes(&mut self, phi: &[Complex64], psi: &[Complex64], out: &mut [f64]) {
        let p = self.modulus.size();
        for tau in 0..p {
            self.row(phi, psi, tau);
            for (o, b) in out[tau * p..(tau + 1) * p].iter_mut().zip(&self.buffer) {
                *o = b.norm();
            }
        }
    }

    /// Largest `|m_{φ,ϕ}(τ, w, 0)|` over the plane, optionally skipping the
    /// origin, with its location.
    pub fn max_magnitude(
        &mut self,
        phi: &[Complex64],
        psi: &[Complex64],
        skip_origin: bool,
    ) -> (f64, (u64, u64)) {
        let p = self.modulus.size();
        let mut best = (f64::NEG_INFINITY, (0, 0));
        for tau in 0..p {
            self.row(phi, psi, tau);
            for (w, b) in self.buffer.iter().enumerate() {
                if skip_origin && tau == 0 && w == 0 {
                    continue;
                }
                let v = b.norm_sqr();
                if v > best.0 {
                    best = (v, (tau as u64, w as u64));
                }
            }
        }
        (best.0.sqrt(), best.1)
    }

    /// Complex `m_{φ,ϕ}(τ, w, 0)` stored at `τ * p + w`.
    pub fn coefficients(&mut self, phi: &[Complex64], psi: &[Complex64]) -> Vec<Complex64> {
        let m = self.modulus;
        let p = m.size();
        let mut out = vec![Complex64::new(0.0, 0.0); p * p];
        for tau in 0..p {
            self.row(phi, psi, tau);
            for w in 0..p {
                let phase = (-(m.half() * m.elem(tau as i64) * m.elem(w as i64))).additive_character();
                out[tau * p + w] = phase * self.buffer[w];
            }
        }
        out
    }
}

/// A line through the origin of `V`, stored by its canonical direction: the
/// first nonzero coordinate is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Line {
    pub alpha: Fp,
    pub beta: Fp,
}

impl Line {
    /// Lines in the fixed order `(1, s)` for `s = 0..p`, then `(0, 1)`.
    pub fn all(m: PrimeModulus) -> Vec<Line> {
        m.elements()
            .map(|s| Line { alpha: m.one(), beta: s })
            .chain(std::iter::once(Line { alpha: m.zero(), beta: m.one() }))
            .collect()
    }

    /// The time line `T = {(τ, 0)}`.
    pub fn time(m: PrimeModulus) -> Line {
        Line { alpha: m.one(), beta: m.zero() }
    }

    /// The frequency line `W = {(0, w)}`.
    pub fn frequency(m: PrimeModulus) -> Line {
        Line { alpha: m.zero(), beta: m.one() }
    }

    /// The line through a nonzero point.
    pub fn through(tau: Fp, w: Fp) -> Option<Line> {
        if !tau.is_zero() {
            Some(Line { alpha: tau.modulus().one(), beta: w * tau.inv().ok()? })
        } else if !w.is_zero() {
            Some(Line { alpha: w.modulus().zero(), beta: w.modulus().one() })
        } else {
            None
        }
    }

    pub fn index(&self) -> usize {
        if self.alpha.is_zero() {
            self.alpha.modulus().size()
        } else {
            self.beta.index()
        }
    }

    pub fn contains(&self, tau: Fp, w: Fp) -> bool {
        (tau * self.beta - w * self.alpha).is_zero()
    }

    pub fn generator(&self) -> HeisenbergElement {
        let m = self.alpha.modulus();
        HeisenbergElement { tau: self.alpha, w: self.beta, z: m.zero() }
    }
}

/// Orthonormal character basis `B_L` of the commuting family `{π(l, 0) : l ∈ L}`.
///
/// Entry `k` satisfies `π(l₀) φ_k = ψ(k) φ_k` for the canonical generator `l₀`.
pub fn heisenberg_basis(line: &Line, tol: Tolerance) -> Result<Vec<Signal>> {
    let m = line.alpha.modulus();
    let p = m.size();
    let op = pi(&line.generator());
    let spaces = root_of_unity_eigenspaces(&op, p, SNAP_TOLERANCE, tol.value())?;
    if spaces.len() != p {
        let degenerate = spaces.iter().find(|s| s.dim() != 1).expect("p eigenvalues");
        return Err(Error::DegenerateEigenspace { index: degenerate.k, multiplicity: degenerate.dim() });
    }
    spaces
        .into_iter()
        .map(|mut space| {
            let mut v = space.vectors.pop().expect("one-dimensional");
            normalize_phase(&mut v, PHASE_THRESHOLD);
            Signal::new(
                v,
                m,
                Provenance::Line {
                    line: line.index(),
                    alpha: line.alpha.value(),
                    beta: line.beta.value(),
                    character: space.k as u64,
                },
            )
        })
        .collect()
}

/// The Heisenberg system `S_H`: the union of `B_L` over all `p + 1` lines.
pub fn heisenberg_system(m: PrimeModulus, tol: Tolerance) -> Result<SignalDictionary> {
    let mut signals = Vec::with_capacity(m.size() * (m.size() + 1));
    for line in Line::all(m) {
        signals.extend(heisenberg_basis(&line, tol)?);
    }
    Ok(SignalDictionary::new(m, SystemKind::Heisenberg, signals))
}
