//! Oscillator dictionaries: eigenbases of the Weil representation restricted
//! to maximal tori, their unions, the extended system and the multiplicative
//! character basis.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{PrimeModulus, Tolerance};
use crate::heisenberg::{pi_signal, HeisenbergElement, PHASE_THRESHOLD};
use crate::signal::{normalize_phase, Provenance, Signal, SignalDictionary, SystemKind, TorusRecord};
use crate::spectral::{root_of_unity_eigenspaces, SNAP_TOLERANCE};
use crate::tori::{Torus, TorusCensus, TorusKind};
use crate::weil::WeilRepresentation;

/// Character `χ_k(g₀^m) = exp(2πi k m / |T|)` of a torus with generator `g₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CharacterIndex {
    pub kind: TorusKind,
    pub torus: usize,
    pub k: usize,
}

/// The multiplicative character basis `B_std`: `χ(t)/√(p−1)` on `t ≠ 0`, one
/// signal per nontrivial character `χ_j(g^e) = exp(2πi j e / (p−1))` with `g`
/// the smallest primitive root.
pub fn standard_basis_system(m: PrimeModulus) -> SignalDictionary {
    let p = m.size();
    let g = m.primitive_root();
    let mut log = vec![0usize; p];
    let mut x = m.one();
    for e in 0..p - 1 {
        log[x.index()] = e;
        x = x * g;
    }
    let scale = 1.0 / ((p - 1) as f64).sqrt();
    let signals = (1..p - 1)
        .map(|j| {
            let coeffs = (0..p)
                .map(|t| {
                    if t == 0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::from_polar(scale, TAU * (j * log[t]) as f64 / (p - 1) as f64)
                    }
                })
                .collect();
            Signal::new(coeffs, m, Provenance::StandardCharacter { j }).expect("length p")
        })
        .collect();
    SignalDictionary::new(m, SystemKind::Standard, signals)
}

/// Eigenbasis of one torus.
#[derive(Debug, Clone)]
pub struct TorusBasis {
    pub kind: TorusKind,
    pub torus: usize,
    pub order: usize,
    /// `(k, multiplicity)` of every character that occurs.
    pub spectrum: Vec<(usize, usize)>,
    pub entries: Vec<(CharacterIndex, Signal)>,
}

impl TorusBasis {
    pub fn signals(&self) -> impl Iterator<Item = &Signal> {
        self.entries.iter().map(|(_, s)| s)
    }
}

/// Diagonalize `ρ(g₀)` and keep one phase-normalized unit vector per
/// one-dimensional character space. Characters with a larger space (the
/// `σ`-character of a split torus) are dropped.
pub fn torus_eigenbasis(weil: &WeilRepresentation, torus: &Torus, tol: Tolerance) -> Result<TorusBasis> {
    let op = weil.operator(&torus.generator)?;
    let spaces = root_of_unity_eigenspaces(&op, torus.order, SNAP_TOLERANCE, tol.value())?;
    let spectrum = spaces.iter().map(|s| (s.k, s.dim())).collect();
    let m = torus.modulus();
    let entries = spaces
        .into_iter()
        .filter(|s| s.dim() == 1)
        .map(|mut s| {
            let mut v = s.vectors.pop().expect("one vector");
            normalize_phase(&mut v, PHASE_THRESHOLD);
            let idx = CharacterIndex { kind: torus.kind, torus: torus.id, k: s.k };
            let signal = Signal::new(v, m, Provenance::Torus { kind: torus.kind, torus: torus.id, k: s.k })
                .expect("length p");
            (idx, signal)
        })
        .collect();
    Ok(TorusBasis { kind: torus.kind, torus: torus.id, order: torus.order, spectrum, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OscillatorKind {
    Split,
    NonSplit,
    Both,
}

impl OscillatorKind {
    fn kinds(self) -> &'static [TorusKind] {
        match self {
            OscillatorKind::Split => &[TorusKind::Split],
            OscillatorKind::NonSplit => &[TorusKind::NonSplit],
            OscillatorKind::Both => &[TorusKind::Split, TorusKind::NonSplit],
        }
    }

    pub fn system_kind(self) -> SystemKind {
        match self {
            OscillatorKind::Split => SystemKind::SplitOscillator,
            OscillatorKind::NonSplit => SystemKind::NonsplitOscillator,
            OscillatorKind::Both => SystemKind::Oscillator,
        }
    }
}

/// Per-torus eigenbases for every torus of the requested kinds, in torus
/// order (split before non-split).
pub fn torus_bases(
    weil: &WeilRepresentation,
    census: &TorusCensus,
    kind: OscillatorKind,
    tol: Tolerance,
) -> Result<Vec<TorusBasis>> {
    let tori: Vec<&Torus> = kind.kinds().iter().flat_map(|k| census.tori(*k)).collect();
    tori.par_iter().map(|t| torus_eigenbasis(weil, t, tol)).collect()
}

/// Index pairs of signals equal up to a unit phase. After phase
/// normalization such signals coincide, so rounding to a grid and hashing
/// finds them.
pub fn phase_collisions(signals: &[Signal]) -> Vec<(usize, usize)> {
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, s) in signals.iter().enumerate() {
        let key: Vec<i64> = s
            .coeffs()
            .iter()
            .flat_map(|c| [(c.re * 1e7).round() as i64, (c.im * 1e7).round() as i64])
            .collect();
        match seen.get(&key) {
            Some(&j) => out.push((j, i)),
            None => {
                seen.insert(key, i);
            }
        }
    }
    out
}

/// The split, non-split or full oscillator system. Entries are ordered by
/// torus kind, torus id and character index; signals that coincide across
/// tori are kept and listed in the collision metadata.
pub fn build_oscillator_system(
    weil: &WeilRepresentation,
    census: &TorusCensus,
    kind: OscillatorKind,
    tol: Tolerance,
) -> Result<SignalDictionary> {
    let bases = torus_bases(weil, census, kind, tol)?;
    let m = weil.modulus();
    let mut records = Vec::with_capacity(bases.len());
    let mut signals = Vec::new();
    for b in bases {
        let torus = census.get(b.kind, b.torus).expect("known torus");
        records.push(TorusRecord {
            kind: b.kind,
            id: b.torus,
            order: b.order,
            generator: torus.generator.entries(),
            spectrum: b.spectrum,
        });
        signals.extend(b.entries.into_iter().map(|(_, s)| s));
    }
    let mut dict = SignalDictionary::new(m, kind.system_kind(), signals);
    let nu = weil.nu();
    dict.metadata.nu = Some([nu.re, nu.im]);
    dict.metadata.projective = weil.calibration().projective;
    dict.metadata.tori = records;
    dict.metadata.collisions = phase_collisions(&dict.signals);
    Ok(dict)
}

/// All translates `M_w L_τ φ` of a base dictionary, generated on demand.
///
/// Entry `i` is `(base, τ, w) = (i / p², (i / p) % p, i % p)`.
#[derive(Debug, Clone)]
pub struct ExtendedSystem {
    base: SignalDictionary,
}

impl ExtendedSystem {
    pub fn new(base: SignalDictionary) -> Self {
        ExtendedSystem { base }
    }

    pub fn base(&self) -> &SignalDictionary {
        &self.base
    }

    pub fn len(&self) -> usize {
        let p = self.base.modulus.size();
        p * p * self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn key(&self, index: usize) -> (usize, u64, u64) {
        let p = self.base.modulus.size();
        (index / (p * p), ((index / p) % p) as u64, (index % p) as u64)
    }

    pub fn index_of(&self, base: usize, tau: u64, w: u64) -> usize {
        let p = self.base.modulus.size();
        base * p * p + tau as usize * p + w as usize
    }

    /// `M_w L_τ φ_base`.
    pub fn signal(&self, index: usize) -> Signal {
        let m = self.base.modulus;
        let (base, tau, w) = self.key(index);
        let phi = &self.base.signals[base];
        // M_w L_τ = ψ(−½τw) π(τ, w, 0)
        let h = HeisenbergElement::from_ints(m, tau as i64, w as i64, 0);
        let scalar = (-(m.half() * h.tau * h.w)).additive_character();
        pi_signal(&h, phi)
            .scaled(scalar)
            .with_provenance(Provenance::Extended { tau, w, base })
    }

    pub fn materialize(&self) -> SignalDictionary {
        let signals = (0..self.len()).map(|i| self.signal(i)).collect();
        let mut dict = SignalDictionary::new(self.base.modulus, SystemKind::Extended, signals);
        dict.metadata = self.base.metadata.clone();
        dict.metadata.collisions.clear();
        dict
    }
}
