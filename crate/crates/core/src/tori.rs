//! Maximal tori of `SL2(F_p)`.
//!
//! The centralizer of a regular element `g` (one with `tr(g)² − 4 ≠ 0`) in the
//! matrix algebra is `F_p[g] = {xI + yg}`, so its centralizer in `SL2` is the
//! set of `xI + yg` with `x² + tr(g)·xy + y² = 1`. Every regular element lies
//! in exactly one maximal torus.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::weil::SL2Element;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TorusKind {
    Split,
    NonSplit,
}

impl TorusKind {
    /// `p − 1` for split tori, `p + 1` for non-split ones.
    pub fn order(self, m: PrimeModulus) -> usize {
        match self {
            TorusKind::Split => m.size() - 1,
            TorusKind::NonSplit => m.size() + 1,
        }
    }

    pub fn expected_count(self, m: PrimeModulus) -> usize {
        let p = m.size();
        match self {
            TorusKind::Split => p * (p + 1) / 2,
            TorusKind::NonSplit => p * (p - 1) / 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementClass {
    Central,
    UnipotentType,
    SplitRegular,
    NonsplitRegular,
}

/// Classify by the discriminant `Δ = tr(g)² − 4`.
pub fn classify_element(g: &SL2Element) -> ElementClass {
    if g.is_central() {
        return ElementClass::Central;
    }
    let m = g.modulus();
    let tr = g.trace();
    match (tr * tr - m.elem(4)).quadratic_character() {
        1 => ElementClass::SplitRegular,
        -1 => ElementClass::NonsplitRegular,
        _ => ElementClass::UnipotentType,
    }
}

fn kind_of(class: ElementClass) -> Option<TorusKind> {
    match class {
        ElementClass::SplitRegular => Some(TorusKind::Split),
        ElementClass::NonsplitRegular => Some(TorusKind::NonSplit),
        _ => None,
    }
}

/// Centralizer of a regular element, sorted.
pub fn centralizer_of_regular(g: &SL2Element) -> Vec<SL2Element> {
    let m = g.modulus();
    let tr = g.trace();
    let mut out = Vec::new();
    for x in m.elements() {
        for y in m.elements() {
            if x * x + tr * x * y + y * y == m.one() {
                out.push(SL2Element { a: x + y * g.a, b: y * g.b, c: y * g.c, d: x + y * g.d });
            }
        }
    }
    out.sort();
    out
}

/// Smallest element, in lexicographic matrix order, of full order `order`.
pub fn torus_generator(elements: &[SL2Element], order: usize) -> Result<SL2Element> {
    elements
        .iter()
        .copied()
        .filter(|g| !g.is_central())
        .find(|g| g.order() == order as u64)
        .ok_or(Error::NotCyclic { order })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Torus {
    pub id: usize,
    pub kind: TorusKind,
    /// Sorted.
    pub elements: Vec<SL2Element>,
    pub generator: SL2Element,
    pub order: usize,
}

impl Torus {
    pub fn from_elements(id: usize, kind: TorusKind, elements: Vec<SL2Element>) -> Result<Self> {
        let order = elements.len();
        let generator = torus_generator(&elements, order)?;
        Ok(Torus { id, kind, elements, generator, order })
    }

    pub fn contains(&self, g: &SL2Element) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.generator.modulus()
    }

    /// A regular element of the torus; its conjugates locate conjugate tori.
    pub fn regular_element(&self) -> SL2Element {
        self.generator
    }
}

/// Maximal tori of the given kind, numbered in the order of their first
/// element in the lexicographic scan of the group.
pub fn enumerate_tori(m: PrimeModulus, kind: TorusKind) -> Result<Vec<Torus>> {
    let mut covered = std::collections::HashSet::new();
    let mut tori = Vec::with_capacity(kind.expected_count(m));
    for g in SL2Element::all(m) {
        if kind_of(classify_element(&g)) != Some(kind) || covered.contains(&g) {
            continue;
        }
        let elements = centralizer_of_regular(&g);
        covered.extend(elements.iter().copied().filter(|e| !e.is_central()));
        tori.push(Torus::from_elements(tori.len(), kind, elements)?);
    }
    Ok(tori)
}

/// Both families of tori with a lookup from regular elements to their torus.
#[derive(Debug, Clone)]
pub struct TorusCensus {
    pub modulus: PrimeModulus,
    pub split: Vec<Torus>,
    pub nonsplit: Vec<Torus>,
    index: HashMap<SL2Element, (TorusKind, usize)>,
}

impl TorusCensus {
    pub fn new(m: PrimeModulus) -> Result<Self> {
        let split = enumerate_tori(m, TorusKind::Split)?;
        let nonsplit = enumerate_tori(m, TorusKind::NonSplit)?;
        let mut index = HashMap::new();
        for t in split.iter().chain(&nonsplit) {
            for g in t.elements.iter().filter(|g| !g.is_central()) {
                index.insert(*g, (t.kind, t.id));
            }
        }
        Ok(TorusCensus { modulus: m, split, nonsplit, index })
    }

    pub fn tori(&self, kind: TorusKind) -> &[Torus] {
        match kind {
            TorusKind::Split => &self.split,
            TorusKind::NonSplit => &self.nonsplit,
        }
    }

    pub fn get(&self, kind: TorusKind, id: usize) -> Option<&Torus> {
        self.tori(kind).get(id)
    }

    /// The torus containing a regular element.
    pub fn torus_of(&self, g: &SL2Element) -> Option<&Torus> {
        let (kind, id) = *self.index.get(g)?;
        self.get(kind, id)
    }

    /// `g T g⁻¹`.
    pub fn conjugate(&self, torus: &Torus, g: &SL2Element) -> Option<&Torus> {
        let r = g.mul(&torus.regular_element()).mul(&g.inverse());
        self.torus_of(&r)
    }

    /// The torus containing the Weyl element; its kind depends on whether −1
    /// is a square.
    pub fn weyl_torus(&self) -> Option<&Torus> {
        self.torus_of(&SL2Element::weyl(self.modulus))
    }
}

/// The diagonal torus `A`.
pub fn standard_torus(m: PrimeModulus) -> Vec<SL2Element> {
    let mut out: Vec<_> = m
        .elements()
        .skip(1)
        .map(|a| SL2Element::diagonal(a).expect("nonzero"))
        .collect();
    out.sort();
    out
}

/// Elements of `SL2` preserving `B((t, w), (t', w')) = tt' + ww'`, i.e. with
/// `gᵀg = I`.
pub fn form_preserving_subgroup(m: PrimeModulus) -> Vec<SL2Element> {
    let mut out: Vec<_> = SL2Element::all(m)
        .into_iter()
        .filter(|g| {
            g.a * g.a + g.c * g.c == m.one()
                && g.b * g.b + g.d * g.d == m.one()
                && (g.a * g.b + g.c * g.d).is_zero()
        })
        .collect();
    out.sort();
    out
}
