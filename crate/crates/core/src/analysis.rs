//! Correlation, supremum and Fourier-invariance checks over dictionaries.
//!
//! Every section records the achieved extreme value and a witness so a
//! reported maximum can be reproduced. Iteration orders are fixed and ties
//! are broken by index, so identical input gives an identical report.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PrimeModulus, Tolerance};
use crate::heisenberg::CoefficientSurface;
use crate::oscillator::ExtendedSystem;
use crate::signal::{inner, Provenance, Signal, SignalDictionary, SystemKind};
use crate::tori::{TorusCensus, TorusKind};
use crate::weil::{SL2Element, WeilRepresentation};

/// Default number of (pair, shift) cells evaluated before switching to
/// sampling.
pub const DEFAULT_PAIR_BUDGET: u64 = 10_000_000;

const MAX_VIOLATIONS: usize = 64;

/// Sampled pairs for the distinct-inner-product check.
pub const EXTENDED_PAIRS: u64 = 100_000;

/// Tolerance for the exact Heisenberg unimodularity check.
pub const UNIMODULAR_TOLERANCE: f64 = 1e-10;

/// Overlap an image must reach to count as the same signal up to phase.
pub const PHASE_MATCH_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub one_over_sqrt_p: f64,
    pub two_over_sqrt_p: f64,
    pub four_over_sqrt_p: f64,
}

impl Bounds {
    pub fn new(m: PrimeModulus) -> Self {
        let s = (m.p() as f64).sqrt();
        Bounds { one_over_sqrt_p: 1.0 / s, two_over_sqrt_p: 2.0 / s, four_over_sqrt_p: 4.0 / s }
    }
}

/// Which family of bounds a dictionary is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSet {
    /// Thumbtack autocorrelation `≤ 2/√p`, cross `≤ 4/√p`, sup `≤ 2/√p`.
    Oscillator,
    /// Line-characteristic ambiguity, cross `≤ 1/√p` across lines, unimodular.
    Heisenberg,
}

impl BoundSet {
    pub fn for_kind(kind: SystemKind) -> Self {
        match kind {
            SystemKind::Heisenberg => BoundSet::Heisenberg,
            _ => BoundSet::Oscillator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftWitness {
    pub signal: usize,
    pub tau: u64,
    pub w: u64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub first: usize,
    pub second: usize,
    pub tau: u64,
    pub w: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationSection {
    pub bound: f64,
    /// Largest `||A_φ(0)| − 1|`.
    pub origin_deviation: f64,
    pub max_off_origin: f64,
    pub witness: Option<ShiftWitness>,
    pub per_signal_max: Vec<f64>,
    pub violations: Vec<ShiftWitness>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub bound: f64,
    pub max: f64,
    pub witness: Option<PairWitness>,
    pub pairs_total: u64,
    pub pairs_evaluated: u64,
    pub cells_evaluated: u64,
    pub sampled: bool,
    pub seed: u64,
    pub violations: Vec<PairWitness>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupremumSection {
    pub bound: f64,
    pub max_sup: f64,
    pub max_papr: f64,
    pub witness: Option<usize>,
    /// Largest `||φ(t)| − 1/√p|`; zero exactly for unimodular signals.
    pub unimodular_deviation: f64,
    pub per_signal_sup: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePatternSection {
    /// Largest `||A_φ(v)| − 1_L(v)|` over all signals and `v ∈ V`.
    pub max_deviation: f64,
    pub witness: Option<ShiftWitness>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceSection {
    /// `[a, b, c, d]` of the element applied.
    pub element: [u64; 4],
    pub signals_checked: usize,
    /// Smallest best-match overlap `max_ϕ |⟨ρ(g)φ, ϕ⟩|` with `ϕ ∈ B_{gTg⁻¹}`.
    pub min_overlap: f64,
    pub witness: Option<usize>,
    /// Tori whose conjugate is missing from the dictionary.
    pub missing_targets: usize,
    /// Smallest `|⟨φ, ρ(g)φ⟩|` over signals of tori containing `g`, if any.
    pub fixed_torus_min_overlap: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedSection {
    pub bound: f64,
    pub max: f64,
    pub witness: Option<(usize, usize)>,
    pub pairs_evaluated: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryId {
    pub p: u64,
    pub kind: SystemKind,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub dictionary: DictionaryId,
    pub bound_set: BoundSet,
    pub tolerance: f64,
    pub bounds: Bounds,
    pub autocorrelation: AutocorrelationSection,
    /// Absent for extended dictionaries, whose members include every shift
    /// of each base signal.
    pub crosscorrelation: Option<CrossSection>,
    pub supremum: SupremumSection,
    pub line_pattern: Option<LinePatternSection>,
    pub fourier_invariance: Option<InvarianceSection>,
    pub extended: Option<ExtendedSection>,
    pub pass: bool,
}

fn better_shift(a: Option<ShiftWitness>, b: Option<ShiftWitness>) -> Option<ShiftWitness> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let kx = (x.signal, x.tau, x.w);
            let ky = (y.signal, y.tau, y.w);
            if y.value > x.value || (y.value == x.value && ky < kx) { Some(y) } else { Some(x) }
        }
    }
}

fn better_pair(a: Option<PairWitness>, b: Option<PairWitness>) -> Option<PairWitness> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let kx = (x.first, x.second, x.tau, x.w);
            let ky = (y.first, y.second, y.tau, y.w);
            if y.value > x.value || (y.value == x.value && ky < kx) { Some(y) } else { Some(x) }
        }
    }
}

/// Max off-origin `|⟨φ, M_w L_τ φ⟩|` per signal, checked against `bound`.
pub fn verify_autocorrelation(dict: &SignalDictionary, bound: f64, tol: Tolerance) -> AutocorrelationSection {
    let m = dict.modulus;
    let results: Vec<(f64, ShiftWitness)> = dict
        .signals
        .par_iter()
        .enumerate()
        .map_init(
            || CoefficientSurface::new(m),
            |surface, (i, s)| {
                let c = s.coeffs();
                let origin = inner(c, c).norm();
                let (value, (tau, w)) = surface.max_magnitude(c, c, true);
                ((origin - 1.0).abs(), ShiftWitness { signal: i, tau, w, value })
            },
        )
        .collect();
    let origin_deviation = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let witness = results.iter().map(|r| Some(r.1)).fold(None, better_shift);
    let violations: Vec<ShiftWitness> = results
        .iter()
        .map(|r| r.1)
        .filter(|w| w.value > bound + tol.value())
        .take(MAX_VIOLATIONS)
        .collect();
    let max_off_origin = witness.map_or(0.0, |w| w.value);
    AutocorrelationSection {
        bound,
        origin_deviation,
        max_off_origin,
        witness,
        per_signal_max: results.iter().map(|r| r.1.value).collect(),
        pass: violations.is_empty() && origin_deviation <= tol.value(),
        violations,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CrossOptions {
    /// Cells (pair × shift) evaluated exhaustively before sampling.
    pub pair_budget: u64,
    pub seed: u64,
}

impl Default for CrossOptions {
    fn default() -> Self {
        CrossOptions { pair_budget: DEFAULT_PAIR_BUDGET, seed: 0 }
    }
}

fn line_of(s: &Signal) -> Option<usize> {
    match s.provenance() {
        Provenance::Line { line, .. } => Some(*line),
        _ => None,
    }
}

/// Max `|⟨φ, M_w L_τ ϕ⟩|` over unordered pairs `φ ≠ ϕ` accepted by `admit`
/// and all shifts. Above the cell budget a seeded uniform sample of pairs
/// (with replacement) of at least the budget's size is evaluated instead.
pub fn verify_crosscorrelation_filtered(
    dict: &SignalDictionary,
    bound: f64,
    tol: Tolerance,
    opts: CrossOptions,
    admit: impl Fn(&Signal, &Signal) -> bool + Sync,
) -> CrossSection {
    let m = dict.modulus;
    let n = dict.len();
    let cells_per_pair = (m.size() * m.size()) as u64;
    let admitted = |i: usize, j: usize| admit(&dict.signals[i], &dict.signals[j]);
    let pairs_total: u64 = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).filter(|&j| admitted(i, j)).count() as u64)
        .sum();
    let sampled = pairs_total.saturating_mul(cells_per_pair) > opts.pair_budget;

    let eval = |surface: &mut CoefficientSurface, i: usize, j: usize| {
        let (value, (tau, w)) =
            surface.max_magnitude(dict.signals[i].coeffs(), dict.signals[j].coeffs(), false);
        PairWitness { first: i, second: j, tau, w, value }
    };

    let fold_witnesses = |acc: (Option<PairWitness>, Vec<PairWitness>), w: PairWitness| {
        let (best, mut viol) = acc;
        if w.value > bound + tol.value() && viol.len() < MAX_VIOLATIONS {
            viol.push(w);
        }
        (better_pair(best, Some(w)), viol)
    };
    let merge = |a: (Option<PairWitness>, Vec<PairWitness>), b: (Option<PairWitness>, Vec<PairWitness>)| {
        let mut viol = a.1;
        viol.extend(b.1);
        viol.sort_by_key(|w| (w.first, w.second));
        viol.truncate(MAX_VIOLATIONS);
        (better_pair(a.0, b.0), viol)
    };

    let (pairs, (best, violations)) = if !sampled {
        let out = (0..n)
            .into_par_iter()
            .map_init(
                || CoefficientSurface::new(m),
                |surface, i| {
                    (i + 1..n)
                        .filter(|&j| admitted(i, j))
                        .map(|j| eval(surface, i, j))
                        .fold((None, Vec::new()), fold_witnesses)
                },
            )
            .reduce(|| (None, Vec::new()), merge);
        (pairs_total, out)
    } else {
        let target = opts.pair_budget.div_ceil(cells_per_pair);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut chosen = Vec::with_capacity(target as usize);
        while (chosen.len() as u64) < target {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i == j {
                continue;
            }
            let (i, j) = (i.min(j), i.max(j));
            if admitted(i, j) {
                chosen.push((i, j));
            }
        }
        let out = chosen
            .par_iter()
            .map_init(|| CoefficientSurface::new(m), |surface, &(i, j)| eval(surface, i, j))
            .fold(|| (None, Vec::new()), fold_witnesses)
            .reduce(|| (None, Vec::new()), merge);
        (target, out)
    };

    CrossSection {
        bound,
        max: best.map_or(0.0, |w| w.value),
        witness: best,
        pairs_total,
        pairs_evaluated: pairs,
        cells_evaluated: pairs * cells_per_pair,
        sampled,
        seed: opts.seed,
        pass: violations.is_empty(),
        violations,
    }
}

pub fn verify_crosscorrelation(
    dict: &SignalDictionary,
    bound: f64,
    tol: Tolerance,
    opts: CrossOptions,
) -> CrossSection {
    verify_crosscorrelation_filtered(dict, bound, tol, opts, |_, _| true)
}

/// Per-signal `sup_t |φ(t)|` and `PAPR = p · sup²`. The oscillator check is
/// `sup ≤ 2/√p`; the Heisenberg check is `|φ(t)| = 1/√p` everywhere.
pub fn verify_supremum_and_papr(dict: &SignalDictionary, set: BoundSet, tol: Tolerance) -> SupremumSection {
    let m = dict.modulus;
    let bounds = Bounds::new(m);
    let per_signal_sup: Vec<f64> = dict.iter().map(Signal::sup_norm).collect();
    let unimodular_deviation = dict
        .iter()
        .flat_map(|s| s.coeffs().iter().map(|c| (c.norm() - bounds.one_over_sqrt_p).abs()))
        .fold(0.0, f64::max);
    let (witness, max_sup) = per_signal_sup
        .iter()
        .enumerate()
        .fold((None, f64::NEG_INFINITY), |(w, best), (i, &v)| if v > best { (Some(i), v) } else { (w, best) });
    let max_sup = if witness.is_some() { max_sup } else { 0.0 };
    let (bound, pass) = match set {
        BoundSet::Oscillator => (bounds.two_over_sqrt_p, max_sup <= bounds.two_over_sqrt_p + tol.value()),
        BoundSet::Heisenberg => (bounds.one_over_sqrt_p, unimodular_deviation <= UNIMODULAR_TOLERANCE),
    };
    SupremumSection {
        bound,
        max_sup,
        max_papr: m.p() as f64 * max_sup * max_sup,
        witness,
        unimodular_deviation,
        per_signal_sup,
        pass,
    }
}

/// `|A_φ|` against the characteristic function of the signal's line.
pub fn verify_line_pattern(dict: &SignalDictionary, tol: Tolerance) -> Result<LinePatternSection> {
    let m = dict.modulus;
    let p = m.size();
    let mut surface = CoefficientSurface::new(m);
    let mut mags = vec![0.0; p * p];
    let mut witness: Option<ShiftWitness> = None;
    for (i, s) in dict.iter().enumerate() {
        let (alpha, beta) = match s.provenance() {
            Provenance::Line { alpha, beta, .. } => (m.elem(*alpha as i64), m.elem(*beta as i64)),
            _ => return Err(Error::InvalidConfig(format!("signal {i} is not attached to a line"))),
        };
        surface.magnitudes(s.coeffs(), s.coeffs(), &mut mags);
        for tau in 0..p {
            for w in 0..p {
                let on_line = (m.elem(tau as i64) * beta - m.elem(w as i64) * alpha).is_zero();
                let target = if on_line { 1.0 } else { 0.0 };
                let value = (mags[tau * p + w] - target).abs();
                witness = better_shift(witness, Some(ShiftWitness { signal: i, tau: tau as u64, w: w as u64, value }));
            }
        }
    }
    let max_deviation = witness.map_or(0.0, |w| w.value);
    Ok(LinePatternSection { max_deviation, witness, pass: max_deviation <= tol.value() })
}

/// For every `φ ∈ B_T` in the dictionary, check that `ρ(g)φ` matches some
/// signal of `B_{gTg⁻¹}` up to a unit phase, and that signals of tori
/// containing `g` are eigenvectors of `ρ(g)`.
pub fn verify_equivariance(
    dict: &SignalDictionary,
    weil: &WeilRepresentation,
    census: &TorusCensus,
    g: &SL2Element,
) -> Result<InvarianceSection> {
    let mut by_torus: BTreeMap<(TorusKind, usize), Vec<usize>> = BTreeMap::new();
    for (i, s) in dict.iter().enumerate() {
        if let Provenance::Torus { kind, torus, .. } = s.provenance() {
            by_torus.entry((*kind, *torus)).or_default().push(i);
        }
    }
    let rho = weil.build(g)?;
    let mut min_overlap = f64::INFINITY;
    let mut witness = None;
    let mut missing_targets = 0;
    let mut fixed_min: Option<f64> = None;
    let mut checked = 0;
    for (&(kind, id), members) in &by_torus {
        let torus = census
            .get(kind, id)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown torus {kind:?} {id}")))?;
        let target = census.conjugate(torus, g).expect("conjugate of a torus is a torus");
        let Some(candidates) = by_torus.get(&(target.kind, target.id)) else {
            missing_targets += 1;
            continue;
        };
        let fixes = torus.contains(g);
        for &i in members {
            let image = rho.apply(dict.signals[i].coeffs());
            let best = candidates
                .iter()
                .map(|&j| inner(&image, dict.signals[j].coeffs()).norm())
                .fold(0.0, f64::max);
            checked += 1;
            if best < min_overlap {
                min_overlap = best;
                witness = Some(i);
            }
            if fixes {
                let own = inner(&image, dict.signals[i].coeffs()).norm();
                fixed_min = Some(fixed_min.map_or(own, |v: f64| v.min(own)));
            }
        }
    }
    if checked == 0 {
        min_overlap = 0.0;
    }
    let threshold = 1.0 - PHASE_MATCH_TOLERANCE;
    let pass = checked > 0 && min_overlap > threshold && fixed_min.is_none_or(|v| v > threshold);
    Ok(InvarianceSection {
        element: g.entries(),
        signals_checked: checked,
        min_overlap,
        witness,
        missing_targets,
        fixed_torus_min_overlap: fixed_min,
        pass,
    })
}

/// Equivariance under the Weyl element `ρ(w)`, i.e. the Fourier transform.
pub fn verify_fourier_invariance(
    dict: &SignalDictionary,
    weil: &WeilRepresentation,
    census: &TorusCensus,
) -> Result<InvarianceSection> {
    verify_equivariance(dict, weil, census, &SL2Element::weyl(dict.modulus))
}

/// `|⟨φ, ϕ⟩| ≤ 4/√p` for distinct entries of the extended system, over a
/// seeded sample of `pairs` index pairs (or all pairs when fewer exist).
pub fn verify_extended(ext: &ExtendedSystem, pairs: u64, seed: u64, tol: Tolerance) -> ExtendedSection {
    inner_product_check(ext.base().modulus, ext.len(), |i| ext.signal(i), pairs, seed, tol)
}

/// The same check over the entries of a materialized dictionary.
pub fn verify_distinct_inner_products(dict: &SignalDictionary, pairs: u64, seed: u64, tol: Tolerance) -> ExtendedSection {
    inner_product_check(dict.modulus, dict.len(), |i| dict.signals[i].clone(), pairs, seed, tol)
}

fn inner_product_check(
    m: PrimeModulus,
    n: usize,
    signal: impl Fn(usize) -> Signal + Sync,
    pairs: u64,
    seed: u64,
    tol: Tolerance,
) -> ExtendedSection {
    let bound = Bounds::new(m).four_over_sqrt_p;
    let total = (n as u64) * (n as u64).saturating_sub(1) / 2;
    let chosen: Vec<(usize, usize)> = if total <= pairs {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(pairs as usize);
        while (out.len() as u64) < pairs {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j {
                out.push((i.min(j), i.max(j)));
            }
        }
        out
    };
    let (max, witness) = chosen
        .par_iter()
        .map(|&(i, j)| (signal(i).inner(&signal(j)).norm(), (i, j)))
        .reduce(
            || (f64::NEG_INFINITY, (usize::MAX, usize::MAX)),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let witness = (!chosen.is_empty()).then_some(witness);
    let max = if chosen.is_empty() { 0.0 } else { max };
    ExtendedSection { bound, max, witness, pairs_evaluated: chosen.len() as u64, pass: max <= bound + tol.value() }
}

/// Options for [`verify_dictionary`].
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub tolerance: Tolerance,
    pub cross: CrossOptions,
    /// Bounds to apply; `None` selects them from the dictionary kind.
    pub bound_set: Option<BoundSet>,
}


/// Run every applicable check. Fourier invariance runs when `weil` and
/// `census` are supplied and the dictionary carries torus provenance.
pub fn verify_dictionary(
    dict: &SignalDictionary,
    opts: VerifyOptions,
    group: Option<(&WeilRepresentation, &TorusCensus)>,
) -> Result<CorrelationReport> {
    let tol = opts.tolerance;
    let set = opts.bound_set.unwrap_or_else(|| BoundSet::for_kind(dict.kind));
    let bounds = Bounds::new(dict.modulus);
    let has_lines = !dict.is_empty() && dict.iter().all(|s| line_of(s).is_some());

    let (auto_bound, line_pattern) = match set {
        BoundSet::Oscillator => (bounds.two_over_sqrt_p, None),
        BoundSet::Heisenberg => {
            let lp = if has_lines { Some(verify_line_pattern(dict, tol)?) } else { None };
            // off-line values vanish; the magnitude check is carried by the line pattern
            (1.0, lp)
        }
    };
    let autocorrelation = verify_autocorrelation(dict, auto_bound, tol);
    let extended_kind = dict.kind == SystemKind::Extended;
    let crosscorrelation = match set {
        // translates of one signal meet at full overlap somewhere on the plane
        _ if extended_kind => None,
        BoundSet::Oscillator => Some(verify_crosscorrelation(dict, bounds.four_over_sqrt_p, tol, opts.cross)),
        BoundSet::Heisenberg => Some(verify_crosscorrelation_filtered(
            dict,
            bounds.one_over_sqrt_p,
            tol,
            opts.cross,
            |a, b| line_of(a) != line_of(b),
        )),
    };
    let supremum = verify_supremum_and_papr(dict, set, tol);
    let has_tori = dict.iter().any(|s| matches!(s.provenance(), Provenance::Torus { .. }));
    let fourier_invariance = match group {
        Some((weil, census)) if has_tori => Some(verify_fourier_invariance(dict, weil, census)?),
        _ => None,
    };
    let extended = if extended_kind {
        Some(verify_distinct_inner_products(dict, EXTENDED_PAIRS, opts.cross.seed, tol))
    } else {
        None
    };
    let pass = autocorrelation.pass
        && crosscorrelation.as_ref().is_none_or(|s| s.pass)
        && supremum.pass
        && line_pattern.as_ref().is_none_or(|s| s.pass)
        && fourier_invariance.as_ref().is_none_or(|s| s.pass)
        && extended.as_ref().is_none_or(|s| s.pass);
    Ok(CorrelationReport {
        dictionary: DictionaryId { p: dict.modulus.p(), kind: dict.kind, count: dict.len() },
        bound_set: set,
        tolerance: tol.value(),
        bounds,
        autocorrelation,
        crosscorrelation,
        supremum,
        line_pattern,
        fourier_invariance,
        extended,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::{heisenberg_system, Line};
    use crate::oscillator::{build_oscillator_system, OscillatorKind};

    fn modulus(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn osc(p: u64, kind: OscillatorKind) -> (SignalDictionary, WeilRepresentation, TorusCensus) {
        let m = modulus(p);
        let weil = WeilRepresentation::new(m);
        let census = TorusCensus::new(m).unwrap();
        let dict = build_oscillator_system(&weil, &census, kind, Tolerance::default()).unwrap();
        (dict, weil, census)
    }

    #[test]
    fn delta_fails_oscillator_supremum() {
        let m = modulus(7);
        let dict = SignalDictionary::new(m, SystemKind::Standard, vec![Signal::delta(m, 0)]);
        let s = verify_supremum_and_papr(&dict, BoundSet::Oscillator, Tolerance::default());
        assert_eq!(s.max_sup, 1.0);
        assert!((s.max_papr - 7.0).abs() < 1e-12);
        assert!(!s.pass);
    }

    #[test]
    fn nonsplit_autocorrelation_p7() {
        let (dict, _, _) = osc(7, OscillatorKind::NonSplit);
        let a = verify_autocorrelation(&dict, Bounds::new(dict.modulus).two_over_sqrt_p, Tolerance::default());
        assert!(a.origin_deviation < 1e-9);
        assert!(a.pass, "max {}", a.max_off_origin);
    }

    #[test]
    fn split_autocorrelation_matches_character_sums() {
        // split signals are χ(t)/√(p−1) on F_p^×; the worst shift at p = 7
        // is a twisted character sum of size ≈ 0.77169 > 2/√7
        let (dict, _, _) = osc(7, OscillatorKind::Split);
        let a = verify_autocorrelation(&dict, Bounds::new(dict.modulus).two_over_sqrt_p, Tolerance::default());
        assert!((a.max_off_origin - 0.771_689_866_847_04).abs() < 1e-9);
        assert!(a.max_off_origin <= 2.0 * 7f64.sqrt() / 6.0);
        assert!(!a.pass);
    }

    #[test]
    fn chirps_saturate_on_their_line() {
        let m = modulus(7);
        let dict = heisenberg_system(m, Tolerance::default()).unwrap();
        let a = verify_autocorrelation(&dict, Bounds::new(m).two_over_sqrt_p, Tolerance::default());
        assert!((a.max_off_origin - 1.0).abs() < 1e-9);
        assert!(!a.pass);
        let lp = verify_line_pattern(&dict, Tolerance::default()).unwrap();
        assert!(lp.pass, "{}", lp.max_deviation);
    }

    #[test]
    fn heisenberg_cross_bound_across_lines() {
        let m = modulus(7);
        let dict = heisenberg_system(m, Tolerance::default()).unwrap();
        let c = verify_crosscorrelation_filtered(
            &dict,
            Bounds::new(m).one_over_sqrt_p,
            Tolerance::default(),
            CrossOptions::default(),
            |a, b| line_of(a) != line_of(b),
        );
        assert!(c.pass, "{}", c.max);
        assert!(!c.sampled);
        // 8 lines of 7 signals, pairs on distinct lines
        assert_eq!(c.pairs_total, 56 * 55 / 2 - 8 * 21);
    }

    #[test]
    fn sampling_kicks_in_above_budget() {
        let (dict, _, _) = osc(5, OscillatorKind::Both);
        let opts = CrossOptions { pair_budget: 25 * 100, seed: 9 };
        let c = verify_crosscorrelation(&dict, 4.0 / 5f64.sqrt(), Tolerance::default(), opts);
        assert!(c.sampled);
        assert_eq!(c.pairs_evaluated, 100);
        assert_eq!(c.cells_evaluated, 2500);
        let again = verify_crosscorrelation(&dict, 4.0 / 5f64.sqrt(), Tolerance::default(), opts);
        assert_eq!(c, again);
    }

    #[test]
    fn fourier_invariance_p7() {
        let (dict, weil, census) = osc(7, OscillatorKind::Both);
        let f = verify_fourier_invariance(&dict, &weil, &census).unwrap();
        assert!(f.pass, "{f:?}");
        assert_eq!(f.signals_checked, dict.len());
        assert!(f.fixed_torus_min_overlap.unwrap() > 1.0 - 1e-8);
    }

    #[test]
    fn identity_element_matches_every_signal() {
        let (dict, weil, census) = osc(5, OscillatorKind::Both);
        let id = SL2Element::identity(dict.modulus);
        let f = verify_equivariance(&dict, &weil, &census, &id).unwrap();
        assert!(f.pass);
        assert!((f.min_overlap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weyl_permutes_standard_torus_basis() {
        let m = modulus(11);
        let weil = WeilRepresentation::new(m);
        let census = TorusCensus::new(m).unwrap();
        let a = census.split.iter().find(|t| t.elements == crate::tori::standard_torus(m)).unwrap();
        let w = SL2Element::weyl(m);
        assert_eq!(census.conjugate(a, &w).unwrap().id, a.id);
        let dict = build_oscillator_system(&weil, &census, OscillatorKind::Split, Tolerance::default()).unwrap();
        let f = verify_fourier_invariance(&dict, &weil, &census).unwrap();
        assert!(f.pass);
    }

    #[test]
    fn full_report_is_deterministic() {
        let (dict, weil, census) = osc(5, OscillatorKind::Both);
        let r1 = verify_dictionary(&dict, VerifyOptions::default(), Some((&weil, &census))).unwrap();
        let r2 = verify_dictionary(&dict, VerifyOptions::default(), Some((&weil, &census))).unwrap();
        assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r2).unwrap());
        assert!(r1.pass);
    }

    #[test]
    fn heisenberg_against_oscillator_bounds_fails_with_line_witness() {
        let m = modulus(5);
        let dict = heisenberg_system(m, Tolerance::default()).unwrap();
        let opts = VerifyOptions { bound_set: Some(BoundSet::Oscillator), ..Default::default() };
        let r = verify_dictionary(&dict, opts, None).unwrap();
        assert!(!r.pass);
        let w = r.autocorrelation.witness.unwrap();
        let line = Line::all(m)[line_of(&dict.signals[w.signal]).unwrap()];
        assert!(line.contains(m.elem(w.tau as i64), m.elem(w.w as i64)));
    }

    #[test]
    fn extended_pairs_respect_bound() {
        let (dict, _, _) = osc(5, OscillatorKind::NonSplit);
        let ext = ExtendedSystem::new(dict);
        let e = verify_extended(&ext, 20_000, 3, Tolerance::default());
        assert!(e.pass, "{}", e.max);
    }
}
