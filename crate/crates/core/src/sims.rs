//! Seeded radar and CDMA simulations driven by matrix coefficients.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::heisenberg::{apply_pi, CoefficientSurface, HeisenbergElement};
use crate::signal::{inner, Signal, SignalDictionary};

/// Magnitudes closer than this make a radar peak ambiguous.
pub const PEAK_SEPARATION_TOLERANCE: f64 = 1e-6;

/// A shift `(τ, w)` of the plane `V`, i.e. a Heisenberg element with `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shift {
    pub tau: u64,
    pub w: u64,
}

impl Shift {
    pub fn new(tau: u64, w: u64) -> Self {
        Shift { tau, w }
    }

    pub fn element(self, m: PrimeModulus) -> HeisenbergElement {
        HeisenbergElement::from_ints(m, self.tau as i64, self.w as i64, 0)
    }

    pub fn inverse(self, m: PrimeModulus) -> Shift {
        let p = m.p();
        Shift { tau: (p - self.tau % p) % p, w: (p - self.w % p) % p }
    }

    pub fn all(m: PrimeModulus) -> impl Iterator<Item = Shift> {
        let p = m.p();
        (0..p).flat_map(move |tau| (0..p).map(move |w| Shift { tau, w }))
    }
}

/// Adds complex Gaussian noise with `E|n(t)|² = std²` per sample.
pub fn add_noise(v: &mut [Complex64], std: f64, rng: &mut impl Rng) {
    if std <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, std / std::f64::consts::SQRT_2).expect("finite std");
    for x in v {
        *x += Complex64::new(normal.sample(rng), normal.sample(rng));
    }
}

#[derive(Debug, Clone)]
pub struct RadarScenario {
    pub probe: Signal,
    pub true_shift: HeisenbergElement,
    /// Standard deviation of additive complex Gaussian noise; 0 disables it.
    pub noise: f64,
    pub seed: u64,
}

/// `e = π(h₀) φ`, plus noise when configured.
pub fn radar_echo(sc: &RadarScenario) -> Signal {
    let mut echo = apply_pi(&sc.true_shift, sc.probe.coeffs());
    add_noise(&mut echo, sc.noise, &mut ChaCha8Rng::seed_from_u64(sc.seed));
    Signal::new(echo, sc.probe.modulus(), sc.probe.provenance().clone()).expect("length preserved")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarDetection {
    /// Estimate of `h₀` projected to `V`.
    pub estimate: Shift,
    pub peak: f64,
    pub runner_up: f64,
    pub runner_up_at: Shift,
}

impl RadarDetection {
    pub fn separation(&self) -> f64 {
        self.peak - self.runner_up
    }
}

fn top_two(mags: &[f64], p: usize) -> ((f64, usize), (f64, usize)) {
    let mut first = (f64::NEG_INFINITY, 0);
    let mut second = (f64::NEG_INFINITY, 0);
    for (i, &v) in mags.iter().enumerate() {
        if v > first.0 {
            second = first;
            first = (v, i);
        } else if v > second.0 {
            second = (v, i);
        }
    }
    debug_assert!(mags.len() == p * p);
    (first, second)
}

fn cell(i: usize, p: usize) -> Shift {
    Shift { tau: (i / p) as u64, w: (i % p) as u64 }
}

/// Locates the peak of `|m_{probe,echo}|` on `V`; the estimate of `h₀` is the
/// inverse of the peak location. The central coordinate acts by a phase and
/// is not recoverable from magnitudes.
pub fn radar_detect_with(surface: &mut CoefficientSurface, probe: &Signal, echo: &Signal) -> Result<RadarDetection> {
    let m = probe.modulus();
    let p = m.size();
    let mut mags = vec![0.0; p * p];
    surface.magnitudes(probe.coeffs(), echo.coeffs(), &mut mags);
    let (first, second) = top_two(&mags, p);
    let (at1, at2) = (cell(first.1, p), cell(second.1, p));
    if first.0 - second.0 < PEAK_SEPARATION_TOLERANCE {
        return Err(Error::AmbiguousPeak {
            first: first.0,
            first_at: (at1.tau, at1.w),
            second: second.0,
            second_at: (at2.tau, at2.w),
        });
    }
    Ok(RadarDetection { estimate: at1.inverse(m), peak: first.0, runner_up: second.0, runner_up_at: at2.inverse(m) })
}

pub fn radar_detect(probe: &Signal, echo: &Signal) -> Result<RadarDetection> {
    radar_detect_with(&mut CoefficientSurface::new(probe.modulus()), probe, echo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSummary {
    pub probes: usize,
    pub trials: usize,
    pub recovered: usize,
    pub ambiguous: usize,
    pub min_separation: f64,
    /// First failing `(probe, true shift)`, if any.
    pub first_failure: Option<(usize, Shift)>,
}

/// Runs every shift of `V` against every listed probe of `dict`.
pub fn radar_exhaustive(dict: &SignalDictionary, probes: &[usize], noise: f64, seed: u64) -> RadarSummary {
    let m = dict.modulus;
    struct Tally {
        recovered: usize,
        ambiguous: usize,
        separation: f64,
        failure: Option<(usize, Shift)>,
    }
    let per_probe: Vec<Tally> = probes
        .par_iter()
        .map_init(
            || CoefficientSurface::new(m),
            |surface, &i| {
                let probe = &dict.signals[i];
                let (mut ok, mut amb, mut sep, mut fail) = (0, 0, f64::INFINITY, None);
                for (k, shift) in Shift::all(m).enumerate() {
                    let sc = RadarScenario {
                        probe: probe.clone(),
                        true_shift: shift.element(m),
                        noise,
                        seed: seed.wrapping_add((i * m.size() * m.size() + k) as u64),
                    };
                    let echo = radar_echo(&sc);
                    match radar_detect_with(surface, probe, &echo) {
                        Ok(d) if d.estimate == shift => {
                            ok += 1;
                            sep = sep.min(d.separation());
                        }
                        Ok(d) => {
                            sep = sep.min(d.separation());
                            fail.get_or_insert((i, shift));
                        }
                        Err(_) => {
                            amb += 1;
                            sep = 0.0;
                            fail.get_or_insert((i, shift));
                        }
                    }
                }
                Tally { recovered: ok, ambiguous: amb, separation: sep, failure: fail }
            },
        )
        .collect();
    RadarSummary {
        probes: probes.len(),
        trials: probes.len() * m.size() * m.size(),
        recovered: per_probe.iter().map(|r| r.recovered).sum(),
        ambiguous: per_probe.iter().map(|r| r.ambiguous).sum(),
        min_separation: per_probe.iter().map(|r| r.separation).fold(f64::INFINITY, f64::min),
        first_failure: per_probe.iter().find_map(|r| r.failure),
    }
}

/// The `N`-th root of unity `e^{2πik/N}`.
pub fn root(k: u32, n: u32) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * f64::from(k) / f64::from(n))
}

/// Half the chordal distance between adjacent `N`-th roots of unity.
pub fn decode_threshold(n: u32) -> f64 {
    (std::f64::consts::PI / f64::from(n)).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdmaUser {
    /// Index into the dictionary.
    pub signal: usize,
    /// The bit is `e^{2πi·bit/N}`.
    pub bit: u32,
    pub distortion: Shift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdmaScenario {
    pub users: Vec<CdmaUser>,
    /// Root-of-unity order of the bit alphabet.
    pub order: u32,
    pub noise: f64,
    pub seed: u64,
}

impl CdmaScenario {
    pub fn validate(&self, dict: &SignalDictionary) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidConfig("root order must be at least 2".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for u in &self.users {
            if u.signal >= dict.len() {
                return Err(Error::InvalidConfig(format!("signal {} out of range", u.signal)));
            }
            if u.bit >= self.order {
                return Err(Error::InvalidConfig(format!("bit {} not below order {}", u.bit, self.order)));
            }
            if !seen.insert(u.signal) {
                return Err(Error::InvalidConfig(format!("signal {} used by two users", u.signal)));
            }
        }
        Ok(())
    }
}

/// `u = Σ b_i π(h_i) φ_i` plus noise. Distinct signal ids are not enforced
/// here so that colliding users can be simulated.
pub fn cdma_transmit(dict: &SignalDictionary, sc: &CdmaScenario) -> Signal {
    let m = dict.modulus;
    let mut u = vec![Complex64::new(0.0, 0.0); m.size()];
    for user in &sc.users {
        let b = root(user.bit, sc.order);
        let x = apply_pi(&user.distortion.element(m), dict.signals[user.signal].coeffs());
        for (acc, v) in u.iter_mut().zip(x) {
            *acc += b * v;
        }
    }
    add_noise(&mut u, sc.noise, &mut ChaCha8Rng::seed_from_u64(sc.seed));
    Signal::new(u, m, crate::signal::Provenance::External { index: 0 }).expect("length p")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeSearch {
    KnownShift(Shift),
    FullSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    pub bit: u32,
    /// `|b̂ − b_clean|` before rounding, where `b̂ = conj(m_{φ,u}(h⁻¹))`.
    pub interference: f64,
    pub shift: Shift,
}

/// Decodes without enforcing the margin: the estimate is rounded to the
/// nearest `N`-th root whatever the interference.
pub fn cdma_estimate(u: &Signal, phi: &Signal, search: DecodeSearch, order: u32) -> Decoded {
    let m = u.modulus();
    let shift = match search {
        DecodeSearch::KnownShift(h) => h,
        DecodeSearch::FullSweep => {
            let p = m.size();
            let mut mags = vec![0.0; p * p];
            CoefficientSurface::new(m).magnitudes(phi.coeffs(), u.coeffs(), &mut mags);
            cell(top_two(&mags, p).0 .1, p).inverse(m)
        }
    };
    // ⟨φ, π(h⁻¹) b π(h) φ⟩ = conj(b)
    let coefficient = inner(phi.coeffs(), &apply_pi(&shift.inverse(m).element(m), u.coeffs()));
    let estimate = coefficient.conj();
    let n = f64::from(order);
    let k = (estimate.arg() / std::f64::consts::TAU * n).round().rem_euclid(n) as u32;
    Decoded { bit: k, interference: (estimate - root(k, order)).norm(), shift }
}

/// Like [`cdma_estimate`], but fails when the interference reaches the
/// decision threshold.
pub fn cdma_decode(u: &Signal, phi: &Signal, search: DecodeSearch, order: u32) -> Result<Decoded> {
    let d = cdma_estimate(u, phi, search, order);
    let threshold = decode_threshold(order);
    if d.interference >= threshold {
        return Err(Error::DecodeMarginBelowThreshold { interference: d.interference, threshold });
    }
    Ok(d)
}

/// Which distortions the sweep draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistortionModel {
    Synchronous,
    Asynchronous,
    PhaseShift,
    Combined,
}

impl DistortionModel {
    pub fn draw(self, m: PrimeModulus, rng: &mut impl Rng) -> Shift {
        let p = m.p();
        let mut r = || rng.random_range(0..p);
        match self {
            DistortionModel::Synchronous => Shift::new(0, 0),
            DistortionModel::Asynchronous => Shift::new(r(), 0),
            DistortionModel::PhaseShift => Shift::new(0, r()),
            DistortionModel::Combined => {
                let tau = r();
                Shift::new(tau, r())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub user_counts: Vec<usize>,
    pub trials: usize,
    pub order: u32,
    pub model: DistortionModel,
    pub noise: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub users: usize,
    pub trials: usize,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    /// Mean of `threshold − interference` over all decoded bits.
    pub mean_margin: f64,
    pub max_interference: f64,
}

/// Scenario of trial `trial` with `k` users. Trials use independent ChaCha
/// streams of `seed`, and within a trial the first `k` users of the largest
/// scenario are reused so the rows are nested.
pub fn sweep_scenario(
    dict: &SignalDictionary,
    cfg: &SweepConfig,
    k: usize,
    trial: u64,
) -> Result<CdmaScenario> {
    let max_k = cfg.user_counts.iter().copied().max().unwrap_or(0).max(k);
    if max_k > dict.len() {
        return Err(Error::InvalidConfig(format!("{max_k} users need {max_k} distinct signals, dictionary has {}", dict.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let signals = sample(&mut rng, dict.len(), max_k).into_vec();
    let users = signals
        .into_iter()
        .map(|signal| {
            let bit = rng.random_range(0..cfg.order);
            let distortion = cfg.model.draw(dict.modulus, &mut rng);
            CdmaUser { signal, bit, distortion }
        })
        .take(k)
        .collect();
    Ok(CdmaScenario { users, order: cfg.order, noise: cfg.noise, seed: rng.random() })
}

/// Known-shift bit error rate per user count.
pub fn cdma_sweep(dict: &SignalDictionary, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let threshold = decode_threshold(cfg.order);
    cfg.user_counts
        .iter()
        .map(|&k| {
            let per_trial: Vec<(u64, u64, f64, f64)> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|trial| {
                    let sc = sweep_scenario(dict, cfg, k, trial)?;
                    let u = cdma_transmit(dict, &sc);
                    let mut out = (0, 0, 0.0, 0.0f64);
                    for user in &sc.users {
                        let d = cdma_estimate(
                            &u,
                            &dict.signals[user.signal],
                            DecodeSearch::KnownShift(user.distortion),
                            cfg.order,
                        );
                        out.0 += 1;
                        out.1 += u64::from(d.bit != user.bit);
                        out.2 += threshold - d.interference;
                        out.3 = out.3.max(d.interference);
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            let bits: u64 = per_trial.iter().map(|t| t.0).sum();
            let errors: u64 = per_trial.iter().map(|t| t.1).sum();
            let margin: f64 = per_trial.iter().map(|t| t.2).sum();
            Ok(SweepRow {
                users: k,
                trials: cfg.trials,
                bits,
                errors,
                ber: if bits == 0 { 0.0 } else { errors as f64 / bits as f64 },
                mean_margin: if bits == 0 { 0.0 } else { margin / bits as f64 },
                max_interference: per_trial.iter().map(|t| t.3).fold(0.0, f64::max),
            })
        })
        .collect()
}
