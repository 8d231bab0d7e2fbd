//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::HashSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use osc_core::analysis::{
    verify_autocorrelation, verify_crosscorrelation, verify_crosscorrelation_filtered, verify_fourier_invariance,
    verify_line_pattern, verify_supremum_and_papr, BoundSet, Bounds, CrossOptions,
};
use osc_core::heisenberg::{heisenberg_system, pi, HeisenbergElement};
use osc_core::io;
use osc_core::oscillator::{build_oscillator_system, standard_basis_system, torus_eigenbasis, OscillatorKind};
use osc_core::sims::{cdma_sweep, radar_exhaustive, DistortionModel, SweepConfig};
use osc_core::tori::{standard_torus, TorusCensus, TorusKind};
use osc_core::weil::{SL2Element, WeilRepresentation};
use osc_core::{PrimeModulus, Provenance, SignalDictionary, Tolerance};

const TOL: f64 = 1e-9;

/// Achieved maxima at p: (max off-origin |A_φ|, max cross, max sup).
const LOCKED_MAXIMA: &[(u64, f64, f64, f64)] = &[
    (5, 0.7255282581475779, 0.9834053993554032, 0.85065080835204),
    (7, 0.7716898668470428, 0.97003018089341, 0.7426649470449823),
    (11, 0.5716952715441718, 0.9217578368363384, 0.6209599828456845),
    (13, 0.5774630357092819, 0.8648204934815021, 0.5525773391327005),
    (17, 0.5092404696363454, 0.8903882032022081, 0.49098497502550814),
    (23, 0.4239653854711979, 0.7595016371257205, 0.42632936390621234),
];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn modulus(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).unwrap()
}

fn oscillator(p: u64, kind: OscillatorKind) -> (SignalDictionary, WeilRepresentation, TorusCensus) {
    let m = modulus(p);
    let weil = WeilRepresentation::new(m);
    let census = TorusCensus::new(m).unwrap();
    let dict = build_oscillator_system(&weil, &census, kind, Tolerance(TOL)).unwrap();
    (dict, weil, census)
}

fn line_of(s: &osc_core::Signal) -> Option<usize> {
    match s.provenance() {
        Provenance::Line { line, .. } => Some(*line),
        _ => None,
    }
}

fn heisenberg_elements(m: PrimeModulus) -> Vec<HeisenbergElement> {
    let p = m.p() as i64;
    let mut out = Vec::new();
    for tau in 0..p {
        for w in 0..p {
            for z in 0..p {
                out.push(HeisenbergElement::from_ints(m, tau, w, z));
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [5u64, 7, 11, 13] {
        let m = modulus(p);
        let elements = heisenberg_elements(m);
        let ops: Vec<_> = elements.iter().map(pi).collect();
        let index = |h: &HeisenbergElement| {
            let p = m.size();
            (h.tau.index() * p + h.w.index()) * p + h.z.index()
        };
        let pairs: Vec<(usize, usize)> = if p <= 7 {
            (0..elements.len()).flat_map(|i| (0..elements.len()).map(move |j| (i, j))).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(p);
            (0..100_000).map(|_| (rng.random_range(0..elements.len()), rng.random_range(0..elements.len()))).collect()
        };
        let hom = pairs
            .iter()
            .map(|&(i, j)| {
                let prod = elements[i].mul(&elements[j]).unwrap();
                (&ops[i] * &ops[j]).distance(&ops[index(&prod)])
            })
            .fold(0.0, f64::max);

        let dict = heisenberg_system(m, Tolerance(TOL)).unwrap();
        let count_ok = dict.len() as u64 == p * (p + 1);
        let line = verify_line_pattern(&dict, Tolerance(TOL)).unwrap();
        let cross = verify_crosscorrelation_filtered(
            &dict,
            Bounds::new(m).one_over_sqrt_p,
            Tolerance(TOL),
            CrossOptions { pair_budget: u64::MAX, seed: 0 },
            |a, b| line_of(a) != line_of(b),
        );
        let sup = verify_supremum_and_papr(&dict, BoundSet::Heisenberg, Tolerance(TOL));
        let ok = hom < 1e-10 && count_ok && line.pass && cross.pass && sup.pass;
        pass &= ok;
        parts.push(format!(
            "p={p}: hom {hom:.1e}, #S_H {}, line dev {:.1e}, cross {:.6}/{:.6}, unimodular dev {:.3e}{}",
            dict.len(),
            line.max_deviation,
            cross.max,
            cross.bound,
            sup.unimodular_deviation,
            if ok { "" } else { " [violation]" }
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [5u64, 7] {
        let weil = WeilRepresentation::new(modulus(p));
        let worst = SL2Element::all(weil.modulus())
            .iter()
            .map(|g| weil.egorov_residual(g).unwrap())
            .fold(0.0, f64::max);
        pass &= worst < 1e-9;
        parts.push(format!("p={p} all g: egorov {worst:.1e}"));
    }
    for p in [11u64, 13, 17, 19, 23, 29, 31] {
        let m = modulus(p);
        let weil = WeilRepresentation::new(m);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + p);
        let mut egorov: f64 = 0.0;
        let mut hom: f64 = 0.0;
        for _ in 0..10_000 {
            let g = SL2Element::random(m, &mut rng);
            let h = SL2Element::random(m, &mut rng);
            let (rg, rh) = (weil.build(&g).unwrap(), weil.build(&h).unwrap());
            egorov = egorov.max(osc_core::weil::egorov_residual_of(&g, &rg));
            hom = hom.max((&rg * &rh).distance(&weil.build(&g.mul(&h)).unwrap()));
        }
        let projective = weil.calibration().projective;
        pass &= egorov < 1e-9 && hom < 1e-9 && !projective;
        parts.push(format!("p={p}: egorov {egorov:.1e}, hom {hom:.1e}{}", if projective { " (projective)" } else { "" }));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [5u64, 7, 11] {
        let m = modulus(p);
        let census = TorusCensus::new(m).unwrap();
        let group = SL2Element::all(m);
        let central: HashSet<SL2Element> = [SL2Element::identity(m), SL2Element::minus_identity(m)].into();
        let mut ok = true;
        for kind in [TorusKind::Split, TorusKind::NonSplit] {
            let tori = census.tori(kind);
            ok &= tori.len() == kind.expected_count(m);
            for t in tori {
                let g = t.generator;
                let mut brute: Vec<_> = group.iter().copied().filter(|x| x.mul(&g) == g.mul(x)).collect();
                brute.sort();
                ok &= brute == t.elements;
            }
        }
        let all: Vec<_> = census.split.iter().chain(&census.nonsplit).collect();
        for (i, a) in all.iter().enumerate() {
            let sa: HashSet<_> = a.elements.iter().copied().collect();
            for b in &all[i + 1..] {
                let inter: HashSet<_> = b.elements.iter().copied().filter(|x| sa.contains(x)).collect();
                ok &= inter == central;
            }
        }
        pass &= ok;
        parts.push(format!("p={p}: {} split, {} non-split{}", census.split.len(), census.nonsplit.len(), if ok { "" } else { " [mismatch]" }));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut achieved = Vec::new();
    for p in [5u64, 7, 11, 13, 17, 23] {
        let (dict, _, _) = oscillator(p, OscillatorKind::Both);
        let bounds = Bounds::new(dict.modulus);
        let auto = verify_autocorrelation(&dict, bounds.two_over_sqrt_p, Tolerance(TOL));
        let budget = if p <= 13 { u64::MAX } else { 10_000_000 };
        let cross = verify_crosscorrelation(
            &dict,
            bounds.four_over_sqrt_p,
            Tolerance(TOL),
            CrossOptions { pair_budget: budget, seed: 7 },
        );
        let sup = verify_supremum_and_papr(&dict, BoundSet::Oscillator, Tolerance(TOL));
        let coverage_ok = if p <= 13 { !cross.sampled } else { cross.cells_evaluated >= 10_000_000 };
        let lock_ok = LOCKED_MAXIMA.iter().find(|l| l.0 == p).is_none_or(|&(_, a, c, s)| {
            (a - auto.max_off_origin).abs() < 1e-9 && (c - cross.max).abs() < 1e-9 && (s - sup.max_sup).abs() < 1e-9
        });
        let ok = auto.pass && cross.pass && sup.pass && coverage_ok && lock_ok;
        pass &= ok;
        achieved.push((p, auto.max_off_origin, cross.max, sup.max_sup));
        parts.push(format!(
            "p={p} (N={}): auto {:.6}/{:.6}{} cross {:.6}/{:.6}{} ({} cells{}) sup {:.6}/{:.6}{}{}",
            dict.len(),
            auto.max_off_origin,
            bounds.two_over_sqrt_p,
            if auto.pass { "" } else { " [violation]" },
            cross.max,
            bounds.four_over_sqrt_p,
            if cross.pass { "" } else { " [violation]" },
            cross.cells_evaluated,
            if cross.sampled { ", sampled" } else { "" },
            sup.max_sup,
            bounds.two_over_sqrt_p,
            if sup.pass { "" } else { " [violation]" },
            if lock_ok { "" } else { " [regression]" },
        ));
    }
    if LOCKED_MAXIMA.len() != achieved.len() {
        eprintln!("achieved maxima: {achieved:?}");
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [5u64, 7, 11, 13] {
        let (dict, weil, census) = oscillator(p, OscillatorKind::Both);
        let f = verify_fourier_invariance(&dict, &weil, &census).unwrap();
        let eigen = f.fixed_torus_min_overlap;
        let ok = f.pass && f.signals_checked == dict.len() && eigen.is_some();
        pass &= ok;
        parts.push(format!(
            "p={p}: min overlap {:.12}, T_w eigen overlap {:.12}",
            f.min_overlap,
            eigen.unwrap_or(f64::NAN)
        ));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [5u64, 7, 11, 13] {
        let m = modulus(p);
        let weil = WeilRepresentation::new(m);
        let census = TorusCensus::new(m).unwrap();
        let a = census.split.iter().find(|t| t.elements == standard_torus(m)).unwrap();
        let basis: Vec<_> = torus_eigenbasis(&weil, a, Tolerance(TOL)).unwrap().entries.into_iter().map(|e| e.1).collect();
        let std = standard_basis_system(m);
        let n = basis.len();
        let mut ok = n == std.len();
        let mut worst_off: f64 = 0.0;
        let mut worst_on: f64 = 0.0;
        let mut used = HashSet::new();
        for b in &basis {
            let overlaps: Vec<f64> = std.iter().map(|s| b.inner(s).norm()).collect();
            let (j, &big) = overlaps.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap();
            ok &= used.insert(j);
            worst_on = worst_on.max(1.0 - big);
            worst_off = worst_off.max(overlaps.iter().enumerate().filter(|e| e.0 != j).map(|e| *e.1).fold(0.0, f64::max));
        }
        ok &= worst_on < 1e-8 && worst_off < 1e-8;
        pass &= ok;
        parts.push(format!("p={p}: {n} signals, 1-|peak| {worst_on:.1e}, off-peak {worst_off:.1e}"));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [5u64, 7, 11] {
        let (dict, _, _) = oscillator(p, OscillatorKind::NonSplit);
        let probes: Vec<usize> = (0..dict.len()).collect();
        let s = radar_exhaustive(&dict, &probes, 0.0, 0);
        let floor = 1.0 - 2.0 / (p as f64).sqrt();
        let ok = s.recovered == s.trials && s.min_separation >= floor;
        pass &= ok;
        parts.push(format!("p={p}: {}/{} recovered, separation {:.6} >= {floor:.6}", s.recovered, s.trials, s.min_separation));
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion_8() -> Outcome {
    let (dict, _, _) = oscillator(31, OscillatorKind::Both);
    let cfg = SweepConfig {
        user_counts: (1..=8).collect(),
        trials: 200,
        order: 2,
        model: DistortionModel::Combined,
        noise: 0.0,
        seed: 2024,
    };
    let rows = cdma_sweep(&dict, &cfg).unwrap();
    let k5 = rows.iter().find(|r| r.users == 5).unwrap();
    let monotone = rows.windows(2).all(|w| w[1].ber >= w[0].ber);
    let table: Vec<String> = rows.iter().map(|r| format!("k={} BER {:.5}", r.users, r.ber)).collect();
    Outcome {
        pass: k5.errors == 0 && monotone,
        detail: format!("p=31, 200 trials: {}; monotone {monotone}", table.join(", ")),
    }
}

fn run_osc(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_osc")).args(args).output().expect("run osc");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let mut same = true;
    let mut checked = 0;
    for (p, system) in [("7", "oscillator"), ("5", "heisenberg"), ("11", "nonsplit")] {
        for fmt in ["json", "bin"] {
            let out = path(&format!("{system}{p}.{fmt}"));
            let args = ["generate", "--p", p, "--system", system, "--format", fmt, "--out", &out, "--seed", "3"];
            let c1 = run_osc(&args).0;
            let ba = std::fs::read(&out).unwrap();
            let c2 = run_osc(&args).0;
            let bb = std::fs::read(&out).unwrap();
            let eq = if fmt == "json" {
                io::payload_bytes(&ba).unwrap() == io::payload_bytes(&bb).unwrap()
            } else {
                ba == bb
            };
            same &= c1 == 0 && c2 == 0 && eq;
            checked += 1;
        }
        let dict = path(&format!("{system}{p}.json"));
        let (_, r1) = run_osc(&["verify", &dict, "--seed", "5", "--pair-budget", "200000"]);
        let (_, r2) = run_osc(&["verify", &dict, "--seed", "5", "--pair-budget", "200000"]);
        same &= !r1.is_empty() && io::payload_bytes(&r1).unwrap() == io::payload_bytes(&r2).unwrap();
        checked += 1;
    }
    let scenario = path("cdma.json");
    std::fs::write(&scenario, r#"{"mode": "sweep", "p": 13, "user_counts": [1, 2, 3], "trials": 20}"#).unwrap();
    let (_, c1) = run_osc(&["cdma", &scenario, "--seed", "9"]);
    let (_, c2) = run_osc(&["cdma", &scenario, "--seed", "9"]);
    same &= !c1.is_empty() && io::payload_bytes(&c1).unwrap() == io::payload_bytes(&c2).unwrap();
    checked += 1;
    Outcome { pass: same, detail: format!("{checked} regenerate-and-diff comparisons, identical payloads: {same}") }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 Heisenberg exactness", criterion_1),
        ("2 Weil correctness", criterion_2),
        ("3 Torus census", criterion_3),
        ("4 Oscillator bounds", criterion_4),
        ("5 Fourier invariance", criterion_5),
        ("6 Structural recovery", criterion_6),
        ("7 Radar", criterion_7),
        ("8 CDMA", criterion_8),
        ("9 Reproducibility", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        println!(
            "criterion {name}: {} ({:.1}s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
        failures += usize::from(!o.pass);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
