use num_complex::Complex64;
use proptest::prelude::*;

use osc_core::heisenberg::{apply_pi, HeisenbergElement};
use osc_core::io;
use osc_core::signal::{inner, normalize_phase};
use osc_core::tori::{classify_element, ElementClass, TorusCensus};
use osc_core::weil::{decompose, SL2Element, WeilRepresentation};
use osc_core::{Fp, PrimeModulus, Provenance, Signal, SignalDictionary, SystemKind};

const PRIMES: &[u64] = &[3, 5, 7, 11, 13, 17, 19, 23];

fn prime() -> impl Strategy<Value = PrimeModulus> {
    prop::sample::select(PRIMES).prop_map(|p| PrimeModulus::new(p).unwrap())
}

fn elem(m: PrimeModulus) -> impl Strategy<Value = Fp> {
    (0..m.p() as i64).prop_map(move |v| m.elem(v))
}

fn heis(m: PrimeModulus) -> impl Strategy<Value = HeisenbergElement> {
    (elem(m), elem(m), elem(m)).prop_map(|(t, w, z)| HeisenbergElement::new(t, w, z).unwrap())
}

fn sl2(m: PrimeModulus) -> impl Strategy<Value = SL2Element> {
    any::<u64>().prop_map(move |seed| {
        use rand::SeedableRng;
        SL2Element::random(m, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    })
}

fn vector(m: PrimeModulus) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), m.size())
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
}

proptest! {
    #[test]
    fn field_axioms((m, a, b) in prime().prop_flat_map(|m| (Just(m), elem(m), elem(m)))) {
        prop_assert_eq!((a + b) - b, a);
        prop_assert_eq!(a * b, b * a);
        if !a.is_zero() {
            prop_assert_eq!(a * a.inv().unwrap(), m.one());
        }
        prop_assert_eq!(
            i16::from((a * b).quadratic_character()),
            i16::from(a.quadratic_character()) * i16::from(b.quadratic_character())
        );
        let lhs = (a + b).additive_character();
        let rhs = a.additive_character() * b.additive_character();
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert_eq!(m.half() + m.half(), m.one());
    }

    #[test]
    fn heisenberg_group_law((h1, h2, h3) in prime().prop_flat_map(|m| (heis(m), heis(m), heis(m)))) {
        let left = h1.mul(&h2).unwrap().mul(&h3).unwrap();
        let right = h1.mul(&h2.mul(&h3).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(h1.mul(&h1.inverse()).unwrap(), HeisenbergElement::identity(h1.modulus()));
    }

    #[test]
    fn pi_is_a_unitary_homomorphism(
        (h1, h2, v) in prime().prop_flat_map(|m| (heis(m), heis(m), vector(m)))
    ) {
        let composed = apply_pi(&h1, &apply_pi(&h2, &v));
        let direct = apply_pi(&h1.mul(&h2).unwrap(), &v);
        prop_assert!(close(&composed, &direct, 1e-10));
        let n0 = inner(&v, &v).re;
        let n1 = inner(&direct, &direct).re;
        prop_assert!((n0 - n1).abs() < 1e-10);
    }

    #[test]
    fn bruhat_round_trip(g in prime().prop_flat_map(sl2)) {
        prop_assert_eq!(decompose(&g).compose(g.modulus()), g);
    }

    #[test]
    fn egorov_and_homomorphism(
        (g, h, v) in prop::sample::select(&PRIMES[1..6])
            .prop_map(|p| PrimeModulus::new(p).unwrap())
            .prop_flat_map(|m| (sl2(m), sl2(m), vector(m)))
    ) {
        let weil = WeilRepresentation::new(g.modulus());
        prop_assert!(weil.egorov_residual(&g).unwrap() < 1e-9);
        let rg = weil.build(&g).unwrap();
        let rh = weil.build(&h).unwrap();
        let rgh = weil.build(&g.mul(&h)).unwrap();
        prop_assert!(close(&rg.apply(&rh.apply(&v)), &rgh.apply(&v), 1e-9));
        prop_assert!(rg.unitarity_residual() < 1e-9);
    }

    #[test]
    fn normalize_phase_is_idempotent(v in prime().prop_flat_map(vector)) {
        let mut a = v.clone();
        normalize_phase(&mut a, 1e-8);
        let mut b = a.clone();
        normalize_phase(&mut b, 1e-8);
        prop_assert!(close(&a, &b, 1e-12));
        if let Some(lead) = a.iter().find(|c| c.norm() > 1e-8) {
            prop_assert!(lead.im.abs() < 1e-12 && lead.re > 0.0);
        }
        // unit phase only
        prop_assert!((inner(&a, &v).norm() - inner(&v, &v).re).abs() < 1e-9);
    }

    #[test]
    fn binary_round_trip(
        (m, vs) in prime().prop_flat_map(|m| (Just(m), prop::collection::vec(vector(m), 0..6)))
    ) {
        let signals = vs
            .into_iter()
            .enumerate()
            .map(|(index, v)| Signal::new(v, m, Provenance::External { index }).unwrap())
            .collect();
        let dict = SignalDictionary::new(m, SystemKind::Standard, signals);
        let back = io::decode_binary(&io::encode_binary(&dict)).unwrap();
        prop_assert_eq!(back, dict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regular_elements_lie_in_one_torus((g, x) in prop::sample::select(&PRIMES[1..5])
        .prop_map(|p| PrimeModulus::new(p).unwrap())
        .prop_flat_map(|m| (sl2(m), sl2(m))))
    {
        let m = g.modulus();
        let census = TorusCensus::new(m).unwrap();
        match classify_element(&g) {
            ElementClass::SplitRegular | ElementClass::NonsplitRegular => {
                let t = census.torus_of(&g).unwrap();
                prop_assert!(t.contains(&g));
                let conj = census.conjugate(t, &x).unwrap();
                prop_assert_eq!(conj.kind, t.kind);
                prop_assert!(conj.contains(&x.mul(&g).mul(&x.inverse())));
            }
            _ => prop_assert!(census.torus_of(&g).is_none()),
        }
    }
}
