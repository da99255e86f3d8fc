use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use tnqc::circuit::{Architecture, ParamVector};
use tnqc::codec::{decode_amplitude, decode_qubit_binary, encode_qubit, softmax};
use tnqc::mnist::{parse_idx, serialize_idx};
use tnqc::statevector::Statevector;
use tnqc::xxz::{build_hamiltonian, energy_expectation, exact_ground_energy_by_sector, VqeProblem, XXZParams};

const DESCRIPTORS: [&str; 9] = [
    "ttn:simple-real",
    "ttn:simple-su2",
    "ttn:so4",
    "ttn:su4",
    "mera:simple-real",
    "mera:so4",
    "mera:su4",
    "checkerboard:su4:L1",
    "checkerboard:su4:L4",
];

fn features() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, 8)
}

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..TAU, n)
}

fn arch_and_params() -> impl Strategy<Value = (Architecture, ParamVector)> {
    params_for(DESCRIPTORS.len())
}

/// Tree classifiers only; the checkerboard ansatz has no readout register.
fn classifier_and_params() -> impl Strategy<Value = (Architecture, ParamVector)> {
    params_for(DESCRIPTORS.len() - 2)
}

fn params_for(first_n: usize) -> impl Strategy<Value = (Architecture, ParamVector)> {
    (0..first_n).prop_flat_map(|i| {
        let arch: Architecture = DESCRIPTORS[i].parse().unwrap();
        let n = arch.build().unwrap().n_params;
        angles(n).prop_map(move |p| (arch, ParamVector(p)))
    })
}

fn random_state() -> impl Strategy<Value = Statevector> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 256).prop_filter_map("zero vector", |v| {
        let norm: f64 = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| {
            Statevector::from_amplitudes(v.into_iter().map(|(a, b)| Complex64::new(a, b) / norm).collect()).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn circuits_preserve_norm((arch, params) in arch_and_params(), x in features()) {
        let out = arch.build().unwrap().run(&params, &encode_qubit(&x).unwrap()).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn circuits_preserve_inner_products((arch, params) in arch_and_params(), a in random_state(), b in random_state()) {
        let t = arch.build().unwrap();
        let before = a.inner(&b);
        let after = t.run(&params, &a).unwrap().inner(&t.run(&params, &b).unwrap());
        prop_assert!((before - after).norm() < 1e-10);
    }

    #[test]
    fn circuits_are_linear((arch, params) in arch_and_params(), a in random_state(), b in random_state(), w in 0.0..1.0f64) {
        let t = arch.build().unwrap();
        let mix: Vec<Complex64> = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x * w + y * (1.0 - w)).collect();
        let out_mix = t.run(&params, &Statevector::from_amplitudes(mix).unwrap()).unwrap();
        let (ua, ub) = (t.run(&params, &a).unwrap(), t.run(&params, &b).unwrap());
        for ((m, x), y) in out_mix.amplitudes().iter().zip(ua.amplitudes()).zip(ub.amplitudes()) {
            prop_assert!((m - (x * w + y * (1.0 - w))).norm() < 1e-10);
        }
    }

    #[test]
    fn decoders_yield_valid_outputs((arch, params) in classifier_and_params(), x in features(), n_classes in 2usize..=4) {
        let t = arch.build().unwrap();
        let out = t.run(&params, &encode_qubit(&x).unwrap()).unwrap();
        let bits = decode_qubit_binary(&out, &t.readout).unwrap();
        prop_assert!(bits.iter().all(|b| (-1e-12..=1.0 + 1e-12).contains(b)));
        let probs = decode_amplitude(&out, &t.readout, n_classes).unwrap();
        prop_assert_eq!(probs.len(), n_classes);
        prop_assert!(probs.iter().all(|p| *p > 0.0 && *p < 1.0));
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_is_shift_invariant(scores in prop::collection::vec(-50.0..50.0f64, 1..10), c in -100.0..100.0f64) {
        let shifted: Vec<f64> = scores.iter().map(|s| s + c).collect();
        for (a, b) in softmax(&scores).iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn encoding_is_a_product_state(x in features(), index in 0usize..256) {
        let s = encode_qubit(&x).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let mut want = Complex64::new(1.0, 0.0);
        for (q, xq) in x.iter().enumerate() {
            let (c, sn) = ((std::f64::consts::FRAC_PI_2 * xq).cos(), (std::f64::consts::FRAC_PI_2 * xq).sin());
            want *= if index & (1 << (7 - q)) == 0 { c } else { sn };
        }
        prop_assert!((s.amplitudes()[index] - want).norm() < 1e-12);
    }

    #[test]
    fn variational_bound(delta in -2.0..2.0f64, seed in any::<u64>()) {
        let problem = VqeProblem::new(delta, 2).unwrap();
        let n = problem.template.n_params;
        let params = ParamVector((0..n).map(|k| ((seed.wrapping_mul(k as u64 + 1) % 6283) as f64) * 1e-3).collect());
        prop_assert!(problem.energy(&params).unwrap() >= problem.exact_energy - 1e-9);
    }

    #[test]
    fn any_state_obeys_bound(state in random_state(), delta in -2.0..2.0f64) {
        let p = XXZParams::new(delta);
        let e = energy_expectation(&state, &build_hamiltonian(&p).unwrap()).unwrap();
        prop_assert!(e >= exact_ground_energy_by_sector(&p).unwrap() - 1e-9);
    }

    #[test]
    fn idx_round_trip(count in 0usize..5, rows in 1usize..4, cols in 1usize..4, seed in any::<u8>(), labels in prop::collection::vec(0u8..10, 0..20)) {
        let mut images = Vec::new();
        for v in [0x803u32, count as u32, rows as u32, cols as u32] {
            images.extend_from_slice(&v.to_be_bytes());
        }
        images.extend((0..count * rows * cols).map(|i| (i as u8).wrapping_mul(seed)));
        prop_assert_eq!(serialize_idx(&parse_idx(&images).unwrap()), images);
        let mut lab = vec![0, 0, 8, 1];
        lab.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        lab.extend_from_slice(&labels);
        prop_assert_eq!(serialize_idx(&parse_idx(&lab).unwrap()), lab);
    }
}
