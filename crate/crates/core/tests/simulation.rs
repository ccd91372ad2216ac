use cpda::analysis::{params_construction1, params_construction2, rate_from_array};
use cpda::construct::{
    construction1_variant, construction2, Construction1Params, Construction2Params, Variant,
};
use cpda::fixtures;
use cpda::model::PdaArray;
use cpda::sim::{
    decode_all, execute, file_bytes_for, place, plan_delivery, simulate, DemandVector, Library,
    SimulationConfig,
};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Regular arrays with `H <= 6` and their closed-form rate.
fn arrays() -> Vec<(String, PdaArray<u32>, BigRational)> {
    let mut out = Vec::new();
    for h in 3..=6 {
        for p in Construction1Params::all_for(h) {
            for v in [Variant::P, Variant::PPrime] {
                if p.is_regular(v) {
                    let rate = params_construction1(p.h, p.r, p.b, p.lambda, v)
                        .unwrap()
                        .rate;
                    out.push((
                        format!("{v} {p}"),
                        construction1_variant(&p, v).canonical_relabel(),
                        rate,
                    ));
                }
            }
        }
        for p in Construction2Params::all_for(h) {
            let rate = params_construction2(p.h, p.r, p.b, p.lambda).unwrap().rate;
            out.push((
                format!("c2 {p}"),
                construction2(&p).canonical_relabel(),
                rate,
            ));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_libraries_and_demands_decode(pick in any::<prop::sample::Index>(), seed in any::<u64>(), extra in 0usize..3, unit in 1usize..4) {
        let all = arrays();
        let (name, a, rate) = &all[pick.index(all.len())];
        let n_files = a.k() + extra;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let demands = DemandVector::random(a.k(), n_files, &mut rng);
        let report = simulate(a, &demands, SimulationConfig { n_files, unit_bytes: unit, seed }).unwrap();
        prop_assert!(report.decode_ok(), "{} {:?}", name, report.decode.first_failure);
        prop_assert!(report.rates.iter().all(|x| x == rate), "{}", name);
        prop_assert_eq!(&report.rates, &rate_from_array(a).unwrap());
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let a = fixtures::example1();
        let config = SimulationConfig { n_files: 4, unit_bytes: 2, seed };
        let demands = DemandVector::new(vec![1, 2, 3, 4, 1, 2, 3, 4, 1, 2], 4).unwrap();
        let x = simulate(&a, &demands, config).unwrap();
        let y = simulate(&a, &demands, config).unwrap();
        prop_assert_eq!(x.machine_lines(), y.machine_lines());
        prop_assert_eq!(x.decode.files, y.decode.files);
    }
}

#[test]
fn every_small_array_decodes_with_distinct_demands() {
    for (name, a, rate) in arrays() {
        let report = simulate(
            &a,
            &DemandVector::distinct(a.k()),
            SimulationConfig {
                n_files: a.k(),
                unit_bytes: 1,
                seed: 11,
            },
        )
        .unwrap();
        assert!(report.decode_ok(), "{name}");
        assert!(report.rates.iter().all(|x| *x == rate), "{name}");
    }
}

#[test]
fn users_receive_exactly_what_their_relays_carry() {
    let a = construction2(&Construction2Params::new(6, 3, 3, 2).unwrap()).canonical_relabel();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lib = Library::random(a.k(), file_bytes_for(&a, 2), &mut rng);
    let demands = DemandVector::random(a.k(), a.k(), &mut rng);
    let caches = place(&a, &lib).unwrap();
    let plan = plan_delivery(&a, &demands).unwrap();
    let exec = execute(&plan, &lib, a.col_labels()).unwrap();
    for (u, label) in a.col_labels().iter().enumerate() {
        let heard: u64 = label.iter().map(|h| exec.log.relay_bits(h)).sum();
        assert_eq!(exec.log.user_bits[u], heard);
        assert!(exec.received[u].keys().all(|&(_, h)| label.contains(h)));
    }
    let out = decode_all(&a, &demands, &caches, &exec.received, &lib).unwrap();
    assert!(out.success());
    for (u, file) in out.files.iter().enumerate() {
        assert_eq!(file.as_deref(), Some(lib.file(demands.as_slice()[u])));
    }
}
