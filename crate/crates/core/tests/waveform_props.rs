use antifrag_core::waveform::{default_code_table, demodulate, modulate, rs_decode, rs_encode, ModFamily, ModScheme, ORDERS};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scheme() -> impl Strategy<Value = ModScheme> {
    (prop::sample::select(vec![ModFamily::Psk, ModFamily::Ask, ModFamily::Qam]), prop::sample::select(ORDERS.to_vec()))
        .prop_map(|(f, m)| ModScheme::new(f, m).unwrap())
}

proptest! {
    #[test]
    fn mapping_is_a_bijection(s in scheme(), symbols in 1usize..200, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits: Vec<u8> = (0..symbols * s.bits_per_symbol()).map(|_| rng.gen_range(0..2)).collect();
        prop_assert_eq!(demodulate(&modulate(&bits, &s).unwrap(), &s), bits);
    }

    #[test]
    fn ask_stays_in_the_right_half_plane(order in prop::sample::select(ORDERS.to_vec())) {
        let s = ModScheme::new(ModFamily::Ask, order).unwrap();
        prop_assert!(s.constellation().iter().all(|p| p.re > 0.0 && p.im == 0.0));
    }

    #[test]
    fn correctable_patterns_always_decode(idx in 0usize..5, seed in any::<u64>(), frac in 0.0..=1.0f64) {
        let code = default_code_table()[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<u8> = (0..code.k).map(|_| rng.gen()).collect();
        let mut block = rs_encode(&data, &code).unwrap();
        let w = (frac * code.t() as f64).round() as usize;
        for pos in sample(&mut rng, code.n, w) {
            block[pos] ^= rng.gen_range(1..=255u8);
        }
        let out = rs_decode(&block, &code).unwrap();
        prop_assert!(!out.failed);
        prop_assert_eq!(out.data, data);
    }
}

#[test]
fn constellations_have_unit_energy() {
    for f in [ModFamily::Psk, ModFamily::Ask, ModFamily::Qam] {
        for &m in &ORDERS {
            let c = ModScheme::new(f, m).unwrap().constellation();
            let e = c.iter().map(|p| p.norm_sqr()).sum::<f64>() / c.len() as f64;
            assert!((e - 1.0).abs() < 1e-12, "{f:?} {m}");
        }
    }
}
