use antifrag_core::adaptation::{jsr_db, relay_snr, residual, select_code, throughput, antifragile_gain, DEFAULT_DELTA};
use antifrag_core::waveform::{default_code_table, ModFamily, ModScheme, RsCode, ORDERS};
use proptest::prelude::*;

fn scheme() -> impl Strategy<Value = ModScheme> {
    (prop::sample::select(vec![ModFamily::Psk, ModFamily::Ask, ModFamily::Qam]), prop::sample::select(ORDERS.to_vec()))
        .prop_map(|(f, m)| ModScheme::new(f, m).unwrap())
}

proptest! {
    #[test]
    fn relay_is_bounded_by_the_weaker_hop(e in 0.0..1e4f64, j in 0.0..1e4f64) {
        prop_assert!(relay_snr(e, j) <= e.min(j) + 1e-12);
        prop_assert!(relay_snr(e, j) >= 0.0);
    }

    #[test]
    fn residual_orders(k in 1usize..250, ser in 0.0..0.5f64, d_ser in 1e-6..0.1f64) {
        let c = RsCode::new(255, k).unwrap();
        prop_assert!(residual(&c, ser + d_ser) > residual(&c, ser));
        if k >= 3 {
            let stronger = RsCode::new(255, k - 2).unwrap();
            prop_assert!(residual(&stronger, ser) < residual(&c, ser));
        }
    }

    #[test]
    fn throughput_scales_with_fraction_rate_and_order(s in scheme(), rate in 0.05..1.0f64, frac in 0.01..=1.0f64, b in 0.1..10.0f64) {
        let full = throughput(b, rate, &s, 1.0).unwrap();
        prop_assert!((throughput(b, rate, &s, frac).unwrap() - full * frac).abs() <= 1e-12 * full);
        prop_assert!(throughput(b, rate * 0.9, &s, 1.0).unwrap() < full);
        if s.order > 2 {
            let lower = ModScheme::new(s.family, s.order / 2).unwrap();
            prop_assert!(throughput(b, rate, &lower, 1.0).unwrap() < full);
        }
    }

    #[test]
    fn jsr_shifts_by_the_power_ratio(p_j in 1e-6..1e3f64, p_l in 1e-6..1e3f64, x in 1e-3..1e3f64) {
        let shift = jsr_db(p_j * x, p_l).unwrap() - jsr_db(p_j, p_l).unwrap();
        prop_assert!((shift - 10.0 * x.log10()).abs() < 1e-9);
    }

    #[test]
    fn gain_exceeds_one_iff_jammed_is_larger(t_j in 0.0..10.0f64, t_l in 1e-3..10.0f64) {
        prop_assert_eq!(antifragile_gain(t_j, t_l).unwrap() > 1.0, t_j > t_l);
    }

    #[test]
    fn chosen_rate_never_drops_with_snr(s in scheme(), lo in -5.0..35.0f64, step in 0.0..10.0f64) {
        let table = default_code_table();
        let rate = |db: f64| {
            let d = select_code(10f64.powf(db / 10.0), s, DEFAULT_DELTA, &table).unwrap();
            if d.compliant { d.code.rate() } else { 0.0 }
        };
        prop_assert!(rate(lo + step) >= rate(lo));
    }
}

#[test]
fn accepted_decisions_clear_delta() {
    let table = default_code_table();
    for db in -5..=35 {
        let d = select_code(10f64.powf(db as f64 / 10.0), ModScheme::bpsk(), DEFAULT_DELTA, &table).unwrap();
        if d.compliant {
            assert!(d.residual <= d.delta && d.delta < 0.0);
        }
    }
}
