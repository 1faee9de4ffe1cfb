use antifrag_wasm_demo::{correlation_rows, gain_curve_rows, ris_scaling_rows, DEMO_JSR_DB};

#[test]
fn gain_curve_is_flat_triples() {
    let rows = gain_curve_rows("DRFM", "spatial", 7.0, 3, 1).unwrap();
    assert_eq!(rows.len(), 3 * DEMO_JSR_DB.len());
    for (chunk, jsr) in rows.chunks(3).zip(DEMO_JSR_DB) {
        assert_eq!(chunk[0], jsr);
        assert!(chunk[1] > 0.0 && chunk[2] >= 0.0);
    }
    assert_eq!(rows, gain_curve_rows("DRFM", "spatial", 7.0, 3, 1).unwrap());
}

#[test]
fn bad_names_are_errors() {
    assert!(gain_curve_rows("XYZ", "spatial", 7.0, 3, 1).is_err());
    assert!(gain_curve_rows("PS", "sideways", 7.0, 3, 1).is_err());
    assert!(correlation_rows(0, 0.0, 1).is_err());
}

#[test]
fn correlation_peaks_at_the_delay() {
    let mags = correlation_rows(12, 0.0, 4).unwrap();
    assert_eq!(mags.len(), 25);
    let best = (1..mags.len()).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).unwrap();
    assert_eq!(best, 12);
}

#[test]
fn ris_power_grows_with_size() {
    let db = ris_scaling_rows(&[16, 64]).unwrap();
    // quadrupling the surface adds roughly 12 dB
    assert!((db[1] - db[0] - 12.0).abs() < 2.0, "{db:?}");
}
