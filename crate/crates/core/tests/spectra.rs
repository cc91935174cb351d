use jacobi_spectra::sequences::{instantiate, parse_family, SequencePair};
use jacobi_spectra::spectra::{density_report, eigenvalues, gauss_measure, sturm_count, truncate};

fn seq(text: &str) -> SequencePair {
    instantiate(&parse_family(text).unwrap()).unwrap()
}

#[test]
fn pow_half_fills_the_window() {
    let r = density_report(&seq("pow:alpha=0.5"), 2000, (-5.0, 5.0), 0.5).unwrap();
    assert_eq!(r.bins.len(), 20);
    assert_eq!(r.empty_bins().count(), 0, "{:?}", r.bins);
}

#[test]
fn chihara_is_positive_semidefinite() {
    let r = density_report(&seq("chihara"), 2000, (-2.0, -0.5), 0.5).unwrap();
    assert!(r.bins.iter().all(|b| b.count == 0));
    let t = truncate(&seq("chihara"), 2000).unwrap();
    assert_eq!(sturm_count(&t, -1e-6), 0);
    let s = eigenvalues(&t, t.default_tolerance()).unwrap();
    assert!(s.eigenvalues[0] > -1e-6);
}

#[test]
fn chihara_bins_cover_zero_to_eight() {
    let r = density_report(&seq("chihara"), 2000, (0.0, 8.0), 0.5).unwrap();
    assert_eq!(r.bins.len(), 16);
    assert_eq!(r.empty_bins().count(), 0, "{:?}", r.bins);
}

#[test]
fn shifted_gap_caution_fixture() {
    // the operator has no spectrum in (-1, 1); finite sections may still put
    // at most a few eigenvalues there
    let r = density_report(&seq("pow-shifted:alpha=0.5"), 1000, (-0.9, 0.9), 1.8).unwrap();
    assert!(r.bins[0].count <= 2, "{:?}", r.bins);
}

#[test]
fn gauss_first_moment() {
    for text in ["chihara", "pow:alpha=0.5", "factorial-staircase", "const"] {
        let t = truncate(&seq(text), 40).unwrap();
        let g = gauss_measure(&t).unwrap();
        let w = g.weights.unwrap();
        let m1: f64 = w.iter().zip(&g.eigenvalues).map(|(w, x)| w * x).sum();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-10, "{text}");
        assert!((m1 - t.diag()[0]).abs() < 1e-10 * t.scale(), "{text}: {m1}");
    }
}
