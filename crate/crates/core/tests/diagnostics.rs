use jacobi_spectra::diagnostics::{liminf_estimate, s_sequence};
use jacobi_spectra::recurrence::EigvecInit;
use jacobi_spectra::sequences::catalog::from_text;
use jacobi_spectra::spectra::{eigenvalues, truncate};
use jacobi_spectra::transforms::{bd_route, bd_to_jacobi, flip, BirthDeathRates};
use jacobi_spectra::WeightSequence;

#[test]
fn paired_linear_loses_positivity_at_zero() {
    let seq = from_text("paired:eps=1,inner=pow,alpha=1").unwrap();
    let alpha = WeightSequence::ones();
    let init = EigvecInit::polynomial(&seq, 0.0).unwrap();
    let trace = s_sequence(&seq, &alpha, 0.0, init, 20_000).unwrap();
    let early = liminf_estimate(&trace, 100..1000).unwrap();
    let late = liminf_estimate(&trace, 10_000..20_001).unwrap();
    let (early, late) = (early.min_raw.unwrap(), late.min_raw.unwrap());
    assert!(late > 0.0 && late < 2e-4);
    assert!(early / late > 10.0);
}

#[test]
fn pow_half_keeps_positivity() {
    let seq = from_text("pow:alpha=0.5").unwrap();
    let alpha = WeightSequence::matching(&seq);
    let init = EigvecInit::polynomial(&seq, 1.0).unwrap();
    let trace = s_sequence(&seq, &alpha, 1.0, init, 10_000).unwrap();
    let est = liminf_estimate(&trace, 1000..10_001).unwrap();
    assert!(est.min_normalized > 0.5);
    assert!(est.sum_f_minus < 1e-3);
}

#[test]
fn single_index_window() {
    let seq = from_text("const").unwrap();
    let alpha = WeightSequence::ones();
    let trace = s_sequence(&seq, &alpha, 0.5, EigvecInit::new(1.0, 0.0).unwrap(), 50).unwrap();
    let est = liminf_estimate(&trace, 7..8).unwrap();
    assert_eq!(est.min_normalized, trace.row(7).unwrap().normalized());
}

#[test]
fn birth_death_route_matches_flipped_generator() {
    let rates = BirthDeathRates::parse("lam=linear,mu=linear").unwrap();
    let (cbar, _) = bd_to_jacobi(&rates);
    let block = bd_route(&rates).unwrap().block().unwrap();
    let n = 100;
    let direct = eigenvalues(&truncate(&flip(&cbar), n).unwrap(), 1e-10).unwrap();
    let routed = eigenvalues(&truncate(&block, n).unwrap(), 1e-10).unwrap();
    for (x, y) in direct.eigenvalues.iter().zip(&routed.eigenvalues) {
        assert!((x - y).abs() < 1e-8 * x.abs().max(1.0));
    }
    assert!(direct.eigenvalues[0] > 0.0);
}
