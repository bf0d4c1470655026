use super::*;
use crate::fields::{orthonormalize, Grid};
use crate::generate::{gaussian, hermite_family, neumann_mode_ensemble};

fn line(n: usize, lo: f64, hi: f64) -> Grid {
    Grid::new(1, &[(lo, hi)], &[n]).unwrap()
}

#[test]
fn ground_state_saturates_exclusion() {
    let g = Grid::new(2, &[(0.0, 1.0)], &[24]).unwrap();
    let ball = Ball::new(&g, g.index_of(&[12, 12]).unwrap(), 14).unwrap();
    let e = neumann_mode_ensemble(&ball, &g, 1).unwrap();
    let ex = verify_exclusion(&e, &ball, &EigenConfig::default()).unwrap();
    assert!(ex.lhs.abs() < 1e-9 * ex.gap, "{}", ex.lhs);
    assert!(ex.rhs.abs() < 1e-9 * ex.gap);
    assert!(ex.holds);
}

#[test]
fn two_lowest_modes_saturate_exclusion() {
    for g in [line(40, 0.0, 1.0), Grid::new(2, &[(0.0, 1.0), (0.0, 1.5)], &[20, 30]).unwrap()] {
        let center = g.cell_count() / 2 + 3;
        let ball = Ball::new(&g, center, 11).unwrap();
        let e = neumann_mode_ensemble(&ball, &g, 2).unwrap();
        let ex = verify_exclusion(&e, &ball, &EigenConfig::default()).unwrap();
        assert!((ex.mass - 2.0).abs() < 1e-12);
        assert!((ex.lhs - ex.gap).abs() <= 1e-8 * ex.gap, "{} vs {}", ex.lhs, ex.gap);
        assert!((ex.rhs - ex.gap).abs() <= 1e-8 * ex.gap);
        assert!(ex.holds);
    }
}

#[test]
fn single_cell_ball_has_no_gap() {
    let g = line(10, 0.0, 1.0);
    let e = Ensemble::projector(alloc::vec![gaussian(&g, &[0.5], 0.2).unwrap()]).unwrap();
    let ball = Ball::new(&g, 4, 1).unwrap();
    assert_eq!(verify_exclusion(&e, &ball, &EigenConfig::default()), Err(Error::GapUndefined));
}

#[test]
fn ball_lemma_on_two_neumann_modes() {
    let g = Grid::new(2, &[(0.0, 1.0)], &[24]).unwrap();
    let ball = Ball::new(&g, g.index_of(&[10, 13]).unwrap(), 13).unwrap();
    let e = neumann_mode_ensemble(&ball, &g, 2).unwrap();
    let r = verify_ball_lemma(&e, &ball, &CertificateConfig::default()).unwrap();
    assert!(r.verdict);
    assert!(r.ratio > 0.0 && r.epsilon > 0.0);
    assert!(r.combination_holds);
    assert!(r.local_kinetic >= r.a_priori_constant * r.local_lhs_lemma);
    // the ε choice zeroes the volume bracket
    let bracket = r.gap * (r.mass - 1.0)
        - r.epsilon * r.uncertainty.fitted_constant * r.mass / pow_two_over_d(r.volume, 2);
    assert!(bracket.abs() <= 1e-9 * r.gap);
}

#[test]
fn ball_with_unit_mass_is_out_of_window() {
    let g = line(40, 0.0, 1.0);
    let ball = Ball::new(&g, 20, 9).unwrap();
    let e = neumann_mode_ensemble(&ball, &g, 1).unwrap();
    assert!(matches!(
        verify_ball_lemma(&e, &ball, &CertificateConfig::default()),
        Err(Error::MassOutOfWindow { .. })
    ));
}

#[test]
fn gaussian_pair_in_mass_two_ball() {
    let g = line(2000, -10.0, 10.0);
    let fam = hermite_family(&g, &[0.0], 1.0, 2).unwrap();
    let e = Ensemble::projector(fam).unwrap();
    let rho = crate::fields::density(&e);
    let choice = crate::covering::radius_for_mass(&rho, 1000, 1.9).unwrap();
    let cfg = CertificateConfig {
        target_mass: 1.9,
        window: Some(MassWindow { lo: 1.5, hi: 2.0 }),
        ..CertificateConfig::default()
    };
    let r = verify_ball_lemma(&e, &choice.ball, &cfg).unwrap();
    assert!(r.verdict, "{r:?}");
}

#[test]
fn gaussian_small_mass_constant() {
    let g = line(2000, -10.0, 10.0);
    let e = Ensemble::projector(alloc::vec![gaussian(&g, &[0.0], 1.0).unwrap()]).unwrap();
    let cert = build_certificate(&e, &CertificateConfig::default()).unwrap();
    assert_eq!(cert.mode, CertificateMode::SmallMass);
    assert!(cert.verdict);
    let exact = core::f64::consts::PI * libm::sqrt(3.0) / 2.0;
    assert!((cert.effective_constant / exact - 1.0).abs() < 5e-3, "{}", cert.effective_constant);
    assert!((cert.effective_constant - cert.direct_quotient).abs() < 1e-9 * exact);
}

#[test]
fn hermite_quartet_goes_through_covering() {
    let g = line(2000, -10.0, 10.0);
    let e = Ensemble::projector(hermite_family(&g, &[0.0], 1.0, 4).unwrap()).unwrap();
    let cert = build_certificate(&e, &CertificateConfig::default()).unwrap();
    assert_eq!(cert.mode, CertificateMode::Covering);
    assert_eq!(cert.covered, Some(true));
    assert!(cert.verdict, "{:?}", cert.chain);
    assert!(cert.multiplicity.unwrap() <= 2);
    assert!(cert.effective_constant > 0.0);
    assert!(cert.effective_constant <= cert.direct_quotient);
}

#[test]
fn separated_clusters_get_their_own_balls() {
    let g = line(3000, -30.0, 30.0);
    let mut raw = hermite_family(&g, &[-15.0], 1.0, 2).unwrap();
    raw.extend(hermite_family(&g, &[15.0], 1.0, 2).unwrap());
    let e = Ensemble::projector(orthonormalize(&raw).unwrap()).unwrap();
    let cert = build_certificate(&e, &CertificateConfig::default()).unwrap();
    assert_eq!(cert.mode, CertificateMode::Covering);
    assert!(cert.verdict);
    let centers: Vec<f64> = cert.ball_reports.iter().map(|r| r.center[0]).collect();
    assert!(centers.iter().any(|&x| x < 0.0) && centers.iter().any(|&x| x > 0.0), "{centers:?}");
}

#[test]
fn zero_density_is_rejected() {
    let g = line(50, 0.0, 1.0);
    let e = Ensemble::new(
        alloc::vec![0.0],
        alloc::vec![gaussian(&g, &[0.5], 0.1).unwrap()],
    )
    .unwrap();
    assert_eq!(build_certificate(&e, &CertificateConfig::default()), Err(Error::ZeroDensity));
}

#[test]
fn copies_collapse_by_n_to_the_minus_two_over_d() {
    let g = line(2000, -10.0, 10.0);
    let u = gaussian(&g, &[0.0], 1.0).unwrap();
    let single = normalized_family_bound(std::slice::from_ref(&u)).unwrap();
    assert_eq!(single.orthogonal_quotient, single.copies_quotient);
    let copies = normalized_family_bound(&alloc::vec![u; 4]).unwrap();
    let want = single.copies_quotient / 16.0;
    assert!((copies.copies_quotient - want).abs() <= 1e-10 * want);
}

#[test]
fn orthonormal_family_beats_copies() {
    let g = line(2000, -12.0, 12.0);
    let fam = hermite_family(&g, &[0.0], 1.0, 8).unwrap();
    let ratios: Vec<f64> =
        [2, 4, 8].iter().map(|&n| normalized_family_bound(&fam[..n]).unwrap().ratio).collect();
    assert!(ratios[1] > 4.0, "{ratios:?}");
    assert!(ratios.windows(2).all(|w| w[1] > 2.0 * w[0]));
}

#[test]
fn unnormalized_family_is_rejected() {
    let g = line(50, 0.0, 1.0);
    let f = gaussian(&g, &[0.5], 0.1).unwrap().scaled(crate::Complex64::new(2.0, 0.0));
    assert!(matches!(normalized_family_bound(&[f]), Err(Error::NotNormalized { index: 0, .. })));
    assert_eq!(normalized_family_bound(&[Field::zeros(g)]), Err(Error::ZeroField));
}
