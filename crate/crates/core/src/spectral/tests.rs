use core::f64::consts::PI;

use super::*;
use crate::fields::orthonormalize;

/// Bessel `J_n` by its power series; accurate to ~1e-15 for `x < 5`.
fn bessel_j(n: u32, x: f64) -> f64 {
    let mut term = libm::pow(x / 2.0, n as f64);
    for k in 1..=n {
        term /= k as f64;
    }
    let mut sum = term;
    for k in 1..60 {
        term *= -(x * x / 4.0) / (k as f64 * (k + n) as f64);
        sum += term;
    }
    sum
}

/// First positive zero of `J_1'(x) = J_0(x) − J_1(x)/x`, by bisection.
fn first_zero_of_j1_prime() -> f64 {
    let f = |x: f64| bessel_j(0, x) - bessel_j(1, x) / x;
    let (mut a, mut b) = (1.0, 2.5);
    assert!(f(a) > 0.0 && f(b) < 0.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Exact Neumann path-graph spectrum: `(4/h²) sin²(πk / 2m)`.
fn path_eigenvalue(m: usize, h: f64, k: usize) -> f64 {
    let s = libm::sin(PI * k as f64 / (2.0 * m as f64));
    4.0 * s * s / (h * h)
}

fn interval_ball(length: f64, h: f64) -> (Grid, Ball) {
    let n = libm::round(2.0 * length / h) as usize;
    let g = Grid::new(1, &[(-length, length)], &[n]).unwrap();
    let b = Ball::with_radius(&g, n / 2, length / 2.0).unwrap();
    (g, b)
}

#[test]
fn two_cell_mask_spectrum() {
    let g = Grid::new(1, &[(0.0, 1.0)], &[8]).unwrap();
    let b = Ball::new(&g, 4, 2).unwrap();
    assert_eq!(b.cell_count(&g), 2);
    let r = neumann_gap(&b, &g, &EigenConfig::default()).unwrap();
    let h = 1.0 / 8.0;
    assert!((r.gap - 2.0 / (h * h)).abs() < 1e-9);
}

#[test]
fn single_cell_has_no_gap() {
    let g = Grid::new(2, &[(0.0, 1.0)], &[8]).unwrap();
    let b = Ball::new(&g, 20, 1).unwrap();
    assert_eq!(b.cell_count(&g), 1);
    assert_eq!(neumann_gap(&b, &g, &EigenConfig::default()), Err(Error::GapUndefined));
}

#[test]
fn interval_gaps_match_closed_form() {
    for length in [1.0, 2.0] {
        let h = 1.0 / 512.0;
        let (g, b) = interval_ball(length, h);
        let r = neumann_gap(&b, &g, &EigenConfig::default()).unwrap();
        let m = r.cells;
        assert_eq!(m, libm::round(length / h) as usize);
        assert_eq!(r.method, EigenMethod::Lanczos);
        // discrete closed form to solver precision, continuum within 1%
        let exact = path_eigenvalue(m, h, 1);
        assert!((r.gap / exact - 1.0).abs() < 1e-7, "{} vs {}", r.gap, exact);
        let continuum = (PI / length) * (PI / length);
        assert!((r.gap / continuum - 1.0).abs() < 0.01);
    }
}

#[test]
fn dense_and_lanczos_agree() {
    let g = Grid::new(2, &[(-1.0, 1.0)], &[41]).unwrap();
    let b = Ball::around(&g, &[0.1, -0.05], 0.45).unwrap();
    let dense = neumann_gap(&b, &g, &EigenConfig { dense_limit: usize::MAX, ..Default::default() }).unwrap();
    let lanczos = neumann_gap(&b, &g, &EigenConfig { dense_limit: 0, ..Default::default() }).unwrap();
    assert_eq!(dense.method, EigenMethod::Dense);
    assert_eq!(lanczos.method, EigenMethod::Lanczos);
    assert!((dense.gap / lanczos.gap - 1.0).abs() < 1e-8, "{} {}", dense.gap, lanczos.gap);
}

#[test]
fn rectangle_gap_is_smallest_path_gap() {
    let g = Grid::new(2, &[(0.0, 3.0), (0.0, 2.0)], &[60, 50]).unwrap();
    let op = NeumannOperator::new(&g, Mask::full(&g)).unwrap();
    let s = operator_gap(&g, &op, &EigenConfig::default()).unwrap();
    let expect = path_eigenvalue(60, 0.05, 1).min(path_eigenvalue(50, 0.04, 1));
    assert!((s.gap / expect - 1.0).abs() < 1e-8);
}

#[test]
fn unit_disk_gap_matches_bessel_zero() {
    let j = first_zero_of_j1_prime();
    assert!((j - 1.841_183_781).abs() < 1e-8);
    let g = Grid::new(2, &[(-1.25, 1.25)], &[160]).unwrap();
    // 160 cells over 2.5 gives h = 1/64; the center cell sits at ±h/2
    let b = Ball::around(&g, &[0.0, 0.0], 1.0).unwrap();
    let r = neumann_gap(&b, &g, &EigenConfig::default()).unwrap();
    assert!((r.gap / (j * j) - 1.0).abs() < 0.03, "{} vs {}", r.gap, j * j);
}

#[test]
fn gap_scales_with_dilation() {
    let g = Grid::new(2, &[(-1.0, 1.0)], &[48]).unwrap();
    let b = Ball::around(&g, &[0.0, 0.0], 0.5).unwrap();
    let base = neumann_gap(&b, &g, &EigenConfig::default()).unwrap();
    for scale in [0.5, 2.0, 3.0] {
        let gs = g.dilate(1.0 / scale);
        let bs = Ball::new(&gs, b.center(), b.half_steps()).unwrap();
        let r = neumann_gap(&bs, &gs, &EigenConfig::default()).unwrap();
        assert!((r.gap * scale * scale / base.gap - 1.0).abs() < 1e-8);
        assert!((r.gap_times_volume_pow / base.gap_times_volume_pow - 1.0).abs() < 1e-8);
    }
}

#[test]
fn lowest_modes_are_orthonormal_and_start_constant() {
    let g = Grid::new(2, &[(0.0, 1.0)], &[16]).unwrap();
    let b = Ball::around(&g, &[0.5, 0.5], 0.3).unwrap();
    let modes = neumann_modes(&b, &g, 3).unwrap();
    assert!(modes[0].0.abs() < 1e-9);
    let m = b.mask(&g);
    let c = modes[0].1.values()[m.cells()[0]];
    for cell in m.iter() {
        assert!((modes[0].1.values()[cell] - c).norm() < 1e-9);
    }
    let fields: Vec<Field> = modes.iter().map(|(_, f)| f.clone()).collect();
    assert!(Ensemble::projector(fields).is_ok());
    let gap = neumann_gap(&b, &g, &EigenConfig::default()).unwrap().gap;
    assert!((modes[1].0 - gap).abs() < 1e-9 * gap);
}

fn gaussian(grid: Grid, c: f64, w: f64) -> Field {
    Field::from_fn(grid, move |x| libm::exp(-(x[0] - c) * (x[0] - c) / (2.0 * w * w))).unwrap()
}

#[test]
fn hoffmann_ostenhof_equality_for_nonnegative_field() {
    let g = Grid::new(1, &[(-8.0, 8.0)], &[800]).unwrap();
    let f = orthonormalize(&[gaussian(g, 0.3, 1.1)]).unwrap();
    let e = Ensemble::projector(f).unwrap();
    let c = hoffmann_ostenhof_check(&e, None);
    assert!(c.holds);
    assert!((c.lhs - c.rhs).abs() <= 1e-12 * c.rhs);
}

#[test]
fn hoffmann_ostenhof_strict_at_sign_change() {
    let g = Grid::new(1, &[(-8.0, 8.0)], &[800]).unwrap();
    let odd = Field::from_fn(g, |x| x[0] * libm::exp(-x[0] * x[0] / 2.0)).unwrap();
    let e = Ensemble::projector(orthonormalize(&[odd]).unwrap()).unwrap();
    let c = hoffmann_ostenhof_check(&e, None);
    assert!(c.holds && c.lhs < c.rhs - 1e-3 * c.rhs, "{c:?}");
    // the strictness comes from the cells around the node
    let around = Mask::new(&g, (395..405).collect()).unwrap();
    let local = hoffmann_ostenhof_check(&e, Some(&around));
    assert!(local.lhs < local.rhs);
    let away = Mask::new(&g, (100..300).collect()).unwrap();
    let flat = hoffmann_ostenhof_check(&e, Some(&away));
    assert!((flat.lhs - flat.rhs).abs() <= 1e-12 * flat.rhs);
}

#[test]
fn uncertainty_of_constant_field_is_one() {
    let g = Grid::new(2, &[(0.0, 1.0)], &[20]).unwrap();
    let b = Ball::around(&g, &[0.5, 0.5], 0.3).unwrap();
    let f = Field::real(g, alloc::vec![0.7; 400]).unwrap();
    let r = local_uncertainty_measure(&f, &b).unwrap();
    assert_eq!(r.kinetic, 0.0);
    assert!((r.interaction / r.volume_term - 1.0).abs() < 1e-12);
    assert!((r.fitted_constant - 1.0).abs() < 1e-12);
}

#[test]
fn uncertainty_of_half_supported_field() {
    let g = Grid::new(1, &[(-1.0, 1.0)], &[200]).unwrap();
    let f = Field::from_fn(g, |x| if x[0] < 0.0 { libm::cos(x[0]) } else { 0.0 }).unwrap();
    let b = Ball::around(&g, &[0.0], 0.5).unwrap();
    let r = local_uncertainty_measure(&f, &b).unwrap();
    assert!(r.fitted_constant.is_finite() && r.fitted_constant >= 1.0);
    assert!(r.kinetic > 0.0);
    // the fitted constant makes the inequality tight
    let c = r.fitted_constant;
    let slack = r.kinetic - (r.interaction / c - c * r.volume_term);
    assert!(slack >= -1e-12 * r.interaction);
    if c > 1.0 {
        assert!(slack.abs() < 1e-9 * r.interaction);
    }
    let outside = Ball::around(&g, &[0.6], 0.2).unwrap();
    assert_eq!(local_uncertainty_measure(&f, &outside), Err(Error::ZeroOnBall));
}

#[test]
fn uncertainty_of_gaussian_is_finite() {
    let g = Grid::new(1, &[(-10.0, 10.0)], &[2000]).unwrap();
    let u = Field::from_fn(g, |x| libm::pow(PI, -0.25) * libm::exp(-x[0] * x[0] / 2.0)).unwrap();
    let b = Ball::around(&g, &[0.0], 1.0).unwrap();
    let r = local_uncertainty_measure(&u, &b).unwrap();
    for v in [r.kinetic, r.interaction, r.volume_term, r.fitted_constant] {
        assert!(v.is_finite() && v >= 0.0);
    }
}

#[test]
fn sobolev_quotient_values() {
    let g = Grid::new(1, &[(-10.0, 10.0)], &[2000]).unwrap();
    let u = Field::from_fn(g, |x| libm::exp(-x[0] * x[0] / 2.0)).unwrap();
    let q = sobolev_quotient(&u).unwrap();
    let exact = PI * libm::sqrt(3.0) / 2.0;
    assert!((q / exact - 1.0).abs() < 5e-3);
    let dilated = u.dilate(2.0);
    assert!((sobolev_quotient(&dilated).unwrap() / q - 1.0).abs() < 1e-12);
    let sech = Field::from_fn(g, |x| 1.0 / libm::cosh(x[0])).unwrap();
    // sech: (2/3)·2²/(16/15) = 5/2
    let qs = sobolev_quotient(&sech).unwrap();
    assert!(qs < q && (qs - 2.5).abs() < 0.01, "{qs}");
    assert_eq!(sobolev_quotient(&Field::zeros(g)), Err(Error::ZeroField));
}

#[test]
fn exclusion_holds_for_random_local_states() {
    let g = Grid::new(2, &[(-2.0, 2.0)], &[32]).unwrap();
    let b = Ball::around(&g, &[0.2, 0.1], 1.0).unwrap();
    let mask = b.mask(&g);
    let gap = mask_gap(&g, &mask, &EigenConfig::default()).unwrap().gap;
    let fields: Vec<Field> = (0..3)
        .map(|k| {
            let c = 0.4 * k as f64 - 0.4;
            Field::from_fn(g, move |x| libm::exp(-((x[0] - c) * (x[0] - c) + x[1] * x[1])) * (1.0 + x[0] * k as f64))
                .unwrap()
        })
        .collect();
    let e = Ensemble::new(alloc::vec![1.0, 0.8, 0.6], orthonormalize(&fields).unwrap()).unwrap();
    let rho = density_values(e.weights(), e.fields());
    let m = crate::fields::mass(&rho, &g, Some(&mask));
    let t = local_kinetic_energy(&e, &mask);
    assert!(t >= gap * (m - 1.0) - 1e-9);
    assert!(hoffmann_ostenhof_local(&e, &mask).holds);
}
