use bcn_core::builders::{alpha_beta, build_h, build_xi, delta_phase, h_inv_sq_closed};
use bcn_core::duality::{abc_spectrum_extended, dualize_r_to_s, dualize_s_to_r, symplecticity_certificate};
use bcn_core::dynamics::sutherland_lax_spectrum;
use bcn_core::laxops::{
    cauchy_minor_check, energy_from_lax_r, energy_from_lax_s, hamiltonian_r, hamiltonian_s, momentum_residual_r,
    momentum_residual_s,
};
use bcn_core::scattering::{
    phase_shift_terms, scattering_map_r, scattering_map_s, wave_map_r, wave_map_s,
};
use bcn_core::{AsymptoticState, Chamber, ComplexVector, Couplings, PhasePointR, PhasePointS, Sign};
use num_complex::Complex64;
use proptest::prelude::*;

fn couplings() -> impl Strategy<Value = Couplings> {
    (-1.5..-0.3f64, 0.3..2.0f64, 0.0..1.5f64).prop_map(|(mu, nu, k)| Couplings::new(mu, nu, k).unwrap())
}

/// Decreasing positive coordinates from a bottom value and a list of gaps.
fn chamber(n: usize, lo: f64, gap_lo: f64) -> impl Strategy<Value = Vec<f64>> {
    (lo..lo + 1.0, prop::collection::vec(gap_lo..gap_lo + 1.0, n - 1)).prop_map(|(last, gaps)| {
        let mut x = vec![last];
        for g in gaps.iter().rev() {
            x.push(x.last().unwrap() + g);
        }
        x.reverse();
        x
    })
}

fn point_s(n: usize) -> impl Strategy<Value = PhasePointS> {
    (chamber(n, 0.3, 0.3), prop::collection::vec(-1.5..1.5f64, n))
        .prop_map(|(q, p)| PhasePointS::new(q, p).unwrap())
}

fn point_r(n: usize) -> impl Strategy<Value = PhasePointR> {
    (chamber(n, 0.4, 0.4), prop::collection::vec(-1.0..1.0f64, n))
        .prop_map(|(l, th)| PhasePointR::new(l, th).unwrap())
}

fn any_s() -> impl Strategy<Value = PhasePointS> {
    (1usize..=4).prop_flat_map(point_s)
}

fn any_r() -> impl Strategy<Value = PhasePointR> {
    (1usize..=4).prop_flat_map(point_r)
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn alpha_beta_identities(x in 1e-3..50.0f64, k in 0.0..5.0f64) {
        let (a, b) = alpha_beta(x, k).unwrap();
        let b2 = (b * b).re;
        prop_assert!(rel(a * a + b2, 1.0) < 1e-13);
        prop_assert!(rel(a * a - b2, (1.0 + k * k / (x * x)).sqrt()) < 1e-13);
        prop_assert!(((b * 2.0 * a) - Complex64::new(0.0, k / x)).norm() < 1e-13 * (k / x).max(1.0));
    }

    #[test]
    fn h_inverse_square_closed_form(c in couplings(), l in (1usize..=6).prop_flat_map(|n| chamber(n, 0.2, 0.2))) {
        let lambda = Chamber::new(l).unwrap();
        let h = build_h(&lambda, &c);
        let hinv = h.clone().try_inverse().unwrap();
        let direct = &hinv * &hinv;
        let closed = h_inv_sq_closed(&lambda, &c);
        prop_assert!((direct - &closed).norm() < 1e-12 * closed.norm());
    }

    #[test]
    fn xi_is_anti_hermitian(c in couplings(), re in prop::collection::vec(-2.0..2.0f64, 4), im in prop::collection::vec(-2.0..2.0f64, 4)) {
        let v = ComplexVector::from_iterator(4, re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)));
        let xi = build_xi(&v, &c).unwrap();
        prop_assert!((&xi + xi.adjoint()).norm() < 1e-13 * xi.norm().max(1.0));
    }

    #[test]
    fn pair_terms_cancel_in_delta_sum(c in couplings(), l in (1usize..=6).prop_flat_map(|n| chamber(n, 0.2, 0.2))) {
        let lambda = Chamber::new(l.clone()).unwrap();
        let total: f64 = delta_phase(&lambda, &c).iter().sum();
        let mu2 = 4.0 * c.mu() * c.mu();
        let expected: f64 = (0..l.len())
            .map(|a| {
                let pairs: f64 = (0..l.len())
                    .filter(|&b| b != a)
                    .map(|b| (1.0 + mu2 / (l[a] + l[b]).powi(2)).ln())
                    .sum();
                0.5 * pairs + 0.5 * (1.0 + c.nu() * c.nu() / (l[a] * l[a])).ln()
                    + 0.5 * (1.0 + c.kappa() * c.kappa() / (l[a] * l[a])).ln()
            })
            .sum();
        prop_assert!((total - expected).abs() < 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn energy_pullbacks(c in couplings(), s in any_s(), r in any_r()) {
        prop_assert!(rel(energy_from_lax_s(&s, &c), hamiltonian_s(&s, &c)) < 1e-10);
        prop_assert!(rel(energy_from_lax_r(&r, &c), hamiltonian_r(&r, &c)) < 1e-10);
    }

    #[test]
    fn momentum_map_vanishes(c in couplings(), s in any_s(), r in any_r()) {
        prop_assert!(momentum_residual_s(&s, &c).unwrap() <= 1e-9);
        prop_assert!(momentum_residual_r(&r, &c).unwrap() <= 1e-9);
    }

    #[test]
    fn minor_identity(c in couplings(), r in any_r()) {
        let rep = cauchy_minor_check(&r, &c).unwrap();
        prop_assert!(rep.log_residuals.iter().all(|x| x.abs() <= 1e-10), "{:?}", rep.log_residuals);
        prop_assert!(rep.cauchy_rel_errors.iter().all(|x| *x <= 1e-10), "{:?}", rep.cauchy_rel_errors);
    }

    #[test]
    fn forward_then_inverse(c in couplings(), s in any_s()) {
        let dual = dualize_s_to_r(&s, &c).unwrap();
        prop_assert!(dual.diagnostics.newton_iters <= 10);
        let back = dualize_r_to_s(&dual.point, &c).unwrap().point;
        prop_assert!(sup_dist(&back.to_vec(), &s.to_vec()) <= 1e-8);
    }

    #[test]
    fn inverse_then_forward(c in couplings(), r in any_r()) {
        let s = dualize_r_to_s(&r, &c).unwrap().point;
        let back = dualize_s_to_r(&s, &c).unwrap().point;
        prop_assert!(sup_dist(&back.to_vec(), &r.to_vec()) <= 1e-8);
    }

    #[test]
    fn actions_are_the_lax_spectrum(c in couplings(), s in any_s()) {
        let dual = dualize_s_to_r(&s, &c).unwrap().point;
        let spec = sutherland_lax_spectrum(&s, &c).unwrap();
        for (a, l) in dual.lambda.as_slice().iter().enumerate() {
            prop_assert!((spec[a] - l).abs() < 1e-10 * l.max(1.0));
        }
    }

    #[test]
    fn abc_spectrum_is_inversion_symmetric(c in couplings(), s in any_s()) {
        let dual = dualize_s_to_r(&s, &c).unwrap().point;
        let logs = abc_spectrum_extended(&dual, &c, 256).unwrap();
        let n = s.n();
        for a in 0..n {
            // eigenvalues e^{2 q_a} and e^{-2 q_a}, compared relative to the eigenvalue
            prop_assert!((2.0 * (logs[a] - s.q[a])).exp_m1().abs() < 1e-10, "{:?} vs {:?}", logs, s.q);
            prop_assert!((2.0 * (logs[2 * n - 1 - a] + s.q[a])).exp_m1().abs() < 1e-10, "{:?} vs {:?}", logs, s.q);
        }
    }

    #[test]
    fn wave_maps_compose_to_scattering_maps(c in couplings(), s in any_s(), r in any_r()) {
        let minus = wave_map_s(&s, &c, Sign::Minus).unwrap();
        let plus = wave_map_s(&s, &c, Sign::Plus).unwrap();
        prop_assert!(sup_dist(&scattering_map_s(&minus, &c).unwrap().to_vec(), &plus.to_vec()) < 1e-8);
        let minus = wave_map_r(&r, &c, Sign::Minus).unwrap();
        let plus = wave_map_r(&r, &c, Sign::Plus).unwrap();
        prop_assert!(sup_dist(&scattering_map_r(&minus).unwrap().to_vec(), &plus.to_vec()) < 1e-8);
    }

    #[test]
    fn sutherland_scattering_is_a_shear_of_the_sign_flip(c in couplings(), x in prop::collection::vec(-3.0..3.0f64, 3), l in chamber(3, 0.2, 0.2)) {
        let y: Vec<f64> = l.iter().map(|v| -v).collect();
        let state = AsymptoticState::new(x.clone(), y.clone(), Sign::Minus).unwrap();
        let out_s = scattering_map_s(&state, &c).unwrap();
        let out_r = scattering_map_r(&state).unwrap();
        let delta = delta_phase(&Chamber::new(l).unwrap(), &c);
        prop_assert_eq!(&out_s.y, &out_r.y);
        for a in 0..3 {
            prop_assert!((out_s.x[a] - out_r.x[a] - delta[a]).abs() < 1e-14 * delta[a].abs().max(1.0));
        }
        let terms = phase_shift_terms(&Chamber::new(out_s.y.clone()).unwrap(), &c).total();
        prop_assert!(sup_dist(&terms, &delta) < 1e-12);
    }

    #[test]
    fn scattering_maps_are_symplectic(c in couplings(), x in prop::collection::vec(-3.0..3.0f64, 2), l in chamber(2, 0.3, 0.3)) {
        let y: Vec<f64> = l.iter().map(|v| -v).collect();
        let flat = [x, y].concat();
        let map_s = |v: &[f64]| -> bcn_core::Result<Vec<f64>> {
            let st = AsymptoticState::new(v[..2].to_vec(), v[2..].to_vec(), Sign::Minus)?;
            Ok(scattering_map_s(&st, &c)?.to_vec())
        };
        let map_r = |v: &[f64]| -> bcn_core::Result<Vec<f64>> {
            let st = AsymptoticState::new(v[..2].to_vec(), v[2..].to_vec(), Sign::Minus)?;
            Ok(scattering_map_r(&st)?.to_vec())
        };
        prop_assert!(symplecticity_certificate(map_s, &flat, None).unwrap() <= 1e-5);
        prop_assert!(symplecticity_certificate(map_r, &flat, None).unwrap() <= 1e-5);
    }
}
