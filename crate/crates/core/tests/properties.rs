mod common;

use fdris_core::bcd::random_precoders;
use fdris_core::geometry::{RxNode, TxNode};
use fdris_core::linalg::{hermitian_defect, CMat, CVec};
use fdris_core::network::{sum_rate, NetworkState, PhaseState, PowerBudget, PrecoderSet};
use fdris_core::phase::{build_quadratic_form, riemannian_project, retract, unit_vector};
use fdris_core::wmmse::{solve_subproblem, update_auxiliaries, BisectionConfig, PrecoderSubproblem};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Unitary from the QR factor of a Gaussian matrix.
fn random_unitary(n: usize, r: &mut ChaCha8Rng) -> CMat {
    fdris_core::linalg::complex_gaussian(r, n, n).qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rates_ignore_stream_rotation(seed in any::<u64>(), streams in 1usize..=2, sic in 0.0f64..30.0) {
        let mut r = rng(seed);
        let d = common::dims(2, 1, 4, 2, streams);
        let ch = common::random_channels(d, sic, &mut r);
        let f = common::random_precoders(&d, 0.8, &mut r);
        let phase = common::random_phase(4, &mut r);
        let rotated = PrecoderSet {
            dl: f.dl.iter().map(|x| x * random_unitary(streams, &mut r)).collect(),
            ul: f.ul.iter().map(|x| x * random_unitary(streams, &mut r)).collect(),
        };
        let a = sum_rate(&ch, &f, &phase).unwrap();
        let b = sum_rate(&ch, &rotated, &phase).unwrap();
        prop_assert!((a.sum_rate - b.sum_rate).abs() <= 1e-9 * a.sum_rate.max(1.0));
    }

    #[test]
    fn rates_match_oracle(seed in any::<u64>(), sic in 0.0f64..30.0) {
        let mut r = rng(seed);
        let d = common::dims(2, 2, 5, 2, 1);
        let ch = common::random_channels(d, sic, &mut r);
        let f = common::random_precoders(&d, 0.8, &mut r);
        let phase = common::random_phase(5, &mut r);
        let lib = sum_rate(&ch, &f, &phase).unwrap();
        let oracle: f64 = common::links(&d).into_iter().map(|l| common::oracle_rate(&ch, &f, &phase, l)).sum();
        prop_assert!((lib.sum_rate - oracle).abs() <= 1e-9 * oracle.max(1.0));
    }

    #[test]
    fn random_start_meets_budgets_with_equality(seed in any::<u64>(), cells in 1usize..=3, users in 1usize..=3, bs in 0.1f64..10.0, ue in 0.01f64..1.0) {
        let d = common::dims(cells, users, 4, 3, 2);
        let f = random_precoders(&d, &PowerBudget { bs, ue }, &mut rng(seed));
        for l in 0..cells {
            prop_assert!((f.bs_power(l, &d) - bs).abs() <= 1e-12 * bs);
        }
        for g in 0..d.total_ul() {
            prop_assert!((f.ul_power(g) - ue).abs() <= 1e-12 * ue);
        }
    }

    #[test]
    fn quadratic_form_is_hermitian_and_real(seed in any::<u64>(), m in 1usize..=10) {
        let mut r = rng(seed);
        let d = common::dims(2, 1, m, 2, 1);
        let ch = common::random_channels(d, 5.0, &mut r);
        let f = common::random_precoders(&d, 0.8, &mut r);
        let phase = common::random_phase(m, &mut r);
        let state = NetworkState::new(&ch, &phase).unwrap();
        let aux = update_auxiliaries(&state, &f).unwrap();
        let qf = build_quadratic_form(&state, &f, &aux).unwrap();
        let scale = qf.xi.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        prop_assert!(hermitian_defect(&qf.xi) <= 1e-12 * scale);
        let phi = common::random_phase(m, &mut r);
        let quad = phi.phi().dotc(&(&qf.xi * phi.phi()));
        prop_assert!(quad.im.abs() <= 1e-10 * quad.norm().max(1.0));
        prop_assert!(qf.value(phi.phi()).is_finite());
    }

    #[test]
    fn tangent_projection_is_idempotent(thetas in prop::collection::vec(0.0f64..6.3, 1..12), seed in any::<u64>()) {
        let phi = unit_vector(&thetas);
        let eta = fdris_core::linalg::complex_gaussian(&mut rng(seed), thetas.len(), 1).column(0).into_owned();
        let p = riemannian_project(&eta, &phi);
        let pp = riemannian_project(&p, &phi);
        prop_assert!((&p - &pp).norm() <= 1e-12 * eta.norm().max(1.0));
        for (z, f) in p.iter().zip(phi.iter()) {
            prop_assert!((z * f.conj()).re.abs() <= 1e-12 * eta.norm().max(1.0));
        }
    }

    #[test]
    fn retraction_lands_on_unit_circle(v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..12)) {
        prop_assume!(v.iter().all(|(a, b)| a.hypot(*b) > 1e-9));
        let x = CVec::from_iterator(v.len(), v.iter().map(|&(a, b)| Complex64::new(a, b)));
        let y = retract(&x).unwrap();
        for (a, b) in x.iter().zip(y.iter()) {
            prop_assert!((b.norm() - 1.0).abs() <= 1e-12);
            prop_assert!((b * a.norm() - a).norm() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn angles_are_wrapped(thetas in prop::collection::vec(-50.0f64..50.0, 1..8)) {
        let p = PhaseState::from_angles(thetas.clone());
        for (t, raw) in p.theta().iter().zip(&thetas) {
            prop_assert!((0.0..std::f64::consts::TAU).contains(t));
            prop_assert!((Complex64::from_polar(1.0, *t) - Complex64::from_polar(1.0, *raw)).norm() <= 1e-9);
        }
    }

    #[test]
    fn multiplier_search_is_feasible(seed in any::<u64>(), budget in 1e-3f64..10.0, sic in 0.0f64..40.0) {
        let mut r = rng(seed);
        let d = common::dims(2, 2, 3, 3, 2);
        let ch = common::random_channels(d, sic, &mut r);
        let f = common::random_precoders(&d, 1.0, &mut r);
        let phase = common::random_phase(3, &mut r);
        let state = NetworkState::new(&ch, &phase).unwrap();
        let aux = update_auxiliaries(&state, &f).unwrap();
        let cfg = BisectionConfig::default();
        for tx in [TxNode::Bs(0), TxNode::Bs(1), TxNode::Ul(0), TxNode::Ul(3)] {
            let sub = PrecoderSubproblem::build(&state, &aux, tx).unwrap();
            let (prec, m) = solve_subproblem(&sub, budget, &cfg).unwrap();
            let power: f64 = prec.iter().map(|x| x.norm_squared()).sum();
            prop_assert!(power <= budget * (1.0 + 1e-9));
            prop_assert!(m.lambda * (power - budget).abs() <= 1e-6 * budget);
            prop_assert!(m.lambda >= 0.0);
        }
    }
}

#[test]
fn self_interference_scale_only_on_own_station() {
    let mut r = rng(9);
    let ch = common::random_channels(common::dims(2, 1, 2, 2, 1), 20.0, &mut r);
    assert_eq!(ch.link_scale(RxNode::Bs(0), TxNode::Bs(0)), 0.01);
    assert_eq!(ch.link_scale(RxNode::Bs(0), TxNode::Bs(1)), 1.0);
    assert_eq!(ch.link_scale(RxNode::Dl(0), TxNode::Bs(0)), 1.0);
}
