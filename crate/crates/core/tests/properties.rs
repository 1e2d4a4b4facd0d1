use descentlab::algorithms::{averaged_iterate_at, run, Algorithm, RunConfig, RunningAverage, StepSchedule, Weighting};
use descentlab::nonsmooth::{project_ball, Regularizer};
use descentlab::problems::{build_least_squares, fixture, minibatch_constants};
use proptest::prelude::*;

fn vec2() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, 1..6)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn regularizer() -> impl Strategy<Value = Regularizer<f64>> {
    prop_oneof![
        Just(Regularizer::Zero),
        (0.0..5.0f64).prop_map(|lambda| Regularizer::L1 { lambda }),
        (0.1..10.0f64).prop_map(|radius| Regularizer::BallIndicator { radius }),
    ]
}

proptest! {
    #[test]
    fn prox_is_nonexpansive(reg in regularizer(), gamma in 0.01..3.0f64, x in vec2(), shift in vec2()) {
        let y: Vec<f64> = x.iter().zip(shift.iter().cycle()).map(|(a, b)| a + b).collect();
        let (px, py) = (reg.prox(gamma, &x).unwrap(), reg.prox(gamma, &y).unwrap());
        prop_assert!(dist(&px, &py) <= dist(&x, &y) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn projection_lands_in_the_ball(radius in 1e-3..1e3f64, x in vec2()) {
        let p = project_ball(radius, &x);
        prop_assert!(p.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius);
    }

    #[test]
    fn running_average_matches_trace(gamma0 in 0.01..0.3f64, t in 1usize..120, seed in 0u64..1000) {
        let fx = fixture::<f64>("ls_6x2").unwrap();
        let cfg = RunConfig::for_fixture(&fx, Algorithm::Sgd, StepSchedule::InvSqrt { gamma0 }, 120)
            .with_seed(seed)
            .with_iterates();
        let tr = run(&cfg, 0).unwrap();
        for w in [Weighting::Uniform, Weighting::GammaWeighted, Weighting::Ptk { l_ref: 1.0 }] {
            let mut avg = RunningAverage::new(w, 2);
            for (k, x) in tr.iterates().unwrap()[..t].iter().enumerate() {
                avg.push(cfg.schedule.gamma(k), x).unwrap();
            }
            let a = avg.current().unwrap();
            let b = averaged_iterate_at(&tr, w, t).unwrap();
            prop_assert!(dist(&a, &b) <= 1e-12 * (1.0 + b.iter().map(|v| v.abs()).sum::<f64>()));
        }
    }

    #[test]
    fn minibatch_constants_interpolate(
        rows in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 2..7),
        seed in 0usize..100,
    ) {
        let n = rows.len();
        let targets: Vec<f64> = (0..n).map(|i| ((i + seed) % 5) as f64 - 2.0).collect();
        let inst = build_least_squares(rows, targets).unwrap();
        let c = &inst.constants;
        let (l, lmax, sigma) = (c.l().unwrap(), c.l_max().unwrap(), c.sigma_star_f().unwrap());
        let (l1, s1) = minibatch_constants(c, 1).unwrap();
        let (ln, sn) = minibatch_constants(c, n).unwrap();
        prop_assert!((l1 - lmax).abs() <= 1e-12 * lmax.max(1.0));
        prop_assert!((s1 - sigma).abs() <= 1e-12 * sigma.max(1.0));
        prop_assert!((ln - l).abs() <= 1e-12 * l.max(1.0));
        prop_assert!(sn.abs() <= 1e-12 * sigma.max(1.0));
        let mut prev = (l1, s1);
        for b in 2..=n {
            let cur = minibatch_constants(c, b).unwrap();
            prop_assert!(cur.0 <= prev.0 + 1e-12 && cur.1 <= prev.1 + 1e-12);
            prev = cur;
        }
    }

    #[test]
    fn schedules_are_positive_and_decreasing(g in 1e-4..10.0f64, t in 0usize..10_000) {
        let inv = StepSchedule::InvSqrt { gamma0: g };
        prop_assert!(inv.gamma(t) > 0.0 && inv.gamma(t + 1) < inv.gamma(t));
        let pair = StepSchedule::MomentumPair { eta: g };
        prop_assert!(pair.gamma(t + 1) < pair.gamma(t));
        let beta = pair.beta(t).unwrap();
        prop_assert!((0.0..1.0).contains(&beta));
    }
}
