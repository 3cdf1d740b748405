use proptest::prelude::*;

use randrk::field::{FnField, HoelderMeta, StateIndependent};
use randrk::harness::{error_constants, ConstantInputs};
use randrk::quadrature::{randomized_riemann, riemann_with_draws};
use randrk::solvers::{replay, ButcherTableau, RandomTableau};
use randrk::{solve, step_euler_theta, step_rk2_theta, EvalError, Method, Problem, RandomStream, State, TimeGrid};

#[allow(clippy::type_complexity)]
fn nonlinear() -> FnField<impl Fn(f64, &[f64], &mut [f64]) -> Result<(), EvalError> + Send + Sync> {
    FnField::new(2, |t: f64, x: &[f64], out: &mut [f64]| {
        out[0] = (3.0 * t).sin() * x[1] - x[0].abs().sqrt();
        out[1] = t.signum() * x[0] + 0.5 * x[1];
        Ok(())
    })
}

fn bits(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tableau_matches_direct_steps(
        theta in 1e-9f64..(1.0 - 1e-9),
        t in -2.0f64..2.0,
        h in 1e-6f64..0.9,
        x0 in -10.0f64..10.0,
        x1 in -10.0f64..10.0,
    ) {
        let f = nonlinear();
        let x = State::new(vec![x0, x1]).unwrap();
        let e = step_euler_theta(&f, t, &x, h, theta).unwrap();
        let et = RandomTableau::EulerTheta.instantiate(theta).step(&f, t, x.as_slice(), h).unwrap();
        prop_assert_eq!(bits(e.as_slice()), bits(&et));
        let r = step_rk2_theta(&f, t, &x, h, theta).unwrap();
        let rt = RandomTableau::TwoStageTheta.instantiate(theta).step(&f, t, x.as_slice(), h).unwrap();
        prop_assert_eq!(bits(r.as_slice()), bits(&rt));
    }

    #[test]
    fn classical_euler_is_the_zero_node_tableau(t in 0.0f64..1.0, h in 1e-4f64..0.5, x in -5.0f64..5.0) {
        let f = nonlinear();
        let u0 = State::new(vec![x, -x]).unwrap();
        let grid = TimeGrid::new(t + h, h).unwrap();
        let traj = solve(&f, &u0, &grid, Method::ClassicalEuler, None).unwrap();
        let tab = ButcherTableau { a: vec![vec![0.0]], b: vec![1.0], c: vec![0.0] };
        let mut y = u0.as_slice().to_vec();
        for j in 1..=grid.n_steps() {
            y = tab.step(&f, grid.node(j - 1), &y, h).unwrap();
        }
        prop_assert_eq!(bits(traj.last()), bits(&y));
    }

    #[test]
    fn state_independent_reduction(seed in any::<u64>(), stream in any::<u64>(), level in 1u32..9, gamma in 1.5f64..12.0) {
        let g = Problem::singular_time(gamma, 1.0).unwrap().coefficient().clone();
        let grid = TimeGrid::dyadic(1.0, level).unwrap();
        let field = StateIndependent(g.clone());
        let zero = State::scalar(0.0).unwrap();
        // A singular hit is a measure-zero event; it must hit all three alike.
        let q = randomized_riemann(&g, &grid, &mut RandomStream::derive(seed, stream));
        let e = solve(&field, &zero, &grid, Method::RandEuler, Some(&mut RandomStream::derive(seed, stream)));
        let r = solve(&field, &zero, &grid, Method::RandRk2, Some(&mut RandomStream::derive(seed, stream)));
        match (q, e, r) {
            (Ok(q), Ok(e), Ok(r)) => {
                prop_assert_eq!(q.draws(), e.draws());
                for n in 1..=grid.n_steps() {
                    prop_assert_eq!(q.partial(n)[0].to_bits(), e.state(n)[0].to_bits());
                    prop_assert_eq!(e.state(n)[0].to_bits(), r.state(n)[0].to_bits());
                }
            }
            (q, e, r) => prop_assert!(q.is_err() && e.is_err() && r.is_err()),
        }
    }

    #[test]
    fn grid_invariants(t in 1e-3f64..1e3, h in 1e-5f64..0.999) {
        match TimeGrid::new(t, h) {
            Ok(g) => {
                let n = g.n_steps();
                prop_assert!(n >= 1);
                prop_assert!(g.node(n) <= t && t < g.node(n + 1));
                let nodes: Vec<f64> = g.nodes().collect();
                prop_assert_eq!(nodes.len(), n + 1);
                prop_assert!(nodes.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(g.node_index(g.node(n / 2)), Some(n / 2));
            }
            Err(_) => prop_assert!(t < h),
        }
    }

    #[test]
    fn constants_integrate_exactly(c in -1e3f64..1e3, h in 1e-3f64..0.5, seed in any::<u64>()) {
        let g = randrk::field::ScalarIntegrand::new("c", move |_| c);
        let grid = TimeGrid::new(1.0, h).unwrap();
        let q = randomized_riemann(&g, &grid, &mut RandomStream::derive(seed, 0)).unwrap();
        for n in 1..=grid.n_steps() {
            let exact = c * grid.node(n);
            prop_assert!((q.partial(n)[0] - exact).abs() <= 4.0 * f64::EPSILON * n as f64 * c.abs());
        }
    }

    #[test]
    fn replay_reproduces_solve(seed in any::<u64>(), level in 2u32..9, rk2 in any::<bool>()) {
        let problem = Problem::jump_linear(1.0).unwrap();
        let grid = TimeGrid::dyadic(1.0, level).unwrap();
        let method = if rk2 { Method::RandRk2 } else { Method::RandEuler };
        let a = solve(problem.field(), problem.u0(), &grid, method, Some(&mut RandomStream::derive(seed, 1))).unwrap();
        let b = replay(problem.field(), problem.u0(), &grid, method, a.draws()).unwrap();
        prop_assert_eq!(a.draws(), b.draws());
        for (x, y) in a.states().zip(b.states()) {
            prop_assert_eq!(bits(x), bits(y));
        }
        let g = problem.coefficient();
        let q = randomized_riemann(g, &grid, &mut RandomStream::derive(seed, 1)).unwrap();
        let q2 = riemann_with_draws(g, &grid, q.draws()).unwrap();
        prop_assert_eq!(q, q2);
    }

    #[test]
    fn stream_replay(seed in any::<u64>(), index in any::<u64>(), n in 1usize..200) {
        let mut a = RandomStream::derive(seed, index);
        let mut b = RandomStream::derive(seed, index);
        for _ in 0..n {
            let (x, y) = (a.draw_tau(), b.draw_tau());
            prop_assert!(x > 0.0 && x < 1.0);
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
        prop_assert_eq!(a.counter(), b.counter());
    }

    #[test]
    fn constants_monotone_and_linear(
        l in 0.0f64..2.0,
        k in 0.01f64..5.0,
        dl in 0.0f64..1.0,
        dk in 0.0f64..1.0,
        scale in 1.0f64..10.0,
        gamma in 0.05f64..1.0,
        p in 2.0f64..6.0,
    ) {
        let base = ConstantInputs {
            cp: 10.0,
            final_time: 1.0,
            p,
            lipschitz_norm: Some(l),
            growth_norm: Some(k),
            hoelder: Some(HoelderMeta { gamma, lipschitz: l, constant: 1.0, growth: k }),
            sup_u: 1.0,
        };
        let bigger = ConstantInputs {
            lipschitz_norm: Some(l + dl),
            growth_norm: Some(k + dk),
            hoelder: Some(HoelderMeta { gamma, lipschitz: l + dl, constant: 1.0, growth: k + dk }),
            ..base
        };
        let a = error_constants(&base).unwrap();
        let b = error_constants(&bigger).unwrap();
        prop_assert!(b.c.unwrap() >= a.c.unwrap());
        prop_assert!(b.c_u.unwrap() >= a.c_u.unwrap());
        prop_assert!(b.c_v.unwrap() >= a.c_v.unwrap());

        // Linear in the growth norm.
        let scaled = ConstantInputs {
            growth_norm: Some(k * scale),
            hoelder: Some(HoelderMeta { gamma, lipschitz: l, constant: 1.0, growth: k * scale }),
            ..base
        };
        let s = error_constants(&scaled).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() <= 1e-12 * y.abs();
        prop_assert!(rel(s.c.unwrap(), scale * a.c.unwrap()));
        prop_assert!(rel(s.c_u.unwrap(), scale * a.c_u.unwrap()));
        prop_assert!(rel(s.c_v.unwrap(), scale * a.c_v.unwrap()));
    }
}
