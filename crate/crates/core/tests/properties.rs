mod common;

use common::isotonic_brute_force;
use polarcone::stress_recovery::gauge_basis;
use polarcone::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn values(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    n.prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0..10.0_f64, n),
            prop::collection::vec(0.05..2.0_f64, n),
        )
    })
}

fn sticky() -> impl Strategy<Value = StickyState> {
    (2usize..=12, any::<u64>()).prop_map(|(n, seed)| common::random_sticky(&mut ChaCha8Rng::seed_from_u64(seed), n))
}

fn wnorm(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), w)| w * (x - y).powi(2)).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_matches_block_enumeration((y, w) in values(1..=8)) {
        let x = project_monotone_1d(&y, &w).unwrap();
        let want = isotonic_brute_force(&y, &w);
        for (a, b) in x.values().iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn projection_is_idempotent_monotone_and_mean_preserving((y, w) in values(1..=40)) {
        let x = project_monotone_1d(&y, &w).unwrap();
        prop_assert!(x.values().windows(2).all(|p| p[0] <= p[1]));
        let again = project_monotone_1d(x.values(), &w).unwrap();
        prop_assert_eq!(again.values(), x.values());
        let before: f64 = y.iter().zip(&w).map(|(a, b)| a * b).sum();
        let after: f64 = x.values().iter().zip(&w).map(|(a, b)| a * b).sum();
        let scale: f64 = y.iter().zip(&w).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1.0);
        prop_assert!((before - after).abs() <= 1e-12 * scale);
    }

    #[test]
    fn projection_is_a_contraction((y, w) in values(2..=20), shift in prop::collection::vec(-3.0..3.0_f64, 20)) {
        let y2: Vec<f64> = y.iter().zip(&shift).map(|(a, b)| a + b).collect();
        let x = project_monotone_1d(&y, &w).unwrap();
        let x2 = project_monotone_1d(&y2, &w).unwrap();
        prop_assert!(wnorm(x.values(), x2.values(), &w) <= wnorm(&y, &y2, &w) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn projection_commutes_with_constant_shifts((y, w) in values(1..=20), c in -5.0..5.0_f64) {
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        let x = project_monotone_1d(&y, &w).unwrap();
        let xs = project_monotone_1d(&shifted, &w).unwrap();
        for (a, b) in x.values().iter().zip(xs.values()) {
            prop_assert!((a + c - b).abs() <= 1e-12 * (1.0 + a.abs() + c.abs()));
        }
    }

    #[test]
    fn sticky_flow_conserves_mass_and_momentum(s in sticky(), t in 0.0..3.0_f64) {
        let x = sticky_evolve(&s, t).unwrap();
        let m = s.measure();
        let rho = push_forward(&x, m).unwrap();
        let mass = m.total_mass();
        prop_assert!((rho.total_mass() - mass).abs() <= 16.0 * f64::EPSILON * mass);
        let free = s.free_flight(t);
        let mean = |v: &[f64]| v.iter().zip(m.weights()).map(|(a, b)| a * b).sum::<f64>();
        let scale = free.iter().zip(m.weights()).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1.0);
        prop_assert!((mean(x.values()) - mean(&free)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn kinetic_energy_never_increases(s in sticky(), times in prop::collection::vec(0.0..3.0_f64, 2..8)) {
        let mut times = times;
        times.sort_by(f64::total_cmp);
        let w = s.measure().weights();
        let energy = |t: f64| {
            let v = right_velocity(&s, t).unwrap().values;
            v.iter().zip(w).map(|(v, w)| w * v * v).sum::<f64>()
        };
        let e0 = energy(0.0);
        let mut last = e0;
        for t in times {
            let e = energy(t);
            prop_assert!(e <= last + 1e-12 * e0.max(1e-300), "{e} > {last}");
            last = e;
        }
    }

    #[test]
    fn residual_is_certified_and_sound(s in sticky(), t in 0.0..3.0_f64, seed in any::<u64>()) {
        let x = sticky_evolve(&s, t).unwrap();
        let y = polar_residual(&s, t).unwrap();
        let cert = polar_membership_1d(&y, &x, s.measure()).unwrap();
        prop_assert!(cert.feasible, "{cert:?}");
        // any monotone X' with |X'| <= 1 pairs nonpositively with Y
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let mut xp: Vec<f64> = (0..s.len()).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
            xp.sort_by(f64::total_cmp);
            let pair: f64 = y.iter().zip(&xp).zip(s.measure().weights()).map(|((a, b), c)| a * b * c).sum();
            prop_assert!(pair <= 1e-9);
        }
    }
}

fn random_load(rng: &mut ChaCha8Rng, grid: &Grid, n: usize) -> VectorMeasure {
    use rand::Rng;
    let d = grid.dim();
    let atoms = (0..n)
        .map(|_| (0..d).map(|k| rng.random_range(grid.lo()[k]..grid.hi()[k])).collect())
        .collect();
    let vectors = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    VectorMeasure::new(d, atoms, vectors).unwrap()
}

fn random_nodal(rng: &mut ChaCha8Rng, grid: &Grid) -> TestDeformation {
    use rand::Rng;
    let n = grid.n_nodes() * grid.dim();
    TestDeformation::from_nodes(grid, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn rigid(grid: &Grid, rng: &mut ChaCha8Rng) -> TestDeformation {
    use rand::Rng;
    let d = grid.dim();
    let mut b = vec![0.0; d * d];
    for i in 0..d {
        for j in i + 1..d {
            let a = rng.random_range(-2.0..2.0);
            b[i * d + j] = a;
            b[j * d + i] = -a;
        }
    }
    let c: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    TestDeformation::from_fn(grid, |x| (0..d).map(|i| c[i] + (0..d).map(|j| b[i * d + j] * x[j]).sum::<f64>()).collect())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn g_is_linear(d in 1usize..=3, seed in any::<u64>(), alpha in -3.0..3.0_f64, beta in -3.0..3.0_f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::cube(d, -1.0, 1.0, 3).unwrap();
        let f = random_load(&mut rng, &grid, 5);
        let p = d * (d + 1) / 2;
        let h = SymmetricField::from_packed(d, (0..grid.n_cells() * p).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect()).unwrap();
        let u = random_nodal(&mut rng, &grid);
        let v = random_nodal(&mut rng, &grid);
        let g = |w: &TestDeformation| evaluate_g(&f, &h, w, &grid).unwrap();
        let lhs = g(&u.combine(alpha, beta, &v));
        let rhs = alpha * g(&u) + beta * g(&v);
        let scale = alpha.abs() * g(&u).abs() + beta.abs() * g(&v).abs();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn rigid_motions_are_null(d in 2usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::cube(d, -1.0, 1.0, 3).unwrap();
        let u = rigid(&grid, &mut rng);
        prop_assert!(u.e().sup_entry() <= 1e-14);

        // a monotone flow gives an instance; H never sees a rigid motion
        let fam = monotone_test_family(&grid, d * (d + 1) / 2 + 3, seed).unwrap();
        let id = TestDeformation::identity(&grid);
        let flow: Vec<f64> = fam[d * (d + 1) / 2 + 2].u().iter().zip(id.u()).map(|(a, b)| a + b).collect();
        let atoms: Vec<Vec<f64>> = (0..4).map(|_| (0..d).map(|_| rand::Rng::random_range(&mut rng, -0.9..0.9)).collect()).collect();
        let rho = PointMeasure::new(atoms, vec![0.25; 4]).unwrap();
        let inst = instance_from_flow(&flow, id.u(), &vec![1.0; grid.n_cells()], 2.0, &rho, &grid).unwrap();
        let plus = evaluate_g(&inst.f, &inst.h, &u, &grid).unwrap();
        let minus = evaluate_g(&inst.f, &inst.h, &u.combine(-1.0, 0.0, &u), &grid).unwrap();
        prop_assert!((plus + minus).abs() <= 1e-12);
        let load_only = evaluate_g(&inst.f, &SymmetricField::zeros(d, grid.n_cells()), &u, &grid).unwrap();
        prop_assert!((plus - load_only).abs() <= 1e-12 * (1.0 + plus.abs()));

        // with zero net force and torque the functional vanishes on u
        let balanced = balance(&inst.f);
        let g = evaluate_g(&balanced, &inst.h, &u, &grid).unwrap();
        prop_assert!(g.abs() <= 1e-12, "{g}");
    }
}

/// Removes net force and net torque by adding equal and opposite atoms.
fn balance(f: &VectorMeasure) -> VectorMeasure {
    let d = f.dim();
    let n = f.len() as f64;
    let mut atoms = f.atoms().to_vec();
    let mut vectors = f.vectors().to_vec();
    let net: Vec<f64> = (0..d).map(|k| vectors.iter().map(|v| v[k]).sum::<f64>()).collect();
    for v in vectors.iter_mut() {
        for k in 0..d {
            v[k] -= net[k] / n;
        }
    }
    // each planar torque component is cancelled by a couple at the origin
    for i in 0..d {
        for j in i + 1..d {
            let tau: f64 = atoms.iter().zip(&vectors).map(|(x, v)| x[i] * v[j] - x[j] * v[i]).sum();
            let mut a = vec![0.0; d];
            a[i] = 0.5;
            let mut b = vec![0.0; d];
            b[i] = -0.5;
            let mut fa = vec![0.0; d];
            fa[j] = -tau;
            let mut fb = vec![0.0; d];
            fb[j] = tau;
            atoms.extend([a, b]);
            vectors.extend([fa, fb]);
        }
    }
    VectorMeasure::new(d, atoms, vectors).unwrap()
}

#[test]
fn deformation_tensor_converges_under_refinement() {
    let u = |x: &[f64]| vec![(1.3 * x[0] + 0.4 * x[1]).sin(), (0.7 * x[0] * x[1]).cos() + x[0] * x[0]];
    let exact = |x: &[f64]| {
        let c = (1.3 * x[0] + 0.4 * x[1]).cos();
        let s = (0.7 * x[0] * x[1]).sin();
        let du = [[1.3 * c, 0.4 * c], [-0.7 * x[1] * s + 2.0 * x[0], -0.7 * x[0] * s]];
        [du[0][0], 0.5 * (du[0][1] + du[1][0]), du[1][1]]
    };
    let errors: Vec<f64> = [8usize, 16, 32, 64]
        .iter()
        .map(|&n| {
            let grid = Grid::cube(2, -1.0, 1.0, n).unwrap();
            let e = TestDeformation::from_fn(&grid, u).unwrap();
            (0..grid.n_cells())
                .map(|c| {
                    let want = exact(&grid.cell_center(c));
                    e.e().cell(c).iter().zip(want).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()))
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!(slope >= 0.9, "slope {slope} from errors {errors:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_is_homogeneous_sublinear_and_dominates(seed in any::<u64>(), lambda in 0.1..10.0_f64) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..8);
        let s = common::random_sticky(&mut rng, n);
        let (p, oracle) = common::sticky_problem(&s, rng.random_range(0.2..2.0), 16);
        let l = gauge_basis(&p);
        let opts = GaugeOptions::default();
        let mut draw = || SymmetricField::from_packed(1, (0..16).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let (v, w) = (draw(), draw());
        let pv = riedl_gauge(&p, &v, &l, &opts).unwrap();
        let pw = riedl_gauge(&p, &w, &l, &opts).unwrap();
        let pl = riedl_gauge(&p, &v.scaled(lambda), &l, &opts).unwrap();
        let psum = riedl_gauge(&p, &v.add_scaled(1.0, &w), &l, &opts).unwrap();
        prop_assert!((pl - lambda * pv).abs() <= 1e-8 * (lambda * pv).abs().max(1e-12));
        prop_assert!(psum <= pv + pw + 1e-8);
        let m = SymmetricField::from_packed(1, oracle).unwrap();
        prop_assert!(v.pairing(&m) <= pv + 1e-6);
    }
}
