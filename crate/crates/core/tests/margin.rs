use mirror_margin::data::generate_blobs;
use mirror_margin::linalg::cosine;
use mirror_margin::margin::{
    angular_sweep_oracle, directional_gap, kkt_verify, solve_max_margin, MarginProblem,
    MarginSolution,
};
use mirror_margin::{BlobSpec, Error, Gauge, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn named() -> [Gauge; 3] {
    [Gauge::l1(), Gauge::l2(), Gauge::linf()]
}

fn three_point() -> Matrix {
    Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap()
}

fn random_dataset(seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let dist = rng.random_range(1.0..3.0);
    let c = vec![dist * angle.cos(), dist * angle.sin()];
    let spec = BlobSpec::new(
        rng.random_range(5..30),
        rng.random_range(5..30),
        c.clone(),
        c.iter().map(|v| -v).collect(),
        0.5,
        seed,
    );
    let ds = generate_blobs(&spec).unwrap();
    ds.z().clone()
}

fn separable_seeds(count: usize) -> Vec<(u64, Matrix)> {
    (0..)
        .map(|s| (s, random_dataset(s)))
        .filter(|(_, z)| mirror_margin::data::separability(z).unwrap().separable)
        .take(count)
        .collect()
}

#[test]
fn three_point_examples_match_the_oracle() {
    let l2 = solve_max_margin(&MarginProblem::new(Gauge::l2(), three_point()).unwrap()).unwrap();
    let o = angular_sweep_oracle(&Gauge::l2(), &three_point(), 1440).unwrap();
    assert!(l2.beta.iter().zip(&o).all(|(a, b)| (a - b).abs() < 1e-4));
    for g in [Gauge::l1(), Gauge::linf()] {
        let s = solve_max_margin(&MarginProblem::new(g.clone(), three_point()).unwrap()).unwrap();
        let o = angular_sweep_oracle(&g, &three_point(), 1440).unwrap();
        assert!(
            s.beta.iter().zip(&o).all(|(a, b)| (a - b).abs() < 1e-3),
            "{}: {:?} vs {o:?}",
            g.name(),
            s.beta
        );
    }
}

#[test]
fn solver_agrees_with_oracle_on_random_planar_data() {
    for (seed, z) in separable_seeds(20) {
        for g in named() {
            let s = solve_max_margin(&MarginProblem::new(g.clone(), z.clone()).unwrap()).unwrap();
            let o = angular_sweep_oracle(&g, &z, 1440).unwrap();
            let c = cosine(&s.beta, &o).unwrap();
            assert!(
                c >= 1.0 - 1e-4,
                "seed {seed} {}: {:?} vs {o:?}",
                g.name(),
                s.beta
            );
            assert!((g.eval(&o).unwrap() - s.objective).abs() <= 1e-9 * s.objective);
        }
    }
}

#[test]
fn kkt_holds_for_every_solver_path() {
    for (_, z) in separable_seeds(8) {
        for g in named() {
            let s = solve_max_margin(&MarginProblem::new(g.clone(), z.clone()).unwrap()).unwrap();
            let r = kkt_verify(&s, &g, &z, 1e-8).unwrap();
            assert!(r.passed(), "{}: {r:?}", g.name());
        }
        let g = Gauge::lp(3.0).unwrap();
        let s = solve_max_margin(&MarginProblem::new(g.clone(), z.clone()).unwrap()).unwrap();
        let r = kkt_verify(&s, &g, &z, 1e-4).unwrap();
        assert!(r.passed(), "lp3: {r:?}");
    }
}

#[test]
fn l2_duality_gap_closes() {
    for (_, z) in separable_seeds(10) {
        let s = solve_max_margin(&MarginProblem::new(Gauge::l2(), z).unwrap()).unwrap();
        assert!(s.duality_gap.unwrap().abs() <= 1e-8, "{:?}", s.duality_gap);
    }
}

#[test]
fn scaling_the_gauge_leaves_the_solution() {
    for (_, z) in separable_seeds(5) {
        for g in named() {
            let a = solve_max_margin(&MarginProblem::new(g.clone(), z.clone()).unwrap()).unwrap();
            let b = solve_max_margin(
                &MarginProblem::new(g.scaled_by(0.37).unwrap(), z.clone()).unwrap(),
            )
            .unwrap();
            assert!(a
                .beta
                .iter()
                .zip(&b.beta)
                .all(|(x, y)| (x - y).abs() <= 1e-8 * x.abs().max(1.0)));
            assert!((b.objective - 0.37 * a.objective).abs() <= 1e-8 * a.objective);
        }
    }
}

#[test]
fn permuting_constraints_keeps_the_lp_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (_, z) in separable_seeds(5) {
        let mut order: Vec<usize> = (0..z.rows()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let zp = z.select_rows(&order);
        for g in [Gauge::l1(), Gauge::linf()] {
            let a = solve_max_margin(&MarginProblem::new(g.clone(), z.clone()).unwrap()).unwrap();
            let b = solve_max_margin(&MarginProblem::new(g.clone(), zp.clone()).unwrap()).unwrap();
            assert!((a.objective - b.objective).abs() <= 1e-10 * a.objective.max(1.0));
        }
    }
}

#[test]
fn perturbed_direction_is_rejected() {
    let (_, z) = separable_seeds(1).remove(0);
    let s = solve_max_margin(&MarginProblem::new(Gauge::l2(), z.clone()).unwrap()).unwrap();
    let tilted = [s.beta[0] * 1.2, s.beta[1] * 0.8];
    let c = MarginSolution::candidate(&tilted, &s.dual, &Gauge::l2(), &z).unwrap();
    let r = kkt_verify(&c, &Gauge::l2(), &z, 1e-6).unwrap();
    assert!(r.feasibility_ok && !r.stationarity_ok, "{r:?}");
}

#[test]
fn gap_examples_and_refusals() {
    let z = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let s = solve_max_margin(&MarginProblem::new(Gauge::l2(), z).unwrap()).unwrap();
    assert!(directional_gap(&[5.0, 0.0], &s).unwrap().abs() < 1e-15);
    assert!((directional_gap(&[-5.0, 0.0], &s).unwrap() - 2.0).abs() < 1e-15);
    let bad = Matrix::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
    for g in named() {
        assert!(matches!(
            solve_max_margin(&MarginProblem::new(g, bad.clone()).unwrap()),
            Err(Error::Infeasible(_))
        ));
    }
}
