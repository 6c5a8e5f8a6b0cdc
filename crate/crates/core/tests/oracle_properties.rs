use moma_core::game_model::{dot, policy_value, simulate_episode, MarkovPolicy};
use moma_core::geometry::{norm, sample_unit_direction, sub, TargetSet};
use moma_core::harness::generate_random_game;
use moma_core::oracle::{estimate_delta, exact_best_response, exact_best_response_min, exact_minimax_value};
use moma_core::rng;
use rand::Rng;

fn random_policy<R: Rng>(r: &mut R, h: usize, s: usize, a: usize) -> MarkovPolicy {
    let mut probs = Vec::with_capacity(h * s * a);
    for _ in 0..h * s {
        let w: Vec<f64> = (0..a).map(|_| r.random::<f64>() + 1e-3).collect();
        let t: f64 = w.iter().sum();
        probs.extend(w.iter().map(|x| x / t));
    }
    MarkovPolicy::new(h, s, a, probs).unwrap()
}

fn all_deterministic(h: usize, s: usize, a: usize) -> Vec<MarkovPolicy> {
    let slots = h * s;
    (0..a.pow(slots as u32))
        .map(|mut code| {
            let choices: Vec<usize> = (0..slots)
                .map(|_| {
                    let c = code % a;
                    code /= a;
                    c
                })
                .collect();
            MarkovPolicy::deterministic(h, s, a, &choices).unwrap()
        })
        .collect()
}

#[test]
fn minimax_sandwich() {
    let mut r = rng::stream(1, "sandwich");
    for seed in 0..20 {
        let g = generate_random_game(2, 2, 3, 2, 2, seed);
        let theta = sample_unit_direction(&mut r, 2);
        let v = exact_minimax_value(&g, &theta).unwrap().value;
        let mu = random_policy(&mut r, 2, 2, 2);
        let nu = random_policy(&mut r, 2, 2, 3);
        let upper = dot(
            &theta,
            &policy_value(&g, &mu, &exact_best_response(&g, &theta, &mu).unwrap()).unwrap(),
        );
        let lower = dot(
            &theta,
            &policy_value(&g, &exact_best_response_min(&g, &theta, &nu).unwrap(), &nu).unwrap(),
        );
        assert!(upper >= v - 1e-9 && v >= lower - 1e-9, "{lower} <= {v} <= {upper}");
    }
}

#[test]
fn best_response_beats_every_deterministic_opponent() {
    let mut r = rng::stream(2, "br");
    let opponents = all_deterministic(2, 2, 2);
    for seed in 0..10 {
        let g = generate_random_game(2, 2, 2, 2, 2, seed);
        let theta = sample_unit_direction(&mut r, 2);
        let mu = random_policy(&mut r, 2, 2, 2);
        let br = exact_best_response(&g, &theta, &mu).unwrap();
        let best = dot(&theta, &policy_value(&g, &mu, &br).unwrap());
        for nu in &opponents {
            assert!(best >= dot(&theta, &policy_value(&g, &mu, nu).unwrap()) - 1e-9);
        }
    }
}

#[test]
fn nash_pair_attains_the_value() {
    let mut r = rng::stream(3, "nash");
    for seed in 0..10 {
        let g = generate_random_game(3, 2, 2, 3, 3, seed);
        let theta = sample_unit_direction(&mut r, 3);
        let sol = exact_minimax_value(&g, &theta).unwrap();
        let v = dot(&theta, &policy_value(&g, &sol.agent, &sol.opponent).unwrap());
        assert!((v - sol.value).abs() < 1e-9);
    }
}

#[test]
fn minimax_value_is_lipschitz_in_theta() {
    let mut r = rng::stream(4, "lipschitz");
    let g = generate_random_game(3, 2, 2, 3, 2, 4);
    let bound = g.value_bound();
    for _ in 0..100 {
        let a = sample_unit_direction(&mut r, 2);
        let b = sample_unit_direction(&mut r, 2);
        let va = exact_minimax_value(&g, &a).unwrap().value;
        let vb = exact_minimax_value(&g, &b).unwrap().value;
        assert!((va - vb).abs() <= bound * norm(&sub(&a, &b)) + 1e-9);
    }
}

#[test]
fn delta_of_translated_target_moves_by_at_most_the_shift() {
    let g = generate_random_game(2, 2, 2, 2, 2, 5);
    let base = TargetSet::new_ball(vec![1.0, 1.0], 0.3).unwrap();
    let mut r = rng::stream(5, "shift");
    for _ in 0..10 {
        let u: Vec<f64> = (0..2).map(|_| r.random_range(-0.5..0.5)).collect();
        let moved = TargetSet::translate(base.clone(), u.clone());
        let a = estimate_delta(&g, &base, 64, &mut rng::stream(6, "dirs"))
            .unwrap()
            .delta;
        let b = estimate_delta(&g, &moved, 64, &mut rng::stream(6, "dirs"))
            .unwrap()
            .delta;
        assert!((a - b).abs() <= norm(&u) + 1e-12);
    }
}

#[test]
fn delta_of_a_distant_point_target() {
    // Returns are nonnegative, so a point far along -theta0 is not approachable.
    let g = generate_random_game(2, 2, 2, 2, 2, 7);
    let s = 0.5f64.sqrt();
    let theta0 = [s, s];
    let point = vec![-2.0, -2.0];
    let target = TargetSet::new_box(point.clone(), point.clone()).unwrap();
    let gap = exact_minimax_value(&g, &theta0).unwrap().value - dot(&theta0, &point);
    assert!(gap > 0.0);
    let est = estimate_delta(&g, &target, 256, &mut rng::stream(7, "dirs")).unwrap();
    assert!(est.delta > 0.0);
    // The reported maximum is the gap of the reported direction.
    let v = exact_minimax_value(&g, &est.worst_direction).unwrap().value;
    assert!((est.delta - (v - dot(&est.worst_direction, &point))).abs() < 1e-12);
}

#[test]
fn policy_value_matches_monte_carlo() {
    let g = generate_random_game(3, 2, 2, 3, 2, 8);
    let mut r = rng::stream(8, "policies");
    let mu = random_policy(&mut r, 3, 3, 2);
    let nu = random_policy(&mut r, 3, 3, 2);
    let exact = policy_value(&g, &mu, &nu).unwrap();
    let n = 40_000;
    let mut acc = [0.0; 2];
    let mut sim = rng::stream(8, "episodes");
    for _ in 0..n {
        let t = simulate_episode(&g, &mu, &nu, &mut sim).unwrap();
        acc[0] += t.total_return[0];
        acc[1] += t.total_return[1];
    }
    // Each coordinate of the return lies in [0, 3]; five standard errors.
    let tol = 5.0 * 1.5 / (n as f64).sqrt();
    for j in 0..2 {
        assert!((acc[j] / n as f64 - exact[j]).abs() < tol);
    }
}
