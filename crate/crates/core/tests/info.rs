use std::sync::Arc;

use coopsearch::info::oracle::{channel_monte_carlo, constant_pd_reference, random_instance};
use coopsearch::info::{BinaryChannelParams, RobotChannel, SeriesConfig, ServerInfoModel};
use coopsearch::phd::{ParticleGrid, Phd};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn h2(p: f64) -> f64 {
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.ln();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).ln();
    }
    h
}

/// Exact outcome distribution and `H[Z|X]` by enumerating the independent Poisson
/// particle counts `n_p ~ Poisson(w_p)` up to `cap` points per particle.
fn enumerate_counts(weights: &[f64], pd: &[Vec<f64>], mu: f64, cap: usize) -> (Vec<f64>, f64) {
    let k = pd.len();
    let n = weights.len();
    let pmf: Vec<Vec<f64>> = weights
        .iter()
        .map(|&w| {
            let mut v = vec![(-w).exp()];
            for c in 1..=cap {
                let prev = v[c - 1];
                v.push(prev * w / c as f64);
            }
            v
        })
        .collect();
    let mut probs = vec![0.0; 1 << k];
    let mut cond = 0.0;
    let mut counts = vec![0usize; n];
    loop {
        let p: f64 = counts.iter().enumerate().map(|(i, &c)| pmf[i][c]).product();
        let p0: Vec<f64> = (0..k)
            .map(|j| (-mu).exp() * counts.iter().enumerate().map(|(i, &c)| (1.0 - pd[j][i]).powi(c as i32)).product::<f64>())
            .collect();
        cond += p * p0.iter().map(|&q| h2(q)).sum::<f64>();
        for (z, slot) in probs.iter_mut().enumerate() {
            *slot += p * (0..k).map(|j| if z >> j & 1 == 1 { 1.0 - p0[j] } else { p0[j] }).product::<f64>();
        }
        let mut i = 0;
        loop {
            if i == n {
                return (probs, cond);
            }
            counts[i] += 1;
            if counts[i] <= cap {
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

fn entropy_of(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

#[test]
fn closed_forms_match_count_enumeration() {
    let cases: Vec<(Vec<f64>, Vec<Vec<f64>>, f64)> = vec![
        (vec![0.5, 0.5], vec![vec![0.8, 0.0]], 0.3),
        (vec![0.7, 0.2, 0.6], vec![vec![0.5, 0.9, 0.0], vec![0.1, 0.0, 0.7]], 0.5),
        (vec![1.1, 0.4], vec![vec![0.3, 0.6], vec![0.6, 0.3], vec![1.0, 0.2]], 0.0),
        (vec![0.9, 0.3, 0.5], vec![vec![0.2, 0.2, 0.2], vec![0.95, 0.0, 0.4]], 1.0),
    ];
    for (weights, pd, mu) in cases {
        let (probs, cond) = enumerate_counts(&weights, &pd, mu, 30);
        let ch = BinaryChannelParams::from_dense(&weights, &pd, mu, SeriesConfig::with_terms(300)).unwrap();
        for (z, &p) in probs.iter().enumerate() {
            assert!((ch.measurement_prob(z) - p).abs() < 1e-12, "p_b({z}) {} vs {p}", ch.measurement_prob(z));
        }
        assert!((ch.entropy() - entropy_of(&probs)).abs() < 1e-12);
        assert!((ch.conditional_entropy() - cond).abs() < 1e-9, "{} vs {cond}", ch.conditional_entropy());
        assert!((ch.mutual_info() - (entropy_of(&probs) - cond)).abs() < 1e-9);

        // the default 20-term series stays within its stated bound
        let short = BinaryChannelParams::from_dense(&weights, &pd, mu, SeriesConfig::default()).unwrap();
        assert!((short.conditional_entropy() - cond).abs() <= short.truncation_bound() + 1e-12);
    }
}

#[test]
fn empty_probability_of_two_particle_example() {
    let ch = BinaryChannelParams::from_dense(&[0.5, 0.5], &[vec![0.8, 0.0]], 0.3, SeriesConfig::default()).unwrap();
    assert!((ch.alpha(1) - 0.6).abs() < 1e-15);
    assert!((ch.measurement_prob(0) - (-0.7f64).exp()).abs() < 1e-15);

    let grid = Arc::new(ParticleGrid::from_cells(1.0, vec![(0, 0), (1, 0)]).unwrap());
    let belief = Phd::from_weights(grid, vec![0.5, 0.5]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mc = channel_monte_carlo(&belief, &[vec![0.8, 0.0]], 0.3, 100_000, &mut rng);
    assert!(mc.outcome_probs[0].agrees_with(ch.measurement_prob(0), 3.0));
}

#[test]
fn constant_detection_against_exact_and_sampled_references() {
    let (lambda, mu, pd) = (20.0, 0.3, 0.1);
    let (h, hc, i) = constant_pd_reference(lambda, pd, mu);
    let robot = RobotChannel::constant(lambda, pd, SeriesConfig::default());
    assert!((robot.conditional_entropy(mu) - hc).abs() <= robot.truncation_bound(mu) + 1e-12);
    let exact = RobotChannel::constant(lambda, pd, SeriesConfig::with_terms(2000));
    assert!((exact.conditional_entropy(mu) - hc).abs() < 1e-9);
    assert!((h - i - hc).abs() < 1e-15);

    // spread the same mass over 40 particles with the same detection probability
    let n = 40;
    let grid = Arc::new(ParticleGrid::from_cells(1.0, (0..n).map(|c| (c, 0)).collect()).unwrap());
    let belief = Phd::from_weights(grid, vec![lambda / n as f64; n as usize]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mc = channel_monte_carlo(&belief, &[vec![pd; n as usize]], mu, 100_000, &mut rng);
    assert!(mc.conditional_entropy.agrees_with(hc, 3.0), "{:?} vs {hc}", mc.conditional_entropy);
    assert!(mc.entropy.agrees_with(h, 3.0));
}

#[test]
fn information_grows_as_the_footprint_covers_a_point_mass() {
    // a unit mass at x = 0 seen from 0, 3 and 6 m with the default sensor profile
    let grid = Arc::new(ParticleGrid::from_cells(1.0, vec![(0, 0)]).unwrap());
    let belief = Phd::from_weights(grid, vec![1.0]).unwrap();
    let pd_at = |d: f64| if d <= 5.0 { 0.8 * (-d * d / 4.0).exp() } else { 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut closed = Vec::new();
    let mut sampled = Vec::new();
    for d in [0.0, 3.0, 6.0] {
        let field = vec![vec![pd_at(d)]];
        closed.push(BinaryChannelParams::from_dense(belief.weights(), &field, 0.3, SeriesConfig::default()).unwrap().mutual_info());
        sampled.push(channel_monte_carlo(&belief, &field, 0.3, 100_000, &mut rng).mutual_info);
    }
    assert!(closed[0] > closed[1] && closed[1] > closed[2]);
    assert!(closed[2].abs() < 1e-12);
    assert!(sampled[0].mean - 3.0 * sampled[0].std_err > sampled[1].mean + 3.0 * sampled[1].std_err);
    for (c, s) in closed.iter().zip(&sampled) {
        assert!(s.agrees_with(*c, 3.0), "{s:?} vs {c}");
    }
}

#[test]
fn coincident_robots_gain_at_most_twice() {
    let weights = [0.4, 0.9, 0.2, 0.5];
    let field = vec![0.7, 0.3, 0.0, 0.5];
    let one = BinaryChannelParams::from_dense(&weights, &[field.clone()], 0.3, SeriesConfig::default()).unwrap();
    let two = BinaryChannelParams::from_dense(&weights, &[field.clone(), field], 0.3, SeriesConfig::default()).unwrap();
    assert!(two.mutual_info() <= 2.0 * one.mutual_info() + 1e-12);
    assert!(two.mutual_info() >= one.mutual_info() - 1e-12);
}

#[test]
fn random_channels_agree_with_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for k in 1..=2 {
        let inst = random_instance(&mut rng, 6, 2.0, 1.0, k);
        let ch = BinaryChannelParams::from_dense(inst.belief.weights(), &inst.pd_fields, inst.mu, SeriesConfig::with_terms(400))
            .unwrap();
        let mc = channel_monte_carlo(&inst.belief, &inst.pd_fields, inst.mu, 50_000, &mut rng);
        for z in 0..1usize << k {
            assert!(mc.outcome_probs[z].agrees_with(ch.measurement_prob(z), 3.0));
        }
        assert!(mc.entropy.agrees_with(ch.entropy(), 3.0));
        assert!(mc.conditional_entropy.agrees_with(ch.conditional_entropy(), 3.0));
        assert!(mc.mutual_info.agrees_with(ch.mutual_info(), 3.0));
    }
}

#[test]
fn server_model_examples() {
    // N = 3, τ = 3, ρ = 0.5: 2·(1.5 + 0.5 + 0.125)
    let m = ServerInfoModel::new(3, 10.0, 100.0, 0.9, 0.5).unwrap();
    assert!((m.expected_messages(3) - 4.25).abs() < 1e-12);
    // γ = 0.9 at five hops
    let p = m.detection_prob(5);
    assert!((p - 2.0 * 0.1 * 0.9f64.powi(5)).abs() < 1e-12);
    assert!((0.9f64.powi(5) - 0.59049).abs() < 1e-12);
}
