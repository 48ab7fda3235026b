//! Posterior-predictive properties that need many draws or several modes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bnflow::bayesnet::{fit_conjugate, Dag, Prior};
use bnflow::dataset::{Dataset, Schema};
use bnflow::mcmc::{posterior_predict, EvidenceRecord, McmcConfig, PredictMode};
use bnflow::synth::{forward_sample, numbered_variables, random_cpts};

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn draws(n: usize, seed: u64) -> McmcConfig {
    McmcConfig {
        chains: 1,
        adapt_iters: 0,
        burnin_iters: 0,
        sample_iters: n,
        thin: 1,
        seed,
    }
}

#[test]
fn mcmc_predictive_approaches_exact_with_more_draws() {
    let names = ["T", "A", "B"];
    let dag = Dag::from_edges(&names, &[("A", "T"), ("T", "B")]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let net = random_cpts(&dag, numbered_variables(&names, &[4, 3, 3]), 1.0, &mut rng).unwrap();
    // few rows keep the posterior wide, so draw count matters
    let data = forward_sample(&net, 40, &mut rng).unwrap();
    let fitted = fit_conjugate(&dag, &data, Prior::default()).unwrap();
    let records = [EvidenceRecord {
        id: 0,
        evidence: vec![None, Some(1), Some(2)],
        true_state: None,
    }];
    let exact = &posterior_predict(&fitted, "T", &records, &draws(1, 0), PredictMode::Exact).unwrap()[0].probs;

    let mut decreased = 0;
    for seed in 0..20 {
        let small = posterior_predict(&fitted, "T", &records, &draws(2_000, seed), PredictMode::Mcmc).unwrap();
        let large = posterior_predict(&fitted, "T", &records, &draws(200_000, seed), PredictMode::Mcmc).unwrap();
        if tv(&large[0].probs, exact) < tv(&small[0].probs, exact) {
            decreased += 1;
        }
    }
    assert!(decreased >= 18, "TV shrank in only {decreased}/20 repetitions");
}

#[test]
fn unseen_target_states_keep_positive_mass() {
    let vars = numbered_variables(&["Y", "X"], &[10, 5]);
    let schema = Schema::new(vars).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // the target only takes values 1..8 in training
    let rows: Vec<Vec<usize>> = (0..200)
        .map(|_| {
            let y = rng.random_range(0..8);
            vec![y, (y / 2).min(4)]
        })
        .collect();
    let data = Dataset::new(schema, rows).unwrap();
    let dag = Dag::from_edges(&["Y", "X"], &[("Y", "X")]).unwrap();
    let fitted = fit_conjugate(&dag, &data, Prior::default()).unwrap();
    let records: Vec<EvidenceRecord> = (0..5)
        .map(|x| EvidenceRecord {
            id: x,
            evidence: vec![None, Some(x)],
            true_state: None,
        })
        .collect();
    for mode in [PredictMode::Exact, PredictMode::Mcmc] {
        for p in posterior_predict(&fitted, "Y", &records, &draws(5_000, 1), mode).unwrap() {
            assert_eq!(p.probs.len(), 10);
            assert!(p.probs.iter().all(|&q| q > 0.0), "{mode:?}: {:?}", p.probs);
            assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn hidden_predictors_are_summed_out() {
    let names = ["T", "A", "B", "C"];
    let dag = Dag::from_edges(&names, &[("A", "T"), ("T", "B"), ("B", "C")]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let net = random_cpts(&dag, numbered_variables(&names, &[3; 4]), 1.0, &mut rng).unwrap();
    let data = forward_sample(&net, 100, &mut rng).unwrap();
    let fitted = fit_conjugate(&dag, &data, Prior::default()).unwrap();
    let point = fitted.posterior_mean();
    let record = EvidenceRecord {
        id: 0,
        evidence: vec![None, Some(0), None, Some(2)],
        true_state: None,
    };
    let got = &posterior_predict(&fitted, "T", &[record], &draws(1, 0), PredictMode::Exact).unwrap()[0].probs;

    let mut want = [0.0; 3];
    for (t, w) in want.iter_mut().enumerate() {
        for b in 0..3 {
            *w += point.joint_probability(&[t, 0, b, 2]);
        }
    }
    let z: f64 = want.iter().sum();
    for (g, w) in got.iter().zip(want) {
        assert!((g - w / z).abs() < 1e-12);
    }
}
