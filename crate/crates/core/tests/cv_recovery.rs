//! Cross-validation prefers the data-generating structure over perturbed
//! versions of it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bnflow::bayesnet::Dag;
use bnflow::dataset::make_split;
use bnflow::evaluation::{cross_validate, PredictConfig};
use bnflow::structlearn::CandidateModel;
use bnflow::synth::{forward_sample, noisy_copy_cpts, numbered_variables, random_dag};

/// Truth with one random edge removed, and truth with one non-edge added.
fn perturbed(truth: &Dag, rng: &mut impl Rng) -> Vec<Dag> {
    let edges = truth.edges();
    let mut dropped = truth.clone();
    let (p, c) = edges[rng.random_range(0..edges.len())];
    dropped.remove_edge_idx(p, c).unwrap();

    let mut added = truth.clone();
    loop {
        let (a, b) = (rng.random_range(0..truth.len()), rng.random_range(0..truth.len()));
        if a != b && !truth.has_edge(a, b) && !truth.has_edge(b, a) && added.add_edge_idx(a, b).is_ok() {
            break;
        }
    }
    vec![dropped, added]
}

#[test]
fn generating_structure_wins_most_seeds() {
    let names = ["T", "A", "B", "C", "D", "E"];
    let mut wins = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let truth = loop {
            let d = random_dag(&names, 0.5, 2, &mut rng).unwrap();
            if d.edge_count() >= 3 {
                break d;
            }
        };
        let net = noisy_copy_cpts(&truth, numbered_variables(&names, &[4; 6]), 0.6, &mut rng).unwrap();
        let data = forward_sample(&net, 3000, &mut rng).unwrap();
        let mut models = vec![CandidateModel::new("truth", truth.clone(), "generator")];
        for (i, d) in perturbed(&truth, &mut rng).into_iter().enumerate() {
            models.push(CandidateModel::new(format!("perturbed{i}"), d, "perturbation"));
        }
        let split = make_split(3000, 0.15, 10, 0.08, seed).unwrap();
        let cv = cross_validate(&models, &data, &split, &PredictConfig::default()).unwrap();
        if cv.best == "truth" {
            wins += 1;
        }
    }
    assert!(wins > 10, "truth won {wins}/20 seeds");
}
