//! Closed-form Dirichlet-multinomial marginal likelihoods, Bayes-Turing
//! factors and the ordered ranking of candidate structures.

use std::io::Write;

use statrs::function::gamma::ln_gamma;

use crate::bayesnet::{family_counts, Dag, Prior};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::structlearn::CandidateModel;

/// Log marginal likelihood of one family from its `q x r` count table.
pub fn family_log_ml(counts: &[f64], q: usize, r: usize, prior: Prior) -> f64 {
    let a = prior.cell_alpha(q, r);
    let a_row = a * r as f64;
    let ln_a = ln_gamma(a);
    let ln_a_row = ln_gamma(a_row);
    let mut total = 0.0;
    for row in counts.chunks(r) {
        let n_j: f64 = row.iter().sum();
        if n_j == 0.0 {
            continue;
        }
        total += ln_a_row - ln_gamma(n_j + a_row);
        for &n in row {
            if n > 0.0 {
                total += ln_gamma(n + a) - ln_a;
            }
        }
    }
    total
}

/// `ln P(D | G)` under independent Dirichlet priors on every CPT row.
pub fn log_marginal_likelihood(dag: &Dag, data: &Dataset, prior: Prior) -> Result<f64> {
    prior.validate()?;
    let cols: Vec<usize> = dag
        .nodes()
        .iter()
        .map(|n| data.schema().require(n))
        .collect::<Result<_>>()?;
    Ok((0..dag.len())
        .map(|i| {
            let pcols: Vec<usize> = dag.parents(i).iter().map(|&p| cols[p]).collect();
            let (counts, q, r) = family_counts(data, cols[i], &pcols);
            family_log_ml(&counts, q, r, prior)
        })
        .sum())
}

fn same_variables(a: &Dag, b: &Dag) -> bool {
    let mut x = a.nodes().to_vec();
    let mut y = b.nodes().to_vec();
    x.sort();
    y.sort();
    x == y
}

/// `ln P(D | G_a) - ln P(D | G_b)`; positive favours `a`.
pub fn log_bayes_factor(a: &Dag, b: &Dag, data: &Dataset, prior: Prior) -> Result<f64> {
    if !same_variables(a, b) {
        return Err(Error::VariableMismatch);
    }
    Ok(log_marginal_likelihood(a, data, prior)? - log_marginal_likelihood(b, data, prior)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub better: String,
    pub worse: String,
    pub log_bf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRanking {
    /// `(label, log marginal likelihood)`, best first.
    pub entries: Vec<(String, f64)>,
    pub chain: Vec<ChainLink>,
}

impl ModelRanking {
    /// Sorts scores (ties by label) and links consecutive models.
    pub fn from_scores(mut scores: Vec<(String, f64)>) -> ModelRanking {
        scores.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let chain = scores
            .windows(2)
            .map(|w| ChainLink {
                better: w[0].0.clone(),
                worse: w[1].0.clone(),
                log_bf: w[0].1 - w[1].1,
            })
            .collect();
        ModelRanking {
            entries: scores,
            chain,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["better", "worse", "log_bf"])?;
        for l in &self.chain {
            w.write_record([l.better.clone(), l.worse.clone(), format!("{:.6}", l.log_bf)])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseBf {
    pub model_1: String,
    pub model_2: String,
    pub log_bf: f64,
}

pub fn write_pairwise_csv<W: Write>(rows: &[PairwiseBf], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["model_1", "model_2", "log_bf"])?;
    for r in rows {
        w.write_record([r.model_1.clone(), r.model_2.clone(), format!("{:.6}", r.log_bf)])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub ranking: ModelRanking,
    /// One row per unordered pair, in candidate order.
    pub pairwise: Vec<PairwiseBf>,
    /// Every other model against the benchmark.
    pub versus_benchmark: Vec<PairwiseBf>,
    /// Models with negative log BF against the benchmark.
    pub drop_candidates: Vec<String>,
}

/// Scores every candidate and builds the pairwise, benchmark and ranking
/// tables. `benchmark` names the naive-Bayes candidate.
pub fn build_ranking(
    candidates: &[CandidateModel],
    data: &Dataset,
    prior: Prior,
    benchmark: &str,
) -> Result<Comparison> {
    if candidates.len() < 2 {
        return Err(Error::Invalid("ranking needs at least 2 candidates".into()));
    }
    for c in &candidates[1..] {
        if !same_variables(&c.dag, &candidates[0].dag) {
            return Err(Error::VariableMismatch);
        }
    }
    let scores: Vec<(String, f64)> = candidates
        .iter()
        .map(|c| Ok((c.label.clone(), log_marginal_likelihood(&c.dag, data, prior)?)))
        .collect::<Result<_>>()?;
    Ok(compare_scores(&scores, benchmark))
}

/// Builds a [`Comparison`] from precomputed log marginal likelihoods.
pub fn compare_scores(scores: &[(String, f64)], benchmark: &str) -> Comparison {
    let mut pairwise = Vec::new();
    for i in 0..scores.len() {
        for j in i + 1..scores.len() {
            pairwise.push(PairwiseBf {
                model_1: scores[i].0.clone(),
                model_2: scores[j].0.clone(),
                log_bf: scores[i].1 - scores[j].1,
            });
        }
    }
    let bench = scores.iter().find(|(l, _)| l == benchmark).map(|s| s.1);
    let mut versus_benchmark = Vec::new();
    let mut drop_candidates = Vec::new();
    if let Some(b) = bench {
        for (label, s) in scores.iter().filter(|(l, _)| l != benchmark) {
            let log_bf = s - b;
            versus_benchmark.push(PairwiseBf {
                model_1: label.clone(),
                model_2: benchmark.to_string(),
                log_bf,
            });
            if log_bf < 0.0 {
                drop_candidates.push(label.clone());
            }
        }
    }
    Comparison {
        ranking: ModelRanking::from_scores(scores.to_vec()),
        pairwise,
        versus_benchmark,
        drop_candidates,
    }
}
