//! Posterior simulation for fully observed categorical networks.
//!
//! With Dirichlet priors on every CPT row and complete training data the
//! parameter posterior factorizes into independent Dirichlet rows, so each
//! Gibbs sweep draws every row directly from its exact conditional. Draws
//! are therefore independent and adaptation/burn-in iterations only exist
//! to keep the familiar sampler configuration.
//!
//! Predictive distributions for a record average the joint `p(t, e | theta)`
//! over draws and normalize at the end; this is the Monte-Carlo estimate of
//! the exact predictive `p(t | e, D)` returned by [`PredictMode::Exact`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::bayesnet::{joint_query, unnormalized_marginal, FittedNetwork, ParamNetwork, DEFAULT_ENUMERATION_CAP};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    pub chains: usize,
    pub adapt_iters: usize,
    pub burnin_iters: usize,
    pub sample_iters: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 3,
            adapt_iters: 1000,
            burnin_iters: 1000,
            sample_iters: 10_000,
            thin: 1,
            seed: 0,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.sample_iters == 0 || self.thin == 0 {
            return Err(Error::Invalid(
                "chains, sample_iters and thin must all be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn chain_rng(&self, chain: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chain as u64 + 1);
        rng
    }
}

/// Recorded draws: `values[param][chain][draw]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    /// `(node, 1-based flattened cell index)` per parameter.
    pub params: Vec<(String, usize)>,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl TraceSet {
    pub fn name(&self, p: usize) -> String {
        format!("{}_{}", self.params[p].0, self.params[p].1)
    }

    pub fn chains(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn draws(&self) -> usize {
        self.values
            .first()
            .and_then(|c| c.first())
            .map_or(0, Vec::len)
    }

    /// Mean of one parameter over all chains.
    pub fn mean(&self, p: usize) -> f64 {
        let all: Vec<f64> = self.values[p].iter().flatten().copied().collect();
        all.iter().sum::<f64>() / all.len() as f64
    }
}

/// Draws a full parameter set from the Dirichlet posteriors into `out`.
struct PosteriorSampler {
    gammas: Vec<Vec<Gamma<f64>>>,
    means: Vec<Vec<f64>>,
    rs: Vec<usize>,
}

impl PosteriorSampler {
    fn new(net: &FittedNetwork) -> Result<Self> {
        let mut gammas = Vec::new();
        for cpt in &net.cpts {
            let g = (0..cpt.q * cpt.r)
                .map(|i| {
                    Gamma::new(cpt.alpha[i] + cpt.counts[i], 1.0)
                        .map_err(|e| Error::Invalid(format!("bad Dirichlet parameter: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            gammas.push(g);
        }
        let means = net.posterior_mean().tables;
        Ok(PosteriorSampler {
            gammas,
            means,
            rs: net.cpts.iter().map(|c| c.r).collect(),
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng, tables: &mut [Vec<f64>]) {
        for (node, g) in self.gammas.iter().enumerate() {
            let r = self.rs[node];
            let t = &mut tables[node];
            for (row_idx, row) in t.chunks_mut(r).enumerate() {
                let base = row_idx * r;
                let mut sum = 0.0;
                for k in 0..r {
                    let x = g[base + k].sample(rng);
                    row[k] = x;
                    sum += x;
                }
                if sum > 0.0 && sum.is_finite() {
                    row.iter_mut().for_each(|x| *x /= sum);
                } else {
                    // all-underflow for tiny shapes: fall back to the mean row
                    row.copy_from_slice(&self.means[node][base..base + r]);
                }
            }
        }
    }
}

/// Resolves monitor tokens: a node name selects every cell of its CPT,
/// `<node>_<k>` selects the k-th (1-based) flattened cell.
fn monitored_params(net: &FittedNetwork, tokens: &[String]) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for tok in tokens {
        if let Some(i) = net.dag.index_of(tok) {
            out.extend((0..net.cpts[i].parameter_count()).map(|c| (i, c)));
            continue;
        }
        let cell = tok
            .rsplit_once('_')
            .and_then(|(node, k)| Some((net.dag.index_of(node)?, k.parse::<usize>().ok()?)))
            .filter(|&(i, k)| k >= 1 && k <= net.cpts[i].parameter_count());
        match cell {
            Some((i, k)) => out.push((i, k - 1)),
            None => return Err(Error::UnknownVariable(tok.clone())),
        }
    }
    Ok(out)
}

fn empty_traces(net: &FittedNetwork, params: &[(usize, usize)], chains: usize) -> TraceSet {
    TraceSet {
        params: params
            .iter()
            .map(|&(i, c)| (net.dag.nodes()[i].clone(), c + 1))
            .collect(),
        values: vec![vec![Vec::new(); chains]; params.len()],
    }
}

/// Draws CPT parameters of every node of `network`.
pub fn sample_parameters(network: &FittedNetwork, config: &McmcConfig) -> Result<TraceSet> {
    sample_parameters_for(network, config, network.dag.nodes())
}

/// Draws CPT parameters, recording traces for the monitored nodes or
/// `<node>_<k>` cells only.
pub fn sample_parameters_for(
    network: &FittedNetwork,
    config: &McmcConfig,
    monitor: &[String],
) -> Result<TraceSet> {
    let out = simulate(network, config, monitor, None)?;
    Ok(out.traces)
}

/// One record to predict: node-indexed evidence, target hidden.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceRecord {
    pub id: usize,
    pub evidence: Vec<Option<usize>>,
    pub true_state: Option<usize>,
}

/// Evidence records for every data row: all network nodes observed except
/// the target, whose value becomes `true_state`.
pub fn records_from_data(network: &FittedNetwork, data: &Dataset, target: &str) -> Result<Vec<EvidenceRecord>> {
    let t = network.node_index(target)?;
    let cols: Vec<usize> = network
        .dag
        .nodes()
        .iter()
        .map(|n| data.schema().require(n))
        .collect::<Result<_>>()?;
    Ok(data
        .rows()
        .iter()
        .enumerate()
        .map(|(id, row)| EvidenceRecord {
            id,
            evidence: cols
                .iter()
                .enumerate()
                .map(|(i, &c)| if i == t { None } else { Some(row[c]) })
                .collect(),
            true_state: Some(row[cols[t]]),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorPredictive {
    pub record: usize,
    /// Ratios over target states, summing to one.
    pub probs: Vec<f64>,
    /// Expectation of the numeric state value.
    pub mean: f64,
    /// Modal state index, lowest index on ties.
    pub predicted: usize,
    pub true_state: Option<usize>,
}

/// `(mean, mode)` of a distribution over states with numeric `values`.
/// The mean is `sum v_i p_i` without renormalizing `probs`.
pub fn summarize(probs: &[f64], values: &[f64]) -> (f64, usize) {
    let mean = probs.iter().zip(values).map(|(p, v)| p * v).sum();
    let mut mode = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[mode] {
            mode = i;
        }
    }
    (mean, mode)
}

impl PosteriorPredictive {
    pub fn new(record: usize, probs: Vec<f64>, values: &[f64], true_state: Option<usize>) -> Self {
        let (mean, predicted) = summarize(&probs, values);
        PosteriorPredictive {
            record,
            probs,
            mean,
            predicted,
            true_state,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictMode {
    /// Average over posterior draws.
    Mcmc,
    /// Closed form at posterior-mean parameters.
    Exact,
}

/// Fast path when every non-target node is observed: flat table offsets
/// per (target state, node).
struct FullEvidence {
    offsets: Vec<Vec<(usize, usize)>>,
}

fn full_evidence_plan(net: &ParamNetwork, target: usize, ev: &[Option<usize>]) -> Option<FullEvidence> {
    let n = net.dag.len();
    if (0..n).any(|i| i != target && ev[i].is_none()) {
        return None;
    }
    let cards = net.cards();
    let mut assignment: Vec<usize> = ev.iter().map(|e| e.unwrap_or(0)).collect();
    let offsets = (0..cards[target])
        .map(|t| {
            assignment[target] = t;
            (0..n)
                .map(|i| {
                    let j = net.config_index(i, &assignment, &cards);
                    (i, j * cards[i] + assignment[i])
                })
                .collect()
        })
        .collect();
    Some(FullEvidence { offsets })
}

struct SimOutput {
    traces: TraceSet,
    /// `sums[record][state]` of `p(t, e | theta)` over draws.
    sums: Vec<Vec<f64>>,
}

struct PredictJob<'a> {
    target: usize,
    records: &'a [EvidenceRecord],
    cap: u128,
}

fn simulate(
    network: &FittedNetwork,
    config: &McmcConfig,
    monitored: &[String],
    job: Option<PredictJob>,
) -> Result<SimOutput> {
    config.validate()?;
    let sampler = PosteriorSampler::new(network)?;
    let params = monitored_params(network, monitored)?;
    let template = network.posterior_mean();
    let r_target = job
        .as_ref()
        .map_or(0, |j| network.cpts[j.target].r);
    let plans: Vec<Option<FullEvidence>> = job
        .as_ref()
        .map(|j| {
            j.records
                .iter()
                .map(|rec| full_evidence_plan(&template, j.target, &rec.evidence))
                .collect()
        })
        .unwrap_or_default();
    if let Some(j) = &job {
        for rec in j.records {
            if rec.evidence.len() != network.dag.len() {
                return Err(Error::Invalid("evidence length does not match network".into()));
            }
            for (i, e) in rec.evidence.iter().enumerate() {
                if let Some(s) = e {
                    if *s >= network.cpts[i].r {
                        return Err(Error::UnknownState {
                            variable: network.dag.nodes()[i].clone(),
                            value: s.to_string(),
                            row: rec.id,
                        });
                    }
                }
            }
        }
    }

    let run_chain = |chain: usize| -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let mut rng = config.chain_rng(chain);
        let mut draw = template.clone();
        let kept = config.sample_iters.div_ceil(config.thin);
        let mut trace: Vec<Vec<f64>> = vec![Vec::with_capacity(kept); params.len()];
        let n_rec = job.as_ref().map_or(0, |j| j.records.len());
        let mut sums = vec![vec![0.0; r_target]; n_rec];
        for it in 0..config.sample_iters {
            sampler.draw(&mut rng, &mut draw.tables);
            if it % config.thin != 0 {
                continue;
            }
            for (slot, &(node, cell)) in params.iter().enumerate() {
                trace[slot].push(draw.tables[node][cell]);
            }
            if let Some(j) = &job {
                for (ri, rec) in j.records.iter().enumerate() {
                    match &plans[ri] {
                        Some(plan) => {
                            for (t, offs) in plan.offsets.iter().enumerate() {
                                sums[ri][t] += offs.iter().map(|&(i, o)| draw.tables[i][o]).product::<f64>();
                            }
                        }
                        None => {
                            let p = unnormalized_marginal(&draw, &[j.target], &rec.evidence, j.cap)?;
                            sums[ri].iter_mut().zip(p).for_each(|(s, v)| *s += v);
                        }
                    }
                }
            }
        }
        Ok((trace, sums))
    };

    let results: Vec<Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..config.chains)
            .map(|c| {
                let run = &run_chain;
                s.spawn(move || run(c))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampler thread panicked"))
            .collect()
    });

    let mut traces = empty_traces(network, &params, config.chains);
    let n_rec = job.as_ref().map_or(0, |j| j.records.len());
    let mut sums = vec![vec![0.0; r_target]; n_rec];
    for (chain, res) in results.into_iter().enumerate() {
        let (trace, chain_sums) = res?;
        for (slot, t) in trace.into_iter().enumerate() {
            traces.values[slot][chain] = t;
        }
        for (acc, cs) in sums.iter_mut().zip(chain_sums) {
            acc.iter_mut().zip(cs).for_each(|(a, v)| *a += v);
        }
    }
    Ok(SimOutput { traces, sums })
}

/// Posterior-predictive target distributions for each record.
pub fn posterior_predict(
    network: &FittedNetwork,
    target: &str,
    records: &[EvidenceRecord],
    config: &McmcConfig,
    mode: PredictMode,
) -> Result<Vec<PosteriorPredictive>> {
    Ok(predict_with_traces(network, target, records, config, mode, &[])?.0)
}

/// Like [`posterior_predict`], also recording traces for `monitored` nodes
/// (mcmc mode only; exact mode returns an empty trace set).
pub fn predict_with_traces(
    network: &FittedNetwork,
    target: &str,
    records: &[EvidenceRecord],
    config: &McmcConfig,
    mode: PredictMode,
    monitored: &[String],
) -> Result<(Vec<PosteriorPredictive>, TraceSet)> {
    let t = network.node_index(target)?;
    let values: Vec<f64> = (0..network.cpts[t].r)
        .map(|s| network.variables[t].numeric_value(s))
        .collect();
    match mode {
        PredictMode::Exact => {
            let pm = network.posterior_mean();
            let preds = records
                .iter()
                .map(|rec| {
                    let probs = joint_query(&pm, &rec.evidence, t, DEFAULT_ENUMERATION_CAP)?;
                    Ok(PosteriorPredictive::new(rec.id, probs, &values, rec.true_state))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((preds, empty_traces(network, &[], 0)))
        }
        PredictMode::Mcmc => {
            let out = simulate(
                network,
                config,
                monitored,
                Some(PredictJob {
                    target: t,
                    records,
                    cap: DEFAULT_ENUMERATION_CAP,
                }),
            )?;
            let preds = records
                .iter()
                .zip(out.sums)
                .map(|(rec, s)| {
                    let total: f64 = s.iter().sum();
                    if total <= 0.0 {
                        return Err(Error::Invalid(format!("record {} has zero probability", rec.id)));
                    }
                    let probs = s.into_iter().map(|v| v / total).collect();
                    Ok(PosteriorPredictive::new(rec.id, probs, &values, rec.true_state))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((preds, out.traces))
        }
    }
}

/// Prediction table: `state_<label>` columns in percent (2 decimals), then
/// mean, predicted and true state labels.
pub fn write_predictions_csv<W: Write>(
    preds: &[PosteriorPredictive],
    target_states: &[String],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["record".to_string()];
    header.extend(target_states.iter().map(|s| format!("state_{s}")));
    header.extend(["mean".into(), "predicted".into(), "true".into()]);
    w.write_record(&header)?;
    for p in preds {
        let mut row = vec![p.record.to_string()];
        row.extend(p.probs.iter().map(|v| format!("{:.2}", 100.0 * v)));
        row.push(format!("{:.4}", p.mean));
        row.push(target_states[p.predicted].clone());
        row.push(p.true_state.map(|s| target_states[s].clone()).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Split-chain potential scale reduction factor for every parameter.
pub fn gelman_rubin(traces: &TraceSet) -> Result<Vec<(String, f64)>> {
    if traces.chains() < 2 {
        return Err(Error::Invalid("r_hat needs at least 2 chains".into()));
    }
    (0..traces.params.len())
        .map(|p| {
            let chains = &traces.values[p];
            let n = chains.iter().map(Vec::len).min().unwrap_or(0);
            if n < 10 {
                return Err(Error::Invalid("r_hat needs at least 10 draws per chain".into()));
            }
            let half = n / 2;
            let splits: Vec<&[f64]> = chains
                .iter()
                .flat_map(|c| [&c[..half], &c[n - half..n]])
                .collect();
            Ok((traces.name(p), split_rhat(&splits).ok_or_else(|| Error::ConstantChain(traces.name(p)))?))
        })
        .collect()
}

/// Classic R-hat over equally long sequences; `None` when the pooled
/// within-sequence variance is zero.
fn split_rhat(seqs: &[&[f64]]) -> Option<f64> {
    let m = seqs.len() as f64;
    let n = seqs[0].len() as f64;
    let means: Vec<f64> = seqs.iter().map(|s| s.iter().sum::<f64>() / n).collect();
    let grand = means.iter().sum::<f64>() / m;
    let b = n / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = seqs
        .iter()
        .zip(&means)
        .map(|(s, mu)| s.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / m;
    if w <= 0.0 {
        return None;
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    Some((var_plus / w).sqrt())
}

/// Gaussian kernel density on a 512-point grid spanning the draws plus four
/// bandwidths on either side (Silverman's rule).
pub fn kernel_density(draws: &[f64]) -> Vec<(f64, f64)> {
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let sd = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((n - 1.0) * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = if spread > 0.0 {
        0.9 * spread * n.powf(-0.2)
    } else {
        1e-3
    };
    let (lo, hi) = (sorted[0] - 4.0 * h, sorted[sorted.len() - 1] + 4.0 * h);
    let grid = 512;
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    (0..grid)
        .map(|g| {
            let x = lo + (hi - lo) * g as f64 / (grid - 1) as f64;
            // draws beyond 6 bandwidths contribute nothing measurable
            let from = sorted.partition_point(|&v| v < x - 6.0 * h);
            let to = sorted.partition_point(|&v| v <= x + 6.0 * h);
            let d: f64 = sorted[from..to]
                .iter()
                .map(|&v| (-0.5 * ((x - v) / h).powi(2)).exp())
                .sum();
            (x, d * norm)
        })
        .collect()
}

/// Writes `trace_<node>_<index>.csv` (chain, iteration, value) and
/// `density_<node>_<index>.csv` (chain, value, density) per parameter.
pub fn export_traces(traces: &TraceSet, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for p in 0..traces.params.len() {
        let name = traces.name(p);
        let trace_path = out_dir.join(format!("trace_{name}.csv"));
        let f = fs::File::create(&trace_path).map_err(|e| Error::io(&trace_path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(f));
        w.write_record(["chain", "iteration", "value"])?;
        for (c, chain) in traces.values[p].iter().enumerate() {
            for (i, v) in chain.iter().enumerate() {
                w.write_record([(c + 1).to_string(), (i + 1).to_string(), format!("{v:.8}")])?;
            }
        }
        w.flush().map_err(|e| Error::io(&trace_path, e))?;
        written.push(trace_path);

        let dens_path = out_dir.join(format!("density_{name}.csv"));
        let f = fs::File::create(&dens_path).map_err(|e| Error::io(&dens_path, e))?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(f));
        w.write_record(["chain", "value", "density"])?;
        for (c, chain) in traces.values[p].iter().enumerate() {
            if chain.is_empty() {
                continue;
            }
            for (x, d) in kernel_density(chain) {
                w.write_record([(c + 1).to_string(), format!("{x:.8}"), format!("{d:.8}")])?;
            }
        }
        w.flush().map_err(|e| Error::io(&dens_path, e))?;
        written.push(dens_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::{fit_conjugate, Dag, Prior};
    use crate::dataset::{Role, Schema, VariableSpec};
    use approx::assert_abs_diff_eq;

    fn root_network(r: usize, rows: Vec<Vec<usize>>) -> FittedNetwork {
        let schema = Schema::new(vec![VariableSpec::numbered("T", r, Role::Target)]).unwrap();
        let data = Dataset::new(schema, rows).unwrap();
        fit_conjugate(&Dag::new(&["T"]).unwrap(), &data, Prior::default()).unwrap()
    }

    fn config(samples: usize, seed: u64) -> McmcConfig {
        McmcConfig {
            sample_iters: samples,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn prior_draws_centre_on_uniform() {
        let net = root_network(4, vec![]);
        let tr = sample_parameters(&net, &config(4000, 1)).unwrap();
        let n = (tr.chains() * tr.draws()) as f64;
        // Dir(1,1,1,1) marginal variance (1/4)(3/4)/5
        let se = (0.25 * 0.75 / 5.0 / n).sqrt();
        for p in 0..4 {
            assert!((tr.mean(p) - 0.25).abs() < 4.0 * se, "{}", tr.mean(p));
        }
    }

    #[test]
    fn posterior_draws_centre_on_dirichlet_mean() {
        let net = root_network(2, vec![vec![0], vec![0], vec![1]]);
        let tr = sample_parameters(&net, &config(5000, 2)).unwrap();
        let n = (tr.chains() * tr.draws()) as f64;
        // Dir(3,2): mean 0.6, variance 0.6*0.4/6
        let se = (0.6 * 0.4 / 6.0 / n).sqrt();
        assert!((tr.mean(0) - 0.6).abs() < 4.0 * se, "{} {}", tr.mean(0), se);
    }

    #[test]
    fn draws_lie_on_simplex_and_are_deterministic() {
        let net = root_network(3, vec![vec![2], vec![1]]);
        let a = sample_parameters(&net, &config(300, 5)).unwrap();
        let b = sample_parameters(&net, &config(300, 5)).unwrap();
        assert_eq!(a, b);
        for c in 0..a.chains() {
            for d in 0..a.draws() {
                let s: f64 = (0..3).map(|p| a.values[p][c][d]).sum();
                assert!((s - 1.0).abs() < 1e-9);
                assert!((0..3).all(|p| a.values[p][c][d] >= 0.0));
            }
        }
        let c = sample_parameters(&net, &config(300, 6)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn monitor_tokens() {
        let net = root_network(3, vec![]);
        let tr = sample_parameters_for(&net, &config(5, 0), &["T_2".to_string()]).unwrap();
        assert_eq!(tr.params, vec![("T".to_string(), 2)]);
        assert!(sample_parameters_for(&net, &config(5, 0), &["T_4".to_string()]).is_err());
        assert!(sample_parameters_for(&net, &config(5, 0), &["U".to_string()]).is_err());
    }

    #[test]
    fn thinning_keeps_every_kth_draw() {
        let net = root_network(2, vec![]);
        let cfg = McmcConfig {
            thin: 3,
            ..config(10, 1)
        };
        let tr = sample_parameters(&net, &cfg).unwrap();
        assert_eq!(tr.draws(), 4);
    }

    #[test]
    fn skewed_row_summary() {
        let percent = [0.03, 0.01, 0.15, 0.99, 23.94, 70.8, 3.82, 0.1, 0.07, 0.1];
        let probs: Vec<f64> = percent.iter().map(|p| p / 100.0).collect();
        let values: Vec<f64> = (1..=10).map(f64::from).collect();
        let (mean, mode) = summarize(&probs, &values);
        assert_abs_diff_eq!(mean, 5.7813, epsilon = 1e-9);
        assert_eq!(values[mode], 6.0);
    }

    #[test]
    fn mode_ties_pick_lowest_state() {
        assert_eq!(summarize(&[0.4, 0.4, 0.2], &[1.0, 2.0, 3.0]).1, 0);
    }

    #[test]
    fn single_node_predictive_is_posterior_mean() {
        let net = root_network(3, vec![vec![0], vec![0], vec![2]]);
        let rec = EvidenceRecord {
            id: 0,
            evidence: vec![None],
            true_state: None,
        };
        let p = posterior_predict(&net, "T", std::slice::from_ref(&rec), &config(10, 0), PredictMode::Exact).unwrap();
        let expect = [3.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0];
        for (a, b) in p[0].probs.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let m = posterior_predict(&net, "T", &[rec], &config(20000, 0), PredictMode::Mcmc).unwrap();
        for (a, b) in m[0].probs.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 0.01);
        }
    }

    fn chains_from(values: Vec<Vec<f64>>) -> TraceSet {
        TraceSet {
            params: vec![("X".into(), 1)],
            values: vec![values],
        }
    }

    #[test]
    fn rhat_cases() {
        let net = root_network(3, vec![vec![0], vec![1]]);
        let tr = sample_parameters(&net, &config(2000, 3)).unwrap();
        for (_, r) in gelman_rubin(&tr).unwrap() {
            assert!(r < 1.05, "{r}");
        }
        let lo: Vec<f64> = (0..100).map(|i| 0.1 + 1e-4 * (i % 7) as f64).collect();
        let hi: Vec<f64> = (0..100).map(|i| 0.9 + 1e-4 * (i % 5) as f64).collect();
        let r = gelman_rubin(&chains_from(vec![lo, hi])).unwrap()[0].1;
        assert!(r > 1.1, "{r}");
        let flat = chains_from(vec![vec![0.5; 20], vec![0.5; 20]]);
        assert!(matches!(gelman_rubin(&flat), Err(Error::ConstantChain(_))));
        assert!(gelman_rubin(&chains_from(vec![vec![0.1, 0.2]; 2])).is_err());
    }

    #[test]
    fn trace_export_layout() {
        let net = root_network(2, vec![vec![1]]);
        let cfg = McmcConfig {
            sample_iters: 1000,
            ..config(1000, 9)
        };
        let tr = sample_parameters(&net, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = export_traces(&tr, dir.path()).unwrap();
        assert!(files.iter().any(|f| f.ends_with("trace_T_1.csv")));
        let text = fs::read_to_string(dir.path().join("trace_T_2.csv")).unwrap();
        assert_eq!(text.lines().count(), 1 + 3000);
        let dens = fs::read_to_string(dir.path().join("density_T_1.csv")).unwrap();
        let pts: Vec<(f64, f64)> = dens
            .lines()
            .skip(1)
            .filter(|l| l.starts_with("1,"))
            .map(|l| {
                let f: Vec<f64> = l.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
                (f[0], f[1])
            })
            .collect();
        let area: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
        assert!((area - 1.0).abs() < 0.01, "{area}");
    }
}
