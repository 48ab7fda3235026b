//! Classification metrics and the k-fold cross-validation harness.

use std::io::Write;

use crate::bayesnet::{fit_conjugate, FittedNetwork, Prior};
use crate::dataset::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::mcmc::{posterior_predict, records_from_data, McmcConfig, PosteriorPredictive, PredictMode};
use crate::structlearn::CandidateModel;

/// `matrix[pred][truth]` counts over `r` states.
pub fn confusion_matrix(pred: &[usize], truth: &[usize], r: usize) -> Result<Vec<Vec<usize>>> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    let mut m = vec![vec![0; r]; r];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= r || t >= r {
            return Err(Error::Invalid(format!("state index out of range for {r} states")));
        }
        m[p][t] += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RmseKind {
    /// `sqrt(mean((pred - truth)^2))`.
    #[default]
    Standard,
    /// `||pred - truth|| / n`.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub cases: usize,
    pub correct: usize,
    /// Predictions off by more than one scale step.
    pub error_ge_1: usize,
    pub accuracy: f64,
    pub rmse: f64,
}

pub fn metrics(pred: &[f64], truth: &[f64]) -> Result<Metrics> {
    metrics_with(pred, truth, RmseKind::Standard)
}

pub fn metrics_with(pred: &[f64], truth: &[f64], kind: RmseKind) -> Result<Metrics> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch(pred.len(), truth.len()));
    }
    if pred.is_empty() {
        return Err(Error::Empty("no predictions to score".into()));
    }
    let n = pred.len();
    let correct = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    let error_ge_1 = pred.iter().zip(truth).filter(|(p, t)| (*p - *t).abs() > 1.0).count();
    let ss: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    let rmse = match kind {
        RmseKind::Standard => (ss / n as f64).sqrt(),
        RmseKind::Literal => ss.sqrt() / n as f64,
    };
    Ok(Metrics {
        cases: n,
        correct,
        error_ge_1,
        accuracy: correct as f64 / n as f64,
        rmse,
    })
}

/// Metrics from predictive summaries that carry a true state.
pub fn metrics_from_predictions(preds: &[PosteriorPredictive], values: &[f64], kind: RmseKind) -> Result<Metrics> {
    let mut p = Vec::with_capacity(preds.len());
    let mut t = Vec::with_capacity(preds.len());
    for pp in preds {
        let truth = pp
            .true_state
            .ok_or_else(|| Error::Invalid(format!("record {} has no true state", pp.record)))?;
        p.push(values[pp.predicted]);
        t.push(values[truth]);
    }
    metrics_with(&p, &t, kind)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictConfig {
    pub mode: PredictMode,
    pub mcmc: McmcConfig,
    pub prior: Prior,
    pub rmse: RmseKind,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            mode: PredictMode::Exact,
            mcmc: McmcConfig::default(),
            prior: Prior::default(),
            rmse: RmseKind::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldMetrics {
    pub model: String,
    pub fold: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvSummary {
    pub model: String,
    pub accuracy: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// Ordered by (candidate order, fold).
    pub folds: Vec<FoldMetrics>,
    /// Per-model fold averages in candidate order.
    pub averages: Vec<CvSummary>,
    /// Label with the lowest average RMSE; earlier candidate on ties.
    pub best: String,
}

impl CvResult {
    /// Per-fold rows followed by one `mean` row per model.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["model", "fold", "cases", "correct", "accuracy", "rmse"])?;
        for f in &self.folds {
            w.write_record([
                f.model.clone(),
                (f.fold + 1).to_string(),
                f.metrics.cases.to_string(),
                f.metrics.correct.to_string(),
                format!("{:.4}", f.metrics.accuracy),
                format!("{:.4}", f.metrics.rmse),
            ])?;
        }
        for a in &self.averages {
            w.write_record([
                a.model.clone(),
                "mean".into(),
                String::new(),
                String::new(),
                format!("{:.4}", a.accuracy),
                format!("{:.4}", a.rmse),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Summary table with columns (Algorithm, Accuracy, RMSE).
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["Algorithm", "Accuracy", "RMSE"])?;
        for a in &self.averages {
            w.write_record([a.model.clone(), format!("{:.4}", a.accuracy), format!("{:.4}", a.rmse)])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }
}

fn target_values(data: &Dataset) -> Vec<f64> {
    let t = data.schema().target();
    (0..t.cardinality()).map(|s| t.numeric_value(s)).collect()
}

/// Network for fold `fold`, fitted on training rows outside that fold.
pub fn fit_fold(model: &CandidateModel, data: &Dataset, split: &SplitPlan, fold: usize, prior: Prior) -> Result<FittedNetwork> {
    fit_conjugate(&model.dag, &data.subset(&split.fold_train(fold)), prior)
}

/// Fits `net` and predicts the target for every row of `rows`.
pub fn predict_rows(
    net: &FittedNetwork,
    rows: &Dataset,
    config: &PredictConfig,
) -> Result<Vec<PosteriorPredictive>> {
    let target = rows.schema().target().name.clone();
    let records = records_from_data(net, rows, &target)?;
    posterior_predict(net, &target, &records, &config.mcmc, config.mode)
}

pub fn cross_validate(
    candidates: &[CandidateModel],
    data: &Dataset,
    split: &SplitPlan,
    config: &PredictConfig,
) -> Result<CvResult> {
    if candidates.is_empty() {
        return Err(Error::Invalid("cross-validation needs at least one candidate".into()));
    }
    if split.n != data.n_rows() {
        return Err(Error::InvalidSplit(format!(
            "split covers {} rows, dataset has {}",
            split.n,
            data.n_rows()
        )));
    }
    let values = target_values(data);
    let jobs: Vec<(usize, usize)> = (0..candidates.len())
        .flat_map(|m| (0..split.folds.len()).map(move |f| (m, f)))
        .collect();
    let run = |&(m, f): &(usize, usize)| -> Result<FoldMetrics> {
        let model = &candidates[m];
        let net = fit_fold(model, data, split, f, config.prior)
            .map_err(|e| Error::Invalid(format!("model {} fold {}: {e}", model.label, f + 1)))?;
        let preds = predict_rows(&net, &data.subset(&split.folds[f]), config)?;
        Ok(FoldMetrics {
            model: model.label.clone(),
            fold: f,
            metrics: metrics_from_predictions(&preds, &values, config.rmse)?,
        })
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len());
    let results: Vec<Result<FoldMetrics>> = if config.mode == PredictMode::Exact && workers > 1 {
        let chunk = jobs.len().div_ceil(workers);
        std::thread::scope(|s| {
            let handles: Vec<_> = jobs
                .chunks(chunk)
                .map(|part| {
                    let run = &run;
                    s.spawn(move || part.iter().map(run).collect::<Vec<_>>())
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("cv worker panicked"))
                .collect()
        })
    } else {
        // mcmc mode already runs chains in parallel
        jobs.iter().map(run).collect()
    };
    let folds = results.into_iter().collect::<Result<Vec<_>>>()?;

    let k = split.folds.len() as f64;
    let averages: Vec<CvSummary> = candidates
        .iter()
        .map(|c| {
            let rows = folds.iter().filter(|f| f.model == c.label);
            let (acc, rmse) = rows.fold((0.0, 0.0), |(a, r), f| (a + f.metrics.accuracy, r + f.metrics.rmse));
            CvSummary {
                model: c.label.clone(),
                accuracy: acc / k,
                rmse: rmse / k,
            }
        })
        .collect();
    let mut best = 0;
    for (i, a) in averages.iter().enumerate() {
        if a.rmse < averages[best].rmse {
            best = i;
        }
    }
    Ok(CvResult {
        best: averages[best].model.clone(),
        folds,
        averages,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalEvaluation {
    pub network: FittedNetwork,
    pub metrics: Metrics,
    pub predictions: Vec<PosteriorPredictive>,
    pub confusion: Vec<Vec<usize>>,
}

/// Retrains `best` on the full training set and scores the test rows.
pub fn final_evaluation(
    best: &CandidateModel,
    data: &Dataset,
    split: &SplitPlan,
    config: &PredictConfig,
) -> Result<FinalEvaluation> {
    let network = fit_conjugate(&best.dag, &data.subset(&split.train_idx), config.prior)?;
    let predictions = predict_rows(&network, &data.subset(&split.test_idx), config)?;
    let values = target_values(data);
    let metrics = metrics_from_predictions(&predictions, &values, config.rmse)?;
    let pred: Vec<usize> = predictions.iter().map(|p| p.predicted).collect();
    let truth: Vec<usize> = predictions.iter().filter_map(|p| p.true_state).collect();
    let confusion = confusion_matrix(&pred, &truth, values.len())?;
    Ok(FinalEvaluation {
        network,
        metrics,
        predictions,
        confusion,
    })
}

/// One-row table with columns (Cases, Correct, Error>=1, Accuracy, RMSE).
pub fn write_metrics_csv<W: Write>(m: &Metrics, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Cases", "Correct", "Error>=1", "Accuracy", "RMSE"])?;
    w.write_record([
        m.cases.to_string(),
        m.correct.to_string(),
        m.error_ge_1.to_string(),
        format!("{:.4}", m.accuracy),
        format!("{:.4}", m.rmse),
    ])?;
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Confusion matrix with predicted states as rows and true states as columns.
pub fn write_confusion_csv<W: Write>(m: &[Vec<usize>], labels: &[String], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["predicted\\true".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in labels.iter().zip(m) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(usize::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::Dag;
    use crate::dataset::{make_split, Role, Schema, VariableSpec};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn accuracy_of_12_in_35() {
        let truth = vec![1.0; 35];
        let pred: Vec<f64> = (0..35).map(|i| if i < 12 { 1.0 } else { 2.0 }).collect();
        let m = metrics(&pred, &truth).unwrap();
        assert_eq!((m.cases, m.correct), (35, 12));
        assert_eq!(format!("{:.4}", m.accuracy), "0.3429");
    }

    #[test]
    fn hand_rmse() {
        let m = metrics(&[6.0, 7.0, 4.0, 4.0], &[5.0, 6.0, 4.0, 5.0]).unwrap();
        assert_abs_diff_eq!(m.accuracy, 0.25);
        assert_abs_diff_eq!(m.rmse, 0.75f64.sqrt(), epsilon = 1e-12);
        assert_eq!(m.error_ge_1, 0);
        let lit = metrics_with(&[6.0, 7.0, 4.0, 4.0], &[5.0, 6.0, 4.0, 5.0], RmseKind::Literal).unwrap();
        assert_abs_diff_eq!(lit.rmse, 3f64.sqrt() / 4.0, epsilon = 1e-12);
        let far = metrics(&[1.0, 3.0], &[2.0, 1.0]).unwrap();
        assert_eq!(far.error_ge_1, 1);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(metrics(&[], &[]), Err(Error::Empty(_))));
        assert!(matches!(metrics(&[1.0], &[]), Err(Error::LengthMismatch(1, 0))));
    }

    #[test]
    fn confusion_shapes() {
        let m = confusion_matrix(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        assert_eq!(m, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let m = confusion_matrix(&[1, 1], &[0, 0], 3).unwrap();
        assert_eq!(m[1][0], 2);
        assert_eq!(m.iter().flatten().sum::<usize>(), 2);
        assert!(confusion_matrix(&[0], &[0, 1], 2).is_err());
    }

    proptest! {
        #[test]
        fn metrics_invariants(pairs in prop::collection::vec((1u8..=5, 1u8..=5), 1..40), rot in 0usize..40) {
            let pred: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let truth: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let m = metrics(&pred, &truth).unwrap();
            prop_assert!((0.0..=1.0).contains(&m.accuracy));
            prop_assert!(m.correct <= m.cases);
            prop_assert_eq!(m.rmse == 0.0, m.correct == m.cases);
            let k = rot % pairs.len();
            let mut pp = pred.clone();
            let mut tt = truth.clone();
            pp.rotate_left(k);
            tt.rotate_left(k);
            let r = metrics(&pp, &tt).unwrap();
            prop_assert_eq!(m.correct, r.correct);
            prop_assert!((m.rmse - r.rmse).abs() < 1e-12);
            let ps: Vec<usize> = pairs.iter().map(|p| p.0 as usize - 1).collect();
            let ts: Vec<usize> = pairs.iter().map(|p| p.1 as usize - 1).collect();
            let cm = confusion_matrix(&ps, &ts, 5).unwrap();
            let trace: usize = (0..5).map(|i| cm[i][i]).sum();
            prop_assert_eq!(trace, m.correct);
        }
    }

    fn toy() -> (Dataset, CandidateModel) {
        let schema = Schema::new(vec![
            VariableSpec::numbered("T", 3, Role::Target),
            VariableSpec::numbered("A", 2, Role::Predictor),
        ])
        .unwrap();
        let rows = (0..60).map(|i| vec![i % 3, (i / 3) % 2]).collect();
        let data = Dataset::new(schema, rows).unwrap();
        let dag = Dag::from_edges(&["T", "A"], &[("T", "A")]).unwrap();
        (data, CandidateModel::new("m", dag, "test"))
    }

    #[test]
    fn cv_is_deterministic_and_counted() {
        let (data, model) = toy();
        let split = make_split(60, 0.2, 4, 0.1, 3).unwrap();
        let other = CandidateModel::new("empty", Dag::new(&["T", "A"]).unwrap(), "test");
        let cfg = PredictConfig::default();
        let a = cross_validate(&[model.clone(), other.clone()], &data, &split, &cfg).unwrap();
        let b = cross_validate(&[model.clone(), other], &data, &split, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.folds.len(), 8);
        let single = cross_validate(&[model], &data, &split, &cfg).unwrap();
        assert_eq!(single.best, "m");
    }

    #[test]
    fn validation_rows_never_reach_training_counts() {
        // canary: every validation row carries A=1, every other row A=0
        let (data, model) = toy();
        let split = make_split(60, 0.2, 4, 0.1, 5).unwrap();
        let mut rows = data.rows().to_vec();
        for r in rows.iter_mut() {
            r[1] = 0;
        }
        for f in &split.folds {
            for &i in f {
                rows[i][1] = 1;
            }
        }
        let canary = Dataset::new(data.schema().clone(), rows).unwrap();
        for f in 0..split.folds.len() {
            let net = fit_fold(&model, &canary, &split, f, Prior::default()).unwrap();
            let cpt = net.cpt("A").unwrap();
            let fold_rows_in_training = split.fold_train(f).iter().filter(|&&i| split.folds[f].contains(&i)).count();
            assert_eq!(fold_rows_in_training, 0);
            let total: f64 = cpt.counts.iter().sum();
            assert_eq!(total as usize, split.train_idx.len() - split.fold_size);
            let a1: f64 = cpt.counts.iter().skip(1).step_by(2).sum();
            assert_eq!(a1 as usize, (split.folds.len() - 1) * split.fold_size);
        }
    }

    #[test]
    fn final_evaluation_shape() {
        let (data, model) = toy();
        let split = make_split(60, 0.2, 4, 0.1, 3).unwrap();
        let fe = final_evaluation(&model, &data, &split, &PredictConfig::default()).unwrap();
        assert_eq!(fe.predictions.len(), 12);
        let trace: usize = (0..3).map(|i| fe.confusion[i][i]).sum();
        assert_eq!(trace, fe.metrics.correct);
        let mut buf = Vec::new();
        write_metrics_csv(&fe.metrics, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("Cases,Correct,Error>=1,Accuracy,RMSE\n"));
    }
}
