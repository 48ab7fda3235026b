//! File-based four-phase workflow: select, learn, compare, cv, fit-predict
//! and a markdown report. Each phase reads what earlier phases wrote under
//! the output directory.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use log::info;

pub use config::{Learner, PipelineConfig};

use crate::bayesnet::{fit_conjugate, sensitivity_report, Dag, FittedNetwork, DEFAULT_ENUMERATION_CAP};
use crate::dataset::{ingest_csv, make_split, CsvOptions, Dataset, Schema, SplitPlan};
use crate::error::{Error, Result};
use crate::evaluation::{
    cross_validate, final_evaluation, write_confusion_csv, write_metrics_csv, CvResult, FinalEvaluation,
    PredictConfig,
};
use crate::infotheory::{build_score_tables, histogram, ScoreTables};
use crate::mcmc::{export_traces, gelman_rubin, sample_parameters_for, write_predictions_csv, TraceSet};
use crate::modelselect::{build_ranking, write_pairwise_csv, Comparison};
use crate::structlearn::{
    bd_learn, chow_liu, hill_climb, naive, tan, CandidateModel, EdgeConstraints, HillClimbOptions, Orientation,
};

/// Process exit code for an error: 2 config, 3 data, 4 diagnostics, 1 other.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Constraints(_) | Error::Orientation(_) | Error::InvalidSplit(_) => 2,
        Error::Io { .. }
        | Error::Csv(_)
        | Error::Parse { .. }
        | Error::Schema(_)
        | Error::MissingColumn(_)
        | Error::UnknownState { .. }
        | Error::Empty(_)
        | Error::DegenerateBinning { .. }
        | Error::VariableMismatch
        | Error::UnknownVariable(_) => 3,
        Error::Diagnostics(_) | Error::ConstantChain(_) => 4,
        _ => 1,
    }
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_required(path: &Path, phase: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("{}: {e} (run `{phase}` first)", path.display()))
    })
}

fn read_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableSelection {
    pub variable: String,
    pub max_mi_norm: f64,
    pub max_cmi_norm: f64,
    pub keep: bool,
    pub overridden: bool,
}

pub struct SelectOutput {
    pub tables: ScoreTables,
    pub selection: Vec<VariableSelection>,
}

impl SelectOutput {
    pub fn drop_list(&self) -> Vec<String> {
        self.selection.iter().filter(|s| !s.keep).map(|s| s.variable.clone()).collect()
    }
}

/// Target-centred selection: a predictor is proposed for dropping when both
/// its MI' with the target and its best CMI' with the target given any third
/// variable fall below the thresholds.
pub fn propose_selection(
    tables: &ScoreTables,
    schema: &Schema,
    min_mi: f64,
    min_cmi: f64,
    keep: &[String],
) -> Result<Vec<VariableSelection>> {
    for k in keep {
        schema.require(k)?;
    }
    let target = &schema.target().name;
    let involves = |x: &str, y: &str, v: &str| (x == v && y == target) || (y == v && x == target);
    Ok(schema
        .variables()
        .iter()
        .filter(|v| &v.name != target)
        .map(|v| {
            let max_mi = tables
                .pairwise
                .entries
                .iter()
                .filter(|e| involves(&e.x, &e.y, &v.name))
                .map(|e| e.mi_norm)
                .fold(0.0, f64::max);
            let max_cmi = tables
                .triple
                .entries
                .iter()
                .filter(|e| involves(&e.x, &e.y, &v.name))
                .filter_map(|e| e.cmi_norm)
                .fold(0.0, f64::max);
            let by_score = max_mi >= min_mi || max_cmi >= min_cmi;
            let forced = keep.contains(&v.name);
            VariableSelection {
                variable: v.name.clone(),
                max_mi_norm: max_mi,
                max_cmi_norm: max_cmi,
                keep: by_score || forced,
                overridden: forced && !by_score,
            }
        })
        .collect())
}

pub struct FitOutput {
    pub chosen: String,
    pub evaluation: FinalEvaluation,
    pub traces: TraceSet,
    pub rhat: Vec<(String, f64)>,
}

pub struct Pipeline {
    pub config: PipelineConfig,
    pub out: PathBuf,
}

impl Pipeline {
    /// `out` overrides the config's output directory; one of them is required.
    pub fn new(config: PipelineConfig, out: Option<PathBuf>) -> Result<Pipeline> {
        let out = match (out, &config.out) {
            (Some(o), _) => o,
            (None, Some(o)) => config.resolve(o),
            (None, None) => return Err(Error::Config("no output directory (use --out or run.out)".into())),
        };
        Ok(Pipeline { config, out })
    }

    fn dir(&self, phase: &str) -> PathBuf {
        self.out.join(phase)
    }

    fn write_effective_config(&self) -> Result<()> {
        let text = format!(
            "# effective configuration; rerun with --config <this file> --out <dir>\n{}",
            self.config.resolved().to_ini()
        );
        write_text(&self.out.join("effective_config.ini"), &text)
    }

    pub fn load_data(&self) -> Result<Dataset> {
        let schema = Schema::from_file(&self.config.resolve(&self.config.schema))?;
        if let Some(t) = &self.config.target {
            if &schema.target().name != t {
                return Err(Error::Config(format!(
                    "config target `{t}` differs from schema target `{}`",
                    schema.target().name
                )));
            }
        }
        let opts = CsvOptions {
            delimiter: self.config.delimiter,
            ..CsvOptions::default()
        };
        ingest_csv(&self.config.resolve(&self.config.dataset), &schema, &opts)
    }

    /// Dataset restricted to the selected variables when selection applies.
    fn modelling_data(&self) -> Result<Dataset> {
        let data = self.load_data()?;
        if !self.config.apply_selection {
            return Ok(data);
        }
        let path = self.dir("select").join("selected_variables.txt");
        let names = read_lines(&read_required(&path, "select")?);
        data.project(&names)
    }

    pub fn split(&self, n: usize) -> Result<SplitPlan> {
        make_split(
            n,
            self.config.test_fraction,
            self.config.fold_count,
            self.config.fold_fraction,
            self.config.seed,
        )
    }

    fn target(&self, data: &Dataset) -> String {
        data.schema().target().name.clone()
    }

    fn predict_config(&self, mode: crate::mcmc::PredictMode) -> PredictConfig {
        PredictConfig {
            mode,
            mcmc: self.config.mcmc.clone(),
            prior: self.config.prior,
            rmse: self.config.rmse,
        }
    }

    pub fn select(&self) -> Result<SelectOutput> {
        self.write_effective_config()?;
        let data = self.load_data()?;
        let names = data.schema().names();
        let tables = build_score_tables(&data, &names)?;
        let dir = self.dir("select");
        tables.pairwise.write_csv(create_file(&dir.join("pairwise.csv"))?)?;
        tables.triple.write_csv(create_file(&dir.join("triple.csv"))?)?;
        tables.delta.write_csv(create_file(&dir.join("delta.csv"))?)?;
        let bins = self.config.histogram_bins;
        histogram(&tables.pairwise.scores(), bins)?.write_csv(create_file(&dir.join("hist_pairwise.csv"))?)?;
        histogram(&tables.triple.scores(), bins)?.write_csv(create_file(&dir.join("hist_triple.csv"))?)?;
        let deltas: Vec<f64> = tables.delta.entries.iter().filter_map(|e| e.delta).collect();
        histogram(&deltas, bins)?.write_csv(create_file(&dir.join("hist_delta.csv"))?)?;

        let selection = propose_selection(
            &tables,
            data.schema(),
            self.config.min_mi,
            self.config.min_cmi,
            &self.config.keep,
        )?;
        let mut w = csv::Writer::from_writer(create_file(&dir.join("selection.csv"))?);
        w.write_record(["variable", "max_mi_norm", "max_cmi_norm", "decision"])?;
        for s in &selection {
            let decision = match (s.keep, s.overridden) {
                (true, true) => "keep (override)",
                (true, false) => "keep",
                (false, _) => "drop",
            };
            w.write_record([
                s.variable.clone(),
                format!("{:.6}", s.max_mi_norm),
                format!("{:.6}", s.max_cmi_norm),
                decision.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&dir, e))?;

        let target = self.target(&data);
        let mut kept = String::new();
        for v in data.schema().variables() {
            if v.name == target || selection.iter().any(|s| s.variable == v.name && s.keep) {
                let _ = writeln!(kept, "{}", v.name);
            }
        }
        write_text(&dir.join("selected_variables.txt"), &kept)?;
        let out = SelectOutput { tables, selection };
        let drops = out.drop_list();
        let mut note = format!(
            "thresholds: min MI' = {}, min CMI' = {} (both relative to target {target})\n",
            self.config.min_mi, self.config.min_cmi
        );
        if drops.is_empty() {
            note.push_str("proposed drop-list: (empty)\n");
        } else {
            let _ = writeln!(note, "proposed drop-list: {}", drops.join(", "));
        }
        note.push_str(
            "expert knowledge can override this proposal: list variables under [select] keep = ...\n\
             and set [select] apply = true to restrict later phases to the kept variables.\n",
        );
        write_text(&dir.join("selection.txt"), &note)?;
        info!("select: {} variables proposed for dropping", drops.len());
        Ok(out)
    }

    fn constraints(&self) -> Result<EdgeConstraints> {
        match &self.config.constraints {
            Some(p) => EdgeConstraints::from_file(&self.config.resolve(p)),
            None => Ok(EdgeConstraints::default()),
        }
    }

    fn run_learner(&self, learner: Learner, train: &Dataset, target: &str) -> Result<CandidateModel> {
        let opts = HillClimbOptions {
            score: self.config.score,
            restarts: self.config.restarts,
            seed: self.config.seed,
            max_parents: self.config.max_parents,
            perturbation: self.config.perturbation,
        };
        match learner {
            Learner::HillClimb => hill_climb(train, &self.constraints()?, &opts),
            Learner::ChowLiu => {
                let orientation = match &self.config.orientation {
                    Some(p) => Orientation::from_file(&self.config.resolve(p))?,
                    None => Orientation::RootAt(self.config.chowliu_root.clone().unwrap_or_else(|| target.to_string())),
                };
                chow_liu(train, &orientation)
            }
            Learner::Tan => tan(train, target),
            Learner::Naive => naive(train, target),
            Learner::BdLearn => bd_learn(train, &self.constraints()?, self.config.prior, &opts),
        }
    }

    /// Rows outside the hold-out test set.
    fn training_rows(&self, data: &Dataset) -> Result<(Dataset, SplitPlan)> {
        let split = self.split(data.n_rows())?;
        Ok((data.subset(&split.train_idx), split))
    }

    pub fn learn(&self) -> Result<Vec<CandidateModel>> {
        self.write_effective_config()?;
        let data = self.modelling_data()?;
        let (train, _) = self.training_rows(&data)?;
        let target = self.target(&data);
        let names = data.schema().names();
        let mut models = Vec::new();
        for &l in &self.config.learners {
            let m = self
                .run_learner(l, &train, &target)
                .map_err(|e| annotate(e, &format!("learner {}", l.name())))?;
            models.push(m);
        }
        for p in &self.config.structures {
            let dag = Dag::from_file(&self.config.resolve(p))?;
            let dag = dag.reindexed(&names).map_err(|_| {
                Error::Config(format!("{}: nodes do not match the modelling variables", p.display()))
            })?;
            let label = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .ok_or_else(|| Error::Config(format!("bad structure path {}", p.display())))?;
            models.push(CandidateModel::new(label, dag, format!("file:{}", p.display())));
        }
        for (i, m) in models.iter().enumerate() {
            if models[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::Config(format!("duplicate structure label `{}`", m.label)));
            }
        }

        let dir = self.dir("learn");
        let mut w = csv::Writer::from_writer(create_file(&dir.join("structures.csv"))?);
        w.write_record(["label", "edges", "provenance"])?;
        for m in &models {
            m.dag.write_file(&dir.join(format!("{}.dag", m.label)))?;
            w.write_record([m.label.clone(), m.dag.edge_count().to_string(), m.provenance.clone()])?;
            let net = fit_conjugate(&m.dag, &train, self.config.prior)?;
            let report = sensitivity_report(&net.posterior_mean(), &target, DEFAULT_ENUMERATION_CAP)
                .map_err(|e| annotate(e, &format!("sensitivity of {}", m.label)))?;
            let mut s = csv::Writer::from_writer(create_file(&dir.join(format!("sensitivity_{}.csv", m.label)))?);
            s.write_record(["variable", "sensitivity"])?;
            for (v, x) in report {
                s.write_record([v, format!("{x:.6}")])?;
            }
            s.flush().map_err(|e| Error::io(&dir, e))?;
        }
        w.flush().map_err(|e| Error::io(&dir, e))?;
        info!("learn: {} structures", models.len());
        Ok(models)
    }

    /// Structures written by `learn`, in their original order.
    pub fn load_structures(&self) -> Result<Vec<CandidateModel>> {
        let dir = self.dir("learn");
        let index = dir.join("structures.csv");
        read_required(&index, "learn")?;
        let mut r = csv::Reader::from_path(&index)?;
        let mut out = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let label = rec.get(0).unwrap_or_default().to_string();
            let dag = Dag::from_file(&dir.join(format!("{label}.dag")))?;
            out.push(CandidateModel::new(label, dag, rec.get(2).unwrap_or_default()));
        }
        Ok(out)
    }

    pub fn compare(&self) -> Result<Comparison> {
        self.write_effective_config()?;
        let data = self.modelling_data()?;
        let (train, _) = self.training_rows(&data)?;
        let target = self.target(&data);
        let names = data.schema().names();
        let mut models = self.load_structures()?;
        for m in models.iter_mut() {
            m.dag = m.dag.reindexed(&names)?;
        }
        let dir = self.dir("compare");
        if !models.iter().any(|m| m.label == "naive") {
            let nb = naive(&train, &target)?;
            nb.dag.write_file(&dir.join("naive.dag"))?;
            models.push(nb);
        }
        let cmp = build_ranking(&models, &train, self.config.prior, "naive")?;

        let mut w = csv::Writer::from_writer(create_file(&dir.join("scores.csv"))?);
        w.write_record(["model", "log_ml"])?;
        for (label, s) in &cmp.ranking.entries {
            w.write_record([label.clone(), format!("{s:.6}")])?;
        }
        w.flush().map_err(|e| Error::io(&dir, e))?;
        write_pairwise_csv(&cmp.pairwise, create_file(&dir.join("pairwise_bf.csv"))?)?;
        write_pairwise_csv(&cmp.versus_benchmark, create_file(&dir.join("vs_naive.csv"))?)?;
        cmp.ranking.write_csv(create_file(&dir.join("ranking.csv"))?)?;
        let mut surviving = String::new();
        for m in &models {
            if !cmp.drop_candidates.contains(&m.label) {
                let _ = writeln!(surviving, "{}", m.label);
            }
        }
        write_text(&dir.join("surviving.txt"), &surviving)?;
        let dropped: String = cmp.drop_candidates.iter().map(|d| format!("{d}\n")).collect();
        write_text(&dir.join("dropped.txt"), &dropped)?;
        info!("compare: {} models flagged below naive", cmp.drop_candidates.len());
        Ok(cmp)
    }

    /// Candidates for cross-validation: those surviving `compare` when it
    /// has run, every learned structure otherwise.
    fn cv_candidates(&self) -> Result<Vec<CandidateModel>> {
        let mut models = self.load_structures()?;
        let compare = self.dir("compare");
        if let Ok(nb) = fs::read_to_string(compare.join("naive.dag")) {
            let dag = Dag::parse(&nb, "naive.dag")?;
            models.push(CandidateModel::new("naive", dag, "naive benchmark"));
        }
        match fs::read_to_string(compare.join("surviving.txt")) {
            Ok(text) => {
                let keep = read_lines(&text);
                Ok(models.into_iter().filter(|m| keep.contains(&m.label)).collect())
            }
            Err(_) => Ok(models),
        }
    }

    pub fn cv(&self) -> Result<CvResult> {
        self.write_effective_config()?;
        let data = self.modelling_data()?;
        let split = self.split(data.n_rows())?;
        let names = data.schema().names();
        let mut models = self.cv_candidates()?;
        for m in models.iter_mut() {
            m.dag = m.dag.reindexed(&names)?;
        }
        let result = cross_validate(&models, &data, &split, &self.predict_config(self.config.cv_mode))?;
        let dir = self.dir("cv");
        split.write_csv(create_file(&dir.join("split.csv"))?)?;
        result.write_csv(create_file(&dir.join("cv_folds.csv"))?)?;
        result.write_summary_csv(create_file(&dir.join("cv_summary.csv"))?)?;
        write_text(&dir.join("chosen.txt"), &format!("{}\n", result.best))?;
        let chosen = models.iter().find(|m| m.label == result.best).expect("best is a candidate");
        chosen.dag.write_file(&dir.join("chosen.dag"))?;
        info!("cv: chose {}", result.best);
        Ok(result)
    }

    fn monitor_tokens(&self, net: &FittedNetwork, target: &str) -> Result<Vec<String>> {
        if !self.config.monitor.is_empty() {
            return Ok(self.config.monitor.clone());
        }
        let r = net.cpt(target)?.r;
        Ok((1..=r).map(|k| format!("{target}_{k}")).collect())
    }

    pub fn fit_predict(&self) -> Result<FitOutput> {
        self.write_effective_config()?;
        let data = self.modelling_data()?;
        let split = self.split(data.n_rows())?;
        let target = self.target(&data);
        let cv_dir = self.dir("cv");
        let chosen = read_lines(&read_required(&cv_dir.join("chosen.txt"), "cv")?)
            .into_iter()
            .next()
            .ok_or_else(|| Error::Config("cv/chosen.txt is empty".into()))?;
        let dag = Dag::from_file(&cv_dir.join("chosen.dag"))?.reindexed(&data.schema().names())?;
        let model = CandidateModel::new(chosen.clone(), dag, "cv choice");
        let evaluation = final_evaluation(&model, &data, &split, &self.predict_config(self.config.fit_mode))?;

        let dir = self.dir("fit");
        evaluation.network.write_csv(create_file(&dir.join("network.csv"))?)?;
        model.dag.write_file(&dir.join("network.dag"))?;
        let states = data.schema().target().states.clone();
        write_predictions_csv(&evaluation.predictions, &states, create_file(&dir.join("predictions.csv"))?)?;
        write_metrics_csv(&evaluation.metrics, create_file(&dir.join("metrics.csv"))?)?;
        write_confusion_csv(&evaluation.confusion, &states, create_file(&dir.join("confusion.csv"))?)?;

        let tokens = self.monitor_tokens(&evaluation.network, &target)?;
        let traces = sample_parameters_for(&evaluation.network, &self.config.mcmc, &tokens)?;
        export_traces(&traces, &dir.join("traces"))?;
        let rhat = gelman_rubin(&traces)?;
        let mut w = csv::Writer::from_writer(create_file(&dir.join("rhat.csv"))?);
        w.write_record(["parameter", "mean", "r_hat"])?;
        for (p, (name, r)) in rhat.iter().enumerate() {
            w.write_record([name.clone(), format!("{:.6}", traces.mean(p)), format!("{r:.6}")])?;
        }
        w.flush().map_err(|e| Error::io(&dir, e))?;

        let sens = sensitivity_report(&evaluation.network.posterior_mean(), &target, DEFAULT_ENUMERATION_CAP)?;
        let mut w = csv::Writer::from_writer(create_file(&dir.join("sensitivity.csv"))?);
        w.write_record(["variable", "sensitivity"])?;
        for (v, x) in sens {
            w.write_record([v, format!("{x:.6}")])?;
        }
        w.flush().map_err(|e| Error::io(&dir, e))?;

        let worst = rhat.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        if worst > self.config.rhat_threshold {
            return Err(Error::Diagnostics(format!(
                "max r_hat {worst:.4} exceeds threshold {}",
                self.config.rhat_threshold
            )));
        }
        info!("fit-predict: accuracy {:.4}, rmse {:.4}", evaluation.metrics.accuracy, evaluation.metrics.rmse);
        Ok(FitOutput {
            chosen,
            evaluation,
            traces,
            rhat,
        })
    }

    /// Bundles every phase's tables into `report.md`.
    pub fn report(&self) -> Result<PathBuf> {
        self.write_effective_config()?;
        let mut md = String::from("# Pipeline report\n\n");
        let sections: [(&str, &str, &[(&str, &str, usize)]); 5] = [
            (
                "Variable selection",
                "select",
                &[
                    ("selection.csv", "Selection proposal", 100),
                    ("pairwise.csv", "Top pairwise scores", 15),
                    ("triple.csv", "Top conditional scores", 15),
                    ("delta.csv", "Largest gains from conditioning", 15),
                ],
            ),
            ("Structure learning", "learn", &[("structures.csv", "Structures", 100)]),
            (
                "Model comparison",
                "compare",
                &[
                    ("scores.csv", "Log marginal likelihoods", 100),
                    ("ranking.csv", "Ranking chain", 100),
                    ("vs_naive.csv", "Against the naive benchmark", 100),
                ],
            ),
            ("Cross-validation", "cv", &[("cv_summary.csv", "Average performance", 100)]),
            (
                "Final fit",
                "fit",
                &[
                    ("metrics.csv", "Test-set performance", 100),
                    ("predictions.csv", "Posterior predictive distributions (percent)", 20),
                    ("rhat.csv", "Convergence", 100),
                    ("sensitivity.csv", "Sensitivity of the target", 100),
                ],
            ),
        ];
        for (title, phase, files) in sections {
            let _ = writeln!(md, "## {title}\n");
            let dir = self.dir(phase);
            if !dir.exists() {
                md.push_str("_not run_\n\n");
                continue;
            }
            if phase == "select" {
                if let Ok(note) = fs::read_to_string(dir.join("selection.txt")) {
                    let _ = writeln!(md, "```\n{}```\n", note);
                }
            }
            if phase == "cv" {
                if let Ok(c) = fs::read_to_string(dir.join("chosen.txt")) {
                    let _ = writeln!(md, "Chosen model: **{}**\n", c.trim());
                }
            }
            for &(file, caption, limit) in files {
                let path = dir.join(file);
                if path.exists() {
                    let _ = writeln!(md, "### {caption}\n");
                    md.push_str(&csv_to_markdown(&path, limit)?);
                    md.push('\n');
                }
            }
        }
        let path = self.out.join("report.md");
        write_text(&path, &md)?;
        Ok(path)
    }

    /// select, learn, compare, cv and fit-predict in sequence.
    pub fn run_all(&self) -> Result<FitOutput> {
        self.select()?;
        self.learn()?;
        self.compare()?;
        self.cv()?;
        let fit = self.fit_predict();
        self.report()?;
        fit
    }
}

fn annotate(e: Error, context: &str) -> Error {
    match e {
        Error::Invalid(m) => Error::Invalid(format!("{context}: {m}")),
        other => other,
    }
}

fn csv_to_markdown(path: &Path, limit: usize) -> Result<String> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let mut md = format!("| {} |\n|{}\n", header.join(" | "), " --- |".repeat(header.len()));
    let mut total = 0;
    for rec in r.records() {
        let rec = rec?;
        total += 1;
        if total <= limit {
            let cells: Vec<&str> = rec.iter().collect();
            let _ = writeln!(md, "| {} |", cells.join(" | "));
        }
    }
    if total > limit {
        let _ = writeln!(md, "\n_{} of {total} rows shown_", limit);
    }
    Ok(md)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Empty("x".into())), 3);
        assert_eq!(exit_code(&Error::Diagnostics("x".into())), 4);
        assert_eq!(exit_code(&Error::Invalid("x".into())), 1);
    }
}
