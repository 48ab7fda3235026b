//! Pipeline configuration: `[section]` headers and `key = value` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bayesnet::Prior;
use crate::error::{Error, Result};
use crate::evaluation::RmseKind;
use crate::mcmc::{McmcConfig, PredictMode};
use crate::structlearn::ScoreKind;

/// Raw parsed file: section -> key -> (value, line).
type Sections = BTreeMap<String, BTreeMap<String, (String, usize)>>;

fn parse_sections(text: &str, origin: &str) -> Result<Sections> {
    let mut out: Sections = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Config(format!("{origin}:{}: {msg}", i + 1));
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err("unterminated section header".into()))?;
            section = name.trim().to_string();
            out.entry(section.clone()).or_default();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let k = k.trim().to_string();
        if section.is_empty() {
            return Err(err(format!("key `{k}` outside any section")));
        }
        let entries = out.entry(section.clone()).or_default();
        if entries.contains_key(&k) {
            return Err(err(format!("duplicate key `{section}.{k}`")));
        }
        entries.insert(k, (v.trim().to_string(), i + 1));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Learner {
    HillClimb,
    ChowLiu,
    Tan,
    Naive,
    BdLearn,
}

impl Learner {
    pub fn name(self) -> &'static str {
        match self {
            Learner::HillClimb => "hc",
            Learner::ChowLiu => "chowliu",
            Learner::Tan => "tan",
            Learner::Naive => "naive",
            Learner::BdLearn => "bnsl",
        }
    }
}

impl FromStr for Learner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Learner> {
        Ok(match s {
            "hc" => Learner::HillClimb,
            "chowliu" => Learner::ChowLiu,
            "tan" => Learner::Tan,
            "naive" => Learner::Naive,
            "bnsl" => Learner::BdLearn,
            other => return Err(Error::Config(format!("unknown learner `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Directory that relative paths are resolved against.
    pub base_dir: PathBuf,
    pub dataset: PathBuf,
    pub schema: PathBuf,
    pub target: Option<String>,
    pub delimiter: u8,

    pub min_mi: f64,
    pub min_cmi: f64,
    pub keep: Vec<String>,
    pub apply_selection: bool,
    pub histogram_bins: usize,

    pub learners: Vec<Learner>,
    pub structures: Vec<PathBuf>,
    pub constraints: Option<PathBuf>,
    pub orientation: Option<PathBuf>,
    pub chowliu_root: Option<String>,
    pub score: ScoreKind,
    pub restarts: usize,
    pub max_parents: Option<usize>,
    pub perturbation: usize,

    pub prior: Prior,

    pub test_fraction: f64,
    pub fold_count: usize,
    pub fold_fraction: f64,

    pub seed: u64,
    pub out: Option<PathBuf>,

    pub mcmc: McmcConfig,
    pub monitor: Vec<String>,

    pub cv_mode: PredictMode,
    pub rmse: RmseKind,

    pub fit_mode: PredictMode,
    pub rhat_threshold: f64,
}

struct Reader {
    sections: Sections,
    origin: String,
}

impl Reader {
    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        self.sections.get_mut(section)?.remove(key)
    }

    fn parse<T: FromStr>(&mut self, section: &str, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|e| {
                Error::Config(format!("{}:{line}: bad value for {section}.{key}: {e}", self.origin))
            }),
        }
    }

    fn opt_string(&mut self, section: &str, key: &str) -> Option<String> {
        self.take(section, key).map(|v| v.0).filter(|v| !v.is_empty())
    }

    fn list(&mut self, section: &str, key: &str) -> Option<Vec<String>> {
        self.take(section, key).map(|(v, _)| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect()
        })
    }

    fn finish(self) -> Result<()> {
        for (section, keys) in &self.sections {
            if let Some((k, (_, line))) = keys.iter().next() {
                return Err(Error::Config(format!("{}:{line}: unknown key `{section}.{k}`", self.origin)));
            }
        }
        Ok(())
    }
}

fn parse_mode(s: &str) -> Result<PredictMode> {
    match s {
        "exact" => Ok(PredictMode::Exact),
        "mcmc" => Ok(PredictMode::Mcmc),
        other => Err(Error::Config(format!("unknown predict mode `{other}`"))),
    }
}

fn mode_name(m: PredictMode) -> &'static str {
    match m {
        PredictMode::Exact => "exact",
        PredictMode::Mcmc => "mcmc",
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, origin: &str, base_dir: &Path) -> Result<PipelineConfig> {
        let mut r = Reader {
            sections: parse_sections(text, origin)?,
            origin: origin.to_string(),
        };
        let dataset = r
            .opt_string("data", "dataset")
            .ok_or_else(|| Error::Config("data.dataset is required".into()))?;
        let schema = r
            .opt_string("data", "schema")
            .ok_or_else(|| Error::Config("data.schema is required".into()))?;
        let target = r.opt_string("data", "target");
        let delim: String = r.parse("data", "delimiter", ",".to_string())?;
        let delimiter = match delim.as_bytes() {
            [b] => *b,
            _ if delim == "tab" => b'\t',
            _ => return Err(Error::Config(format!("delimiter must be one byte, got `{delim}`"))),
        };

        let min_mi = r.parse("select", "min_mi", 0.02)?;
        let min_cmi = r.parse("select", "min_cmi", 0.05)?;
        let keep = r.list("select", "keep").unwrap_or_default();
        let apply_selection = r.parse("select", "apply", false)?;
        let histogram_bins = r.parse("select", "histogram_bins", 20usize)?;

        let learners = match r.list("learn", "learners") {
            Some(l) => l.iter().map(|s| s.parse()).collect::<Result<Vec<Learner>>>()?,
            None => vec![Learner::HillClimb, Learner::ChowLiu, Learner::Tan, Learner::Naive],
        };
        let structures = r
            .list("learn", "structures")
            .unwrap_or_default()
            .into_iter()
            .map(PathBuf::from)
            .collect();
        let constraints = r.opt_string("learn", "constraints").map(PathBuf::from);
        let orientation = r.opt_string("learn", "orientation").map(PathBuf::from);
        let chowliu_root = r.opt_string("learn", "chowliu_root");
        let score_name: String = r.parse("learn", "score", "bic".to_string())?;
        let restarts = r.parse("learn", "restarts", 0usize)?;
        let max_parents = match r.opt_string("learn", "max_parents") {
            None => None,
            Some(v) if v == "none" => None,
            Some(v) => Some(v.parse().map_err(|e| Error::Config(format!("learn.max_parents: {e}")))?),
        };
        let perturbation = r.parse("learn", "perturbation", 4usize)?;

        let prior_name: String = r.parse("model", "prior", "uniform".to_string())?;
        let alpha0 = r.parse("model", "alpha0", 1.0)?;
        let ess = r.parse("model", "ess", 1.0)?;
        let prior = match prior_name.as_str() {
            "uniform" => Prior::Uniform { alpha0 },
            "bdeu" => Prior::Bdeu { ess },
            other => return Err(Error::Config(format!("unknown prior `{other}`"))),
        };
        prior.validate().map_err(|e| Error::Config(e.to_string()))?;
        let score = match score_name.as_str() {
            "bic" => ScoreKind::Bic,
            "bd" => ScoreKind::Bd(prior),
            other => return Err(Error::Config(format!("unknown score `{other}`"))),
        };

        let test_fraction = r.parse("split", "test_fraction", 0.15)?;
        let fold_count = r.parse("split", "fold_count", 10usize)?;
        let fold_fraction = r.parse("split", "fold_fraction", 0.10)?;

        let seed = r
            .take("run", "seed")
            .ok_or_else(|| Error::Config("run.seed is required".into()))?;
        let seed = seed
            .0
            .parse()
            .map_err(|e| Error::Config(format!("{origin}:{}: run.seed: {e}", seed.1)))?;
        let out = r.opt_string("run", "out").map(PathBuf::from);

        let mcmc = McmcConfig {
            chains: r.parse("mcmc", "chains", 3usize)?,
            adapt_iters: r.parse("mcmc", "adapt_iters", 1000usize)?,
            burnin_iters: r.parse("mcmc", "burnin_iters", 1000usize)?,
            sample_iters: r.parse("mcmc", "sample_iters", 10_000usize)?,
            thin: r.parse("mcmc", "thin", 1usize)?,
            seed,
        };
        mcmc.validate().map_err(|e| Error::Config(e.to_string()))?;
        let monitor = r.list("mcmc", "monitor").unwrap_or_default();

        let cv_mode = parse_mode(&r.parse("cv", "mode", "exact".to_string())?)?;
        let rmse = match r.parse("cv", "rmse", "standard".to_string())?.as_str() {
            "standard" => RmseKind::Standard,
            "literal" => RmseKind::Literal,
            other => return Err(Error::Config(format!("unknown rmse kind `{other}`"))),
        };
        let fit_mode = parse_mode(&r.parse("fit", "mode", "mcmc".to_string())?)?;
        let rhat_threshold = r.parse("fit", "rhat_threshold", 1.1)?;
        r.finish()?;

        if !(0.0..1.0).contains(&test_fraction) || fold_fraction <= 0.0 || fold_count < 2 {
            return Err(Error::Config(
                "split needs 0 <= test_fraction < 1, fold_fraction > 0 and fold_count >= 2".into(),
            ));
        }
        if histogram_bins == 0 {
            return Err(Error::Config("select.histogram_bins must be positive".into()));
        }

        Ok(PipelineConfig {
            base_dir: base_dir.to_path_buf(),
            dataset: dataset.into(),
            schema: schema.into(),
            target,
            delimiter,
            min_mi,
            min_cmi,
            keep,
            apply_selection,
            histogram_bins,
            learners,
            structures,
            constraints,
            orientation,
            chowliu_root,
            score,
            restarts,
            max_parents,
            perturbation,
            prior,
            test_fraction,
            fold_count,
            fold_fraction,
            seed,
            out,
            mcmc,
            monitor,
            cv_mode,
            rmse,
            fit_mode,
            rhat_threshold,
        })
    }

    pub fn from_file(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        PipelineConfig::parse(&text, &path.display().to_string(), base)
    }

    pub fn with_seed(mut self, seed: u64) -> PipelineConfig {
        self.seed = seed;
        self.mcmc.seed = seed;
        self
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Copy with every file path made absolute.
    pub fn resolved(&self) -> PipelineConfig {
        let abs = |p: &Path| {
            let p = self.resolve(p);
            std::path::absolute(&p).unwrap_or(p)
        };
        PipelineConfig {
            dataset: abs(&self.dataset),
            schema: abs(&self.schema),
            structures: self.structures.iter().map(|p| abs(p)).collect(),
            constraints: self.constraints.as_deref().map(abs),
            orientation: self.orientation.as_deref().map(abs),
            ..self.clone()
        }
    }

    /// Every setting after defaults, re-parseable with the same base
    /// directory. The output directory is left out so that runs into
    /// different directories write identical files.
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let list = |v: &[String]| v.join(", ");
        let paths = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ");
        let opt_path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let _ = writeln!(s, "[data]");
        let _ = writeln!(s, "dataset = {}", self.dataset.display());
        let _ = writeln!(s, "schema = {}", self.schema.display());
        let _ = writeln!(s, "target = {}", self.target.clone().unwrap_or_default());
        let delim = if self.delimiter == b'\t' { "tab".to_string() } else { (self.delimiter as char).to_string() };
        let _ = writeln!(s, "delimiter = {delim}");
        let _ = writeln!(s, "\n[select]");
        let _ = writeln!(s, "min_mi = {}", self.min_mi);
        let _ = writeln!(s, "min_cmi = {}", self.min_cmi);
        let _ = writeln!(s, "keep = {}", list(&self.keep));
        let _ = writeln!(s, "apply = {}", self.apply_selection);
        let _ = writeln!(s, "histogram_bins = {}", self.histogram_bins);
        let _ = writeln!(s, "\n[learn]");
        let names: Vec<String> = self.learners.iter().map(|l| l.name().to_string()).collect();
        let _ = writeln!(s, "learners = {}", list(&names));
        let _ = writeln!(s, "structures = {}", paths(&self.structures));
        let _ = writeln!(s, "constraints = {}", opt_path(&self.constraints));
        let _ = writeln!(s, "orientation = {}", opt_path(&self.orientation));
        let _ = writeln!(s, "chowliu_root = {}", self.chowliu_root.clone().unwrap_or_default());
        let score = match self.score {
            ScoreKind::Bic => "bic",
            ScoreKind::Bd(_) => "bd",
        };
        let _ = writeln!(s, "score = {score}");
        let _ = writeln!(s, "restarts = {}", self.restarts);
        let _ = writeln!(s, "max_parents = {}", self.max_parents.map_or("none".into(), |m| m.to_string()));
        let _ = writeln!(s, "perturbation = {}", self.perturbation);
        let _ = writeln!(s, "\n[model]");
        match self.prior {
            Prior::Uniform { alpha0 } => {
                let _ = writeln!(s, "prior = uniform\nalpha0 = {alpha0}");
            }
            Prior::Bdeu { ess } => {
                let _ = writeln!(s, "prior = bdeu\ness = {ess}");
            }
        }
        let _ = writeln!(s, "\n[split]");
        let _ = writeln!(s, "test_fraction = {}", self.test_fraction);
        let _ = writeln!(s, "fold_count = {}", self.fold_count);
        let _ = writeln!(s, "fold_fraction = {}", self.fold_fraction);
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "\n[mcmc]");
        let _ = writeln!(s, "chains = {}", self.mcmc.chains);
        let _ = writeln!(s, "adapt_iters = {}", self.mcmc.adapt_iters);
        let _ = writeln!(s, "burnin_iters = {}", self.mcmc.burnin_iters);
        let _ = writeln!(s, "sample_iters = {}", self.mcmc.sample_iters);
        let _ = writeln!(s, "thin = {}", self.mcmc.thin);
        let _ = writeln!(s, "monitor = {}", list(&self.monitor));
        let _ = writeln!(s, "\n[cv]");
        let _ = writeln!(s, "mode = {}", mode_name(self.cv_mode));
        let rmse = match self.rmse {
            RmseKind::Standard => "standard",
            RmseKind::Literal => "literal",
        };
        let _ = writeln!(s, "rmse = {rmse}");
        let _ = writeln!(s, "\n[fit]");
        let _ = writeln!(s, "mode = {}", mode_name(self.fit_mode));
        let _ = writeln!(s, "rhat_threshold = {}", self.rhat_threshold);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[data]\ndataset = d.csv\nschema = s.txt\n[run]\nseed = 3\n";

    #[test]
    fn defaults_and_round_trip() {
        let c = PipelineConfig::parse(MINIMAL, "t", Path::new("/base")).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.mcmc.seed, 3);
        assert_eq!(c.fold_count, 10);
        assert_eq!(c.learners.len(), 4);
        assert_eq!(c.resolve(Path::new("d.csv")), PathBuf::from("/base/d.csv"));
        let again = PipelineConfig::parse(&c.to_ini(), "t2", Path::new("/base")).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn overrides_parse() {
        let text = format!(
            "{MINIMAL}[learn]\nlearners = naive, bnsl\nmax_parents = 2\nscore = bd\n[model]\nprior = bdeu\ness = 4\n[cv]\nmode = mcmc\nrmse = literal\n[select]\nkeep = A, B\n"
        );
        let c = PipelineConfig::parse(&text, "t", Path::new(".")).unwrap();
        assert_eq!(c.learners, vec![Learner::Naive, Learner::BdLearn]);
        assert_eq!(c.max_parents, Some(2));
        assert_eq!(c.prior, Prior::Bdeu { ess: 4.0 });
        assert_eq!(c.score, ScoreKind::Bd(Prior::Bdeu { ess: 4.0 }));
        assert_eq!(c.cv_mode, PredictMode::Mcmc);
        assert_eq!(c.keep, vec!["A".to_string(), "B".to_string()]);
        let again = PipelineConfig::parse(&c.to_ini(), "t2", Path::new(".")).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_bad_input() {
        let p = |t: &str| PipelineConfig::parse(t, "t", Path::new("."));
        assert!(matches!(p("[data]\ndataset = d\nschema = s\n"), Err(Error::Config(_))));
        assert!(p(&format!("{MINIMAL}[run]\n")).is_ok());
        assert!(matches!(p(&format!("{MINIMAL}[learn]\nfoo = 1\n")), Err(Error::Config(_))));
        assert!(matches!(p(&format!("{MINIMAL}[learn]\nlearners = magic\n")), Err(Error::Config(_))));
        assert!(matches!(p(&format!("{MINIMAL}[mcmc]\nthin = 0\n")), Err(Error::Config(_))));
        assert!(matches!(p("dataset = x\n"), Err(Error::Config(_))));
        assert!(matches!(p(&format!("{MINIMAL}[data]\ndataset = e\n")), Err(Error::Config(_))));
    }
}
