//! The whole file-based workflow on the bundled configuration, equivalent to
//! running `bnflow select`, `learn`, `compare`, `cv`, `fit-predict` and
//! `report` in turn.
//!
//! cargo run --release --example end_to_end [-- OUT_DIR]

use std::path::{Path, PathBuf};

use bnflow::pipeline::{Pipeline, PipelineConfig};

fn main() -> anyhow::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("bnflow_demo"));
    let config = PipelineConfig::from_file(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/pipeline.ini"))?;
    let pipeline = Pipeline::new(config, Some(out.clone()))?;

    let select = pipeline.select()?;
    println!("proposed drop-list: {:?}", select.drop_list());
    for m in pipeline.learn()? {
        println!("learned {:<8} {} edges", m.label, m.dag.edge_count());
    }
    let cmp = pipeline.compare()?;
    println!("best by marginal likelihood: {}", cmp.ranking.entries[0].0);
    let cv = pipeline.cv()?;
    println!("chosen by cross-validation: {}", cv.best);
    let fit = pipeline.fit_predict()?;
    println!(
        "test accuracy {:.4}, rmse {:.4}, max r_hat {:.4}",
        fit.evaluation.metrics.accuracy,
        fit.evaluation.metrics.rmse,
        fit.rhat.iter().map(|r| r.1).fold(0.0, f64::max)
    );
    println!("report: {}", pipeline.report()?.display());
    Ok(())
}
