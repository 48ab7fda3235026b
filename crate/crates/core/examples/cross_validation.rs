//! k-fold cross-validation of candidate structures followed by the final
//! hold-out evaluation of the winner.
//!
//! cargo run --release --example cross_validation

use std::path::Path;

use bnflow::bayesnet::Dag;
use bnflow::dataset::{ingest_csv, make_split, CsvOptions, Schema};
use bnflow::evaluation::{cross_validate, final_evaluation, PredictConfig};
use bnflow::mcmc::PredictMode;
use bnflow::structlearn::{chow_liu, hill_climb, naive, tan, CandidateModel, EdgeConstraints, HillClimbOptions, Orientation};

fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let schema = Schema::from_file(&dir.join("schema.txt"))?;
    let data = ingest_csv(&dir.join("demo.csv"), &schema, &CsvOptions::default())?;
    let split = make_split(data.n_rows(), 0.15, 10, 0.08, 3)?;
    let train = data.subset(&split.train_idx);

    let candidates = vec![
        hill_climb(&train, &EdgeConstraints::default(), &HillClimbOptions::default())?,
        chow_liu(&train, &Orientation::RootAt("Y".into()))?,
        tan(&train, "Y")?,
        naive(&train, "Y")?,
        CandidateModel::new("truth", Dag::from_file(&dir.join("truth.dag"))?, "declared"),
    ];
    let cv = cross_validate(&candidates, &data, &split, &PredictConfig::default())?;
    println!("{:<8} {:>8} {:>8}", "model", "accuracy", "rmse");
    for a in &cv.averages {
        println!("{:<8} {:>8.4} {:>8.4}", a.model, a.accuracy, a.rmse);
    }
    println!("chosen by RMSE: {}", cv.best);

    let best = candidates.iter().find(|c| c.label == cv.best).unwrap();
    let config = PredictConfig {
        mode: PredictMode::Mcmc,
        ..Default::default()
    };
    let fe = final_evaluation(best, &data, &split, &config)?;
    let m = &fe.metrics;
    println!(
        "\nhold-out: cases {} correct {} off-by-more-than-one {} accuracy {:.4} rmse {:.4}",
        m.cases, m.correct, m.error_ge_1, m.accuracy, m.rmse
    );
    println!("confusion (rows predicted, columns true):");
    for row in &fe.confusion {
        println!("  {row:?}");
    }
    Ok(())
}
