//! Conjugate fit, exact and simulated posterior predictive distributions,
//! convergence diagnostics and trace export.
//!
//! cargo run --release --example posterior_prediction

use std::path::Path;

use bnflow::bayesnet::{fit_conjugate, Dag, Prior};
use bnflow::dataset::{ingest_csv, make_split, CsvOptions, Schema};
use bnflow::mcmc::{
    export_traces, gelman_rubin, posterior_predict, records_from_data, sample_parameters_for, write_predictions_csv,
    McmcConfig, PredictMode,
};

fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let schema = Schema::from_file(&dir.join("schema.txt"))?;
    let data = ingest_csv(&dir.join("demo.csv"), &schema, &CsvOptions::default())?;
    let split = make_split(data.n_rows(), 0.15, 10, 0.08, 5)?;
    let dag = Dag::from_file(&dir.join("truth.dag"))?;
    let net = fit_conjugate(&dag, &data.subset(&split.train_idx), Prior::default())?;

    let test = data.subset(&split.test_idx[..5]);
    let mut records = records_from_data(&net, &test, "Y")?;
    // hide one predictor in the last record to exercise partial evidence
    let q3 = net.node_index("Q3")?;
    records[4].evidence[q3] = None;

    let config = McmcConfig {
        seed: 5,
        ..Default::default()
    };
    let exact = posterior_predict(&net, "Y", &records, &config, PredictMode::Exact)?;
    let mcmc = posterior_predict(&net, "Y", &records, &config, PredictMode::Mcmc)?;
    for (e, m) in exact.iter().zip(&mcmc) {
        let tv: f64 = e.probs.iter().zip(&m.probs).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
        println!("record {}: exact mode {} mean {:.3}; mcmc mode {} mean {:.3}; TV {:.4}", e.record, e.predicted + 1, e.mean, m.predicted + 1, m.mean, tv);
    }
    let mut table = Vec::new();
    write_predictions_csv(&mcmc, &schema.target().states, &mut table)?;
    print!("\n{}", String::from_utf8(table)?);

    let traces = sample_parameters_for(&net, &config, &["Y_1".into(), "Y_2".into(), "Q3".into()])?;
    println!("\n{} monitored parameters, {} chains x {} draws", traces.params.len(), traces.chains(), traces.draws());
    let worst = gelman_rubin(&traces)?.into_iter().fold(("".to_string(), 0.0), |a, b| if b.1 > a.1 { b } else { a });
    println!("largest r_hat: {} = {:.4}", worst.0, worst.1);
    let out = std::env::temp_dir().join("bnflow_traces");
    let files = export_traces(&traces, &out)?;
    println!("wrote {} trace/density files to {}", files.len(), out.display());
    Ok(())
}
