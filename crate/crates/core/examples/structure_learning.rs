//! Candidate structures from every learner on the bundled demo data, with an
//! expert constraint and an expert-oriented Chow-Liu tree.
//!
//! cargo run --release --example structure_learning

use std::path::Path;

use bnflow::bayesnet::{fit_conjugate, sensitivity_report, Prior, DEFAULT_ENUMERATION_CAP};
use bnflow::dataset::{ingest_csv, CsvOptions, Schema};
use bnflow::structlearn::{
    bd_learn, bic_score, chow_liu, chow_liu_skeleton, hill_climb, naive, tan, EdgeConstraints, HillClimbOptions,
    Orientation,
};

fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let schema = Schema::from_file(&dir.join("schema.txt"))?;
    let data = ingest_csv(&dir.join("demo.csv"), &schema, &CsvOptions::default())?;
    let none = EdgeConstraints::default();
    let opts = HillClimbOptions {
        restarts: 3,
        seed: 11,
        ..Default::default()
    };

    // the expert insists the two known drivers feed the target
    let expert = EdgeConstraints::parse("require Q1 -> Y\nrequire Q2 -> Y\nforbid Y -> Q1\n", "inline")?;

    let skeleton = chow_liu_skeleton(&data)?;
    let names = schema.names();
    let oriented: String = skeleton
        .iter()
        .map(|&(a, b)| {
            // direct every tree edge towards the later variable in the schema
            format!("{} -> {}\n", names[a.min(b)], names[a.max(b)])
        })
        .collect();

    let models = vec![
        hill_climb(&data, &none, &opts)?,
        hill_climb(&data, &expert, &opts).map(|mut m| {
            m.label = "hc_expert".into();
            m
        })?,
        chow_liu(&data, &Orientation::RootAt("Y".into()))?,
        chow_liu(&data, &Orientation::parse_edges(&oriented, "inline")?).map(|mut m| {
            m.label = "chowliu_expert".into();
            m
        })?,
        tan(&data, "Y")?,
        naive(&data, "Y")?,
        bd_learn(&data, &none, Prior::default(), &opts)?,
    ];
    for m in &models {
        println!("{:<15} BIC {:>10.2}  {}", m.label, bic_score(&m.dag, &data)?, m.provenance);
        for (p, c) in m.dag.named_edges() {
            print!(" {p}->{c}");
        }
        println!();
    }

    let hc = &models[1];
    let net = fit_conjugate(&hc.dag, &data, Prior::default())?;
    println!("\nsensitivity of Y under {}", hc.label);
    for (v, s) in sensitivity_report(&net.posterior_mean(), "Y", DEFAULT_ENUMERATION_CAP)?.iter().take(5) {
        println!("  {v:<3} {s:.4}");
    }
    Ok(())
}
