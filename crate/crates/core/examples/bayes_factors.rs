//! Marginal likelihoods, pairwise Bayes factors and the ranking chain for a
//! set of candidate structures.
//!
//! cargo run --release --example bayes_factors

use std::path::Path;

use bnflow::bayesnet::{Dag, Prior};
use bnflow::dataset::{ingest_csv, CsvOptions, Schema};
use bnflow::modelselect::build_ranking;
use bnflow::structlearn::{chow_liu, hill_climb, naive, tan, CandidateModel, EdgeConstraints, HillClimbOptions, Orientation};

fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let schema = Schema::from_file(&dir.join("schema.txt"))?;
    let data = ingest_csv(&dir.join("demo.csv"), &schema, &CsvOptions::default())?;

    let hc = hill_climb(&data, &EdgeConstraints::default(), &HillClimbOptions::default())?;
    // a hand edit of the learned graph: flip every arc into the target
    let mut flipped = hc.dag.clone();
    let y = flipped.require("Y")?;
    for p in flipped.parents(y).to_vec() {
        flipped.reverse_edge_idx(p, y)?;
    }
    let candidates = vec![
        CandidateModel::new("truth", Dag::from_file(&dir.join("truth.dag"))?, "declared"),
        hc,
        CandidateModel::new("hc_mod", flipped, "hc with arcs into Y reversed"),
        chow_liu(&data, &Orientation::RootAt("Y".into()))?,
        tan(&data, "Y")?,
        naive(&data, "Y")?,
    ];

    for prior in [Prior::Uniform { alpha0: 1.0 }, Prior::Bdeu { ess: 1.0 }] {
        let cmp = build_ranking(&candidates, &data, prior, "naive")?;
        println!("prior {prior:?}");
        for (label, s) in &cmp.ranking.entries {
            println!("  {label:<8} log ML {s:>12.3}");
        }
        println!("  chain:");
        for l in &cmp.ranking.chain {
            println!("    {:<8} over {:<8} log BF {:>9.3}", l.better, l.worse, l.log_bf);
        }
        println!("  below naive: {:?}\n", cmp.drop_candidates);
    }
    Ok(())
}
