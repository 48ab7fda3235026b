//! Pairwise and conditional information scores.
//!
//! Shows the XOR case where two variables look independent until a third is
//! conditioned on, then prints the strongest entries of each score table for
//! the bundled demo data.
//!
//! cargo run --example information_scores

use std::path::Path;

use bnflow::dataset::{ingest_csv, CsvOptions, Schema};
use bnflow::infotheory::{
    build_score_tables, conditional_mutual_information, histogram, mutual_information, Joint3,
};

fn main() -> anyhow::Result<()> {
    // p(x, y, z) = 1/4 when z = x xor y
    let mut counts = vec![0.0; 8];
    for x in 0..2 {
        for y in 0..2 {
            counts[x * 4 + y * 2 + (x ^ y)] = 1.0;
        }
    }
    let xor = Joint3::new(2, 2, 2, counts)?;
    println!("XOR: MI(X,Y) = {:.6}, CMI(X,Y|Z) = {:.6} nats", mutual_information(&xor.margin_xy())?, conditional_mutual_information(&xor)?);

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let schema = Schema::from_file(&dir.join("schema.txt"))?;
    let data = ingest_csv(&dir.join("demo.csv"), &schema, &CsvOptions::default())?;
    let tables = build_score_tables(&data, &schema.names())?;

    println!("\ntop pairwise MI'");
    for e in tables.pairwise.entries.iter().take(5) {
        println!("  {:>3} {:>3}  {:.4}", e.x, e.y, e.mi_norm);
    }
    println!("\ntop CMI' (x, y | z)");
    for e in tables.triple.entries.iter().take(5) {
        println!("  {:>3} {:>3} | {:>3}  {:.4}", e.x, e.y, e.z.as_deref().unwrap_or(""), e.cmi_norm.unwrap_or(0.0));
    }
    println!("\nlargest relative gains from conditioning");
    for e in tables.delta.entries.iter().filter(|e| e.perc.is_some_and(f64::is_finite)).take(5) {
        println!(
            "  {:>3} {:>3} | {:>3}  MI' {:.4} -> CMI' {:.4} ({:+.1}%)",
            e.x,
            e.y,
            e.z.as_deref().unwrap_or(""),
            e.mi_norm,
            e.cmi_norm.unwrap_or(0.0),
            e.perc.unwrap_or(0.0)
        );
    }

    let h = histogram(&tables.pairwise.scores(), 8)?;
    println!("\nMI' histogram");
    for (i, c) in h.counts.iter().enumerate() {
        println!("  ({:.3}, {:.3}]  {}", h.edges[i], h.edges[i + 1], "#".repeat(*c));
    }
    Ok(())
}
