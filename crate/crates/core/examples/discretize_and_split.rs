//! Equal-frequency binning of a continuous column and a reproducible
//! train/test/fold split.
//!
//! cargo run --example discretize_and_split

use bnflow::dataset::{discretize_equal_frequency, make_split, BinDirection};

fn main() -> anyhow::Result<()> {
    let spend: Vec<f64> = (0..40).map(|i| ((i * 37) % 41) as f64 * 12.5 + (i % 3) as f64).collect();
    let asc = discretize_equal_frequency(&spend, 5, BinDirection::Ascending)?;
    println!("quintile thresholds: {:?}", asc.thresholds);
    let mut occupancy = [0usize; 5];
    for &l in &asc.labels {
        occupancy[l - 1] += 1;
    }
    println!("bucket occupancy: {occupancy:?}");

    // descending: label 1 marks the top 20%
    let desc = discretize_equal_frequency(&spend, 5, BinDirection::Descending)?;
    let top = spend.iter().cloned().fold(f64::MIN, f64::max);
    let i = spend.iter().position(|&v| v == top).unwrap();
    println!("largest value {top} -> descending label {}", desc.labels[i]);

    let plan = make_split(234, 0.15, 8, 0.10, 42)?;
    println!(
        "\nsplit of 234 rows: {} test, {} train, {} folds of {}",
        plan.test_idx.len(),
        plan.train_idx.len(),
        plan.folds.len(),
        plan.fold_size
    );
    let mut csv = Vec::new();
    plan.write_csv(&mut csv)?;
    let text = String::from_utf8(csv)?;
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
