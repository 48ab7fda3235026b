//! Regenerates the bundled demonstration dataset in `data/`.
//!
//! cargo run --example generate_demo_data [-- OUT_DIR]

use std::path::PathBuf;

use bnflow::dataset::Schema;
use bnflow::synth::{demo_network, forward_sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    std::fs::create_dir_all(&dir)?;
    let net = demo_network();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = forward_sample(&net, 1000, &mut rng)?;
    std::fs::write(dir.join("schema.txt"), Schema::new(net.variables.clone())?.to_text())?;
    net.dag.write_file(&dir.join("truth.dag"))?;
    data.write_csv_file(&dir.join("demo.csv"))?;
    println!("wrote {} rows to {}", data.n_rows(), dir.display());
    Ok(())
}
