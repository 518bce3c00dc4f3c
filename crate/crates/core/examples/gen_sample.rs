//! Writes the synthetic demo dataset: 60 scenarios of features and their
//! simulated survey responses. The ratings come from a known synthetic
//! signal and carry no scientific meaning.
//!
//!     cargo run -p viewscope --example gen_sample -- [OUT_DIR] [SEED]

use std::fs::{self, File};
use std::path::PathBuf;

use viewscope::predictor::{write_feature_table, write_responses};
use viewscope::synthetic::{synthetic_features, synthetic_responses, ResponseNoise};

const SCENARIOS: usize = 60;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "demo".into()));
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2024);
    fs::create_dir_all(&dir)?;
    let features = synthetic_features(SCENARIOS, seed);
    let responses = synthetic_responses(&features, ResponseNoise::default(), seed.wrapping_add(1));
    write_feature_table(&features, File::create(dir.join("sample_features.csv"))?)?;
    write_responses(&responses, File::create(dir.join("sample_responses.csv"))?)?;
    println!(
        "{} scenarios, {} responses written to {}",
        features.len(),
        responses.len(),
        dir.display()
    );
    Ok(())
}
