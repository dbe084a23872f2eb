//! Write a credit-shaped CSV plus a matching run configuration, ready for the
//! `synthaug` binary.
//!
//! cargo run --release --example gen_credit_data -- [DIR] [N_ROWS N_POSITIVE]
//! synthaug --config DIR/synthaug.json run

use std::path::PathBuf;

use synthaug::config::RunConfig;
use synthaug::demo::{credit_dataset, write_credit_csv, CreditDataOptions};

fn main() -> synthaug::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map_or("credit-demo", String::as_str));
    let mut opts = CreditDataOptions {
        n_incomplete: 250,
        ..CreditDataOptions::default()
    };
    if let [_, rows, pos, ..] = args.as_slice() {
        opts.n_rows = rows.parse().expect("N_ROWS");
        opts.n_positive = pos.parse().expect("N_POSITIVE");
        opts.n_incomplete = opts.n_rows / 400;
    }
    std::fs::create_dir_all(&dir).map_err(|e| synthaug::Error::io(&dir, e))?;

    let data = credit_dataset(&opts)?;
    let csv = dir.join("cs-training.csv");
    write_credit_csv(&csv, &data, opts.n_incomplete)?;

    let cfg = RunConfig::credit_default("cs-training.csv");
    let cfg_path = dir.join("synthaug.json");
    std::fs::write(&cfg_path, cfg.to_json()? + "\n").map_err(|e| synthaug::Error::io(&cfg_path, e))?;
    println!(
        "{}: {} complete rows ({} defaults) + {} with missing income",
        csv.display(),
        data.n_rows(),
        data.n_positive(),
        opts.n_incomplete
    );
    println!("config: {}", cfg_path.display());
    Ok(())
}
