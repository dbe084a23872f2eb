//! Load a CSV, apply domain caps, split with stratification and fit the
//! scaler on the training rows only.
//!
//! cargo run --example prepare_split -- [CSV]
//! Without an argument a small generated file is used.

use std::path::PathBuf;

use synthaug::config::credit_schema;
use synthaug::dataset::{apply_caps, fit_scaler, load_csv, stratified_allocation, stratified_split};
use synthaug::demo::{credit_dataset, write_credit_csv, CreditDataOptions};

fn main() -> synthaug::Result<()> {
    let tmp = tempfile::tempdir().expect("temp dir");
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = tmp.path().join("credit.csv");
            let data = credit_dataset(&CreditDataOptions::small(5_000, 353, 11))?;
            write_credit_csv(&p, &data, 20)?;
            p
        }
    };

    let loaded = load_csv(&path, &credit_schema())?;
    println!("{} rows kept, {} dropped", loaded.dataset.n_rows(), loaded.dropped_rows);
    let data = apply_caps(&loaded.dataset);

    let split = stratified_split(&data, 0.7, 42)?;
    println!(
        "train {} ({} positive)  test {} ({} positive)",
        split.train.n_rows(),
        split.train.n_positive(),
        split.test.n_rows(),
        split.test.n_positive()
    );
    println!("test digest {}", split.test.digest());

    let scaler = fit_scaler(&split.train)?;
    for (name, (m, s)) in credit_schema().names().zip(scaler.means.iter().zip(&scaler.std_devs)) {
        println!("  {name:<34} mean {m:>10.3}  std {s:>10.3}");
    }

    // The allocation rule at the scale of the full credit file.
    let [neg, pos] = stratified_allocation([90_372, 6_871], 0.7);
    println!("97,243 rows at 0.7 -> {} train ({neg} + {pos})", neg + pos);
    Ok(())
}
