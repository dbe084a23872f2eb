//! The ten-scenario suite on generated credit-shaped data, with the report
//! written to a directory.
//!
//! cargo run --release --example run_suite -- [OUT_DIR] [N_ROWS N_POSITIVE]

use std::path::PathBuf;
use std::time::Instant;

use synthaug::dataset::apply_caps;
use synthaug::demo::{credit_dataset, CreditDataOptions};
use synthaug::harness::{default_suite, run_suite, SuiteOptions};
use synthaug::report::{format_ranking, write_suite_report};

fn main() -> synthaug::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = PathBuf::from(args.first().map_or("suite-report", String::as_str));
    let mut data_opts = CreditDataOptions::default();
    if let [_, rows, pos, ..] = args.as_slice() {
        data_opts.n_rows = rows.parse().expect("N_ROWS");
        data_opts.n_positive = pos.parse().expect("N_POSITIVE");
    }
    let data = apply_caps(&credit_dataset(&data_opts)?);
    println!("{} rows, {} defaults", data.n_rows(), data.n_positive());

    let started = Instant::now();
    let outcome = run_suite(&default_suite(), &data, &SuiteOptions::default())?;
    let (ranking, files) = write_suite_report(&out, &outcome)?;
    print!("{}", format_ranking(&ranking));
    println!(
        "{} scenarios in {:.1}s, {} files in {}",
        outcome.results.len(),
        started.elapsed().as_secs_f64(),
        files.len(),
        out.display()
    );
    for f in &outcome.failures {
        println!("failed: {} ({})", f.id, f.error);
    }
    Ok(())
}
