//! Paired bootstrap: is an informative scorer better than a noisy one on the
//! same test rows?
//!
//! cargo run --release --example bootstrap_compare -- [ITERATIONS]

use rand::Rng;
use synthaug::bootstrap::{bootstrap_compare, significance_flag, BootstrapOptions, DEFAULT_ALPHA};
use synthaug::rng;

fn main() -> synthaug::Result<()> {
    let iterations = std::env::args().nth(1).map_or(1_000, |s| s.parse().expect("ITERATIONS"));
    let mut r = rng::stream(11, 0);
    let n = 500;
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 10 == 0)).collect();
    let informative: Vec<f64> = labels.iter().map(|&l| r.random::<f64>() + 0.4 * f64::from(l)).collect();
    let noisy: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();

    let opts = BootstrapOptions::new(iterations, 42);
    for (name, a, b) in [("informative vs noisy", &informative, &noisy), ("noisy vs informative", &noisy, &informative)] {
        let res = bootstrap_compare(a, b, &labels, &opts)?;
        println!(
            "{name}: ΔAUC {:+.4}  p {:.3}  95% CI [{:+.4}, {:+.4}]  significant {}",
            res.delta_auc_point,
            res.p_value,
            res.ci95_auc.0,
            res.ci95_auc.1,
            significance_flag(&res, DEFAULT_ALPHA)
        );
    }
    let same = bootstrap_compare(&informative, &informative, &labels, &opts)?;
    println!("self comparison: p {:.1}, CI [{}, {}]", same.p_value, same.ci95_auc.0, same.ci95_auc.1);
    Ok(())
}
