//! SMOTE, BorderlineSMOTE and ADASYN side by side on a two-dimensional
//! fixture: how many rows each makes and where their base instances come from.
//!
//! cargo run --example oversample_compare

use ndarray::Array2;
use rand_distr::{Distribution, Normal};
use synthaug::oversample::{adasyn_allocation, classify_borderline, oversample, OversampleConfig, Technique};
use synthaug::rng;

fn blob(n: usize, center: (f64, f64), spread: f64, seed: u64) -> Array2<f64> {
    let mut r = rng::stream(seed, 0);
    let noise = Normal::new(0.0, spread).unwrap();
    Array2::from_shape_fn((n, 2), |(_, j)| {
        let c = if j == 0 { center.0 } else { center.1 };
        c + noise.sample(&mut r)
    })
}

fn main() -> synthaug::Result<()> {
    let minority = blob(40, (1.0, 1.0), 0.8, 1);
    let majority = blob(400, (0.0, 0.0), 1.0, 2);

    let border = classify_borderline(minority.view(), majority.view(), 10)?;
    let danger = border.danger_indices();
    println!("{} of {} minority rows are in danger", danger.len(), minority.nrows());

    let alloc = adasyn_allocation(minority.view(), majority.view(), 5, 80)?;
    let busiest = alloc.counts.iter().enumerate().max_by_key(|&(i, c)| (*c, usize::MAX - i)).unwrap();
    println!("ADASYN at 2x gives row {} the largest quota ({} of 80)", busiest.0, busiest.1);

    for technique in Technique::ALL {
        for multiplier in [1.0, 2.0] {
            let cfg = OversampleConfig::new(technique, multiplier, 42);
            let batch = oversample(minority.view(), majority.view(), &cfg)?;
            let mut bases: Vec<usize> = batch.provenance.iter().map(|p| p.parent_i).collect();
            bases.sort_unstable();
            bases.dedup();
            println!(
                "{technique:<16} {multiplier}x  {:>3} rows from {:>2} distinct base rows",
                batch.len(),
                bases.len()
            );
        }
    }
    Ok(())
}
