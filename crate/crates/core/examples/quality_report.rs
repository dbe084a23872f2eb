//! How closely do synthetic minority rows follow the real ones? KS test,
//! Wasserstein distance and Jensen-Shannon divergence per feature.
//!
//! cargo run --release --example quality_report -- [smote|borderline_smote|adasyn]

use synthaug::dataset::apply_caps;
use synthaug::demo::{credit_dataset, CreditDataOptions};
use synthaug::harness::{generate_synthetic, ExperimentSpec, Prepared, OversampleParams};
use synthaug::oversample::Technique;
use synthaug::quality::{quality_report, DEFAULT_JS_BINS};

fn main() -> synthaug::Result<()> {
    let technique = std::env::args()
        .nth(1)
        .map_or(Technique::Adasyn, |s| Technique::parse(&s).expect("unknown technique"));
    let data = apply_caps(&credit_dataset(&CreditDataOptions::small(20_000, 1_400, 5))?);
    let prepared = Prepared::new(&data, 0.7, 42)?;
    let spec = ExperimentSpec::augmented("demo", technique.into(), 1.0);
    let (_, fin) = generate_synthetic(&spec, &prepared, &OversampleParams::default(), 42)?.expect("augmented");

    let train = &prepared.split.train;
    let real = train.select(&(0..train.n_rows()).filter(|&i| train.y[i] == 1).collect::<Vec<_>>());
    println!("{technique}: {} synthetic vs {} real minority rows", fin.original.n_rows(), real.n_rows());
    for row in quality_report(&real, &fin.original, DEFAULT_JS_BINS)? {
        println!(
            "  {:<34} KS {:.4} (p {:.2e})  W1 {:>9.4}  JS {:.4}{}",
            row.feature,
            row.ks_stat,
            row.ks_p,
            row.wasserstein,
            row.js_divergence,
            if row.shifted { "  shifted" } else { "" }
        );
    }
    Ok(())
}
