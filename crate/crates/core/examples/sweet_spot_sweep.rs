//! Sweep one technique over several multipliers and report where AUC peaks.
//!
//! cargo run --release --example sweet_spot_sweep -- [TECHNIQUE] [OUT_DIR]

use synthaug::dataset::apply_caps;
use synthaug::demo::{credit_dataset, CreditDataOptions};
use synthaug::harness::{sweep, BootstrapSettings, SuiteOptions};
use synthaug::oversample::Technique;
use synthaug::report::write_sweep_report;

fn main() -> synthaug::Result<()> {
    let mut args = std::env::args().skip(1);
    let technique = args
        .next()
        .map_or(Technique::Adasyn, |s| Technique::parse(&s).expect("unknown technique"));
    let data = apply_caps(&credit_dataset(&CreditDataOptions::small(30_000, 2_120, 9))?);
    let opts = SuiteOptions {
        bootstrap: BootstrapSettings {
            n_iter: 300,
            ..BootstrapSettings::default()
        },
        ..SuiteOptions::default()
    };
    let report = sweep(technique, &[1.0, 2.0, 3.0], &data, &opts)?;
    println!("{technique}: baseline AUC {:.4} at ratio {:.2}", report.baseline.auc, report.baseline.final_ratio);
    for p in &report.points {
        let b = p.result.bootstrap_vs_baseline.as_ref().expect("compared to baseline");
        println!(
            "  {}x  ratio {:>5.2}  AUC {:.4}  ΔAUC {:+.4}  p {:.3}",
            p.multiplier, p.result.final_ratio, p.result.auc, b.delta_auc_point, b.p_value
        );
    }
    println!("best multiplier: {}x", report.argmax_multiplier);
    if let Some(dir) = args.next() {
        for f in write_sweep_report(std::path::Path::new(&dir), &report)? {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}
