//! AUC, Gini and KS for a scored sample, plus ROC and Lorenz curve points.
//!
//! cargo run --example metrics_curves -- [OUT_DIR]

use rand::Rng;
use synthaug::metrics::{curve_points, discrimination, gini, CurveKind, ScoredSet};
use synthaug::rng;

fn main() -> synthaug::Result<()> {
    let mut r = rng::stream(3, 0);
    let labels: Vec<u8> = (0..1_000).map(|_| u8::from(r.random_bool(0.07))).collect();
    let scores: Vec<f64> = labels
        .iter()
        .map(|&l| ((r.random::<f64>() + 0.35 * f64::from(l)) * 100.0).round() / 100.0)
        .collect();
    let scored = ScoredSet::new(scores, labels)?;
    let d = discrimination(&scored)?;
    println!("AUC {:.4}  Gini {:.4}  KS {:.4}", d.auc, d.gini, d.ks);
    println!("AUC 0.677839 corresponds to Gini {:.6}", gini(0.677839));

    let roc = curve_points(&scored, CurveKind::Roc)?;
    let lorenz = curve_points(&scored, CurveKind::Lorenz)?;
    println!("ROC: {} points, area {:.4}", roc.points.len(), roc.area());
    println!("Lorenz: {} points, area {:.4}", lorenz.points.len(), lorenz.area());

    if let Some(dir) = std::env::args().nth(1) {
        let dir = std::path::PathBuf::from(dir);
        std::fs::create_dir_all(&dir).map_err(|e| synthaug::Error::io(&dir, e))?;
        roc.write_csv(&dir.join("roc.csv"))?;
        lorenz.write_csv(&dir.join("lorenz.csv"))?;
        println!("curves written to {}", dir.display());
    }
    Ok(())
}
