//! Train the class-weighted boosted tree model on an XOR problem, watch the
//! training loss and save the model as JSON.
//!
//! cargo run --release --example train_gbdt -- [MODEL_JSON]

use ndarray::Array2;
use rand::Rng;
use synthaug::gbdt::{scale_pos_weight_from_counts, train, GbdtConfig, GbdtModel};
use synthaug::metrics::{auc_roc, ScoredSet};
use synthaug::rng;

fn main() -> synthaug::Result<()> {
    let mut r = rng::stream(7, 0);
    let n = 2_000;
    let x = Array2::from_shape_fn((n, 2), |_| r.random_range(-1.0..1.0));
    // Positive on two opposite quadrants, about one in ten kept positive.
    let y: Vec<u8> = (0..n)
        .map(|i| u8::from(x[[i, 0]] * x[[i, 1]] > 0.0 && i % 5 == 0))
        .collect();
    let n_pos = y.iter().filter(|&&v| v == 1).count();

    let cfg = GbdtConfig {
        max_depth: 3,
        n_estimators: 60,
        scale_pos_weight: scale_pos_weight_from_counts(n - n_pos, n_pos)?,
        ..GbdtConfig::default()
    };
    let model = train(x.view(), &y, &cfg)?;
    let every = model.train_loss.len() / 6;
    for (round, loss) in model.train_loss.iter().enumerate().step_by(every.max(1)) {
        println!("round {round:>3}  loss {loss:.5}");
    }
    let auc = auc_roc(&ScoredSet::new(model.predict_proba(x.view())?, y)?)?;
    println!("training AUC {auc:.4}, {} trees", model.trees.len());

    if let Some(path) = std::env::args().nth(1) {
        let path = std::path::PathBuf::from(path);
        model.save(&path)?;
        let back = GbdtModel::load(&path)?;
        assert_eq!(back, model);
        println!("saved to {}", path.display());
    }
    Ok(())
}
