//! Synthetic credit data shaped like the public "Give Me Some Credit" file:
//! the same six columns and target name, similar marginals, and an exact
//! number of defaults.
//!
//! Labels come from a latent logistic score: the `n_positive` rows with the
//! highest `η_i + ε_i` (with `ε_i` standard logistic noise) are the defaults,
//! so the class balance is exact while the signal strength stays moderate.

use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};

use crate::config::credit_schema;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng;

/// Row and default counts of the cleaned credit file used in the experiments.
pub const CREDIT_ROWS: usize = 97_243;
pub const CREDIT_POSITIVES: usize = 6_871;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CreditDataOptions {
    pub n_rows: usize,
    pub n_positive: usize,
    pub seed: u64,
    /// Extra rows with a missing income written by [`write_credit_csv`];
    /// the loader drops them.
    pub n_incomplete: usize,
}

impl Default for CreditDataOptions {
    fn default() -> Self {
        Self {
            n_rows: CREDIT_ROWS,
            n_positive: CREDIT_POSITIVES,
            seed: 2024,
            n_incomplete: 0,
        }
    }
}

impl CreditDataOptions {
    pub fn small(n_rows: usize, n_positive: usize, seed: u64) -> Self {
        Self {
            n_rows,
            n_positive,
            seed,
            n_incomplete: 0,
        }
    }
}

struct Applicant {
    features: [f64; 6],
    latent: f64,
}

fn applicant(seed: u64, i: usize) -> Applicant {
    let mut r = rng::stream(seed, i as u64);
    let age: f64 = Normal::new(52.0f64, 14.5).unwrap().sample(&mut r).round().clamp(21.0, 103.0);
    let income = LogNormal::new(5_400f64.ln(), 0.7).unwrap().sample(&mut r).round();
    // A long right tail, as in the source file.
    let debt: f64 = if r.random_bool(0.12) {
        LogNormal::new(5.5, 1.6).unwrap().sample(&mut r)
    } else {
        LogNormal::new(-1.0, 0.75).unwrap().sample(&mut r)
    };
    let dependents: f64 = Poisson::new(0.75).unwrap().sample(&mut r);
    let open_lines: f64 = Poisson::new(8.5).unwrap().sample(&mut r);
    let real_estate: f64 = Poisson::new(1.0).unwrap().sample(&mut r);

    let eta = -0.035 * (age - 52.0) - 0.30 * (income.max(1.0) / 5_400.0).ln()
        + 0.45 * debt.min(3.0)
        + 0.12 * dependents
        - 0.03 * (open_lines - 8.5)
        + 0.10 * (real_estate - 1.0).abs();
    let u: f64 = r.random_range(1e-12..1.0 - 1e-12);
    Applicant {
        features: [age, income, debt, dependents, open_lines, real_estate],
        latent: eta + 0.9 * (u / (1.0 - u)).ln(),
    }
}

/// Generate a credit-shaped dataset with exactly `n_positive` defaults.
pub fn credit_dataset(opts: &CreditDataOptions) -> Result<Dataset> {
    if opts.n_positive == 0 || opts.n_positive >= opts.n_rows {
        return Err(Error::InvalidArgument(format!(
            "need 0 < n_positive < n_rows, got {} of {}",
            opts.n_positive, opts.n_rows
        )));
    }
    let rows: Vec<Applicant> = (0..opts.n_rows).map(|i| applicant(opts.seed, i)).collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[b].latent.total_cmp(&rows[a].latent).then(a.cmp(&b)));
    let mut y = vec![0u8; opts.n_rows];
    for &i in &order[..opts.n_positive] {
        y[i] = 1;
    }
    let mut x = Array2::zeros((opts.n_rows, 6));
    for (i, a) in rows.iter().enumerate() {
        for (j, v) in a.features.iter().enumerate() {
            x[[i, j]] = *v;
        }
    }
    Dataset::new(x, y, credit_schema())
}

/// Write the dataset in the source file's column order, with a leading
/// unnamed index column. `n_incomplete` rows with `NA` income are spread
/// through the file.
pub fn write_credit_csv(path: &Path, data: &Dataset, n_incomplete: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "",
        "SeriousDlqin2yrs",
        "age",
        "DebtRatio",
        "MonthlyIncome",
        "NumberOfOpenCreditLinesAndLoans",
        "NumberRealEstateLoansOrLines",
        "NumberOfDependents",
    ])?;
    // Column order in the file vs. schema order.
    const FILE_ORDER: [usize; 6] = [0, 2, 1, 4, 5, 3];
    let n = data.n_rows();
    let every = n.checked_div(n_incomplete).map_or(usize::MAX, |e| e.max(1));
    let mut written_incomplete = 0;
    let mut id = 1usize;
    for i in 0..n {
        let row = data.x.row(i);
        let mut record = vec![id.to_string(), data.y[i].to_string()];
        record.extend(FILE_ORDER.iter().map(|&j| row[j].to_string()));
        w.write_record(&record)?;
        id += 1;
        if written_incomplete < n_incomplete && (i + 1) % every == 0 {
            let mut bad = vec![id.to_string(), "0".to_string()];
            bad.extend(FILE_ORDER.iter().map(|&j| if j == 1 { "NA".to_string() } else { row[j].to_string() }));
            w.write_record(&bad)?;
            written_incomplete += 1;
            id += 1;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_counts_and_determinism() {
        let opts = CreditDataOptions::small(2_000, 140, 7);
        let a = credit_dataset(&opts).unwrap();
        assert_eq!(a.n_rows(), 2_000);
        assert_eq!(a.n_positive(), 140);
        assert_eq!(a.digest(), credit_dataset(&opts).unwrap().digest());
    }

    #[test]
    fn csv_round_trip_drops_incomplete_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("credit.csv");
        let data = credit_dataset(&CreditDataOptions::small(300, 30, 1)).unwrap();
        write_credit_csv(&path, &data, 12).unwrap();
        let loaded = crate::dataset::load_csv(&path, &credit_schema()).unwrap();
        assert_eq!(loaded.dropped_rows, 12);
        assert_eq!(loaded.dataset.digest(), data.digest());
    }
}
