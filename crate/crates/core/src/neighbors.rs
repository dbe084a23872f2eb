//! Exact k-nearest-neighbor search under Euclidean distance.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// `indices[q][r]` is the r-th nearest reference row of query `q`;
/// `distances` holds the matching Euclidean distances, non-decreasing per row.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborTable {
    pub indices: Vec<Vec<usize>>,
    pub distances: Vec<Vec<f64>>,
}

impl NeighborTable {
    pub fn n_queries(&self) -> usize {
        self.indices.len()
    }

    pub fn k(&self) -> usize {
        self.indices.first().map_or(0, Vec::len)
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Brute-force k nearest references for every query row.
///
/// With `exclude_self`, query row `i` is taken to be reference row `i` (the
/// query set is a prefix of the reference set) and that reference is skipped.
/// Distance ties are broken by the smaller reference index.
pub fn knn(
    queries: ArrayView2<'_, f64>,
    references: ArrayView2<'_, f64>,
    k: usize,
    exclude_self: bool,
) -> Result<NeighborTable> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if queries.ncols() != references.ncols() {
        return Err(Error::Schema(format!(
            "queries have {} features, references {}",
            queries.ncols(),
            references.ncols()
        )));
    }
    if exclude_self && queries.nrows() > references.nrows() {
        return Err(Error::InvalidArgument(
            "self-exclusion requires the queries to be a prefix of the references".into(),
        ));
    }
    let usable = references.nrows() - usize::from(exclude_self);
    if k > usable {
        return Err(Error::InsufficientNeighbors {
            requested: k,
            available: usable,
        });
    }

    let refs = references.as_standard_layout().into_owned();
    let qs = queries.as_standard_layout().into_owned();
    let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..qs.nrows())
        .into_par_iter()
        .map(|q| nearest_for(&qs, &refs, q, k, exclude_self))
        .collect();
    let (indices, distances) = rows.into_iter().unzip();
    Ok(NeighborTable { indices, distances })
}

fn nearest_for(
    qs: &Array2<f64>,
    refs: &Array2<f64>,
    q: usize,
    k: usize,
    exclude_self: bool,
) -> (Vec<usize>, Vec<f64>) {
    let query = qs.row(q);
    let query = query.as_slice().expect("standard layout");
    let mut cands: Vec<(f64, usize)> = refs
        .rows()
        .into_iter()
        .enumerate()
        .filter(|&(r, _)| !(exclude_self && r == q))
        .map(|(r, row)| (squared_distance(query, row.as_slice().expect("standard layout")), r))
        .collect();
    if k < cands.len() {
        cands.select_nth_unstable_by(k - 1, by_distance_then_index);
        cands.truncate(k);
    }
    cands.sort_unstable_by(by_distance_then_index);
    cands.into_iter().map(|(d2, r)| (r, d2.sqrt())).unzip()
}
