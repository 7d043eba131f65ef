//! Label agreement up to a permutation of component indices.

use pathfinding::prelude::{kuhn_munkres, Matrix};

use crate::error::{Error, Result};

/// Best one-to-one relabeling of `predicted` onto `truth`, found with the
/// Hungarian algorithm on the confusion counts. `mapping[p]` is the truth
/// label assigned to predicted label `p`.
pub fn align_labels(truth: &[usize], predicted: &[usize]) -> Result<Vec<usize>> {
    if truth.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            context: "label vectors",
            expected: truth.len(),
            found: predicted.len(),
        });
    }
    let size = truth.iter().chain(predicted).copied().max().map_or(1, |m| m + 1);
    let mut counts = Matrix::new(size, size, 0i64);
    for (&t, &p) in truth.iter().zip(predicted) {
        counts[(p, t)] += 1;
    }
    let (_, mapping) = kuhn_munkres(&counts);
    Ok(mapping)
}

/// Fraction of samples whose aligned predicted label equals the truth.
pub fn hungarian_accuracy(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::invalid("accuracy of an empty labeling"));
    }
    let mapping = align_labels(truth, predicted)?;
    let hits = truth.iter().zip(predicted).filter(|(t, p)| mapping[**p] == **t).count();
    Ok(hits as f64 / truth.len() as f64)
}
