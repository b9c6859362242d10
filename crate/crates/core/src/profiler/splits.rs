//! Train/val/test roles for each repeat.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::graph::{Dataset, SplitRole};
use crate::rng;

use super::CV_FOLDS;

/// Fold index of each entity; classes are dealt round-robin after shuffling so
/// every fold gets a near-equal share of each class.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::rng_for(seed, "cv", &[]);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut rng);
    order.sort_by_key(|&i| labels[i]);
    let mut fold = vec![0; labels.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

/// Roles for repeat `r`: predefined fold `r mod F` when the dataset has
/// folds, else test = CV fold `r mod 10`, val = the next fold, train = rest.
pub fn repeat_roles(ds: &Dataset, repeat: usize, seed: u64) -> Result<Vec<SplitRole>> {
    if ds.has_predefined_splits() {
        let folds = ds.folds();
        return Ok(folds[repeat % folds.len()].clone());
    }
    let n = ds.num_entities();
    if n < CV_FOLDS {
        return Err(Error::InvalidArgument(format!(
            "{} has {n} entities, too few for {CV_FOLDS}-fold cross-validation",
            ds.name
        )));
    }
    let labels = ds.entity_labels().unwrap_or_else(|| vec![0; n]);
    let cv_seed = rng::derive_seed(seed, &format!("cv/{}", ds.name), &[]);
    let fold = stratified_folds(&labels, CV_FOLDS, cv_seed);
    let test = repeat % CV_FOLDS;
    let val = (test + 1) % CV_FOLDS;
    Ok(fold
        .iter()
        .map(|&f| {
            if f == test {
                SplitRole::Test
            } else if f == val {
                SplitRole::Val
            } else {
                SplitRole::Train
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stratified_folds_balance_classes() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i % 4 == 0)).collect();
        let fold = stratified_folds(&labels, 10, 3);
        for f in 0..10 {
            let members: Vec<usize> = (0..100).filter(|&i| fold[i] == f).collect();
            assert_eq!(members.len(), 10);
            let pos = members.iter().filter(|&&i| labels[i] == 1).count();
            assert!((2..=3).contains(&pos));
        }
    }
}
