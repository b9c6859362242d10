//! Rank-based AUROC.

use ndarray::Array2;

/// Mann–Whitney AUROC with ties counted one half. `None` unless both classes
/// are present.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // sum of midranks of positives (1-based)
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k]).count();
        rank_sum += midrank * tied_pos as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Some((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Unweighted one-vs-rest mean over classes with both outcomes present.
/// `scores` has one column per class.
pub fn macro_auroc(scores: &Array2<f64>, labels: &[usize]) -> Option<f64> {
    let per_class: Vec<f64> = (0..scores.ncols())
        .filter_map(|c| {
            let col: Vec<f64> = scores.column(c).to_vec();
            let hit: Vec<bool> = labels.iter().map(|&l| l == c).collect();
            auroc(&col, &hit)
        })
        .collect();
    mean(&per_class)
}

/// Mean per-label AUROC over labels with both outcomes present.
pub fn multilabel_auroc(scores: &Array2<f64>, targets: &Array2<bool>) -> Option<f64> {
    assert_eq!(scores.dim(), targets.dim(), "scores and targets differ in shape");
    let per_label: Vec<f64> = (0..scores.ncols())
        .filter_map(|c| auroc(&scores.column(c).to_vec(), &targets.column(c).to_vec()))
        .collect();
    mean(&per_label)
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}
