//! Deterministic stratified k-fold splitting.

use super::Dataset;
use crate::error::{CdmError, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Split a dataset into `k` stratified folds.
///
/// Returns `(train, test)` index pairs, one per fold. Test folds partition
/// the dataset, per-fold class proportions stay within one sample of the
/// global proportions, and the split is a pure function of `seed`.
pub fn stratified_kfold(
    dataset: &Dataset,
    k: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(CdmError::Protocol(format!("k must be at least 2, got {k}")));
    }
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.num_classes];
    for (idx, g) in dataset.graphs.iter().enumerate() {
        per_class[g.label()].push(idx);
    }
    for (class, members) in per_class.iter().enumerate() {
        if members.len() < k {
            return Err(CdmError::Protocol(format!(
                "class {class} has {} members, fewer than k = {k}",
                members.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for members in &mut per_class {
        members.shuffle(&mut rng);
    }

    // Deal each class across folds; rotate where the remainder lands so fold
    // sizes stay maximally balanced overall (larger classes first).
    let mut class_order: Vec<usize> = (0..dataset.num_classes).collect();
    class_order.sort_by_key(|&c| (std::cmp::Reverse(per_class[c].len()), c));

    let mut test_folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for &class in &class_order {
        let members = &per_class[class];
        let base = members.len() / k;
        let extra = members.len() % k;
        let mut start = 0;
        for offset in 0..k {
            let fold = (cursor + offset) % k;
            let take = base + usize::from(offset < extra);
            test_folds[fold].extend_from_slice(&members[start..start + take]);
            start += take;
        }
        cursor = (cursor + extra) % k;
    }

    let n = dataset.len();
    let mut out = Vec::with_capacity(k);
    for test in &mut test_folds {
        test.sort_unstable();
        let mut in_test = vec![false; n];
        for &idx in test.iter() {
            in_test[idx] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
        out.push((train, std::mem::take(test)));
    }
    Ok(out)
}
