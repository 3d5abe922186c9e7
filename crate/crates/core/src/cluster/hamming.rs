use super::LabelVector;
use crate::error::{Error, Result};

const MAX_K: usize = 10;

/// Clustering error `min_pi #{i : yhat_i != pi(y_i)} / n` over all label
/// permutations `pi`, by exact enumeration on the confusion matrix.
pub fn hamming_error(yhat: &LabelVector, y: &LabelVector, k: usize) -> Result<f64> {
    if k > MAX_K {
        return Err(Error::KTooLarge(k));
    }
    if yhat.len() != y.len() {
        return Err(Error::InvalidInput(format!("label vectors differ in length ({} vs {})", yhat.len(), y.len())));
    }
    if yhat.k() > k || y.k() > k || k == 0 {
        return Err(Error::InvalidInput(format!("labels exceed K = {k}")));
    }
    let mut confusion = vec![0usize; k * k];
    for (&a, &b) in yhat.labels().iter().zip(y.labels()) {
        confusion[(a - 1) * k + (b - 1)] += 1;
    }

    // Heap's algorithm over permutations of 0..k
    let mut perm: Vec<usize> = (0..k).collect();
    let matches = |perm: &[usize]| -> usize { (0..k).map(|b| confusion[perm[b] * k + b]).sum() };
    let mut best = matches(&perm);
    let mut c = vec![0usize; k];
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.max(matches(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok((y.len() - best) as f64 / y.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[usize], k: usize) -> LabelVector {
        LabelVector::new(v.to_vec(), k).unwrap()
    }

    #[test]
    fn identical_and_relabeled() {
        let y = lv(&[1, 2, 3, 1, 2, 3, 3], 3);
        assert_eq!(hamming_error(&y, &y, 3).unwrap(), 0.0);
        let relabeled = lv(&[3, 1, 2, 3, 1, 2, 2], 3);
        assert_eq!(hamming_error(&relabeled, &y, 3).unwrap(), 0.0);
    }

    #[test]
    fn two_class_example() {
        let y = lv(&[1, 1, 2, 2], 2);
        let yhat = lv(&[1, 2, 1, 1], 2);
        assert_eq!(hamming_error(&yhat, &y, 2).unwrap(), 0.25);
    }

    #[test]
    fn too_many_classes() {
        let y = lv(&[1], 11);
        assert!(matches!(hamming_error(&y, &y, 11), Err(Error::KTooLarge(11))));
    }
}
