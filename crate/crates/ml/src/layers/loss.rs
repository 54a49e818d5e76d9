use crate::error::{MlError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Row-wise numerically stable softmax of `[batch, classes]` logits.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Tensor<T> {
    let k = logits.row_len();
    let mut out = logits.clone();
    for row in out.data_mut().chunks_mut(k.max(1)) {
        let m = row.iter().copied().fold(row[0], T::max);
        let mut z = T::ZERO;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            z += *v;
        }
        for v in row.iter_mut() {
            *v = *v / z;
        }
    }
    out
}

/// Mean categorical cross-entropy over the batch.
///
/// Returns `(loss, dloss/dlogits, probabilities)`.
pub fn softmax_cross_entropy<T: Scalar>(logits: &Tensor<T>, labels: &[usize]) -> Result<(T, Tensor<T>, Tensor<T>)> {
    if logits.shape().len() != 2 || logits.batch() != labels.len() || logits.batch() == 0 {
        return Err(MlError::Shape(format!(
            "softmax_ce: logits {:?} vs {} labels",
            logits.shape(),
            labels.len()
        )));
    }
    let (b, k) = (logits.batch(), logits.row_len());
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(MlError::Domain(format!("label {bad} out of range for {k} classes")));
    }
    let probs = softmax(logits);
    let inv_b = T::ONE / T::from_f64(b as f64);
    let mut loss = T::ZERO;
    let mut grad = probs.clone();
    for (n, &y) in labels.iter().enumerate() {
        // log-softmax computed directly for accuracy when p is tiny
        let row = logits.row(n);
        let m = row.iter().copied().fold(row[0], T::max);
        let lse = row.iter().map(|&v| (v - m).exp()).sum::<T>().ln() + m;
        loss += lse - row[y];
        grad.data_mut()[n * k + y] -= T::ONE;
    }
    for g in grad.data_mut() {
        *g *= inv_b;
    }
    Ok((loss * inv_b, grad, probs))
}
