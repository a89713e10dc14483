//! Gini coefficient of a nonnegative distribution.

use crate::error::ReportError;
use crate::Scalar;

/// `sum_i sum_j |v_i - v_j| / (2 n^2 mean)`, computed in `O(n log n)` from
/// the sorted values. An all-zero input has coefficient 0.
pub fn gini<T: Scalar>(values: &[T]) -> Result<T, ReportError> {
    if values.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    if let Some(k) = values
        .iter()
        .position(|v| *v < T::zero() || !v.to_f64_lossy().is_finite())
    {
        return Err(ReportError::NegativeInput(k));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = T::from_count(sorted.len());
    let mut total = T::zero();
    let mut weighted = T::zero();
    for (k, &v) in sorted.iter().enumerate() {
        // Rank weight 2k - n + 1 for zero-based k.
        let rank = T::from_count(2 * k + 1) - n;
        weighted += rank * v;
        total += v;
    }
    if total == T::zero() {
        return Ok(T::zero());
    }
    // Rounding can push a float result a hair outside [0, 1].
    Ok((weighted / (n * total)).max_of(T::zero()).min_of(T::one()))
}
