//! Two-rater agreement on single-label dimensions.

use std::collections::HashMap;
use std::hash::Hash;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgreementError {
    #[error("rater lists differ in length ({0} vs {1})")]
    ShapeError(usize, usize),
    #[error("rater lists are empty")]
    Empty,
    #[error("chance agreement is 1 but observed agreement is not")]
    DegenerateMarginals,
}

/// Unweighted Cohen's kappa, `(p_o - p_e) / (1 - p_e)`.
pub fn cohen_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64, AgreementError> {
    if a.len() != b.len() {
        return Err(AgreementError::ShapeError(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(AgreementError::Empty);
    }
    let n = a.len() as f64;
    let mut marg_a: HashMap<&T, usize> = HashMap::new();
    let mut marg_b: HashMap<&T, usize> = HashMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        *marg_a.entry(x).or_default() += 1;
        *marg_b.entry(y).or_default() += 1;
        if x == y {
            agree += 1;
        }
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = marg_a
        .iter()
        .map(|(label, &ca)| {
            let cb = marg_b.get(label).copied().unwrap_or(0);
            (ca as f64 / n) * (cb as f64 / n)
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return if agree == a.len() { Ok(1.0) } else { Err(AgreementError::DegenerateMarginals) };
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_fixtures() {
        let k = cohen_kappa(&["X", "X", "Y", "Y"], &["X", "Y", "X", "Y"]).unwrap();
        assert!(k.abs() < 1e-12);
        let k = cohen_kappa(&["X", "X", "X", "Y"], &["X", "X", "Y", "Y"]).unwrap();
        assert!((k - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_label_everywhere_is_perfect() {
        assert_eq!(cohen_kappa(&["A"; 5], &["A"; 5]), Ok(1.0));
    }

    #[test]
    fn errors() {
        assert_eq!(cohen_kappa(&["A"], &["A", "B"]), Err(AgreementError::ShapeError(1, 2)));
        assert_eq!(cohen_kappa::<&str>(&[], &[]), Err(AgreementError::Empty));
    }
}
