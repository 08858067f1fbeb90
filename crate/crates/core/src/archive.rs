//! The evaluated set: points, values, and best-so-far bookkeeping.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::space::Bounds;

/// All evaluated `(point, value)` pairs, in insertion order, plus the
/// index of the incumbent minimizer.
///
/// The best index moves only on strict improvement, so on ties the
/// earliest-inserted minimizer is retained and the best-so-far sequence
/// is monotone non-increasing by construction.
#[derive(Debug, Clone)]
pub struct Archive {
    bounds: Bounds,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    best_index: Option<usize>,
}

impl Archive {
    pub fn new(bounds: Bounds) -> Self {
        Archive {
            bounds,
            points: Vec::new(),
            values: Vec::new(),
            best_index: None,
        }
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Append one evaluated pair, updating the incumbent on strict
    /// improvement only.
    pub fn insert(&mut self, point: Vec<f64>, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::RejectedEvaluation { value });
        }
        self.bounds.check(&point)?;
        self.points.push(point);
        self.values.push(value);
        match self.best_index {
            Some(best) if self.values[best] <= value => {}
            _ => self.best_index = Some(self.values.len() - 1),
        }
        Ok(())
    }

    /// The incumbent minimizer and its value.
    pub fn best(&self) -> Result<(&[f64], f64)> {
        let idx = self.best_index.ok_or(Error::EmptyArchive)?;
        Ok((&self.points[idx], self.values[idx]))
    }

    pub fn best_index(&self) -> Option<usize> {
        self.best_index
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best_index.map(|i| self.values[i])
    }
}

/// Decrease in the best observed objective value between consecutive
/// iterations. Positive means success; zero or negative means failure.
pub fn improvement(prev_best_value: f64, new_best_value: f64) -> f64 {
    prev_best_value - new_best_value
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(d: usize) -> Bounds {
        Bounds::cube(d, 0.0, 1.0).unwrap()
    }

    #[test]
    fn single_element_archive() {
        let mut a = Archive::new(unit(2));
        a.insert(vec![0.5, 0.5], 3.0).unwrap();
        assert_eq!(a.best_index(), Some(0));
        assert_eq!(a.best().unwrap().1, 3.0);
    }

    #[test]
    fn tie_keeps_incumbent() {
        let mut a = Archive::new(unit(1));
        a.insert(vec![0.1], 1.0).unwrap();
        a.insert(vec![0.2], 1.0).unwrap();
        assert_eq!(a.best_index(), Some(0));
        assert_eq!(a.best().unwrap().0, &[0.1]);
    }

    #[test]
    fn strict_improvement_moves_best() {
        let mut a = Archive::new(unit(1));
        a.insert(vec![0.1], 1.0).unwrap();
        a.insert(vec![0.2], 0.5).unwrap();
        assert_eq!(a.best_index(), Some(1));
    }

    #[test]
    fn best_of_picks_minimum_and_first_come_ties() {
        let mut a = Archive::new(unit(1));
        for (x, v) in [(0.0, 3.0), (0.5, 1.0), (1.0, 2.0)] {
            a.insert(vec![x], v).unwrap();
        }
        let (p, v) = a.best().unwrap();
        assert_eq!((p[0], v), (0.5, 1.0));
    }

    #[test]
    fn rejects_bad_inserts() {
        let mut a = Archive::new(unit(1));
        assert!(matches!(
            a.insert(vec![0.5], f64::NAN),
            Err(Error::RejectedEvaluation { .. })
        ));
        assert!(matches!(a.insert(vec![1.5], 0.0), Err(Error::OutOfBounds { .. })));
        assert!(matches!(
            a.insert(vec![0.5, 0.5], 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(a.best(), Err(Error::EmptyArchive)));
    }

    #[test]
    fn improvement_sign_convention() {
        assert_eq!(improvement(5.0, 3.0), 2.0);
        assert_eq!(improvement(3.0, 3.0), 0.0);
        assert_eq!(improvement(3.0, 5.0), -2.0);
    }

    proptest! {
        #[test]
        fn best_so_far_is_monotone(values in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
            let mut a = Archive::new(unit(1));
            let mut prev = f64::INFINITY;
            for v in values {
                a.insert(vec![0.5], v).unwrap();
                let best = a.best_value().unwrap();
                prop_assert!(best <= prev);
                prev = best;
            }
        }

        #[test]
        fn improvement_is_additive(a in -1e9f64..1e9, b in -1e9f64..1e9, c in -1e9f64..1e9) {
            let lhs = improvement(a, b) + improvement(b, c);
            let rhs = improvement(a, c);
            prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + rhs.abs()));
        }
    }
}
