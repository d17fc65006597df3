//! Sampled integration output.

use serde::{Deserialize, Serialize};

/// One output row: projected state plus bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub step: u64,
    pub tau: f64,
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Value of the conserved quantity, when the problem has one.
    pub invariant: Option<f64>,
    /// Cumulative vector-field evaluations up to this sample.
    pub evaluations: u64,
}

impl Sample {
    /// `(q, p)` concatenated.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.q.clone();
        v.extend_from_slice(&self.p);
        v
    }
}

/// Append-only sequence of samples with strictly increasing step indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    samples: Vec<Sample>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample. Panics if the step index or evaluation count goes
    /// backwards, which would indicate a driver bug.
    pub fn push(&mut self, sample: Sample) {
        if let Some(last) = self.samples.last() {
            assert!(sample.step > last.step, "step indices must increase");
            assert!(
                sample.evaluations >= last.evaluations,
                "evaluation counts must not decrease"
            );
        }
        self.samples.push(sample);
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// Total evaluations at the last sample.
    pub fn evaluations(&self) -> u64 {
        self.samples.last().map_or(0, |s| s.evaluations)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    /// Recomputes the invariant of every sample.
    pub fn fill_invariant<F: Fn(&Sample) -> f64>(&mut self, f: F) {
        for s in &mut self.samples {
            s.invariant = Some(f(s));
        }
    }
}

impl<'a> IntoIterator for &'a Trajectory {
    type Item = &'a Sample;
    type IntoIter = std::slice::Iter<'a, Sample>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(step: u64, evaluations: u64) -> Sample {
        Sample {
            step,
            tau: step as f64,
            t: step as f64,
            q: vec![1.0],
            p: vec![2.0],
            invariant: None,
            evaluations,
        }
    }

    #[test]
    fn push_and_query() {
        let mut tr = Trajectory::new();
        assert_eq!(tr.evaluations(), 0);
        tr.push(sample(0, 0));
        tr.push(sample(3, 24));
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.evaluations(), 24);
        assert_eq!(tr.last().unwrap().flat(), vec![1.0, 2.0]);
    }

    #[test]
    #[should_panic(expected = "step indices")]
    fn rejects_repeated_step() {
        let mut tr = Trajectory::new();
        tr.push(sample(1, 0));
        tr.push(sample(1, 0));
    }
}
