//! Explicit partitioned Runge–Kutta steps for `ẋ = f(y)`, `ẏ = g(x)`.
//!
//! Stages are `X_i = x₀ + hΣ a1_ij f(Y_j)` and `Y_i = y₀ + hΣ a2_ij g(X_j)`.
//! Their evaluation order is derived from the dependency graph of the
//! non-zero coefficients, so any tableau without cyclic dependencies is
//! explicit.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrkTableau {
    pub a1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub a2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

impl PrkTableau {
    pub fn new(a1: Vec<Vec<f64>>, b1: Vec<f64>, a2: Vec<Vec<f64>>, b2: Vec<f64>) -> Result<Self> {
        let s = b1.len();
        let square = |a: &Vec<Vec<f64>>| a.len() == s && a.iter().all(|r| r.len() == s);
        if s == 0 || b2.len() != s || !square(&a1) || !square(&a2) {
            return Err(Error::InvalidParameter(
                "tableau matrices must be s×s with s-vectors of weights".into(),
            ));
        }
        for b in [&b1, &b2] {
            let sum: f64 = b.iter().sum();
            if (sum - 1.0).abs() > 1e-15 {
                return Err(Error::InvalidParameter(format!(
                    "tableau weights sum to {sum}, not 1"
                )));
            }
        }
        Ok(Self { a1, b1, a2, b2 })
    }

    pub fn stages(&self) -> usize {
        self.b1.len()
    }

    /// Kick–drift–kick Störmer–Verlet with `x = q`, `y = p`.
    pub fn stormer_verlet() -> Self {
        Self::new(
            vec![vec![0.0, 0.0], vec![0.5, 0.5]],
            vec![0.5, 0.5],
            vec![vec![0.5, 0.0], vec![0.5, 0.0]],
            vec![0.5, 0.5],
        )
        .expect("valid tableau")
    }

    /// One step of the `QP̃Q̃P` extended leapfrog with shared-weight mixing
    /// `α₁` mid-step and `α₂` at step end, for `x = (q, p̃)`, `y = (q̃, p)`
    /// and `f = g = (∇_p H, −∇_q H)`.
    pub fn extended_mixed(alpha1: f64, alpha2: f64) -> Self {
        let (a, b) = (alpha1, alpha2);
        let stage = vec![
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0, 0.0],
            vec![a / 2.0, (1.0 - a) / 2.0, 0.0, 0.0],
            vec![(1.0 - a) / 2.0, a / 2.0, 0.5, 0.0],
        ];
        let same = (b * a + (1.0 - b) * (1.0 - a)) / 2.0;
        let cross = (b * (1.0 - a) + (1.0 - b) * a) / 2.0;
        Self::new(
            stage.clone(),
            vec![same, cross, (1.0 - b) / 2.0, b / 2.0],
            stage,
            vec![cross, same, b / 2.0, (1.0 - b) / 2.0],
        )
        .expect("valid tableau")
    }

    /// Evaluation order of the `2s` stage values, `(is_y, index)`.
    fn schedule(&self) -> Result<Vec<(bool, usize)>> {
        let s = self.stages();
        // Node i is X_i, node s + i is Y_i.
        let mut indeg = vec![0usize; 2 * s];
        let mut out: Vec<Vec<usize>> = vec![vec![]; 2 * s];
        for i in 0..s {
            for j in 0..s {
                if self.a1[i][j] != 0.0 {
                    out[s + j].push(i);
                    indeg[i] += 1;
                }
                if self.a2[i][j] != 0.0 {
                    out[j].push(s + i);
                    indeg[s + i] += 1;
                }
            }
        }
        let mut queue: VecDeque<usize> = (0..2 * s).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(2 * s);
        while let Some(v) = queue.pop_front() {
            order.push(if v < s { (false, v) } else { (true, v - s) });
            for &w in &out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        if order.len() == 2 * s {
            Ok(order)
        } else {
            Err(Error::ImplicitTableau)
        }
    }
}

/// One partitioned Runge–Kutta step.
pub fn prk_step<F, G>(
    tableau: &PrkTableau,
    f: F,
    g: G,
    x0: &[f64],
    y0: &[f64],
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&[f64]) -> Vec<f64>,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let s = tableau.stages();
    let order = tableau.schedule()?;
    let mut k: Vec<Vec<f64>> = vec![vec![]; s];
    let mut l: Vec<Vec<f64>> = vec![vec![]; s];
    for (is_y, i) in order {
        if is_y {
            let mut yi = y0.to_vec();
            for (j, a) in tableau.a2[i].iter().enumerate() {
                if *a != 0.0 {
                    for (v, lj) in yi.iter_mut().zip(&l[j]) {
                        *v += h * a * lj;
                    }
                }
            }
            k[i] = f(&yi);
        } else {
            let mut xi = x0.to_vec();
            for (j, a) in tableau.a1[i].iter().enumerate() {
                if *a != 0.0 {
                    for (v, kj) in xi.iter_mut().zip(&k[j]) {
                        *v += h * a * kj;
                    }
                }
            }
            l[i] = g(&xi);
        }
    }
    let combine = |z0: &[f64], b: &[f64], st: &[Vec<f64>]| -> Vec<f64> {
        let mut z = z0.to_vec();
        for (bi, si) in b.iter().zip(st) {
            if *bi != 0.0 {
                for (v, d) in z.iter_mut().zip(si) {
                    *v += h * bi * d;
                }
            }
        }
        z
    };
    Ok((combine(x0, &tableau.b1, &k), combine(y0, &tableau.b2, &l)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_step_is_identity() {
        let tab = PrkTableau::stormer_verlet();
        let (x, y) = prk_step(&tab, |y| y.to_vec(), |x| vec![-x[0]], &[0.3], &[0.7], 0.0).unwrap();
        assert_eq!((x, y), (vec![0.3], vec![0.7]));
    }

    #[test]
    fn cyclic_tableau_is_rejected() {
        let tab = PrkTableau::new(
            vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            vec![0.5, 0.5],
            vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!(matches!(
            prk_step(&tab, |y| y.to_vec(), |x| x.to_vec(), &[1.0], &[1.0], 0.1),
            Err(Error::ImplicitTableau)
        ));
    }

    #[test]
    fn inconsistent_weights_are_rejected() {
        assert!(PrkTableau::new(vec![vec![0.0]], vec![0.9], vec![vec![0.0]], vec![1.0]).is_err());
        assert!(PrkTableau::new(vec![], vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn extended_tableau_weights_are_consistent() {
        for (a, b) in [(1.0, 1.0), (0.0, 1.0), (0.3, 0.8)] {
            let t = PrkTableau::extended_mixed(a, b);
            assert!((t.b1.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!(t.schedule().is_ok());
        }
    }
}
