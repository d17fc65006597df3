//! Problem interfaces: inseparable Hamiltonians, separable `T(p) + V(q)`
//! splits, and general first-order systems `ẋ = f(x, t)`.

use crate::state::PhaseState;

/// A Hamiltonian `H(q, p)` with analytic gradients.
pub trait HamiltonianSystem: Sync {
    fn dim(&self) -> usize;
    fn value(&self, q: &[f64], p: &[f64]) -> f64;
    fn grad_q(&self, q: &[f64], p: &[f64]) -> Vec<f64>;
    fn grad_p(&self, q: &[f64], p: &[f64]) -> Vec<f64>;
}

/// A separable Hamiltonian given as kinetic `T(p)` and potential `V(q)`.
pub trait SeparableSystem: Sync {
    fn dim(&self) -> usize;
    fn kinetic_grad(&self, p: &[f64]) -> Vec<f64>;
    fn potential_grad(&self, q: &[f64]) -> Vec<f64>;
}

/// Which block of a partitioned state a partial evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// Components `0..k`.
    Lower,
    /// Components `k..n`.
    Upper,
}

/// A general first-order system `ẋ = f(x, t)`.
pub trait FirstOrderSystem: Sync {
    fn dim(&self) -> usize;
    fn field(&self, x: &[f64], t: f64) -> Vec<f64>;

    /// Split point `k` dividing `x` into `(x[..k], x[k..])`, if declared.
    fn partition(&self) -> Option<usize> {
        None
    }

    /// Evaluates only one block of the right-hand side.
    fn field_block(&self, x: &[f64], t: f64, block: Block) -> Vec<f64> {
        let k = self.partition().unwrap_or(self.dim());
        let full = self.field(x, t);
        match block {
            Block::Lower => full[..k].to_vec(),
            Block::Upper => full[k..].to_vec(),
        }
    }

    /// Counter increments charged for one full `field` call.
    fn evals_per_field(&self) -> u64 {
        1
    }
}

/// Views a Hamiltonian as the first-order system on `z = (q, p)` with
/// `ż = (∇_p H, −∇_q H)`. One field call costs two gradient evaluations.
pub struct HamiltonianField<'a, S: ?Sized> {
    pub sys: &'a S,
}

impl<'a, S: HamiltonianSystem + ?Sized> HamiltonianField<'a, S> {
    pub fn new(sys: &'a S) -> Self {
        Self { sys }
    }
}

impl<S: HamiltonianSystem + ?Sized> FirstOrderSystem for HamiltonianField<'_, S> {
    fn dim(&self) -> usize {
        2 * self.sys.dim()
    }

    fn field(&self, z: &[f64], _t: f64) -> Vec<f64> {
        let n = self.sys.dim();
        let (q, p) = z.split_at(n);
        let mut out = self.sys.grad_p(q, p);
        out.extend(self.sys.grad_q(q, p).into_iter().map(|g| -g));
        out
    }

    fn partition(&self) -> Option<usize> {
        Some(self.sys.dim())
    }

    fn evals_per_field(&self) -> u64 {
        2
    }
}

/// Checks analytic gradients against central differences.
///
/// The difference step for coordinate `x_i` is `ε^{1/3}·max(1, |x_i|)`.
/// A component passes when `|analytic − fd| ≤ rel_tol·max(|analytic|, |fd|, g)`
/// with `g` the largest gradient magnitude at the sample, so components that
/// vanish identically are judged on the gradient's scale.
pub fn check_gradients<S: HamiltonianSystem + ?Sized>(
    sys: &S,
    sample: &PhaseState,
    rel_tol: f64,
) -> bool {
    assert!(rel_tol > 0.0, "rel_tol must be positive");
    let n = sys.dim();
    if sample.q.len() != n || sample.p.len() != n {
        return false;
    }
    let gq = sys.grad_q(&sample.q, &sample.p);
    let gp = sys.grad_p(&sample.q, &sample.p);
    if gq.len() != n || gp.len() != n {
        return false;
    }

    let fd_q = central_differences(|x| sys.value(x, &sample.p), &sample.q);
    let fd_p = central_differences(|x| sys.value(&sample.q, x), &sample.p);

    let scale = gq
        .iter()
        .chain(&gp)
        .fold(0.0_f64, |m, g| m.max(g.abs()));
    gq.iter()
        .zip(&fd_q)
        .chain(gp.iter().zip(&fd_p))
        .all(|(&a, &fd)| {
            let bound = rel_tol * a.abs().max(fd.abs()).max(scale);
            a.is_finite() && (a - fd).abs() <= bound
        })
}

fn central_differences(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let step0 = f64::EPSILON.cbrt();
    let mut work = x.to_vec();
    (0..x.len())
        .map(|i| {
            let step = step0 * x[i].abs().max(1.0);
            work[i] = x[i] + step;
            let up = f(&work);
            work[i] = x[i] - step;
            let down = f(&work);
            work[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;

    impl HamiltonianSystem for Oscillator {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, q: &[f64], p: &[f64]) -> f64 {
            0.5 * (p[0] * p[0] + q[0] * q[0])
        }
        fn grad_q(&self, q: &[f64], _p: &[f64]) -> Vec<f64> {
            vec![q[0]]
        }
        fn grad_p(&self, _q: &[f64], p: &[f64]) -> Vec<f64> {
            vec![p[0]]
        }
    }

    struct Corrupted;

    impl HamiltonianSystem for Corrupted {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, q: &[f64], p: &[f64]) -> f64 {
            Oscillator.value(q, p)
        }
        fn grad_q(&self, q: &[f64], _p: &[f64]) -> Vec<f64> {
            vec![q[0] + 0.1]
        }
        fn grad_p(&self, _q: &[f64], p: &[f64]) -> Vec<f64> {
            vec![p[0]]
        }
    }

    #[test]
    fn linear_gradients_pass() {
        let s = PhaseState::new(vec![1.0], vec![1.0], 0.0).unwrap();
        assert!(check_gradients(&Oscillator, &s, 1e-6));
    }

    #[test]
    fn corrupted_gradient_fails() {
        let s = PhaseState::new(vec![1.0], vec![1.0], 0.0).unwrap();
        assert!(!check_gradients(&Corrupted, &s, 1e-6));
    }

    #[test]
    fn hamiltonian_field_layout() {
        let f = HamiltonianField::new(&Oscillator);
        assert_eq!(f.dim(), 2);
        assert_eq!(f.field(&[2.0, 3.0], 0.0), vec![3.0, -2.0]);
        assert_eq!(f.field_block(&[2.0, 3.0], 0.0, Block::Upper), vec![-2.0]);
        assert_eq!(f.evals_per_field(), 2);
    }
}
