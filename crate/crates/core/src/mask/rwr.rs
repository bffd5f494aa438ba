//! Restart random walks on the normalized adjacency.
//!
//! A walker starts at a center node, follows `Ã` with probability `q` per
//! step, and restarts at the center with probability `1 - q`. The stationary
//! vector has the closed form `ω = (1 - q)(I - qÃ)^{-1} e_center`, which the
//! iterative fixed-point recurrence converges to.

use crate::error::{CdmError, Result};
use crate::matrix::Matrix;

fn check_q(q: f64) -> Result<()> {
    if !(0.0 < q && q < 1.0) {
        return Err(CdmError::Contract(format!(
            "restart parameter q must lie in (0,1), got {q}"
        )));
    }
    Ok(())
}

/// Stationary restart-walk vectors for every center node of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkWeights {
    omega: Matrix,
    q: f64,
}

impl WalkWeights {
    /// Solve the closed form for all centers with a single LU factorization.
    pub fn compute(a_tilde: &Matrix, q: f64) -> Result<Self> {
        check_q(q)?;
        let n = a_tilde.rows();
        let system = Matrix::from_fn(n, n, |i, j| {
            f64::from(i == j) - q * a_tilde.get(i, j)
        });
        let factor = system.lu_factor()?;
        let mut omega = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for center in 0..n {
            e[center] = 1.0;
            let x = factor.solve(&e);
            e[center] = 0.0;
            for (p, &v) in x.iter().enumerate() {
                omega.set(center, p, (1.0 - q) * v);
            }
        }
        Ok(WalkWeights { omega, q })
    }

    /// Row `i` is the stationary vector for center `i`.
    pub fn omega(&self) -> &Matrix {
        &self.omega
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Closed-form stationary vector for one center:
/// `ω = (1 - q)(I - qÃ)^{-1} e_center`.
pub fn rwr_closed_form(a_tilde: &Matrix, q: f64, center: usize) -> Result<Vec<f64>> {
    check_q(q)?;
    let n = a_tilde.rows();
    let system = Matrix::from_fn(n, n, |i, j| f64::from(i == j) - q * a_tilde.get(i, j));
    let factor = system.lu_factor()?;
    let mut e = vec![0.0; n];
    e[center] = 1.0;
    let mut x = factor.solve(&e);
    for v in &mut x {
        *v *= 1.0 - q;
    }
    Ok(x)
}

/// Compatibility variant that leaves the walk term unscaled inside the
/// resolvent: `ω = (1 - q)(I - Ã)^{-1} e_center`.
///
/// `Ã` has a unit eigenvalue on any graph whose nodes all carry at least one
/// edge, which makes this system singular; the error is surfaced rather than
/// papered over. The scaled form above is the fixed point of the recurrence
/// and the default everywhere.
pub fn rwr_closed_form_unscaled_walk(a_tilde: &Matrix, q: f64, center: usize) -> Result<Vec<f64>> {
    check_q(q)?;
    let n = a_tilde.rows();
    let system = Matrix::from_fn(n, n, |i, j| f64::from(i == j) - a_tilde.get(i, j));
    let factor = system.lu_factor()?;
    let mut e = vec![0.0; n];
    e[center] = 1.0;
    let mut x = factor.solve(&e);
    for v in &mut x {
        *v *= 1.0 - q;
    }
    Ok(x)
}

/// Fixed-point iteration `ω ← qÃω + (1-q)e_center` from `ω = e_center`.
///
/// Returns the vector and the number of iterations used; errors if the
/// sup-norm update still exceeds `tol` after `t_max` iterations.
pub fn rwr_iterative(
    a_tilde: &Matrix,
    q: f64,
    center: usize,
    t_max: usize,
    tol: f64,
) -> Result<(Vec<f64>, usize)> {
    check_q(q)?;
    let n = a_tilde.rows();
    let mut omega = vec![0.0; n];
    omega[center] = 1.0;
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iter in 1..=t_max {
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..n {
                acc += a_tilde.get(i, j) * omega[j];
            }
            *slot = q * acc + if i == center { 1.0 - q } else { 0.0 };
        }
        residual = omega
            .iter()
            .zip(&next)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        std::mem::swap(&mut omega, &mut next);
        if residual < tol {
            return Ok((omega, iter));
        }
    }
    Err(CdmError::Convergence {
        max_iters: t_max,
        residual,
    })
}
