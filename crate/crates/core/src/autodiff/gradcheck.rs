//! Central-finite-difference gradient checking, shared by the unit and
//! acceptance test suites. Not used by any production code path.

use crate::autodiff::{Tape, TensorId};
use crate::matrix::Matrix;

/// Default step for central differences.
pub const FD_STEP: f64 = 1e-5;

/// Relative error between an analytic and a finite-difference gradient entry.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-6);
    (analytic - numeric).abs() / denom
}

/// Check the gradients of an arbitrary scalar-valued tape program against
/// central finite differences.
///
/// `build` receives a fresh tape plus leaf ids for each entry of `inputs`
/// (all marked trainable) and must return a 1x1 output tensor. Returns the
/// worst relative error over every entry of every input.
pub fn max_gradient_error(
    inputs: &[Matrix],
    h: f64,
    build: impl Fn(&mut Tape, &[TensorId]) -> TensorId,
) -> f64 {
    let eval = |mats: &[Matrix]| -> f64 {
        let mut tape = Tape::new();
        let ids: Vec<TensorId> = mats.iter().map(|m| tape.leaf(m.clone(), true)).collect();
        let out = build(&mut tape, &ids);
        tape.scalar_value(out)
    };

    // Analytic gradients.
    let mut tape = Tape::new();
    let ids: Vec<TensorId> = inputs.iter().map(|m| tape.leaf(m.clone(), true)).collect();
    let out = build(&mut tape, &ids);
    tape.backward(out).expect("scalar output");
    let analytic: Vec<Matrix> = ids.iter().map(|&id| tape.grad(id).clone()).collect();

    let mut worst: f64 = 0.0;
    let mut work: Vec<Matrix> = inputs.to_vec();
    for (which, input) in inputs.iter().enumerate() {
        for k in 0..input.len() {
            let orig = input.data()[k];
            work[which].data_mut()[k] = orig + h;
            let up = eval(&work);
            work[which].data_mut()[k] = orig - h;
            let down = eval(&work);
            work[which].data_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max(relative_error(analytic[which].data()[k], numeric));
        }
    }
    worst
}
