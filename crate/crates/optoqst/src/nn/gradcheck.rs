//! Central finite-difference validation of the backpropagated gradients.

use ndarray::Array2;

use super::train::{gradients, mse};
use super::Network;
use crate::error::Result;

const STEP: f64 = 1e-5;
const REL_FLOOR: f64 = 1e-8;

/// Outcome of one gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub params_checked: usize,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

impl std::fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "gradient check: {} ({} params, max relative error {:.3e}, tolerance {:.1e})",
            if self.passed() { "pass" } else { "FAIL" },
            self.params_checked,
            self.max_rel_error,
            self.tolerance
        )
    }
}

/// Compares analytic gradients against central finite differences
/// (h = 1e-5) on a single sample.
///
/// The sample should sit at a differentiable point: nudge inputs away from
/// the Leaky-ReLU kink, and keep EIT pre-activations clear of zero so the
/// ±h probes stay in the activation's domain.
pub fn numerical_gradient_check(
    net: &Network<f64>,
    input: &[f64],
    target: &[f64],
    tolerance: f64,
) -> Result<GradCheckReport> {
    let x = Array2::from_shape_vec((1, input.len()), input.to_vec())
        .expect("row vector construction");
    let y = Array2::from_shape_vec((1, target.len()), target.to_vec())
        .expect("row vector construction");

    let (analytic, _) = gradients(net, &x, &y)?;

    let mut work = net.clone();
    let mut max_rel: f64 = 0.0;
    let mut checked = 0usize;

    for l in 0..net.layers().len() {
        let (rows, cols) = net.layers()[l].weights().dim();
        for r in 0..rows {
            for c in 0..cols {
                let numeric = {
                    let orig = work.layers()[l].weights()[(r, c)];
                    work.layers_mut()[l].weights[(r, c)] = orig + STEP;
                    let lp = loss_of(&work, &x, &y)?;
                    work.layers_mut()[l].weights[(r, c)] = orig - STEP;
                    let lm = loss_of(&work, &x, &y)?;
                    work.layers_mut()[l].weights[(r, c)] = orig;
                    (lp - lm) / (2.0 * STEP)
                };
                max_rel = max_rel.max(rel_error(analytic[l].dw[(r, c)], numeric));
                checked += 1;
            }
            let numeric = {
                let orig = work.layers()[l].bias()[r];
                work.layers_mut()[l].bias[r] = orig + STEP;
                let lp = loss_of(&work, &x, &y)?;
                work.layers_mut()[l].bias[r] = orig - STEP;
                let lm = loss_of(&work, &x, &y)?;
                work.layers_mut()[l].bias[r] = orig;
                (lp - lm) / (2.0 * STEP)
            };
            max_rel = max_rel.max(rel_error(analytic[l].db[r], numeric));
            checked += 1;
        }
    }

    Ok(GradCheckReport {
        max_rel_error: max_rel,
        tolerance,
        params_checked: checked,
    })
}

fn loss_of(net: &Network<f64>, x: &Array2<f64>, y: &Array2<f64>) -> Result<f64> {
    Ok(mse(&net.forward_batch(x)?, y))
}

fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}
