//! Stationary distribution of a column-stochastic matrix.

use crate::dist::{Distribution, PROB_SUM_TOL};
use crate::error::{CoreError, Result};

/// Residual target in the infinity norm of `Qp - p`.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-10;

/// Iteration cap for power iteration.
pub const POWER_ITERATION_CAP: usize = 1_000_000;

/// Largest dimension for which the direct linear-solve fallback is attempted.
const DIRECT_SOLVE_MAX_DIM: usize = 64;

/// Finds `p` with `Q p = p`, where column `i` of `Q` is `columns[i]`.
///
/// Power iteration starts from the uniform distribution; for reducible
/// matrices with several fixed points this pins down a deterministic answer
/// (the limit from uniform). If the iteration cap is hit — periodic chains —
/// a direct linear solve is attempted for dimensions up to 64; otherwise a
/// numerical error carrying the residual is returned.
pub fn stationary_distribution(columns: &[Distribution]) -> Result<Distribution> {
    let k = columns.len();
    if k == 0 {
        return Err(CoreError::InvalidParameter("no columns".into()));
    }
    for (i, col) in columns.iter().enumerate() {
        if col.len() != k {
            return Err(CoreError::LengthMismatch {
                expected: k,
                got: columns[i].len(),
            });
        }
    }

    let mut p: Vec<f64> = vec![1.0 / k as f64; k];
    let mut next = vec![0.0f64; k];
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_ITERATION_CAP {
        apply(columns, &p, &mut next);
        residual = p
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut p, &mut next);
        if residual <= FIXED_POINT_RESIDUAL {
            return finish(columns, p);
        }
    }

    if k <= DIRECT_SOLVE_MAX_DIM {
        if let Some(direct) = direct_solve(columns) {
            return finish(columns, direct);
        }
    }
    Err(CoreError::Numerical { residual })
}

fn apply(columns: &[Distribution], p: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (i, col) in columns.iter().enumerate() {
        let pi = p[i];
        for (o, &q) in out.iter_mut().zip(col.probs()) {
            *o += q * pi;
        }
    }
}

/// Validates the residual and normalizes away accumulated round-off.
fn finish(columns: &[Distribution], p: Vec<f64>) -> Result<Distribution> {
    let k = p.len();
    let mut image = vec![0.0f64; k];
    apply(columns, &p, &mut image);
    let residual = p
        .iter()
        .zip(image.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > FIXED_POINT_RESIDUAL {
        return Err(CoreError::Numerical { residual });
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        let renorm: Vec<f64> = p.iter().map(|x| x / sum).collect();
        return Distribution::new(renorm);
    }
    Distribution::new(p)
}

/// Solves `(Q - I) p = 0` with the last equation replaced by `sum(p) = 1`.
fn direct_solve(columns: &[Distribution]) -> Option<Vec<f64>> {
    let k = columns.len();
    let mut a = nalgebra::DMatrix::<f64>::zeros(k, k);
    for (i, col) in columns.iter().enumerate() {
        for (j, &q) in col.probs().iter().enumerate() {
            a[(j, i)] = q;
        }
    }
    for d in 0..k {
        a[(d, d)] -= 1.0;
    }
    for i in 0..k {
        a[(k - 1, i)] = 1.0;
    }
    let mut b = nalgebra::DVector::<f64>::zeros(k);
    b[k - 1] = 1.0;
    let lu = a.lu();
    let x = lu.solve(&b)?;
    let mut p: Vec<f64> = x.iter().cloned().collect();
    // Clamp solver round-off; anything materially negative means the chain
    // had no usable fixed point for this route.
    for v in p.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-9 {
                return None;
            }
            *v = 0.0;
        }
    }
    let sum: f64 = p.iter().sum();
    if sum <= 0.0 {
        return None;
    }
    for v in p.iter_mut() {
        *v /= sum;
    }
    Some(p)
}
