//! The unified alignment objective and its gradient.
//!
//! For an alignment X (base rows, target columns) the objective is
//!
//! ```text
//!   ||X A_T X' - A_B||_F^2            structural fit
//! + l1 * ||(J - X) d_T||_2            depth pull toward deep targets
//! + l2 * ||max(0, H_B - X H_T)||_F^2  embedding order consistency
//! + l3 * ||I - X X'||_F               row orthonormality (one-to-one)
//! ```
//!
//! with J all ones. The orthogonality identity is sized on the base side so
//! the term vanishes exactly at any full injective alignment, including
//! rectangular ones. Norm subgradients at zero and rectifier ties use the
//! zero convention.

use crate::linalg::{dot, l2_norm, Mat};

use super::InferError;

/// Form switches used by ablations; the default is the penalized objective
/// as stated above.
#[derive(Debug, Clone, Copy, Default)]
pub struct ObjectiveOptions {
    /// Replace the depth penalty `l1 * ||(J - X) d_T||` by the raw reward
    /// `-l1 * ||X d_T||^2`.
    pub depth_reward_raw: bool,
}

pub(super) struct Parts {
    pub structural: f64,
    pub depth: f64,
    pub order: f64,
    pub orthogonality: f64,
}

fn check_shapes(
    x: &Mat,
    a_t: &Mat,
    a_b: &Mat,
    h_t: &Mat,
    h_b: &Mat,
    d_t: &[f64],
) -> Result<(), InferError> {
    let (nb, nt) = x.shape();
    let ok = a_t.shape() == (nt, nt)
        && a_b.shape() == (nb, nb)
        && h_t.rows() == nt
        && h_b.rows() == nb
        && h_t.cols() == h_b.cols()
        && d_t.len() == nt;
    if ok {
        Ok(())
    } else {
        Err(InferError::Shape(format!(
            "X is {nb}x{nt}, A_T {:?}, A_B {:?}, H_T {:?}, H_B {:?}, d_T {}",
            a_t.shape(),
            a_b.shape(),
            h_t.shape(),
            h_b.shape(),
            d_t.len()
        )))
    }
}

pub(super) fn objective_parts(
    x: &Mat,
    a_t: &Mat,
    a_b: &Mat,
    h_t: &Mat,
    h_b: &Mat,
    d_t: &[f64],
    opts: ObjectiveOptions,
) -> Parts {
    // Structural: ||X A_T X' - A_B||_F^2
    let residual = x.matmul(a_t).matmul_tb(x).sub(a_b);
    let structural = residual.frob2();

    // Depth term over the selected target depths per base row.
    let xd = x.matvec(d_t);
    let depth = if opts.depth_reward_raw {
        -dot(&xd, &xd)
    } else {
        let total: f64 = d_t.iter().sum();
        let r: Vec<f64> = xd.iter().map(|&v| total - v).collect();
        l2_norm(&r)
    };

    // Order term: ||max(0, H_B - X H_T)||_F^2
    let violation = h_b.sub(&x.matmul(h_t)).relu();
    let order = violation.frob2();

    // Orthogonality: ||I - X X'||_F
    let mut q = x.matmul_tb(x);
    for i in 0..q.rows() {
        let v = q.get(i, i);
        q.set(i, i, 1.0 - v);
        for j in 0..q.cols() {
            if j != i {
                q.set(i, j, -q.get(i, j));
            }
        }
    }
    let orthogonality = q.frob2().sqrt();

    Parts {
        structural,
        depth,
        order,
        orthogonality,
    }
}

/// Objective value with the default penalized form.
#[allow(clippy::too_many_arguments)]
pub fn objective(
    x: &Mat,
    a_t: &Mat,
    a_b: &Mat,
    h_t: &Mat,
    h_b: &Mat,
    d_t: &[f64],
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
) -> Result<f64, InferError> {
    objective_with_options(
        x,
        a_t,
        a_b,
        h_t,
        h_b,
        d_t,
        lambda1,
        lambda2,
        lambda3,
        ObjectiveOptions::default(),
    )
}

#[allow(clippy::too_many_arguments)]
pub fn objective_with_options(
    x: &Mat,
    a_t: &Mat,
    a_b: &Mat,
    h_t: &Mat,
    h_b: &Mat,
    d_t: &[f64],
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
    opts: ObjectiveOptions,
) -> Result<f64, InferError> {
    check_shapes(x, a_t, a_b, h_t, h_b, d_t)?;
    let parts = objective_parts(x, a_t, a_b, h_t, h_b, d_t, opts);
    Ok(parts.structural
        + lambda1 * parts.depth
        + lambda2 * parts.order
        + lambda3 * parts.orthogonality)
}

/// Gradient of the objective with respect to X, same options and shape
/// contract as [`objective_with_options`].
#[allow(clippy::too_many_arguments)]
pub fn objective_grad(
    x: &Mat,
    a_t: &Mat,
    a_b: &Mat,
    h_t: &Mat,
    h_b: &Mat,
    d_t: &[f64],
    lambda1: f64,
    lambda2: f64,
    lambda3: f64,
    opts: ObjectiveOptions,
) -> Result<Mat, InferError> {
    check_shapes(x, a_t, a_b, h_t, h_b, d_t)?;
    let (nb, nt) = x.shape();
    let mut grad = Mat::zeros(nb, nt);

    // d/dX ||X A_T X' - A_B||_F^2 = 2 (R X A_T' + R' X A_T)
    let residual = x.matmul(a_t).matmul_tb(x).sub(a_b);
    grad.add_scaled(&residual.matmul(x).matmul(&a_t.transpose()), 2.0);
    grad.add_scaled(&residual.matmul_ta(x).matmul(a_t), 2.0);

    if lambda1 > 0.0 {
        let xd = x.matvec(d_t);
        if opts.depth_reward_raw {
            // d/dX (-||X d||^2) = -2 (X d) d'
            for (i, &xdi) in xd.iter().enumerate() {
                let row = grad.row_mut(i);
                for (g, &dj) in row.iter_mut().zip(d_t) {
                    *g += lambda1 * (-2.0 * xdi * dj);
                }
            }
        } else {
            // d/dX ||r||_2 with r = (J - X) d is -(r / ||r||) d'.
            let total: f64 = d_t.iter().sum();
            let r: Vec<f64> = xd.iter().map(|&v| total - v).collect();
            let norm = l2_norm(&r);
            if norm > 0.0 {
                for (i, &ri) in r.iter().enumerate() {
                    let coeff = -lambda1 * ri / norm;
                    let row = grad.row_mut(i);
                    for (g, &dj) in row.iter_mut().zip(d_t) {
                        *g += coeff * dj;
                    }
                }
            }
        }
    }

    if lambda2 > 0.0 {
        // d/dX ||max(0, H_B - X H_T)||_F^2 = -2 M H_T'
        let violation = h_b.sub(&x.matmul(h_t)).relu();
        grad.add_scaled(&violation.matmul_tb(h_t), -2.0 * lambda2);
    }

    if lambda3 > 0.0 {
        // Q = I - X X'; d/dX ||Q||_F = -2 Q X / ||Q||_F
        let mut q = x.matmul_tb(x);
        q.scale(-1.0);
        for i in 0..nb {
            let v = q.get(i, i);
            q.set(i, i, v + 1.0);
        }
        let norm = q.frob2().sqrt();
        if norm > 0.0 {
            grad.add_scaled(&q.matmul(x), -2.0 * lambda3 / norm);
        }
    }

    Ok(grad)
}
