//! Dense symmetric eigensolver (cyclic Jacobi).

use faer::Mat;

/// Eigenvalues in non-increasing order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &Mat<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic-by-row Jacobi iteration. Stops once the off-diagonal Frobenius
/// norm falls below `tol · ‖A‖_F` or a full sweep applies no rotation.
pub fn jacobi_eigen(a: &Mat<f64>, tol: f64) -> SymmetricEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut a = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Mat::<f64>::identity(n, n);
    let frob = a.norm_l2();
    let mut sweeps = 0;
    while sweeps < 100 && off_diagonal_norm(&a) > tol * frob {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 || apq.abs() <= f64::EPSILON * 1e-3 * (a[(p, p)].abs() * a[(q, q)].abs()).sqrt() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |i, k| v[(i, order[k])]);
    SymmetricEigen { values, vectors, sweeps }
}
