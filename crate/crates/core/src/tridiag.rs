//! Tridiagonal solvers.

/// LDLᵀ factorisation of a symmetric positive definite tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct SpdTridiag {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl SpdTridiag {
    /// `diag` has length m, `off` length m - 1.
    pub fn factor(diag: &[f64], off: &[f64]) -> Self {
        let m = diag.len();
        assert_eq!(off.len() + 1, m.max(1));
        let mut d = vec![0.0; m];
        let mut l = vec![0.0; m.saturating_sub(1)];
        if m == 0 {
            return Self { d, l };
        }
        d[0] = diag[0];
        for i in 1..m {
            l[i - 1] = off[i - 1] / d[i - 1];
            d[i] = diag[i] - l[i - 1] * off[i - 1];
        }
        Self { d, l }
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let m = self.d.len();
        for i in 1..m {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..m.saturating_sub(1)).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
    }
}

/// Solves a general tridiagonal system with partial pivoting.
/// `lower[i]` couples row i+1 to column i, `upper[i]` row i to column i+1.
/// Returns `None` when the matrix is numerically singular.
pub fn solve_general(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let m = diag.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let mut dl = lower.to_vec();
    let mut d = diag.to_vec();
    let mut du = upper.to_vec();
    let mut du2 = vec![0.0; m.saturating_sub(2)];
    let mut b = rhs.to_vec();
    let scale = diag.iter().chain(lower).chain(upper).fold(0.0f64, |a, &v| a.max(v.abs()));
    let tiny = scale * 1e-300;

    for i in 0..m - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i].abs() <= tiny {
                return None;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = 0.0;
        } else {
            // swap rows i and i+1
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if i + 1 < m - 1 {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        }
    }
    if d[m - 1].abs() <= tiny {
        return None;
    }
    let mut x = b;
    x[m - 1] /= d[m - 1];
    if m > 1 {
        x[m - 2] = (x[m - 2] - du[m - 2] * x[m - 1]) / d[m - 2];
    }
    for i in (0..m.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let m = diag.len();
        (0..m)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += lower[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    v += upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    #[test]
    fn spd_solve_matches_matvec() {
        let m = 50;
        let diag: Vec<f64> = (0..m).map(|i| 2.0 + 0.01 * i as f64).collect();
        let off = vec![-1.0; m - 1];
        let x: Vec<f64> = (0..m).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = matvec(&off, &diag, &off, &x);
        let mut y = b.clone();
        SpdTridiag::factor(&diag, &off).solve_in_place(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn general_solve_handles_indefinite_and_pivoting() {
        let m = 40;
        let lower: Vec<f64> = (0..m - 1).map(|i| 1.0 + (i % 3) as f64).collect();
        let upper: Vec<f64> = (0..m - 1).map(|i| -0.5 + (i % 5) as f64 * 0.2).collect();
        let mut diag: Vec<f64> = (0..m).map(|i| (i as f64 * 0.7).cos()).collect();
        diag[0] = 0.0;
        let x: Vec<f64> = (0..m).map(|i| 1.0 + i as f64).collect();
        let b = matvec(&lower, &diag, &upper, &x);
        let y = solve_general(&lower, &diag, &upper, &b).unwrap();
        // backward stable: the residual is at rounding level
        let r = matvec(&lower, &diag, &upper, &y);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-12 * 40.0, "{ri} vs {bi}");
        }
        assert!(solve_general(&[0.0], &[0.0, 1.0], &[0.0], &[1.0, 1.0]).is_none());
    }
}
