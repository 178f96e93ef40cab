//! Small dense determinants, in native and in scaled arithmetic.

use num_complex::Complex64;

use crate::scaledarith::ScaledComplex;

/// Determinant of a row-major `n x n` matrix by LU with partial pivoting; `det` of `0 x 0` is 1.
pub fn det(mut a: Vec<Complex64>, n: usize) -> Complex64 {
    assert_eq!(a.len(), n * n);
    let mut d = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .unwrap();
        if a[piv * n + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            d = -d;
        }
        let p = a[col * n + col];
        d *= p;
        for i in col + 1..n {
            let factor = a[i * n + col] / p;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let v = a[col * n + k];
                a[i * n + k] -= factor * v;
            }
        }
    }
    d
}

/// Determinant of a matrix of scaled entries.
///
/// The largest exponent is factored out of every row and then every column, after which
/// the entries fit in native arithmetic (the smallest ones may underflow harmlessly).
pub fn det_scaled(rows: &[Vec<ScaledComplex>]) -> ScaledComplex {
    let n = rows.len();
    if n == 0 {
        return ScaledComplex::ONE;
    }
    let mut row_shift = vec![f64::NEG_INFINITY; n];
    let mut col_shift = vec![f64::NEG_INFINITY; n];
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n);
        for v in row {
            if !v.is_zero() {
                row_shift[i] = row_shift[i].max(v.exponent);
            }
        }
        if row_shift[i] == f64::NEG_INFINITY {
            return ScaledComplex::ZERO;
        }
    }
    for j in 0..n {
        for i in 0..n {
            let v = rows[i][j];
            if !v.is_zero() {
                col_shift[j] = col_shift[j].max(v.exponent - row_shift[i]);
            }
        }
        if col_shift[j] == f64::NEG_INFINITY {
            return ScaledComplex::ZERO;
        }
    }
    let mut a = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = rows[i][j];
            a.push(v.mantissa * (v.exponent - row_shift[i] - col_shift[j]).exp());
        }
    }
    let shift: f64 = row_shift.iter().sum::<f64>() + col_shift.iter().sum::<f64>();
    ScaledComplex::new(det(a, n), shift)
}
