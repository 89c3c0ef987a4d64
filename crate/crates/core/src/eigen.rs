//! Eigenvalues of small dense real matrices: balancing, Hessenberg reduction,
//! then Francis double-shift QR with exceptional shifts.

use nalgebra::linalg::{balancing, Hessenberg};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Iterations allowed per eigenvalue before giving up.
const MAX_ITERATIONS: usize = 60;

/// Returns `None` if the QR iteration fails to deflate.
#[allow(clippy::needless_range_loop)]
pub(crate) fn eigenvalues(m: &DMatrix<f64>) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut balanced = m.clone();
    balancing::balance_parlett_reinsch(&mut balanced);
    let h = Hessenberg::new(balanced).unpack_h();

    // 1-based copy so the sweep below reads like the textbook recurrence.
    let mut a = vec![vec![0.0f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = h[(i, j)];
        }
    }
    for (i, row) in a.iter_mut().enumerate().skip(3) {
        for v in row.iter_mut().take(i - 1).skip(1) {
            *v = 0.0;
        }
    }

    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a[i][j].abs();
        }
    }

    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            // look for a negligible subdiagonal element
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                let mut y = a[nn - 1][nn - 1];
                let mut w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its == MAX_ITERATIONS {
                        return None;
                    }
                    if its > 0 && its % 10 == 0 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;

                    // two consecutive small subdiagonal elements
                    let mut m = nn - 2;
                    let (mut p, mut q, mut r);
                    let mut z;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }

                    // double QR step on rows l..nn, columns m..nn
                    for k in m..nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = if k != nn - 1 { a[k + 2][k - 1] } else { 0.0 };
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s == 0.0 {
                            continue;
                        }
                        if k == m {
                            if l != m {
                                a[k][k - 1] = -a[k][k - 1];
                            }
                        } else {
                            a[k][k - 1] = -s * x;
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for j in k..=nn {
                            let mut pp = a[k][j] + q * a[k + 1][j];
                            if k != nn - 1 {
                                pp += r * a[k + 2][j];
                                a[k + 2][j] -= pp * z;
                            }
                            a[k + 1][j] -= pp * y;
                            a[k][j] -= pp * x;
                        }
                        let mmin = nn.min(k + 3);
                        for row in a.iter_mut().take(mmin + 1).skip(l) {
                            let mut pp = x * row[k] + y * row[k + 1];
                            if k != nn - 1 {
                                pp += z * row[k + 2];
                                row[k + 2] -= pp * r;
                            }
                            row[k + 1] -= pp * q;
                            row[k] -= pp;
                        }
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }

    let out: Vec<Complex64> = (1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        v
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m = DMatrix::from_row_slice(3, 3, &[6.0, -11.0, 6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let ev = sorted(eigenvalues(&m).unwrap());
        for (z, want) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z.re - want).abs() < 1e-10 && z.im == 0.0, "{ev:?}");
        }
    }

    #[test]
    fn rotation_block() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, -2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 5.0]);
        let ev = sorted(eigenvalues(&m).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!((ev[2] - Complex64::new(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn permutation_cycle_needs_exceptional_shift() {
        // cyclic shift: eigenvalues are the 4th roots of unity; a plain
        // Francis iteration stalls on it
        let mut m = DMatrix::zeros(4, 4);
        for i in 0..4 {
            m[((i + 1) % 4, i)] = 1.0;
        }
        let ev = eigenvalues(&m).unwrap();
        for want in [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ] {
            assert!(ev.iter().any(|z| (z - want).norm() < 1e-10), "{ev:?}");
        }
    }

    #[test]
    fn single_and_empty() {
        assert_eq!(eigenvalues(&DMatrix::zeros(0, 0)).unwrap(), vec![]);
        let ev = eigenvalues(&DMatrix::from_element(1, 1, -3.5)).unwrap();
        assert_eq!(ev, vec![Complex64::new(-3.5, 0.0)]);
    }
}
