//! Banded LU factorization with partial pivoting, applied after a symmetric
//! bandwidth-reducing permutation.

use super::ordering::{bandwidth, reverse_cuthill_mckee};
use super::sparse::CsrMatrix;
use crate::scalar::Real;

/// Factorization of `P A Pᵀ` where `P` is the ordering permutation. Row
/// interchanges from pivoting are kept separately in `pivots`.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    lower: usize,
    /// Upper bandwidth of `U`, i.e. the original upper bandwidth plus `lower`.
    upper: usize,
    /// Column-major band storage, `ldab = lower + upper + 1` per column.
    ab: Vec<T>,
    pivots: Vec<usize>,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    zero_pivot: Option<usize>,
    max_u: T,
}

impl<T: Real> BandLu<T> {
    /// Orders with reverse Cuthill–McKee, then factors.
    pub fn factor(a: &CsrMatrix<T>) -> Self {
        assert_eq!(a.nrows(), a.ncols(), "square matrix required");
        let adjacency = a.symmetric_adjacency();
        let perm = reverse_cuthill_mckee(&adjacency);
        let bw = bandwidth(&adjacency, &perm);
        Self::factor_permuted(a, perm, bw)
    }

    fn factor_permuted(a: &CsrMatrix<T>, perm: Vec<usize>, bw: usize) -> Self {
        let n = a.nrows();
        let lower = bw;
        let kv = 2 * bw;
        let ldab = kv + lower + 1;
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut ab = vec![T::zero(); ldab * n];
        for old_i in 0..n {
            let i = inverse[old_i];
            let (cols, vals) = a.row(old_i);
            for (&old_j, &v) in cols.iter().zip(vals) {
                let j = inverse[old_j];
                ab[j * ldab + kv + i - j] += v;
            }
        }

        let mut pivots = vec![0; n];
        let mut zero_pivot = None;
        // Last column touched by row interchanges so far.
        let mut ju = 0usize;
        for j in 0..n {
            let km = lower.min(n - 1 - j);
            let col = j * ldab + kv;
            let mut jp = 0;
            let mut best = T::zero();
            for r in 0..=km {
                let v = ab[col + r].abs();
                if v > best {
                    best = v;
                    jp = r;
                }
            }
            pivots[j] = j + jp;
            if best == T::zero() || !best.is_finite() {
                zero_pivot.get_or_insert(j);
                continue;
            }
            ju = ju.max((j + bw + jp).min(n - 1));
            if jp != 0 {
                for jj in j..=ju {
                    let base = jj * ldab + kv;
                    ab.swap(base + j + jp - jj, base + j - jj);
                }
            }
            if km > 0 {
                let inv_pivot = T::one() / ab[col];
                for r in 1..=km {
                    ab[col + r] *= inv_pivot;
                }
                let (head, tail) = ab.split_at_mut((j + 1) * ldab);
                let multipliers = &head[col + 1..col + 1 + km];
                for jj in j + 1..=ju {
                    let base = (jj - j - 1) * ldab + kv;
                    let u = tail[base + j - jj];
                    if u == T::zero() {
                        continue;
                    }
                    let target = &mut tail[base + j + 1 - jj..base + j + 1 - jj + km];
                    for (t, &l) in target.iter_mut().zip(multipliers) {
                        *t -= l * u;
                    }
                }
            }
        }
        let mut max_u = T::zero();
        for j in 0..n {
            let top = j.saturating_sub(kv);
            for i in top..=j {
                max_u = max_u.max(ab[j * ldab + kv + i - j].abs());
            }
        }
        BandLu { n, lower, upper: kv, ab, pivots, perm, zero_pivot, max_u }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower half-bandwidth of the permuted matrix.
    pub fn bandwidth(&self) -> usize {
        self.lower
    }

    /// First column whose pivot candidates were all zero.
    pub fn zero_pivot(&self) -> Option<usize> {
        self.zero_pivot
    }

    pub fn is_singular(&self) -> bool {
        self.zero_pivot.is_some()
    }

    /// Largest entry of `U`.
    pub fn max_abs_u(&self) -> T {
        self.max_u
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let ldab = self.upper + self.lower + 1;
        let kv = self.upper;
        let mut x: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            let km = self.lower.min(n - 1 - j);
            let p = self.pivots[j];
            if p != j {
                x.swap(j, p);
            }
            let xj = x[j];
            if xj != T::zero() {
                let col = j * ldab + kv;
                for r in 1..=km {
                    x[j + r] -= self.ab[col + r] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = j * ldab + kv;
            x[j] /= self.ab[col];
            let xj = x[j];
            if xj != T::zero() {
                let top = j.saturating_sub(kv);
                for i in top..j {
                    x[i] -= self.ab[col + i - j] * xj;
                }
            }
        }
        let mut out = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &CsrMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x);
        ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn permutation_matrix_needs_pivoting() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        let lu = BandLu::factor(&a);
        assert!(!lu.is_singular());
        assert_eq!(lu.solve(&[1.0, 2.0]), vec![2.0, 1.0]);
    }

    #[test]
    fn nonsymmetric_banded_system() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 1e-3 * (i as f64 + 1.0)));
            if i + 1 < n {
                t.push((i, i + 1, 2.0 + (i % 3) as f64));
                t.push((i + 1, i, -1.0 - (i % 5) as f64));
            }
            if i + 3 < n {
                t.push((i, i + 3, 0.5));
                t.push((i + 3, i, 0.25));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let lu = BandLu::factor(&a);
        let x = lu.solve(&b);
        assert!(residual(&a, &x, &b) < 1e-10);
    }

    #[test]
    fn zero_column_flagged() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 0.0), (2, 2, 1.0), (0, 1, 0.0)]);
        assert!(BandLu::factor(&a).is_singular());
    }

    #[test]
    fn single_precision_solve() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 4.0f32), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0)]);
        let x = BandLu::factor(&a).solve(&[1.0, 2.0, 4.0]);
        assert!((x[2] - 2.0).abs() < 1e-6);
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-5);
    }
}
