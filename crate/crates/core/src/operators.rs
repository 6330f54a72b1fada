//! Matrix-free kernels for `C_t`, `D_phi`, `S` and `R_t`, dense sections and conjugates.

use num_traits::{FromPrimitive, Num};

use crate::error::{CeslabError, Result};
use crate::numeric::{Rational, Real, Verdict};
use crate::spaces::{conjugation, IsometryKind, SpaceSpec};

/// Largest section handled by dense kernels.
pub const DENSE_MAX: usize = 2048;

pub fn validate_t<T: Real>(t: &T) -> Result<()> {
    if *t < T::zero() || *t > T::one() {
        return Err(CeslabError::ParameterOutOfRange(format!("t must lie in [0,1], got {}", t.to_f64())));
    }
    Ok(())
}

/// First `N` coordinates of `C_t x`, by `S_n = t S_{n-1} + x_n`.
pub fn apply_cesaro<T: Real>(t: &T, x: &[T]) -> Vec<T> {
    let mut s = T::zero();
    x.iter()
        .enumerate()
        .map(|(n, v)| {
            s = t.clone() * s.clone() + v.clone();
            s.clone() / T::from_usize(n + 1)
        })
        .collect()
}

/// Transpose of the `N x N` section applied to `z`: `U_k = z_k/(k+1) + t U_{k+1}`.
pub fn apply_cesaro_transpose<T: Real>(t: &T, z: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); z.len()];
    let mut u = T::zero();
    for k in (0..z.len()).rev() {
        u = z[k].clone() / T::from_usize(k + 1) + t.clone() * u;
        out[k] = u.clone();
    }
    out
}

/// `D_phi x = (x_n/(n+1))`.
pub fn d_phi<T: Real>(x: &[T]) -> Vec<T> {
    x.iter().enumerate().map(|(n, v)| v.clone() / T::from_usize(n + 1)).collect()
}

/// `S^m x` truncated to the length of `x`.
pub fn shift<T: Real>(m: usize, x: &[T]) -> Vec<T> {
    (0..x.len()).map(|n| if n < m { T::zero() } else { x[n - m].clone() }).collect()
}

/// `sum_{m <= M} t^m S^m x` on the first `N` coordinates.
pub fn apply_rt<T: Real>(t: &T, m_max: usize, x: &[T]) -> Vec<T> {
    if m_max + 1 >= x.len() {
        let mut y = T::zero();
        return x
            .iter()
            .map(|v| {
                y = t.clone() * y.clone() + v.clone();
                y.clone()
            })
            .collect();
    }
    let mut out = vec![T::zero(); x.len()];
    let mut tm = T::one();
    for m in 0..=m_max {
        for n in m..x.len() {
            out[n] = out[n].clone() + tm.clone() * x[n - m].clone();
        }
        tm = tm * t.clone();
    }
    out
}

/// Dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds the matrix column by column.
    pub fn from_columns(n: usize, mut col: impl FnMut(usize) -> Result<Vec<T>>) -> Result<Self> {
        let mut m = Self::zeros(n);
        for j in 0..n {
            let c = col(j)?;
            for i in 0..n {
                m.data[i * n + j] = c[i].clone();
            }
        }
        Ok(m)
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                row.iter().zip(x).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn transpose_matvec(&self, z: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for i in 0..self.n {
            for (j, o) in out.iter_mut().enumerate() {
                *o = o.clone() + self.get(i, j).clone() * z[i].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k).clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = out.data[i * n + j].clone() + a.clone() * other.get(k, j).clone();
                    out.data[i * n + j] = v;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix<T>) -> Matrix<T> {
        Matrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect() }
    }

    pub fn scale(&self, s: &T) -> Matrix<T> {
        Matrix { n: self.n, data: self.data.iter().map(|a| a.clone() * s.clone()).collect() }
    }

    pub fn column_abs_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for i in 0..self.n {
            for (j, o) in out.iter_mut().enumerate() {
                *o = o.clone() + self.get(i, j).abs();
            }
        }
        out
    }

    pub fn row_abs_sums(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().fold(T::zero(), |a, v| a + v.abs()))
            .collect()
    }

    /// Induced `l^1` norm of the section.
    pub fn norm_1(&self) -> T {
        self.column_abs_sums().into_iter().fold(T::zero(), T::max_of)
    }

    /// Induced `l^inf` norm of the section.
    pub fn norm_inf(&self) -> T {
        self.row_abs_sums().into_iter().fold(T::zero(), T::max_of)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j).is_zero()))
    }
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_MAX {
        return Err(CeslabError::DenseTooLarge { n, max: DENSE_MAX });
    }
    Ok(())
}

/// Dense `N x N` section with `a_{n,k} = t^{n-k}/(n+1)`.
pub fn cesaro_matrix<T: Real>(t: &T, n: usize) -> Result<Matrix<T>> {
    check_dense(n)?;
    validate_t(t)?;
    let mut m = Matrix::zeros(n);
    for k in 0..n {
        let mut p = T::one();
        for i in k..n {
            m.set(i, k, p.clone() / T::from_usize(i + 1));
            p = p * t.clone();
        }
    }
    Ok(m)
}

/// Exact check of `D_phi R_t = C_t` on `e_0..e_{N-1}`.
pub fn factorization_check(t: &Rational, n: usize) -> Verdict {
    if let Err(e) = validate_t(t) {
        return Verdict::inconclusive(e.to_string());
    }
    for k in 0..n {
        let mut e = vec![<Rational as Real>::from_i64(0); n];
        e[k] = <Rational as Real>::from_i64(1);
        let lhs = d_phi(&apply_rt(t, n, &e));
        let rhs = apply_cesaro(t, &e);
        if lhs != rhs {
            return Verdict::no(format!("D_phi R_t and C_t differ on e_{k}"));
        }
    }
    Verdict::yes(format!("D_phi R_t = C_t exactly on e_0..e_{}", n.saturating_sub(1)))
}

/// `forward o C_t o inverse` on the `N x N` section for the space's isometry.
///
/// All maps except `HahnW` are lower triangular, so the section is exact;
/// `HahnW` uses one extra coordinate of `C_t` to close row `N-1`.
pub fn conjugated_operator<T: Real>(space: &SpaceSpec, t: &T, n: usize) -> Result<Matrix<T>> {
    check_dense(n)?;
    validate_t(t)?;
    let iso = conjugation(space);
    match iso.kind {
        IsometryKind::Identity => cesaro_matrix(t, n),
        IsometryKind::HahnW => Matrix::from_columns(n, |j| {
            let mut y = vec![T::zero(); n];
            y[j] = T::one();
            let mut x = iso.inverse(&y)?;
            x.push(T::zero());
            let cx = apply_cesaro(t, &x);
            let mut img = iso.forward(&cx)?;
            img.truncate(n);
            Ok(img)
        }),
        _ => Matrix::from_columns(n, |j| {
            let mut y = vec![T::zero(); n];
            y[j] = T::one();
            let x = iso.inverse(&y)?;
            let mut img = iso.forward(&apply_cesaro(t, &x))?;
            img.truncate(n);
            Ok(img)
        }),
    }
}

/// The `A - B` form of the `T_p`-conjugate of `D_phi`:
/// `A = diag(1/(n+1))`, `(By)_n = (1/(n(n+1))) sum_{j<n} y_j`.
pub fn bv_conjugate_a_minus_b<T: Real>(n: usize) -> Result<Matrix<T>> {
    check_dense(n)?;
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        m.set(i, i, T::one() / T::from_usize(i + 1));
        if i >= 1 {
            let b = T::one() / T::from_usize(i * (i + 1));
            for j in 0..i {
                m.set(i, j, T::zero() - b.clone());
            }
        }
    }
    Ok(m)
}

/// Solves `(lambda I - C_t) y = r` on the section by forward substitution.
pub fn triangular_solve<F>(lambda: &F, t: &F, rhs: &[F]) -> Result<Vec<F>>
where
    F: Num + Clone + FromPrimitive,
{
    let mut y = Vec::with_capacity(rhs.len());
    let mut s = F::zero();
    for (n, r) in rhs.iter().enumerate() {
        let inv = F::one() / F::from_usize(n + 1).expect("index fits");
        let p = t.clone() * s.clone();
        let denom = lambda.clone() - inv.clone();
        if denom.is_zero() {
            return Err(CeslabError::Singular { index: n });
        }
        let v = (r.clone() + p.clone() * inv) / denom;
        s = p + v.clone();
        y.push(v);
    }
    Ok(y)
}

/// Solves `(lambda I - C_t^T) z = r` on the section by backward substitution.
pub fn adjoint_solve<F>(lambda: &F, t: &F, rhs: &[F]) -> Result<Vec<F>>
where
    F: Num + Clone + FromPrimitive,
{
    let n = rhs.len();
    let mut z = vec![F::zero(); n];
    let mut u = F::zero();
    for k in (0..n).rev() {
        let inv = F::one() / F::from_usize(k + 1).expect("index fits");
        let denom = lambda.clone() - inv.clone();
        if denom.is_zero() {
            return Err(CeslabError::Singular { index: k });
        }
        let tail = t.clone() * u.clone();
        let v = (rhs[k].clone() + tail.clone()) / denom;
        u = v.clone() * inv + tail;
        z[k] = v;
    }
    Ok(z)
}
