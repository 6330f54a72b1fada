//! Eigenvectors `x_t^[m]`, dual eigenvectors `z_t^[n]`, the dual recurrence for `C_1'`
//! and membership of eigenvectors in catalog spaces.

use num_complex::Complex64;

use crate::error::{CeslabError, Result};
use crate::numeric::{binomial, sum_with_tail, Enclosure, Minorant, Rational, Real, SeqGenerator, TailCertificate, Verdict};
use crate::operators::{apply_cesaro, apply_cesaro_transpose, validate_t};
use crate::spaces::{membership, Membership, SpaceSpec, Weight};

/// `x_{j+1}/x_j = t(j+1)/(j+1-m)` for `j >= m`.
fn step_ratio<T: Real>(t: &T, m: usize, j: usize) -> T {
    t.clone() * T::from_usize(j + 1) / T::from_usize(j + 1 - m)
}

/// First `N` coordinates of `x_t^[m]`, built by the ratio recurrence.
///
/// `t = 1` gives the family `x_1^[m]` with binomial coordinates.
pub fn eigenvector<T: Real>(t: &T, m: usize, n: usize) -> Result<Vec<T>> {
    validate_t(t)?;
    let mut x = vec![T::zero(); n];
    if m >= n {
        return Ok(x);
    }
    x[m] = T::one();
    for j in m..n - 1 {
        x[j + 1] = x[j].clone() * step_ratio(t, m, j);
    }
    Ok(x)
}

/// Closed form `(x)_{m+k} = binom(m+k, k) t^k`.
pub fn eigenvector_closed_form(t: &Rational, m: usize, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|j| if j < m { Rational::from_usize(0) } else { binomial(j, j - m) * t.powu(j - m) })
        .collect()
}

/// `x_t^[m]` as a sequence generator with a geometric tail certificate (`t < 1`)
/// or a floor minorant (`t = 1`).
pub fn eigenvector_seq(t: f64, m: usize) -> Result<SeqGenerator<f64>> {
    validate_t(&t)?;
    let label = format!("x_{t}^[{m}]");
    if t == 0.0 {
        let mut v = vec![0.0; m + 1];
        v[m] = 1.0;
        return Ok(SeqGenerator::finite(label, v));
    }
    let rule = move |j: usize| {
        if j < m {
            return 0.0;
        }
        let mut v = 1.0;
        for i in m..j {
            v *= step_ratio(&t, m, i);
        }
        v
    };
    let g = SeqGenerator::new(label, rule).nonnegative();
    if t >= 1.0 {
        return Ok(g.with_minorant(Minorant::Floor { start: m, bound: 1.0 }));
    }
    let start = geometric_start(t, m);
    let ratio = step_ratio(&t, m, start) * (1.0 + 4.0 * f64::EPSILON);
    Ok(g.with_certificate(TailCertificate::Geometric { start, ratio })
        .with_certificate(TailCertificate::MonotoneToZero { start }))
}

/// First `j >= m` with `t(j+1)/(j+1-m) <= (1+t)/2`.
fn geometric_start(t: f64, m: usize) -> usize {
    let need = ((1.0 + t) * m as f64 / (1.0 - t)).ceil() as usize;
    let mut j = need.saturating_sub(1).max(m);
    while step_ratio(&t, m, j) > 0.5 * (1.0 + t) {
        j += 1;
    }
    j
}

/// Exact check of `C_t x_t^[m] = x_t^[m]/(m+1)` on `N` coordinates,
/// with the recurrence cross-checked against the closed form for the first 65 terms.
pub fn verify_eigenpair(t: &Rational, m: usize, n: usize) -> Verdict {
    let x = match eigenvector(t, m, n) {
        Ok(x) => x,
        Err(e) => return Verdict::inconclusive(e.to_string()),
    };
    let k = n.min(m + 65);
    if x[..k] != eigenvector_closed_form(t, m, k)[..] {
        return Verdict::no("recurrence disagrees with the product formula");
    }
    let lam = Rational::from_usize(m + 1).recip();
    let cx = apply_cesaro(t, &x);
    match cx.iter().zip(&x).position(|(a, b)| *a != b.clone() * lam.clone()) {
        None => Verdict::yes(format!("C_t x = x/{} exactly on {n} coordinates", m + 1)),
        Some(i) => Verdict::no(format!("eigen equation fails at coordinate {i}")),
    }
}

/// `z_t^[n]`: `(-1)^i binom(n,i) t^i` at position `n-i`, padded to `N`.
pub fn dual_eigenvector(t: &Rational, n: usize, len: usize) -> Vec<Rational> {
    let mut z = vec![Rational::from_usize(0); len.max(n + 1)];
    for i in 0..=n {
        let v = binomial(n, i) * t.powu(i);
        z[n - i] = if i % 2 == 0 { v } else { -v };
    }
    z
}

/// Exact check of `C_t' z_t^[n] = z_t^[n]/(n+1)` on the section.
pub fn verify_dual_eigenpair(t: &Rational, n: usize, len: usize) -> Verdict {
    if len <= n {
        return Verdict::inconclusive(format!("section {len} does not contain the support of z^[{n}]"));
    }
    if let Err(e) = validate_t(t) {
        return Verdict::inconclusive(e.to_string());
    }
    let z = dual_eigenvector(t, n, len);
    let lam = Rational::from_usize(n + 1).recip();
    let az = apply_cesaro_transpose(t, &z);
    match az.iter().zip(&z).position(|(a, b)| *a != b.clone() * lam.clone()) {
        None => Verdict::yes(format!("C_t' z = z/{} exactly", n + 1)),
        Some(i) => Verdict::no(format!("dual eigen equation fails at coordinate {i}")),
    }
}

/// `<x_t^[m], z_t^[n]>`.
pub fn biorthogonality(t: &Rational, m: usize, n: usize) -> Rational {
    let x = eigenvector_closed_form(t, m, n + 1);
    let z = dual_eigenvector(t, n, n + 1);
    x.iter().zip(&z).fold(Rational::from_usize(0), |a, (p, q)| a + p.clone() * q.clone())
}

/// Eigenvector of `C_1'` for `lambda` with its `l^1` verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct C1Dual {
    pub lambda: Complex64,
    pub coords: Vec<Complex64>,
    /// Support is `[0, m]` when `lambda = 1/(m+1)`.
    pub support_end: Option<usize>,
    pub l1: Verdict,
}

/// `z_0 = 1`, `z_{n+1} = z_n (1 - 1/(lambda (n+1)))`.
pub fn c1_dual_eigenvector(lambda: Complex64, n: usize) -> Result<C1Dual> {
    if lambda == Complex64::new(0.0, 0.0) {
        return Err(CeslabError::ParameterOutOfRange("lambda must be nonzero".into()));
    }
    let w = lambda.inv();
    let k = w.re.round();
    let finite = (k >= 1.0 && (w.re - k).abs() <= 1e-12 * k && w.im.abs() <= 1e-12 * k).then(|| k as usize - 1);
    let mut z = Vec::with_capacity(n);
    let mut cur = Complex64::new(1.0, 0.0);
    for j in 0..n {
        z.push(cur);
        cur = if finite == Some(j) { Complex64::new(0.0, 0.0) } else { cur * (1.0 - w / (j as f64 + 1.0)) };
    }
    let l1 = if let Some(m) = finite {
        Verdict::yes(format!("finite support [0, {m}]")).with_bound(z.iter().map(|v| v.norm()).sum())
    } else if w.re > 1.05 {
        Verdict::yes(format!("|z_n| ~ n^(-{:.6}) with exponent above 1", w.re))
    } else if w.re < 0.95 {
        Verdict::no(format!("|z_n| ~ n^(-{:.6}) with exponent below 1", w.re))
    } else {
        Verdict::inconclusive("exponent Re(1/lambda) too close to 1")
    };
    Ok(C1Dual { lambda, coords: z, support_end: finite, l1 })
}

/// Exact coordinates of the `C_1'` eigenvector for real rational `lambda`.
pub fn c1_dual_eigenvector_exact(lambda: &Rational, n: usize) -> Result<Vec<Rational>> {
    if *lambda == Rational::from_usize(0) {
        return Err(CeslabError::ParameterOutOfRange("lambda must be nonzero".into()));
    }
    let w = lambda.recip();
    let mut z = Vec::with_capacity(n);
    let mut cur = Rational::from_usize(1);
    for j in 0..n {
        z.push(cur.clone());
        cur = cur * (Rational::from_usize(1) - w.clone() / Rational::from_usize(j + 1));
    }
    Ok(z)
}

/// `lambda z_n - z_n/(n+1) - lambda z_{n+1}` for `n < N-1`.
pub fn c1_dual_residuals<T: Real>(lambda: &T, z: &[T]) -> Vec<T> {
    z.windows(2)
        .enumerate()
        .map(|(n, w)| lambda.clone() * w[0].clone() - w[0].clone() / T::from_usize(n + 1) - lambda.clone() * w[1].clone())
        .collect()
}

/// Is `x_t^[m]` in `space`? Hahn spaces use the ratio test on `beta_n = d_{m+n}|x_{m+n+1} - x_{m+n}|`.
pub fn eigenvector_membership(space: &SpaceSpec, t: f64, m: usize) -> Result<Membership> {
    if !(0.0..1.0).contains(&t) {
        return Err(CeslabError::ParameterOutOfRange(format!("eigenvector membership needs t in [0,1), got {t}")));
    }
    space.validate()?;
    let x = eigenvector_seq(t, m)?;
    match space {
        SpaceSpec::HahnD(w) if t > 0.0 => Ok(hahn_beta_membership(w, t, m, &x)),
        _ => Ok(membership(space, &x)),
    }
}

fn hahn_beta_membership(w: &Weight, t: f64, m: usize, x: &SeqGenerator<f64>) -> Membership {
    let c = 1.0 - t;
    let mt = m as f64 * t;
    let n_min = ((mt / c).floor() as usize) + 1;
    let beta_at = beta_at_owned(w.clone(), x.clone(), m);
    let mut n0 = n_min;
    while n0 < 1 << 20 {
        if let Some(rho) = w.sup_ratio_from(m + n0) {
            let k = ((m + n0 + 1) as f64 / (n0 + 2) as f64).max(1.0);
            let r = rho * t * k * (1.0 + c / ((n0 + 1) as f64 * c - mt)) * (1.0 + 8.0 * f64::EPSILON);
            if r < 1.0 {
                let terms = SeqGenerator::new("beta", beta_at_owned(w.clone(), x.clone(), m))
                    .nonnegative()
                    .with_certificate(TailCertificate::Geometric { start: n0, ratio: r });
                let depth = n0 + 256;
                let head: f64 = (0..m).map(|j| w.value(j) * (x.term(j + 1) - x.term(j)).abs()).sum();
                return match sum_with_tail(&terms, &TailCertificate::Geometric { start: n0, ratio: r }, depth) {
                    Ok(e) => {
                        let e = Enclosure { lower: e.lower + head, upper: e.upper.map(|u| u + head) };
                        let b = e.upper_or_inf();
                        Membership {
                            verdict: Verdict::yes(format!("beta ratio bounded by {r:.6} < 1 from n = {n0}")).with_bound(b),
                            norm: Some(e),
                            divergence: None,
                        }
                    }
                    Err(err) => Membership { verdict: Verdict::inconclusive(err.to_string()), norm: None, divergence: None },
                };
            }
        }
        if let Some(inf) = w.inf_ratio_from(m + n0) {
            let lower = inf * t * (n0 + 1) as f64 / (n0 + 2) as f64;
            if lower > 1.0 {
                let b = beta_at(n0);
                return Membership {
                    verdict: Verdict::no(format!("beta ratio at least {lower:.6} > 1 from n = {n0}; terms do not tend to 0")).with_bound(b),
                    norm: None,
                    divergence: Some(b),
                };
            }
        }
        n0 *= 2;
    }
    Membership { verdict: Verdict::inconclusive("beta ratio test undecided"), norm: None, divergence: None }
}

fn beta_at_owned(w: Weight, x: SeqGenerator<f64>, m: usize) -> impl Fn(usize) -> f64 + Send + Sync + 'static {
    move |n| {
        let j = m + n;
        w.value(j) * (x.term(j + 1) - x.term(j)).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_i64(n) / Rational::from_i64(d)
    }

    #[test]
    fn eigenvector_examples() {
        let x = eigenvector(&q(1, 2), 1, 6).unwrap();
        assert_eq!(x, vec![q(0, 1), q(1, 1), q(1, 1), q(3, 4), q(1, 2), q(5, 16)]);
        let t = q(2, 7);
        let x = eigenvector(&t, 2, 6).unwrap();
        assert_eq!(x, vec![q(0, 1), q(0, 1), q(1, 1), q(3, 1) * t.clone(), q(6, 1) * t.powu(2), q(10, 1) * t.powu(3)]);
        let x0 = eigenvector(&q(1, 3), 0, 5).unwrap();
        assert_eq!(x0, (0..5).map(|n| q(1, 3).powu(n)).collect::<Vec<_>>());
        let x1 = eigenvector(&q(1, 1), 2, 6).unwrap();
        assert_eq!(x1, vec![q(0, 1), q(0, 1), q(1, 1), q(3, 1), q(6, 1), q(10, 1)]);
    }

    #[test]
    fn eigenpairs_verify() {
        assert!(verify_eigenpair(&q(0, 1), 5, 10).is_yes());
        assert!(verify_eigenpair(&q(1, 2), 0, 100).is_yes());
        assert!(verify_eigenpair(&q(3, 4), 7, 200).is_yes());
        assert!(verify_eigenpair(&q(1, 1), 3, 40).is_yes());
    }

    #[test]
    fn dual_eigenpairs_verify() {
        assert!(verify_dual_eigenpair(&q(1, 2), 0, 4).is_yes());
        assert_eq!(dual_eigenvector(&q(1, 2), 1, 3), vec![q(-1, 2), q(1, 1), q(0, 1)]);
        assert!(verify_dual_eigenpair(&q(1, 2), 1, 3).is_yes());
        assert!(verify_dual_eigenpair(&q(2, 3), 4, 16).is_yes());
        assert!(verify_dual_eigenpair(&q(2, 3), 4, 4).is_inconclusive());
    }

    #[test]
    fn biorthogonality_examples() {
        assert_eq!(biorthogonality(&q(1, 2), 3, 3), q(1, 1));
        assert_eq!(biorthogonality(&q(3, 5), 4, 1), q(0, 1));
        // the pairing of x^[0] with z^[2] vanishes: sum (-1)^i binom(2,i) t^i t^{2-i} = t^2 (1-1)^2
        assert_eq!(biorthogonality(&q(1, 2), 0, 2), q(0, 1));
    }

    #[test]
    fn c1_dual_examples() {
        let e = c1_dual_eigenvector(Complex64::new(1.0, 0.0), 8).unwrap();
        assert_eq!(e.support_end, Some(0));
        assert!(e.coords[1..].iter().all(|v| v.norm() == 0.0));
        let h = c1_dual_eigenvector(Complex64::new(0.5, 0.0), 8).unwrap();
        assert_eq!(h.coords[..3], [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let g = c1_dual_eigenvector(Complex64::new(0.6, 0.0), 4096).unwrap();
        assert!(g.l1.is_yes());
        let n = 4000.0f64;
        let ratio = g.coords[4000].norm() * n.powf(5.0 / 3.0);
        assert!(ratio > 0.1 && ratio < 10.0);
        assert!(c1_dual_eigenvector(Complex64::new(1.0, 0.0) / 1.0, 4).unwrap().l1.is_yes());
        assert!(c1_dual_eigenvector(Complex64::new(2.0, 0.0), 4).unwrap().l1.is_no());
        assert!(c1_dual_eigenvector(Complex64::new(0.0, 0.0), 4).is_err());
    }

    #[test]
    fn c1_dual_exact_residuals_vanish() {
        for lam in [q(3, 5), q(2, 1), q(1, 4), q(-1, 3)] {
            let z = c1_dual_eigenvector_exact(&lam, 40).unwrap();
            assert!(c1_dual_residuals(&lam, &z).iter().all(|r| *r == q(0, 1)));
        }
        let z = c1_dual_eigenvector_exact(&q(1, 4), 12).unwrap();
        assert!(z[..4].iter().all(|v| *v != q(0, 1)) && z[4..].iter().all(|v| *v == q(0, 1)));
    }

    #[test]
    fn membership_examples() {
        assert!(eigenvector_membership(&SpaceSpec::Lp(1.0), 0.5, 3).unwrap().verdict.is_yes());
        assert!(eigenvector_membership(&SpaceSpec::HahnD(Weight::Log), 0.5, 0).unwrap().verdict.is_yes());
        assert!(eigenvector_membership(&SpaceSpec::HahnD(Weight::Geometric(2.0)), 0.6, 0).unwrap().verdict.is_no());
        assert!(eigenvector_membership(&SpaceSpec::HahnD(Weight::Geometric(2.0)), 0.4, 2).unwrap().verdict.is_yes());
        assert!(eigenvector_membership(&SpaceSpec::HahnD(Weight::Factorial), 0.1, 1).unwrap().verdict.is_no());
        let h = eigenvector_membership(&SpaceSpec::HahnD(Weight::hahn()), 0.5, 0).unwrap();
        assert!(h.norm.unwrap().contains(&2.0));
        assert!(eigenvector_membership(&SpaceSpec::Lp(1.0), 1.0, 0).is_err());
        let ones = eigenvector_seq(1.0, 0).unwrap();
        assert!(membership(&SpaceSpec::C0, &ones).verdict.is_no());
    }

    proptest! {
        #[test]
        fn recurrence_matches_closed_form(m in 0usize..12, p in 0i64..=8) {
            let t = q(p, 8);
            prop_assert_eq!(eigenvector(&t, m, m + 65).unwrap(), eigenvector_closed_form(&t, m, m + 65));
        }

        #[test]
        fn biorthogonality_is_kronecker(m in 0usize..=12, n in 0usize..=12, p in 0i64..4) {
            prop_assume!(n <= m);
            let t = q(p, 4);
            let expect = if n == m { q(1, 1) } else { q(0, 1) };
            prop_assert_eq!(biorthogonality(&t, m, n), expect);
        }
    }
}
