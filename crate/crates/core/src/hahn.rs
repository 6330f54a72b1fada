//! Generalized Hahn spaces `h_d`: the existence criterion for `C_t`, non-existence
//! criteria, shift-norm bounds, convergence of `R_t` and the weight-ratio hypotheses.

use rayon::prelude::*;

use crate::error::{CeslabError, Result};
use crate::numeric::{Enclosure, Verdict};
use crate::operators::apply_cesaro;
use crate::spaces::{conjugation, SpaceSpec, Weight};

pub const DEFAULT_M: usize = 64;
pub const DEFAULT_N: usize = 1 << 16;

/// Evaluated existence criterion: per-`m` enclosures of
/// `c_m = (1/d_m) sum_n d_n |sum_{k<=m} (a_{n,k} - a_{n+1,k})|`.
#[derive(Clone, Debug)]
pub struct ExistenceReport {
    pub weight: Weight,
    pub t: f64,
    pub verdict: Verdict,
    pub evidence: Vec<Enclosure<f64>>,
    /// Certified bound for `sup_{m > M} c_m`, when one is known.
    pub beyond: Option<f64>,
    pub depth: (usize, usize),
}

impl ExistenceReport {
    /// Enclosure of `sup_m c_m`, the norm of `C_t` on `h_d`.
    pub fn sup(&self) -> Enclosure<f64> {
        let lower = self.evidence.iter().map(|e| e.lower).fold(0.0, f64::max);
        let upper = if self.verdict.is_yes() {
            self.evidence
                .iter()
                .map(|e| e.upper)
                .chain(std::iter::once(self.beyond))
                .try_fold(0.0f64, |a, u| u.map(|u| a.max(u)))
        } else {
            None
        };
        Enclosure { lower, upper }
    }
}

const PAD: f64 = 1e-12;

fn pad(lower: f64, upper: Option<f64>) -> Enclosure<f64> {
    Enclosure { lower: lower * (1.0 - PAD), upper: upper.map(|u| u * (1.0 + PAD)) }
}

/// `c_m` summed over `n < N` plus a certified tail, for `t` in `[0, 1)`.
fn coordinate_below_one(w: &Weight, t: f64, m: usize, n: usize) -> Enclosure<f64> {
    let ln_dm = w.ln_value(m);
    let ln_t = t.ln();
    let mut head = 0.0;
    let mut h = 1.0 - t;
    let mut tp = 1.0;
    for j in 0..m {
        head += (w.ln_value(j) - ln_dm).exp() * h / ((j + 1) as f64 * (j + 2) as f64);
        tp *= t;
        h += (j + 2) as f64 * tp * (1.0 - t);
    }
    let g = if t == 0.0 { 1.0 } else { (1.0 - t.powi(m as i32 + 1)) / (1.0 - t) };
    let term = |k: usize| -> f64 {
        let scale = if k == m {
            1.0
        } else if t == 0.0 {
            0.0
        } else {
            (w.ln_value(k) - ln_dm + (k - m) as f64 * ln_t).exp()
        };
        let v = ((1.0 - t) * (k + 1) as f64 + 1.0) / ((k + 1) as f64 * (k + 2) as f64);
        scale * v
    };
    let end = n.max(m + 1);
    let mut body = 0.0;
    for k in m..end {
        let v = term(k);
        if !v.is_finite() {
            return Enclosure::lower_only(f64::INFINITY);
        }
        body += v;
    }
    let tail = if t == 0.0 {
        Some(0.0)
    } else {
        w.sup_ratio_from(end).filter(|rho| rho * t < 1.0).map(|rho| term(end) / (1.0 - rho * t))
    };
    pad(head + g * body, tail.map(|tl| head + g * (body + tl)))
}

/// `t = 1`: the inner sum telescopes to `(m+1)/((n+1)(n+2))` for `n >= m`.
fn coordinate_at_one(w: &Weight, m: usize, n: usize) -> Enclosure<f64> {
    let ln_dm = w.ln_value(m);
    let end = n.max(m + 1);
    let mut s = 0.0;
    for k in m..end {
        s += (w.ln_value(k) - ln_dm).exp() / ((k + 1) as f64 * (k + 2) as f64);
        if !s.is_finite() {
            return Enclosure::lower_only(f64::INFINITY);
        }
    }
    let scale = (m + 1) as f64;
    let nn = end as f64;
    // bounds on sum_{k >= N} d_k/((k+1)(k+2))
    let tail = match w {
        Weight::Power(r) if *r < 1.0 => Some(nn.powf(r - 1.0) / (1.0 - r)),
        Weight::Log => Some((1.0 + std::f64::consts::LN_2 + nn.ln()) / nn),
        _ => None,
    };
    pad(scale * s, tail.map(|tl| scale * (s + tl / w.value(m))))
}

/// Certified bound for `sup_{m > M} c_m`.
fn beyond_bound(w: &Weight, t: f64, m_max: usize) -> Option<f64> {
    let m1 = m_max + 1;
    if t == 0.0 {
        return Some(1.0);
    }
    if t == 1.0 {
        return match w {
            Weight::Log => {
                let m = m1 as f64;
                Some(1.0 + (1.0 + 1.0 / (2.0 * std::f64::consts::E * (m + 1.0))) / (m + 3.0).ln())
            }
            Weight::Power(r) if *r < 1.0 => Some(1.0 / (m1 as f64 + 1.0) + 1.0 / (1.0 - r)),
            _ => None,
        };
    }
    let rho = w.sup_ratio_from(m1)?;
    if rho * t >= 1.0 {
        return None;
    }
    let ln_d = w.ln_value(m1);
    let mut head = 0.0;
    let mut h = 1.0 - t;
    let mut tp = 1.0;
    for j in 0..=m_max {
        head += (w.ln_value(j) - ln_d).exp() * h / ((j + 1) as f64 * (j + 2) as f64);
        tp *= t;
        h += (j + 2) as f64 * tp * (1.0 - t);
    }
    let mf = m1 as f64;
    let rest = 1.0 / ((1.0 - t) * (mf + 1.0));
    let second = (1.0 / (mf + 2.0) + 1.0 / ((1.0 - t) * (mf + 1.0) * (mf + 2.0))) / (1.0 - rho * t);
    Some((head + rest + second) * (1.0 + PAD))
}

/// `c_m` for `m <= M`, inner sums to depth `N`, evaluated in parallel.
pub fn coordinates(w: &Weight, t: f64, m_max: usize, n: usize) -> Vec<Enclosure<f64>> {
    (0..=m_max)
        .into_par_iter()
        .map(|m| if t == 1.0 { coordinate_at_one(w, m, n) } else { coordinate_below_one(w, t, m, n) })
        .collect()
}

/// `sum_k d_k |x_{k+1} - x_k|` of `C_t e_0` diverges at `t = 1` when `d_n/(n+1)` stays bounded below.
fn divergence_at_one(w: &Weight) -> Option<String> {
    let floor = match w {
        Weight::Power(r) if *r >= 1.0 => 1.0,
        Weight::Factorial | Weight::SuperPower => 1.0,
        Weight::Geometric(a) => {
            let mut best = f64::INFINITY;
            let mut n = 0usize;
            loop {
                best = best.min(a.powi(n as i32) / (n + 1) as f64);
                if a * (n + 1) as f64 >= (n + 2) as f64 {
                    break;
                }
                n += 1;
            }
            best
        }
        _ => return None,
    };
    Some(format!(
        "d_n/(n+1) >= {floor:.6} for all n, so sum d_k/((k+1)(k+2)) diverges like the harmonic series and C_1 e_0 is not in h_d"
    ))
}

/// `d_n t^n` nondecreasing from some `n0` forces `||C_t e_0||_{h_d} = inf`.
fn harmonic_obstruction(w: &Weight, t: f64) -> Option<String> {
    if !(t > 0.0 && t < 1.0) {
        return None;
    }
    let rho = w.inf_ratio_from(0)?;
    (rho * t >= 1.0).then(|| {
        format!("d_(n+1) t/d_n >= {:.6} >= 1, so ||C_t e_0|| >= d_0 (1-t) sum 1/(k+2) diverges", rho * t)
    })
}

/// Decides whether `C_t` exists in `h_d`, using the coordinates for `m <= M`,
/// a uniform bound beyond `M` and the non-existence criteria.
pub fn existence_test(w: &Weight, t: f64, m_max: usize, n: usize) -> ExistenceReport {
    let report = |verdict: Verdict, evidence: Vec<Enclosure<f64>>, beyond: Option<f64>| ExistenceReport {
        weight: w.clone(),
        t,
        verdict,
        evidence,
        beyond,
        depth: (m_max, n),
    };
    if let Err(e) = w.validate() {
        return report(Verdict::inconclusive(e.to_string()), Vec::new(), None);
    }
    if !(0.0..=1.0).contains(&t) {
        return report(Verdict::inconclusive(format!("t must lie in [0,1], got {t}")), Vec::new(), None);
    }
    let evidence = coordinates(w, t, m_max, n);
    if t == 1.0 {
        if let Some(reason) = divergence_at_one(w) {
            return report(Verdict::no(reason).with_bound(evidence[0].lower), evidence, None);
        }
    } else {
        let lemma = nonexistence_test(w, t);
        if lemma.is_no() {
            return report(lemma, evidence, None);
        }
        if let Some(reason) = harmonic_obstruction(w, t) {
            return report(Verdict::no(reason), evidence, None);
        }
    }
    let beyond = beyond_bound(w, t, m_max);
    let head = evidence.iter().map(|e| e.upper).try_fold(0.0f64, |a, u| u.map(|u| a.max(u)));
    match (head, beyond) {
        (Some(h), Some(b)) => {
            let bound = h.max(b);
            report(
                Verdict::yes(format!("c_m <= {h:.6} for m <= {m_max} and <= {b:.6} beyond")).with_bound(bound),
                evidence,
                beyond,
            )
        }
        _ => report(Verdict::inconclusive("no uniform bound on c_m and no divergence certificate"), evidence, beyond),
    }
}

/// Default depths `M = 64`, `N = 2^16`.
pub fn existence(w: &Weight, t: f64) -> ExistenceReport {
    existence_test(w, t, DEFAULT_M, DEFAULT_N)
}

/// Non-existence from `gamma_n = d_n t^n/((n+1)(n+2))`: CertifiedNo when `gamma` is
/// eventually nondecreasing (not in `c_0`) or dominates a harmonic series (not in `l^1`).
/// Never CertifiedYes.
pub fn nonexistence_test(w: &Weight, t: f64) -> Verdict {
    if !(t > 0.0 && t < 1.0) {
        return Verdict::inconclusive(format!("criterion needs t in (0,1), got {t}"));
    }
    if let Err(e) = w.validate() {
        return Verdict::inconclusive(e.to_string());
    }
    let ln_gamma = |n: usize| w.ln_value(n) + n as f64 * t.ln() - ((n + 1) as f64 * (n + 2) as f64).ln();
    let starts = || std::iter::successors(Some(1usize), |n| Some(n * 2)).take_while(|n| *n <= 1 << 20);
    // the c_0 obstruction is the stronger one, so it is scanned first
    for n0 in starts() {
        if let Some(rho) = w.inf_ratio_from(n0) {
            let growth = rho * t * (n0 + 1) as f64 / (n0 + 3) as f64;
            if growth > 1.0 {
                return Verdict::no(format!(
                    "gamma_(n+1)/gamma_n >= {growth:.6} > 1 for n >= {n0}: gamma is not in c_0"
                ))
                .with_bound(ln_gamma(n0).exp());
            }
        }
    }
    for n0 in starts() {
        if let Some(rho) = w.inf_ratio_from(n0) {
            if rho * t >= (n0 + 3) as f64 / (n0 + 2) as f64 {
                return Verdict::no(format!(
                    "(n+1) gamma_n is nondecreasing for n >= {n0}: gamma is not in l^1"
                ))
                .with_bound(ln_gamma(n0).exp());
            }
        }
    }
    Verdict::inconclusive("gamma ratio tends to t times the weight-ratio limit; no obstruction certified")
}

/// `||S^(m+1)||_{h_d} <= d_m + sup_k d_(m+k+1)/d_k`; with decreasing ratio sequences
/// the supremum is `d_(m+1)/d_0`, otherwise it is scanned over `k <= K`.
pub fn shift_norm_bound(w: &Weight, m: usize, k_max: usize) -> f64 {
    if w.ratios_decreasing() == Some(true) {
        return w.value(m) + w.value(m + 1) / w.value(0);
    }
    let sup = (0..=k_max)
        .map(|k| (w.ln_value(m + k + 1) - w.ln_value(k)).exp())
        .fold(0.0, f64::max);
    w.value(m) + sup
}

/// Absolute convergence of `R_t = sum t^m S^m` in operator norm.
pub fn rt_convergence_check(w: &Weight, t: f64, m_max: usize) -> Verdict {
    if !(0.0..1.0).contains(&t) {
        return Verdict::inconclusive(format!("R_t needs t in [0,1), got {t}"));
    }
    if t == 0.0 {
        return Verdict::yes("R_0 = I");
    }
    if w.ratios_decreasing() == Some(true) {
        if let Some(rho) = w.sup_ratio_from(m_max) {
            if rho * t < 1.0 {
                return Verdict::yes(format!(
                    "t^m ||S^m|| <= t^m (d_(m-1) + d_m/d_0) with ratio t d_(m+1)/d_m <= {:.6} < 1 for m >= {m_max}",
                    rho * t
                ))
                .with_bound(rho * t);
            }
        }
    }
    if let Some(rho) = w.inf_ratio_from(0) {
        if rho * t >= 1.0 {
            return Verdict::no(format!(
                "||R_t e_0|| = d_0 + (1-t) sum d_k t^(k-1) diverges since d_(k+1) t/d_k >= {:.6}",
                rho * t
            ));
        }
    }
    Verdict::inconclusive("no ratio certificate for the shift series")
}

/// Hypotheses of the factorization theorem: each `(d_(m+k+1)/d_k)_k` decreasing and `d_(k+1)/d_k` decreasing to 1.
pub fn ratio_conditions_check(w: &Weight, m_max: usize, k_max: usize) -> Verdict {
    match (w.ratios_decreasing(), w.ratio_limit_is_one()) {
        (Some(true), Some(true)) => {
            return Verdict::yes(format!("analytic monotonicity hook for the {} family", w.label()))
        }
        (Some(false), _) => return Verdict::no(format!("ratio sequences of {} are not decreasing", w.label())),
        (_, Some(false)) => {
            return Verdict::no(format!("d_(k+1)/d_k does not decrease to 1 for {}", w.label())).with_bound(w.ratio(0))
        }
        _ => {}
    }
    for m in 0..=m_max {
        for k in 0..k_max {
            let a = w.ln_value(m + k + 1) - w.ln_value(k);
            let b = w.ln_value(m + k + 2) - w.ln_value(k + 1);
            if b > a + 1e-12 {
                return Verdict::no(format!("d_(m+k+1)/d_k increases at m = {m}, k = {k}"));
            }
        }
    }
    Verdict::inconclusive(format!("scan passed for m <= {m_max}, k <= {k_max}; no analytic hook"))
}

/// Absolute column sum `m` of the `HahnW`-conjugated section, matrix-free.
pub fn conjugated_column_sum(w: &Weight, t: f64, m: usize, n: usize) -> Result<f64> {
    if m >= n {
        return Err(CeslabError::ParameterOutOfRange(format!("column {m} outside a section of size {n}")));
    }
    let iso = conjugation(&SpaceSpec::HahnD(w.clone()));
    let mut y = vec![0.0; n];
    y[m] = 1.0;
    let mut x = iso.inverse(&y)?;
    x.push(0.0);
    let img = iso.forward(&apply_cesaro(&t, &x))?;
    Ok(img[..n].iter().map(|v| v.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_examples() {
        assert!(existence(&Weight::Log, 1.0).verdict.is_yes());
        assert!(existence(&Weight::Power(1.0), 1.0).verdict.is_no());
        assert!(existence(&Weight::Geometric(2.0), 0.4).verdict.is_yes());
        assert!(existence(&Weight::Geometric(2.0), 0.6).verdict.is_no());
        assert!(existence(&Weight::Geometric(2.0), 0.5).verdict.is_no());
        assert!(nonexistence_test(&Weight::Factorial, 0.5).is_no());
        assert!(nonexistence_test(&Weight::SuperPower, 0.3).is_no());
        assert!(nonexistence_test(&Weight::Log, 0.9).is_inconclusive());
    }

    #[test]
    fn geometric_threshold() {
        let w = Weight::Geometric(2.0);
        for t in [0.40, 0.45, 0.49] {
            assert!(existence_test(&w, t, 64, 1 << 14).verdict.is_yes(), "t = {t}");
        }
        for t in [0.51, 0.55, 0.60] {
            assert!(existence_test(&w, t, 64, 1 << 14).verdict.is_no(), "t = {t}");
        }
    }

    #[test]
    fn t_zero_always_exists() {
        for w in [Weight::Factorial, Weight::Log, Weight::Geometric(3.0)] {
            let r = existence_test(&w, 0.0, 16, 256);
            assert!(r.verdict.is_yes());
            assert!(r.sup().upper.unwrap() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn closed_form_at_one_for_log() {
        let r = existence_test(&Weight::Log, 1.0, 8, 1 << 16);
        for (m, e) in r.evidence.iter().enumerate() {
            let big: f64 = (m..4_000_000).map(|n| ((n + 3) as f64).ln() / ((n + 1) as f64 * (n + 2) as f64)).sum();
            let v = (m + 1) as f64 / ((m + 3) as f64).ln() * big;
            assert!(e.lower <= v && v <= e.upper.unwrap(), "m = {m}: {v} vs {e}");
        }
    }

    #[test]
    fn shift_bounds() {
        assert_eq!(shift_norm_bound(&Weight::Power(2.0), 3, 100), 41.0);
        let l = shift_norm_bound(&Weight::Log, 0, 100);
        assert!((l - (3f64.ln() + 4f64.ln() / 3f64.ln())).abs() < 1e-15);
        assert_eq!(shift_norm_bound(&Weight::Geometric(2.0), 2, 100), 12.0);
    }

    #[test]
    fn rt_and_ratio_conditions() {
        assert!(rt_convergence_check(&Weight::Power(2.0), 0.9, 64).is_yes());
        assert!(rt_convergence_check(&Weight::Geometric(2.0), 0.6, 64).is_no());
        assert!(rt_convergence_check(&Weight::Geometric(2.0), 0.4, 64).is_yes());
        assert!(ratio_conditions_check(&Weight::Power(0.5), 16, 100).is_yes());
        assert!(ratio_conditions_check(&Weight::Log, 16, 100).is_yes());
        assert!(ratio_conditions_check(&Weight::Geometric(2.0), 16, 100).is_no());
        let sq = Weight::custom("n+1 squared", |n| ((n + 1) * (n + 1)) as f64);
        assert!(ratio_conditions_check(&sq, 8, 200).is_inconclusive());
    }

    #[test]
    fn columns_match_coordinates() {
        for w in [Weight::Power(1.0), Weight::Log] {
            let t = 0.5;
            let n = 1024;
            let r = existence_test(&w, t, 16, n);
            for m in 0..=16 {
                let col = conjugated_column_sum(&w, t, m, n).unwrap();
                let e = &r.evidence[m];
                assert!(col >= e.lower * (1.0 - 1e-9) && col <= e.upper.unwrap() * (1.0 + 1e-9), "m = {m}");
            }
        }
    }
}
