//! Registry of machine-checked statements about `C_t`, one row per result.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{
    biorthogonality, c1_dual_eigenvector, eigenvector_membership, verify_dual_eigenpair, verify_eigenpair,
};
use crate::error::Result;
use crate::hahn;
use crate::numeric::{render_f64, Rational, Real, Scalar, Verdict};
use crate::operators::{apply_cesaro, bv_conjugate_a_minus_b, conjugated_operator, factorization_check};
use crate::spaces::{membership, ones, SpaceSpec, Weight};
use crate::spectral::{
    bv_limit_form_norm, ergodic_distances, finite_section_spectrum, l1_norm_closed_form, operator_norm, power_norms,
    resolvent_probe, NormEstimate, ProjectionP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    NotMachineCheckable,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "Pass",
            Status::Fail => "Fail",
            Status::NotMachineCheckable => "NotMachineCheckable",
        })
    }
}

/// One checked statement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimRow {
    pub claim_id: String,
    /// Space (or family) the statement is about.
    pub topic: String,
    pub statement: String,
    pub computed: String,
    pub expected: String,
    pub status: Status,
    pub note: String,
}

struct Outcome {
    computed: String,
    expected: String,
    pass: bool,
    note: String,
}

impl Outcome {
    fn new(computed: impl Into<String>, expected: impl Into<String>, pass: bool) -> Self {
        Outcome { computed: computed.into(), expected: expected.into(), pass, note: String::new() }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

type Check = fn() -> Result<Outcome>;

struct Claim {
    id: &'static str,
    topic: &'static str,
    statement: &'static str,
    check: Option<Check>,
    /// Reason for rows that are not machine checkable.
    reason: &'static str,
}

const fn row(id: &'static str, topic: &'static str, statement: &'static str, check: Check) -> Claim {
    Claim { id, topic, statement, check: Some(check), reason: "" }
}

const fn skip(id: &'static str, topic: &'static str, statement: &'static str, reason: &'static str) -> Claim {
    Claim { id, topic, statement, check: None, reason }
}

fn enc(e: &NormEstimate) -> String {
    match &e.enclosure.upper {
        Some(u) => format!("[{}, {}]", e.enclosure.lower.render(), u.render()),
        None => format!("[{}, inf)", e.enclosure.lower.render()),
    }
}

fn verdict(v: &Verdict) -> String {
    v.outcome.to_string()
}

fn exact_one(e: &NormEstimate) -> bool {
    e.enclosure.lower == Scalar::Exact(Rational::from_i64(1)) && e.enclosure.upper == Some(Scalar::Exact(Rational::from_i64(1)))
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_i64(n) / Rational::from_i64(d)
}

fn norm_contains(space: SpaceSpec, t: f64, n: usize, value: f64, width: f64) -> Result<Outcome> {
    let e = operator_norm(&space, &Scalar::Float(t), n)?;
    let ok = e.contains(value) && e.width().is_some_and(|w| w <= width);
    Ok(Outcome::new(enc(&e), format!("contains {} with width <= {width:e}", render_f64(value)), ok))
}

fn norm_exactly_one(space: SpaceSpec, t: Scalar, n: usize) -> Result<Outcome> {
    let e = operator_norm(&space, &t, n)?;
    Ok(Outcome::new(enc(&e), "[1, 1]", exact_one(&e)))
}

fn norm_upper_at_most(space: SpaceSpec, t: f64, n: usize, bound: f64) -> Result<Outcome> {
    let e = operator_norm(&space, &Scalar::Float(t), n)?;
    let ok = e.upper().is_some_and(|u| u <= bound * (1.0 + 1e-12)) && e.lower() <= bound;
    Ok(Outcome::new(enc(&e), format!("upper <= {}", render_f64(bound)), ok))
}

fn not_existent(space: SpaceSpec, t: Scalar) -> Result<Outcome> {
    Ok(match operator_norm(&space, &t, 64) {
        Err(e) => Outcome::new(e.to_string(), "error: operator does not exist", true),
        Ok(e) => Outcome::new(enc(&e), "error: operator does not exist", false),
    })
}

fn eigen_in(space: SpaceSpec, t: f64, m: usize, want_yes: bool) -> Result<Outcome> {
    let v = eigenvector_membership(&space, t, m)?.verdict;
    let ok = if want_yes { v.is_yes() } else { v.is_no() };
    Ok(Outcome::new(verdict(&v), if want_yes { "CertifiedYes" } else { "CertifiedNo" }, ok).note(v.reason))
}

fn hahn_verdict(w: Weight, t: f64, want_yes: bool) -> Result<Outcome> {
    let r = hahn::existence(&w, t);
    let ok = if want_yes { r.verdict.is_yes() } else { r.verdict.is_no() };
    let sup = r.sup();
    let computed = match sup.upper {
        Some(u) if r.verdict.is_yes() => format!("{} sup c_m in [{}, {}]", r.verdict.outcome, render_f64(sup.lower), render_f64(u)),
        _ => r.verdict.outcome.to_string(),
    };
    Ok(Outcome::new(computed, if want_yes { "CertifiedYes" } else { "CertifiedNo" }, ok).note(r.verdict.reason))
}

fn sup_space_ergodic(space: SpaceSpec) -> Result<Outcome> {
    let r = ergodic_distances(&space, 0.5, 256, 1024)?;
    let pb = r.powers.iter().cloned().fold(0.0, f64::max);
    let d = r.means[255];
    Ok(Outcome::new(
        format!("sup ||C^n - P|| = {}, ||C_[256] - P|| = {}", render_f64(pb), render_f64(d)),
        "bounded powers, means distance <= 0.06",
        pb <= 4.0 && d <= 0.06,
    ))
}

const ONE_OVER: &str = "exact, e_0..e_255";

fn registry() -> Vec<Claim> {
    vec![
        // l^p
        row("lp-c1-l2-norm", "l^p", "||C_1|| on l^2 equals p' = 2", || {
            let e = operator_norm(&SpaceSpec::Lp(2.0), &Scalar::Float(1.0), 1 << 14)?;
            Ok(Outcome::new(enc(&e), "contains 2, lower >= 1.75", e.contains(2.0) && e.lower() >= 1.75))
        }),
        row("lp-c1-l3-norm", "l^p", "||C_1|| on l^3 equals p' = 3/2", || {
            let e = operator_norm(&SpaceSpec::Lp(3.0), &Scalar::Float(1.0), 1 << 12)?;
            Ok(Outcome::new(enc(&e), "contains 1.5", e.contains(1.5)))
        }),
        row("lp-c1-l2-spectrum-disk", "l^p", "|z - 1| <= 1 lies in the spectrum of C_1 on l^2", || {
            let vals = [1usize << 8, 1 << 10, 1 << 12]
                .iter()
                .map(|&n| resolvent_probe(Complex64::new(1.0, 0.5), 1.0, n))
                .collect::<Result<Vec<_>>>()?;
            let grows = vals.windows(2).all(|w| w[1] > w[0]);
            let s: Vec<String> = vals.iter().map(|v| render_f64(*v)).collect();
            Ok(Outcome::new(s.join(" < "), "resolvent at 1+0.5i grows with N", grows))
        }),
        row("lp-c1-l2-not-power-bounded", "l^p", "C_1 is not power bounded on l^2", || {
            let p = power_norms(&SpaceSpec::Lp(2.0), &Scalar::Float(1.0), 4, 1 << 12)?;
            let v = p[3].lower();
            Ok(Outcome::new(format!("||C_1^4|| >= {}", render_f64(v)), "||C_1^4|| >= 5", v >= 5.0))
        }),
        row("lp-c1-linf-norm", "l^p", "||C_1|| on l^inf equals 1", || {
            norm_exactly_one(SpaceSpec::Lp(f64::INFINITY), Scalar::exact(1, 1), 256)
        }),
        row("lp-c1-l1-nonexistence", "l^p", "C_1 does not act on l^1", || {
            not_existent(SpaceSpec::Lp(1.0), Scalar::exact(1, 1))
        }),
        row("lp-l1-norm-t0", "l^p", "||C_0|| on l^1 equals 1", || {
            let e = operator_norm(&SpaceSpec::Lp(1.0), &Scalar::Float(0.0), 4096)?;
            Ok(Outcome::new(enc(&e), "contains 1", e.contains(1.0)))
        }),
        row("lp-l1-norm-t0.25", "l^p", "||C_t|| on l^1 equals t^-1 log(1/(1-t))", || {
            norm_contains(SpaceSpec::Lp(1.0), 0.25, 4096, l1_norm_closed_form(0.25), 1e-6)
        }),
        row("lp-l1-norm-t0.5", "l^p", "||C_t|| on l^1 equals t^-1 log(1/(1-t))", || {
            norm_contains(SpaceSpec::Lp(1.0), 0.5, 4096, l1_norm_closed_form(0.5), 1e-6)
        }),
        row("lp-l1-norm-t0.75", "l^p", "||C_t|| on l^1 equals t^-1 log(1/(1-t))", || {
            norm_contains(SpaceSpec::Lp(1.0), 0.75, 4096, l1_norm_closed_form(0.75), 1e-6)
        }),
        row("lp-linf-norm-t0.3", "l^p", "||C_t|| on l^inf equals 1", || {
            norm_exactly_one(SpaceSpec::Lp(f64::INFINITY), Scalar::exact(3, 10), 1024)
        }),
        row("lp-l2-norm-bound-t0.5", "l^p", "||C_t|| on l^p is at most p/(p-1)", || {
            norm_upper_at_most(SpaceSpec::Lp(2.0), 0.5, 4096, 2.0)
        }),
        row("lp-l1-spectrum-section", "l^p", "point spectrum of C_t is {1/(n+1)}", || {
            let s = finite_section_spectrum(&Scalar::exact(1, 2), 64)?;
            let ok = s.eigenvalues.iter().enumerate().all(|(k, v)| *v == Scalar::exact(1, k as i64 + 1));
            Ok(Outcome::new(format!("{} eigenvalues, first {}, last {}", s.eigenvalues.len(), s.eigenvalues[0], s.eigenvalues[63]), "{1/(n+1): n < 64}", ok))
        }),
        row("lp-l1-eigenvector-t0.5", "l^p", "x_t^[m] lies in l^1", || eigen_in(SpaceSpec::Lp(1.0), 0.5, 3, true)),
        row("lp-l1-resolvent-bounded-t0.5", "l^p", "spectrum of C_t lies in [0, 1] for t < 1", || {
            let vals = [256usize, 1024, 4096]
                .iter()
                .map(|&n| resolvent_probe(Complex64::new(2.0, 0.0), 0.5, n))
                .collect::<Result<Vec<_>>>()?;
            let spread = vals.iter().cloned().fold(0.0, f64::max) / vals.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(Outcome::new(format!("resolvent at 2 in [{}, {}]", render_f64(vals[0]), render_f64(vals[2])), "constant in N within 1%", spread < 1.01))
        }),
        row("lp-l1-power-bounded-t0.5", "l^p", "C_t is power bounded and uniformly mean ergodic on l^1", || {
            sup_space_ergodic(SpaceSpec::Lp(1.0))
        }),
        row("lp-l1-projection-t0.5", "l^p", "P^2 = P and P C_t = C_t P = P", || {
            let v = ProjectionP::new(&q(1, 2))?.identities(256)?;
            Ok(Outcome::new(verdict(&v), ONE_OVER, v.is_yes()))
        }),
        row("lp-linf-power-bounded-t0.3", "l^p", "powers of C_t on l^inf have norm at most 1", || {
            let p = power_norms(&SpaceSpec::Lp(f64::INFINITY), &Scalar::Float(0.3), 16, 1024)?;
            let m = p.iter().filter_map(NormEstimate::upper).fold(0.0, f64::max);
            let lower = p.iter().map(NormEstimate::lower).fold(0.0, f64::max);
            Ok(Outcome::new(format!("max ||C^n|| in [{}, {}]", render_f64(lower), render_f64(m)), "<= 1 up to rounding", lower <= 1.0 && m <= 1.0 + 1e-9))
        }),
        // c0 and c
        row("c0-c1-norm", "c0,c", "||C_1|| on c_0 equals 1", || norm_exactly_one(SpaceSpec::C0, Scalar::exact(1, 1), 1024)),
        row("c0-c-c1-norm", "c0,c", "||C_1|| on c equals 1", || norm_exactly_one(SpaceSpec::C, Scalar::exact(1, 1), 1024)),
        row("c0-norm-t0.9", "c0,c", "||C_t|| on c_0 equals 1", || norm_exactly_one(SpaceSpec::C0, Scalar::exact(9, 10), 1024)),
        row("c0-c-norm-t0", "c0,c", "||C_t|| on c equals 1", || norm_exactly_one(SpaceSpec::C, Scalar::exact(0, 1), 1024)),
        row("c0-c1-point-spectrum", "c0,c", "1 is an eigenvalue of C_1 on c but not on c_0", || {
            let one: Vec<Rational> = vec![Rational::from_i64(1); 256];
            let fixed = apply_cesaro(&Rational::from_i64(1), &one) == one;
            let in_c = membership(&SpaceSpec::C, &ones()).verdict;
            let in_c0 = membership(&SpaceSpec::C0, &ones()).verdict;
            Ok(Outcome::new(
                format!("C_1 1 = 1: {fixed}; 1 in c: {}; 1 in c_0: {}", in_c.outcome, in_c0.outcome),
                "true; CertifiedYes; CertifiedNo",
                fixed && in_c.is_yes() && in_c0.is_no(),
            ))
        }),
        row("c0-ergodic-t0.5", "c0,c", "C_t is power bounded and uniformly mean ergodic on c_0", || {
            sup_space_ergodic(SpaceSpec::C0)
        }),
        // cs
        row("cs-norm-t0", "cs", "||C_0|| on cs equals 1", || {
            let e = operator_norm(&SpaceSpec::Cs, &Scalar::Float(0.0), 4096)?;
            Ok(Outcome::new(enc(&e), "contains 1", e.contains(1.0)))
        }),
        row("cs-norm-t0.25", "cs", "||C_t|| on cs equals t^-1 log(1/(1-t))", || {
            norm_contains(SpaceSpec::Cs, 0.25, 4096, l1_norm_closed_form(0.25), 1e-3)
        }),
        row("cs-norm-t0.5", "cs", "||C_t|| on cs equals t^-1 log(1/(1-t))", || {
            norm_contains(SpaceSpec::Cs, 0.5, 4096, l1_norm_closed_form(0.5), 1e-3)
        }),
        row("cs-norm-t0.75", "cs", "||C_t|| on cs equals t^-1 log(1/(1-t))", || {
            norm_contains(SpaceSpec::Cs, 0.75, 4096, l1_norm_closed_form(0.75), 1e-3)
        }),
        row("cs-c1-nonexistence", "cs", "C_t acts on cs only for t < 1", || not_existent(SpaceSpec::Cs, Scalar::exact(1, 1))),
        row("cs-eigenvector-t0.5", "cs", "x_t^[m] lies in cs", || eigen_in(SpaceSpec::Cs, 0.5, 2, true)),
        // N^p
        skip("np-norm", "N^p", "||C_t|| on N^p is at most 1/(1-t)", "N^p norm not defined in paper"),
        skip("np-spectrum", "N^p", "spectra of C_t on N^p", "N^p norm not defined in paper"),
        // ces_p
        row("ces-ces2-norm-t0.5", "ces_p", "||C_t|| on ces_p is at most min{1/(1-t), p'}", || {
            norm_upper_at_most(SpaceSpec::CesP(2.0), 0.5, 4096, 2.0)
        }),
        row("ces-ces3-norm-t0.8", "ces_p", "||C_t|| on ces_p is at most min{1/(1-t), p'}", || {
            norm_upper_at_most(SpaceSpec::CesP(3.0), 0.8, 4096, 1.5)
        }),
        row("ces-ces2-c1-norm", "ces_p", "||C_1|| on ces_p equals p'", || {
            let e = operator_norm(&SpaceSpec::CesP(2.0), &Scalar::Float(1.0), 4096)?;
            Ok(Outcome::new(enc(&e), "contains 2", e.contains(2.0)))
        }),
        row("ces-ces0-norm-t0.5", "ces_p", "||C_t|| on ces_0 equals 1", || {
            let e = operator_norm(&SpaceSpec::Ces0, &Scalar::Float(0.5), 4096)?;
            Ok(Outcome::new(enc(&e), "contains 1", e.contains(1.0)))
        }),
        row("ces-cesinf-c1-norm", "ces_p", "||C_1|| on ces_inf equals 1", || {
            let e = operator_norm(&SpaceSpec::CesP(f64::INFINITY), &Scalar::Float(1.0), 4096)?;
            Ok(Outcome::new(enc(&e), "contains 1", e.contains(1.0)))
        }),
        // d_p
        row("dp-d1-norm-t0", "d_p", "||C_0|| on d_1 equals 1", || {
            let e = operator_norm(&SpaceSpec::Dp(1.0), &Scalar::Float(0.0), 4096)?;
            Ok(Outcome::new(enc(&e), "contains 1", e.contains(1.0)))
        }),
        row("dp-d1-norm-t0.5", "d_p", "||C_t|| on d_1 is at most 1/(1-t)^2", || {
            norm_upper_at_most(SpaceSpec::Dp(1.0), 0.5, 4096, 4.0)
        }),
        row("dp-d2-norm-t0.5", "d_p", "||C_t|| on d_p is at most min{||xi||_p/(1-t), (1-t)^(-1-1/p)}", || {
            let bound = (std::f64::consts::PI.powi(2) / 6.0).sqrt() / 0.5;
            norm_upper_at_most(SpaceSpec::Dp(2.0), 0.5, 4096, bound.min(0.5f64.powf(-1.5)))
        }),
        row("dp-d1-eigenvector-t0.5", "d_p", "x_t^[m] lies in d_1", || eigen_in(SpaceSpec::Dp(1.0), 0.5, 1, true)),
        // solid lattices
        row("lattice-factorization", "lattices", "C_t = D_phi R_t with R_t = sum t^n S^n", || {
            let v = [q(0, 1), q(1, 4), q(1, 2), q(3, 4)]
                .iter()
                .map(|t| factorization_check(t, 64))
                .find(|v| !v.is_yes())
                .unwrap_or_else(|| Verdict::yes("all t"));
            Ok(Outcome::new(verdict(&v), "exact on t in {0, 1/4, 1/2, 3/4}, N = 64", v.is_yes()))
        }),
        row("lattice-x0-in-d1", "lattices", "x_t^[0] lies in d_1, so C_t is uniformly mean ergodic", || {
            eigen_in(SpaceSpec::Dp(1.0), 0.75, 0, true)
        }),
        // bv, bv_0, bv_p
        row("bv-c1-norm", "bv,bv_p", "||C_1|| on bv equals 1", || {
            let e = operator_norm(&SpaceSpec::Bv, &Scalar::Float(1.0), 4096)?;
            Ok(Outcome::new(enc(&e), "contains 1", e.contains(1.0)))
        }),
        row("bv-bv0-c1-norm", "bv,bv_p", "||C_1|| on bv_0 equals 1", || {
            let e = operator_norm(&SpaceSpec::Bv0, &Scalar::Float(1.0), 4096)?;
            Ok(Outcome::new(enc(&e), "contains 1", e.contains(1.0)))
        }),
        row("bv-c1-eigenvalue-one", "bv,bv_p", "1 is an eigenvalue of C_1 on bv with eigenvector 1", || {
            let one: Vec<Rational> = vec![Rational::from_i64(1); 256];
            let fixed = apply_cesaro(&Rational::from_i64(1), &one) == one;
            let v = membership(&SpaceSpec::Bv, &ones()).verdict;
            Ok(Outcome::new(format!("C_1 1 = 1: {fixed}; 1 in bv: {}", v.outcome), "true; CertifiedYes", fixed && v.is_yes()))
        }),
        row("bv-norm-t0.5", "bv,bv_p", "||C_t|| on bv equals 1", || {
            let e = bv_limit_form_norm(0.5, 4096)?;
            Ok(Outcome::new(e.to_string(), "contains 1", e.contains(&1.0))
                .note("norm |lim x| + sum |x_k - x_(k+1)|; with |x_0| + sum |x_k - x_(k+1)| the value is 2"))
        }),
        row("bv-bv0-norm-t0.5", "bv,bv_p", "||C_t|| on bv_0 equals 1", || {
            let e = bv_limit_form_norm(0.5, 4096)?;
            Ok(Outcome::new(e.to_string(), "contains 1", e.contains(&1.0)).note("on bv_0 the limit vanishes, norm sum |x_k - x_(k+1)|"))
        }),
        row("bv-bv2-norm-finite-t0.5", "bv,bv_p", "C_t acts boundedly on bv_p", || {
            let e = operator_norm(&SpaceSpec::BvP(2.0), &Scalar::Float(0.5), 4096)?;
            Ok(Outcome::new(enc(&e), "finite upper bound", e.upper().is_some_and(f64::is_finite)))
        }),
        row("bv-dphi-conjugate", "bv,bv_p", "T_p D_phi T_p^-1 = A - B", || {
            let c = conjugated_operator(&SpaceSpec::BvP(2.0), &Rational::from_i64(0), 256)?;
            let ok = c == bv_conjugate_a_minus_b::<Rational>(256)?;
            Ok(Outcome::new(if ok { "equal" } else { "different" }, "equal, exact, N = 256", ok))
        }),
        // h_d
        row("hahn-h-exists-t0.5", "h_d", "C_t acts on the Hahn space h for t < 1", || hahn_verdict(Weight::hahn(), 0.5, true)),
        row("hahn-h-x0-member-t0.5", "h_d", "x_t^[0] lies in h", || eigen_in(SpaceSpec::HahnD(Weight::hahn()), 0.5, 0, true)),
        row("hahn-log-c1-exists", "h_d", "C_1 exists in h_d for d = log(n+3)", || hahn_verdict(Weight::Log, 1.0, true)),
        row("hahn-log-c1-no-eigenvalue-one", "h_d", "point spectrum of C_1 on h_d is empty, d = log(n+3)", || {
            let v = membership(&SpaceSpec::HahnD(Weight::Log), &ones()).verdict;
            Ok(Outcome::new(format!("1 in h_d: {}", v.outcome), "CertifiedNo", v.is_no()).note(v.reason))
        }),
        row("hahn-log-c1-dual-eigenvector", "h_d", "0.6 is an eigenvalue of C_1' with eigenvector in l^1", || {
            let z = c1_dual_eigenvector(Complex64::new(0.6, 0.0), 4096)?;
            Ok(Outcome::new(verdict(&z.l1), "CertifiedYes", z.l1.is_yes()).note(z.l1.reason))
        }),
        row("hahn-power1-c1-nonexistence", "h_d", "C_1 does not exist in h_d for d = n+1", || {
            hahn_verdict(Weight::Power(1.0), 1.0, false)
        }),
        row("hahn-geom2-t0.4", "h_d", "C_t exists in h_d, d = 2^n, iff t < 1/2", || hahn_verdict(Weight::Geometric(2.0), 0.4, true)),
        row("hahn-geom2-t0.6", "h_d", "C_t exists in h_d, d = 2^n, iff t < 1/2", || hahn_verdict(Weight::Geometric(2.0), 0.6, false)),
        row("hahn-geom2-threshold", "h_d", "C_t exists in h_d, d = 2^n, iff t < 1/2", || {
            let ts = [0.40, 0.45, 0.49, 0.51, 0.55, 0.60];
            let vs: Vec<Verdict> = ts.par_iter().map(|&t| hahn::existence(&Weight::Geometric(2.0), t).verdict).collect();
            let ok = vs[..3].iter().all(Verdict::is_yes) && vs[3..].iter().all(Verdict::is_no);
            let s: Vec<String> = ts.iter().zip(&vs).map(|(t, v)| format!("{t}:{}", v.outcome)).collect();
            Ok(Outcome::new(s.join(" "), "Yes below 1/2, No above", ok))
        }),
        row("hahn-factorial-t0.5", "h_d", "C_t fails to exist for d = (n+1)!", || {
            let v = hahn::nonexistence_test(&Weight::Factorial, 0.5);
            Ok(Outcome::new(verdict(&v), "CertifiedNo", v.is_no()).note(v.reason))
        }),
        row("hahn-superpower-t0.3", "h_d", "C_t fails to exist for d = (n+1)^(n+1)", || {
            let v = hahn::nonexistence_test(&Weight::SuperPower, 0.3);
            Ok(Outcome::new(verdict(&v), "CertifiedNo", v.is_no()).note(v.reason))
        }),
        row("hahn-log-gamma-t0.9", "h_d", "the gamma criterion gives no obstruction for d = log(n+3)", || {
            let v = hahn::nonexistence_test(&Weight::Log, 0.9);
            Ok(Outcome::new(verdict(&v), "Inconclusive", v.is_inconclusive()))
        }),
        row("hahn-shift-power2", "h_d", "||S^(m+1)|| <= d_m + d_(m+1)/d_0 for decreasing ratios", || {
            let b = hahn::shift_norm_bound(&Weight::Power(2.0), 3, 64);
            Ok(Outcome::new(render_f64(b), "41", b == 41.0))
        }),
        row("hahn-shift-log", "h_d", "||S^(m+1)|| <= d_m + d_(m+1)/d_0 for decreasing ratios", || {
            let b = hahn::shift_norm_bound(&Weight::Log, 0, 64);
            let want = 3f64.ln() + 4f64.ln() / 3f64.ln();
            Ok(Outcome::new(render_f64(b), render_f64(want), (b - want).abs() <= 1e-15 * want))
        }),
        row("hahn-shift-geom2", "h_d", "||S^(m+1)|| <= d_m + sup_k d_(m+k+1)/d_k", || {
            let b = hahn::shift_norm_bound(&Weight::Geometric(2.0), 2, 64);
            Ok(Outcome::new(render_f64(b), "12", b == 12.0))
        }),
        row("hahn-rt-power2-t0.9", "h_d", "sum t^m S^m converges absolutely", || {
            let v = hahn::rt_convergence_check(&Weight::Power(2.0), 0.9, 64);
            Ok(Outcome::new(verdict(&v), "CertifiedYes", v.is_yes()))
        }),
        row("hahn-rt-geom2-t0.6", "h_d", "sum t^m S^m converges iff t < 1/alpha", || {
            let v = hahn::rt_convergence_check(&Weight::Geometric(2.0), 0.6, 64);
            Ok(Outcome::new(verdict(&v), "CertifiedNo", v.is_no()))
        }),
        row("hahn-rt-geom2-t0.4", "h_d", "sum t^m S^m converges iff t < 1/alpha", || {
            let v = hahn::rt_convergence_check(&Weight::Geometric(2.0), 0.4, 64);
            Ok(Outcome::new(verdict(&v), "CertifiedYes", v.is_yes()))
        }),
        row("hahn-ratios-power2", "h_d", "d = (n+1)^r has decreasing ratios tending to 1", || {
            let v = hahn::ratio_conditions_check(&Weight::Power(2.0), 64, 4096);
            Ok(Outcome::new(verdict(&v), "CertifiedYes", v.is_yes()))
        }),
        row("hahn-ratios-log", "h_d", "d = log(n+3) has decreasing ratios tending to 1", || {
            let v = hahn::ratio_conditions_check(&Weight::Log, 64, 4096);
            Ok(Outcome::new(verdict(&v), "CertifiedYes", v.is_yes()))
        }),
        row("hahn-ratios-geom2", "h_d", "d = 2^n ratios do not decrease to 1", || {
            let v = hahn::ratio_conditions_check(&Weight::Geometric(2.0), 64, 4096);
            Ok(Outcome::new(verdict(&v), "CertifiedNo", v.is_no()))
        }),
        row("hahn-eigenvector-log-t0.5", "h_d", "x_t^[m] lies in h_d under the ratio hypotheses", || {
            eigen_in(SpaceSpec::HahnD(Weight::Log), 0.5, 0, true)
        }),
        row("hahn-eigenvector-geom2-t0.6", "h_d", "x_t^[0] is not in h_d for d = 2^n, t > 1/2", || {
            eigen_in(SpaceSpec::HahnD(Weight::Geometric(2.0)), 0.6, 0, false)
        }),
        row("hahn-conjugation-log-t0.5", "h_d", "column sums of the conjugated section match the coordinates c_m", || {
            let w = Weight::Log;
            let c = hahn::coordinates(&w, 0.5, 16, 4096);
            let mut worst = 0.0f64;
            for (m, e) in c.iter().enumerate() {
                let s = hahn::conjugated_column_sum(&w, 0.5, m, 4096)?;
                worst = worst.max((s - e.lower).abs().max(e.upper.map_or(0.0, |u| s - u)));
                if s > e.upper.unwrap_or(f64::INFINITY) * (1.0 + 1e-9) || s < e.lower * (1.0 - 1e-9) - 1e-9 {
                    return Ok(Outcome::new(format!("m = {m}: {s} outside [{}, {:?}]", e.lower, e.upper), "within tail bounds", false));
                }
            }
            Ok(Outcome::new(format!("max deviation {}", render_f64(worst)), "within tail bounds, m <= 16, N = 4096", true))
        }),
        // eigenvectors
        row("eigen-pairs-t0.75", "eigen", "C_t x_t^[m] = x_t^[m]/(m+1)", || {
            let v = (0..=7).map(|m| verify_eigenpair(&q(3, 4), m, 200)).find(|v| !v.is_yes()).unwrap_or_else(|| Verdict::yes("m <= 7"));
            Ok(Outcome::new(verdict(&v), "exact, m <= 7, N = 200", v.is_yes()))
        }),
        row("eigen-dual-pairs-t2/3", "eigen", "C_t' z_t^[n] = z_t^[n]/(n+1)", || {
            let v = (0..=4).map(|n| verify_dual_eigenpair(&q(2, 3), n, 16)).find(|v| !v.is_yes()).unwrap_or_else(|| Verdict::yes("n <= 4"));
            Ok(Outcome::new(verdict(&v), "exact, n <= 4, N = 16", v.is_yes()))
        }),
        row("eigen-biorthogonality-t1/2", "eigen", "<x_t^[m], z_t^[n]> = delta_nm for n <= m", || {
            let t = q(1, 2);
            let ok = (0..=12).all(|m| (0..=m).all(|n| biorthogonality(&t, m, n) == if n == m { q(1, 1) } else { q(0, 1) }));
            Ok(Outcome::new(if ok { "delta_nm" } else { "mismatch" }, "exact, n <= m <= 12", ok))
        }),
        // out of scope
        skip("oos-supercyclicity", "out-of-scope", "C_t is not supercyclic", "supercyclicity is a statement about orbits in infinite dimensions; out of scope"),
        skip("oos-compactness", "out-of-scope", "C_t is compact for t < 1 and not compact for t = 1", "compactness as such is not decidable from finite sections; out of scope"),
        skip("oos-spectrum-sets", "out-of-scope", "spectra equal Lambda_0 or the closed disks as sets", "exact spectra as sets are checked only through finite-section shadows"),
        skip("oos-c1-not-mean-ergodic", "out-of-scope", "C_1 is not mean ergodic on the classical spaces", "mean ergodicity failure is a statement about strong limits; out of scope"),
    ]
}

fn matches(c: &Claim, filter: Option<&str>) -> bool {
    match filter {
        None | Some("") => true,
        Some(f) => {
            let f = f.to_ascii_lowercase();
            c.id.starts_with(&f) || c.topic.eq_ignore_ascii_case(&f)
        }
    }
}

/// Evaluates the claims whose id starts with `filter` (or whose topic equals it), sorted by id.
pub fn run_claims(filter: Option<&str>) -> Vec<ClaimRow> {
    let claims: Vec<Claim> = registry().into_iter().filter(|c| matches(c, filter)).collect();
    let mut rows: Vec<ClaimRow> = claims
        .par_iter()
        .map(|c| {
            let base = |computed: String, expected: String, status: Status, note: String| ClaimRow {
                claim_id: c.id.to_string(),
                topic: c.topic.to_string(),
                statement: c.statement.to_string(),
                computed,
                expected,
                status,
                note,
            };
            match c.check {
                None => base(String::new(), String::new(), Status::NotMachineCheckable, c.reason.to_string()),
                Some(f) => match f() {
                    Ok(o) => base(o.computed, o.expected, if o.pass { Status::Pass } else { Status::Fail }, o.note),
                    Err(e) => base(format!("error: {e}"), String::new(), Status::Fail, String::new()),
                },
            }
        })
        .collect();
    rows.sort_by(|a, b| a.claim_id.cmp(&b.claim_id));
    rows
}

/// Topics every full run must cover.
pub const TOPICS: [&str; 8] = ["l^p", "c0,c", "cs", "N^p", "ces_p", "d_p", "bv,bv_p", "h_d"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_unique() {
        let mut ids: Vec<&str> = registry().iter().map(|c| c.id).collect();
        let n = ids.len();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }

    #[test]
    fn filters() {
        let np = run_claims(Some("np"));
        assert!(!np.is_empty() && np.iter().all(|r| r.status == Status::NotMachineCheckable));
        assert!(np.iter().all(|r| r.note.contains("N^p norm not defined in paper")));
        let hahn = run_claims(Some("hahn"));
        assert!(hahn.len() >= 10);
        for r in &hahn {
            assert_eq!(r.status, Status::Pass, "{r:?}");
        }
    }
}
