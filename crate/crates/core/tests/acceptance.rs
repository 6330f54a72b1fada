//! Acceptance criteria 1-9, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use ceslab::claims::{run_claims, Status, TOPICS};
use ceslab::eigen::{biorthogonality, verify_dual_eigenpair, verify_eigenpair};
use ceslab::hahn;
use ceslab::operators::{bv_conjugate_a_minus_b, cesaro_matrix, conjugated_operator, factorization_check, Matrix};
use ceslab::spectral::{
    ergodic_distances, finite_section_spectrum, l1_norm_closed_form, operator_norm, power_norms, resolvent_probe,
    NormMethod, ProjectionP,
};
use ceslab::{Rational, Real, Scalar, SpaceSpec, Weight};
use num_complex::Complex64;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_i64(n) / Rational::from_i64(d)
}

fn grid() -> Vec<Rational> {
    vec![q(0, 1), q(1, 4), q(1, 2), q(3, 4)]
}

struct Report {
    ok: bool,
    detail: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Report { ok: true, detail: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.detail.push(what);
        } else {
            self.ok = false;
            self.detail.push(format!("FAILED {what}"));
        }
    }
}

fn eigen_suite() -> Report {
    let mut r = Report::new();
    let mut bad = Vec::new();
    for t in grid() {
        for m in 0..=20 {
            if !verify_eigenpair(&t, m, 256).is_yes() {
                bad.push(format!("eigenpair t={t} m={m}"));
            }
            if !verify_dual_eigenpair(&t, m, 256).is_yes() {
                bad.push(format!("dual t={t} n={m}"));
            }
        }
    }
    r.check(bad.is_empty(), format!("168 exact eigenpair checks {:?}", bad));
    r
}

fn norm_formulas() -> Report {
    let mut r = Report::new();
    for t in [0.25, 0.5, 0.75] {
        let v = l1_norm_closed_form(t);
        let e = operator_norm(&SpaceSpec::Lp(1.0), &Scalar::Float(t), 4096).unwrap();
        r.check(e.contains(v) && e.width().unwrap() <= 1e-6, format!("l1 t={t} width {:.1e}", e.width().unwrap()));
        let e = operator_norm(&SpaceSpec::Cs, &Scalar::Float(t), 4096).unwrap();
        r.check(e.contains(v) && e.width().unwrap() <= 1e-3, format!("cs t={t} width {:.1e}", e.width().unwrap()));
    }
    let one = Scalar::Exact(q(1, 1));
    for t in [q(0, 1), q(3, 10), q(9, 10)] {
        for space in [SpaceSpec::Lp(f64::INFINITY), SpaceSpec::C0, SpaceSpec::C] {
            let e = operator_norm(&space, &Scalar::Exact(t.clone()), 1024).unwrap();
            let exact = e.enclosure.lower == one && e.enclosure.upper.as_ref() == Some(&one) && e.method == NormMethod::RowSup;
            r.check(exact, format!("{space} t={t} = 1"));
        }
    }
    let e = operator_norm(&SpaceSpec::CesP(2.0), &Scalar::Float(0.5), 4096).unwrap();
    r.check(e.upper().unwrap() <= 2.0 && e.lower() <= e.upper().unwrap(), format!("ces2 t=0.5 upper {}", e.upper().unwrap()));
    r
}

fn hardy() -> Report {
    let mut r = Report::new();
    let vals: Vec<f64> = (5..=10)
        .map(|k| operator_norm(&SpaceSpec::Lp(2.0), &Scalar::Float(1.0), 1 << (2 * k)).unwrap().lower())
        .collect();
    r.check(vals.windows(2).all(|w| w[0] <= w[1]), "monotone along N = 2^10..2^20");
    r.check(vals.iter().all(|v| *v <= 2.0 + 1e-9), "<= 2 + 1e-9");
    r.check(vals[5] >= 1.75, format!("N = 2^20 gives {:.6}", vals[5]));
    r
}

fn spectrum() -> Report {
    let mut r = Report::new();
    for t in grid() {
        let s = finite_section_spectrum(&Scalar::Exact(t.clone()), 256).unwrap();
        let ok = s.eigenvalues.iter().enumerate().all(|(k, v)| *v == Scalar::Exact(q(1, k as i64 + 1)));
        r.check(ok && s.eigenvalues.len() == 256, format!("t={t} section eigenvalues 1/(n+1)"));
    }
    let ns: Vec<usize> = (5..=8).map(|k| 1 << (2 * k)).collect();
    let inside: Vec<f64> = ns.iter().map(|&n| resolvent_probe(Complex64::new(1.0, 0.5), 1.0, n).unwrap()).collect();
    r.check(inside.windows(2).all(|w| w[1] > w[0]), format!("1+0.5i strictly increasing {inside:.4?}"));
    let outside: Vec<f64> = ns.iter().map(|&n| resolvent_probe(Complex64::new(2.5, 0.0), 1.0, n).unwrap()).collect();
    let lo = outside.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = outside.iter().cloned().fold(0.0, f64::max);
    r.check((hi - lo) / lo < 0.05, format!("2.5 varies by {:.1}% {outside:.4?}", 100.0 * (hi - lo) / lo));
    r
}

/// Dense `||C^n - P||_1` and `||C_[n] - P||_1` on an `N x N` section.
fn dense_ergodic(t: f64, n: usize, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let c = cesaro_matrix(&t, n).unwrap();
    let mut p = Matrix::<f64>::zeros(n);
    for i in 0..n {
        p.set(i, 0, t.powi(i as i32));
    }
    let mut pow = Matrix::<f64>::identity(n);
    let mut acc = Matrix::<f64>::zeros(n);
    let (mut powers, mut means) = (Vec::new(), Vec::new());
    for m in 1..=n_max {
        pow = pow.mul(&c);
        acc = acc.sub(&pow.scale(&-1.0));
        powers.push(pow.sub(&p).norm_1());
        means.push(acc.scale(&(1.0 / m as f64)).sub(&p).norm_1());
    }
    (powers, means)
}

fn ergodic() -> Report {
    let mut r = Report::new();
    let (dp, dm) = dense_ergodic(0.5, 128, 64);
    let small = ergodic_distances(&SpaceSpec::Lp(1.0), 0.5, 64, 128).unwrap();
    let agree = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 + 1e-9 * y.abs());
    r.check(agree(&small.powers[..40], &dp[..40]) && agree(&small.means, &dm), "matches dense oracle at N = 128");
    let pn = power_norms(&SpaceSpec::Lp(1.0), &Scalar::Float(0.5), 64, 1024).unwrap();
    let sup = pn.iter().filter_map(|e| e.upper()).fold(0.0, f64::max);
    r.check(sup <= 4.0, format!("sup ||C^n|| = {sup:.6}"));
    let e = ergodic_distances(&SpaceSpec::Lp(1.0), 0.5, 256, 1024).unwrap();
    let ratios: Vec<f64> = (20..60).map(|n| e.powers[n] / e.powers[n - 1]).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    r.check(lo >= 0.4 && hi <= 0.6, format!("ratios in [{lo:.4}, {hi:.4}]"));
    r.check(e.means[255] <= 0.06, format!("||C_[256] - P|| = {:.5}", e.means[255]));
    let v = ProjectionP::new(&q(1, 2)).unwrap().identities(256).unwrap();
    r.check(v.is_yes(), "P^2 = P, PC = CP = P exactly");
    r
}

fn hahn_existence() -> Report {
    let mut r = Report::new();
    let v = hahn::existence(&Weight::Log, 1.0).verdict;
    r.check(v.is_yes(), format!("log(n+3), t=1: {}", v.outcome));
    let v = hahn::existence(&Weight::Power(1.0), 1.0).verdict;
    r.check(v.is_no(), format!("n+1, t=1: {}", v.outcome));
    for t in [0.40, 0.45, 0.49] {
        r.check(hahn::existence(&Weight::Geometric(2.0), t).verdict.is_yes(), format!("2^n t={t} yes"));
    }
    for t in [0.51, 0.55, 0.60] {
        r.check(hahn::existence(&Weight::Geometric(2.0), t).verdict.is_no(), format!("2^n t={t} no"));
    }
    let v = hahn::nonexistence_test(&Weight::Factorial, 0.5);
    r.check(v.is_no() && v.reason.contains("not in c_0"), format!("(n+1)!, t=1/2: {}", v.outcome));
    r
}

fn conjugation() -> Report {
    let mut r = Report::new();
    for t in grid() {
        r.check(factorization_check(&t, 256).is_yes(), format!("D_phi R_t = C_t, t={t}"));
    }
    let c = conjugated_operator(&SpaceSpec::BvP(2.0), &q(0, 1), 256).unwrap();
    r.check(c == bv_conjugate_a_minus_b::<Rational>(256).unwrap(), "T_p D_phi T_p^-1 = A - B");
    let mut worst = 0.0f64;
    let mut ok = true;
    for (w, t) in [(Weight::Log, 0.5), (Weight::Power(1.0), 0.3), (Weight::Power(2.0), 0.9), (Weight::Log, 1.0)] {
        let coords = hahn::coordinates(&w, t, 32, 4096);
        for (m, e) in coords.iter().enumerate() {
            let s = hahn::conjugated_column_sum(&w, t, m, 4096).unwrap();
            let u = e.upper.unwrap_or(f64::INFINITY);
            ok &= s >= e.lower * (1.0 - 1e-9) - 1e-12 && s <= u * (1.0 + 1e-9);
            worst = worst.max((s - e.lower).abs() / e.lower);
        }
    }
    r.check(ok, format!("h_d column sums within tail bounds, max rel gap {worst:.1e}"));
    r
}

fn biorth() -> Report {
    let mut r = Report::new();
    let mut ok = true;
    for t in grid() {
        for m in 0..=12 {
            for n in 0..=m {
                ok &= biorthogonality(&t, m, n) == if n == m { q(1, 1) } else { q(0, 1) };
            }
        }
    }
    r.check(ok, "delta_nm for n <= m <= 12");
    r
}

fn claims_table() -> Report {
    let mut r = Report::new();
    let rows = run_claims(None);
    r.check(rows.len() >= 40, format!("{} rows", rows.len()));
    let fails: Vec<&str> = rows.iter().filter(|x| x.status == Status::Fail).map(|x| x.claim_id.as_str()).collect();
    r.check(fails.is_empty(), format!("failures {fails:?}"));
    for topic in TOPICS {
        r.check(rows.iter().any(|x| x.topic == topic), format!("topic {topic}"));
    }
    for key in ["supercyclic", "N^p", "compact"] {
        let ok = rows.iter().any(|x| {
            x.status == Status::NotMachineCheckable && !x.note.is_empty() && (x.statement.contains(key) || x.note.contains(key))
        });
        r.check(ok, format!("out of scope: {key}"));
    }
    let run = || {
        let mut out = Vec::new();
        let code = ceslab::cli::run(["ceslab", "claims"], &mut out, &mut std::io::sink());
        (code, out)
    };
    let (a, b) = (run(), run());
    r.check(a.0 == 0 && a == b, "byte-identical CLI runs, exit 0");
    r
}

fn main() {
    let criteria: [(&str, fn() -> Report, u64); 9] = [
        ("exact eigen-suite", eigen_suite, 10),
        ("norm formulas", norm_formulas, 30),
        ("Hardy limit", hardy, 60),
        ("spectrum and pseudospectrum", spectrum, 60),
        ("ergodic suite", ergodic, 30),
        ("Hahn existence", hahn_existence, 60),
        ("conjugation identities", conjugation, 30),
        ("biorthogonality", biorth, 5),
        ("claims table", claims_table, 600),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut rep = f();
        let took = start.elapsed();
        rep.check(took <= Duration::from_secs(*limit), format!("{:.2} s (limit {limit} s)", took.as_secs_f64()));
        let verdict = if rep.ok { "PASS" } else { "FAIL" };
        if !rep.ok {
            failed += 1;
        }
        println!("criterion {}: {verdict} {name}: {}", i + 1, rep.detail.join("; "));
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
