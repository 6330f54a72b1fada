//! Catalog of BK sequence spaces: norms with certified enclosures, membership and isometries.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Serialize, Serializer};

use crate::error::{CeslabError, Result};
use crate::numeric::{Enclosure, Minorant, Rational, Real, SeqGenerator, TailCertificate, Verdict};

/// Weight sequence `1 <= d_0 <= d_1 <= ...` of a generalized Hahn space.
#[derive(Clone)]
pub enum Weight {
    /// `d_n = (n+1)^r`.
    Power(f64),
    /// `d_n = log(n+3)`.
    Log,
    /// `d_n = alpha^n`.
    Geometric(f64),
    /// `d_n = (n+1)!`.
    Factorial,
    /// `d_n = (n+1)^(n+1)`.
    SuperPower,
    Custom(CustomWeight),
}

/// User-supplied weight with a monotonicity promise.
#[derive(Clone)]
pub struct CustomWeight {
    pub label: String,
    pub rule: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl Weight {
    pub fn custom(label: impl Into<String>, rule: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Weight::Custom(CustomWeight { label: label.into(), rule: Arc::new(rule) })
    }

    /// The classical Hahn weight `d_n = n+1`.
    pub fn hahn() -> Self {
        Weight::Power(1.0)
    }

    pub fn label(&self) -> String {
        match self {
            Weight::Power(r) => format!("power:{r}"),
            Weight::Log => "log".into(),
            Weight::Geometric(a) => format!("geom:{a}"),
            Weight::Factorial => "factorial".into(),
            Weight::SuperPower => "superpower".into(),
            Weight::Custom(c) => format!("custom:{}", c.label),
        }
    }

    /// `ln d_n`, finite even when `d_n` overflows.
    pub fn ln_value(&self, n: usize) -> f64 {
        let x = n as f64;
        match self {
            Weight::Power(r) => r * (x + 1.0).ln(),
            Weight::Log => (x + 3.0).ln().ln(),
            Weight::Geometric(a) => x * a.ln(),
            Weight::Factorial => crate::numeric::ln_factorial(n + 1),
            Weight::SuperPower => (x + 1.0) * (x + 1.0).ln(),
            Weight::Custom(c) => (c.rule)(n).ln(),
        }
    }

    pub fn value(&self, n: usize) -> f64 {
        match self {
            Weight::Power(r) => (n as f64 + 1.0).powf(*r),
            Weight::Log => (n as f64 + 3.0).ln(),
            Weight::Geometric(a) => a.powf(n as f64),
            Weight::Custom(c) => (c.rule)(n),
            _ => self.ln_value(n).exp(),
        }
    }

    /// Exact rational weight where the family admits one.
    pub fn exact_value(&self, n: usize) -> Option<Rational> {
        match self {
            Weight::Power(r) if r.fract() == 0.0 && *r >= 0.0 => {
                Some(Rational::from_usize(n + 1).powu(*r as usize))
            }
            Weight::Geometric(a) => Rational::from_float(*a).map(|q| q.powu(n)),
            Weight::Factorial => {
                let mut acc = BigInt::one();
                for k in 2..=(n + 1) {
                    acc *= BigInt::from(k);
                }
                Some(Rational::from_integer(acc))
            }
            Weight::SuperPower => Some(Rational::from_usize(n + 1).powu(n + 1)),
            Weight::Custom(c) => Rational::from_float((c.rule)(n)),
            _ => None,
        }
    }

    pub fn value_t<T: Real>(&self, n: usize) -> Result<T> {
        if T::EXACT {
            let q = self.exact_value(n).ok_or_else(|| {
                CeslabError::ExactUnsupported(format!("weight {} has irrational values", self.label()))
            })?;
            Ok(T::from_f64(0.0) + cast_rational::<T>(q))
        } else {
            Ok(T::from_f64(self.value(n)))
        }
    }

    /// `d_{n+1} / d_n`.
    pub fn ratio(&self, n: usize) -> f64 {
        match self {
            Weight::Power(r) => ((n as f64 + 2.0) / (n as f64 + 1.0)).powf(*r),
            Weight::Log => (n as f64 + 4.0).ln() / (n as f64 + 3.0).ln(),
            Weight::Geometric(a) => *a,
            Weight::Factorial => n as f64 + 2.0,
            _ => (self.ln_value(n + 1) - self.ln_value(n)).exp(),
        }
    }

    /// Upper bound for `sup_{k >= n} d_{k+1}/d_k`, when the family controls it.
    pub fn sup_ratio_from(&self, n: usize) -> Option<f64> {
        match self {
            Weight::Power(_) | Weight::Log | Weight::Geometric(_) => Some(self.ratio(n) * (1.0 + 1e-14)),
            _ => None,
        }
    }

    /// Lower bound for `inf_{k >= n} d_{k+1}/d_k`.
    pub fn inf_ratio_from(&self, n: usize) -> Option<f64> {
        match self {
            Weight::Power(_) | Weight::Log => Some(1.0),
            Weight::Geometric(a) => Some(*a),
            Weight::Factorial | Weight::SuperPower => Some(n as f64 + 2.0),
            Weight::Custom(_) => None,
        }
    }

    /// Analytic hook: each sequence `(d_{m+k+1}/d_k)_k` is nonincreasing.
    pub fn ratios_decreasing(&self) -> Option<bool> {
        match self {
            Weight::Power(_) | Weight::Log | Weight::Geometric(_) => Some(true),
            Weight::Factorial | Weight::SuperPower => Some(false),
            Weight::Custom(_) => None,
        }
    }

    /// Analytic hook: `d_{k+1}/d_k -> 1`.
    pub fn ratio_limit_is_one(&self) -> Option<bool> {
        match self {
            Weight::Power(_) | Weight::Log => Some(true),
            Weight::Geometric(_) | Weight::Factorial | Weight::SuperPower => Some(false),
            Weight::Custom(_) => None,
        }
    }

    /// Checks `d_0 >= 1`, parameter ranges and monotonicity on the first `10^4` terms.
    pub fn validate(&self) -> Result<()> {
        match self {
            Weight::Power(r) if !(*r > 0.0) => {
                return Err(CeslabError::ParameterOutOfRange(format!("power weight needs r > 0, got {r}")))
            }
            Weight::Geometric(a) if !(*a > 1.0) => {
                return Err(CeslabError::ParameterOutOfRange(format!("geometric weight needs alpha > 1, got {a}")))
            }
            _ => {}
        }
        let d0 = self.value(0);
        if !(d0 >= 1.0) {
            return Err(CeslabError::WeightViolation { index: 0, value: d0 });
        }
        if let Weight::Custom(_) = self {
            let mut prev = d0;
            for n in 1..10_000 {
                let d = self.value(n);
                if !(d >= prev) {
                    return Err(CeslabError::WeightViolation { index: n, value: d });
                }
                prev = d;
            }
        }
        Ok(())
    }
}

fn cast_rational<T: Real>(q: Rational) -> T {
    let any: Box<dyn std::any::Any> = Box::new(q);
    match any.downcast::<T>() {
        Ok(v) => *v,
        Err(any) => T::from_f64(crate::numeric::rational_to_f64(&any.downcast::<Rational>().expect("rational"))),
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.label())
    }
}

impl PartialEq for Weight {
    fn eq(&self, other: &Weight) -> bool {
        self.label() == other.label()
    }
}

impl FromStr for Weight {
    type Err = CeslabError;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| CeslabError::Parse(format!("weight '{s}' needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| CeslabError::Parse(format!("weight '{s}': {e}")))
        };
        let w = match parts[0] {
            "power" | "pow" => Weight::Power(num(1)?),
            "log" => Weight::Log,
            "geom" | "geometric" => Weight::Geometric(num(1)?),
            "factorial" | "fact" => Weight::Factorial,
            "superpower" => Weight::SuperPower,
            "hahn" => Weight::hahn(),
            other => return Err(CeslabError::Parse(format!("unknown weight '{other}'"))),
        };
        w.validate()?;
        Ok(w)
    }
}

/// Supported sequence spaces. `p = f64::INFINITY` selects the sup-type member of a family.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceSpec {
    Lp(f64),
    C0,
    C,
    Cs,
    CesP(f64),
    Ces0,
    Dp(f64),
    Bv,
    Bv0,
    BvP(f64),
    HahnD(Weight),
}

impl SpaceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CeslabError::ParameterOutOfRange(msg));
        match self {
            SpaceSpec::Lp(p) if !(*p >= 1.0) => bad(format!("l^p needs 1 <= p <= inf, got {p}")),
            SpaceSpec::CesP(p) if !(*p > 1.0) => bad(format!("ces_p needs 1 < p <= inf, got {p}")),
            SpaceSpec::Dp(p) if !(*p >= 1.0 && p.is_finite()) => bad(format!("d_p needs 1 <= p < inf, got {p}")),
            SpaceSpec::BvP(p) if !(*p > 1.0 && p.is_finite()) => bad(format!("bv_p needs 1 < p < inf, got {p}")),
            SpaceSpec::HahnD(w) => w.validate(),
            _ => Ok(()),
        }
    }

    /// Solid spaces carry a Riesz norm: `|x| <= |y|` implies `||x|| <= ||y||`.
    pub fn is_solid(&self) -> bool {
        matches!(
            self,
            SpaceSpec::Lp(_) | SpaceSpec::C0 | SpaceSpec::C | SpaceSpec::CesP(_) | SpaceSpec::Ces0 | SpaceSpec::Dp(_)
        )
    }

    pub fn name(&self) -> String {
        let p = |p: &f64| if p.is_infinite() { "inf".to_string() } else { format!("{p}") };
        match self {
            SpaceSpec::Lp(q) => format!("l{}", p(q)),
            SpaceSpec::C0 => "c0".into(),
            SpaceSpec::C => "c".into(),
            SpaceSpec::Cs => "cs".into(),
            SpaceSpec::CesP(q) => format!("ces{}", p(q)),
            SpaceSpec::Ces0 => "ces0".into(),
            SpaceSpec::Dp(q) => format!("d{}", p(q)),
            SpaceSpec::Bv => "bv".into(),
            SpaceSpec::Bv0 => "bv0".into(),
            SpaceSpec::BvP(q) => format!("bv{}", p(q)),
            SpaceSpec::HahnD(w) => format!("hd:{}", w.label()),
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for SpaceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// Parses names such as `l1`, `l2.5`, `linf`, `c0`, `c`, `cs`, `ces2`, `cesinf`, `ces0`,
/// `d1`, `bv`, `bv0`, `bv2`, `h`, `hd:log`, `hd:power:2`, `hd:geom:2`, `hd:factorial`.
impl FromStr for SpaceSpec {
    type Err = CeslabError;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let param = |rest: &str| -> Result<f64> {
            let rest = rest.trim_start_matches([':', '_']);
            if rest == "inf" || rest == "infinity" {
                Ok(f64::INFINITY)
            } else {
                rest.parse::<f64>().map_err(|_| CeslabError::UnsupportedSpace(s.clone()))
            }
        };
        let spec = if let Some(w) = s.strip_prefix("hd:") {
            SpaceSpec::HahnD(w.parse()?)
        } else {
            match s.as_str() {
                "h" | "hahn" => SpaceSpec::HahnD(Weight::hahn()),
                "c0" => SpaceSpec::C0,
                "c" => SpaceSpec::C,
                "cs" => SpaceSpec::Cs,
                "ces0" => SpaceSpec::Ces0,
                "bv" => SpaceSpec::Bv,
                "bv0" => SpaceSpec::Bv0,
                _ => {
                    if let Some(rest) = s.strip_prefix("ces") {
                        SpaceSpec::CesP(param(rest)?)
                    } else if let Some(rest) = s.strip_prefix("bv") {
                        SpaceSpec::BvP(param(rest)?)
                    } else if let Some(rest) = s.strip_prefix('l') {
                        SpaceSpec::Lp(param(rest)?)
                    } else if let Some(rest) = s.strip_prefix('d') {
                        SpaceSpec::Dp(param(rest)?)
                    } else {
                        return Err(CeslabError::UnsupportedSpace(s.clone()));
                    }
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Membership verdict with the norm enclosure or divergence bound that certifies it.
#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub verdict: Verdict,
    pub norm: Option<Enclosure<f64>>,
    pub divergence: Option<f64>,
}

impl Membership {
    fn yes(norm: Enclosure<f64>, reason: impl Into<String>) -> Self {
        let b = norm.upper_or_inf();
        Membership { verdict: Verdict::yes(reason).with_bound(b), norm: Some(norm), divergence: None }
    }

    fn no(divergence: f64, reason: impl Into<String>) -> Self {
        Membership { verdict: Verdict::no(reason).with_bound(divergence), norm: None, divergence: Some(divergence) }
    }

    fn inconclusive(reason: impl Into<String>) -> Self {
        Membership { verdict: Verdict::inconclusive(reason), norm: None, divergence: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IsometryKind {
    PartialSum,
    DifferenceTp,
    HahnW,
    Identity,
}

/// Norm-preserving coordinate map from `space` onto (a subspace of) `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub kind: IsometryKind,
    pub space: SpaceSpec,
    pub target: SpaceSpec,
}

impl Isometry {
    /// Image of a finitely supported `x`; the output has one extra coordinate so nothing is cut off.
    pub fn forward<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let n = x.len();
        let at = |k: usize| if k < n { x[k].clone() } else { T::zero() };
        Ok(match self.kind {
            IsometryKind::Identity => (0..=n).map(at).collect(),
            IsometryKind::PartialSum => {
                let mut s = T::zero();
                (0..=n).map(|k| { s = s.clone() + at(k); s.clone() }).collect()
            }
            IsometryKind::DifferenceTp => {
                (0..=n).map(|k| if k == 0 { at(0) } else { at(k) - at(k - 1) }).collect()
            }
            IsometryKind::HahnW => {
                let w = self.weight();
                let mut out = Vec::with_capacity(n + 1);
                for k in 0..=n {
                    out.push(w.value_t::<T>(k)? * (at(k + 1) - at(k)));
                }
                out
            }
        })
    }

    /// Preimage of a finitely supported `y`, same length as `y`.
    pub fn inverse<T: Real>(&self, y: &[T]) -> Result<Vec<T>> {
        let n = y.len();
        Ok(match self.kind {
            IsometryKind::Identity => y.to_vec(),
            IsometryKind::PartialSum => {
                (0..n).map(|k| if k == 0 { y[0].clone() } else { y[k].clone() - y[k - 1].clone() }).collect()
            }
            IsometryKind::DifferenceTp => {
                let mut s = T::zero();
                y.iter().map(|v| { s = s.clone() + v.clone(); s.clone() }).collect()
            }
            IsometryKind::HahnW => {
                let w = self.weight();
                let mut out = vec![T::zero(); n];
                let mut acc = T::zero();
                for k in (0..n).rev() {
                    acc = acc - y[k].clone() / w.value_t::<T>(k)?;
                    out[k] = acc.clone();
                }
                out
            }
        })
    }

    /// Norm of a finitely supported vector in the target space.
    pub fn target_norm_pow<T: Real>(&self, y: &[T]) -> Result<(T, f64)> {
        let g = SeqGenerator::finite("image", y.to_vec());
        let (e, q) = norm_pow(&self.target, &g, y.len())?;
        Ok((e.lower, q))
    }

    fn weight(&self) -> &Weight {
        match &self.space {
            SpaceSpec::HahnD(w) => w,
            _ => unreachable!("HahnW isometry always carries a Hahn space"),
        }
    }
}

/// Isometry carrying `space` onto a standard space; `Identity` for spaces that are already standard.
pub fn conjugation(space: &SpaceSpec) -> Isometry {
    let (kind, target) = match space {
        SpaceSpec::Cs => (IsometryKind::PartialSum, SpaceSpec::C),
        SpaceSpec::BvP(p) => (IsometryKind::DifferenceTp, SpaceSpec::Lp(*p)),
        SpaceSpec::Bv | SpaceSpec::Bv0 => (IsometryKind::DifferenceTp, SpaceSpec::Lp(1.0)),
        SpaceSpec::HahnD(_) => (IsometryKind::HahnW, SpaceSpec::Lp(1.0)),
        other => (IsometryKind::Identity, other.clone()),
    };
    Isometry { kind, space: space.clone(), target }
}

fn powp<T: Real>(v: &T, p: f64) -> Result<T> {
    if p.fract() == 0.0 && p >= 0.0 && p < 1e6 {
        Ok(v.powu(p as usize))
    } else if T::EXACT {
        Err(CeslabError::ExactUnsupported(format!("non-integer exponent {p}")))
    } else {
        Ok(T::from_f64(v.to_f64().powf(p)))
    }
}

/// `sum_{n >= N} (n+1)^{-p}` upper bound.
fn zeta_tail<T: Real>(n: usize, p: f64) -> Result<T> {
    let base = T::from_usize(n + 1);
    let first = T::one() / powp(&base, p)?;
    let integral = if T::EXACT {
        T::one() / (T::from_f64(p - 1.0) * powp(&base, p - 1.0)?)
    } else {
        T::from_f64((n as f64 + 1.0).powf(1.0 - p) / (p - 1.0))
    };
    Ok(first + integral)
}

/// Bound on `sum_{n >= N} |x_n|^p`.
fn pow_tail<T: Real>(x: &SeqGenerator<T>, n: usize, p: f64) -> Result<Option<T>> {
    if x.support_end().is_some_and(|e| e <= n) {
        return Ok(Some(T::zero()));
    }
    let x_n = x.term(n);
    let mut best: Option<T> = None;
    let offer = |best: &mut Option<T>, v: T| {
        *best = Some(match best.take() {
            Some(b) => T::min_of(b, v),
            None => v,
        })
    };
    for c in &x.certificates {
        match c {
            TailCertificate::Geometric { ratio, start } if *start <= n && *ratio < T::one() => {
                let rp = powp(ratio, p)?;
                offer(&mut best, powp(&x_n.abs(), p)? / (T::one() - rp));
            }
            TailCertificate::PowerLaw { start, constant, exponent } if *start <= n => {
                let sp = *exponent as f64 * p;
                if sp > 1.0 && (!T::EXACT || sp.fract() == 0.0) {
                    offer(&mut best, powp(&constant.abs(), p)? * zeta_tail::<T>(n, sp)?);
                }
            }
            _ => {}
        }
    }
    if best.is_none() {
        if let (Some(a), Some(s)) = (x.abs_tail(n), x.sup_tail(n)) {
            offer(&mut best, powp(&s, p - 1.0)? * a);
        }
    }
    Ok(best)
}

/// Bound on `sum_{n >= N} (sup_{k >= n} |x_k|)^p`.
fn hat_tail<T: Real>(x: &SeqGenerator<T>, n: usize, p: f64) -> Result<Option<T>> {
    if x.support_end().is_some_and(|e| e <= n) {
        return Ok(Some(T::zero()));
    }
    let x_n = x.term(n);
    for c in &x.certificates {
        match c {
            TailCertificate::Geometric { ratio, start } if *start <= n && *ratio < T::one() => {
                return Ok(Some(powp(&x_n.abs(), p)? / (T::one() - powp(ratio, p)?)));
            }
            TailCertificate::PowerLaw { start, constant, exponent } if *start <= n => {
                let sp = *exponent as f64 * p;
                if sp > 1.0 && (!T::EXACT || sp.fract() == 0.0) {
                    return Ok(Some(powp(&constant.abs(), p)? * zeta_tail::<T>(n, sp)?));
                }
            }
            _ => {}
        }
    }
    Ok(None)
}

/// Bound on `sum_{k >= N} |x_{k+1} - x_k|`.
fn variation_tail<T: Real>(x: &SeqGenerator<T>, n: usize) -> Option<T> {
    if x.support_end().is_some_and(|e| e <= n)
        || x.certificates.iter().any(|c| matches!(c, TailCertificate::EventuallyConstant { start, .. } if *start <= n))
    {
        return Some(T::zero());
    }
    let x_n = x.term(n);
    let monotone = x.certificates.iter().any(|c| {
        matches!(c, TailCertificate::MonotoneToZero { start } if *start <= n)
            || matches!(c, TailCertificate::Geometric { start, ratio } if *start <= n && *ratio < T::one() && x.nonnegative)
    });
    if monotone && x.nonnegative {
        return Some(x_n.abs());
    }
    x.abs_tail(n).map(|a| a * T::from_i64(2) - x_n.abs())
}

fn with_upper<T: Real>(lower: T, extra: Option<T>) -> Enclosure<T> {
    match extra {
        Some(e) => Enclosure { upper: Some(lower.clone() + e), lower },
        None => Enclosure::lower_only(lower),
    }
}

fn float_pad<T: Real>(e: Enclosure<T>, ops: usize) -> Enclosure<T> {
    if T::EXACT {
        return e;
    }
    let mag = e.upper.clone().unwrap_or_else(|| e.lower.clone()).abs();
    let slack = T::rounding_slack(&mag, ops);
    Enclosure {
        lower: T::max_of(e.lower.clone() - slack.clone(), T::zero()),
        upper: e.upper.map(|u| u + slack),
    }
}

/// Enclosure of `||x||^q` together with the power `q` (1 for non-`p` spaces).
///
/// Exact mode keeps values rational by reporting the `p`-th power.
pub fn norm_pow<T: Real>(space: &SpaceSpec, x: &SeqGenerator<T>, n: usize) -> Result<(Enclosure<T>, f64)> {
    space.validate()?;
    let n = n.max(1);
    let xs: Vec<T> = (0..=n).map(|k| x.term(k)).collect();
    let abs: Vec<T> = xs.iter().map(|v| v.abs()).collect();
    let sup_prefix = |from: usize| abs[from..n].iter().cloned().fold(T::zero(), T::max_of);
    let result = match space {
        SpaceSpec::Lp(p) if p.is_infinite() => (sup_enclosure(sup_prefix(0), x.sup_tail(n)), 1.0),
        SpaceSpec::C0 | SpaceSpec::C => (sup_enclosure(sup_prefix(0), x.sup_tail(n)), 1.0),
        SpaceSpec::Lp(p) if *p == 1.0 => {
            let s = abs[..n].iter().cloned().fold(T::zero(), |a, b| a + b);
            (with_upper(s, x.abs_tail(n)), 1.0)
        }
        SpaceSpec::Lp(p) => {
            let mut s = T::zero();
            for a in &abs[..n] {
                s = s + powp(a, *p)?;
            }
            (with_upper(s, pow_tail(x, n, *p)?), *p)
        }
        SpaceSpec::Cs => {
            let mut s = T::zero();
            let mut sup = T::zero();
            let mut sums = Vec::with_capacity(n + 1);
            for v in &xs {
                s = s + v.clone();
                sums.push(s.clone());
            }
            for v in &sums[..n] {
                sup = T::max_of(sup, v.abs());
            }
            let alternating = x.certificates.iter().any(|c| matches!(c, TailCertificate::Alternating { start } if *start <= n));
            let upper = if x.support_end().is_some_and(|e| e <= n) {
                Some(sup.clone())
            } else if alternating {
                Some(T::max_of(sup.clone(), sums[n].abs()))
            } else {
                x.abs_tail(n).map(|a| T::max_of(sup.clone(), sums[n - 1].abs() + a))
            };
            (Enclosure { lower: sup, upper }, 1.0)
        }
        SpaceSpec::CesP(p) if p.is_infinite() => (ces_sup(&abs, n, x)?, 1.0),
        SpaceSpec::Ces0 => (ces_sup(&abs, n, x)?, 1.0),
        SpaceSpec::CesP(p) => {
            let mut acc = T::zero();
            let mut s = T::zero();
            for (k, a) in abs[..n].iter().enumerate() {
                acc = acc + a.clone();
                s = s + powp(&(acc.clone() / T::from_usize(k + 1)), *p)?;
            }
            let tail = match x.abs_tail(n) {
                Some(tau) => Some(powp(&(acc + tau), *p)? * zeta_tail::<T>(n, *p)?),
                None => None,
            };
            (with_upper(s, tail), *p)
        }
        SpaceSpec::Dp(p) => {
            let sigma = x.sup_tail(n);
            let mut running = T::zero();
            let mut lo = T::zero();
            let mut hi = T::zero();
            for k in (0..n).rev() {
                running = T::max_of(running, abs[k].clone());
                lo = lo + powp(&running, *p)?;
                if let Some(sg) = &sigma {
                    hi = hi + powp(&T::max_of(running.clone(), sg.clone()), *p)?;
                }
            }
            let upper = match (sigma, hat_tail(x, n, *p)?) {
                (Some(_), Some(t)) => Some(hi + t),
                _ => None,
            };
            (Enclosure { lower: lo, upper }, *p)
        }
        SpaceSpec::Bv | SpaceSpec::Bv0 => {
            let mut s = abs[0].clone();
            for k in 0..n {
                s = s + (xs[k + 1].clone() - xs[k].clone()).abs();
            }
            (with_upper(s, variation_tail(x, n)), 1.0)
        }
        SpaceSpec::BvP(p) => {
            let mut s = powp(&abs[0], *p)?;
            for k in 0..n {
                s = s + powp(&(xs[k + 1].clone() - xs[k].clone()).abs(), *p)?;
            }
            let tail = match variation_tail(x, n) {
                Some(v) => Some(powp(&v, *p)?),
                None => None,
            };
            (with_upper(s, tail), *p)
        }
        SpaceSpec::HahnD(w) => {
            let mut s = T::zero();
            for k in 0..n {
                s = s + w.value_t::<T>(k)? * (xs[k + 1].clone() - xs[k].clone()).abs();
            }
            (with_upper(s, hahn_tail(w, x, n)?), 1.0)
        }
    };
    Ok((float_pad(result.0, 4 * n + 4), result.1))
}

fn sup_enclosure<T: Real>(prefix: T, tail: Option<T>) -> Enclosure<T> {
    match tail {
        Some(t) => Enclosure { upper: Some(T::max_of(prefix.clone(), t)), lower: prefix },
        None => Enclosure::lower_only(prefix),
    }
}

fn ces_sup<T: Real>(abs: &[T], n: usize, x: &SeqGenerator<T>) -> Result<Enclosure<T>> {
    let mut acc = T::zero();
    let mut sup = T::zero();
    for (k, a) in abs[..n].iter().enumerate() {
        acc = acc + a.clone();
        sup = T::max_of(sup, acc.clone() / T::from_usize(k + 1));
    }
    let upper = x.abs_tail(n).map(|tau| T::max_of(sup.clone(), (acc + tau) / T::from_usize(n + 1)));
    Ok(Enclosure { lower: sup, upper })
}

fn hahn_tail<T: Real>(w: &Weight, x: &SeqGenerator<T>, n: usize) -> Result<Option<T>> {
    if x.support_end().is_some_and(|e| e <= n) {
        return Ok(Some(T::zero()));
    }
    let Some(rho) = w.sup_ratio_from(n) else { return Ok(None) };
    for c in &x.certificates {
        if let TailCertificate::Geometric { start, ratio } = c {
            if *start <= n && ratio.to_f64() * rho < 1.0 {
                let rho = T::from_f64(rho);
                let dn = w.value_t::<T>(n)?;
                let bound = (T::one() + ratio.clone()) * dn * x.term(n).abs() / (T::one() - rho * ratio.clone());
                return Ok(Some(bound));
            }
        }
    }
    Ok(None)
}

/// Enclosure of `||x||` in `space` from `x_0..x_N` plus certified tails.
///
/// For `p`-type spaces in exact mode the root is enclosed between verified rational bounds.
pub fn norm<T: Real>(space: &SpaceSpec, x: &SeqGenerator<T>, n: usize) -> Result<Enclosure<T>> {
    let (e, q) = norm_pow(space, x, n)?;
    if q == 1.0 {
        return Ok(e);
    }
    Ok(Enclosure {
        lower: root_lower(&e.lower, q)?,
        upper: match &e.upper {
            Some(u) => Some(root_upper(u, q)?),
            None => None,
        },
    })
}

fn root_lower<T: Real>(v: &T, q: f64) -> Result<T> {
    let r = v.to_f64().max(0.0).powf(1.0 / q);
    if !T::EXACT {
        return Ok(T::from_f64(r * (1.0 - 4.0 * f64::EPSILON)));
    }
    let mut cand = r * (1.0 - 1e-15);
    loop {
        let c = T::from_f64(cand);
        if powp(&c, q)? <= *v {
            return Ok(c);
        }
        cand *= 1.0 - 1e-14;
    }
}

fn root_upper<T: Real>(v: &T, q: f64) -> Result<T> {
    let r = v.to_f64().max(0.0).powf(1.0 / q);
    if !T::EXACT {
        return Ok(T::from_f64(r * (1.0 + 4.0 * f64::EPSILON)));
    }
    let mut cand = r * (1.0 + 1e-15) + f64::MIN_POSITIVE;
    loop {
        let c = T::from_f64(cand);
        if powp(&c, q)? >= *v {
            return Ok(c);
        }
        cand *= 1.0 + 1e-14;
    }
}

/// Decides `x in space` from the certificates carried by `x`.
pub fn membership(space: &SpaceSpec, x: &SeqGenerator<f64>) -> Membership {
    if let Err(e) = space.validate() {
        return Membership::inconclusive(e.to_string());
    }
    let depth = x.certificates.iter().map(|c| c.start()).max().unwrap_or(0) + 256;
    let limit = x.limit();
    let not_null = x.minorant.as_ref().is_some_and(|m| m.bounded_away_from_zero())
        || limit.is_some_and(|l| l != 0.0);
    let null_witness = || x.minorant.as_ref().map(|m| m.at(m.start())).or(limit.map(f64::abs)).unwrap_or(0.0);
    let finite_norm = |s: &SpaceSpec| norm(s, x, depth).ok().filter(|e| e.is_certified());
    match space {
        SpaceSpec::Lp(p) | SpaceSpec::Dp(p) if p.is_finite() => {
            if let Some(e) = finite_norm(space) {
                return Membership::yes(e, "norm series certified by tail bound");
            }
            if let Some(m) = &x.minorant {
                let mp = m.powered(*p);
                if mp.diverges() {
                    let l = mp.integral_lower_bound(1 << 20);
                    return Membership::no(l, format!("|x_n|^p dominates a divergent minorant; partial sums exceed {l:.6}"));
                }
            }
            Membership::inconclusive("no certificate decides p-summability")
        }
        SpaceSpec::Dp(_) => Membership::inconclusive("d_p needs finite p"),
        SpaceSpec::Lp(_) => match finite_norm(space) {
            Some(e) => Membership::yes(e, "sup bounded by certified tail"),
            None => Membership::inconclusive("no tail sup certificate"),
        },
        SpaceSpec::C0 | SpaceSpec::Bv0 | SpaceSpec::HahnD(_) | SpaceSpec::Ces0 => {
            let null_needed = !matches!(space, SpaceSpec::Ces0);
            if null_needed && not_null {
                return Membership::no(null_witness(), "coordinates do not tend to 0");
            }
            match finite_norm(space) {
                Some(e) if !null_needed || limit == Some(0.0) => {
                    Membership::yes(e, "certified limit 0 and finite norm")
                }
                _ => Membership::inconclusive("no certificate decides membership"),
            }
        }
        SpaceSpec::C => match (limit, finite_norm(space)) {
            (Some(_), Some(e)) => Membership::yes(e, "certified limit exists"),
            _ => Membership::inconclusive("no convergence certificate"),
        },
        SpaceSpec::Cs => {
            if not_null {
                return Membership::no(null_witness(), "terms do not tend to 0");
            }
            if x.nonnegative {
                if let Some(m) = x.minorant.as_ref().filter(|m| m.diverges()) {
                    let l = m.integral_lower_bound(1 << 20);
                    return Membership::no(l, format!("partial sums of a nonnegative series exceed {l:.6}"));
                }
            }
            match finite_norm(space) {
                Some(e) => Membership::yes(e, "partial sums converge by certificate"),
                None => Membership::inconclusive("no convergence certificate for the series"),
            }
        }
        SpaceSpec::CesP(_) | SpaceSpec::Bv | SpaceSpec::BvP(_) => match finite_norm(space) {
            Some(e) => Membership::yes(e, "norm certified by tail bound"),
            None => Membership::inconclusive("no certificate decides membership"),
        },
    }
}

/// `(1/(n+1))`, carrying the harmonic minorant that certifies it is not summable.
pub fn harmonic() -> SeqGenerator<f64> {
    SeqGenerator::new("1/(n+1)", |n| 1.0 / (n as f64 + 1.0))
        .nonnegative()
        .with_certificate(TailCertificate::MonotoneToZero { start: 0 })
        .with_minorant(Minorant::Harmonic { start: 0, shift: 1.0, scale: 1.0 })
}

/// The constant sequence `1`.
pub fn ones() -> SeqGenerator<f64> {
    SeqGenerator::new("1", |_| 1.0)
        .nonnegative()
        .with_certificate(TailCertificate::EventuallyConstant { start: 0, value: 1.0 })
        .with_minorant(Minorant::Floor { start: 0, bound: 1.0 })
}

/// Unit vector `e_k` as a finitely supported sequence.
pub fn unit<T: Real>(k: usize) -> SeqGenerator<T> {
    let mut v = vec![T::zero(); k + 1];
    v[k] = T::one();
    SeqGenerator::finite(format!("e_{k}"), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn alt_harmonic() -> SeqGenerator<f64> {
        SeqGenerator::new("(-1)^n/(n+1)", |n| if n % 2 == 0 { 1.0 } else { -1.0 } / (n as f64 + 1.0))
            .with_certificate(TailCertificate::Alternating { start: 0 })
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parse_catalog() {
        assert_eq!("l1".parse::<SpaceSpec>().unwrap(), SpaceSpec::Lp(1.0));
        assert_eq!("linf".parse::<SpaceSpec>().unwrap(), SpaceSpec::Lp(f64::INFINITY));
        assert_eq!("ces2".parse::<SpaceSpec>().unwrap(), SpaceSpec::CesP(2.0));
        assert_eq!("cesinf".parse::<SpaceSpec>().unwrap(), SpaceSpec::CesP(f64::INFINITY));
        assert_eq!("bv2".parse::<SpaceSpec>().unwrap(), SpaceSpec::BvP(2.0));
        assert_eq!("hd:log".parse::<SpaceSpec>().unwrap(), SpaceSpec::HahnD(Weight::Log));
        assert_eq!("h".parse::<SpaceSpec>().unwrap(), SpaceSpec::HahnD(Weight::Power(1.0)));
        assert!("l0.5".parse::<SpaceSpec>().is_err());
        assert!("ces1".parse::<SpaceSpec>().is_err());
        assert!("hd:geom:0.5".parse::<SpaceSpec>().is_err());
        assert!("foo".parse::<SpaceSpec>().is_err());
    }

    #[test]
    fn custom_weight_monotonicity_is_spot_checked() {
        let bad = Weight::custom("dip", |n| if n == 500 { 1.0 } else { 2.0 + n as f64 });
        assert!(matches!(bad.validate(), Err(CeslabError::WeightViolation { index: 500, .. })));
        assert!(Weight::custom("ok", |n| 1.0 + n as f64).validate().is_ok());
        assert!(Weight::custom("small", |_| 0.5).validate().is_err());
    }

    #[test]
    fn cs_norm_of_alternating_harmonic_is_its_first_partial_sum() {
        let e = norm(&SpaceSpec::Cs, &alt_harmonic(), 4096).unwrap();
        assert!(e.contains(&1.0));
        assert!(e.width().unwrap() < 1e-9);
        let sum = crate::numeric::sum_with_tail(&alt_harmonic(), &TailCertificate::Alternating { start: 0 }, 4096).unwrap();
        assert!(sum.contains(&LN_2));
    }

    #[test]
    fn cs_norm_of_inverse_squares_is_basel() {
        let z = SeqGenerator::new("1/(n+1)^2", |n| 1.0 / ((n as f64 + 1.0).powi(2)))
            .nonnegative()
            .with_certificate(TailCertificate::PowerLaw { start: 0, constant: 1.0, exponent: 2 });
        let e = norm(&SpaceSpec::Cs, &z, 20_000).unwrap();
        assert!(e.contains(&(PI * PI / 6.0)));
        assert!(e.width().unwrap() < 1e-4);
    }

    #[test]
    fn bv_witness_pair_breaks_riesz_property() {
        let x = SeqGenerator::new("(-1)^n/(n+1)^2", |n| if n % 2 == 0 { 1.0 } else { -1.0 } / (n as f64 + 1.0).powi(2))
            .with_certificate(TailCertificate::PowerLaw { start: 0, constant: 1.0, exponent: 2 });
        let ax = SeqGenerator::new("1/(n+1)^2", |n| 1.0 / (n as f64 + 1.0).powi(2))
            .nonnegative()
            .with_certificate(TailCertificate::MonotoneToZero { start: 0 })
            .with_certificate(TailCertificate::PowerLaw { start: 0, constant: 1.0, exponent: 2 });
        let ex = norm(&SpaceSpec::Bv, &x, 20_000).unwrap();
        let eax = norm(&SpaceSpec::Bv, &ax, 20_000).unwrap();
        assert!(ex.contains(&(PI * PI / 3.0)), "{ex:?}");
        assert!(eax.contains(&2.0), "{eax:?}");
        assert!(eax.upper.unwrap() < ex.lower);
    }

    #[test]
    fn hahn_unit_vectors() {
        for w in [Weight::Log, Weight::Power(2.0), Weight::Geometric(2.0)] {
            let s = SpaceSpec::HahnD(w.clone());
            let e0 = norm(&s, &unit::<f64>(0), 8).unwrap();
            assert!(e0.contains(&w.value(0)) && e0.is_certified());
            for n in 1..6 {
                let e = norm(&s, &unit::<f64>(n), 16).unwrap();
                let expect = w.value(n - 1) + w.value(n);
                assert!(e.contains(&expect) && e.width().unwrap() < 1e-9);
            }
        }
        let s = SpaceSpec::HahnD(Weight::Power(2.0));
        let e = norm(&s, &unit::<Rational>(3), 8).unwrap();
        assert_eq!(e, Enclosure::point(q(9 + 16, 1)));
    }

    #[test]
    fn hahn_norm_of_geometric_eigenvector() {
        let x = SeqGenerator::geometric(0.5f64);
        let e = norm(&SpaceSpec::HahnD(Weight::hahn()), &x, 200).unwrap();
        assert!(e.contains(&2.0) && e.width().unwrap() < 1e-9);
    }

    #[test]
    fn isometries_round_trip_and_preserve_norms() {
        let x = vec![q(1, 1), q(1, 2), q(1, 3), q(0, 1), q(0, 1)];
        for space in [SpaceSpec::BvP(2.0), SpaceSpec::Cs, SpaceSpec::Bv, SpaceSpec::HahnD(Weight::Power(2.0))] {
            let iso = conjugation(&space);
            let back = iso.inverse(&iso.forward(&x).unwrap()).unwrap();
            assert_eq!(&back[..x.len()], &x[..]);
            let (direct, qd) = norm_pow(&space, &SeqGenerator::finite("x", x.clone()), 8).unwrap();
            let (image, qi) = iso.target_norm_pow(&iso.forward(&x).unwrap()).unwrap();
            assert_eq!(qd, qi);
            assert_eq!(direct, Enclosure::point(image));
        }
        let log = conjugation(&SpaceSpec::HahnD(Weight::Log));
        let y = log.forward(&[0.0, 1.0]).unwrap();
        let l1: f64 = y.iter().map(|v| v.abs()).sum();
        assert!((l1 - (3f64.ln() + 4f64.ln())).abs() < 1e-12);
        assert_eq!(conjugation(&SpaceSpec::Lp(2.0)).kind, IsometryKind::Identity);
    }

    #[test]
    fn exact_norms_are_points_for_finite_support() {
        let x = SeqGenerator::finite("x", vec![q(1, 2), q(-1, 3), q(1, 4)]);
        for s in [SpaceSpec::Lp(1.0), SpaceSpec::Lp(2.0), SpaceSpec::Lp(f64::INFINITY), SpaceSpec::Cs, SpaceSpec::Bv, SpaceSpec::Ces0, SpaceSpec::CesP(f64::INFINITY), SpaceSpec::Dp(1.0), SpaceSpec::BvP(3.0)] {
            let (e, _) = norm_pow(&s, &x, 8).unwrap();
            assert!(e.is_point(), "{s}: {e:?}");
        }
        let (l2, p) = norm_pow(&SpaceSpec::Lp(2.0), &x, 8).unwrap();
        assert_eq!(p, 2.0);
        assert_eq!(l2.lower, q(1, 4) + q(1, 9) + q(1, 16));
        let r = norm(&SpaceSpec::Lp(2.0), &x, 8).unwrap();
        assert!(r.lower.clone() * r.lower.clone() <= l2.lower);
        assert!(r.upper.clone().unwrap() * r.upper.unwrap() >= l2.lower);
    }

    #[test]
    fn membership_examples() {
        let ones = ones();
        assert!(membership(&SpaceSpec::C0, &ones).verdict.is_no());
        assert!(membership(&SpaceSpec::C, &ones).verdict.is_yes());
        assert!(membership(&SpaceSpec::Lp(1.0), &harmonic()).verdict.is_no());
        assert!(membership(&SpaceSpec::Lp(2.0), &harmonic()).verdict.is_inconclusive());
        assert!(membership(&SpaceSpec::Cs, &harmonic()).verdict.is_no());
        assert!(membership(&SpaceSpec::C0, &harmonic()).verdict.is_yes());
        let g = SeqGenerator::geometric(0.5f64);
        for s in [SpaceSpec::Lp(1.0), SpaceSpec::Lp(2.0), SpaceSpec::C0, SpaceSpec::Cs, SpaceSpec::Bv0, SpaceSpec::CesP(2.0), SpaceSpec::Dp(2.0), SpaceSpec::HahnD(Weight::Log)] {
            assert!(membership(&s, &g).verdict.is_yes(), "{s}");
        }
    }

    #[test]
    fn ces_and_d_norms_of_unit_vector() {
        let e0 = unit::<f64>(0);
        let ces2 = norm(&SpaceSpec::CesP(2.0), &e0, 4096).unwrap();
        assert!(ces2.contains(&(PI * PI / 6.0).sqrt()));
        let d2 = norm(&SpaceSpec::Dp(2.0), &e0, 16).unwrap();
        assert!(d2.contains(&1.0));
        let cesinf = norm(&SpaceSpec::CesP(f64::INFINITY), &e0, 16).unwrap();
        assert!(cesinf.contains(&1.0) && cesinf.is_certified());
    }
}
