//! Scalars in two modes, enclosures, tail certificates and certified series summation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CeslabError, Result};

pub type Rational = BigRational;

/// Ordered field used by every kernel: `f64` or an exact `BigRational`.
pub trait Real:
    Clone + fmt::Debug + PartialOrd + Num + Signed + Send + Sync + 'static
{
    const EXACT: bool;

    /// Exact conversion for rationals (every finite `f64` is a dyadic rational).
    fn from_f64(x: f64) -> Self;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;

    /// Bound on accumulated rounding after `ops` operations on values of size `magnitude`.
    fn rounding_slack(magnitude: &Self, ops: usize) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_i64(n as i64)
    }

    fn ratio(n: i64, d: i64) -> Self {
        Self::from_i64(n) / Self::from_i64(d)
    }

    fn powu(&self, mut k: usize) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl Real for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn rounding_slack(magnitude: &Self, ops: usize) -> Self {
        2.0 * (ops as f64 + 1.0) * f64::EPSILON * magnitude.abs() + f64::MIN_POSITIVE
    }
}

impl Real for Rational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Self {
        Rational::from_float(x).expect("finite float")
    }
    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn rounding_slack(_magnitude: &Self, _ops: usize) -> Self {
        Rational::zero()
    }
}

/// `f64` value of a rational, robust to numerators and denominators beyond the float range.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    let k = 64 - (q.numer().bits() as i64 - q.denom().bits() as i64);
    let quotient = if k >= 0 {
        (q.numer() << (k as usize)) / q.denom()
    } else {
        q.numer() / (q.denom() << ((-k) as usize))
    };
    scale_pow2(quotient.to_f64().unwrap_or(f64::NAN), -k)
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    #[default]
    Float,
}

impl FromStr for Mode {
    type Err = CeslabError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(CeslabError::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

/// A number that is either an exact rational or a 64-bit float.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Float(f64),
}

impl Scalar {
    pub fn exact(n: i64, d: i64) -> Self {
        Scalar::Exact(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn float(x: f64) -> Self {
        Scalar::Float(x)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Float(x) => *x,
        }
    }

    /// Exact rational value; floats convert without rounding.
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            Scalar::Exact(q) => Some(q.clone()),
            Scalar::Float(x) => Rational::from_float(*x),
        }
    }

    pub fn in_mode(&self, mode: Mode) -> Result<Scalar> {
        match mode {
            Mode::Float => Ok(Scalar::Float(self.to_f64())),
            Mode::Exact => self
                .to_rational()
                .map(Scalar::Exact)
                .ok_or_else(|| CeslabError::Parse("non-finite value has no exact form".into())),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_one(),
            Scalar::Float(x) => *x == 1.0,
        }
    }

    /// `"p/q"` for exact values, 17 significant digits for floats.
    pub fn render(&self) -> String {
        match self {
            Scalar::Exact(q) => render_rational(q),
            Scalar::Float(x) => render_f64(*x),
        }
    }

    /// Parses `"p/q"`, decimals (exactly) and scientific notation (as floats).
    pub fn parse(s: &str) -> Result<Scalar> {
        let s = s.trim();
        if s.is_empty() {
            return Err(CeslabError::Parse("empty number".into()));
        }
        if let Some((n, d)) = s.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|e| CeslabError::Parse(e.to_string()))?;
            let d = BigInt::from_str(d.trim()).map_err(|e| CeslabError::Parse(e.to_string()))?;
            if d.is_zero() {
                return Err(CeslabError::Parse("zero denominator".into()));
            }
            return Ok(Scalar::Exact(Rational::new(n, d)));
        }
        if s.contains(['e', 'E']) || s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("nan") {
            return s
                .parse::<f64>()
                .map(Scalar::Float)
                .map_err(|e| CeslabError::Parse(format!("'{s}': {e}")));
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(CeslabError::Parse(format!("'{s}' is not a number")));
        }
        let digits = format!("{int_part}{frac_part}");
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(CeslabError::Parse(format!("'{s}' is not a number")));
        }
        let num = BigInt::from_str(&digits).map_err(|e| CeslabError::Parse(e.to_string()))?;
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        let q = Rational::new(num, den);
        Ok(Scalar::Exact(if neg { -q } else { q }))
    }

    fn binary(
        self,
        rhs: Scalar,
        fq: impl Fn(Rational, Rational) -> Rational,
        ff: impl Fn(f64, f64) -> f64,
    ) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(fq(a, b)),
            (a, b) => Scalar::Float(ff(a.to_f64(), b.to_f64())),
        }
    }
}

pub fn render_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Lossless float rendering with 17 significant digits.
pub fn render_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for Scalar {
    type Err = CeslabError;
    fn from_str(s: &str) -> Result<Self> {
        Scalar::parse(s)
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Scalar::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.binary(rhs, |a, b| a + b, |a, b| a + b)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.binary(rhs, |a, b| a - b, |a, b| a - b)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.binary(rhs, |a, b| a * b, |a, b| a * b)
    }
}

/// Division by an exact zero yields a float infinity.
impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) if !b.is_zero() => Scalar::Exact(a / b),
            (a, b) => Scalar::Float(a.to_f64() / b.to_f64()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(-q),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            (a, b) => match (a.to_rational(), b.to_rational()) {
                (Some(x), Some(y)) => x.partial_cmp(&y),
                _ => a.to_f64().partial_cmp(&b.to_f64()),
            },
        }
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Float(x)
    }
}

impl From<Rational> for Scalar {
    fn from(q: Rational) -> Self {
        Scalar::Exact(q)
    }
}

/// Certified bounds `[lower, upper]`; `upper == None` means no finite upper bound is known.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure<T> {
    pub lower: T,
    pub upper: Option<T>,
}

impl<T: Real> Enclosure<T> {
    pub fn new(lower: T, upper: T) -> Self {
        debug_assert!(lower <= upper, "enclosure with lower > upper");
        Enclosure { lower, upper: Some(upper) }
    }

    pub fn point(v: T) -> Self {
        Enclosure { lower: v.clone(), upper: Some(v) }
    }

    pub fn lower_only(lower: T) -> Self {
        Enclosure { lower, upper: None }
    }

    pub fn is_certified(&self) -> bool {
        self.upper.is_some()
    }

    pub fn contains(&self, v: &T) -> bool {
        &self.lower <= v && self.upper.as_ref().is_none_or(|u| v <= u)
    }

    pub fn width(&self) -> Option<T> {
        self.upper.as_ref().map(|u| u.clone() - self.lower.clone())
    }

    pub fn is_point(&self) -> bool {
        self.upper.as_ref() == Some(&self.lower)
    }

    /// Widens both ends by `slack`.
    pub fn padded(self, slack: T) -> Self {
        Enclosure {
            lower: self.lower - slack.clone(),
            upper: self.upper.map(|u| u + slack),
        }
    }

    pub fn to_f64(&self) -> Enclosure<f64> {
        Enclosure {
            lower: self.lower.to_f64(),
            upper: self.upper.as_ref().map(|u| u.to_f64()),
        }
    }

    pub fn to_scalar(&self) -> Enclosure<Scalar> {
        let conv = |v: &T| {
            if T::EXACT {
                Scalar::Exact(exactify(v))
            } else {
                Scalar::Float(v.to_f64())
            }
        };
        Enclosure { lower: conv(&self.lower), upper: self.upper.as_ref().map(conv) }
    }
}

fn exactify<T: Real>(v: &T) -> Rational {
    let any: &dyn std::any::Any = v;
    match any.downcast_ref::<Rational>() {
        Some(q) => q.clone(),
        None => Rational::from_float(v.to_f64()).unwrap_or_else(Rational::zero),
    }
}

impl Enclosure<f64> {
    pub fn upper_or_inf(&self) -> f64 {
        self.upper.unwrap_or(f64::INFINITY)
    }
}

impl<T: Real + fmt::Display> fmt::Display for Enclosure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.upper {
            Some(u) => write!(f, "[{}, {}]", self.lower, u),
            None => write!(f, "[{}, +inf)", self.lower),
        }
    }
}

/// Declared decay of a sequence beyond a start index.
#[derive(Clone, Debug, PartialEq)]
pub enum TailCertificate<T> {
    /// `|x_{n+1}| <= ratio * |x_n|` for all `n >= start`.
    Geometric { start: usize, ratio: T },
    /// `|x_n| <= constant * (n+1)^(-exponent)` for all `n >= start`.
    PowerLaw { start: usize, constant: T, exponent: u32 },
    /// Signs alternate and `|x_n|` decreases to zero for `n >= start`.
    Alternating { start: usize },
    /// Constant sign and `|x_n|` decreases to zero for `n >= start`.
    MonotoneToZero { start: usize },
    /// `x_n = value` for all `n >= start`.
    EventuallyConstant { start: usize, value: T },
}

impl<T: Real> TailCertificate<T> {
    pub fn geometric(start: usize, ratio: T) -> Self {
        TailCertificate::Geometric { start, ratio }
    }

    pub fn start(&self) -> usize {
        match self {
            TailCertificate::Geometric { start, .. }
            | TailCertificate::PowerLaw { start, .. }
            | TailCertificate::Alternating { start }
            | TailCertificate::MonotoneToZero { start }
            | TailCertificate::EventuallyConstant { start, .. } => *start,
        }
    }

    /// Bound on `sum_{n >= N} |x_n|` given `x_N`, or `None` if the certificate does not imply one.
    pub fn abs_tail(&self, n: usize, x_n: &T) -> Option<T> {
        if n < self.start() {
            return None;
        }
        match self {
            TailCertificate::Geometric { ratio, .. } => {
                if *ratio >= T::one() || ratio.is_negative() {
                    None
                } else {
                    Some(x_n.abs() / (T::one() - ratio.clone()))
                }
            }
            TailCertificate::PowerLaw { constant, exponent, .. } => {
                if *exponent < 2 {
                    return None;
                }
                let s = *exponent as usize;
                let base = T::from_usize(n + 1);
                let first = T::one() / base.powu(s);
                let integral = T::one() / (T::from_usize(s - 1) * base.powu(s - 1));
                Some(constant.abs() * (first + integral))
            }
            TailCertificate::EventuallyConstant { value, .. } => {
                if value.is_zero() {
                    Some(T::zero())
                } else {
                    None
                }
            }
            TailCertificate::Alternating { .. } | TailCertificate::MonotoneToZero { .. } => None,
        }
    }

    /// Bound on `sup_{n >= N} |x_n|` given `x_N`.
    pub fn sup_tail(&self, n: usize, x_n: &T) -> Option<T> {
        if n < self.start() {
            return None;
        }
        match self {
            TailCertificate::Geometric { ratio, .. } => {
                if *ratio > T::one() {
                    None
                } else {
                    Some(x_n.abs())
                }
            }
            TailCertificate::PowerLaw { constant, exponent, .. } => {
                Some(constant.abs() / T::from_usize(n + 1).powu(*exponent as usize))
            }
            TailCertificate::Alternating { .. } | TailCertificate::MonotoneToZero { .. } => {
                Some(x_n.abs())
            }
            TailCertificate::EventuallyConstant { value, .. } => Some(value.abs()),
        }
    }

    /// Limit of the sequence when the certificate determines it.
    pub fn limit(&self) -> Option<T> {
        match self {
            TailCertificate::Geometric { ratio, .. } if *ratio < T::one() => Some(T::zero()),
            TailCertificate::Geometric { .. } => None,
            TailCertificate::PowerLaw { exponent, .. } if *exponent >= 1 => Some(T::zero()),
            TailCertificate::PowerLaw { .. } => None,
            TailCertificate::Alternating { .. } | TailCertificate::MonotoneToZero { .. } => {
                Some(T::zero())
            }
            TailCertificate::EventuallyConstant { value, .. } => Some(value.clone()),
        }
    }
}

/// Registered lower bound `|x_n| >= f(n)` for `n >= start`, with `f` decreasing.
#[derive(Clone, Debug, PartialEq)]
pub enum Minorant {
    /// `f(n) = scale / (n + shift)`.
    Harmonic { start: usize, shift: f64, scale: f64 },
    /// `f(n) = scale * (n + shift)^(-exponent)`.
    PowerLaw { start: usize, shift: f64, exponent: f64, scale: f64 },
    /// `f(n) = bound`.
    Floor { start: usize, bound: f64 },
}

impl Minorant {
    pub fn start(&self) -> usize {
        match self {
            Minorant::Harmonic { start, .. }
            | Minorant::PowerLaw { start, .. }
            | Minorant::Floor { start, .. } => *start,
        }
    }

    pub fn at(&self, n: usize) -> f64 {
        if n < self.start() {
            return 0.0;
        }
        let x = n as f64;
        match self {
            Minorant::Harmonic { shift, scale, .. } => scale / (x + shift),
            Minorant::PowerLaw { shift, exponent, scale, .. } => scale * (x + shift).powf(-exponent),
            Minorant::Floor { bound, .. } => *bound,
        }
    }

    /// True when `sum f(n)` diverges.
    pub fn diverges(&self) -> bool {
        match self {
            Minorant::Harmonic { scale, .. } => *scale > 0.0,
            Minorant::PowerLaw { exponent, scale, .. } => *scale > 0.0 && *exponent <= 1.0,
            Minorant::Floor { bound, .. } => *bound > 0.0,
        }
    }

    /// True when `f` stays away from zero, so the sequence is not null.
    pub fn bounded_away_from_zero(&self) -> bool {
        matches!(self, Minorant::Floor { bound, .. } if *bound > 0.0)
            || matches!(self, Minorant::PowerLaw { exponent, scale, .. } if *scale > 0.0 && *exponent <= 0.0)
    }

    /// Minorant of `|x_n|^p`.
    pub fn powered(&self, p: f64) -> Minorant {
        match *self {
            Minorant::Harmonic { start, shift, scale } => Minorant::PowerLaw {
                start,
                shift,
                exponent: p,
                scale: scale.powf(p),
            },
            Minorant::PowerLaw { start, shift, exponent, scale } => Minorant::PowerLaw {
                start,
                shift,
                exponent: exponent * p,
                scale: scale.powf(p),
            },
            Minorant::Floor { start, bound } => Minorant::Floor { start, bound: bound.powf(p) },
        }
    }

    /// Lower bound for `sum_{n=start}^{N} f(n)` by integral comparison.
    pub fn integral_lower_bound(&self, n_last: usize) -> f64 {
        let start = self.start();
        if n_last < start {
            return 0.0;
        }
        let a = start as f64;
        let b = n_last as f64 + 1.0;
        let raw = match *self {
            Minorant::Harmonic { shift, scale, .. } => scale * ((b + shift) / (a + shift)).ln(),
            Minorant::PowerLaw { shift, exponent, scale, .. } => {
                if (exponent - 1.0).abs() < 1e-15 {
                    scale * ((b + shift) / (a + shift)).ln()
                } else {
                    scale * ((b + shift).powf(1.0 - exponent) - (a + shift).powf(1.0 - exponent))
                        / (1.0 - exponent)
                }
            }
            Minorant::Floor { bound, .. } => bound * (b - a),
        };
        raw * (1.0 - 1e-12)
    }
}

/// A sequence given by a coordinate rule together with optional certificates.
#[derive(Clone)]
pub struct SeqGenerator<T> {
    label: String,
    rule: Arc<dyn Fn(usize) -> T + Send + Sync>,
    pub certificates: Vec<TailCertificate<T>>,
    pub minorant: Option<Minorant>,
    pub nonnegative: bool,
}

impl<T: Real> SeqGenerator<T> {
    pub fn new(label: impl Into<String>, rule: impl Fn(usize) -> T + Send + Sync + 'static) -> Self {
        SeqGenerator {
            label: label.into(),
            rule: Arc::new(rule),
            certificates: Vec::new(),
            minorant: None,
            nonnegative: false,
        }
    }

    /// Finitely supported sequence; coordinates past the slice are zero.
    pub fn finite(label: impl Into<String>, coords: Vec<T>) -> Self {
        let len = coords.len();
        let nonneg = coords.iter().all(|c| !c.is_negative());
        let coords = Arc::new(coords);
        let mut g = SeqGenerator::new(label, move |n| coords.get(n).cloned().unwrap_or_else(T::zero));
        g.certificates.push(TailCertificate::EventuallyConstant { start: len, value: T::zero() });
        g.nonnegative = nonneg;
        g
    }

    /// `(t^n)`, with its geometric certificate when `t < 1`.
    pub fn geometric(t: T) -> Self {
        let tt = t.clone();
        let g = SeqGenerator::new("t^n", move |n| tt.powu(n));
        let g = if t.abs() < T::one() { g.with_certificate(TailCertificate::geometric(0, t.abs())) } else { g };
        SeqGenerator { nonnegative: !t.is_negative(), ..g }
    }

    pub fn with_certificate(mut self, cert: TailCertificate<T>) -> Self {
        self.certificates.push(cert);
        self
    }

    pub fn with_minorant(mut self, m: Minorant) -> Self {
        self.minorant = Some(m);
        self
    }

    pub fn nonnegative(mut self) -> Self {
        self.nonnegative = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn term(&self, n: usize) -> T {
        (self.rule)(n)
    }

    pub fn prefix(&self, n: usize) -> Vec<T> {
        (0..n).map(|k| self.term(k)).collect()
    }

    /// Coordinates past which the sequence vanishes, if it is finitely supported.
    pub fn support_end(&self) -> Option<usize> {
        self.certificates.iter().find_map(|c| match c {
            TailCertificate::EventuallyConstant { start, value } if value.is_zero() => Some(*start),
            _ => None,
        })
    }

    /// Best bound on `sum_{n >= N} |x_n|` over all attached certificates.
    pub fn abs_tail(&self, n: usize) -> Option<T> {
        let x_n = self.term(n);
        self.certificates
            .iter()
            .filter_map(|c| c.abs_tail(n, &x_n))
            .reduce(T::min_of)
    }

    /// Best bound on `sup_{n >= N} |x_n|`.
    pub fn sup_tail(&self, n: usize) -> Option<T> {
        let x_n = self.term(n);
        self.certificates
            .iter()
            .filter_map(|c| c.sup_tail(n, &x_n))
            .reduce(T::min_of)
    }

    /// Certified limit, if any certificate fixes it.
    pub fn limit(&self) -> Option<T> {
        self.certificates.iter().find_map(|c| c.limit())
    }

    pub fn map<U: Real>(&self, label: impl Into<String>, f: impl Fn(T) -> U + Send + Sync + 'static) -> SeqGenerator<U> {
        let rule = self.rule.clone();
        SeqGenerator::new(label, move |n| f(rule(n)))
    }
}

impl<T> fmt::Debug for SeqGenerator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeqGenerator").field("label", &self.label).finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    CertifiedYes,
    CertifiedNo,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::CertifiedYes => "CertifiedYes",
            Outcome::CertifiedNo => "CertifiedNo",
            Outcome::Inconclusive => "Inconclusive",
        })
    }
}

/// Three-valued answer with the certificate that justifies it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub reason: String,
    pub bound: Option<f64>,
}

impl Verdict {
    pub fn yes(reason: impl Into<String>) -> Self {
        Verdict { outcome: Outcome::CertifiedYes, reason: reason.into(), bound: None }
    }

    pub fn no(reason: impl Into<String>) -> Self {
        Verdict { outcome: Outcome::CertifiedNo, reason: reason.into(), bound: None }
    }

    pub fn inconclusive(reason: impl Into<String>) -> Self {
        Verdict { outcome: Outcome::Inconclusive, reason: reason.into(), bound: None }
    }

    pub fn with_bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }

    pub fn is_yes(&self) -> bool {
        self.outcome == Outcome::CertifiedYes
    }

    pub fn is_no(&self) -> bool {
        self.outcome == Outcome::CertifiedNo
    }

    pub fn is_inconclusive(&self) -> bool {
        self.outcome == Outcome::Inconclusive
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.outcome, self.reason)
    }
}

fn partial_sum<T: Real>(terms: &SeqGenerator<T>, n: usize) -> (T, T) {
    let mut s = T::zero();
    let mut mag = T::zero();
    for k in 0..=n {
        let a = terms.term(k);
        mag = mag + a.abs();
        s = s + a;
    }
    (s, mag)
}

/// Encloses `sum_{n>=0} terms(n)` from the partial sum through `N` plus a certified tail.
pub fn sum_with_tail<T: Real>(
    terms: &SeqGenerator<T>,
    cert: &TailCertificate<T>,
    n: usize,
) -> Result<Enclosure<T>> {
    if let TailCertificate::Geometric { ratio, .. } = cert {
        if *ratio >= T::one() {
            return Err(CeslabError::NoGeometricCertificate(ratio.to_f64()));
        }
    }
    if n < cert.start() {
        return Err(CeslabError::CertificateStart { index: n, start: cert.start() });
    }
    let (s, mag) = partial_sum(terms, n);
    let slack = T::rounding_slack(&mag, n + 1);
    let a_n = terms.term(n);
    let enc = match cert {
        TailCertificate::Geometric { ratio, .. } => {
            let tail = a_n.abs() * ratio.clone() / (T::one() - ratio.clone());
            signed_enclosure(terms, s, tail)
        }
        TailCertificate::PowerLaw { .. } => {
            let tail = cert
                .abs_tail(n + 1, &terms.term(n + 1))
                .ok_or_else(|| CeslabError::NoSummableCertificate("power law with exponent < 2".into()))?;
            signed_enclosure(terms, s, tail)
        }
        TailCertificate::EventuallyConstant { value, .. } => {
            if !value.is_zero() {
                return Err(CeslabError::NoSummableCertificate("terms tend to a nonzero constant".into()));
            }
            Enclosure::point(s)
        }
        TailCertificate::Alternating { .. } => {
            let s_next = s.clone() + terms.term(n + 1);
            Enclosure::new(T::min_of(s.clone(), s_next.clone()), T::max_of(s, s_next))
        }
        TailCertificate::MonotoneToZero { .. } => {
            return Err(CeslabError::NoSummableCertificate(
                "monotone decay alone does not bound a series".into(),
            ))
        }
    };
    Ok(if slack.is_zero() { enc } else { enc.padded(slack) })
}

fn signed_enclosure<T: Real>(terms: &SeqGenerator<T>, s: T, tail: T) -> Enclosure<T> {
    if terms.nonnegative {
        Enclosure::new(s.clone(), s + tail)
    } else {
        Enclosure::new(s.clone() - tail.clone(), s + tail)
    }
}

/// Certified lower bound for `sum_{n<=N} terms(n)` of a positive sequence.
///
/// Uses the registered minorant's integral when it beats the plain partial sum.
pub fn divergence_lower_bound<T: Real>(terms: &SeqGenerator<T>, n: usize) -> T {
    let (s, mag) = partial_sum(terms, n);
    let partial = s - T::rounding_slack(&mag, n + 1);
    match &terms.minorant {
        Some(m) => {
            let integral = m.integral_lower_bound(n);
            let integral = if T::EXACT {
                T::from_f64(integral * (1.0 - 1e-12))
            } else {
                T::from_f64(integral)
            };
            T::max_of(partial, integral)
        }
        None => partial,
    }
}

/// Smallest `N` on a doubling scan whose divergence lower bound exceeds `threshold`.
pub fn certify_divergence_past(terms: &SeqGenerator<f64>, threshold: f64, cap: usize) -> Option<(usize, f64)> {
    let m = terms.minorant.as_ref()?;
    if !m.diverges() {
        return None;
    }
    let mut n = m.start().max(1);
    while n <= cap {
        let l = m.integral_lower_bound(n);
        if l > threshold {
            return Some((n, l));
        }
        n = n.saturating_mul(2);
    }
    None
}

/// `ln(n!)` via the log-gamma-free running sum for small `n` and Stirling with remainder beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 256 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        let x = n as f64;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x * x * x)
    }
}

/// Exact binomial coefficient as a rational.
pub fn binomial(n: usize, k: usize) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(acc)
}

pub fn rational_from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn geometric_half_encloses_two() {
        let g = SeqGenerator::geometric(0.5f64);
        let e = sum_with_tail(&g, &TailCertificate::geometric(0, 0.5), 64).unwrap();
        assert!(e.contains(&2.0));
        let ge = SeqGenerator::geometric(q(1, 2));
        let ee = sum_with_tail(&ge, &TailCertificate::geometric(0, q(1, 2)), 64).unwrap();
        assert!(ee.contains(&q(2, 1)));
        assert!(ee.lower < q(2, 1));
    }

    #[test]
    fn derivative_of_geometric_encloses_four() {
        let g = SeqGenerator::new("(n+1)t^n", |n| (n as f64 + 1.0) * 0.5f64.powi(n as i32)).nonnegative();
        let e = sum_with_tail(&g, &TailCertificate::geometric(2, 0.8), 128).unwrap();
        assert!(e.contains(&4.0));
        let ge = SeqGenerator::new("(n+1)t^n", |n| Rational::from_usize(n + 1) * q(1, 2).powu(n)).nonnegative();
        let ee = sum_with_tail(&ge, &TailCertificate::geometric(2, q(4, 5)), 128).unwrap();
        assert!(ee.contains(&q(4, 1)));
    }

    #[test]
    fn harmonic_has_no_geometric_certificate() {
        let h = SeqGenerator::new("1/(n+1)", |n| 1.0 / (n as f64 + 1.0));
        let err = sum_with_tail(&h, &TailCertificate::geometric(0, 1.0), 10).unwrap_err();
        assert!(err.to_string().contains("no geometric certificate"));
    }

    #[test]
    fn certificate_start_is_enforced() {
        let g = SeqGenerator::geometric(0.5f64);
        assert!(matches!(
            sum_with_tail(&g, &TailCertificate::geometric(5, 0.5), 3),
            Err(CeslabError::CertificateStart { .. })
        ));
    }

    #[test]
    fn alternating_harmonic_encloses_log2() {
        let g = SeqGenerator::new("(-1)^n/(n+1)", |n| if n % 2 == 0 { 1.0 } else { -1.0 } / (n as f64 + 1.0));
        let e = sum_with_tail(&g, &TailCertificate::Alternating { start: 0 }, 1000).unwrap();
        assert!(e.contains(&std::f64::consts::LN_2));
        assert!(e.width().unwrap() < 2e-3);
    }

    #[test]
    fn power_law_tail_encloses_basel() {
        let g = SeqGenerator::new("1/(n+1)^2", |n| 1.0 / ((n as f64 + 1.0) * (n as f64 + 1.0))).nonnegative();
        let cert = TailCertificate::PowerLaw { start: 0, constant: 1.0, exponent: 2 };
        let e = sum_with_tail(&g, &cert, 10_000).unwrap();
        let basel = std::f64::consts::PI.powi(2) / 6.0;
        assert!(e.contains(&basel));
        assert!(e.width().unwrap() < 2e-4);
    }

    #[test]
    fn divergence_bounds() {
        let h = SeqGenerator::new("1/(k+2)", |k| 1.0 / (k as f64 + 2.0))
            .with_minorant(Minorant::Harmonic { start: 0, shift: 2.0, scale: 1.0 });
        assert!(divergence_lower_bound(&h, 1_000_000) >= 13.0);
        let r1 = SeqGenerator::new("(k+1)^0/(k+2)", |k| 1.0 / (k as f64 + 2.0))
            .with_minorant(Minorant::Harmonic { start: 0, shift: 2.0, scale: 1.0 });
        assert!(divergence_lower_bound(&r1, 100_000) >= 11.0);
        let g = SeqGenerator::geometric(0.5f64);
        let l = divergence_lower_bound(&g, 10);
        assert!((l - 1.999_023_437_5).abs() < 1e-12);
        let ge = SeqGenerator::geometric(q(1, 2));
        assert_eq!(divergence_lower_bound(&ge, 10), q(2047, 1024));
    }

    #[test]
    fn scalar_parsing_and_rendering() {
        assert_eq!(Scalar::parse("3/4").unwrap(), Scalar::exact(3, 4));
        assert_eq!(Scalar::parse("0.25").unwrap(), Scalar::exact(1, 4));
        assert_eq!(Scalar::parse("-1.5").unwrap(), Scalar::exact(-3, 2));
        assert_eq!(Scalar::parse("1e-3").unwrap(), Scalar::Float(1e-3));
        assert!(Scalar::parse("abc").is_err());
        assert!(Scalar::parse("1/0").is_err());
        assert_eq!(Scalar::exact(6, 8).render(), "3/4");
        assert_eq!(Scalar::exact(2, 1).render(), "2");
        let x = 0.1f64;
        assert_eq!(render_f64(x).parse::<f64>().unwrap(), x);
        assert!(Scalar::exact(1, 3) < Scalar::Float(0.34));
        assert_eq!(Scalar::exact(1, 2) + Scalar::exact(1, 3), Scalar::exact(5, 6));
        assert_eq!((Scalar::exact(1, 2) * Scalar::Float(2.0)).mode(), Mode::Float);
    }

    #[test]
    fn rational_to_f64_handles_huge_values() {
        let big = Rational::from_integer(BigInt::one() << 2000usize);
        let r = big.clone() / (big + Rational::one());
        assert!((rational_to_f64(&r) - 1.0).abs() < 1e-15);
        let tiny = Rational::new(BigInt::one(), BigInt::one() << 1100usize);
        assert_eq!(rational_to_f64(&tiny), 0.0);
    }

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(binomial(10, 3), Rational::from_usize(120));
        assert_eq!(binomial(3, 5), Rational::zero());
        let exact: f64 = (2..=300).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(300) - exact).abs() < 1e-9);
    }
}
