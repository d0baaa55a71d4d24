//! Extended-precision reals and the reduction of `exp(u)` modulo `2π`.
//!
//! Every residue the crate reports comes out of [`exp_mod_2pi`] or its
//! input-error-aware sibling [`reduce_exp`]. The reduction evaluates
//! `exp(u)` at full width (enough bits to hold the integer part of
//! `exp(u)/2π` plus the requested guard bits), divides by a cached `2π` of
//! matching width and keeps the fractional part. Each MPFR operation is
//! correctly rounded, so the certified bound charges one ulp per operation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use rug::float::{Constant, Round};
use rug::{Float, Integer};

use crate::error::{Error, Result};

/// Bits added on top of `ceil(u / ln 2) + guard` by [`required_bits`].
pub const SAFETY_MARGIN_BITS: u64 = 32;

/// Default upper limit on working precision.
pub const DEFAULT_PRECISION_CEILING: u32 = 1 << 22;

/// Smallest accepted guard.
pub const MIN_GUARD_BITS: u32 = 16;

/// Residues whose certified error is not below this are rejected.
pub const MAX_RESIDUE_ERROR_LOG2: i32 = -8;

static PRECISION_CEILING: AtomicU32 = AtomicU32::new(DEFAULT_PRECISION_CEILING);

pub fn precision_ceiling() -> u32 {
    PRECISION_CEILING.load(AtomicOrdering::Relaxed)
}

/// Changes the process-wide precision ceiling.
pub fn set_precision_ceiling(bits: u32) {
    PRECISION_CEILING.store(bits.max(64), AtomicOrdering::Relaxed);
}

/// Rejects precisions above the ceiling.
pub fn checked_precision(bits: u64) -> Result<u32> {
    let ceiling = precision_ceiling();
    if bits > u64::from(ceiling) {
        return Err(Error::PrecisionOverflow {
            required: bits,
            ceiling,
        });
    }
    Ok(bits as u32)
}

/// A binary floating-point number with an explicit precision.
///
/// The stored value is exact; operations round to nearest at the larger
/// operand precision, giving relative error at most `2^(1 - precision_bits)`.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct BigReal(Float);

impl BigReal {
    pub fn zero(prec: u32) -> Self {
        BigReal(Float::new(prec))
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        BigReal(Float::with_val(prec, v))
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        BigReal(Float::with_val(prec, v))
    }

    pub fn from_integer(v: &Integer, prec: u32) -> Self {
        BigReal(Float::with_val(prec, v))
    }

    /// Parses a decimal literal, rounding to nearest at `prec` bits.
    pub fn parse_decimal(s: &str, prec: u32) -> Result<Self> {
        let parsed = Float::parse(s.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        let v = Float::with_val(prec, parsed);
        if !v.is_finite() {
            return Err(Error::Parse(format!("{s:?} is not finite")));
        }
        Ok(BigReal(v))
    }

    pub fn from_float(v: Float) -> Self {
        BigReal(v)
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn into_float(self) -> Float {
        self.0
    }

    pub fn precision_bits(&self) -> u32 {
        self.0.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_sign_negative()
    }

    /// Binary exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        self.0.get_exp()
    }

    /// Rounds to a new precision.
    pub fn with_precision(&self, prec: u32) -> Self {
        BigReal(Float::with_val(prec, &self.0))
    }

    pub fn abs(&self) -> Self {
        BigReal(self.0.clone().abs())
    }

    pub fn exp(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.exp_ref()))
    }

    pub fn ln(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.ln_ref()))
    }

    pub fn sin(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.sin_ref()))
    }

    pub fn cos(&self) -> Self {
        BigReal(Float::with_val(self.0.prec(), self.0.cos_ref()))
    }

    /// `atan2(self, x)` at the larger precision.
    pub fn atan2(&self, x: &BigReal) -> Self {
        let prec = self.0.prec().max(x.0.prec());
        BigReal(Float::with_val(prec, self.0.atan2_ref(&x.0)))
    }

    pub fn floor(&self) -> Self {
        BigReal(self.0.clone().floor())
    }

    /// `x - floor(x)`, exact.
    pub fn fract_floor(&self) -> Self {
        let fl = self.0.clone().floor();
        BigReal(Float::with_val(self.0.prec(), &self.0 - &fl))
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        let s = self.0.to_string_radix(10, Some(digits.max(1)));
        normalize_decimal(&s)
    }

    /// Exact text form `0x<hex mantissa>p<binary exponent>`.
    pub fn to_hex_exact(&self) -> String {
        match self.0.to_integer_exp() {
            Some((m, e)) => {
                let (sign, m) = if m < 0 { ("-", -m) } else { ("", m) };
                format!("{sign}0x{}p{e}", m.to_string_radix(16))
            }
            None => "0x0p0".to_string(),
        }
    }

    /// Inverse of [`BigReal::to_hex_exact`]; the precision is raised to hold
    /// the mantissa exactly when `min_prec` is too small.
    pub fn parse_hex_exact(s: &str, min_prec: u32) -> Result<Self> {
        let (m, e) = parse_hex_parts(s)?;
        let bits = m.significant_bits().max(1);
        let mut v = Float::with_val(min_prec.max(bits), &m);
        v <<= e;
        Ok(BigReal(v))
    }
}

fn parse_hex_parts(s: &str) -> Result<(Integer, i32)> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let body = body
        .strip_prefix("0x")
        .ok_or_else(|| Error::Parse(format!("{s:?}: expected 0x<hex>p<exp>")))?;
    let (mant, exp) = body
        .split_once('p')
        .ok_or_else(|| Error::Parse(format!("{s:?}: missing binary exponent")))?;
    let m = Integer::from_str_radix(mant, 16).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
    let e: i32 = exp
        .parse()
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
    Ok((if neg { -m } else { m }, e))
}

/// Turns MPFR's `d.ddde±x` output into plain scientific notation.
fn normalize_decimal(s: &str) -> String {
    match s.split_once('e') {
        Some((mant, exp)) => {
            let e: i64 = exp.parse().unwrap_or(0);
            if e == 0 {
                mant.to_string()
            } else {
                format!("{mant}e{e}")
            }
        }
        None => s.to_string(),
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BigReal({}, prec={})",
            self.to_decimal(20),
            self.0.prec()
        )
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((f64::from(self.0.prec()) * std::f64::consts::LOG10_2).ceil() as usize) + 1;
        f.write_str(&self.to_decimal(digits))
    }
}

macro_rules! big_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                let prec = self.0.prec().max(rhs.0.prec());
                BigReal(Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
    };
}

big_binop!(Add, add, +);
big_binop!(Sub, sub, -);
big_binop!(Mul, mul, *);
big_binop!(Div, div, /);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(-self.0)
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal(Float::with_val(self.0.prec(), -&self.0))
    }
}

fn two_pi_cache() -> &'static RwLock<Float> {
    static CELL: OnceLock<RwLock<Float>> = OnceLock::new();
    CELL.get_or_init(|| RwLock::new(Float::with_val(320, Constant::Pi) * 2u32))
}

/// `2π` rounded to `prec` bits (relative error at most one ulp).
///
/// The cached value grows to the widest precision requested so far.
pub fn two_pi(prec: u32) -> Float {
    let cache = two_pi_cache();
    {
        let guard = cache.read().expect("2π cache poisoned");
        if guard.prec() >= prec.saturating_add(16) {
            return Float::with_val(prec, &*guard);
        }
    }
    let mut guard = cache.write().expect("2π cache poisoned");
    if guard.prec() < prec.saturating_add(16) {
        let target = prec.saturating_add(64).max(guard.prec().saturating_mul(2));
        *guard = Float::with_val(target, Constant::Pi) * 2u32;
    }
    Float::with_val(prec, &*guard)
}

/// `π` rounded to `prec` bits.
pub fn pi(prec: u32) -> Float {
    two_pi(prec) >> 1u32
}

/// Working precision for reducing `exp(u)` with absolute error `2^-guard`:
/// `ceil(max(u, 0)/ln 2) + guard + 32`.
pub fn required_bits(u: &BigReal, guard_bits: u32) -> u64 {
    let int_bits = if u.is_negative() || u.is_zero() {
        0
    } else {
        let uu = Float::with_val(128, u.as_float());
        let ln2 = Float::with_val(128, Constant::Log2);
        let q = (uu / ln2).ceil();
        q.to_integer()
            .and_then(|i| i.to_u64())
            .unwrap_or(u64::MAX / 2)
    };
    int_bits + u64::from(guard_bits) + SAFETY_MARGIN_BITS
}

/// Same as [`required_bits`] for an `f64` estimate of `u`, rounding up.
pub fn required_bits_f64(u: f64, guard_bits: u32) -> u64 {
    let int_bits = if u > 0.0 {
        (u / std::f64::consts::LN_2).ceil() as u64 + 1
    } else {
        0
    };
    int_bits + u64::from(guard_bits) + SAFETY_MARGIN_BITS
}

/// A residue in `[0, 1)` with a certified absolute error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Frac {
    value: BigReal,
    error_bound: BigReal,
}

impl Frac {
    pub fn new(value: BigReal, error_bound: BigReal) -> Result<Self> {
        let zero = Float::new(2);
        if *value.as_float() < zero || *value.as_float() >= 1u32 {
            return Err(Error::InvalidInput(format!(
                "residue {} outside [0, 1)",
                value.to_decimal(12)
            )));
        }
        if error_bound.is_negative() {
            return Err(Error::InvalidInput("negative error bound".into()));
        }
        let limit = Float::with_val(8, Float::i_exp(1, MAX_RESIDUE_ERROR_LOG2));
        if *error_bound.as_float() >= limit {
            return Err(Error::ResidueUncertain {
                bound: error_bound.to_f64(),
            });
        }
        Ok(Frac { value, error_bound })
    }

    pub fn value(&self) -> &BigReal {
        &self.value
    }

    pub fn error_bound(&self) -> &BigReal {
        &self.error_bound
    }

    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn error_f64(&self) -> f64 {
        self.error_bound.to_f64()
    }

    /// `log2` of the error bound (`-inf` for an exact residue).
    pub fn error_log2(&self) -> f64 {
        match self.error_bound.exponent() {
            None => f64::NEG_INFINITY,
            Some(e) => {
                let m = self.error_bound.to_f64() / 2f64.powi(e);
                f64::from(e) + m.log2()
            }
        }
    }

    /// The residue of the negated quantity: `1 - x`, or `0` when `x = 0`.
    pub fn negated(&self) -> Frac {
        if self.value.is_zero() {
            return self.clone();
        }
        let prec = self.value.precision_bits();
        let v = Float::with_val(prec, 1u32 - self.value.as_float());
        // 1 - x is exact only when x has few leading zeros; charge one ulp otherwise.
        let extra = Float::with_val(32, Float::i_exp(1, 1 - prec as i32));
        let bound = Float::with_val(32, self.error_bound.as_float() + &extra);
        let value = if v >= 1u32 { Float::new(prec) } else { v };
        Frac {
            value: BigReal(value),
            error_bound: BigReal(bound),
        }
    }

    /// Distance to `x` on the circle `R/Z`.
    pub fn circular_distance(&self, x: f64) -> f64 {
        circular_distance(self.value_f64(), x)
    }

    /// Circular distance to another residue, evaluated without rounding to f64.
    pub fn distance_to(&self, other: &BigReal) -> BigReal {
        let prec = self.value.precision_bits().max(other.precision_bits()) + 2;
        let mut d = Float::with_val(prec, self.value.as_float() - other.as_float());
        d -= Float::with_val(prec, d.floor_ref());
        let alt = Float::with_val(prec, 1u32 - &d);
        BigReal(if alt < d { alt } else { d })
    }
}

/// Distance between two residues on `R/Z`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Computes `{exp(u)/2π}` for an exactly represented `u` with absolute error
/// at most `2^-guard_bits`.
pub fn exp_mod_2pi(u: &BigReal, guard_bits: u32) -> Result<Frac> {
    if guard_bits < MIN_GUARD_BITS {
        return Err(Error::InvalidInput(format!(
            "guard_bits {guard_bits} < {MIN_GUARD_BITS}"
        )));
    }
    if !u.is_finite() {
        return Err(Error::InvalidInput("exponent is not finite".into()));
    }
    let prec = checked_precision(required_bits(u, guard_bits))?;
    reduce_exp(u.as_float(), None, prec, guard_bits)
}

/// Reduction at a caller-chosen working precision.
///
/// `u_err` bounds `|u - u_true|`; its effect on `exp(u)/2π` is added to the
/// certified bound. The returned value keeps `guard_bits + 32` bits.
pub fn reduce_exp(u: &Float, u_err: Option<&Float>, prec: u32, guard_bits: u32) -> Result<Frac> {
    let e = Float::with_val(prec, u.exp_ref());
    let q = Float::with_val(prec, &e / &two_pi(prec));
    let qexp = q.get_exp().unwrap_or(i32::MIN / 2);

    // exp, 2π and the division each contribute at most one ulp (2^-prec relative).
    let mut rel = Float::with_val(64, Float::i_exp(4, -(prec as i32)));
    if let Some(err) = u_err {
        // exp(u ± δ) = exp(u)(1 ± (e^δ - 1)) and e^δ - 1 <= 2δ for δ <= 1.
        let d = Float::with_val(64, err * 2u32);
        rel += d;
    }
    let mut bound = Float::with_val(64, &rel << qexp);

    let store_prec = guard_bits.saturating_add(32).min(prec).max(64);
    let f = q.fract();
    let mut value = Float::with_val(store_prec, &f);
    if store_prec < prec {
        bound += Float::with_val(64, Float::i_exp(1, -(store_prec as i32)));
    }
    if value >= 1u32 {
        value = Float::new(store_prec);
    }
    bound *= Float::with_val(64, 1.000_001);
    Frac::new(BigReal(value), BigReal(bound))
}

type EvalFn = dyn Fn(u32) -> Float + Send + Sync;

enum Repr {
    Exact(Float),
    Decimal(String),
    Computed { label: String, eval: Box<EvalFn> },
}

struct RealInner {
    repr: Repr,
    cache: Mutex<Option<Float>>,
}

/// A real number that can be evaluated to any precision.
///
/// Line parameters such as `log(2π)` or `log 2 / 2π` must be known to
/// thousands of bits when crossings far out on a spiral are reduced, so they
/// are stored as recipes rather than as fixed-width floats. `eval(prec)`
/// returns a value with relative error at most `2^-prec`.
#[derive(Clone)]
pub struct Real(Arc<RealInner>);

impl Real {
    fn from_repr(repr: Repr) -> Self {
        Real(Arc::new(RealInner {
            repr,
            cache: Mutex::new(None),
        }))
    }

    pub fn exact(v: BigReal) -> Self {
        Real::from_repr(Repr::Exact(v.into_float()))
    }

    pub fn from_f64(v: f64) -> Self {
        Real::exact(BigReal::from_f64(v, 64))
    }

    pub fn from_i64(v: i64) -> Self {
        Real::exact(BigReal::from_i64(v, 64))
    }

    pub fn zero() -> Self {
        Real::from_i64(0)
    }

    /// A decimal literal, evaluated by correct rounding at each precision.
    pub fn decimal(s: &str) -> Result<Self> {
        BigReal::parse_decimal(s, 64)?;
        Ok(Real::from_repr(Repr::Decimal(s.trim().to_string())))
    }

    /// A value given by `eval(prec)`, which must have relative error at most
    /// `2^-prec`.
    pub fn computed(
        label: impl Into<String>,
        eval: impl Fn(u32) -> Float + Send + Sync + 'static,
    ) -> Self {
        Real::from_repr(Repr::Computed {
            label: label.into(),
            eval: Box::new(eval),
        })
    }

    pub fn pi() -> Self {
        Real::computed("pi", pi)
    }

    pub fn half_pi() -> Self {
        Real::computed("pi/2", |prec| pi(prec) >> 1u32)
    }

    pub fn log_two_pi() -> Self {
        Real::computed("log(2pi)", |prec| {
            let w = prec + 16;
            Float::with_val(prec, two_pi(w).ln())
        })
    }

    pub fn log_pi() -> Self {
        Real::computed("log(pi)", |prec| {
            let w = prec + 16;
            Float::with_val(prec, pi(w).ln())
        })
    }

    pub fn log_two() -> Self {
        Real::computed("log(2)", |prec| Float::with_val(prec, Constant::Log2))
    }

    /// `log 2 / 2π`.
    pub fn log2_over_two_pi() -> Self {
        Real::computed("log2/(2pi)", |prec| {
            let w = prec + 16;
            let l = Float::with_val(w, Constant::Log2);
            Float::with_val(prec, l / two_pi(w))
        })
    }

    /// Parses a decimal literal or one of the named constants
    /// `pi`, `pi/2`, `2pi`, `log(2pi)`, `log(pi)`, `log(2)`, `log2/(2pi)`,
    /// an exact `0x..p..` form, each optionally negated.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix('-') {
            if !rest.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
                return Ok(Real::parse(rest)?.neg());
            }
        }
        let named = match t {
            "pi" => Some(Real::pi()),
            "pi/2" => Some(Real::half_pi()),
            "2pi" => Some(Real::computed("2pi", two_pi)),
            "log(2pi)" => Some(Real::log_two_pi()),
            "log(pi)" => Some(Real::log_pi()),
            "log(2)" => Some(Real::log_two()),
            "log2/(2pi)" => Some(Real::log2_over_two_pi()),
            _ => None,
        };
        if let Some(r) = named {
            return Ok(r);
        }
        if t.starts_with("0x") || t.starts_with("-0x") {
            return Ok(Real::exact(BigReal::parse_hex_exact(t, 64)?));
        }
        Real::decimal(t)
    }

    pub fn neg(&self) -> Self {
        let inner = self.clone();
        let label = match self.label().strip_prefix('-') {
            Some(rest) => rest.to_string(),
            None => format!("-{}", self.label()),
        };
        Real::computed(label, move |prec| -inner.eval_float(prec))
    }

    /// Text that [`Real::parse`] maps back to the same number.
    pub fn label(&self) -> String {
        match &self.0.repr {
            Repr::Exact(v) => {
                if v.is_zero() {
                    "0".to_string()
                } else if let Some(d) = short_decimal(v) {
                    d
                } else {
                    BigReal(v.clone()).to_hex_exact()
                }
            }
            Repr::Decimal(s) => s.clone(),
            Repr::Computed { label, .. } => label.clone(),
        }
    }

    fn eval_float(&self, prec: u32) -> Float {
        match &self.0.repr {
            Repr::Exact(v) => Float::with_val(prec, v),
            Repr::Decimal(s) => {
                Float::with_val(prec, Float::parse(s).expect("validated at construction"))
            }
            Repr::Computed { eval, .. } => {
                let mut cache = self.0.cache.lock().expect("real cache poisoned");
                if let Some(c) = cache.as_ref() {
                    if c.prec() >= prec.saturating_add(8) {
                        return Float::with_val(prec, c);
                    }
                }
                let wide = prec.saturating_add(8);
                let v = eval(wide);
                let out = Float::with_val(prec, &v);
                *cache = Some(v);
                out
            }
        }
    }

    pub fn eval(&self, prec: u32) -> BigReal {
        BigReal(self.eval_float(prec))
    }

    pub fn approx(&self) -> f64 {
        self.eval_float(64).to_f64()
    }

    /// True when the value is exactly zero (exact and decimal forms) or
    /// below `2^-200` in magnitude (computed forms).
    pub fn is_zero(&self) -> bool {
        let v = self.eval_float(256);
        v.is_zero() || v.get_exp().is_some_and(|e| e < -200)
    }

    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.eval_float(64).is_sign_negative() {
            -1
        } else {
            1
        }
    }
}

fn short_decimal(v: &Float) -> Option<String> {
    let f = v.to_f64();
    if Float::with_val(v.prec().max(64), f) == *v {
        let s = format!("{f}");
        if Float::parse(&s)
            .map(|p| Float::with_val(v.prec().max(64), p) == *v)
            .unwrap_or(false)
        {
            return Some(s);
        }
    }
    None
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.label())
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.eval_float(256).partial_cmp(&other.eval_float(256)) == Some(Ordering::Equal)
    }
}

/// Rounds `x * 2^bits` in the given direction.
pub fn scaled_integer(x: &Float, bits: u32, round: Round) -> Integer {
    let mut v = Float::with_val(x.prec().max(bits + 64), x);
    v <<= bits;
    v.to_integer_round(round)
        .map(|(i, _)| i)
        .unwrap_or_default()
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn extra_precision_agrees(u in 0.0f64..500.0, g in 16u32..80) {
            let u = BigReal::from_f64(u, 64);
            let base = exp_mod_2pi(&u, g).unwrap();
            let prec = required_bits(&u, g) as u32 + 64;
            let wide = reduce_exp(u.as_float(), None, prec, g + 64).unwrap();
            let d = base.distance_to(wide.value());
            prop_assert!(d.to_f64() <= 2f64.powi(1 - g as i32));
        }

        #[test]
        fn adding_log_two_doubles(u in 0.0f64..300.0, g in 24u32..60) {
            let u0 = BigReal::from_f64(u, 64);
            let prec = required_bits(&u0, g) as u32 + 8;
            let shifted = &u0.with_precision(prec) + &BigReal::from_float(Float::with_val(prec, Constant::Log2));
            let base = exp_mod_2pi(&u0, g).unwrap();
            let f2 = exp_mod_2pi(&shifted, g).unwrap();
            let doubled = (base.value() + base.value()).fract_floor();
            prop_assert!(f2.distance_to(&doubled).to_f64() <= 2f64.powi(2 - g as i32));
        }

        #[test]
        fn required_bits_monotone(u in -10.0f64..5000.0, du in 0.0f64..100.0, g in 16u32..200, dg in 0u32..50) {
            let a = required_bits(&BigReal::from_f64(u, 64), g);
            let b = required_bits(&BigReal::from_f64(u + du, 64), g);
            let c = required_bits(&BigReal::from_f64(u, 64), g + dg);
            prop_assert!(a <= b && a <= c);
        }
    }
}
