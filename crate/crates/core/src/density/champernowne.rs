use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::precision::{two_pi, BigReal, Frac, Real};
use crate::spiral::ObliqueLine;

/// A source of binary digits `b_1 b_2 …` of a number in `(0, 1)`.
pub trait BitSource: Send + Sync {
    /// Digits `start .. start + n` (0-based), each 0 or 1.
    fn bits(&self, start: u64, n: usize) -> Vec<u8>;
}

/// Binary digits of `0.1 10 11 100 101 …`: every positive integer written
/// in binary, in increasing order.
#[derive(Clone, Copy, Debug, Default)]
pub struct Champernowne;

impl BitSource for Champernowne {
    fn bits(&self, start: u64, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        // Skip whole length classes: integers of bit length L fill L·2^(L-1) digits.
        let mut len = 1u32;
        let mut skip = start;
        loop {
            let class = u64::from(len) << (len - 1);
            if skip < class {
                break;
            }
            skip -= class;
            len += 1;
        }
        let mut value = (1u64 << (len - 1)) + skip / u64::from(len);
        let mut offset = (skip % u64::from(len)) as u32;
        while out.len() < n {
            let width = 64 - value.leading_zeros();
            while offset < width && out.len() < n {
                out.push(((value >> (width - 1 - offset)) & 1) as u8);
                offset += 1;
            }
            value += 1;
            offset = 0;
        }
        out
    }
}

/// The first `n` digits of the binary Champernowne constant, as text.
pub fn champernowne_bits(n: usize) -> String {
    Champernowne
        .bits(0, n)
        .into_iter()
        .map(|b| if b == 1 { '1' } else { '0' })
        .collect()
}

/// `{2^k a}` obtained by dropping the first `k` digits of `a`.
///
/// The result keeps `precision_bits` digits; the discarded tail is below
/// `2^-precision_bits`.
pub fn shift_frac_oracle(k: u64, precision_bits: u32) -> Result<Frac> {
    shift_frac_oracle_with(&Champernowne, k, precision_bits)
}

pub fn shift_frac_oracle_with(source: &dyn BitSource, k: u64, precision_bits: u32) -> Result<Frac> {
    if precision_bits < 64 {
        return Err(Error::InvalidInput(format!(
            "oracle precision {precision_bits} < 64"
        )));
    }
    let value = digits_value(&source.bits(k, precision_bits as usize), precision_bits);
    let bound = Float::with_val(32, Float::i_exp(1, -(precision_bits as i32)));
    Frac::new(BigReal::from_float(value), BigReal::from_float(bound))
}

fn digits_value(digits: &[u8], prec: u32) -> Float {
    let text: String = digits
        .iter()
        .map(|&b| if b == 1 { '1' } else { '0' })
        .collect();
    let m = Integer::from_str_radix(&text, 2).unwrap_or_default();
    let mut v = Float::with_val(prec.max(64), m);
    v >>= digits.len() as u32;
    v
}

/// The line `p* = log(2π a) + iπ/2`, `α* = log 2 / 2π` for a number `a`
/// given by its first `prefix_bits` binary digits.
///
/// Its crossing `2j` sits at `2π a 2^j i`, so even residues are `{2^j a}`.
#[derive(Clone, Debug)]
pub struct ChampernowneLine {
    prefix_bits: u32,
    a: BigReal,
    line: ObliqueLine,
}

impl ChampernowneLine {
    pub fn new(prefix_bits: u32) -> Result<Self> {
        ChampernowneLine::with_source(&Champernowne, prefix_bits)
    }

    /// A prefix long enough for the first `crossings` residues at `guard_bits`.
    pub fn for_crossings(crossings: u64, guard_bits: u32) -> Result<Self> {
        let bits = crossings / 2 + u64::from(guard_bits) + 128;
        ChampernowneLine::new(
            u32::try_from(bits).map_err(|_| Error::InvalidInput("prefix too long".into()))?,
        )
    }

    pub fn with_source(source: &dyn BitSource, prefix_bits: u32) -> Result<Self> {
        if prefix_bits < 64 {
            return Err(Error::InvalidInput(format!(
                "prefix of {prefix_bits} bits is too short"
            )));
        }
        let a = digits_value(&source.bits(0, prefix_bits as usize), prefix_bits);
        let a_exact = a.clone();
        let p_re = Real::computed(format!("log(2pi*a[{prefix_bits}])"), move |prec| {
            let w = prec + 16;
            let x = Float::with_val(w, two_pi(w) * &a_exact);
            Float::with_val(prec, x.ln())
        });
        let line = ObliqueLine::new(p_re, Real::half_pi(), Real::log2_over_two_pi());
        Ok(ChampernowneLine {
            prefix_bits,
            a: BigReal::from_float(a),
            line,
        })
    }

    pub fn prefix_bits(&self) -> u32 {
        self.prefix_bits
    }

    pub fn a(&self) -> &BigReal {
        &self.a
    }

    pub fn line(&self) -> &ObliqueLine {
        &self.line
    }
}
