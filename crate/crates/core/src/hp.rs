// SPDX-License-Identifier: Apache-2.0

//! Multiple-precision evaluation of signed cosecant-power sums.
//!
//! The alternating sums with a positive offset are exponentially small while
//! their terms are of order one, so double precision loses every digit. The
//! sum is recomputed at doubling binary precision until two consecutive
//! results agree to about 60 bits.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;
const START_BITS: usize = 128;
const MAX_BITS: usize = 16384;
const AGREE_BITS: i32 = 60;

/// Nearest-below `f64` of a finite `BigFloat` (zero for zero).
pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match x.as_raw_parts() {
        Some((m, _, sign, e, _)) => {
            let top = *m.last().unwrap_or(&0);
            let v = libm::ldexp(top as f64, e - 64);
            if sign == Sign::Neg {
                -v
            } else {
                v
            }
        }
        None => f64::NAN,
    }
}

/// `Σ sign_j (x² + sin²(j π / n))^{-k/2}` at `bits` of precision.
fn signed_sum(n: usize, k: u32, x: f64, terms: &[(usize, f64)], bits: usize, cc: &mut Consts) -> BigFloat {
    // Angles rπ/n are generated by repeated complex rotation; the guard bits
    // absorb the linear error growth of the recurrence.
    let wb = bits + 32 + usize::BITS as usize - n.leading_zeros() as usize;
    let pi = cc.pi(wb, RM);
    let xb = BigFloat::from_f64(x, wb);
    let x2 = xb.mul(&xb, wb, RM);
    let step = pi.div(&BigFloat::from_word(n as u64, wb), wb, RM);
    let (sin1, cos1) = (step.sin(wb, RM, cc), step.cos(wb, RM, cc));
    // t_j = t_{n-j}: merge coefficients before the expensive evaluations.
    let mut coef = alloc::vec![0.0f64; n / 2 + 1];
    for &(j, sign) in terms {
        coef[j.min(n - j)] += sign;
    }
    let mut acc = BigFloat::from_word(0, wb);
    let (mut s, mut c) = (BigFloat::from_word(0, wb), BigFloat::from_word(1, wb));
    for &cf in coef.iter() {
        if cf != 0.0 {
            let base = x2.add(&s.mul(&s, wb, RM), wb, RM);
            let mut denom = base.sqrt(wb, RM);
            if k > 1 {
                denom = denom.mul(&base.powi(((k - 1) / 2) as usize, wb, RM), wb, RM);
            }
            let t = BigFloat::from_word(cf.abs() as u64, wb).div(&denom, wb, RM);
            acc = if cf > 0.0 { acc.add(&t, wb, RM) } else { acc.sub(&t, wb, RM) };
        }
        let sn = s.mul(&cos1, wb, RM).add(&c.mul(&sin1, wb, RM), wb, RM);
        let cn = c.mul(&cos1, wb, RM).sub(&s.mul(&sin1, wb, RM), wb, RM);
        s = sn;
        c = cn;
    }
    acc
}

/// Evaluates the signed sum to full double accuracy. Returns the value and
/// the precision in bits at which two consecutive evaluations agreed.
pub(crate) fn signed_sum_f64(n: usize, k: u32, x: f64, terms: &[(usize, f64)]) -> (f64, usize) {
    let mut cc = match Consts::new() {
        Ok(c) => c,
        Err(_) => return (f64::NAN, 0),
    };
    let mut bits = START_BITS;
    let mut prev = signed_sum(n, k, x, terms, bits, &mut cc);
    loop {
        let next_bits = bits * 2;
        let cur = signed_sum(n, k, x, terms, next_bits, &mut cc);
        let diff = cur.sub(&prev, next_bits, RM);
        let agreed = if cur.is_zero() {
            diff.is_zero()
        } else {
            match (diff.exponent(), cur.exponent()) {
                (_, _) if diff.is_zero() => true,
                (Some(ed), Some(ec)) => ed < ec - AGREE_BITS,
                _ => false,
            }
        };
        if agreed || next_bits >= MAX_BITS {
            return (to_f64(&cur), bits);
        }
        prev = cur;
        bits = next_bits;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_round_trips() {
        for &v in &[1.0, -2.5, 0.1, 1e-200, 3.0e150, -7.0e-30] {
            let b = BigFloat::from_f64(v, 128);
            assert_eq!(to_f64(&b), v);
        }
        assert_eq!(to_f64(&BigFloat::from_word(0, 128)), 0.0);
    }

    #[test]
    fn three_term_sum() {
        // sin(π/4)^{-1} - sin(π/2)^{-1} + sin(3π/4)^{-1}
        let (v, _) = signed_sum_f64(4, 1, 0.0, &[(1, 1.0), (2, -1.0), (3, 1.0)]);
        assert!((v - (2.0 * core::f64::consts::SQRT_2 - 1.0)).abs() < 1e-15);
    }
}
