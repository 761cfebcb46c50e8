//! GF(2^n) arithmetic in the polynomial basis, n <= 8.
//!
//! Fixed irreducible polynomials keep the families bit-exact across
//! platforms. Addition is XOR; multiplication is carry-less followed by
//! modular reduction.

use crate::error::{Error, Result};

/// Reduction polynomial for GF(2^n), indexed by n; bit k is the
/// coefficient of x^k.
pub const IRREDUCIBLE: [u32; 9] = [
    0x0,   // n = 0, unused
    0x3,   // x + 1
    0x7,   // x^2 + x + 1
    0xb,   // x^3 + x + 1
    0x13,  // x^4 + x + 1
    0x25,  // x^5 + x^2 + 1
    0x43,  // x^6 + x + 1
    0x83,  // x^7 + x + 1
    0x11b, // x^8 + x^4 + x^3 + x + 1
];

pub const MAX_BITS: usize = 8;

pub fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_BITS {
        return Err(Error::InputWidthTooLarge(n));
    }
    Ok(())
}

/// Field multiplication in GF(2^n).
pub fn gf_mul(a: u16, b: u16, n: usize) -> u16 {
    debug_assert!((1..=MAX_BITS).contains(&n));
    let mut acc: u32 = 0;
    let a = a as u32;
    let b = b as u32;
    for k in 0..n {
        if (b >> k) & 1 == 1 {
            acc ^= a << k;
        }
    }
    let poly = IRREDUCIBLE[n];
    for k in (n..2 * n).rev() {
        if (acc >> k) & 1 == 1 {
            acc ^= poly << (k - n);
        }
    }
    (acc & ((1 << n) - 1)) as u16
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_laws_exhaustive_small_n() {
        for n in 1..=4usize {
            let q = 1u16 << n;
            for a in 0..q {
                assert_eq!(gf_mul(1, a, n), a, "identity fails at n={n}");
                for b in 0..q {
                    assert_eq!(gf_mul(a, b, n), gf_mul(b, a, n), "commutativity n={n}");
                    for c in 0..q {
                        // distributivity over XOR-addition
                        assert_eq!(
                            gf_mul(a, b ^ c, n),
                            gf_mul(a, b, n) ^ gf_mul(a, c, n),
                            "distributivity n={n}"
                        );
                        // associativity
                        assert_eq!(
                            gf_mul(gf_mul(a, b, n), c, n),
                            gf_mul(a, gf_mul(b, c, n), n),
                            "associativity n={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn nonzero_elements_invertible() {
        for n in 1..=8usize {
            let q = 1u16 << n;
            for a in 1..q {
                let mut seen = vec![false; q as usize];
                for x in 0..q {
                    seen[gf_mul(a, x, n) as usize] = true;
                }
                assert!(seen.iter().all(|&s| s), "x -> {a}x not bijective at n={n}");
            }
        }
    }

    #[test]
    fn width_gate() {
        assert!(check_width(0).is_err());
        assert!(check_width(8).is_ok());
        assert!(check_width(9).is_err());
    }
}
