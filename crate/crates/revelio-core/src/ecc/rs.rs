//! Shortened Reed-Solomon code RS(36, 2) over GF(256) with errors-and-erasures
//! decoding.
//!
//! The code is systematic: two payload bytes followed by 34 parity bytes.
//! The generator polynomial is narrow-sense with roots alpha^1..alpha^34, so a
//! decoder can correct any combination of t errors and e erasures with
//! 2t + e <= 34.

use super::gf;
use crate::ecc::{Codeword, RevelioCode, CODEWORD_LEN, PARITY_LEN, PAYLOAD_LEN};
use std::sync::LazyLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum RsDecodeError {
    #[error("received word has {0} erasures, more than the {PARITY_LEN} the code can absorb")]
    TooManyErasures(usize),
    #[error("error locator degree {errors} with {erasures} erasures exceeds 2t + e <= {PARITY_LEN}")]
    BeyondCapacity { errors: usize, erasures: usize },
    #[error("locator roots do not match the locator degree")]
    LocatorMismatch,
    #[error("locator derivative vanished at an error position")]
    DegenerateLocator,
    #[error("syndromes are nonzero after correction")]
    ResidualSyndrome,
    #[error("received word must have exactly {CODEWORD_LEN} positions, got {0}")]
    WrongLength(usize),
}

/// Generator polynomial, ascending coefficients, degree 34.
static GENERATOR: LazyLock<Vec<u8>> = LazyLock::new(|| {
    let mut g = vec![1u8];
    for i in 1..=PARITY_LEN {
        g = gf::poly_mul(&g, &[gf::alpha_pow(i), 1]);
    }
    g
});

/// Systematically encodes a 16-bit payload into a 36-byte codeword.
pub fn rs_encode(code: RevelioCode) -> Codeword {
    let payload = code.0.to_be_bytes();
    let mut buf = [0u8; CODEWORD_LEN];
    buf[..PAYLOAD_LEN].copy_from_slice(&payload);

    // Polynomial long division of payload(x) * x^34 by the generator; the
    // remainder is the parity. Generator is monic so no scaling is needed.
    let gen = &*GENERATOR;
    for i in 0..PAYLOAD_LEN {
        let coef = buf[i];
        if coef != 0 {
            for (j, &gc) in gen.iter().enumerate().take(PARITY_LEN) {
                // gen[PARITY_LEN] is the leading 1 handled by the shift.
                buf[i + PARITY_LEN - j] ^= gf::mul(gc, coef);
            }
        }
    }
    buf[..PAYLOAD_LEN].copy_from_slice(&payload);
    Codeword(buf)
}

/// Syndromes S_j = c(alpha^j) for j = 1..=34, returned ascending (index 0
/// holds S_1). Position i of the codeword is the coefficient of x^(35-i).
fn syndromes(cw: &[u8; CODEWORD_LEN]) -> [u8; PARITY_LEN] {
    let mut out = [0u8; PARITY_LEN];
    for (j, s) in out.iter_mut().enumerate() {
        let x = gf::alpha_pow(j + 1);
        let mut acc = 0u8;
        for &c in cw.iter() {
            acc = gf::mul(acc, x) ^ c;
        }
        *s = acc;
    }
    out
}

/// Berlekamp–Massey over a syndrome sequence; returns the locator polynomial
/// in ascending coefficients with constant term 1.
fn berlekamp_massey(synd: &[u8]) -> Vec<u8> {
    let mut lambda = vec![1u8];
    let mut prev = vec![1u8];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut prev_disc = 1u8;

    for n in 0..synd.len() {
        let mut disc = synd[n];
        for i in 1..=l.min(lambda.len() - 1) {
            disc ^= gf::mul(lambda[i], synd[n - i]);
        }
        if disc == 0 {
            m += 1;
            continue;
        }
        let update_l = 2 * l <= n;
        let snapshot = if update_l { Some(lambda.clone()) } else { None };
        let coef = gf::div(disc, prev_disc);
        if lambda.len() < prev.len() + m {
            lambda.resize(prev.len() + m, 0);
        }
        for (i, &p) in prev.iter().enumerate() {
            if p != 0 {
                lambda[i + m] ^= gf::mul(coef, p);
            }
        }
        if let Some(snap) = snapshot {
            l = n + 1 - l;
            prev = snap;
            prev_disc = disc;
            m = 1;
        } else {
            m += 1;
        }
    }
    while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
        lambda.pop();
    }
    lambda
}

/// Decodes a received word in which erased positions are `None`. Succeeds
/// whenever 2*(number of errors) + (number of erasures) <= 34.
pub fn rs_decode(received: &[Option<u8>]) -> Result<RevelioCode, RsDecodeError> {
    if received.len() != CODEWORD_LEN {
        return Err(RsDecodeError::WrongLength(received.len()));
    }

    let mut cw = [0u8; CODEWORD_LEN];
    let mut erasures = Vec::new();
    for (i, v) in received.iter().enumerate() {
        match v {
            Some(b) => cw[i] = *b,
            None => erasures.push(i),
        }
    }
    if erasures.len() > PARITY_LEN {
        return Err(RsDecodeError::TooManyErasures(erasures.len()));
    }

    let synd = syndromes(&cw);
    if erasures.is_empty() && synd.iter().all(|&s| s == 0) {
        return Ok(payload_of(&cw));
    }

    // Erasure locator Gamma(x) = prod (1 - X_e x) over known locations.
    let mut gamma = vec![1u8];
    for &e in &erasures {
        gamma = gf::poly_mul(&gamma, &[1, gf::alpha_pow(CODEWORD_LEN - 1 - e)]);
    }

    // Forney syndromes: coefficients e.. of S(x)*Gamma(x) follow the plain
    // error-locator recurrence, so Berlekamp-Massey sees an erasure-free
    // sequence of length 34 - e.
    let xi = gf::poly_mul(&synd, &gamma);
    let shifted: Vec<u8> = (erasures.len()..PARITY_LEN)
        .map(|c| xi.get(c).copied().unwrap_or(0))
        .collect();
    let lambda = berlekamp_massey(&shifted);
    let n_errors = lambda.len() - 1;
    if 2 * n_errors + erasures.len() > PARITY_LEN {
        return Err(RsDecodeError::BeyondCapacity {
            errors: n_errors,
            erasures: erasures.len(),
        });
    }

    // Combined locator and Chien search over the 36 real positions. Roots
    // landing in the shortened prefix surface as a count mismatch.
    let psi = gf::poly_mul(&lambda, &gamma);
    let mut locations = Vec::new();
    for i in 0..CODEWORD_LEN {
        let x_inv = gf::alpha_pow_neg(CODEWORD_LEN - 1 - i);
        if gf::poly_eval(&psi, x_inv) == 0 {
            locations.push(i);
        }
    }
    if locations.len() != psi.len() - 1 {
        return Err(RsDecodeError::LocatorMismatch);
    }

    // Forney's formula with first consecutive root alpha^1:
    // magnitude = Omega(X^-1) / Psi'(X^-1).
    let omega_full = gf::poly_mul(&synd, &psi);
    let omega = &omega_full[..PARITY_LEN.min(omega_full.len())];
    let psi_deriv = gf::poly_derivative(&psi);
    for &i in &locations {
        let x_inv = gf::alpha_pow_neg(CODEWORD_LEN - 1 - i);
        let den = gf::poly_eval(&psi_deriv, x_inv);
        if den == 0 {
            return Err(RsDecodeError::DegenerateLocator);
        }
        cw[i] ^= gf::div(gf::poly_eval(omega, x_inv), den);
    }

    if syndromes(&cw).iter().any(|&s| s != 0) {
        return Err(RsDecodeError::ResidualSyndrome);
    }
    Ok(payload_of(&cw))
}

fn payload_of(cw: &[u8; CODEWORD_LEN]) -> RevelioCode {
    RevelioCode(u16::from_be_bytes([cw[0], cw[1]]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn as_received(cw: &Codeword) -> Vec<Option<u8>> {
        cw.0.iter().copied().map(Some).collect()
    }

    #[test]
    fn zero_payload_is_all_zero() {
        assert_eq!(rs_encode(RevelioCode(0)).0, [0u8; CODEWORD_LEN]);
    }

    #[test]
    fn encoding_is_systematic() {
        let cw = rs_encode(RevelioCode(0xABCD));
        assert_eq!(cw.0[0], 0xAB);
        assert_eq!(cw.0[1], 0xCD);
    }

    /// Independent oracle: every codeword must evaluate to zero at the 34
    /// generator roots, checked with table-free shift-and-xor arithmetic.
    #[test]
    fn codewords_have_zero_syndromes_by_naive_evaluation() {
        fn naive_mul(mut a: u8, mut b: u8) -> u8 {
            let mut acc = 0u8;
            while b != 0 {
                if b & 1 != 0 {
                    acc ^= a;
                }
                let carry = a & 0x80 != 0;
                a <<= 1;
                if carry {
                    a ^= 0x1D;
                }
                b >>= 1;
            }
            acc
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..64 {
            let cw = rs_encode(RevelioCode(rng.gen()));
            for j in 1..=PARITY_LEN {
                // alpha^j by repeated naive doubling.
                let mut x = 1u8;
                for _ in 0..j {
                    x = naive_mul(x, 2);
                }
                let mut acc = 0u8;
                for &c in cw.0.iter() {
                    acc = naive_mul(acc, x) ^ c;
                }
                assert_eq!(acc, 0, "syndrome {j} nonzero");
            }
        }
    }

    #[test]
    fn noiseless_round_trip() {
        for payload in [0x0000, 0x0001, 0xABCD, 0xFFFF, 0x8000] {
            let cw = rs_encode(RevelioCode(payload));
            assert_eq!(rs_decode(&as_received(&cw)), Ok(RevelioCode(payload)));
        }
    }

    #[test]
    fn corrects_17_errors_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let payload = RevelioCode(rng.gen());
            let cw = rs_encode(payload);
            let mut received = as_received(&cw);
            let mut positions: Vec<usize> = (0..CODEWORD_LEN).collect();
            positions.shuffle(&mut rng);
            for &p in positions.iter().take(17) {
                let wrong = loop {
                    let w: u8 = rng.gen();
                    if w != cw.0[p] {
                        break w;
                    }
                };
                received[p] = Some(wrong);
            }
            assert_eq!(rs_decode(&received), Ok(payload));
        }
    }

    #[test]
    fn corrects_34_erasures() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..200 {
            let payload = RevelioCode(rng.gen());
            let cw = rs_encode(payload);
            let mut received = as_received(&cw);
            let mut positions: Vec<usize> = (0..CODEWORD_LEN).collect();
            positions.shuffle(&mut rng);
            for &p in positions.iter().take(PARITY_LEN) {
                received[p] = None;
            }
            assert_eq!(rs_decode(&received), Ok(payload));
        }
    }

    #[test]
    fn rejects_35_erasures() {
        let cw = rs_encode(RevelioCode(0x1234));
        let mut received = as_received(&cw);
        for r in received.iter_mut().take(35) {
            *r = None;
        }
        assert_eq!(rs_decode(&received), Err(RsDecodeError::TooManyErasures(35)));
    }

    #[test]
    fn mixed_errors_and_erasures_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let payload = RevelioCode(rng.gen());
            let cw = rs_encode(payload);
            let mut received = as_received(&cw);
            let n_errors = rng.gen_range(0..=17);
            let max_erasures = PARITY_LEN - 2 * n_errors;
            let n_erasures = rng.gen_range(0..=max_erasures);
            let mut positions: Vec<usize> = (0..CODEWORD_LEN).collect();
            positions.shuffle(&mut rng);
            for &p in positions.iter().take(n_errors) {
                let wrong = loop {
                    let w: u8 = rng.gen();
                    if w != cw.0[p] {
                        break w;
                    }
                };
                received[p] = Some(wrong);
            }
            for &p in positions.iter().skip(n_errors).take(n_erasures) {
                received[p] = None;
            }
            assert_eq!(
                rs_decode(&received),
                Ok(payload),
                "failed with {n_errors} errors, {n_erasures} erasures"
            );
        }
    }
}
