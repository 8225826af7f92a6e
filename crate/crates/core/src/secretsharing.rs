//! Secret-sharing primitives: the one-time pad and Shamir's (t, n)-threshold
//! scheme over a small prime field, with exact secrecy verification by
//! exhaustive counting.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::strings::BitString;

/// Two XOR shares of a bit-string secret.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OtpShares {
    pub share1: BitString,
    pub share2: BitString,
}

/// Splits with an explicit pad; `otp_share` draws the pad from the rng.
pub fn otp_share_with_pad(secret: &BitString, pad: &BitString) -> Result<OtpShares> {
    Ok(OtpShares { share1: *pad, share2: pad.xor(secret)? })
}

pub fn otp_share(secret: &BitString, rng: &mut impl Rng) -> Result<OtpShares> {
    let pad = BitString::from_bits((0..secret.len()).map(|_| rng.random_range(0..=1u8)))?;
    otp_share_with_pad(secret, &pad)
}

pub fn otp_reconstruct(s: &OtpShares) -> Result<BitString> {
    s.share1.xor(&s.share2)
}

/// One player's Shamir share: (index, value) = (j, P(j) mod q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ShamirShare {
    pub index: u64,
    pub value: u64,
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut f = 2;
    while f * f <= q {
        if q % f == 0 {
            return false;
        }
        f += 1;
    }
    true
}

fn validate_params(t: usize, n: usize, q: u64) -> Result<()> {
    if !is_prime(q) {
        return Err(Error::InvalidParameter(format!("q = {q} is not prime")));
    }
    if q <= n as u64 {
        return Err(Error::InvalidParameter(format!("need q > n, got q = {q}, n = {n}")));
    }
    if t < 1 || t > n {
        return Err(Error::InvalidParameter(format!("t = {t} outside 1..={n}")));
    }
    Ok(())
}

fn mod_pow(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

fn mod_inv(x: u64, q: u64) -> u64 {
    // q prime, x not 0 mod q
    mod_pow(x % q, q - 2, q)
}

fn poly_eval(coeffs: &[u64], x: u64, q: u64) -> u64 {
    coeffs.iter().rev().fold(0u64, |acc, &c| (acc * x + c) % q)
}

/// Shares with explicit polynomial coefficients a_1..a_{t-1}; the random
/// variant draws them uniformly. Exposed for exhaustive verification.
pub fn shamir_share_with_coeffs(
    secret: u64,
    coeffs: &[u64],
    t: usize,
    n: usize,
    q: u64,
) -> Result<Vec<ShamirShare>> {
    validate_params(t, n, q)?;
    if secret >= q {
        return Err(Error::InvalidParameter(format!("secret {secret} not in 0..{q}")));
    }
    if coeffs.len() != t - 1 {
        return Err(Error::InvalidParameter(format!(
            "expected {} coefficients, got {}",
            t - 1,
            coeffs.len()
        )));
    }
    if coeffs.iter().any(|&c| c >= q) {
        return Err(Error::InvalidParameter("coefficient outside field".to_string()));
    }
    let mut poly = Vec::with_capacity(t);
    poly.push(secret);
    poly.extend_from_slice(coeffs);
    Ok((1..=n as u64)
        .map(|j| ShamirShare { index: j, value: poly_eval(&poly, j, q) })
        .collect())
}

pub fn shamir_share(
    secret: u64,
    t: usize,
    n: usize,
    q: u64,
    rng: &mut impl Rng,
) -> Result<Vec<ShamirShare>> {
    validate_params(t, n, q)?;
    let coeffs: Vec<u64> = (0..t - 1).map(|_| rng.random_range(0..q)).collect();
    shamir_share_with_coeffs(secret, &coeffs, t, n, q)
}

fn lagrange_at(shares: &[ShamirShare], x: u64, q: u64) -> u64 {
    let mut acc = 0u64;
    for (j, sj) in shares.iter().enumerate() {
        let mut term = sj.value % q;
        for (l, sl) in shares.iter().enumerate() {
            if l == j {
                continue;
            }
            let num = (x + q - sl.index % q) % q;
            let den = (sj.index % q + q - sl.index % q) % q;
            term = term * num % q * mod_inv(den, q) % q;
        }
        acc = (acc + term) % q;
    }
    acc
}

/// Lagrange interpolation at 0 using the first t shares; when more shares
/// are supplied, every extra share must lie on the interpolated polynomial.
pub fn shamir_reconstruct(shares: &[ShamirShare], t: usize, q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::InvalidParameter(format!("q = {q} is not prime")));
    }
    if shares.len() < t || t < 1 {
        return Err(Error::InvalidParameter(format!(
            "{} shares cannot meet threshold {t}",
            shares.len()
        )));
    }
    let mut indices: Vec<u64> = shares.iter().map(|s| s.index).collect();
    indices.sort_unstable();
    if indices.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("duplicate share indices".to_string()));
    }
    if shares.iter().any(|s| s.index == 0 || s.index >= q || s.value >= q) {
        return Err(Error::InvalidParameter("share outside the field".to_string()));
    }
    let base = &shares[..t];
    for extra in &shares[t..] {
        if lagrange_at(base, extra.index, q) != extra.value {
            return Err(Error::InconsistentShares);
        }
    }
    Ok(lagrange_at(base, 0, q))
}

#[derive(Clone, Debug, Serialize)]
pub struct SecrecyReport {
    pub t: usize,
    pub n: usize,
    pub q: u64,
    pub subsets_checked: usize,
    pub holds: bool,
}

/// Perfect secrecy by exact counting: for every (t-1)-subset of players,
/// the joint distribution of observed share values over all coefficient
/// tuples is identical for every secret.
pub fn verify_secrecy(t: usize, n: usize, q: u64) -> Result<SecrecyReport> {
    validate_params(t, n, q)?;
    let tuples = (q as u128).pow(t as u32);
    if tuples > 1_000_000 {
        return Err(Error::InvalidParameter(format!(
            "q^t = {tuples} too large for exhaustive counting"
        )));
    }
    let players: Vec<u64> = (1..=n as u64).collect();
    let mut subsets_checked = 0usize;
    let mut holds = true;
    for subset in players.iter().copied().combinations(t - 1) {
        subsets_checked += 1;
        let mut reference: Option<BTreeMap<Vec<u64>, u64>> = None;
        for secret in 0..q {
            let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
            for mut idx in 0..q.pow(t as u32 - 1) {
                let mut coeffs = Vec::with_capacity(t - 1);
                for _ in 0..t - 1 {
                    coeffs.push(idx % q);
                    idx /= q;
                }
                let shares = shamir_share_with_coeffs(secret, &coeffs, t, n, q)?;
                let observed: Vec<u64> = subset
                    .iter()
                    .map(|&j| shares[(j - 1) as usize].value)
                    .collect();
                *counts.entry(observed).or_insert(0) += 1;
            }
            match &reference {
                None => reference = Some(counts),
                Some(r) => {
                    if r != &counts {
                        holds = false;
                    }
                }
            }
        }
    }
    Ok(SecrecyReport { t, n, q, subsets_checked, holds })
}
