//! Open Vote Network arithmetic: voting keys, blinding keys, vote encryption
//! and the self-tally.
//!
//! Each voter i holds x_i and publishes x_i·G. The blinding key
//! Y_i = Σ_{j<i} PK_j − Σ_{j>i} PK_j satisfies Σ_i x_i·Y_i = O, so the sum of
//! encrypted votes V_i = v_i·G + x_i·Y_i collapses to (Σ v_i)·G.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::curve::{sign_of, Point};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::rng::derive_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterKeypair {
    pub secret: Scalar,
    pub public: Point,
}

impl VoterKeypair {
    /// Builds a keypair from a secret, negating it when needed so the public
    /// key's x-coordinate has sign 0.
    pub fn from_secret(x: Scalar) -> Self {
        let pk = Point::generator().mul(&x);
        if sign_of(&pk.x()) {
            // (q − x)·G = −(x·G), which only flips the sign of x
            Self {
                secret: -x,
                public: -pk,
            }
        } else {
            Self {
                secret: x,
                public: pk,
            }
        }
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        Self::from_secret(Scalar::random_nonzero(rng))
    }
}

/// Deterministic key generation from a seed.
pub fn keygen(seed: &[u8]) -> VoterKeypair {
    VoterKeypair::random(&mut derive_rng(seed, "keygen"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EncryptedVote(pub Point);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyResult {
    pub res: usize,
}

pub fn blinding_key(i: usize, pks: &[Point]) -> Result<Point> {
    if i >= pks.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: pks.len(),
        });
    }
    let before = Point::sum(&pks[..i]);
    let after = Point::sum(&pks[i + 1..]);
    Ok(before - after)
}

/// All blinding keys in one pass over prefix and suffix sums.
pub fn blinding_keys(pks: &[Point]) -> Vec<Point> {
    let n = pks.len();
    let mut prefix = Vec::with_capacity(n);
    let mut acc = Point::identity();
    for pk in pks {
        prefix.push(acc);
        acc = acc + *pk;
    }
    let mut out = vec![Point::identity(); n];
    let mut suffix = Point::identity();
    for i in (0..n).rev() {
        out[i] = prefix[i] - suffix;
        suffix = suffix + pks[i];
    }
    out
}

pub fn encrypt_vote(v: u64, x: &Scalar, blinding: &Point) -> Result<EncryptedVote> {
    let base = match v {
        0 => Point::identity(),
        1 => Point::generator(),
        other => return Err(Error::InvalidVote(other)),
    };
    Ok(EncryptedVote(base + blinding.mul(x)))
}

/// Recovers Σ v_i by exhaustive search for res ∈ [0, n] with res·G = Σ V_i.
pub fn tally(votes: &[EncryptedVote], n: usize) -> Result<TallyResult> {
    if votes.len() != n {
        return Err(Error::LengthMismatch {
            what: "encrypted votes",
            expected: n,
            actual: votes.len(),
        });
    }
    let sum = Point::sum(votes.iter().map(|v| &v.0));
    discrete_log_up_to(&sum, n)
        .map(|res| TallyResult { res })
        .ok_or(Error::TallyInfeasible(n))
}

pub(crate) fn discrete_log_up_to(target: &Point, n: usize) -> Option<usize> {
    let g = Point::generator();
    let mut t = Point::identity();
    for res in 0..=n {
        if t == *target {
            return Some(res);
        }
        t = t + g;
    }
    None
}
