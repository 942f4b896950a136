//! Hash backends and the commitment shapes that shrink circuit statements.
//!
//! Concatenated commitments hash a whole list at once. Progressive ones fold
//! one item at a time into an accumulator that starts at 0, so each ledger
//! transaction pays a constant amount of hashing.

pub mod poseidon;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::field::FieldElement;
use poseidon::PoseidonParams;

/// Number of low-order digest bits kept when mapping SHA-256 output into F_p.
pub const SHA256_FIELD_BITS: usize = 253;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HashBackend {
    Sha256,
    Poseidon,
}

impl fmt::Display for HashBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HashBackend::Sha256 => "sha256",
            HashBackend::Poseidon => "poseidon",
        })
    }
}

impl FromStr for HashBackend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "sha256" => Ok(HashBackend::Sha256),
            "poseidon" => Ok(HashBackend::Poseidon),
            other => Err(Error::Parse(format!("unknown hash backend {other:?}"))),
        }
    }
}

/// Domain separation value. Tag 0 reproduces the plain H(a‖b‖…) form; a
/// non-zero tag is prepended (SHA-256) or placed in the capacity slot (Poseidon).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DomainTag(pub u64);

impl DomainTag {
    pub const PLAIN: DomainTag = DomainTag(0);
}

pub fn hash_to_field(backend: HashBackend, tag: DomainTag, inputs: &[FieldElement]) -> FieldElement {
    match backend {
        HashBackend::Sha256 => sha256_to_field(tag, inputs),
        HashBackend::Poseidon => poseidon_to_field(tag, inputs),
    }
}

/// Compression-function invocations spent by [`hash_to_field`] on `n_inputs`
/// elements: 64-byte SHA-256 blocks, or Poseidon permutations.
pub fn hash_cost(backend: HashBackend, tag: DomainTag, n_inputs: usize) -> u64 {
    match backend {
        HashBackend::Sha256 => {
            let words = n_inputs + usize::from(tag != DomainTag::PLAIN);
            // message + 0x80 + 8-byte length, rounded up to whole blocks
            ((words * 32 + 9).div_ceil(64)) as u64
        }
        HashBackend::Poseidon => {
            if n_inputs <= 3 {
                1
            } else {
                1 + (n_inputs - 3).div_ceil(2) as u64
            }
        }
    }
}

fn sha256_to_field(tag: DomainTag, inputs: &[FieldElement]) -> FieldElement {
    let mut h = Sha256::new();
    if tag != DomainTag::PLAIN {
        h.update(FieldElement::from_u64(tag.0).to_bytes_be());
    }
    for x in inputs {
        h.update(x.to_bytes_be());
    }
    digest_to_field(&h.finalize().into())
}

/// Interprets a digest big-endian and keeps its low 253 bits.
pub fn digest_to_field(digest: &[u8; 32]) -> FieldElement {
    let mut masked = *digest;
    masked[0] &= 0xff >> (256 - SHA256_FIELD_BITS);
    FieldElement::from_bytes_be(&masked).expect("253-bit value is below p")
}

fn poseidon_to_field(tag: DomainTag, inputs: &[FieldElement]) -> FieldElement {
    let params = PoseidonParams::bundled();
    let capacity = FieldElement::from_u64(tag.0);
    if inputs.is_empty() {
        return params.hash(capacity, &[FieldElement::zero()]);
    }
    let first = inputs.len().min(3);
    let mut acc = params.hash(capacity, &inputs[..first]);
    for chunk in inputs[first..].chunks(2) {
        let mut block = Vec::with_capacity(3);
        block.push(acc);
        block.extend_from_slice(chunk);
        acc = params.hash(capacity, &block);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommitShape {
    ConcatPk,
    ConcatV,
    ProgressivePk,
    ProgressiveV,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment {
    pub value: FieldElement,
    pub shape: CommitShape,
}

/// H(pk^y_0 ‖ … ‖ pk^y_{n−1}).
pub fn commit_pk_concat(backend: HashBackend, pk_y: &[FieldElement]) -> Commitment {
    Commitment {
        value: hash_to_field(backend, DomainTag::PLAIN, pk_y),
        shape: CommitShape::ConcatPk,
    }
}

/// H(V^y_0 ‖ … ‖ V^y_{n−1} ‖ D_0 ‖ … ‖ D_{l−1}).
pub fn commit_v_concat(backend: HashBackend, v_y: &[FieldElement], limbs: &[FieldElement]) -> Commitment {
    let mut inputs = Vec::with_capacity(v_y.len() + limbs.len());
    inputs.extend_from_slice(v_y);
    inputs.extend_from_slice(limbs);
    Commitment {
        value: hash_to_field(backend, DomainTag::PLAIN, &inputs),
        shape: CommitShape::ConcatV,
    }
}

/// acc ← H(acc ‖ pk^y).
pub fn commit_pk_progressive_step(backend: HashBackend, acc: FieldElement, pk_y: FieldElement) -> FieldElement {
    hash_to_field(backend, DomainTag::PLAIN, &[acc, pk_y])
}

/// acc ← H(acc ‖ V^x ‖ V^y).
pub fn commit_v_progressive_step(
    backend: HashBackend,
    acc: FieldElement,
    v_x: FieldElement,
    v_y: FieldElement,
) -> FieldElement {
    hash_to_field(backend, DomainTag::PLAIN, &[acc, v_x, v_y])
}

pub fn commit_pk_progressive(backend: HashBackend, pk_y: &[FieldElement]) -> Commitment {
    let value = pk_y
        .iter()
        .fold(FieldElement::zero(), |acc, y| commit_pk_progressive_step(backend, acc, *y));
    Commitment {
        value,
        shape: CommitShape::ProgressivePk,
    }
}

pub fn commit_v_progressive(backend: HashBackend, votes: &[(FieldElement, FieldElement)]) -> Commitment {
    let value = votes.iter().fold(FieldElement::zero(), |acc, (x, y)| {
        commit_v_progressive_step(backend, acc, *x, *y)
    });
    Commitment {
        value,
        shape: CommitShape::ProgressiveV,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const BACKENDS: [HashBackend; 2] = [HashBackend::Sha256, HashBackend::Poseidon];

    fn randoms(n: usize, seed: u64) -> Vec<FieldElement> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n).map(|_| FieldElement::random(&mut rng)).collect()
    }

    #[test]
    fn sha256_mapping_is_masked_digest() {
        let xs = randoms(3, 1);
        let mut bytes = Vec::new();
        for x in &xs {
            bytes.extend_from_slice(&x.to_bytes_be());
        }
        let digest = Sha256::digest(&bytes);
        let expected = BigUint::from_bytes_be(&digest) % (BigUint::from(1u8) << SHA256_FIELD_BITS);
        let got = hash_to_field(HashBackend::Sha256, DomainTag::PLAIN, &xs);
        assert_eq!(got.to_biguint(), expected);
    }

    #[test]
    fn masked_output_below_two_to_253() {
        for (i, x) in randoms(200, 2).into_iter().enumerate() {
            let h = hash_to_field(HashBackend::Sha256, DomainTag(i as u64 % 3), &[x]);
            assert!(h.to_biguint().bits() <= 253);
        }
    }

    #[test]
    fn backends_and_tags_separate() {
        let x = randoms(1, 3);
        let s = hash_to_field(HashBackend::Sha256, DomainTag::PLAIN, &x);
        let p = hash_to_field(HashBackend::Poseidon, DomainTag::PLAIN, &x);
        assert_ne!(s, p);
        assert_eq!(s, hash_to_field(HashBackend::Sha256, DomainTag::PLAIN, &x));
        assert_ne!(p, hash_to_field(HashBackend::Poseidon, DomainTag(7), &x));
        assert_ne!(s, hash_to_field(HashBackend::Sha256, DomainTag(7), &x));
    }

    #[test]
    fn concat_single_element_is_plain_hash() {
        let x = randoms(1, 4);
        for b in BACKENDS {
            assert_eq!(commit_pk_concat(b, &x).value, hash_to_field(b, DomainTag::PLAIN, &x));
        }
        let limbs = randoms(1, 5);
        assert_eq!(
            commit_v_concat(HashBackend::Sha256, &x, &limbs).value,
            hash_to_field(HashBackend::Sha256, DomainTag::PLAIN, &[x[0], limbs[0]])
        );
    }

    #[test]
    fn flipping_a_limb_bit_changes_concat_v() {
        let v_y = randoms(4, 6);
        let limbs = vec![FieldElement::from_u64(0b1011)];
        let flipped = vec![FieldElement::from_u64(0b1001)];
        assert_ne!(
            commit_v_concat(HashBackend::Sha256, &v_y, &limbs),
            commit_v_concat(HashBackend::Sha256, &v_y, &flipped)
        );
    }

    #[test]
    fn progressive_chain_unrolls() {
        let abc = randoms(3, 7);
        for b in BACKENDS {
            let h = |xs: &[FieldElement]| hash_to_field(b, DomainTag::PLAIN, xs);
            let direct = h(&[h(&[h(&[FieldElement::zero(), abc[0]]), abc[1]]), abc[2]]);
            assert_eq!(commit_pk_progressive(b, &abc).value, direct);
            assert_eq!(
                commit_pk_progressive_step(b, FieldElement::zero(), abc[0]),
                h(&[FieldElement::zero(), abc[0]])
            );
        }
    }

    #[test]
    fn progressive_v_chain_and_sign_sensitivity() {
        let xs = randoms(4, 8);
        let votes = vec![(xs[0], xs[1]), (xs[2], xs[3])];
        for b in BACKENDS {
            let h = |v: &[FieldElement]| hash_to_field(b, DomainTag::PLAIN, v);
            let direct = h(&[h(&[FieldElement::zero(), xs[0], xs[1]]), xs[2], xs[3]]);
            assert_eq!(commit_v_progressive(b, &votes).value, direct);
            let mut negated = votes.clone();
            negated[1].0 = -negated[1].0;
            assert_ne!(commit_v_progressive(b, &negated).value, direct);
            assert_eq!(commit_v_progressive(b, &[]).value, FieldElement::zero());
        }
    }

    #[test]
    fn hash_cost_counts() {
        assert_eq!(hash_cost(HashBackend::Sha256, DomainTag::PLAIN, 1), 1);
        assert_eq!(hash_cost(HashBackend::Sha256, DomainTag::PLAIN, 2), 2);
        assert_eq!(hash_cost(HashBackend::Sha256, DomainTag::PLAIN, 40), 21);
        assert_eq!(hash_cost(HashBackend::Poseidon, DomainTag::PLAIN, 3), 1);
        assert_eq!(hash_cost(HashBackend::Poseidon, DomainTag::PLAIN, 4), 2);
        assert_eq!(hash_cost(HashBackend::Poseidon, DomainTag::PLAIN, 7), 3);
    }
}
