//! Statement/witness relations for the three voting circuits and their
//! fixed-statement variants.
//!
//! Relations are interpreters over field and point values written in the
//! gadget vocabulary of [`gadgets`]. Loop bounds depend only on
//! [`CircuitParams`], never on witness values.
//!
//! Public-input order, which also fixes the canonical statement layout:
//!
//! | circuit                     | public inputs                           |
//! |-----------------------------|-----------------------------------------|
//! | publicKeyGen                | PK.x, PK.y                              |
//! | encryptedVoteGen            | V.x, V.y, i, pk_y[0..n]                 |
//! | encryptedVoteGen, committed | V.x, V.y, commit_PK, i                  |
//! | tallying                    | res, D[0..l], V_y[0..n]                 |
//! | tallying, committed         | res, commit_V                           |

pub mod count;
pub mod gadgets;
mod relations;
pub mod witness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::commit::{self, HashBackend};
use crate::error::{Error, Result};
use crate::field::{FieldElement, Scalar};
pub use count::{constraint_count, ConstraintCount};
pub use gadgets::{Coords, GadgetTally, KAPPA};
pub use relations::{
    relation_encrypted_vote_gen, relation_encrypted_vote_gen_committed, relation_public_key_gen,
    relation_tallying, relation_tallying_committed,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Original,
    CommittedSha256,
    ProgressiveSha256,
    ProgressivePoseidon,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Original,
        Variant::CommittedSha256,
        Variant::ProgressiveSha256,
        Variant::ProgressivePoseidon,
    ];

    pub fn hash_backend(&self) -> Option<HashBackend> {
        match self {
            Variant::Original => None,
            Variant::CommittedSha256 | Variant::ProgressiveSha256 => Some(HashBackend::Sha256),
            Variant::ProgressivePoseidon => Some(HashBackend::Poseidon),
        }
    }

    /// Statements carry commitments instead of per-voter lists.
    pub fn is_committed(&self) -> bool {
        !matches!(self, Variant::Original)
    }

    pub fn is_progressive(&self) -> bool {
        matches!(self, Variant::ProgressiveSha256 | Variant::ProgressivePoseidon)
    }

    /// Sign bits of encrypted votes are tracked (and packed into D limbs).
    pub fn tracks_signs(&self) -> bool {
        !self.is_progressive()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::CommittedSha256 => "committed-sha256",
            Variant::ProgressiveSha256 => "progressive-sha256",
            Variant::ProgressivePoseidon => "progressive-poseidon",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown variant {s:?}")))
    }
}

/// ⌈n/κ⌉, at least 1.
pub fn limb_count(n: usize) -> usize {
    n.div_ceil(KAPPA).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CircuitParams {
    pub n: usize,
    pub kappa: usize,
    pub l: usize,
    pub variant: Variant,
}

impl CircuitParams {
    pub fn new(n: usize, variant: Variant) -> Result<Self> {
        if n == 0 {
            return Err(Error::LengthMismatch {
                what: "voter count must be at least 1",
                expected: 1,
                actual: 0,
            });
        }
        Ok(Self {
            n,
            kappa: KAPPA,
            l: limb_count(n),
            variant,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitKind {
    PublicKeyGen,
    EncryptedVoteGen,
    Tallying,
}

impl CircuitKind {
    pub fn name(&self) -> &'static str {
        match self {
            CircuitKind::PublicKeyGen => "publicKeyGen",
            CircuitKind::EncryptedVoteGen => "encryptedVoteGen",
            CircuitKind::Tallying => "tallying",
        }
    }
}

/// A circuit instance: which relation, at which size and variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circuit {
    pub kind: CircuitKind,
    pub params: CircuitParams,
}

impl Circuit {
    pub fn new(kind: CircuitKind, params: CircuitParams) -> Self {
        Self { kind, params }
    }

    /// Evaluates the relation. Statement/witness shapes that belong to another
    /// circuit are simply not in the relation; list-length mismatches are errors.
    pub fn check(&self, stmt: &Statement, wit: &Witness) -> Result<bool> {
        self.check_counted(stmt, wit).map(|(ok, _)| ok)
    }

    /// Like [`Circuit::check`], also returning the gadget invocations performed.
    pub fn check_counted(&self, stmt: &Statement, wit: &Witness) -> Result<(bool, GadgetTally)> {
        let p = &self.params;
        let mut ctx = gadgets::Ctx::new();
        let ok = match (self.kind, stmt, wit) {
            (CircuitKind::PublicKeyGen, Statement::PublicKey(s), Witness::PublicKey(w)) => {
                relations::public_key_gen(&mut ctx, s, w).unwrap_or(false)
            }
            (CircuitKind::EncryptedVoteGen, Statement::Vote(s), Witness::Vote(w))
                if !p.variant.is_committed() =>
            {
                relations::encrypted_vote_gen(&mut ctx, p, s, w)?
            }
            (CircuitKind::EncryptedVoteGen, Statement::CommittedVote(s), Witness::CommittedVote(w))
                if p.variant.is_committed() =>
            {
                relations::encrypted_vote_gen_committed(&mut ctx, p, s, w)?
            }
            (CircuitKind::Tallying, Statement::Tally(s), Witness::Tally(w))
                if !p.variant.is_committed() =>
            {
                relations::tallying(&mut ctx, p, s, w)?
            }
            (CircuitKind::Tallying, Statement::CommittedTally(s), Witness::CommittedTally(w))
                if p.variant.is_committed() =>
            {
                relations::tallying_committed(&mut ctx, p, s, w)?
            }
            _ => false,
        };
        Ok((ok, ctx.tally))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PkStatement {
    pub pk: Coords,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PkWitness {
    pub x: Scalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteStatement {
    pub vote: Coords,
    pub index: u64,
    pub pk_y: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteWitness {
    /// The plaintext vote as a field element; the relation asserts it is a bit.
    pub v: FieldElement,
    pub x: Scalar,
    pub pk_x: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyStatement {
    pub res: u64,
    pub limbs: Vec<FieldElement>,
    pub v_y: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyWitness {
    pub v_x: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommittedVoteStatement {
    pub vote: Coords,
    pub commit_pk: FieldElement,
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommittedVoteWitness {
    pub v: FieldElement,
    pub x: Scalar,
    pub pk_x: Vec<FieldElement>,
    pub pk_y: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommittedTallyStatement {
    pub res: u64,
    pub commit_v: FieldElement,
}

/// Encrypted votes in the order the commitment absorbed them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommittedTallyWitness {
    pub v_x: Vec<FieldElement>,
    pub v_y: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statement {
    PublicKey(PkStatement),
    Vote(VoteStatement),
    CommittedVote(CommittedVoteStatement),
    Tally(TallyStatement),
    CommittedTally(CommittedTallyStatement),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    PublicKey(PkWitness),
    Vote(VoteWitness),
    CommittedVote(CommittedVoteWitness),
    Tally(TallyWitness),
    CommittedTally(CommittedTallyWitness),
}

impl Statement {
    /// The statement as the verifier's public-input vector, in the documented order.
    pub fn public_inputs(&self) -> Vec<FieldElement> {
        let fe = FieldElement::from_u64;
        match self {
            Statement::PublicKey(s) => vec![s.pk.x, s.pk.y],
            Statement::Vote(s) => {
                let mut v = vec![s.vote.x, s.vote.y, fe(s.index)];
                v.extend_from_slice(&s.pk_y);
                v
            }
            Statement::CommittedVote(s) => vec![s.vote.x, s.vote.y, s.commit_pk, fe(s.index)],
            Statement::Tally(s) => {
                let mut v = vec![fe(s.res)];
                v.extend_from_slice(&s.limbs);
                v.extend_from_slice(&s.v_y);
                v
            }
            Statement::CommittedTally(s) => vec![fe(s.res), s.commit_v],
        }
    }

    /// Statement size in field elements.
    pub fn size(&self) -> usize {
        self.public_inputs().len()
    }

    /// Canonical serialization: compact JSON with the documented field order.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("statement serializes")
    }
}

/// commit_PK in the shape the variant prescribes.
pub fn commit_pk_for(variant: Variant, pk_y: &[FieldElement]) -> Result<FieldElement> {
    match variant {
        Variant::Original => Err(Error::UnsupportedVariant {
            circuit: "commit_PK",
            variant: variant.to_string(),
        }),
        Variant::CommittedSha256 => Ok(commit::commit_pk_concat(HashBackend::Sha256, pk_y).value),
        Variant::ProgressiveSha256 | Variant::ProgressivePoseidon => {
            let backend = variant.hash_backend().unwrap();
            Ok(commit::commit_pk_progressive(backend, pk_y).value)
        }
    }
}

/// commit_V in the shape the variant prescribes. `limbs` are only used by the
/// concatenated shape.
pub fn commit_v_for(
    variant: Variant,
    v_x: &[FieldElement],
    v_y: &[FieldElement],
    limbs: &[FieldElement],
) -> Result<FieldElement> {
    match variant {
        Variant::Original => Err(Error::UnsupportedVariant {
            circuit: "commit_V",
            variant: variant.to_string(),
        }),
        Variant::CommittedSha256 => Ok(commit::commit_v_concat(HashBackend::Sha256, v_y, limbs).value),
        Variant::ProgressiveSha256 | Variant::ProgressivePoseidon => {
            let backend = variant.hash_backend().unwrap();
            let pairs: Vec<_> = v_x.iter().copied().zip(v_y.iter().copied()).collect();
            Ok(commit::commit_v_progressive(backend, &pairs).value)
        }
    }
}

/// Packs sign bits κ per limb, bit i into limb ⌊i/κ⌋ at weight 2^(i mod κ).
pub fn pack_sign_bits(signs: &[bool], l: usize) -> Vec<FieldElement> {
    let mut limbs = vec![FieldElement::zero(); l];
    for (i, s) in signs.iter().enumerate() {
        if *s {
            let mut w = FieldElement::one();
            for _ in 0..(i % KAPPA) {
                w = w.double();
            }
            limbs[i / KAPPA] += w;
        }
    }
    limbs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_strings_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
            assert_eq!(serde_json::to_string(&v).unwrap(), format!("\"{}\"", v.as_str()));
        }
        assert!("committed-poseidon".parse::<Variant>().is_err());
    }

    #[test]
    fn params_limbs() {
        assert_eq!(CircuitParams::new(1, Variant::Original).unwrap().l, 1);
        assert_eq!(CircuitParams::new(253, Variant::Original).unwrap().l, 1);
        assert_eq!(CircuitParams::new(254, Variant::Original).unwrap().l, 2);
        assert!(CircuitParams::new(0, Variant::Original).is_err());
    }
}
