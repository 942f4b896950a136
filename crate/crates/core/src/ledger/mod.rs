//! Simulated block-height ledger hosting the voting contract.
//!
//! Calls are processed one at a time in submission order. Every call is
//! appended to the transcript with its outcome; accepted calls also produce a
//! cost record. Rejection is the only enforcement mechanism: there is no
//! dispute or challenge call.

mod contract;
pub mod cost;
pub mod transcript;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circuits::{CircuitKind, Variant};
use crate::merkle::{hex_decode, hex_encode, Address, Digest};
use crate::proofsys::VerifyingKey;

pub use contract::{Contract, ContractState};
pub use cost::{CallFeatures, CostModel};
pub use transcript::{Outcome, TranscriptRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Function {
    Deploy,
    SetVerifyingKey,
    Register,
    CastVote,
    SetTally,
    Refund,
}

impl Function {
    pub const ALL: [Function; 6] = [
        Function::Deploy,
        Function::SetVerifyingKey,
        Function::Register,
        Function::CastVote,
        Function::SetTally,
        Function::Refund,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Function::Deploy => "deploy",
            Function::SetVerifyingKey => "set_verifying_key",
            Function::Register => "register",
            Function::CastVote => "cast_vote",
            Function::SetTally => "set_tally",
            Function::Refund => "refund",
        }
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why the contract refused a call. Each variant has a distinct stable code.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("invalid election parameters: {0}")]
    InvalidParams(String),
    #[error("deposit must be {expected}, got {got}")]
    WrongDeposit { expected: u64, got: u64 },
    #[error("cannot rewind from height {current} to {requested}")]
    Rewind { current: u64, requested: u64 },
    #[error("{function} is not open at height {height}")]
    OutsideWindow { function: Function, height: u64 },
    #[error("all voter slots are taken")]
    RegistryFull,
    #[error("sender is already registered")]
    DuplicateRegistration,
    #[error("membership proof does not verify against the eligibility root")]
    NotEligible,
    #[error("proof does not verify")]
    InvalidProof,
    #[error("election is void")]
    ElectionVoid,
    #[error("voter index {0} out of range")]
    IndexOutOfRange(u64),
    #[error("sender is not the voter registered at this index")]
    WrongSender,
    #[error("a vote is already stored at this index")]
    AlreadyCast,
    #[error("only the administrator may call this")]
    NotAdmin,
    #[error("not every registered voter has cast a vote")]
    VotesMissing,
    #[error("the tally result is already set")]
    TallyAlreadySet,
    #[error("deposit already refunded")]
    AlreadyRefunded,
    #[error("sender is not eligible for a refund")]
    NotRefundable,
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::InvalidParams(_) => "invalid-params",
            Rejection::WrongDeposit { .. } => "wrong-deposit",
            Rejection::Rewind { .. } => "rewind",
            Rejection::OutsideWindow { .. } => "outside-window",
            Rejection::RegistryFull => "registry-full",
            Rejection::DuplicateRegistration => "duplicate-registration",
            Rejection::NotEligible => "not-eligible",
            Rejection::InvalidProof => "invalid-proof",
            Rejection::ElectionVoid => "election-void",
            Rejection::IndexOutOfRange(_) => "index-out-of-range",
            Rejection::WrongSender => "wrong-sender",
            Rejection::AlreadyCast => "already-cast",
            Rejection::NotAdmin => "not-admin",
            Rejection::VotesMissing => "votes-missing",
            Rejection::TallyAlreadySet => "tally-already-set",
            Rejection::AlreadyRefunded => "already-refunded",
            Rejection::NotRefundable => "not-refundable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionParams {
    #[serde(with = "digest_hex")]
    pub root: Digest,
    pub vk_pk: VerifyingKey,
    pub vk_v: VerifyingKey,
    pub vk_t: VerifyingKey,
    pub t1: u64,
    pub t2: u64,
    pub t3: u64,
    pub t4: u64,
    pub n: usize,
    pub deposit: u64,
    pub variant: Variant,
}

impl ElectionParams {
    pub fn validate(&self) -> Result<(), Rejection> {
        let bad = |m: String| Err(Rejection::InvalidParams(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(self.t1 < self.t2 && self.t2 < self.t3 && self.t3 < self.t4) {
            return bad(format!(
                "deadlines must increase strictly, got {} {} {} {}",
                self.t1, self.t2, self.t3, self.t4
            ));
        }
        for (vk, kind) in [
            (&self.vk_pk, CircuitKind::PublicKeyGen),
            (&self.vk_v, CircuitKind::EncryptedVoteGen),
            (&self.vk_t, CircuitKind::Tallying),
        ] {
            let p = &vk.circuit.params;
            if vk.circuit.kind != kind || p.n != self.n || p.variant != self.variant {
                return bad(format!("verifying key for {} does not match the election", kind.name()));
            }
        }
        Ok(())
    }

    pub fn window_open(&self, function: Function, height: u64) -> bool {
        let h = height;
        match function {
            Function::Deploy | Function::SetVerifyingKey => true,
            Function::Register => h < self.t1,
            Function::CastVote => self.t1 < h && h < self.t2,
            Function::SetTally => self.t2 < h && h < self.t3,
            Function::Refund => self.t3 < h && h <= self.t4,
        }
    }
}

/// One accepted call's resource use and modeled cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostRecord {
    pub height: u64,
    pub caller: Address,
    pub function: Function,
    /// Which verifying key, for set_verifying_key records.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
    #[serde(flatten)]
    pub features: CallFeatures,
    pub model_cost: u64,
}

impl CostRecord {
    pub fn statement_elems(&self) -> u64 {
        self.features.statement_elems
    }

    pub fn hash_calls(&self) -> u64 {
        self.features.hash_calls()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub records: Vec<CostRecord>,
}

impl CostReport {
    pub fn by_function(&self, f: Function) -> impl Iterator<Item = &CostRecord> {
        self.records.iter().filter(move |r| r.function == f)
    }

    /// The most expensive accepted call of a function.
    pub fn max_of(&self, f: Function) -> Option<&CostRecord> {
        self.by_function(f).max_by_key(|r| r.model_cost)
    }
}

mod digest_hex {
    use super::*;

    pub fn serialize<S: Serializer>(d: &Digest, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex_encode(d))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Digest, D::Error> {
        let s = String::deserialize(d)?;
        hex_decode(&s)
            .map_err(serde::de::Error::custom)?
            .try_into()
            .map_err(|_| serde::de::Error::custom("digest must be 32 bytes"))
    }
}
