//! Election transcript: one JSON Lines record per submitted call, replayable.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Contract, CostModel, ElectionParams, Function};
use crate::curve::Point;
use crate::error::{Error, Result};
use crate::merkle::{Address, MerkleProof};
use crate::proofsys::{ProofBackend, ProofObject};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Ok {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        paid: Option<u64>,
    },
    Rejected {
        code: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub height: u64,
    pub caller: Address,
    pub function: Function,
    pub args: serde_json::Value,
    pub outcome: Outcome,
    pub cost: Option<u64>,
}

pub fn write_jsonl<W: Write>(records: &[TranscriptRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<TranscriptRecord>> {
    r.lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

#[derive(Deserialize)]
struct DeployArgs {
    params: ElectionParams,
    deposit: u64,
}

#[derive(Deserialize)]
struct RegisterArgs {
    pk: Point,
    proof: ProofObject,
    membership: MerkleProof,
    deposit: u64,
}

#[derive(Deserialize)]
struct CastArgs {
    vote: Point,
    index: u64,
    proof: ProofObject,
}

#[derive(Deserialize)]
struct TallyArgs {
    result: u64,
    proof: ProofObject,
}

fn args<T: serde::de::DeserializeOwned>(r: &TranscriptRecord) -> Result<T> {
    Ok(serde_json::from_value(r.args.clone())?)
}

/// Re-executes a transcript against a fresh contract and checks that every call
/// reproduces its recorded outcome and cost.
pub fn replay<B: ProofBackend>(records: &[TranscriptRecord], backend: B, cost_model: CostModel) -> Result<Contract<B>> {
    let first = records
        .first()
        .filter(|r| r.function == Function::Deploy)
        .ok_or_else(|| Error::Parse("transcript must start with deploy".into()))?;
    let d: DeployArgs = args(first)?;
    let mut c = Contract::deploy(first.caller, d.params, d.deposit, backend, cost_model, first.height)
        .map_err(|e| Error::Params(format!("replayed deploy rejected: {e}")))?;
    for r in &records[1..] {
        if r.function == Function::SetVerifyingKey {
            continue;
        }
        c.advance_to(r.height)
            .map_err(|e| Error::Params(format!("transcript heights: {e}")))?;
        let _ = match r.function {
            Function::Register => {
                let a: RegisterArgs = args(r)?;
                c.register(r.caller, a.pk, &a.proof, &a.membership, a.deposit).map(|_| ())
            }
            Function::CastVote => {
                let a: CastArgs = args(r)?;
                c.cast_vote(r.caller, a.vote, a.index, &a.proof)
            }
            Function::SetTally => {
                let a: TallyArgs = args(r)?;
                c.set_tally(r.caller, a.result, &a.proof)
            }
            Function::Refund => c.refund(r.caller).map(|_| ()),
            Function::Deploy | Function::SetVerifyingKey => {
                return Err(Error::Parse(format!("unexpected {} record", r.function)));
            }
        };
        let got = c.transcript().last().expect("call was recorded");
        if got != r {
            return Err(Error::Parse(format!(
                "replay diverged at height {} ({}): recorded {:?}, replayed {:?}",
                r.height, r.function, r.outcome, got.outcome
            )));
        }
    }
    Ok(c)
}
