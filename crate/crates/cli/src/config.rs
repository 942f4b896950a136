use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use zkovn::circuits::Variant;
use zkovn::commit::HashBackend;
use zkovn::ledger::CostModel;

use crate::CliError;

/// How the voters' ballots are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteSpec {
    Explicit(Vec<u64>),
    /// round(fraction·n) yes votes at seeded positions.
    YesFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub t1: u64,
    pub t2: u64,
    pub t3: u64,
    pub t4: u64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            t1: 100,
            t2: 200,
            t3: 300,
            t4: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub variant: Variant,
    pub votes: VoteSpec,
    /// Absent means a fresh seed from the operating system.
    pub seed: Option<Vec<u8>>,
    pub out: Option<PathBuf>,
    pub cost_model: CostModel,
    pub deposit: u64,
    pub schedule: Schedule,
}

impl RunConfig {
    pub fn new(n: usize, variant: Variant, votes: VoteSpec) -> Self {
        Self {
            n,
            variant,
            votes,
            seed: Some(b"zkovn".to_vec()),
            out: None,
            cost_model: CostModel::bundled(),
            deposit: 1_000,
            schedule: Schedule::default(),
        }
    }

    pub fn with_seed(mut self, seed: &[u8]) -> Self {
        self.seed = Some(seed.to_vec());
        self
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(CliError::Config("n must be at least 1".into()));
        }
        match &self.votes {
            VoteSpec::Explicit(v) => {
                if v.len() != self.n {
                    return Err(CliError::Config(format!("{} votes given for n = {}", v.len(), self.n)));
                }
                if let Some(bad) = v.iter().find(|v| **v > 1) {
                    return Err(CliError::Config(format!("vote {bad} is not 0 or 1")));
                }
            }
            VoteSpec::YesFraction(f) => {
                if !(0.0..=1.0).contains(f) {
                    return Err(CliError::Config(format!("yes-fraction {f} is outside [0, 1]")));
                }
            }
        }
        let s = &self.schedule;
        if !(s.t1 < s.t2 && s.t2 < s.t3 && s.t3 < s.t4) || s.t1 < 2 {
            return Err(CliError::Config("deadlines must satisfy 2 <= T1 < T2 < T3 < T4".into()));
        }
        Ok(())
    }
}

/// Resolves the `--variant` / `--hash` flag pair.
///
/// `--variant` takes `original`, `committed`, `progressive`, or a full variant
/// name. Only the four variants with a defined commitment shape exist; the
/// concatenated shape is SHA-256 only.
pub fn resolve_variant(variant: &str, hash: Option<&str>) -> Result<Variant, CliError> {
    let hash = hash
        .map(|h| h.parse::<HashBackend>().map_err(|e| CliError::Config(e.to_string())))
        .transpose()?;
    let v = match (variant, hash) {
        ("original", None) => Variant::Original,
        ("original", Some(h)) => {
            return Err(CliError::Config(format!("the original variant does not hash; drop --hash {h}")))
        }
        ("committed", None | Some(HashBackend::Sha256)) => Variant::CommittedSha256,
        ("committed", Some(HashBackend::Poseidon)) => {
            return Err(CliError::Config(
                "the concatenated commitment is defined for sha256 only; use --variant progressive --hash poseidon".into(),
            ))
        }
        ("progressive", None | Some(HashBackend::Sha256)) => Variant::ProgressiveSha256,
        ("progressive", Some(HashBackend::Poseidon)) => Variant::ProgressivePoseidon,
        (full, h) => {
            let v: Variant = full.parse().map_err(|e: zkovn::Error| CliError::Config(e.to_string()))?;
            if let Some(h) = h {
                if v.hash_backend() != Some(h) {
                    return Err(CliError::Config(format!("--hash {h} conflicts with --variant {v}")));
                }
            }
            v
        }
    };
    Ok(v)
}

/// Parses a vote vector such as `1,0,1` or `101`.
pub fn parse_votes(s: &str) -> Result<Vec<u64>, CliError> {
    let parts: Vec<&str> = if s.contains(',') {
        s.split(',').map(str::trim).collect()
    } else {
        s.split("").filter(|p| !p.is_empty()).collect()
    };
    parts
        .into_iter()
        .map(|p| match p {
            "0" => Ok(0),
            "1" => Ok(1),
            other => Err(CliError::Config(format!("vote {other:?} is not 0 or 1"))),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    BadTally,
    NonMemberRegister,
    WrongIndexCast,
    ForgedProof,
    DuplicateRegister,
    AbortMissingVote,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::BadTally,
        Scenario::NonMemberRegister,
        Scenario::WrongIndexCast,
        Scenario::ForgedProof,
        Scenario::DuplicateRegister,
        Scenario::AbortMissingVote,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::BadTally => "bad-tally",
            Scenario::NonMemberRegister => "non-member-register",
            Scenario::WrongIndexCast => "wrong-index-cast",
            Scenario::ForgedProof => "forged-proof",
            Scenario::DuplicateRegister => "duplicate-register",
            Scenario::AbortMissingVote => "abort-missing-vote",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| CliError::Config(format!("unknown scenario {s:?}")))
    }
}
