//! Setup/Prove/Verify behind a backend trait.
//!
//! [`DevBackend`] is transparent: a proof carries the witness in the clear and
//! verification re-evaluates the relation. It is neither zero-knowledge nor
//! succinct and says so through [`Capabilities`]; it exists so completeness and
//! soundness are exactly testable and the ledger is honest about what it checks.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuits::{Circuit, Statement, Witness};
use crate::error::{Error, Result};
use crate::merkle::{hex_decode, hex_encode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub zero_knowledge: bool,
    pub succinct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvingKey {
    pub circuit: Circuit,
    pub circuit_digest: String,
    pub backend: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyingKey {
    pub circuit: Circuit,
    pub circuit_digest: String,
    pub backend: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofObject {
    pub backend: String,
    pub circuit_digest: String,
    pub statement_digest: String,
    pub payload_hex: String,
}

#[derive(Serialize, Deserialize)]
struct DevPayload {
    statement_digest: String,
    witness: Witness,
}

pub trait ProofBackend {
    fn tag(&self) -> &'static str;
    fn capabilities(&self) -> Capabilities;
    fn setup(&self, circuit: Circuit) -> (ProvingKey, VerifyingKey);
    fn prove(&self, pk: &ProvingKey, stmt: &Statement, wit: &Witness) -> Result<ProofObject>;
    /// Never errors: malformed or mismatched input verifies as false.
    fn verify(&self, vk: &VerifyingKey, stmt: &Statement, proof: &ProofObject) -> bool;
}

pub fn circuit_digest(circuit: &Circuit) -> String {
    let mut h = Sha256::new();
    h.update(b"zkovn/circuit/v1");
    h.update(serde_json::to_vec(circuit).expect("circuit serializes"));
    hex_encode(&h.finalize())
}

pub fn statement_digest(stmt: &Statement) -> String {
    hex_encode(&Sha256::digest(stmt.canonical_bytes()))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DevBackend;

impl DevBackend {
    pub const TAG: &'static str = "dev";

    /// Packages a witness without checking it. Models a dishonest prover who
    /// bypasses `prove`; verification must still reject.
    pub fn package_unchecked(&self, pk: &ProvingKey, stmt: &Statement, wit: &Witness) -> ProofObject {
        let statement_digest = statement_digest(stmt);
        let payload = DevPayload {
            statement_digest: statement_digest.clone(),
            witness: wit.clone(),
        };
        ProofObject {
            backend: Self::TAG.to_string(),
            circuit_digest: pk.circuit_digest.clone(),
            statement_digest,
            payload_hex: hex_encode(&serde_json::to_vec(&payload).expect("witness serializes")),
        }
    }
}

impl ProofBackend for DevBackend {
    fn tag(&self) -> &'static str {
        Self::TAG
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            zero_knowledge: false,
            succinct: false,
        }
    }

    fn setup(&self, circuit: Circuit) -> (ProvingKey, VerifyingKey) {
        let circuit_digest = circuit_digest(&circuit);
        let pk = ProvingKey {
            circuit,
            circuit_digest: circuit_digest.clone(),
            backend: Self::TAG.to_string(),
        };
        let vk = VerifyingKey {
            circuit,
            circuit_digest,
            backend: Self::TAG.to_string(),
        };
        (pk, vk)
    }

    fn prove(&self, pk: &ProvingKey, stmt: &Statement, wit: &Witness) -> Result<ProofObject> {
        match pk.circuit.check(stmt, wit) {
            Ok(true) => Ok(self.package_unchecked(pk, stmt, wit)),
            Ok(false) => Err(Error::CannotProveFalseStatement(pk.circuit.kind.name().to_string())),
            Err(e) => Err(Error::CannotProveFalseStatement(format!("{}: {e}", pk.circuit.kind.name()))),
        }
    }

    fn verify(&self, vk: &VerifyingKey, stmt: &Statement, proof: &ProofObject) -> bool {
        if vk.backend != Self::TAG || proof.backend != Self::TAG {
            return false;
        }
        if proof.circuit_digest != vk.circuit_digest || circuit_digest(&vk.circuit) != vk.circuit_digest {
            return false;
        }
        let digest = statement_digest(stmt);
        if proof.statement_digest != digest {
            return false;
        }
        let Ok(bytes) = hex_decode(&proof.payload_hex) else {
            return false;
        };
        let Ok(payload) = serde_json::from_slice::<DevPayload>(&bytes) else {
            return false;
        };
        if payload.statement_digest != digest {
            return false;
        }
        matches!(vk.circuit.check(stmt, &payload.witness), Ok(true))
    }
}
