use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::cost::{CallFeatures, CostModel};
use super::transcript::{Outcome, TranscriptRecord};
use super::{CostRecord, CostReport, ElectionParams, Function, Rejection};
use crate::circuits::{
    limb_count, CommittedTallyStatement, CommittedVoteStatement, PkStatement, Statement,
    TallyStatement, Variant, VoteStatement, KAPPA,
};
use crate::commit::{self, hash_cost, DomainTag, HashBackend};
use crate::curve::{sign_of, Point};
use crate::field::FieldElement;
use crate::merkle::{verify_proof_metered, Address, MerkleProof};
use crate::proofsys::{DevBackend, ProofBackend, ProofObject, VerifyingKey};

/// Storage slots written by deploy: admin, root, four deadlines, n, F, the
/// admin's deposit entry.
const DEPLOY_WRITES: u64 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractState {
    pub admin: Address,
    pub voters: Vec<Address>,
    pub public_keys: Vec<Point>,
    pub encrypted_votes: Vec<Option<Point>>,
    /// Voter indices in the order their votes were accepted.
    pub cast_order: Vec<usize>,
    pub int_vsigns: Vec<FieldElement>,
    pub tally: Option<u64>,
    pub commit_pk: Option<FieldElement>,
    pub commit_v: Option<FieldElement>,
    /// Deposits currently held, per depositor.
    pub held: BTreeMap<Address, u64>,
    pub refunded: BTreeSet<Address>,
    pub deposits_received: u64,
    pub refunds_paid: u64,
}

impl ContractState {
    pub fn index(&self) -> usize {
        self.voters.len()
    }

    pub fn casts(&self) -> usize {
        self.cast_order.len()
    }

    pub fn held_total(&self) -> u64 {
        self.held.values().sum()
    }
}

/// The voting contract on a simulated chain.
#[derive(Debug, Clone)]
pub struct Contract<B: ProofBackend = DevBackend> {
    params: ElectionParams,
    backend: B,
    cost_model: CostModel,
    height: u64,
    state: ContractState,
    costs: CostReport,
    transcript: Vec<TranscriptRecord>,
}

impl<B: ProofBackend> Contract<B> {
    /// Deploys at `height`. The admin's deposit must equal F.
    pub fn deploy(
        admin: Address,
        params: ElectionParams,
        deposit: u64,
        backend: B,
        cost_model: CostModel,
        height: u64,
    ) -> Result<Self, Rejection> {
        params.validate()?;
        if deposit != params.deposit {
            return Err(Rejection::WrongDeposit {
                expected: params.deposit,
                got: deposit,
            });
        }
        let n = params.n;
        let progressive = params.variant.is_progressive();
        let state = ContractState {
            admin,
            voters: Vec::with_capacity(n),
            public_keys: Vec::with_capacity(n),
            encrypted_votes: vec![None; n],
            cast_order: Vec::with_capacity(n),
            int_vsigns: vec![FieldElement::zero(); limb_count(n)],
            tally: None,
            commit_pk: progressive.then(FieldElement::zero),
            commit_v: progressive.then(FieldElement::zero),
            held: BTreeMap::from([(admin, deposit)]),
            refunded: BTreeSet::new(),
            deposits_received: deposit,
            refunds_paid: 0,
        };
        let mut c = Self {
            params,
            backend,
            cost_model,
            height,
            state,
            costs: CostReport::default(),
            transcript: Vec::new(),
        };
        let args = json!({ "params": c.params, "deposit": deposit });
        let writes = DEPLOY_WRITES + 2 * u64::from(progressive);
        c.accept(
            admin,
            Function::Deploy,
            args,
            CallFeatures {
                storage_writes: writes,
                ..Default::default()
            },
            None,
        );
        for vk in [c.params.vk_pk.clone(), c.params.vk_v.clone(), c.params.vk_t.clone()] {
            c.record_vk(admin, &vk);
        }
        Ok(c)
    }

    fn record_vk(&mut self, admin: Address, vk: &VerifyingKey) {
        let inputs = public_input_count(vk);
        let cost = self.cost_model.vk_cost(inputs);
        self.costs.records.push(CostRecord {
            height: self.height,
            caller: admin,
            function: Function::SetVerifyingKey,
            detail: Some(vk.circuit.kind.name().to_string()),
            features: CallFeatures {
                statement_elems: inputs as u64,
                ..Default::default()
            },
            model_cost: cost,
        });
        self.transcript.push(TranscriptRecord {
            height: self.height,
            caller: admin,
            function: Function::SetVerifyingKey,
            args: json!({ "circuit": vk.circuit.kind.name(), "circuit_digest": vk.circuit_digest }),
            outcome: Outcome::Ok { paid: None },
            cost: Some(cost),
        });
    }

    pub fn params(&self) -> &ElectionParams {
        &self.params
    }

    pub fn state(&self) -> &ContractState {
        &self.state
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn cost_report(&self) -> &CostReport {
        &self.costs
    }

    pub fn transcript(&self) -> &[TranscriptRecord] {
        &self.transcript
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost_model
    }

    pub fn advance_to(&mut self, height: u64) -> Result<(), Rejection> {
        if height < self.height {
            return Err(Rejection::Rewind {
                current: self.height,
                requested: height,
            });
        }
        self.height = height;
        Ok(())
    }

    /// Registration left a slot empty, or a registered voter failed to cast in time.
    pub fn is_void(&self) -> bool {
        let p = &self.params;
        (self.height >= p.t1 && self.state.index() < p.n) || (self.height >= p.t2 && self.state.casts() < p.n)
    }

    fn hash_backend(&self) -> Option<HashBackend> {
        self.params.variant.hash_backend()
    }

    fn accept(
        &mut self,
        caller: Address,
        function: Function,
        args: serde_json::Value,
        features: CallFeatures,
        paid: Option<u64>,
    ) {
        let cost = self.cost_model.cost(&features);
        self.costs.records.push(CostRecord {
            height: self.height,
            caller,
            function,
            detail: None,
            features,
            model_cost: cost,
        });
        self.transcript.push(TranscriptRecord {
            height: self.height,
            caller,
            function,
            args,
            outcome: Outcome::Ok { paid },
            cost: Some(cost),
        });
    }

    fn reject(&mut self, caller: Address, function: Function, args: serde_json::Value, why: Rejection) -> Rejection {
        self.transcript.push(TranscriptRecord {
            height: self.height,
            caller,
            function,
            args,
            outcome: Outcome::Rejected {
                code: why.code().to_string(),
            },
            cost: None,
        });
        why
    }

    fn check_window(&self, function: Function) -> Result<(), Rejection> {
        if self.params.window_open(function, self.height) {
            Ok(())
        } else {
            Err(Rejection::OutsideWindow {
                function,
                height: self.height,
            })
        }
    }

    pub fn register(
        &mut self,
        sender: Address,
        pk: Point,
        proof: &ProofObject,
        membership: &MerkleProof,
        deposit: u64,
    ) -> Result<(), Rejection> {
        let args = json!({ "pk": pk, "proof": proof, "membership": membership, "deposit": deposit });
        match self.try_register(sender, pk, proof, membership, deposit) {
            Ok(features) => {
                self.accept(sender, Function::Register, args, features, None);
                Ok(())
            }
            Err(why) => Err(self.reject(sender, Function::Register, args, why)),
        }
    }

    fn try_register(
        &mut self,
        sender: Address,
        pk: Point,
        proof: &ProofObject,
        membership: &MerkleProof,
        deposit: u64,
    ) -> Result<CallFeatures, Rejection> {
        if deposit != self.params.deposit {
            return Err(Rejection::WrongDeposit {
                expected: self.params.deposit,
                got: deposit,
            });
        }
        self.check_window(Function::Register)?;
        if self.state.index() >= self.params.n {
            return Err(Rejection::RegistryFull);
        }
        if self.state.voters.contains(&sender) || sender == self.state.admin {
            return Err(Rejection::DuplicateRegistration);
        }
        let mut f = CallFeatures {
            verifies_proof: true,
            ..Default::default()
        };
        let (member, merkle_calls) = verify_proof_metered(&self.params.root, &sender, membership);
        f.merkle_calls = merkle_calls;
        if !member {
            return Err(Rejection::NotEligible);
        }
        let stmt = Statement::PublicKey(PkStatement { pk: pk.into() });
        f.statement_elems = stmt.size() as u64;
        if !self.backend.verify(&self.params.vk_pk, &stmt, proof) {
            return Err(Rejection::InvalidProof);
        }
        self.state.voters.push(sender);
        self.state.public_keys.push(pk);
        self.state.held.insert(sender, deposit);
        self.state.deposits_received += deposit;
        // voters[index], publicKeys[index] (two coordinates), index, deposit
        f.storage_writes = 5;
        if self.params.variant.is_progressive() {
            let backend = self.hash_backend().expect("progressive variants hash");
            let acc = self.state.commit_pk.unwrap_or_else(FieldElement::zero);
            self.state.commit_pk = Some(commit::commit_pk_progressive_step(backend, acc, pk.y()));
            f.charge_hash(backend, hash_cost(backend, DomainTag::PLAIN, 2));
            f.storage_writes += 1;
        }
        Ok(f)
    }

    pub fn cast_vote(&mut self, sender: Address, vote: Point, index: u64, proof: &ProofObject) -> Result<(), Rejection> {
        let args = json!({ "vote": vote, "index": index, "proof": proof });
        match self.try_cast_vote(sender, vote, index, proof) {
            Ok(features) => {
                self.accept(sender, Function::CastVote, args, features, None);
                Ok(())
            }
            Err(why) => Err(self.reject(sender, Function::CastVote, args, why)),
        }
    }

    fn try_cast_vote(
        &mut self,
        sender: Address,
        vote: Point,
        index: u64,
        proof: &ProofObject,
    ) -> Result<CallFeatures, Rejection> {
        self.check_window(Function::CastVote)?;
        let n = self.params.n;
        if self.state.index() < n {
            return Err(Rejection::ElectionVoid);
        }
        let i = usize::try_from(index)
            .ok()
            .filter(|i| *i < n)
            .ok_or(Rejection::IndexOutOfRange(index))?;
        if self.state.voters[i] != sender {
            return Err(Rejection::WrongSender);
        }
        if self.state.encrypted_votes[i].is_some() {
            return Err(Rejection::AlreadyCast);
        }
        let mut f = CallFeatures {
            verifies_proof: true,
            ..Default::default()
        };
        let variant = self.params.variant;
        let mut cache_commit_pk = None;
        let stmt = match variant {
            Variant::Original => Statement::Vote(VoteStatement {
                vote: vote.into(),
                index,
                pk_y: self.state.public_keys.iter().map(|p| p.y()).collect(),
            }),
            _ => {
                let commit_pk = match self.state.commit_pk {
                    Some(c) => c,
                    None => {
                        // concatenated commitment: computed once, by the first caster
                        let pk_y: Vec<FieldElement> = self.state.public_keys.iter().map(|p| p.y()).collect();
                        f.charge_hash(HashBackend::Sha256, hash_cost(HashBackend::Sha256, DomainTag::PLAIN, n));
                        let c = commit::commit_pk_concat(HashBackend::Sha256, &pk_y).value;
                        cache_commit_pk = Some(c);
                        c
                    }
                };
                Statement::CommittedVote(CommittedVoteStatement {
                    vote: vote.into(),
                    commit_pk,
                    index,
                })
            }
        };
        f.statement_elems = stmt.size() as u64;
        if !self.backend.verify(&self.params.vk_v, &stmt, proof) {
            return Err(Rejection::InvalidProof);
        }
        if let Some(c) = cache_commit_pk {
            self.state.commit_pk = Some(c);
            f.storage_writes += 1;
        }
        self.state.encrypted_votes[i] = Some(vote);
        self.state.cast_order.push(i);
        f.storage_writes += 2;
        if variant.tracks_signs() && sign_of(&vote.x()) {
            let limb = &mut self.state.int_vsigns[i / KAPPA];
            *limb = xor_bit(*limb, i % KAPPA);
            f.storage_writes += 1;
        }
        if variant.is_progressive() {
            let backend = self.hash_backend().expect("progressive variants hash");
            let acc = self.state.commit_v.unwrap_or_else(FieldElement::zero);
            self.state.commit_v = Some(commit::commit_v_progressive_step(backend, acc, vote.x(), vote.y()));
            f.charge_hash(backend, hash_cost(backend, DomainTag::PLAIN, 3));
            f.storage_writes += 1;
        }
        Ok(f)
    }

    pub fn set_tally(&mut self, sender: Address, result: u64, proof: &ProofObject) -> Result<(), Rejection> {
        let args = json!({ "result": result, "proof": proof });
        match self.try_set_tally(sender, result, proof) {
            Ok(features) => {
                self.accept(sender, Function::SetTally, args, features, None);
                Ok(())
            }
            Err(why) => Err(self.reject(sender, Function::SetTally, args, why)),
        }
    }

    fn try_set_tally(&mut self, sender: Address, result: u64, proof: &ProofObject) -> Result<CallFeatures, Rejection> {
        if sender != self.state.admin {
            return Err(Rejection::NotAdmin);
        }
        self.check_window(Function::SetTally)?;
        if self.state.casts() < self.params.n {
            return Err(Rejection::VotesMissing);
        }
        if self.state.tally.is_some() {
            return Err(Rejection::TallyAlreadySet);
        }
        let mut f = CallFeatures {
            verifies_proof: true,
            ..Default::default()
        };
        let v_y = || -> Vec<FieldElement> {
            self.state
                .encrypted_votes
                .iter()
                .map(|v| v.expect("all votes cast").y())
                .collect()
        };
        let stmt = match self.params.variant {
            Variant::Original => Statement::Tally(TallyStatement {
                res: result,
                limbs: self.state.int_vsigns.clone(),
                v_y: v_y(),
            }),
            Variant::CommittedSha256 => {
                let inputs = self.params.n + self.state.int_vsigns.len();
                f.charge_hash(HashBackend::Sha256, hash_cost(HashBackend::Sha256, DomainTag::PLAIN, inputs));
                Statement::CommittedTally(CommittedTallyStatement {
                    res: result,
                    commit_v: commit::commit_v_concat(HashBackend::Sha256, &v_y(), &self.state.int_vsigns).value,
                })
            }
            Variant::ProgressiveSha256 | Variant::ProgressivePoseidon => {
                Statement::CommittedTally(CommittedTallyStatement {
                    res: result,
                    commit_v: self.state.commit_v.expect("progressive accumulator"),
                })
            }
        };
        f.statement_elems = stmt.size() as u64;
        if !self.backend.verify(&self.params.vk_t, &stmt, proof) {
            return Err(Rejection::InvalidProof);
        }
        self.state.tally = Some(result);
        f.storage_writes = 1;
        Ok(f)
    }

    /// Pays F back to an eligible depositor and returns the amount.
    pub fn refund(&mut self, sender: Address) -> Result<u64, Rejection> {
        let args = json!({});
        match self.try_refund(sender) {
            Ok((amount, features)) => {
                self.accept(sender, Function::Refund, args, features, Some(amount));
                Ok(amount)
            }
            Err(why) => Err(self.reject(sender, Function::Refund, args, why)),
        }
    }

    /// Whether `who` may reclaim a deposit once the refund window opens.
    ///
    /// Valid election: the admin once a tally is set, voters who cast. Void
    /// election: the admin, and voters who did everything asked of them before
    /// the deadline that voided it.
    pub fn refund_eligible(&self, who: &Address) -> bool {
        let s = &self.state;
        if *who == s.admin {
            return s.tally.is_some() || self.is_void();
        }
        let Some(i) = s.voters.iter().position(|v| v == who) else {
            return false;
        };
        if s.index() < self.params.n {
            // registration never completed: casting was impossible for everyone
            true
        } else {
            s.encrypted_votes[i].is_some()
        }
    }

    fn try_refund(&mut self, sender: Address) -> Result<(u64, CallFeatures), Rejection> {
        self.check_window(Function::Refund)?;
        if self.state.refunded.contains(&sender) {
            return Err(Rejection::AlreadyRefunded);
        }
        if !self.refund_eligible(&sender) {
            return Err(Rejection::NotRefundable);
        }
        let amount = self.state.held.remove(&sender).ok_or(Rejection::NotRefundable)?;
        self.state.refunded.insert(sender);
        self.state.refunds_paid += amount;
        Ok((
            amount,
            CallFeatures {
                storage_writes: 1,
                ..Default::default()
            },
        ))
    }

    /// Checks every state invariant; the error names the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let s = &self.state;
        let n = self.params.n;
        if s.index() > n {
            return Err(format!("index {} exceeds n {n}", s.index()));
        }
        let distinct: BTreeSet<_> = s.voters.iter().collect();
        if distinct.len() != s.voters.len() {
            return Err("duplicate voter addresses".into());
        }
        if s.public_keys.len() != s.voters.len() {
            return Err("public keys and voters differ in length".into());
        }
        for (i, v) in s.encrypted_votes.iter().enumerate() {
            if v.is_some() && i >= s.index() {
                return Err(format!("vote stored at unregistered index {i}"));
            }
        }
        let stored = s.encrypted_votes.iter().filter(|v| v.is_some()).count();
        if stored != s.casts() {
            return Err("cast order disagrees with stored votes".into());
        }
        if self.params.variant.tracks_signs() {
            let expected = expected_sign_limbs(&s.encrypted_votes);
            if expected != s.int_vsigns {
                return Err("Int_Vsigns disagrees with the stored votes".into());
            }
        }
        if s.held_total() + s.refunds_paid != s.deposits_received {
            return Err(format!(
                "deposits not conserved: held {} + refunded {} != received {}",
                s.held_total(),
                s.refunds_paid,
                s.deposits_received
            ));
        }
        Ok(())
    }
}

/// Number of public inputs the verifying key's circuit takes.
pub fn public_input_count(vk: &VerifyingKey) -> usize {
    let p = &vk.circuit.params;
    match (vk.circuit.kind, p.variant.is_committed()) {
        (crate::circuits::CircuitKind::PublicKeyGen, _) => 2,
        (crate::circuits::CircuitKind::EncryptedVoteGen, false) => p.n + 3,
        (crate::circuits::CircuitKind::EncryptedVoteGen, true) => 4,
        (crate::circuits::CircuitKind::Tallying, false) => p.n + p.l + 1,
        (crate::circuits::CircuitKind::Tallying, true) => 2,
    }
}

fn xor_bit(limb: FieldElement, bit: usize) -> FieldElement {
    let mut v = limb.to_biguint();
    v ^= num_bigint::BigUint::from(1u8) << bit;
    FieldElement::from_biguint(&v)
}

fn expected_sign_limbs(votes: &[Option<Point>]) -> Vec<FieldElement> {
    let signs: Vec<bool> = votes.iter().map(|v| v.is_some_and(|p| sign_of(&p.x()))).collect();
    crate::circuits::pack_sign_bits(&signs, limb_count(votes.len()))
}
