use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use zkovn::circuits::witness::{public_key_instance, tally_instance, vote_instance};
use zkovn::circuits::{Circuit, CircuitKind, CircuitParams, Statement, Witness};
use zkovn::ledger::transcript::write_jsonl;
use zkovn::ledger::{Contract, ElectionParams, Function, Rejection};
use zkovn::merkle::{hex_encode, Address, MerkleTree};
use zkovn::ovn::VoterKeypair;
use zkovn::proofsys::{DevBackend, ProofBackend, ProofObject, ProvingKey, VerifyingKey};
use zkovn::rng::{derive_rng, os_seed};
use zkovn::Point;

use crate::config::{RunConfig, Scenario, VoteSpec};
use crate::{write_cost_csv, CliError};

#[derive(Debug, Clone)]
pub struct Voter {
    pub address: Address,
    pub keys: VoterKeypair,
    pub vote: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionEntry {
    pub height: u64,
    pub caller: Address,
    pub function: Function,
    pub code: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub setup_ms: f64,
    pub register_ms: f64,
    pub cast_ms: f64,
    pub tally_ms: f64,
    pub refund_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub variant: String,
    pub scenario: Option<Scenario>,
    pub seed_hex: String,
    pub tally: Option<u64>,
    pub expected: u64,
    pub void: bool,
    pub rejections: Vec<RejectionEntry>,
    /// Rejections the scenario was designed to provoke that did not happen,
    /// or rejections on the honest path.
    pub unexpected: Vec<String>,
    pub deposits_received: u64,
    pub refunds_paid: u64,
    pub deposits_held: u64,
    pub forfeited: Vec<Address>,
    /// The first violated contract invariant, if any.
    pub invariant_violation: Option<String>,
    pub times: PhaseTimes,
    pub cost_report_path: Option<String>,
    pub transcript_path: Option<String>,
}

impl RunReport {
    /// Honest-path success: no unexpected outcome and all invariants hold.
    pub fn ok(&self) -> bool {
        self.unexpected.is_empty() && self.invariant_violation.is_none()
    }

    pub fn conserved(&self) -> bool {
        self.deposits_held + self.refunds_paid == self.deposits_received
    }
}

/// Circuit keys for one election size and variant.
#[derive(Debug, Clone)]
pub struct CircuitKeys {
    pub pk: (ProvingKey, VerifyingKey),
    pub vote: (ProvingKey, VerifyingKey),
    pub tally: (ProvingKey, VerifyingKey),
}

impl CircuitKeys {
    pub fn setup(params: CircuitParams) -> Self {
        let b = DevBackend;
        Self {
            pk: b.setup(Circuit::new(CircuitKind::PublicKeyGen, params)),
            vote: b.setup(Circuit::new(CircuitKind::EncryptedVoteGen, params)),
            tally: b.setup(Circuit::new(CircuitKind::Tallying, params)),
        }
    }
}

/// One election on a fresh simulated chain.
pub struct Election {
    pub config: RunConfig,
    pub seed: Vec<u8>,
    pub params: CircuitParams,
    pub admin: Address,
    pub voters: Vec<Voter>,
    pub tree: MerkleTree,
    pub keys: CircuitKeys,
    pub contract: Contract,
    /// Order in which voters submit their ballots.
    pub cast_order: Vec<usize>,
    pub times: PhaseTimes,
}

fn rejection_entries(c: &Contract) -> Vec<RejectionEntry> {
    c.transcript()
        .iter()
        .filter_map(|r| match &r.outcome {
            zkovn::ledger::Outcome::Rejected { code } => Some(RejectionEntry {
                height: r.height,
                caller: r.caller,
                function: r.function,
                code: code.clone(),
            }),
            _ => None,
        })
        .collect()
}

fn votes_for(config: &RunConfig, seed: &[u8]) -> Vec<u64> {
    match &config.votes {
        VoteSpec::Explicit(v) => v.clone(),
        VoteSpec::YesFraction(f) => {
            let yes = (f * config.n as f64).round() as usize;
            let mut v: Vec<u64> = (0..config.n).map(|i| u64::from(i < yes)).collect();
            v.shuffle(&mut derive_rng(seed, "votes"));
            v
        }
    }
}

impl Election {
    pub fn setup(config: RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        let started = Instant::now();
        let seed = config.seed.clone().unwrap_or_else(|| os_seed().to_vec());
        let n = config.n;
        let params = CircuitParams::new(n, config.variant)?;
        let mut addr_rng = derive_rng(&seed, "addresses");
        let admin = Address::random(&mut addr_rng);
        let addresses: Vec<Address> = (0..n).map(|_| Address::random(&mut addr_rng)).collect();
        let votes = votes_for(&config, &seed);
        let voters: Vec<Voter> = addresses
            .into_par_iter()
            .zip(votes)
            .enumerate()
            .map(|(i, (address, vote))| Voter {
                address,
                keys: VoterKeypair::random(&mut derive_rng(&seed, &format!("voter/{i}"))),
                vote,
            })
            .collect();
        let tree = MerkleTree::build(&voters.iter().map(|v| v.address).collect::<Vec<_>>())?;
        let keys = CircuitKeys::setup(params);
        let s = config.schedule;
        let election_params = ElectionParams {
            root: tree.root(),
            vk_pk: keys.pk.1.clone(),
            vk_v: keys.vote.1.clone(),
            vk_t: keys.tally.1.clone(),
            t1: s.t1,
            t2: s.t2,
            t3: s.t3,
            t4: s.t4,
            n,
            deposit: config.deposit,
            variant: config.variant,
        };
        let contract = Contract::deploy(
            admin,
            election_params,
            config.deposit,
            DevBackend,
            config.cost_model.clone(),
            0,
        )
        .map_err(|e| CliError::Config(format!("deploy rejected: {e}")))?;
        let mut cast_order: Vec<usize> = (0..n).collect();
        cast_order.shuffle(&mut derive_rng(&seed, "cast-order"));
        let times = PhaseTimes {
            setup_ms: ms(started),
            ..Default::default()
        };
        Ok(Self {
            config,
            seed,
            params,
            admin,
            voters,
            tree,
            keys,
            contract,
            cast_order,
            times,
        })
    }

    pub fn expected(&self) -> u64 {
        self.voters.iter().map(|v| v.vote).sum()
    }

    /// Voter-side registration material, proved in parallel.
    pub fn registration(&self, i: usize) -> Result<(Point, ProofObject, zkovn::merkle::MerkleProof), CliError> {
        let v = &self.voters[i];
        let (s, w) = public_key_instance(&self.params, &v.keys)?;
        let proof = DevBackend.prove(&self.keys.pk.0, &s, &w)?;
        Ok((v.keys.public, proof, self.tree.gen_proof(i)?))
    }

    pub fn register_all(&mut self) -> Result<(), CliError> {
        let started = Instant::now();
        self.contract.advance_to(1)?;
        let material: Vec<_> = (0..self.params.n)
            .into_par_iter()
            .map(|i| self.registration(i))
            .collect::<Result<_, _>>()?;
        let deposit = self.config.deposit;
        for (i, (pk, proof, membership)) in material.into_iter().enumerate() {
            let _ = self.contract.register(self.voters[i].address, pk, &proof, &membership, deposit);
        }
        self.times.register_ms += ms(started);
        Ok(())
    }

    /// The encrypted ballot and proof voter `i` would submit against the keys on chain.
    pub fn ballot(&self, i: usize, vote: u64) -> Result<(Point, Statement, Witness, ProofObject), CliError> {
        let pks = &self.contract.state().public_keys;
        let (enc, s, w) = vote_instance(&self.params, i, vote, &self.voters[i].keys, pks)?;
        let proof = DevBackend.prove(&self.keys.vote.0, &s, &w)?;
        Ok((enc.0, s, w, proof))
    }

    /// Casts for every voter in `cast_order` except those in `skip`.
    pub fn cast_all(&mut self, skip: &[usize]) -> Result<(), CliError> {
        let started = Instant::now();
        self.contract.advance_to(self.config.schedule.t1 + 1)?;
        let order: Vec<usize> = self.cast_order.iter().copied().filter(|i| !skip.contains(i)).collect();
        let ballots: Vec<_> = order
            .par_iter()
            .map(|&i| self.ballot(i, self.voters[i].vote).map(|b| (i, b)))
            .collect::<Result<_, _>>()?;
        for (i, (vote, _, _, proof)) in ballots {
            let _ = self.contract.cast_vote(self.voters[i].address, vote, i as u64, &proof);
        }
        self.times.cast_ms += ms(started);
        Ok(())
    }

    /// Encrypted votes as the tally circuit expects them: cast order for the
    /// progressive variants, index order otherwise.
    pub fn tally_inputs(&self) -> Option<Vec<Point>> {
        let s = self.contract.state();
        if s.casts() < self.params.n {
            return None;
        }
        if self.params.variant.is_progressive() {
            s.cast_order.iter().map(|&i| s.encrypted_votes[i]).collect()
        } else {
            s.encrypted_votes.iter().copied().collect()
        }
    }

    /// The admin's honest tally: computed from on-chain data, proved, submitted.
    /// Returns the result, or None when the votes on chain do not admit a tally.
    pub fn tally(&mut self) -> Result<Option<u64>, CliError> {
        let started = Instant::now();
        self.contract.advance_to(self.config.schedule.t2 + 1)?;
        let Some(votes) = self.tally_inputs() else {
            self.times.tally_ms += ms(started);
            return Ok(None);
        };
        let (s, w) = tally_instance(&self.params, &votes)?;
        let proof = DevBackend.prove(&self.keys.tally.0, &s, &w)?;
        let res = statement_result(&s);
        let _ = self.contract.set_tally(self.admin, res, &proof);
        self.times.tally_ms += ms(started);
        Ok(Some(res))
    }

    pub fn refund_all(&mut self) -> Result<(), CliError> {
        let started = Instant::now();
        self.contract.advance_to(self.config.schedule.t3 + 1)?;
        let _ = self.contract.refund(self.admin);
        for i in 0..self.voters.len() {
            let _ = self.contract.refund(self.voters[i].address);
        }
        self.times.refund_ms += ms(started);
        Ok(())
    }

    pub fn report(&self, scenario: Option<Scenario>, unexpected: Vec<String>) -> RunReport {
        let s = self.contract.state();
        let mut forfeited: Vec<Address> = s.held.keys().copied().collect();
        forfeited.sort();
        RunReport {
            n: self.params.n,
            variant: self.params.variant.to_string(),
            scenario,
            seed_hex: hex_encode(&self.seed),
            tally: s.tally,
            expected: self.expected(),
            void: self.contract.is_void(),
            rejections: rejection_entries(&self.contract),
            unexpected,
            deposits_received: s.deposits_received,
            refunds_paid: s.refunds_paid,
            deposits_held: s.held_total(),
            forfeited,
            invariant_violation: self.contract.check_invariants().err(),
            times: self.times,
            cost_report_path: None,
            transcript_path: None,
        }
    }

    /// Writes transcript, cost CSV, eligibility tree and report to the output directory.
    pub fn write_outputs(&self, report: &mut RunReport) -> Result<(), CliError> {
        let Some(dir) = &self.config.out else {
            return Ok(());
        };
        fs::create_dir_all(dir)?;
        let transcript = dir.join("transcript.jsonl");
        write_jsonl(self.contract.transcript(), fs::File::create(&transcript)?)?;
        let cost = dir.join("cost.csv");
        write_cost_csv(
            &cost,
            self.params.n,
            &self.params.variant.to_string(),
            self.contract.cost_report(),
        )?;
        let tree: Vec<String> = self.voters.iter().map(|v| v.address.to_hex()).collect();
        fs::write(
            dir.join("tree.json"),
            serde_json::to_string_pretty(&serde_json::json!({
                "root": hex_encode(&self.tree.root()),
                "depth": self.tree.depth(),
                "leaves": tree,
            }))?,
        )?;
        report.transcript_path = Some(transcript.display().to_string());
        report.cost_report_path = Some(cost.display().to_string());
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
        Ok(())
    }
}

fn statement_result(s: &Statement) -> u64 {
    match s {
        Statement::Tally(t) => t.res,
        Statement::CommittedTally(t) => t.res,
        _ => unreachable!("tally statement"),
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn honest_unexpected(c: &Contract) -> Vec<String> {
    rejection_entries(c)
        .into_iter()
        .map(|r| format!("{} by {} rejected: {}", r.function, r.caller, r.code))
        .collect()
}

/// Runs all four phases honestly.
pub fn run_election(config: RunConfig) -> Result<RunReport, CliError> {
    let mut e = Election::setup(config)?;
    e.register_all()?;
    e.cast_all(&[])?;
    let res = e.tally()?;
    e.refund_all()?;
    let mut unexpected = honest_unexpected(&e.contract);
    if res != Some(e.expected()) || e.contract.state().tally != Some(e.expected()) {
        unexpected.push(format!(
            "tally {:?} differs from the plaintext sum {}",
            e.contract.state().tally,
            e.expected()
        ));
    }
    if e.contract.state().refunds_paid != e.contract.state().deposits_received {
        unexpected.push("not every deposit was refunded".into());
    }
    let mut report = e.report(None, unexpected);
    e.write_outputs(&mut report)?;
    Ok(report)
}

fn expect_rejection(result: Result<impl Sized, Rejection>, code: &str, what: &str, unexpected: &mut Vec<String>) {
    match result {
        Ok(_) => unexpected.push(format!("{what}: accepted, expected {code}")),
        Err(r) if r.code() != code => unexpected.push(format!("{what}: rejected with {}, expected {code}", r.code())),
        Err(_) => {}
    }
}

/// Runs an election with one adversarial action injected. The report's
/// `unexpected` list is empty when the contract rejected the action with the
/// expected code and the honest remainder of the election behaved as specified.
pub fn run_attack(scenario: Scenario, config: RunConfig) -> Result<RunReport, CliError> {
    if config.n < 2 && matches!(scenario, Scenario::WrongIndexCast | Scenario::AbortMissingVote) {
        return Err(CliError::Config(format!("{scenario} needs at least 2 voters")));
    }
    let mut e = Election::setup(config)?;
    let mut unexpected = Vec::new();
    let deposit = e.config.deposit;

    // registration
    match scenario {
        Scenario::NonMemberRegister => {
            e.contract.advance_to(1)?;
            let outsider = Address::random(&mut derive_rng(&e.seed, "outsider"));
            let keys = VoterKeypair::random(&mut derive_rng(&e.seed, "outsider-key"));
            let (s, w) = public_key_instance(&e.params, &keys)?;
            let proof = DevBackend.prove(&e.keys.pk.0, &s, &w)?;
            // a member's path cannot authenticate a different leaf
            let membership = e.tree.gen_proof(0)?;
            let r = e.contract.register(outsider, keys.public, &proof, &membership, deposit);
            expect_rejection(r, "not-eligible", "non-member registration", &mut unexpected);
            e.register_all()?;
        }
        Scenario::DuplicateRegister => {
            e.contract.advance_to(1)?;
            let (pk, proof, membership) = e.registration(0)?;
            let first = e.voters[0].address;
            if e.contract.register(first, pk, &proof, &membership, deposit).is_err() {
                unexpected.push("first registration rejected".into());
            }
            let r = e.contract.register(first, pk, &proof, &membership, deposit);
            expect_rejection(r, "duplicate-registration", "second registration", &mut unexpected);
            let material: Vec<_> = (1..e.params.n)
                .into_par_iter()
                .map(|i| e.registration(i))
                .collect::<Result<_, _>>()?;
            for (k, (pk, proof, membership)) in material.into_iter().enumerate() {
                let i = k + 1;
                if let Err(r) = e.contract.register(e.voters[i].address, pk, &proof, &membership, deposit) {
                    unexpected.push(format!("honest registration {i} rejected: {}", r.code()));
                }
            }
        }
        _ => e.register_all()?,
    }

    // casting
    let mut skip = Vec::new();
    match scenario {
        Scenario::WrongIndexCast => {
            e.contract.advance_to(e.config.schedule.t1 + 1)?;
            // voter 0 submits a valid ballot for slot 1
            let (vote, _, _, proof) = e.ballot(1, e.voters[1].vote)?;
            let r = e.contract.cast_vote(e.voters[0].address, vote, 1, &proof);
            expect_rejection(r, "wrong-sender", "cast under another voter's index", &mut unexpected);
        }
        Scenario::ForgedProof => {
            e.contract.advance_to(e.config.schedule.t1 + 1)?;
            // V + G encodes a vote of v+1; the honest witness no longer fits it
            let i = e.cast_order[0];
            let (vote, s, w, _) = e.ballot(i, e.voters[i].vote)?;
            let forged_vote = vote + Point::generator();
            let forged_stmt = with_vote(&s, forged_vote);
            let forged = DevBackend.package_unchecked(&e.keys.vote.0, &forged_stmt, &w);
            let r = e.contract.cast_vote(e.voters[i].address, forged_vote, i as u64, &forged);
            expect_rejection(r, "invalid-proof", "forged vote proof", &mut unexpected);
        }
        Scenario::AbortMissingVote => {
            skip.push(e.cast_order[e.cast_order.len() - 1]);
        }
        _ => {}
    }
    e.cast_all(&skip)?;

    // tallying
    match scenario {
        Scenario::BadTally => {
            e.contract.advance_to(e.config.schedule.t2 + 1)?;
            let votes = e.tally_inputs().expect("all votes cast");
            let (s, w) = tally_instance(&e.params, &votes)?;
            let wrong = statement_result(&s) + 1;
            let wrong_stmt = with_result(&s, wrong);
            if DevBackend.prove(&e.keys.tally.0, &wrong_stmt, &w).is_ok() {
                unexpected.push("a proof for a wrong tally was produced".into());
            }
            let forged = DevBackend.package_unchecked(&e.keys.tally.0, &wrong_stmt, &w);
            let r = e.contract.set_tally(e.admin, wrong, &forged);
            expect_rejection(r, "invalid-proof", "wrong tally", &mut unexpected);
            if e.contract.state().tally.is_some() {
                unexpected.push("tally result set after a wrong tally".into());
            }
        }
        Scenario::AbortMissingVote => {
            e.contract.advance_to(e.config.schedule.t2 + 1)?;
            if e.tally_inputs().is_some() {
                unexpected.push("tally inputs complete despite a missing vote".into());
            }
            // the admin's best effort: a statement over the votes present cannot be proved
            let present: Vec<Point> = e.contract.state().encrypted_votes.iter().flatten().copied().collect();
            if tally_instance(&e.params, &present).is_ok() {
                unexpected.push("tally over an incomplete vote list succeeded".into());
            }
            let r = e.contract.set_tally(
                e.admin,
                e.expected(),
                &ProofObject {
                    backend: DevBackend::TAG.into(),
                    circuit_digest: e.keys.tally.1.circuit_digest.clone(),
                    statement_digest: String::new(),
                    payload_hex: "0x".into(),
                },
            );
            expect_rejection(r, "votes-missing", "tally with a missing vote", &mut unexpected);
            if !e.contract.is_void() {
                unexpected.push("election not void after a missing vote".into());
            }
        }
        _ => {
            if e.tally()? != Some(e.expected()) || e.contract.state().tally != Some(e.expected()) {
                unexpected.push("honest tally failed".into());
            }
        }
    }

    e.refund_all()?;

    // every rejection must be the one the scenario provoked, or a refund refusal the policy prescribes
    let expected_codes: &[&str] = match scenario {
        Scenario::BadTally => &["invalid-proof", "not-refundable"],
        Scenario::NonMemberRegister => &["not-eligible"],
        Scenario::WrongIndexCast => &["wrong-sender"],
        Scenario::ForgedProof => &["invalid-proof"],
        Scenario::DuplicateRegister => &["duplicate-registration"],
        Scenario::AbortMissingVote => &["votes-missing", "not-refundable"],
    };
    for r in rejection_entries(&e.contract) {
        if !expected_codes.contains(&r.code.as_str()) {
            unexpected.push(format!("{} by {} rejected: {}", r.function, r.caller, r.code));
        }
    }
    let s = e.contract.state();
    let forfeits: BTreeMap<Address, u64> = s.held.clone();
    match scenario {
        Scenario::BadTally => {
            if forfeits.keys().ne([e.admin].iter()) {
                unexpected.push("only the administrator should forfeit after a wrong tally".into());
            }
        }
        Scenario::AbortMissingVote => {
            let absent = e.voters[skip[0]].address;
            if forfeits.keys().ne([absent].iter()) {
                unexpected.push("only the absent voter should forfeit in a void election".into());
            }
        }
        _ => {
            if !forfeits.is_empty() {
                unexpected.push("deposits left unrefunded".into());
            }
        }
    }
    let mut report = e.report(Some(scenario), unexpected);
    e.write_outputs(&mut report)?;
    Ok(report)
}

fn with_vote(s: &Statement, vote: Point) -> Statement {
    let mut s = s.clone();
    match &mut s {
        Statement::Vote(v) => v.vote = vote.into(),
        Statement::CommittedVote(v) => v.vote = vote.into(),
        _ => unreachable!("vote statement"),
    }
    s
}

fn with_result(s: &Statement, res: u64) -> Statement {
    let mut s = s.clone();
    match &mut s {
        Statement::Tally(t) => t.res = res,
        Statement::CommittedTally(t) => t.res = res,
        _ => unreachable!("tally statement"),
    }
    s
}

/// Samples a vote vector with the given number of voters, for tests and sweeps.
pub fn random_votes(n: usize, seed: &[u8]) -> Vec<u64> {
    let mut rng = derive_rng(seed, "random-votes");
    (0..n).map(|_| rng.gen_range(0..2)).collect()
}
