use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use zkovn::circuits::witness::{public_key_instance, tally_instance};
use zkovn::circuits::{constraint_count, CircuitKind, Variant};
use zkovn::ledger::cost::{calibrate, CalibrationRun};
use zkovn::ledger::{CallFeatures, CostModel, CostReport, Function};
use zkovn::proofsys::{DevBackend, ProofBackend};

use crate::config::{RunConfig, VoteSpec};
use crate::election::Election;
use crate::{cost_rows, CliError, CostRow};

/// Circuit-level measurements for one (n, variant) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub variant: String,
    pub circuit: String,
    pub statement_elems: usize,
    pub gadget_total: u64,
    pub sha256_blocks: u64,
    pub poseidon_perms: u64,
    pub prove_ms: f64,
    pub verify_ms: f64,
}

fn honest(n: usize, variant: Variant, cost_model: &CostModel, seed: &[u8]) -> Result<Election, CliError> {
    let mut cfg = RunConfig::new(n, variant, VoteSpec::YesFraction(0.5)).with_seed(seed);
    cfg.cost_model = cost_model.clone();
    let mut e = Election::setup(cfg)?;
    e.register_all()?;
    e.cast_all(&[])?;
    if e.tally()? != Some(e.expected()) {
        return Err(CliError::Config(format!("sweep election n={n} {variant} did not tally")));
    }
    e.refund_all()?;
    if let Some(r) = e.report(None, Vec::new()).rejections.first() {
        return Err(CliError::Config(format!(
            "sweep election n={n} {variant}: {} rejected with {}",
            r.function, r.code
        )));
    }
    Ok(e)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64() * 1e3)
}

fn circuit_rows(e: &Election) -> Result<Vec<SweepRow>, CliError> {
    let b = DevBackend;
    let v0 = e.cast_order[0];
    let (s_pk, w_pk) = public_key_instance(&e.params, &e.voters[0].keys)?;
    let (_, s_v, w_v, _) = e.ballot(v0, e.voters[v0].vote)?;
    let votes = e.tally_inputs().expect("all votes cast");
    let (s_t, w_t) = tally_instance(&e.params, &votes)?;
    let mut rows = Vec::new();
    for (kind, keys, s, w) in [
        (CircuitKind::PublicKeyGen, &e.keys.pk, s_pk, w_pk),
        (CircuitKind::EncryptedVoteGen, &e.keys.vote, s_v, w_v),
        (CircuitKind::Tallying, &e.keys.tally, s_t, w_t),
    ] {
        let (proof, prove_ms) = timed(|| b.prove(&keys.0, &s, &w));
        let proof = proof?;
        let (ok, verify_ms) = timed(|| b.verify(&keys.1, &s, &proof));
        if !ok {
            return Err(CliError::Config(format!("{} proof failed to verify", kind.name())));
        }
        let count = constraint_count(kind, &e.params);
        rows.push(SweepRow {
            n: e.params.n,
            variant: e.params.variant.to_string(),
            circuit: kind.name().to_string(),
            statement_elems: s.size(),
            gadget_total: count.total,
            sha256_blocks: count.tally.sha256_blocks,
            poseidon_perms: count.tally.poseidon_t2 + count.tally.poseidon_t3 + count.tally.poseidon_t4,
            prove_ms,
            verify_ms,
        });
    }
    Ok(rows)
}

/// Runs an honest election per (n, variant) and writes `cost.csv` (per-call
/// model costs) and `sweep.csv` (circuit sizes and prove/verify times).
pub fn scaling_sweep(
    ns: &[usize],
    variants: &[Variant],
    out: Option<&Path>,
    cost_model: &CostModel,
    seed: &[u8],
) -> Result<(Vec<CostRow>, Vec<SweepRow>), CliError> {
    let mut costs = Vec::new();
    let mut circuits = Vec::new();
    for &variant in variants {
        for &n in ns {
            let e = honest(n, variant, cost_model, seed)?;
            costs.extend(cost_rows(n, variant.as_str(), e.contract.cost_report()));
            circuits.extend(circuit_rows(&e)?);
        }
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("cost.csv"))?;
        for r in &costs {
            w.serialize(r)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
        for r in &circuits {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok((costs, circuits))
}

/// The heaviest accepted call of a function, by resources consumed.
fn heaviest(report: &CostReport, f: Function) -> CallFeatures {
    report
        .by_function(f)
        .map(|r| r.features)
        .max_by_key(|x| (x.storage_writes, x.hash_calls(), x.merkle_calls, x.statement_elems))
        .unwrap_or_default()
}

/// Features of an honest original-variant election at the calibration size.
pub fn calibration_run(model: &CostModel) -> Result<CalibrationRun, CliError> {
    let e = honest(model.targets.n, Variant::Original, model, b"calibration")?;
    let report = e.contract.cost_report();
    let vk: Vec<usize> = report
        .by_function(Function::SetVerifyingKey)
        .map(|r| r.statement_elems() as usize)
        .collect();
    Ok(CalibrationRun {
        register: heaviest(report, Function::Register),
        cast_vote: heaviest(report, Function::CastVote),
        set_tally: heaviest(report, Function::SetTally),
        refund: heaviest(report, Function::Refund),
        vk_public_inputs: [vk[0], vk[1], vk[2]],
    })
}

/// Refits the constants of `model` against its own targets and priors.
pub fn recalibrate(model: &CostModel) -> Result<CostModel, CliError> {
    let run = calibration_run(model)?;
    let constants = calibrate(&run, &model.targets, model.priors)?;
    Ok(CostModel {
        constants,
        priors: model.priors,
        targets: model.targets.clone(),
    })
}
