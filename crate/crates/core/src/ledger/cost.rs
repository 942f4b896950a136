//! Transaction cost model.
//!
//! model_cost = C_base(f) + C_elem·statement_elems + C_hash(backend)·hash_calls + C_store·storage_writes
//!
//! with C_base(f) = C_tx + C_verify·[f verifies a proof]. Merkle digests are
//! SHA-256 compressions and are charged at the SHA-256 rate. Verifying-key
//! storage is a separate setup line item, C_vk_base + C_vk_elem·public_inputs.
//!
//! Units are abstract. Constants are calibrated once against reference
//! measurements and frozen in `data/cost_model.json`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::commit::HashBackend;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostConstants {
    pub c_tx: f64,
    pub c_verify: f64,
    pub c_elem: f64,
    pub c_store: f64,
    pub c_hash_sha256: f64,
    pub c_hash_poseidon: f64,
    pub c_vk_base: f64,
    pub c_vk_elem: f64,
}

/// What one accepted call consumed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallFeatures {
    pub verifies_proof: bool,
    pub statement_elems: u64,
    pub sha256_calls: u64,
    pub poseidon_calls: u64,
    pub merkle_calls: u64,
    pub storage_writes: u64,
}

impl CallFeatures {
    /// Commitment hash invocations, in the backend's own unit.
    pub fn hash_calls(&self) -> u64 {
        self.sha256_calls + self.poseidon_calls
    }

    pub fn charge_hash(&mut self, backend: HashBackend, calls: u64) {
        match backend {
            HashBackend::Sha256 => self.sha256_calls += calls,
            HashBackend::Poseidon => self.poseidon_calls += calls,
        }
    }
}

/// Reference measurements the constants are fitted to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    pub n: usize,
    pub register: f64,
    pub cast_vote: f64,
    pub set_tally: f64,
    pub refund: f64,
    pub vk_public_key_gen: f64,
    pub vk_encrypted_vote_gen: f64,
    pub vk_tallying: f64,
}

/// Constants held fixed during the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostPriors {
    pub c_store: f64,
    pub c_hash_sha256: f64,
    pub c_hash_poseidon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub constants: CostConstants,
    pub priors: CostPriors,
    pub targets: CalibrationTargets,
}

const BUNDLED: &str = include_str!("../../data/cost_model.json");

impl CostModel {
    pub fn bundled() -> Self {
        serde_json::from_str(BUNDLED).expect("bundled cost model parses")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn cost(&self, f: &CallFeatures) -> u64 {
        let c = &self.constants;
        let raw = c.c_tx
            + if f.verifies_proof { c.c_verify } else { 0.0 }
            + c.c_elem * f.statement_elems as f64
            + c.c_hash_sha256 * (f.sha256_calls + f.merkle_calls) as f64
            + c.c_hash_poseidon * f.poseidon_calls as f64
            + c.c_store * f.storage_writes as f64;
        raw.round().max(0.0) as u64
    }

    pub fn vk_cost(&self, public_inputs: usize) -> u64 {
        let c = &self.constants;
        (c.c_vk_base + c.c_vk_elem * public_inputs as f64).round().max(0.0) as u64
    }
}

/// Observed features of the four contract calls and the three verifying-key
/// sizes in a reference election of `targets.n` voters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRun {
    pub register: CallFeatures,
    pub cast_vote: CallFeatures,
    pub set_tally: CallFeatures,
    pub refund: CallFeatures,
    pub vk_public_inputs: [usize; 3],
}

/// Least-squares fit of (C_tx, C_verify, C_elem) over the four call rows and of
/// (C_vk_base, C_vk_elem) over the three key rows, with the priors held fixed.
pub fn calibrate(run: &CalibrationRun, targets: &CalibrationTargets, priors: CostPriors) -> Result<CostConstants> {
    let rows = [
        (run.register, targets.register),
        (run.cast_vote, targets.cast_vote),
        (run.set_tally, targets.set_tally),
        (run.refund, targets.refund),
    ];
    let fixed = |f: &CallFeatures| {
        priors.c_store * f.storage_writes as f64
            + priors.c_hash_sha256 * (f.sha256_calls + f.merkle_calls) as f64
            + priors.c_hash_poseidon * f.poseidon_calls as f64
    };
    let a = DMatrix::from_fn(rows.len(), 3, |i, j| {
        let f = &rows[i].0;
        match j {
            0 => 1.0,
            1 => f64::from(u8::from(f.verifies_proof)),
            _ => f.statement_elems as f64,
        }
    });
    let b = DVector::from_fn(rows.len(), |i, _| rows[i].1 - fixed(&rows[i].0));
    let x = least_squares(a, b)?;

    let vk_targets = [targets.vk_public_key_gen, targets.vk_encrypted_vote_gen, targets.vk_tallying];
    let a = DMatrix::from_fn(3, 2, |i, j| if j == 0 { 1.0 } else { run.vk_public_inputs[i] as f64 });
    let y = least_squares(a, DVector::from_column_slice(&vk_targets))?;

    Ok(CostConstants {
        c_tx: x[0],
        c_verify: x[1],
        c_elem: x[2],
        c_store: priors.c_store,
        c_hash_sha256: priors.c_hash_sha256,
        c_hash_poseidon: priors.c_hash_poseidon,
        c_vk_base: y[0],
        c_vk_elem: y[1],
    })
}

fn least_squares(a: DMatrix<f64>, b: DVector<f64>) -> Result<DVector<f64>> {
    a.svd(true, true)
        .solve(&b, 1e-9)
        .map_err(|e| Error::Params(format!("least-squares solve failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_planted_constants() {
        let truth = CostConstants {
            c_tx: 30_000.0,
            c_verify: 200_000.0,
            c_elem: 15_000.0,
            c_store: 20_000.0,
            c_hash_sha256: 4_000.0,
            c_hash_poseidon: 40_000.0,
            c_vk_base: 400_000.0,
            c_vk_elem: 40_000.0,
        };
        let priors = CostPriors {
            c_store: truth.c_store,
            c_hash_sha256: truth.c_hash_sha256,
            c_hash_poseidon: truth.c_hash_poseidon,
        };
        let feat = |v, e, m, w| CallFeatures {
            verifies_proof: v,
            statement_elems: e,
            merkle_calls: m,
            storage_writes: w,
            ..Default::default()
        };
        let run = CalibrationRun {
            register: feat(true, 2, 13, 5),
            cast_vote: feat(true, 43, 0, 3),
            set_tally: feat(true, 42, 0, 1),
            refund: feat(false, 0, 0, 1),
            vk_public_inputs: [2, 43, 42],
        };
        let model = |f: &CallFeatures| {
            CostModel {
                constants: truth,
                priors,
                targets: CalibrationTargets {
                    n: 0,
                    register: 0.0,
                    cast_vote: 0.0,
                    set_tally: 0.0,
                    refund: 0.0,
                    vk_public_key_gen: 0.0,
                    vk_encrypted_vote_gen: 0.0,
                    vk_tallying: 0.0,
                },
            }
            .cost(f) as f64
        };
        let targets = CalibrationTargets {
            n: 40,
            register: model(&run.register),
            cast_vote: model(&run.cast_vote),
            set_tally: model(&run.set_tally),
            refund: model(&run.refund),
            vk_public_key_gen: 400_000.0 + 2.0 * 40_000.0,
            vk_encrypted_vote_gen: 400_000.0 + 43.0 * 40_000.0,
            vk_tallying: 400_000.0 + 42.0 * 40_000.0,
        };
        let got = calibrate(&run, &targets, priors).unwrap();
        for (g, t) in [
            (got.c_tx, truth.c_tx),
            (got.c_verify, truth.c_verify),
            (got.c_elem, truth.c_elem),
            (got.c_vk_base, truth.c_vk_base),
            (got.c_vk_elem, truth.c_vk_elem),
        ] {
            assert!((g - t).abs() < 1e-3, "{g} vs {t}");
        }
    }

    #[test]
    fn bundled_model_parses() {
        let m = CostModel::bundled();
        assert_eq!(m.targets.n, 40);
        assert!(m.constants.c_elem > 0.0);
    }
}
