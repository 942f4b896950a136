//! Closed-form gadget tallies per circuit. The relation interpreters count the
//! same gadgets as they run, and the two are compared in tests.

use serde::{Deserialize, Serialize};

use super::gadgets::{Ctx, GadgetTally};
use super::{CircuitKind, CircuitParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCount {
    pub tally: GadgetTally,
    pub total: u64,
}

impl From<GadgetTally> for ConstraintCount {
    fn from(tally: GadgetTally) -> Self {
        Self {
            total: tally.total(),
            tally,
        }
    }
}

pub fn constraint_count(kind: CircuitKind, params: &CircuitParams) -> ConstraintCount {
    let n = params.n as u64;
    let l = params.l as u64;
    let variant = params.variant;
    let mut ctx = Ctx::new();
    let t = &mut ctx.tally;
    match kind {
        CircuitKind::PublicKeyGen => {
            t.e_scalar_mul = 1;
            t.is_equal = 1;
            t.comp_const = 1;
        }
        CircuitKind::EncryptedVoteGen => {
            t.is_point = n;
            t.comp_const = n;
            t.less_than = n;
            t.greater_than = n;
            t.mux = 2 * n + 1;
            t.e_add = 2 * n + 1;
            t.e_sub = 1;
            t.e_scalar_mul = 1;
            t.is_equal = 1;
            if let Some(backend) = variant.hash_backend() {
                if variant.is_progressive() {
                    for _ in 0..n {
                        ctx.hash_blocks(backend, 2);
                    }
                } else {
                    ctx.hash_blocks(backend, params.n);
                }
            }
        }
        CircuitKind::Tallying => {
            t.is_point = n;
            // running sum plus the 0..=n search
            t.e_add = n + (n + 1);
            t.is_equal = (n + 1) + 1;
            t.e_scalar_mul = 1;
            if variant.tracks_signs() {
                t.comp_const = n;
                t.bits2num = l;
            }
            if let Some(backend) = variant.hash_backend() {
                if variant.is_progressive() {
                    for _ in 0..n {
                        ctx.hash_blocks(backend, 3);
                    }
                } else {
                    ctx.hash_blocks(backend, params.n + params.l);
                }
            }
        }
    }
    ctx.tally.into()
}
