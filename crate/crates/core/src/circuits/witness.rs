//! Honest-party instance builders. Each returns a (statement, witness) pair
//! and checks it against its relation before handing it out.

use super::{
    commit_pk_for, commit_v_for, pack_sign_bits, Circuit, CircuitKind, CircuitParams,
    CommittedTallyStatement, CommittedTallyWitness, CommittedVoteStatement, CommittedVoteWitness,
    Coords, PkStatement, PkWitness, Statement, TallyStatement, TallyWitness, VoteStatement,
    VoteWitness, Witness,
};
use crate::curve::{sign_of, Point};
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::ovn::{self, EncryptedVote, VoterKeypair};

fn checked(circuit: Circuit, stmt: Statement, wit: Witness) -> Result<(Statement, Witness)> {
    if circuit.check(&stmt, &wit)? {
        Ok((stmt, wit))
    } else {
        Err(Error::RelationUnsatisfied(circuit.kind.name()))
    }
}

pub fn public_key_instance(params: &CircuitParams, kp: &VoterKeypair) -> Result<(Statement, Witness)> {
    checked(
        Circuit::new(CircuitKind::PublicKeyGen, *params),
        Statement::PublicKey(PkStatement {
            pk: kp.public.into(),
        }),
        Witness::PublicKey(PkWitness { x: kp.secret }),
    )
}

/// Encrypts `vote` for voter `index` against the registered keys and builds
/// the encryptedVoteGen instance for the variant.
pub fn vote_instance(
    params: &CircuitParams,
    index: usize,
    vote: u64,
    kp: &VoterKeypair,
    pks: &[Point],
) -> Result<(EncryptedVote, Statement, Witness)> {
    if pks.len() != params.n {
        return Err(Error::LengthMismatch {
            what: "public keys",
            expected: params.n,
            actual: pks.len(),
        });
    }
    let blinding = ovn::blinding_key(index, pks)?;
    let enc = ovn::encrypt_vote(vote, &kp.secret, &blinding)?;
    let pk_x: Vec<FieldElement> = pks.iter().map(|p| p.x()).collect();
    let pk_y: Vec<FieldElement> = pks.iter().map(|p| p.y()).collect();
    let v = FieldElement::from_u64(vote);
    let (stmt, wit) = if params.variant.is_committed() {
        (
            Statement::CommittedVote(CommittedVoteStatement {
                vote: enc.0.into(),
                commit_pk: commit_pk_for(params.variant, &pk_y)?,
                index: index as u64,
            }),
            Witness::CommittedVote(CommittedVoteWitness {
                v,
                x: kp.secret,
                pk_x,
                pk_y,
            }),
        )
    } else {
        (
            Statement::Vote(VoteStatement {
                vote: enc.0.into(),
                index: index as u64,
                pk_y,
            }),
            Witness::Vote(VoteWitness {
                v,
                x: kp.secret,
                pk_x,
            }),
        )
    };
    let (stmt, wit) = checked(Circuit::new(CircuitKind::EncryptedVoteGen, *params), stmt, wit)?;
    Ok((enc, stmt, wit))
}

/// Builds the tallying instance over all encrypted votes. For progressive
/// variants `votes` must be in commitment (cast) order; otherwise in index order.
pub fn tally_instance(params: &CircuitParams, votes: &[Point]) -> Result<(Statement, Witness)> {
    let encrypted: Vec<EncryptedVote> = votes.iter().copied().map(EncryptedVote).collect();
    let res = ovn::tally(&encrypted, params.n)?.res as u64;
    let v_x: Vec<FieldElement> = votes.iter().map(|v| v.x()).collect();
    let v_y: Vec<FieldElement> = votes.iter().map(|v| v.y()).collect();
    let signs: Vec<bool> = v_x.iter().map(sign_of).collect();
    let limbs = pack_sign_bits(&signs, params.l);
    let (stmt, wit) = if params.variant.is_committed() {
        let limbs = if params.variant.tracks_signs() {
            limbs
        } else {
            Vec::new()
        };
        (
            Statement::CommittedTally(CommittedTallyStatement {
                res,
                commit_v: commit_v_for(params.variant, &v_x, &v_y, &limbs)?,
            }),
            Witness::CommittedTally(CommittedTallyWitness { v_x, v_y }),
        )
    } else {
        (
            Statement::Tally(TallyStatement { res, limbs, v_y }),
            Witness::Tally(TallyWitness { v_x }),
        )
    };
    checked(Circuit::new(CircuitKind::Tallying, *params), stmt, wit)
}

/// Coordinates of a statement's vote point, when it has one.
pub fn statement_vote(stmt: &Statement) -> Option<Coords> {
    match stmt {
        Statement::Vote(s) => Some(s.vote),
        Statement::CommittedVote(s) => Some(s.vote),
        _ => None,
    }
}
