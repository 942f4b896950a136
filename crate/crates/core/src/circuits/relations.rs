use super::gadgets::{field_bits, scalar_bits, Coords, Ctx, KAPPA};
use super::{
    commit_pk_for, commit_v_for, CircuitParams, CommittedTallyStatement, CommittedTallyWitness,
    CommittedVoteStatement, CommittedVoteWitness, PkStatement, PkWitness, TallyStatement,
    TallyWitness, VoteStatement, VoteWitness,
};
use crate::commit::HashBackend;
use crate::error::{Error, Result};
use crate::field::{FieldElement, Scalar};

fn expect_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            actual,
        })
    }
}

/// publicKeyGen: PK = x·G and sign(PK.x) = 0.
pub fn relation_public_key_gen(stmt: &PkStatement, wit: &PkWitness) -> bool {
    public_key_gen(&mut Ctx::new(), stmt, wit).unwrap_or(false)
}

pub(crate) fn public_key_gen(ctx: &mut Ctx, stmt: &PkStatement, wit: &PkWitness) -> Result<bool> {
    let pk = ctx.e_scalar_mul(&scalar_bits(&wit.x), &Coords::generator())?;
    let matches = ctx.is_equal(&pk, &stmt.pk);
    let sign = ctx.sign(pk.x);
    Ok(matches && sign.is_zero())
}

/// encryptedVoteGen over the full list of public-key y-coordinates.
pub fn relation_encrypted_vote_gen(
    params: &CircuitParams,
    stmt: &VoteStatement,
    wit: &VoteWitness,
) -> Result<bool> {
    encrypted_vote_gen(&mut Ctx::new(), params, stmt, wit)
}

pub(crate) fn encrypted_vote_gen(
    ctx: &mut Ctx,
    params: &CircuitParams,
    stmt: &VoteStatement,
    wit: &VoteWitness,
) -> Result<bool> {
    expect_len("pk_y", params.n, stmt.pk_y.len())?;
    expect_len("pk_x", params.n, wit.pk_x.len())?;
    vote_core(
        ctx,
        params.n,
        &stmt.vote,
        stmt.index,
        wit.v,
        &wit.x,
        &wit.pk_x,
        &stmt.pk_y,
    )
}

#[allow(clippy::too_many_arguments)]
fn vote_core(
    ctx: &mut Ctx,
    n: usize,
    vote: &Coords,
    index: u64,
    v: FieldElement,
    x: &Scalar,
    pk_x: &[FieldElement],
    pk_y: &[FieldElement],
) -> Result<bool> {
    // (1 − v)·v = 0
    if !((FieldElement::one() - v) * v).is_zero() {
        return Ok(false);
    }
    let i_b = FieldElement::from_u64(index);
    let mut y_less = Coords::identity();
    let mut y_greater = Coords::identity();
    for i in 0..n {
        if !ctx.is_point(pk_x[i], pk_y[i]) {
            return Ok(false);
        }
        if !ctx.sign(pk_x[i]).is_zero() {
            return Ok(false);
        }
        let pk = Coords {
            x: pk_x[i],
            y: pk_y[i],
        };
        let i_fe = FieldElement::from_u64(i as u64);
        let e_l = ctx.less_than(i_fe, i_b);
        let t_l = ctx.mux(e_l, Coords::identity(), pk)?;
        y_less = ctx.e_add(&y_less, &t_l)?;
        let e_g = ctx.greater_than(i_fe, i_b);
        let t_g = ctx.mux(e_g, Coords::identity(), pk)?;
        y_greater = ctx.e_add(&y_greater, &t_g)?;
    }
    let y_b = ctx.e_sub(&y_less, &y_greater)?;
    let t0 = ctx.e_scalar_mul(&scalar_bits(x), &y_b)?;
    let t1 = ctx.mux(v, Coords::identity(), Coords::generator())?;
    let v_b = ctx.e_add(&t0, &t1)?;
    Ok(ctx.is_equal(&v_b, vote))
}

/// encryptedVoteGen with the key list moved into the witness and bound by commit_PK.
pub fn relation_encrypted_vote_gen_committed(
    params: &CircuitParams,
    stmt: &CommittedVoteStatement,
    wit: &CommittedVoteWitness,
) -> Result<bool> {
    encrypted_vote_gen_committed(&mut Ctx::new(), params, stmt, wit)
}

pub(crate) fn encrypted_vote_gen_committed(
    ctx: &mut Ctx,
    params: &CircuitParams,
    stmt: &CommittedVoteStatement,
    wit: &CommittedVoteWitness,
) -> Result<bool> {
    let variant = params.variant;
    let Some(backend) = variant.hash_backend() else {
        return Err(Error::UnsupportedVariant {
            circuit: "encryptedVoteGen (committed)",
            variant: variant.to_string(),
        });
    };
    expect_len("pk_x", params.n, wit.pk_x.len())?;
    expect_len("pk_y", params.n, wit.pk_y.len())?;
    if !vote_core(
        ctx,
        params.n,
        &stmt.vote,
        stmt.index,
        wit.v,
        &wit.x,
        &wit.pk_x,
        &wit.pk_y,
    )? {
        return Ok(false);
    }
    charge_pk_commitment(ctx, variant.is_progressive(), backend, params.n);
    Ok(commit_pk_for(variant, &wit.pk_y)? == stmt.commit_pk)
}

fn charge_pk_commitment(ctx: &mut Ctx, progressive: bool, backend: HashBackend, n: usize) {
    if progressive {
        for _ in 0..n {
            ctx.hash_blocks(backend, 2);
        }
    } else {
        ctx.hash_blocks(backend, n);
    }
}

/// Tallying over the y-coordinates and packed sign limbs of all encrypted votes.
pub fn relation_tallying(
    params: &CircuitParams,
    stmt: &TallyStatement,
    wit: &TallyWitness,
) -> Result<bool> {
    tallying(&mut Ctx::new(), params, stmt, wit)
}

pub(crate) fn tallying(
    ctx: &mut Ctx,
    params: &CircuitParams,
    stmt: &TallyStatement,
    wit: &TallyWitness,
) -> Result<bool> {
    expect_len("V_y", params.n, stmt.v_y.len())?;
    expect_len("V_x", params.n, wit.v_x.len())?;
    expect_len("D limbs", params.l, stmt.limbs.len())?;
    let Some((sum, signs)) = sum_votes(ctx, &wit.v_x, &stmt.v_y, true)? else {
        return Ok(false);
    };
    let limbs = pack_limbs(ctx, &signs, params.l)?;
    if limbs != stmt.limbs {
        return Ok(false);
    }
    Ok(exhaustive_search(ctx, &sum, params.n)? == Some(stmt.res))
}

/// Tallying with the vote lists in the witness, bound by commit_V.
pub fn relation_tallying_committed(
    params: &CircuitParams,
    stmt: &CommittedTallyStatement,
    wit: &CommittedTallyWitness,
) -> Result<bool> {
    tallying_committed(&mut Ctx::new(), params, stmt, wit)
}

pub(crate) fn tallying_committed(
    ctx: &mut Ctx,
    params: &CircuitParams,
    stmt: &CommittedTallyStatement,
    wit: &CommittedTallyWitness,
) -> Result<bool> {
    let variant = params.variant;
    let Some(backend) = variant.hash_backend() else {
        return Err(Error::UnsupportedVariant {
            circuit: "tallying (committed)",
            variant: variant.to_string(),
        });
    };
    expect_len("V_x", params.n, wit.v_x.len())?;
    expect_len("V_y", params.n, wit.v_y.len())?;
    let track_signs = variant.tracks_signs();
    let Some((sum, signs)) = sum_votes(ctx, &wit.v_x, &wit.v_y, track_signs)? else {
        return Ok(false);
    };
    let limbs = if track_signs {
        pack_limbs(ctx, &signs, params.l)?
    } else {
        Vec::new()
    };
    if variant.is_progressive() {
        for _ in 0..params.n {
            ctx.hash_blocks(backend, 3);
        }
    } else {
        ctx.hash_blocks(backend, params.n + params.l);
    }
    if commit_v_for(variant, &wit.v_x, &wit.v_y, &limbs)? != stmt.commit_v {
        return Ok(false);
    }
    Ok(exhaustive_search(ctx, &sum, params.n)? == Some(stmt.res))
}

/// Σ V_i with IsPoint on every pair, plus the sign bit S_i of every V_i.x.
fn sum_votes(
    ctx: &mut Ctx,
    v_x: &[FieldElement],
    v_y: &[FieldElement],
    with_signs: bool,
) -> Result<Option<(Coords, Vec<FieldElement>)>> {
    let mut sum = Coords::identity();
    let mut signs = Vec::with_capacity(v_x.len());
    for (x, y) in v_x.iter().zip(v_y) {
        if !ctx.is_point(*x, *y) {
            return Ok(None);
        }
        sum = ctx.e_add(&sum, &Coords { x: *x, y: *y })?;
        if with_signs {
            signs.push(ctx.sign(*x));
        }
    }
    Ok(Some((sum, signs)))
}

/// D_j = Bits2Num(S_{κj}, …, S_{κj+κ−1}) with S zero-padded to κ·l bits.
fn pack_limbs(ctx: &mut Ctx, signs: &[FieldElement], l: usize) -> Result<Vec<FieldElement>> {
    let mut padded = vec![FieldElement::zero(); KAPPA * l];
    padded[..signs.len()].copy_from_slice(signs);
    padded
        .chunks_exact(KAPPA)
        .map(|chunk| ctx.bits2num(chunk))
        .collect()
}

/// Scans T = 0·G, 1·G, …, n·G accumulating t += IsEqual(T, sum)·i, then asserts t·G = sum.
fn exhaustive_search(ctx: &mut Ctx, sum: &Coords, n: usize) -> Result<Option<u64>> {
    let mut t = FieldElement::zero();
    let mut acc = Coords::identity();
    let g = Coords::generator();
    for i in 0..=n {
        if ctx.is_equal(&acc, sum) {
            t += FieldElement::from_u64(i as u64);
        }
        acc = ctx.e_add(&acc, &g)?;
    }
    let check = ctx.e_scalar_mul(&field_bits(&t), &g)?;
    if !ctx.is_equal(&check, sum) {
        return Ok(None);
    }
    let limbs = t.to_canonical_limbs();
    Ok((limbs[1..] == [0, 0, 0]).then_some(limbs[0]))
}
