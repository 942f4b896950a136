use num_bigint::BigUint;
use rand::Rng;
use serde_json::Value;

use zkovn::circuits::witness::{public_key_instance, tally_instance, vote_instance};
use zkovn::circuits::{
    constraint_count, pack_sign_bits, Circuit, CircuitKind, CircuitParams, Coords, Statement,
    Variant, Witness,
};
use zkovn::ovn::VoterKeypair;
use zkovn::rng::derive_rng;
use zkovn::{FieldElement, Point};

struct Election {
    params: CircuitParams,
    keys: Vec<VoterKeypair>,
    pks: Vec<Point>,
}

fn election(n: usize, variant: Variant, seed: &[u8]) -> Election {
    let mut rng = derive_rng(seed, "circuit-tests");
    let keys: Vec<VoterKeypair> = (0..n).map(|_| VoterKeypair::random(&mut rng)).collect();
    let pks = keys.iter().map(|k| k.public).collect();
    Election {
        params: CircuitParams::new(n, variant).unwrap(),
        keys,
        pks,
    }
}

fn cast_all(e: &Election, votes: &[u64]) -> Vec<(Point, Statement, Witness)> {
    (0..e.params.n)
        .map(|i| {
            let (enc, s, w) = vote_instance(&e.params, i, votes[i], &e.keys[i], &e.pks).unwrap();
            (enc.0, s, w)
        })
        .collect()
}

fn circuit(kind: CircuitKind, e: &Election) -> Circuit {
    Circuit::new(kind, e.params)
}

#[test]
fn completeness_small_elections() {
    for variant in Variant::ALL {
        for n in 1..=12 {
            let e = election(n, variant, format!("complete-{n}").as_bytes());
            let pk_c = circuit(CircuitKind::PublicKeyGen, &e);
            for kp in &e.keys {
                let (s, w) = public_key_instance(&e.params, kp).unwrap();
                assert!(pk_c.check(&s, &w).unwrap());
                assert_eq!(s.size(), 2);
            }
            let vote_c = circuit(CircuitKind::EncryptedVoteGen, &e);
            for i in 0..n {
                for v in [0, 1] {
                    let (_, s, w) = vote_instance(&e.params, i, v, &e.keys[i], &e.pks).unwrap();
                    assert!(vote_c.check(&s, &w).unwrap(), "{variant} n={n} i={i} v={v}");
                }
            }
            let votes: Vec<u64> = (0..n).map(|i| (i % 3 == 0) as u64).collect();
            let cast = cast_all(&e, &votes);
            let points: Vec<Point> = cast.iter().map(|c| c.0).collect();
            let (s, w) = tally_instance(&e.params, &points).unwrap();
            assert!(circuit(CircuitKind::Tallying, &e).check(&s, &w).unwrap());
            let expected: u64 = votes.iter().sum();
            let res = match &s {
                Statement::Tally(t) => t.res,
                Statement::CommittedTally(t) => t.res,
                _ => unreachable!(),
            };
            assert_eq!(res, expected);
        }
    }
}

#[test]
fn statement_sizes() {
    for n in [1usize, 5, 253, 254, 300] {
        let l = n.div_ceil(253);
        let e = election(n, Variant::Original, b"sizes");
        let (_, s, _) = vote_instance(&e.params, 0, 1, &e.keys[0], &e.pks).unwrap();
        assert_eq!(s.size(), n + 3);
        if n <= 5 {
            let votes = vec![1; n];
            let pts: Vec<Point> = cast_all(&e, &votes).into_iter().map(|c| c.0).collect();
            let (s, _) = tally_instance(&e.params, &pts).unwrap();
            assert_eq!(s.size(), n + l + 1);
        }
        for variant in [Variant::CommittedSha256, Variant::ProgressivePoseidon] {
            let e = Election {
                params: CircuitParams::new(n, variant).unwrap(),
                keys: e.keys.clone(),
                pks: e.pks.clone(),
            };
            let (_, s, _) = vote_instance(&e.params, n - 1, 0, &e.keys[n - 1], &e.pks).unwrap();
            assert_eq!(s.size(), 4);
        }
    }
    for variant in [Variant::CommittedSha256, Variant::ProgressiveSha256] {
        let e = election(3, variant, b"sizes-tally");
        let pts: Vec<Point> = cast_all(&e, &[1, 0, 1]).into_iter().map(|c| c.0).collect();
        let (s, _) = tally_instance(&e.params, &pts).unwrap();
        assert_eq!(s.size(), 2);
    }
}

/// Independent oracle: D_j = Σ_{i in limb j} S_i·2^(i mod κ) computed with big integers.
fn pack_oracle(signs: &[bool], l: usize) -> Vec<BigUint> {
    let mut limbs = vec![BigUint::from(0u8); l];
    for (i, s) in signs.iter().enumerate() {
        if *s {
            limbs[i / 253] += BigUint::from(1u8) << (i % 253);
        }
    }
    limbs
}

#[test]
fn sign_packing_matches_bigint_oracle() {
    let mut rng = derive_rng(b"pack", "signs");
    for n in [1usize, 2, 252, 253, 254, 255, 505, 506, 507, 600] {
        let l = n.div_ceil(253);
        for _ in 0..4 {
            let signs: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let got: Vec<BigUint> = pack_sign_bits(&signs, l).iter().map(|f| f.to_biguint()).collect();
            assert_eq!(got, pack_oracle(&signs, l), "n={n}");
        }
        let all = vec![true; n];
        let got: Vec<BigUint> = pack_sign_bits(&all, l).iter().map(|f| f.to_biguint()).collect();
        assert_eq!(got, pack_oracle(&all, l));
    }
}

#[test]
fn interpreter_counts_match_closed_form() {
    for variant in Variant::ALL {
        for n in [1usize, 2, 5, 9] {
            let e = election(n, variant, b"counts");
            let (s, w) = public_key_instance(&e.params, &e.keys[0]).unwrap();
            let (ok, t) = circuit(CircuitKind::PublicKeyGen, &e).check_counted(&s, &w).unwrap();
            assert!(ok);
            assert_eq!(t, constraint_count(CircuitKind::PublicKeyGen, &e.params).tally);

            let votes: Vec<u64> = (0..n as u64).map(|i| i % 2).collect();
            let cast = cast_all(&e, &votes);
            let (ok, t) = circuit(CircuitKind::EncryptedVoteGen, &e)
                .check_counted(&cast[n / 2].1, &cast[n / 2].2)
                .unwrap();
            assert!(ok);
            assert_eq!(t, constraint_count(CircuitKind::EncryptedVoteGen, &e.params).tally, "{variant} n={n}");

            let pts: Vec<Point> = cast.iter().map(|c| c.0).collect();
            let (s, w) = tally_instance(&e.params, &pts).unwrap();
            let (ok, t) = circuit(CircuitKind::Tallying, &e).check_counted(&s, &w).unwrap();
            assert!(ok);
            assert_eq!(t, constraint_count(CircuitKind::Tallying, &e.params).tally, "{variant} n={n}");
        }
    }
}

fn with_vote(stmt: &Statement, f: impl Fn(&mut Coords)) -> Statement {
    let mut s = stmt.clone();
    match &mut s {
        Statement::Vote(v) => f(&mut v.vote),
        Statement::CommittedVote(v) => f(&mut v.vote),
        _ => panic!("not a vote statement"),
    }
    s
}

#[test]
fn vote_relation_rejects_bad_instances() {
    for variant in Variant::ALL {
        let e = election(4, variant, b"bad-vote");
        let c = circuit(CircuitKind::EncryptedVoteGen, &e);
        let (_, s, w) = vote_instance(&e.params, 2, 1, &e.keys[2], &e.pks).unwrap();

        // v = 2 with a V that is consistent with it
        let y = zkovn::ovn::blinding_key(2, &e.pks).unwrap();
        let v2 = y.mul(&e.keys[2].secret) + Point::generator().mul_u64(2);
        let s2 = with_vote(&s, |c| *c = v2.into());
        let mut w2 = w.clone();
        match &mut w2 {
            Witness::Vote(w) => w.v = FieldElement::from_u64(2),
            Witness::CommittedVote(w) => w.v = FieldElement::from_u64(2),
            _ => unreachable!(),
        }
        assert!(!c.check(&s2, &w2).unwrap(), "{variant}: v=2");

        // V + G
        let shifted = with_vote(&s, |c| *c = (c.to_point().unwrap() + Point::generator()).into());
        assert!(!c.check(&shifted, &w).unwrap(), "{variant}: V+G");

        // wrong index
        let mut wrong_i = s.clone();
        match &mut wrong_i {
            Statement::Vote(v) => v.index = 1,
            Statement::CommittedVote(v) => v.index = 1,
            _ => unreachable!(),
        }
        assert!(!c.check(&wrong_i, &w).unwrap(), "{variant}: index");

        // a statement from another circuit is not in the relation
        let (pk_s, pk_w) = public_key_instance(&e.params, &e.keys[0]).unwrap();
        assert!(!c.check(&pk_s, &pk_w).unwrap());
    }
}

#[test]
fn committed_vote_rejects_permuted_key_list() {
    for variant in [Variant::CommittedSha256, Variant::ProgressiveSha256, Variant::ProgressivePoseidon] {
        let e = election(4, variant, b"permute");
        let c = circuit(CircuitKind::EncryptedVoteGen, &e);
        // voter 1 encrypts against a swapped key list and keeps the honest commitment
        let mut swapped = e.pks.clone();
        swapped.swap(0, 3);
        let (_, honest_s, _) = vote_instance(&e.params, 1, 1, &e.keys[1], &e.pks).unwrap();
        let (_, s, w) = vote_instance(&e.params, 1, 1, &e.keys[1], &swapped).unwrap();
        let Statement::CommittedVote(mut s) = s else { unreachable!() };
        let Statement::CommittedVote(h) = honest_s else { unreachable!() };
        s.commit_pk = h.commit_pk;
        assert!(!c.check(&Statement::CommittedVote(s), &w).unwrap(), "{variant}");
    }
}

#[test]
fn tally_relation_rejects_bad_instances() {
    for variant in Variant::ALL {
        let e = election(5, variant, b"bad-tally");
        let c = circuit(CircuitKind::Tallying, &e);
        let pts: Vec<Point> = cast_all(&e, &[1, 1, 0, 1, 0]).into_iter().map(|c| c.0).collect();
        let (s, w) = tally_instance(&e.params, &pts).unwrap();
        for delta in [-1i64, 1] {
            let mut bad = s.clone();
            match &mut bad {
                Statement::Tally(t) => t.res = (t.res as i64 + delta) as u64,
                Statement::CommittedTally(t) => t.res = (t.res as i64 + delta) as u64,
                _ => unreachable!(),
            }
            assert!(!c.check(&bad, &w).unwrap(), "{variant}: res{delta:+}");
        }
        match (&s, &w) {
            (Statement::Tally(t), _) => {
                // flip one bit of D
                for bit in [0usize, 3] {
                    let mut bad = t.clone();
                    let mut bits = bad.limbs[0].to_biguint();
                    bits ^= BigUint::from(1u8) << bit;
                    bad.limbs[0] = FieldElement::from_biguint(&bits);
                    assert!(!c.check(&Statement::Tally(bad), &w).unwrap());
                }
            }
            (Statement::CommittedTally(_), Witness::CommittedTally(cw)) => {
                // negate one V_x: still a curve point, different commitment input
                let mut bad = cw.clone();
                bad.v_x[2] = -bad.v_x[2];
                assert!(!c.check(&s, &Witness::CommittedTally(bad)).unwrap(), "{variant}: -V_x");
                // permute the vote list
                let mut bad = cw.clone();
                bad.v_x.swap(0, 2);
                bad.v_y.swap(0, 2);
                if bad != *cw {
                    assert!(!c.check(&s, &Witness::CommittedTally(bad)).unwrap(), "{variant}: permuted");
                }
            }
            _ => unreachable!(),
        }
    }
}

#[test]
fn missing_vote_makes_tally_unprovable() {
    let e = election(4, Variant::Original, b"missing");
    let mut pts: Vec<Point> = cast_all(&e, &[1, 0, 1, 1]).into_iter().map(|c| c.0).collect();
    pts[1] = Point::identity();
    assert!(tally_instance(&e.params, &pts).is_err());
}

/// Adds one to a random numeric or hex leaf of a JSON value. Returns false when
/// the value has no such leaf.
fn perturb(v: &mut Value, rng: &mut impl Rng) -> bool {
    let mut leaves = Vec::new();
    collect_leaves(v, String::new(), &mut leaves);
    if leaves.is_empty() {
        return false;
    }
    let leaf = v.pointer_mut(&leaves[rng.gen_range(0..leaves.len())]).unwrap();
    match leaf {
        Value::Number(n) => *leaf = Value::from(n.as_u64().unwrap() + 1),
        Value::String(s) => {
            let x = BigUint::parse_bytes(s.trim_start_matches("0x").as_bytes(), 16).unwrap();
            *leaf = Value::String(format!("0x{:x}", x + 1u8));
        }
        _ => unreachable!(),
    }
    true
}

/// JSON pointers of every numeric or hex leaf.
fn collect_leaves(v: &Value, path: String, out: &mut Vec<String>) {
    match v {
        Value::Number(_) => out.push(path),
        Value::String(s) if s.starts_with("0x") => out.push(path),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, x)| collect_leaves(x, format!("{path}/{i}"), out)),
        Value::Object(o) => o.iter().for_each(|(k, x)| collect_leaves(x, format!("{path}/{k}"), out)),
        _ => {}
    }
}

/// Every single-element perturbation of an honest statement or witness is rejected,
/// except for witness slots the relation provably ignores.
#[test]
fn mutation_soundness() {
    let mut rng = derive_rng(b"mutation", "soundness");
    let mut trials = 0;
    let mut rejected = 0;
    while trials < 240 {
        let variant = Variant::ALL[rng.gen_range(0..4)];
        let n = rng.gen_range(1..=6);
        let seed: [u8; 8] = rng.gen();
        let e = election(n, variant, &seed);
        let kind = [CircuitKind::PublicKeyGen, CircuitKind::EncryptedVoteGen, CircuitKind::Tallying]
            [rng.gen_range(0..3)];
        let votes: Vec<u64> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let (s, w) = match kind {
            CircuitKind::PublicKeyGen => public_key_instance(&e.params, &e.keys[0]).unwrap(),
            CircuitKind::EncryptedVoteGen => {
                let i = rng.gen_range(0..n);
                let (_, s, w) = vote_instance(&e.params, i, votes[i], &e.keys[i], &e.pks).unwrap();
                (s, w)
            }
            CircuitKind::Tallying => {
                let pts: Vec<Point> = cast_all(&e, &votes).into_iter().map(|c| c.0).collect();
                tally_instance(&e.params, &pts).unwrap()
            }
        };
        let c = circuit(kind, &e);
        // with one voter Y = O, so x does not enter V and any x is a valid witness
        let mutate_statement = rng.gen_bool(0.5) || (n == 1 && kind == CircuitKind::EncryptedVoteGen);
        let mut sv = serde_json::to_value(&s).unwrap();
        let mut wv = serde_json::to_value(&w).unwrap();
        let target = if mutate_statement { &mut sv } else { &mut wv };
        if !perturb(target, &mut rng) {
            continue;
        }
        trials += 1;
        let parsed: Result<(Statement, Witness), _> =
            serde_json::from_value(sv).and_then(|s| serde_json::from_value(wv).map(|w| (s, w)));
        let accepted = match parsed {
            Ok((s2, w2)) => matches!(c.check(&s2, &w2), Ok(true)),
            Err(_) => false,
        };
        if !accepted {
            rejected += 1;
        } else {
            panic!("mutated {kind:?} {variant} n={n} accepted");
        }
    }
    assert_eq!(rejected, trials);
}
