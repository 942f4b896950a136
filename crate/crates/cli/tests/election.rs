use std::fs;
use std::process::Command;

use zkovn::circuits::Variant;
use zkovn::ledger::transcript::{read_jsonl, replay};
use zkovn::ledger::CostModel;
use zkovn::proofsys::DevBackend;
use zkovn_cli::{recalibrate, run_attack, run_election, scaling_sweep, RunConfig, Scenario, VoteSpec};

#[test]
fn honest_election_matrix() {
    for variant in Variant::ALL {
        for n in [1usize, 2, 5, 17] {
            for f in [0.0, 0.5, 1.0] {
                let cfg = RunConfig::new(n, variant, VoteSpec::YesFraction(f)).with_seed(b"matrix");
                let r = run_election(cfg).unwrap();
                assert!(r.ok(), "{variant} n={n} f={f}: {:?}", r.unexpected);
                assert_eq!(r.tally, Some((f * n as f64).round() as u64));
                assert!(r.rejections.is_empty());
                assert!(r.conserved());
                assert_eq!(r.refunds_paid, 1000 * (n as u64 + 1));
            }
        }
    }
}

#[test]
fn explicit_votes_are_tallied() {
    let votes = vec![1, 0, 0, 1, 1, 0, 1];
    let cfg = RunConfig::new(7, Variant::ProgressivePoseidon, VoteSpec::Explicit(votes)).with_seed(b"explicit");
    let r = run_election(cfg).unwrap();
    assert_eq!((r.tally, r.expected), (Some(4), 4));
}

#[test]
fn every_scenario_is_rejected_with_its_code() {
    let codes = [
        (Scenario::BadTally, "invalid-proof"),
        (Scenario::NonMemberRegister, "not-eligible"),
        (Scenario::WrongIndexCast, "wrong-sender"),
        (Scenario::ForgedProof, "invalid-proof"),
        (Scenario::DuplicateRegister, "duplicate-registration"),
        (Scenario::AbortMissingVote, "votes-missing"),
    ];
    for variant in Variant::ALL {
        for (scenario, code) in codes {
            let cfg = RunConfig::new(4, variant, VoteSpec::YesFraction(0.5)).with_seed(b"attack");
            let r = run_attack(scenario, cfg).unwrap();
            assert!(r.ok(), "{variant} {scenario}: {:?}", r.unexpected);
            assert!(r.rejections.iter().any(|x| x.code == code), "{variant} {scenario}");
            assert!(r.conserved());
            match scenario {
                Scenario::BadTally => assert_eq!(r.tally, None),
                Scenario::AbortMissingVote => {
                    assert!(r.void);
                    assert_eq!(r.forfeited.len(), 1);
                }
                _ => assert_eq!(r.tally, Some(r.expected)),
            }
        }
    }
}

#[test]
fn seeded_runs_are_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let mut cfg = RunConfig::new(6, Variant::CommittedSha256, VoteSpec::YesFraction(0.5)).with_seed(b"determinism");
        cfg.out = Some(out.clone());
        assert!(run_election(cfg).unwrap().ok());
        paths.push(out);
    }
    for file in ["transcript.jsonl", "cost.csv", "tree.json"] {
        assert_eq!(
            fs::read(paths[0].join(file)).unwrap(),
            fs::read(paths[1].join(file)).unwrap(),
            "{file}"
        );
    }
    let records = read_jsonl(std::io::BufReader::new(fs::File::open(paths[0].join("transcript.jsonl")).unwrap())).unwrap();
    let c = replay(&records, DevBackend, CostModel::bundled()).unwrap();
    assert_eq!(c.state().tally, Some(3));
    assert_eq!(c.transcript(), records.as_slice());
}

#[test]
fn sweep_has_one_row_per_function_and_circuit() {
    let ns = [3usize, 8];
    let (costs, circuits) = scaling_sweep(&ns, &Variant::ALL, None, &CostModel::bundled(), b"sweep").unwrap();
    // deploy, three verifying keys, register, cast, tally, refund
    assert_eq!(costs.len(), ns.len() * Variant::ALL.len() * 8);
    assert_eq!(circuits.len(), ns.len() * Variant::ALL.len() * 3);
    for r in &circuits {
        let committed = r.variant != "original";
        let want = match (r.circuit.as_str(), committed) {
            ("publicKeyGen", _) => 2,
            ("encryptedVoteGen", false) => r.n + 3,
            ("encryptedVoteGen", true) => 4,
            ("tallying", false) => r.n + 2,
            ("tallying", true) => 2,
            other => panic!("unexpected circuit {other:?}"),
        };
        assert_eq!(r.statement_elems, want, "{r:?}");
        assert!(r.gadget_total > 0);
    }
}

#[test]
fn bundled_cost_model_is_a_fixed_point_of_calibration() {
    let bundled = CostModel::bundled();
    let refit = recalibrate(&bundled).unwrap();
    let a = serde_json::to_value(bundled.constants).unwrap();
    let b = serde_json::to_value(refit.constants).unwrap();
    for (k, x) in a.as_object().unwrap() {
        let (x, y) = (x.as_f64().unwrap(), b[k].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{k}: bundled {x}, refit {y}");
    }
}

fn zkovn(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_zkovn")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn binary_exit_codes() {
    let (code, stdout) = zkovn(&["--n", "3", "--variant", "progressive", "--hash", "poseidon", "--seed", "bin"]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["variant"], "progressive-poseidon");
    let (code, _) = zkovn(&["--n", "3", "--scenario", "bad-tally", "--seed", "bin"]);
    assert_eq!(code, 0);
    assert_eq!(zkovn(&["--n", "3", "--variant", "committed", "--hash", "poseidon"]).0, 3);
    assert_eq!(zkovn(&["--n", "3", "--votes", "1,1"]).0, 3);
    assert_eq!(zkovn(&["--n", "0"]).0, 3);
    assert_eq!(zkovn(&["--n", "1", "--scenario", "wrong-index-cast"]).0, 3);
    assert_eq!(zkovn(&["--n", "2", "--cost-config", "/nonexistent/model.json"]).0, 3);
}
