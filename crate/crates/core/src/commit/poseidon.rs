//! Poseidon permutation over F_p with the x^5 S-box, loaded from the
//! checked-in parameter file for widths 2, 3 and 4.
//!
//! The state layout is `[capacity, input_0, .., input_{t-2}]` and the output is
//! the first state element after the permutation, matching the circom
//! reference hasher when the capacity element is 0.

use std::sync::OnceLock;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::FieldElement;

const BUNDLED: &str = include_str!("../../data/poseidon_bn254_x5.json");

#[derive(Debug, Clone)]
pub struct PoseidonInstance {
    pub width: usize,
    pub full_rounds: usize,
    pub partial_rounds: usize,
    pub alpha: u64,
    round_constants: Vec<FieldElement>,
    mds: Vec<Vec<FieldElement>>,
}

#[derive(Debug, Clone)]
pub struct PoseidonParams {
    instances: Vec<PoseidonInstance>,
}

#[derive(Deserialize)]
struct FileRepr {
    instances: Vec<InstanceRepr>,
}

#[derive(Deserialize)]
struct InstanceRepr {
    width: usize,
    full_rounds: usize,
    partial_rounds: usize,
    alpha: u64,
    round_constants: Vec<FieldElement>,
    mds: Vec<Vec<FieldElement>>,
    digest: String,
    self_test: SelfTest,
}

#[derive(Deserialize)]
struct SelfTest {
    inputs: Vec<FieldElement>,
    output: FieldElement,
}

fn constants_digest(rc: &[FieldElement], mds: &[Vec<FieldElement>]) -> String {
    let mut h = Sha256::new();
    for c in rc.iter().chain(mds.iter().flatten()) {
        h.update(c.to_bytes_be());
    }
    let d = h.finalize();
    format!("0x{}", d.iter().map(|b| format!("{b:02x}")).collect::<String>())
}

impl PoseidonParams {
    /// Parses a parameter file, checking the constants digest, the shape of every
    /// instance and its self-test vector.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FileRepr = serde_json::from_str(text)?;
        let mut instances = Vec::new();
        for inst in file.instances {
            let t = inst.width;
            if inst.round_constants.len() != t * (inst.full_rounds + inst.partial_rounds) {
                return Err(Error::Params(format!("width {t}: round constant count")));
            }
            if inst.mds.len() != t || inst.mds.iter().any(|r| r.len() != t) {
                return Err(Error::Params(format!("width {t}: MDS shape")));
            }
            if inst.full_rounds % 2 != 0 {
                return Err(Error::Params(format!("width {t}: odd full rounds")));
            }
            let digest = constants_digest(&inst.round_constants, &inst.mds);
            if digest != inst.digest {
                return Err(Error::Params(format!("width {t}: digest mismatch")));
            }
            let instance = PoseidonInstance {
                width: t,
                full_rounds: inst.full_rounds,
                partial_rounds: inst.partial_rounds,
                alpha: inst.alpha,
                round_constants: inst.round_constants,
                mds: inst.mds,
            };
            if inst.self_test.inputs.len() != t - 1
                || instance.hash(FieldElement::zero(), &inst.self_test.inputs)
                    != inst.self_test.output
            {
                return Err(Error::Params(format!("width {t}: self-test vector failed")));
            }
            instances.push(instance);
        }
        Ok(Self { instances })
    }

    pub fn bundled() -> &'static PoseidonParams {
        static P: OnceLock<PoseidonParams> = OnceLock::new();
        P.get_or_init(|| PoseidonParams::from_json(BUNDLED).expect("bundled Poseidon parameters"))
    }

    pub fn instance(&self, width: usize) -> Option<&PoseidonInstance> {
        self.instances.iter().find(|i| i.width == width)
    }

    /// Hashes 1 to 3 elements with the instance of width `inputs.len() + 1`.
    pub fn hash(&self, capacity: FieldElement, inputs: &[FieldElement]) -> FieldElement {
        let inst = self
            .instance(inputs.len() + 1)
            .unwrap_or_else(|| panic!("no Poseidon instance for {} inputs", inputs.len()));
        inst.hash(capacity, inputs)
    }
}

impl PoseidonInstance {
    pub fn hash(&self, capacity: FieldElement, inputs: &[FieldElement]) -> FieldElement {
        assert_eq!(inputs.len() + 1, self.width);
        let mut state = Vec::with_capacity(self.width);
        state.push(capacity);
        state.extend_from_slice(inputs);
        self.permute(&mut state);
        state[0]
    }

    pub fn permute(&self, state: &mut [FieldElement]) {
        let t = self.width;
        let half = self.full_rounds / 2;
        let total = self.full_rounds + self.partial_rounds;
        for round in 0..total {
            for (i, s) in state.iter_mut().enumerate() {
                *s += self.round_constants[round * t + i];
            }
            if round < half || round >= half + self.partial_rounds {
                for s in state.iter_mut() {
                    *s = self.sbox(*s);
                }
            } else {
                state[0] = self.sbox(state[0]);
            }
            let mixed: Vec<FieldElement> = self
                .mds
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(state.iter())
                        .fold(FieldElement::zero(), |acc, (m, s)| acc + *m * *s)
                })
                .collect();
            state.copy_from_slice(&mixed);
        }
    }

    fn sbox(&self, x: FieldElement) -> FieldElement {
        x.pow_limbs(&[self.alpha, 0, 0, 0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(s: &str) -> FieldElement {
        FieldElement::from_biguint(&s.parse().unwrap())
    }

    #[test]
    fn reference_vectors() {
        let p = PoseidonParams::bundled();
        let one = FieldElement::from_u64(1);
        let two = FieldElement::from_u64(2);
        let three = FieldElement::from_u64(3);
        assert_eq!(
            p.hash(FieldElement::zero(), &[one, two]),
            fe("7853200120776062878684798364095072458815029376092732009249414926327459813530")
        );
        assert_eq!(
            p.hash(FieldElement::zero(), &[one, two, three]),
            fe("6542985608222806190361240322586112750744169038454362455181422643027100751666")
        );
    }

    #[test]
    fn round_counts() {
        let p = PoseidonParams::bundled();
        assert_eq!(p.instance(3).unwrap().partial_rounds, 57);
        assert_eq!(p.instance(4).unwrap().partial_rounds, 56);
        assert_eq!(p.instance(3).unwrap().full_rounds, 8);
    }

    #[test]
    fn tampered_file_is_rejected() {
        let tampered = BUNDLED.replacen("0x0", "0x1", 1);
        assert!(PoseidonParams::from_json(&tampered).is_err());
    }
}
