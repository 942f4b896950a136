//! Eligibility tree over voter addresses.
//!
//! Leaves are SHA-256(0x00 ‖ address) and internal nodes SHA-256(0x01 ‖ left ‖ right).
//! The leaf level is padded to a power of two with the all-zero digest.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};

pub type Digest = [u8; 32];

pub const ZERO_LEAF: Digest = [0u8; 32];

/// SHA-256 compression calls for one leaf digest (21 bytes) and one node digest (65 bytes).
pub const LEAF_HASH_BLOCKS: u64 = 1;
pub const NODE_HASH_BLOCKS: u64 = 2;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut a = [0u8; 20];
        rng.fill_bytes(&mut a);
        Address(a)
    }

    pub fn to_hex(&self) -> String {
        hex_encode(&self.0)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Address {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bytes = hex_decode(s)?;
        let arr: [u8; 20] = bytes
            .try_into()
            .map_err(|_| Error::Parse(format!("address must be 20 bytes: {s:?}")))?;
        Ok(Address(arr))
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub fn hex_encode(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(2 + bytes.len() * 2);
    s.push_str("0x");
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

pub fn hex_decode(s: &str) -> Result<Vec<u8>> {
    let digits = s
        .strip_prefix("0x")
        .ok_or_else(|| Error::Parse(format!("missing 0x prefix: {s:?}")))?;
    if digits.len() % 2 != 0 {
        return Err(Error::Parse(format!("odd-length hex: {s:?}")));
    }
    (0..digits.len())
        .step_by(2)
        .map(|i| {
            u8::from_str_radix(&digits[i..i + 2], 16)
                .map_err(|_| Error::Parse(format!("bad hex: {s:?}")))
        })
        .collect()
}

pub fn leaf_digest(address: &Address) -> Digest {
    let mut h = Sha256::new();
    h.update([0x00]);
    h.update(address.0);
    h.finalize().into()
}

pub fn node_digest(left: &Digest, right: &Digest) -> Digest {
    let mut h = Sha256::new();
    h.update([0x01]);
    h.update(left);
    h.update(right);
    h.finalize().into()
}

/// ⌈log2(max(n, 2))⌉.
pub fn depth_for(n: usize) -> usize {
    let n = n.max(2);
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

#[derive(Debug, Clone)]
pub struct MerkleTree {
    /// levels[0] are the padded leaves, the last level is the root.
    levels: Vec<Vec<Digest>>,
    n: usize,
}

impl MerkleTree {
    pub fn build(addresses: &[Address]) -> Result<Self> {
        let mut seen = HashSet::with_capacity(addresses.len());
        for a in addresses {
            if !seen.insert(*a) {
                return Err(Error::DuplicateAddress(a.to_hex()));
            }
        }
        let depth = depth_for(addresses.len());
        let mut leaves: Vec<Digest> = addresses.iter().map(leaf_digest).collect();
        leaves.resize(1 << depth, ZERO_LEAF);
        let mut levels = vec![leaves];
        for _ in 0..depth {
            let prev = levels.last().unwrap();
            let next = prev
                .chunks_exact(2)
                .map(|pair| node_digest(&pair[0], &pair[1]))
                .collect();
            levels.push(next);
        }
        Ok(Self {
            levels,
            n: addresses.len(),
        })
    }

    pub fn root(&self) -> Digest {
        self.levels.last().unwrap()[0]
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn gen_proof(&self, index: usize) -> Result<MerkleProof> {
        if index >= self.n {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.n,
            });
        }
        let mut siblings = Vec::with_capacity(self.depth());
        let mut i = index;
        for level in &self.levels[..self.depth()] {
            siblings.push(level[i ^ 1]);
            i >>= 1;
        }
        Ok(MerkleProof {
            index,
            siblings,
            depth: self.depth(),
        })
    }
}

/// Membership proof: siblings bottom-up; bit k of `index` says whether the
/// running node is the right child at level k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleProof {
    pub index: usize,
    pub siblings: Vec<Digest>,
    pub depth: usize,
}

#[derive(Serialize, Deserialize)]
struct ProofRepr {
    index: usize,
    siblings: Vec<String>,
    depth: usize,
}

impl Serialize for MerkleProof {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProofRepr {
            index: self.index,
            siblings: self.siblings.iter().map(|d| hex_encode(d)).collect(),
            depth: self.depth,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MerkleProof {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ProofRepr::deserialize(d)?;
        let siblings = r
            .siblings
            .iter()
            .map(|s| {
                hex_decode(s).and_then(|b| {
                    b.try_into()
                        .map_err(|_| Error::Parse("sibling must be 32 bytes".into()))
                })
            })
            .collect::<Result<Vec<Digest>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(MerkleProof {
            index: r.index,
            siblings,
            depth: r.depth,
        })
    }
}

impl MerkleProof {
    /// Direction bits bottom-up: true when the running node is a right child.
    pub fn directions(&self) -> Vec<bool> {
        (0..self.depth).map(|k| (self.index >> k) & 1 == 1).collect()
    }
}

pub fn verify_proof(root: &Digest, address: &Address, proof: &MerkleProof) -> bool {
    verify_proof_metered(root, address, proof).0
}

/// Verifies and reports the SHA-256 compression calls spent.
pub fn verify_proof_metered(root: &Digest, address: &Address, proof: &MerkleProof) -> (bool, u64) {
    if proof.siblings.len() != proof.depth || proof.index >> proof.depth != 0 {
        return (false, 0);
    }
    let mut calls = LEAF_HASH_BLOCKS;
    let mut node = leaf_digest(address);
    for (sibling, right) in proof.siblings.iter().zip(proof.directions()) {
        node = if right {
            node_digest(sibling, &node)
        } else {
            node_digest(&node, sibling)
        };
        calls += NODE_HASH_BLOCKS;
    }
    (&node == root, calls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn addrs(n: usize, seed: u64) -> Vec<Address> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n).map(|_| Address::random(&mut rng)).collect()
    }

    #[test]
    fn single_leaf_is_padded_once() {
        let a = addrs(1, 1);
        let t = MerkleTree::build(&a).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.root(), node_digest(&leaf_digest(&a[0]), &ZERO_LEAF));
    }

    #[test]
    fn depth_rule() {
        assert_eq!(depth_for(1), 1);
        assert_eq!(depth_for(2), 1);
        assert_eq!(depth_for(3), 2);
        assert_eq!(depth_for(8), 3);
        assert_eq!(depth_for(9), 4);
        assert_eq!(depth_for(40), 6);
    }

    #[test]
    fn positional_and_deterministic() {
        let a = addrs(5, 2);
        let root = MerkleTree::build(&a).unwrap().root();
        assert_eq!(MerkleTree::build(&a).unwrap().root(), root);
        let mut b = a.clone();
        b.swap(0, 3);
        assert_ne!(MerkleTree::build(&b).unwrap().root(), root);
    }

    #[test]
    fn duplicates_rejected() {
        let mut a = addrs(3, 3);
        a[2] = a[0];
        assert!(matches!(MerkleTree::build(&a), Err(Error::DuplicateAddress(_))));
    }

    #[test]
    fn membership_and_tamper() {
        let a = addrs(8, 4);
        let t = MerkleTree::build(&a).unwrap();
        let root = t.root();
        for (i, addr) in a.iter().enumerate() {
            let p = t.gen_proof(i).unwrap();
            assert_eq!(p.siblings.len(), t.depth());
            assert!(verify_proof(&root, addr, &p));
            let (ok, calls) = verify_proof_metered(&root, addr, &p);
            assert!(ok);
            assert_eq!(calls, LEAF_HASH_BLOCKS + NODE_HASH_BLOCKS * t.depth() as u64);
        }
        let outsider = addrs(1, 99)[0];
        assert!(!verify_proof(&root, &outsider, &t.gen_proof(3).unwrap()));
        let mut p = t.gen_proof(5).unwrap();
        p.siblings[1][7] ^= 1;
        assert!(!verify_proof(&root, &a[5], &p));
        assert!(matches!(t.gen_proof(8), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn non_members_fail() {
        let a = addrs(13, 5);
        let t = MerkleTree::build(&a).unwrap();
        let proofs: Vec<_> = (0..13).map(|i| t.gen_proof(i).unwrap()).collect();
        for (k, outsider) in addrs(500, 6).iter().enumerate() {
            assert!(!verify_proof(&t.root(), outsider, &proofs[k % 13]));
        }
    }

    #[test]
    fn proof_json_shape() {
        let a = addrs(3, 7);
        let t = MerkleTree::build(&a).unwrap();
        let p = t.gen_proof(2).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["index"], 2);
        assert_eq!(v["depth"], 2);
        assert_eq!(v["siblings"].as_array().unwrap().len(), 2);
        let back: MerkleProof = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }
}
