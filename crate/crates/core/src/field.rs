//! Prime-field arithmetic in Montgomery form over 4×64-bit limbs.
//!
//! Two fields are instantiated: the base field F_p of Baby Jubjub (which is
//! also the BN254 scalar field, the field SNARK circuits are written over)
//! and Z_q, the scalar ring of the prime-order Baby Jubjub subgroup.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::marker::PhantomData;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigUint;
use rand::RngCore;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Static description of a prime modulus below 2^255.
pub trait FieldParams: 'static + Send + Sync {
    /// Little-endian limbs of the modulus.
    const MODULUS: [u64; 4];
    const NAME: &'static str;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaseParams;

impl FieldParams for BaseParams {
    // 21888242871839275222246405745257275088548364400416034343698204186575808495617
    const MODULUS: [u64; 4] = [
        0x43e1f593f0000001,
        0x2833e84879b97091,
        0xb85045b68181585d,
        0x30644e72e131a029,
    ];
    const NAME: &'static str = "F_p";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarParams;

impl FieldParams for ScalarParams {
    // 2736030358979909402780800718157159386076813972158567259200215660948447373041
    const MODULUS: [u64; 4] = [
        0x677297dc392126f1,
        0xab3eedb83920ee0a,
        0x370a08b6d0302b0b,
        0x060c89ce5c263405,
    ];
    const NAME: &'static str = "Z_q";
}

/// Element of F_p, the base field of the curve.
pub type FieldElement = Fp<BaseParams>;
/// Element of Z_q, the scalar ring of the prime-order subgroup.
pub type Scalar = Fp<ScalarParams>;

const fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = a as u128 + b as u128 + carry as u128;
    (t as u64, (t >> 64) as u64)
}

const fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128).wrapping_sub(b as u128 + (borrow >> 63) as u128);
    (t as u64, (t >> 64) as u64)
}

const fn mac(a: u64, b: u64, c: u64, carry: u64) -> (u64, u64) {
    let t = a as u128 + (b as u128 * c as u128) + carry as u128;
    (t as u64, (t >> 64) as u64)
}

const fn geq(a: &[u64; 4], b: &[u64; 4]) -> bool {
    let mut i = 4;
    while i > 0 {
        i -= 1;
        if a[i] > b[i] {
            return true;
        }
        if a[i] < b[i] {
            return false;
        }
    }
    true
}

const fn sub_limbs(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
    let (r0, br) = sbb(a[0], b[0], 0);
    let (r1, br) = sbb(a[1], b[1], br);
    let (r2, br) = sbb(a[2], b[2], br);
    let (r3, _) = sbb(a[3], b[3], br);
    [r0, r1, r2, r3]
}

/// (a + b) mod m for a, b < m < 2^255.
const fn add_mod(a: &[u64; 4], b: &[u64; 4], m: &[u64; 4]) -> [u64; 4] {
    let (r0, c) = adc(a[0], b[0], 0);
    let (r1, c) = adc(a[1], b[1], c);
    let (r2, c) = adc(a[2], b[2], c);
    let (r3, _) = adc(a[3], b[3], c);
    let r = [r0, r1, r2, r3];
    if geq(&r, m) {
        sub_limbs(&r, m)
    } else {
        r
    }
}

const fn mont_inv(m0: u64) -> u64 {
    let mut inv = 1u64;
    let mut i = 0;
    while i < 63 {
        inv = inv.wrapping_mul(inv);
        inv = inv.wrapping_mul(m0);
        i += 1;
    }
    inv.wrapping_neg()
}

/// 2^(256·k) mod m via repeated doubling.
const fn pow2_mod(k: usize, m: &[u64; 4]) -> [u64; 4] {
    let mut r = [1u64, 0, 0, 0];
    let mut i = 0;
    while i < 256 * k {
        r = add_mod(&r, &r, m);
        i += 1;
    }
    r
}

struct Consts<P>(PhantomData<P>);

impl<P: FieldParams> Consts<P> {
    const INV: u64 = mont_inv(P::MODULUS[0]);
    const R: [u64; 4] = pow2_mod(1, &P::MODULUS);
    const R2: [u64; 4] = pow2_mod(2, &P::MODULUS);
}

/// A field element stored in Montgomery form. Always reduced below the modulus.
pub struct Fp<P: FieldParams> {
    limbs: [u64; 4],
    _p: PhantomData<P>,
}

impl<P: FieldParams> Clone for Fp<P> {
    fn clone(&self) -> Self {
        *self
    }
}
impl<P: FieldParams> Copy for Fp<P> {}

impl<P: FieldParams> PartialEq for Fp<P> {
    fn eq(&self, other: &Self) -> bool {
        self.limbs == other.limbs
    }
}
impl<P: FieldParams> Eq for Fp<P> {}

impl<P: FieldParams> Hash for Fp<P> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.limbs.hash(state)
    }
}

impl<P: FieldParams> Default for Fp<P> {
    fn default() -> Self {
        Self::zero()
    }
}

/// Orders by canonical integer representative.
impl<P: FieldParams> Ord for Fp<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.to_canonical_limbs();
        let b = other.to_canonical_limbs();
        a.iter().rev().cmp(b.iter().rev())
    }
}
impl<P: FieldParams> PartialOrd for Fp<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P: FieldParams> Fp<P> {
    const fn from_mont(limbs: [u64; 4]) -> Self {
        Self { limbs, _p: PhantomData }
    }

    pub const fn zero() -> Self {
        Self::from_mont([0; 4])
    }

    pub fn one() -> Self {
        Self::from_mont(Consts::<P>::R)
    }

    pub fn modulus() -> BigUint {
        limbs_to_biguint(&P::MODULUS)
    }

    /// Number of significant bits in the modulus.
    pub fn modulus_bits() -> u32 {
        Self::modulus().bits() as u32
    }

    pub fn from_u64(v: u64) -> Self {
        Self::from_canonical_limbs([v, 0, 0, 0]).expect("u64 below modulus")
    }

    /// Interprets `limbs` as a canonical integer; fails if it is not below the modulus.
    pub fn from_canonical_limbs(limbs: [u64; 4]) -> Result<Self, Error> {
        if geq(&limbs, &P::MODULUS) {
            return Err(Error::NonCanonical(P::NAME));
        }
        Ok(Self::from_mont(limbs) * Self::from_mont(Consts::<P>::R2))
    }

    /// Reduces an arbitrary integer modulo the field prime.
    pub fn from_biguint(v: &BigUint) -> Self {
        let r = v % Self::modulus();
        Self::from_canonical_limbs(biguint_to_limbs(&r)).expect("reduced")
    }

    pub fn from_canonical_biguint(v: &BigUint) -> Result<Self, Error> {
        if v.bits() > 256 {
            return Err(Error::NonCanonical(P::NAME));
        }
        Self::from_canonical_limbs(biguint_to_limbs(v))
    }

    pub fn to_canonical_limbs(&self) -> [u64; 4] {
        self.mont_mul(&[1, 0, 0, 0])
    }

    pub fn to_biguint(&self) -> BigUint {
        limbs_to_biguint(&self.to_canonical_limbs())
    }

    pub fn to_bytes_be(&self) -> [u8; 32] {
        let limbs = self.to_canonical_limbs();
        let mut out = [0u8; 32];
        for (i, limb) in limbs.iter().rev().enumerate() {
            out[i * 8..(i + 1) * 8].copy_from_slice(&limb.to_be_bytes());
        }
        out
    }

    pub fn from_bytes_be(bytes: &[u8; 32]) -> Result<Self, Error> {
        let mut limbs = [0u64; 4];
        for (i, chunk) in bytes.chunks_exact(8).enumerate() {
            limbs[3 - i] = u64::from_be_bytes(chunk.try_into().unwrap());
        }
        Self::from_canonical_limbs(limbs)
    }

    /// Value of bit `i` of the canonical representative.
    pub fn bit(&self, i: usize) -> bool {
        if i >= 256 {
            return false;
        }
        (self.to_canonical_limbs()[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Canonical representative as little-endian bits, trimmed to the modulus width.
    pub fn to_bits_le(&self) -> Vec<bool> {
        let limbs = self.to_canonical_limbs();
        (0..Self::modulus_bits() as usize)
            .map(|i| (limbs[i / 64] >> (i % 64)) & 1 == 1)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.limbs == [0; 4]
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    pub fn double(&self) -> Self {
        *self + *self
    }

    pub fn pow_limbs(&self, exp: &[u64; 4]) -> Self {
        let mut acc = Self::one();
        let top = (0..256).rev().find(|i| (exp[i / 64] >> (i % 64)) & 1 == 1);
        for i in (0..=top.unwrap_or(0)).rev() {
            acc = acc.square();
            if (exp[i / 64] >> (i % 64)) & 1 == 1 {
                acc *= *self;
            }
        }
        acc
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let e = sub_limbs(&P::MODULUS, &[2, 0, 0, 0]);
        Some(self.pow_limbs(&e))
    }

    /// Like [`Fp::inverse`], but reports division by zero as an error.
    pub fn try_inverse(&self) -> Result<Self, Error> {
        self.inverse().ok_or(Error::DivisionByZero)
    }

    /// Euler criterion: 1 for a non-zero square, -1 for a non-square, 0 for zero.
    pub fn legendre(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        let e = half_limbs(&sub_limbs(&P::MODULUS, &[1, 0, 0, 0]));
        let r = self.pow_limbs(&e);
        if r == Self::one() {
            1
        } else {
            -1
        }
    }

    /// A square root by Tonelli–Shanks; which of the two roots is returned is unspecified.
    pub fn sqrt(&self) -> Option<Self> {
        match self.legendre() {
            0 => return Some(Self::zero()),
            -1 => return None,
            _ => {}
        }
        // p - 1 = 2^s · t with t odd
        let pm1 = sub_limbs(&P::MODULUS, &[1, 0, 0, 0]);
        let mut t = pm1;
        let mut s = 0u32;
        while t[0] & 1 == 0 {
            t = half_limbs(&t);
            s += 1;
        }
        let mut z = Self::from_u64(2);
        while z.legendre() != -1 {
            z += Self::one();
        }
        let mut m = s;
        let mut c = z.pow_limbs(&t);
        let mut r = self.pow_limbs(&half_limbs(&add_one(&t)));
        let mut tt = self.pow_limbs(&t);
        while tt != Self::one() {
            let mut i = 0u32;
            let mut probe = tt;
            while probe != Self::one() {
                probe = probe.square();
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = b.square();
            }
            m = i;
            c = b.square();
            tt *= c;
            r *= b;
        }
        Some(r)
    }

    /// Uniform element of the whole field.
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let bits = Self::modulus_bits() as usize;
        loop {
            let mut limbs = [0u64; 4];
            for limb in limbs.iter_mut() {
                *limb = rng.next_u64();
            }
            if bits < 256 {
                let top = bits - 192;
                limbs[3] &= (1u64 << top) - 1;
            }
            if let Ok(v) = Self::from_canonical_limbs(limbs) {
                return v;
            }
        }
    }

    /// Uniform element of [1, modulus − 1].
    pub fn random_nonzero<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v = Self::random(rng);
            if !v.is_zero() {
                return v;
            }
        }
    }

    /// 0x-prefixed lowercase hex of the canonical integer.
    pub fn to_hex(&self) -> String {
        format!("0x{}", self.to_biguint().to_str_radix(16))
    }

    pub fn from_hex(s: &str) -> Result<Self, Error> {
        let digits = s
            .strip_prefix("0x")
            .ok_or_else(|| Error::Parse(format!("missing 0x prefix: {s:?}")))?;
        let v = BigUint::parse_bytes(digits.as_bytes(), 16)
            .ok_or_else(|| Error::Parse(format!("bad hex: {s:?}")))?;
        Self::from_canonical_biguint(&v)
    }

    fn mont_mul(&self, rhs: &[u64; 4]) -> [u64; 4] {
        let a = &self.limbs;
        let m = &P::MODULUS;
        let inv = Consts::<P>::INV;
        let mut t = [0u64; 6];
        for bi in rhs.iter() {
            let mut carry = 0;
            for j in 0..4 {
                let (lo, hi) = mac(t[j], a[j], *bi, carry);
                t[j] = lo;
                carry = hi;
            }
            let (lo, hi) = adc(t[4], carry, 0);
            t[4] = lo;
            t[5] = hi;

            let k = t[0].wrapping_mul(inv);
            let (_, mut carry) = mac(t[0], k, m[0], 0);
            for j in 1..4 {
                let (lo, hi) = mac(t[j], k, m[j], carry);
                t[j - 1] = lo;
                carry = hi;
            }
            let (lo, hi) = adc(t[4], carry, 0);
            t[3] = lo;
            t[4] = t[5] + hi;
        }
        let r = [t[0], t[1], t[2], t[3]];
        if t[4] != 0 || geq(&r, m) {
            sub_limbs(&r, m)
        } else {
            r
        }
    }
}

const fn half_limbs(a: &[u64; 4]) -> [u64; 4] {
    [
        (a[0] >> 1) | (a[1] << 63),
        (a[1] >> 1) | (a[2] << 63),
        (a[2] >> 1) | (a[3] << 63),
        a[3] >> 1,
    ]
}

fn add_one(a: &[u64; 4]) -> [u64; 4] {
    let (r0, c) = adc(a[0], 1, 0);
    let (r1, c) = adc(a[1], 0, c);
    let (r2, c) = adc(a[2], 0, c);
    let (r3, _) = adc(a[3], 0, c);
    [r0, r1, r2, r3]
}

fn limbs_to_biguint(limbs: &[u64; 4]) -> BigUint {
    let mut digits = Vec::with_capacity(8);
    for limb in limbs {
        digits.push(*limb as u32);
        digits.push((*limb >> 32) as u32);
    }
    BigUint::new(digits)
}

fn biguint_to_limbs(v: &BigUint) -> [u64; 4] {
    let mut limbs = [0u64; 4];
    for (i, d) in v.iter_u64_digits().take(4).enumerate() {
        limbs[i] = d;
    }
    limbs
}

impl<P: FieldParams> Add for Fp<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_mont(add_mod(&self.limbs, &rhs.limbs, &P::MODULUS))
    }
}

impl<P: FieldParams> Sub for Fp<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        if geq(&self.limbs, &rhs.limbs) {
            Self::from_mont(sub_limbs(&self.limbs, &rhs.limbs))
        } else {
            let d = sub_limbs(&rhs.limbs, &self.limbs);
            Self::from_mont(sub_limbs(&P::MODULUS, &d))
        }
    }
}

impl<P: FieldParams> Mul for Fp<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_mont(self.mont_mul(&rhs.limbs))
    }
}

impl<P: FieldParams> Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::zero() - self
    }
}

impl<P: FieldParams> AddAssign for Fp<P> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<P: FieldParams> SubAssign for Fp<P> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<P: FieldParams> MulAssign for Fp<P> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<P: FieldParams> From<u64> for Fp<P> {
    fn from(v: u64) -> Self {
        Self::from_u64(v)
    }
}

impl<P: FieldParams> fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", P::NAME, self.to_hex())
    }
}

impl<P: FieldParams> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_biguint())
    }
}

impl<P: FieldParams> FromStr for Fp<P> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Self::from_hex(s)
    }
}

impl<P: FieldParams> Serialize for Fp<P> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de, P: FieldParams> Deserialize<'de> for Fp<P> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_hex(&s).map_err(serde::de::Error::custom)
    }
}
