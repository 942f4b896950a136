//! Gadget set the relations are written in. Every call is tallied in a
//! [`GadgetTally`] so the relation interpreters double as constraint counters.
//!
//! Curve gadgets work on raw affine coordinates ([`Coords`]) rather than on
//! [`Point`], because statement values are untrusted field elements until
//! `is_point` has been asserted on them.

use serde::{Deserialize, Serialize};

use crate::curve::{coeff_a, coeff_d, half_modulus, Point};
use crate::error::{Error, Result};
use crate::field::{FieldElement, Scalar};

/// Bits packed into one field element by Bits2Num: |p| − 1.
pub const KAPPA: usize = 253;

/// Fixed bit width of the in-circuit scalar multiplication.
pub const SCALAR_BITS: usize = 254;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coords {
    pub x: FieldElement,
    pub y: FieldElement,
}

impl Coords {
    pub fn identity() -> Self {
        Self {
            x: FieldElement::zero(),
            y: FieldElement::one(),
        }
    }

    pub fn generator() -> Self {
        Point::generator().into()
    }

    /// Converts to a curve point, failing if the coordinates are off the curve.
    pub fn to_point(&self) -> Result<Point> {
        Point::new(self.x, self.y)
    }
}

impl From<Point> for Coords {
    fn from(p: Point) -> Self {
        Self { x: p.x(), y: p.y() }
    }
}

/// Invocation counts per gadget.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetTally {
    pub mux: u64,
    pub less_than: u64,
    pub greater_than: u64,
    pub comp_const: u64,
    pub bits2num: u64,
    pub is_point: u64,
    pub is_equal: u64,
    pub e_add: u64,
    pub e_sub: u64,
    pub e_scalar_mul: u64,
    pub sha256_blocks: u64,
    pub poseidon_t2: u64,
    pub poseidon_t3: u64,
    pub poseidon_t4: u64,
}

/// Approximate R1CS constraints per gadget invocation, in the ballpark of the
/// usual circom templates. Only ratios matter to the comparisons built on them.
pub mod weights {
    pub const MUX: u64 = 2;
    pub const LESS_THAN: u64 = 33;
    pub const GREATER_THAN: u64 = 33;
    pub const COMP_CONST: u64 = 381;
    pub const BITS2NUM: u64 = 254;
    pub const IS_POINT: u64 = 4;
    pub const IS_EQUAL: u64 = 5;
    pub const E_ADD: u64 = 6;
    pub const E_SUB: u64 = 6;
    pub const E_SCALAR_MUL: u64 = 254 * (6 + 6 + 2);
    pub const SHA256_BLOCK: u64 = 29_380;
    pub const POSEIDON_T2: u64 = 213;
    pub const POSEIDON_T3: u64 = 240;
    pub const POSEIDON_T4: u64 = 288;
}

impl GadgetTally {
    pub fn total(&self) -> u64 {
        use weights::*;
        self.mux * MUX
            + self.less_than * LESS_THAN
            + self.greater_than * GREATER_THAN
            + self.comp_const * COMP_CONST
            + self.bits2num * BITS2NUM
            + self.is_point * IS_POINT
            + self.is_equal * IS_EQUAL
            + self.e_add * E_ADD
            + self.e_sub * E_SUB
            + self.e_scalar_mul * E_SCALAR_MUL
            + self.sha256_blocks * SHA256_BLOCK
            + self.poseidon_t2 * POSEIDON_T2
            + self.poseidon_t3 * POSEIDON_T3
            + self.poseidon_t4 * POSEIDON_T4
    }
}

/// Interpreter context: gadget implementations plus the running tally.
#[derive(Debug, Default)]
pub struct Ctx {
    pub tally: GadgetTally,
}

fn require_bit(s: FieldElement) -> Result<bool> {
    if s.is_zero() {
        Ok(false)
    } else if s == FieldElement::one() {
        Ok(true)
    } else {
        Err(Error::NonBit)
    }
}

impl Ctx {
    pub fn new() -> Self {
        Self::default()
    }

    /// P if s = 0, Q if s = 1.
    pub fn mux(&mut self, s: FieldElement, p: Coords, q: Coords) -> Result<Coords> {
        self.tally.mux += 1;
        Ok(if require_bit(s)? { q } else { p })
    }

    pub fn less_than(&mut self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.tally.less_than += 1;
        bit(a < b)
    }

    pub fn greater_than(&mut self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.tally.greater_than += 1;
        bit(a > b)
    }

    /// 1 iff a > c for a constant c.
    pub fn comp_const(&mut self, a: FieldElement, c: FieldElement) -> FieldElement {
        self.tally.comp_const += 1;
        bit(a > c)
    }

    /// Sign of an x-coordinate: CompC(x, (p − 1)/2).
    pub fn sign(&mut self, x: FieldElement) -> FieldElement {
        self.comp_const(x, half_modulus())
    }

    /// Σ bits[t]·2^t for at most κ bits.
    pub fn bits2num(&mut self, bits: &[FieldElement]) -> Result<FieldElement> {
        self.tally.bits2num += 1;
        if bits.len() > KAPPA {
            return Err(Error::TooManyBits {
                max: KAPPA,
                got: bits.len(),
            });
        }
        let mut acc = FieldElement::zero();
        let mut weight = FieldElement::one();
        for b in bits {
            if require_bit(*b)? {
                acc += weight;
            }
            weight = weight.double();
        }
        Ok(acc)
    }

    pub fn is_point(&mut self, x: FieldElement, y: FieldElement) -> bool {
        self.tally.is_point += 1;
        let x2 = x.square();
        let y2 = y.square();
        coeff_a() * x2 + y2 == FieldElement::one() + coeff_d() * x2 * y2
    }

    pub fn is_equal(&mut self, p: &Coords, q: &Coords) -> bool {
        self.tally.is_equal += 1;
        p == q
    }

    /// Affine twisted Edwards addition. Fails only when a denominator vanishes,
    /// which cannot happen for points on the curve.
    pub fn e_add(&mut self, p: &Coords, q: &Coords) -> Result<Coords> {
        self.tally.e_add += 1;
        affine_add(p, q)
    }

    pub fn e_sub(&mut self, p: &Coords, q: &Coords) -> Result<Coords> {
        self.tally.e_sub += 1;
        affine_add(p, &Coords { x: -q.x, y: q.y })
    }

    /// Fixed-width double-and-add over the canonical bits of `k`.
    pub fn e_scalar_mul(&mut self, k: &[bool], p: &Coords) -> Result<Coords> {
        self.tally.e_scalar_mul += 1;
        if k.len() > SCALAR_BITS {
            return Err(Error::TooManyBits {
                max: SCALAR_BITS,
                got: k.len(),
            });
        }
        let base = Projective::from_affine(p);
        let mut acc = Projective::identity();
        for i in (0..SCALAR_BITS).rev() {
            acc = acc.double();
            if k.get(i).copied().unwrap_or(false) {
                acc = acc.add(&base);
            }
        }
        acc.to_affine()
    }

    pub fn hash_blocks(&mut self, backend: crate::commit::HashBackend, n_inputs: usize) {
        use crate::commit::{hash_cost, DomainTag, HashBackend};
        match backend {
            HashBackend::Sha256 => {
                self.tally.sha256_blocks += hash_cost(backend, DomainTag::PLAIN, n_inputs)
            }
            HashBackend::Poseidon => {
                for width in poseidon_widths(n_inputs) {
                    match width {
                        2 => self.tally.poseidon_t2 += 1,
                        3 => self.tally.poseidon_t3 += 1,
                        _ => self.tally.poseidon_t4 += 1,
                    }
                }
            }
        }
    }
}

/// Widths of the permutations `hash_to_field` runs on `n` inputs.
pub(crate) fn poseidon_widths(n: usize) -> Vec<usize> {
    if n == 0 {
        return vec![2];
    }
    let first = n.min(3);
    let mut out = vec![first + 1];
    let mut rest = n - first;
    while rest > 0 {
        let c = rest.min(2);
        out.push(c + 2);
        rest -= c;
    }
    out
}

pub fn scalar_bits(k: &Scalar) -> Vec<bool> {
    (0..SCALAR_BITS).map(|i| k.bit(i)).collect()
}

pub fn field_bits(k: &FieldElement) -> Vec<bool> {
    (0..SCALAR_BITS).map(|i| k.bit(i)).collect()
}

fn bit(b: bool) -> FieldElement {
    if b {
        FieldElement::one()
    } else {
        FieldElement::zero()
    }
}

fn affine_add(p: &Coords, q: &Coords) -> Result<Coords> {
    let x1x2 = p.x * q.x;
    let y1y2 = p.y * q.y;
    let dxy = coeff_d() * x1x2 * y1y2;
    let den_x = FieldElement::one() + dxy;
    let den_y = FieldElement::one() - dxy;
    // one inversion for both denominators
    let inv = (den_x * den_y).try_inverse()?;
    let x = (p.x * q.y + p.y * q.x) * inv * den_y;
    let y = (y1y2 - coeff_a() * x1x2) * inv * den_x;
    Ok(Coords { x, y })
}

/// Projective (X : Y : Z) twisted Edwards coordinates, x = X/Z, y = Y/Z.
#[derive(Clone, Copy)]
struct Projective {
    x: FieldElement,
    y: FieldElement,
    z: FieldElement,
}

impl Projective {
    fn identity() -> Self {
        Self {
            x: FieldElement::zero(),
            y: FieldElement::one(),
            z: FieldElement::one(),
        }
    }

    fn from_affine(p: &Coords) -> Self {
        Self {
            x: p.x,
            y: p.y,
            z: FieldElement::one(),
        }
    }

    // add-2008-bbjlp
    fn add(&self, o: &Self) -> Self {
        let a = self.z * o.z;
        let b = a.square();
        let c = self.x * o.x;
        let d = self.y * o.y;
        let e = coeff_d() * c * d;
        let f = b - e;
        let g = b + e;
        let x3 = a * f * ((self.x + self.y) * (o.x + o.y) - c - d);
        let y3 = a * g * (d - coeff_a() * c);
        Self {
            x: x3,
            y: y3,
            z: f * g,
        }
    }

    // dbl-2008-bbjlp
    fn double(&self) -> Self {
        let b = (self.x + self.y).square();
        let c = self.x.square();
        let d = self.y.square();
        let e = coeff_a() * c;
        let f = e + d;
        let h = self.z.square();
        let j = f - h.double();
        Self {
            x: (b - c - d) * j,
            y: f * (e - d),
            z: f * j,
        }
    }

    fn to_affine(self) -> Result<Coords> {
        let zinv = self.z.try_inverse()?;
        Ok(Coords {
            x: self.x * zinv,
            y: self.y * zinv,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fe(v: u64) -> FieldElement {
        FieldElement::from_u64(v)
    }

    #[test]
    fn mux_selects() {
        let mut c = Ctx::new();
        let p = Coords::identity();
        let q = Coords::generator();
        assert_eq!(c.mux(fe(0), p, q).unwrap(), p);
        assert_eq!(c.mux(fe(1), p, q).unwrap(), q);
        assert_eq!(c.mux(fe(1), Coords::identity(), q).unwrap(), q);
        assert_eq!(c.mux(fe(2), p, q), Err(Error::NonBit));
        assert_eq!(c.tally.mux, 4);
    }

    #[test]
    fn comparisons() {
        let mut c = Ctx::new();
        assert_eq!(c.less_than(fe(3), fe(5)), fe(1));
        assert_eq!(c.greater_than(fe(3), fe(5)), fe(0));
        assert_eq!(c.comp_const(-FieldElement::one(), half_modulus()), fe(1));
        assert_eq!(c.comp_const(half_modulus(), half_modulus()), fe(0));
        assert_eq!(c.sign(half_modulus() + fe(1)), fe(1));
    }

    #[test]
    fn bits2num_cases() {
        let mut c = Ctx::new();
        assert_eq!(c.bits2num(&[fe(1), fe(0), fe(1)]).unwrap(), fe(5));
        assert_eq!(c.bits2num(&[fe(0); 10]).unwrap(), fe(0));
        let ones = vec![fe(1); KAPPA];
        let expected = (BigUint::from(1u8) << KAPPA) - 1u8;
        let got = c.bits2num(&ones).unwrap();
        assert_eq!(got.to_biguint(), expected);
        assert!(expected < FieldElement::modulus());
        assert_eq!(
            c.bits2num(&vec![fe(0); KAPPA + 1]),
            Err(Error::TooManyBits {
                max: KAPPA,
                got: KAPPA + 1
            })
        );
        assert_eq!(c.bits2num(&[fe(2)]), Err(Error::NonBit));
    }

    #[test]
    fn gadget_arithmetic_matches_native() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let g = Point::generator();
        let mut c = Ctx::new();
        for _ in 0..1000 {
            let p = g.mul(&Scalar::random(&mut rng));
            let q = g.mul(&Scalar::random(&mut rng));
            let k = Scalar::random(&mut rng);
            assert_eq!(c.e_add(&p.into(), &q.into()).unwrap(), Coords::from(p + q));
            assert_eq!(c.e_sub(&p.into(), &q.into()).unwrap(), Coords::from(p - q));
            assert_eq!(
                c.e_scalar_mul(&scalar_bits(&k), &p.into()).unwrap(),
                Coords::from(p.mul(&k))
            );
        }
        assert_eq!(c.tally.e_scalar_mul, 1000);
    }

    #[test]
    fn poseidon_width_schedule() {
        assert_eq!(poseidon_widths(1), vec![2]);
        assert_eq!(poseidon_widths(2), vec![3]);
        assert_eq!(poseidon_widths(3), vec![4]);
        assert_eq!(poseidon_widths(6), vec![4, 4, 3]);
    }
}
