//! Baby Jubjub: the twisted Edwards curve a·x² + y² = 1 + d·x²·y² over F_p.
//!
//! Public [`Point`]s are affine and always on the curve. Scalar multiplication
//! runs in extended coordinates and normalizes once at the end.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::{FieldElement, Scalar};

pub const COEFF_A: u64 = 168700;
pub const COEFF_D: u64 = 168696;

const GENERATOR_X: &str = "0xbb77a6ad63e739b4eacb2e09d6277c12ab8d8010534e0b62893f3f6bb957051";
const GENERATOR_Y: &str = "0x25797203f7a0b24925572e1cd16bf9edfce0051fb9e133774b3c257a872d7d8b";

pub fn coeff_a() -> FieldElement {
    FieldElement::from_u64(COEFF_A)
}

pub fn coeff_d() -> FieldElement {
    FieldElement::from_u64(COEFF_D)
}

/// (p − 1)/2, the threshold of the x-coordinate sign test.
pub fn half_modulus() -> FieldElement {
    static HALF: OnceLock<FieldElement> = OnceLock::new();
    *HALF.get_or_init(|| {
        FieldElement::from_biguint(&((FieldElement::modulus() - 1u32) >> 1))
    })
}

/// Sign bit of a coordinate: 1 iff x > (p − 1)/2.
pub fn sign_of(x: &FieldElement) -> bool {
    *x > half_modulus()
}

pub fn is_on_curve(x: &FieldElement, y: &FieldElement) -> bool {
    let x2 = x.square();
    let y2 = y.square();
    coeff_a() * x2 + y2 == FieldElement::one() + coeff_d() * x2 * y2
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    x: FieldElement,
    y: FieldElement,
}

impl Point {
    pub fn new(x: FieldElement, y: FieldElement) -> Result<Self> {
        if !is_on_curve(&x, &y) {
            return Err(Error::NotOnCurve);
        }
        Ok(Self { x, y })
    }

    /// Like [`Point::new`], additionally requiring membership in the order-q subgroup.
    pub fn new_in_subgroup(x: FieldElement, y: FieldElement) -> Result<Self> {
        let p = Self::new(x, y)?;
        p.check_subgroup()?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(x: FieldElement, y: FieldElement) -> Self {
        Self { x, y }
    }

    pub fn identity() -> Self {
        Self {
            x: FieldElement::zero(),
            y: FieldElement::one(),
        }
    }

    /// Generator of the prime-order subgroup.
    pub fn generator() -> Self {
        static G: OnceLock<Point> = OnceLock::new();
        *G.get_or_init(|| {
            let x = FieldElement::from_hex(GENERATOR_X).expect("generator x");
            let y = FieldElement::from_hex(GENERATOR_Y).expect("generator y");
            let g = Point::new(x, y).expect("generator on curve");
            assert!(
                g.mul_scalar_limbs(&subgroup_order_limbs()).is_identity(),
                "generator does not have order q"
            );
            g
        })
    }

    pub fn x(&self) -> FieldElement {
        self.x
    }

    pub fn y(&self) -> FieldElement {
        self.y
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn check_subgroup(&self) -> Result<()> {
        if self.mul_scalar_limbs(&subgroup_order_limbs()).is_identity() {
            Ok(())
        } else {
            Err(Error::NotInSubgroup)
        }
    }

    pub fn double(&self) -> Self {
        *self + *self
    }

    pub fn mul(&self, k: &Scalar) -> Self {
        self.mul_scalar_limbs(&k.to_canonical_limbs())
    }

    pub fn mul_u64(&self, k: u64) -> Self {
        self.mul_scalar_limbs(&[k, 0, 0, 0])
    }

    /// Double-and-add over an arbitrary 256-bit integer, most significant bit first.
    pub fn mul_scalar_limbs(&self, k: &[u64; 4]) -> Self {
        let base = Extended::from(*self);
        let mut acc = Extended::identity();
        for i in (0..256).rev() {
            acc = acc.add(&acc);
            if (k[i / 64] >> (i % 64)) & 1 == 1 {
                acc = acc.add(&base);
            }
        }
        acc.to_affine()
    }

    pub fn compress(&self) -> CompactPoint {
        CompactPoint {
            y: self.y,
            sign: sign_of(&self.x),
        }
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Point>>(points: I) -> Point {
        points
            .into_iter()
            .fold(Extended::identity(), |acc, p| acc.add(&Extended::from(*p)))
            .to_affine()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Extended::from(self).add(&Extended::from(rhs)).to_affine()
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point {
            x: -self.x,
            y: self.y,
        }
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        self + (-rhs)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Point({}, {})", self.x.to_hex(), self.y.to_hex())
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    x: FieldElement,
    y: FieldElement,
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointRepr {
            x: self.x,
            y: self.y,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PointRepr::deserialize(d)?;
        Point::new(r.x, r.y).map_err(serde::de::Error::custom)
    }
}

pub fn subgroup_order_limbs() -> [u64; 4] {
    <crate::field::ScalarParams as crate::field::FieldParams>::MODULUS
}

/// A point stored as its y-coordinate plus the sign bit of x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompactPoint {
    pub y: FieldElement,
    #[serde(with = "bit01")]
    pub sign: bool,
}

impl CompactPoint {
    /// Recovers the point with x² = (1 − y²)/(a − d·y²) and the requested sign of x.
    pub fn decompress(&self) -> Result<Point> {
        let y2 = self.y.square();
        let num = FieldElement::one() - y2;
        let den = coeff_a() - coeff_d() * y2;
        let den_inv = den.inverse().ok_or(Error::NotAPoint)?;
        let x = (num * den_inv).sqrt().ok_or(Error::NotAPoint)?;
        let x = if sign_of(&x) == self.sign { x } else { -x };
        if sign_of(&x) != self.sign {
            // x = 0 has no negative counterpart
            return Err(Error::NotAPoint);
        }
        Ok(Point::new_unchecked(x, self.y))
    }
}

pub(crate) mod bit01 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*b as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            v => Err(serde::de::Error::custom(format!("sign must be 0 or 1, got {v}"))),
        }
    }
}

/// Extended twisted Edwards coordinates (X : Y : Z : T) with x = X/Z, y = Y/Z, T = XY/Z.
#[derive(Clone, Copy)]
struct Extended {
    x: FieldElement,
    y: FieldElement,
    z: FieldElement,
    t: FieldElement,
}

impl Extended {
    fn identity() -> Self {
        Self {
            x: FieldElement::zero(),
            y: FieldElement::one(),
            z: FieldElement::one(),
            t: FieldElement::zero(),
        }
    }

    // add-2008-hwcd; complete on Baby Jubjub since a is a square and d is not.
    fn add(&self, o: &Self) -> Self {
        let a = self.x * o.x;
        let b = self.y * o.y;
        let c = coeff_d() * self.t * o.t;
        let d = self.z * o.z;
        let e = (self.x + self.y) * (o.x + o.y) - a - b;
        let f = d - c;
        let g = d + c;
        let h = b - coeff_a() * a;
        Self {
            x: e * f,
            y: g * h,
            t: e * h,
            z: f * g,
        }
    }

    fn to_affine(self) -> Point {
        let zinv = self.z.inverse().expect("complete addition keeps Z non-zero");
        Point::new_unchecked(self.x * zinv, self.y * zinv)
    }
}

impl From<Point> for Extended {
    fn from(p: Point) -> Self {
        Self {
            x: p.x,
            y: p.y,
            z: FieldElement::one(),
            t: p.x * p.y,
        }
    }
}
