use std::fmt;

use p256::elliptic_curve::group::GroupEncoding;
use p256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use p256::{AffinePoint, EncodedPoint, FieldBytes, NonZeroScalar, ProjectivePoint};
use rand_core::CryptoRngCore;

use crate::error::{Error, Result};
use crate::opcount::{self, Op};

/// Compressed SEC1 point width.
pub const POINT_LEN: usize = 33;
pub const SCALAR_LEN: usize = 32;

/// A scalar in `[1, q - 1]`.
#[derive(Clone, Copy)]
pub struct Scalar(NonZeroScalar);

impl Scalar {
    pub fn random<R: CryptoRngCore + ?Sized>(rng: &mut R) -> Self {
        let mut rng = rng;
        Scalar(NonZeroScalar::random(&mut rng))
    }

    /// Big-endian decoding; zero and values `>= q` are rejected.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != SCALAR_LEN {
            return Err(Error::LengthMismatch {
                expected: SCALAR_LEN,
                actual: bytes.len(),
            });
        }
        let repr = FieldBytes::clone_from_slice(bytes);
        Option::<NonZeroScalar>::from(NonZeroScalar::from_repr(repr))
            .map(Scalar)
            .ok_or(Error::Decode("scalar out of range"))
    }

    pub fn to_bytes(&self) -> [u8; SCALAR_LEN] {
        self.0.to_bytes().into()
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        super::ct_eq(&self.to_bytes(), &other.to_bytes())
    }
}

impl Eq for Scalar {}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Scalar(..)")
    }
}

/// A non-identity point of the prime-order group. P-256 has cofactor 1, so
/// every on-curve point other than the identity is in the subgroup.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GroupElement(AffinePoint);

impl GroupElement {
    pub fn generator() -> Self {
        GroupElement(AffinePoint::GENERATOR)
    }

    pub fn encode(&self) -> [u8; POINT_LEN] {
        let mut out = [0u8; POINT_LEN];
        out.copy_from_slice(self.0.to_bytes().as_slice());
        out
    }

    /// Accepts only the 33-byte compressed form of an on-curve, non-identity point.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != POINT_LEN {
            return Err(Error::InvalidPoint);
        }
        let encoded = EncodedPoint::from_bytes(bytes).map_err(|_| Error::InvalidPoint)?;
        if !encoded.is_compressed() {
            return Err(Error::InvalidPoint);
        }
        let point: Option<AffinePoint> = AffinePoint::from_encoded_point(&encoded).into();
        match point {
            Some(p) if p != AffinePoint::IDENTITY => Ok(GroupElement(p)),
            _ => Err(Error::InvalidPoint),
        }
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({})", hex::encode(self.0.to_encoded_point(true)))
    }
}

/// `s * q`. The underlying ladder is constant-time in `s`.
pub fn scalar_mult(s: &Scalar, q: &GroupElement) -> GroupElement {
    opcount::record(Op::ScalarMult);
    let product = ProjectivePoint::from(q.0) * *s.0;
    // Non-zero scalar times a point of prime order is never the identity.
    GroupElement(product.to_affine())
}
