//! Decimal-string encodings for arbitrary-precision integers in JSON.
//!
//! All file formats in the crate carry big integers as decimal strings so
//! that outputs stay exact and byte-stable across platforms.

use num_bigint::{BigInt, BigUint};
use num_traits::Num;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serializer};

pub fn serialize_biguint<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn deserialize_biguint<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
    let s = String::deserialize(d)?;
    BigUint::from_str_radix(&s, 10).map_err(|e| D::Error::custom(format!("bad integer: {e}")))
}

pub fn serialize_biguint_vec<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

pub fn deserialize_biguint_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
    let raw = Vec::<String>::deserialize(d)?;
    raw.iter()
        .map(|s| {
            BigUint::from_str_radix(s, 10)
                .map_err(|e| D::Error::custom(format!("bad integer: {e}")))
        })
        .collect()
}

pub fn serialize_bigint_matrix<S: Serializer>(v: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(
        v.iter()
            .map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
    )
}

pub fn deserialize_bigint_matrix<'de, D: Deserializer<'de>>(
    d: D,
) -> Result<Vec<Vec<BigInt>>, D::Error> {
    let raw = Vec::<Vec<String>>::deserialize(d)?;
    raw.iter()
        .map(|row| {
            row.iter()
                .map(|s| {
                    BigInt::from_str_radix(s, 10)
                        .map_err(|e| D::Error::custom(format!("bad integer: {e}")))
                })
                .collect()
        })
        .collect()
}

pub mod opt_biguint {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_some(&x.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        let raw = Option::<String>::deserialize(d)?;
        raw.map(|s| {
            BigUint::from_str_radix(&s, 10)
                .map_err(|e| D::Error::custom(format!("bad integer: {e}")))
        })
        .transpose()
    }
}
