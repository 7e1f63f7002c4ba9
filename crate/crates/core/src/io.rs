//! Serialization helpers. Exact integers are written as plain JSON numbers of
//! arbitrary length; subspaces as their canonical basis rows.

use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::subspace::Subspace;

pub fn ser_subspace<S: Serializer>(s: &Subspace, ser: S) -> std::result::Result<S::Ok, S::Error> {
    s.to_coords().serialize(ser)
}

pub fn ser_biguint<S: Serializer>(x: &BigUint, ser: S) -> std::result::Result<S::Ok, S::Error> {
    serde_json::Number::from_str(&x.to_string()).expect("decimal digits").serialize(ser)
}

pub fn de_biguint<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<BigUint, D::Error> {
    let n = serde_json::Number::deserialize(de)?;
    BigUint::from_str(&n.to_string())
        .map_err(|_| serde::de::Error::custom(format!("expected a nonnegative integer, got {n}")))
}

pub fn ser_opt_biguint<S: Serializer>(x: &Option<BigUint>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_biguint(v, ser),
        None => ser.serialize_none(),
    }
}

pub fn de_opt_biguint<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Option<BigUint>, D::Error> {
    let n: Option<serde_json::Number> = Option::deserialize(de)?;
    n.map(|n| {
        BigUint::from_str(&n.to_string())
            .map_err(|_| serde::de::Error::custom(format!("expected a nonnegative integer, got {n}")))
    })
    .transpose()
}

pub fn ser_biguint_vec<S: Serializer>(xs: &[BigUint], ser: S) -> std::result::Result<S::Ok, S::Error> {
    let nums: Vec<serde_json::Number> =
        xs.iter().map(|x| serde_json::Number::from_str(&x.to_string()).unwrap()).collect();
    nums.serialize(ser)
}

pub fn ser_biguint_matrix<S: Serializer>(xs: &[Vec<BigUint>], ser: S) -> std::result::Result<S::Ok, S::Error> {
    let nums: Vec<Vec<serde_json::Number>> = xs
        .iter()
        .map(|row| row.iter().map(|x| serde_json::Number::from_str(&x.to_string()).unwrap()).collect())
        .collect();
    nums.serialize(ser)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("serializable");
    s.push('\n');
    s
}
