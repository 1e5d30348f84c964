//! JSON encoding for big integers: plain numbers while they fit in an
//! `i64`, decimal strings beyond that. Both forms are accepted on input.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Wire {
    Small(i64),
    Big(String),
}

fn to_wire(x: &BigInt) -> Wire {
    match x.to_i64() {
        Some(v) => Wire::Small(v),
        None => Wire::Big(x.to_string()),
    }
}

fn from_wire<E: serde::de::Error>(w: Wire) -> Result<BigInt, E> {
    match w {
        Wire::Small(v) => Ok(BigInt::from(v)),
        Wire::Big(s) => s.parse().map_err(|_| E::custom(format!("not an integer: {s:?}"))),
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(to_wire).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<Wire>::deserialize(d)?.into_iter().map(from_wire).collect()
    }
}

pub mod nested {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
        xs.iter()
            .map(|r| r.iter().map(to_wire).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        Vec::<Vec<Wire>>::deserialize(d)?
            .into_iter()
            .map(|r| r.into_iter().map(from_wire).collect())
            .collect()
    }
}

pub mod option_vec {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<Vec<BigInt>>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref()
            .map(|v| v.iter().map(to_wire).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<BigInt>>, D::Error> {
        Option::<Vec<Wire>>::deserialize(d)?
            .map(|v| v.into_iter().map(from_wire).collect())
            .transpose()
    }
}
