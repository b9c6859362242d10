//! Serde adapters writing `f64` values as shortest round-trip decimal strings.

use ndarray::{Array1, Array2};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

fn parse<E: serde::de::Error>(s: &str) -> Result<f64, E> {
    s.parse::<f64>().map_err(|e| E::custom(format!("bad decimal '{s}': {e}")))
}

pub mod scalar {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        parse(&String::deserialize(d)?)
    }
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(|x| x.to_string()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| parse(&s)).transpose()
    }
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(f64::to_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|s| parse(s)).collect()
    }
}

pub mod array1 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Array1<f64>, s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(f64::to_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array1<f64>, D::Error> {
        Ok(Array1::from(super::vec::deserialize(d)?))
    }
}

#[derive(Serialize, Deserialize)]
struct Matrix {
    rows: usize,
    cols: usize,
    #[serde(with = "vec")]
    data: Vec<f64>,
}

pub mod array2 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        Matrix {
            rows: v.nrows(),
            cols: v.ncols(),
            data: v.iter().copied().collect(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        let m = Matrix::deserialize(d)?;
        Array2::from_shape_vec((m.rows, m.cols), m.data).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Probe {
        #[serde(with = "scalar")]
        a: f64,
        #[serde(with = "array2")]
        m: Array2<f64>,
        #[serde(with = "option")]
        o: Option<f64>,
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let p = Probe {
            a: 0.1 + 0.2,
            m: Array2::from_shape_fn((2, 3), |(i, j)| (i as f64 + 1.0) / (j as f64 + 3.0) * 1e-300),
            o: Some(f64::MIN_POSITIVE),
        };
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Probe>(&text).unwrap(), p);
    }
}
