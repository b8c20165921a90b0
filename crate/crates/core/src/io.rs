//! JSON formats. Complex numbers are `[re, im]`; matrices are arrays of rows.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::linalg::{c, CMatrix, CVector};
use crate::{Field, QuantumChannel};

type Pair = [f64; 2];

fn pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        pair(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = Pair::deserialize(d)?;
        Ok(c(re, im))
    }
}

pub mod complex_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(pair).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<Pair>::deserialize(d)?.into_iter().map(|[a, b]| c(a, b)).collect())
    }
}

pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(pair).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVector, D::Error> {
        let v = complex_list::deserialize(d)?;
        Ok(CVector::from_vec(v))
    }
}

pub mod matrix {
    use super::*;

    pub(crate) fn rows(m: &CMatrix) -> Vec<Vec<Pair>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| pair(&m[(i, j)])).collect())
            .collect()
    }

    pub(crate) fn from_rows<E: serde::de::Error>(rows: Vec<Vec<Pair>>) -> Result<CMatrix, E> {
        let r = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if r == 0 || cols == 0 {
            return Err(E::custom("matrix must be nonempty"));
        }
        if rows.iter().any(|row| row.len() != cols) {
            return Err(E::custom("matrix rows have unequal lengths"));
        }
        Ok(CMatrix::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        from_rows(Vec::<Vec<Pair>>::deserialize(d)?)
    }
}

pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix::rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        Vec::<Vec<Vec<Pair>>>::deserialize(d)?
            .into_iter()
            .map(matrix::from_rows)
            .collect()
    }
}

pub mod vector_list {
    use super::*;

    pub fn serialize<S: Serializer>(vs: &[CVector], s: S) -> Result<S::Ok, S::Error> {
        vs.iter()
            .map(|v| v.iter().map(pair).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CVector>, D::Error> {
        Ok(Vec::<Vec<Pair>>::deserialize(d)?
            .into_iter()
            .map(|v| CVector::from_iterator(v.len(), v.into_iter().map(|[a, b]| c(a, b))))
            .collect())
    }
}

/// `Option<(x, y)>` as `{"x": …, "y": …}` or `null`.
pub mod vector_pair {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Xy {
        #[serde(with = "vector")]
        x: CVector,
        #[serde(with = "vector")]
        y: CVector,
    }

    pub fn serialize<S: Serializer>(p: &Option<(CVector, CVector)>, s: S) -> Result<S::Ok, S::Error> {
        p.as_ref()
            .map(|(x, y)| Xy { x: x.clone(), y: y.clone() })
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<(CVector, CVector)>, D::Error> {
        Ok(Option::<Xy>::deserialize(d)?.map(|p| (p.x, p.y)))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelJson {
    dim_in: usize,
    dim_out: usize,
    field: Field,
    #[serde(with = "matrix_list")]
    kraus: Vec<CMatrix>,
}

impl Serialize for QuantumChannel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ChannelJson {
            dim_in: self.dim_in(),
            dim_out: self.dim_out(),
            field: self.field(),
            kraus: self.kraus().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumChannel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ChannelJson::deserialize(d)?;
        let ch = QuantumChannel::new(j.kraus, j.field).map_err(D::Error::custom)?;
        if ch.dim_in() != j.dim_in || ch.dim_out() != j.dim_out {
            return Err(D::Error::custom(format!(
                "declared dims {}→{} but Kraus operators are {}→{}",
                j.dim_in,
                j.dim_out,
                ch.dim_in(),
                ch.dim_out()
            )));
        }
        Ok(ch)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameJson {
    dim: usize,
    field: Field,
    #[serde(with = "vector_list")]
    vectors: Vec<CVector>,
}

impl Serialize for Frame {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FrameJson {
            dim: self.dim(),
            field: self.field(),
            vectors: self.vectors().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Frame {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = FrameJson::deserialize(d)?;
        Frame::new(j.dim, j.vectors, j.field).map_err(D::Error::custom)
    }
}

/// Parses any of the crate's JSON documents, reporting line and column on failure.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(Error::from)
}

/// Pretty JSON with a trailing newline; identical values give identical bytes.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("crate types always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_round_trip_is_exact() {
        let s = 1.0 / 3f64.sqrt();
        let a = CMatrix::from_row_slice(2, 2, &[c(s, 0.1), c(0.0, 0.0), c(1e-300, 0.0), c(-s, 2.5)]);
        let ch = QuantumChannel::new(vec![a], Field::Complex).unwrap();
        let text = to_json(&ch);
        let back: QuantumChannel = from_json(&text).unwrap();
        assert_eq!(back, ch);
        assert_eq!(to_json(&back), text);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = from_json::<QuantumChannel>("{\n  \"dim_in\": 2,\n  oops\n}").unwrap_err();
        match err {
            Error::Json { line, column, .. } => assert_eq!((line, column), (3, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_channels_are_rejected() {
        let bad_dims = r#"{"dim_in": 3, "dim_out": 2, "field": "real", "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert!(from_json::<QuantumChannel>(bad_dims).is_err());
        let imag_in_real = r#"{"dim_in": 1, "dim_out": 1, "field": "real", "kraus": [[[[1,0.5]]]]}"#;
        assert!(from_json::<QuantumChannel>(imag_in_real).is_err());
        let ragged = r#"{"dim_in": 2, "dim_out": 2, "field": "real", "kraus": [[[[1,0],[0,0]],[[0,0]]]]}"#;
        assert!(from_json::<QuantumChannel>(ragged).is_err());
    }

    #[test]
    fn frame_round_trip() {
        let text = r#"{"dim": 2, "field": "real", "vectors": [[[1,0],[0,0]], [[0,0],[1,0]], [[1,0],[1,0]]]}"#;
        let f: Frame = from_json(text).unwrap();
        assert_eq!(f.len(), 3);
        let back: Frame = from_json(&to_json(&f)).unwrap();
        assert_eq!(back, f);
    }
}
