//! Ordered JSON values whose floats are always written with 17 significant
//! digits, so a report round-trips every binary64 value exactly and two runs
//! can be compared byte for byte.

use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::value::RawValue;

#[derive(Debug, Clone, PartialEq)]
pub enum J {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<J>),
    Obj(Vec<(String, J)>),
}

/// `{:.16e}` gives one digit before the point and sixteen after.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for J {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            J::Null => s.serialize_unit(),
            J::Bool(b) => s.serialize_bool(*b),
            J::Int(i) => s.serialize_i64(*i),
            J::Num(x) if x.is_finite() => {
                let raw = RawValue::from_string(fmt17(*x)).map_err(serde::ser::Error::custom)?;
                raw.serialize(s)
            }
            J::Num(_) => s.serialize_unit(),
            J::Str(t) => s.serialize_str(t),
            J::Arr(v) => {
                let mut seq = s.serialize_seq(Some(v.len()))?;
                for x in v {
                    seq.serialize_element(x)?;
                }
                seq.end()
            }
            J::Obj(v) => {
                let mut map = s.serialize_map(Some(v.len()))?;
                for (k, x) in v {
                    map.serialize_entry(k, x)?;
                }
                map.end()
            }
        }
    }
}

impl From<f64> for J {
    fn from(x: f64) -> Self {
        J::Num(x)
    }
}

impl From<bool> for J {
    fn from(b: bool) -> Self {
        J::Bool(b)
    }
}

impl From<usize> for J {
    fn from(i: usize) -> Self {
        J::Int(i as i64)
    }
}

impl From<u32> for J {
    fn from(i: u32) -> Self {
        J::Int(i as i64)
    }
}

impl From<u64> for J {
    fn from(i: u64) -> Self {
        J::Int(i as i64)
    }
}

impl From<i64> for J {
    fn from(i: i64) -> Self {
        J::Int(i)
    }
}

impl From<&str> for J {
    fn from(s: &str) -> Self {
        J::Str(s.to_string())
    }
}

impl From<String> for J {
    fn from(s: String) -> Self {
        J::Str(s)
    }
}

impl<T: Into<J>> From<Vec<T>> for J {
    fn from(v: Vec<T>) -> Self {
        J::Arr(v.into_iter().map(Into::into).collect())
    }
}

impl<T: Into<J>> From<Option<T>> for J {
    fn from(v: Option<T>) -> Self {
        v.map_or(J::Null, Into::into)
    }
}

/// Builder for objects that keeps insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Obj(Vec<(String, J)>);

impl Obj {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<J>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<J>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&J> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

impl From<Obj> for J {
    fn from(o: Obj) -> Self {
        J::Obj(o.0)
    }
}

pub fn to_string(value: &J) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}
