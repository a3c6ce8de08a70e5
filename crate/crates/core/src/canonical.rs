//! Canonical JSON: sorted keys, floats rounded to 12 significant digits,
//! non-finite floats written as null and reported by path.

use serde::ser::{self, Serialize};
use serde_json::{Map, Number, Value};

use crate::{Error, Result};

pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().unwrap_or(f64::NAN));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

/// Canonical value plus the paths of any NaN or infinite floats.
pub fn to_canonical_value<T: Serialize>(value: &T) -> Result<(Value, Vec<String>)> {
    let mut found = Vec::new();
    value
        .serialize(Scan { path: String::new(), found: &mut found })
        .map_err(|e| Error::Parse(e.0))?;
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((round_value(v), found))
}

/// Pretty canonical JSON text with a trailing newline. Non-finite floats
/// are appended to a top-level `warnings` array when the value is an object.
pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String> {
    let (mut v, found) = to_canonical_value(value)?;
    if !found.is_empty() {
        if let Value::Object(o) = &mut v {
            let w = o.entry("warnings").or_insert_with(|| Value::Array(Vec::new()));
            if let Value::Array(a) = w {
                a.extend(found.iter().map(|p| Value::String(format!("non-finite value at {p} written as null"))));
            }
        }
    }
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Parse(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug)]
pub struct ScanError(String);

impl std::fmt::Display for ScanError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ScanError {}

impl ser::Error for ScanError {
    fn custom<M: std::fmt::Display>(msg: M) -> Self {
        ScanError(msg.to_string())
    }
}

/// Walks a value and records where non-finite floats sit.
struct Scan<'a> {
    path: String,
    found: &'a mut Vec<String>,
}

impl Scan<'_> {
    fn child(&mut self, seg: &str) -> Scan<'_> {
        let path = if self.path.is_empty() {
            seg.to_string()
        } else if seg.starts_with('[') {
            format!("{}{seg}", self.path)
        } else {
            format!("{}.{seg}", self.path)
        };
        Scan { path, found: self.found }
    }
}

/// Compound state: the parent scanner plus a running element index.
struct ScanSeq<'a> {
    scan: Scan<'a>,
    index: usize,
    key: Option<String>,
}

type R = std::result::Result<(), ScanError>;

impl<'a> ser::Serializer for Scan<'a> {
    type Ok = ();
    type Error = ScanError;
    type SerializeSeq = ScanSeq<'a>;
    type SerializeTuple = ScanSeq<'a>;
    type SerializeTupleStruct = ScanSeq<'a>;
    type SerializeTupleVariant = ScanSeq<'a>;
    type SerializeMap = ScanSeq<'a>;
    type SerializeStruct = ScanSeq<'a>;
    type SerializeStructVariant = ScanSeq<'a>;

    fn serialize_bool(self, _: bool) -> R {
        Ok(())
    }
    fn serialize_i8(self, _: i8) -> R {
        Ok(())
    }
    fn serialize_i16(self, _: i16) -> R {
        Ok(())
    }
    fn serialize_i32(self, _: i32) -> R {
        Ok(())
    }
    fn serialize_i64(self, _: i64) -> R {
        Ok(())
    }
    fn serialize_u8(self, _: u8) -> R {
        Ok(())
    }
    fn serialize_u16(self, _: u16) -> R {
        Ok(())
    }
    fn serialize_u32(self, _: u32) -> R {
        Ok(())
    }
    fn serialize_u64(self, _: u64) -> R {
        Ok(())
    }
    fn serialize_f32(self, v: f32) -> R {
        self.serialize_f64(v as f64)
    }
    fn serialize_f64(self, v: f64) -> R {
        if !v.is_finite() {
            self.found.push(if self.path.is_empty() { "<root>".into() } else { self.path });
        }
        Ok(())
    }
    fn serialize_char(self, _: char) -> R {
        Ok(())
    }
    fn serialize_str(self, _: &str) -> R {
        Ok(())
    }
    fn serialize_bytes(self, _: &[u8]) -> R {
        Ok(())
    }
    fn serialize_none(self) -> R {
        Ok(())
    }
    fn serialize_some<T: ?Sized + Serialize>(self, v: &T) -> R {
        v.serialize(self)
    }
    fn serialize_unit(self) -> R {
        Ok(())
    }
    fn serialize_unit_struct(self, _: &'static str) -> R {
        Ok(())
    }
    fn serialize_unit_variant(self, _: &'static str, _: u32, _: &'static str) -> R {
        Ok(())
    }
    fn serialize_newtype_struct<T: ?Sized + Serialize>(self, _: &'static str, v: &T) -> R {
        v.serialize(self)
    }
    fn serialize_newtype_variant<T: ?Sized + Serialize>(mut self, _: &'static str, _: u32, variant: &'static str, v: &T) -> R {
        v.serialize(self.child(variant))
    }
    fn serialize_seq(self, _: Option<usize>) -> std::result::Result<ScanSeq<'a>, ScanError> {
        Ok(ScanSeq { scan: self, index: 0, key: None })
    }
    fn serialize_tuple(self, _: usize) -> std::result::Result<ScanSeq<'a>, ScanError> {
        self.serialize_seq(None)
    }
    fn serialize_tuple_struct(self, _: &'static str, _: usize) -> std::result::Result<ScanSeq<'a>, ScanError> {
        self.serialize_seq(None)
    }
    fn serialize_tuple_variant(
        self,
        _: &'static str,
        _: u32,
        _: &'static str,
        _: usize,
    ) -> std::result::Result<ScanSeq<'a>, ScanError> {
        self.serialize_seq(None)
    }
    fn serialize_map(self, _: Option<usize>) -> std::result::Result<ScanSeq<'a>, ScanError> {
        self.serialize_seq(None)
    }
    fn serialize_struct(self, _: &'static str, _: usize) -> std::result::Result<ScanSeq<'a>, ScanError> {
        self.serialize_seq(None)
    }
    fn serialize_struct_variant(
        self,
        _: &'static str,
        _: u32,
        _: &'static str,
        _: usize,
    ) -> std::result::Result<ScanSeq<'a>, ScanError> {
        self.serialize_seq(None)
    }
}

impl ScanSeq<'_> {
    fn element<T: ?Sized + Serialize>(&mut self, v: &T) -> R {
        let seg = format!("[{}]", self.index);
        self.index += 1;
        v.serialize(self.scan.child(&seg))
    }

    fn field<T: ?Sized + Serialize>(&mut self, key: &str, v: &T) -> R {
        v.serialize(self.scan.child(key))
    }
}

impl ser::SerializeSeq for ScanSeq<'_> {
    type Ok = ();
    type Error = ScanError;
    fn serialize_element<T: ?Sized + Serialize>(&mut self, v: &T) -> R {
        self.element(v)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeTuple for ScanSeq<'_> {
    type Ok = ();
    type Error = ScanError;
    fn serialize_element<T: ?Sized + Serialize>(&mut self, v: &T) -> R {
        self.element(v)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeTupleStruct for ScanSeq<'_> {
    type Ok = ();
    type Error = ScanError;
    fn serialize_field<T: ?Sized + Serialize>(&mut self, v: &T) -> R {
        self.element(v)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeTupleVariant for ScanSeq<'_> {
    type Ok = ();
    type Error = ScanError;
    fn serialize_field<T: ?Sized + Serialize>(&mut self, v: &T) -> R {
        self.element(v)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeMap for ScanSeq<'_> {
    type Ok = ();
    type Error = ScanError;
    fn serialize_key<T: ?Sized + Serialize>(&mut self, k: &T) -> R {
        self.key = Some(match serde_json::to_value(k) {
            Ok(Value::String(s)) => s,
            Ok(other) => other.to_string(),
            Err(e) => return Err(ScanError(e.to_string())),
        });
        Ok(())
    }
    fn serialize_value<T: ?Sized + Serialize>(&mut self, v: &T) -> R {
        let key = self.key.take().unwrap_or_default();
        self.field(&key, v)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeStruct for ScanSeq<'_> {
    type Ok = ();
    type Error = ScanError;
    fn serialize_field<T: ?Sized + Serialize>(&mut self, key: &'static str, v: &T) -> R {
        self.field(key, v)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeStructVariant for ScanSeq<'_> {
    type Ok = ();
    type Error = ScanError;
    fn serialize_field<T: ?Sized + Serialize>(&mut self, key: &'static str, v: &T) -> R {
        self.field(key, v)
    }
    fn end(self) -> R {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    #[derive(serde::Serialize)]
    struct Fixture {
        zeta: f64,
        alpha: Vec<f64>,
        nested: HashMap<String, Option<f64>>,
    }

    #[test]
    fn sorted_rounded_and_nan_reported() {
        let mut nested = HashMap::new();
        nested.insert("b".to_string(), Some(f64::INFINITY));
        nested.insert("a".to_string(), None);
        let f = Fixture { zeta: 1.0 / 3.0, alpha: vec![0.5, f64::NAN], nested };
        let s = to_canonical_string(&f).unwrap();
        let expect = r#"{
  "alpha": [
    0.5,
    null
  ],
  "nested": {
    "a": null,
    "b": null
  },
  "warnings": [
    "non-finite value at alpha[1] written as null",
    "non-finite value at nested.b written as null"
  ],
  "zeta": 0.333333333333
}
"#;
        assert_eq!(s, expect);
        assert_eq!(to_canonical_string(&f).unwrap(), s);
    }

    #[test]
    fn integers_untouched() {
        let (v, w) = to_canonical_value(&vec![u64::MAX, 3]).unwrap();
        assert!(w.is_empty());
        assert_eq!(v.to_string(), format!("[{},3]", u64::MAX));
    }
}
