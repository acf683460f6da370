//! JSON report serialization.
//!
//! Floats are written as `{:.16e}` so that reports are byte-stable and every
//! double survives a round trip. Non-finite values become the strings
//! `"inf"`, `"-inf"` and `"nan"`, which JSON cannot express as numbers.

use std::io;

use finsler_core::Tensor;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

struct FloatFormatter<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FloatFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Pretty-printed report text, with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FloatFormatter(PrettyFormatter::with_indent(b"  ")));
    serde::Serialize::serialize(v, &mut ser).expect("serializing a Value into memory cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

/// Adds `name` to `data` as a flat row-major array and its shape to `shapes`.
pub fn put_tensor(data: &mut Map<String, Value>, shapes: &mut Map<String, Value>, name: &str, t: &Tensor<f64>) {
    data.insert(name.into(), nums(t.data()));
    shapes.insert(name.into(), json!(t.shape()));
}
