//! JSON and CSV writers.
//!
//! Floating-point numbers are written in scientific notation with 17
//! significant digits, enough to round-trip every `f64`.

use std::io::{self, Write};

use ptwg_core::transverse::ModeBasis;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Pretty JSON formatter that prints `f64` as `{:.16e}`.
pub struct FullPrecision<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for FullPrecision<'_> {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.inner.$name(w $(, $arg)*)
            }
        )*
    };
}

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
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

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> anyhow::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut w, FullPrecision::default());
    value.serialize(&mut ser)?;
    writeln!(w)?;
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write_json(value, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

/// Mode table with columns `j,mu,re_a,im_a`.
pub fn write_mode_table<W: Write>(basis: &ModeBasis, w: W) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["j", "mu", "re_a", "im_a"])?;
    for m in &basis.modes {
        out.write_record([
            m.j.to_string(),
            fmt_f64(m.mu),
            fmt_f64(m.a.re),
            fmt_f64(m.a.im),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        x: f64,
        v: Vec<f64>,
        n: usize,
    }

    #[test]
    fn seventeen_digits() {
        let s = to_json_string(&Sample {
            x: 0.1,
            v: vec![1.0 / 3.0, -2.5e-300],
            n: 3,
        })
        .unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("3.3333333333333331e-1"));
        assert!(s.contains("-2.5000000000000000e-300"));
        assert!(s.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
        assert_eq!(back["v"][0].as_f64(), Some(1.0 / 3.0));
    }
}
