//! Insertion-ordered JSON documents with fixed numeric formatting.
//!
//! Output files are meant to be diffed: identical runs must serialize
//! byte-identically, so keys keep insertion order, floats always print
//! 17 significant digits, and arbitrary-precision values ship as decimal
//! strings rather than lossy doubles.

use crate::family::Valuation;
use crate::Rat;
use rug::Float;
use std::fmt::Write as _;

#[derive(Clone, Debug)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) {
        match self {
            Json::Obj(entries) => entries.push((key.to_string(), value)),
            _ => panic!("push only extends objects"),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(v) => {
                let _ = write!(out, "{v}");
            }
            Json::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Json::Num(v) => {
                let _ = write!(out, "{v:.16e}");
            }
            Json::Str(s) => write_escaped(out, s),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    item.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push(']');
            }
            Json::Obj(entries) => {
                if entries.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (key, value)) in entries.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    write_escaped(out, key);
                    out.push_str(": ");
                    value.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push('}');
            }
        }
    }
}

fn push_indent(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn write_escaped(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// 17 significant digits; infinities and NaN become strings, since JSON
/// has no token for them.
pub fn num(x: f64) -> Json {
    if x.is_finite() {
        Json::Num(x)
    } else {
        Json::Str(format!("{x}"))
    }
}

pub fn str(s: impl Into<String>) -> Json {
    Json::Str(s.into())
}

/// Exact rational as "p/q" (or a bare integer when q = 1).
pub fn rat(r: &Rat) -> Json {
    Json::Str(r.to_string())
}

pub fn valuation(v: &Valuation) -> Json {
    Json::Str(v.to_string())
}

/// Full-precision decimal of an arbitrary-precision float. Degeneration
/// data overflows f64 by thousands of orders of magnitude, so these ship
/// as strings.
pub fn big(f: &Float) -> Json {
    Json::Str(fmt_big(f))
}

pub fn fmt_big(f: &Float) -> String {
    format!("{f:.17e}")
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}
