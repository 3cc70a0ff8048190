// SPDX-License-Identifier: Apache-2.0

//! JSON writing with a fixed real-number format.
//!
//! Every `f64` is written as a plain decimal (never exponent notation) using
//! the shortest representation that parses back to the same bits, padded with
//! trailing zeros to at least nine significant digits. Readers must parse
//! with correct rounding (`serde_json`'s `float_roundtrip` feature) for the
//! bits to survive.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;

/// Minimum number of significant digits for any written real.
pub const MIN_SIGNIFICANT_DIGITS: usize = 9;

/// Formats a finite real as described in the module docs.
///
/// ```
/// assert_eq!(verigate::json::format_real(0.5), "0.500000000");
/// assert_eq!(verigate::json::format_real(1.0), "1.00000000");
/// assert_eq!(verigate::json::format_real(0.1234567891234), "0.1234567891234");
/// ```
pub fn format_real(value: f64) -> String {
    let mut text = format!("{value}");
    if !value.is_finite() {
        return text;
    }
    let significant = significant_digits(&text);
    if significant < MIN_SIGNIFICANT_DIGITS {
        if !text.contains('.') {
            text.push('.');
        }
        text.extend(std::iter::repeat_n('0', MIN_SIGNIFICANT_DIGITS - significant));
    }
    text
}

fn significant_digits(text: &str) -> usize {
    let digits: Vec<u8> = text.bytes().filter(u8::is_ascii_digit).collect();
    match digits.iter().position(|&d| d != b'0') {
        Some(first) => digits.len() - first,
        // zero: the single leading digit counts
        None => 1,
    }
}

fn write_real<W: ?Sized + Write>(writer: &mut W, value: f64) -> io::Result<()> {
    writer.write_all(format_real(value).as_bytes())
}

/// Compact single-line formatter used for the line-delimited dataset format.
#[derive(Debug, Default, Clone, Copy)]
pub struct LineFormatter;

impl Formatter for LineFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write_real(writer, value)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write_real(writer, f64::from(value))
    }
}

/// Indented formatter used for reports and policy documents.
#[derive(Debug, Default)]
pub struct DocumentFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for DocumentFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write_real(writer, value)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write_real(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serializes `value` on a single line (no trailing newline).
pub fn to_line<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, LineFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Serializes `value` as an indented document with a trailing newline.
pub fn to_document<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, DocumentFormatter::default());
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}
