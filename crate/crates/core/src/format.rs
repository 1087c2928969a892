//! Text formats for tables, arrangements and witness certificates.
//!
//! Sign tables: a `p=<int>` line, then `2^p` bits as hex. Bit `t` is set when
//! `f(theta_t) = -1`. Bits are packed LSB-first: character `i` holds bits
//! `4i..4i+3` with bit `4i` in its least significant position. Unused bits of
//! the last character must be zero.
//!
//! Real tables: a `p=<int>` line, then one value per line.
//!
//! Arrangements: a `m=<int> n=<int>` line, then `n` lines of `m` values.
//!
//! Certificates: a `p=<int> d=<int> epsilon=<value>` line (optionally followed
//! by `margin=` and `residual=`), then `[h]` and `[fprime]` sections holding
//! real tables.
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::arrangements::Arrangement;
use crate::cube::{check_dim, FunctionTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::witness::WitnessCertificate;

/// Content lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses `key=value` pairs separated by whitespace, requiring `required`.
fn parse_header(line_no: usize, line: &str, required: &[&str]) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(line_no, format!("expected key=value, found `{tok}`")))?;
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::parse(line_no, format!("repeated key `{k}`")));
        }
    }
    for key in required {
        if !out.contains_key(*key) {
            return Err(Error::parse(line_no, format!("missing `{key}=`")));
        }
    }
    Ok(out)
}

fn header_usize(line_no: usize, h: &HashMap<String, String>, key: &str) -> Result<usize> {
    h[key]
        .parse()
        .map_err(|_| Error::parse(line_no, format!("`{key}` must be a nonnegative integer, found `{}`", h[key])))
}

fn parse_value<S: Scalar>(line_no: usize, tok: &str) -> Result<S> {
    S::parse_scalar(tok).ok_or_else(|| Error::parse(line_no, format!("cannot parse `{tok}` as a number")))
}

fn parse_p_header(line_no: usize, line: &str) -> Result<usize> {
    let h = parse_header(line_no, line, &["p"])?;
    if h.len() != 1 {
        return Err(Error::parse(line_no, "expected a single `p=<int>` header"));
    }
    let p = header_usize(line_no, &h, "p")?;
    check_dim(p)?;
    Ok(p)
}

/// Hex encoding of the sign bits, LSB-first within each character.
pub fn encode_sign_hex(signs: &[i8]) -> String {
    signs
        .chunks(4)
        .map(|chunk| {
            let nibble = chunk
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &s)| acc | (u32::from(s < 0) << i));
            char::from_digit(nibble, 16).expect("nibble below 16")
        })
        .collect()
}

/// Inverse of [`encode_sign_hex`] for a table of `len` entries.
pub fn decode_sign_hex(hex: &str, len: usize) -> std::result::Result<Vec<i8>, String> {
    let expected = len.div_ceil(4);
    if hex.len() != expected {
        return Err(format!("expected {expected} hex digits, found {}", hex.len()));
    }
    let mut signs = Vec::with_capacity(len);
    for (i, c) in hex.chars().enumerate() {
        let nibble = c.to_digit(16).ok_or_else(|| format!("`{c}` is not a hex digit"))?;
        for b in 0..4 {
            let idx = 4 * i + b;
            let set = nibble >> b & 1 == 1;
            if idx < len {
                signs.push(if set { -1 } else { 1 });
            } else if set {
                return Err(format!("padding bit {idx} is set"));
            }
        }
    }
    Ok(signs)
}

pub fn write_sign_table<S: Scalar>(f: &FunctionTable<S>) -> Result<String> {
    let signs = f.require_signs()?;
    Ok(format!("p={}\n{}\n", f.p(), encode_sign_hex(&signs)))
}

pub fn parse_sign_table<S: Scalar>(text: &str) -> Result<FunctionTable<S>> {
    let mut lines = content_lines(text);
    let (n0, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let p = parse_p_header(n0, header)?;
    let (n1, hex) = lines
        .next()
        .ok_or_else(|| Error::parse(n0 + 1, "missing hex line"))?;
    if let Some((n, _)) = lines.next() {
        return Err(Error::parse(n, "unexpected content after the hex line"));
    }
    let signs = decode_sign_hex(hex, 1 << p).map_err(|m| Error::parse(n1, m))?;
    FunctionTable::from_signs(p, &signs)
}

pub fn write_real_table<S: Scalar>(f: &FunctionTable<S>) -> String {
    let mut out = format!("p={}\n", f.p());
    for v in f.values() {
        let _ = writeln!(out, "{}", v.to_text());
    }
    out
}

fn parse_real_lines<'a, S: Scalar>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    after: usize,
) -> Result<FunctionTable<S>> {
    let (n0, header) = lines.next().ok_or_else(|| Error::parse(after + 1, "missing `p=` header"))?;
    let p = parse_p_header(n0, header)?;
    let mut values = Vec::with_capacity(1 << p);
    let mut last = n0;
    for _ in 0..1usize << p {
        let (n, tok) = lines
            .next()
            .ok_or_else(|| Error::parse(last + 1, format!("expected {} values", 1usize << p)))?;
        values.push(parse_value(n, tok)?);
        last = n;
    }
    FunctionTable::new(p, values)
}

pub fn parse_real_table<S: Scalar>(text: &str) -> Result<FunctionTable<S>> {
    let mut lines = content_lines(text);
    let f = parse_real_lines(&mut lines, 0)?;
    if let Some((n, _)) = lines.next() {
        return Err(Error::parse(n, "unexpected content after the table"));
    }
    Ok(f)
}

/// Accepts either a hex sign table or a real table, telling them apart by
/// the number of content lines.
pub fn parse_table<S: Scalar>(text: &str) -> Result<FunctionTable<S>> {
    if content_lines(text).count() == 2 {
        if let Ok(f) = parse_sign_table(text) {
            return Ok(f);
        }
    }
    parse_real_table(text)
}

pub fn write_arrangement<S: Scalar>(arr: &Arrangement<S>) -> String {
    let mut out = format!("m={} n={}\n", arr.ambient_dim(), arr.len());
    for row in arr.normals() {
        let line: Vec<String> = row.iter().map(Scalar::to_text).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn parse_arrangement<S: Scalar>(text: &str) -> Result<Arrangement<S>> {
    let mut lines = content_lines(text);
    let (n0, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let h = parse_header(n0, header, &["m", "n"])?;
    if h.len() != 2 {
        return Err(Error::parse(n0, "expected `m=<int> n=<int>`"));
    }
    let m = header_usize(n0, &h, "m")?;
    let n = header_usize(n0, &h, "n")?;
    let mut normals = Vec::with_capacity(n);
    for (line_no, line) in lines {
        let row = line
            .split_whitespace()
            .map(|tok| parse_value(line_no, tok))
            .collect::<Result<Vec<S>>>()?;
        if row.len() != m {
            return Err(Error::parse(line_no, format!("expected {m} entries, found {}", row.len())));
        }
        if normals.len() == n {
            return Err(Error::parse(line_no, format!("more than {n} normals")));
        }
        normals.push(row);
    }
    if normals.len() != n {
        return Err(Error::parse(n0, format!("header announces {n} normals, found {}", normals.len())));
    }
    Arrangement::new(m, normals)
}

pub fn write_certificate<S: Scalar>(cert: &WitnessCertificate<S>) -> String {
    let mut out = format!(
        "p={} d={} epsilon={} margin={} residual={}\n",
        cert.p,
        cert.d,
        cert.epsilon.to_text(),
        cert.margin.to_text(),
        cert.low_freq_residual.to_text()
    );
    out.push_str("[h]\n");
    out.push_str(&write_real_table(&cert.h));
    out.push_str("[fprime]\n");
    out.push_str(&write_real_table(&cert.fprime));
    out
}

/// Reads a certificate. `margin` and `residual` are informational; when
/// absent they default to zero. Verification recomputes both.
pub fn parse_certificate<S: Scalar>(text: &str) -> Result<WitnessCertificate<S>> {
    let mut lines = content_lines(text);
    let (n0, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let h = parse_header(n0, header, &["p", "d", "epsilon"])?;
    if let Some(k) = h
        .keys()
        .find(|k| !["p", "d", "epsilon", "margin", "residual"].contains(&k.as_str()))
    {
        return Err(Error::parse(n0, format!("unknown key `{k}`")));
    }
    let p = header_usize(n0, &h, "p")?;
    let d = header_usize(n0, &h, "d")?;
    check_dim(p)?;
    if d > p {
        return Err(Error::parse(n0, format!("d={d} exceeds p={p}")));
    }
    let epsilon = parse_value(n0, &h["epsilon"])?;
    let opt = |key: &str| -> Result<S> {
        h.get(key).map_or_else(|| Ok(S::zero()), |v| parse_value(n0, v))
    };
    let margin = opt("margin")?;
    let low_freq_residual = opt("residual")?;

    let mut section = |name: &str, after: usize| -> Result<(FunctionTable<S>, usize)> {
        let (n, tag) = lines
            .next()
            .ok_or_else(|| Error::parse(after + 1, format!("missing `[{name}]` section")))?;
        if tag != format!("[{name}]") {
            return Err(Error::parse(n, format!("expected `[{name}]`, found `{tag}`")));
        }
        let t = parse_real_lines(&mut lines, n)?;
        if t.p() != p {
            return Err(Error::parse(n, format!("`[{name}]` has p={}, header has p={p}", t.p())));
        }
        let end = n + t.len() + 1;
        Ok((t, end))
    };
    let (h_table, end) = section("h", n0)?;
    let (fprime, _) = section("fprime", end)?;
    if let Some((n, _)) = lines.next() {
        return Err(Error::parse(n, "unexpected content after the certificate"));
    }
    Ok(WitnessCertificate {
        p,
        d,
        h: h_table,
        epsilon,
        fprime,
        margin,
        low_freq_residual,
    })
}
