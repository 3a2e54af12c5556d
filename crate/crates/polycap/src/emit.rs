//! Deterministic serialization: rationals as "num/den" strings, floats with
//! 17 significant digits, and fixed-column CSV writers.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;

use crate::{Error, Rat};

/// Serde adapter storing a rational as the string "num/den".
pub mod rat_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::rat_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rat(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for vectors of rationals.
pub mod rat_vec_serde {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(super::rat_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        strings
            .iter()
            .map(|s| super::parse_rat(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

pub fn rat_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num.trim()).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let den = BigInt::from_str(den.trim()).map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if den == BigInt::from(0) {
        return Err("zero denominator".to_string());
    }
    Ok(Rat::new(num, den))
}

/// 17 significant digits, locale-free; round-trips every f64.
pub fn f64_string(x: f64) -> String {
    format!("{x:.16e}")
}

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(f64_string(value).as_bytes())
    }
}

/// JSON with deterministic float formatting and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::computation(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::computation(e.to_string()))
}

pub fn from_json<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, Error> {
    serde_json::from_str(s).map_err(|e| Error::validation(format!("bad JSON input: {e}")))
}

/// CSV rows (p, k, num, den) of a coefficient table.
pub fn coeff_table_csv(table: &crate::symbol::CoeffTable) -> String {
    let mut out = String::from("p,k,num,den\n");
    for (p, row) in table.rows.iter().enumerate() {
        for (k, c) in row.coeffs.iter().enumerate() {
            let _ = writeln!(out, "{p},{k},{},{}", c.numer(), c.denom());
        }
    }
    out
}

/// CSV rows (t, value) of a sampled function.
pub fn grid_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("t,h\n");
    for (t, v) in samples {
        let _ = writeln!(out, "{},{}", f64_string(*t), f64_string(*v));
    }
    out
}

/// CSV rows (p, cap) of per-mode capacities.
pub fn per_mode_csv(result: &crate::capacity::CapacityResult) -> String {
    let mut out = String::from("p,cap\n");
    for (p, cap) in &result.per_mode {
        let _ = writeln!(out, "{p},{}", f64_string(*cap));
    }
    out
}

/// CSV rows (j, cap, term, partial_sum) of a Wiener-type series.
pub fn wiener_csv(series: &crate::wiener::WienerSeries) -> String {
    let mut out = String::from("j,cap,term,partial_sum\n");
    for row in &series.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.j,
            f64_string(row.cap),
            f64_string(row.term),
            f64_string(row.partial_sum)
        );
    }
    out
}

/// Writes to the path, or stdout when the path is "-".
pub fn write_output(path: &str, content: &str) -> Result<(), Error> {
    if path == "-" {
        use std::io::Write;
        std::io::stdout().write_all(content.as_bytes())?;
        Ok(())
    } else {
        std::fs::write(path, content)?;
        Ok(())
    }
}
