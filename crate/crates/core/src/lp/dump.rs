//! Plain-text LP dump for replaying problems outside the solver.
//!
//! ```text
//! LP 1
//! VARS <n>
//! ROWS <m>
//! OBJ <j> <c>
//! BOUND <j> <lo> <hi>
//! ROW <i> LE|EQ|GE <rhs>
//! A <i> <j> <value>
//! END
//! ```
//!
//! One record per line, fields separated by whitespace, `#` starts a
//! comment. Variables default to cost 0 and bounds `[0, inf)`; every row
//! must be declared. Infinite bounds are written `inf` / `-inf`.

use std::fmt::Write as _;

use super::{Constraint, LinearProgram, Sense};
use crate::error::{Error, Result};

/// Largest variable or row count accepted by [`parse_dump`].
pub const MAX_DIMENSION: usize = 1 << 20;

pub fn write_dump(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "LP 1");
    let _ = writeln!(out, "VARS {}", lp.num_vars());
    let _ = writeln!(out, "ROWS {}", lp.num_constraints());
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            let _ = writeln!(out, "OBJ {j} {c:?}");
        }
    }
    for (j, (&lo, &hi)) in lp.lower.iter().zip(&lp.upper).enumerate() {
        if lo != 0.0 || hi != f64::INFINITY {
            let _ = writeln!(out, "BOUND {j} {lo:?} {hi:?}");
        }
    }
    for (i, row) in lp.constraints.iter().enumerate() {
        let sense = match row.sense {
            Sense::Le => "LE",
            Sense::Eq => "EQ",
            Sense::Ge => "GE",
        };
        let _ = writeln!(out, "ROW {i} {sense} {:?}", row.rhs);
        for &(j, v) in &row.coeffs {
            let _ = writeln!(out, "A {i} {j} {v:?}");
        }
    }
    out.push_str("END\n");
    out
}

pub fn parse_dump(text: &str) -> Result<LinearProgram> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut header = |key: &str| -> Result<usize> {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(format!("missing {key} line")))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 || f[0] != key {
            return Err(Error::parse(format!("line {ln}: expected `{key} <count>`")));
        }
        f[1].parse()
            .map_err(|_| Error::parse(format!("line {ln}: bad count")))
    };
    if header("LP")? != 1 {
        return Err(Error::parse("unsupported dump version"));
    }
    let n = header("VARS")?;
    let m = header("ROWS")?;
    if n > MAX_DIMENSION || m > MAX_DIMENSION {
        return Err(Error::parse(format!(
            "dumps are limited to {MAX_DIMENSION} variables and rows"
        )));
    }

    let mut lp = LinearProgram {
        objective: vec![0.0; n],
        lower: vec![0.0; n],
        upper: vec![f64::INFINITY; n],
        constraints: Vec::with_capacity(m),
    };
    let mut rows: Vec<Option<Constraint>> = vec![None; m];
    let mut ended = false;
    for (ln, line) in lines {
        if ended {
            return Err(Error::parse(format!("line {ln}: content after END")));
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let err = |what: &str| Error::parse(format!("line {ln}: {what}"));
        let idx = |s: &str, limit: usize| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| err("bad index"))?;
            if v >= limit {
                return Err(err("index out of range"));
            }
            Ok(v)
        };
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| err("bad number"))?;
            if v.is_nan() {
                return Err(err("NaN is not allowed"));
            }
            Ok(v)
        };
        match (f[0], f.len()) {
            ("OBJ", 3) => lp.objective[idx(f[1], n)?] = num(f[2])?,
            ("BOUND", 4) => {
                let j = idx(f[1], n)?;
                lp.lower[j] = num(f[2])?;
                lp.upper[j] = num(f[3])?;
            }
            ("ROW", 4) => {
                let i = idx(f[1], m)?;
                let sense = match f[2] {
                    "LE" => Sense::Le,
                    "EQ" => Sense::Eq,
                    "GE" => Sense::Ge,
                    _ => return Err(err("sense must be LE, EQ or GE")),
                };
                if rows[i].is_some() {
                    return Err(err("row declared twice"));
                }
                rows[i] = Some(Constraint {
                    coeffs: Vec::new(),
                    sense,
                    rhs: num(f[3])?,
                });
            }
            ("A", 4) => {
                let i = idx(f[1], m)?;
                let j = idx(f[2], n)?;
                let v = num(f[3])?;
                rows[i]
                    .as_mut()
                    .ok_or_else(|| err("coefficient before its ROW line"))?
                    .coeffs
                    .push((j, v));
            }
            ("END", 1) => ended = true,
            _ => return Err(err("unrecognized record")),
        }
    }
    if !ended {
        return Err(Error::parse("missing END"));
    }
    for (i, row) in rows.into_iter().enumerate() {
        lp.constraints
            .push(row.ok_or_else(|| Error::parse(format!("row {i} never declared")))?);
    }
    lp.validate()?;
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LinearProgram {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.5, 0.0, 4.0);
        let y = lp.add_var(-0.1, f64::NEG_INFINITY, f64::INFINITY);
        let z = lp.add_var(0.0, 0.0, f64::INFINITY);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0 / 3.0)], Sense::Le, 2.0);
        lp.add_constraint(vec![(y, -2.0), (z, 1e-300)], Sense::Eq, 0.1);
        lp.add_constraint(vec![], Sense::Ge, -1.0);
        lp
    }

    #[test]
    fn round_trip_is_exact() {
        let lp = sample();
        let text = write_dump(&lp);
        assert_eq!(parse_dump(&text).unwrap(), lp);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# demo\nLP 1\n\nVARS 1\nROWS 1 # one row\nOBJ 0 2\nROW 0 LE 3\nA 0 0 1\nEND\n";
        let lp = parse_dump(text).unwrap();
        assert_eq!(lp.objective, vec![2.0]);
        assert_eq!(lp.constraints[0].coeffs, vec![(0, 1.0)]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "LP 2\nVARS 0\nROWS 0\nEND",
            "LP 1\nVARS 1\nROWS 0\nOBJ 1 1\nEND",
            "LP 1\nVARS 1\nROWS 1\nEND",
            "LP 1\nVARS 1\nROWS 1\nA 0 0 1\nROW 0 LE 1\nEND",
            "LP 1\nVARS 1\nROWS 1\nROW 0 XX 1\nEND",
            "LP 1\nVARS 1\nROWS 0\nBOUND 0 2 1\nEND",
            "LP 1\nVARS 1\nROWS 0\nOBJ 0 NaN\nEND",
            "LP 1\nVARS 0\nROWS 0\nEND\nVARS 1",
            "LP 1\nVARS 0\nROWS 0",
            "LP 1\nVARS 99999999999\nROWS 0\nEND",
            "LP 1\nVARS 1048577\nROWS 0\nEND",
        ] {
            assert!(parse_dump(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn defaults_need_no_records() {
        let text = "# comment\nLP 1\nVARS 77\nROWS 1\nOBJ 2 3\nROW 0 EQ 0\nA 0 1 -1\nEND\n";
        let lp = parse_dump(text).unwrap();
        assert_eq!(lp.num_vars(), 77);
        let again = write_dump(&lp);
        assert!(again.len() < 77);
        assert_eq!(parse_dump(&again).unwrap(), lp);
    }
}
