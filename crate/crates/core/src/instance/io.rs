//! Plain-text instance format.
//!
//! ```text
//! n K m
//! i j w1 … wK      (m lines, 0-based vertices)
//! ```
//!
//! Integer-valued weights are written verbatim, everything else with 17
//! significant digits so that a save/load round trip is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::MultiObjectiveInstance;
use crate::error::{Error, Result};
use crate::io::write_atomic;

/// Full-precision text form of a real: integers verbatim, otherwise `{:.16e}`.
pub fn format_real(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 9.007_199_254_740_992e15 && !(w == 0.0 && w.is_sign_negative())
    {
        format!("{}", w as i64)
    } else {
        format!("{w:.16e}")
    }
}

pub fn write_instance(instance: &MultiObjectiveInstance) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{} {} {}",
        instance.n(),
        instance.k(),
        instance.num_edges()
    )
    .unwrap();
    for (e, &(i, j)) in instance.edges().iter().enumerate() {
        write!(out, "{i} {j}").unwrap();
        for &w in instance.edge_weights(e) {
            write!(out, " {}", format_real(w)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_instance(text: &str) -> Result<MultiObjectiveInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, k, m] = fields.as_slice() else {
        return Err(Error::parse(
            hline,
            format!("malformed header {header:?}; expected `n K m`"),
        ));
    };
    let parse_usize = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(hline, format!("malformed header: bad {what} {s:?}")))
    };
    let (n, k, m) = (
        parse_usize(n, "n")?,
        parse_usize(k, "K")?,
        parse_usize(m, "m")?,
    );
    if n == 0 || k == 0 {
        return Err(Error::parse(
            hline,
            "malformed header: n and K must be positive",
        ));
    }

    let mut edges = Vec::with_capacity(m);
    let mut seen = std::collections::HashSet::with_capacity(m);
    for (lineno, line) in lines {
        if edges.len() == m {
            return Err(Error::parse(
                lineno,
                format!("more than the declared {m} edges"),
            ));
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 {
            return Err(Error::parse(lineno, "expected `i j w1 … wK`"));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad vertex index {:?}", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad vertex index {:?}", fields[1])))?;
        let w = fields[2..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|w| w.is_finite())
                    .ok_or_else(|| Error::parse(lineno, format!("bad weight {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        MultiObjectiveInstance::check_edge(n, k, i, j, w.len())
            .map_err(|msg| Error::parse(lineno, msg))?;
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::parse(lineno, format!("duplicate edge ({i}, {j})")));
        }
        edges.push((i, j, w));
    }
    if edges.len() != m {
        return Err(Error::parse(
            hline,
            format!("header declares {m} edges but file has {}", edges.len()),
        ));
    }
    MultiObjectiveInstance::new(n, k, edges)
}

/// Writes via a temporary sibling file and renames it into place.
pub fn save_instance(instance: &MultiObjectiveInstance, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), write_instance(instance).as_bytes())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<MultiObjectiveInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_uniform_instance, WeightSpec};

    #[test]
    fn round_trip_is_bit_exact() {
        let g = generate_uniform_instance(20, 0.6, 4, WeightSpec::Real { lo: -3.0, hi: 7.0 }, 11)
            .unwrap();
        let back = parse_instance(&write_instance(&g)).unwrap();
        assert_eq!(back, g);

        let g = generate_uniform_instance(20, 0.6, 4, WeightSpec::default(), 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        save_instance(&g, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), g);
    }

    #[test]
    fn integers_written_verbatim() {
        assert_eq!(format_real(7.0), "7");
        assert_eq!(format_real(-3.0), "-3");
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(
            format_real(-0.0).parse::<f64>().unwrap().to_bits(),
            (-0.0f64).to_bits()
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_instance("4 3 1\n3 3 1 2 3\n").unwrap_err();
        assert!(
            matches!(&err, Error::Parse { line: 2, message } if message.contains("self-loop")),
            "{err}"
        );

        let err = parse_instance("4 3 2\n0 1 1 2 3\n1 2 1 2\n").unwrap_err();
        assert!(matches!(&err, Error::Parse { line: 3, .. }), "{err}");

        let err = parse_instance("4 3 1\n0 9 1 2 3\n").unwrap_err();
        assert!(
            matches!(&err, Error::Parse { line: 2, message } if message.contains("out of range"))
        );

        assert!(matches!(
            parse_instance("4 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_instance("4 3 2\n0 1 1 1 1\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("4 2 2\n0 1 1 1\n1 0 2 2\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
