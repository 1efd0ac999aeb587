//! Small file helpers shared by the library and the command-line front end:
//! two-column CSV in/out and atomic writes.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Read a two-column numeric CSV, skipping an optional header line.  The
/// first column must be strictly increasing.
pub fn read_two_column_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    parse_two_column_csv(&text)
}

pub fn parse_two_column_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse(format!(
                    "line {}: expected exactly two comma-separated fields",
                    lineno + 1
                )))
            }
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if lineno == 0 => continue, // header
            _ => {
                return Err(Error::Parse(format!(
                    "line {}: could not parse '{a}', '{b}' as numbers",
                    lineno + 1
                )))
            }
        }
    }
    if xs.len() < 2 {
        return Err(Error::Parse("need at least two data rows".into()));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parse(
            "first column must be strictly increasing".into(),
        ));
    }
    Ok((xs, ys))
}

/// Write (x, y) rows with a header, full double precision.
pub fn write_two_column_csv(
    path: &Path,
    header: (&str, &str),
    xs: &[f64],
    ys: &[f64],
) -> Result<()> {
    let mut out = String::with_capacity(32 * xs.len());
    out.push_str(&format!("{},{}\n", header.0, header.1));
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&format!("{x:.16e},{y:.16e}\n"));
    }
    write_atomic(path, out.as_bytes())
}

/// Write via a temporary file in the same directory plus rename, so readers
/// never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().unwrap_or_default().to_string_lossy()
        )),
        None => std::path::PathBuf::from(format!(
            ".{}.tmp",
            path.file_name().unwrap_or_default().to_string_lossy()
        )),
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Pretty-printed JSON with a trailing newline, written atomically.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("serialize: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_and_without_header() {
        let (xs, ys) = parse_two_column_csv("x,value\n0.0,1.0\n0.5,2.0\n").unwrap();
        assert_eq!(xs, vec![0.0, 0.5]);
        assert_eq!(ys, vec![1.0, 2.0]);
        let (xs, _) = parse_two_column_csv("0.0,1.0\n0.5,2.0\n").unwrap();
        assert_eq!(xs.len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_two_column_csv("0.0,1.0\n").is_err()); // too short
        assert!(parse_two_column_csv("0.0,1.0\n0.0,2.0\n").is_err()); // not increasing
        assert!(parse_two_column_csv("0.0,1.0,9\n0.5,2.0,9\n").is_err()); // three columns
        assert!(parse_two_column_csv("0.0,1.0\nfoo,bar\n").is_err()); // bad row past header
    }

    #[test]
    fn round_trip_preserves_doubles() {
        let dir = std::env::temp_dir();
        let path = dir.join("nlkbe_io_round_trip.csv");
        let xs = vec![-1.0, 0.1234567890123456, 2.0 / 3.0];
        let ys = vec![1e-300, std::f64::consts::PI, -4.75];
        write_two_column_csv(&path, ("x", "value"), &xs, &ys).unwrap();
        let (rx, ry) = read_two_column_csv(&path).unwrap();
        assert_eq!(rx, xs);
        assert_eq!(ry, ys);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn atomic_write_replaces_existing() {
        let dir = std::env::temp_dir();
        let path = dir.join("nlkbe_io_atomic.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        std::fs::remove_file(&path).ok();
    }
}
