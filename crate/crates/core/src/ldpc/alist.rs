//! MacKay alist import and export of the parity-check matrix.
//!
//! Column indices are in natural order; the transmission order is rebuilt
//! from the check list on import.

use std::fmt::Write as _;

use super::LdpcCode;
use crate::{Error, Result};

fn join(xs: impl Iterator<Item = usize>) -> String {
    xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Renders the parity-check matrix as alist text.
pub fn write_alist(code: &LdpcCode) -> String {
    let n = code.n();
    let m = code.num_checks();
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, c) in code.checks().iter().enumerate() {
        for &v in c {
            cols[v].push(r);
        }
    }
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = code.checks().iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{n} {m}");
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(out, "{}", join(cols.iter().map(Vec::len)));
    let _ = writeln!(out, "{}", join(code.checks().iter().map(Vec::len)));
    for c in &cols {
        let pad = std::iter::repeat_n(0, max_col - c.len());
        let _ = writeln!(out, "{}", join(c.iter().map(|r| r + 1).chain(pad)));
    }
    for c in code.checks() {
        let pad = std::iter::repeat_n(0, max_row - c.len());
        let _ = writeln!(out, "{}", join(c.iter().map(|v| v + 1).chain(pad)));
    }
    out
}

/// Parses alist text. The row lists define the checks; the column lists
/// are cross-checked against them.
pub fn read_alist(text: &str) -> Result<LdpcCode> {
    let bad = |msg: &str| Error::Alist(msg.to_string());
    let mut nums = text.split_whitespace().map(|t| t.parse::<usize>().map_err(|_| bad("non-integer token")));
    let mut next = || nums.next().unwrap_or_else(|| Err(bad("unexpected end of input")));
    let n = next()?;
    let m = next()?;
    let max_col = next()?;
    let max_row = next()?;
    let col_deg = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let row_deg = (0..m).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let mut cols = Vec::with_capacity(n);
    for &d in &col_deg {
        let entries = (0..max_col).map(|_| next()).collect::<Result<Vec<_>>>()?;
        if d > max_col || entries[..d].iter().any(|&r| r == 0 || r > m) {
            return Err(bad("column entry out of range"));
        }
        let mut c: Vec<usize> = entries[..d].iter().map(|r| r - 1).collect();
        c.sort_unstable();
        cols.push(c);
    }
    let mut checks = Vec::with_capacity(m);
    for &d in &row_deg {
        let entries = (0..max_row).map(|_| next()).collect::<Result<Vec<_>>>()?;
        if d > max_row || entries[..d].iter().any(|&v| v == 0 || v > n) {
            return Err(bad("row entry out of range"));
        }
        checks.push(entries[..d].iter().map(|v| v - 1).collect::<Vec<usize>>());
    }
    let mut from_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, c) in checks.iter().enumerate() {
        for &v in c {
            from_rows[v].push(r);
        }
    }
    if from_rows != cols {
        return Err(bad("column and row lists disagree"));
    }
    LdpcCode::from_checks(n, checks, vec![0..m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::tests::paper_code;

    #[test]
    fn round_trip_preserves_code() {
        let code = paper_code();
        let text = write_alist(code);
        let back = read_alist(&text).unwrap();
        assert_eq!(back.n(), code.n());
        assert_eq!(back.checks(), code.checks());
        assert_eq!(back.dimension(), code.dimension());
        let info: Vec<u8> = (0..code.k()).map(|i| (i * 7 % 3 == 0) as u8).collect();
        assert_eq!(back.encode(&info).unwrap(), code.encode(&info).unwrap());
        assert_eq!(write_alist(&back), text);
    }

    #[test]
    fn small_matrix_layout() {
        // Checks {0,1}, {1,2} on 4 bits (bit 3 unchecked).
        let code = LdpcCode::from_checks(4, vec![vec![0, 1], vec![1, 2]], vec![0..2]).unwrap();
        let text = write_alist(&code);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "4 2");
        assert_eq!(lines[1], "2 2");
        assert_eq!(lines[2], "1 2 1 0");
        assert_eq!(lines[3], "2 2");
        assert_eq!(lines[5], "1 2");
        assert_eq!(lines[7], "0 0");
        assert_eq!(lines[8], "1 2");
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_alist("").is_err());
        assert!(read_alist("2 1\n1 2\n1 1\n2\n1\n1\n1 3\n").is_err());
        // Column list claims bit 1 is unchecked while the row uses it.
        assert!(read_alist("2 1\n1 2\n1 0\n2\n1\n0\n1 2\n").is_err());
    }
}
