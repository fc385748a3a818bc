//! Sparse parity-check matrices and the alist file format.

use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Binary linear code given by a sparse parity-check matrix `H` (`m × n`).
#[derive(Debug, Clone)]
pub struct LdpcCode {
    n: usize,
    /// Checks attached to each variable.
    var_checks: Vec<Vec<u32>>,
    /// Variables attached to each check.
    check_vars: Vec<Vec<u32>>,
    /// SNR at which the code is meant to operate, if known.
    design_snr: Option<f64>,
    rank: OnceLock<usize>,
}

impl PartialEq for LdpcCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.check_vars == other.check_vars && self.design_snr == other.design_snr
    }
}

impl LdpcCode {
    /// Builds a code from the variable lists of each check.
    pub fn from_checks(n: usize, check_vars: Vec<Vec<u32>>) -> Result<Self> {
        if n == 0 || check_vars.is_empty() {
            return Err(Error::Empty("parity-check matrix"));
        }
        let mut var_checks = vec![Vec::new(); n];
        for (c, vars) in check_vars.iter().enumerate() {
            if vars.is_empty() {
                return Err(Error::Format(format!("check {c} has no variables")));
            }
            for &v in vars {
                let v = v as usize;
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, size: n });
                }
                if var_checks[v].last() == Some(&(c as u32)) {
                    return Err(Error::Format(format!("check {c} lists variable {v} twice")));
                }
                var_checks[v].push(c as u32);
            }
        }
        if let Some(v) = var_checks.iter().position(Vec::is_empty) {
            return Err(Error::Format(format!("variable {v} is not attached to any check")));
        }
        Ok(LdpcCode {
            n,
            var_checks,
            check_vars,
            design_snr: None,
            rank: OnceLock::new(),
        })
    }

    pub fn with_design_snr(mut self, snr: f64) -> Self {
        self.design_snr = Some(snr);
        self
    }

    pub fn design_snr(&self) -> Option<f64> {
        self.design_snr
    }

    /// Number of variables (code length).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks (syndrome length).
    pub fn m(&self) -> usize {
        self.check_vars.len()
    }

    pub fn check_vars(&self) -> &[Vec<u32>] {
        &self.check_vars
    }

    pub fn var_checks(&self) -> &[Vec<u32>] {
        &self.var_checks
    }

    pub fn edges(&self) -> usize {
        self.check_vars.iter().map(Vec::len).sum()
    }

    /// GF(2) rank of `H`.
    pub fn rank(&self) -> usize {
        *self.rank.get_or_init(|| gf2_rank(self.n, &self.check_vars))
    }

    /// `1 − rank(H)/n`.
    pub fn rate(&self) -> f64 {
        1.0 - self.rank() as f64 / self.n as f64
    }

    /// `H·bits` over GF(2); bits are 0/1 bytes.
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: bits.len(),
            });
        }
        Ok(self
            .check_vars
            .iter()
            .map(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (bits[v as usize] & 1)))
            .collect())
    }

    /// Parses MacKay's alist format: 1-based indices, one adjacency list
    /// per line, with or without trailing zero padding.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next_line = |what: &str| -> Result<Vec<usize>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("alist: unexpected end while reading {what}")))?;
            line.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| Error::Format(format!("alist: bad integer {t:?}"))))
                .collect()
        };
        let header = next_line("n m")?;
        let maxima = next_line("maximum degrees")?;
        let (&[n, m], &[max_col, max_row]) = (header.as_slice(), maxima.as_slice()) else {
            return Err(Error::Format("alist: malformed header".into()));
        };
        let col_deg = next_line("column degrees")?;
        let row_deg = next_line("row degrees")?;
        if col_deg.len() != n || row_deg.len() != m {
            return Err(Error::Format("alist: degree list length disagrees with the header".into()));
        }
        if col_deg.iter().any(|&d| d > max_col) || row_deg.iter().any(|&d| d > max_row) {
            return Err(Error::Format("alist: degree exceeds declared maximum".into()));
        }
        let mut read_lists = |degrees: &[usize], bound: usize, what: &str| -> Result<Vec<Vec<u32>>> {
            degrees
                .iter()
                .map(|&d| {
                    let entries = next_line(what)?;
                    if entries.len() < d || entries[d..].iter().any(|&z| z != 0) {
                        return Err(Error::Format(format!("alist: {what} entry has the wrong length")));
                    }
                    entries[..d]
                        .iter()
                        .map(|&idx| {
                            if idx == 0 || idx > bound {
                                Err(Error::Format(format!("alist: index {idx} out of range in {what}")))
                            } else {
                                Ok(idx as u32 - 1)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        // Column lists are redundant with the row lists; read and cross-check them.
        let col_lists = read_lists(&col_deg, m, "column lists")?;
        let check_vars = read_lists(&row_deg, n, "row lists")?;
        let code = Self::from_checks(n, check_vars)?;
        for (v, list) in col_lists.iter().enumerate() {
            let mut a = list.clone();
            let mut b = code.var_checks[v].clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(Error::Format(format!("alist: column {v} disagrees with the row lists")));
            }
        }
        Ok(code)
    }

    /// Writes the alist representation, without zero padding.
    pub fn to_alist(&self) -> String {
        let max_col = self.var_checks.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.check_vars.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let join = |list: &[u32]| list.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{} {}", self.n, self.m());
        let _ = writeln!(out, "{max_col} {max_row}");
        let degs = |lists: &[Vec<u32>]| lists.iter().map(|l| l.len().to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "{}", degs(&self.var_checks));
        let _ = writeln!(out, "{}", degs(&self.check_vars));
        for list in &self.var_checks {
            let _ = writeln!(out, "{}", join(list));
        }
        for list in &self.check_vars {
            let _ = writeln!(out, "{}", join(list));
        }
        out
    }
}

/// Rank over GF(2). Rows owning a column that no other remaining row touches
/// are independent of the rest and are peeled off first; the residual is
/// eliminated densely.
fn gf2_rank(n: usize, rows: &[Vec<u32>]) -> usize {
    let m = rows.len();
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (r, vars) in rows.iter().enumerate() {
        for &v in vars {
            col_rows[v as usize].push(r as u32);
        }
    }
    let mut col_count: Vec<usize> = col_rows.iter().map(Vec::len).collect();
    let mut alive = vec![true; m];
    let mut rank = 0;
    let mut stack: Vec<usize> = (0..n).filter(|&c| col_count[c] == 1).collect();
    while let Some(c) = stack.pop() {
        if col_count[c] != 1 {
            continue;
        }
        let Some(&r) = col_rows[c].iter().find(|&&r| alive[r as usize]) else {
            continue;
        };
        let r = r as usize;
        alive[r] = false;
        rank += 1;
        for &v in &rows[r] {
            let v = v as usize;
            col_count[v] -= 1;
            if col_count[v] == 1 {
                stack.push(v);
            }
        }
    }

    // Dense elimination of what is left, columns restricted to those still in use.
    let residual: Vec<usize> = (0..m).filter(|&r| alive[r]).collect();
    if residual.is_empty() {
        return rank;
    }
    let mut col_index = vec![usize::MAX; n];
    let mut width = 0;
    for &r in &residual {
        for &v in &rows[r] {
            if col_index[v as usize] == usize::MAX {
                col_index[v as usize] = width;
                width += 1;
            }
        }
    }
    let words = width.div_ceil(64);
    let mut mat: Vec<Vec<u64>> = residual
        .iter()
        .map(|&r| {
            let mut row = vec![0u64; words];
            for &v in &rows[r] {
                let c = col_index[v as usize];
                row[c / 64] ^= 1 << (c % 64);
            }
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..width {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (pivot_row..mat.len()).find(|&i| mat[i][w] & bit != 0) else {
            continue;
        };
        mat.swap(pivot_row, p);
        let pivot = mat[pivot_row].clone();
        for (i, row) in mat.iter_mut().enumerate() {
            if i != pivot_row && row[w] & bit != 0 {
                for (a, b) in row.iter_mut().zip(&pivot).skip(w) {
                    *a ^= b;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == mat.len() {
            break;
        }
    }
    rank + pivot_row
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming() -> LdpcCode {
        // [7,4] Hamming code.
        LdpcCode::from_checks(7, vec![vec![0, 1, 2, 4], vec![0, 1, 3, 5], vec![0, 2, 3, 6]]).unwrap()
    }

    #[test]
    fn hamming_rate_and_syndromes() {
        let h = hamming();
        assert_eq!(h.rank(), 3);
        assert!((h.rate() - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(h.syndrome(&[0; 7]).unwrap(), vec![0, 0, 0]);
        assert_eq!(h.syndrome(&[1, 1, 1, 0, 1, 0, 1]).unwrap().len(), 3);
        // 1110000 + parity (x0+x1+x2, x0+x1+x3, x0+x2+x3) = (1, 0, 0).
        assert_eq!(h.syndrome(&[1, 1, 1, 0, 1, 0, 0]).unwrap(), vec![0, 0, 0]);
        assert!(h.syndrome(&[0; 6]).is_err());
    }

    #[test]
    fn dependent_rows_lower_the_rank() {
        let code = LdpcCode::from_checks(4, vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![2, 3]]).unwrap();
        assert_eq!(code.rank(), 3);
        assert!((code.rate() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn alist_round_trip() {
        let h = hamming().with_design_snr(1.0);
        let text = h.to_alist();
        let back = LdpcCode::from_alist(&text).unwrap().with_design_snr(1.0);
        assert_eq!(back, h);
        assert!(LdpcCode::from_alist("7 3\n").is_err());
    }

    #[test]
    fn padded_alist_accepted() {
        let padded = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";
        let code = LdpcCode::from_alist(padded).unwrap();
        assert_eq!(code.check_vars(), &[vec![0, 1], vec![1, 2]]);
        let bad = "3 2\n2 2\n1 2 1\n2 2\n1 3\n1 2\n2 0\n1 2\n2 3\n";
        assert!(LdpcCode::from_alist(bad).is_err());
    }

    #[test]
    fn construction_errors() {
        assert!(LdpcCode::from_checks(3, vec![vec![0, 1]]).is_err());
        assert!(LdpcCode::from_checks(2, vec![vec![0, 5]]).is_err());
        assert!(LdpcCode::from_checks(2, vec![vec![0, 0, 1]]).is_err());
    }
}
