use std::str::FromStr;

/// A list of sample points given on the command line.
///
/// Accepted forms: `lo:hi:n` (evenly spaced, endpoints included),
/// `lo:hi:n:log` (logarithmically spaced), a comma-separated list, or a
/// single number.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl Grid {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn number(text: &str) -> Result<f64, String> {
    let v: f64 = text.trim().parse().map_err(|_| format!("`{text}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(v)
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("grid has no points".into());
        }
        if !s.contains(':') {
            return s.split(',').map(number).collect::<Result<Vec<_>, _>>().map(Grid);
        }
        let parts: Vec<&str> = s.split(':').collect();
        let log = match parts.as_slice() {
            [_, _, _] => false,
            [_, _, _, "log"] => true,
            _ => return Err(format!("expected lo:hi:n or lo:hi:n:log, got `{s}`")),
        };
        let (lo, hi) = (number(parts[0])?, number(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a point count", parts[2]))?;
        if n == 0 {
            return Err("grid has no points".into());
        }
        if !log {
            return Ok(Grid(cvqkd::states::linspace(lo, hi, n)));
        }
        if !(lo > 0.0 && hi > 0.0) {
            return Err("a logarithmic grid needs positive endpoints".into());
        }
        let exps = cvqkd::states::linspace(lo.log10(), hi.log10(), n);
        Ok(Grid(exps.into_iter().map(|e| 10f64.powf(e)).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!("0:10:3".parse::<Grid>().unwrap().0, vec![0.0, 5.0, 10.0]);
        assert_eq!("0.1, 0.2".parse::<Grid>().unwrap().0, vec![0.1, 0.2]);
        assert_eq!("7".parse::<Grid>().unwrap().0, vec![7.0]);
        let log = "0.01:100:5:log".parse::<Grid>().unwrap().0;
        assert!((log[2] - 1.0).abs() < 1e-12 && (log[4] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_empty_and_malformed() {
        for bad in ["", "0:100:0", "0:1", "a,b", "0:1:2:lin", "0:1:5:log", "1,,2"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }
}
