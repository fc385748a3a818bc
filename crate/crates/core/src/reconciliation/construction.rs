//! Seeded construction of low-rate multi-edge-type LDPC codes.
//!
//! The graph has two edge types. Core variables connect to a small set of
//! core checks (type 1) and to many LDGM checks (type 2). Each LDGM check
//! also owns one private degree-1 variable, so the LDGM part is always full
//! rank and the rate is `1 − (core checks + LDGM checks)/n`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::reconciliation::ldpc::LdpcCode;

/// Node counts and degrees of a two-edge-type ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct MetProfile {
    /// `(count, core degree, LDGM degree)` per core variable class.
    pub core_vars: Vec<(usize, usize, usize)>,
    /// `(count, degree)` per core check class.
    pub core_checks: Vec<(usize, usize)>,
    /// Core-variable edges per LDGM check (the private degree-1 edge excluded).
    pub ldgm_degree: usize,
}

impl MetProfile {
    /// Rate-1/10 profile of the shipped code, `n = 64000`.
    pub fn rate_tenth() -> Self {
        MetProfile {
            core_vars: vec![(4000, 2, 21), (4000, 3, 21)],
            core_checks: vec![(800, 12), (800, 13)],
            ldgm_degree: 3,
        }
    }

    pub fn core_var_count(&self) -> usize {
        self.core_vars.iter().map(|c| c.0).sum()
    }

    pub fn ldgm_checks(&self) -> usize {
        self.core_vars.iter().map(|c| c.0 * c.2).sum::<usize>() / self.ldgm_degree
    }

    pub fn n(&self) -> usize {
        self.core_var_count() + self.ldgm_checks()
    }

    fn validate(&self) -> Result<()> {
        let core_sockets: usize = self.core_vars.iter().map(|c| c.0 * c.1).sum();
        let check_sockets: usize = self.core_checks.iter().map(|c| c.0 * c.1).sum();
        if core_sockets != check_sockets {
            return domain(format!(
                "core edge counts disagree: {core_sockets} variable sockets, {check_sockets} check sockets"
            ));
        }
        let ldgm_sockets: usize = self.core_vars.iter().map(|c| c.0 * c.2).sum();
        if self.ldgm_degree == 0 || ldgm_sockets % self.ldgm_degree != 0 {
            return domain("LDGM sockets do not fill whole checks");
        }
        if self.core_var_count() == 0 {
            return domain("no core variables");
        }
        Ok(())
    }
}

/// Assigns variable sockets to check slots at random, then repairs slots
/// that would attach the same variable twice to one check by swapping with
/// random other slots.
fn match_sockets<R: Rng>(var_sockets: &mut [u32], check_sizes: &[usize], rng: &mut R) -> Vec<Vec<u32>> {
    var_sockets.shuffle(rng);
    let mut starts = Vec::with_capacity(check_sizes.len() + 1);
    starts.push(0);
    for &s in check_sizes {
        starts.push(starts.last().unwrap() + s);
    }
    let check_of = |slot: usize, starts: &[usize]| starts.partition_point(|&s| s <= slot) - 1;
    let has_dup = |sockets: &[u32], c: usize, starts: &[usize]| {
        let slice = &sockets[starts[c]..starts[c + 1]];
        (0..slice.len()).any(|i| slice[..i].contains(&slice[i]))
    };
    for _round in 0..100 {
        let mut clean = true;
        for c in 0..check_sizes.len() {
            let mut attempts = 0;
            while has_dup(var_sockets, c, &starts) && attempts < 10_000 {
                attempts += 1;
                clean = false;
                let slice_start = starts[c];
                let len = check_sizes[c];
                // Find the duplicated slot and swap it elsewhere.
                let dup = (0..len)
                    .find(|&i| var_sockets[slice_start..slice_start + i].contains(&var_sockets[slice_start + i]))
                    .expect("duplicate exists");
                let a = slice_start + dup;
                let b = rng.random_range(0..var_sockets.len());
                let cb = check_of(b, &starts);
                let (va, vb) = (var_sockets[a], var_sockets[b]);
                let fits_b = !var_sockets[starts[cb]..starts[cb + 1]].contains(&va);
                let fits_a = !var_sockets[starts[c]..starts[c + 1]].contains(&vb);
                if cb != c && fits_a && fits_b {
                    var_sockets.swap(a, b);
                }
            }
        }
        if clean {
            break;
        }
    }
    (0..check_sizes.len())
        .map(|c| var_sockets[starts[c]..starts[c + 1]].to_vec())
        .collect()
}

/// True if `v` placed in `check` (in place of `replaced`) would close a
/// 4-cycle: some other variable of `check` already shares a check with `v`.
fn closes_four_cycle(v: u32, check: usize, replaced: u32, checks: &[Vec<u32>], var_checks: &[Vec<u32>]) -> bool {
    var_checks[v as usize].iter().any(|&c| {
        c as usize != check
            && checks[c as usize]
                .iter()
                .any(|&w| w != v && w != replaced && checks[check].contains(&w))
    })
}

/// Moves sockets between checks of the same group until no two checks share
/// two variables, or `rounds` passes have been made. Returns the number of
/// 4-cycles left.
fn remove_four_cycles<R: Rng>(
    checks: &mut [Vec<u32>],
    groups: &[std::ops::Range<usize>],
    n_vars: usize,
    rounds: usize,
    rng: &mut R,
) -> usize {
    let mut var_checks = vec![Vec::new(); n_vars];
    for (c, vars) in checks.iter().enumerate() {
        for &v in vars {
            var_checks[v as usize].push(c as u32);
        }
    }
    let group_of = |c: usize| groups.iter().find(|g| g.contains(&c)).expect("check in a group").clone();
    let mut stamp = vec![usize::MAX; n_vars];
    let mut remaining = 0;
    for _ in 0..rounds {
        // Collect (check, shared variable) for every pair of checks sharing two variables.
        let mut conflicts = Vec::new();
        for c in 0..checks.len() {
            for &v in &checks[c] {
                stamp[v as usize] = c;
            }
            for &v in &checks[c] {
                for &c2 in &var_checks[v as usize] {
                    let c2 = c2 as usize;
                    if c2 <= c {
                        continue;
                    }
                    let shared = checks[c2].iter().filter(|&&w| stamp[w as usize] == c).count();
                    if shared >= 2 {
                        conflicts.push((c2, v));
                    }
                }
            }
        }
        conflicts.sort_unstable();
        conflicts.dedup();
        remaining = conflicts.len();
        if remaining == 0 {
            break;
        }
        for (c, v) in conflicts {
            let Some(a) = checks[c].iter().position(|&w| w == v) else {
                continue;
            };
            let group = group_of(c);
            for _attempt in 0..200 {
                let cb = rng.random_range(group.clone());
                if cb == c {
                    continue;
                }
                let b = rng.random_range(0..checks[cb].len());
                let vb = checks[cb][b];
                if checks[cb].contains(&v) || checks[c].contains(&vb) {
                    continue;
                }
                if closes_four_cycle(v, cb, vb, checks, &var_checks) || closes_four_cycle(vb, c, v, checks, &var_checks) {
                    continue;
                }
                checks[c][a] = vb;
                checks[cb][b] = v;
                let fix = |list: &mut Vec<u32>, from: usize, to: usize| {
                    let i = list.iter().position(|&x| x as usize == from).expect("edge listed");
                    list[i] = to as u32;
                };
                fix(&mut var_checks[v as usize], c, cb);
                fix(&mut var_checks[vb as usize], cb, c);
                break;
            }
        }
    }
    remaining
}

/// Builds a code from `profile`, with 4-cycles removed where the repair
/// succeeds. Core variables come first, then the private
/// degree-1 variables in LDGM-check order; core checks precede LDGM checks.
pub fn met_code(profile: &MetProfile, seed: u64) -> Result<LdpcCode> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut core_sockets = Vec::new();
    let mut ldgm_sockets = Vec::new();
    let mut v = 0u32;
    for &(count, core_deg, ldgm_deg) in &profile.core_vars {
        for _ in 0..count {
            core_sockets.extend(std::iter::repeat_n(v, core_deg));
            ldgm_sockets.extend(std::iter::repeat_n(v, ldgm_deg));
            v += 1;
        }
    }
    let core_sizes: Vec<usize> = profile
        .core_checks
        .iter()
        .flat_map(|&(count, deg)| std::iter::repeat_n(deg, count))
        .collect();
    let ldgm_count = profile.ldgm_checks();
    let ldgm_sizes = vec![profile.ldgm_degree; ldgm_count];

    let mut checks = match_sockets(&mut core_sockets, &core_sizes, &mut rng);
    let core_count = checks.len();
    checks.extend(match_sockets(&mut ldgm_sockets, &ldgm_sizes, &mut rng));
    let groups = [0..core_count, core_count..checks.len()];
    remove_four_cycles(&mut checks, &groups, profile.core_var_count(), 60, &mut rng);
    let mut ldgm = checks.split_off(core_count);
    let first_private = profile.core_var_count() as u32;
    for (i, check) in ldgm.iter_mut().enumerate() {
        check.push(first_private + i as u32);
    }
    checks.extend(ldgm);
    LdpcCode::from_checks(profile.n(), checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MetProfile {
        MetProfile {
            core_vars: vec![(40, 2, 21), (40, 3, 21)],
            core_checks: vec![(8, 12), (8, 13)],
            ldgm_degree: 3,
        }
    }

    #[test]
    fn profile_counts() {
        let p = MetProfile::rate_tenth();
        assert_eq!(p.n(), 64000);
        assert_eq!(p.ldgm_checks(), 56000);
    }

    #[test]
    fn small_code_has_expected_shape() {
        let code = met_code(&small(), 1).unwrap();
        assert_eq!(code.n(), 80 + 560);
        assert_eq!(code.m(), 16 + 560);
        assert_eq!(code.rank(), code.m());
        for (v, checks) in code.var_checks().iter().enumerate() {
            let expected = match v {
                0..40 => 23,
                40..80 => 24,
                _ => 1,
            };
            assert_eq!(checks.len(), expected, "variable {v}");
        }
        assert_eq!(met_code(&small(), 1).unwrap(), code);
    }

    #[test]
    fn no_two_checks_share_two_variables() {
        let profile = MetProfile {
            core_vars: vec![(400, 2, 21), (400, 3, 21)],
            core_checks: vec![(80, 12), (80, 13)],
            ldgm_degree: 3,
        };
        let code = met_code(&profile, 5).unwrap();
        let mut pairs = std::collections::HashSet::new();
        for vars in code.check_vars() {
            for (i, &a) in vars.iter().enumerate() {
                for &b in &vars[i + 1..] {
                    assert!(pairs.insert((a.min(b), a.max(b))), "variables {a} and {b} share two checks");
                }
            }
        }
    }

    #[test]
    fn inconsistent_profile_rejected() {
        let mut p = small();
        p.core_checks[0].0 = 9;
        assert!(met_code(&p, 1).is_err());
    }
}
