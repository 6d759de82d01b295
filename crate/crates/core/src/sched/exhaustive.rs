use std::collections::BTreeSet;

use super::{BeamAssignment, BeamLimits, Direction, RateEvaluator, ScheduleOutcome};
use crate::{ArrayConfig, Error, Result};

/// Largest search space [`exhaustive_schedule`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Number of constraint-satisfying assignments.
pub fn search_space_size(cfg: ArrayConfig, limits: &BeamLimits) -> u128 {
    let m = cfg.m();
    // ways[s]: ordered placements of s distinct BS beams over the UTs seen so far
    let mut ways = vec![0u128; m + 1];
    ways[0] = 1;
    for &lim in &limits.bs_per_ut {
        let mut next = vec![0u128; m + 1];
        for s in 0..=m {
            if ways[s] == 0 {
                continue;
            }
            for n in 0..=lim.min(m - s) {
                next[s + n] = next[s + n].saturating_add(ways[s].saturating_mul(binomial(m - s, n)));
            }
        }
        ways = next;
    }
    let bs: u128 = ways.iter().take(limits.bs_total.min(m) + 1).fold(0, |a, &w| a.saturating_add(w));
    limits.ut_per_ut.iter().fold(bs, |acc, &lim| {
        let subsets = (0..=lim.min(cfg.k())).fold(0u128, |a, j| a.saturating_add(binomial(cfg.k(), j)));
        acc.saturating_mul(subsets)
    })
}

/// Subsets of `0..n` with at most `max` elements, by size then lexicographically.
fn subsets_up_to(n: usize, max: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            extend(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 0..=max.min(n) {
        extend(0, n, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Calls `f` with every BS-beam owner vector (`None` = unused) that meets the
/// limits, in lexicographic order with `None` first.
fn for_each_owner(
    m_count: usize,
    limits: &BeamLimits,
    f: &mut dyn FnMut(&[Option<usize>]) -> Result<()>,
) -> Result<()> {
    fn go(
        owner: &mut Vec<Option<usize>>,
        counts: &mut Vec<usize>,
        used: usize,
        m_count: usize,
        limits: &BeamLimits,
        f: &mut dyn FnMut(&[Option<usize>]) -> Result<()>,
    ) -> Result<()> {
        if owner.len() == m_count {
            return f(owner);
        }
        owner.push(None);
        go(owner, counts, used, m_count, limits, f)?;
        owner.pop();
        if used < limits.bs_total {
            for u in 0..counts.len() {
                if counts[u] < limits.bs_per_ut[u] {
                    counts[u] += 1;
                    owner.push(Some(u));
                    go(owner, counts, used + 1, m_count, limits, f)?;
                    owner.pop();
                    counts[u] -= 1;
                }
            }
        }
        Ok(())
    }
    go(&mut Vec::with_capacity(m_count), &mut vec![0; limits.num_uts()], 0, m_count, limits, f)
}

fn with_bs_owners(direction: Direction, owner: &[Option<usize>], num_uts: usize) -> BeamAssignment {
    let mut a = BeamAssignment::empty(direction, num_uts);
    for (m, o) in owner.iter().enumerate() {
        if let Some(u) = o {
            a.uts[*u].bs_beams.insert(m);
        }
    }
    a
}

/// Exhaustive search over all constraint-satisfying assignments.
///
/// Ties go to the smallest encoding: the BS-beam owner vector first (unused
/// before UT 0 before UT 1, ...), then the UT-beam sets of each UT in index
/// order (smaller sets first, then lexicographic).
///
/// In the DL, UT `u`'s term depends only on its own receive set once the
/// transmit sets are fixed, so each UT's receive set is optimized separately
/// from the evaluator's per-UT rates. This relies on that separability, which
/// holds for the equal-power DL rate.
pub fn exhaustive_schedule<E: RateEvaluator + ?Sized>(
    direction: Direction,
    cfg: ArrayConfig,
    limits: &BeamLimits,
    evaluator: &E,
) -> Result<ScheduleOutcome> {
    let candidates = search_space_size(cfg, limits);
    if candidates > EXHAUSTIVE_LIMIT {
        return Err(Error::SearchSpace { candidates, limit: EXHAUSTIVE_LIMIT });
    }
    let u_count = limits.num_uts();
    if limits.ut_per_ut.len() != u_count {
        return Err(Error::Domain("per-UT limit vectors differ in length".into()));
    }
    let max_ut = limits.ut_per_ut.iter().copied().max().unwrap_or(0);
    let subsets = subsets_up_to(cfg.k(), max_ut);
    let to_set = |v: &Vec<usize>| v.iter().copied().collect::<BTreeSet<usize>>();
    let mut best: Option<(f64, BeamAssignment)> = None;

    match direction {
        Direction::Downlink => for_each_owner(cfg.m(), limits, &mut |owner| {
            let mut a = with_bs_owners(direction, owner, u_count);
            let mut best_rx: Vec<(f64, usize)> = vec![(f64::NEG_INFINITY, 0); u_count];
            for (j, s) in subsets.iter().enumerate() {
                for u in 0..u_count {
                    a.uts[u].ut_beams = if s.len() <= limits.ut_per_ut[u] { to_set(s) } else { BTreeSet::new() };
                }
                let rates = evaluator.evaluate(&a)?.per_ut_rates;
                for u in 0..u_count {
                    if s.len() <= limits.ut_per_ut[u] && rates[u] > best_rx[u].0 {
                        best_rx[u] = (rates[u], j);
                    }
                }
            }
            let total: f64 = best_rx.iter().map(|b| b.0).sum();
            if best.as_ref().is_none_or(|(r, _)| total > *r) {
                for u in 0..u_count {
                    a.uts[u].ut_beams = to_set(&subsets[best_rx[u].1]);
                }
                best = Some((total, a));
            }
            Ok(())
        })?,
        Direction::Uplink => for_each_owner(cfg.m(), limits, &mut |owner| {
            let mut a = with_bs_owners(direction, owner, u_count);
            let allowed: Vec<Vec<usize>> = (0..u_count)
                .map(|u| (0..subsets.len()).filter(|&j| subsets[j].len() <= limits.ut_per_ut[u]).collect())
                .collect();
            let mut idx = vec![0usize; u_count];
            loop {
                for u in 0..u_count {
                    a.uts[u].ut_beams = to_set(&subsets[allowed[u][idx[u]]]);
                }
                let r = evaluator.evaluate(&a)?.sum_rate_bps_hz;
                if best.as_ref().is_none_or(|(b, _)| r > *b) {
                    best = Some((r, a.clone()));
                }
                // odometer with the last UT varying fastest
                let mut u = u_count;
                loop {
                    if u == 0 {
                        return Ok(());
                    }
                    u -= 1;
                    idx[u] += 1;
                    if idx[u] < allowed[u].len() {
                        break;
                    }
                    idx[u] = 0;
                }
            }
        })?,
    }
    let (_, assignment) = best.ok_or_else(|| Error::EmptyAssignment("no feasible assignment".into()))?;
    let final_rate = evaluator.evaluate(&assignment)?.sum_rate_bps_hz;
    Ok(ScheduleOutcome { assignment, phase1_trace: Vec::new(), phase2_trace: Vec::new(), final_rate })
}
