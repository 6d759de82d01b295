use serde::{Deserialize, Serialize};

use super::{BeamAssignment, BeamLimits, Direction, RateEvaluator};
use crate::channel::beam_norms;
use crate::{Error, PowerMatrix, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOutcome {
    pub assignment: BeamAssignment,
    /// Best rate after each accepted BS-beam step.
    pub phase1_trace: Vec<f64>,
    /// Best rate after each accepted UT-beam step.
    pub phase2_trace: Vec<f64>,
    /// Evaluated rate of `assignment`.
    pub final_rate: f64,
}

/// Visiting order of the greedy search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateOrder {
    /// `(u, m)` pairs by decreasing `ω^bs_{u,m}`, ties by `(u, m)`.
    pub bs: Vec<(usize, usize)>,
    /// Per UT, beams `k` by decreasing `ω^ut_{u,k}`, ties by `k`.
    pub ut: Vec<Vec<usize>>,
}

pub fn candidate_order(omegas: &[PowerMatrix]) -> CandidateOrder {
    let norms: Vec<_> = omegas.iter().map(beam_norms).collect();
    let mut bs: Vec<(usize, usize)> =
        norms.iter().enumerate().flat_map(|(u, (b, _))| (0..b.len()).map(move |m| (u, m))).collect();
    bs.sort_by(|&(u1, m1), &(u2, m2)| {
        norms[u2].0[m2].total_cmp(&norms[u1].0[m1]).then((u1, m1).cmp(&(u2, m2)))
    });
    let ut = norms
        .iter()
        .map(|(_, w)| {
            let mut ks: Vec<usize> = (0..w.len()).collect();
            ks.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
            ks
        })
        .collect();
    CandidateOrder { bs, ut }
}

fn check_inputs(omegas: &[PowerMatrix], limits: &BeamLimits) -> Result<(usize, usize)> {
    let first = omegas.first().ok_or_else(|| Error::Domain("greedy scheduling needs at least one UT".into()))?;
    let (k, m) = (first.k(), first.m());
    if omegas.iter().any(|o| o.k() != k || o.m() != m) {
        return Err(Error::Domain("all power matrices must share one shape".into()));
    }
    if limits.num_uts() != omegas.len() || limits.ut_per_ut.len() != omegas.len() {
        return Err(Error::Domain(format!("limits cover {} UTs, got {} power matrices", limits.num_uts(), omegas.len())));
    }
    Ok((k, m))
}

fn greedy<E: RateEvaluator + ?Sized>(
    direction: Direction,
    omegas: &[PowerMatrix],
    limits: &BeamLimits,
    evaluator: &E,
) -> Result<ScheduleOutcome> {
    let (k_count, m_count) = check_inputs(omegas, limits)?;
    let u_count = omegas.len();
    let order = candidate_order(omegas);
    let mut a = BeamAssignment::empty(direction, u_count);

    // Phase 1: BS beams, with every UT beam active.
    for b in &mut a.uts {
        b.ut_beams = (0..k_count).collect();
    }
    let mut excluded = vec![false; u_count * m_count];
    let mut num_excluded = 0;
    let exclude = |excluded: &mut Vec<bool>, num_excluded: &mut usize, u: usize, m: usize| {
        if !std::mem::replace(&mut excluded[u * m_count + m], true) {
            *num_excluded += 1;
        }
    };
    for u in (0..u_count).filter(|&u| limits.bs_per_ut[u] == 0) {
        (0..m_count).for_each(|m| exclude(&mut excluded, &mut num_excluded, u, m));
    }
    let mut rate = 0.0;
    let mut phase1_trace = Vec::new();
    let mut cursor = 0;
    while limits.bs_total > 0 && num_excluded < u_count * m_count {
        while excluded[order.bs[cursor].0 * m_count + order.bs[cursor].1] {
            cursor += 1;
        }
        let (u, m) = order.bs[cursor];
        a.uts[u].bs_beams.insert(m);
        let r = evaluator.evaluate(&a)?.sum_rate_bps_hz;
        if r > rate {
            rate = r;
            phase1_trace.push(rate);
            if a.total_bs_beams() >= limits.bs_total {
                break;
            }
            if a.uts[u].bs_beams.len() >= limits.bs_per_ut[u] {
                (0..m_count).for_each(|mm| exclude(&mut excluded, &mut num_excluded, u, mm));
            }
            (0..u_count).for_each(|uu| exclude(&mut excluded, &mut num_excluded, uu, m));
        } else {
            a.uts[u].bs_beams.remove(&m);
            exclude(&mut excluded, &mut num_excluded, u, m);
        }
    }

    // Phase 2: UT beams, one UT at a time.
    for b in &mut a.uts {
        b.ut_beams.clear();
    }
    rate = 0.0;
    let mut phase2_trace = Vec::new();
    for u in 0..u_count {
        if limits.ut_per_ut[u] == 0 {
            continue;
        }
        for &k in &order.ut[u] {
            a.uts[u].ut_beams.insert(k);
            let r = evaluator.evaluate(&a)?.sum_rate_bps_hz;
            if r > rate {
                rate = r;
                phase2_trace.push(rate);
            } else {
                a.uts[u].ut_beams.remove(&k);
            }
            if a.uts[u].ut_beams.len() >= limits.ut_per_ut[u] {
                break;
            }
        }
    }
    Ok(ScheduleOutcome { assignment: a, phase1_trace, phase2_trace, final_rate: rate })
}

/// Norm-based greedy DL scheduling: BS transmit beams first (all receive beams
/// active), then receive beams per UT.
pub fn greedy_schedule_dl<E: RateEvaluator + ?Sized>(
    omegas: &[PowerMatrix],
    limits: &BeamLimits,
    evaluator: &E,
) -> Result<ScheduleOutcome> {
    greedy(Direction::Downlink, omegas, limits, evaluator)
}

/// UL variant: BS receive beams are allocated disjointly first (all UT
/// transmit beams active), then UT transmit beams per UT.
pub fn greedy_schedule_ul<E: RateEvaluator + ?Sized>(
    omegas: &[PowerMatrix],
    limits: &BeamLimits,
    evaluator: &E,
) -> Result<ScheduleOutcome> {
    greedy(Direction::Uplink, omegas, limits, evaluator)
}
