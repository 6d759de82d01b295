use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{BeamAssignment, BeamLimits, Direction, LinkBudget, RateEstimate};
use crate::channel::space_channel_dl;
use crate::{cis, log2_det_hermitian, ArrayConfig, BeamTransform, CMatrix, Error, RaySet, Result, UtProfile};

/// Source of per-UT beam-domain channel realizations.
pub trait ChannelSampler: Sync {
    fn num_uts(&self) -> usize;

    fn config(&self) -> ArrayConfig;

    /// One realization per UT: `K × M` for the DL, `M × K` for the UL.
    fn sample(&self, direction: Direction, rng: &mut ChaCha8Rng) -> Vec<CMatrix>;
}

/// Beam-domain approximation with fixed rays and fresh uniform phases per
/// realization. Entry `(k, m)` is `Σ √p·exp(jζ)` over the rays in that cell,
/// which has the law of the synchronized effective channel on any subcarrier.
#[derive(Debug, Clone)]
pub struct ApproxSampler {
    cfg: ArrayConfig,
    cells: Vec<Vec<(usize, usize, f64)>>,
}

impl ApproxSampler {
    pub fn new(rays: &[RaySet], cfg: ArrayConfig) -> Self {
        let cells = rays
            .iter()
            .map(|set| {
                set.iter()
                    .filter(|r| r.power > 0.0)
                    .map(|r| {
                        let (k, m) = cfg.cell_of(r);
                        (k, m, r.amplitude())
                    })
                    .collect()
            })
            .collect();
        Self { cfg, cells }
    }
}

impl ChannelSampler for ApproxSampler {
    fn num_uts(&self) -> usize {
        self.cells.len()
    }

    fn config(&self) -> ArrayConfig {
        self.cfg
    }

    fn sample(&self, direction: Direction, rng: &mut ChaCha8Rng) -> Vec<CMatrix> {
        self.cells
            .iter()
            .map(|cells| {
                let mut g = CMatrix::zeros(self.cfg.k(), self.cfg.m());
                for &(k, m, a) in cells {
                    g[(k, m)] += a * cis(rng.random_range(0.0..TAU));
                }
                match direction {
                    Direction::Downlink => g,
                    Direction::Uplink => g.transpose(),
                }
            })
            .collect()
    }
}

/// Exact DFT-transformed channel `V_Kᴴ G V_M* / √(KM)` with fresh phases per
/// realization. Unlike [`ApproxSampler`] it includes leakage between beams.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    cfg: ArrayConfig,
    profiles: Vec<UtProfile>,
    transform: BeamTransform,
}

impl ExactSampler {
    pub fn new(profiles: Vec<UtProfile>, cfg: ArrayConfig) -> Self {
        Self { cfg, profiles, transform: BeamTransform::new(cfg) }
    }
}

impl ChannelSampler for ExactSampler {
    fn num_uts(&self) -> usize {
        self.profiles.len()
    }

    fn config(&self) -> ArrayConfig {
        self.cfg
    }

    fn sample(&self, direction: Direction, rng: &mut ChaCha8Rng) -> Vec<CMatrix> {
        let scale = 1.0 / ((self.cfg.k() * self.cfg.m()) as f64).sqrt();
        self.profiles
            .iter()
            .map(|p| {
                let p = p.with_rays(p.rays.redraw_phases(rng));
                let g = self.transform.to_beam_dl(&space_channel_dl(&p, 0.0, 0.0, self.cfg)).scale(scale);
                match direction {
                    Direction::Downlink => g,
                    Direction::Uplink => g.transpose(),
                }
            })
            .collect()
    }
}

/// The same DL-oriented (`K × M`) channels in every realization.
#[derive(Debug, Clone)]
pub struct FixedSampler {
    cfg: ArrayConfig,
    channels: Vec<CMatrix>,
}

impl FixedSampler {
    pub fn new(channels: Vec<CMatrix>) -> Result<Self> {
        let first = channels.first().ok_or_else(|| Error::Domain("need at least one UT channel".into()))?;
        let (k, m) = first.shape();
        if channels.iter().any(|g| g.shape() != (k, m)) {
            return Err(Error::Domain("all UT channels must share one shape".into()));
        }
        Ok(Self { cfg: ArrayConfig::new(m, k)?, channels })
    }
}

impl ChannelSampler for FixedSampler {
    fn num_uts(&self) -> usize {
        self.channels.len()
    }

    fn config(&self) -> ArrayConfig {
        self.cfg
    }

    fn sample(&self, direction: Direction, _rng: &mut ChaCha8Rng) -> Vec<CMatrix> {
        match direction {
            Direction::Downlink => self.channels.clone(),
            Direction::Uplink => self.channels.iter().map(|g| g.transpose()).collect(),
        }
    }
}

/// Objective used by the schedulers.
pub trait RateEvaluator {
    fn evaluate(&self, assignment: &BeamAssignment) -> Result<RateEstimate>;
}

impl<F> RateEvaluator for F
where
    F: Fn(&BeamAssignment) -> Result<RateEstimate>,
{
    fn evaluate(&self, assignment: &BeamAssignment) -> Result<RateEstimate> {
        self(assignment)
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn estimate(per_trial: Vec<Vec<f64>>, num_uts: usize) -> RateEstimate {
    let n = per_trial.len();
    let mut per_ut = vec![0.0; num_uts];
    let mut sums = Vec::with_capacity(n);
    for rates in &per_trial {
        for (acc, r) in per_ut.iter_mut().zip(rates) {
            *acc += r;
        }
        sums.push(rates.iter().sum::<f64>());
    }
    per_ut.iter_mut().for_each(|r| *r /= n as f64);
    let mean = sums.iter().sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        (sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    RateEstimate { sum_rate_bps_hz: per_ut.iter().sum(), per_ut_rates: per_ut, num_trials: n, std_error }
}

fn submatrix(g: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| g[(rows[i], cols[j])])
}

/// `I + Σ c·A·Aᴴ` over the given blocks.
fn regularized_gram(n: usize, blocks: impl IntoIterator<Item = (f64, CMatrix)>) -> CMatrix {
    let mut s = CMatrix::identity(n, n);
    for (c, a) in blocks {
        if a.ncols() > 0 {
            s += (&a * a.adjoint()).scale(c);
        }
    }
    s
}

fn rates_dl(g: &[CMatrix], a: &BeamAssignment, rho: f64, interference_free: bool) -> Vec<f64> {
    let total = a.total_bs_beams();
    let u_count = a.num_uts();
    if total == 0 {
        return vec![0.0; u_count];
    }
    let c = rho / total as f64;
    let tx: Vec<Vec<usize>> = (0..u_count).map(|u| a.tx_beams(u).iter().copied().collect()).collect();
    (0..u_count)
        .map(|u| {
            let rx: Vec<usize> = a.rx_beams(u).iter().copied().collect();
            if rx.is_empty() || tx[u].is_empty() {
                return 0.0;
            }
            let own = submatrix(&g[u], &rx, &tx[u]);
            if interference_free {
                return log2_det_hermitian(&regularized_gram(rx.len(), [(c, own)]));
            }
            let others: Vec<usize> =
                (0..u_count).filter(|&v| v != u).flat_map(|v| tx[v].iter().copied()).collect();
            let other = submatrix(&g[u], &rx, &others);
            let interf = regularized_gram(rx.len(), [(c, other)]);
            let full = &interf + (&own * own.adjoint()).scale(c);
            log2_det_hermitian(&full) - log2_det_hermitian(&interf)
        })
        .collect()
}

fn rates_ul(g: &[CMatrix], a: &BeamAssignment, budgets: &[LinkBudget], interference_free: bool) -> Vec<f64> {
    let u_count = a.num_uts();
    let tx: Vec<Vec<usize>> = (0..u_count).map(|u| a.tx_beams(u).iter().copied().collect()).collect();
    (0..u_count)
        .map(|u| {
            let rx: Vec<usize> = a.rx_beams(u).iter().copied().collect();
            if rx.is_empty() || tx[u].is_empty() {
                return 0.0;
            }
            let block = |v: usize| (budgets[v].snr_linear / tx[v].len() as f64, submatrix(&g[v], &rx, &tx[v]));
            if interference_free {
                return log2_det_hermitian(&regularized_gram(rx.len(), [block(u)]));
            }
            let interf =
                regularized_gram(rx.len(), (0..u_count).filter(|&v| v != u && !tx[v].is_empty()).map(block));
            let (c, own) = block(u);
            let full = &interf + (&own * own.adjoint()).scale(c);
            log2_det_hermitian(&full) - log2_det_hermitian(&interf)
        })
        .collect()
}

fn check(a: &BeamAssignment, direction: Direction, num_uts: usize, cfg: ArrayConfig, trials: usize) -> Result<()> {
    if a.direction != direction {
        return Err(Error::Mode(format!("expected a {direction:?} assignment, got {:?}", a.direction)));
    }
    if a.num_uts() != num_uts {
        return Err(Error::Constraint(format!("assignment has {} UTs, channel has {num_uts}", a.num_uts())));
    }
    if trials == 0 {
        return Err(Error::Domain("number of trials must be positive".into()));
    }
    a.validate(&BeamLimits::unlimited(num_uts, cfg), cfg)
}

fn check_budgets(budgets: &[LinkBudget], num_uts: usize) -> Result<()> {
    if budgets.len() != num_uts {
        return Err(Error::Domain(format!("{} UL budgets for {num_uts} UTs", budgets.len())));
    }
    Ok(())
}

fn run<S: ChannelSampler + ?Sized>(
    sampler: &S,
    direction: Direction,
    trials: usize,
    seed: u64,
    rates: impl Fn(&[CMatrix]) -> Vec<f64> + Sync,
) -> RateEstimate {
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| rates(&sampler.sample(direction, &mut trial_rng(seed, t))))
        .collect();
    estimate(per_trial, sampler.num_uts())
}

/// DL ergodic sum rate with equal power over all scheduled BS beams.
pub fn sum_rate_dl<S: ChannelSampler + ?Sized>(
    sampler: &S,
    assignment: &BeamAssignment,
    budget: &LinkBudget,
    num_trials: usize,
    seed: u64,
) -> Result<RateEstimate> {
    check(assignment, Direction::Downlink, sampler.num_uts(), sampler.config(), num_trials)?;
    Ok(run(sampler, Direction::Downlink, num_trials, seed, |g| rates_dl(g, assignment, budget.snr_linear, false)))
}

/// DL rate with inter-user interference removed from both determinants.
pub fn interference_free_rate<S: ChannelSampler + ?Sized>(
    sampler: &S,
    assignment: &BeamAssignment,
    budget: &LinkBudget,
    num_trials: usize,
    seed: u64,
) -> Result<RateEstimate> {
    check(assignment, Direction::Downlink, sampler.num_uts(), sampler.config(), num_trials)?;
    Ok(run(sampler, Direction::Downlink, num_trials, seed, |g| rates_dl(g, assignment, budget.snr_linear, true)))
}

/// UL ergodic sum rate; UT `u` splits `ρ_u` equally over its transmit beams.
pub fn sum_rate_ul<S: ChannelSampler + ?Sized>(
    sampler: &S,
    assignment: &BeamAssignment,
    budgets: &[LinkBudget],
    num_trials: usize,
    seed: u64,
) -> Result<RateEstimate> {
    check(assignment, Direction::Uplink, sampler.num_uts(), sampler.config(), num_trials)?;
    check_budgets(budgets, sampler.num_uts())?;
    Ok(run(sampler, Direction::Uplink, num_trials, seed, |g| rates_ul(g, assignment, budgets, false)))
}

/// UL rate with inter-user interference removed.
pub fn interference_free_rate_ul<S: ChannelSampler + ?Sized>(
    sampler: &S,
    assignment: &BeamAssignment,
    budgets: &[LinkBudget],
    num_trials: usize,
    seed: u64,
) -> Result<RateEstimate> {
    check(assignment, Direction::Uplink, sampler.num_uts(), sampler.config(), num_trials)?;
    check_budgets(budgets, sampler.num_uts())?;
    Ok(run(sampler, Direction::Uplink, num_trials, seed, |g| rates_ul(g, assignment, budgets, true)))
}

/// Realizations drawn once and reused, so repeated evaluations inside a
/// scheduler share common random numbers. Draws match the streaming functions
/// for the same seed.
#[derive(Debug, Clone)]
pub struct SampledChannels {
    direction: Direction,
    cfg: ArrayConfig,
    num_uts: usize,
    draws: Vec<Vec<CMatrix>>,
}

impl SampledChannels {
    pub fn draw<S: ChannelSampler + ?Sized>(sampler: &S, direction: Direction, num_trials: usize, seed: u64) -> Result<Self> {
        if num_trials == 0 {
            return Err(Error::Domain("number of trials must be positive".into()));
        }
        let draws =
            (0..num_trials).into_par_iter().map(|t| sampler.sample(direction, &mut trial_rng(seed, t))).collect();
        Ok(Self { direction, cfg: sampler.config(), num_uts: sampler.num_uts(), draws })
    }

    pub fn num_trials(&self) -> usize {
        self.draws.len()
    }

    fn eval(&self, a: &BeamAssignment, rates: impl Fn(&[CMatrix]) -> Vec<f64> + Sync) -> Result<RateEstimate> {
        check(a, self.direction, self.num_uts, self.cfg, self.draws.len())?;
        let per_trial = self.draws.par_iter().map(|g| rates(g)).collect();
        Ok(estimate(per_trial, self.num_uts))
    }

    pub fn sum_rate_dl(&self, a: &BeamAssignment, budget: &LinkBudget) -> Result<RateEstimate> {
        self.eval(a, |g| rates_dl(g, a, budget.snr_linear, false))
    }

    pub fn interference_free_dl(&self, a: &BeamAssignment, budget: &LinkBudget) -> Result<RateEstimate> {
        self.eval(a, |g| rates_dl(g, a, budget.snr_linear, true))
    }

    pub fn sum_rate_ul(&self, a: &BeamAssignment, budgets: &[LinkBudget]) -> Result<RateEstimate> {
        check_budgets(budgets, self.num_uts)?;
        self.eval(a, |g| rates_ul(g, a, budgets, false))
    }

    pub fn interference_free_ul(&self, a: &BeamAssignment, budgets: &[LinkBudget]) -> Result<RateEstimate> {
        check_budgets(budgets, self.num_uts)?;
        self.eval(a, |g| rates_ul(g, a, budgets, true))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use num_complex::Complex64;

    use super::*;
    use crate::sched::UtBeams;
    use crate::Ray;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_channels_give_zero_rate() {
        let s = FixedSampler::new(vec![CMatrix::zeros(2, 3); 2]).unwrap();
        let mut a = BeamAssignment::empty(Direction::Downlink, 2);
        a.uts[0] = UtBeams { bs_beams: set(&[0, 1]), ut_beams: set(&[0, 1]) };
        a.uts[1] = UtBeams { bs_beams: set(&[2]), ut_beams: set(&[1]) };
        let r = sum_rate_dl(&s, &a, &LinkBudget::from_snr_db(20.0), 4, 1).unwrap();
        assert_eq!(r.sum_rate_bps_hz, 0.0);
        let mut ul = BeamAssignment::empty(Direction::Uplink, 2);
        ul.uts = a.uts.clone();
        let r = sum_rate_ul(&s, &ul, &[LinkBudget::from_snr_db(20.0); 2], 4, 1).unwrap();
        assert_eq!(r.sum_rate_bps_hz, 0.0);
    }

    #[test]
    fn empty_assignment_gives_zero_rate() {
        let s = FixedSampler::new(vec![CMatrix::from_element(2, 2, c(1.0, 0.0))]).unwrap();
        let a = BeamAssignment::empty(Direction::Downlink, 1);
        assert_eq!(sum_rate_dl(&s, &a, &LinkBudget::from_snr_db(0.0), 3, 0).unwrap().sum_rate_bps_hz, 0.0);
    }

    #[test]
    fn single_scalar_link() {
        let g = c(0.6, -0.3);
        let s = FixedSampler::new(vec![CMatrix::from_element(1, 1, g)]).unwrap();
        let budget = LinkBudget::from_snr_db(7.0);
        let expected = (1.0 + budget.snr_linear * g.norm_sqr()).log2();
        let mut a = BeamAssignment::empty(Direction::Downlink, 1);
        a.uts[0] = UtBeams { bs_beams: set(&[0]), ut_beams: set(&[0]) };
        let r = sum_rate_dl(&s, &a, &budget, 3, 0).unwrap();
        assert!((r.sum_rate_bps_hz - expected).abs() < 1e-12);
        assert_eq!(r.std_error, 0.0);
        a.direction = Direction::Uplink;
        let r = sum_rate_ul(&s, &a, &[budget], 3, 0).unwrap();
        assert!((r.sum_rate_bps_hz - expected).abs() < 1e-12);
    }

    /// `log2 det` of a Hermitian positive definite 2×2 or 1×1 matrix, written out.
    fn log2_det_small(m: &[[Complex64; 2]; 2], n: usize) -> f64 {
        match n {
            1 => m[0][0].re.log2(),
            2 => (m[0][0] * m[1][1] - m[0][1] * m[1][0]).re.log2(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn two_ut_instance_matches_hand_rolled_oracle() {
        let g0 = CMatrix::from_row_slice(2, 2, &[c(0.9, 0.1), c(0.2, -0.4), c(-0.3, 0.5), c(1.1, 0.0)]);
        let g1 = CMatrix::from_row_slice(2, 2, &[c(0.4, 0.4), c(-0.7, 0.2), c(0.1, 0.0), c(0.5, -0.8)]);
        let s = FixedSampler::new(vec![g0.clone(), g1.clone()]).unwrap();
        let rho = 5.0;
        let mut a = BeamAssignment::empty(Direction::Downlink, 2);
        a.uts[0] = UtBeams { bs_beams: set(&[0]), ut_beams: set(&[0, 1]) };
        a.uts[1] = UtBeams { bs_beams: set(&[1]), ut_beams: set(&[1]) };
        let got = sum_rate_dl(&s, &a, &LinkBudget { snr_linear: rho, noise_power: 1.0 }, 2, 9).unwrap();

        // UT 0 receives on both beams; its signal is column 0, interference column 1.
        let cc = rho / 2.0;
        let mut full = [[c(0.0, 0.0); 2]; 2];
        let mut intf = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                let s0 = g0[(i, 0)] * g0[(j, 0)].conj();
                let s1 = g0[(i, 1)] * g0[(j, 1)].conj();
                full[i][j] = c(id, 0.0) + cc * (s0 + s1);
                intf[i][j] = c(id, 0.0) + cc * s1;
            }
        }
        let r0 = log2_det_small(&full, 2) - log2_det_small(&intf, 2);
        // UT 1 receives on beam 1 only.
        let r1 = (1.0 + cc * (g1[(1, 0)].norm_sqr() + g1[(1, 1)].norm_sqr())).log2()
            - (1.0 + cc * g1[(1, 0)].norm_sqr()).log2();
        assert!((got.per_ut_rates[0] - r0).abs() < 1e-10);
        assert!((got.per_ut_rates[1] - r1).abs() < 1e-10);
        assert!((got.sum_rate_bps_hz - (r0 + r1)).abs() < 1e-10);

        let free = interference_free_rate(&s, &a, &LinkBudget { snr_linear: rho, noise_power: 1.0 }, 2, 9).unwrap();
        assert!(free.sum_rate_bps_hz >= got.sum_rate_bps_hz);
    }

    #[test]
    fn ul_interference_free_removes_other_terms() {
        let g0 = CMatrix::from_row_slice(2, 2, &[c(0.9, 0.1), c(0.2, -0.4), c(-0.3, 0.5), c(1.1, 0.0)]);
        let g1 = CMatrix::from_row_slice(2, 2, &[c(0.4, 0.4), c(-0.7, 0.2), c(0.1, 0.0), c(0.5, -0.8)]);
        let s = FixedSampler::new(vec![g0, g1]).unwrap();
        let budgets = [LinkBudget::from_snr_db(3.0), LinkBudget::from_snr_db(6.0)];
        let mut a = BeamAssignment::empty(Direction::Uplink, 2);
        a.uts[0] = UtBeams { bs_beams: set(&[0]), ut_beams: set(&[0, 1]) };
        a.uts[1] = UtBeams { bs_beams: set(&[1]), ut_beams: set(&[1]) };
        let with = sum_rate_ul(&s, &a, &budgets, 1, 0).unwrap();
        let free = interference_free_rate_ul(&s, &a, &budgets, 1, 0).unwrap();
        assert!(free.sum_rate_bps_hz > with.sum_rate_bps_hz);
        // only UT 1 schedules: nothing to remove
        let mut solo = a.clone();
        solo.uts[0] = UtBeams::default();
        let with = sum_rate_ul(&s, &solo, &budgets, 1, 0).unwrap();
        let free = interference_free_rate_ul(&s, &solo, &budgets, 1, 0).unwrap();
        assert_eq!(with.sum_rate_bps_hz, free.sum_rate_bps_hz);
    }

    #[test]
    fn rejects_wrong_direction_and_overlap() {
        let s = FixedSampler::new(vec![CMatrix::zeros(2, 2); 2]).unwrap();
        let ul = BeamAssignment::empty(Direction::Uplink, 2);
        assert!(matches!(sum_rate_dl(&s, &ul, &LinkBudget::from_snr_db(0.0), 1, 0), Err(Error::Mode(_))));
        let mut a = BeamAssignment::empty(Direction::Downlink, 2);
        a.uts[0].bs_beams = set(&[1]);
        a.uts[1].bs_beams = set(&[1]);
        assert!(matches!(sum_rate_dl(&s, &a, &LinkBudget::from_snr_db(0.0), 1, 0), Err(Error::Constraint(_))));
        assert!(sum_rate_dl(&s, &BeamAssignment::empty(Direction::Downlink, 2), &LinkBudget::from_snr_db(0.0), 0, 0)
            .is_err());
    }

    fn random_rays(seed: u64, n: usize) -> RaySet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RaySet::new(
            (0..n)
                .map(|_| Ray {
                    power: rng.random_range(0.1..1.0),
                    aoa: rng.random_range(-1.5..1.5),
                    aod: rng.random_range(-1.5..1.5),
                    delay_s: 0.0,
                    phase_dl: 0.0,
                    phase_ul: 0.0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn deterministic_and_cached_draws_agree() {
        let cfg = ArrayConfig::new(8, 4).unwrap();
        let s = ApproxSampler::new(&[random_rays(1, 12), random_rays(2, 12)], cfg);
        let mut a = BeamAssignment::empty(Direction::Downlink, 2);
        a.uts[0] = UtBeams { bs_beams: set(&[0, 3, 5]), ut_beams: set(&[0, 1, 2, 3]) };
        a.uts[1] = UtBeams { bs_beams: set(&[1, 6]), ut_beams: set(&[1, 2]) };
        let b = LinkBudget::from_snr_db(10.0);
        let r1 = sum_rate_dl(&s, &a, &b, 300, 42).unwrap();
        let r2 = sum_rate_dl(&s, &a, &b, 300, 42).unwrap();
        assert_eq!(r1, r2);
        let cached = SampledChannels::draw(&s, Direction::Downlink, 300, 42).unwrap();
        assert_eq!(cached.sum_rate_dl(&a, &b).unwrap(), r1);
        let free = interference_free_rate(&s, &a, &b, 300, 42).unwrap();
        assert_eq!(cached.interference_free_dl(&a, &b).unwrap(), free);
        assert!(free.sum_rate_bps_hz >= r1.sum_rate_bps_hz);
        assert!(r1.std_error > 0.0);
        let per_ut_sum: f64 = r1.per_ut_rates.iter().sum();
        assert!((per_ut_sum - r1.sum_rate_bps_hz).abs() < 1e-9);
    }

    #[test]
    fn approx_sampler_second_moment_matches_power_matrix() {
        let cfg = ArrayConfig::new(8, 4).unwrap();
        let rays = random_rays(5, 10);
        let omega = crate::channel::power_matrix(&rays, cfg).omega;
        let s = ApproxSampler::new(&[rays], cfg);
        let n = 4000;
        let mut acc = nalgebra::DMatrix::<f64>::zeros(4, 8);
        for t in 0..n {
            acc += s.sample(Direction::Downlink, &mut trial_rng(3, t))[0].map(|z| z.norm_sqr());
        }
        acc /= n as f64;
        assert!((acc - omega).abs().max() < 0.1);
    }

    #[test]
    fn exact_sampler_is_unit_normalized() {
        let cfg = ArrayConfig::new(8, 4).unwrap();
        let rays = random_rays(8, 1);
        let p = UtProfile::new(rays.clone(), 30e9, 0.0).unwrap();
        let s = ExactSampler::new(vec![p], cfg);
        let g = &s.sample(Direction::Downlink, &mut trial_rng(0, 0))[0];
        assert!((g.norm_squared() - rays.total_power()).abs() < 1e-10);
    }
}
