use super::result::{Cell, Check, ExperimentResult, Table};
use super::stats::{decorrelation_stats, envelope_variation};
use super::{derive_seed, drop_uts, generate_cluster_rays, ScenarioConfig};
use crate::link::{link_beams, run_link, LinkMetrics, LinkParams, NUM_DATA_SYMBOLS};
use crate::pbs::{make_sync_plan, offset_bounds, one_ring_bounds, one_ring_rays, spreads, BoundMode, SyncMode};
use crate::sched::{
    greedy_schedule_dl, interference_free_rate, sum_rate_dl, ApproxSampler, Direction, LinkBudget, SampledChannels,
    ScheduleOutcome,
};
use crate::{channel::power_matrix, ArrayConfig, Result, UtProfile};

pub const PROP4_BEAMS: [usize; 4] = [2, 8, 32, 128];
pub const ONE_RING_BEAMS: [usize; 2] = [8, 32];
pub const ONE_RING_RAYS: usize = 100_000;
pub const ONE_RING_RADIUS_M: f64 = 30.0;
/// `(M, K)` of the decorrelation and variance checks.
pub const DECORRELATION_ARRAY: (usize, usize) = (64, 16);
/// `(M, K)` ladder of the envelope check.
pub const ENVELOPE_LADDER: [(usize, usize); 3] = [(16, 8), (64, 32), (256, 128)];
pub const ENVELOPE_GRID: usize = 16;
pub const ENVELOPE_BANDWIDTH_HZ: f64 = 100e6;
/// Minimum greedy to interference-free ratio at 5 dB.
pub const RATIO_BAR_5DB: f64 = 0.75;

const CLUSTER_ASSUMPTIONS: [&str; 3] = [
    "cluster delays: sorted exponential draws rescaled to the configured RMS delay spread",
    "cluster powers: fixed per-cluster decay in dB, equal split over subpaths, unit total power",
    "subpath angle offsets: Laplacian with the configured RMS spread, clipped to the valid ranges",
];

fn new_result(name: &str, config: &ScenarioConfig) -> ExperimentResult {
    let mut r = ExperimentResult::new(name, config.hash(), config.master_seed);
    r.assumptions = CLUSTER_ASSUMPTIONS.iter().map(|s| s.to_string()).collect();
    r
}

fn reference_ut(config: &ScenarioConfig) -> Result<UtProfile> {
    let rays = generate_cluster_rays(config, 0, derive_seed(config.master_seed, "ut-rays", 0))?;
    UtProfile::new(rays, config.carrier_freq_hz, config.velocity_mps)
}

/// Spread-ratio, one-ring, decorrelation, variance-match and envelope checks
/// on the rays of UT 0.
pub fn run_prop_suite(config: &ScenarioConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut res = new_result("verify_props", config);
    let profile = reference_ut(config)?;

    let mut t = Table::new("prop_spread_ratio", &["K", "joint_doppler_hz", "per_beam_doppler_hz", "ratio", "expected"]);
    let mut worst = 0.0f64;
    for k in PROP4_BEAMS {
        let b = offset_bounds(&profile, k, BoundMode::Analytic)?;
        let (j, p) = (spreads(&b, SyncMode::Joint), spreads(&b, SyncMode::PerBeam));
        let ratio = p.doppler_spread_hz / j.doppler_spread_hz;
        let expected = 1.0 / k as f64;
        worst = worst.max((ratio / expected - 1.0).abs());
        t.push(vec![k.into(), j.doppler_spread_hz.into(), p.doppler_spread_hz.into(), ratio.into(), expected.into()]);
    }
    res.tables.push(t);
    res.checks.push(Check::new("doppler_ratio_is_1_over_k", worst <= 1e-12, worst, 1e-12));

    let mut worst_delay = 0.0f64;
    for k in PROP4_BEAMS {
        let b = offset_bounds(&profile, k, config.bound_mode)?;
        let (j, p) = (spreads(&b, SyncMode::Joint), spreads(&b, SyncMode::PerBeam));
        if j.delay_spread_s > 0.0 {
            worst_delay = worst_delay.max(p.delay_spread_s / j.delay_spread_s);
        }
    }
    res.checks.push(Check::new("per_beam_delay_spread_le_joint", worst_delay <= 1.0, worst_delay, 1.0));

    let mut t = Table::new("prop_one_ring", &["K", "bound_mode", "delay_ratio", "expected", "rel_err"]);
    let rays = one_ring_rays(ONE_RING_RADIUS_M, ONE_RING_RAYS, 0.0, 0.2, derive_seed(config.master_seed, "one-ring", 0))?;
    let ring = UtProfile::new(rays, config.carrier_freq_hz, config.velocity_mps)?;
    let (mut worst_analytic, mut worst_empirical) = (0.0f64, 0.0f64);
    for k in ONE_RING_BEAMS {
        let expected = 1.0 / k as f64;
        for (mode, b) in [
            (BoundMode::Analytic, one_ring_bounds(ONE_RING_RADIUS_M, ring.max_doppler_hz, k)?),
            (BoundMode::Empirical, offset_bounds(&ring, k, BoundMode::Empirical)?),
        ] {
            let ratio = spreads(&b, SyncMode::PerBeam).delay_spread_s / spreads(&b, SyncMode::Joint).delay_spread_s;
            let err = (ratio / expected - 1.0).abs();
            match mode {
                BoundMode::Analytic => worst_analytic = worst_analytic.max(err),
                BoundMode::Empirical => worst_empirical = worst_empirical.max(err),
            }
            t.push(vec![k.into(), mode.as_str().into(), ratio.into(), expected.into(), err.into()]);
        }
    }
    res.tables.push(t);
    res.checks.push(Check::new("one_ring_analytic_ratio", worst_analytic <= 1e-12, worst_analytic, 1e-12));
    res.checks.push(Check::new("one_ring_empirical_ratio", worst_empirical <= 0.02, worst_empirical, 0.02));

    let (m, k) = DECORRELATION_ARRAY;
    let cfg = ArrayConfig::new(m, k)?;
    let trials = config.prop_trials;
    let s = decorrelation_stats(&profile, cfg, &config.ofdm(), 1, trials, derive_seed(config.master_seed, "phases", 0))?;
    let corr_bar = 5.0 / (trials as f64).sqrt();
    let mut t = Table::new(
        "prop_decorrelation",
        &["M", "K", "trials", "occupied_cells", "max_abs_corr", "corr_threshold", "max_var_rel_err", "var_threshold"],
    );
    t.push(vec![
        m.into(),
        k.into(),
        trials.into(),
        s.occupied_cells.into(),
        s.max_abs_corr.into(),
        corr_bar.into(),
        s.max_var_rel_err.into(),
        0.05.into(),
    ]);
    res.tables.push(t);
    res.checks.push(Check::new("decorrelation", s.max_abs_corr < corr_bar, s.max_abs_corr, corr_bar));
    res.checks.push(Check::new("variance_match", s.max_var_rel_err < 0.05, s.max_var_rel_err, 0.05));

    let mut t = Table::new("prop_envelope", &["M", "K", "rel_std"]);
    let mut values = Vec::new();
    for (m, k) in ENVELOPE_LADDER {
        let v = envelope_variation(&profile, ArrayConfig::new(m, k)?, ENVELOPE_BANDWIDTH_HZ, ENVELOPE_GRID);
        values.push(v);
        t.push(vec![m.into(), k.into(), v.into()]);
    }
    res.tables.push(t);
    let worst_step = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    res.checks.push(Check::new("envelope_non_increasing", worst_step <= 0.0, worst_step, 0.0));
    Ok(res)
}

fn k_ladder(k_max: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|&k| k < k_max).collect();
    ks.push(k_max);
    ks
}

/// Delay and Doppler spreads of UT 0 for both sync modes and both bound
/// modes, over `K = 1, 2, 4, ...` up to the configured `K`.
pub fn run_spreads(config: &ScenarioConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut res = new_result("spreads", config);
    let profile = reference_ut(config)?;
    let mut t = Table::new("spreads", &["K", "mode", "bound_mode", "delay_spread_ns", "doppler_spread_hz"]);
    let mut worst = 0.0f64;
    let mut reports = Vec::new();
    for k in k_ladder(config.num_ut_antennas) {
        for bm in [BoundMode::Analytic, BoundMode::Empirical] {
            let b = offset_bounds(&profile, k, bm)?;
            let (j, p) = (spreads(&b, SyncMode::Joint), spreads(&b, SyncMode::PerBeam));
            for s in [&j, &p] {
                t.push(vec![k.into(), s.mode.as_str().into(), bm.as_str().into(), (s.delay_spread_s * 1e9).into(), s.doppler_spread_hz.into()]);
            }
            worst = worst.max(p.delay_spread_s - j.delay_spread_s).max(p.doppler_spread_hz - j.doppler_spread_hz);
            if k == config.num_ut_antennas {
                reports.push(serde_json::json!({
                    "K": k,
                    "bound_mode": bm,
                    "reports": [j, p],
                    "plans": [make_sync_plan(&b, SyncMode::Joint), make_sync_plan(&b, SyncMode::PerBeam)],
                }));
            }
        }
    }
    res.tables.push(t);
    res.checks.push(Check::new("per_beam_spreads_le_joint", worst <= 0.0, worst, 0.0));
    res.artifacts.push(("sync_plans".into(), serde_json::Value::Array(reports)));
    Ok(res)
}

/// One SNR point of the scheduling sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub outcome: ScheduleOutcome,
    pub sum_rate: f64,
    pub interference_free_rate: f64,
}

/// Greedy DL scheduling of all UTs at every configured SNR. The scheduler
/// scores candidates on `schedule_trials` fixed channel draws; the reported
/// rates use `rate_trials` independent draws.
pub fn schedule_sweep(config: &ScenarioConfig) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    let cfg = config.array();
    let uts = drop_uts(config)?;
    let rays: Vec<_> = uts.iter().map(|u| u.rays.clone()).collect();
    let omegas: Vec<_> = rays.iter().map(|r| power_matrix(r, cfg)).collect();
    let sampler = ApproxSampler::new(&rays, cfg);
    let draws = SampledChannels::draw(
        &sampler,
        Direction::Downlink,
        config.schedule_trials,
        derive_seed(config.master_seed, "schedule", 0),
    )?;
    let report_seed = derive_seed(config.master_seed, "rate", 0);
    let limits = config.limits();
    config
        .snr_grid_db
        .iter()
        .map(|&snr_db| {
            let budget = LinkBudget::from_snr_db(snr_db);
            let outcome = greedy_schedule_dl(&omegas, &limits, &|a: &_| draws.sum_rate_dl(a, &budget))?;
            let a = &outcome.assignment;
            let sum_rate = sum_rate_dl(&sampler, a, &budget, config.rate_trials, report_seed)?.sum_rate_bps_hz;
            let ifree = interference_free_rate(&sampler, a, &budget, config.rate_trials, report_seed)?.sum_rate_bps_hz;
            Ok(SweepPoint { snr_db, outcome, sum_rate, interference_free_rate: ifree })
        })
        .collect()
}

fn ratio(p: &SweepPoint) -> f64 {
    if p.interference_free_rate > 0.0 {
        p.sum_rate / p.interference_free_rate
    } else {
        1.0
    }
}

fn sweep_checks(res: &mut ExperimentResult, points: &[SweepPoint], config: &ScenarioConfig) -> Result<()> {
    let limits = config.limits();
    let mut violations = 0usize;
    for p in points {
        if p.outcome.assignment.validate(&limits, config.array()).is_err() {
            violations += 1;
        }
    }
    res.checks.push(Check::new("assignments_satisfy_constraints", violations == 0, violations as f64, 0.0));
    let worst_ratio = points.iter().map(ratio).fold(0.0f64, f64::max);
    let least_ratio = points.iter().map(ratio).fold(f64::INFINITY, f64::min);
    res.checks.push(Check::new("ratio_at_most_one", worst_ratio <= 1.0 + 1e-12, worst_ratio, 1.0));
    res.checks.push(Check::new("ratio_positive", least_ratio > 0.0, least_ratio, 0.0));
    let worst_drop = points.windows(2).map(|w| w[0].sum_rate - w[1].sum_rate).fold(0.0f64, f64::max);
    res.checks.push(Check::new("rate_non_decreasing_in_snr", worst_drop <= 0.0, worst_drop, 0.0));
    if let Some(p) = points.iter().find(|p| p.snr_db == 5.0) {
        res.checks.push(Check::new("ratio_at_5db", ratio(p) >= RATIO_BAR_5DB, ratio(p), RATIO_BAR_5DB));
    }
    let assignments: Vec<_> = points
        .iter()
        .map(|p| serde_json::json!({ "snr_db": p.snr_db, "assignment": p.outcome.assignment }))
        .collect();
    res.artifacts.push((format!("{}_assignments", res.experiment), serde_json::Value::Array(assignments)));
    res.assumptions.push("rates use the beam-cell approximation of the channel".into());
    Ok(())
}

/// Greedy rate against the interference-free benchmark over the SNR grid.
pub fn run_sumrate_sweep(config: &ScenarioConfig) -> Result<ExperimentResult> {
    let points = schedule_sweep(config)?;
    let mut res = new_result("sumrate", config);
    let mut t = Table::new("sumrate", &["snr_db", "greedy_rate", "ifree_rate", "ratio"]);
    for p in &points {
        t.push(vec![p.snr_db.into(), p.sum_rate.into(), p.interference_free_rate.into(), ratio(p).into()]);
    }
    res.tables.push(t);
    sweep_checks(&mut res, &points, config)?;
    Ok(res)
}

/// Scheduled assignments with their sum and interference-free rates.
pub fn run_schedule(config: &ScenarioConfig) -> Result<ExperimentResult> {
    let points = schedule_sweep(config)?;
    let mut res = new_result("schedule", config);
    let mut t = Table::new("schedule", &["snr_db", "sum_rate", "interference_free_rate"]);
    for p in &points {
        t.push(vec![p.snr_db.into(), p.sum_rate.into(), p.interference_free_rate.into()]);
    }
    res.tables.push(t);
    sweep_checks(&mut res, &points, config)?;
    Ok(res)
}

fn metrics_row(snr: Cell, m: &LinkMetrics) -> Vec<Cell> {
    vec![snr, m.sync_mode.as_str().into(), m.evm_rms.into(), m.ber.into(), m.mean_sinr_db.into(), m.num_bits.into()]
}

/// Link-level comparison of joint and per-beam synchronization for UT 0 over
/// the SNR grid, plus a noiseless run.
pub fn run_linksim_sweep(config: &ScenarioConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut res = new_result("linksim", config);
    let cfg = config.array();
    let ofdm = config.ofdm();
    let profile = reference_ut(config)?;
    let beams = link_beams(&profile, cfg, config.link_max_streams);
    let bits_per_frame = (2 * NUM_DATA_SYMBOLS * ofdm.num_subcarriers * beams.bs_beams.len()) as u64;
    let frames = config.link_frames.max(config.link_min_bits.div_ceil(bits_per_frame) as usize);
    let params = |mode, noise_power, seed| LinkParams {
        sync_mode: mode,
        bound_mode: config.bound_mode,
        noise_power,
        num_frames: frames,
        seed,
    };
    let modes = [SyncMode::Joint, SyncMode::PerBeam];

    let cols = ["snr_db", "sync_mode", "evm_rms", "ber", "mean_sinr_db", "num_bits"];
    let mut t = Table::new("linksim", &cols);
    let mut worst_ber_gap = f64::NEG_INFINITY;
    let mut fewest_bits = u64::MAX;
    for (i, &snr_db) in config.snr_grid_db.iter().enumerate() {
        let seed = derive_seed(config.master_seed, "link", i as u64);
        let noise = 10f64.powf(-snr_db / 10.0);
        let [joint, per] = modes.map(|mode| run_link(&profile, &beams, &ofdm, cfg, &params(mode, noise, seed)));
        let (joint, per) = (joint?, per?);
        worst_ber_gap = worst_ber_gap.max(per.ber - joint.ber);
        fewest_bits = fewest_bits.min(per.num_bits);
        t.push(metrics_row(snr_db.into(), &joint));
        t.push(metrics_row(snr_db.into(), &per));
    }
    res.tables.push(t);

    let seed = derive_seed(config.master_seed, "link-noiseless", 0);
    let [joint, per] = modes.map(|mode| run_link(&profile, &beams, &ofdm, cfg, &params(mode, 0.0, seed)));
    let (joint, per) = (joint?, per?);
    let mut t = Table::new("linksim_noiseless", &cols);
    t.push(metrics_row("inf".into(), &joint));
    t.push(metrics_row("inf".into(), &per));
    res.tables.push(t);
    let mut t = Table::new("linksim_sinr", &["subcarrier", "joint_sinr_db", "per_beam_sinr_db"]);
    for (n, (a, b)) in joint.sinr_db.iter().zip(&per.sinr_db).enumerate() {
        t.push(vec![n.into(), (*a).into(), (*b).into()]);
    }
    res.tables.push(t);

    res.checks.push(Check::new("ber_per_beam_le_joint", worst_ber_gap <= 0.0, worst_ber_gap, 0.0));
    res.checks.push(Check::new("bits_per_point", fewest_bits >= config.link_min_bits, fewest_bits as f64, config.link_min_bits as f64));
    if profile.max_doppler_hz > 0.0 {
        res.checks.push(Check::new("noiseless_evm_per_beam_lt_joint", per.evm_rms < joint.evm_rms, per.evm_rms, joint.evm_rms));
    }
    res.assumptions.push(format!(
        "link: UT 0, {} streams on beams bs={:?} ut={:?}, {} frames per point, delays rounded to whole samples",
        beams.bs_beams.len(),
        beams.bs_beams,
        beams.ut_beams,
        frames
    ));
    Ok(res)
}
