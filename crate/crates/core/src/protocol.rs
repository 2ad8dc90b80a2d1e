//! Protocol executor: `n` scored rounds, the abort test, the post-hoc seed
//! draw and extraction, plus the honest-abort Monte Carlo.

use rand::Rng;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::extractor::{conv_extract, plan_extraction, ExtractionPlan};
use crate::quantum::bell::winning_value;
use crate::quantum::operator::depolarize;
use crate::quantum::strategy::{born_behavior, Behavior, QuantumStrategy};
use crate::rates::{completeness_bound, eta_opt, EatParams, FrequencyDist, RateResult};
use crate::rng::{Domain, Streams};
use crate::sources::{draw_seed_after, sample_pair, InputDistribution, InputPair, MdlParams, SourceModel};

#[derive(Debug, Clone, PartialEq)]
pub enum DeviceModel {
    /// Born-rule device with its state depolarized by weight `q`.
    HonestQuantum { strategy: QuantumStrategy, q: f64 },
    /// `a = alice[x]`, `b = bob[y]`.
    DeterministicClassical { alice: [u8; 2], bob: [u8; 2] },
    /// Replays `outputs[i mod len]` in round `i`, ignoring the inputs.
    /// Values other than 0/1 model a malfunctioning device.
    Scripted { outputs: Vec<(u8, u8)> },
}

impl DeviceModel {
    pub fn honest(strategy: QuantumStrategy, q: f64) -> Self {
        DeviceModel::HonestQuantum { strategy, q }
    }

    /// Behavior of a memoryless device; `None` for scripted replay.
    pub fn behavior(&self) -> Result<Option<Behavior>> {
        match self {
            DeviceModel::HonestQuantum { strategy, q } => {
                let noisy = QuantumStrategy::new(depolarize(&strategy.state, *q)?, strategy.alice, strategy.bob)?;
                Ok(Some(born_behavior(&noisy)?))
            }
            DeviceModel::DeterministicClassical { alice, bob } => {
                if alice.iter().chain(bob).any(|&v| v > 1) {
                    return Err(Error::Argument("deterministic table must be binary".into()));
                }
                Ok(Some(Behavior::deterministic(*alice, *bob)))
            }
            DeviceModel::Scripted { outputs } => {
                if outputs.is_empty() {
                    return Err(Error::Argument("scripted device needs at least one output".into()));
                }
                Ok(None)
            }
        }
    }
}

/// Per-`(x, y)` cumulative outcome tables for sampling `(a, b)`.
#[derive(Debug, Clone, Copy)]
struct OutcomeSampler {
    cdf: [[[f64; 4]; 2]; 2],
}

impl OutcomeSampler {
    fn new(b: &Behavior) -> Self {
        let mut cdf = [[[0.0; 4]; 2]; 2];
        for x in 0..2u8 {
            for y in 0..2u8 {
                let mut acc = 0.0;
                for k in 0..4u8 {
                    acc += b.get(k >> 1, k & 1, x, y);
                    cdf[x as usize][y as usize][k as usize] = acc;
                }
            }
        }
        Self { cdf }
    }

    fn sample<R: Rng + ?Sized>(&self, x: u8, y: u8, rng: &mut R) -> (u8, u8) {
        let row = &self.cdf[x as usize][y as usize];
        let u: f64 = rng.random::<f64>() * row[3];
        let k = row.iter().position(|&c| u < c).unwrap_or(3) as u8;
        (k >> 1, k & 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub i: u64,
    pub x: u8,
    pub y: u8,
    pub a: u8,
    pub b: u8,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbortReason {
    /// `C̄ < S_exp − δ_est`.
    BelowThreshold,
    /// The device answered with something other than a bit.
    NonBinaryOutput { round: u64 },
}

impl AbortReason {
    pub fn code(&self) -> &'static str {
        match self {
            AbortReason::BelowThreshold => "below_threshold",
            AbortReason::NonBinaryOutput { .. } => "non_binary_output",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractorConfig {
    /// Seed length; `None` means `2n`.
    pub d: Option<usize>,
    pub eps_ext: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub aborted: bool,
    pub abort_reason: Option<AbortReason>,
    pub c_bar: f64,
    pub rounds: Vec<RoundRecord>,
    pub key: Option<BitString>,
    pub plan: Option<ExtractionPlan>,
    pub secrecy_eps: f64,
    pub rate: RateResult,
}

impl ProtocolOutcome {
    pub fn key_length(&self) -> usize {
        self.key.as_ref().map_or(0, BitString::len)
    }
}

/// `ε_RA = 12(ε_s + ε_ext) + ε_EA`.
pub fn secrecy_epsilon(eps_s: f64, eps_ext: f64, eps_ea: f64) -> f64 {
    12.0 * (eps_s + eps_ext) + eps_ea
}

/// Abort predicate; equality passes.
pub fn aborts(c_bar: f64, eat: &EatParams) -> bool {
    c_bar < eat.threshold()
}

/// Compensated (Neumaier) mean.
pub fn mean_score(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp, mut count) = (0.0f64, 0.0f64, 0usize);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        (sum + comp) / count as f64
    }
}

/// Raw string `a_1 b_1 a_2 b_2 …`.
pub fn raw_output(rounds: &[RoundRecord]) -> BitString {
    rounds.iter().flat_map(|r| [r.a == 1, r.b == 1]).collect()
}

/// Runs the protocol. Round `i` draws from the `(Source, i)` and `(Device, i)`
/// streams, so the result is independent of scheduling; the seed stream is
/// touched only after the last round.
pub fn run(
    device: &DeviceModel,
    source: &SourceModel,
    eat: &EatParams,
    ext: &ExtractorConfig,
    streams: &Streams,
) -> Result<ProtocolOutcome> {
    let n = usize::try_from(eat.n)
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Argument(format!("cannot simulate n = {} rounds", eat.n)))?;
    let params = *source.params();
    let rate = eta_opt(eat, &params)?;
    let secrecy_eps = secrecy_epsilon(eat.eps_s, ext.eps_ext, eat.eps_ea);
    let sampler = device.behavior()?.map(|b| OutcomeSampler::new(&b));

    let respond = |i: usize, x: u8, y: u8| -> (u8, u8) {
        match (device, &sampler) {
            (DeviceModel::Scripted { outputs }, _) => outputs[i % outputs.len()],
            (_, Some(s)) => s.sample(x, y, &mut streams.at(Domain::Device, i as u64)),
            _ => unreachable!("memoryless devices carry a sampler"),
        }
    };
    let record = |i: usize, (x, y): InputPair, (a, b): (u8, u8)| RoundRecord {
        i: i as u64,
        x,
        y,
        a,
        b,
        c: winning_value(a, b, x, y, &params),
    };

    let mut history: Vec<InputPair> = Vec::with_capacity(n);
    let mut rounds: Vec<RoundRecord> = Vec::with_capacity(n);
    let mut bad_round = None;
    if source.is_history_independent() {
        let responses: Vec<(InputPair, (u8, u8))> = (0..n)
            .into_par_iter()
            .map(|i| {
                let pair = sample_pair(source, &[], &mut streams.at(Domain::Source, i as u64));
                (pair, respond(i, pair.0, pair.1))
            })
            .collect();
        for (i, (pair, out)) in responses.into_iter().enumerate() {
            history.push(pair);
            if out.0 > 1 || out.1 > 1 {
                bad_round = Some(i as u64);
                break;
            }
            rounds.push(record(i, pair, out));
        }
    } else {
        for i in 0..n {
            let pair = sample_pair(source, &history, &mut streams.at(Domain::Source, i as u64));
            history.push(pair);
            let out = respond(i, pair.0, pair.1);
            if out.0 > 1 || out.1 > 1 {
                bad_round = Some(i as u64);
                break;
            }
            rounds.push(record(i, pair, out));
        }
    }

    let c_bar = mean_score(rounds.iter().map(|r| r.c));
    let abort_reason = match bad_round {
        Some(round) => Some(AbortReason::NonBinaryOutput { round }),
        None if aborts(c_bar, eat) => Some(AbortReason::BelowThreshold),
        None => None,
    };
    let mut outcome = ProtocolOutcome {
        aborted: abort_reason.is_some(),
        abort_reason,
        c_bar,
        rounds,
        key: None,
        plan: None,
        secrecy_eps,
        rate,
    };
    if outcome.aborted {
        return Ok(outcome);
    }

    let d = ext.d.unwrap_or(2 * n);
    outcome.plan = plan_extraction(n, rate.eta_opt, d, &params, ext.eps_ext, eat.eps_s);
    if let Some(plan) = outcome.plan {
        let seed = draw_seed_after(
            source,
            d,
            &history,
            &mut streams.child(Domain::Seed, 0).at(Domain::Seed, 0),
        )?;
        let raw = raw_output(&outcome.rounds).resized(plan.n);
        outcome.key = Some(conv_extract(&raw, &seed.resized(plan.n), plan.m)?);
    }
    Ok(outcome)
}

/// Score-class frequencies of a memoryless device under i.i.d. inputs.
pub fn predicted_frequencies(b: &Behavior, inputs: &InputDistribution) -> FrequencyDist {
    let p = |a, bb, x, y| inputs.get(x, y) * b.get(a, bb, x, y);
    let p_win = p(0, 0, 0, 0);
    let p_lose = p(0, 1, 0, 1) + p(1, 0, 1, 0) + p(0, 0, 1, 1);
    FrequencyDist {
        p_win,
        p_lose,
        p_zero: (1.0 - p_win - p_lose).max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbortExperiment {
    pub trials: u64,
    pub aborts: u64,
    pub abort_rate: f64,
    pub hoeffding_bound: f64,
    pub n: u64,
    pub s_exp: f64,
    pub delta_est: f64,
}

impl AbortExperiment {
    /// Binomial standard deviation of the rate at the bound.
    pub fn sigma_at_bound(&self) -> f64 {
        let p = self.hoeffding_bound.min(1.0);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Monte-Carlo abort frequency of a memoryless device fed i.i.d. inputs,
/// next to the Hoeffding bound. Only the abort test is simulated.
pub fn honest_abort_experiment(
    device: &DeviceModel,
    inputs: &InputDistribution,
    params: &MdlParams,
    eat: &EatParams,
    trials: u64,
    seed: u64,
) -> Result<AbortExperiment> {
    if trials == 0 {
        return Err(Error::Argument("trials must be at least 1".into()));
    }
    inputs.check_box(params)?;
    let n = u64::try_from(eat.n).map_err(|_| Error::Argument("n too large".into()))?;
    let behavior = device
        .behavior()?
        .ok_or_else(|| Error::Argument("abort experiment needs a memoryless device".into()))?;
    let sampler = OutcomeSampler::new(&behavior);
    let streams = Streams::new(seed);
    let aborts: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = streams.child(Domain::Trial, t).at(Domain::Trial, 0);
            let c_bar = mean_score((0..n).map(|_| {
                let (x, y) = inputs.sample(&mut rng);
                let (a, b) = sampler.sample(x, y, &mut rng);
                winning_value(a, b, x, y, params)
            }));
            aborts(c_bar, eat) as u64
        })
        .sum();
    Ok(AbortExperiment {
        trials,
        aborts,
        abort_rate: aborts as f64 / trials as f64,
        hoeffding_bound: completeness_bound(n, eat.delta_est, params),
        n,
        s_exp: eat.s_exp,
        delta_est: eat.delta_est,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::lhv::lhv_max_s_mu;
    use crate::quantum::optimize::{optimize_s_tilde, OptimizerConfig};
    use crate::rates::s_mu_of_freq;
    use crate::sources::SourceKind;

    fn honest_uniform() -> DeviceModel {
        let opt = optimize_s_tilde(
            &MdlParams::uniform(),
            &OptimizerConfig {
                restarts: 4,
                ..OptimizerConfig::default()
            },
        )
        .unwrap();
        DeviceModel::honest(opt.strategy, 0.0)
    }

    fn ext() -> ExtractorConfig {
        ExtractorConfig { d: None, eps_ext: 1e-6 }
    }

    #[test]
    fn secrecy_examples() {
        assert_eq!(secrecy_epsilon(0.0, 0.0, 0.3), 0.3);
        assert!((secrecy_epsilon(1e-8, 1e-8, 1e-7) - 3.4e-7).abs() < 1e-20);
        assert!(secrecy_epsilon(2e-8, 1e-8, 1e-7) > secrecy_epsilon(1e-8, 1e-8, 1e-7));
    }

    #[test]
    fn compensated_mean() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(mean_score(v), 0.5);
        assert_eq!(mean_score(std::iter::empty()), 0.0);
    }

    #[test]
    fn scripted_device_replay() {
        let p = MdlParams::new(0.2, 0.3).unwrap();
        let source = SourceModel::new(SourceKind::Scripted(BitString::parse("00011011").unwrap()), p).unwrap();
        let device = DeviceModel::Scripted {
            outputs: vec![(0, 0), (0, 1), (1, 0), (0, 0), (1, 1)],
        };
        let eat = EatParams::new(10, 0.005, 0.001, 1e-6, 1e-6).unwrap();
        let out = run(&device, &source, &eat, &ext(), &Streams::new(1)).unwrap();
        // Inputs cycle 00,01,10,11; outputs cycle with period 5.
        let expected: Vec<f64> = (0..10)
            .map(|i| {
                let (x, y) = [(0, 0), (0, 1), (1, 0), (1, 1)][i % 4];
                let (a, b) = [(0, 0), (0, 1), (1, 0), (0, 0), (1, 1)][i % 5];
                winning_value(a, b, x, y, &p)
            })
            .collect();
        assert_eq!(out.rounds.iter().map(|r| r.c).collect::<Vec<_>>(), expected);
        assert_eq!(out.c_bar, expected.iter().sum::<f64>() / 10.0);
        assert!(out.aborted);
    }

    #[test]
    fn non_binary_output_aborts_with_reason() {
        let source = SourceModel::iid_uniform(MdlParams::uniform());
        let device = DeviceModel::Scripted {
            outputs: vec![(0, 0), (0, 0), (2, 0)],
        };
        let eat = EatParams::new(10, 0.01, 0.001, 1e-6, 1e-6).unwrap();
        let out = run(&device, &source, &eat, &ext(), &Streams::new(1)).unwrap();
        assert_eq!(out.abort_reason, Some(AbortReason::NonBinaryOutput { round: 2 }));
        assert_eq!(out.rounds.len(), 2);
        assert!(out.key.is_none());
    }

    #[test]
    fn deterministic_devices_always_abort() {
        let p = MdlParams::new(0.2, 0.4).unwrap();
        assert!(lhv_max_s_mu(&p).unwrap() <= 0.0);
        let source = SourceModel::new(SourceKind::HistoryToggle, p).unwrap();
        let eat = EatParams::new(200, 0.003, 0.001, 1e-6, 1e-6).unwrap();
        for k in 0..64u64 {
            let k8 = k as u8;
            let device = DeviceModel::DeterministicClassical {
                alice: [k8 >> 3 & 1, k8 >> 2 & 1],
                bob: [k8 >> 1 & 1, k8 & 1],
            };
            let out = run(&device, &source, &eat, &ext(), &Streams::new(k)).unwrap();
            assert!(out.aborted);
            assert_eq!(out.abort_reason, Some(AbortReason::BelowThreshold));
        }
    }

    #[test]
    fn honest_run_produces_key_and_consistent_transcript() {
        let source = SourceModel::iid_uniform(MdlParams::uniform());
        // At 10^5 rounds the finite-size rate is still negative.
        let eat = EatParams::new(1_000_000, 0.0129, 0.001, 1e-6, 1e-6).unwrap();
        let out = run(&honest_uniform(), &source, &eat, &ext(), &Streams::new(7)).unwrap();
        assert_eq!(out.rounds.len(), 1_000_000);
        assert!(out.rate.eta_opt > 0.0);
        assert!(!out.aborted, "c_bar = {}", out.c_bar);
        let m = out.plan.unwrap().m;
        assert!(m >= 1);
        assert_eq!(out.key_length(), m);
        let recomputed: f64 = out.rounds.iter().map(|r| r.c).sum::<f64>() / 1e6;
        assert!((recomputed - out.c_bar).abs() < 1e-12);
        assert_eq!(aborts(out.c_bar, &eat), out.aborted);
        for r in &out.rounds {
            assert_eq!(r.c, winning_value(r.a, r.b, r.x, r.y, &MdlParams::uniform()));
        }
    }

    #[test]
    fn seed_never_touches_rounds() {
        // Identical round streams; only the seed stream domain differs by
        // construction, so rounds agree between runs with different d.
        let source = SourceModel::iid_uniform(MdlParams::uniform());
        let eat = EatParams::new(20_000, 0.0125, 0.002, 1e-6, 1e-6).unwrap();
        let s = Streams::new(9);
        let a = run(&honest_uniform(), &source, &eat, &ext(), &s).unwrap();
        let b = run(
            &honest_uniform(),
            &source,
            &eat,
            &ExtractorConfig {
                d: Some(30_000),
                eps_ext: 1e-6,
            },
            &s,
        )
        .unwrap();
        assert_eq!(a.rounds, b.rounds);
    }

    #[test]
    fn reruns_are_bit_identical() {
        // HistoryToggle forces the sequential path; an Extremal source is
        // history independent. Both use per-round streams, so re-running an
        // i.i.d. source must be bit-identical.
        let p = MdlParams::new(0.2, 0.4).unwrap();
        let source = SourceModel::new(SourceKind::Extremal { favored: (1, 0) }, p).unwrap();
        let eat = EatParams::new(5000, 0.003, 0.001, 1e-6, 1e-6).unwrap();
        let s = Streams::new(4);
        let a = run(&honest_uniform(), &source, &eat, &ext(), &s).unwrap();
        let b = run(&honest_uniform(), &source, &eat, &ext(), &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn class_frequencies_converge() {
        let p = MdlParams::uniform();
        let device = honest_uniform();
        let behavior = device.behavior().unwrap().unwrap();
        let predicted = predicted_frequencies(&behavior, &InputDistribution::uniform());
        let source = SourceModel::iid_uniform(p);
        let eat = EatParams::new(1_000_000, 0.0125, 0.001, 1e-6, 1e-6).unwrap();
        let out = run(
            &device,
            &source,
            &eat,
            &ExtractorConfig {
                d: Some(2),
                eps_ext: 0.5,
            },
            &Streams::new(5),
        )
        .unwrap();
        let n = out.rounds.len() as f64;
        let observed = [
            out.rounds.iter().filter(|r| r.c > 0.0).count() as f64,
            out.rounds.iter().filter(|r| r.c < 0.0).count() as f64,
        ];
        let expected = [predicted.p_win * n, predicted.p_lose * n, predicted.p_zero * n];
        let observed = [observed[0], observed[1], n - observed[0] - observed[1]];
        let chi2: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
        // 2 degrees of freedom; 13.8 is the 0.999 quantile.
        assert!(chi2 < 13.8, "chi2 = {chi2}");
        assert!((s_mu_of_freq(&predicted, &p) - (std::f64::consts::SQRT_2 - 1.0) / 32.0).abs() < 1e-9);
    }

    #[test]
    fn abort_experiment_basics() {
        let p = MdlParams::uniform();
        let eat = EatParams::new(1000, 0.01, 0.005, 1e-6, 1e-6).unwrap();
        let single = honest_abort_experiment(&honest_uniform(), &InputDistribution::uniform(), &p, &eat, 1, 3).unwrap();
        assert!(single.abort_rate == 0.0 || single.abort_rate == 1.0);
        let mixed = DeviceModel::honest(QuantumStrategy::chsh_optimal(), 1.0);
        let r = honest_abort_experiment(&mixed, &InputDistribution::uniform(), &p, &eat, 200, 3).unwrap();
        assert!(r.abort_rate > 0.99);
        assert!(honest_abort_experiment(&mixed, &InputDistribution::uniform(), &p, &eat, 0, 3).is_err());
    }
}
