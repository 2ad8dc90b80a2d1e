//! Weak randomness sources.
//!
//! A μ-SV source emits bits whose conditional bias is at most μ; pairs of such
//! bits form a (μ_min, μ_max)-MDL source, whose conditional pair probabilities
//! lie in `[μ_min, μ_max]`. The models here are concrete adversarial
//! strategies inside that box, used to feed protocol inputs and seeds.

use rand::Rng;

pub use crate::bits::BitString;
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

/// An input pair `(x, y)` for the two device components.
pub type InputPair = (u8, u8);

/// All four input pairs in `(x, y)` lexicographic order.
pub const INPUT_PAIRS: [InputPair; 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvParams {
    mu: f64,
}

impl SvParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 0.5) {
            return Err(Error::Constraint(format!("SV bias {mu} outside (0, 0.5)")));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// MDL source parameters `(μ_min, μ_max)` with the cached product `μ* = μ_min·μ_max`.
///
/// Both endpoints of the box are admitted: `μ_min = μ_max = 1/4` is the
/// uniform source and `μ_min = 0` is the degenerate fully-adversarial limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdlParams {
    mu_min: f64,
    mu_max: f64,
    mu_star: f64,
}

impl MdlParams {
    pub fn new(mu_min: f64, mu_max: f64) -> Result<Self> {
        if !(mu_min.is_finite() && mu_max.is_finite()) {
            return Err(Error::Constraint("non-finite μ".into()));
        }
        if mu_min < 0.0 || mu_max >= 1.0 || mu_min > mu_max {
            return Err(Error::Constraint(format!(
                "need 0 <= μ_min <= μ_max < 1, got ({mu_min}, {mu_max})"
            )));
        }
        if 4.0 * mu_min > 1.0 + SUM_TOL || 4.0 * mu_max < 1.0 - SUM_TOL {
            return Err(Error::Constraint(format!(
                "no normalized distribution fits in the box [{mu_min}, {mu_max}]"
            )));
        }
        Ok(Self {
            mu_min,
            mu_max,
            mu_star: mu_min * mu_max,
        })
    }

    pub fn uniform() -> Self {
        Self::new(0.25, 0.25).expect("uniform box is valid")
    }

    pub fn mu_min(&self) -> f64 {
        self.mu_min
    }

    pub fn mu_max(&self) -> f64 {
        self.mu_max
    }

    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.mu_min - SUM_TOL && p <= self.mu_max + SUM_TOL
    }
}

/// Pairs of bits from a μ-SV source form a `((1/2−μ)², (1/2+μ)²)`-MDL source.
pub fn sv_to_mdl(sv: SvParams) -> MdlParams {
    let lo = 0.5 - sv.mu;
    let hi = 0.5 + sv.mu;
    MdlParams::new(lo * lo, hi * hi).expect("SV conversion always lands in the box")
}

/// Distribution over the four input pairs, indexed `[x][y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputDistribution {
    p: [[f64; 2]; 2],
}

impl InputDistribution {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        let flat = [p[0][0], p[0][1], p[1][0], p[1][1]];
        if flat.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Constraint(format!("invalid input probabilities {p:?}")));
        }
        let sum: f64 = flat.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::Constraint(format!("input probabilities sum to {sum}")));
        }
        Ok(Self { p })
    }

    pub fn uniform() -> Self {
        Self { p: [[0.25; 2]; 2] }
    }

    pub fn get(&self, x: u8, y: u8) -> f64 {
        self.p[x as usize][y as usize]
    }

    pub fn as_array(&self) -> [[f64; 2]; 2] {
        self.p
    }

    /// Puts `weight` on `favored` and splits the rest evenly over the other three pairs.
    pub fn favoring(favored: InputPair, weight: f64) -> Result<Self> {
        let rest = (1.0 - weight) / 3.0;
        let mut p = [[rest; 2]; 2];
        p[favored.0 as usize][favored.1 as usize] = weight;
        Self::new(p)
    }

    pub fn check_box(&self, params: &MdlParams) -> Result<()> {
        for (x, y) in INPUT_PAIRS {
            let v = self.get(x, y);
            if !params.contains(v) {
                return Err(Error::Constraint(format!(
                    "P_XY({x}{y}) = {v} outside [{}, {}]",
                    params.mu_min(),
                    params.mu_max()
                )));
            }
        }
        Ok(())
    }

    /// Inverse-CDF draw over the pairs in `INPUT_PAIRS` order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> InputPair {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, y) in INPUT_PAIRS {
            acc += self.get(x, y);
            if u < acc {
                return (x, y);
            }
        }
        (1, 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// History-independent fixed distribution.
    Iid(InputDistribution),
    /// Always favors one pair with weight μ_max.
    Extremal { favored: InputPair },
    /// Favors the complement of the previous pair, starting from (0,0).
    HistoryToggle,
    /// Replays a fixed bit sequence two bits per pair, cycling when exhausted.
    /// Emits deterministic pairs and so lies outside the μ-box.
    Scripted(BitString),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    kind: SourceKind,
    params: MdlParams,
}

impl SourceModel {
    pub fn new(kind: SourceKind, params: MdlParams) -> Result<Self> {
        match &kind {
            SourceKind::Iid(dist) => dist.check_box(&params)?,
            SourceKind::Extremal { favored } => {
                if favored.0 > 1 || favored.1 > 1 {
                    return Err(Error::Argument(format!("favored pair {favored:?} not binary")));
                }
            }
            SourceKind::Scripted(bits) => {
                if bits.len() < 2 || bits.len() % 2 != 0 {
                    return Err(Error::Argument(format!(
                        "script needs an even, non-zero number of bits, got {}",
                        bits.len()
                    )));
                }
            }
            SourceKind::HistoryToggle => {}
        }
        Ok(Self { kind, params })
    }

    pub fn iid_uniform(params: MdlParams) -> Self {
        Self::new(SourceKind::Iid(InputDistribution::uniform()), params)
            .expect("uniform distribution always lies in the box")
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn params(&self) -> &MdlParams {
        &self.params
    }

    /// True when the conditional distribution ignores the history.
    pub fn is_history_independent(&self) -> bool {
        matches!(self.kind, SourceKind::Iid(_) | SourceKind::Extremal { .. })
    }

    pub fn is_scripted(&self) -> bool {
        matches!(self.kind, SourceKind::Scripted(_))
    }

    /// Conditional pair distribution given the history; `None` for scripted replay.
    pub fn conditional(&self, history: &[InputPair]) -> Option<InputDistribution> {
        let favoring = |pair| {
            InputDistribution::favoring(pair, self.params.mu_max())
                .expect("favoring weight μ_max yields a normalized distribution")
        };
        match &self.kind {
            SourceKind::Iid(dist) => Some(*dist),
            SourceKind::Extremal { favored } => Some(favoring(*favored)),
            SourceKind::HistoryToggle => {
                let favored = history.last().map_or((0, 0), |&(x, y)| (1 - x, 1 - y));
                Some(favoring(favored))
            }
            SourceKind::Scripted(_) => None,
        }
    }

    /// Checks every conditional distribution reachable within `depth` steps:
    /// each pair probability in `[μ_min, μ_max]` and the four summing to one.
    pub fn audit(&self, depth: usize) -> Result<()> {
        if self.is_scripted() {
            return Err(Error::Audit(
                "scripted replay emits deterministic pairs outside the μ-box".into(),
            ));
        }
        let mut frontier: Vec<Vec<InputPair>> = vec![Vec::new()];
        for level in 0..=depth {
            let mut next = Vec::new();
            for history in &frontier {
                let dist = self.conditional(history).expect("non-scripted");
                let sum: f64 = INPUT_PAIRS.iter().map(|&(x, y)| dist.get(x, y)).sum();
                if (sum - 1.0).abs() > SUM_TOL {
                    return Err(Error::Audit(format!("history {history:?}: sum {sum}")));
                }
                dist.check_box(&self.params)
                    .map_err(|e| Error::Audit(format!("history {history:?}: {e}")))?;
                if level < depth && !self.is_history_independent() {
                    for pair in INPUT_PAIRS {
                        let mut h = history.clone();
                        h.push(pair);
                        next.push(h);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(())
    }
}

/// Draws the next input pair given the history of previously emitted pairs.
pub fn sample_pair<R: Rng + ?Sized>(model: &SourceModel, history: &[InputPair], rng: &mut R) -> InputPair {
    match &model.kind {
        SourceKind::Scripted(bits) => {
            let pairs = bits.len() / 2;
            let k = history.len() % pairs;
            (bits.get(2 * k) as u8, bits.get(2 * k + 1) as u8)
        }
        _ => model.conditional(history).expect("non-scripted").sample(rng),
    }
}

/// Draws a `d`-bit seed pairwise from the source, with no prior history.
pub fn draw_seed<R: Rng + ?Sized>(model: &SourceModel, d: usize, rng: &mut R) -> Result<BitString> {
    draw_seed_after(model, d, &[], rng)
}

/// Draws a `d`-bit seed continuing the source after `prior` emitted pairs.
/// Bits `2i` and `2i+1` are the `x` and `y` of the `i`-th pair.
pub fn draw_seed_after<R: Rng + ?Sized>(
    model: &SourceModel,
    d: usize,
    prior: &[InputPair],
    rng: &mut R,
) -> Result<BitString> {
    if !d.is_multiple_of(2) {
        return Err(Error::Argument(format!("seed length {d} must be even")));
    }
    let mut history = prior.to_vec();
    let mut out = BitString::with_capacity(d);
    for _ in 0..d / 2 {
        let pair = sample_pair(model, &history, rng);
        out.push(pair.0 == 1);
        out.push(pair.1 == 1);
        history.push(pair);
    }
    Ok(out)
}

/// Min-entropy lower bound of a `d`-bit MDL seed: `−(d/2)·log₂ μ_max`.
pub fn seed_min_entropy(d: u64, params: &MdlParams) -> f64 {
    if d == 0 {
        return 0.0;
    }
    -(d as f64 / 2.0) * params.mu_max().log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Domain, Streams};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sv_conversion_examples() {
        let p = sv_to_mdl(SvParams::new(0.25).unwrap());
        assert!(close(p.mu_min(), 0.0625, 1e-15) && close(p.mu_max(), 0.5625, 1e-15));
        let p = sv_to_mdl(SvParams::new(0.1).unwrap());
        assert!(close(p.mu_min(), 0.16, 1e-15) && close(p.mu_max(), 0.36, 1e-15));
        let p = sv_to_mdl(SvParams::new(1e-12).unwrap());
        assert!(close(p.mu_min(), 0.25, 1e-11) && close(p.mu_max(), 0.25, 1e-11));
    }

    #[test]
    fn sv_rejects_out_of_range() {
        assert!(SvParams::new(0.0).is_err());
        assert!(SvParams::new(0.5).is_err());
        assert!(SvParams::new(-0.1).is_err());
    }

    #[test]
    fn mdl_box_validation() {
        assert!(MdlParams::new(0.25, 0.25).is_ok());
        assert!(MdlParams::new(0.0, 0.7).is_ok());
        assert!(MdlParams::new(0.3, 0.4).is_err());
        assert!(MdlParams::new(0.1, 0.2).is_err());
        assert!(MdlParams::new(0.2, 0.1).is_err());
        assert!(MdlParams::new(0.1, 1.0).is_err());
        assert!(MdlParams::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn iid_uniform_frequency() {
        let model = SourceModel::iid_uniform(MdlParams::uniform());
        let mut rng = Streams::new(1).at(Domain::Source, 0);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| sample_pair(&model, &[], &mut rng) == (0, 0)).count();
        assert!(close(hits as f64 / n as f64, 0.25, 0.002));
    }

    #[test]
    fn extremal_distribution() {
        let params = MdlParams::new(0.0625, 0.5625).unwrap();
        let model = SourceModel::new(SourceKind::Extremal { favored: (0, 0) }, params).unwrap();
        let d = model.conditional(&[]).unwrap();
        assert!(close(d.get(0, 0), 0.5625, 1e-15));
        for (x, y) in [(0, 1), (1, 0), (1, 1)] {
            assert!(close(d.get(x, y), 0.4375 / 3.0, 1e-15));
            assert!(d.get(x, y) >= params.mu_min());
        }
        assert!(close(0.4375 / 3.0, 0.1458, 1e-4));
        model.audit(8).unwrap();
    }

    #[test]
    fn extremal_rejected_when_rest_leaves_box() {
        // μ_max = 0.7 leaves 0.1 per remaining pair, below μ_min = 0.15.
        let params = MdlParams::new(0.15, 0.7).unwrap();
        let model = SourceModel::new(SourceKind::Extremal { favored: (1, 1) }, params).unwrap();
        assert!(model.audit(0).is_err());
    }

    #[test]
    fn history_toggle_audits_to_depth_eight() {
        let params = MdlParams::new(0.1, 0.55).unwrap();
        let model = SourceModel::new(SourceKind::HistoryToggle, params).unwrap();
        model.audit(8).unwrap();
        let d = model.conditional(&[(0, 1)]).unwrap();
        assert!(close(d.get(1, 0), 0.55, 1e-15));
    }

    #[test]
    fn iid_outside_box_is_rejected() {
        let params = MdlParams::new(0.2, 0.3).unwrap();
        let dist = InputDistribution::new([[0.4, 0.2], [0.2, 0.2]]).unwrap();
        assert!(SourceModel::new(SourceKind::Iid(dist), params).is_err());
    }

    #[test]
    fn scripted_replays_verbatim() {
        let script = BitString::parse("0110").unwrap();
        let model = SourceModel::new(SourceKind::Scripted(script), MdlParams::uniform()).unwrap();
        let mut rng = Streams::new(0).at(Domain::Source, 0);
        assert_eq!(draw_seed(&model, 4, &mut rng).unwrap().to_string(), "0110");
        assert_eq!(sample_pair(&model, &[], &mut rng), (0, 1));
        assert_eq!(sample_pair(&model, &[(0, 1)], &mut rng), (1, 0));
        assert_eq!(sample_pair(&model, &[(0, 1), (1, 0)], &mut rng), (0, 1));
        assert!(model.audit(1).is_err());
    }

    #[test]
    fn seed_edge_cases() {
        let model = SourceModel::iid_uniform(MdlParams::uniform());
        let mut rng = Streams::new(0).at(Domain::Seed, 0);
        assert!(draw_seed(&model, 0, &mut rng).unwrap().is_empty());
        assert!(draw_seed(&model, 3, &mut rng).is_err());
    }

    #[test]
    fn uniform_seed_pair_entropy() {
        let model = SourceModel::iid_uniform(MdlParams::uniform());
        let mut rng = Streams::new(3).at(Domain::Seed, 0);
        let z = draw_seed(&model, 1_000_000, &mut rng).unwrap();
        let mut counts = [0usize; 4];
        for i in 0..z.len() / 2 {
            counts[2 * z.get(2 * i) as usize + z.get(2 * i + 1) as usize] += 1;
        }
        let total = (z.len() / 2) as f64;
        let h: f64 = counts
            .iter()
            .map(|&c| c as f64 / total)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum();
        assert!(h >= 1.99, "plug-in pair entropy {h}");
    }

    #[test]
    fn seed_min_entropy_examples() {
        assert_eq!(seed_min_entropy(0, &MdlParams::uniform()), 0.0);
        assert!(close(seed_min_entropy(2, &MdlParams::uniform()), 2.0, 1e-15));
        let p = MdlParams::new(0.0625, 0.5625).unwrap();
        let v = seed_min_entropy(200_000, &p);
        assert!(close(v, 1e5 * (1.0 / 0.5625f64).log2(), 1e-6));
        assert!(close(v, 83_007.5, 1.0), "{v}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = SourceModel::new(SourceKind::HistoryToggle, MdlParams::new(0.2, 0.4).unwrap()).unwrap();
        let s = Streams::new(99);
        let h = [(1, 1), (0, 0)];
        let a = sample_pair(&model, &h, &mut s.at(Domain::Source, 5));
        let b = sample_pair(&model, &h, &mut s.at(Domain::Source, 5));
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn sv_conversion_is_monotone_and_bounded(mu in 1e-6f64..0.499, dmu in 1e-6f64..1e-3) {
            let lo = sv_to_mdl(SvParams::new(mu).unwrap());
            prop_assume!(mu + dmu < 0.5);
            let hi = sv_to_mdl(SvParams::new(mu + dmu).unwrap());
            prop_assert!(lo.mu_star() <= 1.0 / 16.0);
            prop_assert!(hi.mu_min() < lo.mu_min());
            prop_assert!(hi.mu_max() > lo.mu_max());
        }
    }
}
