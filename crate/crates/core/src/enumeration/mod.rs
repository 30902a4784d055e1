//! Configurations, enumeration of curves through them, and the brute-force
//! type enumeration used as a cross-check.

mod flow;
mod placement;
mod types;

pub use flow::{FoundCurve, SearchStats};
pub use placement::{solve_placement, Placement, Rejection};
pub use types::enumerate_types;

use crate::curve::{weight, Degree, Vec2};
use crate::error::{Error, Result};
use crate::parallel::{map_vec, Parallelism};
use crate::rational::{rat_pair_serde, rat_serde, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Line condition `covector · h(y_end) = value` on a fixed end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCondition {
    pub end: usize,
    pub covector: Vec2,
    #[serde(with = "rat_serde")]
    pub value: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub points: Vec<Point>,
    #[serde(default)]
    pub lines: Vec<LineCondition>,
    pub r: usize,
    pub s: usize,
    #[serde(default)]
    pub fixed: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(#[serde(with = "rat_pair_serde")] pub [Rat; 2]);

/// Primitive covector killing `v`, first nonzero entry positive.
pub fn line_covector(v: Vec2) -> Vec2 {
    let g = weight(v) as i64;
    let mut c = [v[1] / g, -v[0] / g];
    if c[0] < 0 || (c[0] == 0 && c[1] < 0) {
        c = [-c[0], -c[1]];
    }
    c
}

impl Config {
    pub fn point_rats(&self) -> Vec<[Rat; 2]> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn validate(&self, degree: &Degree) -> Result<()> {
        degree.check_counts(self.r, self.s)?;
        if self.points.len() != self.r + self.s {
            return Err(Error::Config(format!(
                "{} points given for r + s = {}",
                self.points.len(),
                self.r + self.s
            )));
        }
        let fixed: BTreeSet<usize> = self.fixed.iter().copied().collect();
        if fixed != degree.fixed {
            return Err(Error::Config("fixed set differs from the degree's".into()));
        }
        let ends: BTreeSet<usize> = self.lines.iter().map(|l| l.end).collect();
        if ends != fixed || self.lines.len() != fixed.len() {
            return Err(Error::Config("need exactly one line condition per fixed end".into()));
        }
        for l in &self.lines {
            if l.covector != line_covector(degree.dir(l.end)) {
                return Err(Error::Config(format!(
                    "covector of end {} must be the primitive annihilator {:?}",
                    l.end,
                    line_covector(degree.dir(l.end))
                )));
            }
        }
        Ok(())
    }
}

/// Draws a configuration: numerators uniform in `[-spread, spread]` over the
/// denominator `den`.
pub fn sample_config(degree: &Degree, r: usize, s: usize, seed: u64, attempt: u64, spread: i64, den: i64) -> Result<Config> {
    degree.check_counts(r, s)?;
    if spread < 0 || den < 1 {
        return Err(Error::Config("spread must be nonnegative and the denominator positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    let draw = |rng: &mut ChaCha8Rng| Rat::new(rng.gen_range(-spread..=spread) as i128, den as i128);
    let points = (0..r + s).map(|_| Point([draw(&mut rng), draw(&mut rng)])).collect();
    let lines = degree
        .fixed
        .iter()
        .map(|&j| LineCondition { end: j, covector: line_covector(degree.dir(j)), value: draw(&mut rng) })
        .collect();
    Ok(Config { points, lines, r, s, fixed: degree.fixed.iter().copied().collect() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    pub parallelism: Parallelism,
    pub spread: i64,
    pub den: i64,
    pub retries: u64,
}

impl Default for EnumOptions {
    fn default() -> Self {
        Self { parallelism: Parallelism::Parallel, spread: 1_000_000_000, den: 1, retries: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationReport {
    /// Non-fixed ends with equal direction are interchangeable: each entry is
    /// one orbit of labeled curves, shown with one labeling.
    pub curves: Vec<FoundCurve>,
    pub rejected_types: BTreeMap<String, u64>,
    pub degenerate: bool,
    pub stats: SearchStats,
}

impl EnumerationReport {
    /// Number of labeled curves: `Σ |G| / |Aut|`.
    pub fn labeled_count(&self, degree: &Degree) -> u64 {
        let g = degree.g_order();
        self.curves.iter().map(|c| g / c.automorphisms).sum()
    }
}

/// All curves through `cfg`, one per orbit of relabelings of parallel
/// non-fixed ends, sorted by canonical key.
pub fn enumerate_through(degree: &Degree, cfg: &Config, par: Parallelism) -> Result<EnumerationReport> {
    degree.validate()?;
    cfg.validate(degree)?;
    let out = flow::search(degree, cfg.r, cfg.s, cfg, par)?;
    let mut keyed: Vec<(String, FoundCurve)> = out
        .curves
        .into_iter()
        .map(|c| (c.curve.comb.canonical_key(degree, true), c))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(EnumerationReport {
        curves: keyed.into_iter().map(|(_, c)| c).collect(),
        rejected_types: BTreeMap::new(),
        degenerate: out.degenerate,
        stats: out.stats,
    })
}

/// Brute force: every labeled type solved against `cfg`. Each curve is
/// reported with `automorphisms = 1`.
pub fn enumerate_through_types(degree: &Degree, cfg: &Config, par: Parallelism) -> Result<EnumerationReport> {
    degree.validate()?;
    cfg.validate(degree)?;
    let types = enumerate_types(degree, cfg.r, cfg.s)?;
    let solved = map_vec(par, &types, |t| solve_placement(t, degree, cfg));
    let mut curves = vec![];
    let mut rejected: BTreeMap<String, u64> = BTreeMap::new();
    let mut degenerate = false;
    for res in solved {
        match res? {
            Placement::Curve(c) => curves.push((c.comb.canonical_key(degree, false), FoundCurve { curve: c, automorphisms: 1 })),
            Placement::Rejected(why) => {
                degenerate |= why.is_degenerate();
                *rejected.entry(why.name().to_string()).or_default() += 1;
            }
        }
    }
    curves.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(EnumerationReport {
        curves: curves.into_iter().map(|(_, c)| c).collect(),
        rejected_types: rejected,
        degenerate,
        stats: SearchStats::default(),
    })
}

/// A configuration for which the enumeration reports no degeneracy, drawn
/// with sub-seeds `(seed, 0), (seed, 1), ...`.
pub fn random_config(degree: &Degree, r: usize, s: usize, seed: u64, opts: &EnumOptions) -> Result<(Config, EnumerationReport)> {
    let mut last = String::new();
    for attempt in 0..opts.retries.max(1) {
        let cfg = sample_config(degree, r, s, seed, attempt, opts.spread, opts.den)?;
        if has_repeated_points(&cfg) {
            last = "repeated points".into();
            continue;
        }
        match enumerate_through(degree, &cfg, opts.parallelism) {
            Ok(rep) if !rep.degenerate => return Ok((cfg, rep)),
            Ok(_) => last = "degenerate configuration".into(),
            Err(e @ Error::Overflow(_)) => last = e.to_string(),
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetriesExhausted(format!(
        "no generic configuration in {} attempts for seed {seed} (last: {last})",
        opts.retries.max(1)
    )))
}

fn has_repeated_points(cfg: &Config) -> bool {
    let set: BTreeSet<_> = cfg.points.iter().map(|p| (p.0[0], p.0[1])).collect();
    set.len() != cfg.points.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covector_normalization() {
        assert_eq!(line_covector([-1, 0]), [0, 1]);
        assert_eq!(line_covector([1, 1]), [1, -1]);
        assert_eq!(line_covector([2, 4]), [2, -1]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = Degree::p2(2);
        let a = sample_config(&d, 5, 0, 9, 0, 1000, 1).unwrap();
        assert_eq!(a, sample_config(&d, 5, 0, 9, 0, 1000, 1).unwrap());
        assert_ne!(a, sample_config(&d, 5, 0, 10, 0, 1000, 1).unwrap());
        assert_ne!(a, sample_config(&d, 5, 0, 9, 1, 1000, 1).unwrap());
        assert!(sample_config(&d, 4, 0, 9, 0, 1000, 1).is_err());
    }

    #[test]
    fn config_json_shape() {
        let d = Degree::p2(1).with_fixed(&[3]).unwrap();
        let cfg = sample_config(&d, 1, 0, 1, 0, 10, 3).unwrap();
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"covector\":[1,-1]"));
        let back: Config = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
        back.validate(&d).unwrap();
    }

    #[test]
    fn collapsed_points_exhaust_retries() {
        let d = Degree::p2(2);
        let opts = EnumOptions { spread: 0, den: 1, retries: 3, ..Default::default() };
        let res = random_config(&d, 5, 0, 4, &opts);
        assert!(matches!(res, Err(Error::RetriesExhausted(_))));
    }
}
