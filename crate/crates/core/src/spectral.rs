//! Spectral flow of one-parameter families `H(lambda) = A + lambda * B`.
//!
//! Real eigenvalues are followed by continuity from `lambda = 0`, where their
//! ascending order fixes the level labels. When two of them meet and leave the
//! real axis as a conjugate pair, the pair is recorded as a confluence; the set
//! of confluences over a full sweep is the merger pattern the family realizes.

use std::collections::BTreeMap;
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matchings::{MergerPattern, PatternError};

/// Largest supported dimension.
pub const MAX_DIMENSION: usize = 64;
pub const DEFAULT_GRID_STEPS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid family config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("degenerate start: {0}")]
    DegenerateStart(String),
    #[error("degenerate merger: {detail}")]
    DegenerateMerger {
        detail: String,
        events: Vec<ConfluenceEvent>,
    },
    #[error("incomplete sweep: paths {alive:?} still real at lambda = {lambda_max}")]
    IncompleteSweep { alive: Vec<usize>, lambda_max: f64 },
    #[error("observed pairs cross: {symbol}")]
    CrossingPattern {
        symbol: String,
        events: Vec<ConfluenceEvent>,
    },
    #[error("family is flagged symmetric but realizes {symbol}")]
    AsymmetricPattern {
        symbol: String,
        events: Vec<ConfluenceEvent>,
    },
    #[error("pattern {0} is not centrally symmetric")]
    NotSymmetric(String),
    #[error("pattern {0} has crossing pairs")]
    Crossing(String),
}

/// Absolute thresholds are derived from the relative ones as
/// `rel * (1 + spectral radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// An eigenvalue is real while `|im|` stays below this (relative).
    pub im_rel: f64,
    /// Minimum separation of the starting levels (relative).
    pub gap_rel: f64,
    /// Bisection width for merger localization (absolute, in lambda).
    pub lambda: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            im_rel: 1e-8,
            gap_rel: 1e-8,
            lambda: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn im(&self, radius: f64) -> f64 {
        self.im_rel * (1.0 + radius)
    }

    pub fn gap(&self, radius: f64) -> f64 {
        self.gap_rel * (1.0 + radius)
    }
}

/// `H(lambda) = A + lambda * B` with real square `A`, `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFamily {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    symmetric_hint: bool,
}

/// On-disk form of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub dimension: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(default)]
    pub symmetric_hint: bool,
}

impl MatrixFamily {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        symmetric_hint: bool,
    ) -> Result<Self, SpectralError> {
        let n = a.nrows();
        if n == 0 || n > MAX_DIMENSION {
            return Err(SpectralError::InvalidFamily(format!(
                "dimension {n} outside 1..={MAX_DIMENSION}"
            )));
        }
        if a.ncols() != n || b.nrows() != n || b.ncols() != n {
            return Err(SpectralError::InvalidFamily(format!(
                "A is {}x{}, B is {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(SpectralError::InvalidFamily("non-finite entry".into()));
        }
        Ok(Self {
            a,
            b,
            symmetric_hint,
        })
    }

    /// Builds a family from row-major rows.
    pub fn from_rows(
        a: &[Vec<f64>],
        b: &[Vec<f64>],
        symmetric_hint: bool,
    ) -> Result<Self, SpectralError> {
        Self::new(to_matrix(a, "A")?, to_matrix(b, "B")?, symmetric_hint)
    }

    pub fn dimension(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn symmetric_hint(&self) -> bool {
        self.symmetric_hint
    }

    pub fn at(&self, lambda: f64) -> DMatrix<f64> {
        &self.a + &self.b * lambda
    }

    pub fn to_config(&self) -> FamilyConfig {
        let rows = |m: &DMatrix<f64>| {
            m.row_iter()
                .map(|r| r.iter().copied().collect())
                .collect::<Vec<Vec<f64>>>()
        };
        FamilyConfig {
            dimension: self.dimension(),
            a: rows(&self.a),
            b: rows(&self.b),
            symmetric_hint: self.symmetric_hint,
        }
    }

    pub fn from_config(config: &FamilyConfig) -> Result<Self, SpectralError> {
        let fam = Self::from_rows(&config.a, &config.b, config.symmetric_hint)?;
        if fam.dimension() != config.dimension {
            return Err(SpectralError::Config(format!(
                "dimension is {} but matrices are {}x{}",
                config.dimension,
                fam.dimension(),
                fam.dimension()
            )));
        }
        Ok(fam)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_config()).expect("finite entries serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SpectralError> {
        let config: FamilyConfig =
            serde_json::from_str(text).map_err(|e| SpectralError::Config(e.to_string()))?;
        Self::from_config(&config)
    }
}

fn to_matrix(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>, SpectralError> {
    let n = rows.len();
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(SpectralError::Config(format!(
            "{name} row {bad} has {} entries, expected {n}",
            rows[bad].len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// All eigenvalues of a real square matrix, sorted by real part and then
/// imaginary part. Complex eigenvalues come in exact conjugate pairs.
pub fn spectrum(h: &DMatrix<f64>) -> Result<Vec<Complex64>, SpectralError> {
    let n = h.nrows();
    if n != h.ncols() || n > MAX_DIMENSION {
        return Err(SpectralError::InvalidFamily(format!(
            "expected a square matrix of size at most {MAX_DIMENSION}, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(SpectralError::NumericalFailure("non-finite matrix entry".into()));
    }
    let mut out = crate::eigen::eigenvalues(h).ok_or_else(|| {
        SpectralError::NumericalFailure("QR iteration did not converge".into())
    })?;
    sort_spectrum(&mut out);
    Ok(out)
}

fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
}

fn spectral_radius(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Where a path left the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Death {
    /// Index of the first grid point at which the path is complex.
    pub step: usize,
    /// Last grid value of lambda at which the path was real.
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Path it merged with.
    pub partner: usize,
}

/// One continuity-tracked eigenvalue trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPath {
    /// Rank of the starting eigenvalue, 1 = lowest.
    pub path_id: usize,
    /// One sample per grid point; after death the path follows its half of
    /// the conjugate pair (the higher label takes positive imaginary part).
    pub samples: Vec<(f64, Complex64)>,
    /// Last grid lambda at which the path was real.
    pub alive_until: f64,
    pub death: Option<Death>,
}

impl EigenPath {
    pub fn is_alive(&self) -> bool {
        self.death.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfluenceEvent {
    pub lambda_star: f64,
    pub pair: [usize; 2],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedPattern {
    pub pattern: MergerPattern,
    /// Ascending by `lambda_star`, ties by value.
    pub events: Vec<ConfluenceEvent>,
}

/// Grid `lambda_k = lambda_max * k / steps`, `k = 0..=steps`.
fn grid(lambda_max: f64, steps: usize) -> impl Iterator<Item = f64> {
    (0..=steps).map(move |k| lambda_max * k as f64 / steps as f64)
}

fn check_sweep(lambda_max: f64, steps: usize) -> Result<(), SpectralError> {
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(SpectralError::InvalidFamily(format!(
            "lambda_max must be positive, got {lambda_max}"
        )));
    }
    if steps < 2 {
        return Err(SpectralError::InvalidFamily(format!(
            "grid_steps must be at least 2, got {steps}"
        )));
    }
    Ok(())
}

/// Matches sorted `preds` to an order-preserving subsequence of sorted `reals`
/// with minimal total absolute displacement. Returns, for each prediction, the
/// index of its real value.
fn ordered_assignment(preds: &[f64], reals: &[f64]) -> Vec<usize> {
    let (k, m) = (preds.len(), reals.len());
    debug_assert!(k <= m);
    // cost[i][j]: best cost of matching preds[..i] into reals[..j]
    let mut cost = vec![vec![f64::INFINITY; m + 1]; k + 1];
    for row in cost[0].iter_mut() {
        *row = 0.0;
    }
    for i in 1..=k {
        for j in i..=m {
            let skip = cost[i][j - 1];
            let take = cost[i - 1][j - 1] + (preds[i - 1] - reals[j - 1]).abs();
            cost[i][j] = skip.min(take);
        }
    }
    let mut out = vec![0; k];
    let (mut i, mut j) = (k, m);
    while i > 0 {
        let take = cost[i - 1][j - 1] + (preds[i - 1] - reals[j - 1]).abs();
        if j > i && cost[i][j - 1] <= take {
            j -= 1;
        } else {
            out[i - 1] = j - 1;
            i -= 1;
            j -= 1;
        }
    }
    out
}

/// Greedy nearest-first matching between two point sets; returns pairs of
/// indices `(from, to)`.
fn greedy_match(from: &[Complex64], to: &[Complex64]) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(from.len() * to.len());
    for (i, x) in from.iter().enumerate() {
        for (j, y) in to.iter().enumerate() {
            candidates.push(((x - y).norm(), i, j));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_from = vec![false; from.len()];
    let mut used_to = vec![false; to.len()];
    let mut out = Vec::new();
    for (_, i, j) in candidates {
        if !used_from[i] && !used_to[j] {
            used_from[i] = true;
            used_to[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Follows every level of `fam` over `lambda in [0, lambda_max]`.
///
/// Surviving real eigenvalues are assigned to living paths by a minimal total
/// displacement matching against linear extrapolation of each path, so paths
/// that cross keep their labels. When a new conjugate pair appears, the two
/// living paths closest to its real part die.
pub fn track_paths(
    fam: &MatrixFamily,
    lambda_max: f64,
    grid_steps: usize,
    tol: &Tolerances,
) -> Result<Vec<EigenPath>, SpectralError> {
    check_sweep(lambda_max, grid_steps)?;
    let n = fam.dimension();
    let start = spectrum(fam.a())?;
    let radius = spectral_radius(&start);
    if let Some(z) = start.iter().find(|z| z.im.abs() >= tol.im(radius)) {
        return Err(SpectralError::DegenerateStart(format!(
            "A has a non-real eigenvalue {z}"
        )));
    }
    let mut levels: Vec<f64> = start.iter().map(|z| z.re).collect();
    levels.sort_by(f64::total_cmp);
    if let Some(w) = levels.windows(2).find(|w| w[1] - w[0] <= tol.gap(radius)) {
        return Err(SpectralError::DegenerateStart(format!(
            "levels {} and {} of A are not separated",
            w[0], w[1]
        )));
    }

    let mut paths: Vec<EigenPath> = levels
        .iter()
        .enumerate()
        .map(|(k, _)| EigenPath {
            path_id: k + 1,
            samples: Vec::with_capacity(grid_steps + 1),
            alive_until: 0.0,
            death: None,
        })
        .collect();
    for (p, &v) in paths.iter_mut().zip(&levels) {
        p.samples.push((0.0, Complex64::new(v, 0.0)));
    }

    // (lower path, higher path, current upper-half value)
    let mut complex_pairs: Vec<(usize, usize, Complex64)> = Vec::new();
    let mut previous_lambda = 0.0;

    for (step, lambda) in grid(lambda_max, grid_steps).enumerate().skip(1) {
        let values = spectrum(&fam.at(lambda))?;
        let eps = tol.im(spectral_radius(&values));
        let mut reals: Vec<f64> = values
            .iter()
            .filter(|z| z.im.abs() < eps)
            .map(|z| z.re)
            .collect();
        reals.sort_by(f64::total_cmp);
        let uppers: Vec<Complex64> = values.iter().copied().filter(|z| z.im >= eps).collect();

        // Existing conjugate pairs first.
        let known: Vec<Complex64> = complex_pairs.iter().map(|c| c.2).collect();
        let matched = greedy_match(&known, &uppers);
        if matched.len() < known.len() {
            return Err(SpectralError::NumericalFailure(format!(
                "a conjugate pair returned to the real axis near lambda = {lambda}"
            )));
        }
        let mut claimed = vec![false; uppers.len()];
        for &(i, j) in &matched {
            complex_pairs[i].2 = uppers[j];
            claimed[j] = true;
        }
        let mut emerging: Vec<Complex64> = uppers
            .iter()
            .zip(&claimed)
            .filter(|(_, &c)| !c)
            .map(|(z, _)| *z)
            .collect();
        // Older mergers have moved further from the axis and belong to the
        // innermost paths.
        emerging.sort_by(|x, y| y.im.total_cmp(&x.im).then(x.re.total_cmp(&y.re)));

        let mut alive: Vec<usize> = (0..n).filter(|&k| paths[k].death.is_none()).collect();
        for z in emerging {
            if alive.len() < 2 {
                return Err(SpectralError::NumericalFailure(format!(
                    "conjugate pair {z} appeared with fewer than two real paths left"
                )));
            }
            alive.sort_by(|&x, &y| {
                let dx = (last_real(&paths[x]) - z.re).abs();
                let dy = (last_real(&paths[y]) - z.re).abs();
                dx.total_cmp(&dy).then(x.cmp(&y))
            });
            let (lo, hi) = (alive[0].min(alive[1]), alive[0].max(alive[1]));
            alive.drain(..2);
            for (me, other) in [(lo, hi), (hi, lo)] {
                paths[me].death = Some(Death {
                    step,
                    lambda_lo: previous_lambda,
                    lambda_hi: lambda,
                    partner: other + 1,
                });
            }
            complex_pairs.push((lo, hi, z));
        }

        if reals.len() < alive.len() {
            return Err(SpectralError::NumericalFailure(format!(
                "{} real eigenvalues for {} real paths at lambda = {lambda}",
                reals.len(),
                alive.len()
            )));
        }
        let mut predicted: Vec<(f64, usize)> = alive
            .iter()
            .map(|&k| {
                let s = &paths[k].samples;
                let last = s[s.len() - 1].1.re;
                let pred = if s.len() >= 2 {
                    2.0 * last - s[s.len() - 2].1.re
                } else {
                    last
                };
                (pred, k)
            })
            .collect();
        predicted.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let preds: Vec<f64> = predicted.iter().map(|p| p.0).collect();
        let slots = ordered_assignment(&preds, &reals);
        for (&(_, k), &slot) in predicted.iter().zip(&slots) {
            paths[k].samples.push((lambda, Complex64::new(reals[slot], 0.0)));
            paths[k].alive_until = lambda;
        }
        for &(lo, hi, z) in &complex_pairs {
            paths[lo].samples.push((lambda, z.conj()));
            paths[hi].samples.push((lambda, z));
        }
        previous_lambda = lambda;
    }
    Ok(paths)
}

fn last_real(path: &EigenPath) -> f64 {
    path.samples.last().map_or(f64::NAN, |s| s.1.re)
}

/// Localizes every recorded merger by bisection on the number of real
/// eigenvalues inside a window around the merging pair.
pub fn detect_confluences(
    paths: &[EigenPath],
    fam: &MatrixFamily,
    tol: &Tolerances,
) -> Result<Vec<ConfluenceEvent>, SpectralError> {
    struct Found {
        event: ConfluenceEvent,
        im_above: f64,
    }

    let mut found: Vec<Found> = Vec::new();
    for (k, path) in paths.iter().enumerate() {
        let Some(death) = path.death else { continue };
        let other = death.partner - 1;
        if other < k {
            continue;
        }
        let before = death.step - 1;
        let real_at = |p: &EigenPath| -> Option<f64> {
            match p.death {
                Some(d) if d.step <= before => None,
                _ => p.samples.get(before).map(|s| s.1.re),
            }
        };
        let (va, vb) = (
            real_at(path).unwrap_or(f64::NAN),
            real_at(&paths[other]).unwrap_or(f64::NAN),
        );
        let (vmin, vmax) = (va.min(vb), va.max(vb));
        let mut lower_edge = f64::NEG_INFINITY;
        let mut upper_edge = f64::INFINITY;
        let mut inside = 2usize;
        let mut inner_dying = 0usize;
        for (q, p) in paths.iter().enumerate() {
            if q == k || q == other {
                continue;
            }
            let Some(v) = real_at(p) else { continue };
            if v < vmin {
                lower_edge = lower_edge.max(0.5 * (v + vmin));
            } else if v > vmax {
                upper_edge = upper_edge.min(0.5 * (v + vmax));
            } else {
                inside += 1;
                if p.death.is_some_and(|d| d.step == death.step) {
                    inner_dying += 1;
                }
            }
        }
        let threshold = inside - 2 - inner_dying;
        let window = |lambda: f64| -> Result<(usize, Option<Complex64>), SpectralError> {
            let values = spectrum(&fam.at(lambda))?;
            let eps = tol.im(spectral_radius(&values));
            let in_window = |z: &&Complex64| z.re > lower_edge && z.re < upper_edge;
            let reals = values
                .iter()
                .filter(in_window)
                .filter(|z| z.im.abs() < eps)
                .count();
            let newest = values
                .iter()
                .filter(in_window)
                .filter(|z| z.im >= eps)
                .min_by(|x, y| x.im.total_cmp(&y.im))
                .copied();
            Ok((reals, newest))
        };

        let (mut lo, mut hi) = (death.lambda_lo, death.lambda_hi);
        let (count_hi, mut newest) = window(hi)?;
        if count_hi > threshold {
            return Err(SpectralError::NumericalFailure(format!(
                "could not bracket the merger of paths {} and {} in [{lo}, {hi}]",
                k + 1,
                other + 1
            )));
        }
        while hi - lo > tol.lambda {
            let mid = 0.5 * (lo + hi);
            let (count, z) = window(mid)?;
            if count <= threshold {
                hi = mid;
                newest = z;
            } else {
                lo = mid;
            }
        }
        let (value, im_above) = match newest {
            Some(z) => (z.re, z.im),
            None => (0.5 * (va + vb), 0.0),
        };
        found.push(Found {
            event: ConfluenceEvent {
                lambda_star: 0.5 * (lo + hi),
                pair: [k + 1, other + 1],
                value,
            },
            im_above,
        });
    }

    found.sort_by(|x, y| {
        x.event
            .lambda_star
            .total_cmp(&y.event.lambda_star)
            .then(x.event.value.total_cmp(&y.event.value))
    });

    // Simultaneous mergers are fine when they are independent. Two events at
    // the same lambda sharing a path, or sitting on top of each other (a
    // four-fold or higher coalescence), are not pairwise mergers.
    for (i, x) in found.iter().enumerate() {
        for y in &found[i + 1..] {
            if (y.event.lambda_star - x.event.lambda_star).abs() > tol.lambda {
                break;
            }
            let shared = x.event.pair.iter().any(|a| y.event.pair.contains(a));
            let spread = (x.event.value - y.event.value).abs();
            let coalesced = spread <= 10.0 * x.im_above.max(y.im_above);
            if shared || coalesced {
                return Err(SpectralError::DegenerateMerger {
                    detail: format!(
                        "pairs {:?} and {:?} merge together at lambda = {:.9}",
                        x.event.pair, y.event.pair, x.event.lambda_star
                    ),
                    events: vec![x.event, y.event],
                });
            }
        }
    }
    Ok(found.into_iter().map(|f| f.event).collect())
}

/// Runs a sweep and reads off the merger pattern.
pub fn classify(
    fam: &MatrixFamily,
    lambda_max: f64,
    grid_steps: usize,
    tol: &Tolerances,
) -> Result<ObservedPattern, SpectralError> {
    let paths = track_paths(fam, lambda_max, grid_steps, tol)?;
    let alive: Vec<usize> = paths
        .iter()
        .filter(|p| p.is_alive())
        .map(|p| p.path_id)
        .collect();
    if !alive.is_empty() {
        return Err(SpectralError::IncompleteSweep { alive, lambda_max });
    }
    let events = detect_confluences(&paths, fam, tol)?;
    let pattern = MergerPattern::from_pairs(events.iter().map(|e| (e.pair[0], e.pair[1])))
        .map_err(|e| SpectralError::NumericalFailure(format!("events do not form a matching: {e}")))?;
    if !pattern.is_noncrossing() {
        return Err(SpectralError::CrossingPattern {
            symbol: pattern.symbol(),
            events,
        });
    }
    if fam.symmetric_hint() && !pattern.is_centrally_symmetric() {
        return Err(SpectralError::AsymmetricPattern {
            symbol: pattern.symbol(),
            events,
        });
    }
    Ok(ObservedPattern { pattern, events })
}

/// One 2x2 block of a witness family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessBlock {
    pub pair: (usize, usize),
    /// Merger value.
    pub center: f64,
    /// Half the starting gap.
    pub half_width: f64,
    pub coupling: f64,
    pub depth: usize,
}

impl WitnessBlock {
    /// `lambda` at which the block's eigenvalues `center ± sqrt(c² - g² λ²)`
    /// meet.
    pub fn lambda_star(&self) -> f64 {
        self.half_width / self.coupling
    }
}

/// Coupling layout for the witness of `p`, one block per pair in canonical
/// order. Couplings grow by a factor `ratio >= 2` per nesting level, so an
/// arch always complexifies before an enclosing arch's paths reach it. Mirror
/// arches share their coupling. The last merger happens at `lambda = 1`.
pub fn witness_blocks(p: &MergerPattern) -> Result<Vec<WitnessBlock>, SpectralError> {
    if !p.is_noncrossing() {
        return Err(SpectralError::Crossing(p.symbol()));
    }
    if !p.is_centrally_symmetric() {
        return Err(SpectralError::NotSymmetric(p.symbol()));
    }
    let mid = (p.size() as f64 + 1.0) / 2.0;
    let mut blocks: Vec<WitnessBlock> = p
        .pairs()
        .map(|(a, b)| WitnessBlock {
            pair: (a, b),
            center: (a + b) as f64 / 2.0 - mid,
            half_width: (b - a) as f64 / 2.0,
            coupling: 1.0,
            depth: p.nesting_depth(a),
        })
        .collect();
    // An enclosing arch of half-width c clears its children's intervals while
    // their merge time stays below sqrt(2c - 1) / c of its own.
    let widest_parent = blocks
        .iter()
        .filter(|b| b.half_width > 0.5)
        .map(|b| b.half_width)
        .fold(0.0, f64::max);
    let ratio = if widest_parent > 0.0 {
        (1.4 * (widest_parent - 1.0) / (2.0 * widest_parent - 1.0).sqrt()).max(2.0)
    } else {
        2.0
    };
    // Arches at the same depth are offset by up to 10% according to their
    // distance from the middle, so non-mirrored arches do not merge together.
    let size = p.size() as f64;
    for b in blocks.iter_mut() {
        b.coupling = ratio.powi(b.depth as i32) * (1.0 + 0.1 * b.center.abs() / size);
    }
    let slowest = blocks.iter().map(|b| b.lambda_star()).fold(0.0, f64::max);
    for b in blocks.iter_mut() {
        b.coupling *= slowest;
    }
    Ok(blocks)
}

/// Block-diagonal family realizing `p`: the block for pair `{a,b}` is
/// `[[m + c, g λ], [-g λ, m - c]]` with eigenvalues `m ± sqrt(c² - g² λ²)`.
/// The starting levels sit at `n - (2J + 1)/2`, so the spectrum is symmetric
/// about zero and its ascending order matches the labels.
pub fn build_witness(p: &MergerPattern) -> Result<MatrixFamily, SpectralError> {
    let blocks = witness_blocks(p)?;
    let n = p.size();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for (k, blk) in blocks.iter().enumerate() {
        let (r, s) = (2 * k, 2 * k + 1);
        a[(r, r)] = blk.center + blk.half_width;
        a[(s, s)] = blk.center - blk.half_width;
        b[(r, s)] = blk.coupling;
        b[(s, r)] = -blk.coupling;
    }
    MatrixFamily::new(a, b, true)
}

/// A sweep length that covers every merger of the witness of `p`.
pub fn witness_lambda_max(p: &MergerPattern) -> Result<f64, SpectralError> {
    let blocks = witness_blocks(p)?;
    Ok(1.25 * blocks.iter().map(|b| b.lambda_star()).fold(0.0, f64::max))
}

/// Reference point of the reflection `E -> c_lower + c_upper - E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumCenter {
    pub c_lower: f64,
    pub c_upper: f64,
}

impl SpectrumCenter {
    /// Only `c_lower + c_upper` is observable; both are set to the mean
    /// eigenvalue.
    pub fn from_spectrum(values: &[Complex64]) -> Self {
        let mean = values.iter().map(|z| z.re).sum::<f64>() / values.len().max(1) as f64;
        Self {
            c_lower: mean,
            c_upper: mean,
        }
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.c_lower + self.c_upper)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    pub center: SpectrumCenter,
    /// Largest distance between an eigenvalue and its reflected partner.
    pub worst_deviation: f64,
    pub worst_lambda: f64,
}

/// Checks that the spectrum at every sample is invariant under
/// `z -> 2 * center - z`, the center being the mean eigenvalue of `A`.
pub fn check_central_symmetry(
    fam: &MatrixFamily,
    lambda_samples: &[f64],
    tol: &Tolerances,
) -> Result<SymmetryCheck, SpectralError> {
    let center = SpectrumCenter::from_spectrum(&spectrum(fam.a())?);
    let c2 = 2.0 * center.center();
    let mut symmetric = true;
    let mut worst_deviation = 0.0;
    let mut worst_lambda = 0.0;
    for &lambda in lambda_samples {
        let values = spectrum(&fam.at(lambda))?;
        let reflected: Vec<Complex64> = values.iter().map(|z| c2 - z).collect();
        let matched = greedy_match(&values, &reflected);
        let deviation = matched
            .iter()
            .map(|&(i, j)| (values[i] - reflected[j]).norm())
            .fold(0.0, f64::max);
        if deviation > worst_deviation {
            worst_deviation = deviation;
            worst_lambda = lambda;
        }
        if deviation > tol.im(spectral_radius(&values)) {
            symmetric = false;
        }
    }
    Ok(SymmetryCheck {
        symmetric,
        center,
        worst_deviation,
        worst_lambda,
    })
}

fn fmt_number(x: f64) -> String {
    // no negative zero in output
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

/// Writes `lambda,path_id,re,im` rows, grid point by grid point.
pub fn write_paths_csv<W: Write>(paths: &[EigenPath], mut out: W) -> io::Result<()> {
    writeln!(out, "lambda,path_id,re,im")?;
    let mut rows: BTreeMap<(usize, usize), (f64, Complex64)> = BTreeMap::new();
    for p in paths {
        for (k, &(lambda, z)) in p.samples.iter().enumerate() {
            rows.insert((k, p.path_id), (lambda, z));
        }
    }
    for ((_, id), (lambda, z)) in rows {
        writeln!(
            out,
            "{lambda:.9},{id},{},{}",
            fmt_number(z.re),
            fmt_number(z.im)
        )?;
    }
    Ok(())
}

pub fn events_json(events: &[ConfluenceEvent]) -> String {
    serde_json::to_string(events).expect("events serialize")
}

impl From<PatternError> for SpectralError {
    fn from(e: PatternError) -> Self {
        SpectralError::InvalidFamily(e.to_string())
    }
}
