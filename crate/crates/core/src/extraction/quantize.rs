use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::nearest_level;
use crate::controller::{ActionActivation, Order, WeightSet};
use crate::error::{Error, Result};

/// The five-level state grid.
pub const FIVE_LEVELS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Three-way threshold: `+1` above `threshold`, `-1` below `-threshold`.
pub fn quantize_action(a: f64, threshold: f64) -> i8 {
    if a > threshold {
        1
    } else if a < -threshold {
        -1
    } else {
        0
    }
}

/// Thresholds every entry of the linear full-order action tensor.
pub fn quantize_action_weights(weights: &WeightSet, threshold: f64) -> Result<Vec<i8>> {
    if weights.order() != Order::FullOrderAction
        || weights.action_activation() != ActionActivation::Linear
    {
        return Err(Error::WrongVariant(format!(
            "{} order with {} action has no ternary action tensor",
            weights.order(),
            weights.action_activation().name()
        )));
    }
    Ok(weights
        .w_action()
        .iter()
        .map(|&w| quantize_action(w, threshold))
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateScheme {
    /// Nearest grid value per component (ties round up).
    Levels(Vec<f64>),
    /// `>= 0.5` maps to 1.
    Binary,
    /// Nearest of `k` centres fitted on recorded states.
    KMeans(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantizationConfig {
    pub action_threshold: f64,
    pub weight_threshold: f64,
    pub state_scheme: StateScheme,
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        QuantizationConfig {
            action_threshold: 0.5,
            weight_threshold: 0.5,
            state_scheme: StateScheme::Binary,
        }
    }
}

impl QuantizationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in [
            ("action", self.action_threshold),
            ("weight", self.weight_threshold),
        ] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::OutOfRange(format!(
                    "{name} threshold {t} outside (0, 1)"
                )));
            }
        }
        match &self.state_scheme {
            StateScheme::Levels(g) if g.is_empty() => Err(Error::EmptyGrid),
            StateScheme::KMeans(0) => Err(Error::Config("k-means needs k >= 1".into())),
            _ => Ok(()),
        }
    }
}

/// Maps analog state vectors to discrete labels. A label is itself a state
/// vector so the controller can be stepped from it.
#[derive(Clone, Debug, PartialEq)]
pub enum StateQuantizer {
    Levels(Vec<f64>),
    Binary,
    KMeans(Option<Vec<Vec<f64>>>),
}

impl StateQuantizer {
    pub fn from_scheme(scheme: &StateScheme) -> Result<Self> {
        Ok(match scheme {
            StateScheme::Levels(g) => {
                if g.is_empty() {
                    return Err(Error::EmptyGrid);
                }
                let mut g = g.clone();
                g.sort_by(f64::total_cmp);
                StateQuantizer::Levels(g)
            }
            StateScheme::Binary => StateQuantizer::Binary,
            StateScheme::KMeans(_) => StateQuantizer::KMeans(None),
        })
    }

    pub fn five_levels() -> Self {
        StateQuantizer::Levels(FIVE_LEVELS.to_vec())
    }

    /// Lloyd's algorithm with k-means++ seeding. Returns the quantizer and
    /// the mean distance from each point to its centre.
    pub fn fit_kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<(Self, f64)> {
        if points.is_empty() || k == 0 {
            return Err(Error::Config("k-means needs points and k >= 1".into()));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Dimension("k-means points differ in length".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centers: Vec<Vec<f64>> = vec![points[rng.gen_range(0..points.len())].clone()];
        while centers.len() < k.min(points.len()) {
            let d2: Vec<f64> = points
                .iter()
                .map(|p| nearest(&centers, p).1.powi(2))
                .collect();
            let total: f64 = d2.iter().sum();
            if total <= 0.0 {
                break;
            }
            let mut pick = rng.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if pick < d {
                    chosen = i;
                    break;
                }
                pick -= d;
            }
            centers.push(points[chosen].clone());
        }
        for _ in 0..100 {
            let mut sums = vec![vec![0.0; dim]; centers.len()];
            let mut counts = vec![0usize; centers.len()];
            for p in points {
                let c = nearest(&centers, p).0;
                counts[c] += 1;
                for (s, x) in sums[c].iter_mut().zip(p) {
                    *s += x;
                }
            }
            let mut moved = false;
            for (c, center) in centers.iter_mut().enumerate() {
                if counts[c] == 0 {
                    continue;
                }
                for (x, s) in center.iter_mut().zip(&sums[c]) {
                    let nx = s / counts[c] as f64;
                    moved |= nx != *x;
                    *x = nx;
                }
            }
            if !moved {
                break;
            }
        }
        let mean = points.iter().map(|p| nearest(&centers, p).1).sum::<f64>() / points.len() as f64;
        Ok((StateQuantizer::KMeans(Some(centers)), mean))
    }

    pub fn quantize(&self, s: &[f64]) -> Result<Vec<f64>> {
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("state vector".into()));
        }
        match self {
            StateQuantizer::Levels(grid) => {
                if grid.is_empty() {
                    return Err(Error::EmptyGrid);
                }
                Ok(s.iter().map(|&x| nearest_level(x, grid)).collect())
            }
            StateQuantizer::Binary => Ok(s
                .iter()
                .map(|&x| if x >= 0.5 { 1.0 } else { 0.0 })
                .collect()),
            StateQuantizer::KMeans(None) => Err(Error::UnfittedKMeans),
            StateQuantizer::KMeans(Some(centers)) => Ok(centers[nearest(centers, s).0].clone()),
        }
    }
}

fn nearest(centers: &[Vec<f64>], p: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = c
            .iter()
            .zip(p)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}
