use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvaluationPoint;

/// Deterministic sample set: `points` base points in `[-1, 1]^n`, each paired
/// with `directions` unit tangent vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleSpec {
    pub points: usize,
    pub directions: usize,
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            points: 4,
            directions: 8,
            seed: 20240611,
        }
    }
}

pub fn sample_x(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect()
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let l = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / l).collect()
}

/// Axes, the diagonal, the alternating anti-diagonal, then pseudo-random unit
/// vectors; never fewer than eight.
pub fn y_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let count = count.max(8);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e);
    }
    out.push(unit(vec![1.0; n]));
    out.push(unit(
        (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if v.iter().map(|c| c * c).sum::<f64>() > 0.05 {
            out.push(unit(v));
        }
    }
    out.truncate(count);
    out
}

/// Every `(x, y)` pair the sample describes, ordered by point then direction.
pub fn sample_points(n: usize, spec: &SampleSpec) -> Vec<EvaluationPoint> {
    let ys = y_directions(n, spec.directions, spec.seed);
    sample_x(n, spec.points, spec.seed)
        .into_iter()
        .flat_map(|x| {
            ys.iter().map(move |y| EvaluationPoint {
                x: x.clone(),
                y: y.clone(),
            })
        })
        .collect()
}
