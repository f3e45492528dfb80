//! Bounded derivative-free minimization (Nelder-Mead simplex).
//!
//! The search runs in coordinates normalized to the unit box; candidate
//! points are clamped to the box before evaluation, so the objective is never
//! called outside the bounds. Non-finite objective values are treated as
//! +infinity, which lets callers use validity barriers instead of panicking.

use crate::error::{Result, SimError};

/// Inclusive box bounds, one (lower, upper) pair per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(pairs: &[(f64, f64)]) -> Self {
        Bounds {
            lower: pairs.iter().map(|p| p.0).collect(),
            upper: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(SimError::invalid("bounds have mismatched lengths"));
        }
        for (lo, hi) in self.lower.iter().zip(&self.upper) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SimError::invalid(
                    "each bound pair must be finite with lower < upper",
                ));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect()
    }

    fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| lo + v.clamp(0.0, 1.0) * (hi - lo))
            .collect()
    }
}

/// Simplex search knobs.
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Hard cap on objective evaluations.
    pub max_evaluations: usize,
    /// Initial simplex edge length in unit-box coordinates.
    pub initial_step: f64,
    /// Converged when the simplex value spread and edge lengths drop below
    /// these (absolute, in objective units and unit-box units respectively).
    pub value_tolerance: f64,
    pub coordinate_tolerance: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_evaluations: 200,
            initial_step: 0.15,
            value_tolerance: 1.0e-12,
            coordinate_tolerance: 1.0e-7,
        }
    }
}

/// One objective evaluation, in physical (unnormalized) coordinates.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub best: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub log: Vec<EvalRecord>,
}

fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Minimize `objective` inside `bounds` starting from `start`.
///
/// Standard Nelder-Mead (reflect 1, expand 2, contract 0.5, shrink 0.5) on
/// the unit box. Deterministic: no internal randomness; restarts are the
/// caller's concern.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    start: &[f64],
    bounds: &Bounds,
    options: &SimplexOptions,
) -> Result<SimplexResult> {
    bounds.validate()?;
    let n = bounds.dim();
    if start.len() != n {
        return Err(SimError::invalid("start point dimension mismatch"));
    }
    if n == 0 {
        return Ok(SimplexResult {
            best: Vec::new(),
            best_value: sanitize(objective(&[])),
            evaluations: 1,
            converged: true,
            log: vec![EvalRecord {
                params: Vec::new(),
                value: f64::NAN,
            }],
        });
    }
    if options.max_evaluations < n + 2 {
        return Err(SimError::invalid(
            "evaluation budget too small for a simplex",
        ));
    }

    let mut log: Vec<EvalRecord> = Vec::new();
    let mut evals = 0usize;
    let mut eval_unit = |u: &[f64], log: &mut Vec<EvalRecord>, evals: &mut usize| -> f64 {
        let x = bounds.from_unit(u);
        let v = sanitize(objective(&x));
        log.push(EvalRecord {
            params: x,
            value: v,
        });
        *evals += 1;
        v
    };

    // Initial simplex: start plus one step along each axis, stepping inward
    // when the positive direction would leave the box.
    let u0 = bounds.to_unit(start);
    let mut simplex: Vec<Vec<f64>> = vec![u0.clone()];
    for i in 0..n {
        let mut u = u0.clone();
        let step = options.initial_step.clamp(1.0e-6, 0.5);
        u[i] = if u[i] + step <= 1.0 { u[i] + step } else { u[i] - step };
        simplex.push(u);
    }
    let mut values: Vec<f64> = simplex
        .iter()
        .map(|u| eval_unit(u, &mut log, &mut evals))
        .collect();

    let centroid = |simplex: &[Vec<f64>], exclude: usize| -> Vec<f64> {
        let mut c = vec![0.0; n];
        for (k, u) in simplex.iter().enumerate() {
            if k == exclude {
                continue;
            }
            for (ci, ui) in c.iter_mut().zip(u) {
                *ci += ui;
            }
        }
        for ci in c.iter_mut() {
            *ci /= n as f64;
        }
        c
    };
    let blend = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        // a + t (a - b), clamped to the unit box.
        a.iter()
            .zip(b)
            .map(|(ai, bi)| (ai + t * (ai - bi)).clamp(0.0, 1.0))
            .collect()
    };

    let mut converged = false;
    while evals + 2 <= options.max_evaluations {
        // Order: best first.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .flat_map(|u| {
                simplex[best]
                    .iter()
                    .zip(u)
                    .map(|(a, b)| (a - b).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0f64, f64::max);
        if spread.abs() <= options.value_tolerance && diameter <= options.coordinate_tolerance {
            converged = true;
            break;
        }

        let c = centroid(&simplex, worst);
        let reflected = blend(&c, &simplex[worst], 1.0);
        let f_reflected = eval_unit(&reflected, &mut log, &mut evals);

        if f_reflected < values[best] {
            // Try expanding further along the same direction.
            let expanded = blend(&c, &simplex[worst], 2.0);
            let f_expanded = eval_unit(&expanded, &mut log, &mut evals);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            // Contract toward the centroid, outside or inside.
            let (candidate, f_candidate) = if f_reflected < values[worst] {
                let outside = blend(&c, &simplex[worst], 0.5);
                let f = eval_unit(&outside, &mut log, &mut evals);
                (outside, f)
            } else {
                let inside = blend(&c, &simplex[worst], -0.5);
                let f = eval_unit(&inside, &mut log, &mut evals);
                (inside, f)
            };
            if f_candidate < values[worst].min(f_reflected) {
                simplex[worst] = candidate;
                values[worst] = f_candidate;
            } else {
                // Shrink everything toward the best vertex.
                for k in 0..=n {
                    if k == best {
                        continue;
                    }
                    simplex[k] = simplex[best]
                        .iter()
                        .zip(&simplex[k])
                        .map(|(b, u)| b + 0.5 * (u - b))
                        .collect();
                    if evals >= options.max_evaluations {
                        break;
                    }
                    values[k] = eval_unit(&simplex[k], &mut log, &mut evals);
                }
            }
        }
    }

    let (best_idx, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("simplex is non-empty");
    // The log may hold a better point than the survivor set (e.g. a rejected
    // expansion); report the global best seen.
    let mut best = bounds.from_unit(&simplex[best_idx]);
    let mut best_value = values[best_idx];
    for rec in &log {
        if rec.value < best_value && !rec.params.is_empty() {
            best_value = rec.value;
            best = rec.params.clone();
        }
    }
    Ok(SimplexResult {
        best,
        best_value,
        evaluations: evals,
        converged,
        log,
    })
}
