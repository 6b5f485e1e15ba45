//! Alternating least squares for implicit feedback.
//!
//! Every cell of the user x track matrix contributes
//! `c_ui * (p_ui - x_u . y_i)^2` with preference `p_ui = 1` when the count is
//! positive (0 otherwise) and confidence `c_ui = 1 + confidence * count`. Each
//! half-sweep solves the ridge problem of one side exactly, using
//! `Y^T C_u Y = Y^T Y + Y^T (C_u - I) Y` so empty cells cost nothing.

use alloc::vec::Vec;

use rand::Rng;

use super::factor::dot;
use super::linalg::solve_spd;
use super::{FactorKind, FactorModel, Hyperparameters};
use crate::matrix::InteractionMatrix;
use crate::rng::keyed_rng;
use crate::Error;

const INIT_STREAM: u64 = 1;
const INIT_SCALE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlsParams {
    pub factors: usize,
    pub sweeps: usize,
    pub regularization: f64,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for AlsParams {
    fn default() -> Self {
        Self {
            factors: 50,
            sweeps: 20,
            regularization: 0.07,
            confidence: 40.0,
            seed: 0,
        }
    }
}

impl AlsParams {
    fn validate(&self) -> Result<(), Error> {
        if self.factors == 0 {
            return Err(Error::InvalidHyperparameter("factors"));
        }
        if !(self.regularization > 0.0 && self.regularization.is_finite()) {
            return Err(Error::InvalidHyperparameter("regularization"));
        }
        if !(self.confidence > 0.0 && self.confidence.is_finite()) {
            return Err(Error::InvalidHyperparameter("confidence"));
        }
        Ok(())
    }
}

/// A trained model plus the objective after every half-sweep (users, then
/// items, alternating). Entry 0 is the objective at initialization.
#[derive(Debug, Clone)]
pub struct AlsFit {
    pub model: FactorModel,
    pub half_sweep_objective: Vec<f64>,
}

pub fn train_als_implicit(
    matrix: &InteractionMatrix,
    params: &AlsParams,
) -> Result<FactorModel, Error> {
    fit_als_implicit(matrix, params).map(|fit| fit.model)
}

pub fn fit_als_implicit(matrix: &InteractionMatrix, params: &AlsParams) -> Result<AlsFit, Error> {
    params.validate()?;
    if let Some((user, track, value)) = matrix.first_negative() {
        return Err(Error::NegativeCounts { user, track, value });
    }
    let k = params.factors;
    let mut rng = keyed_rng(params.seed, INIT_STREAM);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| rng.random_range(-INIT_SCALE..=INIT_SCALE))
            .collect()
    };
    let mut users = draw(matrix.user_count() * k);
    let mut items = draw(matrix.track_count() * k);

    let rows: Vec<&[(usize, f64)]> = (0..matrix.user_count()).map(|u| matrix.row(u)).collect();
    let cols: Vec<&[(usize, f64)]> = (0..matrix.track_count()).map(|i| matrix.col(i)).collect();

    let mut trace = Vec::with_capacity(2 * params.sweeps + 1);
    trace.push(objective_raw(&rows, &users, &items, k, params));
    for _ in 0..params.sweeps {
        half_sweep(&rows, &items, &mut users, k, params);
        trace.push(objective_raw(&rows, &users, &items, k, params));
        half_sweep(&cols, &users, &mut items, k, params);
        trace.push(objective_raw(&rows, &users, &items, k, params));
    }

    let hyper = Hyperparameters {
        factors: k,
        iterations: params.sweeps,
        regularization: params.regularization,
        learning_rate: 0.0,
        confidence: params.confidence,
        seed: params.seed,
    };
    let model = FactorModel::from_parts(
        FactorKind::Als,
        hyper,
        0.0,
        matrix.user_ids().to_vec(),
        matrix.track_ids().to_vec(),
        users,
        items,
    )?;
    Ok(AlsFit {
        model,
        half_sweep_objective: trace,
    })
}

/// `fixed^T fixed` as a dense `k x k` matrix.
fn gram(fixed: &[f64], k: usize) -> Vec<f64> {
    let mut g = alloc::vec![0.0; k * k];
    for v in fixed.chunks_exact(k) {
        for a in 0..k {
            for b in a..k {
                g[a * k + b] += v[a] * v[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            g[a * k + b] = g[b * k + a];
        }
    }
    g
}

/// Re-solves every vector of `target` against `fixed`, one row of `lines` each.
fn half_sweep(
    lines: &[&[(usize, f64)]],
    fixed: &[f64],
    target: &mut [f64],
    k: usize,
    params: &AlsParams,
) {
    let base = gram(fixed, k);
    let mut a = alloc::vec![0.0; k * k];
    let mut b = alloc::vec![0.0; k];
    for (idx, line) in lines.iter().enumerate() {
        a.copy_from_slice(&base);
        b.iter_mut().for_each(|v| *v = 0.0);
        for d in 0..k {
            a[d * k + d] += params.regularization;
        }
        for &(j, count) in line.iter() {
            let y = &fixed[j * k..(j + 1) * k];
            let c = 1.0 + params.confidence * count;
            for r in 0..k {
                let w = (c - 1.0) * y[r];
                for s in r..k {
                    a[r * k + s] += w * y[s];
                }
                // preference is 1 for every stored (positive) cell
                b[r] += c * y[r];
            }
        }
        for r in 0..k {
            for s in 0..r {
                a[r * k + s] = a[s * k + r];
            }
        }
        let out = &mut target[idx * k..(idx + 1) * k];
        if solve_spd(&mut a, &mut b, k) {
            out.copy_from_slice(&b);
        }
    }
}

fn objective_raw(
    rows: &[&[(usize, f64)]],
    users: &[f64],
    items: &[f64],
    k: usize,
    params: &AlsParams,
) -> f64 {
    // sum over every cell of (x.y)^2, then correct the stored cells
    let g = gram(items, k);
    let mut total = 0.0;
    for (u, row) in rows.iter().enumerate() {
        let x = &users[u * k..(u + 1) * k];
        for a in 0..k {
            total += x[a] * dot(&g[a * k..(a + 1) * k], x);
        }
        for &(i, count) in row.iter() {
            let s = dot(x, &items[i * k..(i + 1) * k]);
            let c = 1.0 + params.confidence * count;
            total += c * (1.0 - s) * (1.0 - s) - s * s;
        }
    }
    total + params.regularization * (dot(users, users) + dot(items, items))
}

/// Confidence-weighted objective of an ALS model on `matrix`, summed over
/// every cell of the model's user x track grid.
pub fn als_objective(model: &FactorModel, matrix: &InteractionMatrix) -> f64 {
    let k = model.factors();
    let params = AlsParams {
        factors: k,
        sweeps: 0,
        regularization: model.hyper.regularization,
        confidence: model.hyper.confidence,
        seed: 0,
    };
    let rows: Vec<Vec<(usize, f64)>> = model
        .user_ids()
        .iter()
        .map(|&u| {
            matrix
                .user_index(u)
                .map(|mu| {
                    matrix
                        .row(mu)
                        .iter()
                        .filter_map(|&(ti, v)| {
                            Some((model.track_index(matrix.track_ids()[ti])?, v))
                        })
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect();
    let rows: Vec<&[(usize, f64)]> = rows.iter().map(Vec::as_slice).collect();
    objective_raw(&rows, &model.user_factors, &model.item_factors, k, &params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> InteractionMatrix {
        InteractionMatrix::from_entries([
            (1, 1, 3.0),
            (1, 2, 1.0),
            (2, 2, 5.0),
            (3, 1, 1.0),
            (3, 3, 2.0),
        ])
    }

    #[test]
    fn zero_sweeps_is_initialization() {
        let params = AlsParams {
            factors: 2,
            sweeps: 0,
            ..AlsParams::default()
        };
        let fit = fit_als_implicit(&small(), &params).unwrap();
        assert_eq!(fit.half_sweep_objective.len(), 1);
        assert!(fit.model.user_factors.iter().all(|v| v.abs() <= INIT_SCALE));
    }

    #[test]
    fn objective_never_increases() {
        let params = AlsParams {
            factors: 2,
            sweeps: 10,
            seed: 5,
            ..AlsParams::default()
        };
        let fit = fit_als_implicit(&small(), &params).unwrap();
        for w in fit.half_sweep_objective.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{} -> {}", w[0], w[1]);
        }
        let recomputed = als_objective(&fit.model, &small());
        let last = *fit.half_sweep_objective.last().unwrap();
        assert!((recomputed - last).abs() <= 1e-9 * last.abs());
    }

    #[test]
    fn rejects_bad_inputs() {
        let neg = InteractionMatrix::from_entries([(1, 1, -1.0)]);
        assert!(matches!(
            train_als_implicit(&neg, &AlsParams::default()),
            Err(Error::NegativeCounts { .. })
        ));
        for params in [
            AlsParams {
                factors: 0,
                ..AlsParams::default()
            },
            AlsParams {
                regularization: 0.0,
                ..AlsParams::default()
            },
            AlsParams {
                confidence: 0.0,
                ..AlsParams::default()
            },
        ] {
            assert!(matches!(
                train_als_implicit(&small(), &params),
                Err(Error::InvalidHyperparameter(_))
            ));
        }
    }

    #[test]
    fn scores_observed_cells_higher() {
        let params = AlsParams {
            factors: 3,
            sweeps: 15,
            ..AlsParams::default()
        };
        let model = train_als_implicit(&small(), &params).unwrap();
        assert!(model.predict(2, 2) > model.predict(2, 3));
        assert_eq!(model.predict(99, 1), 0.0);
    }
}
