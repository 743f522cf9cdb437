//! Regularized variational regression lab: a single-qubit ansatz
//! `U(theta, x) = R_x(x) R_z(theta_1) R_y(theta_2) R_z(theta_3)` trained on
//! `y = sin(x)` with parameter-shift gradients, ADAM, an `lambda ||theta||^2`
//! regularizer and coherent control noise injected on the trainable
//! rotations (never on the data-encoding `R_x(x)`).

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::Circuit;
use crate::numerics::C64;
use crate::rng::SeededRng;
use crate::Result;

pub const N_PARAMS: usize = 3;

/// Training data: 20 equidistant points in `[0, 2 pi]` with `y = sin(x)`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Dataset {
    pub fn sine(n_points: usize) -> Self {
        assert!(n_points >= 2);
        let xs: Vec<f64> = (0..n_points)
            .map(|i| 2.0 * PI * i as f64 / (n_points - 1) as f64)
            .collect();
        let ys = xs.iter().map(|x| x.sin()).collect();
        Self { xs, ys }
    }
}

impl Default for Dataset {
    fn default() -> Self {
        Self::sine(20)
    }
}

// --- prediction ----------------------------------------------------------

type Vec2 = [C64; 2];

fn mul_rz(v: Vec2, theta: f64) -> Vec2 {
    let half = theta / 2.0;
    [
        v[0] * C64::new(0.0, -half).exp(),
        v[1] * C64::new(0.0, half).exp(),
    ]
}

fn mul_ry(v: Vec2, theta: f64) -> Vec2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        v[0] * C64::new(c, 0.0) - v[1] * C64::new(s, 0.0),
        v[0] * C64::new(s, 0.0) + v[1] * C64::new(c, 0.0),
    ]
}

fn mul_rx(v: Vec2, theta: f64) -> Vec2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        v[0] * C64::new(c, 0.0) + v[1] * C64::new(0.0, -s),
        v[0] * C64::new(0.0, -s) + v[1] * C64::new(c, 0.0),
    ]
}

/// `<Z>` of `R_x(x) R_z(a_1) R_y(a_2) R_z(a_3) |0>` with explicit angles.
fn expectation_z(angles: [f64; N_PARAMS], x: f64) -> f64 {
    let mut v: Vec2 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    v = mul_rz(v, angles[2]);
    v = mul_ry(v, angles[1]);
    v = mul_rz(v, angles[0]);
    v = mul_rx(v, x);
    v[0].norm_sqr() - v[1].norm_sqr()
}

/// Expectation estimation: exact value or binomial shot sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    Shots(u64),
}

/// `f_theta(x)`; with `noise_eps > 0` each trainable angle is perturbed as
/// `theta_i (1 + eps_i)` with a fresh uniform draw per call.
pub fn predict(
    theta: [f64; N_PARAMS],
    x: f64,
    mode: EvalMode,
    noise_eps: f64,
    rng: &mut impl Rng,
) -> f64 {
    let mut angles = theta;
    if noise_eps > 0.0 {
        for a in &mut angles {
            *a *= 1.0 + rng.gen_range(-noise_eps..=noise_eps);
        }
    }
    let exact = expectation_z(angles, x);
    match mode {
        EvalMode::Exact => exact,
        EvalMode::Shots(shots) => {
            let p_plus = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
            let n_plus = Binomial::new(shots, p_plus)
                .expect("probability in [0, 1]")
                .sample(rng);
            2.0 * n_plus as f64 / shots as f64 - 1.0
        }
    }
}

/// `(1/n) sum (y_i - f_theta(x_i))^2`; fresh noise draws per evaluation.
pub fn mse_cost(
    theta: [f64; N_PARAMS],
    data: &Dataset,
    mode: EvalMode,
    noise_eps: f64,
    rng: &mut impl Rng,
) -> f64 {
    let n = data.xs.len() as f64;
    data.xs
        .iter()
        .zip(&data.ys)
        .map(|(&x, &y)| {
            let f = predict(theta, x, mode, noise_eps, rng);
            (y - f) * (y - f)
        })
        .sum::<f64>()
        / n
}

pub fn regularized_cost(
    theta: [f64; N_PARAMS],
    data: &Dataset,
    lambda: f64,
    mode: EvalMode,
    noise_eps: f64,
    rng: &mut impl Rng,
) -> f64 {
    let reg: f64 = theta.iter().map(|t| t * t).sum::<f64>() * lambda;
    mse_cost(theta, data, mode, noise_eps, rng) + reg
}

/// Parameter-shift gradient of the regularized objective:
/// `df/dtheta_i = [f(theta + (pi/2) e_i) - f(theta - (pi/2) e_i)] / 2`
/// chained through the MSE derivative, plus `2 lambda theta`.
pub fn parameter_shift_grad(
    theta: [f64; N_PARAMS],
    data: &Dataset,
    lambda: f64,
    mode: EvalMode,
    noise_eps: f64,
    rng: &mut impl Rng,
) -> [f64; N_PARAMS] {
    let n = data.xs.len() as f64;
    let mut grad = [0.0; N_PARAMS];
    for (&x, &y) in data.xs.iter().zip(&data.ys) {
        let base = predict(theta, x, mode, noise_eps, rng);
        for i in 0..N_PARAMS {
            let mut plus = theta;
            plus[i] += PI / 2.0;
            let mut minus = theta;
            minus[i] -= PI / 2.0;
            let df = (predict(plus, x, mode, noise_eps, rng)
                - predict(minus, x, mode, noise_eps, rng))
                / 2.0;
            grad[i] += 2.0 / n * (base - y) * df;
        }
    }
    for i in 0..N_PARAMS {
        grad[i] += 2.0 * lambda * theta[i];
    }
    grad
}

/// The ansatz as a circuit: trainable rotations noisy, data encoding not.
pub fn model_circuit(theta: [f64; N_PARAMS], x: f64, eps_bar: f64) -> Result<Circuit> {
    let mut c = Circuit::new(1)?;
    // Gate list is the operator product; the last element acts first, so
    // push in product order R_z(t1), R_y(t2), R_z(t3).
    c.push("rz", &[theta[0]], &[0], true)?;
    c.push("ry", &[theta[1]], &[0], true)?;
    c.push("rz", &[theta[2]], &[0], true)?;
    c.apply("rx", &[x], &[0], false)?;
    Ok(c.with_noise(eps_bar))
}

/// `sum |theta_i| / 2`: the Lipschitz bound of the trained circuit.
pub fn lipschitz_of_theta(theta: [f64; N_PARAMS]) -> f64 {
    theta.iter().map(|t| t.abs() / 2.0).sum()
}

// --- training ------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub lambda: f64,
    pub iters: usize,
    pub restarts: usize,
    pub lr: f64,
    pub noise_eps: f64,
    pub mode: EvalMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            iters: 50,
            restarts: 8,
            lr: 0.1,
            noise_eps: 0.05,
            mode: EvalMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainRecord {
    pub lambda: f64,
    pub seed_ids: Vec<u64>,
    pub restart_index: usize,
    pub theta_trajectory: Vec<[f64; N_PARAMS]>,
    /// Regularized cost as seen by the optimizer (with noise/shots).
    pub cost_trajectory: Vec<f64>,
    pub final_theta: [f64; N_PARAMS],
    /// Noise-free exact MSE of the selected model.
    pub final_mse: f64,
    pub final_lipschitz: f64,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_DELTA: f64 = 1e-8;
const VQA_STREAM: u64 = 0x76716;

struct Restart {
    theta_trajectory: Vec<[f64; N_PARAMS]>,
    cost_trajectory: Vec<f64>,
    final_mse: f64,
}

fn run_restart(cfg: &TrainConfig, data: &Dataset, rng: &mut impl Rng) -> Restart {
    let mut theta = [0.0; N_PARAMS];
    for t in &mut theta {
        *t = rng.gen_range(-2.0 * PI..=2.0 * PI);
    }
    let mut m = [0.0; N_PARAMS];
    let mut v = [0.0; N_PARAMS];
    let mut theta_trajectory = vec![theta];
    let mut cost_trajectory =
        vec![regularized_cost(theta, data, cfg.lambda, cfg.mode, cfg.noise_eps, rng)];
    for step in 1..=cfg.iters {
        let grad = parameter_shift_grad(theta, data, cfg.lambda, cfg.mode, cfg.noise_eps, rng);
        for i in 0..N_PARAMS {
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * grad[i];
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * grad[i] * grad[i];
            let m_hat = m[i] / (1.0 - ADAM_BETA1.powi(step as i32));
            let v_hat = v[i] / (1.0 - ADAM_BETA2.powi(step as i32));
            theta[i] -= cfg.lr * m_hat / (v_hat.sqrt() + ADAM_DELTA);
        }
        theta_trajectory.push(theta);
        cost_trajectory.push(regularized_cost(
            theta,
            data,
            cfg.lambda,
            cfg.mode,
            cfg.noise_eps,
            rng,
        ));
    }
    // Model selection is by the noise-free exact cost, so shot noise in the
    // objective cannot flip the choice between runs.
    let mut quiet = rand_chacha::ChaCha8Rng::from_seed([0; 32]);
    let final_mse = mse_cost(theta, data, EvalMode::Exact, 0.0, &mut quiet);
    Restart {
        theta_trajectory,
        cost_trajectory,
        final_mse,
    }
}

use rand_chacha::rand_core::SeedableRng;

/// Multi-restart ADAM training; restarts run in parallel on substreams
/// `(VQA_STREAM, cell_ids..., restart)` and the winner is the restart with
/// the smallest final cost (ties toward the lower restart index).
pub fn adam_train(
    cfg: &TrainConfig,
    data: &Dataset,
    seed: &SeededRng,
    cell_ids: &[u64],
) -> TrainRecord {
    let restarts: Vec<Restart> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut ids = vec![VQA_STREAM];
            ids.extend_from_slice(cell_ids);
            ids.push(r as u64);
            let mut rng = seed.stream(&ids);
            run_restart(cfg, data, &mut rng)
        })
        .collect();
    let best = restarts
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let ca = a.final_mse + cfg.lambda * norm_sq(a.theta_trajectory.last().unwrap());
            let cb = b.final_mse + cfg.lambda * norm_sq(b.theta_trajectory.last().unwrap());
            ca.total_cmp(&cb)
        })
        .map(|(i, _)| i)
        .expect("at least one restart");
    let chosen = &restarts[best];
    let final_theta = *chosen.theta_trajectory.last().unwrap();
    TrainRecord {
        lambda: cfg.lambda,
        seed_ids: cell_ids.to_vec(),
        restart_index: best,
        theta_trajectory: chosen.theta_trajectory.clone(),
        cost_trajectory: chosen.cost_trajectory.clone(),
        final_theta,
        final_mse: chosen.final_mse,
        final_lipschitz: lipschitz_of_theta(final_theta),
    }
}

fn norm_sq(theta: &[f64; N_PARAMS]) -> f64 {
    theta.iter().map(|t| t * t).sum()
}

// --- regularization study ------------------------------------------------

pub const STUDY_LAMBDAS: [f64; 5] = [0.0, 0.01, 0.05, 0.1, 0.5];
pub const STUDY_SEEDS: usize = 8;

#[derive(Debug, Clone, Serialize)]
pub struct StudyRun {
    pub lambda: f64,
    pub seed_index: usize,
    pub final_mse: f64,
    pub final_lipschitz: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub lambda: f64,
    pub mean_lipschitz: f64,
    pub std_lipschitz: f64,
    pub mean_mse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyResult {
    pub rows: Vec<StudyRow>,
    pub runs: Vec<StudyRun>,
}

/// Train `STUDY_SEEDS` models per regularization weight and aggregate the
/// resulting Lipschitz bounds.
pub fn regularization_study(
    lambdas: &[f64],
    n_seeds: usize,
    base: &TrainConfig,
    data: &Dataset,
    seed: &SeededRng,
) -> StudyResult {
    let mut runs = Vec::with_capacity(lambdas.len() * n_seeds);
    for (li, &lambda) in lambdas.iter().enumerate() {
        for s in 0..n_seeds {
            let cfg = TrainConfig {
                lambda,
                ..base.clone()
            };
            let record = adam_train(&cfg, data, seed, &[li as u64, s as u64]);
            runs.push(StudyRun {
                lambda,
                seed_index: s,
                final_mse: record.final_mse,
                final_lipschitz: record.final_lipschitz,
            });
        }
    }
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let cell: Vec<&StudyRun> = runs.iter().filter(|r| r.lambda == lambda).collect();
            let n = cell.len() as f64;
            let mean_l = cell.iter().map(|r| r.final_lipschitz).sum::<f64>() / n;
            let var_l = cell
                .iter()
                .map(|r| (r.final_lipschitz - mean_l).powi(2))
                .sum::<f64>()
                / n;
            StudyRow {
                lambda,
                mean_lipschitz: mean_l,
                std_lipschitz: var_l.sqrt(),
                mean_mse: cell.iter().map(|r| r.final_mse).sum::<f64>() / n,
            }
        })
        .collect();
    StudyResult { rows, runs }
}

impl StudyResult {
    /// CSV rows `lambda,seed,final_mse,final_L`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,seed,final_mse,final_L\n");
        for r in &self.runs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.lambda, r.seed_index, r.final_mse, r.final_lipschitz
            ));
        }
        out
    }
}

/// Spearman rank correlation; ranks assume no ties (values from continuous
/// computations).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut out = vec![0.0; v.len()];
        for (r, &i) in idx.iter().enumerate() {
            out[i] = r as f64;
        }
        out
    };
    let ra = rank(a);
    let rb = rank(b);
    let n = a.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..a.len() {
        cov += (ra[i] - mean) * (rb[i] - mean);
        va += (ra[i] - mean).powi(2);
        vb += (rb[i] - mean).powi(2);
    }
    cov / (va.sqrt() * vb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::lipschitz_norm;
    use crate::gates::NormMode;
    use approx::assert_abs_diff_eq;
    use rand_chacha::ChaCha8Rng;

    fn quiet_rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn predict_examples() {
        let mut rng = quiet_rng();
        assert_abs_diff_eq!(
            predict([0.0; 3], 0.0, EvalMode::Exact, 0.0, &mut rng),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            predict([0.0, PI, 0.0], 0.0, EvalMode::Exact, 0.0, &mut rng),
            -1.0,
            epsilon = 1e-12
        );
        // theta = 0: the model reduces to R_x(x), whose <Z> is cos(x).
        for x in [0.3, 1.2, 4.0] {
            assert_abs_diff_eq!(
                predict([0.0; 3], x, EvalMode::Exact, 0.0, &mut rng),
                x.cos(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn predict_matches_circuit_model() {
        let mut rng = quiet_rng();
        for _ in 0..20 {
            let theta = [
                rng.gen_range(-2.0 * PI..2.0 * PI),
                rng.gen_range(-2.0 * PI..2.0 * PI),
                rng.gen_range(-2.0 * PI..2.0 * PI),
            ];
            let x = rng.gen_range(0.0..2.0 * PI);
            let c = model_circuit(theta, x, 0.0).unwrap();
            let psi0 = crate::sim::StateVector::basis(1, 0).unwrap();
            let out = crate::sim::apply_noisy(&c, &[0.0; 3], &psi0).unwrap();
            let z = out.amplitudes[0].norm_sqr() - out.amplitudes[1].norm_sqr();
            assert_abs_diff_eq!(
                predict(theta, x, EvalMode::Exact, 0.0, &mut rng),
                z,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn shots_concentrate_to_exact() {
        let mut rng = quiet_rng();
        let theta = [0.7, -1.3, 2.1];
        let x = 1.0;
        let exact = predict(theta, x, EvalMode::Exact, 0.0, &mut rng);
        let sampled = predict(theta, x, EvalMode::Shots(200_000), 0.0, &mut rng);
        assert!((exact - sampled).abs() <= 6.0 / (200_000.0_f64).sqrt());
        assert!(sampled.abs() <= 1.0);
    }

    #[test]
    fn mse_oracle_values() {
        let data = Dataset::default();
        let mut rng = quiet_rng();
        // Perfect predictor: MSE 0 by construction.
        let perfect: f64 = data
            .xs
            .iter()
            .zip(&data.ys)
            .map(|(&x, &y)| (y - x.sin()).powi(2))
            .sum();
        assert_abs_diff_eq!(perfect, 0.0, epsilon = 1e-30);
        // theta = 0 predicts cos(x); oracle computed directly on the grid.
        let oracle: f64 = data
            .xs
            .iter()
            .zip(&data.ys)
            .map(|(&x, &y)| (y - x.cos()).powi(2))
            .sum::<f64>()
            / data.xs.len() as f64;
        let mse = mse_cost([0.0; 3], &data, EvalMode::Exact, 0.0, &mut rng);
        assert_abs_diff_eq!(mse, oracle, epsilon = 1e-12);
        // Regularizer: lambda ||theta||^2 on top.
        let reg = regularized_cost([1.0; 3], &data, 0.5, EvalMode::Exact, 0.0, &mut rng);
        let bare = mse_cost([1.0; 3], &data, EvalMode::Exact, 0.0, &mut rng);
        assert_abs_diff_eq!(reg, bare + 1.5, epsilon = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let data = Dataset::default();
        let mut rng = quiet_rng();
        for _ in 0..20 {
            let theta = [
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            ];
            let lambda = rng.gen_range(0.0..0.5);
            let grad =
                parameter_shift_grad(theta, &data, lambda, EvalMode::Exact, 0.0, &mut rng);
            let h = 1e-5;
            for i in 0..N_PARAMS {
                let mut plus = theta;
                plus[i] += h;
                let mut minus = theta;
                minus[i] -= h;
                let fd = (regularized_cost(plus, &data, lambda, EvalMode::Exact, 0.0, &mut rng)
                    - regularized_cost(minus, &data, lambda, EvalMode::Exact, 0.0, &mut rng))
                    / (2.0 * h);
                assert!((grad[i] - fd).abs() <= 1e-6, "component {i}: {} vs {fd}", grad[i]);
            }
        }
    }

    #[test]
    fn regularizer_only_gradient() {
        let empty = Dataset {
            xs: vec![0.0],
            ys: vec![1.0], // predict(theta=0, x=0) = 1, so residual is 0
        };
        let mut rng = quiet_rng();
        let grad = parameter_shift_grad([0.5, -0.25, 1.0], &empty, 0.3, EvalMode::Exact, 0.0, &mut rng);
        // theta != 0 makes the model term nonzero; check the pure-lambda
        // identity at theta where the data gradient vanishes instead:
        let grad0 = parameter_shift_grad([0.0; 3], &empty, 0.3, EvalMode::Exact, 0.0, &mut rng);
        assert!(grad0.iter().all(|g| g.abs() <= 1e-12));
        assert!(grad.iter().any(|g| g.abs() > 0.0));
    }

    #[test]
    fn lipschitz_matches_circuit_norm() {
        let mut rng = quiet_rng();
        for _ in 0..10 {
            let theta = [
                rng.gen_range(-2.0 * PI..2.0 * PI),
                rng.gen_range(-2.0 * PI..2.0 * PI),
                rng.gen_range(-2.0 * PI..2.0 * PI),
            ];
            let c = model_circuit(theta, 1.0, 0.05).unwrap();
            assert_abs_diff_eq!(
                lipschitz_of_theta(theta),
                lipschitz_norm(&c, NormMode::Raw),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn training_is_deterministic() {
        let data = Dataset::default();
        let cfg = TrainConfig {
            iters: 5,
            restarts: 2,
            ..TrainConfig::default()
        };
        let seed = SeededRng::new(11);
        let a = adam_train(&cfg, &data, &seed, &[0, 0]);
        let b = adam_train(&cfg, &data, &seed, &[0, 0]);
        assert_eq!(a.final_theta, b.final_theta);
        assert_eq!(a.cost_trajectory, b.cost_trajectory);
        assert_eq!(a.restart_index, b.restart_index);
    }

    #[test]
    fn noise_free_training_fits_sine() {
        let data = Dataset::default();
        let cfg = TrainConfig {
            noise_eps: 0.0,
            ..TrainConfig::default()
        };
        let record = adam_train(&cfg, &data, &SeededRng::new(7), &[0]);
        assert!(record.final_mse <= 0.05, "final MSE {}", record.final_mse);
    }

    #[test]
    fn huge_regularizer_shrinks_theta() {
        let data = Dataset::default();
        // The regularizer dominates; a smaller step keeps the ADAM
        // oscillation around the origin below the asserted radius.
        let cfg = TrainConfig {
            lambda: 1e3,
            noise_eps: 0.0,
            lr: 0.05,
            iters: 300,
            ..TrainConfig::default()
        };
        let record = adam_train(&cfg, &data, &SeededRng::new(7), &[1]);
        let norm = record.final_theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        assert!(norm <= 0.1, "||theta|| = {norm}");
    }

    #[test]
    fn spearman_basics() {
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            spearman(&[1.0, 2.0, 3.0], &[5.0, 3.0, 1.0]),
            -1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn study_shape_and_csv() {
        let data = Dataset::default();
        let base = TrainConfig {
            iters: 3,
            restarts: 2,
            ..TrainConfig::default()
        };
        let result = regularization_study(&[0.0, 0.5], 2, &base, &data, &SeededRng::new(5));
        assert_eq!(result.rows.len(), 2);
        assert_eq!(result.runs.len(), 4);
        let csv = result.to_csv();
        assert!(csv.starts_with("lambda,seed,final_mse,final_L\n"));
        assert_eq!(csv.lines().count(), 5);
    }
}
