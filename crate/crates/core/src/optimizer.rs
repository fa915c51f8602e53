//! Derivative-free minimizers for the classical feedback loop: SPSA and
//! Nelder–Mead, with evaluation budgets, target and stall stopping, and
//! random restarts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{random_angles, ParamVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Spsa,
    #[default]
    NelderMead,
}

/// SPSA gain schedule `a_k = a/(k+1+A)^α`, `c_k = c/(k+1)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaGains {
    /// Step-size numerator; `None` calibrates it so the first step moves
    /// each coordinate by about `initial_step`.
    pub a: Option<f64>,
    pub c: f64,
    /// Stability constant; `None` uses 10% of the iteration budget.
    pub big_a: Option<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub initial_step: f64,
    /// Gradient samples used by the calibration of `a`.
    pub calibration_samples: usize,
}

impl Default for SpsaGains {
    fn default() -> Self {
        SpsaGains {
            a: None,
            c: 0.1,
            big_a: None,
            alpha: 0.602,
            gamma: 0.101,
            initial_step: 0.1,
            calibration_samples: 4,
        }
    }
}

/// Gains with every constant fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedGains {
    pub a: f64,
    pub c: f64,
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl ResolvedGains {
    pub fn a_k(&self, k: usize) -> f64 {
        self.a / (k as f64 + 1.0 + self.big_a).powf(self.alpha)
    }

    pub fn c_k(&self, k: usize) -> f64 {
        self.c / (k as f64 + 1.0).powf(self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Evaluation budget per restart.
    pub max_evals: usize,
    /// Stop as soon as the minimized objective is at or below this value.
    pub target_value: Option<f64>,
    pub restarts: usize,
    pub seed: u64,
    pub spsa: SpsaGains,
    /// Nelder–Mead initial simplex offset, radians.
    pub nm_scale: f64,
    /// Simplex diameter below which Nelder–Mead rebuilds its simplex.
    pub nm_min_diameter: f64,
    pub f_tol: f64,
    /// Evaluations without an improvement larger than `f_tol` before a
    /// restart is declared stalled.
    pub stall_window: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: Method::NelderMead,
            max_evals: 20_000,
            target_value: None,
            restarts: 5,
            seed: 0,
            spsa: SpsaGains::default(),
            nm_scale: 0.25,
            nm_min_diameter: 1e-6,
            f_tol: 1e-6,
            stall_window: 500,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.spsa;
        let gains_ok = g.a.is_none_or(|a| a > 0.0)
            && g.big_a.is_none_or(|a| a >= 0.0)
            && g.c > 0.0
            && g.alpha > 0.0
            && g.gamma > 0.0
            && g.initial_step > 0.0;
        if self.max_evals == 0 || self.restarts == 0 {
            return Err(Error::Config("max_evals and restarts must be at least 1".into()));
        }
        if !gains_ok || self.nm_scale <= 0.0 || self.f_tol < 0.0 || self.stall_window == 0 {
            return Err(Error::Config("optimizer gains, simplex scale and tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Target,
    Budget,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    /// Evaluation index across all restarts.
    pub index: usize,
    pub restart: usize,
    pub value: f64,
    /// Best value within this restart up to and including this evaluation.
    pub best_so_far: f64,
    /// This evaluation set a new best.
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub restart: usize,
    pub start: ParamVector,
    pub best_value: f64,
    pub best_theta: ParamVector,
    pub n_evals: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub evaluations: Vec<EvalRecord>,
    pub best_value: f64,
    pub best_theta: ParamVector,
    pub n_evals: usize,
    pub stop_reason: StopReason,
    /// Evaluations that returned NaN or ±∞ and were discarded.
    pub non_finite_evals: usize,
    pub restarts: Vec<RestartSummary>,
}

/// Wraps the objective with budget, target, stall and bookkeeping logic.
struct Tracker<'a, F> {
    objective: &'a mut F,
    cfg: &'a OptimizerConfig,
    restart: usize,
    evals: usize,
    last_improvement: usize,
    best_value: f64,
    best_theta: Vec<f64>,
    stop: Option<StopReason>,
    records: &'a mut Vec<EvalRecord>,
    global_index: &'a mut usize,
    non_finite: &'a mut usize,
}

impl<F: FnMut(&[f64]) -> f64> Tracker<'_, F> {
    fn done(&self) -> bool {
        self.stop.is_some()
    }

    /// Evaluates `theta`; non-finite values come back as `+∞` so they are
    /// never preferred. Once stopped, the objective is no longer called.
    fn eval(&mut self, theta: &[f64]) -> f64 {
        if self.done() {
            return f64::INFINITY;
        }
        let value = (self.objective)(theta);
        self.evals += 1;
        if !value.is_finite() {
            *self.non_finite += 1;
        } else {
            let improved = value < self.best_value;
            if value < self.best_value - self.cfg.f_tol || !self.best_value.is_finite() {
                self.last_improvement = self.evals;
            }
            if improved {
                self.best_value = value;
                self.best_theta = theta.to_vec();
            }
            self.records.push(EvalRecord {
                index: *self.global_index,
                restart: self.restart,
                value,
                best_so_far: self.best_value,
                improved,
            });
            if self.cfg.target_value.is_some_and(|t| value <= t) {
                self.stop = Some(StopReason::Target);
            }
        }
        *self.global_index += 1;
        if self.stop.is_none() {
            if self.evals >= self.cfg.max_evals {
                self.stop = Some(StopReason::Budget);
            } else if self.evals - self.last_improvement >= self.cfg.stall_window {
                self.stop = Some(StopReason::Stalled);
            }
        }
        if value.is_finite() {
            value
        } else {
            f64::INFINITY
        }
    }
}

/// Minimizes `objective` starting from `theta0`, then from fresh uniform
/// random angles on each further restart. Stops every restart at the
/// target value.
pub fn minimize<F, R>(
    mut objective: F,
    theta0: &ParamVector,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<(ParamVector, OptimizationTrace)>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    if theta0.is_empty() {
        return Err(Error::Config("cannot optimize an empty parameter vector".into()));
    }
    let dim = theta0.len();
    let mut records = Vec::new();
    let mut global_index = 0usize;
    let mut non_finite = 0usize;
    let mut summaries = Vec::with_capacity(cfg.restarts);

    for restart in 0..cfg.restarts {
        let start = if restart == 0 {
            theta0.0.clone()
        } else {
            random_angles(dim, rng)
        };
        let mut tracker = Tracker {
            objective: &mut objective,
            cfg,
            restart,
            evals: 0,
            last_improvement: 0,
            best_value: f64::INFINITY,
            best_theta: start.clone(),
            stop: None,
            records: &mut records,
            global_index: &mut global_index,
            non_finite: &mut non_finite,
        };
        match cfg.method {
            Method::NelderMead => nelder_mead(&mut tracker, &start),
            Method::Spsa => spsa(&mut tracker, &start, rng),
        }
        let stop_reason = tracker.stop.unwrap_or(StopReason::Budget);
        summaries.push(RestartSummary {
            restart,
            start: ParamVector(start),
            best_value: tracker.best_value,
            best_theta: ParamVector(tracker.best_theta.clone()),
            n_evals: tracker.evals,
            stop_reason,
        });
        if stop_reason == StopReason::Target {
            break;
        }
    }

    // lowest best value wins; ties go to the earlier restart
    let best = summaries
        .iter()
        .filter(|s| s.best_value.is_finite())
        .min_by(|a, b| a.best_value.total_cmp(&b.best_value))
        .unwrap_or(&summaries[0]);
    let trace = OptimizationTrace {
        best_value: best.best_value,
        best_theta: best.best_theta.clone(),
        n_evals: global_index,
        stop_reason: summaries.last().map(|s| s.stop_reason).unwrap_or(StopReason::Budget),
        non_finite_evals: non_finite,
        evaluations: records,
        restarts: summaries,
    };
    Ok((trace.best_theta.clone(), trace))
}

fn nelder_mead<F: FnMut(&[f64]) -> f64>(t: &mut Tracker<'_, F>, start: &[f64]) {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;
    let n = start.len();
    let scale = t.cfg.nm_scale;

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let build = |t: &mut Tracker<'_, F>, center: &[f64], simplex: &mut Vec<(Vec<f64>, f64)>| {
        simplex.clear();
        let f0 = t.eval(center);
        simplex.push((center.to_vec(), f0));
        for i in 0..n {
            if t.done() {
                return;
            }
            let mut p = center.to_vec();
            p[i] += scale;
            let f = t.eval(&p);
            simplex.push((p, f));
        }
    };
    build(t, start, &mut simplex);

    while !t.done() {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| dist(p, &simplex[0].0))
            .fold(0.0, f64::max);
        if diameter < t.cfg.nm_min_diameter {
            let center = simplex[0].0.clone();
            build(t, &center, &mut simplex);
            continue;
        }

        let worst = simplex[n].clone();
        let second_worst = simplex[n - 1].1;
        let best = simplex[0].1;
        let mut centroid = vec![0.0; n];
        for (p, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = along(REFLECT);
        let fr = t.eval(&reflected);
        if t.done() {
            break;
        }
        if fr < best {
            let expanded = along(EXPAND);
            let fe = t.eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < second_worst {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let p = along(CONTRACT);
            let f = t.eval(&p);
            (p, f)
        } else {
            let p = along(-CONTRACT);
            let f = t.eval(&p);
            (p, f)
        };
        if t.done() {
            break;
        }
        if fc < fr.min(worst.1) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for item in simplex.iter_mut().skip(1) {
            if t.done() {
                break;
            }
            let p: Vec<f64> = anchor
                .iter()
                .zip(&item.0)
                .map(|(a, x)| a + SHRINK * (x - a))
                .collect();
            let f = t.eval(&p);
            *item = (p, f);
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Result of one SPSA update.
#[derive(Debug, Clone, PartialEq)]
pub struct SpsaStep {
    pub theta: Vec<f64>,
    pub gradient: Vec<f64>,
    pub delta: Vec<f64>,
    pub plus_value: f64,
    pub minus_value: f64,
}

/// Rademacher vector with entries in `{−1, +1}`.
pub fn rademacher<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Two-sided simultaneous-perturbation gradient estimate at `theta` with
/// perturbation size `c_k`.
pub fn spsa_gradient<F, R>(theta: &[f64], c_k: f64, objective: &mut F, rng: &mut R) -> (Vec<f64>, Vec<f64>, f64, f64)
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let delta = rademacher(theta.len(), rng);
    let plus: Vec<f64> = theta.iter().zip(&delta).map(|(x, d)| x + c_k * d).collect();
    let minus: Vec<f64> = theta.iter().zip(&delta).map(|(x, d)| x - c_k * d).collect();
    let yp = objective(&plus);
    let ym = objective(&minus);
    let diff = yp - ym;
    // 1/Δ_i = Δ_i for Rademacher entries
    let grad = delta.iter().map(|d| diff / (2.0 * c_k) * d).collect();
    (grad, delta, yp, ym)
}

/// `θ' = θ − a_k ĝ` with `ĝ` from probes at `θ ± c_k Δ`.
pub fn spsa_step<F, R>(theta: &[f64], k: usize, objective: &mut F, gains: &ResolvedGains, rng: &mut R) -> SpsaStep
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let (gradient, delta, plus_value, minus_value) = spsa_gradient(theta, gains.c_k(k), objective, rng);
    let a_k = gains.a_k(k);
    let next = if plus_value.is_finite() && minus_value.is_finite() {
        theta.iter().zip(&gradient).map(|(x, g)| x - a_k * g).collect()
    } else {
        theta.to_vec()
    };
    SpsaStep {
        theta: next,
        gradient,
        delta,
        plus_value,
        minus_value,
    }
}

const ITERATE_EVAL_INTERVAL: usize = 10;

fn spsa<F: FnMut(&[f64]) -> f64, R: Rng + ?Sized>(t: &mut Tracker<'_, F>, start: &[f64], rng: &mut R) {
    let g = t.cfg.spsa;
    let iterations = (t.cfg.max_evals / 2).max(1);
    let big_a = g.big_a.unwrap_or(0.1 * iterations as f64);
    let a = match g.a {
        Some(a) => a,
        None => {
            let mut total = 0.0;
            let mut count = 0usize;
            for _ in 0..g.calibration_samples {
                if t.done() {
                    return;
                }
                let (grad, _, yp, ym) = spsa_gradient(start, g.c, &mut |x: &[f64]| t.eval(x), rng);
                if yp.is_finite() && ym.is_finite() {
                    total += grad.iter().map(|x| x.abs()).sum::<f64>();
                    count += grad.len();
                }
            }
            let mean = if count > 0 { total / count as f64 } else { 0.0 };
            let mean = if mean > 1e-12 { mean } else { 1.0 };
            g.initial_step * (1.0 + big_a).powf(g.alpha) / mean
        }
    };
    let gains = ResolvedGains {
        a,
        c: g.c,
        big_a,
        alpha: g.alpha,
        gamma: g.gamma,
    };
    let mut theta = start.to_vec();
    let mut k = 0;
    while !t.done() {
        let step = spsa_step(&theta, k, &mut |x: &[f64]| t.eval(x), &gains, rng);
        theta = step.theta;
        k += 1;
        // probes sit c_k away from the iterate, so score the iterate itself
        if k % ITERATE_EVAL_INTERVAL == 0 && !t.done() {
            t.eval(&theta);
        }
    }
}
