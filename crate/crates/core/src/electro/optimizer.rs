//! Augmented-Lagrangian ascent under the spacing constraints
//! `g_i = L/N − |y_i − y_{i+1}| ≥ 0`, in the squared-slack form
//! `K = φ + Σ λ_i (g_i − z_i²)`.
//!
//! Minimizing over the slacks in closed form leaves the usual
//! Powell–Hestenes–Rockafellar penalty on each `g_i`. Each outer iteration
//! runs BFGS with backtracking on the penalized merit, updates
//! `λ_i ← max(0, λ_i − ρ g_i)`, and grows `ρ`. A final Newton pass on the
//! KKT system of the active constraints sharpens the multipliers when the
//! objective has an analytic gradient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{random_admissible, to_gauge, PointConfiguration};
use crate::linalg::{cholesky_solve, norm};
use crate::{Error, Result};

/// A smooth function of the bead coordinates to be maximized.
pub trait Objective: Sync {
    fn value(&self, coords: &[f64]) -> Result<f64>;
    fn gradient(&self, coords: &[f64], grad: &mut [f64]) -> Result<()>;
    /// Whether [`Objective::gradient`] is exact (enables the Newton polish).
    fn analytic_gradient(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub penalty_growth: f64,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub max_outer: usize,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            penalty_growth: 10.0,
            inner_tol: 1e-10,
            outer_tol: 1e-8,
            max_outer: 12,
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.restarts >= 1
            && self.penalty_growth > 1.0
            && self.inner_tol > 0.0
            && self.outer_tol > 0.0
            && self.max_outer >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "invalid optimizer options {self:?}"
            )))
        }
    }
}

/// Multipliers, slacks and residuals at the returned point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    pub multipliers: Vec<f64>,
    /// `z_r` solving `∂K/∂z_r = 2λ_r z_r = 0` and `g_r = z_r²`: zero on
    /// active constraints, `√g_r` on inactive ones.
    pub slacks: Vec<f64>,
    /// `g_r` at the returned point.
    pub constraints: Vec<f64>,
    pub active: Vec<bool>,
    /// `‖∇_y K‖` over all bead coordinates.
    pub residual: f64,
    /// `max_r |λ_r (g_r − z_r²)|`.
    pub complementarity: f64,
    pub objective: f64,
    pub converged: bool,
    pub outer_iterations: usize,
    pub restart: usize,
    /// Free coordinates after gauge fixing.
    pub free_parameters: usize,
    /// Objective value after each outer iteration.
    pub trace: Vec<f64>,
}

/// `N` beads in `R^dim` with length budget `L`, gauge-fixed by pinning the
/// lower-triangular coordinates of the first `dim` beads.
#[derive(Debug, Clone)]
pub struct Problem {
    pub n: usize,
    pub dim: usize,
    pub length: f64,
    free: Vec<usize>,
}

impl Problem {
    pub fn new(n: usize, dim: usize, length: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("N = {n} < 2")));
        }
        if dim < 2 {
            return Err(Error::InvalidInput(format!("dimension {dim} < 2")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "length {length} is not positive"
            )));
        }
        // bead k < dim keeps only its first k components
        let free = (0..n * dim)
            .filter(|&i| {
                let (bead, comp) = (i / dim, i % dim);
                bead >= dim || comp < bead
            })
            .collect();
        Ok(Self {
            n,
            dim,
            length,
            free,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.n * self.dim];
        for (&i, &v) in self.free.iter().zip(x) {
            full[i] = v;
        }
        full
    }

    fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }

    /// Free coordinates of `cfg` moved into the gauge.
    pub fn gauge_coordinates(&self, cfg: &PointConfiguration) -> Result<Vec<f64>> {
        Ok(self.restrict(to_gauge(cfg)?.coords()))
    }

    pub fn configuration(&self, x: &[f64]) -> Result<PointConfiguration> {
        PointConfiguration::from_flat(self.dim, self.length, self.expand(x))
    }

    fn step_vector(&self, full: &[f64], i: usize) -> (Vec<f64>, f64) {
        let d = self.dim;
        let j = (i + 1) % self.n;
        let diff: Vec<f64> = (0..d).map(|c| full[i * d + c] - full[j * d + c]).collect();
        let len = norm(&diff);
        (diff, len)
    }

    /// `g_i = L/N − |y_i − y_{i+1}|`.
    pub fn constraints(&self, full: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.spacing() - self.step_vector(full, i).1)
            .collect()
    }

    /// Adds `w · ∇g_i` to a full-coordinate gradient.
    fn add_constraint_gradient(&self, full: &[f64], i: usize, w: f64, grad: &mut [f64]) {
        let d = self.dim;
        let j = (i + 1) % self.n;
        let (diff, len) = self.step_vector(full, i);
        if len == 0.0 {
            return;
        }
        for c in 0..d {
            let u = diff[c] / len;
            grad[i * d + c] -= w * u;
            grad[j * d + c] += w * u;
        }
    }

    /// `∇φ + Σ λ_i ∇g_i` in full coordinates.
    pub fn lagrangian_gradient<O: Objective + ?Sized>(
        &self,
        objective: &O,
        full: &[f64],
        multipliers: &[f64],
    ) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; full.len()];
        objective.gradient(full, &mut grad)?;
        for (i, &w) in multipliers.iter().enumerate() {
            if w != 0.0 {
                self.add_constraint_gradient(full, i, w, &mut grad);
            }
        }
        Ok(grad)
    }
}

struct Merit<'a, O: ?Sized> {
    problem: &'a Problem,
    objective: &'a O,
    multipliers: &'a [f64],
    rho: f64,
}

impl<O: Objective + ?Sized> Merit<'_, O> {
    /// `−φ + Σ ψ(g_i)`, `ψ(g) = −λg + ρg²/2` for `g < λ/ρ`, else `−λ²/(2ρ)`.
    fn value(&self, x: &[f64]) -> f64 {
        let full = self.problem.expand(x);
        let Ok(phi) = self.objective.value(&full) else {
            return f64::INFINITY;
        };
        let mut merit = -phi;
        for (g, &lam) in self.problem.constraints(&full).iter().zip(self.multipliers) {
            merit += if *g < lam / self.rho {
                -lam * g + 0.5 * self.rho * g * g
            } else {
                -lam * lam / (2.0 * self.rho)
            };
        }
        if merit.is_finite() {
            merit
        } else {
            f64::INFINITY
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let full = self.problem.expand(x);
        let mut grad = vec![0.0; full.len()];
        self.objective.gradient(&full, &mut grad)?;
        grad.iter_mut().for_each(|v| *v = -*v);
        for (i, (g, &lam)) in self
            .problem
            .constraints(&full)
            .iter()
            .zip(self.multipliers)
            .enumerate()
        {
            if *g < lam / self.rho {
                self.problem
                    .add_constraint_gradient(&full, i, -lam + self.rho * g, &mut grad);
            }
        }
        Ok(self.problem.restrict(&grad))
    }
}

/// BFGS with Armijo backtracking; returns the final point. Accepted steps
/// never increase the merit.
fn bfgs<O: Objective + ?Sized>(
    merit: &Merit<'_, O>,
    mut x: Vec<f64>,
    tol: f64,
    max_step: f64,
) -> Result<Vec<f64>> {
    let n = x.len();
    if n == 0 {
        return Ok(x);
    }
    let mut h = identity(n);
    let mut f = merit.value(&x);
    if !f.is_finite() {
        return Err(Error::InvalidInput(
            "optimizer start is outside the domain".into(),
        ));
    }
    let mut g = merit.gradient(&x)?;
    for _ in 0..2000 {
        let gnorm = norm(&g);
        if gnorm <= tol {
            break;
        }
        let mut p: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            h = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let pnorm = norm(&p);
        let mut t = if pnorm > max_step {
            max_step / pnorm
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            let ft = merit.value(&trial);
            if ft <= f + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            break;
        };
        let gnext = merit.gradient(&next)?;
        let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnext.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum())
                .collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let coef = (sy + yhy) / (sy * sy);
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += coef * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        let progress = (f - fnext).abs();
        x = next;
        f = fnext;
        g = gnext;
        if progress <= 1e-16 * (1.0 + f.abs()) && norm(&s) <= 1e-15 * (1.0 + norm(&x)) {
            break;
        }
    }
    Ok(x)
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Magnitude of `∇φ` at `full`, floored relative to `|φ|/spacing`.
fn gradient_scale<O: Objective + ?Sized>(
    problem: &Problem,
    objective: &O,
    full: &[f64],
) -> Result<f64> {
    let mut grad = vec![0.0; full.len()];
    objective.gradient(full, &mut grad)?;
    let g = grad.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 1e-12 * objective.value(full)?.abs() / problem.spacing();
    Ok(g.max(floor).max(1e-300))
}

struct Candidate {
    x: Vec<f64>,
    multipliers: Vec<f64>,
    outer: usize,
    trace: Vec<f64>,
    gscale: f64,
}

fn augmented_lagrangian<O: Objective + ?Sized>(
    problem: &Problem,
    objective: &O,
    start: Vec<f64>,
    opts: &OptimizerOptions,
) -> Result<Candidate> {
    let spacing = problem.spacing();
    let gscale = gradient_scale(problem, objective, &problem.expand(&start))?;
    let mut rho = 10.0 * gscale / spacing;
    let mut last_violation = f64::INFINITY;
    let mut multipliers = vec![0.0; problem.n];
    let mut x = start;
    let mut trace = Vec::new();
    let mut outer = 0;
    for it in 0..opts.max_outer {
        outer = it + 1;
        let merit = Merit {
            problem,
            objective,
            multipliers: &multipliers,
            rho,
        };
        x = bfgs(&merit, x, opts.inner_tol * gscale, 0.25 * spacing)?;
        let full = problem.expand(&x);
        let g = problem.constraints(&full);
        for (lam, gi) in multipliers.iter_mut().zip(&g) {
            *lam = (*lam - rho * gi).max(0.0);
        }
        trace.push(objective.value(&full)?);
        let stationarity = norm(&problem.lagrangian_gradient(objective, &full, &multipliers)?);
        let violation = g.iter().fold(0.0f64, |a, v| a.max(-v));
        let slackness = g
            .iter()
            .zip(&multipliers)
            .fold(0.0f64, |a, (gi, l)| a.max((gi * l).abs()));
        if stationarity <= opts.outer_tol * gscale
            && violation <= 1e-12 * spacing
            && slackness <= opts.outer_tol * gscale * spacing
        {
            break;
        }
        if violation > 0.25 * last_violation {
            rho = (rho * opts.penalty_growth).min(1e12 * gscale / spacing);
        }
        last_violation = violation;
    }
    Ok(Candidate {
        x,
        multipliers,
        outer,
        trace,
        gscale,
    })
}

/// Damped Newton on `∇φ + Σ_A λ_i ∇g_i = 0`, `g_A = 0` over the free
/// coordinates and the active multipliers. Keeps the input unless the
/// KKT residual drops and every multiplier stays nonnegative.
fn polish<O: Objective + ?Sized>(problem: &Problem, objective: &O, cand: &mut Candidate) {
    let spacing = problem.spacing();
    let full = problem.expand(&cand.x);
    let g = problem.constraints(&full);
    let lam_max = cand.multipliers.iter().fold(0.0f64, |a, &b| a.max(b));
    let active: Vec<usize> = (0..problem.n)
        .filter(|&i| cand.multipliers[i] > 1e-8 * lam_max.max(1e-300) || g[i] <= 1e-6 * spacing)
        .collect();
    let nf = problem.free_count();
    let na = active.len();
    let dim = nf + na;

    let residual = |x: &[f64], lam: &[f64]| -> Option<Vec<f64>> {
        let full = problem.expand(x);
        let mut multipliers = vec![0.0; problem.n];
        for (k, &i) in active.iter().enumerate() {
            multipliers[i] = lam[k];
        }
        let grad = problem
            .lagrangian_gradient(objective, &full, &multipliers)
            .ok()?;
        let mut r = problem.restrict(&grad);
        let g = problem.constraints(&full);
        r.extend(active.iter().map(|&i| g[i]));
        r.iter().all(|v| v.is_finite()).then_some(r)
    };

    let mut x = cand.x.clone();
    let mut lam: Vec<f64> = active.iter().map(|&i| cand.multipliers[i]).collect();
    let Some(mut r) = residual(&x, &lam) else {
        return;
    };
    let start_norm = norm(&r);
    let mut mu = 1e-12;
    for _ in 0..40 {
        let rn = norm(&r);
        if rn <= 1e-15 * (1.0 + start_norm) {
            break;
        }
        // Jacobian by central differences of the (analytic) residual.
        let h = 1e-6 * spacing;
        let mut jac = vec![0.0; dim * dim];
        let mut ok = true;
        for c in 0..dim {
            let (mut xp, mut lp) = (x.clone(), lam.clone());
            let (mut xm, mut lm) = (x.clone(), lam.clone());
            let step = if c < nf {
                h
            } else {
                1e-6 * (1.0 + lam[c - nf].abs())
            };
            if c < nf {
                xp[c] += step;
                xm[c] -= step;
            } else {
                lp[c - nf] += step;
                lm[c - nf] -= step;
            }
            match (residual(&xp, &lp), residual(&xm, &lm)) {
                (Some(a), Some(b)) => {
                    for row in 0..dim {
                        jac[row * dim + c] = (a[row] - b[row]) / (2.0 * step);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            break;
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut jtj = vec![0.0; dim * dim];
            let mut jtr = vec![0.0; dim];
            for i in 0..dim {
                for k in 0..dim {
                    jtr[i] += jac[k * dim + i] * r[k];
                }
                for j in 0..dim {
                    jtj[i * dim + j] = (0..dim).map(|k| jac[k * dim + i] * jac[k * dim + j]).sum();
                }
            }
            let scale = (0..dim)
                .map(|i| jtj[i * dim + i])
                .fold(0.0f64, f64::max)
                .max(1e-300);
            for i in 0..dim {
                jtj[i * dim + i] += mu * scale;
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(delta) = cholesky_solve(&jtj, &rhs, dim) else {
                mu *= 100.0;
                continue;
            };
            let xt: Vec<f64> = x.iter().zip(&delta[..nf]).map(|(a, b)| a + b).collect();
            let lt: Vec<f64> = lam.iter().zip(&delta[nf..]).map(|(a, b)| a + b).collect();
            if let Some(rt) = residual(&xt, &lt) {
                if norm(&rt) < rn {
                    x = xt;
                    lam = lt;
                    r = rt;
                    mu = (mu * 0.1).max(1e-16);
                    improved = true;
                    break;
                }
            }
            mu *= 100.0;
        }
        if !improved {
            break;
        }
    }
    if norm(&r) < start_norm && lam.iter().all(|&l| l >= 0.0) {
        cand.x = x;
        cand.multipliers = vec![0.0; problem.n];
        for (k, &i) in active.iter().enumerate() {
            cand.multipliers[i] = lam[k];
        }
    }
}

fn report<O: Objective + ?Sized>(
    problem: &Problem,
    objective: &O,
    cand: &Candidate,
    restart: usize,
    opts: &OptimizerOptions,
) -> Result<(PointConfiguration, KktReport)> {
    let full = problem.expand(&cand.x);
    let constraints = problem.constraints(&full);
    let multipliers = cand.multipliers.clone();
    let active: Vec<bool> = multipliers.iter().map(|&l| l > 0.0).collect();
    let slacks: Vec<f64> = constraints
        .iter()
        .zip(&active)
        .map(|(g, &a)| if a { 0.0 } else { g.max(0.0).sqrt() })
        .collect();
    let complementarity = constraints
        .iter()
        .zip(&slacks)
        .zip(&multipliers)
        .map(|((g, z), l)| (l * (g - z * z)).abs())
        .fold(0.0, f64::max);
    let residual = norm(&problem.lagrangian_gradient(objective, &full, &multipliers)?);
    let violation = constraints.iter().fold(0.0f64, |a, v| a.max(-v));
    let gscale = cand.gscale;
    let converged = residual <= opts.outer_tol * gscale
        && violation <= 1e-9 * problem.spacing()
        && complementarity <= opts.outer_tol * gscale * problem.spacing();
    Ok((
        problem.configuration(&cand.x)?,
        KktReport {
            multipliers,
            slacks,
            constraints,
            active,
            residual,
            complementarity,
            objective: objective.value(&full)?,
            converged,
            outer_iterations: cand.outer,
            restart,
            free_parameters: problem.free_count(),
            trace: cand.trace.clone(),
        },
    ))
}

/// Seed of restart `k` derived from the master seed (SplitMix64 step).
pub fn restart_seed(master: u64, k: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one constrained ascent from `start`.
pub fn optimize_from<O: Objective + ?Sized>(
    problem: &Problem,
    objective: &O,
    start: &PointConfiguration,
    opts: &OptimizerOptions,
) -> Result<(PointConfiguration, KktReport)> {
    opts.validate()?;
    let x0 = problem.gauge_coordinates(start)?;
    let mut cand = augmented_lagrangian(problem, objective, x0, opts)?;
    if objective.analytic_gradient() {
        polish(problem, objective, &mut cand);
    }
    report(problem, objective, &cand, 0, opts)
}

/// Best of `opts.restarts` ascents from random admissible starts.
///
/// Restarts run in parallel; the winner is chosen by (converged first,
/// objective, residual, restart index), so the result does not depend on
/// scheduling.
pub fn optimize<O: Objective + ?Sized>(
    problem: &Problem,
    objective: &O,
    opts: &OptimizerOptions,
) -> Result<(PointConfiguration, KktReport)> {
    opts.validate()?;
    let runs: Vec<Result<(PointConfiguration, KktReport)>> = (0..opts.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(opts.seed, k as u64));
            let fill = 0.6 + 0.35 * rand::Rng::random::<f64>(&mut rng);
            let start = random_admissible(&mut rng, problem.n, problem.length, problem.dim, fill)?;
            let (cfg, mut rep) = optimize_from(problem, objective, &start, opts)?;
            rep.restart = k;
            Ok((cfg, rep))
        })
        .collect();
    let mut best: Option<(PointConfiguration, KktReport)> = None;
    let mut first_error = None;
    for run in runs {
        match run {
            Ok(candidate) => {
                let better = match &best {
                    None => true,
                    Some((_, b)) => {
                        let c = &candidate.1;
                        (c.converged, c.objective, -c.residual)
                            > (b.converged, b.objective, -b.residual)
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    match (best, first_error) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::InvalidInput("no restarts were run".into())),
    }
}
