//! Seeded property suite behind `chordlab verify`.
//!
//! Trial `k` draws everything from the seed `restart_seed(master, k)`, so a
//! failing trial can be replayed alone. Trials run in parallel and are
//! merged in trial order.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write;
use std::time::Instant;

use anyhow::bail;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use chordlab::chords::{check_dminus, check_dp, green_deficit, DEFICIT_TOL};
use chordlab::electro::{
    chebyshev_check, coulomb_energy, coulomb_energy_pairs, coulomb_energy_regrouped,
    lagrange_closed_form, maximize_fm, minimize_coulomb, projected_hessian, restart_seed,
    OptimizerOptions, DEFAULT_HESSIAN_STEP,
};
use chordlab::fourier_op::{
    bound_rhs, chordsum_fourier, chordsum_fourier_at, operator_norm, quadratic_form,
    sequence_norm_sqr, DSequence, NormMode,
};
use chordlab::geometry::{
    chord_sum, polygon_chord, random_admissible, random_fourier_loop, random_rigid_motion,
    random_unit_speed_loop, regular_polygon, rhomboid, sample_equidistant, sample_with_map,
    shape_distance, ArcLengthMap,
};
use chordlab::report::format_float;
use chordlab::spectral::{build_q, ground_state, min_eig, rayleigh_upper_bound};

pub const CATEGORIES: [&str; 5] = ["geometry", "chords", "spectral", "electro", "fourier_op"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryStats {
    pub run: usize,
    pub passed: usize,
    pub failed: usize,
    /// Smallest margin seen; a check passes iff its margin is nonnegative.
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub category: String,
    pub check: String,
    pub trial: usize,
    /// Seed reproducing the trial on its own.
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub trials: usize,
    pub categories: BTreeMap<String, CategoryStats>,
    pub failures: Vec<FailureRecord>,
    /// Excluded from serialization and comparison so reports stay reproducible.
    #[serde(skip)]
    pub wall_time_seconds: f64,
}

impl PartialEq for SuiteSummary {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.trials == other.trials
            && self.categories == other.categories
            && self.failures == other.failures
    }
}

impl SuiteSummary {
    pub fn run(&self) -> usize {
        self.categories.values().map(|c| c.run).sum()
    }

    pub fn failed(&self) -> usize {
        self.categories.values().map(|c| c.failed).sum()
    }

    /// `category,run,passed,failed,worst_margin`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,run,passed,failed,worst_margin\n");
        for (name, c) in &self.categories {
            let _ = writeln!(
                out,
                "{name},{},{},{},{}",
                c.run,
                c.passed,
                c.failed,
                format_float(c.worst_margin)
            );
        }
        out
    }
}

struct Check {
    category: &'static str,
    name: &'static str,
    margin: f64,
    detail: String,
}

struct Trial {
    checks: Vec<Check>,
}

impl Trial {
    fn record(&mut self, category: &'static str, name: &'static str, margin: f64, detail: String) {
        let margin = if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        };
        self.checks.push(Check {
            category,
            name,
            margin,
            detail,
        });
    }

    /// Records a check whose evaluation itself may fail; errors count as
    /// failures with the error text as detail.
    fn run<F>(&mut self, category: &'static str, name: &'static str, f: F)
    where
        F: FnOnce() -> chordlab::Result<(f64, String)>,
    {
        match f() {
            Ok((margin, detail)) => self.record(category, name, margin, detail),
            Err(e) => self.record(category, name, f64::NEG_INFINITY, format!("error: {e}")),
        }
    }
}

fn implication(premise: bool, conclusion: bool) -> f64 {
    if !premise || conclusion {
        1.0
    } else {
        -1.0
    }
}

const P_GRID: [f64; 4] = [2.0, 1.5, 1.0, 0.5];

fn run_trial(master: u64, k: usize) -> Trial {
    let seed = restart_seed(master, k as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Trial { checks: Vec::new() };

    let n = rng.random_range(3..=12usize);
    let length = rng.random_range(0.5..8.0);
    let modes = rng.random_range(2..=8usize);
    let decay = rng.random_range(2.0..3.5);
    let alpha = rng.random_range(-0.5..0.5);
    let loop_seed: u64 = rng.random();
    let (rot2, shift2) = random_rigid_motion(&mut rng, 2);
    let (rot3, shift3) = random_rigid_motion(&mut rng, 3);

    let curve2 = random_fourier_loop(loop_seed, modes, decay, 2, length);
    let curve3 = random_fourier_loop(loop_seed ^ 1, modes, decay, 3, length);
    let (curve2, curve3) = match (curve2, curve3) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            t.record(
                "geometry",
                "random_loop",
                f64::NEG_INFINITY,
                format!("error: {e}"),
            );
            return t;
        }
    };
    let sampled = ArcLengthMap::new(&curve2, 1e-12)
        .and_then(|map| Ok((sample_with_map(&map, n)?, map)))
        .and_then(|(cfg2, map)| Ok((cfg2, map, sample_equidistant(&curve3, n, 1e-12)?)));
    let (cfg2, map2, cfg3) = match sampled {
        Ok(v) => v,
        Err(e) => {
            t.record(
                "geometry",
                "sampling",
                f64::NEG_INFINITY,
                format!("error: {e}"),
            );
            return t;
        }
    };

    // geometry
    for (cfg, label) in [(&cfg2, "2d"), (&cfg3, "3d")] {
        let margin = 1.0 - cfg.max_step() / cfg.spacing() + 1e-9;
        t.record(
            "geometry",
            "sample_admissible",
            margin,
            format!("{label}, N={n}"),
        );
    }
    t.run("geometry", "polygon_chords", || {
        let poly = regular_polygon(n, length, 2)?;
        let mut err = 0.0f64;
        for m in 1..=n / 2 {
            for j in 0..n {
                err = err.max((poly.distance(j, j + m) - polygon_chord(n, length, m)).abs());
            }
        }
        Ok((1e-12 * length.max(1.0) - err, format!("max error {err:e}")))
    });
    t.run("geometry", "chord_sum_invariance", || {
        let moved = cfg3.transformed(&rot3, &shift3)?;
        let mut worst = 0.0f64;
        for m in 1..=n / 2 {
            for p in [-1.0, 1.0, 2.0] {
                let a = chord_sum(&cfg3, m, p)?;
                let b = chord_sum(&moved, m, p)?;
                worst = worst.max((a - b).abs() / a.abs().max(1e-300));
            }
        }
        Ok((1e-12 - worst, format!("max relative change {worst:e}")))
    });
    t.run("geometry", "arclength_inverse", || {
        let total = map2.total();
        let mut worst = 0.0f64;
        for i in 0..16 {
            let s = total * (i as f64 + 0.37) / 16.0;
            worst = worst.max((map2.length_at(map2.param_at(s)) - s).abs());
        }
        Ok((1e-9 * total - worst, format!("max error {worst:e}")))
    });
    t.run("geometry", "rhomboid_square", || {
        let side = length / 4.0;
        let d = shape_distance(&rhomboid(PI / 2.0, side)?, &regular_polygon(4, length, 2)?)?;
        Ok((1e-12 * length - d, format!("shape distance {d:e}")))
    });

    // chords
    for (cfg, label) in [(&cfg2, "2d"), (&cfg3, "3d")] {
        t.run("chords", "global_d2", || {
            let mut worst = f64::INFINITY;
            for m in 1..=n / 2 {
                let r = check_dp(cfg, m, 2.0)?;
                worst = worst.min(r.deficit / r.rhs + DEFICIT_TOL);
            }
            Ok((worst, format!("{label}, N={n}")))
        });
        t.run("chords", "descent_and_transfer", || {
            let mut worst = 1.0f64;
            for m in 1..=n / 2 {
                for (i, &p) in P_GRID.iter().enumerate() {
                    let holds = check_dp(cfg, m, p)?.holds;
                    worst = worst.min(implication(holds, check_dminus(cfg, m, p)?.holds));
                    for &q in &P_GRID[i + 1..] {
                        worst = worst.min(implication(holds, check_dp(cfg, m, q)?.holds));
                    }
                }
            }
            Ok((worst, format!("{label}, N={n}")))
        });
        t.run("chords", "report_invariance", || {
            let moved = if cfg.dim() == 2 {
                cfg.transformed(&rot2, &shift2)?
            } else {
                cfg.transformed(&rot3, &shift3)?
            };
            let mut worst = 0.0f64;
            for m in 1..=n / 2 {
                let a = check_dp(cfg, m, 2.0)?;
                let b = check_dp(&moved, m, 2.0)?;
                worst = worst.max((a.lhs - b.lhs).abs() / a.lhs.max(1e-300));
                if a.holds != b.holds || a.rhs != b.rhs {
                    worst = f64::INFINITY;
                }
            }
            Ok((
                1e-12 - worst,
                format!("{label}, max relative change {worst:e}"),
            ))
        });
    }
    t.run("chords", "polygon_equality", || {
        let poly = regular_polygon(n, length, 2)?;
        let mut worst = 0.0f64;
        for m in 1..=n / 2 {
            for p in P_GRID {
                let r = check_dp(&poly, m, p)?;
                worst = worst.max(r.deficit.abs() / r.rhs);
                let r = check_dminus(&poly, m, p)?;
                worst = worst.max(r.deficit.abs() / r.rhs);
            }
        }
        Ok((1e-9 - worst, format!("max relative deficit {worst:e}")))
    });
    for (cfg, dim) in [(&cfg2, 2), (&cfg3, 3)] {
        t.run("chords", "green_deficit", || {
            let mut worst = f64::INFINITY;
            for kappa in [0.1, 1.0, 10.0] {
                worst = worst.min(green_deficit(cfg, kappa, dim)?);
            }
            Ok((worst + 1e-12, format!("dim {dim}, min deficit {worst:e}")))
        });
    }

    // spectral
    t.run("spectral", "min_eig_monotone", || {
        let mut prev = f64::NEG_INFINITY;
        let mut worst = f64::INFINITY;
        for i in 0..12 {
            let kappa = 0.05 * 1.6f64.powi(i);
            let v = min_eig(&build_q(&cfg2, alpha, kappa, 2)?).0;
            worst = worst.min(v - prev);
            prev = v;
        }
        Ok((worst, "smallest increment".into()))
    });
    t.run("spectral", "ground_state_invariance", || {
        let moved = cfg3.transformed(&rot3, &shift3)?;
        let a = ground_state(&cfg3, alpha - 0.2, 3, 0.0)?;
        let b = ground_state(&moved, alpha - 0.2, 3, 0.0)?;
        match (a, b) {
            (Some(a), Some(b)) => {
                let d = (a.energy - b.energy).abs();
                Ok((1e-10 - d, format!("energy change {d:e}")))
            }
            (None, None) => Ok((1.0, "no bound state in either".into())),
            _ => Ok((-1.0, "bound state found in only one copy".into())),
        }
    });
    t.run("spectral", "polygon_maximizer", || {
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1);
        let fill = r.random_range(0.3..1.0);
        let cfg = random_admissible(&mut r, n, length, 2, fill)?;
        let poly = regular_polygon(n, length, 2)?;
        let top = ground_state(&poly, alpha, 2, 0.0)?.map(|g| g.energy);
        let e = ground_state(&cfg, alpha, 2, 0.0)?.map(|g| g.energy);
        let (Some(top), Some(e)) = (top, e) else {
            return Ok((-1.0, "missing planar bound state".into()));
        };
        let strict = shape_distance(&cfg, &poly)? > 1e-6;
        let margin = if strict { top - e } else { top + 1e-10 - e };
        Ok((margin, format!("ε(cfg) = {e:e}, ε(polygon) = {top:e}")))
    });
    for kappa in [0.3, 1.0, 3.0] {
        t.run("spectral", "rayleigh_bound", || {
            let bound = rayleigh_upper_bound(&cfg2, alpha, kappa, 2)?;
            let lowest = min_eig(&build_q(&cfg2, alpha, kappa, 2)?).0;
            Ok((
                bound - lowest + 1e-12 * bound.abs().max(1.0),
                format!("κ = {kappa}"),
            ))
        });
        t.run("spectral", "green_to_rayleigh", || {
            let poly = regular_polygon(n, length, 3)?;
            let d = green_deficit(&cfg3, kappa, 3)?;
            let a = rayleigh_upper_bound(&cfg3, alpha, kappa, 3)?;
            let b = rayleigh_upper_bound(&poly, alpha, kappa, 3)?;
            Ok((
                implication(d > 0.0, a < b),
                format!("κ = {kappa}, deficit {d:e}"),
            ))
        });
    }

    // electro
    t.run("electro", "coulomb_forms", || {
        let a = coulomb_energy_pairs(&cfg3, 1.0)?;
        let b = coulomb_energy_regrouped(&cfg3, 1.0)?;
        let d = (a - b).abs() / a;
        Ok((1e-10 - d, format!("relative gap {d:e}")))
    });
    t.run("electro", "chebyshev", || {
        let big = 6 + k % 195;
        let worst = chebyshev_check(big)?
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min);
        Ok((worst, format!("N = {big}")))
    });
    t.run("electro", "d1_chain", || {
        let mut worst = 1.0f64;
        for cfg in [&cfg2, &cfg3] {
            for m in 1..=n / 2 {
                worst = worst.min(implication(
                    check_dp(cfg, m, 1.0)?.holds,
                    check_dminus(cfg, m, 1.0)?.holds,
                ));
            }
        }
        Ok((worst, String::new()))
    });
    let hn = 4 + k % 7;
    t.run("electro", "hessian_sharp", || {
        let mut worst = f64::INFINITY;
        for m in 2..=hn / 2 {
            let top = projected_hessian(hn, m, DEFAULT_HESSIAN_STEP)?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.min(-1e-8 - top);
        }
        Ok((worst, format!("N = {hn}, m ≥ 2")))
    });
    t.run("electro", "hessian_m1_flat", || {
        let ev = projected_hessian(hn, 1, DEFAULT_HESSIAN_STEP)?;
        let size = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok((1e-6 - size, format!("N = {hn}, max |eigenvalue| {size:e}")))
    });
    let on = 3 + k % 4;
    let opts = OptimizerOptions {
        restarts: 4,
        seed,
        ..Default::default()
    };
    t.run("electro", "fm_kkt", || {
        let m = 1 + (k / 4) % (on / 2);
        let (cfg, rep) = maximize_fm(on, on as f64, 2, m, &opts)?;
        let lam = lagrange_closed_form(on, m)?;
        let poly = regular_polygon(on, on as f64, 2)?;
        let mut worst = if rep.converged { 1.0f64 } else { -1.0 };
        let matched = shape_distance(&cfg, &poly)? < 1e-4;
        if matched || m == 1 {
            for (l, z) in rep.multipliers.iter().zip(&rep.slacks) {
                worst = worst.min(1e-6 - (l - lam).abs() / lam).min(1e-8 - z.abs());
            }
        }
        Ok((
            worst,
            format!("N = {on}, m = {m}, converged {}", rep.converged),
        ))
    });
    t.run("electro", "coulomb_min", || {
        let wide = OptimizerOptions {
            restarts: 16,
            ..opts.clone()
        };
        let (cfg, _) = minimize_coulomb(on, on as f64, 2, 1.0, &wide)?;
        let e = coulomb_energy(&cfg, 1.0)?;
        let target = coulomb_energy(&regular_polygon(on, on as f64, 2)?, 1.0)?;
        let mut worst = 1e-6 - (e - target).abs() / target;
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0xc0u64);
        for _ in 0..20 {
            let fill = r.random_range(0.5..1.0);
            let other = random_admissible(&mut r, on, on as f64, 2, fill)?;
            worst = worst.min((coulomb_energy(&other, 1.0)? - e) / e + 1e-12);
        }
        Ok((worst, format!("N = {on}, energy {e:e}")))
    });

    // fourier_op
    t.run("fourier_op", "block_bound", || {
        let big = 2 + k % 63;
        let mut worst = 0.0f64;
        for m in 1..=big / 2 {
            worst =
                worst.max((operator_norm(big, m, NormMode::Block, 0)? - bound_rhs(big, m)?).abs());
        }
        Ok((1e-12 - worst, format!("N = {big}, max error {worst:e}")))
    });
    t.run("fourier_op", "dense_monotone", || {
        let small = 2 + k % 6;
        let m = 1 + k % (small / 2);
        let block = operator_norm(small, m, NormMode::Block, 0)?;
        let mut prev = 0.0;
        let mut worst = f64::INFINITY;
        for cutoff in [16, 64, 256] {
            let v = operator_norm(small, m, NormMode::Dense, cutoff.max(small))?;
            worst = worst.min(v - prev + 1e-13).min(block + 1e-12 - v);
            prev = v;
        }
        Ok((worst, format!("N = {small}, m = {m}")))
    });
    t.run("fourier_op", "form_bound", || {
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0xf0);
        let dim = r.random_range(1..=3usize);
        let mut d = DSequence::new();
        for j in -20i64..=20 {
            if j != 0 && r.random_bool(0.6) {
                let v = (0..dim)
                    .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
                    .collect();
                d.insert(j, v);
            }
        }
        let norm = sequence_norm_sqr(&d).sqrt();
        if norm == 0.0 {
            return Ok((1.0, "empty sequence".into()));
        }
        for v in d.values_mut() {
            v.iter_mut().for_each(|z| *z /= norm);
        }
        let mut worst = f64::INFINITY;
        for m in 1..=n / 2 {
            worst = worst.min(bound_rhs(n, m)? + 1e-12 - quadratic_form(&d, n, m)?);
        }
        Ok((worst, format!("N = {n}")))
    });
    t.run("fourier_op", "chordsum_consistency", || {
        let unit = random_unit_speed_loop(loop_seed, modes.min(5), decay.max(2.5), 2)?;
        let cfg = sample_equidistant(&unit, n, 1e-13)?;
        let mut worst = 0.0f64;
        for m in 1..=n / 2 {
            worst = worst.max((chordsum_fourier(&unit, n, m)? - chord_sum(&cfg, m, 2.0)?).abs());
        }
        Ok((1e-8 - worst, format!("N = {n}, max gap {worst:e}")))
    });
    t.run("fourier_op", "phase_shift", || {
        let unit = random_unit_speed_loop(loop_seed, modes.min(5), decay.max(2.5), 3)?;
        let s0 = 2.0 * PI * (k as f64 * 0.618_034).fract();
        let shifted = unit.phase_shifted(s0);
        let mut worst = 0.0f64;
        for m in 1..=n / 2 {
            let a = chordsum_fourier(&unit, n, m)?;
            let b = chordsum_fourier_at(&shifted, n, m, -s0)?;
            worst = worst.max((a - b).abs());
        }
        Ok((1e-10 - worst, format!("s0 = {s0}, max change {worst:e}")))
    });
    t
}

/// Runs `trials` seeded trials of every invariant.
pub fn run_verify(seed: u64, trials: usize) -> anyhow::Result<SuiteSummary> {
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let start = Instant::now();
    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|k| run_trial(seed, k))
        .collect();
    let mut categories: BTreeMap<String, CategoryStats> = CATEGORIES
        .iter()
        .map(|c| {
            (
                c.to_string(),
                CategoryStats {
                    run: 0,
                    passed: 0,
                    failed: 0,
                    worst_margin: f64::INFINITY,
                },
            )
        })
        .collect();
    let mut failures = Vec::new();
    for (k, trial) in results.into_iter().enumerate() {
        for c in trial.checks {
            let stats = categories.get_mut(c.category).expect("known category");
            stats.run += 1;
            stats.worst_margin = stats.worst_margin.min(c.margin);
            if c.margin >= 0.0 {
                stats.passed += 1;
            } else {
                stats.failed += 1;
                failures.push(FailureRecord {
                    category: c.category.to_string(),
                    check: c.name.to_string(),
                    trial: k,
                    seed: restart_seed(seed, k as u64),
                    detail: c.detail,
                });
            }
        }
    }
    Ok(SuiteSummary {
        seed,
        trials,
        categories,
        failures,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}
