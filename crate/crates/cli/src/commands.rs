//! The non-suite subcommands.

use std::fmt::Write;

use anyhow::{bail, Context};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use chordlab::chords::{check_dminus, check_dp, InequalityReport};
use chordlab::electro::{
    maximize_fm, maximize_ground_state, minimize_coulomb, KktReport, OptimizerOptions,
};
use chordlab::fourier_op::{bound_rhs, operator_norm, NormMode};
use chordlab::geometry::PointConfiguration;
use chordlab::geometry::{random_admissible, random_fourier_loop, regular_polygon, rhomboid};
use chordlab::loopspec::{fourier_spec, polygon_spec, LoopSpec};
use chordlab::report::{canonical_value, format_float, to_canonical_json, to_csv};
use chordlab::spectral::{ground_state, KAPPA_TOL};

use crate::{read_loop_spec, CliError, Command, Format, GenType, Mode, Rendered, Target};

fn ok(text: String) -> Result<Rendered, CliError> {
    Ok(Rendered {
        text,
        regime_failure: false,
    })
}

pub(crate) fn dispatch(command: &Command, format: Format) -> Result<Rendered, CliError> {
    match command {
        Command::Spectrum {
            loop_spec,
            alpha,
            dim,
            n,
        } => spectrum(loop_spec, *alpha, *dim, *n, format),
        Command::Optimize {
            target,
            n,
            length,
            dim,
            m,
            alpha,
            q,
            restarts,
            seed,
        } => {
            let opts = OptimizerOptions {
                restarts: *restarts,
                seed: *seed,
                ..Default::default()
            };
            optimize(
                *target,
                *n,
                length.unwrap_or(*n as f64),
                *dim,
                *m,
                *alpha,
                *q,
                &opts,
                format,
            )
        }
        Command::Check {
            loop_spec,
            p,
            all_m,
            m,
            n,
        } => {
            let spec = read_loop_spec(loop_spec)?;
            let cfg = spec.configuration(*n).map_err(anyhow::Error::new)?;
            let request = CheckRequest {
                p_grid: p.clone(),
                all_m: *all_m,
                m: *m,
            };
            let reports = run_check(&cfg, &request)?;
            let regime_failure = reports.iter().any(|r| r.p.abs() <= 2.0 && !r.holds);
            let text = match format {
                Format::Json => to_canonical_json(&reports)?,
                Format::Csv => to_csv(&reports),
            };
            Ok(Rendered {
                text,
                regime_failure,
            })
        }
        Command::Opnorm { n, m, mode, cutoff } => opnorm(*n, *m, *mode, *cutoff, format),
        Command::Verify { seed, trials } => {
            let summary = crate::run_verify(*seed, *trials)?;
            eprintln!("verify: wall time {:.2}s", summary.wall_time_seconds);
            let regime_failure = summary.failed() > 0;
            let text = match format {
                Format::Json => to_canonical_json(&summary)?,
                Format::Csv => summary.to_csv(),
            };
            Ok(Rendered {
                text,
                regime_failure,
            })
        }
        Command::Gen {
            kind,
            n,
            length,
            dim,
            theta,
            side,
            seed,
            modes,
            decay,
            fill,
        } => {
            let spec = match kind {
                GenType::Regular => {
                    let n = n.context("--N is required for --type regular")?;
                    LoopSpec::Points(regular_polygon(n, length.unwrap_or(n as f64), *dim)?)
                }
                GenType::Rhomboid => LoopSpec::Points(rhomboid(*theta, *side)?),
                GenType::Random => {
                    let curve = random_fourier_loop(
                        *seed,
                        *modes,
                        *decay,
                        *dim,
                        length.unwrap_or(std::f64::consts::TAU),
                    )?;
                    match n {
                        Some(_) => LoopSpec::Points(LoopSpec::Curve(curve).configuration(*n)?),
                        None => LoopSpec::Curve(curve),
                    }
                }
                GenType::Admissible => {
                    let n = n.context("--N is required for --type admissible")?;
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    LoopSpec::Points(random_admissible(
                        &mut rng,
                        n,
                        length.unwrap_or(n as f64),
                        *dim,
                        *fill,
                    )?)
                }
            };
            ok(render_spec(&spec, format))
        }
    }
}

fn render_spec(spec: &LoopSpec, format: Format) -> String {
    match (spec, format) {
        (LoopSpec::Points(c), Format::Json) => canonical_value(&polygon_spec(c)),
        (LoopSpec::Curve(c), Format::Json) => canonical_value(&fourier_spec(c)),
        (LoopSpec::Points(c), Format::Csv) => points_csv(c),
        (LoopSpec::Curve(c), Format::Csv) => {
            let mut out = String::from("n,component,re,im\n");
            for n in 1..=c.max_mode() as i64 {
                for (k, z) in c.coeff(n).iter().enumerate() {
                    let _ = writeln!(out, "{n},{k},{},{}", format_float(z.re), format_float(z.im));
                }
            }
            out
        }
    }
}

fn coordinate_header(dim: usize) -> String {
    (0..dim)
        .map(|k| format!("x{k}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// `bead,x0,…,x{dim−1}`.
fn points_csv(c: &PointConfiguration) -> String {
    let mut out = format!("bead,{}\n", coordinate_header(c.dim()));
    for (j, p) in c.points().enumerate() {
        let row: Vec<String> = p.iter().map(|&x| format_float(x)).collect();
        let _ = writeln!(out, "{j},{}", row.join(","));
    }
    out
}

fn spectrum(
    loop_spec: &str,
    alpha: f64,
    dim: Option<usize>,
    n: Option<usize>,
    format: Format,
) -> Result<Rendered, CliError> {
    let spec = read_loop_spec(loop_spec)?;
    let cfg = spec.configuration(n)?;
    let dim = dim.unwrap_or(cfg.dim());
    let gs = ground_state(&cfg, alpha, dim, KAPPA_TOL)?;
    let text = match format {
        Format::Json => {
            let value = match &gs {
                Some(g) => json!({
                    "N": cfg.len(), "dim": dim, "alpha": alpha, "bound_state": true,
                    "kappa1": g.kappa1, "energy": g.energy, "eigvec": g.eigvec,
                    "iterations": g.iterations,
                }),
                None => json!({"N": cfg.len(), "dim": dim, "alpha": alpha, "bound_state": false}),
            };
            canonical_value(&value)
        }
        Format::Csv => {
            let mut out = String::from("N,dim,alpha,bound_state,kappa1,energy\n");
            let (k, e) = gs.as_ref().map_or((String::new(), String::new()), |g| {
                (format_float(g.kappa1), format_float(g.energy))
            });
            let _ = writeln!(
                out,
                "{},{dim},{},{},{k},{e}",
                cfg.len(),
                format_float(alpha),
                gs.is_some()
            );
            out
        }
    };
    ok(text)
}

#[allow(clippy::too_many_arguments)]
fn optimize(
    target: Target,
    n: usize,
    length: f64,
    dim: usize,
    m: usize,
    alpha: f64,
    q: f64,
    opts: &OptimizerOptions,
    format: Format,
) -> Result<Rendered, CliError> {
    let (cfg, kkt) = match target {
        Target::Fm => maximize_fm(n, length, dim, m, opts)?,
        Target::Coulomb => minimize_coulomb(n, length, dim, q, opts)?,
        Target::Groundstate => maximize_ground_state(n, length, alpha, dim, opts)?,
    };
    let name = match target {
        Target::Fm => "fm",
        Target::Coulomb => "coulomb",
        Target::Groundstate => "groundstate",
    };
    let text = match format {
        Format::Json => {
            let value = json!({
                "target": name,
                "configuration": polygon_spec(&cfg),
                "kkt": serde_json::to_value(&kkt).context("serializing the KKT report")?,
                "options": serde_json::to_value(opts).context("serializing options")?,
            });
            canonical_value(&value)
        }
        Format::Csv => kkt_csv(&cfg, &kkt),
    };
    ok(text)
}

/// `bead,multiplier,slack,constraint,active,x0,…`.
fn kkt_csv(cfg: &PointConfiguration, kkt: &KktReport) -> String {
    let mut out = format!(
        "bead,multiplier,slack,constraint,active,{}\n",
        coordinate_header(cfg.dim())
    );
    for (j, p) in cfg.points().enumerate() {
        let coords: Vec<String> = p.iter().map(|&x| format_float(x)).collect();
        let _ = writeln!(
            out,
            "{j},{},{},{},{},{}",
            format_float(kkt.multipliers[j]),
            format_float(kkt.slacks[j]),
            format_float(kkt.constraints[j]),
            kkt.active[j],
            coords.join(",")
        );
    }
    out
}

fn opnorm(
    n: usize,
    m: usize,
    mode: Mode,
    cutoff: usize,
    format: Format,
) -> Result<Rendered, CliError> {
    let norm_mode = match mode {
        Mode::Block => NormMode::Block,
        Mode::Dense => NormMode::Dense,
    };
    let norm = operator_norm(n, m, norm_mode, cutoff)?;
    let bound = bound_rhs(n, m)?;
    let mode_name = match mode {
        Mode::Block => "block",
        Mode::Dense => "dense",
    };
    let text = match format {
        Format::Json => canonical_value(&json!({
            "N": n, "m": m, "mode": mode_name, "cutoff": cutoff,
            "norm": norm, "bound": bound, "ratio": norm / bound,
        })),
        Format::Csv => format!(
            "N,m,mode,cutoff,norm,bound,ratio\n{n},{m},{mode_name},{cutoff},{},{},{}\n",
            format_float(norm),
            format_float(bound),
            format_float(norm / bound)
        ),
    };
    ok(text)
}

/// Which `(m, p)` pairs `check` evaluates.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRequest {
    /// Positive entries select `D^p`, negative ones `D^{−|p|}`.
    pub p_grid: Vec<f64>,
    /// Every `m` in `1..=⌊N/2⌋`; otherwise `m` (default 1).
    pub all_m: bool,
    pub m: Option<usize>,
}

/// Evaluates the requested inequalities on `cfg`, ordered by `m`, then by
/// position in the p grid.
pub fn run_check(
    cfg: &PointConfiguration,
    request: &CheckRequest,
) -> anyhow::Result<Vec<InequalityReport>> {
    if request.p_grid.is_empty() {
        bail!("the p grid is empty");
    }
    let ms: Vec<usize> = if request.all_m {
        (1..=cfg.len() / 2).collect()
    } else {
        vec![request.m.unwrap_or(1)]
    };
    let mut out = Vec::with_capacity(ms.len() * request.p_grid.len());
    for &m in &ms {
        for &p in &request.p_grid {
            let report = if p > 0.0 {
                check_dp(cfg, m, p)?
            } else if p < 0.0 {
                check_dminus(cfg, m, -p)?
            } else {
                bail!("p = 0 is not an exponent of either family");
            };
            out.push(report);
        }
    }
    Ok(out)
}
