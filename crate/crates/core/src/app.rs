//! Run orchestration behind the command-line front end.
//!
//! [`run_mode`] dispatches a validated [`RunConfig`] to one pipeline. All
//! files go through a single [`ArtifactWriter`]; the manifest is marked
//! `complete` only when the pipeline succeeded.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{FigureKind, InitialSpec, RunConfig};
use crate::constitutive::Laws;
use crate::diagnostics::{lyapunov_decay_check, DiagnosticRecorder, DiagnosticSeries, CSV_COLUMNS};
use crate::error::{Error, Result};
use crate::evolve::{Evolver, FieldState, InitialData, RunSummary};
use crate::hyperbolic::{assess, compatible_boundary_data, jump_speed_solve, JumpCandidate};
use crate::numerics::ode::rk4_fixed;
use crate::output::{csv_document, fmt_num, load_state, sha256_hex, state_csv, ArtifactWriter, Manifest, Status};
use crate::plot::{render_svg, Figure, LegendPos, LineStyle, Marker, Panel, Series};
use crate::steady::{
    alpha_bar, existence_threshold, sigma_membership, solve_steady, zero_structure, BoundaryData, SteadyProfile,
};

/// What a finished run reports back to the caller.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: Manifest,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
    /// Machine-readable record, also stored as `summary.json`.
    pub record: Value,
}

struct Report {
    lines: Vec<String>,
    record: Value,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: &'a ArtifactWriter,
    meta: Vec<(String, String)>,
}

impl Ctx<'_> {
    fn meta_with(&self, extra: &[(&str, String)]) -> Vec<(String, String)> {
        let mut m = self.meta.clone();
        m.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
        m
    }

    fn svg(&self, name: &str, fig: &Figure) -> Result<()> {
        self.out.write(name, render_svg(fig)?.as_bytes())?;
        Ok(())
    }
}

fn json_text(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Executes one run, writing every artifact and the manifest under
/// `cfg.out`. On failure the manifest is still written, marked `partial`
/// with the error, and the error is returned.
pub fn run_mode(cfg: &RunConfig) -> Result<Outcome> {
    let out = ArtifactWriter::create(&cfg.out, cfg.mode.name())?;
    let result = (|| -> Result<Report> {
        let echo = cfg.to_toml()?;
        out.write("config.resolved.toml", echo.as_bytes())?;
        let mut meta = vec![("mode".to_string(), cfg.mode.to_string())];
        if let Some(p) = cfg.preset {
            meta.push(("preset".into(), p.name().into()));
        }
        meta.push(("config_sha256".into(), sha256_hex(echo.as_bytes())));
        let ctx = Ctx { cfg, out: &out, meta };
        let report = match cfg.mode {
            crate::config::Mode::Steady => steady_pipeline(&ctx),
            crate::config::Mode::Evolve => evolve_pipeline(&ctx),
            crate::config::Mode::SigmaMap => sigma_map_pipeline(&ctx),
            crate::config::Mode::HyperbolicCheck => hyperbolic_pipeline(&ctx),
            crate::config::Mode::Figures => figures_pipeline(&ctx),
        }?;
        out.write("summary.json", json_text(&report.record)?.as_bytes())?;
        Ok(report)
    })();
    match result {
        Ok(report) => Ok(Outcome {
            manifest: out.finish(Status::Complete, None)?,
            lines: report.lines,
            record: report.record,
        }),
        Err(e) => {
            let _ = out.finish(Status::Partial, Some(e.to_string()));
            Err(e)
        }
    }
}

fn problem(cfg: &RunConfig) -> Result<(Laws, BoundaryData)> {
    let laws = cfg.problem.laws()?;
    let b = cfg.problem.boundary(&laws)?;
    Ok((laws, b))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn profile_panel(p: &SteadyProfile, laws: &Laws, b: &BoundaryData, title: &str) -> Result<Panel> {
    let z = zero_structure(p.alpha_star, p.v_bar, laws)?;
    let mut hlines: Vec<(f64, String)> = vec![(b.u_minus, "u-".into()), (b.u_plus, "u+".into())];
    if z.exists {
        for (u, name) in [(z.u1, "u1"), (z.u2, "u2")] {
            match hlines
                .iter_mut()
                .find(|(v, _)| (v - u).abs() < 0.02 * (b.u_plus - b.u_minus))
            {
                Some((_, label)) => *label = format!("{label} ~ {name}"),
                None => hlines.push((u, name.into())),
            }
        }
    }
    Ok(Panel {
        title: title.into(),
        x_label: "x".into(),
        y_label: "u".into(),
        series: vec![Series::new(
            format!("alpha* = {:.6}", p.alpha_star),
            p.grid.iter().copied().zip(p.u_bar.iter().copied()).collect(),
            LineStyle::Solid,
        )],
        hlines,
        legend: LegendPos::BottomRight,
        ..Panel::default()
    })
}

fn steady_pipeline(ctx: &Ctx<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let (laws, b) = problem(cfg)?;
    let p = solve_steady(&b, cfg.scheme.n, &laws)?;
    let jump = compatible_boundary_data(b.u_minus, b.u_plus, &laws).ok();
    let gap = b.jump_compatibility_gap(&laws);
    let admissible = jump.as_ref().map(|(_, v)| v.admissible);
    let meta = ctx.meta_with(&[
        ("alpha_star", fmt_num(p.alpha_star)),
        ("alpha_bar", fmt_num(p.alpha_bar)),
        ("v_star", fmt_num(p.v_bar)),
        ("length_residual", fmt_num(p.length_residual)),
        ("residual_inf", fmt_num(p.residual_inf)),
        ("boundary_mismatch", fmt_num(p.boundary_mismatch)),
        (
            "jump_compatibility_gap",
            gap.map(fmt_num).unwrap_or_else(|| "n/a".into()),
        ),
        ("jump_admissible", format!("{admissible:?}")),
        ("N", p.n().to_string()),
    ]);
    let csv = csv_document(
        &meta,
        &["x", "u_bar"],
        p.grid.iter().zip(&p.u_bar).map(|(&x, &u)| [x, u]),
    );
    ctx.out.write("profile.csv", csv.as_bytes())?;
    ctx.svg(
        "profile.svg",
        &Figure {
            title: "Stationary connection".into(),
            panels: vec![profile_panel(&p, &laws, &b, "steady profile")?],
            notes: meta.iter().map(|(k, v)| format!("{k}: {v}")).collect(),
        },
    )?;
    let lines = vec![
        format!(
            "alpha* = {}   (alpha_bar = {})",
            fmt_num(p.alpha_star),
            fmt_num(p.alpha_bar)
        ),
        format!("v* = {}", fmt_num(p.v_bar)),
        format!(
            "length residual = {:e}, ODE residual = {:e}, boundary mismatch = {:e}",
            p.length_residual, p.residual_inf, p.boundary_mismatch
        ),
        match gap {
            Some(g) => format!("relative gap to the jump-compatible momentum: {g:e}"),
            None => "jump-compatible momentum undefined for u- = u+".into(),
        },
    ];
    let record = json!({
        "alpha_star": p.alpha_star,
        "alpha_bar": p.alpha_bar,
        "v_star": p.v_bar,
        "length_residual": p.length_residual,
        "residual_inf": p.residual_inf,
        "boundary_mismatch": p.boundary_mismatch,
        "jump_compatibility_gap": gap,
        "jump_admissible": admissible,
        "n": p.n(),
    });
    Ok(Report { lines, record })
}

/// Result of an `evolve`-style run, kept even when the integration stopped
/// early so partial data can still be written.
struct Evolution {
    steady: SteadyProfile,
    snapshots: Vec<FieldState>,
    series: DiagnosticSeries,
    result: Result<RunSummary>,
}

fn evolve_run(cfg: &RunConfig) -> Result<(Evolver, Evolution)> {
    let (laws, b) = problem(cfg)?;
    let steady = solve_steady(&b, cfg.scheme.n, &laws)?;
    let evolver = Evolver::new(laws, b, cfg.scheme)?;
    let initial = match &cfg.initial {
        InitialSpec::State(path) => {
            let s = load_state(path)?;
            let (lo, hi) = (s.grid[0], s.grid[s.n()]);
            if (lo + b.half_length).abs() > 1e-9 || (hi - b.half_length).abs() > 1e-9 {
                return Err(Error::Usage(format!(
                    "{} spans [{lo}, {hi}] but the problem interval is [-{l}, {l}]",
                    path.display(),
                    l = b.half_length
                )));
            }
            InitialData::State(s)
        }
        spec => spec.to_initial_data(cfg.seed).expect("non-state initial data"),
    };
    let s0 = evolver.initial_state(&initial, Some(&steady))?;
    let mut snapshots = Vec::new();
    let mut recorder = DiagnosticRecorder::new(&evolver, &steady);
    let result = evolver.run(s0, |ev| {
        recorder.observe(ev)?;
        snapshots.push(ev.state.clone());
        Ok(())
    });
    let series = recorder.series;
    Ok((
        evolver,
        Evolution {
            steady,
            snapshots,
            series,
            result,
        },
    ))
}

fn nearest_snapshots<'a>(snapshots: &'a [FieldState], times: &[f64]) -> Vec<&'a FieldState> {
    let mut picked: Vec<&FieldState> = Vec::new();
    for &t in times {
        if let Some(s) = snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
        {
            if picked.last().is_none_or(|p| p.t != s.t) {
                picked.push(s);
            }
        }
    }
    picked
}

/// Three significant digits, for legends.
fn short(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let digits = (2 - x.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn dynamics_figure(ev: &Evolution, times: &[f64], notes: Vec<String>) -> Figure {
    let picked = nearest_snapshots(&ev.snapshots, times);
    let styles = [
        LineStyle::Solid,
        LineStyle::Dashed,
        LineStyle::DashDot,
        LineStyle::Dotted,
    ];
    let series = |field: fn(&FieldState) -> &Vec<f64>| -> Vec<Series> {
        picked
            .iter()
            .enumerate()
            .map(|(i, s)| Series {
                color: Some(i % 7),
                ..Series::new(
                    format!("t = {}", short(s.t)),
                    s.grid.iter().copied().zip(field(s).iter().copied()).collect(),
                    styles[i % styles.len()],
                )
            })
            .collect()
    };
    let mut u_series = series(|s| &s.u);
    let mut v_series = series(|s| &s.v);
    let steady_u = Series {
        color: Some(7),
        ..Series::new(
            "steady",
            ev.steady
                .grid
                .iter()
                .copied()
                .zip(ev.steady.u_bar.iter().copied())
                .collect(),
            LineStyle::Dotted,
        )
    };
    u_series.push(steady_u);
    let l = ev.steady.grid[ev.steady.n()];
    v_series.push(Series {
        color: Some(7),
        ..Series::new(
            "steady",
            vec![(-l, ev.steady.v_bar), (l, ev.steady.v_bar)],
            LineStyle::Dotted,
        )
    });
    Figure {
        title: "Density and momentum snapshots".into(),
        panels: vec![
            Panel {
                title: "density u(x, t)".into(),
                x_label: "x".into(),
                y_label: "u".into(),
                series: u_series,
                legend: LegendPos::BottomRight,
                ..Panel::default()
            },
            Panel {
                title: "momentum v(x, t)".into(),
                x_label: "x".into(),
                y_label: "v".into(),
                series: v_series,
                legend: LegendPos::TopLeft,
                ..Panel::default()
            },
        ],
        notes,
    }
}

fn evolve_pipeline(ctx: &Ctx<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let (evolver, ev) = evolve_run(cfg)?;
    let meta = ctx.meta_with(&[
        ("N", cfg.scheme.n.to_string()),
        ("t_final", fmt_num(cfg.scheme.t_final)),
        ("initial", cfg.initial.to_string()),
        ("alpha_star", fmt_num(ev.steady.alpha_star)),
        ("v_star", fmt_num(ev.steady.v_bar)),
    ]);
    let trajectory = csv_document(
        &meta,
        &["t", "x", "u", "v"],
        ev.snapshots.iter().flat_map(|s| {
            s.grid
                .iter()
                .zip(&s.u)
                .zip(&s.v)
                .map(move |((&x, &u), &v)| [s.t, x, u, v])
        }),
    );
    ctx.out.write("trajectory.csv", trajectory.as_bytes())?;
    let diagnostics = csv_document(&meta, &CSV_COLUMNS, ev.series.rows());
    ctx.out.write("diagnostics.csv", diagnostics.as_bytes())?;
    let summary = match &ev.result {
        Ok(s) => s,
        Err(e) => return Err(e.clone()),
    };
    ctx.out
        .write("final_state.csv", state_csv(&summary.final_state, &meta).as_bytes())?;
    ctx.svg(
        "dynamics.svg",
        &dynamics_figure(
            &ev,
            &cfg.figures.snapshot_times,
            meta.iter().map(|(k, v)| format!("{k}: {v}")).collect(),
        ),
    )?;

    let records = &ev.series.records;
    let decay = lyapunov_decay_check(records, cfg.diagnostics.decay_tol, cfg.h3_gate());
    let d0 = records.first().map_or(f64::NAN, |r| r.l2_distance);
    let sup_distance = records.iter().map(|r| r.l2_distance).fold(0.0, f64::max);
    let ledgers_finite = ev.series.ledgers.iter().all(|n| n.is_finite());
    let min_density = ev.series.min_density.iter().copied().fold(f64::INFINITY, f64::min);
    let final_distance = records.last().map_or(f64::NAN, |r| r.l2_distance);
    let lines = vec![
        format!(
            "integrated to t = {} in {} steps (dt in [{:e}, {:e}]), {} logged states",
            fmt_num(summary.final_state.t),
            summary.steps,
            summary.min_dt,
            summary.max_dt,
            summary.logs
        ),
        format!("L2 distance to steady state: initial {d0:e}, final {final_distance:e}, sup {sup_distance:e}"),
        format!("Lyapunov decay: {}", decay.label()),
        format!("max entropy-identity residual: {:e}", ev.series.max_entropy_residual()),
        format!("minimum density {min_density:e}; norm ledger finite: {ledgers_finite}"),
    ];
    let record = json!({
        "t_final": summary.final_state.t,
        "steps": summary.steps,
        "logs": summary.logs,
        "min_dt": summary.min_dt,
        "max_dt": summary.max_dt,
        "alpha_star": ev.steady.alpha_star,
        "initial_l2_distance": d0,
        "final_l2_distance": final_distance,
        "sup_l2_distance": sup_distance,
        "lyapunov_decay": decay,
        "max_entropy_residual": ev.series.max_entropy_residual(),
        "min_density": min_density,
        "norm_ledger_finite": ledgers_finite,
        "final_mass": crate::evolve::total_mass(&summary.final_state),
        "evolver_n": evolver.scheme.n,
    });
    Ok(Report { lines, record })
}

fn sigma_map_pipeline(ctx: &Ctx<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let laws = cfg.problem.laws()?;
    let (u_minus, u_plus) = cfg.problem.boundary_values()?;
    let vs = cfg.sigma_map.v_star_axis();
    let alphas = cfg.sigma_map.alpha_axis();
    let lattice: Vec<(f64, f64)> = vs.iter().flat_map(|&v| alphas.iter().map(move |&a| (v, a))).collect();
    let points = lattice
        .par_iter()
        .map(|&(v, a)| sigma_membership(v, a, u_minus, u_plus, &laws))
        .collect::<Result<Vec<_>>>()?;
    let boundary = vs
        .par_iter()
        .map(|&v| Ok([v, alpha_bar(v, u_minus, u_plus, &laws)?, existence_threshold(v, &laws)?]))
        .collect::<Result<Vec<_>>>()?;
    let meta = ctx.meta_with(&[
        ("u_minus", fmt_num(u_minus)),
        ("u_plus", fmt_num(u_plus)),
        ("lattice", format!("{} x {}", vs.len(), alphas.len())),
    ]);
    let table = csv_document(
        &meta,
        &["v_star", "alpha", "in_sigma", "margin", "third_inequality_slack"],
        points.iter().map(|p| {
            [
                p.v_star,
                p.alpha,
                if p.in_sigma { 1.0 } else { 0.0 },
                p.margin,
                p.third_inequality_slack.unwrap_or(f64::NAN),
            ]
        }),
    );
    ctx.out.write("sigma_map.csv", table.as_bytes())?;
    ctx.out.write(
        "sigma_boundary.csv",
        csv_document(&meta, &["v_star", "alpha_bar", "existence_threshold"], &boundary).as_bytes(),
    )?;
    if boundary.len() >= 2 {
        ctx.svg(
            "sigma_map.svg",
            &Figure {
                title: "Admissible region in the (v*, alpha) plane".into(),
                panels: vec![Panel {
                    title: "region lies above alpha_bar".into(),
                    x_label: "v*".into(),
                    y_label: "alpha".into(),
                    series: vec![
                        Series::new(
                            "alpha_bar(v*)",
                            boundary.iter().map(|r| (r[0], r[1])).collect(),
                            LineStyle::Solid,
                        ),
                        Series::new(
                            "two positive zeros",
                            boundary.iter().map(|r| (r[0], r[2])).collect(),
                            LineStyle::Dashed,
                        ),
                    ],
                    ..Panel::default()
                }],
                notes: meta.iter().map(|(k, v)| format!("{k}: {v}")).collect(),
            },
        )?;
    }
    let inside = points.iter().filter(|p| p.in_sigma).count();
    Ok(Report {
        lines: vec![format!(
            "{inside} of {} lattice points lie in the admissible region",
            points.len()
        )],
        record: json!({ "points": points.len(), "in_sigma": inside, "u_minus": u_minus, "u_plus": u_plus }),
    })
}

fn hyperbolic_pipeline(ctx: &Ctx<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let laws = cfg.problem.laws()?;
    let (candidate, source) = match cfg.hyperbolic {
        Some(j) => match (j.w_plus, j.c) {
            (Some(w_plus), Some(c)) => (
                JumpCandidate::new(j.rho_minus, j.w_minus, j.rho_plus, w_plus, c)?,
                "given",
            ),
            _ => {
                let (c, w_plus) = jump_speed_solve(j.rho_minus, j.rho_plus, j.w_minus, &laws)?;
                (
                    JumpCandidate::new(j.rho_minus, j.w_minus, j.rho_plus, w_plus, c)?,
                    "speed and right velocity solved from the jump relations",
                )
            }
        },
        None => {
            let (u_minus, u_plus) = cfg.problem.boundary_values()?;
            let v = match cfg.problem.v_minus {
                Some(v) => v,
                None => compatible_boundary_data(u_minus, u_plus, &laws)?.0,
            };
            (
                JumpCandidate::stationary(u_minus, u_plus, v)?,
                "stationary jump between the boundary states",
            )
        }
    };
    let verdict = assess(&candidate, &laws)?;
    let record = json!({ "source": source, "candidate": candidate, "verdict": verdict });
    ctx.out.write("verdict.json", json_text(&record)?.as_bytes())?;
    let lines = vec![
        format!(
            "jump ({}, {}) -> ({}, {}) with speed {}  [{source}]",
            fmt_num(candidate.rho_minus),
            fmt_num(candidate.w_minus),
            fmt_num(candidate.rho_plus),
            fmt_num(candidate.w_plus),
            fmt_num(candidate.c)
        ),
        format!(
            "jump residuals: mass {:e}, momentum {:e}",
            verdict.rh_residuals.0, verdict.rh_residuals.1
        ),
        format!("entropy jump: {:e}", verdict.entropy_jump),
        format!("admissible: {}", if verdict.admissible { "yes" } else { "no" }),
        format!("notes: {}", verdict.notes),
    ];
    Ok(Report { lines, record })
}

fn figures_pipeline(ctx: &Ctx<'_>) -> Result<Report> {
    match ctx.cfg.figures.kind {
        FigureKind::NoConnection => no_connection_figure(ctx),
        FigureKind::GCurves => g_curves_figure(ctx),
        FigureKind::Connection => connection_figure(ctx),
        FigureKind::Dynamics => dynamics_pipeline(ctx),
    }
}

fn notes(meta: &[(String, String)]) -> Vec<String> {
    meta.iter().map(|(k, v)| format!("{k}: {v}")).collect()
}

fn f_curve(laws: &Laws, alpha: f64, v_star: f64, u_max: f64) -> Vec<(f64, f64)> {
    linspace(0.0, u_max, 401)
        .into_iter()
        .map(|u| (u, laws.stationary_f(u, alpha, v_star).unwrap_or(-v_star * v_star)))
        .collect()
}

/// Solution of `ε v* u_x = f(u)` from `u(-ℓ) = u0`, truncated where it
/// leaves the positive half line.
fn stationary_trajectory(laws: &Laws, alpha: f64, b: &BoundaryData, u0: f64, n: usize) -> Vec<(f64, f64)> {
    let rhs = |_: f64, u: f64| {
        laws.stationary_f(u.max(1e-300), alpha, b.v_minus).unwrap_or(f64::NAN) / (b.epsilon * b.v_minus)
    };
    let grid = b.grid(n);
    let mut out = vec![(grid[0], u0)];
    let mut u = u0;
    for w in grid.windows(2) {
        u = rk4_fixed(rhs, w[0], u, w[1], 8);
        if !(u.is_finite() && u > 0.0) {
            break;
        }
        out.push((w[1], u));
    }
    out
}

fn no_connection_figure(ctx: &Ctx<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let (laws, b) = problem(cfg)?;
    let alpha = cfg.figures.alpha.expect("validated");
    let z = zero_structure(alpha, b.v_minus, &laws)?;
    if !z.exists {
        return Err(Error::Configuration(format!(
            "f has no positive zeros for alpha = {alpha}, v* = {}",
            b.v_minus
        )));
    }
    let u_max = 1.3 * b.u_plus.max(z.u2);
    let f = |u: f64| laws.stationary_f(u, alpha, b.v_minus);
    let meta = ctx.meta_with(&[
        ("alpha", fmt_num(alpha)),
        ("v_star", fmt_num(b.v_minus)),
        ("u1", fmt_num(z.u1)),
        ("u2", fmt_num(z.u2)),
        ("u_minus", fmt_num(b.u_minus)),
        ("u_plus", fmt_num(b.u_plus)),
    ]);
    let mut markers = vec![
        Marker {
            x: z.u1,
            y: 0.0,
            label: "u1".into(),
        },
        Marker {
            x: z.u2,
            y: 0.0,
            label: "u2".into(),
        },
    ];
    for (label, u) in [("u-", b.u_minus), ("u+", b.u_plus)] {
        markers.push(Marker {
            x: u,
            y: f(u)?,
            label: label.into(),
        });
    }
    let f_panel = Panel {
        title: "f(u)".into(),
        x_label: "u".into(),
        y_label: "f".into(),
        series: vec![Series::new(
            format!("alpha = {alpha}"),
            f_curve(&laws, alpha, b.v_minus, u_max),
            LineStyle::Solid,
        )],
        markers,
        hlines: vec![(0.0, String::new())],
        ..Panel::default()
    };
    let starts = [
        b.u_minus,
        b.u_plus,
        0.5 * (z.u1 + z.u2),
        0.9 * z.u1,
        1.15 * z.u2.max(b.u_plus),
    ];
    let styles = [
        LineStyle::Solid,
        LineStyle::Dashed,
        LineStyle::DashDot,
        LineStyle::Dotted,
        LineStyle::Dashed,
    ];
    let series: Vec<Series> = starts
        .iter()
        .zip(styles)
        .map(|(&u0, style)| {
            Series::new(
                format!("u(-l) = {}", fmt_num(u0)),
                stationary_trajectory(&laws, alpha, &b, u0, 400),
                style,
            )
        })
        .filter(|s| s.points.len() >= 2)
        .collect();
    let phase = Panel {
        title: "solutions of eps v* u_x = f(u)".into(),
        x_label: "x".into(),
        y_label: "u".into(),
        series,
        hlines: vec![(z.u1, "u1".into()), (z.u2, "u2".into()), (b.u_plus, "u+".into())],
        y_range: Some((0.0, u_max)),
        legend: LegendPos::BottomRight,
        ..Panel::default()
    };
    ctx.svg(
        "no-connection.svg",
        &Figure {
            title: "u+ beyond the upper equilibrium: no connection".into(),
            panels: vec![f_panel, phase],
            notes: notes(&meta),
        },
    )?;
    let reachable = b.u_minus > z.u1 && b.u_plus < z.u2;
    Ok(Report {
        lines: vec![
            format!("zeros of f: u1 = {}, u2 = {}", fmt_num(z.u1), fmt_num(z.u2)),
            format!(
                "(u-, u+) = ({}, {}) {} inside (u1, u2)",
                fmt_num(b.u_minus),
                fmt_num(b.u_plus),
                if reachable { "lies" } else { "does not lie" }
            ),
        ],
        record: json!({ "alpha": alpha, "v_star": b.v_minus, "u1": z.u1, "u2": z.u2, "connection_possible": reachable }),
    })
}

fn g_curves_figure(ctx: &Ctx<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let f = &cfg.figures;
    let alpha = f.alpha.expect("validated");
    let v_star = match (f.v_star_squared, cfg.problem.v_minus) {
        (Some(v2), _) => v2.sqrt(),
        (None, Some(v)) => v,
        (None, None) => unreachable!("validated"),
    };
    let variants = if f.viscosity_variants.is_empty() {
        vec![cfg.problem.viscosity]
    } else {
        f.viscosity_variants.clone()
    };
    let styles = [
        LineStyle::Dashed,
        LineStyle::Solid,
        LineStyle::DashDot,
        LineStyle::Dotted,
    ];
    let ws = linspace(0.0, f.w_max, 601);
    let mut series = Vec::new();
    let mut markers = Vec::new();
    let mut zeros = Vec::new();
    let mut top = f64::NEG_INFINITY;
    for (i, spec) in variants.iter().enumerate() {
        let laws = Laws::new(cfg.problem.pressure.law(), spec.law())?;
        let pts: Vec<(f64, f64)> = ws
            .iter()
            .map(|&w| (w, laws.g(w, alpha, v_star).unwrap_or(f64::NAN)))
            .collect();
        top = pts.iter().map(|p| p.1).filter(|y| y.is_finite()).fold(top, f64::max);
        let z = zero_structure(alpha, v_star, &laws)?;
        for (k, w) in [("w1", z.w1), ("w2", z.w2)] {
            if let Some(w) = w {
                markers.push(Marker {
                    x: w,
                    y: 0.0,
                    label: String::new(),
                });
                zeros.push(json!({ "viscosity": spec.describe(), "zero": k, "w": w }));
            }
        }
        series.push(Series {
            color: Some(if styles[i % styles.len()] == LineStyle::Solid {
                7
            } else {
                i
            }),
            ..Series::new(spec.describe(), pts, styles[i % styles.len()])
        });
    }
    let v2 = v_star * v_star;
    let meta = ctx.meta_with(&[("alpha", fmt_num(alpha)), ("v_star_squared", fmt_num(v2))]);
    let panel = Panel {
        title: format!(
            "g(w) = f(Phi^-1(w)), alpha = {}, v*^2 = {}",
            fmt_num(alpha),
            fmt_num(v2)
        ),
        x_label: "w".into(),
        y_label: "g".into(),
        series,
        markers,
        hlines: vec![(0.0, String::new())],
        x_range: Some((0.0, f.w_max)),
        y_range: Some((-1.5 * v2, 1.1 * top.max(0.0) + 0.1 * v2)),
        legend: LegendPos::BottomRight,
    };
    ctx.svg(
        "g-curves.svg",
        &Figure {
            title: "Transformed right-hand side for several viscosity laws".into(),
            panels: vec![panel],
            notes: notes(&meta),
        },
    )?;
    Ok(Report {
        lines: vec![format!(
            "{} curves plotted over w in [0, {}]",
            variants.len(),
            fmt_num(f.w_max)
        )],
        record: json!({ "alpha": alpha, "v_star_squared": v2, "curves": variants.len(), "zeros": zeros }),
    })
}

fn connection_figure(ctx: &Ctx<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let (laws, b) = problem(cfg)?;
    let p = solve_steady(&b, cfg.scheme.n, &laws)?;
    let alphas = if cfg.figures.alphas.is_empty() {
        vec![0.6 * p.alpha_bar, p.alpha_star, 1.6 * p.alpha_star, 2.5 * p.alpha_star]
    } else {
        cfg.figures.alphas.clone()
    };
    let v = p.v_bar;
    let a_max = alphas.iter().copied().fold(p.alpha_star, f64::max);
    let z_max = zero_structure(a_max, v, &laws)?;
    let u_max = 1.2 * if z_max.exists { z_max.u2 } else { 2.0 * b.u_plus }.max(b.u_plus);
    let styles = [
        LineStyle::Dotted,
        LineStyle::DashDot,
        LineStyle::Solid,
        LineStyle::Dashed,
    ];
    let series: Vec<Series> = alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            Series::new(
                format!("alpha = {}", short(a)),
                f_curve(&laws, a, v, u_max),
                styles[i % styles.len()],
            )
        })
        .collect();
    let top = series
        .iter()
        .flat_map(|s| s.points.iter().map(|q| q.1))
        .fold(0.0, f64::max);
    let f_at = |u: f64| laws.stationary_f(u, p.alpha_star, v);
    let f_panel = Panel {
        title: "f(u) for several alpha".into(),
        x_label: "u".into(),
        y_label: "f".into(),
        series,
        markers: vec![
            Marker {
                x: b.u_minus,
                y: f_at(b.u_minus)?,
                label: "u-".into(),
            },
            Marker {
                x: b.u_plus,
                y: f_at(b.u_plus)?,
                label: "u+".into(),
            },
        ],
        hlines: vec![(0.0, String::new())],
        y_range: Some((-1.5 * v * v, 1.15 * top + 0.1 * v * v)),
        ..Panel::default()
    };
    let meta = ctx.meta_with(&[
        ("alpha_star", fmt_num(p.alpha_star)),
        ("alpha_bar", fmt_num(p.alpha_bar)),
        ("v_star", fmt_num(v)),
    ]);
    ctx.svg(
        "connection.svg",
        &Figure {
            title: "Positive connection between u- and u+".into(),
            panels: vec![f_panel, profile_panel(&p, &laws, &b, "connection at alpha*")?],
            notes: notes(&meta),
        },
    )?;
    Ok(Report {
        lines: vec![format!(
            "alpha* = {}, alpha_bar = {}",
            fmt_num(p.alpha_star),
            fmt_num(p.alpha_bar)
        )],
        record: json!({ "alpha_star": p.alpha_star, "alpha_bar": p.alpha_bar, "v_star": v, "alphas": alphas }),
    })
}

fn dynamics_pipeline(ctx: &Ctx<'_>) -> Result<Report> {
    let cfg = ctx.cfg;
    let (_, ev) = evolve_run(cfg)?;
    if let Err(e) = &ev.result {
        return Err(e.clone());
    }
    let meta = ctx.meta_with(&[
        ("N", cfg.scheme.n.to_string()),
        ("t_final", fmt_num(cfg.scheme.t_final)),
        ("initial", cfg.initial.to_string()),
        ("v_star", fmt_num(ev.steady.v_bar)),
    ]);
    let picked = nearest_snapshots(&ev.snapshots, &cfg.figures.snapshot_times);
    let csv = csv_document(
        &meta,
        &["t", "x", "u", "v"],
        picked.iter().flat_map(|s| {
            s.grid
                .iter()
                .zip(&s.u)
                .zip(&s.v)
                .map(move |((&x, &u), &v)| [s.t, x, u, v])
        }),
    );
    ctx.out.write("dynamics.csv", csv.as_bytes())?;
    ctx.svg(
        "dynamics.svg",
        &dynamics_figure(&ev, &cfg.figures.snapshot_times, notes(&meta)),
    )?;
    let last = ev.snapshots.last().expect("at least the initial state is logged");
    let sup_v = last.v.iter().map(|x| (x - ev.steady.v_bar).abs()).fold(0.0, f64::max);
    Ok(Report {
        lines: vec![
            format!("{} snapshots plotted", picked.len()),
            format!("sup |v - v*| at t = {}: {sup_v:e}", fmt_num(last.t)),
        ],
        record: json!({ "snapshots": picked.iter().map(|s| s.t).collect::<Vec<_>>(), "final_sup_v_deviation": sup_v }),
    })
}
