//! The six subcommands. Each consumes a validated `RunConfig`, writes its
//! artifacts into the output directory, and returns the library error that
//! the caller maps onto a process exit code.

use std::fs;

use nlscyl::diagnostics::QuarticMode;
use nlscyl::error::{Error, Result};
use nlscyl::estimate_lab::scaling_sweep;
use nlscyl::snapshot::write_snapshot;
use nlscyl::study;

use crate::config::RunConfig;
use crate::outdir::{num, OutDir};
use crate::plot;

fn require<'a, T>(opt: &'a Option<T>, key: &str, why: &str) -> Result<&'a T> {
    opt.as_ref()
        .ok_or_else(|| Error::config(key, format!("block required {why}")))
}

fn input_snapshots(cfg: &RunConfig) -> Vec<&str> {
    cfg.initial_data
        .as_ref()
        .and_then(|d| d.snapshot_path())
        .into_iter()
        .collect()
}

fn run_simulation(cfg: &RunConfig, out: &OutDir) -> Result<nlscyl::dynamics::SimulationOutput> {
    let grid = cfg.grid.build()?;
    let solver = cfg.solver.build()?;
    let data = require(&cfg.initial_data, "initial_data", "to build the field")?;
    let u0 = data.build(&grid, cfg.seed)?;
    let s_diag = cfg.multiplier.as_ref().map(|m| m.s).unwrap_or(1.0);
    let n_steps = (solver.t_end / solver.dt).round().max(1.0) as usize;
    let frame_every = if cfg.output.frame_every > 0 {
        cfg.output.frame_every
    } else {
        n_steps
    };
    let diag_every = if cfg.output.diag_every > 0 {
        cfg.output.diag_every
    } else {
        (n_steps / 1000).max(1)
    };
    let ei_spec = if cfg.output.modified_energy {
        Some(require(
            &cfg.multiplier,
            "multiplier",
            "to evaluate the modified energy",
        )?
        .build()?)
    } else {
        None
    };
    let sim = nlscyl::dynamics::simulate(&u0, &solver, s_diag, frame_every, diag_every, |u, _t| {
        ei_spec.as_ref().and_then(|spec| {
            nlscyl::diagnostics::modified_energy(u, spec, QuarticMode::SplitLow, None)
                .ok()
                .map(|b| b.total)
        })
    })?;

    let rows: Vec<Vec<String>> = sim
        .diagnostics
        .iter()
        .map(|d| {
            vec![
                num(d.t),
                num(d.mass),
                num(d.energy),
                num(d.hs_norm),
                d.modified_energy.map(num).unwrap_or_default(),
                num(d.boundary_mass),
            ]
        })
        .collect();
    out.write_csv(
        "diagnostics.csv",
        "t,mass,energy,hs_norm,modified_energy,boundary_mass",
        &rows,
    )?;
    for (k, frame) in sim.trace.frames().iter().enumerate() {
        write_snapshot(frame, &out.path(&format!("frame_{k:06}.json")))?;
    }
    out.write_json(
        "manifest.json",
        &serde_json::json!({
            "windows": sim.windows,
            "boundary_flagged": sim.boundary_flagged,
            "abort": sim.abort.as_ref().map(|(t, m)| serde_json::json!({"t": t, "message": m})),
            "frames": sim.trace.len(),
            "frame_dt": sim.trace.dt(),
        }),
    )?;
    if cfg.output.plots {
        let pts: Vec<(f64, f64)> = sim.diagnostics.iter().map(|d| (d.t, d.hs_norm)).collect();
        out.write_text(
            "diagnostics_hs.svg",
            &plot::svg_line(&pts, "Sobolev norm along the run", "t", "H^s norm"),
        )?;
    }
    Ok(sim)
}

pub fn simulate(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let sim = run_simulation(cfg, out)?;
    out.stamp(cfg, &input_snapshots(cfg))?;
    if let Some((t, message)) = sim.abort {
        // partial artifacts are already on disk
        return Err(Error::numerical(t, message));
    }
    Ok(())
}

pub fn verify_bilinear(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    if cfg.experiments.is_empty() {
        return Err(Error::config(
            "experiments",
            "at least one experiment block required",
        ));
    }
    let grid = cfg.grid.build()?;
    for (k, block) in cfg.experiments.iter().enumerate() {
        let mut exp = block.experiment.clone();
        if exp.seed == 0 {
            exp.seed = cfg.seed.wrapping_add(1 + k as u64);
        }
        let report = scaling_sweep(&grid, &exp, block.axis, &block.values)?;
        let rows: Vec<Vec<String>> = report
            .records
            .iter()
            .map(|r| {
                vec![
                    num(r.axis_value),
                    r.trial.to_string(),
                    num(r.norm),
                    num(r.bound),
                    num(r.ratio),
                    num(r.t_star),
                    num(r.tail),
                    r.reliable.to_string(),
                ]
            })
            .collect();
        out.write_csv(
            &format!("bilinear_{k}.csv"),
            "axis_value,trial,norm,bound,ratio,t_star,tail,reliable",
            &rows,
        )?;
        if let Some(w) = &report.fit_warning {
            eprintln!("experiment {k}: {w}");
        }
        out.write_json(
            &format!("bilinear_{k}_summary.json"),
            &serde_json::json!({
                "variant": report.variant,
                "axis": report.axis,
                "c_max": report.c_max,
                "norm_slope": report.norm_slope,
                "ratio_slope": report.ratio_slope,
                "max_norm": report.max_norm,
                "max_ratio": report.max_ratio,
                "fit_warning": report.fit_warning,
            }),
        )?;
        if cfg.output.plots {
            let pts: Vec<(f64, f64)> = report
                .records
                .iter()
                .map(|r| (r.axis_value, r.norm))
                .collect();
            let fit = report.norm_slope.map(|f| (f.slope, f.intercept));
            out.write_text(
                &format!("bilinear_{k}.svg"),
                &plot::svg_scatter_loglog(
                    &pts,
                    fit,
                    "Bilinear norm against the sweep axis",
                    "axis value",
                    "norm",
                ),
            )?;
        }
    }
    out.stamp(cfg, &input_snapshots(cfg))
}

pub fn energy_increment(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let block = require(&cfg.energy_increment, "energy_increment", "for this command")?;
    let grid = cfg.grid.build()?;
    let solver = cfg.solver.build()?;
    let mult = require(&cfg.multiplier, "multiplier", "to set the Sobolev index s")?;
    let data = require(&cfg.initial_data, "initial_data", "to build the field")?;
    let u0 = data.build(&grid, cfg.seed)?;
    let mode = block.quartic_mode.build();
    let budget = block.budget.map(|b| b as u128);
    let report =
        study::energy_increment_study(&u0, mult.s, &block.n_values, &solver, mode, budget)?;
    let rows: Vec<Vec<String>> = report
        .records
        .iter()
        .map(|r| {
            vec![
                num(r.n),
                num(r.delta0),
                num(r.horizon),
                r.steps.to_string(),
                num(r.e_start),
                num(r.e_end),
                num(r.increment),
            ]
        })
        .collect();
    out.write_csv(
        "increment.csv",
        "n,delta0,horizon,steps,e_start,e_end,increment",
        &rows,
    )?;
    let dt_sensitivity = if block.dt_check {
        let mut coarse = solver.clone();
        coarse.dt *= 2.0;
        let re =
            study::energy_increment_study(&u0, mult.s, &block.n_values, &coarse, mode, budget)?;
        let max_rel = report
            .records
            .iter()
            .zip(&re.records)
            .map(|(a, b)| {
                (a.increment - b.increment).abs() / a.increment.abs().max(1e-300)
            })
            .fold(0.0f64, f64::max);
        Some(max_rel)
    } else {
        None
    };
    out.write_json(
        "energy_increment_summary.json",
        &serde_json::json!({
            "s": report.s,
            "slope": report.slope,
            "fit_warning": report.fit_warning,
            "dt_doubled_max_rel_change": dt_sensitivity,
        }),
    )?;
    if cfg.output.plots {
        let pts: Vec<(f64, f64)> = report
            .records
            .iter()
            .map(|r| (r.n, r.increment.abs()))
            .collect();
        let fit = report.slope.map(|f| (f.slope, f.intercept));
        out.write_text(
            "increment.svg",
            &plot::svg_scatter_loglog(
                &pts,
                fit,
                "Modified-energy increment against N",
                "N",
                "|increment|",
            ),
        )?;
    }
    out.stamp(cfg, &input_snapshots(cfg))
}

pub fn symbol_sample(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let mult = require(&cfg.multiplier, "multiplier", "to define the symbol")?;
    let spec = mult.build()?;
    let block = cfg.symbol_sample.clone().unwrap_or_default();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (k, &regime) in block.regimes.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(k as u64);
        let report = study::symbol_sample(&spec, regime, block.samples, block.radius, seed)?;
        let tag = serde_json::to_value(regime)?;
        let tag = tag.as_str().unwrap_or("unknown").to_string();
        for r in &report.rows {
            rows.push(vec![
                tag.clone(),
                num(r.lhs),
                num(r.rhs),
                num(r.ratio),
                seed.to_string(),
            ]);
        }
        summaries.push(serde_json::json!({
            "regime": regime,
            "seed": seed,
            "requested": report.requested,
            "accepted": report.accepted,
            "rejected": report.rejected,
            "max_ratio": report.max_ratio,
        }));
    }
    out.write_csv("symbol_sample.csv", "regime,lhs,rhs,ratio,seed", &rows)?;
    out.write_json(
        "symbol_sample_summary.json",
        &serde_json::json!({ "regimes": summaries }),
    )?;
    out.stamp(cfg, &input_snapshots(cfg))
}

pub fn growth_study(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let sim = run_simulation(cfg, out)?;
    let s = cfg.multiplier.as_ref().map(|m| m.s).unwrap_or(1.0);
    let report = study::growth_report(&sim, s);
    let rows: Vec<Vec<String>> = report
        .points
        .iter()
        .map(|p| vec![num(p.t), num(p.hs), num(p.running_max)])
        .collect();
    out.write_csv("growth.csv", "t,hs,running_max", &rows)?;
    out.write_json(
        "growth_summary.json",
        &serde_json::json!({
            "s": report.s,
            "horizon": report.horizon,
            "exponent": report.exponent,
            "fit_warning": report.fit_warning,
            // trend extraction from one trajectory, not a bound check
            "observational": true,
        }),
    )?;
    if cfg.output.plots {
        let pts: Vec<(f64, f64)> = report
            .points
            .iter()
            .map(|p| (p.t, p.running_max))
            .collect();
        out.write_text(
            "growth.svg",
            &plot::svg_line(&pts, "Running max of the Sobolev norm", "t", "max H^s"),
        )?;
    }
    out.stamp(cfg, &input_snapshots(cfg))?;
    if let Some((t, message)) = sim.abort {
        return Err(Error::numerical(t, message));
    }
    Ok(())
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: &std::path::Path) -> Result<Csv> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok(Csv { header, rows })
}

impl Csv {
    fn series(&self, x: &str, y: &str) -> Vec<(f64, f64)> {
        let xi = self.header.iter().position(|h| h == x);
        let yi = self.header.iter().position(|h| h == y);
        let (Some(xi), Some(yi)) = (xi, yi) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| {
                let a = r.get(xi)?.parse().ok()?;
                let b = r.get(yi)?.parse().ok()?;
                Some((a, b))
            })
            .collect()
    }
}

/// Re-render plots and an index from the CSVs of a finished run.
pub fn report(_cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let mut rendered = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(out.root())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    entries.sort();
    for name in &entries {
        let path = out.path(name);
        let svg_name = format!("{}.svg", name.trim_end_matches(".csv"));
        let svg = if name == "diagnostics.csv" {
            let csv = read_csv(&path)?;
            Some(plot::svg_line(
                &csv.series("t", "hs_norm"),
                "Sobolev norm along the run",
                "t",
                "H^s norm",
            ))
        } else if name == "growth.csv" {
            let csv = read_csv(&path)?;
            Some(plot::svg_line(
                &csv.series("t", "running_max"),
                "Running max of the Sobolev norm",
                "t",
                "max H^s",
            ))
        } else if name == "increment.csv" {
            let csv = read_csv(&path)?;
            let pts: Vec<(f64, f64)> = csv
                .series("n", "increment")
                .into_iter()
                .map(|(n, inc)| (n, inc.abs()))
                .collect();
            Some(plot::svg_scatter_loglog(
                &pts,
                None,
                "Modified-energy increment against N",
                "N",
                "|increment|",
            ))
        } else if name.starts_with("bilinear_") && name.ends_with(".csv") {
            let csv = read_csv(&path)?;
            Some(plot::svg_scatter_loglog(
                &csv.series("axis_value", "norm"),
                None,
                "Bilinear norm against the sweep axis",
                "axis value",
                "norm",
            ))
        } else {
            None
        };
        if let Some(svg) = svg {
            out.write_text(&svg_name, &svg)?;
            rendered.push(svg_name);
        }
    }
    if rendered.is_empty() {
        return Err(Error::config(
            "output.directory",
            "no known CSV artifacts found to render",
        ));
    }
    out.write_json("report.json", &serde_json::json!({ "rendered": rendered }))
}
