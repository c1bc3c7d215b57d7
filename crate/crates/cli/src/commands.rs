use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qeq_core::design::{
    assemble_cavity_equalizer_on, design_beam_splitter_equalizer, BeamSplitterChannel,
    CavityChannel, ChannelParams, DesignReport, Residuals,
};
use qeq_core::io::{csv_float, to_json_string, REPORT_SCHEMA};
use qeq_core::oracle::{threshold_sweep, ReportEnvelope};
use qeq_core::realizability::{check_block_constraints, check_paraunitary};
use qeq_core::{FrequencyGrid, QeqError};

use crate::args::{BeamSplitterArgs, CavityArgs, Command, Common, PsdArgs, SweepArgs, VerifyArgs};
use crate::config::Settings;

/// Linear grid points when neither flag, config nor environment sets them.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Environment override for the grid size.
pub const GRID_POINTS_ENV: &str = "QEQ_GRID_POINTS";
/// Random frequency probes added to the verification grid.
const PROBES: usize = 64;
/// Slack on `|H11|` in emitted spectra.
const CONTRACTION_SLACK: f64 = 1e-9;

/// A saved report did not pass re-verification.
#[derive(Debug)]
pub struct VerificationFailed(pub Vec<String>);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0.join("; "))
    }
}

impl std::error::Error for VerificationFailed {}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::DesignBeamsplitter(a) => design_beamsplitter(&a),
        Command::DesignCavity(a) => design_cavity(&a),
        Command::Verify(a) => verify(&a),
        Command::Psd(a) => psd(&a),
        Command::Sweep(a) => sweep(&a),
    }
}

fn settings(common: &Common) -> Result<Settings> {
    let mut s = Settings::load(common.config.as_deref())?;
    s.set("grid_points", common.grid_points);
    s.set("tolerance", common.tolerance);
    s.set("seed", common.seed);
    Ok(s)
}

fn grid_points(s: &Settings) -> Result<usize> {
    const DOMAIN: &str = "integer >= 2";
    let n = match s.get::<usize>("grid_points", DOMAIN)? {
        Some(n) => n,
        None => match std::env::var(GRID_POINTS_ENV) {
            Ok(raw) => raw.trim().parse().map_err(|_| {
                anyhow!("{GRID_POINTS_ENV} = `{raw}` is not valid; accepted domain {DOMAIN}")
            })?,
            Err(_) => DEFAULT_GRID_POINTS,
        },
    };
    if n < 2 {
        bail!("key `grid_points` = {n} outside its domain {DOMAIN}");
    }
    Ok(n)
}

fn tolerance(s: &Settings, fallback: f64) -> Result<f64> {
    let tol = s.get::<f64>("tolerance", "(0, inf)")?.unwrap_or(fallback);
    if !(tol > 0.0 && tol.is_finite()) {
        bail!("key `tolerance` = {tol} outside its domain (0, inf)");
    }
    Ok(tol)
}

fn beam_splitter_params(s: &Settings) -> Result<BeamSplitterChannel> {
    Ok(BeamSplitterChannel::new(
        s.require("eta", "(0, 1)")?,
        s.require("sigma_w2", "[0, inf)")?,
        s.get("sigma_b2", "[0, inf)")?.unwrap_or(0.0),
    )?)
}

fn cavity_params(s: &Settings) -> Result<CavityChannel> {
    Ok(CavityChannel::new(
        s.require("eta", "(0, 1)")?,
        s.require("alpha", "(0, 1]")?,
        s.require("beta", "(0, 1]")?,
        s.require("gamma", "(0, inf)")?,
        s.require("omega", "real")?,
        s.require("sigma_v2", "[0, inf)")?,
        s.require("sigma_w2", "[0, inf)")?,
    )?)
}

fn cavity_settings(a: &CavityArgs) -> Result<Settings> {
    let mut s = settings(&a.common)?;
    s.set("eta", a.eta);
    s.set("alpha", a.alpha);
    s.set("beta", a.beta);
    s.set("gamma", a.gamma);
    s.set("omega", a.omega);
    s.set("sigma_v2", a.sigma_v2);
    s.set("sigma_w2", a.sigma_w2);
    s.set_path("out", a.out.as_ref());
    s.set_path("psd_csv", a.psd_csv.as_ref());
    Ok(s)
}

fn write_output(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit_report(report: &DesignReport, s: &Settings, n: usize) -> Result<()> {
    let json = to_json_string(report)?;
    if let Some(p) = s.path("psd_csv") {
        let grid = report.channel.verification_grid(n)?;
        emit_psd_csv(report, &grid, &p)?;
    }
    write_output(s.path("out").as_deref(), &(json + "\n"))
}

fn design_beamsplitter(a: &BeamSplitterArgs) -> Result<()> {
    let mut s = settings(&a.common)?;
    s.set("eta", a.eta);
    s.set("sigma_w2", a.sigma_w2);
    s.set("sigma_b2", a.sigma_b2);
    s.set_path("out", a.out.as_ref());
    s.set_path("psd_csv", a.psd_csv.as_ref());
    let n = grid_points(&s)?;
    let report = design_beam_splitter_equalizer(&beam_splitter_params(&s)?)?;
    emit_report(&report, &s, n)
}

fn design_cavity(a: &CavityArgs) -> Result<()> {
    let s = cavity_settings(a)?;
    let n = grid_points(&s)?;
    let ch = cavity_params(&s)?;
    let report = assemble_cavity_equalizer_on(&ch, &ch.grid(n)?)?;
    emit_report(&report, &s, n)
}

fn load_report(path: &Path) -> Result<DesignReport> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let report: DesignReport =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if report.schema != REPORT_SCHEMA {
        bail!(
            "{} has schema `{}`; expected `{REPORT_SCHEMA}`",
            path.display(),
            report.schema
        );
    }
    Ok(report)
}

/// Frequencies drawn uniformly from the span of `grid`, reproducible from `seed`.
fn probe_grid(grid: &FrequencyGrid, seed: u64) -> Result<FrequencyGrid> {
    let pts = grid.points();
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 10.0, lo + 10.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<f64> = (0..PROBES).map(|_| rng.random_range(lo..hi)).collect();
    probes.sort_by(f64::total_cmp);
    Ok(FrequencyGrid::new(
        probes,
        grid.center(),
        format!("{PROBES} random probes, seed {seed}"),
    )?)
}

fn verify(a: &VerifyArgs) -> Result<()> {
    let mut s = settings(&a.common)?;
    s.set_path("input", a.input.as_ref());
    let input = s
        .path("input")
        .ok_or_else(|| anyhow!("missing required key `input`; accepted domain path to a report"))?;
    let report = load_report(&input)?;
    report.channel.validate()?;
    let tol = tolerance(&s, report.tolerance)?;
    let seed = s.get::<u64>("seed", "unsigned integer")?.unwrap_or(0);
    let grid = report.channel.verification_grid(grid_points(&s)?)?;

    let mut failures = Vec::new();
    let line = |name: &str, value: f64, ok: bool, failures: &mut Vec<String>| {
        println!("[{}] {name}: {value:.3e}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures.push(format!("{name} ({value:e})"));
        }
    };

    let blocks = &report.blocks;
    let residuals = Residuals::compute(blocks, &grid, tol)?;
    let b = &residuals.block_constraints;
    line(
        "first-row identity H11·H11~ + H12·H12~ = 1",
        b.first_row,
        b.first_row <= tol,
        &mut failures,
    );
    line(
        "cross-row identity H11·H21~ + H12·H22~ = 0",
        b.cross_rows,
        b.cross_rows <= tol,
        &mut failures,
    );
    line(
        "second-row identity H21·H21~ + H22·H22~ = 1",
        b.second_row,
        b.second_row <= tol,
        &mut failures,
    );
    let p = residuals.paraunitarity.max_residual;
    line("paraunitarity H·H~ = I", p, p <= tol, &mut failures);
    let m = residuals.contraction_margin;
    line("contraction 1 - |H11|^2 >= 0", m, m >= -tol, &mut failures);

    let probes = probe_grid(&grid, seed)?;
    let pb = check_block_constraints(
        &blocks.h11,
        &blocks.h12,
        &blocks.h21,
        &blocks.h22,
        &probes,
        tol,
    )?;
    let pu = check_paraunitary(&blocks.to_matrix(), &probes, tol)?;
    let probe_worst = pb.max().max(pu.max_residual);
    line(
        "random-frequency probes",
        probe_worst,
        probe_worst <= tol,
        &mut failures,
    );

    let expected = report.channel.relaxed_channel()?.error_psd(&blocks.h11)?;
    let mut psd_gap: f64 = 0.0;
    for &w in grid.points() {
        let stored = report.optimal_error_psd.eval_iw(w)?;
        let fresh = expected.eval_iw(w)?;
        psd_gap = psd_gap.max((stored - fresh).norm() / fresh.norm().max(1.0));
    }
    line(
        "stored error spectrum matches H11",
        psd_gap,
        psd_gap <= tol,
        &mut failures,
    );

    if failures.is_empty() {
        println!("verified {} on {} points", input.display(), grid.len());
        Ok(())
    } else {
        Err(VerificationFailed(failures).into())
    }
}

/// Writes `omega,p_ee,p_unequalized,h11_abs` for `design` sampled on `grid`.
pub fn emit_psd_csv(design: &DesignReport, grid: &FrequencyGrid, path: &Path) -> Result<()> {
    let mut body = String::from("omega,p_ee,p_unequalized,h11_abs\n");
    for &w in grid.points() {
        let at = |e: QeqError| {
            anyhow::Error::new(e).context(format!("evaluating spectra at omega = {w}"))
        };
        let p_ee = design.optimal_error_psd.eval_iw(w).map_err(at)?.re;
        let p_un = design.unequalized_error_psd.eval_iw(w).map_err(at)?.re;
        let h = design.blocks.h11.eval_iw(w).map_err(at)?.norm();
        if !(p_ee.is_finite() && p_un.is_finite() && h.is_finite()) {
            bail!("non-finite spectrum value at omega = {w}");
        }
        if h > 1.0 + CONTRACTION_SLACK {
            bail!("|H11| = {h} exceeds 1 at omega = {w}; design is not passive");
        }
        body.push_str(&format!(
            "{},{},{},{}\n",
            csv_float(w),
            csv_float(p_ee),
            csv_float(p_un),
            csv_float(h)
        ));
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn psd(a: &PsdArgs) -> Result<()> {
    let mut s = settings(&a.common)?;
    s.set_path("input", a.input.as_ref());
    s.set_path("out", a.out.as_ref());
    s.set("omega_min", a.omega_min);
    s.set("omega_max", a.omega_max);
    let input = s
        .path("input")
        .ok_or_else(|| anyhow!("missing required key `input`; accepted domain path to a report"))?;
    let out = s
        .path("out")
        .ok_or_else(|| anyhow!("missing required key `out`; accepted domain output CSV path"))?;
    let report = load_report(&input)?;
    let n = grid_points(&s)?;
    let lo = s.get::<f64>("omega_min", "real")?;
    let hi = s.get::<f64>("omega_max", "real")?;
    let grid = match (lo, hi) {
        (None, None) => report.channel.verification_grid(n)?,
        (Some(lo), Some(hi)) => FrequencyGrid::linear(lo, hi, n)?,
        _ => bail!("keys `omega_min` and `omega_max` must be given together"),
    };
    emit_psd_csv(&report, &grid, &out)
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let mut s = cavity_settings(&a.channel)?;
    s.set("family", a.family.as_ref());
    s.set("param", a.param.as_ref());
    s.set("from", a.from);
    s.set("to", a.to);
    s.set("steps", a.steps);
    s.set("sigma_b2", a.sigma_b2);
    s.set_path("json", a.json.as_ref());

    let family = s
        .text("family")
        .ok_or_else(|| {
            anyhow!("missing required key `family`; accepted domain beamsplitter | cavity")
        })?
        .to_string();
    let param = s
        .text("param")
        .ok_or_else(|| {
            anyhow!("missing required key `param`; accepted domain a channel parameter name")
        })?
        .replace('-', "_");
    let from: f64 = s.require("from", "real")?;
    let to: f64 = s.require("to", "real, greater than `from`")?;
    let steps: usize = s.require("steps", "integer >= 2")?;
    if !(from < to) {
        bail!("key `to` = {to} outside its domain (from, inf) with from = {from}");
    }
    if steps < 2 {
        bail!("key `steps` = {steps} outside its domain integer >= 2");
    }
    let param = if param == "omega_c" {
        "omega".to_string()
    } else {
        param
    };
    if s.text(&param).is_none() {
        s.set(&param, Some(from));
    }
    let base = match family.as_str() {
        "beamsplitter" | "beam-splitter" | "beam_splitter" => {
            ChannelParams::BeamSplitter(beam_splitter_params(&s)?)
        }
        "cavity" => ChannelParams::Cavity(cavity_params(&s)?),
        other => bail!("key `family` = `{other}` outside its domain beamsplitter | cavity"),
    };
    let result = threshold_sweep(&base, &param, [from, to], steps)?;

    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    if let Some(p) = s.path("json") {
        let envelope = ReportEnvelope::new("sweep", &result);
        fs::write(&p, to_json_string(&envelope)? + "\n")
            .with_context(|| format!("writing {}", p.display()))?;
    }
    write_output(s.path("out").as_deref(), std::str::from_utf8(&csv)?)?;
    match result.onset {
        Some(o) => eprintln!(
            "onset of improvement in ({}, {}]",
            o.last_non_improving, o.first_improving
        ),
        None => eprintln!("no onset of improvement within the sweep"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_precedence() {
        let mut s = Settings::parse("grid_points = 11").unwrap();
        assert_eq!(grid_points(&s).unwrap(), 11);
        s.set("grid_points", Some(21));
        assert_eq!(grid_points(&s).unwrap(), 21);
        s.set("grid_points", Some(1));
        assert!(grid_points(&s).is_err());
    }

    #[test]
    fn probes_are_seeded() {
        let g = FrequencyGrid::linear(-3.0, 3.0, 11).unwrap();
        let a = probe_grid(&g, 7).unwrap();
        let b = probe_grid(&g, 7).unwrap();
        assert_eq!(a.points(), b.points());
        assert!(a.points().iter().all(|w| (-3.0..3.0).contains(w)));
    }

    #[test]
    fn usage_errors_name_key_and_domain() {
        let s = Settings::parse("eta = 0.5").unwrap();
        let msg = beam_splitter_params(&s).unwrap_err().to_string();
        assert!(msg.contains("sigma_w2") && msg.contains("[0, inf)"));
    }
}
