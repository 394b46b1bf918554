//! `fit-decay`: least-squares fit `t_fluct = a + b ln d` of TMI fluctuation-decay times.
//!
//! The decay time at one `d` is the first grid time after which the averaged
//! TMI bound (with `dC = dD = √d`) stays within `band` bits of its `t → ∞`
//! value.

use std::collections::BTreeSet;
use std::fs::File;

use isotwirl::ensembles::EnsembleKind;
use isotwirl::formfactors::{average_form_factors_grid, equilibration_time, log_grid, FormFactors};
use isotwirl::io::{fmt_f64, Table};
use isotwirl::probes::{tmi_bound, ProbeSeries, SceneParams};
use isotwirl::Error;
use serde::Serialize;

use crate::output::{emit_plot, parse, write_table, Curve, Plot};
use crate::{CliError, CliResult, FitDecayArgs};

/// Fitted line with its coefficient of determination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub r2: f64,
}

/// Least squares of `t` against `ln d`; needs four distinct `d`.
pub fn fit_log_linear(points: &[(usize, f64)]) -> CliResult<DecayFit> {
    let distinct: BTreeSet<usize> = points.iter().map(|p| p.0).collect();
    if distinct.len() < 4 {
        return Err(CliError::Usage(format!("fit needs at least 4 distinct d, got {}", distinct.len())));
    }
    if points.iter().any(|p| p.0 < 2 || !p.1.is_finite()) {
        return Err(CliError::Usage("fit points need d >= 2 and finite times".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(DecayFit { a, b, r2 })
}

fn isqrt(d: usize) -> Option<usize> {
    let r = (d as f64).sqrt().round() as usize;
    (r * r == d).then_some(r)
}

/// Decay time of the averaged TMI bound at dimension `d`.
pub fn decay_time(kind: EnsembleKind, d: usize, band: f64, tmin: f64, points: usize) -> CliResult<f64> {
    let s = isqrt(d).ok_or_else(|| CliError::Usage(format!("d = {d} is not a perfect square")))?;
    let p = SceneParams::new(d).with_output_cut(s);
    let grid = log_grid(tmin, 10.0 * d as f64, points)?;
    let ffs = average_form_factors_grid(kind, d, &grid)?;
    let vals = ffs.iter().map(|ff| tmi_bound(ff, &p).map(|b| b.value)).collect::<Result<Vec<_>, _>>()?;
    let plateau = tmi_bound(&FormFactors::asymptotic(d), &p)?.value;
    let series = ProbeSeries::new("tmi", d, grid, vals)?;
    match equilibration_time(&series, plateau, band) {
        Ok(t) => Ok(t),
        Err(Error::NeverConverged) => {
            Err(CliError::Usage(format!("tmi at d = {d} does not settle within {band} bits by t = 10d")))
        }
        Err(e) => Err(e.into()),
    }
}

fn read_points(path: &std::path::Path) -> CliResult<Vec<(usize, f64)>> {
    let f = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let t = Table::read_csv(f)?;
    let ds = t.column_f64("d")?;
    let ts = t.column_f64("t_fluct")?;
    Ok(ds.into_iter().map(|d| d as usize).zip(ts).collect())
}

#[derive(Serialize)]
struct Doc {
    ensemble: Option<EnsembleKind>,
    band: f64,
    points: Vec<(usize, f64)>,
    fit: DecayFit,
}

pub fn run(args: &FitDecayArgs) -> CliResult<()> {
    let (kind, points) = match &args.input {
        Some(path) => (None, read_points(path)?),
        None => {
            let kind: EnsembleKind = parse(&args.ensemble)?;
            if !(args.band > 0.0) {
                return Err(CliError::Usage("--band must be positive".into()));
            }
            let pts = args
                .ds
                .iter()
                .map(|&d| decay_time(kind, d, args.band, args.tmin, args.points).map(|t| (d, t)))
                .collect::<CliResult<Vec<_>>>()?;
            (Some(kind), pts)
        }
    };
    let fit = fit_log_linear(&points)?;
    let mut table = Table::new(&["d", "ln_d", "t_fluct", "t_fit"])
        .meta("command", "fit-decay")
        .meta("a", fmt_f64(fit.a))
        .meta("b", fmt_f64(fit.b))
        .meta("r2", fmt_f64(fit.r2));
    if let Some(k) = kind {
        table = table.meta("ensemble", k).meta("band", fmt_f64(args.band)).meta("points", args.points);
    }
    for &(d, t) in &points {
        let x = (d as f64).ln();
        table.push_row(vec![d.to_string(), fmt_f64(x), fmt_f64(t), fmt_f64(fit.a + fit.b * x)])?;
    }
    let doc = Doc { ensemble: kind, band: args.band, points: points.clone(), fit };
    write_table(&args.output.out, args.output.format, &table, &doc)?;
    if let Some(path) = &args.output.out {
        let plot = Plot {
            title: format!("t_fluct = {:.2} + {:.2} ln d", fit.a, fit.b),
            xlabel: "ln d".into(),
            ylabel: "t_fluct".into(),
            logx: false,
            logy: false,
            curves: vec![
                Curve { file: path.clone(), using: "2:3".into(), style: "points pt 7", title: "measured".into() },
                Curve { file: path.clone(), using: "2:4".into(), style: "lines", title: "fit".into() },
            ],
        };
        emit_plot(&args.output, &plot)?;
    } else if args.output.plot {
        return Err(CliError::Usage("--plot needs --out".into()));
    }
    Ok(())
}
