//! `probe`: closed-form probes on ensemble-averaged form factors.

use isotwirl::ensembles::{EnsembleKind, EnsembleSpec};
use isotwirl::formfactors::average_form_factors_grid;
use isotwirl::io::{fmt_f64, series_table, Table};
use isotwirl::probes::{ProbeKind, ProbeSeries, SceneParams};

use crate::output::{emit_plot, parse, tagged_path, time_grid, warn_dimension, write_table, Curve, Plot};
use crate::{CliError, CliResult, ProbeArgs, SceneArgs};

/// Scene parameters from the flags, validated.
pub fn scene(d: usize, a: &SceneArgs) -> CliResult<SceneParams> {
    let mut p = SceneParams::new(d);
    if let Some(da) = a.da {
        if da == 0 || d % da != 0 {
            return Err(CliError::Usage(format!("--da {da} does not divide d = {d}")));
        }
        p = p.with_bipartition(da);
    }
    let dc = match (a.dc, a.dd) {
        (Some(c), Some(dd)) if c * dd != d => {
            return Err(CliError::Usage(format!("--dc {c} times --dd {dd} must equal d = {d}")));
        }
        (Some(c), _) => Some(c),
        (None, Some(dd)) if dd > 0 && d % dd == 0 => Some(d / dd),
        (None, Some(dd)) => return Err(CliError::Usage(format!("--dd {dd} does not divide d = {d}"))),
        (None, None) => None,
    };
    if let Some(c) = dc {
        if c == 0 || d % c != 0 {
            return Err(CliError::Usage(format!("--dc {c} does not divide d = {d}")));
        }
        p = p.with_output_cut(c);
    }
    if let Some(x) = a.purity_a {
        p.purity_a = x;
    }
    if let Some(x) = a.deph_purity {
        p.deph_purity = x;
    }
    if let Some(h) = a.h {
        // Unit spread tr H₀²/d − E_HT² = 1 with E₀ = E_HT = ±√|h|/2.
        let e = 0.5 * h.abs().sqrt();
        p.e_ht = e;
        p.e0 = if h < 0.0 { -e } else { e };
        p.tr_h0_sq = d as f64 * (1.0 + e * e);
    }
    if let Some(x) = a.beta_eps {
        p.beta_eps = x;
    }
    p.validate()?;
    Ok(p)
}

/// One series per requested ensemble.
pub fn build(args: &ProbeArgs) -> CliResult<Vec<ProbeSeries>> {
    let probe: ProbeKind = parse(&args.probe)?;
    let params = scene(args.d, &args.scene)?;
    warn_dimension(args.d);
    let grid = time_grid(args.d, &args.grid)?;
    let mut out = Vec::new();
    for name in &args.ensembles {
        let kind: EnsembleKind = parse(name)?;
        EnsembleSpec::new(kind, args.d)?;
        let ffs = average_form_factors_grid(kind, args.d, &grid)?;
        let values = ffs.iter().map(|ff| probe.evaluate(ff, &params)).collect::<Result<Vec<_>, _>>()?;
        out.push(ProbeSeries::new(probe.name(), args.d, grid.clone(), values)?.with_ensemble(kind).with_params(params));
    }
    Ok(out)
}

fn table_for(series: &[ProbeSeries], args: &ProbeArgs) -> CliResult<Table> {
    let p = series[0].params.expect("build sets params");
    Ok(series_table(series)?
        .meta("command", "probe")
        .meta("probe", &series[0].quantity)
        .meta("d", args.d)
        .meta("da", p.da)
        .meta("dc", p.dc)
        .meta("dd", p.dd)
        .meta("purity_a", fmt_f64(p.purity_a))
        .meta("deph_purity", fmt_f64(p.deph_purity))
        .meta("e0", fmt_f64(p.e0))
        .meta("e_ht", fmt_f64(p.e_ht))
        .meta("tr_h0_sq", fmt_f64(p.tr_h0_sq))
        .meta("beta_eps", fmt_f64(p.beta_eps))
        .meta("points", args.grid.points)
        .meta("tmin", fmt_f64(args.grid.tmin))
        .meta("tmax", fmt_f64(args.grid.tmax.unwrap_or(10.0 * args.d as f64))))
}

pub fn run(args: &ProbeArgs) -> CliResult<()> {
    if args.ensembles.is_empty() {
        return Err(CliError::Usage("no ensembles given".into()));
    }
    let series = build(args)?;
    let format = args.output.format;
    match &args.output.out {
        None => write_table(&None, format, &table_for(&series, args)?, &series)?,
        Some(path) if series.len() == 1 => {
            write_table(&Some(path.clone()), format, &table_for(&series, args)?, &series[0])?;
        }
        Some(path) => {
            for s in &series {
                let tag = s.ensemble.map(|e| e.name()).unwrap_or("series");
                let one = std::slice::from_ref(s);
                write_table(&Some(tagged_path(path, tag)), format, &table_for(one, args)?, s)?;
            }
        }
    }
    if let Some(path) = &args.output.out {
        let curves = series
            .iter()
            .map(|s| {
                let tag = s.ensemble.map(|e| e.name()).unwrap_or("series");
                let file = if series.len() == 1 { path.clone() } else { tagged_path(path, tag) };
                Curve { file, using: "1:2".into(), style: "lines", title: tag.to_string() }
            })
            .collect();
        let plot = Plot {
            title: format!("{}, d = {}", series[0].quantity, args.d),
            xlabel: "t".into(),
            ylabel: series[0].quantity.clone(),
            logx: true,
            logy: false,
            curves,
        };
        emit_plot(&args.output, &plot)?;
    } else if args.output.plot {
        return Err(CliError::Usage("--plot needs --out".into()));
    }
    Ok(())
}
