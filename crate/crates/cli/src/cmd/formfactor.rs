//! `formfactor`: analytic rescaled form factors with optional sampling columns.

use isotwirl::ensembles::{EnsembleKind, EnsembleSpec};
use isotwirl::formfactors::{average_form_factors_grid, envelope, Quantity};
use isotwirl::io::{fmt_f64, Table};
use isotwirl::oracle::{mc_ensemble_c, McConfig};
use serde::Serialize;

use crate::output::{emit_plot, parse, time_grid, warn_dimension, write_table, Curve, Plot};
use crate::{CliError, CliResult, FormfactorArgs};

#[derive(Serialize)]
struct Row {
    t: f64,
    value: f64,
    envelope: Option<f64>,
    mc_mean: Option<f64>,
    se: Option<f64>,
}

#[derive(Serialize)]
struct Doc<'a> {
    ensemble: EnsembleKind,
    d: usize,
    quantity: Quantity,
    seed: u64,
    n_samples: Option<usize>,
    rows: &'a [Row],
}

/// Builds the table for `args` without writing it.
pub fn build(args: &FormfactorArgs) -> CliResult<Table> {
    Ok(compute(args)?.0)
}

fn compute(args: &FormfactorArgs) -> CliResult<(Table, Vec<Row>, EnsembleKind, Quantity)> {
    let kind: EnsembleKind = parse(&args.ensemble)?;
    let q: Quantity = parse(&args.quantity)?;
    let spec = EnsembleSpec::new(kind, args.d)?;
    warn_dimension(args.d);
    let grid = time_grid(args.d, &args.grid)?;
    let avg = average_form_factors_grid(kind, args.d, &grid)?;
    let scale = (args.d as f64).powi(q.order());

    let env: Option<Vec<Option<f64>>> = if args.envelope {
        Some(
            grid.iter()
                .map(|&t| if t > 0.0 { envelope(kind, q, args.d, t).map(Some) } else { Ok(None) })
                .collect::<Result<_, _>>()?,
        )
    } else {
        None
    };
    let mc = match args.mc {
        Some(n) => {
            if kind == EnsembleKind::Haar {
                return Err(CliError::Usage("--mc needs a spectral ensemble".into()));
            }
            let m = mc_ensemble_c(spec, &grid, &McConfig::new(args.d, n, args.seed))?;
            let est = match q {
                Quantity::C2 => m.c2,
                Quantity::C3 => m.c3,
                Quantity::C4 => m.c4,
            };
            Some(est)
        }
        None => None,
    };

    let mut header = vec!["t", "value", "ensemble", "d", "quantity"];
    if env.is_some() {
        header.push("envelope");
    }
    if mc.is_some() {
        header.extend(["mc_mean", "se", "n_samples"]);
    }
    let mut table = Table::new(&header)
        .meta("command", "formfactor")
        .meta("ensemble", kind)
        .meta("d", args.d)
        .meta("quantity", q)
        .meta("rescaled", format!("c/d^{}", q.order()))
        .meta("points", args.grid.points)
        .meta("tmin", fmt_f64(args.grid.tmin))
        .meta("tmax", fmt_f64(args.grid.tmax.unwrap_or(10.0 * args.d as f64)));
    if let Some(n) = args.mc {
        table = table.meta("seed", args.seed).meta("n_samples", n);
    }
    let mut rows = Vec::with_capacity(grid.len());
    for (i, (&t, ff)) in grid.iter().zip(&avg).enumerate() {
        let value = ff.rescaled(q);
        let mut cells = vec![fmt_f64(t), fmt_f64(value), kind.to_string(), args.d.to_string(), q.to_string()];
        let e = env.as_ref().and_then(|v| v[i]);
        if env.is_some() {
            cells.push(e.map(fmt_f64).unwrap_or_default());
        }
        let (mut mm, mut se) = (None, None);
        if let Some(est) = &mc {
            mm = Some(est[i].mean / scale);
            se = Some(est[i].se / scale);
            cells.extend([fmt_f64(est[i].mean / scale), fmt_f64(est[i].se / scale), args.mc.unwrap_or(0).to_string()]);
        }
        table.push_row(cells)?;
        rows.push(Row { t, value, envelope: e, mc_mean: mm, se });
    }
    Ok((table, rows, kind, q))
}

pub fn run(args: &FormfactorArgs) -> CliResult<()> {
    let (table, rows, kind, q) = compute(args)?;
    let doc = Doc { ensemble: kind, d: args.d, quantity: q, seed: args.seed, n_samples: args.mc, rows: &rows };
    write_table(&args.output.out, args.output.format, &table, &doc)?;
    if let Some(path) = &args.output.out {
        let mut curves = vec![Curve {
            file: path.clone(),
            using: "1:2".into(),
            style: "lines",
            title: format!("{kind} {q}"),
        }];
        if args.envelope {
            curves.push(Curve { file: path.clone(), using: "1:6".into(), style: "lines dt 2", title: "envelope".into() });
        }
        if args.mc.is_some() {
            let c = if args.envelope { 7 } else { 6 };
            curves.push(Curve {
                file: path.clone(),
                using: format!("1:{c}:{}", c + 1),
                style: "yerrorbars pt 7 ps 0.4",
                title: "sampled".into(),
            });
        }
        let plot = Plot {
            title: format!("{kind}, d = {}", args.d),
            xlabel: "t".into(),
            ylabel: format!("rescaled {q}"),
            logx: true,
            logy: q != Quantity::C3,
            curves,
        };
        emit_plot(&args.output, &plot)?;
    } else if args.output.plot {
        return Err(CliError::Usage("--plot needs --out".into()));
    }
    Ok(())
}
