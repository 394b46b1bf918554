//! Grids, file emission and gnuplot scripts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use isotwirl::formfactors::log_grid;
use isotwirl::io::Table;
use serde::Serialize;

use crate::{CliError, CliResult, Format, GridArgs, OutputArgs};

/// `t = 0` followed by the log grid over `[tmin, tmax]` (`tmax` defaults to `10·d`).
pub fn time_grid(d: usize, g: &GridArgs) -> CliResult<Vec<f64>> {
    let tmax = g.tmax.unwrap_or(10.0 * d as f64);
    if !(g.tmin > 0.0) {
        return Err(CliError::Usage(format!("--tmin must be positive, got {}", g.tmin)));
    }
    let mut grid = vec![0.0];
    grid.extend(log_grid(g.tmin, tmax, g.points)?);
    Ok(grid)
}

/// Prints a warning on stderr when `d` is not a power of two.
pub fn warn_dimension(d: usize) {
    if !d.is_power_of_two() {
        eprintln!("isotwirl: warning: d = {d} is not a power of two");
    }
}

/// Parses a comma-free list entry into a library value, as a usage error.
pub fn parse<T>(s: &str) -> CliResult<T>
where
    T: std::str::FromStr<Err = isotwirl::Error>,
{
    s.trim().parse::<T>().map_err(|e| CliError::Usage(e.to_string()))
}

/// `dir/stem_tag.ext` next to `path`.
pub fn tagged_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}_{tag}.{ext}"),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

fn open(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Writes a table as CSV, or `json` as pretty JSON, to `path` or stdout.
pub fn write_table<T: Serialize>(path: &Option<PathBuf>, format: Format, table: &Table, json: &T) -> CliResult<()> {
    let mut w = open(path)?;
    match format {
        Format::Csv => table.write_csv(&mut w)?,
        Format::Json => isotwirl::io::write_json(&mut w, json)?,
    }
    w.flush()?;
    Ok(())
}

/// Writes any serializable value as pretty JSON to `path` or stdout.
pub fn write_json<T: Serialize>(path: &Option<PathBuf>, json: &T) -> CliResult<()> {
    let mut w = open(path)?;
    isotwirl::io::write_json(&mut w, json)?;
    w.flush()?;
    Ok(())
}

/// One curve of a gnuplot script: a `using` clause and a title.
pub struct Curve {
    pub file: PathBuf,
    pub using: String,
    pub style: &'static str,
    pub title: String,
}

/// Axes and curves of a gnuplot script.
pub struct Plot {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub logx: bool,
    pub logy: bool,
    pub curves: Vec<Curve>,
}

impl Plot {
    /// Gnuplot source reading the CSV files written alongside.
    pub fn script(&self) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set datafile commentschars '#'\n");
        s.push_str("set key autotitle columnhead\n");
        s.push_str(&format!("set title '{}'\n", self.title));
        s.push_str(&format!("set xlabel '{}'\n", self.xlabel));
        s.push_str(&format!("set ylabel '{}'\n", self.ylabel));
        if self.logx {
            s.push_str("set logscale x\n");
        }
        if self.logy {
            s.push_str("set logscale y\n");
        }
        s.push_str("set format y '%g'\n");
        let parts: Vec<String> = self
            .curves
            .iter()
            .map(|c| {
                let name = c.file.file_name().and_then(|n| n.to_str()).unwrap_or("data.csv");
                format!("'{name}' using {} with {} title '{}'", c.using, c.style, c.title)
            })
            .collect();
        s.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
        s
    }
}

/// Writes the plot script next to `--out` as `<stem>.gp`.
pub fn emit_plot(out: &OutputArgs, plot: &Plot) -> CliResult<()> {
    if !out.plot {
        return Ok(());
    }
    let Some(path) = &out.out else {
        return Err(CliError::Usage("--plot needs --out".into()));
    };
    if out.format != Format::Csv {
        return Err(CliError::Usage("--plot needs --format csv".into()));
    }
    let gp = path.with_extension("gp");
    std::fs::write(&gp, plot.script()).map_err(|e| CliError::Io(format!("{}: {e}", gp.display())))?;
    Ok(())
}
