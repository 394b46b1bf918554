//! `sample`: one seeded spectrum.

use isotwirl::ensembles::{sample_spectrum_seeded, EnsembleKind, EnsembleSpec};
use isotwirl::io::spectrum_table;

use crate::output::{parse, warn_dimension, write_table};
use crate::{CliError, CliResult, SampleArgs};

pub fn run(args: &SampleArgs) -> CliResult<()> {
    if args.output.plot {
        return Err(CliError::Usage("sample has no plot".into()));
    }
    let kind: EnsembleKind = parse(&args.ensemble)?;
    warn_dimension(args.d);
    let sp = sample_spectrum_seeded(EnsembleSpec::new(kind, args.d)?, args.seed, 0)?;
    let table = spectrum_table(&sp)?.meta("command", "sample");
    write_table(&args.output.out, args.output.format, &table, &sp)
}
