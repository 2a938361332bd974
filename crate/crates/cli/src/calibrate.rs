use std::path::PathBuf;

use assurekit::assure::calibrate;
use assurekit::scenario::load_calibration;
use clap::Args;

use crate::error::{CliError, Exit};
use crate::io;

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Experiment dataset (JSON).
    #[arg(long)]
    pub experiments: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: CalibrateArgs) -> Result<Exit, CliError> {
    let data = load_calibration(&args.experiments)?;
    let calibration = calibrate(&data);
    io::emit(args.out.as_deref(), &io::to_json(&calibration))?;
    if args.out.is_some() {
        for (name, v) in calibration.constants.iter() {
            println!("{name} = {v}");
        }
        for flag in &calibration.not_observable {
            println!("{}: {}", flag.constant, flag.note);
        }
    }
    Ok(Exit::Ok)
}
