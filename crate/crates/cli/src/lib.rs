//! Workflows behind the `haptic-adj` command line, shared with the tests.

pub mod args;
pub mod common;
pub mod data;
pub mod dump;
pub mod evaluate;
pub mod extract;
pub mod fuse;
pub mod train;

use haptic_core::io::RunKind;
use haptic_core::Result;

use args::{Cli, Command};

/// Runs one parsed command, printing its summary to stdout.
pub fn run(cli: &Cli) -> Result<()> {
    let root = cli.root.as_path();
    match &cli.command {
        Command::Synth(a) => {
            let (m, path) = data::synth(root, a)?;
            println!("synth objects={} trials={} manifest={}", m.objects.len(), m.trials_per_object, path.display());
        }
        Command::Preprocess(a) => {
            let p = data::preprocess(root, a)?;
            println!("preprocess objects={} trials={} out={}", p.labels.len(), p.trials.len(), a.out.display());
        }
        Command::TrainHaptic(a) => report_run(&train::train_command(root, RunKind::HapticCnn, a)?, &a.out),
        Command::TrainLstm(a) => report_run(&train::train_command(root, RunKind::HapticLstm, a)?, &a.out),
        Command::Extract(a) => report_run(&extract::extract_command(root, a)?, &a.out),
        Command::Fuse(a) => report_run(&fuse::fuse_command(root, a)?, &a.out),
        Command::Eval(a) => {
            for r in evaluate::eval_command(root, a)? {
                println!("seed={}", r.seed);
                print!("{}", r.to_table());
            }
        }
        Command::Report(a) => print!("{}", evaluate::report_command(root, a)?.to_table()),
        Command::DumpActivations(a) => {
            let t = dump::dump_command(root, a)?;
            println!("dump shape={:?} out={}", t.shape(), a.out.display());
        }
    }
    Ok(())
}

fn report_run(index: &haptic_core::io::RunIndex, out: &std::path::Path) {
    println!(
        "models={} skipped={} out={}",
        index.entries.len(),
        index.skipped.len(),
        out.display()
    );
}
