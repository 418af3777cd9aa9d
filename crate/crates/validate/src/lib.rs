//! Runs `pwiscore` commands in-process against the bundled funds dataset.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use pwi_cli::app::execute;

/// A file of the funds dataset shipped with the CLI crate.
pub fn funds(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../cli/examples/funds")
        .join(name)
}

/// Parses and runs one command line with `--out-dir out`, timing the whole
/// invocation including the writes. Errors carry the exit code.
pub fn pwiscore(out: &Path, args: &[&str]) -> Result<(Vec<String>, Duration), String> {
    let mut argv = vec!["pwiscore".to_string(), "--out-dir".into(), out.display().to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    let start = Instant::now();
    match execute(argv) {
        Ok((_, summary)) => Ok((summary, start.elapsed())),
        Err(e) => Err(format!(
            "pwiscore {} failed with exit code {}: {e}",
            args.join(" "),
            e.exit_code()
        )),
    }
}
