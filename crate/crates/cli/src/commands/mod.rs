pub mod eval;
pub mod gen_traces;
pub mod report;
pub mod search;
pub mod train;

use crate::CliResult;
use std::path::Path;

pub(crate) fn ensure_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes)?;
    Ok(())
}

pub(crate) fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    write_file(path, text.as_bytes())
}
