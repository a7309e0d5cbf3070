//! `netcl report`: gather the artifacts other commands left in a directory
//! into one consolidated summary.

use super::write_json;
use crate::CliResult;
use std::path::PathBuf;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory holding outputs from train/search/eval runs.
    #[arg(long)]
    dir: PathBuf,
}

pub fn run(args: Args) -> CliResult<()> {
    let mut sections = serde_json::Map::new();
    for name in ["train_summary.json", "search_summary.json", "summary.json"] {
        let path = args.dir.join(name);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
                sections.insert(name.trim_end_matches(".json").to_string(), value);
            }
        }
    }
    if let Ok(text) = std::fs::read_to_string(args.dir.join("curve.csv")) {
        let rows: Vec<&str> = text.lines().skip(1).collect();
        let last = rows.last().and_then(|r| {
            let mut it = r.split(',');
            let iter = it.next()?.parse::<u64>().ok()?;
            let mean = it.next()?.parse::<f64>().ok()?;
            Some(serde_json::json!({"iteration": iter, "mean_reward": mean}))
        });
        sections.insert(
            "learning_curve".into(),
            serde_json::json!({"rows": rows.len(), "last": last}),
        );
    }
    if sections.is_empty() {
        println!("nothing to report in {}", args.dir.display());
        return Ok(());
    }
    let report = serde_json::Value::Object(sections);
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    write_json(&args.dir.join("report.json"), &report)?;
    Ok(())
}
