//! Result emission: plain JSON on stdout, or the same object plus a run
//! manifest when writing to a file. Stdout bytes depend only on the
//! command, flags, and seeds, never on wall-clock time.

use std::io::{self, Write};
use std::path::Path;

use bunchkit::{Error, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Prints one line to stdout. A vanished reader (broken pipe) is a normal
/// way for a consumer to stop early, not a fault.
fn print_stdout(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => std::process::exit(0),
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: cannot write to stdout: {e}");
            std::process::exit(1);
        }
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: String,
    tool_version: &'static str,
    seed: Option<u64>,
    timestamp_unix: u64,
    config: &'a Value,
}

fn merge(target: &mut Map<String, Value>, extra: Value) -> Result<()> {
    match extra {
        Value::Object(map) => {
            for (k, v) in map {
                target.insert(k, v);
            }
            Ok(())
        }
        other => Err(Error::InternalFault(format!(
            "result fragment is not an object: {other}"
        ))),
    }
}

/// Assembles `{"schema", ...inputs, ...body}` and prints it, or writes it
/// with an embedded manifest when `out` is set.
pub fn emit(
    schema: &str,
    inputs: Value,
    body: Value,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<()> {
    let mut obj = Map::new();
    obj.insert("schema".into(), Value::String(schema.into()));
    merge(&mut obj, inputs.clone())?;
    merge(&mut obj, body)?;
    match out {
        None => {
            let text = serde_json::to_string_pretty(&Value::Object(obj))
                .map_err(|e| Error::InternalFault(format!("serialize: {e}")))?;
            print_stdout(&text)?;
        }
        Some(path) => {
            let manifest = RunManifest {
                command: std::env::args().collect::<Vec<_>>().join(" "),
                tool_version: env!("CARGO_PKG_VERSION"),
                seed,
                timestamp_unix: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                config: &inputs,
            };
            let value = serde_json::to_value(&manifest)
                .map_err(|e| Error::InternalFault(format!("serialize manifest: {e}")))?;
            obj.insert("manifest".into(), value);
            let text = serde_json::to_string_pretty(&Value::Object(obj))
                .map_err(|e| Error::InternalFault(format!("serialize: {e}")))?;
            std::fs::write(path, text + "\n")
                .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}
