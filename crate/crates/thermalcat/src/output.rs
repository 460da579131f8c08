//! Artifact files. Everything except `<stem>.meta.json` is a pure function
//! of the program and the build, so repeated runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use crate::exec::{RunOutput, WignerArtifact};

pub const DEFAULT_STEM: &str = "run";

/// Round-trip exact: 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` through a temporary sibling and a rename, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

fn provenance(out: &RunOutput) -> String {
    let resolved = serde_json::to_string(&out.summary.program).expect("programs serialize to JSON");
    let trunc = serde_json::to_string(&out.summary.truncation).expect("integers serialize");
    format!("# program {resolved}\n# truncation {trunc}\n# tolerance_profile {}\n", out.summary.tolerance_profile)
}

pub fn series_csv(out: &RunOutput) -> String {
    let mut s = provenance(out);
    s.push_str("time");
    for c in &out.columns {
        s.push(',');
        s.push_str(c);
    }
    s.push('\n');
    for (t, row) in &out.rows {
        s.push_str(&format_f64(*t));
        for v in row {
            s.push(',');
            s.push_str(&format_f64(*v));
        }
        s.push('\n');
    }
    s
}

pub fn wigner_csv(out: &RunOutput, w: &WignerArtifact) -> String {
    let mut s = provenance(out);
    let _ = writeln!(s, "# mode {}", w.mode);
    s.push_str("x,p,W\n");
    for (i, x) in w.xs.iter().enumerate() {
        for (j, p) in w.ps.iter().enumerate() {
            let v = w.values[i * w.ps.len() + j];
            let _ = writeln!(s, "{},{},{}", format_f64(*x), format_f64(*p), format_f64(v));
        }
    }
    s
}

pub fn wigner_json(out: &RunOutput, w: &WignerArtifact) -> String {
    let rows: Vec<&[f64]> = w.values.chunks(w.ps.len()).collect();
    let doc = json!({
        "program": out.summary.program,
        "truncation": out.summary.truncation,
        "mode": w.mode,
        "x": w.xs,
        "p": w.ps,
        "W": rows,
    });
    pretty(&doc)
}

pub fn summary_json(out: &RunOutput) -> String {
    pretty(&out.summary)
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("summaries serialize to JSON");
    s.push('\n');
    s
}

/// Writes every artifact of `out` into `dir` and returns the paths.
pub fn write_run(dir: &Path, stem: &str, out: &RunOutput, elapsed: Duration) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = vec![
        (format!("{stem}.csv"), series_csv(out)),
        (format!("{stem}.summary.json"), summary_json(out)),
        (format!("{stem}.resolved.toml"), out.summary.program.to_toml()),
    ];
    for w in &out.wigners {
        files.push((format!("{stem}.wigner{}.csv", w.index), wigner_csv(out, w)));
        files.push((format!("{stem}.wigner{}.json", w.index), wigner_json(out, w)));
    }
    let mut paths = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        write_atomic(&path, body.as_bytes())?;
        paths.push(path);
    }
    let meta = dir.join(format!("{stem}.meta.json"));
    write_atomic(&meta, meta_json(elapsed).as_bytes())?;
    paths.push(meta);
    Ok(paths)
}

/// The only non-deterministic artifact.
pub fn meta_json(elapsed: Duration) -> String {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
    pretty(&json!({
        "version": env!("CARGO_PKG_VERSION"),
        "finished_unix_seconds": now.as_secs(),
        "elapsed_seconds": elapsed.as_secs_f64(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubles_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, -0.0] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
    }
}
