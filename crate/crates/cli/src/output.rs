//! CSV assembly and companion artifacts.
//!
//! Tables are built in memory and written in one shot, so a run either
//! produces a complete file or nothing. Metadata rides along as `#` comment
//! lines ahead of the header: enough to reproduce the run exactly, and
//! nothing volatile (no timestamps, no hostnames) — two runs with the same
//! arguments must produce byte-identical output.

use std::fmt::Display;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

/// A numeric table with `# key = value` metadata comments.
pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Table {
            meta: Vec::new(),
            header: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    /// Render the table as CSV text. Cells use `{:.17e}` so every f64
    /// round-trips exactly through the file.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.meta {
            let _ = writeln!(out, "# {key} = {value}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{cell:.17e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn column_names(&self) -> &[String] {
        &self.header
    }
}

/// Write `content` to `path`, or to stdout when no path was given.
pub fn write_out(path: Option<&Path>, content: &str) -> Result<(), String> {
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| format!("cannot write to stdout: {e}"))
        }
        Some(path) => fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
    }
}

/// 64-bit FNV-1a over raw bytes, as fixed-width hex. Used to stamp output
/// files with a fingerprint of the config they were produced from.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// A gnuplot script that renders the CSV at `csv_path`, one curve per data
/// column (column 1 is the x axis).
pub fn gnuplot_script(
    csv_path: &Path,
    columns: &[String],
    xlabel: &str,
    ylabel: &str,
    logx: bool,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# generated by bosonic-capacity {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "set datafile separator comma");
    let _ = writeln!(out, "set key left top");
    let _ = writeln!(out, "set xlabel '{xlabel}'");
    let _ = writeln!(out, "set ylabel '{ylabel}'");
    if logx {
        let _ = writeln!(out, "set logscale x");
    }
    let _ = writeln!(out, "set grid");
    out.push_str("plot ");
    for (i, name) in columns.iter().enumerate().skip(1) {
        if i > 1 {
            out.push_str(", ");
        }
        let source = if i == 1 {
            format!("'{}'", csv_path.display())
        } else {
            "''".to_string()
        };
        let _ = write!(out, "{source} using 1:{} with lines title '{name}'", i + 1);
    }
    out.push('\n');
    out
}
