//! Black-box model evaluation at quadrature nodes.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};

use super::Benchmark;
use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_rows, points_csv, read_text, write_text};

/// How model values at the nodes are obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelAdapter {
    /// One of the analytic benchmarks.
    Builtin(Benchmark),
    /// Nodes are written to `nodes_out` (when set) for an external run;
    /// values are read back from `values`, row `k` for node `k`.
    BatchFile {
        nodes_out: Option<PathBuf>,
        values: PathBuf,
    },
    /// `sh -c command` reads one node per line on stdin and prints one value per line.
    Subprocess { command: String },
}

impl ModelAdapter {
    pub fn name(&self) -> String {
        match self {
            ModelAdapter::Builtin(b) => format!("builtin:{}", b.name()),
            ModelAdapter::BatchFile { values, .. } => format!("values:{}", values.display()),
            ModelAdapter::Subprocess { command } => format!("command:{command}"),
        }
    }
}

/// Model outputs, one row per node and one column per output.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ValueTable {
    fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let width = rows.first().map_or(1, Vec::len);
        let labels = if width == 1 {
            vec!["y".to_string()]
        } else {
            (0..width).map(|j| format!("y{j}")).collect()
        };
        ValueTable { labels, rows }
    }

    pub fn n_outputs(&self) -> usize {
        self.labels.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

fn check_count(rows: &[Vec<f64>], nodes: usize, source: &str) -> Result<()> {
    if rows.len() != nodes {
        return Err(Error::Model(format!(
            "{source}: {} values for {nodes} nodes",
            rows.len()
        )));
    }
    Ok(())
}

/// Evaluates the model at every node, in node order.
pub fn evaluate_model(adapter: &ModelAdapter, nodes: &[Vec<f64>]) -> Result<ValueTable> {
    match adapter {
        ModelAdapter::Builtin(b) => Ok(ValueTable {
            labels: b.labels(),
            rows: nodes.iter().map(|x| b.eval(x)).collect::<Result<_>>()?,
        }),
        ModelAdapter::BatchFile { nodes_out, values } => {
            if let Some(path) = nodes_out {
                let dim = nodes.first().map_or(0, Vec::len);
                write_text(path, &points_csv(nodes, dim, "xi"))?;
            }
            let rows = parse_rows(&read_text(values)?)
                .map_err(|e| Error::Model(format!("{}: {e}", values.display())))?;
            check_count(&rows, nodes.len(), &values.display().to_string())?;
            Ok(ValueTable::from_rows(rows))
        }
        ModelAdapter::Subprocess { command } => run_subprocess(command, nodes),
    }
}

fn run_subprocess(command: &str, nodes: &[Vec<f64>]) -> Result<ValueTable> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(command)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::io(format!("spawning {command:?}"), e))?;

    let mut input = String::new();
    for x in nodes {
        let line: Vec<String> = x.iter().map(|&v| fmt_f64(v)).collect();
        input.push_str(&line.join(" "));
        input.push('\n');
    }
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));

    let stdout = child.stdout.take().expect("stdout is piped");
    let mut text = String::new();
    for line in BufReader::new(stdout).lines() {
        let line = line.map_err(|e| Error::io(format!("reading output of {command:?}"), e))?;
        text.push_str(&line);
        text.push('\n');
    }
    let status = child
        .wait()
        .map_err(|e| Error::io(format!("waiting for {command:?}"), e))?;
    // A child that exits early closes the pipe; the exit status reports that.
    let _ = writer.join();
    if !status.success() {
        return Err(Error::Model(format!("{command:?} exited with {status}")));
    }
    let rows = parse_rows(&text).map_err(|e| Error::Model(format!("{command:?}: {e}")))?;
    check_count(&rows, nodes.len(), command)?;
    Ok(ValueTable::from_rows(rows))
}
