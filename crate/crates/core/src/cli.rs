//! The `direct` command: load a proximity file, cluster it, write the
//! requested outputs and report deviation measures.
//!
//! ```text
//! multidendrogram direct FILE TYPE METHOD [PRECISION] [--out-dir DIR]
//!     [--formats txt,newick,ultrametric,svg] [--mode direct|pair-group|enumerate-ties]
//!     [--tie-policy first|last|random:SEED] [--max-enum N] [--json-report PATH]
//! ```
//!
//! Output files are named `<input stem>-<method>` plus `.txt`, `.nwk`,
//! `.ultrametric.txt` or `.svg`. Exit codes: 0 success, 1 bad arguments,
//! 2 unreadable or invalid input or unwritable output, 3 enumeration budget
//! exceeded.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::dendro::{cophenetic_matrix, details, deviation_measures, DeviationReport};
use crate::export::{render_svg, to_newick, to_text_details, ultrametric_to_txt, ExportError, RenderOptions};
use crate::linkage::Method;
use crate::pair_group::{enumerate_tie_dendrograms, pair_group_cluster, EnumerationBudgetExceeded, TiePolicy};
use crate::proximity_io::{apply_precision, infer_precision, parse, Measure, ProximityData, ProximityError};
use crate::tree::Multidendrogram;
use crate::variable_group::{variable_group_cluster, ReversalEvent};

#[derive(Debug, Parser)]
#[command(name = "multidendrogram", version, about = "Tie-aware agglomerative hierarchical clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a proximity file and write the results.
    Direct(DirectArgs),
}

#[derive(Debug, Args)]
struct DirectArgs {
    /// Input file in matrix or list layout.
    file: PathBuf,
    /// distances or weights.
    measure: String,
    /// One of the seven clustering methods, e.g. Complete_Linkage.
    method: String,
    /// Decimal places kept during clustering; inferred from the data if absent.
    precision: Option<u32>,
    /// Directory for output files; defaults to the input file's directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Comma-separated subset of txt, newick, ultrametric, svg.
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<String>>,
    /// direct, pair-group or enumerate-ties.
    #[arg(long, default_value = "direct")]
    mode: String,
    /// Tie breaking for pair-group mode: first, last or random:SEED.
    #[arg(long, default_value = "first")]
    tie_policy: String,
    /// Upper bound on dendrograms explored by enumerate-ties.
    #[arg(long, default_value_t = 10_000)]
    max_enum: usize,
    /// Also write the report as JSON to this path.
    #[arg(long)]
    json_report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputFormat {
    Txt,
    Newick,
    Ultrametric,
    Svg,
}

impl OutputFormat {
    pub const ALL: [OutputFormat; 4] = [OutputFormat::Txt, OutputFormat::Newick, OutputFormat::Ultrametric, OutputFormat::Svg];

    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Txt => "txt",
            OutputFormat::Newick => "nwk",
            OutputFormat::Ultrametric => "ultrametric.txt",
            OutputFormat::Svg => "svg",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "txt" | "text" => Ok(OutputFormat::Txt),
            "newick" | "nwk" => Ok(OutputFormat::Newick),
            "ultrametric" => Ok(OutputFormat::Ultrametric),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(format!("unknown output format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Direct,
    PairGroup,
    EnumerateTies,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" => Ok(Mode::Direct),
            "pair-group" | "pair_group" => Ok(Mode::PairGroup),
            "enumerate-ties" | "enumerate_ties" => Ok(Mode::EnumerateTies),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliRequest {
    pub input: PathBuf,
    pub measure: Measure,
    pub method: Method,
    pub precision: Option<u32>,
    pub out_dir: PathBuf,
    pub formats: BTreeSet<OutputFormat>,
    pub mode: Mode,
    pub tie_policy: TiePolicy,
    pub max_enum: usize,
    pub json_report: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("io: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("input: {path}: {source}")]
    Input { path: PathBuf, source: ProximityError },

    #[error("export: {0}")]
    Export(#[from] ExportError),

    #[error("budget: {0}")]
    Budget(#[from] EnumerationBudgetExceeded),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Input { .. } | CliError::Export(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

/// Outcome of clap parsing: either a request or text to print and exit with
/// status 0 (help, version).
#[derive(Debug)]
pub enum Parsed {
    Request(CliRequest),
    Info(String),
}

impl CliRequest {
    /// Parses a full argument vector, program name included.
    pub fn parse_from<I, T>(args: I) -> Result<Parsed, CliError>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = match Cli::try_parse_from(args) {
            Ok(cli) => cli,
            Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
                return Ok(Parsed::Info(e.to_string()));
            }
            Err(e) => {
                let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_owned();
                return Err(CliError::Usage(first));
            }
        };
        let Command::Direct(args) = cli.command;
        let usage = CliError::Usage;

        let formats = match &args.formats {
            None => OutputFormat::ALL.into_iter().collect(),
            Some(list) => list.iter().map(|f| f.parse()).collect::<Result<BTreeSet<_>, _>>().map_err(usage)?,
        };
        let out_dir = args.out_dir.clone().unwrap_or_else(|| match args.file.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        });
        Ok(Parsed::Request(CliRequest {
            measure: args.measure.parse().map_err(usage)?,
            method: args.method.parse().map_err(usage)?,
            precision: args.precision,
            formats,
            mode: args.mode.parse().map_err(usage)?,
            tie_policy: args.tie_policy.parse().map_err(usage)?,
            max_enum: args.max_enum,
            json_report: args.json_report,
            input: args.file,
            out_dir,
        }))
    }
}

/// Everything printed after a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub input: String,
    pub mode: String,
    pub method: String,
    pub measure: Measure,
    pub precision: u32,
    pub items: usize,
    /// Iterations with more than one pair at the minimum distance.
    pub ties: Option<usize>,
    /// Nodes with a band of positive width.
    pub bands: Option<usize>,
    pub reversals: Vec<ReversalEvent>,
    pub deviation: Option<DeviationReport>,
    pub distinct_dendrograms: Option<usize>,
    pub distinct_ultrametric_matrices: Option<usize>,
    pub outputs: Vec<String>,
}

impl RunReport {
    /// `key: value` lines. Floats use Rust's shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| writeln!(out, "{k}: {v}").expect("write to string");
        line("input", self.input.clone());
        line("mode", self.mode.clone());
        line("method", self.method.clone());
        line("measure", self.measure.to_string());
        line("precision", self.precision.to_string());
        line("items", self.items.to_string());
        if let Some(t) = self.ties {
            line("ties", t.to_string());
        }
        if let Some(b) = self.bands {
            line("bands", b.to_string());
        }
        if let Some(count) = self.distinct_dendrograms {
            line("distinct dendrograms", count.to_string());
        }
        if let Some(count) = self.distinct_ultrametric_matrices {
            line("distinct ultrametric matrices", count.to_string());
        }
        if self.mode != "enumerate-ties" {
            line("reversals", self.reversals.len().to_string());
            for r in &self.reversals {
                line("reversal", format!("node {} band upper {} > next minimum {}", r.node, r.band_upper, r.d_next));
            }
        }
        if let Some(d) = &self.deviation {
            line("cophenetic correlation coefficient", d.ccc.map_or_else(|| "undefined".to_owned(), |c| c.to_string()));
            line("normalized mean squared error", d.nmse.to_string());
            line("normalized mean absolute error", d.nmae.to_string());
        }
        for o in &self.outputs {
            line("wrote", o.clone());
        }
        out
    }
}

fn read_data(request: &CliRequest) -> Result<ProximityData, CliError> {
    let text = std::fs::read_to_string(&request.input).map_err(|source| CliError::Io { path: request.input.clone(), source })?;
    let data = parse(&text, request.measure).map_err(|source| CliError::Input { path: request.input.clone(), source })?;
    let precision = request.precision.unwrap_or_else(|| infer_precision(&data));
    Ok(apply_precision(&data, precision))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_outputs(request: &CliRequest, tree: &Multidendrogram) -> Result<Vec<String>, CliError> {
    if !request.formats.is_empty() {
        std::fs::create_dir_all(&request.out_dir).map_err(|source| CliError::Io { path: request.out_dir.clone(), source })?;
    }
    let stem = request.input.file_stem().map_or_else(|| "output".into(), |s| s.to_string_lossy().into_owned());
    let precision = tree.precision();
    let mut written = Vec::new();
    for &format in &request.formats {
        let contents = match format {
            OutputFormat::Txt => to_text_details(&details(tree), precision),
            OutputFormat::Newick => to_newick(tree, precision),
            OutputFormat::Ultrametric => ultrametric_to_txt(&cophenetic_matrix(tree)),
            OutputFormat::Svg => render_svg(tree, &RenderOptions::for_tree(tree))?,
        };
        let path = request.out_dir.join(format!("{stem}-{}.{}", request.method.slug(), format.extension()));
        write_file(&path, &contents)?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

/// Executes a request: writes output files and returns the report.
pub fn run_direct(request: &CliRequest) -> Result<RunReport, CliError> {
    let data = read_data(request)?;
    let mut report = RunReport {
        input: request.input.display().to_string(),
        mode: String::new(),
        method: request.method.name().replace(' ', "_"),
        measure: data.measure(),
        precision: data.precision(),
        items: data.len(),
        ties: None,
        bands: None,
        reversals: Vec::new(),
        deviation: None,
        distinct_dendrograms: None,
        distinct_ultrametric_matrices: None,
        outputs: Vec::new(),
    };

    match request.mode {
        Mode::Direct => {
            let result = variable_group_cluster(&data, request.method);
            report.mode = "direct".into();
            report.ties = Some(result.trace.tie_iterations());
            report.bands = Some(result.band_count());
            report.deviation = Some(deviation_measures(&data, &cophenetic_matrix(&result.tree)));
            report.outputs = write_outputs(request, &result.tree)?;
            report.reversals = result.reversals;
        }
        Mode::PairGroup => {
            let tree = pair_group_cluster(&data, request.method, request.tie_policy).into_multidendrogram();
            report.mode = "pair-group".into();
            report.deviation = Some(deviation_measures(&data, &cophenetic_matrix(&tree)));
            report.outputs = write_outputs(request, &tree)?;
        }
        Mode::EnumerateTies => {
            let all = enumerate_tie_dendrograms(&data, request.method, request.max_enum)?;
            let matrices: BTreeSet<Vec<u64>> =
                all.iter().map(|d| cophenetic_matrix(d.as_multidendrogram()).values().iter().map(|v| v.to_bits()).collect()).collect();
            report.mode = "enumerate-ties".into();
            report.distinct_dendrograms = Some(all.len());
            report.distinct_ultrametric_matrices = Some(matrices.len());
        }
    }

    if let Some(path) = &request.json_report {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_file(path, &(json + "\n"))?;
    }
    Ok(report)
}

/// Full command-line entry point: returns the text for stdout or the error
/// to print on stderr.
pub fn main_with_args<I, T>(args: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match CliRequest::parse_from(args)? {
        Parsed::Info(text) => Ok(text),
        Parsed::Request(request) => run_direct(&request).map(|r| r.to_text()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(args: &[&str]) -> CliRequest {
        match CliRequest::parse_from(std::iter::once("multidendrogram").chain(args.iter().copied())).unwrap() {
            Parsed::Request(r) => r,
            Parsed::Info(text) => panic!("unexpected info output: {text}"),
        }
    }

    #[test]
    fn positional_form() {
        let r = request(&["direct", "data.txt", "DISTANCES", "Complete_Linkage", "3"]);
        assert_eq!(r.measure, Measure::Distance);
        assert_eq!(r.method, Method::CompleteLinkage);
        assert_eq!(r.precision, Some(3));
        assert_eq!(r.mode, Mode::Direct);
        assert_eq!(r.formats.len(), 4);
        assert_eq!(r.out_dir, PathBuf::from("."));
    }

    #[test]
    fn long_options() {
        let r = request(&[
            "direct",
            "in/d.txt",
            "weights",
            "ward",
            "--formats",
            "newick,svg",
            "--mode",
            "pair-group",
            "--tie-policy",
            "random:5",
            "--max-enum",
            "7",
            "--json-report",
            "r.json",
        ]);
        assert_eq!(r.measure, Measure::Weight);
        assert_eq!(r.precision, None);
        assert_eq!(r.formats, [OutputFormat::Newick, OutputFormat::Svg].into_iter().collect());
        assert_eq!(r.mode, Mode::PairGroup);
        assert_eq!(r.tie_policy, TiePolicy::Random(5));
        assert_eq!(r.max_enum, 7);
        assert_eq!(r.out_dir, PathBuf::from("in"));
    }

    #[test]
    fn bad_arguments_exit_with_one() {
        for args in [
            vec!["direct", "d.txt", "lengths", "ward"],
            vec!["direct", "d.txt", "distances", "median"],
            vec!["direct", "d.txt", "distances", "ward", "--formats", "png"],
            vec!["direct", "d.txt"],
            vec!["direct", "d.txt", "distances", "ward", "-1"],
        ] {
            let err = CliRequest::parse_from(std::iter::once("multidendrogram").chain(args.iter().copied())).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{args:?}: {err}");
            assert_eq!(err.to_string().lines().count(), 1);
        }
    }

    #[test]
    fn missing_file_exits_with_two() {
        let r = request(&["direct", "/nonexistent/d.txt", "distances", "ward"]);
        assert_eq!(run_direct(&r).unwrap_err().exit_code(), 2);
    }
}
