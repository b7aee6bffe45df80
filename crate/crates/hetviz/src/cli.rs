//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hetviz_core::encode::{encode, encoded_dataset, EncoderKind, EncoderParams};
use hetviz_core::render::{RenderMode, RenderSpec};
use hetviz_core::rules::Rule;
use hetviz_core::scheme::{bulk_assign, drop_constant_attributes, normalize_unit_interval};
use hetviz_core::view::ViewConfig;
use hetviz_core::MeasurementType;

use crate::csvio::{read_csv, CsvOptions};
use crate::dsfile::{read_dataset, write_dataset};
use crate::engine::{self, ViewParams};
use crate::error::{HetvizError, Result};
use crate::schemefile::{read_scheme, save_scheme, write_scheme, SchemeDocument};

#[derive(Debug, Parser)]
#[command(name = "hetviz", version, about = "Coding schemes, frequency parallel coordinates and rules for mixed tabular data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a CSV file, type it with a scheme and write a dataset file.
    Ingest(IngestArgs),
    /// Create, apply or check coding schemes.
    #[command(subcommand)]
    Scheme(SchemeCommand),
    /// Encode one attribute and print the codes, or write the encoded dataset.
    Encode(EncodeArgs),
    /// Print the layout bundle as JSON.
    Layout(ViewCommand),
    /// Print the linguistic report, one statement per line.
    Report(ViewCommand),
    /// Hyperblock mining.
    #[command(subcommand)]
    Hb(HbCommand),
    /// Rule evaluation.
    #[command(subcommand)]
    Rule(RuleCommand),
    /// Write an SVG parallel-coordinates view.
    Render(RenderArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CsvArgs {
    /// The first line holds data, not column names.
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long, default_value = "?")]
    pub missing: String,
    /// Skip lines starting with this character.
    #[arg(long)]
    pub comment: Option<char>,
    /// Strip whitespace around fields.
    #[arg(long)]
    pub trim: bool,
}

fn ascii(c: char, what: &str) -> Result<u8> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| hetviz_core::Error::InvalidArgument(format!("{what} must be an ASCII character")).into())
}

impl CsvArgs {
    pub fn options(&self) -> Result<CsvOptions> {
        Ok(CsvOptions {
            delimiter: ascii(self.delimiter, "delimiter")?,
            has_header: !self.no_header,
            missing_token: self.missing.clone(),
            comment: self.comment.map(|c| ascii(c, "comment")).transpose()?,
            trim: self.trim,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BulkKind {
    Nominal,
    Ordinal,
}

impl BulkKind {
    fn mtype(self) -> MeasurementType {
        match self {
            BulkKind::Nominal => MeasurementType::Nominal,
            BulkKind::Ordinal => MeasurementType::Ordinal,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub csv: PathBuf,
    /// Scheme document; without one every column is nominal.
    #[arg(long, conflicts_with = "all")]
    pub scheme: Option<PathBuf>,
    /// Give every column this type with codes 1..n.
    #[arg(long, value_enum)]
    pub all: Option<BulkKind>,
    /// Target attribute, overriding the scheme (default: last column).
    #[arg(long)]
    pub target: Option<String>,
    #[command(flatten)]
    pub csv_args: CsvArgs,
    /// Rescale numbers and codes to [0, 1].
    #[arg(long)]
    pub normalize: bool,
    /// Remove attributes holding a single value.
    #[arg(long)]
    pub drop_constant: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SchemeCommand {
    /// Write an "All Nominal" or "All Ordinal" scheme for a CSV file.
    Generate {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "nominal")]
        kind: BulkKind,
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        csv_args: CsvArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Type a CSV file with a scheme and write a dataset file.
    Apply {
        csv: PathBuf,
        scheme: PathBuf,
        #[command(flatten)]
        csv_args: CsvArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scheme document, and optionally that it codes a CSV file.
    Validate {
        scheme: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        csv_args: CsvArgs,
    },
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    pub dataset: PathBuf,
    #[arg(long)]
    pub attr: String,
    #[arg(long)]
    pub encoder: EncoderKind,
    #[arg(long, default_value_t = 1.0)]
    pub smoothing: f64,
    #[arg(long, default_value_t = 1.0)]
    pub shrink: f64,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Positive class for target-based encoders.
    #[arg(long)]
    pub positive: Option<String>,
    /// Write the dataset with the attribute replaced instead of printing codes.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ViewArgs {
    /// JSON view configuration used as the base for the flags below.
    #[arg(long)]
    pub view: Option<PathBuf>,
    /// Reference attribute (default: the dataset target).
    #[arg(long = "ref")]
    pub reference: Option<String>,
    #[arg(long)]
    pub purity: Option<f64>,
    #[arg(long)]
    pub min_size: Option<f64>,
    #[arg(long)]
    pub small: Option<f64>,
    #[arg(long)]
    pub large: Option<f64>,
    /// Merge non-dominant classes into one grey block per bar.
    #[arg(long)]
    pub join: bool,
    #[arg(long)]
    pub no_relocate: bool,
    /// Hide bars below the purity or size threshold.
    #[arg(long)]
    pub filter: bool,
    /// `frequency`, `purity` or `color:cls1,cls2`.
    #[arg(long)]
    pub sort: Option<String>,
    #[arg(long = "flip")]
    pub flips: Vec<String>,
    /// Comma-separated axis order.
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub keep_constant: bool,
}

impl ViewArgs {
    pub fn config(&self) -> Result<ViewConfig> {
        let base = match &self.view {
            Some(path) => {
                let bytes = std::fs::read(path).map_err(|e| HetvizError::io(path, e))?;
                serde_json::from_slice(&bytes)
                    .map_err(|e| HetvizError::document(path.display().to_string(), e))?
            }
            None => ViewConfig::default(),
        };
        let params = ViewParams {
            reference: self.reference.clone(),
            purity: self.purity,
            minsize: self.min_size,
            small: self.small,
            large: self.large,
            join: self.join.then_some(true),
            relocate: self.no_relocate.then_some(false),
            filter: self.filter.then_some(true),
            sort: self.sort.clone(),
            flips: (!self.flips.is_empty()).then(|| self.flips.join(",")),
            order: self.order.clone(),
            keep_constant: self.keep_constant.then_some(true),
        };
        params.apply(&base)
    }
}

#[derive(Debug, Args)]
pub struct ViewCommand {
    pub dataset: PathBuf,
    #[command(flatten)]
    pub view: ViewArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum HbCommand {
    /// Find pure hyperblocks.
    Discover {
        dataset: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RuleCommand {
    /// Score a rule file against a dataset.
    Eval { dataset: PathBuf, rule: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Lossless,
    Aggregated,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub dataset: PathBuf,
    #[command(flatten)]
    pub view: ViewArgs,
    #[arg(long, value_enum, default_value = "lossless")]
    pub mode: ModeArg,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub no_frames: bool,
    #[arg(long)]
    pub frame_threshold: Option<f64>,
    /// Append the linguistic report below the plot.
    #[arg(long)]
    pub report: bool,
    #[arg(long)]
    pub out: PathBuf,
}

impl RenderArgs {
    fn spec(&self) -> RenderSpec {
        let mut spec = RenderSpec {
            mode: match self.mode {
                ModeArg::Lossless => RenderMode::LosslessPolylines,
                ModeArg::Aggregated => RenderMode::AggregatedEdges,
            },
            show_purity_frames: !self.no_frames,
            show_report: self.report,
            ..Default::default()
        };
        if let Some(w) = self.width {
            spec.width = w;
        }
        if let Some(h) = self.height {
            spec.height = h;
        }
        if let Some(t) = self.frame_threshold {
            spec.frame_threshold = t;
        }
        spec
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "HETVIZ_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Largest accepted request body, in bytes.
    #[arg(long, default_value_t = crate::api::DEFAULT_UPLOAD_LIMIT)]
    pub max_upload: usize,
}

fn write_or_print(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| HetvizError::io(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| HetvizError::io("<stdout>", e)),
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("outputs serialize");
    text.push('\n');
    text
}

fn load_scheme_for(csv_path: &Path, csv_args: &CsvArgs, scheme: Option<&Path>, all: Option<BulkKind>, target: Option<&str>) -> Result<hetviz_core::Dataset> {
    let raw = read_csv(csv_path, &csv_args.options()?)?;
    let mut doc = match (scheme, all) {
        (Some(p), _) => read_scheme(p)?,
        (None, Some(kind)) => {
            let mut doc = SchemeDocument { scheme: bulk_assign(&raw, kind.mtype())?, hierarchy: None };
            doc.scheme.target = raw.header().last().cloned();
            doc
        }
        (None, None) => engine::default_scheme(&raw, None)?,
    };
    if let Some(t) = target {
        doc.scheme.target = Some(t.to_string());
    }
    engine::typed_dataset(&raw, &doc)
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Ingest(a) => {
            let mut ds = load_scheme_for(&a.csv, &a.csv_args, a.scheme.as_deref(), a.all, a.target.as_deref())?;
            if a.drop_constant {
                let (kept, dropped) = drop_constant_attributes(&ds);
                if !dropped.is_empty() {
                    writeln!(out, "dropped constant attributes: {}", dropped.join(", ")).ok();
                }
                ds = kept;
            }
            if a.normalize {
                ds = normalize_unit_interval(&ds);
            }
            write_dataset(&a.out, &ds)?;
            writeln!(out, "{} rows, {} attributes", ds.len(), ds.width()).ok();
            Ok(())
        }
        Command::Scheme(SchemeCommand::Generate { csv, kind, target, csv_args, out: path }) => {
            let raw = read_csv(&csv, &csv_args.options()?)?;
            let mut doc = SchemeDocument { scheme: bulk_assign(&raw, kind.mtype())?, hierarchy: None };
            doc.scheme.target = match target {
                Some(t) => Some(t),
                None => raw.header().last().cloned(),
            };
            match path {
                Some(p) => write_scheme(&p, &doc),
                None => write_or_print(out, None, &save_scheme(&doc)),
            }
        }
        Command::Scheme(SchemeCommand::Apply { csv, scheme, csv_args, out: path }) => {
            let ds = load_scheme_for(&csv, &csv_args, Some(&scheme), None, None)?;
            write_dataset(&path, &ds)?;
            writeln!(out, "{} rows, {} attributes", ds.len(), ds.width()).ok();
            Ok(())
        }
        Command::Scheme(SchemeCommand::Validate { scheme, csv, csv_args }) => {
            let doc = read_scheme(&scheme)?;
            if let Some(csv) = csv {
                let raw = read_csv(&csv, &csv_args.options()?)?;
                let ds = engine::typed_dataset(&raw, &doc)?;
                writeln!(out, "ok: {} attributes, {} rows coded", ds.width(), ds.len()).ok();
            } else {
                writeln!(out, "ok: {} attributes", doc.scheme.entries.len()).ok();
            }
            Ok(())
        }
        Command::Encode(a) => {
            let ds = read_dataset(&a.dataset)?;
            let col = ds.index_of(&a.attr)?;
            let params = EncoderParams {
                smoothing: a.smoothing,
                shrink: a.shrink,
                dim: a.dim,
                seed: a.seed,
                positive_class: a.positive.clone(),
                palette: None,
            };
            let result = encode(&ds, col, a.encoder, &params)?;
            match &a.out {
                Some(p) => {
                    let encoded = encoded_dataset(&ds, col, &result)?;
                    write_dataset(p, &encoded)
                }
                None => write_or_print(out, None, &pretty(&result)),
            }
        }
        Command::Layout(a) => {
            let ds = read_dataset(&a.dataset)?;
            let bundle = engine::view(&ds, &a.view.config()?)?;
            write_or_print(out, a.out.as_deref(), &pretty(&bundle))
        }
        Command::Report(a) => {
            let ds = read_dataset(&a.dataset)?;
            let bundle = engine::view(&ds, &a.view.config()?)?;
            write_or_print(out, a.out.as_deref(), &engine::report_text(&bundle))
        }
        Command::Hb(HbCommand::Discover { dataset, out: path }) => {
            let ds = read_dataset(&dataset)?;
            let blocks = engine::discover(&ds)?;
            write_or_print(out, path.as_deref(), &pretty(&blocks))
        }
        Command::Rule(RuleCommand::Eval { dataset, rule }) => {
            let ds = read_dataset(&dataset)?;
            let bytes = std::fs::read(&rule).map_err(|e| HetvizError::io(&rule, e))?;
            let rule: Rule = serde_json::from_slice(&bytes)
                .map_err(|e| HetvizError::document(rule.display().to_string(), e))?;
            let metrics = engine::evaluate_rule(&ds, &rule)?;
            write_or_print(out, None, &pretty(&metrics))
        }
        Command::Render(a) => {
            let ds = read_dataset(&a.dataset)?;
            let svg = engine::render(&ds, &a.view.config()?, &a.spec())?;
            write_or_print(out, Some(&a.out), &svg)
        }
        Command::Serve(a) => {
            let runtime = tokio::runtime::Runtime::new().map_err(|e| HetvizError::io("<runtime>", e))?;
            runtime
                .block_on(crate::api::serve(a.port, a.max_upload))
                .map_err(|e| HetvizError::io(format!("127.0.0.1:{}", a.port), e))
        }
    }
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 on a
/// failed command, 2 on a usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                out.write_all(text.as_bytes()).ok();
            } else {
                err.write_all(text.as_bytes()).ok();
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            writeln!(err, "error: {e}").ok();
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    fn run_captured(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("hetviz").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_captured(&["frobnicate"]).0, 2);
        assert_eq!(run_captured(&["report", "x.ds", "--bogus"]).0, 2);
        let (code, out, _) = run_captured(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("ingest"));
    }

    #[test]
    fn missing_file_exits_one() {
        let (code, _, err) = run_captured(&["layout", "/nonexistent/missing.ds"]);
        assert_eq!(code, 1);
        assert!(err.contains("file not found"), "{err}");
    }
}
