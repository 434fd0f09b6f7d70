//! Command-line front end: `mbf run` regenerates experiment CSVs, `mbf
//! fetch-data` downloads and validates the bag-of-words corpora, and `mbf
//! verify` runs the acceptance criteria. All behavior lives in the library;
//! this binary only maps arguments onto it.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command as Process, ExitCode};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use matrix_bloom::experiments::{
    self, default_output_name, write_csv, ExperimentKind, ExperimentSpec,
};
use matrix_bloom::{acceptance, datasets, Error, Result};

#[derive(Parser)]
#[command(name = "mbf", version, about = "Bit-matrix Bloom filters over 2-tuples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV table.
    Run(RunArgs),
    /// Download a bag-of-words corpus, print its SHA-256, and validate it.
    FetchData(FetchArgs),
    /// Run the acceptance criteria, one verdict line each.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// One of: fpr-generic, fpr-mam, fpr-jmatrix, load-factor,
    /// batch-compare, double-side, multiset.
    experiment: String,
    /// Tuple count (fpr-generic).
    #[arg(long)]
    n: Option<u64>,
    /// First-component cardinality.
    #[arg(long)]
    n1: Option<u64>,
    /// Second-component cardinality (per-partition count for fpr-jmatrix).
    #[arg(long)]
    n2: Option<u64>,
    /// Comma-separated hash counts (total k, or k1+k2 budgets for the
    /// max-adaptive experiments).
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated side ratios (max-adaptive experiments).
    #[arg(long)]
    ratio: Option<String>,
    /// Comma-separated partition counts (fpr-jmatrix).
    #[arg(long)]
    j: Option<String>,
    /// Comma-separated member proportions, or fill fractions for
    /// load-factor.
    #[arg(long)]
    proportion: Option<String>,
    /// Comma-separated values-per-key multipliers (batch-compare).
    #[arg(long)]
    multiplier: Option<String>,
    /// Design exponent (fpr-jmatrix); mutually exclusive with --k.
    #[arg(long)]
    exponent: Option<f64>,
    /// Set count (multiset).
    #[arg(long)]
    sets: Option<u64>,
    /// Element count (multiset).
    #[arg(long)]
    elements: Option<u64>,
    /// docword file path (batch-compare), or `no-repeating` to name the
    /// fpr-generic dataset explicitly.
    #[arg(long)]
    dataset: Option<String>,
    /// Queries per measured cell.
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV path (default: the experiment name plus ".csv").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use full-scale sweep defaults instead of desk-scale ones.
    #[arg(long)]
    full_size: bool,
}

#[derive(Args)]
struct FetchArgs {
    /// Corpus name: kos or nips.
    corpus: String,
    /// Directory to place the decompressed docword file in.
    #[arg(long, default_value = "data")]
    out: PathBuf,
    /// Fail unless the downloaded archive hashes to this SHA-256 (hex).
    #[arg(long)]
    expect_sha256: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Directory holding fetched corpora for the ingestion criterion.
    #[arg(long, default_value = "data")]
    data: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run_experiment(args),
        Command::FetchData(args) => fetch_data(args),
        Command::Verify(args) => verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run_experiment(args: RunArgs) -> Result<ExitCode> {
    let kind: ExperimentKind = args.experiment.parse()?;
    let mut spec = ExperimentSpec::new(kind, args.seed, args.trials);
    spec.full_size = args.full_size;

    let mut set = |key: &str, value: Option<String>| {
        if let Some(value) = value {
            spec.params.insert(key.to_string(), value);
        }
    };
    set("n", args.n.map(|v| v.to_string()));
    set("n1", args.n1.map(|v| v.to_string()));
    set("n2", args.n2.map(|v| v.to_string()));
    set("k", args.k);
    set("ratio", args.ratio);
    set("j", args.j);
    set("proportion", args.proportion);
    set("multiplier", args.multiplier);
    set("exponent", args.exponent.map(|v| v.to_string()));
    set("sets", args.sets.map(|v| v.to_string()));
    set("elements", args.elements.map(|v| v.to_string()));
    set("dataset", args.dataset);

    let rows = experiments::run(&spec)?;
    let path = args.out.unwrap_or_else(|| PathBuf::from(default_output_name(kind)));
    write_csv(&path, &rows)?;
    println!("{}: wrote {} rows to {}", kind, rows.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

struct CorpusPin {
    name: &'static str,
    url: &'static str,
    pairs: u64,
    docs: u64,
}

const CORPORA: [CorpusPin; 2] = [
    CorpusPin {
        name: "kos",
        url: "https://archive.ics.uci.edu/ml/machine-learning-databases/bag-of-words/docword.kos.txt.gz",
        pairs: 353_160,
        docs: 3_430,
    },
    CorpusPin {
        name: "nips",
        url: "https://archive.ics.uci.edu/ml/machine-learning-databases/bag-of-words/docword.nips.txt.gz",
        pairs: 746_316,
        docs: 1_500,
    },
];

/// Downloads `url` with whichever of curl/wget is installed.
fn download(url: &str, dest: &std::path::Path) -> Result<()> {
    let attempts: [(&str, Vec<&str>); 2] =
        [("curl", vec!["-fsSL", "--retry", "2", "-o"]), ("wget", vec!["-q", "-O"])];
    let mut last = String::from("no downloader available");
    for (tool, flags) in attempts {
        let mut cmd = Process::new(tool);
        cmd.args(&flags).arg(dest).arg(url);
        match cmd.status() {
            Ok(status) if status.success() && dest.metadata().map_or(false, |m| m.len() > 0) => {
                return Ok(());
            }
            Ok(status) => last = format!("{tool} exited with {status}"),
            Err(err) => last = format!("{tool} unavailable ({err})"),
        }
        // Never leave a partial archive behind for a rerun to trust.
        let _ = std::fs::remove_file(dest);
    }
    Err(Error::MissingDataset(format!(
        "could not download {url} ({last}); fetch it manually and place the decompressed \
         file under the output directory"
    )))
}

fn fetch_data(args: FetchArgs) -> Result<ExitCode> {
    let pin = CORPORA.iter().find(|c| c.name == args.corpus).ok_or_else(|| {
        Error::InvalidParameter(format!("unknown corpus {:?}; expected kos or nips", args.corpus))
    })?;
    std::fs::create_dir_all(&args.out)?;
    let gz_path = args.out.join(format!("docword.{}.txt.gz", pin.name));
    let txt_path = args.out.join(format!("docword.{}.txt", pin.name));

    let have_archive = gz_path.metadata().map_or(false, |m| m.len() > 0);
    if have_archive {
        println!("using existing archive {}", gz_path.display());
    } else {
        println!("downloading {}", pin.url);
        download(pin.url, &gz_path)?;
    }

    let compressed = std::fs::read(&gz_path)?;
    let digest = Sha256::digest(&compressed);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    println!("sha256({}) = {hex}", gz_path.display());
    if let Some(expect) = &args.expect_sha256 {
        if !expect.eq_ignore_ascii_case(&hex) {
            return Err(Error::InvalidParameter(format!(
                "archive SHA-256 mismatch: expected {expect}, got {hex}"
            )));
        }
        println!("sha256 matches the expected value");
    }

    let mut text = String::new();
    flate2::read::GzDecoder::new(&compressed[..]).read_to_string(&mut text)?;
    let mut out = std::fs::File::create(&txt_path)?;
    out.write_all(text.as_bytes())?;

    let data = datasets::parse_docword(text.as_bytes())?;
    println!(
        "parsed {}: {} pairs ({} distinct docs, {} distinct words)",
        txt_path.display(),
        data.pairs.len(),
        data.distinct_docs,
        data.distinct_words
    );
    for warning in &data.warnings {
        println!("warning: {warning}");
    }
    if data.pairs.len() as u64 != pin.pairs || data.distinct_docs != pin.docs {
        return Err(Error::Parse {
            line: 0,
            msg: format!(
                "corpus cardinalities diverge from the published ones: got {} pairs/{} docs, \
                 want {}/{}",
                data.pairs.len(),
                data.distinct_docs,
                pin.pairs,
                pin.docs
            ),
        });
    }
    println!("cardinalities match the published values");
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let results = acceptance::run_all(&args.data)?;
    let mut failed = 0u32;
    let mut skipped = 0u32;
    for result in &results {
        println!("{}", result.line());
        if result.skipped {
            skipped += 1;
        } else if !result.passed {
            failed += 1;
        }
    }
    println!(
        "{} passed, {failed} failed, {skipped} skipped",
        results.len() as u32 - failed - skipped
    );
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
