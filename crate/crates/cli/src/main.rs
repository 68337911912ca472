use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dconcord_core::goeritz::{extend_twisted, raw_table_from_goeritz, GoeritzForm};
use dconcord_core::knotdb::{batch_report, BatchOptions, BatchReport, KnotDb, KnotOutcome, KnotRecord};
use dconcord_core::lens::raw_table_lens;
use dconcord_core::{DTable, Error, IntMatrix, LensSpace, Orientation};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "dconcord", version, about = "Correction terms of double branched covers and the concordance order obstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a correction-term table.
    #[command(subcommand)]
    Dtable(DtableSource),
    /// Run the order obstruction for one knot of the database.
    Obstruct {
        #[arg(long)]
        knot: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the order obstruction for several knots (all of them by default).
    Batch {
        /// Comma separated knot names.
        #[arg(long, value_delimiter = ',')]
        knots: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum DtableSource {
    /// Lens space L(p,q) via the recursion.
    Lens {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        /// Reverse orientation (negate every value).
        #[arg(long)]
        negate: bool,
        #[command(flatten)]
        out: TableArgs,
    },
    /// Negative-definite Goeritz matrix read from a file.
    Goeritz {
        #[arg(long)]
        file: PathBuf,
        /// Border the matrix by a twist region with this many crossings.
        #[arg(long)]
        twist: Option<i64>,
        #[command(flatten)]
        out: TableArgs,
    },
}

#[derive(Args)]
struct TableArgs {
    /// Relabel so the conjugation-fixed class is the identity.
    #[arg(long)]
    canonical: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    /// Order 2m to test.
    #[arg(long)]
    order: u32,
    /// Knot database; defaults to $DCONCORD_KNOT_DB, then the bundled table.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Leave timing fields out so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        None | Some(Error::Io(_) | Error::UnknownKnot(_)) => 1,
        Some(_) => 2,
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Dtable(src) => {
            let (table, matrix, out) = match src {
                DtableSource::Lens { p, q, negate, out } => {
                    let orientation = if negate { Orientation::Negative } else { Orientation::Positive };
                    (raw_table_lens(&LensSpace::new(p, q, orientation)?)?, None, out)
                }
                DtableSource::Goeritz { file, twist, out } => {
                    let text = std::fs::read_to_string(&file)
                        .map_err(Error::Io)
                        .with_context(|| format!("reading {}", file.display()))?;
                    let mut m = parse_matrix(&text)?;
                    if let Some(k) = twist {
                        m = extend_twisted(&m, k)?;
                    }
                    let form = GoeritzForm::new(m.clone())?;
                    (raw_table_from_goeritz(&form)?, Some(m), out)
                }
            };
            let table = if out.canonical { table.canonical_relabel()? } else { table };
            write_table(&mut stdout, &table, matrix.as_ref(), out.format)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Obstruct { knot, run } => {
            let db = open_db(&run)?;
            let record = db.get(&knot)?;
            let report = execute(&db, &[record], &run)?;
            write_report(&mut stdout, &report, run.format)?;
            Ok(if report.knots.iter().any(|k| k.verdict == "error") { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Batch { knots, run } => {
            let db = open_db(&run)?;
            let records: Vec<&KnotRecord> = if knots.is_empty() {
                db.records.iter().collect()
            } else {
                knots.iter().map(|k| db.get(k)).collect::<Result<_, _>>()?
            };
            let report = execute(&db, &records, &run)?;
            write_report(&mut stdout, &report, run.format)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn open_db(run: &RunArgs) -> anyhow::Result<KnotDb> {
    Ok(match &run.db {
        Some(path) => KnotDb::load(path)?,
        None => KnotDb::from_env()?,
    })
}

fn execute(db: &KnotDb, records: &[&KnotRecord], run: &RunArgs) -> anyhow::Result<BatchReport> {
    let opts = BatchOptions { timing: !run.no_timing, ..Default::default() };
    match run.jobs {
        None => Ok(batch_report(db, records, run.order, &opts)),
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(|| batch_report(db, records, run.order, &opts)))
        }
    }
}

/// Either a JSON array of rows or one row of integers per line.
fn parse_matrix(text: &str) -> anyhow::Result<IntMatrix> {
    let rows: Vec<Vec<i64>> = if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            field: "matrix".into(),
            message: e.to_string(),
        })?
    } else {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<Vec<i64>, _>>()
                .map_err(|e| Error::Parse { line: n + 1, field: "matrix".into(), message: e.to_string() })?;
            rows.push(row);
        }
        rows
    };
    Ok(IntMatrix::from_rows(&rows)?)
}

#[derive(Serialize)]
struct TableJson<'a> {
    group: &'a dconcord_core::FiniteAbelianGroup,
    origin_is_spin: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<String>>>,
    values: Vec<Entry>,
}

#[derive(Serialize)]
struct Entry {
    element: dconcord_core::GroupElement,
    d: dconcord_core::Rational,
}

fn write_table(w: &mut impl Write, t: &DTable, matrix: Option<&IntMatrix>, format: Format) -> anyhow::Result<()> {
    let g = t.group();
    match format {
        Format::Text => {
            if let Some(m) = matrix {
                write!(w, "{m}")?;
            }
            writeln!(w, "# group {g}, {} classes", g.order())?;
            for (i, v) in t.values().iter().enumerate() {
                writeln!(w, "{}\t{v}", g.element_at(i))?;
            }
        }
        Format::Json => {
            let doc = TableJson {
                group: g,
                origin_is_spin: t.origin_is_spin(),
                matrix: matrix.map(|m| {
                    (0..m.rows()).map(|i| m.row(i).iter().map(ToString::to_string).collect()).collect()
                }),
                values: t
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| Entry { element: g.element_at(i), d: v.clone() })
                    .collect(),
            };
            serde_json::to_writer_pretty(&mut *w, &doc)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["element", "d"])?;
            for (i, v) in t.values().iter().enumerate() {
                out.write_record([coords(g.element_at(i).coords()), v.to_string()])?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn coords(c: &[u64]) -> String {
    c.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn witness_text(k: &KnotOutcome) -> String {
    match &k.witness {
        None => String::new(),
        Some(w) => {
            let gens: Vec<String> = w
                .generators
                .iter()
                .map(|g| format!("[{}]", g.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")))
                .collect();
            format!("{} {}", w.iso_type, gens.join(" "))
        }
    }
}

fn write_report(w: &mut impl Write, r: &BatchReport, format: Format) -> anyhow::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, r)?;
            writeln!(w)?;
        }
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            out.write_record([
                "knot",
                "determinant",
                "verdict",
                "spin_nonzero",
                "subgroups_examined",
                "witness",
                "reason",
                "elapsed_ms",
            ])?;
            for k in &r.knots {
                out.write_record([
                    k.name.clone(),
                    k.determinant.map(|d| d.to_string()).unwrap_or_default(),
                    k.verdict.clone(),
                    k.spin_nonzero.to_string(),
                    k.subgroups_examined().to_string(),
                    witness_text(k),
                    k.reason.clone().unwrap_or_default(),
                    k.elapsed_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
                ])?;
            }
            out.flush()?;
        }
        Format::Text => {
            writeln!(w, "# order {}, database {}", r.order, &r.database_checksum[..12])?;
            for k in &r.knots {
                let det = k.determinant.map(|d| d.to_string()).unwrap_or_else(|| "?".into());
                write!(w, "{:<8} det {:<4} {:<12}", k.name, det, k.verdict)?;
                if k.verdict != "error" {
                    write!(w, " examined {}", k.subgroups_examined())?;
                }
                if let Some(t) = k.elapsed_ms {
                    write!(w, " ({t:.1} ms)")?;
                }
                writeln!(w)?;
                if k.spin_nonzero {
                    writeln!(w, "    d(0) is nonzero")?;
                }
                if k.witness.is_some() {
                    writeln!(w, "    vanishing subgroup {}", witness_text(k))?;
                }
                if let Some(reason) = &k.reason {
                    writeln!(w, "    {reason}")?;
                }
            }
            if let Some(t) = r.elapsed_ms {
                writeln!(w, "# total {t:.1} ms")?;
            }
        }
    }
    Ok(())
}
