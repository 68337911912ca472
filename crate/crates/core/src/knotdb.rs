//! Knot records, presentation resolution and batch obstruction runs.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dtable::DTable;
use crate::error::{Error, Result};
use crate::goeritz::{d_table_from_goeritz, determinant_u64, extend_twisted, graph_to_goeritz, GoeritzForm, WhiteGraph};
use crate::lens::{d_table_lens, LensSpace, Orientation};
use crate::matrix::IntMatrix;
use crate::obstruction::{obstruct_order, ObstructionReport, SearchOptions, TypeSearch, Verdict, WitnessRecord};

/// Overrides the database path used by the command line tool.
pub const DB_ENV_VAR: &str = "DCONCORD_KNOT_DB";

const BUNDLED: &str = include_str!("../data/knots.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Presentation {
    Lens {
        p: u64,
        q: u64,
        #[serde(default)]
        orientation: Orientation,
    },
    Goeritz {
        matrix: Vec<Vec<i64>>,
    },
    TwistedGoeritz {
        matrix: Vec<Vec<i64>>,
        twists: i64,
    },
    WhiteGraph {
        graph: WhiteGraph,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ordering: Option<Vec<usize>>,
    },
    Unavailable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotRecord {
    pub name: String,
    /// May be left out only when there is no presentation.
    #[serde(default)]
    pub determinant: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_lower_bound: Option<u32>,
    pub presentation: Presentation,
}

#[derive(Serialize, Deserialize)]
struct DbFile {
    knots: Vec<KnotRecord>,
}

#[derive(Clone, Debug)]
pub struct KnotDb {
    pub records: Vec<KnotRecord>,
    /// Hex SHA-256 of the source text.
    pub checksum: String,
    pub source: String,
}

impl KnotDb {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "bundled").expect("bundled database is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// The file named by [`DB_ENV_VAR`] if set, the bundled data otherwise.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(DB_ENV_VAR) {
            Some(p) => Self::load(&PathBuf::from(p)),
            None => Ok(Self::bundled()),
        }
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: DbFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            line: e.inner().line(),
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        let mut seen = HashSet::new();
        for r in &file.knots {
            if !seen.insert(r.name.as_str()) {
                return Err(invalid(r, "duplicate name"));
            }
            validate(r)?;
        }
        let checksum = hex::encode(Sha256::digest(text.as_bytes()));
        Ok(KnotDb { records: file.knots, checksum, source: source.to_string() })
    }

    pub fn get(&self, name: &str) -> Result<&KnotRecord> {
        self.records
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownKnot(name.to_string()))
    }

    pub fn to_json(&self) -> String {
        let file = DbFile { knots: self.records.clone() };
        serde_json::to_string_pretty(&file).expect("records serialize")
    }
}

fn invalid(r: &KnotRecord, message: impl Into<String>) -> Error {
    Error::Validation { knot: r.name.clone(), message: message.into() }
}

fn matrix_of(rows: &[Vec<i64>]) -> Result<IntMatrix> {
    IntMatrix::from_rows(rows)
}

/// The integer form behind a presentation, if any.
fn form_matrix(p: &Presentation) -> Result<Option<IntMatrix>> {
    Ok(match p {
        Presentation::Goeritz { matrix } => Some(matrix_of(matrix)?),
        Presentation::TwistedGoeritz { matrix, twists } => Some(extend_twisted(&matrix_of(matrix)?, *twists)?),
        Presentation::WhiteGraph { graph, ordering } => {
            graph.validate()?;
            Some(graph.goeritz_matrix(ordering.as_deref())?)
        }
        Presentation::Lens { .. } | Presentation::Unavailable => None,
    })
}

fn validate(r: &KnotRecord) -> Result<()> {
    if r.name.trim().is_empty() {
        return Err(invalid(r, "empty name"));
    }
    if let Some(d) = r.determinant {
        if d % 2 == 0 {
            return Err(invalid(r, format!("determinant {d} is not a positive odd integer")));
        }
    }
    if r.presentation == Presentation::Unavailable {
        return Ok(());
    }
    let declared = r.determinant.ok_or_else(|| invalid(r, "presentation given without determinant"))?;
    let actual = match &r.presentation {
        Presentation::Lens { p, q, orientation } => {
            LensSpace::new(*p, *q, *orientation).map_err(|e| invalid(r, e.to_string()))?;
            *p
        }
        other => {
            let m = form_matrix(other).map_err(|e| invalid(r, e.to_string()))?.expect("form");
            if !m.is_symmetric() {
                return Err(invalid(r, "matrix is not symmetric"));
            }
            match crate::goeritz::is_negative_definite(&m) {
                Ok(true) => {}
                _ => return Err(invalid(r, "matrix is not negative definite")),
            }
            determinant_u64(&m).map_err(|e| invalid(r, e.to_string()))?
        }
    };
    if actual != declared {
        return Err(invalid(r, format!("declared determinant {declared}, presentation has {actual}")));
    }
    Ok(())
}

pub fn resolve_dtable(r: &KnotRecord) -> Result<DTable> {
    match &r.presentation {
        Presentation::Unavailable => Err(Error::PresentationUnavailable(r.name.clone())),
        Presentation::Lens { p, q, orientation } => d_table_lens(&LensSpace::new(*p, *q, *orientation)?),
        Presentation::WhiteGraph { graph, ordering } => d_table_from_goeritz(&graph_to_goeritz(graph, ordering.as_deref())?),
        other => {
            let m = form_matrix(other)?.expect("form");
            d_table_from_goeritz(&GoeritzForm::new(m)?)
        }
    }
}

/// Orders `8_13 < 9_14 < 10_10 < 10_102`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn key(s: &str) -> Vec<(u8, u64, String)> {
        s.split('_')
            .map(|part| match part.parse::<u64>() {
                Ok(n) => (0, n, String::new()),
                Err(_) => (1, 0, part.to_string()),
            })
            .collect()
    }
    key(a).cmp(&key(b)).then_with(|| a.cmp(b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnotOutcome {
    pub name: String,
    #[serde(default)]
    pub determinant: Option<u64>,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRecord>,
    #[serde(default)]
    pub spin_nonzero: bool,
    #[serde(default)]
    pub searches: Vec<TypeSearch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl KnotOutcome {
    pub fn from_report(r: &ObstructionReport, timing: bool) -> Self {
        let (reason, witness) = match &r.verdict {
            Verdict::Obstructed => (None, None),
            Verdict::Inconclusive(w) => (None, Some(w.record())),
            Verdict::Unsupported(why) => (Some(why.clone()), None),
        };
        KnotOutcome {
            name: r.knot.clone(),
            determinant: Some(r.determinant),
            verdict: r.verdict.label().to_string(),
            reason,
            witness,
            spin_nonzero: r.spin_nonzero,
            searches: r.searches.clone(),
            elapsed_ms: timing.then_some(r.elapsed.as_secs_f64() * 1e3),
        }
    }

    fn error(r: &KnotRecord, e: &Error) -> Self {
        KnotOutcome {
            name: r.name.clone(),
            determinant: r.determinant,
            verdict: "error".to_string(),
            reason: Some(e.to_string()),
            witness: None,
            spin_nonzero: false,
            searches: Vec::new(),
            elapsed_ms: None,
        }
    }

    pub fn subgroups_examined(&self) -> u64 {
        self.searches.iter().map(|s| s.subgroups_examined).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub tool_version: String,
    pub database_checksum: String,
    pub order: u32,
    pub knots: Vec<KnotOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct BatchOptions {
    pub search: SearchOptions,
    pub timing: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions { search: SearchOptions::default(), timing: true }
    }
}

/// Resolves and searches every record. Per-knot failures are recorded in the
/// report; knots appear in natural name order.
pub fn batch_report(db: &KnotDb, knots: &[&KnotRecord], order: u32, opts: &BatchOptions) -> BatchReport {
    let start = Instant::now();
    let mut outcomes: Vec<KnotOutcome> = knots
        .par_iter()
        .map(|r| run_one(r, order, opts))
        .collect();
    outcomes.sort_by(|a, b| natural_cmp(&a.name, &b.name));
    BatchReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        database_checksum: db.checksum.clone(),
        order,
        knots: outcomes,
        elapsed_ms: opts.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    }
}

fn run_one(r: &KnotRecord, order: u32, opts: &BatchOptions) -> KnotOutcome {
    let start = Instant::now();
    match resolve_dtable(r) {
        Ok(t) => {
            let mut rep = obstruct_order(&r.name, &t, order, &opts.search);
            rep.elapsed = start.elapsed();
            KnotOutcome::from_report(&rep, opts.timing)
        }
        Err(e) => KnotOutcome::error(r, &e),
    }
}
