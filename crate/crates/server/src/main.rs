use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use archex_core::config::{validate_bundle, ConfigBundle};
use archex_core::query::ConnectionRef;
use archex_core::synth::{self, SynthOptions};
use archex_core::{Engine, EngineError, Scope};
use archex_server::api::{parse_key, ApiError, QueryParams, Snapshot};
use archex_server::{http, AppState};
use clap::{Args, Parser, Subcommand};

/// Exit statuses. Stable; scripts may rely on them.
#[derive(Debug, Clone, Copy)]
enum Status {
    /// Configuration loaded but has error-severity findings.
    Invalid = 1,
    /// Bad command line (clap's own status).
    Usage = 2,
    /// Configuration files missing or unparseable.
    Config = 3,
    /// Corpus files missing or unparseable.
    Corpus = 4,
    /// The query was rejected.
    Query = 5,
    /// Writing output, binding a port, or serving failed.
    Io = 6,
}

struct Failure(Status, String);

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Invalid(report) => Failure(Status::Invalid, report.to_string()),
            EngineError::Config(e) => Failure(Status::Config, e.to_string()),
            EngineError::Catalog(e) => Failure(Status::Config, e.to_string()),
            EngineError::Corpus(e) => Failure(Status::Corpus, e.to_string()),
        }
    }
}

impl From<ApiError> for Failure {
    fn from(e: ApiError) -> Self {
        let detail = e.detail.as_ref().map(|d| format!(" {d}")).unwrap_or_default();
        Failure(Status::Query, format!("{e}{detail}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(Status::Io, e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "archex", version, about = "Explore entities extracted from JSON archival transcripts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration bundle and print every finding.
    Validate {
        #[arg(env = "ARCHEX_CONFIG")]
        config: PathBuf,
    },
    /// Build the catalogs and print record and row counts.
    Ingest {
        #[arg(env = "ARCHEX_CONFIG")]
        config: PathBuf,
        #[arg(env = "ARCHEX_DATA")]
        data: PathBuf,
        /// Print the counts as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run one table query or grouping offline, printing what the HTTP API would return.
    Query(QueryArgs),
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "ARCHEX_CONFIG")]
        config: PathBuf,
        #[arg(long, env = "ARCHEX_DATA")]
        data: PathBuf,
        #[arg(long, env = "ARCHEX_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "ARCHEX_BIND", default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
        /// Enable POST /api/admin/reload.
        #[arg(long, env = "ARCHEX_ADMIN")]
        admin: bool,
        /// Allowed CORS origin; repeatable. Default: any origin.
        #[arg(long = "cors-origin", env = "ARCHEX_CORS_ORIGIN", value_delimiter = ',')]
        cors_origins: Vec<String>,
    },
    /// Write a synthetic configuration bundle and corpus.
    Gen {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        sources: usize,
        #[arg(long, default_value_t = 600)]
        records: usize,
        #[arg(long, default_value_t = 180)]
        persons_per_record: usize,
        /// Probability that an optional field is missing, null, or blank.
        #[arg(long, default_value_t = 0.1)]
        missing_rate: f64,
        /// Probability that a crew entry repeats an earlier person.
        #[arg(long, default_value_t = 0.03)]
        repeat_rate: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, env = "ARCHEX_CONFIG")]
    config: PathBuf,
    #[arg(long, env = "ARCHEX_DATA")]
    data: PathBuf,
    /// Source type id; omit together with --global.
    #[arg(long, conflicts_with = "global", required_unless_present = "global")]
    source: Option<String>,
    /// Query the cross-source view.
    #[arg(long)]
    global: bool,
    #[arg(long)]
    category: String,
    /// Entity key (JSON array) whose connection to list; needs --connection.
    #[arg(long, requires = "connection", conflicts_with = "global")]
    entity: Option<String>,
    #[arg(long, requires = "entity")]
    connection: Option<String>,
    /// JSON array of {column, op, value}.
    #[arg(long)]
    filters: Option<String>,
    #[arg(long)]
    sort: Option<String>,
    /// asc or desc.
    #[arg(long, requires = "sort")]
    order: Option<String>,
    #[arg(long)]
    offset: Option<String>,
    #[arg(long)]
    limit: Option<String>,
    #[arg(long)]
    record: Option<String>,
    /// Group by this column instead of listing rows.
    #[arg(long)]
    group_by: Option<String>,
    /// Print CSV (the full filtered result) instead of JSON.
    #[arg(long)]
    csv: bool,
}

fn load(config: &Path, data: &Path) -> Result<Engine, Failure> {
    let engine = Engine::load(config, data)?;
    for w in &engine.load_warnings {
        tracing::warn!(path = %w.path.display(), "{}", w.message);
    }
    for w in &engine.build_warnings {
        tracing::warn!(source = %w.source_type_id, record = %w.record_id, locator = %w.locator, "{}", w.message);
    }
    Ok(engine)
}

fn validate(config: &Path) -> Result<(), Failure> {
    let bundle = ConfigBundle::load(config).map_err(|e| Failure(Status::Config, e.to_string()))?;
    let report = validate_bundle(&bundle);
    println!("{report}");
    if report.is_usable() {
        Ok(())
    } else {
        Err(Failure(Status::Invalid, format!("{} error(s)", report.errors())))
    }
}

fn ingest(config: &Path, data: &Path, json: bool) -> Result<(), Failure> {
    let snap = Snapshot::new(load(config, data)?, 1);
    let mut out = std::io::stdout().lock();
    if json {
        writeln!(out, "{}", snap.summary())?;
        return Ok(());
    }
    let catalogs = &snap.engine.catalogs;
    writeln!(
        out,
        "{} sources, {} records",
        catalogs.sources.len(),
        snap.engine.corpus.total_records()
    )?;
    for (id, src) in &catalogs.sources {
        writeln!(out, "{id}: {} records", src.record_ids.len())?;
        for cat in &src.categories {
            writeln!(out, "  {}: {} rows", cat.table.name, cat.table.rows.len())?;
        }
    }
    for g in &catalogs.global.categories {
        writeln!(out, "all/{}: {} rows", g.table.name, g.table.rows.len())?;
    }
    Ok(())
}

fn query(a: QueryArgs) -> Result<(), Failure> {
    let snap = Snapshot::new(load(&a.config, &a.data)?, 1);
    let params = QueryParams {
        filters: a.filters,
        sort: a.sort,
        order: a.order,
        offset: a.offset,
        limit: a.limit,
        record: a.record,
        column: a.group_by.clone(),
    };
    let scope = match a.source {
        Some(s) if !a.global => Scope::Source(s),
        _ => Scope::Global,
    };
    let connection = match (a.entity, a.connection) {
        (Some(k), Some(label)) => Some(ConnectionRef { key: parse_key(&k)?, label }),
        _ => None,
    };
    let q = params.to_query(scope, &a.category, connection)?;
    let mut out = std::io::stdout().lock();
    match (a.group_by.as_deref(), a.csv) {
        (None, false) => writeln!(out, "{}", snap.rows(&q)?)?,
        (None, true) => out.write_all(&snap.rows_csv(&q)?)?,
        (Some(c), false) => writeln!(out, "{}", snap.group_by(&q, c)?)?,
        (Some(c), true) => out.write_all(&snap.group_by_csv(&q, c)?)?,
    }
    Ok(())
}

fn serve(
    config: &Path,
    data: &Path,
    addr: SocketAddr,
    admin: bool,
    cors_origins: &[String],
) -> Result<(), Failure> {
    let state = Arc::new(AppState::new(load(config, data)?, admin));
    let app = http::router(state).layer(http::cors(cors_origins));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { config } => validate(&config),
        Command::Ingest { config, data, json } => ingest(&config, &data, json),
        Command::Query(a) => query(a),
        Command::Serve { config, data, port, bind, admin, cors_origins } => {
            serve(&config, &data, SocketAddr::new(bind, port), admin, &cors_origins)
        }
        Command::Gen { seed, sources, records, persons_per_record, missing_rate, repeat_rate, out } => {
            for (name, rate) in [("missing-rate", missing_rate), ("repeat-rate", repeat_rate)] {
                if !(0.0..=1.0).contains(&rate) {
                    return Err(Failure(Status::Usage, format!("--{name} must be within [0, 1]")));
                }
            }
            let opts = SynthOptions { seed, sources, records, persons_per_record, missing_rate, repeat_rate };
            let summary = synth::generate(&opts, &out)?;
            println!(
                "wrote {} sources, {} records, {} crew entries to {}",
                summary.sources,
                summary.records,
                summary.crew_entries,
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(status, message)) => {
            eprintln!("archex: {message}");
            ExitCode::from(status as u8)
        }
    }
}
