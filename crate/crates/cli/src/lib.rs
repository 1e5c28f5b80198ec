//! `pcs`: runs a patent search end to end and reports the citation spectrum
//! and the landmark patent it points at.

pub mod args;
pub mod exit;
pub mod report;

use std::io::Write;
use std::time::Instant;

use pcs_core::aggregate::aggregate;
use pcs_core::cache::{CacheStore, FixtureSet};
use pcs_core::config::Settings;
use pcs_core::pipeline::{Analysis, ModeComparison, Pipeline, PipelineError, SourceRequest};
use pcs_core::spectrum::select_landmark;
use pcs_core::{parse_query, Spectrum};

use args::{CacheAction, Cli, Command, CommonArgs, Format, RunArgs};
use report::{RunReport, Timings};

/// Defaults, then the settings file, then `PCS_*` variables, then flags.
pub fn load_settings(common: &CommonArgs) -> Result<Settings, PipelineError> {
    let mut settings = match &common.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    settings.apply_env(std::env::vars())?;
    if let Some(dir) = &common.cache_dir {
        settings.cache_dir = dir.clone();
    }
    if let Some(dir) = &common.fixture_dir {
        settings.fixture_dir = dir.clone();
    }
    Ok(settings)
}

fn apply_run_flags(settings: &mut Settings, args: &RunArgs) {
    if let Some(url) = &args.base_url {
        settings.base_url = Some(url.clone());
    }
    if let Some(dialect) = &args.dialect {
        settings.dialect = dialect.clone();
    }
    if args.no_cache {
        settings.use_cache = false;
    }
    if let Some(k) = args.top_k {
        settings.top_k = k;
    }
}

fn diagnose(err: &mut dyn Write, class: &str, message: impl std::fmt::Display) {
    let line = message.to_string().replace(['\n', '\r'], " ");
    let _ = writeln!(err, "pcs: error[{class}]: {line}");
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match cli.command {
        Some(Command::Cache { action, common }) => run_cache(action, &common, out, err),
        Some(Command::Fixtures { common }) => run_fixtures(&common, out, err),
        None => run_query(&cli.run, out, err),
    }
}

fn run_query(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let (report, status) = match build_report(args) {
        Ok(r) => r,
        Err(e) => {
            diagnose(err, e.code(), &e);
            return exit::for_error(&e);
        }
    };

    let mut buf = Vec::new();
    let rendered = match args.format {
        Format::Report => report.write_json(&mut buf),
        Format::Table => report.write_table(&mut buf),
    };
    let written = rendered.and_then(|_| match &args.output {
        Some(path) => std::fs::write(path, &buf),
        None => out.write_all(&buf).and_then(|_| out.flush()),
    });
    if let Err(e) = written {
        let target = args.output.as_ref().map_or("stdout".into(), |p| p.display().to_string());
        diagnose(err, "OutputError", format!("cannot write {target}: {e}"));
        return exit::OUTPUT;
    }
    if status != exit::SUCCESS {
        diagnose(err, "NoPositivePeak", "no year has a positive score; report has no landmark");
    }
    status
}

fn build_report(args: &RunArgs) -> Result<(RunReport, u8), PipelineError> {
    let mut settings = load_settings(&args.common)?;
    apply_run_flags(&mut settings, args);

    let t = Instant::now();
    let query = args.query.as_deref().map(parse_query).transpose()?;
    let parse_ms = ms(t);

    let source = match &args.fixture {
        Some(name) => SourceRequest::Fixture(name.clone()),
        None => SourceRequest::Network {
            use_cache: settings.use_cache,
        },
    };
    let pipeline = Pipeline::from_settings(&settings)?;
    let t = Instant::now();
    let acquired = pipeline.acquire(query.as_ref(), &source)?;
    let fetch_ms = ms(t);

    let t = Instant::now();
    let (bins, stats) = aggregate(&acquired.fetch)?;
    let aggregate_ms = ms(t);

    let t = Instant::now();
    let spectrum = Spectrum::from_bins(bins, args.mode)?;
    let spectrum_ms = ms(t);

    let t = Instant::now();
    let landmark = select_landmark(&spectrum, stats.unique_cited_count, settings.top_k);
    let comparison = ModeComparison::of(&spectrum);
    let select_ms = ms(t);

    let status = match &landmark {
        Ok(_) => exit::SUCCESS,
        Err(e) => exit::for_error(&PipelineError::Spectrum(e.clone())),
    };
    let analysis = Analysis {
        stats,
        spectrum,
        landmark,
        comparison,
    };
    let mut report = RunReport::new(
        acquired.query,
        acquired.fetch.source,
        acquired.api_snapshot_date,
        &analysis,
        &settings,
    );
    if !args.deterministic {
        report.generated_at = Some(chrono::Utc::now().to_rfc3339());
        report.timings = Some(Timings {
            parse_ms,
            fetch_ms,
            aggregate_ms,
            spectrum_ms,
            select_ms,
        });
    }
    Ok((report, status))
}

fn run_cache(action: CacheAction, common: &CommonArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let settings = match load_settings(common) {
        Ok(s) => s,
        Err(e) => {
            diagnose(err, e.code(), &e);
            return exit::for_error(&e);
        }
    };
    let store = CacheStore::new(&settings.cache_dir);
    let result = match action {
        CacheAction::List => list_cache(&store, out),
        CacheAction::Clear => store.clear().map_err(PipelineError::from).map(|n| {
            let _ = writeln!(out, "removed {n} entries");
        }),
    };
    match result {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            diagnose(err, e.code(), &e);
            exit::for_error(&e)
        }
    }
}

fn list_cache(store: &CacheStore, out: &mut dyn Write) -> Result<(), PipelineError> {
    for key in store.keys()? {
        let line = match store.get(&key) {
            Ok(Some(entry)) => format!(
                "{key}\t{}\t{}\t{} patents",
                entry.query,
                entry.created_at.format("%Y-%m-%dT%H:%M:%SZ"),
                entry.payload.patents.len()
            ),
            Ok(None) => continue,
            Err(e) => format!("{key}\tunreadable: {e}"),
        };
        let _ = writeln!(out, "{}", line.replace('\n', " "));
    }
    Ok(())
}

fn run_fixtures(common: &CommonArgs, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let settings = match load_settings(common) {
        Ok(s) => s,
        Err(e) => {
            diagnose(err, e.code(), &e);
            return exit::for_error(&e);
        }
    };
    let fixtures = FixtureSet::new(&settings.fixture_dir);
    for name in fixtures.names() {
        let query = fixtures
            .load(&name)
            .map(|e| e.query)
            .unwrap_or_else(|e| format!("unreadable: {e}"));
        let _ = writeln!(out, "{name}\t{query}");
    }
    exit::SUCCESS
}
