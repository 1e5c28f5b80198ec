//! Run reports and their two renderings.

use std::io::Write;

use pcs_core::config::Settings;
use pcs_core::pipeline::{Analysis, ModeComparison, ModePeak, YearRow};
use pcs_core::spectrum::score_to_f64;
use pcs_core::{CorpusStats, DataSource, Mode, PatentId};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunnerUp {
    pub year: i32,
    pub patent_id: PatentId,
    pub top_count: u64,
    pub score: f64,
    pub document_url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LandmarkReport {
    Found {
        patent_id: PatentId,
        year: i32,
        score: f64,
        /// Chance of hitting the landmark by picking a cited patent at random.
        odds: f64,
        document_url: String,
        runner_up_years: Vec<RunnerUp>,
    },
    NoPositivePeak,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub pcs_peak: Option<ModePeak>,
    pub rpys_peak: Option<ModePeak>,
    pub agree: bool,
    pub summary: String,
}

impl Comparison {
    fn from(c: &ModeComparison) -> Self {
        let describe = |label: &str, peak: &Option<ModePeak>| match peak {
            Some(p) => format!("{label} peak {} ({})", p.year, p.patent),
            None => format!("{label} has no positive peak"),
        };
        let verdict = if c.agree { "modes agree" } else { "modes disagree" };
        Self {
            pcs_peak: c.pcs.clone(),
            rpys_peak: c.rpys.clone(),
            agree: c.agree,
            summary: format!(
                "{}; {}; {verdict}",
                describe("PCS", &c.pcs),
                describe("RPYS", &c.rpys)
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timings {
    pub parse_ms: f64,
    pub fetch_ms: f64,
    pub aggregate_ms: f64,
    pub spectrum_ms: f64,
    pub select_ms: f64,
}

/// Everything needed to re-render a run without network access.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub query: String,
    pub mode: Mode,
    pub source: DataSource,
    pub api_snapshot_date: String,
    pub stats: CorpusStats,
    pub spectrum: Vec<YearRow>,
    pub landmark: LandmarkReport,
    pub comparison: Comparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RunReport {
    pub fn new(
        query: String,
        source: DataSource,
        api_snapshot_date: String,
        analysis: &Analysis,
        settings: &Settings,
    ) -> Self {
        let landmark = match &analysis.landmark {
            Ok(l) => LandmarkReport::Found {
                patent_id: l.patent.clone(),
                year: l.year,
                score: score_to_f64(&l.score),
                odds: l.odds,
                document_url: settings.document_url(&l.patent),
                runner_up_years: l
                    .runner_up_years
                    .iter()
                    .map(|p| RunnerUp {
                        year: p.year,
                        patent_id: p.patent.clone(),
                        top_count: p.top_count,
                        score: score_to_f64(&p.score),
                        document_url: settings.document_url(&p.patent),
                    })
                    .collect(),
            },
            Err(_) => LandmarkReport::NoPositivePeak,
        };
        Self {
            query,
            mode: analysis.spectrum.mode,
            source,
            api_snapshot_date,
            stats: analysis.stats,
            spectrum: analysis.year_rows(settings),
            landmark,
            comparison: Comparison::from(&analysis.comparison),
            generated_at: None,
            timings: None,
        }
    }

    pub fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        out.write_all(b"\n")
    }

    /// One CSV row per year, gap years included with empty patent columns.
    pub fn write_table(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "year",
            "c_total",
            "f_value",
            "pcs_value",
            "top_patent_id",
            "top_patent_count",
            "document_url",
        ])?;
        for row in &self.spectrum {
            w.write_record([
                row.year.to_string(),
                row.c_total.to_string(),
                row.f_value.to_string(),
                row.pcs_value.to_string(),
                row.top_patent_id.as_ref().map(ToString::to_string).unwrap_or_default(),
                row.top_patent_count.map(|n| n.to_string()).unwrap_or_default(),
                row.document_url.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()
    }
}
