//! Aggregated tournament reports in CSV, JSON and Markdown.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{aggregate, PairingAggregate, SessionRecord};
use crate::opponents::Family;
use crate::protocol::Side;
use crate::stats::{anova_oneway, posthoc_pairwise, Anova, PostHoc, DEFAULT_ALPHA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TeamAverage,
    JointUtility,
}

impl Metric {
    fn of(self, r: &SessionRecord) -> f64 {
        match self {
            Metric::TeamAverage => r.team_average,
            Metric::JointUtility => r.joint_utility,
        }
    }

    fn of_aggregate(self, a: &PairingAggregate) -> f64 {
        match self {
            Metric::TeamAverage => a.team_average,
            Metric::JointUtility => a.joint_utility,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

/// Statistical comparison of all team configurations against one opponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub opponent_index: usize,
    pub opponent: String,
    pub metric: Metric,
    /// Group means in team order.
    pub means: Vec<f64>,
    pub anova: Option<Anova>,
    pub posthoc: Option<PostHoc>,
}

impl ColumnStats {
    /// Whether team `team_index` is marked statistically best in this column.
    pub fn is_best(&self, team_index: usize) -> bool {
        self.posthoc
            .as_ref()
            .is_some_and(|p| p.best.get(team_index).copied().unwrap_or(false))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub label: String,
    pub family: Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub teams: Vec<String>,
    pub opponents: Vec<Column>,
    pub aggregates: Vec<PairingAggregate>,
    pub stats: Vec<ColumnStats>,
    pub records: Vec<SessionRecord>,
}

fn column_stats(
    records: &[SessionRecord],
    teams: usize,
    opponent_index: usize,
    metric: Metric,
) -> ColumnStats {
    let groups: Vec<Vec<f64>> = (0..teams)
        .map(|t| {
            records
                .iter()
                .filter(|r| r.team_index == t && r.opponent_index == opponent_index)
                .map(|r| metric.of(r))
                .collect()
        })
        .collect();
    let opponent = records
        .iter()
        .find(|r| r.opponent_index == opponent_index)
        .map(|r| r.opponent.clone())
        .unwrap_or_default();
    let means = groups
        .iter()
        .map(|g| {
            if g.is_empty() {
                0.0
            } else {
                g.iter().sum::<f64>() / g.len() as f64
            }
        })
        .collect();
    ColumnStats {
        opponent_index,
        opponent,
        metric,
        means,
        anova: anova_oneway(&groups).ok(),
        posthoc: posthoc_pairwise(&groups, DEFAULT_ALPHA).ok(),
    }
}

/// Aggregates and per-opponent statistics over a record set.
pub fn build_report(records: &[SessionRecord]) -> Result<Report> {
    let mut records = records.to_vec();
    records.sort_by_key(|r| (r.team_index, r.opponent_index, r.repetition));
    let mut teams: Vec<String> = Vec::new();
    let mut opponents: Vec<Column> = Vec::new();
    for r in &records {
        if teams.len() <= r.team_index {
            teams.resize(r.team_index + 1, String::new());
        }
        teams[r.team_index] = r.team.clone();
        if opponents.len() <= r.opponent_index {
            opponents.resize(
                r.opponent_index + 1,
                Column {
                    label: String::new(),
                    family: Family::Competitive,
                },
            );
        }
        opponents[r.opponent_index] = Column {
            label: r.opponent.clone(),
            family: r.family,
        };
    }
    let aggregates = if records.is_empty() {
        Vec::new()
    } else {
        aggregate(&records)?
    };
    let stats = (0..opponents.len())
        .flat_map(|o| [Metric::TeamAverage, Metric::JointUtility].map(|m| (o, m)))
        .map(|(o, m)| column_stats(&records, teams.len(), o, m))
        .collect();
    Ok(Report {
        teams,
        opponents,
        aggregates,
        stats,
        records,
    })
}

pub const CSV_HEADER: [&str; 18] = [
    "team_index",
    "team",
    "opponent_index",
    "opponent",
    "archetype",
    "family",
    "repetition",
    "seed",
    "initiator",
    "agreement",
    "rounds",
    "actions",
    "member_utilities",
    "opponent_utility",
    "team_average",
    "team_min",
    "team_max",
    "joint_utility",
];

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    team_index: usize,
    team: String,
    opponent_index: usize,
    opponent: String,
    archetype: String,
    family: Family,
    repetition: usize,
    seed: u64,
    initiator: Side,
    agreement: bool,
    rounds: usize,
    actions: usize,
    member_utilities: String,
    opponent_utility: f64,
    team_average: f64,
    team_min: f64,
    team_max: f64,
    joint_utility: f64,
}

impl From<&SessionRecord> for CsvRow {
    fn from(r: &SessionRecord) -> Self {
        CsvRow {
            team_index: r.team_index,
            team: r.team.clone(),
            opponent_index: r.opponent_index,
            opponent: r.opponent.clone(),
            archetype: r.archetype.clone(),
            family: r.family,
            repetition: r.repetition,
            seed: r.seed,
            initiator: r.initiator,
            agreement: r.agreement,
            rounds: r.rounds,
            actions: r.actions,
            member_utilities: r
                .member_utilities
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            opponent_utility: r.opponent_utility,
            team_average: r.team_average,
            team_min: r.team_min,
            team_max: r.team_max,
            joint_utility: r.joint_utility,
        }
    }
}

impl TryFrom<CsvRow> for SessionRecord {
    type Error = Error;

    fn try_from(r: CsvRow) -> Result<Self> {
        let member_utilities = r
            .member_utilities
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad member utility `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SessionRecord {
            team_index: r.team_index,
            team: r.team,
            opponent_index: r.opponent_index,
            opponent: r.opponent,
            archetype: r.archetype,
            family: r.family,
            repetition: r.repetition,
            seed: r.seed,
            initiator: r.initiator,
            agreement: r.agreement,
            rounds: r.rounds,
            actions: r.actions,
            member_utilities,
            opponent_utility: r.opponent_utility,
            team_average: r.team_average,
            team_min: r.team_min,
            team_max: r.team_max,
            joint_utility: r.joint_utility,
        })
    }
}

/// One CSV row per session, header always present.
pub fn write_records_csv<W: Write>(records: &[SessionRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<SessionRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<CsvRow>()
        .map(|row| SessionRecord::try_from(row?))
        .collect()
}

pub fn load_records_csv(path: &Path) -> Result<Vec<SessionRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_records_csv(file)
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Competitive => "Competitive",
        Family::Matcher => "Matcher",
        Family::Conceder => "Conceder",
    }
}

fn markdown_table(report: &Report, metric: Metric, title: &str, decimals: usize, out: &mut String) {
    let _ = writeln!(out, "## {title}\n");
    let _ = write!(out, "| |");
    for c in &report.opponents {
        let _ = write!(out, " {} |", c.label);
    }
    let _ = write!(out, "\n|---|");
    for _ in &report.opponents {
        let _ = write!(out, "---|");
    }
    let _ = write!(out, "\n| *family* |");
    for c in &report.opponents {
        let _ = write!(out, " *{}* |", family_name(c.family));
    }
    out.push('\n');
    for (ti, team) in report.teams.iter().enumerate() {
        let _ = write!(out, "| {team} |");
        for oi in 0..report.opponents.len() {
            let value = report
                .aggregates
                .iter()
                .find(|a| a.team_index == ti && a.opponent_index == oi)
                .map(|a| metric.of_aggregate(a));
            let best = report
                .stats
                .iter()
                .find(|s| s.opponent_index == oi && s.metric == metric)
                .is_some_and(|s| s.is_best(ti));
            match value {
                Some(v) if best => {
                    let _ = write!(out, " **{v:.decimals$}** |");
                }
                Some(v) => {
                    let _ = write!(out, " {v:.decimals$} |");
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out.push('\n');
}

fn render_markdown(report: &Report) -> String {
    let mut out = String::from("# Tournament report\n\n");
    let sessions = report.records.len();
    let _ = writeln!(
        out,
        "{sessions} sessions. Bold entries are not significantly worse than the best \
         configuration against that opponent (Welch tests, Holm-corrected, alpha = {DEFAULT_ALPHA}).\n"
    );
    markdown_table(
        report,
        Metric::TeamAverage,
        "Average utility of team members",
        2,
        &mut out,
    );
    markdown_table(
        report,
        Metric::JointUtility,
        "Joint utility (product)",
        3,
        &mut out,
    );
    let _ = writeln!(out, "## One-way ANOVA per opponent\n");
    out.push_str("| opponent | metric | F | p |\n|---|---|---|---|\n");
    for s in &report.stats {
        let metric = match s.metric {
            Metric::TeamAverage => "team average",
            Metric::JointUtility => "joint",
        };
        match &s.anova {
            Some(a) => {
                let _ = writeln!(
                    out,
                    "| {} | {metric} | {:.3} | {:.4} |",
                    s.opponent, a.f, a.p
                );
            }
            None => {
                let _ = writeln!(out, "| {} | {metric} | - | - |", s.opponent);
            }
        }
    }
    out
}

pub fn render_report(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_records_csv(&report.records, &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
        Format::Json => Ok(serde_json::to_string_pretty(report)?),
        Format::Markdown => Ok(render_markdown(report)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_tournament, TournamentConfig};

    fn records() -> Vec<SessionRecord> {
        let mut c = TournamentConfig::desk();
        c.tournament.repetitions = 2;
        c.tournament.max_rounds = 40;
        run_tournament(&c).unwrap()
    }

    #[test]
    fn empty_csv_is_header_only() {
        let r = build_report(&[]).unwrap();
        let csv = render_report(&r, Format::Csv).unwrap();
        assert_eq!(csv.trim_end(), CSV_HEADER.join(","));
    }

    #[test]
    fn csv_round_trip() {
        let recs = records();
        let mut buf = Vec::new();
        write_records_csv(&recs, &mut buf).unwrap();
        assert_eq!(read_records_csv(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn json_round_trip() {
        let r = build_report(&records()).unwrap();
        let text = render_report(&r, Format::Json).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn markdown_column_order() {
        let r = build_report(&records()).unwrap();
        let md = render_report(&r, Format::Markdown).unwrap();
        assert!(md.contains("| | Crazy | Haggler | K | TFT | Smith |"));
        assert!(md.contains(
            "| *family* | *Competitive* | *Competitive* | *Competitive* | *Matcher* | *Conceder* |"
        ));
        for team in [
            "FUM B", "FUM VB", "RE K", "SSV B", "SSV VB", "SBV B", "SBV VB",
        ] {
            assert!(md.contains(&format!("| {team} |")));
        }
    }

    #[test]
    fn format_parsing() {
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
        assert_eq!("CSV".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
