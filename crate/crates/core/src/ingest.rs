//! Line-oriented file formats (qrels, clusters, epochs, runs) and score
//! report serialization.
//!
//! All four input formats are whitespace-separated columns. Blank lines and
//! lines starting with `#` are skipped. Parsers are total: malformed lines
//! become diagnostics and parsing continues.
//!
//! | file     | columns                                   |
//! | -------- | ----------------------------------------- |
//! | qrels    | `profile_id Q0 tweet_id grade`            |
//! | clusters | `profile_id cluster_id tweet_id`          |
//! | epoch    | `tweet_id epoch_seconds`                  |
//! | run      | `profile_id tweet_id push_epoch [runtag]` |

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use serde::Serialize;

use crate::model::{
    ClusterTable, ClusterToken, Epoch, EpochMap, GroundTruth, PairKey, ProfileId, PushRecord, QrelsTable, Run, RunTag,
    SourceNames, TweetId,
};
use crate::report::ScoreReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticKind {
    Malformed,
    Duplicate,
    Conflict,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::Malformed => "malformed",
            DiagnosticKind::Duplicate => "duplicate",
            DiagnosticKind::Conflict => "conflict",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub file: String,
    /// 1-based physical line.
    pub line: usize,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.file, self.line, self.kind, self.message)
    }
}

struct Diagnostics<'a> {
    file: &'a str,
    out: Vec<ParseDiagnostic>,
}

impl<'a> Diagnostics<'a> {
    fn new(file: &'a str) -> Self {
        Self { file, out: Vec::new() }
    }

    fn push(&mut self, line: usize, kind: DiagnosticKind, message: impl Into<String>) {
        self.out.push(ParseDiagnostic {
            file: self.file.to_string(),
            line,
            kind,
            message: message.into(),
        });
    }
}

/// Calls `f(line_number, fields)` for every non-blank, non-comment line.
/// Invalid UTF-8 is replaced rather than rejected; `\r` counts as
/// whitespace.
fn for_each_record<R: BufRead>(mut reader: R, mut f: impl FnMut(usize, Vec<&str>)) -> io::Result<()> {
    let mut buf = Vec::new();
    let mut lineno = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        lineno += 1;
        let text = String::from_utf8_lossy(&buf);
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        f(lineno, trimmed.split_whitespace().collect());
    }
}

fn parse_nonneg(raw: &str) -> Option<i64> {
    raw.parse::<i64>().ok().filter(|v| *v >= 0)
}

/// Parses a qrels file. Conflicting grades for one (profile, tweet) keep
/// the maximum.
pub fn parse_qrels<R: BufRead>(reader: R, source: &str) -> io::Result<(QrelsTable, Vec<ParseDiagnostic>)> {
    let mut diags = Diagnostics::new(source);
    let mut table = QrelsTable::default();
    for_each_record(reader, |line, cols| {
        if cols.len() != 4 {
            diags.push(
                line,
                DiagnosticKind::Malformed,
                format!("expected 4 columns `profile Q0 tweet grade`, found {}", cols.len()),
            );
            return;
        }
        let (Ok(profile), Ok(tweet)) = (ProfileId::new(cols[0]), TweetId::new(cols[2])) else {
            diags.push(line, DiagnosticKind::Malformed, "bad identifier");
            return;
        };
        let Some(grade) = cols[3].parse::<u32>().ok() else {
            diags.push(
                line,
                DiagnosticKind::Malformed,
                format!("grade `{}` is not a non-negative integer", cols[3]),
            );
            return;
        };
        let key = (profile, tweet);
        match table.grades.get(&key).copied() {
            None => {
                table.grades.insert(key.clone(), grade);
                table.lines.insert(key, line);
            }
            Some(prev) if prev == grade => {
                diags.push(
                    line,
                    DiagnosticKind::Duplicate,
                    format!("{} {} judged again with the same grade", key.0, key.1),
                );
            }
            Some(prev) => {
                diags.push(
                    line,
                    DiagnosticKind::Conflict,
                    format!(
                        "{} {} regraded {prev} -> {grade}; keeping {}",
                        key.0,
                        key.1,
                        prev.max(grade)
                    ),
                );
                if grade > prev {
                    table.grades.insert(key.clone(), grade);
                    table.lines.insert(key, line);
                }
            }
        }
    })?;
    Ok((table, diags.out))
}

/// Parses a cluster file. A tweet assigned twice under one profile keeps its
/// first assignment.
pub fn parse_clusters<R: BufRead>(reader: R, source: &str) -> io::Result<(ClusterTable, Vec<ParseDiagnostic>)> {
    let mut diags = Diagnostics::new(source);
    let mut table = ClusterTable::default();
    for_each_record(reader, |line, cols| {
        if cols.len() != 3 {
            diags.push(
                line,
                DiagnosticKind::Malformed,
                format!("expected 3 columns `profile cluster tweet`, found {}", cols.len()),
            );
            return;
        }
        let (Ok(profile), Ok(cluster), Ok(tweet)) = (
            ProfileId::new(cols[0]),
            ClusterToken::new(cols[1]),
            TweetId::new(cols[2]),
        ) else {
            diags.push(line, DiagnosticKind::Malformed, "bad identifier");
            return;
        };
        let key = (profile, tweet);
        if let Some(prev) = table.assignments.get(&key) {
            diags.push(
                line,
                DiagnosticKind::Duplicate,
                format!(
                    "{} {} already in cluster {prev}; ignoring assignment to {cluster}",
                    key.0, key.1
                ),
            );
            return;
        }
        table.assignments.insert(key.clone(), cluster);
        table.lines.insert(key, line);
    })?;
    Ok((table, diags.out))
}

/// Parses an epoch file. Conflicting epochs for one tweet keep the minimum.
pub fn parse_epoch<R: BufRead>(reader: R, source: &str) -> io::Result<(EpochMap, Vec<ParseDiagnostic>)> {
    let mut diags = Diagnostics::new(source);
    let mut map = EpochMap::new();
    for_each_record(reader, |line, cols| {
        if cols.len() != 2 {
            diags.push(
                line,
                DiagnosticKind::Malformed,
                format!("expected 2 columns `tweet epoch`, found {}", cols.len()),
            );
            return;
        }
        let Ok(tweet) = TweetId::new(cols[0]) else {
            diags.push(line, DiagnosticKind::Malformed, "bad tweet id");
            return;
        };
        let Some(epoch) = parse_nonneg(cols[1]) else {
            diags.push(
                line,
                DiagnosticKind::Malformed,
                format!("epoch `{}` is not a non-negative integer", cols[1]),
            );
            return;
        };
        match map.get(&tweet) {
            None => {
                map.insert(tweet, epoch);
            }
            Some(prev) if prev == epoch => {
                diags.push(
                    line,
                    DiagnosticKind::Duplicate,
                    format!("{tweet} listed again with the same epoch"),
                );
            }
            Some(prev) => {
                diags.push(
                    line,
                    DiagnosticKind::Conflict,
                    format!("{tweet} has epochs {prev} and {epoch}; keeping {}", prev.min(epoch)),
                );
                map.insert(tweet, prev.min(epoch));
            }
        }
    })?;
    Ok((map, diags.out))
}

/// Parses a run file. The run tag column is optional; when present it must
/// agree across lines (first tag wins). Repeated (profile, tweet) pushes
/// collapse to the earliest.
pub fn parse_run<R: BufRead>(reader: R, source: &str, default_tag: RunTag) -> io::Result<(Run, Vec<ParseDiagnostic>)> {
    let mut diags = Diagnostics::new(source);
    let mut tag: Option<RunTag> = None;
    let mut pushes: BTreeMap<PairKey, Epoch> = BTreeMap::new();
    for_each_record(reader, |line, cols| {
        if !(3..=4).contains(&cols.len()) {
            diags.push(
                line,
                DiagnosticKind::Malformed,
                format!(
                    "expected `profile tweet push_epoch [runtag]`, found {} columns",
                    cols.len()
                ),
            );
            return;
        }
        let (Ok(profile), Ok(tweet)) = (ProfileId::new(cols[0]), TweetId::new(cols[1])) else {
            diags.push(line, DiagnosticKind::Malformed, "bad identifier");
            return;
        };
        let Some(push_epoch) = parse_nonneg(cols[2]) else {
            diags.push(
                line,
                DiagnosticKind::Malformed,
                format!("push epoch `{}` is not a non-negative integer", cols[2]),
            );
            return;
        };
        if let Some(raw) = cols.get(3) {
            match &tag {
                None => tag = RunTag::new(*raw).ok(),
                Some(t) if t.as_str() == *raw => {}
                Some(t) => diags.push(
                    line,
                    DiagnosticKind::Conflict,
                    format!("run tag `{raw}` differs from `{t}`; keeping `{t}`"),
                ),
            }
        }
        let key = (profile, tweet);
        match pushes.get_mut(&key) {
            None => {
                pushes.insert(key, push_epoch);
            }
            Some(kept) => {
                diags.push(
                    line,
                    DiagnosticKind::Duplicate,
                    format!(
                        "{} {} pushed again at {push_epoch}; keeping earliest push at {}",
                        key.0,
                        key.1,
                        (*kept).min(push_epoch)
                    ),
                );
                *kept = (*kept).min(push_epoch);
            }
        }
    })?;
    let records = pushes
        .into_iter()
        .map(|((profile, tweet), push_epoch)| PushRecord {
            profile,
            tweet,
            push_epoch,
        })
        .collect();
    let run = Run::from_unique(tag.unwrap_or(default_tag), records);
    Ok((run, diags.out))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochConflict {
    pub tweet: TweetId,
    pub kept: Epoch,
    pub ignored: Epoch,
}

/// Union of two epoch maps; the base wins on conflicts.
pub fn merge_epochs(base: &EpochMap, supplement: &EpochMap) -> (EpochMap, Vec<EpochConflict>) {
    let mut out = base.clone();
    let mut conflicts = Vec::new();
    for (tweet, epoch) in supplement.iter() {
        match base.get(tweet) {
            None => {
                out.insert(tweet.clone(), epoch);
            }
            Some(kept) if kept != epoch => conflicts.push(EpochConflict {
                tweet: tweet.clone(),
                kept,
                ignored: epoch,
            }),
            Some(_) => {}
        }
    }
    (out, conflicts)
}

pub fn emit_qrels(table: &QrelsTable) -> String {
    let mut s = String::new();
    for ((p, t), g) in &table.grades {
        let _ = writeln!(s, "{p} Q0 {t} {g}");
    }
    s
}

pub fn emit_clusters(table: &ClusterTable) -> String {
    let mut s = String::new();
    for ((p, t), c) in &table.assignments {
        let _ = writeln!(s, "{p} {c} {t}");
    }
    s
}

pub fn emit_epoch(map: &EpochMap) -> String {
    let mut s = String::new();
    for (t, e) in map.iter() {
        let _ = writeln!(s, "{t} {e}");
    }
    s
}

pub fn emit_run(run: &Run) -> String {
    let mut s = String::new();
    for p in run.pushes() {
        let _ = writeln!(s, "{} {} {} {}", p.profile, p.tweet, p.push_epoch, run.tag);
    }
    s
}

fn open(path: &Path) -> io::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Reads the three ground-truth files.
pub fn load_ground_truth(
    qrels: &Path,
    clusters: &Path,
    epoch: &Path,
) -> io::Result<(GroundTruth, Vec<ParseDiagnostic>)> {
    let qname = qrels.display().to_string();
    let cname = clusters.display().to_string();
    let (q, mut diags) = parse_qrels(open(qrels)?, &qname)?;
    let (c, d) = parse_clusters(open(clusters)?, &cname)?;
    diags.extend(d);
    let (e, d) = parse_epoch(open(epoch)?, &epoch.display().to_string())?;
    diags.extend(d);
    let mut gt = GroundTruth::new(q, c, e);
    gt.sources = SourceNames {
        qrels: Some(qname),
        clusters: Some(cname),
    };
    Ok((gt, diags))
}

pub fn load_epoch(path: &Path) -> io::Result<(EpochMap, Vec<ParseDiagnostic>)> {
    parse_epoch(open(path)?, &path.display().to_string())
}

/// Reads a run file; the file stem is the tag when no line carries one.
pub fn load_run(path: &Path) -> io::Result<(Run, Vec<ParseDiagnostic>)> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().replace(char::is_whitespace, "_"))
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "run".to_string());
    let tag = RunTag::new(stem).expect("sanitized file stem is a valid tag");
    parse_run(open(path)?, &path.display().to_string(), tag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(ReportFormat::Tsv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// Prints a float with six decimals, normalizing negative zero.
pub fn fmt6(x: f64) -> String {
    format!("{:.6}", x + 0.0)
}

pub fn write_report(report: &ScoreReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Tsv => write_report_tsv(report),
        ReportFormat::Json => write_report_json(report),
    }
}

fn write_report_tsv(report: &ScoreReport) -> String {
    let mut s =
        String::from("run\tprofile\twindow\tpushed\tgain\tZ\tpain\tsilent\tEG-0\tEG-1\tEG-p\tnCG-0\tnCG-1\tnCG-p");
    for a in &report.alphas {
        let _ = write!(s, "\tGMP.{:02}", a.hundredths());
    }
    s.push('\n');
    for c in &report.cells {
        let _ = write!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.run,
            c.profile,
            c.window,
            c.pushed,
            c.gain,
            c.z,
            c.pain,
            u8::from(c.silent)
        );
        for v in [c.eg_0, c.eg_1, c.eg_p, c.ncg_0, c.ncg_1, c.ncg_p].iter().chain(&c.gmp) {
            let _ = write!(s, "\t{}", fmt6(*v));
        }
        s.push('\n');
    }
    for p in &report.profiles {
        let _ = writeln!(
            s,
            "#latency\t{}\t{}\t{}\t{}\t{}",
            p.run,
            p.profile,
            p.latency_sum,
            p.clusters_retrieved,
            u8::from(p.no_retrieval)
        );
    }
    for a in &report.aggregates {
        for (k, v) in &a.metrics {
            let _ = writeln!(s, "#aggregate\t{k}\t{}\t{}", a.run, fmt6(*v));
        }
    }
    s
}

/// Pretty JSON with every float written at six decimals.
struct SixDecimals(serde_json::ser::PrettyFormatter<'static>);

macro_rules! forward {
    ($($name:ident $(($arg:ident : $ty:ty))?),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)?) -> io::Result<()> {
                self.0.$name(w $(, $arg)?)
            }
        )*
    };
}

impl serde_json::ser::Formatter for SixDecimals {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt6(value).as_bytes())
    }

    forward!(
        begin_array,
        end_array,
        begin_array_value(first: bool),
        end_array_value,
        begin_object,
        end_object,
        begin_object_key(first: bool),
        begin_object_value,
        end_object_value,
    );
}

fn write_report_json(report: &ScoreReport) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        alphas: Vec<String>,
        cells: &'a [crate::report::CellRow],
        profiles: &'a [crate::report::ProfileLatency],
        aggregates: &'a [crate::report::RunAggregate],
    }
    let doc = Doc {
        alphas: report.alphas.iter().map(|a| a.to_string()).collect(),
        cells: &report.cells,
        profiles: &report.profiles,
        aggregates: &report.aggregates,
    };
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, SixDecimals(serde_json::ser::PrettyFormatter::new()));
    doc.serialize(&mut ser)
        .expect("serializing an in-memory report cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Parses a JSON report produced by [`write_report`].
pub fn read_report_json(text: &str) -> Result<ScoreReport, serde_json::Error> {
    #[derive(serde::Deserialize)]
    struct Doc {
        alphas: Vec<String>,
        cells: Vec<crate::report::CellRow>,
        profiles: Vec<crate::report::ProfileLatency>,
        aggregates: Vec<crate::report::RunAggregate>,
    }
    let doc: Doc = serde_json::from_str(text)?;
    let alphas = doc
        .alphas
        .iter()
        .map(|a| a.parse().map_err(serde::de::Error::custom))
        .collect::<Result<_, serde_json::Error>>()?;
    Ok(ScoreReport {
        alphas,
        cells: doc.cells,
        profiles: doc.profiles,
        aggregates: doc.aggregates,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tag(s: &str) -> RunTag {
        RunTag::new(s).unwrap()
    }

    #[test]
    fn qrels_single_line() {
        let (q, d) = parse_qrels("RTS1 Q0 111 2\n".as_bytes(), "q").unwrap();
        assert!(d.is_empty());
        let j: Vec<_> = q.judgments().collect();
        assert_eq!(j.len(), 1);
        assert_eq!(
            (j[0].profile.as_str(), j[0].tweet.as_str(), j[0].grade),
            ("RTS1", "111", 2)
        );
    }

    #[test]
    fn qrels_regrade_keeps_max() {
        let (q, d) = parse_qrels("RTS1 Q0 111 2\nRTS1 Q0 111 0".as_bytes(), "q").unwrap();
        assert_eq!(q.judgments().next().unwrap().grade, 2);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Conflict);
        assert_eq!(d[0].line, 2);
    }

    #[test]
    fn qrels_missing_column_is_malformed() {
        let (q, d) = parse_qrels("RTS1 111 2".as_bytes(), "q").unwrap();
        assert!(q.is_empty());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Malformed);
    }

    #[test]
    fn comments_blank_lines_and_carriage_returns() {
        let text = "# header\r\n\r\nRTS1 Q0 111 1\r\n  \nRTS1 Q0 222 0\r";
        let (q, d) = parse_qrels(text.as_bytes(), "q").unwrap();
        assert!(d.is_empty(), "{d:?}");
        assert_eq!(q.len(), 2);
        assert_eq!(q.lines.values().copied().collect::<Vec<_>>(), vec![3, 5]);
    }

    #[test]
    fn clusters_first_assignment_wins() {
        let (c, d) = parse_clusters("RTS1 C1 111\nRTS1 C2 111\n".as_bytes(), "c").unwrap();
        let a: Vec<_> = c.iter().collect();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].cluster.value.as_str(), "C1");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Duplicate);
        assert_eq!(d[0].line, 2);
    }

    #[test]
    fn clusters_empty_stream() {
        let (c, d) = parse_clusters("".as_bytes(), "c").unwrap();
        assert!(c.is_empty() && d.is_empty());
    }

    #[test]
    fn epoch_conflict_keeps_min() {
        let (m, d) = parse_epoch("111 10\n111 12".as_bytes(), "e").unwrap();
        assert_eq!(m.get(&TweetId::new("111").unwrap()), Some(10));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Conflict);

        let (m, d) = parse_epoch("111 1470096000".as_bytes(), "e").unwrap();
        assert_eq!(m.len(), 1);
        assert!(d.is_empty());
    }

    #[test]
    fn epoch_non_integer_is_malformed() {
        let (m, d) = parse_epoch("111 ten".as_bytes(), "e").unwrap();
        assert!(m.is_empty());
        assert_eq!(d[0].kind, DiagnosticKind::Malformed);
        let (m, d) = parse_epoch("111 -5".as_bytes(), "e").unwrap();
        assert!(m.is_empty());
        assert_eq!(d[0].kind, DiagnosticKind::Malformed);
    }

    #[test]
    fn run_with_tag() {
        let (r, d) = parse_run("RTS1 111 1470096012 sysA".as_bytes(), "r", tag("dflt")).unwrap();
        assert!(d.is_empty());
        assert_eq!(r.tag.as_str(), "sysA");
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn run_duplicate_keeps_earliest() {
        let (r, d) = parse_run("RTS1 111 20\nRTS1 111 10\n".as_bytes(), "r", tag("x")).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.pushes()[0].push_epoch, 10);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Duplicate);
    }

    #[test]
    fn run_empty_stream_is_silent_run() {
        let (r, d) = parse_run("".as_bytes(), "r", tag("dflt")).unwrap();
        assert_eq!(r.tag.as_str(), "dflt");
        assert!(r.is_empty());
        assert!(d.is_empty());
    }

    #[test]
    fn run_tag_conflict_first_wins() {
        let (r, d) = parse_run("P 1 5 a\nP 2 6 b\nP 3 7\n".as_bytes(), "r", tag("x")).unwrap();
        assert_eq!(r.tag.as_str(), "a");
        assert_eq!(r.len(), 3);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Conflict);
    }

    #[test]
    fn merge_epochs_base_wins() {
        let t = |s: &str| TweetId::new(s).unwrap();
        let base: EpochMap = [(t("111"), 10)].into_iter().collect();
        let sup: EpochMap = [(t("111"), 12), (t("222"), 20)].into_iter().collect();
        let (m, c) = merge_epochs(&base, &sup);
        assert_eq!(m, [(t("111"), 10), (t("222"), 20)].into_iter().collect());
        assert_eq!(c.len(), 1);

        let (m, c) = merge_epochs(&EpochMap::new(), &base);
        assert_eq!(m, base);
        assert!(c.is_empty());

        let (m, c) = merge_epochs(&sup, &sup);
        assert_eq!(m, sup);
        assert!(c.is_empty());
    }

    #[test]
    fn empty_report_outputs() {
        let r = ScoreReport::default();
        let tsv = write_report(&r, ReportFormat::Tsv);
        assert_eq!(tsv.lines().count(), 1);
        assert!(tsv.starts_with("run\tprofile\twindow"));
        let json = write_report(&r, ReportFormat::Json);
        let back = read_report_json(&json).unwrap();
        assert!(back.cells.is_empty() && back.aggregates.is_empty() && back.profiles.is_empty());
    }
}
