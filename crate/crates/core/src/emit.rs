//! CSV, JSON and SVG output for sweep results.
//!
//! Floats are written with the shortest representation that parses back to
//! the same value, so re-running a config gives byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{OutputFormat, ResolvedConfig, RunConfig};
use crate::error::{Error, Result};
use crate::lambda::ThirdOrderSource;
use crate::susceptibility::ChiPath;
use crate::sweep::{FamilyReport, SweepOutput, SweepRecord};

pub const CSV_HEADER: [&str; 10] =
    ["kappa", "n_atoms", "delta_hz", "chi1_re", "chi1_im", "chinl_re", "chinl_im", "chi_re", "chi_im", "n_group"];

fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn row(r: &SweepRecord) -> [String; 10] {
    [
        num(r.kappa),
        r.n_atoms.to_string(),
        num(r.delta_hz),
        num(r.chi1_re),
        num(r.chi1_im),
        num(r.chinl_re),
        num(r.chinl_im),
        num(r.chi_re),
        num(r.chi_im),
        num(r.n_group),
    ]
}

/// Flagged points have `n_group = NaN`; the reason is only kept in the JSON.
pub fn csv_string(records: &[SweepRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for r in records {
        w.write_record(row(r)).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

/// Parses a file written by [`csv_string`]. The `error` field comes back as
/// a generic flag for rows with a NaN group index.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let bad = |m: String| Error::Config(format!("csv: {m}"));
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != CSV_HEADER.len() {
            return Err(bad(format!("row {} has {} fields", line + 1, rec.len())));
        }
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("row {}, {}: {e}", line + 1, CSV_HEADER[i])));
        let n_atoms = rec[1].parse::<u64>().map_err(|e| bad(format!("row {}, n_atoms: {e}", line + 1)))?;
        let n_group = f(9)?;
        out.push(SweepRecord {
            kappa: f(0)?,
            n_atoms,
            delta_hz: f(2)?,
            chi1_re: f(3)?,
            chi1_im: f(4)?,
            chinl_re: f(5)?,
            chinl_im: f(6)?,
            chi_re: f(7)?,
            chi_im: f(8)?,
            n_group,
            error: n_group.is_nan().then(|| "flagged".to_string()),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub chi_path: ChiPath,
    pub third_order: ThirdOrderSource,
    pub photons: f64,
    pub config: RunConfig,
    pub families: Vec<FamilyReport>,
    pub flagged: Vec<FlaggedPoint>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlaggedPoint {
    pub kappa: f64,
    pub n_atoms: u64,
    pub delta_hz: f64,
    pub error: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JsonDocument {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub records: Vec<SweepRecord>,
}

pub fn json_document(out: &SweepOutput, cfg: &ResolvedConfig) -> JsonDocument {
    let flagged = out
        .records
        .iter()
        .filter_map(|r| {
            r.error.as_ref().map(|e| FlaggedPoint { kappa: r.kappa, n_atoms: r.n_atoms, delta_hz: r.delta_hz, error: e.clone() })
        })
        .collect();
    JsonDocument {
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            chi_path: cfg.path,
            third_order: cfg.third_order,
            photons: cfg.photons,
            config: cfg.raw.clone(),
            families: out.families.clone(),
            flagged,
        },
        columns: CSV_HEADER.iter().map(|s| s.to_string()).collect(),
        records: out.records.clone(),
    }
}

/// serde_json writes NaN as `null`, which keeps the document valid JSON.
pub fn json_string(out: &SweepOutput, cfg: &ResolvedConfig) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&json_document(out, cfg)).map_err(|e| Error::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    NGroup,
    Chi1Re,
    Chi1Im,
    ChiNlRe,
    ChiNlIm,
    ChiRe,
    ChiIm,
}

impl Quantity {
    pub const ALL: [Quantity; 7] =
        [Self::NGroup, Self::Chi1Re, Self::Chi1Im, Self::ChiNlRe, Self::ChiNlIm, Self::ChiRe, Self::ChiIm];

    pub fn key(self) -> &'static str {
        match self {
            Self::NGroup => "n_group",
            Self::Chi1Re => "chi1_re",
            Self::Chi1Im => "chi1_im",
            Self::ChiNlRe => "chinl_re",
            Self::ChiNlIm => "chinl_im",
            Self::ChiRe => "chi_re",
            Self::ChiIm => "chi_im",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Self::NGroup => "group index n_g",
            Self::Chi1Re => "Re chi(1)",
            Self::Chi1Im => "Im chi(1)",
            Self::ChiNlRe => "Re chi_nl",
            Self::ChiNlIm => "Im chi_nl",
            Self::ChiRe => "Re chi",
            Self::ChiIm => "Im chi",
        }
    }

    pub fn value(self, r: &SweepRecord) -> f64 {
        match self {
            Self::NGroup => r.n_group,
            Self::Chi1Re => r.chi1_re,
            Self::Chi1Im => r.chi1_im,
            Self::ChiNlRe => r.chinl_re,
            Self::ChiNlIm => r.chinl_im,
            Self::ChiRe => r.chi_re,
            Self::ChiIm => r.chi_im,
        }
    }
}

// dotted, solid, dash-dot, then dashed
const DASHES: [Option<&str>; 4] = [Some("2,3"), None, Some("9,3,2,3"), Some("6,4")];
const COLORS: [&str; 4] = ["#1f4e9c", "#000000", "#b0301c", "#2a7a2a"];

pub struct Series<'a> {
    pub label: String,
    pub records: &'a [SweepRecord],
}

/// A family of curves sharing the detuning axis.
pub struct Chart<'a> {
    pub file_stem: String,
    pub title: String,
    pub series: Vec<Series<'a>>,
}

/// Groups records into charts: for each atom number one chart with a
/// series per kappa, and for each kappa one chart with a series per atom
/// number when more than one was swept.
pub fn chart_groups<'a>(out: &'a SweepOutput, cfg: &ResolvedConfig) -> Vec<Chart<'a>> {
    let per = cfg.delta_grid.len();
    let nk = cfg.raw.kappa.len();
    let nn = cfg.raw.natoms.len();
    let fam = |ik: usize, inn: usize| &out.records[(ik * nn + inn) * per..(ik * nn + inn + 1) * per];
    let eta = if cfg.raw.eta_zero { " (eta = 0)" } else { "" };
    let mut charts = Vec::new();
    for inn in 0..nn {
        let n = cfg.condensates[inn].n_atoms;
        charts.push(Chart {
            file_stem: format!("natoms_{n}"),
            title: format!("N = {n}{eta}"),
            series: (0..nk)
                .map(|ik| Series { label: format!("kappa = {} s^-1", cfg.raw.kappa[ik]), records: fam(ik, inn) })
                .collect(),
        });
    }
    if nn > 1 {
        for ik in 0..nk {
            let k = cfg.raw.kappa[ik];
            charts.push(Chart {
                file_stem: format!("kappa_{k}"),
                title: format!("kappa = {k} s^-1{eta}"),
                series: (0..nn)
                    .map(|inn| Series { label: format!("N = {}", cfg.condensates[inn].n_atoms), records: fam(ik, inn) })
                    .collect(),
            });
        }
    }
    charts
}

const W: f64 = 720.0;
const H: f64 = 440.0;
const ML: f64 = 90.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 60.0;

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&x.abs()) {
        let s = format!("{x:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.3e}")
    }
}

/// Renders one chart. Returns `None` if no series has a finite value.
pub fn render_svg(chart: &Chart, q: Quantity, timestamp: Option<u64>) -> Option<String> {
    let pts: Vec<Vec<(f64, f64)>> = chart
        .series
        .iter()
        .map(|s| s.records.iter().map(|r| (r.delta_hz * 1e-6, q.value(r))).collect())
        .collect();
    let finite = || pts.iter().flatten().filter(|p| p.1.is_finite());
    let (mut ylo, mut yhi) = finite().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if !ylo.is_finite() {
        return None;
    }
    let (xlo, xhi) = finite().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));

    // curves sitting on a large constant are drawn relative to it
    let mut offset = 0.0;
    let mid = 0.5 * (ylo + yhi);
    if mid != 0.0 && (yhi - ylo) < 1e-6 * mid.abs() {
        offset = mid;
        ylo -= offset;
        yhi -= offset;
    }
    if yhi - ylo <= f64::EPSILON * ylo.abs().max(yhi.abs()).max(f64::MIN_POSITIVE) {
        let pad = if ylo == 0.0 { 1.0 } else { 0.1 * ylo.abs() };
        ylo -= pad;
        yhi += pad;
    } else {
        let pad = 0.05 * (yhi - ylo);
        ylo -= pad;
        yhi += pad;
    }
    let (xlo, xhi) = if xhi > xlo { (xlo, xhi) } else { (xlo - 1.0, xhi + 1.0) };
    let sx = |x: f64| ML + (x - xlo) / (xhi - xlo) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - ylo) / (yhi - ylo) * (H - MT - MB);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    if let Some(t) = timestamp {
        let _ = writeln!(s, "<!-- generated at unix time {t} -->");
    }
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{} : {}</text>"#, W / 2.0, q.label(), chart.title);
    let _ = writeln!(
        s,
        r#"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - ML - MR,
        H - MT - MB
    );
    for t in nice_ticks(xlo, xhi) {
        let x = sx(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, H - MB, H - MB + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, H - MB + 18.0, tick_label(t));
    }
    for t in nice_ticks(ylo, yhi) {
        let y = sy(t);
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{ML}" y2="{y:.2}" stroke="black"/>"#, ML - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, ML - 8.0, y + 4.0, tick_label(t));
    }
    if ylo < 0.0 && yhi > 0.0 {
        let y = sy(0.0);
        let _ = writeln!(s, r##"<line x1="{ML}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#aaaaaa" stroke-width="0.5"/>"##, W - MR);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">detuning (MHz)</text>"#, (ML + W - MR) / 2.0, H - 20.0);
    let ylabel = if offset != 0.0 { format!("{} - ({offset:e})", q.label()) } else { q.label().to_string() };
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{ylabel}</text>"#,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    );

    for (i, (series, p)) in chart.series.iter().zip(&pts).enumerate() {
        let dash = DASHES[i % DASHES.len()].map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        let color = COLORS[i % COLORS.len()];
        // NaN points break the line
        let mut d = String::new();
        let mut pen_up = true;
        for &(x, y) in p {
            if !y.is_finite() {
                pen_up = true;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, sx(x), sy(y - offset));
            pen_up = false;
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, d.trim_end());
        let ly = MT + 16.0 + 16.0 * i as f64;
        let lx = W - MR - 170.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>"#, lx + 30.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 36.0, ly + 4.0, series.label);
    }
    s.push_str("</svg>\n");
    Some(s)
}

/// All charts as `(file name, contents)` pairs.
pub fn svg_files(out: &SweepOutput, cfg: &ResolvedConfig, timestamp: Option<u64>) -> Vec<(String, String)> {
    let charts = chart_groups(out, cfg);
    let mut files = Vec::new();
    for q in Quantity::ALL {
        for c in &charts {
            if let Some(svg) = render_svg(c, q, timestamp) {
                files.push((format!("{}_{}.svg", q.key(), c.file_stem), svg));
            }
        }
    }
    files
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes every requested format into `cfg.out`, returning the paths.
pub fn emit(out: &SweepOutput, cfg: &ResolvedConfig) -> Result<Vec<PathBuf>> {
    if out.records.is_empty() {
        return Err(Error::Config("nothing to emit: sweep produced no records".into()));
    }
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let mut written = Vec::new();
    for f in &cfg.formats {
        match f {
            OutputFormat::Csv => {
                let p = cfg.out.join("sweep.csv");
                write(&p, &csv_string(&out.records)?)?;
                written.push(p);
            }
            OutputFormat::Json => {
                let p = cfg.out.join("sweep.json");
                write(&p, &json_string(out, cfg)?)?;
                written.push(p);
            }
            OutputFormat::Svg => {
                let ts = cfg.svg_timestamp.then(|| {
                    std::time::SystemTime::now()
                        .duration_since(std::time::UNIX_EPOCH)
                        .map(|d| d.as_secs())
                        .unwrap_or(0)
                });
                for (name, svg) in svg_files(out, cfg, ts) {
                    let p = cfg.out.join(name);
                    write(&p, &svg)?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::run_sweep;

    fn cfg(points: usize) -> ResolvedConfig {
        RunConfig { points, ..RunConfig::default() }.resolve().unwrap()
    }

    fn record() -> SweepRecord {
        SweepRecord {
            kappa: 0.005,
            n_atoms: 100000000000000,
            delta_hz: -2e7,
            chi1_re: -3.0303030303030303e-5,
            chi1_im: 1.2345678901234567e-19,
            chinl_re: 1.1e-5,
            chinl_im: -0.1,
            chi_re: 0.30000000000000004,
            chi_im: 5e-324,
            n_group: 0.9999847,
            error: None,
        }
    }

    #[test]
    fn one_record_one_row() {
        let s = csv_string(&[record()]).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "kappa,n_atoms,delta_hz,chi1_re,chi1_im,chinl_re,chinl_im,chi_re,chi_im,n_group");
        assert_eq!(lines[1].split(',').count(), 10);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut flagged = record();
        flagged.n_group = f64::NAN;
        flagged.error = Some("flagged".into());
        let recs = vec![record(), flagged];
        let back = parse_csv(&csv_string(&recs).unwrap()).unwrap();
        assert_eq!(back[0], recs[0]);
        assert!(back[1].n_group.is_nan() && back[1].error.is_some());
        assert_eq!(back[1].chi1_re.to_bits(), recs[1].chi1_re.to_bits());
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(parse_csv("a,b\n1,2\n").is_err());
    }

    #[test]
    fn json_has_metadata_and_records() {
        let c = cfg(5);
        let out = run_sweep(&c).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json_string(&out, &c).unwrap()).unwrap();
        assert_eq!(v["metadata"]["chi_path"], "derived");
        assert_eq!(v["metadata"]["version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(v["metadata"]["config"]["points"], 5);
        assert_eq!(v["records"].as_array().unwrap().len(), 15);
        assert_eq!(v["metadata"]["families"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn svg_three_kappa_series() {
        let c = cfg(21);
        let out = run_sweep(&c).unwrap();
        let files = svg_files(&out, &c, None);
        let (_, ng) = files.iter().find(|(n, _)| n == "n_group_natoms_100000000000000.svg").unwrap();
        assert_eq!(ng.matches("<path").count(), 3);
        assert!(ng.contains("stroke-dasharray=\"2,3\"") && ng.contains("stroke-dasharray=\"9,3,2,3\""));
        assert!(!ng.contains("generated at"));
        assert_eq!(files, svg_files(&out, &c, None));
        let stamped = svg_files(&out, &c, Some(7));
        assert!(stamped[0].1.contains("generated at unix time 7"));
    }

    #[test]
    fn emit_writes_files_and_reports_paths() {
        let dir = tempfile::tempdir().unwrap();
        let mut raw = RunConfig { points: 5, ..RunConfig::default() };
        raw.out = dir.path().join("o");
        raw.format = vec![OutputFormat::Csv, OutputFormat::Json];
        let c = raw.resolve().unwrap();
        let out = run_sweep(&c).unwrap();
        let paths = emit(&out, &c).unwrap();
        assert_eq!(paths.len(), 2);
        assert!(paths.iter().all(|p| p.exists()));

        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let mut raw2 = raw.clone();
        raw2.out = blocker.join("sub");
        let err = emit(&out, &raw2.resolve().unwrap()).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
