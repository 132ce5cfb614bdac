//! CSV and plot-data files. Every file starts with `# ` comment lines that
//! carry the full scenario as JSON.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::{Csi, ReceiverKind};
use crate::error::{invalid, Error, Result};

use super::scenario::{Experiment, Mode, Scenario, SweepVar};

pub const CSV_COLUMNS: [&str; 10] =
    ["sweep_var", "sweep_value", "receiver", "csi", "rate_sim", "rate_ci95", "rate_lb", "asymptote", "mode", "seed"];

pub const BUILD_ID: &str = concat!("fbmc-mimo-", env!("CARGO_PKG_VERSION"));

/// A value that may be unbounded or not defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Value(f64),
    Unbounded,
    Na,
}

impl Bound {
    fn render(self) -> String {
        match self {
            Bound::Value(v) => format!("{v}"),
            Bound::Unbounded => "unbounded".into(),
            Bound::Na => "NA".into(),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "unbounded" => Ok(Bound::Unbounded),
            "NA" => Ok(Bound::Na),
            _ => parse_f64(s).map(Bound::Value),
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Value(v) => Some(v),
            _ => None,
        }
    }
}

/// One line of a result file. For SER experiments `rate_sim` holds the symbol
/// error rate and `rate_ci95` its Wilson half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub receiver: ReceiverKind,
    pub csi: Csi,
    pub rate_sim: f64,
    pub rate_ci95: f64,
    pub rate_lb: Bound,
    pub asymptote: Bound,
    pub mode: Mode,
    pub seed: u64,
}

/// Rows of one scenario (one series entry).
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: Option<String>,
    pub scenario: Scenario,
    pub rows: Vec<ResultRow>,
}

impl Curve {
    pub fn file_stem(&self) -> String {
        match &self.label {
            Some(l) => format!("{}_{}", self.scenario.name, l),
            None => self.scenario.name.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    PlotData,
}

impl Format {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "plotdata" => Ok(Format::PlotData),
            _ => invalid(format!("unknown format '{s}' (expected csv or plotdata)")),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::InvalidParameter(format!("not a number: '{s}'")))
}

fn header(s: &Scenario) -> String {
    let columns = match s.experiment {
        Experiment::Rate => "rate columns are bit/s/Hz sum-rates with training overhead for estimated CSI",
        Experiment::Ser => "rate_sim is the symbol error rate and rate_ci95 its Wilson 95% half-width",
    };
    format!(
        "# scenario: {}\n# build: {BUILD_ID}\n# powers: dB relative to the noise variance (sigma^2 = {}); {columns}\n# trials: {}\n",
        s.to_json(),
        s.noise_var,
        s.trials
    )
}

pub fn csv_string(curve: &Curve) -> Result<String> {
    if curve.rows.is_empty() {
        return invalid("no result rows to write");
    }
    let mut out = header(&curve.scenario);
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for r in &curve.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.sweep_var.name(),
            r.sweep_value,
            r.receiver.name(),
            r.csi.name(),
            r.rate_sim,
            r.rate_ci95,
            r.rate_lb.render(),
            r.asymptote.render(),
            r.mode.name(),
            r.seed
        );
    }
    Ok(out)
}

fn parse_mode(s: &str) -> Result<Mode> {
    match s {
        "analytic" => Ok(Mode::Analytic),
        "waveform" => Ok(Mode::Waveform),
        _ => invalid(format!("unknown mode '{s}'")),
    }
}

/// Inverse of [`csv_string`].
pub fn parse_csv(text: &str) -> Result<(Scenario, Vec<ResultRow>)> {
    let mut scenario = None;
    let mut rows = Vec::new();
    let mut seen_header = false;
    for line in text.lines() {
        if let Some(c) = line.strip_prefix("# ") {
            if let Some(j) = c.strip_prefix("scenario: ") {
                let s: Scenario = serde_json::from_str(j).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                scenario = Some(s);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if !seen_header {
            if f != CSV_COLUMNS {
                return invalid(format!("unexpected CSV header '{line}'"));
            }
            seen_header = true;
            continue;
        }
        if f.len() != CSV_COLUMNS.len() {
            return invalid(format!("expected {} columns, got {}: '{line}'", CSV_COLUMNS.len(), f.len()));
        }
        rows.push(ResultRow {
            sweep_var: SweepVar::from_name(f[0])?,
            sweep_value: parse_f64(f[1])?,
            receiver: ReceiverKind::from_name(f[2])?,
            csi: Csi::from_name(f[3])?,
            rate_sim: parse_f64(f[4])?,
            rate_ci95: parse_f64(f[5])?,
            rate_lb: Bound::parse(f[6])?,
            asymptote: Bound::parse(f[7])?,
            mode: parse_mode(f[8])?,
            seed: f[9].parse().map_err(|_| Error::InvalidParameter(format!("bad seed '{}'", f[9])))?,
        });
    }
    let scenario = scenario.ok_or_else(|| Error::InvalidParameter("missing '# scenario:' header".into()))?;
    Ok((scenario, rows))
}

/// One whitespace-delimited table per receiver: the sweep value followed by
/// sim, ci95, lb and asymptote for each CSI mode.
pub fn plotdata_strings(curve: &Curve) -> Result<Vec<(ReceiverKind, String)>> {
    if curve.rows.is_empty() {
        return invalid("no result rows to write");
    }
    let s = &curve.scenario;
    let mut out = Vec::new();
    for &rx in &s.receivers {
        let mut text = header(s);
        let mut cols = vec![s.sweep.var.name().to_string()];
        for csi in &s.csi {
            for q in ["sim", "ci95", "lb", "asymptote"] {
                cols.push(format!("{}_{}", csi.name(), q));
            }
        }
        let _ = writeln!(text, "# receiver: {}\n# {}", rx.name(), cols.join(" "));
        for &x in &s.sweep.values {
            let mut line = format!("{x}");
            for &csi in &s.csi {
                let r = curve
                    .rows
                    .iter()
                    .find(|r| r.sweep_value == x && r.receiver == rx && r.csi == csi)
                    .ok_or_else(|| Error::InvalidParameter(format!("missing row for {} {}", rx.name(), csi.name())))?;
                let _ = write!(
                    line,
                    " {} {} {} {}",
                    r.rate_sim,
                    r.rate_ci95,
                    r.rate_lb.render(),
                    r.asymptote.render()
                );
            }
            text.push_str(&line);
            text.push('\n');
        }
        out.push((rx, text));
    }
    Ok(out)
}

/// Writes every curve into `dir` and returns the paths written.
pub fn emit(curves: &[Curve], dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    if curves.is_empty() {
        return invalid("no curves to write");
    }
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for c in curves {
        match format {
            Format::Csv => {
                let p = dir.join(format!("{}.csv", c.file_stem()));
                std::fs::write(&p, csv_string(c)?)?;
                paths.push(p);
            }
            Format::PlotData => {
                for (rx, text) in plotdata_strings(c)? {
                    let p = dir.join(format!("{}_{}.dat", c.file_stem(), rx.name()));
                    std::fs::write(&p, text)?;
                    paths.push(p);
                }
            }
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::preset;

    fn curve() -> Curve {
        let s = preset("fig2a").unwrap();
        let rows = vec![
            ResultRow {
                sweep_var: SweepVar::Antennas,
                sweep_value: 16.0,
                receiver: ReceiverKind::Mrc,
                csi: Csi::Perfect,
                rate_sim: 1.0 / 3.0,
                rate_ci95: 1e-3,
                rate_lb: Bound::Value(0.3),
                asymptote: Bound::Unbounded,
                mode: Mode::Analytic,
                seed: 7,
            },
            ResultRow {
                sweep_var: SweepVar::Antennas,
                sweep_value: 16.0,
                receiver: ReceiverKind::Mmse,
                csi: Csi::Imperfect,
                rate_sim: 2.5,
                rate_ci95: 0.01,
                rate_lb: Bound::Na,
                asymptote: Bound::Na,
                mode: Mode::Analytic,
                seed: 7,
            },
        ];
        Curve { label: None, scenario: s, rows }
    }

    #[test]
    fn csv_round_trips() {
        let c = curve();
        let text = csv_string(&c).unwrap();
        let (s, rows) = parse_csv(&text).unwrap();
        assert_eq!(s, c.scenario);
        assert_eq!(rows, c.rows);
        let head = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(head, "sweep_var,sweep_value,receiver,csi,rate_sim,rate_ci95,rate_lb,asymptote,mode,seed");
    }

    #[test]
    fn empty_rows_rejected() {
        let mut c = curve();
        c.rows.clear();
        assert!(csv_string(&c).is_err());
        assert!(plotdata_strings(&c).is_err());
    }

    #[test]
    fn plotdata_has_one_file_per_receiver() {
        let mut c = curve();
        c.scenario.sweep.values = vec![16.0];
        c.scenario.receivers = vec![ReceiverKind::Mrc];
        c.scenario.csi = vec![Csi::Perfect];
        let files = plotdata_strings(&c).unwrap();
        assert_eq!(files.len(), 1);
        let last = files[0].1.lines().last().unwrap();
        assert_eq!(last.split_whitespace().count(), 5);
    }
}
