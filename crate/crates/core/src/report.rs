//! Machine-readable metric reports.
//!
//! CSV columns, in order: `labels,superpixels,ground_truths,asa,br,cd,src,max_f,best_threshold`.
//! Metrics that do not apply (boundary metrics on volumes, PR columns without
//! a boundary map) are left empty in CSV and `null` in JSON. The last CSV row,
//! labelled `mean`, averages each column over the rows where it is present.
//! JSON output is `{"rows": [...], "mean": {...}}` with the same field names.

use serde::Serialize;

use crate::metrics::{ImageMetrics, PrCurve};

pub const CSV_COLUMNS: [&str; 9] = [
    "labels",
    "superpixels",
    "ground_truths",
    "asa",
    "br",
    "cd",
    "src",
    "max_f",
    "best_threshold",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub labels: String,
    pub superpixels: usize,
    pub ground_truths: usize,
    pub asa: f64,
    pub br: Option<f64>,
    pub cd: Option<f64>,
    pub src: Option<f64>,
    pub max_f: Option<f64>,
    pub best_threshold: Option<f64>,
}

impl MetricsRow {
    pub fn from_metrics(labels: impl Into<String>, m: &ImageMetrics, pr: Option<&PrCurve>) -> Self {
        MetricsRow {
            labels: labels.into(),
            superpixels: m.superpixels,
            ground_truths: m.ground_truths,
            asa: m.asa,
            br: Some(m.br),
            cd: Some(m.cd),
            src: Some(m.src),
            max_f: pr.map(|p| p.max_f),
            best_threshold: pr.map(|p| p.best_threshold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanRow {
    pub superpixels: f64,
    pub asa: f64,
    pub br: Option<f64>,
    pub cd: Option<f64>,
    pub src: Option<f64>,
    pub max_f: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

pub fn mean_row(rows: &[MetricsRow]) -> MeanRow {
    MeanRow {
        superpixels: mean(rows.iter().map(|r| r.superpixels as f64)).unwrap_or(0.0),
        asa: mean(rows.iter().map(|r| r.asa)).unwrap_or(0.0),
        br: mean(rows.iter().filter_map(|r| r.br)),
        cd: mean(rows.iter().filter_map(|r| r.cd)),
        src: mean(rows.iter().filter_map(|r| r.src)),
        max_f: mean(rows.iter().filter_map(|r| r.max_f)),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn to_csv(rows: &[MetricsRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            quote(&r.labels),
            r.superpixels,
            r.ground_truths,
            r.asa,
            opt(r.br),
            opt(r.cd),
            opt(r.src),
            opt(r.max_f),
            opt(r.best_threshold)
        );
    }
    let m = mean_row(rows);
    out += &format!(
        "mean,{},,{},{},{},{},{},\n",
        m.superpixels,
        m.asa,
        opt(m.br),
        opt(m.cd),
        opt(m.src),
        opt(m.max_f)
    );
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    rows: &'a [MetricsRow],
    mean: MeanRow,
}

pub fn to_json(rows: &[MetricsRow]) -> String {
    let report = JsonReport {
        rows,
        mean: mean_row(rows),
    };
    serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<MetricsRow> {
        vec![
            MetricsRow {
                labels: "a.pgm".into(),
                superpixels: 10,
                ground_truths: 2,
                asa: 0.5,
                br: Some(0.25),
                cd: Some(0.125),
                src: Some(1.0),
                max_f: None,
                best_threshold: None,
            },
            MetricsRow {
                labels: "b,c.pgm".into(),
                superpixels: 20,
                ground_truths: 1,
                asa: 1.0,
                br: None,
                cd: None,
                src: None,
                max_f: Some(0.75),
                best_threshold: Some(0.5),
            },
        ]
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&rows());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines[1], "a.pgm,10,2,0.5,0.25,0.125,1,,");
        assert_eq!(lines[2], "\"b,c.pgm\",20,1,1,,,,0.75,0.5");
        assert_eq!(lines[3], "mean,15,,0.75,0.25,0.125,1,0.75,");
    }

    #[test]
    fn json_layout() {
        let v: serde_json::Value = serde_json::from_str(&to_json(&rows())).unwrap();
        assert_eq!(v["rows"][1]["br"], serde_json::Value::Null);
        assert_eq!(v["rows"][1]["max_f"], 0.75);
        assert_eq!(v["mean"]["asa"], 0.75);
    }
}
