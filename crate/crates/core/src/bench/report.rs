use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use crate::labels::ProcessingMethod;

use super::{AnchorContextStats, BenchError, ConditionStats, CorrelationReport, Result};

fn csv_err(e: csv::Error) -> BenchError {
    BenchError::Io { path: PathBuf::from("<output>"), source: e.into() }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// `metric,method,r,n_pairs` rows per method, then one `AGG` row per metric
/// with an empty pair count.
pub fn write_report_csv(writer: impl Write, reports: &[CorrelationReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "method", "r", "n_pairs"]).map_err(csv_err)?;
    for rep in reports {
        for m in &rep.per_method {
            w.write_record([rep.metric.as_str(), m.method.as_str(), &fmt_opt(m.r), &m.n_pairs.to_string()]).map_err(csv_err)?;
        }
        w.write_record([rep.metric.as_str(), "AGG", &fmt_opt(rep.aggregated_r), ""]).map_err(csv_err)?;
    }
    w.flush().map_err(|source| BenchError::Io { path: PathBuf::from("<output>"), source })
}

/// Every candidate pair with its inclusion status.
pub fn write_audit_csv(writer: impl Write, reports: &[CorrelationReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["metric", "method", "item_id", "condition", "metric_value", "subjective_mean", "status"]).map_err(csv_err)?;
    for rep in reports {
        for a in &rep.audit {
            w.write_record([
                rep.metric.as_str(),
                a.method.as_str(),
                &a.item_id,
                a.condition.as_str(),
                &fmt_opt(a.metric_value),
                &fmt_opt(a.subjective_mean),
                &a.status.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|source| BenchError::Io { path: PathBuf::from("<output>"), source })
}

pub fn write_stats_csv(writer: impl Write, stats: &[ConditionStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cohort", "method", "condition", "item_id", "n", "mean", "ci95_low", "ci95_high", "degenerate"]).map_err(csv_err)?;
    for s in stats {
        let k = &s.key;
        w.write_record([
            k.cohort.map(|c| c.as_str()).unwrap_or(""),
            k.method.map(|m| m.as_str()).unwrap_or(""),
            k.condition.map(|c| c.as_str()).unwrap_or(""),
            k.item_id.as_deref().unwrap_or(""),
            &s.summary.n.to_string(),
            &format!("{:.4}", s.summary.mean),
            &format!("{:.4}", s.summary.ci95_low),
            &format!("{:.4}", s.summary.ci95_high),
            if s.summary.degenerate { "true" } else { "false" },
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| BenchError::Io { path: PathBuf::from("<output>"), source })
}

pub fn write_anchor_context_csv(writer: impl Write, stats: &[AnchorContextStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["cohort", "anchor", "context", "n", "mean", "ci95_low", "ci95_high"]).map_err(csv_err)?;
    for s in stats {
        w.write_record([
            s.cohort.as_str(),
            s.anchor.as_str(),
            &s.context.to_string(),
            &s.summary.n.to_string(),
            &format!("{:.4}", s.summary.mean),
            &format!("{:.4}", s.summary.ci95_low),
            &format!("{:.4}", s.summary.ci95_high),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| BenchError::Io { path: PathBuf::from("<output>"), source })
}

const CELL_W: usize = 72;
const CELL_H: usize = 30;
const LABEL_W: usize = 130;
const HEADER_H: usize = 30;

/// Red for r = 1 through white at 0 to blue at -1.
fn colour(r: f64) -> String {
    let r = r.clamp(-1.0, 1.0);
    let (from, to) = if r >= 0.0 { ((255.0, 255.0, 255.0), (178.0, 24.0, 43.0)) } else { ((255.0, 255.0, 255.0), (33.0, 102.0, 172.0)) };
    let t = r.abs();
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(from.0, to.0), mix(from.1, to.1), mix(from.2, to.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Metrics by rows, the six methods and AGG by columns. Unavailable cells are
/// grey and unlabeled.
pub fn render_heatmap_svg(reports: &[CorrelationReport]) -> String {
    let cols: Vec<&str> = ProcessingMethod::ALL.iter().map(|m| m.as_str()).chain(["AGG"]).collect();
    let width = LABEL_W + CELL_W * cols.len();
    let height = HEADER_H + CELL_H * reports.len();
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#);
    for (j, c) in cols.iter().enumerate() {
        let x = LABEL_W + j * CELL_W + CELL_W / 2;
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle" font-weight="bold">{c}</text>"#, HEADER_H - 10);
    }
    for (i, rep) in reports.iter().enumerate() {
        let y = HEADER_H + i * CELL_H;
        let name = escape(&rep.metric);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{name}</text>"#, LABEL_W - 8, y + CELL_H / 2 + 4);
        let values = rep.per_method.iter().map(|m| m.r).chain([rep.aggregated_r]);
        for (j, (col, v)) in cols.iter().zip(values).enumerate() {
            let x = LABEL_W + j * CELL_W;
            let fill = v.map(colour).unwrap_or_else(|| "#dddddd".into());
            let _ = writeln!(
                s,
                r#"<rect class="cell" data-metric="{name}" data-method="{col}" x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}" stroke="white"/>"#
            );
            if let Some(v) = v {
                let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{v:.2}</text>"#, x + CELL_W / 2, y + CELL_H / 2 + 4);
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{benchmark_all, fixtures::panel, subjective_means, BenchmarkOptions};
    use crate::metrics::MetricScore;

    fn reports() -> Vec<CorrelationReport> {
        let recs = panel(3);
        let mut scores = Vec::new();
        for (k, s) in subjective_means(&recs) {
            scores.push(MetricScore { metric: "ideal".into(), item_id: k.0.clone(), method: k.1, condition: k.2, value: s });
            if k.1 != ProcessingMethod::DE {
                scores.push(MetricScore { metric: "odd".into(), item_id: k.0, method: k.1, condition: k.2, value: (s * 0.37).sin() });
            }
        }
        benchmark_all(&scores, &recs, &BenchmarkOptions::default()).unwrap()
    }

    #[test]
    fn report_csv_layout() {
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &reports()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "metric,method,r,n_pairs");
        assert_eq!(lines.len(), 1 + 2 * 7);
        assert_eq!(lines[1], "ideal,LP,1.000000,20");
        assert!(lines[7].starts_with("ideal,AGG,0.99"));
        assert!(lines[7].ends_with(','));
        assert_eq!(lines[13], "odd,DE,,0");
    }

    #[test]
    fn heatmap_cells() {
        let svg = render_heatmap_svg(&reports());
        assert_eq!(svg.matches(r#"class="cell""#).count(), 14);
        assert_eq!(svg.matches("#dddddd").count(), 1);
        assert_eq!(render_heatmap_svg(&reports()), svg);
    }

    #[test]
    fn colour_scale_ends() {
        assert_eq!(colour(0.0), "#ffffff");
        assert_eq!(colour(1.0), "#b2182b");
        assert_eq!(colour(-1.0), "#2166ac");
    }
}
