//! Plain-text rendering of evaluation and ablation reports.
//!
//! Significance markers follow F1 values: `+` for p < 0.01, `*` for
//! p < 0.05. Labels without gold samples in a segment print as `N.A.`.

use std::fmt::Write;

use crate::classifier::WeightReport;
use crate::corpus::{CauseLabel, InputSwitch};
use crate::eval::{AblationReport, EvalReport, Metrics, Significance};

const NA: &str = "N.A.";

fn num(x: f64) -> String {
    format!("{x:.3}")
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    /// Row indices preceded by a separator line.
    breaks: Vec<usize>,
    /// Leading columns aligned left; the rest are right-aligned.
    left: usize,
}

impl Table {
    fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            breaks: Vec::new(),
            left: 1,
        }
    }

    fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) {
        self.rows.push(cells.into_iter().map(Into::into).collect());
    }

    fn rule(&mut self) {
        self.breaks.push(self.rows.len());
    }

    fn render(&self) -> String {
        let cols = self.header.len();
        let mut widths = vec![0; cols];
        for r in std::iter::once(&self.header).chain(&self.rows) {
            for (i, cell) in r.iter().enumerate().take(cols) {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let mut s = String::new();
            for (i, w) in widths.iter().enumerate() {
                let cell = cells.get(i).map_or("", String::as_str);
                let sep = if i == 0 { "" } else { "  " };
                if i < self.left {
                    let _ = write!(s, "{sep}{cell:<w$}");
                } else {
                    let _ = write!(s, "{sep}{cell:>w$}");
                }
            }
            s.trim_end().to_string() + "\n"
        };
        let total: usize = widths.iter().sum::<usize>() + 2 * (cols - 1);
        let mut out = line(&self.header);
        out.push_str(&"-".repeat(total));
        out.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 && self.breaks.contains(&i) {
                out.push_str("- ".repeat(total.div_ceil(2)).trim_end());
                out.push('\n');
            }
            out.push_str(&line(r));
        }
        out
    }
}

fn short_names() -> impl Iterator<Item = &'static str> {
    CauseLabel::TASK.iter().map(|l| l.short_name())
}

fn summary_table(rows: &[(&str, &Metrics, Option<&Significance>)]) -> String {
    let mut t = Table::new(["", "Precision", "Recall", "F1", "wP", "wR", "wF1", "Acc"]);
    for (i, (name, m, sig)) in rows.iter().enumerate() {
        if i == 2 {
            t.rule();
        }
        let marker = sig.map_or("", |s| s.macro_f1.marker());
        t.row([
            name.to_string(),
            num(m.macro_precision),
            num(m.macro_recall),
            format!("{}{marker}", num(m.macro_f1)),
            num(m.weighted_precision),
            num(m.weighted_recall),
            num(m.weighted_f1),
            num(m.accuracy),
        ]);
    }
    t.render()
}

fn label_f1_table(rows: &[(&str, &Metrics, Option<&Significance>)]) -> String {
    let mut t = Table::new(std::iter::once("").chain(short_names()));
    for (i, (name, m, sig)) in rows.iter().enumerate() {
        if i == 2 {
            t.rule();
        }
        let mut cells = vec![name.to_string()];
        for (k, c) in m.per_class.iter().enumerate() {
            let marker = sig.map_or("", |s| s.per_class_f1[k].marker());
            cells.push(format!("{}{marker}", num(c.f1)));
        }
        t.row(cells);
    }
    t.render()
}

fn confusion_table(m: &Metrics) -> String {
    let mut t = Table::new(std::iter::once("Gold \\ Predict").chain(short_names()));
    for (k, label) in CauseLabel::TASK.iter().enumerate() {
        t.row(std::iter::once(label.display_name().to_string()).chain(m.confusion[k].iter().map(|v| v.to_string())));
    }
    t.render()
}

fn segment_row(name: &str, m: &Metrics) -> Vec<String> {
    let mut cells = vec![name.to_string()];
    for c in &m.per_class {
        cells.push(if c.zero_support { NA.to_string() } else { num(c.f1) });
    }
    cells.push(num(m.weighted_f1));
    cells
}

/// One table per modality pair in the shape of the per-input-type F1
/// tables: a row per model, then the gold sample counts. `total` is the
/// support-weighted F1.
fn segment_tables(models: &[(&str, &EvalReport)]) -> String {
    let mut out = String::new();
    for switch in InputSwitch::ALL {
        let _ = writeln!(out, "{} ({switch})", switch.description());
        let segs: Vec<Option<&Metrics>> = models
            .iter()
            .map(|(_, r)| r.segments.iter().find(|s| s.switch == switch).map(|s| &s.metrics))
            .collect();
        let Some(first) = segs.iter().flatten().next() else {
            let _ = writeln!(out, "  no records: {NA}\n");
            continue;
        };
        let mut t = Table::new(std::iter::once("").chain(short_names()).chain(["total"]));
        for ((name, _), seg) in models.iter().zip(&segs) {
            match seg {
                Some(m) => t.row(segment_row(name, m)),
                None => t.row(std::iter::once(name.to_string()).chain(std::iter::repeat_n(NA.to_string(), 5))),
            }
        }
        t.rule();
        let mut counts = vec!["# samples".to_string()];
        for c in &first.per_class {
            counts.push(if c.zero_support {
                NA.to_string()
            } else {
                c.support.to_string()
            });
        }
        counts.push(first.total.to_string());
        t.row(counts);
        out.push_str(&t.render());
        out.push('\n');
    }
    out
}

/// Top and bottom `n` median weights per class.
pub fn render_weights(weights: &WeightReport, n: usize) -> String {
    let mut t = Table::new(["Label", "Feature", "Weight"]);
    t.left = 2;
    for (i, cw) in weights.classes.iter().enumerate() {
        if i > 0 {
            t.rule();
        }
        let top = cw.top(n);
        // Avoid listing a feature twice when the class has fewer than 2n.
        let skip = (top.len() + cw.bottom(n).len()).saturating_sub(cw.weights.len());
        let bottom = &cw.bottom(n)[skip..];
        for (j, w) in top.iter().chain(bottom).enumerate() {
            let label = if j == 0 { cw.label.display_name() } else { "" };
            t.row([label.to_string(), w.feature.clone(), format!("{:.2}", w.weight)]);
        }
    }
    format!(
        "Median feature weights over {} models\n{}",
        weights.n_models,
        t.render()
    )
}

/// Text rendering of a single cross-validation report.
pub fn render_eval(report: &EvalReport, name: &str, top_n: usize) -> String {
    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{name}: {} records, {} features, families [{}], {}-fold, seed {}",
        c.n_records,
        c.n_features,
        c.families.join(", "),
        c.k,
        c.seed
    );
    let chosen: Vec<String> = report.folds.iter().map(|f| format!("{}", f.selected_c)).collect();
    let _ = writeln!(out, "selected C per fold: {}\n", chosen.join(" "));
    let row = [(name, &report.pooled, report.significance.as_ref())];
    out.push_str("Overall (macro P/R/F1; weighted wP/wR/wF1)\n");
    out.push_str(&summary_table(&row));
    out.push_str("\nF1 per label\n");
    out.push_str(&label_f1_table(&row));
    out.push_str("\nConfusion matrix\n");
    out.push_str(&confusion_table(&report.pooled));
    out.push_str("\nF1 per label by input type\n");
    out.push_str(&segment_tables(&[(name, report)]));
    out.push_str(&render_weights(&report.weights, top_n));
    out
}

/// Text rendering of an ablation run: overall scores, per-label F1,
/// confusion matrices, input-type breakdown and the weights of the
/// all-families model.
pub fn render_ablation(ablation: &AblationReport, top_n: usize) -> String {
    let rows: Vec<(&str, &Metrics, Option<&Significance>)> = ablation
        .rows
        .iter()
        .map(|r| (r.name.as_str(), &r.report.pooled, r.report.significance.as_ref()))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "Ablation over {} shared folds", ablation.folds.k);
    for r in &ablation.rows {
        let _ = writeln!(out, "  {}: [{}]", r.name, r.families.join(", "));
    }
    out.push_str("\nOverall (macro P/R/F1; weighted wP/wR/wF1)\n");
    out.push_str(&summary_table(&rows));
    out.push_str("\nF1 per label\n");
    out.push_str(&label_f1_table(&rows));
    for r in ablation.rows.iter().take(2) {
        let _ = writeln!(out, "\nConfusion matrix: {}", r.name);
        out.push_str(&confusion_table(&r.report.pooled));
    }
    out.push_str("\nF1 per label by input type\n");
    let models: Vec<(&str, &EvalReport)> = ablation.rows.iter().map(|r| (r.name.as_str(), &r.report)).collect();
    out.push_str(&segment_tables(&models));
    if let Some(r) = ablation.rows.get(1) {
        let _ = writeln!(out, "{}", r.name);
        out.push_str(&render_weights(&r.report.weights, top_n));
    }
    out
}
