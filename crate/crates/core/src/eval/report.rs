use std::fmt::Write as _;

use super::protocol::EvalReport;

fn k_label(k: usize) -> String {
    if k == usize::MAX {
        "k=all".to_string()
    } else {
        format!("k={k}")
    }
}

/// Model × k table of mean fold RMSE, then the tuned settings and the
/// hybrid weights.
pub fn format_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<8}", "model");
    for &k in &report.ks {
        let _ = write!(out, " {:>9}", k_label(k));
    }
    let _ = writeln!(out, " {:>9} {:>9}", "tuned", "pooled");
    for series in &report.series {
        let _ = write!(out, "{:<8}", series.model.name());
        for point in &series.points {
            let _ = write!(out, " {:>9.4}", point.score.mean_rmse);
        }
        let _ = writeln!(
            out,
            " {:>9.4} {:>9.4}",
            series.tuned.score.mean_rmse, series.tuned.score.pooled_rmse
        );
    }
    if let Some(hybrid) = &report.hybrid {
        let _ = write!(out, "{:<8}", "HYBRID");
        for _ in &report.ks {
            let _ = write!(out, " {:>9}", "");
        }
        let _ = writeln!(out, " {:>9.4} {:>9.4}", hybrid.score.mean_rmse, hybrid.score.pooled_rmse);
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<8} {:>9} {:>14} {:>12}", "model", "tuned k", "representation", "tuning rmse");
    for choice in &report.tuning.choices {
        let repr = choice
            .embedding
            .map_or("-".to_string(), |p| format!("{}d/{}ep", p.dim, p.epochs));
        let _ = writeln!(out, "{:<8} {:>9} {:>14} {:>12.4}", choice.model.name(), k_label(choice.k), repr, choice.rmse);
    }
    if let Some(hybrid) = &report.tuning.hybrid {
        let _ = writeln!(out, "{:<8} {:>9} {:>14} {:>12.4}", "HYBRID", "", "", hybrid.rmse);
        let _ = writeln!(out);
        let _ = writeln!(out, "weights");
        for w in &hybrid.weights {
            let _ = writeln!(out, "  {:<6} {:.3}", w.model.name(), w.alpha);
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "test pairs: {} ({}); tuning pairs: {}",
        report.test_pairs,
        report
            .fold_pairs
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" + "),
        report.tuning.pairs
    );
    out
}
