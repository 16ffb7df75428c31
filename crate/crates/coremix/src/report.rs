//! Text rendering of the run report.

use std::path::Path;

use coremix_core::RunReport;

fn rate(value: Option<f64>) -> String {
    value.map(|r| format!("{r:.2}%")).unwrap_or_else(|| "-".into())
}

/// Renders the report as stable key/value text.
pub fn render_report(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "status: {}\n",
        if report.complete { "complete" } else { "incomplete" }
    ));
    out.push_str(&format!("records: {}\n", report.totals.records));
    out.push_str(&format!("generated: {}\n", report.totals.generated));
    out.push_str(&format!("accepted: {}\n", report.totals.accepted));
    out.push_str(&format!("discarded: {}\n", report.totals.discarded));
    out.push_str(&format!("failures: {}\n", report.totals.failures));
    out.push_str(&format!("discard_rate: {}\n", rate(report.totals.discard_rate)));
    out.push_str(&format!(
        "augmentation_overhead: {}\n",
        report
            .augmentation_overhead
            .map(|v| format!("{v:.1}%"))
            .unwrap_or_else(|| "-".into())
    ));
    out.push('\n');
    for class in &report.classes {
        out.push_str(&format!(
            "class {}: n_k={} tau={:.6} generated={} accepted={} discarded={} failures={} discard_rate={}\n",
            class.class_name,
            class.n_k.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
            class.tau,
            class.generated,
            class.accepted,
            class.discarded,
            class.failures,
            rate(class.discard_rate),
        ));
    }
    out.push('\n');
    let timings = [
        ("scan", report.timings.scan),
        ("thresholds", report.timings.thresholds),
        ("generation", report.timings.generation),
        ("mixing", report.timings.mixing),
        ("io", report.timings.io),
    ];
    for (phase, duration) in timings {
        out.push_str(&format!("phase {phase}: {:.3}s\n", duration.as_secs_f64()));
    }
    out
}

pub fn write_report(report: &RunReport, path: &Path) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, render_report(report))
}
