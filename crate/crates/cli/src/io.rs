//! Text formats: match files, ground-truth sidecars, the decision-figure
//! CSV, and the optional SVG rendering of the decision figure. Every format
//! starts with a `# format: <name> v1` comment; floats print in their
//! shortest round-trip form.

use std::fmt::Write as _;

use epipolar::pipeline::DecisionFigure;
use epipolar::{FundamentalMatrix, MatchPair};

/// A parse failure with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// One pair per line: `x y x' y'`, whitespace-separated. Blank lines and
/// lines starting with '#' are ignored.
pub fn parse_matches(text: &str) -> Result<Vec<MatchPair>, ParseError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(ParseError {
                line: line_no,
                reason: format!("expected 4 values (x y x' y'), found {}", fields.len()),
            });
        }
        let mut values = [0.0f64; 4];
        for (k, field) in fields.iter().enumerate() {
            values[k] = field.parse().map_err(|_| ParseError {
                line: line_no,
                reason: format!("invalid float {field:?}"),
            })?;
        }
        pairs.push(MatchPair::new(values[0], values[1], values[2], values[3]));
    }
    Ok(pairs)
}

pub fn serialize_matches(pairs: &[MatchPair]) -> String {
    let mut out = String::from("# format: matches v1\n");
    for p in pairs {
        let _ = writeln!(out, "{} {} {} {}", p.left.x, p.left.y, p.right.x, p.right.y);
    }
    out
}

/// Ground-truth sidecar: the fundamental matrix rows followed by one 0/1
/// truth flag per pair.
pub fn serialize_truth(f0: &FundamentalMatrix, truth_mask: &[bool]) -> String {
    let mut out = String::from("# format: truth v1\n");
    out.push_str("# rows 1-3: ground-truth fundamental matrix, row-major\n");
    for r in 0..3 {
        let m = f0.as_matrix();
        let _ = writeln!(out, "{} {} {}", m[(r, 0)], m[(r, 1)], m[(r, 2)]);
    }
    out.push_str("# one flag per pair: 1 = genuine correspondence, 0 = planted outlier\n");
    for &genuine in truth_mask {
        let _ = writeln!(out, "{}", if genuine { 1 } else { 0 });
    }
    out
}

pub fn parse_truth(text: &str) -> Result<(FundamentalMatrix, Vec<bool>), ParseError> {
    let mut matrix_lines: Vec<(usize, &str)> = Vec::new();
    let mut mask = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if matrix_lines.len() < 3 {
            matrix_lines.push((line_no, line));
        } else {
            if !matches!(line, "0" | "1") {
                return Err(ParseError {
                    line: line_no,
                    reason: format!("expected a 0/1 truth flag, found {line:?}"),
                });
            }
            mask.push(line == "1");
        }
    }
    if matrix_lines.len() != 3 {
        return Err(ParseError {
            line: text.lines().count() + 1,
            reason: format!("expected 3 matrix rows, found {}", matrix_lines.len()),
        });
    }
    let joined: String = matrix_lines
        .iter()
        .map(|(_, l)| *l)
        .collect::<Vec<_>>()
        .join("\n");
    let f0 = FundamentalMatrix::from_text(&joined).map_err(|e| match e {
        epipolar::GeometryError::Format { line, reason } => ParseError {
            // Map back to the sidecar's own line numbering.
            line: matrix_lines
                .get(line.saturating_sub(1))
                .map(|(n, _)| *n)
                .unwrap_or(line),
            reason,
        },
        other => ParseError {
            line: matrix_lines[0].0,
            reason: other.to_string(),
        },
    })?;
    Ok((f0, mask))
}

/// Decision-figure CSV: header comments carry d_c, alpha, and the threshold
/// curve constant; one record per point.
pub fn decision_csv(figure: &DecisionFigure) -> String {
    let mut out = String::from("# format: decision-figure v1\n");
    let _ = writeln!(out, "# d_c = {}", figure.d_c);
    let _ = writeln!(out, "# alpha = {}", figure.alpha);
    let _ = writeln!(out, "# curve = {}", figure.curve_constant);
    out.push_str("index,rho,delta,gamma,inlier,parent\n");
    for r in &figure.records {
        let parent = r.nearest_higher.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.index,
            r.rho,
            r.delta,
            r.gamma,
            if r.inlier { 1 } else { 0 },
            parent
        );
    }
    out
}

/// Minimal static SVG scatter of the decision figure: rho on x, delta on y,
/// inliers filled, outliers hollow, plus the threshold curve
/// `rho * delta = alpha * rho_max * delta_max`.
pub fn decision_svg(figure: &DecisionFigure) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const MARGIN: f64 = 48.0;
    let rho_max = figure
        .records
        .iter()
        .map(|r| r.rho)
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let delta_max = figure
        .records
        .iter()
        .map(|r| r.delta)
        .fold(0.0_f64, f64::max)
        .max(1e-9);
    let sx = |rho: f64| MARGIN + (rho / rho_max) * (W - 2.0 * MARGIN);
    let sy = |delta: f64| H - MARGIN - (delta / delta_max) * (H - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(out, "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "  <line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        H - MARGIN,
        W - MARGIN,
        H - MARGIN
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>",
        H - MARGIN
    );
    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\">rho</text>",
        W - MARGIN + 6.0,
        H - MARGIN + 4.0
    );
    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\">delta</text>",
        8.0, MARGIN
    );
    // Threshold curve delta = c / rho, sampled where it crosses the plot.
    if figure.curve_constant > 0.0 {
        let mut path = String::new();
        let steps = 200;
        for k in 0..=steps {
            let rho = rho_max * (0.02 + 0.98 * k as f64 / steps as f64);
            let delta = figure.curve_constant / rho;
            if delta > delta_max {
                continue;
            }
            let cmd = if path.is_empty() { 'M' } else { 'L' };
            let _ = write!(path, "{}{:.2} {:.2} ", cmd, sx(rho), sy(delta));
        }
        if !path.is_empty() {
            let _ = writeln!(
                out,
                "  <path d=\"{}\" fill=\"none\" stroke=\"red\"/>",
                path.trim()
            );
        }
    }
    for r in &figure.records {
        let (fill, stroke) = if r.inlier {
            ("steelblue", "none")
        } else {
            ("none", "gray")
        };
        let _ = writeln!(
            out,
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{fill}\" stroke=\"{stroke}\"/>",
            sx(r.rho as f64),
            sy(r.delta)
        );
    }
    out.push_str("</svg>\n");
    out
}
