//! Rubric-based assessment of privacy metrics: a fixed 4×4 grid of scored
//! dimensions, aggregation across evaluators with propagated uncertainty,
//! coarse-to-fine result views, and a radar-chart rendering.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four assessment principles. Each groups four dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Principle {
    Comparability,
    Applicability,
    Interpretability,
    Representativeness,
}

impl Principle {
    pub const ALL: [Principle; 4] = [
        Principle::Comparability,
        Principle::Applicability,
        Principle::Interpretability,
        Principle::Representativeness,
    ];

    /// One-letter code used in dimension identifiers.
    pub fn code(self) -> char {
        match self {
            Principle::Comparability => 'C',
            Principle::Applicability => 'A',
            Principle::Interpretability => 'I',
            Principle::Representativeness => 'R',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Principle::Comparability => "Comparability",
            Principle::Applicability => "Applicability",
            Principle::Interpretability => "Interpretability",
            Principle::Representativeness => "Representativeness",
        }
    }
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The sixteen assessed dimensions, in canonical order: four per principle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum Dimension {
    C1, C2, C3, C4,
    A1, A2, A3, A4,
    I1, I2, I3, I4,
    R1, R2, R3, R4,
}

impl Dimension {
    pub const ALL: [Dimension; 16] = [
        Dimension::C1, Dimension::C2, Dimension::C3, Dimension::C4,
        Dimension::A1, Dimension::A2, Dimension::A3, Dimension::A4,
        Dimension::I1, Dimension::I2, Dimension::I3, Dimension::I4,
        Dimension::R1, Dimension::R2, Dimension::R3, Dimension::R4,
    ];

    /// Position in [`Dimension::ALL`].
    pub fn index(self) -> usize {
        Dimension::ALL.iter().position(|d| *d == self).expect("every dimension is listed")
    }

    pub fn principle(self) -> Principle {
        Principle::ALL[self.index() / 4]
    }

    /// Short identifier such as `"C1"`, as used in score-sheet files.
    pub fn code(self) -> &'static str {
        match self {
            Dimension::C1 => "C1", Dimension::C2 => "C2",
            Dimension::C3 => "C3", Dimension::C4 => "C4",
            Dimension::A1 => "A1", Dimension::A2 => "A2",
            Dimension::A3 => "A3", Dimension::A4 => "A4",
            Dimension::I1 => "I1", Dimension::I2 => "I2",
            Dimension::I3 => "I3", Dimension::I4 => "I4",
            Dimension::R1 => "R1", Dimension::R2 => "R2",
            Dimension::R3 => "R3", Dimension::R4 => "R4",
        }
    }

    /// What the dimension measures.
    pub fn title(self) -> &'static str {
        match self {
            Dimension::C1 => "Scale",
            Dimension::C2 => "Metric bounds",
            Dimension::C3 => "Data type agnostic",
            Dimension::C4 => "Cross-domain relevance",
            Dimension::A1 => "Heterogeneity",
            Dimension::A2 => "Diverse generation methods",
            Dimension::A3 => "Performance",
            Dimension::A4 => "Implementation",
            Dimension::I1 => "Explainability",
            Dimension::I2 => "Understandability",
            Dimension::I3 => "Visualization",
            Dimension::I4 => "Granularity",
            Dimension::R1 => "Anomalies",
            Dimension::R2 => "Coverage",
            Dimension::R3 => "Reproducibility",
            Dimension::R4 => "Precision",
        }
    }

    pub fn from_code(code: &str) -> Result<Dimension> {
        Dimension::ALL
            .into_iter()
            .find(|d| d.code() == code)
            .ok_or_else(|| Error::Sheet(format!("unknown dimension code {code:?}")))
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A single rubric score: one of `1, 1.5, 2, 2.5, 3, 3.5, 4`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Score(f64);

impl Score {
    pub const MIN: f64 = 1.0;
    pub const MAX: f64 = 4.0;

    /// Accepts only values on the half-point grid from 1 to 4.
    pub fn new(value: f64) -> Result<Score> {
        let doubled = value * 2.0;
        if !(2.0..=8.0).contains(&doubled) || doubled.fract() != 0.0 {
            return Err(Error::OffGridScore { dimension: String::new(), value });
        }
        Ok(Score(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A score sheet as read from disk: one evaluator's scores for one metric,
/// keyed by dimension code. Validated into a [`ScoreSheet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawScoreSheet {
    /// Identifier of the metric being assessed.
    pub metric: String,
    /// Identifier of the person who scored it.
    pub evaluator: String,
    /// Dimension code -> score. Must cover exactly the sixteen dimensions.
    pub scores: BTreeMap<String, f64>,
}

impl RawScoreSheet {
    /// Checks completeness and the score grid.
    pub fn validate(&self) -> Result<ScoreSheet> {
        if self.metric.trim().is_empty() {
            return Err(Error::Sheet("sheet has an empty metric name".into()));
        }
        if self.evaluator.trim().is_empty() {
            return Err(Error::Sheet("sheet has an empty evaluator name".into()));
        }
        for code in self.scores.keys() {
            Dimension::from_code(code)?;
        }
        let mut scores = Vec::with_capacity(16);
        for dim in Dimension::ALL {
            let value = *self.scores.get(dim.code()).ok_or_else(|| {
                Error::Sheet(format!("sheet is missing dimension {}", dim.code()))
            })?;
            let score = Score::new(value).map_err(|_| Error::OffGridScore {
                dimension: dim.code().to_string(),
                value,
            })?;
            scores.push(score);
        }
        Ok(ScoreSheet {
            metric: self.metric.clone(),
            evaluator: self.evaluator.clone(),
            scores: scores.try_into().expect("exactly 16 scores were collected"),
        })
    }
}

/// A validated score sheet: sixteen on-grid scores in canonical dimension
/// order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSheet {
    pub metric: String,
    pub evaluator: String,
    pub scores: [Score; 16],
}

impl ScoreSheet {
    pub fn new(
        metric: impl Into<String>,
        evaluator: impl Into<String>,
        scores: [Score; 16],
    ) -> ScoreSheet {
        ScoreSheet { metric: metric.into(), evaluator: evaluator.into(), scores }
    }

    pub fn score(&self, dim: Dimension) -> Score {
        self.scores[dim.index()]
    }
}

/// One evaluator's overall score: the plain mean of the sixteen dimension
/// scores.
pub fn single_evaluator_score(sheet: &ScoreSheet) -> f64 {
    sheet.scores.iter().map(|s| s.value()).sum::<f64>() / 16.0
}

/// Mean and standard error of one dimension across evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionStat {
    pub mean: f64,
    /// Standard error of the mean (sample standard deviation over √m);
    /// `None` with a single evaluator, where spread is unobservable.
    pub stderr: Option<f64>,
}

/// A metric's aggregated assessment across one or more evaluators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub metric: String,
    /// Evaluator identifiers, in the order their sheets were given.
    pub evaluators: Vec<String>,
    /// Per-dimension statistics in canonical dimension order.
    pub dimensions: [DimensionStat; 16],
    /// Mean of the sixteen dimension means.
    pub overall: f64,
    /// `(1/16) · sqrt(Σ stderr_i²)`: the overall standard error under
    /// independent per-dimension errors. `None` with a single evaluator.
    pub overall_stderr: Option<f64>,
}

impl Assessment {
    pub fn dimension(&self, dim: Dimension) -> DimensionStat {
        self.dimensions[dim.index()]
    }
}

/// Aggregates evaluator sheets for one metric.
///
/// Every sheet must assess the same metric and come from a distinct
/// evaluator. Per dimension, the evaluators' scores average into a mean and
/// a standard error of that mean; the overall score is the mean of the
/// dimension means and its error follows by quadrature.
pub fn aggregate(sheets: &[ScoreSheet]) -> Result<Assessment> {
    let Some(first) = sheets.first() else {
        return Err(Error::Sheet("aggregation needs at least one score sheet".into()));
    };
    let mut evaluators = Vec::with_capacity(sheets.len());
    for sheet in sheets {
        if sheet.metric != first.metric {
            return Err(Error::Sheet(format!(
                "sheets assess different metrics: {:?} and {:?}",
                first.metric, sheet.metric
            )));
        }
        if evaluators.contains(&sheet.evaluator) {
            return Err(Error::Sheet(format!(
                "evaluator {:?} appears more than once",
                sheet.evaluator
            )));
        }
        evaluators.push(sheet.evaluator.clone());
    }

    let m = sheets.len();
    let mut dimensions = Vec::with_capacity(16);
    for dim in Dimension::ALL {
        let values: Vec<f64> = sheets.iter().map(|s| s.score(dim).value()).collect();
        let mean = values.iter().sum::<f64>() / m as f64;
        let stderr = if m < 2 {
            None
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            Some((ss / (m as f64 - 1.0)).sqrt() / (m as f64).sqrt())
        };
        dimensions.push(DimensionStat { mean, stderr });
    }
    let dimensions: [DimensionStat; 16] =
        dimensions.try_into().expect("exactly 16 dimensions were aggregated");

    let overall = dimensions.iter().map(|d| d.mean).sum::<f64>() / 16.0;
    let overall_stderr = if m < 2 {
        None
    } else {
        let sum_sq: f64 = dimensions.iter().map(|d| d.stderr.expect("m >= 2").powi(2)).sum();
        Some(sum_sq.sqrt() / 16.0)
    };

    Ok(Assessment {
        metric: first.metric.clone(),
        evaluators,
        dimensions,
        overall,
        overall_stderr,
    })
}

/// Mean and standard error of one principle (its four dimensions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrincipleStat {
    pub principle: Principle,
    pub mean: f64,
    pub stderr: Option<f64>,
}

/// Per-principle statistics: each principle's mean is the mean of its four
/// dimension means, with quadrature error `(1/4) · sqrt(Σ stderr²)`.
pub fn principle_stats(a: &Assessment) -> [PrincipleStat; 4] {
    let mut out = Vec::with_capacity(4);
    for (p, principle) in Principle::ALL.into_iter().enumerate() {
        let dims = &a.dimensions[p * 4..(p + 1) * 4];
        let mean = dims.iter().map(|d| d.mean).sum::<f64>() / 4.0;
        let stderr = if dims.iter().all(|d| d.stderr.is_some()) {
            let sum_sq: f64 = dims.iter().map(|d| d.stderr.unwrap().powi(2)).sum();
            Some(sum_sq.sqrt() / 4.0)
        } else {
            None
        };
        out.push(PrincipleStat { principle, mean, stderr });
    }
    out.try_into().expect("exactly 4 principles")
}

/// Rounds to two decimals with halves away from zero, the convention used
/// in every rendered score.
fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Renders a mean with its uncertainty as `"3.16 ± 0.06"`, two decimals,
/// halves rounding away from zero; without an uncertainty just `"3.16"`.
pub fn render_stat(mean: f64, stderr: Option<f64>) -> String {
    match stderr {
        Some(s) => format!("{:.2} ± {:.2}", round2(mean), round2(s)),
        None => format!("{:.2}", round2(mean)),
    }
}

/// The same assessment at three zoom levels, rendered for display.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GranularityViews {
    pub metric: String,
    /// Single-number summary, e.g. `"3.16 ± 0.06"`.
    pub overall: String,
    /// Principle name -> rendered score, in canonical principle order.
    pub per_principle: Vec<(String, String)>,
    /// Dimension code and title -> rendered score, in canonical order.
    pub per_dimension: Vec<(String, String)>,
}

/// Renders an assessment coarse to fine: one number, four principles,
/// sixteen dimensions.
pub fn granularity_views(a: &Assessment) -> GranularityViews {
    GranularityViews {
        metric: a.metric.clone(),
        overall: render_stat(a.overall, a.overall_stderr),
        per_principle: principle_stats(a)
            .into_iter()
            .map(|p| (p.principle.name().to_string(), render_stat(p.mean, p.stderr)))
            .collect(),
        per_dimension: Dimension::ALL
            .into_iter()
            .map(|d| {
                let stat = a.dimension(d);
                (format!("{} {}", d.code(), d.title()), render_stat(stat.mean, stat.stderr))
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Radar chart
// ---------------------------------------------------------------------------

const RADAR_SIZE: f64 = 600.0;
const RADAR_CENTER: f64 = 300.0;
const RADAR_R_MIN: f64 = 60.0; // radius of score 1
const RADAR_R_MAX: f64 = 250.0; // radius of score 4

/// One radar vertex: a dimension and its mean score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadarPoint {
    pub dimension: Dimension,
    pub value: f64,
}

/// The sixteen dimension means in canonical order, ready to plot.
pub fn radar_points(a: &Assessment) -> [RadarPoint; 16] {
    let points: Vec<RadarPoint> = Dimension::ALL
        .into_iter()
        .map(|dimension| RadarPoint { dimension, value: a.dimension(dimension).mean })
        .collect();
    points.try_into().expect("exactly 16 points")
}

/// Radius of a score on the radar: affine from `[1, 4]` to the ring radii.
fn radar_radius(value: f64) -> f64 {
    RADAR_R_MIN + (value - Score::MIN) / (Score::MAX - Score::MIN) * (RADAR_R_MAX - RADAR_R_MIN)
}

/// Position of dimension `i`'s vertex at a given score. Dimension 0 points
/// straight up; the rest follow clockwise.
fn radar_xy(i: usize, value: f64) -> (f64, f64) {
    let angle = 2.0 * std::f64::consts::PI * (i as f64) / 16.0 - std::f64::consts::FRAC_PI_2;
    let r = radar_radius(value);
    (RADAR_CENTER + r * angle.cos(), RADAR_CENTER + r * angle.sin())
}

/// Renders the assessment as a standalone SVG radar chart: grid rings at
/// whole scores, one spoke per dimension, and the polygon of dimension
/// means. The output is a pure function of the assessment.
pub fn radar_svg(a: &Assessment) -> String {
    use std::fmt::Write;
    let mut svg = String::with_capacity(8 * 1024);
    let _ = write!(
        svg,
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {s} {s}\" ",
            "width=\"{s}\" height=\"{s}\" font-family=\"sans-serif\">\n",
            "<title>{m}</title>\n",
            "<rect width=\"{s}\" height=\"{s}\" fill=\"white\"/>\n"
        ),
        s = RADAR_SIZE,
        m = xml_escape(&a.metric),
    );

    // Concentric rings at scores 1, 2, 3, 4.
    for score in 1..=4 {
        let _ = writeln!(
            svg,
            "<circle cx=\"{c}\" cy=\"{c}\" r=\"{r:.3}\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>",
            c = RADAR_CENTER,
            r = radar_radius(score as f64),
        );
    }
    // One spoke and one label per dimension.
    for (i, dim) in Dimension::ALL.into_iter().enumerate() {
        let (x, y) = radar_xy(i, Score::MAX);
        let _ = writeln!(
            svg,
            "<line x1=\"{c}\" y1=\"{c}\" x2=\"{x:.3}\" y2=\"{y:.3}\" stroke=\"#cccccc\" stroke-width=\"1\"/>",
            c = RADAR_CENTER,
        );
        let angle = 2.0 * std::f64::consts::PI * (i as f64) / 16.0 - std::f64::consts::FRAC_PI_2;
        let lr = RADAR_R_MAX + 22.0;
        let (lx, ly) = (RADAR_CENTER + lr * angle.cos(), RADAR_CENTER + lr * angle.sin());
        let _ = writeln!(
            svg,
            "<text x=\"{lx:.3}\" y=\"{ly:.3}\" font-size=\"14\" text-anchor=\"middle\" dominant-baseline=\"middle\">{code}</text>",
            code = dim.code(),
        );
    }
    // The data polygon.
    let coords: Vec<String> = radar_points(a)
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (x, y) = radar_xy(i, p.value);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(
        svg,
        "<polygon points=\"{}\" fill=\"#4477aa\" fill-opacity=\"0.35\" stroke=\"#4477aa\" stroke-width=\"2\"/>",
        coords.join(" ")
    );
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

// ---------------------------------------------------------------------------
// Bundled score sheets
// ---------------------------------------------------------------------------

/// The score sheets bundled with the crate: two independent evaluators for
/// each of the six privacy metrics this workspace implements. They anchor
/// the regression tests and demonstrate the sheet format.
pub fn bundled_sheets() -> Vec<ScoreSheet> {
    const FILES: [&str; 12] = [
        include_str!("../../../fixtures/dcr_e1.json"),
        include_str!("../../../fixtures/dcr_e2.json"),
        include_str!("../../../fixtures/eps_id_e1.json"),
        include_str!("../../../fixtures/eps_id_e2.json"),
        include_str!("../../../fixtures/t_mia_e1.json"),
        include_str!("../../../fixtures/t_mia_e2.json"),
        include_str!("../../../fixtures/attr_disclosure_e1.json"),
        include_str!("../../../fixtures/attr_disclosure_e2.json"),
        include_str!("../../../fixtures/domias_e1.json"),
        include_str!("../../../fixtures/domias_e2.json"),
        include_str!("../../../fixtures/idr_e1.json"),
        include_str!("../../../fixtures/idr_e2.json"),
    ];
    FILES
        .iter()
        .map(|text| {
            let raw: RawScoreSheet =
                serde_json::from_str(text).expect("bundled sheets are valid JSON");
            raw.validate().expect("bundled sheets are complete and on-grid")
        })
        .collect()
}

/// The bundled sheets for one metric, in evaluator order.
pub fn bundled_sheets_for(metric: &str) -> Vec<ScoreSheet> {
    bundled_sheets().into_iter().filter(|s| s.metric == metric).collect()
}
