//! Privacy evaluation metrics for synthetic tabular data, plus a
//! rubric-based assessment engine for scoring the metrics themselves.
//!
//! The crate has two halves:
//!
//! * **Privacy metrics** — six attack- and similarity-based measures of how
//!   much a synthetic table leaks about the real table it was derived from:
//!   distance to closest record ([`dcr`]), identifiability
//!   ([`epsilon_identifiability`]), a distance-threshold membership
//!   inference attack ([`threshold_mia`]), attribute disclosure
//!   ([`attribute_disclosure`]), a density-ratio membership attack
//!   ([`domias`]), and an identity disclosure rate ([`idr`]). They share a
//!   typed table model, exact nearest-neighbour kernels, and a canonical
//!   JSON report envelope.
//!
//! * **Assessment engine** — a 16-dimension rubric (four principles ×
//!   four dimensions) for scoring evaluation metrics, with single- and
//!   multi-evaluator aggregation, uncertainty propagation, granularity
//!   views and a radar-chart rendering. Scored sheets for the six metrics
//!   above ship with the crate as regression anchors.
//!
//! All computations are deterministic: randomness only enters through
//! explicit seeds, nearest-neighbour scans reduce in a fixed order at any
//! thread count, and reports serialize canonically (sorted keys, fixed
//! number rendering) so identical inputs produce byte-identical output.

pub mod attacks;
pub mod cair;
pub mod dataset;
pub mod disclosure;
pub mod distance;
pub mod error;
pub mod report;
pub mod similarity;

pub use attacks::{
    attribute_disclosure, auroc, domias, kde_fit, threshold_mia, AttackReport,
    AttrDisclosureConfig, AttrDisclosureReport, BandwidthRule, ClassOutcome, DensityModel,
    LevelOutcome, MiaConfig, TauRule,
};
pub use cair::{
    aggregate, bundled_sheets, bundled_sheets_for, granularity_views, principle_stats,
    radar_points, radar_svg, render_stat, single_evaluator_score, Assessment, Dimension,
    DimensionStat, GranularityViews, Principle, PrincipleStat, RadarPoint, RawScoreSheet, Score,
    ScoreSheet,
};
pub use dataset::{
    apply_minmax, column_entropy, load_csv, load_labels_csv, normalize_minmax, random_mixed_table,
    split_membership, write_csv, ColumnDef, ColumnKind, MinMaxParams, Schema, Table, Value,
    DEFAULT_ENTROPY_BINS,
};
pub use disclosure::{
    equivalence_class_sizes, idr, IdrConfig, IdrReport, PopulationModel,
};
pub use distance::{
    inverse_entropy_weights, nn_between, nn_within, record_distance, DistanceKind, DistanceSpec,
    NnDistances, NnEntry, Normalization, WeightProvenance, WeightVector,
};
pub use error::{Error, Result};
pub use report::{
    canonical_json, config_digest, sha256_hex, MetricReport, ReportedValue, ValueBounds,
};
pub use similarity::{
    dcr, epsilon_identifiability, DcrAggregate, DcrReport, EpsIdOrientation, EpsIdReport,
};
