//! Command surface: spec-file ingestion, the analyze/periodic/skeleton
//! commands, and deterministic machine-readable reports.
//!
//! `analyze` runs the whole pipeline over a family spec and writes five
//! JSON documents plus a plain-text summary into an output directory;
//! `periodic` prints the period-l spectrum at a single parameter value;
//! `skeleton` prints the exact piecewise-linear limit data. Exit codes:
//! 0 on success, 2 when the scale-class bound is violated, 3 when the
//! tracked multipliers contradict the structural classification, 1 for
//! everything else. On failure `analyze` still writes every document,
//! with an error marker in the stage that failed.

mod json;
mod spec;

pub use json::Json;
pub use spec::{load_spec, AnalysisOptions, FamilySpec, MobiusSpec};

use crate::family::{
    fmt_gauss, FamilyError, FamilyMap, GrowthExpr, ParseError, ScaleClass, ScaleKind, Valuation,
};
use crate::nalimit::{
    classify_na, find_invariant_segment, na_limit_map, newton_polygon_root_valuations,
    pl_fixed_points, reduction_map, skeleton_map, type1_projection_prediction, BernoulliData,
    Classification, NaError, NumericContext, PLMap, PiecePosition, ValuedRationalMap,
};
use crate::num::BigComplex;
use crate::ratmap::{ProjPoint, RatMapError};
use crate::scales::{
    count_scale_classes, classify_scale, degeneration_profile, fit_growth_law, fitted_scale,
    periodic_spectrum, track_periodic_points, verify_dichotomy, DichotomyVerdict, FitTolerances,
    GrowthFit, PeriodicTrack, ScalesError,
};
use crate::Rat;
use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("cannot write {path}: {err}")]
    Out { path: String, err: std::io::Error },
    #[error("spec file is not valid JSON: {0}")]
    Spec(#[from] serde_json::Error),
    #[error("{which} coefficient {index}: {err}")]
    BadCoefficient { which: &'static str, index: usize, err: ParseError },
    #[error("conjugation entries must be constants from the coefficient grammar")]
    BadConjugation,
    #[error("n_grid needs at least 6 strictly increasing entries starting at n >= 2")]
    BadGrid,
    #[error("{0}")]
    BadOption(&'static str),
    #[error("every tracked multiplier fit failed the quality gate")]
    NoUsableTracks,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Na(#[from] NaError),
    #[error(transparent)]
    Scales(#[from] ScalesError),
    #[error(transparent)]
    Map(#[from] RatMapError),
}

/// Exit status for an error. Scale-bound violations and classification
/// contradictions get their own codes so scripted callers can tell a
/// mathematical refusal from a plumbing failure.
pub fn exit_code_for(err: &CliError) -> i32 {
    match err {
        CliError::Scales(ScalesError::BoundViolation { .. }) => 2,
        CliError::Scales(ScalesError::InconsistentClassification { .. }) => 3,
        _ => 1,
    }
}

/// Command-line overrides applied on top of the spec's analysis options.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub seed: Option<u64>,
    pub l_max: Option<u32>,
}

fn apply_overrides(mut spec: FamilySpec, ov: &Overrides) -> FamilySpec {
    if let Some(p) = ov.precision {
        spec.analysis.precision = p;
    }
    if let Some(s) = ov.seed {
        spec.analysis.seed = s;
    }
    if let Some(l) = ov.l_max {
        spec.analysis.l_max = l;
    }
    spec
}

fn tolerances(opts: &AnalysisOptions) -> FitTolerances {
    FitTolerances { tol_a: opts.tol_a, tol_b: opts.tol_b, gate: opts.fit_gate }
}

// ---------------------------------------------------------------------------
// analyze

pub fn cmd_analyze(spec_path: &Path, out_dir: &Path) -> i32 {
    cmd_analyze_with(spec_path, out_dir, &Overrides::default())
}

pub fn cmd_analyze_with(spec_path: &Path, out_dir: &Path, ov: &Overrides) -> i32 {
    match run_analyze(spec_path, out_dir, ov) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn run_analyze(spec_path: &Path, out_dir: &Path, ov: &Overrides) -> Result<(), CliError> {
    let spec = apply_overrides(load_spec(spec_path)?, ov);
    let (family, opts) = spec.build()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|err| CliError::Out { path: out_dir.display().to_string(), err })?;
    let mut docs = Docs::new();
    let mut summary = Summary::default();
    let outcome = pipeline(&family, &opts, &mut docs, &mut summary);
    if let Err(e) = &outcome {
        summary.failure = Some(e.to_string());
    }
    docs.report = render_report(spec.name.as_deref(), &family, &opts, &summary);
    docs.write_all(out_dir)?;
    outcome
}

/// The five machine documents plus the text report. All writes happen in
/// one place at the end of the run; documents for stages that never ran
/// keep a "not reached" marker so partial output is always well-formed.
struct Docs {
    epsilon: Json,
    nalimit: Json,
    tracks: Json,
    scales: Json,
    dichotomy: Json,
    report: String,
}

impl Docs {
    fn new() -> Docs {
        Docs {
            epsilon: pending_doc(),
            nalimit: pending_doc(),
            tracks: pending_doc(),
            scales: pending_doc(),
            dichotomy: pending_doc(),
            report: String::new(),
        }
    }

    fn write_all(&self, out_dir: &Path) -> Result<(), CliError> {
        let files = [
            ("epsilon.json", self.epsilon.render()),
            ("nalimit.json", self.nalimit.render()),
            ("tracks.json", self.tracks.render()),
            ("scales.json", self.scales.render()),
            ("dichotomy.json", self.dichotomy.render()),
            ("report.txt", self.report.clone()),
        ];
        for (name, content) in files {
            let path = out_dir.join(name);
            std::fs::write(&path, content)
                .map_err(|err| CliError::Out { path: path.display().to_string(), err })?;
        }
        Ok(())
    }
}

fn pending_doc() -> Json {
    let mut doc = Json::obj();
    doc.push("error", json::str("analysis did not reach this stage"));
    doc
}

fn error_doc(err: &CliError) -> Json {
    let mut doc = Json::obj();
    doc.push("error", json::str(err.to_string()));
    doc
}

/// Everything the text report needs from the stages that completed.
#[derive(Default)]
struct Summary {
    degree: usize,
    fit: Option<GrowthFit>,
    kind: Option<ScaleKind>,
    kappa: Option<Rat>,
    limit: Option<String>,
    classes: Option<Vec<(ScaleKind, usize)>>,
    nontrivial: usize,
    excluded: usize,
    verdict: Option<DichotomyVerdict>,
    failure: Option<String>,
}

fn pipeline(
    family: &FamilyMap,
    opts: &AnalysisOptions,
    docs: &mut Docs,
    summary: &mut Summary,
) -> Result<(), CliError> {
    summary.degree = family.degree();
    let tol = tolerances(opts);

    let eps = match stage_epsilon(family, opts, &tol) {
        Ok(s) => s,
        Err(e) => {
            docs.epsilon = error_doc(&e);
            return Err(e);
        }
    };
    docs.epsilon = eps.doc.clone();
    summary.fit = Some(eps.fit);
    summary.kind = Some(eps.kind.clone());
    summary.kappa = Some(eps.scale.kappa.clone());

    let na = match stage_nalimit(family, opts, &eps) {
        Ok(s) => s,
        Err(e) => {
            docs.nalimit = error_doc(&e);
            return Err(e);
        }
    };
    docs.nalimit = na.doc.clone();
    summary.limit = Some(classification_text(&na.classification));

    let tracked = match stage_tracks(family, opts, &tol) {
        Ok(s) => s,
        Err(e) => {
            docs.tracks = error_doc(&e);
            return Err(e);
        }
    };
    docs.tracks = tracked.doc.clone();
    summary.excluded = tracked.excluded;
    let mut usable: Vec<PeriodicTrack> =
        tracked.tracks.iter().filter(|t| t.class.is_some()).cloned().collect();
    if usable.is_empty() {
        let e = CliError::NoUsableTracks;
        docs.scales = error_doc(&e);
        return Err(e);
    }

    let scales = match stage_scales(&usable, summary.degree, &eps, tracked.excluded, &tol) {
        Ok(s) => s,
        Err(e) => {
            docs.scales = error_doc(&e);
            return Err(e);
        }
    };
    docs.scales = scales.doc.clone();
    summary.classes = Some(scales.classes.clone());
    summary.nontrivial = scales.nontrivial;

    let dicho = match stage_dichotomy(family, opts, &eps, &na.classification, &mut usable, &tol) {
        Ok(s) => s,
        Err(e) => {
            docs.dichotomy = error_doc(&e);
            return Err(e);
        }
    };
    docs.dichotomy = dicho.doc.clone();
    summary.verdict = Some(dicho.verdict);
    Ok(())
}

struct EpsilonStage {
    doc: Json,
    fit: GrowthFit,
    kind: ScaleKind,
    scale: ScaleClass,
}

fn stage_epsilon(
    family: &FamilyMap,
    opts: &AnalysisOptions,
    tol: &FitTolerances,
) -> Result<EpsilonStage, CliError> {
    let profile = degeneration_profile(family, &opts.n_grid, opts.precision)?;
    let pts: Vec<(u64, f64)> =
        profile.iter().map(|(n, r)| (*n, -r.clone().ln().to_f64())).collect();
    let fit = fit_growth_law(&pts);
    let kind = classify_scale(&fit, tol)?;
    let scale = fitted_scale(&fit, &kind);

    let mut grid = Vec::new();
    for ((n, r), (_, y)) in profile.iter().zip(&pts) {
        let eps = {
            let one = rug::Float::with_val(r.prec(), 1);
            (one.clone() / (one - r.clone().ln())).to_f64()
        };
        let mut row = Json::obj();
        row.push("n", Json::Int(*n as i64));
        row.push("res_abs", json::big(r));
        row.push("neg_log_res", json::num(*y));
        row.push("epsilon", json::num(eps));
        grid.push(row);
    }
    let mut doc = Json::obj();
    doc.push("error", Json::Null);
    doc.push("degree", Json::Int(family.degree() as i64));
    doc.push("scale_kind", kind_json(&kind));
    doc.push("kappa", json::rat(&scale.kappa));
    doc.push("kappa_float", json::num(scale.kappa.to_f64()));
    doc.push("fit", fit_json(&fit));
    doc.push("grid", Json::Arr(grid));
    doc.push(
        "note",
        json::str(
            "epsilon_n = 1/(1 - log res_abs(f_n)) for the max-modulus-normalized pair; \
             the fit reads -log res_abs ~ a*n + b*log n + c",
        ),
    );
    Ok(EpsilonStage { doc, fit, kind, scale })
}

struct NaStage {
    doc: Json,
    classification: Classification,
}

fn stage_nalimit(
    family: &FamilyMap,
    opts: &AnalysisOptions,
    eps: &EpsilonStage,
) -> Result<NaStage, CliError> {
    if matches!(eps.kind, ScaleKind::Other { .. }) {
        let mut doc = Json::obj();
        doc.push(
            "error",
            json::str(
                "the fitted degeneration scale is unnamed; exact limit data needs \
                 the trivial, 1/log n, or 1/n scale",
            ),
        );
        return Ok(NaStage { doc, classification: Classification::Unknown });
    }
    let vf = na_limit_map(family, &eps.scale)?;
    let reduction = reduction_map(&vf);
    let ctx = NumericContext {
        n_grid: opts.lyapunov_grid.clone(),
        depth: opts.lyapunov_depth,
        samples: opts.lyapunov_samples,
        seed: opts.seed,
        prec: opts.precision.min(192),
    };
    let classification = classify_na(&vf, Some(&ctx))?;

    let (lo, hi) = val_window(&vf);
    let pl = skeleton_map(&vf, &lo, &hi)?;
    let segment = match &classification {
        Classification::Bernoulli(data) => Some(data.clone()),
        _ => find_invariant_segment(&pl, family.degree()),
    };

    let mut doc = Json::obj();
    doc.push("error", Json::Null);
    doc.push("scale_kind", kind_json(&eps.kind));
    doc.push("kappa", json::rat(&eps.scale.kappa));
    doc.push("numerator", coeffs_json(&vf.p));
    doc.push("denominator", coeffs_json(&vf.q));
    doc.push("res_valuation", json::valuation(&vf.res_valuation));
    doc.push("res_unit", Json::Bool(vf.res_unit));
    let mut red = Json::obj();
    red.push("degree", Json::Int(reduction.degree as i64));
    red.push("numerator", exprs_json(&reduction.p));
    red.push("denominator", exprs_json(&reduction.q));
    doc.push("reduction", red);
    doc.push("fixed_point_polygon", polygon_json(family, &eps.kind));
    doc.push("classification", classification_json(&classification));
    doc.push("lyapunov", match &classification {
        Classification::Expanding { chi, stderr } => {
            let mut l = Json::obj();
            l.push("value", json::num(*chi));
            l.push("stderr", json::num(*stderr));
            l
        }
        _ => Json::Null,
    });
    doc.push("pl_map", pl_map_json(&pl));
    doc.push("bernoulli", match &segment {
        Some(data) => bernoulli_json(data),
        None => Json::Null,
    });
    let mut fixed = Vec::new();
    let mut predictions = Vec::new();
    if let Some(data) = &segment {
        for fp in pl_fixed_points(data) {
            let mut row = Json::obj();
            row.push("x", json::rat(&fp.x));
            row.push("local_degree", Json::Int(fp.local_degree as i64));
            row.push(
                "position",
                json::str(match fp.position {
                    PiecePosition::Endpoint => "endpoint",
                    PiecePosition::Interior => "interior",
                }),
            );
            fixed.push(row);
            for l in 1..=opts.l_max {
                let pred = type1_projection_prediction(data, &fp.x, l)?;
                let mut row = Json::obj();
                row.push("l", Json::Int(l as i64));
                row.push("x", json::rat(&fp.x));
                row.push("count", Json::Int(pred.count as i64));
                row.push("note", json::str(pred.note));
                predictions.push(row);
            }
        }
    }
    doc.push("pl_fixed_points", Json::Arr(fixed));
    doc.push("type1_predictions", Json::Arr(predictions));
    Ok(NaStage { doc, classification })
}

struct TracksStage {
    doc: Json,
    tracks: Vec<PeriodicTrack>,
    excluded: usize,
}

fn stage_tracks(
    family: &FamilyMap,
    opts: &AnalysisOptions,
    tol: &FitTolerances,
) -> Result<TracksStage, CliError> {
    let mut tracks = Vec::new();
    for l in 1..=opts.l_max {
        tracks.extend(track_periodic_points(family, l, &opts.n_grid, opts.precision)?);
    }
    let mut excluded = 0;
    let mut rows = Vec::new();
    for t in &mut tracks {
        let fit_error = match t.annotate(tol) {
            Ok(()) => None,
            Err(e) => {
                excluded += 1;
                Some(e.to_string())
            }
        };
        let mut row = Json::obj();
        row.push("period", Json::Int(t.period as i64));
        row.push("class", match &t.class {
            Some(k) => kind_json(k),
            None => Json::Null,
        });
        row.push("fit", match &t.fit {
            Some(f) => fit_json(f),
            None => Json::Null,
        });
        row.push("fit_error", match fit_error {
            Some(msg) => json::str(msg),
            None => Json::Null,
        });
        let samples = t
            .samples
            .iter()
            .map(|s| {
                let mut sample = Json::obj();
                sample.push("n", Json::Int(s.n as i64));
                sample.push("point", point_json(&s.point));
                sample.push("multiplier", complex_json(&s.multiplier));
                sample.push("lambda", json::num(s.lambda));
                sample
            })
            .collect();
        row.push("samples", Json::Arr(samples));
        rows.push(row);
    }
    let mut doc = Json::obj();
    doc.push("error", Json::Null);
    doc.push("l_max", Json::Int(opts.l_max as i64));
    doc.push("count", Json::Int(rows.len() as i64));
    doc.push("excluded", Json::Int(excluded as i64));
    doc.push("tracks", Json::Arr(rows));
    Ok(TracksStage { doc, tracks, excluded })
}

struct ScalesStage {
    doc: Json,
    classes: Vec<(ScaleKind, usize)>,
    nontrivial: usize,
}

fn stage_scales(
    usable: &[PeriodicTrack],
    degree: usize,
    eps: &EpsilonStage,
    excluded: usize,
    tol: &FitTolerances,
) -> Result<ScalesStage, CliError> {
    let report = count_scale_classes(usable, degree, &eps.kind, tol)?;
    let nontrivial =
        report.classes.iter().filter(|(k, _)| *k != ScaleKind::Trivial).count();
    let mut doc = Json::obj();
    doc.push("error", Json::Null);
    doc.push("degree", Json::Int(degree as i64));
    doc.push("epsilon_class", kind_json(&eps.kind));
    doc.push("kappa", json::rat(&eps.scale.kappa));
    doc.push("class_bound", Json::Int((2 * degree - 2) as i64));
    doc.push("total_bound", Json::Int((2 * degree - 1) as i64));
    let track_classes = report
        .track_classes
        .iter()
        .map(|(period, k)| {
            let mut row = Json::obj();
            row.push("period", Json::Int(*period as i64));
            row.push("class", kind_json(k));
            row
        })
        .collect();
    doc.push("track_classes", Json::Arr(track_classes));
    let classes = report
        .classes
        .iter()
        .map(|(k, count)| {
            let mut row = Json::obj();
            row.push("class", kind_json(k));
            row.push("count", Json::Int(*count as i64));
            row
        })
        .collect();
    doc.push("classes", Json::Arr(classes));
    doc.push("nontrivial_count", Json::Int(nontrivial as i64));
    doc.push("excluded_tracks", Json::Int(excluded as i64));
    doc.push(
        "note",
        json::str(
            "classes are fitted multiplier-growth scales over all tracked periods; \
             the bound caps distinct non-trivial classes at 2d - 2",
        ),
    );
    Ok(ScalesStage { doc, classes: report.classes, nontrivial })
}

struct DichoStage {
    doc: Json,
    verdict: DichotomyVerdict,
}

fn stage_dichotomy(
    family: &FamilyMap,
    opts: &AnalysisOptions,
    eps: &EpsilonStage,
    classification: &Classification,
    usable: &mut [PeriodicTrack],
    tol: &FitTolerances,
) -> Result<DichoStage, CliError> {
    let report = verify_dichotomy(
        family,
        &eps.scale,
        classification,
        usable,
        opts.alpha_fraction,
        tol,
        opts.precision,
    )?;
    let verdict = report.verdict.clone().expect("dichotomy always returns a verdict");
    let mut doc = Json::obj();
    doc.push("error", Json::Null);
    doc.push("branch", json::str(verdict.branch.clone()));
    doc.push("alpha", json::num(verdict.alpha));
    doc.push("consistent", Json::Bool(verdict.consistent));
    let per_period = verdict
        .per_period
        .iter()
        .map(|s| {
            let mut row = Json::obj();
            row.push("period", Json::Int(s.period as i64));
            row.push("expanding_fraction", json::num(s.expanding_fraction));
            row.push("bounded_count", Json::Int(s.bounded_count as i64));
            row.push("bounded_required", Json::Int(s.bounded_required as i64));
            row.push("log_half_count", Json::Int(s.log_half_count as i64));
            row
        })
        .collect();
    doc.push("per_period", Json::Arr(per_period));
    doc.push("note", json::str(report.note.clone()));
    Ok(DichoStage { doc, verdict })
}

// ---------------------------------------------------------------------------
// periodic

pub fn cmd_periodic(spec_path: &Path, n: u64, l: u32) -> i32 {
    cmd_periodic_with(spec_path, n, l, &Overrides::default())
}

pub fn cmd_periodic_with(spec_path: &Path, n: u64, l: u32, ov: &Overrides) -> i32 {
    match run_periodic(spec_path, n, l, ov) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn run_periodic(spec_path: &Path, n: u64, l: u32, ov: &Overrides) -> Result<String, CliError> {
    let spec = apply_overrides(load_spec(spec_path)?, ov);
    let (family, opts) = spec.build()?;
    if n < 2 {
        return Err(CliError::BadOption("n must be at least 2"));
    }
    if !(1..=6).contains(&l) {
        return Err(CliError::BadOption("l must lie in 1..=6"));
    }
    let samples = periodic_spectrum(&family, l, n, opts.precision)?;
    let mut rows: Vec<(Option<BigComplex>, _)> =
        samples.into_iter().map(|s| (s.point.affine(), s)).collect();
    rows.sort_by(|x, y| match (&x.0, &y.0) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(a), Some(b)) => cmp_float(&a.re, &b.re).then_with(|| cmp_float(&a.im, &b.im)),
    });
    let mut out = String::new();
    for (affine, s) in rows {
        match affine {
            Some(z) => {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {}",
                    json::fmt_big(&z.re),
                    json::fmt_big(&z.im),
                    json::fmt_big(&s.multiplier.re),
                    json::fmt_big(&s.multiplier.im),
                    json::fmt_num(s.lambda),
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    "inf {} {} {}",
                    json::fmt_big(&s.multiplier.re),
                    json::fmt_big(&s.multiplier.im),
                    json::fmt_num(s.lambda),
                );
            }
        }
    }
    Ok(out)
}

fn cmp_float(a: &rug::Float, b: &rug::Float) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

// ---------------------------------------------------------------------------
// skeleton

pub fn cmd_skeleton(spec_path: &Path) -> i32 {
    cmd_skeleton_with(spec_path, &Overrides::default())
}

pub fn cmd_skeleton_with(spec_path: &Path, ov: &Overrides) -> i32 {
    match run_skeleton(spec_path, ov) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn run_skeleton(spec_path: &Path, ov: &Overrides) -> Result<String, CliError> {
    let spec = apply_overrides(load_spec(spec_path)?, ov);
    let (family, opts) = spec.build()?;
    let tol = tolerances(&opts);
    let eps = stage_epsilon(&family, &opts, &tol)?;
    if matches!(eps.kind, ScaleKind::Other { .. }) {
        return Err(CliError::BadOption(
            "the fitted degeneration scale is unnamed; skeleton data needs the \
             trivial, 1/log n, or 1/n scale",
        ));
    }
    let vf = na_limit_map(&family, &eps.scale)?;
    let reduction = reduction_map(&vf);
    let classification = classify_na(&vf, None)?;
    let (lo, hi) = val_window(&vf);
    let pl = skeleton_map(&vf, &lo, &hi)?;
    let segment = match &classification {
        Classification::Bernoulli(data) => Some(data.clone()),
        _ => find_invariant_segment(&pl, family.degree()),
    };

    let mut out = String::new();
    if let Some(name) = &spec.name {
        let _ = writeln!(out, "family: {name}");
    }
    let _ = writeln!(
        out,
        "degree {} at scale {} (kappa = {})",
        family.degree(),
        kind_text(&eps.kind),
        eps.scale.kappa,
    );
    let _ = writeln!(out, "reduction degree: {}", reduction.degree);
    let _ = writeln!(out, "pl map on [{lo}, {hi}] in valuation coordinates:");
    for i in 0..pl.slopes.len() {
        let _ = writeln!(
            out,
            "  [{}, {}]: slope {}, S({}) = {}, S({}) = {}",
            pl.breakpoints[i],
            pl.breakpoints[i + 1],
            pl.slopes[i],
            pl.breakpoints[i],
            pl.values[i],
            pl.breakpoints[i + 1],
            pl.values[i + 1],
        );
    }
    match &segment {
        Some(data) => {
            let _ = writeln!(
                out,
                "invariant segment: [{}, {}]",
                data.segment.0, data.segment.1
            );
            for piece in &data.pieces {
                let _ = writeln!(
                    out,
                    "  piece [{}, {}]: slope {}, fixed point {}, local degree {}",
                    piece.lo, piece.hi, piece.slope, piece.fixed_point, piece.local_degree,
                );
            }
            let _ = writeln!(out, "fixed points of the segment map:");
            let fixed = pl_fixed_points(data);
            for fp in &fixed {
                let _ = writeln!(
                    out,
                    "  x = {} ({}), local degree {}",
                    fp.x,
                    match fp.position {
                        PiecePosition::Endpoint => "endpoint",
                        PiecePosition::Interior => "interior",
                    },
                    fp.local_degree,
                );
            }
            let _ = writeln!(out, "projected type-1 periodic point counts:");
            for fp in &fixed {
                for l in 1..=opts.l_max {
                    let pred = type1_projection_prediction(data, &fp.x, l)?;
                    let _ = writeln!(out, "  l = {}, x = {}: {} ({})", l, fp.x, pred.count, pred.note);
                }
            }
        }
        None => match &classification {
            Classification::GoodReduction { center, shift } => {
                let _ = writeln!(out, "no invariant segment; good-reduction shape");
                let shift_text = match shift {
                    Some(g) => format!(" after residue shift by {}", fmt_gauss(g)),
                    None => String::new(),
                };
                let _ = writeln!(
                    out,
                    "  potential good reduction at center valuation {center}{shift_text}"
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    "no invariant segment; structural classification unresolved \
                     (run analyze for the numeric stage)"
                );
            }
        },
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// shared rendering helpers

fn val_window(vf: &ValuedRationalMap) -> (Rat, Rat) {
    let mut big = Rat::new();
    for c in vf.p.iter().chain(vf.q.iter()) {
        if let Some(v) = c.valuation.finite() {
            let a = v.clone().abs();
            if a > big {
                big = a;
            }
        }
    }
    let hi = big + Rat::from(2);
    (-hi.clone(), hi)
}

fn kind_json(kind: &ScaleKind) -> Json {
    match kind {
        ScaleKind::Trivial => json::str("trivial"),
        ScaleKind::InvLogN => json::str("inv_log_n"),
        ScaleKind::InvN => json::str("inv_n"),
        ScaleKind::Other { a, b } => {
            let mut o = Json::obj();
            o.push("a", json::num(*a));
            o.push("b", json::num(*b));
            o
        }
    }
}

fn kind_text(kind: &ScaleKind) -> String {
    match kind {
        ScaleKind::Trivial => "trivial".to_string(),
        ScaleKind::InvLogN => "1/log n".to_string(),
        ScaleKind::InvN => "1/n".to_string(),
        ScaleKind::Other { a, b } => format!("unnamed (a = {a:.4}, b = {b:.4})"),
    }
}

fn fit_json(fit: &GrowthFit) -> Json {
    let mut o = Json::obj();
    o.push("a", json::num(fit.a));
    o.push("b", json::num(fit.b));
    o.push("c", json::num(fit.c));
    o.push("residual", json::num(fit.residual));
    o
}

fn coeffs_json(coeffs: &[crate::nalimit::ValuedCoeff]) -> Json {
    Json::Arr(
        coeffs
            .iter()
            .map(|c| {
                let mut o = Json::obj();
                o.push("valuation", json::valuation(&c.valuation));
                o.push("residue", json::str(c.residue.to_string()));
                o
            })
            .collect(),
    )
}

fn exprs_json(exprs: &[GrowthExpr]) -> Json {
    Json::Arr(exprs.iter().map(|e| json::str(e.to_string())).collect())
}

/// Newton-polygon valuations of the fixed points: the polygon of
/// phi(z) = z1 P - z0 Q at the kappa = 1 representative of the scale.
fn polygon_json(family: &FamilyMap, kind: &ScaleKind) -> Json {
    let d = family.degree();
    let p = family.numerator();
    let q = family.denominator();
    let zero = GrowthExpr::zero();
    let mut exprs = Vec::with_capacity(d + 2);
    for k in 0..=d + 1 {
        let pk = if k <= d { &p[k] } else { &zero };
        let expr = if k == 0 { pk.clone() } else { pk.sub(&q[k - 1]) };
        exprs.push(expr);
    }
    // The polygon only uses finite valuations; zero coefficients sit at
    // +inf and drop out of the hull.
    let unit = ScaleClass::with_kappa(kind.clone(), Rat::from(1));
    let unit_vals: Vec<Valuation> = exprs
        .iter()
        .map(|e| {
            if e.is_zero() {
                Ok(Valuation::PlusInf)
            } else {
                e.valuation(&unit)
            }
        })
        .collect::<Result<_, _>>()
        .unwrap_or_default();
    if unit_vals.is_empty() {
        return Json::Null;
    }
    match newton_polygon_root_valuations(&unit_vals) {
        Ok(slopes) => Json::Arr(
            slopes
                .iter()
                .map(|(v, count)| {
                    let mut o = Json::obj();
                    o.push("valuation", json::rat(v));
                    o.push("count", Json::Int(*count as i64));
                    o
                })
                .collect(),
        ),
        Err(_) => Json::Null,
    }
}

fn classification_json(c: &Classification) -> Json {
    let mut o = Json::obj();
    match c {
        Classification::GoodReduction { center, shift } => {
            o.push("type", json::str("good_reduction"));
            o.push("center", json::rat(center));
            o.push("shift", match shift {
                Some(g) => json::str(fmt_gauss(g)),
                None => Json::Null,
            });
        }
        Classification::Bernoulli(_) => {
            o.push("type", json::str("bernoulli"));
        }
        Classification::Expanding { chi, stderr } => {
            o.push("type", json::str("expanding"));
            o.push("chi", json::num(*chi));
            o.push("stderr", json::num(*stderr));
        }
        Classification::Unknown => {
            o.push("type", json::str("unknown"));
        }
    }
    o
}

fn classification_text(c: &Classification) -> String {
    match c {
        Classification::GoodReduction { center, shift } => {
            let s = match shift {
                Some(g) => format!(" after residue shift by {}", fmt_gauss(g)),
                None => String::new(),
            };
            format!("potential good reduction at center valuation {center}{s}")
        }
        Classification::Bernoulli(data) => format!(
            "bernoulli on the invariant segment [{}, {}] with {} pieces",
            data.segment.0,
            data.segment.1,
            data.pieces.len()
        ),
        Classification::Expanding { chi, stderr } => {
            format!("expanding with lyapunov rate {chi:.4} +- {stderr:.4}")
        }
        Classification::Unknown => "unresolved".to_string(),
    }
}

fn pl_map_json(pl: &PLMap) -> Json {
    let mut o = Json::obj();
    o.push("window", Json::Arr(vec![json::rat(pl.lo()), json::rat(pl.hi())]));
    o.push(
        "breakpoints",
        Json::Arr(pl.breakpoints.iter().map(json::rat).collect()),
    );
    o.push("values", Json::Arr(pl.values.iter().map(json::rat).collect()));
    o.push(
        "slopes",
        Json::Arr(pl.slopes.iter().map(|s| Json::Int(*s)).collect()),
    );
    o
}

fn bernoulli_json(data: &BernoulliData) -> Json {
    let mut o = Json::obj();
    o.push(
        "segment",
        Json::Arr(vec![json::rat(&data.segment.0), json::rat(&data.segment.1)]),
    );
    let interior: Vec<Json> =
        data.pieces.iter().skip(1).map(|p| json::rat(&p.lo)).collect();
    o.push("breakpoints", Json::Arr(interior));
    o.push(
        "slopes",
        Json::Arr(data.pieces.iter().map(|p| Json::Int(p.slope)).collect()),
    );
    let pieces = data
        .pieces
        .iter()
        .map(|p| {
            let mut row = Json::obj();
            row.push("lo", json::rat(&p.lo));
            row.push("hi", json::rat(&p.hi));
            row.push("slope", Json::Int(p.slope));
            row.push("fixed_point", json::rat(&p.fixed_point));
            row.push("local_degree", Json::Int(p.local_degree as i64));
            row
        })
        .collect();
    o.push("pieces", Json::Arr(pieces));
    o
}

fn point_json(p: &ProjPoint) -> Json {
    match p.affine() {
        Some(z) => complex_json(&z),
        None => json::str("inf"),
    }
}

fn complex_json(z: &BigComplex) -> Json {
    Json::Arr(vec![json::big(&z.re), json::big(&z.im)])
}

fn render_report(
    name: Option<&str>,
    family: &FamilyMap,
    opts: &AnalysisOptions,
    summary: &Summary,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "degeneration analysis report");
    if let Some(name) = name {
        let _ = writeln!(out, "family: {name}");
    }
    let _ = writeln!(
        out,
        "degree: {}, grid: {} points up to n = {}, periods tracked: 1..={}",
        family.degree(),
        opts.n_grid.len(),
        opts.n_grid.last().copied().unwrap_or(0),
        opts.l_max,
    );
    match &summary.failure {
        Some(msg) => {
            let _ = writeln!(out, "status: failed ({msg})");
        }
        None => {
            let _ = writeln!(out, "status: ok");
        }
    }
    if let (Some(fit), Some(kind)) = (&summary.fit, &summary.kind) {
        let _ = writeln!(
            out,
            "degeneration rate: -log res_abs ~ a*n + b*log n + c with a = {:.6}, \
             b = {:.6}, c = {:.6} (rms {:.3e})",
            fit.a, fit.b, fit.c, fit.residual,
        );
        let kappa = summary
            .kappa
            .as_ref()
            .map(|k| k.to_string())
            .unwrap_or_else(|| "1".to_string());
        let _ = writeln!(out, "scale: {} with kappa = {}", kind_text(kind), kappa);
    }
    if let Some(limit) = &summary.limit {
        let _ = writeln!(out, "limit map: {limit}");
    }
    if let Some(classes) = &summary.classes {
        let _ = writeln!(out, "multiplier scale classes:");
        for (kind, count) in classes {
            let _ = writeln!(out, "  {}: {} track(s)", kind_text(kind), count);
        }
        let _ = writeln!(
            out,
            "  non-trivial classes: {} (bound 2d - 2 = {})",
            summary.nontrivial,
            2 * family.degree() - 2,
        );
        if summary.excluded > 0 {
            let _ = writeln!(
                out,
                "  excluded tracks (fit below quality gate): {}",
                summary.excluded
            );
        }
    }
    if let Some(v) = &summary.verdict {
        let _ = writeln!(
            out,
            "dichotomy: branch {}, alpha = {:.4}, consistent: {}",
            v.branch, v.alpha, v.consistent,
        );
        for s in &v.per_period {
            let _ = writeln!(
                out,
                "  l = {}: expanding fraction {:.3}, bounded {} (needs {}), \
                 log-half tracks {}",
                s.period,
                s.expanding_fraction,
                s.bounded_count,
                s.bounded_required,
                s.log_half_count,
            );
        }
    }
    out
}
