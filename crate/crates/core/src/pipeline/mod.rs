//! Stage orchestration. Every stage reads the files written by its
//! predecessors under the output directory and writes its own tables, so
//! stages can run in separate processes.

mod config;
mod io;
mod manifest;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

pub use config::{LdaConfig, PipelineConfig};
pub use io::{read_labeled_checkins, sha256_file, slug, write_labeled_checkins, LABELED_COLUMNS};
pub use manifest::{build_manifest, MANIFEST_FILE};

use io::{write_all, write_csv, write_error};

use crate::behavior::{
    category_popularity, empirical_cdf, hourly_routine, interval_distribution, venue_counts, DayType,
};
use crate::classify::{classify_dataset, populated_slices, slice_tracks, LabeledCheckIn, UserClass, UserTrack};
use crate::ingest::{
    format_timestamp, load_venues, parse_checkins, read_catalog, write_catalog, write_checkins, CategoryMap, CheckIn,
    IngestError, InputFormat, VenueCatalog,
};
use crate::mobility::{summarize_slice, MobilityParams};
use crate::profiles::{build_corpus, fit_lda, top_subcategories, ProfileError};
use crate::stgraph::{build_graph, centrality_ranking, centrality_scores, write_edge_list, write_graphml};
use crate::Category;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Classify,
    Behavior,
    Mobility,
    Graph,
    Profiles,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Classify,
        Stage::Behavior,
        Stage::Mobility,
        Stage::Graph,
        Stage::Profiles,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Classify => "classify",
            Stage::Behavior => "behavior",
            Stage::Mobility => "mobility",
            Stage::Graph => "graph",
            Stage::Profiles => "profiles",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage {stage} needs the output of stage {required} ({}); run {required} first", path.display())]
    MissingPredecessor {
        stage: Stage,
        required: Stage,
        path: PathBuf,
    },
    #[error("data error: {0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<PipelineError>,
    },
}

impl PipelineError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::MissingPredecessor { .. } => 1,
            PipelineError::Data(_) => 2,
            PipelineError::Internal(_) => 3,
            PipelineError::Stage { source, .. } => source.exit_code(),
        }
    }

    fn in_stage(self, stage: Stage) -> Self {
        match self {
            e @ (PipelineError::MissingPredecessor { .. } | PipelineError::Stage { .. }) => e,
            e => PipelineError::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

impl From<IngestError> for PipelineError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Config(m) => PipelineError::Config(m),
            e => PipelineError::Data(e.to_string()),
        }
    }
}

impl From<ProfileError> for PipelineError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::InvalidParams(m) => PipelineError::Config(m),
            e => PipelineError::Internal(e.to_string()),
        }
    }
}

/// Wall-clock time spent in one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTiming {
    pub stage: Stage,
    pub millis: f64,
}

/// Runs one stage and returns its duration.
pub fn run_stage(cfg: &PipelineConfig, stage: Stage) -> Result<StageTiming, PipelineError> {
    cfg.validate()?;
    let start = Instant::now();
    log::info!("running stage {stage}");
    let result = match stage {
        Stage::Ingest => ingest(cfg),
        Stage::Classify => classify(cfg),
        Stage::Behavior => behavior(cfg),
        Stage::Mobility => mobility(cfg),
        Stage::Graph => graph(cfg),
        Stage::Profiles => profiles(cfg),
    };
    result.map_err(|e| e.in_stage(stage))?;
    Ok(StageTiming {
        stage,
        millis: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs `stages` in order and rewrites the manifest; returns its path.
pub fn run_stages(cfg: &PipelineConfig, stages: &[Stage]) -> Result<PathBuf, PipelineError> {
    let mut timings = Vec::with_capacity(stages.len());
    for &stage in stages {
        timings.push(run_stage(cfg, stage)?);
    }
    let manifest = build_manifest(cfg, stages, &timings)?;
    let path = cfg.output_dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| PipelineError::Internal(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| write_error(&path, e))?;
    Ok(path)
}

/// Every stage in order, followed by the manifest.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PathBuf, PipelineError> {
    run_stages(cfg, &Stage::ALL)
}

pub const INGEST_CHECKINS: &str = "ingest/checkins.csv";
pub const INGEST_VENUES: &str = "ingest/venues.csv";
pub const LABELED_CHECKINS: &str = "classify/labeled_checkins.csv";

fn out(cfg: &PipelineConfig, rel: &str) -> PathBuf {
    cfg.output_dir.join(rel)
}

fn require(cfg: &PipelineConfig, stage: Stage, required: Stage, rel: &str) -> Result<PathBuf, PipelineError> {
    let path = out(cfg, rel);
    if path.is_file() {
        Ok(path)
    } else {
        Err(PipelineError::MissingPredecessor { stage, required, path })
    }
}

fn ingest(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut map = match &cfg.category_map {
        Some(p) => CategoryMap::from_path(p)?,
        None => CategoryMap::builtin(),
    };
    if let Some(d) = cfg.default_category {
        map = map.with_default(d);
    }
    let parsed = parse_checkins(&cfg.checkins, cfg.input_format()?)?;
    let venues = load_venues(&cfg.venues, &map)?;
    log::info!(
        "ingested {} check-ins ({} rejected) and {} venues ({} rejected)",
        parsed.checkins.len(),
        parsed.rejected.len(),
        venues.catalog.len(),
        venues.rejected.len()
    );

    write_all(&out(cfg, INGEST_CHECKINS), |w| {
        write_checkins(w, &parsed.checkins, InputFormat::Csv).map_err(std::io::Error::other)
    })?;
    write_all(&out(cfg, INGEST_VENUES), |w| {
        write_catalog(w, &venues.catalog).map_err(std::io::Error::other)
    })?;
    let rejected = parsed
        .rejected
        .iter()
        .map(|r| ("checkins", r))
        .chain(venues.rejected.iter().map(|r| ("venues", r)));
    write_csv(
        &out(cfg, "ingest/rejected.csv"),
        &["file", "line", "reason"],
        rejected.map(|(f, r)| [f.to_string(), r.line.to_string(), r.reason.clone()]),
    )?;
    Ok(())
}

fn load_ingested(cfg: &PipelineConfig, stage: Stage) -> Result<(Vec<CheckIn>, VenueCatalog), PipelineError> {
    let checkins = require(cfg, stage, Stage::Ingest, INGEST_CHECKINS)?;
    let venues = require(cfg, stage, Stage::Ingest, INGEST_VENUES)?;
    let parsed = parse_checkins(&checkins, InputFormat::Csv)?;
    if let Some(r) = parsed.rejected.first() {
        return Err(PipelineError::Data(format!(
            "{}: line {}: {}",
            checkins.display(),
            r.line,
            r.reason
        )));
    }
    Ok((parsed.checkins, load_catalog(&venues)?))
}

fn load_catalog(path: &Path) -> Result<VenueCatalog, PipelineError> {
    let loaded = read_catalog(path)?;
    if let Some(r) = loaded.rejected.first() {
        return Err(PipelineError::Data(format!(
            "{}: line {}: {}",
            path.display(),
            r.line,
            r.reason
        )));
    }
    Ok(loaded.catalog)
}

fn classify(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let (checkins, venues) = load_ingested(cfg, Stage::Classify)?;
    let classified = classify_dataset(&checkins, &venues, cfg.threshold_days);
    if classified.unresolved > 0 {
        log::warn!(
            "{} check-in(s) reference unknown venues and were excluded",
            classified.unresolved
        );
    }
    write_csv(
        &out(cfg, "classify/users.csv"),
        &["user_id", "home_city", "max_days"],
        classified.users.iter().map(|u| {
            [
                u.user_id.clone(),
                u.home_city.clone().unwrap_or_default(),
                u.max_days().to_string(),
            ]
        }),
    )?;
    write_csv(
        &out(cfg, "classify/spans.csv"),
        &[
            "user_id",
            "city",
            "first_checkin",
            "last_checkin",
            "days",
            "checkin_count",
        ],
        classified.users.iter().flat_map(|u| &u.spans).map(|s| {
            [
                s.user_id.clone(),
                s.city.clone(),
                format_timestamp(&s.first_checkin),
                format_timestamp(&s.last_checkin),
                s.days.to_string(),
                s.checkin_count.to_string(),
            ]
        }),
    )?;
    write_labeled_checkins(&out(cfg, LABELED_CHECKINS), &classified.labeled)?;
    Ok(())
}

struct Slice {
    city: String,
    class: UserClass,
    tracks: Vec<UserTrack>,
}

struct Labeled {
    venues: VenueCatalog,
    slices: Vec<Slice>,
}

fn load_labeled(cfg: &PipelineConfig, stage: Stage) -> Result<Labeled, PipelineError> {
    let labeled_path = require(cfg, stage, Stage::Classify, LABELED_CHECKINS)?;
    let venues_path = require(cfg, stage, Stage::Ingest, INGEST_VENUES)?;
    let venues = load_catalog(&venues_path)?;
    let labeled: Vec<LabeledCheckIn> = read_labeled_checkins(&labeled_path)?;
    let slices = populated_slices(&labeled, &venues)
        .into_iter()
        .map(|(city, class)| {
            let tracks = slice_tracks(&labeled, &venues, &city, class);
            Slice { city, class, tracks }
        })
        .collect();
    Ok(Labeled { venues, slices })
}

fn fmt_f64(x: f64) -> String {
    x.to_string()
}

fn behavior(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let data = load_labeled(cfg, Stage::Behavior)?;
    let mut intervals = Vec::new();
    let mut cdf = Vec::new();
    let mut routines = Vec::new();
    let mut rankings = Vec::new();
    let mut points = Vec::new();
    let mut categories = Vec::new();
    for s in &data.slices {
        let (city, class) = (s.city.as_str(), s.class.as_str());
        let dist = interval_distribution(&s.tracks, city, s.class);
        for h in &dist.samples {
            intervals.push([city.to_string(), class.to_string(), fmt_f64(*h)]);
        }
        for (h, p) in empirical_cdf(&dist.samples) {
            cdf.push([city.to_string(), class.to_string(), fmt_f64(h), fmt_f64(p)]);
        }
        for daytype in DayType::ALL {
            let r = hourly_routine(&s.tracks, city, s.class, daytype);
            for (hour, count) in r.counts.iter().enumerate() {
                routines.push([
                    city.to_string(),
                    class.to_string(),
                    daytype.as_str().to_string(),
                    hour.to_string(),
                    count.to_string(),
                ]);
            }
        }
        let counts = venue_counts(&s.tracks, &data.venues);
        for v in counts.iter().take(cfg.ranking_size) {
            rankings.push([
                city.to_string(),
                class.to_string(),
                v.rank.to_string(),
                v.name.clone(),
                v.count.to_string(),
            ]);
        }
        for v in &counts {
            points.push([
                city.to_string(),
                class.to_string(),
                v.rank.to_string(),
                v.venue_id.clone(),
                v.name.clone(),
                fmt_f64(v.lat),
                fmt_f64(v.lon),
                v.count.to_string(),
            ]);
        }
        let pop = category_popularity(&s.tracks, &data.venues, city, s.class);
        for cat in Category::ALL {
            let fraction = pop.fractions.map(|f| fmt_f64(f[cat.index()])).unwrap_or_default();
            categories.push([
                city.to_string(),
                class.to_string(),
                cat.as_str().to_string(),
                pop.count(cat).to_string(),
                fraction,
            ]);
        }
    }
    write_csv(
        &out(cfg, "behavior/intervals.csv"),
        &["city", "class", "hours"],
        intervals,
    )?;
    write_csv(
        &out(cfg, "behavior/interval_cdf.csv"),
        &["city", "class", "hours", "cdf"],
        cdf,
    )?;
    write_csv(
        &out(cfg, "behavior/routines.csv"),
        &["city", "class", "daytype", "hour", "count"],
        routines,
    )?;
    write_csv(
        &out(cfg, "behavior/rankings.csv"),
        &["city", "class", "rank", "venue", "count"],
        rankings,
    )?;
    write_csv(
        &out(cfg, "behavior/venue_points.csv"),
        &["city", "class", "rank", "venue_id", "name", "lat", "lon", "count"],
        points,
    )?;
    write_csv(
        &out(cfg, "behavior/categories.csv"),
        &["city", "class", "category", "count", "fraction"],
        categories,
    )?;
    Ok(())
}

fn mobility(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let data = load_labeled(cfg, Stage::Mobility)?;
    let params = MobilityParams {
        min_checkins_rg: cfg.min_checkins_rg,
        denominator: cfg.displacement_denominator,
    };
    let mut rows = Vec::new();
    let mut disp_cdf = Vec::new();
    let mut rg_cdf = Vec::new();
    for s in &data.slices {
        let summaries = summarize_slice(&s.tracks, &data.venues, &s.city, s.class, params);
        let disp: Vec<f64> = summaries.iter().map(|m| m.mean_displacement_km).collect();
        let rg: Vec<f64> = summaries.iter().filter_map(|m| m.radius_gyration_km).collect();
        for m in &summaries {
            rows.push([
                m.user_id.clone(),
                m.city.clone(),
                m.class.to_string(),
                m.checkin_count.to_string(),
                fmt_f64(m.mean_displacement_km),
                m.radius_gyration_km.map(fmt_f64).unwrap_or_default(),
            ]);
        }
        for (target, samples) in [(&mut disp_cdf, disp), (&mut rg_cdf, rg)] {
            for (km, p) in empirical_cdf(&samples) {
                target.push([s.city.clone(), s.class.to_string(), fmt_f64(km), fmt_f64(p)]);
            }
        }
    }
    write_csv(
        &out(cfg, "mobility/mobility.csv"),
        &[
            "user_id",
            "city",
            "class",
            "n_checkins",
            "mean_displacement_km",
            "radius_gyration_km",
        ],
        rows,
    )?;
    write_csv(
        &out(cfg, "mobility/displacement_cdf.csv"),
        &["city", "class", "km", "cdf"],
        disp_cdf,
    )?;
    write_csv(
        &out(cfg, "mobility/gyration_cdf.csv"),
        &["city", "class", "km", "cdf"],
        rg_cdf,
    )?;
    Ok(())
}

fn slice_stem(city: &str, class: UserClass) -> String {
    format!("{}__{}", slug(city), class)
}

fn graph(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let data = load_labeled(cfg, Stage::Graph)?;
    let mut ranking_rows = Vec::new();
    let mut summary = Vec::new();
    for s in &data.slices {
        let g = build_graph(&s.tracks, &data.venues, &s.city, s.class, cfg.day_anchor_hour);
        let stem = slice_stem(&s.city, s.class);
        write_all(&out(cfg, &format!("graph/{stem}.edges.csv")), |w| {
            write_edge_list(w, &g).map_err(std::io::Error::other)
        })?;
        write_all(&out(cfg, &format!("graph/{stem}.graphml")), |w| write_graphml(w, &g))?;
        summary.push([
            s.city.clone(),
            s.class.to_string(),
            g.node_count().to_string(),
            g.edge_count().to_string(),
            g.total_weight().to_string(),
        ]);
        for &metric in &cfg.graph_metrics {
            let scores = centrality_scores(&g, metric, cfg.path_metric);
            for (rank, node) in centrality_ranking(&g, &scores, cfg.ranking_size)
                .into_iter()
                .enumerate()
            {
                ranking_rows.push([
                    s.city.clone(),
                    s.class.to_string(),
                    metric.to_string(),
                    (rank + 1).to_string(),
                    node.label,
                    node.subcategory,
                    fmt_f64(node.score),
                ]);
            }
        }
    }
    write_csv(
        &out(cfg, "graph/centrality.csv"),
        &["city", "class", "metric", "rank", "label", "subcategory", "score"],
        ranking_rows,
    )?;
    write_csv(
        &out(cfg, "graph/summary.csv"),
        &["city", "class", "nodes", "edges", "total_weight"],
        summary,
    )?;
    Ok(())
}

fn profiles(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let data = load_labeled(cfg, Stage::Profiles)?;
    let params = cfg.lda.params();
    let mut rows = Vec::new();
    for s in &data.slices {
        let corpus = build_corpus(&s.tracks, &data.venues);
        if corpus.token_count() == 0 {
            log::warn!("no subcategory tokens for {} {}; skipping topic model", s.city, s.class);
            continue;
        }
        let model = fit_lda(&corpus, &params)?;
        let path = out(cfg, &format!("profiles/{}.model.txt", slice_stem(&s.city, s.class)));
        write_all(&path, |w| model.write_dump(w))?;
        let report = top_subcategories(&model, cfg.lda.top_m)?;
        for (k, words) in report.topics.iter().enumerate() {
            for (rank, tw) in words.iter().enumerate() {
                rows.push([
                    s.city.clone(),
                    s.class.to_string(),
                    k.to_string(),
                    (rank + 1).to_string(),
                    tw.subcategory.clone(),
                    fmt_f64(tw.probability),
                ]);
            }
        }
    }
    write_csv(
        &out(cfg, "profiles/profiles.csv"),
        &["city", "class", "topic_index", "rank", "subcategory", "probability"],
        rows,
    )?;
    Ok(())
}
