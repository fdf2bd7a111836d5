//! Seeded synthetic scenarios.
//!
//! A scenario has a few cities with random venues. Residents check in inside
//! one city for at least the classification threshold; tourists have such a
//! home city and additionally make a shorter visit to another city. Every
//! user stays inside a disc of configured radius around a venue of each city
//! they use, so spatial concentration is known by construction.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, FixedOffset, NaiveDate, TimeZone};
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{UserClass, DEFAULT_THRESHOLD_DAYS};
use crate::ingest::{write_checkins, CheckIn, InputFormat};
use crate::mobility::{haversine_km, GeoPoint};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub max_lat: f64,
    pub min_lon: f64,
    pub max_lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubcategorySpec {
    /// Raw top-level category written to the venue file.
    pub category: String,
    pub subcategory: String,
    #[serde(default = "one")]
    pub weight: f64,
    /// Tourists favour attraction venues.
    #[serde(default)]
    pub attraction: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CitySpec {
    pub name: String,
    pub utc_offset_hours: i32,
    pub venue_count: usize,
    pub bbox: BoundingBox,
    #[serde(rename = "subcategory")]
    pub subcategories: Vec<SubcategorySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidentSpec {
    pub per_city: usize,
    /// Inclusive range of home-city span lengths in days.
    pub span_days: [u32; 2],
    pub checkins_per_day: f64,
    pub radius_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TouristSpec {
    /// Visitors per visited city.
    pub per_city: usize,
    /// Inclusive range of visit lengths in days.
    pub visit_days: [u32; 2],
    pub checkins_per_day: f64,
    /// Probability of picking an attraction venue when one is in reach.
    pub attraction_bias: f64,
    pub radius_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedTopic {
    pub name: String,
    pub subcategories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    /// Probability that a check-in follows the user's planted topic.
    pub affinity: f64,
    #[serde(rename = "topic")]
    pub topics: Vec<PlantedTopic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub start_date: NaiveDate,
    #[serde(default = "default_threshold")]
    pub threshold_days: u32,
    #[serde(rename = "city")]
    pub cities: Vec<CitySpec>,
    pub residents: ResidentSpec,
    pub tourists: TouristSpec,
    #[serde(default)]
    pub profiles: Option<ProfileSpec>,
}

fn default_threshold() -> u32 {
    DEFAULT_THRESHOLD_DAYS as u32
}

const PALETTE: &[(&str, &str, f64, bool)] = &[
    ("Travel & Transport", "Train Station", 4.0, false),
    ("Travel & Transport", "Subway", 4.0, false),
    ("Travel & Transport", "Bus Station", 2.0, false),
    ("Travel & Transport", "Hotel", 2.0, true),
    ("Professional & Other Places", "Office", 4.0, false),
    ("Food", "Coffee Shop", 3.0, false),
    ("Food", "Burger Joint", 2.0, false),
    ("Food", "Japanese Restaurant", 2.0, false),
    ("Food", "Brazilian Restaurant", 2.0, true),
    ("Nightlife Spot", "Bar", 3.0, true),
    ("Shop & Service", "Mall", 2.0, false),
    ("Shop & Service", "Convenience Store", 2.0, false),
    ("Shop & Service", "Electronics Store", 1.0, true),
    ("Residences", "Home (private)", 3.0, false),
    ("College & University", "University", 2.0, false),
    ("Arts & Entertainment", "Museum", 1.0, true),
    ("Arts & Entertainment", "Historic Site", 1.0, true),
    ("Arts & Entertainment", "Arcade", 1.0, false),
    ("Outdoors & Recreation", "Park", 2.0, true),
    ("Outdoors & Recreation", "Beach", 1.0, true),
    ("Outdoors & Recreation", "Gym", 2.0, false),
];

fn palette() -> Vec<SubcategorySpec> {
    PALETTE
        .iter()
        .map(|&(category, subcategory, weight, attraction)| SubcategorySpec {
            category: category.into(),
            subcategory: subcategory.into(),
            weight,
            attraction,
        })
        .collect()
}

impl Default for ScenarioConfig {
    /// Two cities, 80 residents and 30 visitors per city, three planted
    /// topics: roughly ten thousand check-ins.
    fn default() -> Self {
        let city = |name: &str, offset, lat: f64, lon: f64| CitySpec {
            name: name.into(),
            utc_offset_hours: offset,
            venue_count: 150,
            bbox: BoundingBox {
                min_lat: lat - 0.08,
                max_lat: lat + 0.08,
                min_lon: lon - 0.1,
                max_lon: lon + 0.1,
            },
            subcategories: palette(),
        };
        let topic = |name: &str, subs: &[&str]| PlantedTopic {
            name: name.into(),
            subcategories: subs.iter().map(|s| s.to_string()).collect(),
        };
        ScenarioConfig {
            seed: 42,
            start_date: NaiveDate::from_ymd_opt(2014, 5, 1).expect("valid date"),
            threshold_days: default_threshold(),
            cities: vec![
                city("new-york", -4, 40.75, -73.98),
                city("rio-de-janeiro", -3, -22.93, -43.2),
            ],
            residents: ResidentSpec {
                per_city: 80,
                span_days: [21, 45],
                checkins_per_day: 1.2,
                radius_km: 6.0,
            },
            tourists: TouristSpec {
                per_city: 30,
                visit_days: [2, 14],
                checkins_per_day: 2.5,
                attraction_bias: 0.6,
                radius_km: 2.0,
            },
            profiles: Some(ProfileSpec {
                affinity: 0.7,
                topics: vec![
                    topic("commuter", &["Train Station", "Subway", "Bus Station", "Office"]),
                    topic(
                        "food-lover",
                        &["Bar", "Japanese Restaurant", "Brazilian Restaurant", "Burger Joint"],
                    ),
                    topic("shopper", &["Mall", "Electronics Store", "Convenience Store", "Arcade"]),
                ],
            }),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, SynthError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| SynthError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, SynthError> {
        let text = std::fs::read_to_string(path).map_err(|source| SynthError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn user_count(&self) -> usize {
        self.cities.len() * (self.residents.per_city + self.tourists.per_city)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        let threshold = self.threshold_days;
        let r = &self.residents;
        let t = &self.tourists;
        if r.span_days[0] > r.span_days[1] || t.visit_days[0] > t.visit_days[1] {
            return bad("day ranges must be [min, max] with min <= max".into());
        }
        if r.span_days[0] < threshold {
            return bad(format!(
                "resident span of {} days is below the {threshold}-day threshold",
                r.span_days[0]
            ));
        }
        if t.visit_days[1] >= threshold {
            return bad(format!(
                "tourist visit of {} days reaches the {threshold}-day threshold",
                t.visit_days[1]
            ));
        }
        for (name, rate) in [("resident", r.checkins_per_day), ("tourist", t.checkins_per_day)] {
            if !(rate > 0.0 && rate.is_finite()) {
                return bad(format!("{name} check-in rate must be positive"));
            }
        }
        for (name, radius) in [("resident", r.radius_km), ("tourist", t.radius_km)] {
            if !(radius > 0.0 && radius.is_finite()) {
                return bad(format!("{name} radius must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&t.attraction_bias) {
            return bad("attraction_bias must lie in [0, 1]".into());
        }
        if t.per_city > 0 && self.cities.len() < 2 {
            return bad("tourists need at least two cities".into());
        }
        let users = r.per_city + t.per_city;
        let mut names = std::collections::BTreeSet::new();
        for c in &self.cities {
            if !names.insert(c.name.as_str()) || c.name.trim().is_empty() {
                return bad(format!("city name {:?} is empty or repeated", c.name));
            }
            let b = &c.bbox;
            let ok = b.min_lat < b.max_lat
                && b.min_lon < b.max_lon
                && b.min_lat >= -90.0
                && b.max_lat <= 90.0
                && b.min_lon >= -180.0
                && b.max_lon <= 180.0;
            if !ok {
                return bad(format!("invalid bounding box for {}", c.name));
            }
            if !(-14..=14).contains(&c.utc_offset_hours) {
                return bad(format!("utc offset of {} out of range", c.name));
            }
            if users > 0 && c.venue_count == 0 {
                return bad(format!("{} has users but no venues", c.name));
            }
            if c.venue_count > 0 && c.subcategories.iter().all(|s| s.weight.is_nan() || s.weight <= 0.0) {
                return bad(format!(
                    "{} needs at least one subcategory with positive weight",
                    c.name
                ));
            }
            if c.subcategories
                .iter()
                .any(|s| !(s.weight >= 0.0 && s.weight.is_finite()))
            {
                return bad(format!("{} has a negative subcategory weight", c.name));
            }
        }
        if let Some(p) = &self.profiles {
            if !(0.0..=1.0).contains(&p.affinity) {
                return bad("profile affinity must lie in [0, 1]".into());
            }
            if p.topics.is_empty() || p.topics.iter().any(|t| t.subcategories.is_empty()) {
                return bad("every planted topic needs at least one subcategory".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthVenue {
    pub venue_id: String,
    pub name: String,
    pub city: String,
    pub lat: f64,
    pub lon: f64,
    pub category: String,
    pub subcategory: String,
    #[serde(skip)]
    pub attraction: bool,
}

impl SynthVenue {
    pub fn point(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lon: self.lon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub user_id: String,
    pub class: UserClass,
    pub home_city: String,
    /// Name of the planted topic, empty when none.
    pub planted_topic: String,
    /// Visited city for tourists, empty for residents.
    pub visit_city: String,
    /// Concentration radius in the city where the class applies.
    pub radius_km: f64,
    /// Venue at the centre of that disc.
    pub center_venue: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub venues: Vec<SynthVenue>,
    pub checkins: Vec<CheckIn>,
    pub truth: Vec<GroundTruth>,
}

pub const CHECKINS_FILE: &str = "checkins.csv";
pub const VENUES_FILE: &str = "venues.csv";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";

impl Scenario {
    /// Writes the three scenario files into `dir` and returns their paths
    /// (check-ins, venues, ground truth).
    pub fn write_to(&self, dir: &Path) -> Result<[PathBuf; 3], SynthError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |e: std::io::Error| SynthError::Io { path, source: e }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let paths = [
            dir.join(CHECKINS_FILE),
            dir.join(VENUES_FILE),
            dir.join(GROUND_TRUTH_FILE),
        ];

        let f = File::create(&paths[0]).map_err(io(&paths[0]))?;
        write_checkins(BufWriter::new(f), &self.checkins, InputFormat::Csv)
            .map_err(|e| io(&paths[0])(std::io::Error::other(e.to_string())))?;

        let csv_err = |p: &Path| {
            let p = p.to_path_buf();
            move |e: csv::Error| SynthError::Io {
                path: p,
                source: std::io::Error::other(e.to_string()),
            }
        };
        let mut w = csv::Writer::from_path(&paths[1]).map_err(csv_err(&paths[1]))?;
        if self.venues.is_empty() {
            w.write_record(["venue_id", "name", "city", "lat", "lon", "category", "subcategory"])
                .map_err(csv_err(&paths[1]))?;
        }
        for v in &self.venues {
            w.serialize(v).map_err(csv_err(&paths[1]))?;
        }
        w.flush().map_err(io(&paths[1]))?;

        let mut w = csv::Writer::from_path(&paths[2]).map_err(csv_err(&paths[2]))?;
        if self.truth.is_empty() {
            w.write_record([
                "user_id",
                "class",
                "home_city",
                "planted_topic",
                "visit_city",
                "radius_km",
                "center_venue",
            ])
            .map_err(csv_err(&paths[2]))?;
        }
        for g in &self.truth {
            w.serialize(g).map_err(csv_err(&paths[2]))?;
        }
        w.flush().map_err(io(&paths[2]))?;
        Ok(paths)
    }
}

/// Reads a ground-truth file written by [`Scenario::write_to`].
pub fn read_ground_truth(path: &Path) -> Result<Vec<GroundTruth>, SynthError> {
    let to_err = |e: csv::Error| SynthError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut r = csv::Reader::from_path(path).map_err(to_err)?;
    r.deserialize().collect::<Result<_, _>>().map_err(to_err)
}

const RESIDENT_HOURS: [f64; 24] = [
    0.05, 0.05, 0.02, 0.02, 0.02, 0.05, 0.3, 1.0, 3.0, 3.0, 1.0, 1.0, 3.0, 3.0, 1.0, 1.0, 1.0, 1.0, 3.0, 3.0, 1.0, 0.6,
    0.3, 0.1,
];
const TOURIST_HOURS: [f64; 24] = [
    0.05, 0.05, 0.02, 0.02, 0.02, 0.02, 0.05, 0.1, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
    0.5, 0.2, 0.1,
];

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

struct Stay<'a> {
    city: &'a CitySpec,
    venues: Vec<&'a SynthVenue>,
    first_day: NaiveDate,
    days: u32,
    rate: f64,
    hours: &'a [f64; 24],
    attraction_bias: f64,
}

struct Generator<'a> {
    cfg: &'a ScenarioConfig,
    rng: ChaCha8Rng,
    venues: Vec<SynthVenue>,
    checkins: Vec<CheckIn>,
}

impl<'a> Generator<'a> {
    fn city_venues(&self, city: &str) -> Vec<usize> {
        (0..self.venues.len())
            .filter(|&i| self.venues[i].city == city)
            .collect()
    }

    /// Picks a random disc centre in `city` and returns it with every venue
    /// within `radius_km` of it.
    fn disc(&mut self, city: &str, radius_km: f64) -> (usize, Vec<usize>) {
        let all = self.city_venues(city);
        let center = all[self.rng.random_range(0..all.len())];
        let c = self.venues[center].point();
        let inside = all
            .into_iter()
            .filter(|&i| haversine_km(self.venues[i].point(), c) <= radius_km)
            .collect();
        (center, inside)
    }

    fn emit(&mut self, user: &str, stay: &Stay<'_>, topic: Option<&PlantedTopic>) {
        let offset = FixedOffset::east_opt(stay.city.utc_offset_hours * 3600).expect("validated offset");
        let hours = WeightedIndex::new(stay.hours.iter().copied()).expect("positive hour weights");
        let poisson = Poisson::new(stay.rate).expect("validated rate");
        let attractions: Vec<&SynthVenue> = stay.venues.iter().copied().filter(|v| v.attraction).collect();
        let on_topic: Vec<&SynthVenue> = match topic {
            Some(t) => stay
                .venues
                .iter()
                .copied()
                .filter(|v| t.subcategories.contains(&v.subcategory))
                .collect(),
            None => Vec::new(),
        };
        let affinity = self.cfg.profiles.as_ref().map_or(0.0, |p| p.affinity);

        let mut times: Vec<DateTime<FixedOffset>> = Vec::new();
        for day in 0..=stay.days {
            let mut n = poisson.sample(&mut self.rng) as u32;
            if day == 0 || day == stay.days {
                n = n.max(1);
            }
            let date = stay.first_day + Duration::days(i64::from(day));
            for _ in 0..n {
                let hour = hours.sample(&mut self.rng) as u32;
                let minute = self.rng.random_range(0..60);
                let second = self.rng.random_range(0..60);
                let local = date.and_hms_opt(hour, minute, second).expect("valid clock time");
                times.push(
                    offset
                        .from_local_datetime(&local)
                        .single()
                        .expect("fixed offsets are unambiguous"),
                );
            }
        }
        times.sort();
        for ts in times {
            let pool = if !on_topic.is_empty() && self.rng.random::<f64>() < affinity {
                &on_topic
            } else if !attractions.is_empty() && self.rng.random::<f64>() < stay.attraction_bias {
                &attractions
            } else {
                &stay.venues
            };
            let v = pool[self.rng.random_range(0..pool.len())];
            self.checkins.push(CheckIn {
                checkin_id: format!("c{:07}", self.checkins.len() + 1),
                user_id: user.to_string(),
                venue_id: v.venue_id.clone(),
                timestamp: ts,
                lat: v.lat,
                lon: v.lon,
            });
        }
    }
}

/// Generates a scenario. Identical configs give identical scenarios.
pub fn generate(cfg: &ScenarioConfig) -> Result<Scenario, SynthError> {
    cfg.validate()?;
    let mut g = Generator {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        venues: Vec::new(),
        checkins: Vec::new(),
    };

    for (ci, city) in cfg.cities.iter().enumerate() {
        if city.venue_count == 0 {
            continue;
        }
        let weights = WeightedIndex::new(city.subcategories.iter().map(|s| s.weight)).expect("validated weights");
        for i in 0..city.venue_count {
            let spec = &city.subcategories[weights.sample(&mut g.rng)];
            let b = &city.bbox;
            let lat = round6(g.rng.random_range(b.min_lat..b.max_lat));
            let lon = round6(g.rng.random_range(b.min_lon..b.max_lon));
            g.venues.push(SynthVenue {
                venue_id: format!("v{ci:02}-{i:05}"),
                name: format!("{} {}", spec.subcategory, i + 1),
                city: city.name.clone(),
                lat,
                lon,
                category: spec.category.clone(),
                subcategory: spec.subcategory.clone(),
                attraction: spec.attraction,
            });
        }
    }

    let mut truth = Vec::new();
    let mut next_user = 0usize;
    let r = &cfg.residents;
    let t = &cfg.tourists;
    let n_cities = cfg.cities.len();
    for (ci, city) in cfg.cities.iter().enumerate() {
        for k in 0..r.per_city + t.per_city {
            next_user += 1;
            let user = format!("u{next_user:05}");
            let is_tourist = k >= r.per_city;
            let topic = cfg
                .profiles
                .as_ref()
                .map(|p| p.topics[g.rng.random_range(0..p.topics.len())].clone());

            // Tourists visit `city`; their home is another city.
            let home = if is_tourist {
                let shift = 1 + (k - r.per_city) % (n_cities - 1);
                &cfg.cities[(ci + shift) % n_cities]
            } else {
                city
            };
            let (home_center, home_disc) = g.disc(&home.name, r.radius_km);
            let home_days = g.rng.random_range(r.span_days[0]..=r.span_days[1]);
            let home_start = cfg.start_date + Duration::days(g.rng.random_range(0..30));
            let venues = g.venues.clone();
            let home_stay = Stay {
                city: home,
                venues: home_disc.iter().map(|&i| &venues[i]).collect(),
                first_day: home_start,
                days: home_days,
                rate: r.checkins_per_day,
                hours: &RESIDENT_HOURS,
                attraction_bias: 0.0,
            };
            g.emit(&user, &home_stay, topic.as_ref());

            let (radius_km, center_venue, visit_city) = if is_tourist {
                let (center, disc) = g.disc(&city.name, t.radius_km);
                let visit_days = g.rng.random_range(t.visit_days[0]..=t.visit_days[1]);
                let visit = Stay {
                    city,
                    venues: disc.iter().map(|&i| &venues[i]).collect(),
                    first_day: home_start + Duration::days(i64::from(home_days) + 1),
                    days: visit_days,
                    rate: t.checkins_per_day,
                    hours: &TOURIST_HOURS,
                    attraction_bias: t.attraction_bias,
                };
                g.emit(&user, &visit, topic.as_ref());
                (t.radius_km, venues[center].venue_id.clone(), city.name.clone())
            } else {
                (r.radius_km, venues[home_center].venue_id.clone(), String::new())
            };
            truth.push(GroundTruth {
                user_id: user,
                class: if is_tourist {
                    UserClass::Tourist
                } else {
                    UserClass::Resident
                },
                home_city: home.name.clone(),
                planted_topic: topic.map(|t| t.name).unwrap_or_default(),
                visit_city,
                radius_km,
                center_venue,
            });
        }
    }

    Ok(Scenario {
        venues: g.venues,
        checkins: g.checkins,
        truth,
    })
}

/// Writes a scenario config as TOML.
pub fn write_config<W: Write>(mut w: W, cfg: &ScenarioConfig) -> std::io::Result<()> {
    w.write_all(cfg.to_toml_string().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify_dataset, slice_tracks, Label};
    use crate::ingest::{load_venues, parse_checkins, CategoryMap};
    use crate::mobility::{radius_of_gyration, Visit};

    fn small() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.residents.per_city = 6;
        cfg.tourists.per_city = 4;
        cfg.cities.iter_mut().for_each(|c| c.venue_count = 60);
        cfg
    }

    #[test]
    fn default_config_is_valid_and_round_trips_through_toml() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.user_count(), 220);
        assert_eq!(ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn inconsistent_configs_rejected() {
        let mut cfg = small();
        cfg.tourists.visit_days = [3, 21];
        let msg = generate(&cfg).unwrap_err().to_string();
        assert!(msg.contains("tourist visit"), "{msg}");

        let mut cfg = small();
        cfg.residents.span_days = [20, 30];
        assert!(generate(&cfg).is_err());

        let mut cfg = small();
        cfg.cities.truncate(1);
        assert!(generate(&cfg).is_err());

        let mut cfg = small();
        cfg.cities[0].bbox.min_lat = cfg.cities[0].bbox.max_lat;
        assert!(generate(&cfg).is_err());

        let mut cfg = small();
        cfg.residents.checkins_per_day = 0.0;
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn zero_users_gives_empty_files_with_headers() {
        let mut cfg = small();
        cfg.residents.per_city = 0;
        cfg.tourists.per_city = 0;
        cfg.cities.iter_mut().for_each(|c| c.venue_count = 0);
        let s = generate(&cfg).unwrap();
        assert!(s.checkins.is_empty() && s.truth.is_empty() && s.venues.is_empty());
        let dir = tempfile::tempdir().unwrap();
        let [c, v, t] = s.write_to(dir.path()).unwrap();
        assert_eq!(
            std::fs::read_to_string(c).unwrap(),
            "checkin_id,user_id,venue_id,timestamp,lat,lon\n"
        );
        assert_eq!(
            std::fs::read_to_string(v).unwrap(),
            "venue_id,name,city,lat,lon,category,subcategory\n"
        );
        assert!(std::fs::read_to_string(t)
            .unwrap()
            .starts_with("user_id,class,home_city"));
    }

    #[test]
    fn deterministic_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate(&small()).unwrap().write_to(a.path()).unwrap();
        generate(&small()).unwrap().write_to(b.path()).unwrap();
        for f in [CHECKINS_FILE, VENUES_FILE, GROUND_TRUTH_FILE] {
            assert_eq!(
                std::fs::read(a.path().join(f)).unwrap(),
                std::fs::read(b.path().join(f)).unwrap()
            );
        }
        let mut other = small();
        other.seed = 43;
        assert_ne!(generate(&other).unwrap().checkins, generate(&small()).unwrap().checkins);
    }

    #[test]
    fn classification_matches_truth_and_radius_holds() {
        let s = generate(&small()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let [c, v, _] = s.write_to(dir.path()).unwrap();
        let checkins = parse_checkins(&c, InputFormat::Csv).unwrap();
        assert!(
            checkins.rejected.is_empty(),
            "{:?}",
            &checkins.rejected[..checkins.rejected.len().min(3)]
        );
        let venues = load_venues(&v, &CategoryMap::builtin()).unwrap();
        assert!(venues.rejected.is_empty());
        let out = classify_dataset(&checkins.checkins, &venues.catalog, 21);
        for (cls, gt) in out.users.iter().zip(&s.truth) {
            assert_eq!(cls.user_id, gt.user_id);
            assert_eq!(cls.home_city.as_deref(), Some(gt.home_city.as_str()));
        }
        for gt in s.truth.iter().filter(|g| g.class == UserClass::Tourist) {
            let tracks = slice_tracks(&out.labeled, &venues.catalog, &gt.visit_city, UserClass::Tourist);
            let track = tracks
                .iter()
                .find(|t| t.user_id == gt.user_id)
                .expect("tourist has a track");
            let center = venues.catalog.get(&gt.center_venue).unwrap();
            let visits: Vec<Visit> = track
                .checkins
                .iter()
                .map(|c| {
                    let v = venues.catalog.get(&c.venue_id).unwrap();
                    Visit {
                        site: &v.venue_id,
                        point: GeoPoint { lat: v.lat, lon: v.lon },
                    }
                })
                .collect();
            for vis in &visits {
                assert!(
                    haversine_km(
                        vis.point,
                        GeoPoint {
                            lat: center.lat,
                            lon: center.lon
                        }
                    ) <= gt.radius_km
                );
            }
            if let Some(rg) = radius_of_gyration(&visits, 5) {
                assert!(rg <= gt.radius_km, "{rg} > {}", gt.radius_km);
            }
        }
        assert!(out.labeled.iter().all(|l| l.label != Label::Excluded));
    }
}
