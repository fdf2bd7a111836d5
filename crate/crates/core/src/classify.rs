//! Home-city inference from stay spans and per-check-in tourist/resident
//! labelling.
//!
//! A user's stay in a city spans from the first to the last check-in there,
//! measured in calendar days on the local clock. The home city is the city
//! with the longest span, provided it reaches the threshold (21 days by
//! default). Check-ins elsewhere are tourist activity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use crate::ingest::{CheckIn, VenueCatalog};

pub const DEFAULT_THRESHOLD_DAYS: i64 = 21;

/// Per-check-in verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Tourist,
    Resident,
    Excluded,
}

/// The two analysed populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserClass {
    Tourist,
    Resident,
}

impl UserClass {
    pub const ALL: [UserClass; 2] = [UserClass::Tourist, UserClass::Resident];

    pub fn as_str(self) -> &'static str {
        match self {
            UserClass::Tourist => "tourist",
            UserClass::Resident => "resident",
        }
    }

    pub fn label(self) -> Label {
        match self {
            UserClass::Tourist => Label::Tourist,
            UserClass::Resident => Label::Resident,
        }
    }
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Tourist => "tourist",
            Label::Resident => "resident",
            Label::Excluded => "excluded",
        }
    }

    pub fn class(self) -> Option<UserClass> {
        match self {
            Label::Tourist => Some(UserClass::Tourist),
            Label::Resident => Some(UserClass::Resident),
            Label::Excluded => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for UserClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "tourist" => Ok(Label::Tourist),
            "resident" => Ok(Label::Resident),
            "excluded" => Ok(Label::Excluded),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

impl FromStr for UserClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::from_str(s)?
            .class()
            .ok_or_else(|| format!("{s:?} is not a user class"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaySpan {
    pub user_id: String,
    pub city: String,
    pub first_checkin: DateTime<FixedOffset>,
    pub last_checkin: DateTime<FixedOffset>,
    /// Calendar-day difference between first and last check-in.
    pub days: i64,
    pub checkin_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserClassification {
    pub user_id: String,
    pub home_city: Option<String>,
    /// One span per visited city, ordered by city id.
    pub spans: Vec<StaySpan>,
}

impl UserClassification {
    pub fn max_days(&self) -> i64 {
        self.spans.iter().map(|s| s.days).max().unwrap_or(0)
    }

    /// Label of a check-in made in `city` (`None` when its venue is unknown).
    pub fn label_for(&self, city: Option<&str>) -> Label {
        match (&self.home_city, city) {
            (None, _) | (_, None) => Label::Excluded,
            (Some(home), Some(c)) if home == c => Label::Resident,
            (Some(_), Some(_)) => Label::Tourist,
        }
    }
}

/// Builds one span per city from a single user's check-ins. Check-ins whose
/// venue cannot be resolved are skipped; the second value counts them.
pub fn compute_stay_spans(user_id: &str, checkins: &[CheckIn], venues: &VenueCatalog) -> (Vec<StaySpan>, usize) {
    let mut skipped = 0;
    let mut by_city: BTreeMap<&str, StaySpan> = BTreeMap::new();
    for c in checkins {
        let Some(venue) = venues.get(&c.venue_id) else {
            log::warn!(
                "check-in {} references unknown venue {:?}; skipped",
                c.checkin_id,
                c.venue_id
            );
            skipped += 1;
            continue;
        };
        by_city
            .entry(venue.city.as_str())
            .and_modify(|s| {
                if c.timestamp < s.first_checkin {
                    s.first_checkin = c.timestamp;
                }
                if c.timestamp > s.last_checkin {
                    s.last_checkin = c.timestamp;
                }
                s.checkin_count += 1;
            })
            .or_insert_with(|| StaySpan {
                user_id: user_id.to_string(),
                city: venue.city.clone(),
                first_checkin: c.timestamp,
                last_checkin: c.timestamp,
                days: 0,
                checkin_count: 1,
            });
    }
    let spans = by_city
        .into_values()
        .map(|mut s| {
            s.days = (s.last_checkin.date_naive() - s.first_checkin.date_naive()).num_days();
            s
        })
        .collect();
    (spans, skipped)
}

/// Picks the home city: the longest span if it lasts at least
/// `threshold_days`; ties go to more check-ins, then the smaller city id.
pub fn classify_user(user_id: &str, spans: Vec<StaySpan>, threshold_days: i64) -> UserClassification {
    let mut spans = spans;
    spans.sort_by(|a, b| a.city.cmp(&b.city));
    let best = spans.iter().min_by(|a, b| {
        b.days
            .cmp(&a.days)
            .then(b.checkin_count.cmp(&a.checkin_count))
            .then(a.city.cmp(&b.city))
    });
    let home_city = best.filter(|s| s.days >= threshold_days).map(|s| s.city.clone());
    UserClassification {
        user_id: user_id.to_string(),
        home_city,
        spans,
    }
}

/// Labels each check-in of one classified user, in input order.
pub fn label_checkins(classification: &UserClassification, checkins: &[CheckIn], venues: &VenueCatalog) -> Vec<Label> {
    checkins
        .iter()
        .map(|c| classification.label_for(venues.get(&c.venue_id).map(|v| v.city.as_str())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCheckIn {
    #[serde(flatten)]
    pub checkin: CheckIn,
    pub label: Label,
}

/// Output of classifying a whole dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Classified {
    /// One entry per user, ordered by user id.
    pub users: Vec<UserClassification>,
    /// Every input check-in with its label, in input order.
    pub labeled: Vec<LabeledCheckIn>,
    /// Check-ins whose venue was unknown (labelled excluded).
    pub unresolved: usize,
}

/// Groups check-ins by user, classifies each user and labels every check-in.
pub fn classify_dataset(checkins: &[CheckIn], venues: &VenueCatalog, threshold_days: i64) -> Classified {
    let mut per_user: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in checkins.iter().enumerate() {
        per_user.entry(c.user_id.as_str()).or_default().push(i);
    }
    let mut labels = vec![Label::Excluded; checkins.len()];
    let mut users = Vec::with_capacity(per_user.len());
    let mut unresolved = 0;
    for (user, idx) in per_user {
        let mine: Vec<CheckIn> = idx.iter().map(|&i| checkins[i].clone()).collect();
        let (spans, skipped) = compute_stay_spans(user, &mine, venues);
        unresolved += skipped;
        let cls = classify_user(user, spans, threshold_days);
        for (&i, label) in idx.iter().zip(label_checkins(&cls, &mine, venues)) {
            labels[i] = label;
        }
        users.push(cls);
    }
    let labeled = checkins
        .iter()
        .zip(labels)
        .map(|(c, label)| LabeledCheckIn {
            checkin: c.clone(),
            label,
        })
        .collect();
    Classified {
        users,
        labeled,
        unresolved,
    }
}

/// A user's check-ins within one (city, class) slice, sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTrack {
    pub user_id: String,
    pub checkins: Vec<CheckIn>,
}

/// Collects the chronologically sorted tracks of every user with at least one
/// check-in labelled `class` in `city`. Ties in time are ordered by check-in id.
pub fn slice_tracks(labeled: &[LabeledCheckIn], venues: &VenueCatalog, city: &str, class: UserClass) -> Vec<UserTrack> {
    let mut per_user: BTreeMap<&str, Vec<CheckIn>> = BTreeMap::new();
    for lc in labeled {
        if lc.label != class.label() {
            continue;
        }
        match venues.get(&lc.checkin.venue_id) {
            Some(v) if v.city == city => per_user
                .entry(lc.checkin.user_id.as_str())
                .or_default()
                .push(lc.checkin.clone()),
            _ => {}
        }
    }
    per_user
        .into_iter()
        .map(|(user, mut checkins)| {
            checkins.sort_by(|a, b| {
                a.timestamp
                    .cmp(&b.timestamp)
                    .then_with(|| a.checkin_id.cmp(&b.checkin_id))
            });
            UserTrack {
                user_id: user.to_string(),
                checkins,
            }
        })
        .collect()
}

/// Every (city, class) pair with at least one labelled check-in, sorted.
pub fn populated_slices(labeled: &[LabeledCheckIn], venues: &VenueCatalog) -> Vec<(String, UserClass)> {
    let set: BTreeSet<(&str, UserClass)> = labeled
        .iter()
        .filter_map(|lc| {
            let class = lc.label.class()?;
            let venue = venues.get(&lc.checkin.venue_id)?;
            Some((venue.city.as_str(), class))
        })
        .collect();
    set.into_iter().map(|(c, k)| (c.to_string(), k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Category, Venue};

    fn venue(id: &str, city: &str) -> Venue {
        Venue {
            venue_id: id.into(),
            name: id.to_uppercase(),
            city: city.into(),
            lat: 0.0,
            lon: 0.0,
            raw_category: String::new(),
            subcategory: "Plaza".into(),
            category: Category::Outdoors,
        }
    }

    fn catalog() -> VenueCatalog {
        [
            venue("a1", "A"),
            venue("a2", "A"),
            venue("b1", "B"),
            venue("ny", "NY"),
            venue("rio", "Rio"),
        ]
        .into_iter()
        .collect()
    }

    fn checkin(id: &str, user: &str, venue: &str, ts: &str) -> CheckIn {
        CheckIn {
            checkin_id: id.into(),
            user_id: user.into(),
            venue_id: venue.into(),
            timestamp: DateTime::parse_from_rfc3339(ts).unwrap(),
            lat: 0.0,
            lon: 0.0,
        }
    }

    fn span(city: &str, days: i64, count: usize) -> StaySpan {
        let t = DateTime::parse_from_rfc3339("2018-05-05T12:00:00Z").unwrap();
        StaySpan {
            user_id: "u".into(),
            city: city.into(),
            first_checkin: t,
            last_checkin: t + chrono::Duration::days(days),
            days,
            checkin_count: count,
        }
    }

    #[test]
    fn may_fifth_to_may_thirtieth_is_25_days() {
        let cs = [
            checkin("1", "u", "a1", "2018-05-05T09:00:00-03:00"),
            checkin("2", "u", "a2", "2018-05-30T08:00:00-03:00"),
        ];
        let (spans, skipped) = compute_stay_spans("u", &cs, &catalog());
        assert_eq!(skipped, 0);
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].days, 25);
        assert_eq!(spans[0].checkin_count, 2);
        assert_eq!(classify_user("u", spans, 21).home_city.as_deref(), Some("A"));
    }

    #[test]
    fn single_checkin_is_degenerate_span() {
        let cs = [checkin("1", "u", "a1", "2018-05-05T09:00:00Z")];
        let (spans, _) = compute_stay_spans("u", &cs, &catalog());
        assert_eq!((spans[0].days, spans[0].checkin_count), (0, 1));
    }

    #[test]
    fn two_cities_hand_computed() {
        // A on days 1 and 10, B on days 2 and 40 (of May/June 2018).
        let cs = [
            checkin("1", "u", "a1", "2018-05-01T10:00:00Z"),
            checkin("2", "u", "b1", "2018-05-02T10:00:00Z"),
            checkin("3", "u", "a2", "2018-05-10T10:00:00Z"),
            checkin("4", "u", "b1", "2018-06-09T10:00:00Z"),
        ];
        let (spans, _) = compute_stay_spans("u", &cs, &catalog());
        let days: Vec<_> = spans.iter().map(|s| (s.city.as_str(), s.days)).collect();
        assert_eq!(days, [("A", 9), ("B", 38)]);
    }

    #[test]
    fn calendar_days_not_elapsed_hours() {
        // 23:50 to 00:10 next day is one calendar day on the local clock.
        let cs = [
            checkin("1", "u", "a1", "2018-05-05T23:50:00-03:00"),
            checkin("2", "u", "a1", "2018-05-06T00:10:00-03:00"),
        ];
        assert_eq!(compute_stay_spans("u", &cs, &catalog()).0[0].days, 1);
    }

    #[test]
    fn unknown_venue_skipped() {
        let cs = [checkin("1", "u", "nowhere", "2018-05-05T09:00:00Z")];
        let (spans, skipped) = compute_stay_spans("u", &cs, &catalog());
        assert!(spans.is_empty());
        assert_eq!(skipped, 1);
        assert_eq!(classify_user("u", spans, 21).home_city, None);
    }

    #[test]
    fn threshold_and_maximal_span() {
        assert_eq!(
            classify_user("u", vec![span("A", 25, 2)], 21).home_city.as_deref(),
            Some("A")
        );
        assert_eq!(classify_user("u", vec![span("A", 5, 2)], 21).home_city, None);
        assert_eq!(classify_user("u", vec![span("A", 20, 9)], 21).home_city, None);
        assert_eq!(
            classify_user("u", vec![span("A", 21, 2)], 21).home_city.as_deref(),
            Some("A")
        );
        assert_eq!(
            classify_user("u", vec![span("A", 20, 9)], 20).home_city.as_deref(),
            Some("A")
        );
    }

    #[test]
    fn longest_span_wins_regardless_of_order() {
        let spans = [span("A", 25, 2), span("B", 30, 2)];
        // Exhaustive over both input orders.
        for perm in [[0usize, 1], [1, 0]] {
            let input = perm.iter().map(|&i| spans[i].clone()).collect();
            assert_eq!(classify_user("u", input, 21).home_city.as_deref(), Some("B"));
        }
    }

    #[test]
    fn ties_break_on_count_then_city() {
        let r = classify_user("u", vec![span("B", 30, 2), span("A", 30, 5)], 21);
        assert_eq!(r.home_city.as_deref(), Some("A"));
        let r = classify_user("u", vec![span("B", 30, 5), span("A", 30, 2)], 21);
        assert_eq!(r.home_city.as_deref(), Some("B"));
        let r = classify_user("u", vec![span("C", 30, 5), span("B", 30, 5)], 21);
        assert_eq!(r.home_city.as_deref(), Some("B"));
    }

    #[test]
    fn labels_follow_home_city() {
        let cat = catalog();
        let home = UserClassification {
            user_id: "u".into(),
            home_city: Some("NY".into()),
            spans: vec![],
        };
        let cs = [
            checkin("1", "u", "ny", "2018-05-05T09:00:00Z"),
            checkin("2", "u", "rio", "2018-05-06T09:00:00Z"),
            checkin("3", "u", "gone", "2018-05-06T09:00:00Z"),
        ];
        assert_eq!(
            label_checkins(&home, &cs, &cat),
            [Label::Resident, Label::Tourist, Label::Excluded]
        );
        let unknown = UserClassification {
            home_city: None,
            ..home
        };
        assert_eq!(label_checkins(&unknown, &cs, &cat), [Label::Excluded; 3]);
    }

    #[test]
    fn dataset_classification_and_slices() {
        let cat = catalog();
        let cs = vec![
            checkin("1", "u", "a1", "2018-05-01T10:00:00Z"),
            checkin("2", "w", "a1", "2018-05-01T10:00:00Z"),
            checkin("3", "u", "b1", "2018-05-03T10:00:00Z"),
            checkin("4", "u", "a2", "2018-05-29T10:00:00Z"),
            checkin("5", "u", "b1", "2018-05-02T10:00:00Z"),
        ];
        let out = classify_dataset(&cs, &cat, 21);
        assert_eq!(out.users.len(), 2);
        let labels: Vec<_> = out.labeled.iter().map(|l| l.label).collect();
        assert_eq!(
            labels,
            [
                Label::Resident,
                Label::Excluded,
                Label::Tourist,
                Label::Resident,
                Label::Tourist
            ]
        );
        let tracks = slice_tracks(&out.labeled, &cat, "B", UserClass::Tourist);
        assert_eq!(tracks.len(), 1);
        let ids: Vec<_> = tracks[0].checkins.iter().map(|c| c.checkin_id.as_str()).collect();
        assert_eq!(ids, ["5", "3"]);
        assert_eq!(
            populated_slices(&out.labeled, &cat),
            [
                ("A".to_string(), UserClass::Resident),
                ("B".to_string(), UserClass::Tourist)
            ]
        );
    }
}
