//! Behavioural statistics per (city, class) slice: inter-check-in intervals,
//! venue popularity, hour-of-day routines and category popularity.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use crate::classify::{UserClass, UserTrack};
use crate::ingest::{Category, CheckIn, VenueCatalog};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalDistribution {
    pub city: String,
    pub class: UserClass,
    /// Positive gaps in hours between consecutive check-ins of one user.
    pub samples: Vec<f64>,
    /// Consecutive pairs with identical timestamps.
    pub dropped: usize,
}

/// Gaps between consecutive check-ins of each track, in hours. Zero gaps
/// are dropped and counted.
pub fn interval_distribution(tracks: &[UserTrack], city: &str, class: UserClass) -> IntervalDistribution {
    let mut samples = Vec::new();
    let mut dropped = 0;
    for track in tracks {
        for pair in track.checkins.windows(2) {
            let secs = (pair[1].timestamp - pair[0].timestamp).num_seconds();
            if secs <= 0 {
                dropped += 1;
                continue;
            }
            samples.push(secs as f64 / 3600.0);
        }
    }
    if dropped > 0 {
        log::warn!("{city}/{class}: dropped {dropped} zero-length interval(s)");
    }
    IntervalDistribution {
        city: city.to_string(),
        class,
        samples,
        dropped,
    }
}

/// Empirical CDF: sorted samples paired with the fraction of samples at or
/// below each one.
pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, (i + 1) as f64 / n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VenueRank {
    pub rank: usize,
    pub venue_id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub count: usize,
}

/// Every venue with check-ins in the slice, most visited first, ties by name
/// then id.
pub fn venue_counts(tracks: &[UserTrack], venues: &VenueCatalog) -> Vec<VenueRank> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for c in tracks.iter().flat_map(|t| &t.checkins) {
        *counts.entry(c.venue_id.as_str()).or_default() += 1;
    }
    let mut rows: Vec<VenueRank> = counts
        .into_iter()
        .filter_map(|(id, count)| {
            let v = venues.get(id)?;
            Some(VenueRank {
                rank: 0,
                venue_id: id.to_string(),
                name: v.name.clone(),
                lat: v.lat,
                lon: v.lon,
                count,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.name.cmp(&b.name))
            .then_with(|| a.venue_id.cmp(&b.venue_id))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    rows
}

/// Top-`n` prefix of [`venue_counts`].
pub fn venue_ranking(tracks: &[UserTrack], venues: &VenueCatalog, n: usize) -> Vec<VenueRank> {
    let mut rows = venue_counts(tracks, venues);
    rows.truncate(n);
    rows
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayType {
    Weekday,
    Weekend,
}

impl DayType {
    pub const ALL: [DayType; 2] = [DayType::Weekday, DayType::Weekend];

    /// Saturday and Sunday of the local date are weekend.
    pub fn of(checkin: &CheckIn) -> DayType {
        match checkin.timestamp.weekday() {
            Weekday::Sat | Weekday::Sun => DayType::Weekend,
            _ => DayType::Weekday,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DayType::Weekday => "weekday",
            DayType::Weekend => "weekend",
        }
    }
}

impl fmt::Display for DayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HourlyRoutine {
    pub city: String,
    pub class: UserClass,
    pub daytype: DayType,
    /// Check-ins per local clock hour.
    pub counts: [u64; 24],
}

impl HourlyRoutine {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn hourly_routine(tracks: &[UserTrack], city: &str, class: UserClass, daytype: DayType) -> HourlyRoutine {
    let mut counts = [0u64; 24];
    for c in tracks.iter().flat_map(|t| &t.checkins) {
        if DayType::of(c) == daytype {
            counts[c.timestamp.hour() as usize] += 1;
        }
    }
    HourlyRoutine {
        city: city.to_string(),
        class,
        daytype,
        counts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryPopularity {
    pub city: String,
    pub class: UserClass,
    /// Indexed by [`Category::index`].
    pub counts: [u64; Category::COUNT],
    /// Counts divided by their total; `None` when the slice is empty.
    pub fractions: Option<[f64; Category::COUNT]>,
}

impl CategoryPopularity {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn count(&self, category: Category) -> u64 {
        self.counts[category.index()]
    }
}

/// Check-ins per remapped category. Check-ins at unknown venues are skipped.
pub fn category_popularity(
    tracks: &[UserTrack],
    venues: &VenueCatalog,
    city: &str,
    class: UserClass,
) -> CategoryPopularity {
    let mut counts = [0u64; Category::COUNT];
    for c in tracks.iter().flat_map(|t| &t.checkins) {
        if let Some(v) = venues.get(&c.venue_id) {
            counts[v.category.index()] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    let fractions = (total > 0).then(|| counts.map(|c| c as f64 / total as f64));
    CategoryPopularity {
        city: city.to_string(),
        class,
        counts,
        fractions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Venue;
    use chrono::DateTime;

    fn venue(id: &str, name: &str, category: Category) -> Venue {
        Venue {
            venue_id: id.into(),
            name: name.into(),
            city: "rio".into(),
            lat: -22.9,
            lon: -43.2,
            raw_category: String::new(),
            subcategory: String::new(),
            category,
        }
    }

    fn track(user: &str, items: &[(&str, &str)]) -> UserTrack {
        UserTrack {
            user_id: user.into(),
            checkins: items
                .iter()
                .enumerate()
                .map(|(i, (venue, ts))| CheckIn {
                    checkin_id: format!("{user}-{i}"),
                    user_id: user.into(),
                    venue_id: venue.to_string(),
                    timestamp: DateTime::parse_from_rfc3339(ts).unwrap(),
                    lat: 0.0,
                    lon: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn intervals() {
        let single = [track("u", &[("a", "2014-06-02T10:00:00-03:00")])];
        assert!(interval_distribution(&single, "rio", UserClass::Tourist)
            .samples
            .is_empty());

        let pair = [track(
            "u",
            &[("a", "2014-06-02T10:00:00-03:00"), ("b", "2014-06-02T13:30:00-03:00")],
        )];
        assert_eq!(interval_distribution(&pair, "rio", UserClass::Tourist).samples, [3.5]);

        let two = [
            track("u", &[("a", "2014-06-02T10:00:00Z"), ("b", "2014-06-02T11:00:00Z")]),
            track("w", &[("a", "2014-06-02T10:00:00Z"), ("b", "2014-06-03T10:00:00Z")]),
        ];
        assert_eq!(
            interval_distribution(&two, "rio", UserClass::Resident).samples,
            [1.0, 24.0]
        );

        let dup = [track(
            "u",
            &[
                ("a", "2014-06-02T10:00:00Z"),
                ("b", "2014-06-02T10:00:00Z"),
                ("c", "2014-06-02T10:30:00Z"),
            ],
        )];
        let d = interval_distribution(&dup, "rio", UserClass::Resident);
        assert_eq!((d.samples.as_slice(), d.dropped), ([0.5].as_slice(), 1));
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one() {
        let cdf = empirical_cdf(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(cdf, [(1.0, 0.25), (2.0, 0.5), (2.0, 0.75), (3.0, 1.0)]);
        assert!(empirical_cdf(&[]).is_empty());
    }

    #[test]
    fn ranking_order_and_ties() {
        let cat: VenueCatalog = [venue("a", "Alpha", Category::Arts), venue("b", "Beta", Category::Arts)]
            .into_iter()
            .collect();
        assert!(venue_ranking(&[], &cat, 3).is_empty());

        let ts = "2014-06-02T10:00:00Z";
        let five_three = [track("u", &[("a", ts); 5]), track("w", &[("b", ts); 3])];
        let top = venue_ranking(&five_three, &cat, 1);
        assert_eq!((top.len(), top[0].venue_id.as_str(), top[0].count), (1, "a", 5));

        let tied = [track("u", &[("b", ts); 5]), track("w", &[("a", ts); 5])];
        let ids: Vec<_> = venue_ranking(&tied, &cat, 2).into_iter().map(|r| r.venue_id).collect();
        assert_eq!(ids, ["a", "b"]);
        // Swapping names swaps the order.
        let swapped: VenueCatalog = [venue("a", "Beta", Category::Arts), venue("b", "Alpha", Category::Arts)]
            .into_iter()
            .collect();
        let ids: Vec<_> = venue_ranking(&tied, &swapped, 2)
            .into_iter()
            .map(|r| r.venue_id)
            .collect();
        assert_eq!(ids, ["b", "a"]);
    }

    #[test]
    fn routines() {
        // 2014-06-07 is a Saturday.
        let sat = [track("u", &[("a", "2014-06-07T14:05:00-03:00")])];
        let r = hourly_routine(&sat, "rio", UserClass::Tourist, DayType::Weekend);
        assert_eq!(r.counts[14], 1);
        assert_eq!(r.total(), 1);
        assert_eq!(
            hourly_routine(&sat, "rio", UserClass::Tourist, DayType::Weekday).total(),
            0
        );
        assert_eq!(
            hourly_routine(&[], "rio", UserClass::Tourist, DayType::Weekday).counts,
            [0; 24]
        );

        let week = [track(
            "u",
            &[
                ("a", "2014-06-02T08:10:00+09:00"),
                ("a", "2014-06-03T08:40:00+09:00"),
                ("a", "2014-06-04T08:59:59+09:00"),
            ],
        )];
        assert_eq!(
            hourly_routine(&week, "tokyo", UserClass::Resident, DayType::Weekday).counts[8],
            3
        );
    }

    #[test]
    fn local_clock_decides_hour_and_day() {
        // Friday 23:30 in UTC-3 is already Saturday in UTC.
        let t = [track("u", &[("a", "2014-06-06T23:30:00-03:00")])];
        let r = hourly_routine(&t, "rio", UserClass::Tourist, DayType::Weekday);
        assert_eq!(r.counts[23], 1);
    }

    #[test]
    fn category_counts() {
        let cat: VenueCatalog = [
            venue("r", "Resto", Category::Restaurants),
            venue("h", "Hotel", Category::Travel),
            venue("t", "Station", Category::Transport),
        ]
        .into_iter()
        .collect();
        let ts = "2014-06-02T10:00:00Z";
        let p = category_popularity(&[track("u", &[("r", ts); 4])], &cat, "rio", UserClass::Tourist);
        assert_eq!(p.count(Category::Restaurants), 4);
        assert_eq!(p.total(), 4);
        assert_eq!(p.fractions.unwrap()[Category::Restaurants.index()], 1.0);

        let empty = category_popularity(&[], &cat, "rio", UserClass::Tourist);
        assert_eq!(empty.total(), 0);
        assert!(empty.fractions.is_none());

        let mixed = category_popularity(
            &[track("u", &[("h", ts), ("h", ts), ("t", ts), ("t", ts)])],
            &cat,
            "rio",
            UserClass::Tourist,
        );
        let f = mixed.fractions.unwrap();
        assert_eq!(
            (f[Category::Travel.index()], f[Category::Transport.index()]),
            (0.5, 0.5)
        );
        assert_eq!(f.iter().sum::<f64>(), 1.0);
    }
}
