//! Per-user mobility metrics on the sphere.
//!
//! Distances are haversine great-circle distances with a 6371 km Earth
//! radius. Locations are the coordinates of the visited venues.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{UserClass, UserTrack};
use crate::ingest::VenueCatalog;

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const DEFAULT_MIN_CHECKINS_RG: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum MobilityError {
    #[error("mean displacement is undefined for an empty check-in sequence")]
    EmptyInput,
    #[error("coordinate ({lat}, {lon}) out of range")]
    InvalidPoint { lat: f64, lon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, MobilityError> {
        if lat.is_finite() && lon.is_finite() && lat.abs() <= 90.0 && lon.abs() <= 180.0 {
            Ok(GeoPoint { lat, lon })
        } else {
            Err(MobilityError::InvalidPoint { lat, lon })
        }
    }
}

/// Great-circle distance in kilometres.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Divisor of the summed consecutive distances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisplacementDenominator {
    /// Total check-in count N.
    #[default]
    Checkins,
    /// Transition count N - 1 (zero transitions give 0).
    Transitions,
}

/// Summed distance between consecutive points divided by the check-in count
/// (or by the transition count when asked to).
pub fn mean_displacement(points: &[GeoPoint], denominator: DisplacementDenominator) -> Result<f64, MobilityError> {
    if points.is_empty() {
        return Err(MobilityError::EmptyInput);
    }
    let total: f64 = points.windows(2).map(|w| haversine_km(w[0], w[1])).sum();
    let divisor = match denominator {
        DisplacementDenominator::Checkins => points.len(),
        DisplacementDenominator::Transitions if points.len() == 1 => return Ok(0.0),
        DisplacementDenominator::Transitions => points.len() - 1,
    };
    Ok(total / divisor as f64)
}

/// One check-in reduced to the visited site and its location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit<'a> {
    pub site: &'a str,
    pub point: GeoPoint,
}

fn site_counts<'a>(visits: &[Visit<'a>]) -> BTreeMap<&'a str, (GeoPoint, usize)> {
    let mut sites: BTreeMap<&str, (GeoPoint, usize)> = BTreeMap::new();
    for v in visits {
        sites.entry(v.site).or_insert((v.point, 0)).1 += 1;
    }
    sites
}

/// Check-in-weighted mean of latitude and longitude. `None` for no visits.
/// Offsets are accumulated relative to the first visit, so a single site
/// is its own centre exactly.
pub fn center_of_mass(visits: &[Visit<'_>]) -> Option<GeoPoint> {
    let origin = visits.first()?.point;
    let n = visits.len() as f64;
    let (mut dlat, mut dlon) = (0.0, 0.0);
    for (point, count) in site_counts(visits).values() {
        dlat += *count as f64 * (point.lat - origin.lat);
        dlon += *count as f64 * (point.lon - origin.lon);
    }
    Some(GeoPoint {
        lat: origin.lat + dlat / n,
        lon: origin.lon + dlon / n,
    })
}

/// Radius of gyration over distinct sites weighted by their check-in counts.
/// `None` when there are fewer than `min_checkins` visits.
pub fn radius_of_gyration(visits: &[Visit<'_>], min_checkins: usize) -> Option<f64> {
    if visits.is_empty() || visits.len() < min_checkins {
        return None;
    }
    let cm = center_of_mass(visits)?;
    let n = visits.len() as f64;
    let sum: f64 = site_counts(visits)
        .values()
        .map(|(point, count)| *count as f64 * haversine_km(*point, cm).powi(2))
        .sum();
    Some((sum / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilitySummary {
    pub user_id: String,
    pub city: String,
    pub class: UserClass,
    pub checkin_count: usize,
    pub mean_displacement_km: f64,
    pub radius_gyration_km: Option<f64>,
    pub center_of_mass: GeoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams {
    pub min_checkins_rg: usize,
    pub denominator: DisplacementDenominator,
}

impl Default for MobilityParams {
    fn default() -> Self {
        MobilityParams {
            min_checkins_rg: DEFAULT_MIN_CHECKINS_RG,
            denominator: DisplacementDenominator::Checkins,
        }
    }
}

/// Metrics for every track of one (city, class) slice. Check-ins whose
/// venue is missing from the catalog are ignored.
pub fn summarize_slice(
    tracks: &[UserTrack],
    venues: &VenueCatalog,
    city: &str,
    class: UserClass,
    params: MobilityParams,
) -> Vec<MobilitySummary> {
    tracks
        .iter()
        .filter_map(|track| {
            let visits: Vec<Visit<'_>> = track
                .checkins
                .iter()
                .filter_map(|c| {
                    let v = venues.get(&c.venue_id)?;
                    Some(Visit {
                        site: v.venue_id.as_str(),
                        point: GeoPoint { lat: v.lat, lon: v.lon },
                    })
                })
                .collect();
            let points: Vec<GeoPoint> = visits.iter().map(|v| v.point).collect();
            let mean_displacement_km = mean_displacement(&points, params.denominator).ok()?;
            Some(MobilitySummary {
                user_id: track.user_id.clone(),
                city: city.to_string(),
                class,
                checkin_count: visits.len(),
                mean_displacement_km,
                radius_gyration_km: radius_of_gyration(&visits, params.min_checkins_rg),
                center_of_mass: center_of_mass(&visits)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn visits<'a>(sites: &[(&'a str, GeoPoint)]) -> Vec<Visit<'a>> {
        sites.iter().map(|&(site, point)| Visit { site, point }).collect()
    }

    #[test]
    fn haversine_fixed_points() {
        assert_eq!(haversine_km(p(10.0, 20.0), p(10.0, 20.0)), 0.0);
        let half = haversine_km(p(0.0, 0.0), p(0.0, 180.0));
        assert!((half - std::f64::consts::PI * 6371.0).abs() < 1e-9);
        assert!((half - 20015.1).abs() < 0.1);
        // London to Paris, computed with the spherical law of cosines
        // (R = 6371 km) in an independent calculator: 343.556 km.
        let lp = haversine_km(p(51.5074, -0.1278), p(48.8566, 2.3522));
        assert!((lp - 343.556).abs() < 0.01, "{lp}");
    }

    #[test]
    fn invalid_points_rejected() {
        assert!(GeoPoint::new(90.5, 0.0).is_err());
        assert!(GeoPoint::new(0.0, f64::NAN).is_err());
    }

    #[test]
    fn mean_displacement_cases() {
        let one = [p(1.0, 1.0)];
        assert_eq!(mean_displacement(&one, DisplacementDenominator::Checkins), Ok(0.0));
        assert_eq!(mean_displacement(&one, DisplacementDenominator::Transitions), Ok(0.0));
        assert_eq!(
            mean_displacement(&[], DisplacementDenominator::Checkins),
            Err(MobilityError::EmptyInput)
        );
        let same = [p(1.0, 1.0); 4];
        assert_eq!(mean_displacement(&same, DisplacementDenominator::Checkins), Ok(0.0));

        // Points on the equator spaced so the legs are 2 km then 4 km.
        let deg_per_km = 180.0 / (std::f64::consts::PI * EARTH_RADIUS_KM);
        let path = [p(0.0, 0.0), p(0.0, 2.0 * deg_per_km), p(0.0, 6.0 * deg_per_km)];
        let d = mean_displacement(&path, DisplacementDenominator::Checkins).unwrap();
        assert!((d - 2.0).abs() < 1e-9, "{d}");
        let d = mean_displacement(&path, DisplacementDenominator::Transitions).unwrap();
        assert!((d - 3.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn radius_of_gyration_cases() {
        let here = p(-22.9, -43.2);
        assert_eq!(radius_of_gyration(&visits(&[("a", here); 5]), 5), Some(0.0));
        assert_eq!(radius_of_gyration(&visits(&[("a", here); 4]), 5), None);
        assert_eq!(radius_of_gyration(&[], 0), None);

        // Two sites 3/3 a small distance apart: brute-force planar evaluation
        // puts every check-in d/2 from the midpoint.
        let a = p(40.0, -74.0);
        let b = p(40.0, -73.99);
        let d = haversine_km(a, b);
        let six = visits(&[("a", a), ("a", a), ("a", a), ("b", b), ("b", b), ("b", b)]);
        let rg = radius_of_gyration(&six, 5).unwrap();
        assert!((rg - d / 2.0).abs() / (d / 2.0) < 1e-6, "{rg} vs {}", d / 2.0);
    }

    #[test]
    fn spreading_doubles_radius() {
        let a = p(48.85, 2.35);
        let rg = |dlon: f64| {
            let b = p(48.85, 2.35 + dlon);
            radius_of_gyration(
                &visits(&[("a", a), ("a", a), ("a", a), ("b", b), ("b", b), ("b", b)]),
                5,
            )
            .unwrap()
        };
        let ratio = rg(0.02) / rg(0.01);
        assert!((ratio - 2.0).abs() / 2.0 < 0.005, "{ratio}");
    }

    fn arb_city_visits() -> impl Strategy<Value = Vec<(usize, f64, f64)>> {
        prop::collection::vec((0usize..6, -0.05f64..0.05, -0.05f64..0.05), 1..30)
    }

    fn build(raw: &[(usize, f64, f64)], shift: (f64, f64)) -> (Vec<String>, Vec<GeoPoint>) {
        // The first occurrence of a site fixes its location.
        let mut at: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for &(s, dlat, dlon) in raw {
            at.entry(s).or_insert((dlat, dlon));
        }
        raw.iter()
            .map(|(s, _, _)| {
                let (dlat, dlon) = at[s];
                (format!("s{s}"), p(45.0 + dlat + shift.0, 7.0 + dlon + shift.1))
            })
            .unzip()
    }

    proptest! {
        #[test]
        fn rg_permutation_invariant_and_bounded(raw in arb_city_visits(), rot in 0usize..30) {
            let (names, pts) = build(&raw, (0.0, 0.0));
            let vs: Vec<Visit> = names.iter().zip(&pts).map(|(n, &point)| Visit { site: n, point }).collect();
            let mut rotated = vs.clone();
            let k = rot % rotated.len();
            rotated.rotate_left(k);
            rotated.reverse();
            let a = radius_of_gyration(&vs, 1).unwrap();
            let b = radius_of_gyration(&rotated, 1).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-9));
            let cm = center_of_mass(&vs).unwrap();
            let max = pts.iter().map(|&q| haversine_km(q, cm)).fold(0.0, f64::max);
            prop_assert!(a <= max + 1e-9);
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn rg_translation_robust(raw in arb_city_visits(), dlat in -0.01f64..0.01, dlon in -0.01f64..0.01) {
            let (names, pts) = build(&raw, (0.0, 0.0));
            let (_, moved) = build(&raw, (dlat, dlon));
            let vs: Vec<Visit> = names.iter().zip(&pts).map(|(n, &point)| Visit { site: n, point }).collect();
            let ws: Vec<Visit> = names.iter().zip(&moved).map(|(n, &point)| Visit { site: n, point }).collect();
            let a = radius_of_gyration(&vs, 1).unwrap();
            let b = radius_of_gyration(&ws, 1).unwrap();
            prop_assume!(a > 0.05);
            prop_assert!((a - b).abs() / a < 1e-3, "{} vs {}", a, b);
        }
    }
}
