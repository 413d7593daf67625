//! Synthetic knowledge-graph generator with planted regularities.
//!
//! The generated graph holds three disjoint sub-populations plus noise:
//!
//! * **athletes** with club and national-team memberships whose intervals
//!   are disjoint within each team class but frequently overlap across
//!   classes, so the coarse disjointness constraint lands in the refinement
//!   band while the class-restricted variants score high;
//! * **persons** with one birthplace each, except for a small fraction
//!   carrying two conflicting birthplaces (uniqueness regularity);
//! * **scholars** where a student's degree comes strictly after the
//!   advisor's educational stay, with a small violation rate (link-pattern
//!   precedence regularity).
//!
//! Noise facts are random per-entity activities and links: their timing is
//! jittered around each entity's own era and their granularity is mixed, so
//! they produce the borderline and undecidable evidence real graphs have
//! without planting additional high-confidence regularities. Everything is
//! driven by one seeded generator; the same seed yields byte-identical
//! output.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::TimePoint;

pub const CLASS_PROPERTY: &str = "instance_of";

#[derive(Debug, Clone)]
pub struct FixtureConfig {
    pub seed: u64,
    /// Athletes and persons each number `size`; scholars scale from it.
    pub size: u32,
    /// Chance that an athlete's national stint overlaps a club stint.
    pub coarse_exception_rate: f64,
    /// Chance of an overlap within one team class.
    pub class_exception_rate: f64,
    /// Chance that a person carries two birthplaces.
    pub double_birthplace_rate: f64,
    /// Chance that a degree predates the advisor's education.
    pub advisor_violation_rate: f64,
    /// Noise facts as a fraction of all facts.
    pub noise_rate: f64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            size: 10_000,
            coarse_exception_rate: 0.40,
            class_exception_rate: 0.02,
            double_birthplace_rate: 0.02,
            advisor_violation_rate: 0.03,
            noise_rate: 0.10,
        }
    }
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("rate `{0}` must lie in [0, 1]")]
    BadRate(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl FixtureConfig {
    pub fn validate(&self) -> Result<(), FixtureError> {
        for (name, v) in [
            ("coarse_exception_rate", self.coarse_exception_rate),
            ("class_exception_rate", self.class_exception_rate),
            ("double_birthplace_rate", self.double_birthplace_rate),
            ("advisor_violation_rate", self.advisor_violation_rate),
            ("noise_rate", self.noise_rate),
        ] {
            if !(0.0..=1.0).contains(&v) || (name == "noise_rate" && v >= 1.0 && v != 0.0) {
                return Err(FixtureError::BadRate(name));
            }
        }
        Ok(())
    }
}

/// Identity and expectation of one planted constraint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedConstraint {
    pub shape: String,
    pub properties: Vec<String>,
    #[serde(rename = "linkDirection")]
    pub link_direction: Option<String>,
    pub head: String,
    pub restriction: Option<BTreeMap<String, String>>,
    /// Analytic confidence from the planted rates; realized values differ
    /// only by sampling noise.
    pub expected_confidence: f64,
    pub expected_support: u64,
    /// Whether mining at the manifest's thresholds should emit it.
    pub expect_accepted: bool,
}

impl PlantedConstraint {
    /// Same layout as the miner's constraint identity string.
    pub fn identity(&self) -> String {
        let mut s = format!("{}|", self.shape);
        s.push_str(&self.properties.join("|"));
        s.push('|');
        s.push_str(self.link_direction.as_deref().unwrap_or("-"));
        s.push('|');
        s.push_str(&self.head);
        s.push('|');
        match &self.restriction {
            None => s.push('-'),
            Some(r) => {
                for (i, (slot, class)) in r.iter().enumerate() {
                    if i > 0 {
                        s.push(',');
                    }
                    s.push_str(slot);
                    s.push(':');
                    s.push_str(class);
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedRegularity {
    pub name: String,
    pub constraints: Vec<PlantedConstraint>,
}

/// Ground truth emitted alongside a generated fixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub seed: u64,
    pub size: u32,
    /// Mining thresholds the `expect_accepted` flags assume.
    pub theta_freq: u32,
    pub theta_accept: f64,
    pub theta_refine: f64,
    pub class_property: String,
    pub regularities: Vec<PlantedRegularity>,
}

const MANIFEST_THETA_FREQ: u32 = 100;
const MANIFEST_THETA_ACCEPT: f64 = 0.9;
const MANIFEST_THETA_REFINE: f64 = 0.5;

struct Writerow<W: Write> {
    out: W,
    facts: u64,
}

impl<W: Write> Writerow<W> {
    fn temporal(&mut self, s: &str, p: &str, o: &str, ts: &str, te: &str) -> io::Result<()> {
        self.facts += 1;
        writeln!(self.out, "{s}\t{p}\t{o}\t{ts}\t{te}")
    }

    fn temporal_days(&mut self, s: &str, p: &str, o: &str, start: i64, end: i64) -> io::Result<()> {
        let ts = TimePoint::from_day_index(start).to_string();
        let te = TimePoint::from_day_index(end).to_string();
        self.temporal(s, p, o, &ts, &te)
    }

    fn plain(&mut self, s: &str, p: &str, o: &str) -> io::Result<()> {
        self.facts += 1;
        writeln!(self.out, "{s}\t{p}\t{o}\t-\t-")
    }
}

fn day_of(year: i32, rng: &mut ChaCha8Rng) -> i64 {
    let month = rng.random_range(1..=12u32);
    let day = rng.random_range(1..=28u32);
    TimePoint::from_ymd(year, month, day)
        .expect("days capped at 28")
        .day_range()
        .lo()
        .unwrap()
}

fn distinct_indices(rng: &mut ChaCha8Rng, n: usize, pool: usize) -> Vec<usize> {
    debug_assert!(n <= pool);
    let mut out: Vec<usize> = Vec::with_capacity(n);
    while out.len() < n {
        let i = rng.random_range(0..pool);
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// Generate a fixture as TSV, returning the manifest of planted
/// regularities. `size == 0` produces an empty graph and an empty manifest.
pub fn generate<W: Write>(config: &FixtureConfig, out: W) -> Result<FixtureManifest, FixtureError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w = Writerow { out, facts: 0 };
    let size = config.size as usize;

    let n_clubs = if size == 0 { 0 } else { (size / 250).max(6) };
    let n_nats = if size == 0 { 0 } else { (size / 833).max(4) };
    let n_unis = if size == 0 { 0 } else { (size / 1000).max(3) };
    let n_places = if size == 0 { 0 } else { (size / 33).max(8) };
    let n_advisors = if size == 0 { 0 } else { (size / 10).max(1) };
    let n_students = size / 3;

    let clubs: Vec<String> = (0..n_clubs).map(|i| format!("club_{i:03}")).collect();
    let nats: Vec<String> = (0..n_nats).map(|i| format!("nat_team_{i:02}")).collect();
    let unis: Vec<String> = (0..n_unis).map(|i| format!("uni_{i:02}")).collect();
    let places: Vec<String> = (0..n_places).map(|i| format!("place_{i:04}")).collect();

    for c in &clubs {
        w.plain(c, CLASS_PROPERTY, "club")?;
    }
    for n in &nats {
        w.plain(n, CLASS_PROPERTY, "national_team")?;
    }
    for u in &unis {
        w.plain(u, CLASS_PROPERTY, "university")?;
    }
    for p in &places {
        w.plain(p, CLASS_PROPERTY, "city")?;
    }
    if size > 0 {
        w.plain("phd_degree", CLASS_PROPERTY, "degree")?;
    }

    // era anchor per person-like entity, used to place noise facts
    let mut entities: Vec<(String, i64)> = Vec::new();

    // athletes: club stints in sequence, national stints after them,
    // exceptions re-positioned to overlap
    for i in 0..size {
        let name = format!("athlete_{i:06}");
        w.plain(&name, CLASS_PROPERTY, "athlete")?;
        let start_year = rng.random_range(1985..=2012);
        let mut cursor = day_of(start_year, &mut rng);
        entities.push((name.clone(), cursor));

        let n_own_clubs = rng.random_range(2..=3usize);
        let club_picks = distinct_indices(&mut rng, n_own_clubs, clubs.len());
        let mut club_stints: Vec<(usize, i64, i64)> = Vec::new();
        for &ci in &club_picks {
            let len = rng.random_range(320..=1400i64);
            club_stints.push((ci, cursor, cursor + len));
            cursor += len + rng.random_range(30..=700i64);
        }
        if rng.random_bool(config.class_exception_rate) {
            // second club signed before the first stint ended
            let mid = (club_stints[0].1 + club_stints[0].2) / 2;
            club_stints[1].1 = mid;
        }

        let n_own_nats = if rng.random_bool(0.3) { 2 } else { 1 };
        let nat_picks = distinct_indices(&mut rng, n_own_nats, nats.len());
        let mut nat_stints: Vec<(usize, i64, i64)> = Vec::new();
        for &ni in &nat_picks {
            let len = rng.random_range(200..=900i64);
            nat_stints.push((ni, cursor, cursor + len));
            cursor += len + rng.random_range(30..=700i64);
        }
        if rng.random_bool(config.coarse_exception_rate) {
            // a national call-up during the first club stint
            let (_, cs, ce) = club_stints[0];
            let len = ce - cs;
            let s = cs + len / 5;
            let e = (s + (len / 3).max(30)).min(ce - 1);
            nat_stints[0].1 = s;
            nat_stints[0].2 = e.max(s + 1);
        }
        // planted after any repositioning so the overlap always lands
        if n_own_nats == 2 && rng.random_bool(config.class_exception_rate) {
            let mid = (nat_stints[0].1 + nat_stints[0].2) / 2;
            nat_stints[1].1 = mid;
        }

        for (ci, s, e) in club_stints {
            w.temporal_days(&name, "member_of_team", &clubs[ci], s, e)?;
        }
        for (ni, s, e) in nat_stints {
            w.temporal_days(&name, "member_of_team", &nats[ni], s, e)?;
        }
    }

    // persons: birthplaces, occasionally two conflicting ones
    for i in 0..size {
        let name = format!("person_{i:06}");
        w.plain(&name, CLASS_PROPERTY, "person")?;
        let birth = day_of(rng.random_range(1900..=2000), &mut rng);
        entities.push((name.clone(), birth));
        let place = &places[rng.random_range(0..places.len())];
        w.temporal_days(&name, "born_in", place, birth, birth)?;
        if rng.random_bool(config.double_birthplace_rate) {
            let mut other = rng.random_range(0..places.len());
            while places[other] == *place {
                other = rng.random_range(0..places.len());
            }
            let second_date = if rng.random_bool(0.5) {
                birth
            } else {
                let mut d = day_of(rng.random_range(1900..=2000), &mut rng);
                while d == birth {
                    d = day_of(rng.random_range(1900..=2000), &mut rng);
                }
                d
            };
            w.temporal_days(&name, "born_in", &places[other], second_date, second_date)?;
        }
    }

    // scholars: advisors are educated somewhere; a student's degree follows
    // the advisor's education except for planted violations
    let mut advisor_educ_end: Vec<(i64, i64)> = Vec::new();
    for i in 0..n_advisors {
        let name = format!("advisor_{i:05}");
        w.plain(&name, CLASS_PROPERTY, "researcher")?;
        let start = day_of(rng.random_range(1945..=1995), &mut rng);
        let end = start + rng.random_range(3 * 365..=6 * 365i64);
        let uni = &unis[rng.random_range(0..unis.len())];
        w.temporal_days(&name, "educated_at", uni, start, end)?;
        advisor_educ_end.push((start, end));
        entities.push((name, start));
    }
    for i in 0..n_students {
        let name = format!("student_{i:06}");
        w.plain(&name, CLASS_PROPERTY, "researcher")?;
        let advisor_idx = i % n_advisors;
        let advisor = format!("advisor_{advisor_idx:05}");
        w.plain(&name, "has_advisor", &advisor)?;
        let (educ_start, educ_end) = advisor_educ_end[advisor_idx];
        let degree = if rng.random_bool(config.advisor_violation_rate) {
            rng.random_range(educ_start..educ_end)
        } else {
            educ_end + rng.random_range(365..=7300i64)
        };
        w.temporal_days(&name, "received_degree", "phd_degree", degree, degree)?;
        entities.push((name, degree));
    }

    // noise: per-entity activity clusters with mixed granularity, plus
    // random links pointing mostly at organizations and places
    let planted_facts = w.facts;
    let noise_total = if config.noise_rate > 0.0 {
        (planted_facts as f64 * config.noise_rate / (1.0 - config.noise_rate)).round() as u64
    } else {
        0
    };
    let temporal_noise_target = noise_total * 6 / 10;
    let plain_noise_target = noise_total - temporal_noise_target;

    let mut inert_objects: Vec<&String> = Vec::new();
    inert_objects.extend(clubs.iter());
    inert_objects.extend(nats.iter());
    inert_objects.extend(unis.iter());
    inert_objects.extend(places.iter());

    let mut cluster_order: Vec<usize> = (0..entities.len()).collect();
    cluster_order.shuffle(&mut rng);
    let mut cluster_cursor = 0usize;
    let activity_props = ["activity_a", "activity_b", "activity_c"];
    let mut emitted = 0u64;
    while emitted < temporal_noise_target && cluster_cursor < cluster_order.len() {
        let (name, era) = &entities[cluster_order[cluster_cursor]];
        cluster_cursor += 1;
        let prop = activity_props[rng.random_range(0..activity_props.len())];
        let k = match rng.random_range(0..100u32) {
            0..=34 => 1,
            35..=74 => 2,
            _ => 3,
        };
        let obj_picks = distinct_indices(&mut rng, k, inert_objects.len());
        for &oi in &obj_picks {
            let base = era + rng.random_range(-2900..=2900i64);
            let span = rng.random_range(90..=2900i64);
            let end = base + span;
            match rng.random_range(0..100u32) {
                0..=44 => {
                    // year granularity
                    let ys = TimePoint::from_day_index(base).year();
                    let ye = TimePoint::from_day_index(end).year();
                    w.temporal(name, prop, inert_objects[oi], &ys.to_string(), &ye.to_string())?;
                }
                45..=69 => {
                    let s = TimePoint::from_day_index(base);
                    let e = TimePoint::from_day_index(end);
                    let ts = format!("{}-{:02}", s.year(), s.month().unwrap());
                    let te = format!("{}-{:02}", e.year(), e.month().unwrap());
                    w.temporal(name, prop, inert_objects[oi], &ts, &te)?;
                }
                70..=84 => {
                    w.temporal_days(name, prop, inert_objects[oi], base, end)?;
                }
                _ => {
                    let ts = TimePoint::from_day_index(base).to_string();
                    let te = TimePoint::from_day_index(end).to_string();
                    if rng.random_bool(0.5) {
                        w.temporal(name, prop, inert_objects[oi], &ts, "-")?;
                    } else {
                        w.temporal(name, prop, inert_objects[oi], "-", &te)?;
                    }
                }
            }
            emitted += 1;
            if emitted >= temporal_noise_target {
                break;
            }
        }
    }

    let link_props = ["related_to_a", "related_to_b", "related_to_c"];
    let mut emitted = 0u64;
    while emitted < plain_noise_target && !entities.is_empty() {
        let (subject, _) = &entities[rng.random_range(0..entities.len())];
        let prop = link_props[rng.random_range(0..link_props.len())];
        if rng.random_bool(0.9) {
            let obj = inert_objects[rng.random_range(0..inert_objects.len())];
            w.plain(subject, prop, obj)?;
        } else {
            let (obj, _) = &entities[rng.random_range(0..entities.len())];
            if obj != subject {
                w.plain(subject, prop, obj)?;
            } else {
                continue;
            }
        }
        emitted += 1;
    }

    Ok(build_manifest(config, n_students as u64))
}

/// Convenience wrapper returning the TSV as a string.
pub fn generate_to_string(config: &FixtureConfig) -> Result<(String, FixtureManifest), FixtureError> {
    let mut buf = Vec::new();
    let manifest = generate(config, &mut buf)?;
    Ok((String::from_utf8(buf).expect("generator writes UTF-8"), manifest))
}

fn build_manifest(config: &FixtureConfig, n_students: u64) -> FixtureManifest {
    let size = u64::from(config.size);
    let mut regularities = Vec::new();
    if size > 0 {
        let theta = u64::from(MANIFEST_THETA_FREQ);
        // a support expectation clears the gate only with margin to spare,
        // so sampling noise cannot flip the flag
        let clears = |expected: u64| expected * 7 / 10 >= theta;
        let cross = config.coarse_exception_rate;
        let class_exc = config.class_exception_rate;
        let coarse_conf =
            (1.0 - cross) * (1.0 - class_exc) * (1.0 - 0.3 * class_exc);
        let two_nat_support = (size as f64 * 0.3) as u64;
        let in_refine_band =
            (MANIFEST_THETA_REFINE..MANIFEST_THETA_ACCEPT).contains(&coarse_conf);
        let refined_conf = 1.0 - class_exc;
        let refined_ok = refined_conf >= MANIFEST_THETA_ACCEPT && in_refine_band;
        let member_props = vec!["member_of_team".to_string(), "member_of_team".to_string()];
        let paired = |class: &str| {
            Some(BTreeMap::from([
                ("y".to_string(), class.to_string()),
                ("z".to_string(), class.to_string()),
            ]))
        };
        regularities.push(PlantedRegularity {
            name: "disjoint_careers".to_string(),
            constraints: vec![
                PlantedConstraint {
                    shape: "a".to_string(),
                    properties: member_props.clone(),
                    link_direction: None,
                    head: "disjoint".to_string(),
                    restriction: None,
                    expected_confidence: coarse_conf,
                    expected_support: size,
                    expect_accepted: coarse_conf >= MANIFEST_THETA_ACCEPT && clears(size),
                },
                PlantedConstraint {
                    shape: "a".to_string(),
                    properties: member_props.clone(),
                    link_direction: None,
                    head: "disjoint".to_string(),
                    restriction: paired("club"),
                    expected_confidence: refined_conf,
                    expected_support: size,
                    expect_accepted: refined_ok && clears(size),
                },
                PlantedConstraint {
                    shape: "a".to_string(),
                    properties: member_props,
                    link_direction: None,
                    head: "disjoint".to_string(),
                    restriction: paired("national_team"),
                    expected_confidence: refined_conf,
                    expected_support: two_nat_support,
                    expect_accepted: refined_ok && clears(two_nat_support),
                },
            ],
        });
        let me_conf = 1.0 - config.double_birthplace_rate;
        let doubles = (size as f64 * config.double_birthplace_rate) as u64;
        regularities.push(PlantedRegularity {
            name: "unique_birthplace".to_string(),
            constraints: vec![PlantedConstraint {
                shape: "a".to_string(),
                properties: vec!["born_in".to_string(), "born_in".to_string()],
                link_direction: None,
                head: "mutual_exclusion".to_string(),
                restriction: None,
                expected_confidence: me_conf,
                expected_support: size,
                // the pattern instantiates only off double-birthplace holders
                expect_accepted: me_conf >= MANIFEST_THETA_ACCEPT && clears(doubles),
            }],
        });
        let advisor_conf = 1.0 - config.advisor_violation_rate;
        regularities.push(PlantedRegularity {
            name: "advisor_precedence".to_string(),
            constraints: vec![PlantedConstraint {
                shape: "b".to_string(),
                properties: vec![
                    "has_advisor".to_string(),
                    "educated_at".to_string(),
                    "received_degree".to_string(),
                ],
                link_direction: Some("forward".to_string()),
                head: "before".to_string(),
                restriction: None,
                expected_confidence: advisor_conf,
                expected_support: n_students,
                expect_accepted: advisor_conf >= MANIFEST_THETA_ACCEPT && clears(n_students),
            }],
        });
    }
    FixtureManifest {
        seed: config.seed,
        size: config.size,
        theta_freq: MANIFEST_THETA_FREQ,
        theta_accept: MANIFEST_THETA_ACCEPT,
        theta_refine: MANIFEST_THETA_REFINE,
        class_property: CLASS_PROPERTY.to_string(),
        regularities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_size_yields_empty_graph_and_manifest() {
        let cfg = FixtureConfig { size: 0, ..Default::default() };
        let (tsv, manifest) = generate_to_string(&cfg).unwrap();
        assert!(tsv.is_empty());
        assert!(manifest.regularities.is_empty());
    }

    #[test]
    fn same_seed_means_identical_output() {
        let cfg = FixtureConfig { size: 300, ..Default::default() };
        let (a, _) = generate_to_string(&cfg).unwrap();
        let (b, _) = generate_to_string(&cfg).unwrap();
        assert_eq!(a, b);
        let other = FixtureConfig { seed: 8, ..cfg };
        let (c, _) = generate_to_string(&other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn manifest_lists_three_planted_regularities() {
        let cfg = FixtureConfig::default();
        let manifest = build_manifest(&cfg, 3333);
        assert_eq!(manifest.regularities.len(), 3);
        let accepted: Vec<&PlantedConstraint> = manifest
            .regularities
            .iter()
            .flat_map(|r| &r.constraints)
            .filter(|c| c.expect_accepted)
            .collect();
        // two refined career constraints, birthplace uniqueness, precedence
        assert_eq!(accepted.len(), 4);
        // the coarse career constraint sits in the refinement band
        let coarse = &manifest.regularities[0].constraints[0];
        assert!(!coarse.expect_accepted);
        assert!(coarse.expected_confidence >= 0.5 && coarse.expected_confidence < 0.9);
    }

    #[test]
    fn generated_output_parses_cleanly() {
        let cfg = FixtureConfig { size: 120, ..Default::default() };
        let (tsv, _) = generate_to_string(&cfg).unwrap();
        let config = crate::ingest::IngestConfig {
            class_property: Some(CLASS_PROPERTY.to_string()),
            ..Default::default()
        };
        let (store, report) = crate::ingest::ingest_reader(
            std::io::Cursor::new(tsv.as_bytes()),
            crate::ingest::InputFormat::Tsv,
            &config,
        )
        .unwrap();
        assert_eq!(report.malformed, 0);
        assert_eq!(report.rejected_intervals, 0);
        assert!(store.temporal_facts().len() > 300);
        assert!(store.stats().classes >= 7);
    }
}
