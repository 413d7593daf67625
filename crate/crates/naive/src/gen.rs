//! Seeded random stores for differential tests.
//!
//! Each store mixes pure noise with planted regularities whose strength is
//! itself drawn at random, so across seeds the miner exercises every path:
//! acceptance, refinement (with class-correlated exceptions), and
//! discarding. Interval granularities and absent endpoints are mixed to
//! cover the undecidable cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tcmine_core::store::{KgStore, ObjectRef, StoreBuilder};
use tcmine_core::time::{TimeInterval, TimePoint};

pub const CLASS_PROPERTY: &str = "kind";

fn day(rng: &mut ChaCha8Rng, year: i32) -> i64 {
    TimePoint::from_ymd(year, rng.random_range(1..=12), rng.random_range(1..=28))
        .unwrap()
        .day_range()
        .lo()
        .unwrap()
}

fn exact(start: i64, end: i64) -> TimeInterval {
    TimeInterval::new(
        Some(TimePoint::from_day_index(start)),
        Some(TimePoint::from_day_index(end)),
    )
}

fn random_interval(rng: &mut ChaCha8Rng) -> TimeInterval {
    let y1 = rng.random_range(1950..=2040);
    let y2 = y1 + rng.random_range(0..=12);
    match rng.random_range(0..100u32) {
        0..=34 => {
            let s = day(rng, y1);
            let e = s + rng.random_range(0..=4000i64);
            exact(s, e)
        }
        35..=54 => TimeInterval::new(
            Some(TimePoint::from_year(y1)),
            Some(TimePoint::from_year(y2)),
        ),
        55..=69 => {
            let m1 = rng.random_range(1..=12);
            let m2 = rng.random_range(1..=12);
            TimeInterval::new(
                Some(TimePoint::from_year_month(y1, m1).unwrap()),
                Some(TimePoint::from_year_month(y2.max(y1 + 1), m2).unwrap()),
            )
        }
        70..=84 => TimeInterval::new(Some(TimePoint::from_year(y1)), None),
        _ => TimeInterval::new(None, Some(TimePoint::from_year(y2))),
    }
}

/// Build a random store of at most a few thousand facts.
pub fn random_store(seed: u64) -> KgStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = StoreBuilder::new().with_class_property(CLASS_PROPERTY);

    let n_entities = rng.random_range(140..=320usize);
    let n_tprops = rng.random_range(4..=6usize);
    let n_links = rng.random_range(2..=3usize);
    let n_classes = rng.random_range(3..=5usize);

    let entities: Vec<String> = (0..n_entities).map(|i| format!("e{i}")).collect();
    let tprops: Vec<String> = (0..n_tprops).map(|i| format!("t_prop_{i}")).collect();
    let links: Vec<String> = (0..n_links).map(|i| format!("link_{i}")).collect();

    // organizations carry one of three kinds; regular-pattern exceptions
    // correlate with kind 0 so refinement has something to find
    let orgs: Vec<String> = (0..12).map(|i| format!("org_{i}")).collect();
    for (i, org) in orgs.iter().enumerate() {
        b.add_plain(org, CLASS_PROPERTY, ObjectRef::Resource(&format!("org_kind_{}", i % 3)));
    }
    for e in &entities {
        if rng.random_bool(0.7) {
            let c = rng.random_range(0..n_classes);
            b.add_plain(e, CLASS_PROPERTY, ObjectRef::Resource(&format!("class_{c}")));
        }
    }

    // background noise facts
    for e in &entities {
        for _ in 0..rng.random_range(0..=4usize) {
            let p = &tprops[rng.random_range(0..n_tprops)];
            let iv = random_interval(&mut rng);
            if rng.random_bool(0.12) {
                let lit = format!("note {}", rng.random_range(0..40u32));
                let _ = b.add_temporal(e, p, ObjectRef::Literal(&lit), iv);
            } else {
                let o = &entities[rng.random_range(0..n_entities)];
                let _ = b.add_temporal(e, p, ObjectRef::Resource(o), iv);
            }
        }
    }

    // planted shared-subject regularity on t_prop_0 over org objects
    if rng.random_bool(0.85) {
        let exception_rate = [0.0, 0.03, 0.08, 0.2, 0.35][rng.random_range(0..5usize)];
        for e in &entities {
            if !rng.random_bool(0.6) {
                continue;
            }
            let n_stints = rng.random_range(2..=3usize);
            let year = rng.random_range(1960..=2000);
            let mut cursor = day(&mut rng, year);
            let mut picked: Vec<usize> = Vec::new();
            while picked.len() < n_stints {
                let o = rng.random_range(0..orgs.len());
                if !picked.contains(&o) {
                    picked.push(o);
                }
            }
            let mut stints: Vec<(usize, i64, i64)> = Vec::new();
            for &o in &picked {
                let len = rng.random_range(200..=1500i64);
                stints.push((o, cursor, cursor + len));
                cursor += len + rng.random_range(20..=400i64);
            }
            if rng.random_bool(exception_rate) {
                // overlap the first two stints, forcing org kind 0 into one
                // end so class restrictions can separate the exceptions
                stints[1].1 = (stints[0].1 + stints[0].2) / 2;
                let kind0 = picked.iter().position(|&o| o % 3 == 0);
                if kind0.is_none() {
                    stints[0].0 = 0;
                }
            }
            for (o, s, e_) in stints {
                let _ = b.add_temporal(e, "t_prop_0", ObjectRef::Resource(&orgs[o]), exact(s, e_));
            }
        }
    }

    // planted linked precedence: link_0 connects to an earlier experience
    if rng.random_bool(0.7) {
        let violation_rate = [0.0, 0.05, 0.3][rng.random_range(0..3usize)];
        let n_pairs = rng.random_range(40..=120usize);
        for _ in 0..n_pairs {
            let a = rng.random_range(0..n_entities);
            let mut c = rng.random_range(0..n_entities);
            while c == a {
                c = rng.random_range(0..n_entities);
            }
            let (student, advisor) = (&entities[a], &entities[c]);
            b.add_plain(student, "link_0", ObjectRef::Resource(advisor));
            let year = rng.random_range(1950..=1990);
            let start = day(&mut rng, year);
            let end = start + rng.random_range(700..=2200i64);
            let _ = b.add_temporal(advisor, "t_prop_1", ObjectRef::Resource(&orgs[rng.random_range(0..orgs.len())]), exact(start, end));
            let degree = if rng.random_bool(violation_rate) {
                rng.random_range(start..end)
            } else {
                end + rng.random_range(200..=6000i64)
            };
            let _ = b.add_temporal(student, "t_prop_2", ObjectRef::Resource("phd"), exact(degree, degree));
        }
    }

    // random plain links as noise
    for _ in 0..rng.random_range(30..=120usize) {
        let a = rng.random_range(0..n_entities);
        let o = rng.random_range(0..n_entities);
        if a == o {
            continue;
        }
        let p = &links[rng.random_range(0..n_links)];
        b.add_plain(&entities[a], p, ObjectRef::Resource(&entities[o]));
    }

    b.build()
}
