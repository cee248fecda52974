use indexmap::IndexMap;
use proptest::prelude::*;

use textland::io::{MapFile, MapLandmark, MAP_VERSION};
use textland::{EngineConfig, Error, Intrinsics, Verdict, WorldPoint};

fn arb_point() -> impl Strategy<Value = WorldPoint> {
    prop::array::uniform3(-1e3f64..1e3).prop_map(WorldPoint::from)
}

fn arb_verdict() -> impl Strategy<Value = Verdict> {
    prop_oneof![Just(Verdict::Unknown), Just(Verdict::Landmark), Just(Verdict::NotLandmark)]
}

fn arb_landmark(class_id: u32) -> impl Strategy<Value = MapLandmark> {
    (
        prop::collection::vec(("[A-Za-z必胜客欢乐餐厅 ']{1,12}", 1u64..50), 1..4),
        prop::option::of("[A-Z]{1,8}"),
        arb_verdict(),
        prop::option::of(arb_point()),
        prop::collection::vec(arb_point(), 0..6),
        5.0f64..50.0,
    )
        .prop_map(move |(members, name, verdict, position, observations, score)| MapLandmark {
            class_id,
            canonical_name: name,
            verdict,
            member_counts: members.into_iter().collect::<IndexMap<_, _>>(),
            position,
            n_observations: observations.len(),
            memory_score: score,
            observations,
        })
}

fn arb_map() -> impl Strategy<Value = MapFile> {
    (0usize..5, any::<bool>(), prop::option::of(0u64..10_000))
        .prop_flat_map(|(n, distilled, last)| {
            let lms: Vec<_> = (0..n as u32).map(|i| arb_landmark(i * 3)).collect();
            (lms, Just(distilled), Just(last))
        })
        .prop_map(|(landmarks, distilled, last_frame_id)| MapFile {
            version: MAP_VERSION,
            intrinsics: Intrinsics::new(525.0, 525.0, 319.5, 239.5, 640, 480).unwrap(),
            config: EngineConfig::default(),
            distilled,
            last_frame_id,
            landmarks,
        })
}

proptest! {
    #[test]
    fn json_round_trip_is_lossless(map in arb_map()) {
        let text = map.to_json();
        let back = MapFile::from_json(&text).unwrap();
        prop_assert_eq!(&back, &map);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn state_round_trip_is_lossless(map in arb_map()) {
        let state = map.clone().into_state().unwrap();
        let again = MapFile::from_state(&state).unwrap();
        prop_assert_eq!(again, map);
    }
}

#[test]
fn rejects_other_versions() {
    let text = r#"{"version": 2, "intrinsics": {}, "landmarks": []}"#;
    assert!(matches!(MapFile::from_json(text), Err(Error::MapVersion(2))));
}

#[test]
fn save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let map = MapFile {
        version: MAP_VERSION,
        intrinsics: Intrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap(),
        config: EngineConfig::default(),
        distilled: false,
        last_frame_id: Some(3),
        landmarks: Vec::new(),
    };
    map.save(&path).unwrap();
    assert_eq!(MapFile::load(&path).unwrap(), map);
}
