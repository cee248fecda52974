use textland::MemoryStatus;
use textland_demo::{cluster_trace, group_texts, memory_trace};

#[test]
fn grouping_merges_variants() {
    let classes = group_texts("Alienware\nAllenware\n\nAlienvvare\nKFC\nAiienware\n", 0.6, false).unwrap();
    assert_eq!(classes.len(), 2);
    assert_eq!(classes[0].representative, "Alienware");
    assert_eq!(classes[0].members.len(), 4);
    assert_eq!(classes[0].members[0], ("Alienware".to_owned(), 1, 1.0));
    assert_eq!(classes[1].members, vec![("KFC".to_owned(), 1, 1.0)]);
}

#[test]
fn grouping_rejects_bad_threshold() {
    assert!(group_texts("a", 1.5, false).is_err());
}

#[test]
fn cluster_trace_reports_rounds() {
    let pts = "[[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[10,10,10],[10,10,10]]";
    let t = cluster_trace(pts, 1, 0.2).unwrap();
    assert_eq!(t.rounds.len(), 1);
    assert_eq!((t.rounds[0].mean.x, t.rounds[0].mean.y, t.rounds[0].mean.z), (2.0, 2.0, 2.0));
    assert_eq!(t.rounds[0].survivors, (0..8).collect::<Vec<_>>());
    assert_eq!((t.result.x, t.result.y, t.result.z), (0.0, 0.0, 0.0));
    let json = serde_json::to_value(&t).unwrap();
    assert_eq!(json["result"], serde_json::json!([0.0, 0.0, 0.0]));
}

#[test]
fn cluster_trace_errors() {
    assert!(cluster_trace("[]", 3, 0.2).is_err());
    assert!(cluster_trace("not json", 3, 0.2).is_err());
}

#[test]
fn memory_trace_promotes_and_forgets() {
    let steps = memory_trace("111111", 1.0, 0.1, 5.0).unwrap();
    assert_eq!(steps[4].status, MemoryStatus::ShortTerm);
    assert_eq!(steps[5].status, MemoryStatus::LongTerm);

    let steps = memory_trace("1 000000000", 1.0, 0.1, 5.0).unwrap();
    assert_eq!(steps.len(), 10);
    assert_eq!(steps[8].status, MemoryStatus::ShortTerm);
    assert_eq!(steps[9].status, MemoryStatus::Forgotten);
    assert_eq!(serde_json::to_value(&steps[9]).unwrap()["status"], "FORGOTTEN");
}
