use page_core::clock::FixedClock;
use page_core::profile::{
    summarize_profile, table_one_profile, AcademicYear, ConversationStatus, DialogueEngine, DialogueTemplates,
    Major, ValidationRules,
};
use page_core::providers::stub::StubLlm;
use std::sync::Arc;

const SCRIPT: &[&str] = &[
    "I'm a sophomore majoring in Computer Science and Technology",
    "I like to play games, mainly single-player RPGs with good plots.",
    "I'm currently playing 'Baldur's Gate 3,' and I feel the narrative and world-building are amazing.",
    "Nothing else to add.",
    "Yes",
];

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[test]
fn worked_example_transcript_yields_the_published_profile() {
    let llm = StubLlm::offline();
    let engine = DialogueEngine::new(
        DialogueTemplates::default(),
        ValidationRules::default(),
        Arc::new(FixedClock::at("2025-08-24T00:00:00Z")),
    );
    let (mut state, _) = engine.start_session_with_id("s-table-one".into(), "Page").unwrap();
    for msg in SCRIPT {
        state = engine.advance(&state, msg, &llm).unwrap().state;
    }
    assert_eq!(state.conversation_status, ConversationStatus::CompletedAndGenerateProfile);

    let got = summarize_profile("student_001", &state.history, &llm).unwrap();
    let want = table_one_profile();
    assert_eq!(got.year, AcademicYear::Sophomore);
    assert_eq!(got.major, Major::Named("Computer Science and Technology".into()));
    assert_eq!(got.interests.len(), 1);
    let (g, w) = (&got.interests[0], &want.interests[0]);
    assert_eq!(normalize(&g.domain), normalize(&w.domain));
    assert_eq!(normalize(&g.category), normalize(&w.category));
    assert_eq!(normalize(&g.sub_category), normalize(&w.sub_category));
    let keywords: Vec<String> = g.keywords.iter().map(|k| normalize(k)).collect();
    assert!(keywords.contains(&normalize("Baldur's Gate 3")), "{keywords:?}");
    assert_eq!(normalize(&g.raw_text), normalize(&w.raw_text));
    got.validate().unwrap();
}
