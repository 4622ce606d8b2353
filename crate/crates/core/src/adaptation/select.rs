use super::{AdaptationConfig, SkipReason};
use crate::retrieval::ContentSegment;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    Adapt,
    Skip(SkipReason),
}

/// First matching rule wins: brief, introductory, concluding, elementary.
/// Position rules only apply to modules of more than two segments.
pub fn should_personalize(segment: &ContentSegment, cfg: &AdaptationConfig) -> Selection {
    if segment.sentence_count <= 2 || segment.word_count < cfg.min_words {
        return Selection::Skip(SkipReason::Brief);
    }
    if segment.position.total > 2 {
        if segment.position.is_first() {
            return Selection::Skip(SkipReason::Introductory);
        }
        if segment.position.is_last() {
            return Selection::Skip(SkipReason::Concluding);
        }
    }
    if segment.elementary {
        return Selection::Skip(SkipReason::Elementary);
    }
    Selection::Adapt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::SegmentPosition;

    fn seg(index: usize, total: usize, body: &str) -> ContentSegment {
        ContentSegment::new("c", "m", SegmentPosition { index, total }, "", body).unwrap()
    }

    fn long_body() -> String {
        (0..30).map(|i| format!("Sentence {i} covers the topic in enough detail.")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn rules_in_order() {
        let cfg = AdaptationConfig::default();
        assert_eq!(
            should_personalize(&seg(0, 10, "We now move on. Next comes the main part."), &cfg),
            Selection::Skip(SkipReason::Brief)
        );
        assert_eq!(should_personalize(&seg(0, 10, &long_body()), &cfg), Selection::Skip(SkipReason::Introductory));
        assert_eq!(should_personalize(&seg(9, 10, &long_body()), &cfg), Selection::Skip(SkipReason::Concluding));
        assert_eq!(should_personalize(&seg(4, 10, &long_body()), &cfg), Selection::Adapt);
        // Two-segment modules have no introductory or concluding segment.
        assert_eq!(should_personalize(&seg(0, 2, &long_body()), &cfg), Selection::Adapt);
        let mut e = seg(4, 10, &long_body());
        e.elementary = true;
        assert_eq!(should_personalize(&e, &cfg), Selection::Skip(SkipReason::Elementary));
    }

    #[test]
    fn few_words_is_brief() {
        let cfg = AdaptationConfig::default();
        let s = seg(3, 10, "One idea. Two ideas. Three ideas here.");
        assert_eq!(should_personalize(&s, &cfg), Selection::Skip(SkipReason::Brief));
    }
}
