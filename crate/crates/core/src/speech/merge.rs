use std::collections::{BTreeSet, HashMap};

use super::{
    speaker_label, AttributedSegment, AttributedTranscript, SpeakerSegments, SpeakerTurn, Transcript,
};

/// Renames speaker ids to `SPEAKER_00, SPEAKER_01, ...` in order of first
/// appearance (turns sorted by start time).
pub fn densify_speakers(mut segments: SpeakerSegments) -> SpeakerSegments {
    segments.turns.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    let mut mapping: HashMap<String, String> = HashMap::new();
    for turn in &mut segments.turns {
        let next = mapping.len();
        let id = mapping.entry(turn.speaker_id.clone()).or_insert_with(|| speaker_label(next));
        turn.speaker_id = id.clone();
    }
    segments
}

fn overlap(a_start: f64, a_end: f64, b: &SpeakerTurn) -> f64 {
    (a_end.min(b.end_s) - a_start.max(b.start_s)).max(0.0)
}

/// Assigns each transcript segment the speaker with maximal temporal
/// overlap. Ties go to the earlier turn; zero overlap leaves no speaker.
pub fn merge_diarization(t: &Transcript, s: &SpeakerSegments) -> AttributedTranscript {
    let mut turns: Vec<&SpeakerTurn> = s.turns.iter().collect();
    turns.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));

    let segments = t
        .segments
        .iter()
        .map(|seg| {
            let speaker = if seg.end_s > seg.start_s {
                let mut best: Option<(&SpeakerTurn, f64)> = None;
                for turn in &turns {
                    let o = overlap(seg.start_s, seg.end_s, turn);
                    if o > 0.0 && best.is_none_or(|(_, b)| o > b) {
                        best = Some((turn, o));
                    }
                }
                best.map(|(turn, _)| turn.speaker_id.clone())
            } else {
                // instantaneous segment: containing turn
                turns
                    .iter()
                    .find(|turn| turn.start_s <= seg.start_s && seg.start_s < turn.end_s)
                    .map(|turn| turn.speaker_id.clone())
            };
            AttributedSegment {
                start_s: seg.start_s,
                end_s: seg.end_s,
                speaker_id: speaker,
                text: seg.text.clone(),
            }
        })
        .collect();
    AttributedTranscript { segments }
}

/// One line per segment in start-time order, optionally prefixed with the
/// speaker id.
pub fn render_transcript(at: &AttributedTranscript, with_speakers: bool) -> String {
    let mut segs: Vec<&AttributedSegment> = at.segments.iter().collect();
    segs.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
    let lines: Vec<String> = segs
        .iter()
        .map(|s| {
            let text = s.text.split_whitespace().collect::<Vec<_>>().join(" ");
            match (&s.speaker_id, with_speakers) {
                (Some(id), true) => format!("{id}: {text}"),
                _ => text,
            }
        })
        .collect();
    lines.join("\n")
}

pub const HINT_SINGLE_HOST: &str = "Studio -- Single host";
pub const HINT_INTERVIEW: &str = "Studio -- 1-to-1 interview";
pub const HINT_PANEL: &str = "Studio -- Guest panel";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeakerHint {
    pub count: usize,
    pub environment_hint: Option<&'static str>,
}

/// Distinct speakers and the environment label the speaker-count
/// heuristic suggests.
pub fn speaker_count_hint(at: &AttributedTranscript) -> SpeakerHint {
    let ids: BTreeSet<&str> =
        at.segments.iter().filter_map(|s| s.speaker_id.as_deref()).collect();
    let environment_hint = match ids.len() {
        0 => None,
        1 => Some(HINT_SINGLE_HOST),
        2 => Some(HINT_INTERVIEW),
        _ => Some(HINT_PANEL),
    };
    SpeakerHint { count: ids.len(), environment_hint }
}

#[cfg(test)]
mod tests {
    use super::super::TranscriptSegment;
    use super::*;
    use crate::taxonomy::TaxonomySet;

    fn transcript(segs: &[(f64, f64, &str)]) -> Transcript {
        Transcript {
            segments: segs
                .iter()
                .map(|&(s, e, t)| TranscriptSegment { start_s: s, end_s: e, text: t.into() })
                .collect(),
            language: "it".into(),
            engine_id: "mock".into(),
        }
    }

    fn turns(ts: &[(f64, f64, &str)]) -> SpeakerSegments {
        SpeakerSegments {
            turns: ts
                .iter()
                .map(|&(s, e, id)| SpeakerTurn { start_s: s, end_s: e, speaker_id: id.into() })
                .collect(),
        }
    }

    #[test]
    fn containment() {
        let at = merge_diarization(&transcript(&[(2.0, 4.0, "ciao")]), &turns(&[(0.0, 10.0, "SPEAKER_00")]));
        assert_eq!(at.segments[0].speaker_id.as_deref(), Some("SPEAKER_00"));
    }

    #[test]
    fn maximal_overlap_wins() {
        // 3 s with SPEAKER_00 (0..3), 1 s with SPEAKER_01 (3..4)
        let at = merge_diarization(
            &transcript(&[(0.0, 4.0, "buonasera")]),
            &turns(&[(3.0, 8.0, "SPEAKER_01"), (-1.0, 3.0, "SPEAKER_00")]),
        );
        assert_eq!(at.segments[0].speaker_id.as_deref(), Some("SPEAKER_00"));
    }

    #[test]
    fn tie_goes_to_earlier_turn() {
        let at = merge_diarization(
            &transcript(&[(0.0, 4.0, "x")]),
            &turns(&[(2.0, 6.0, "SPEAKER_01"), (-2.0, 2.0, "SPEAKER_00")]),
        );
        assert_eq!(at.segments[0].speaker_id.as_deref(), Some("SPEAKER_00"));
    }

    #[test]
    fn zero_overlap_has_no_speaker() {
        let at = merge_diarization(&transcript(&[(20.0, 25.0, "x")]), &turns(&[(0.0, 10.0, "SPEAKER_00")]));
        assert_eq!(at.segments[0].speaker_id, None);
    }

    #[test]
    fn densify_by_first_appearance() {
        let dense = densify_speakers(turns(&[(5.0, 9.0, "SPEAKER_07"), (0.0, 5.0, "SPEAKER_02")]));
        let ids: Vec<&str> = dense.turns.iter().map(|t| t.speaker_id.as_str()).collect();
        assert_eq!(ids, vec!["SPEAKER_00", "SPEAKER_01"]);
        let single = densify_speakers(turns(&[(0.0, 5.0, "SPEAKER_02")]));
        assert_eq!(single.turns[0].speaker_id, "SPEAKER_00");
    }

    #[test]
    fn rendering() {
        assert_eq!(render_transcript(&AttributedTranscript::default(), true), "");
        let at = merge_diarization(
            &transcript(&[(5.0, 9.0, "seconda"), (0.0, 4.0, "prima  riga")]),
            &turns(&[(0.0, 4.5, "SPEAKER_00"), (4.5, 10.0, "SPEAKER_01")]),
        );
        assert_eq!(render_transcript(&at, true), "SPEAKER_00: prima riga\nSPEAKER_01: seconda");
        assert_eq!(render_transcript(&at, false), "prima riga\nseconda");
    }

    #[test]
    fn hints() {
        let env = TaxonomySet::builtin().environment;
        let mk = |n: usize| AttributedTranscript {
            segments: (0..n)
                .map(|i| AttributedSegment {
                    start_s: i as f64,
                    end_s: i as f64 + 1.0,
                    speaker_id: Some(speaker_label(i)),
                    text: "t".into(),
                })
                .collect(),
        };
        assert_eq!(speaker_count_hint(&mk(0)), SpeakerHint { count: 0, environment_hint: None });
        assert_eq!(speaker_count_hint(&mk(1)).environment_hint, Some(HINT_SINGLE_HOST));
        assert_eq!(speaker_count_hint(&mk(2)).environment_hint, Some(HINT_INTERVIEW));
        assert_eq!(speaker_count_hint(&mk(4)).environment_hint, Some(HINT_PANEL));
        for h in [HINT_SINGLE_HOST, HINT_INTERVIEW, HINT_PANEL] {
            assert!(env.contains(h));
        }
    }
}
