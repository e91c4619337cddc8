use napss_core::assembler::{assemble_input, count_input_tokens, AssembleError};
use napss_core::corpus::{tokenize, Sentence};
use napss_core::narrative::{KeyPhrase, NarrativePrompt, PhraseToken, SEPARATOR};
use napss_core::summarizer::ExtractiveSummary;
use proptest::prelude::*;

fn words(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-z]{1,6}", 1..=max)
}

fn prompt() -> impl Strategy<Value = NarrativePrompt> {
    prop::collection::vec(words(3), 1..8).prop_map(|phrases| {
        NarrativePrompt::from_phrases(
            phrases
                .into_iter()
                .enumerate()
                .map(|(i, ws)| KeyPhrase {
                    sentence_index: i,
                    tokens: ws
                        .into_iter()
                        .enumerate()
                        .map(|(j, form)| PhraseToken { id: j + 1, form })
                        .collect(),
                })
                .collect(),
        )
    })
}

fn summary() -> impl Strategy<Value = ExtractiveSummary> {
    prop::collection::vec(words(12), 1..8).prop_map(|sents| {
        let selected: Vec<Sentence> =
            sents.iter().enumerate().map(|(i, ws)| Sentence::new(i * 2, format!("{}.", ws.join(" ")))).collect();
        ExtractiveSummary {
            doc_id: "d".into(),
            scores: vec![1.0; selected.len() * 2],
            selected,
        }
    })
}

fn is_prefix<T: PartialEq>(short: &[T], long: &[T]) -> bool {
    short.len() <= long.len() && short.iter().zip(long).all(|(a, b)| a == b)
}

proptest! {
    #[test]
    fn assembly_respects_budget_and_order(p in prompt(), s in summary(), budget in 1usize..120) {
        match assemble_input(&p, &s, budget) {
            Ok(a) => {
                prop_assert!(a.token_count <= budget);
                prop_assert_eq!(a.token_count, count_input_tokens(&a.rendered));
                prop_assert_eq!(&a.rendered, &format!("{}{SEPARATOR}{}", a.prompt.rendered, a.summary.text()));
                prop_assert!(is_prefix(&a.summary.selected, &s.selected));
                prop_assert!(is_prefix(&a.prompt.phrases, &p.phrases));
                prop_assert_eq!(a.summary.selected.len() + a.dropped_sentences, s.selected.len());
                prop_assert_eq!(a.prompt.len() + a.dropped_phrases, p.len());
                prop_assert!(a.dropped_phrases == 0 || a.summary.selected.len() == 1);
                prop_assert_eq!(&a, &assemble_input(&p, &s, budget).unwrap());
            }
            Err(AssembleError::OverBudget { minimum, .. }) => prop_assert!(minimum > budget),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn token_count_matches_segments(p in prompt(), s in summary()) {
        let a = assemble_input(&p, &s, usize::MAX).unwrap();
        let segments: Vec<&str> = a.rendered.split(SEPARATOR).collect();
        let expected = segments.iter().map(|seg| tokenize(seg).len()).sum::<usize>() + segments.len() - 1;
        prop_assert_eq!(a.token_count, expected);
        prop_assert_eq!(segments.len(), p.len() + 1);
    }
}
