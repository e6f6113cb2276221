use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use super::sentence::Sentence;
use super::token::EntityToken;
use crate::error::{Error, Result};

/// Dense token indices ordered by descending count, ties by canonical string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<EntityToken>,
    counts: Vec<u64>,
    index: HashMap<EntityToken, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from an arbitrary count map. Tokens below
    /// `min_count` are dropped.
    pub fn from_counts<I>(counts: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (EntityToken, u64)>,
    {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let mut merged: HashMap<EntityToken, u64> = HashMap::new();
        for (token, count) in counts {
            *merged.entry(token).or_default() += count;
        }
        let mut entries: Vec<(String, EntityToken, u64)> = merged
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .map(|(t, c)| (t.to_string(), t, c))
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary(min_count));
        }
        entries.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));

        let mut tokens = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (_, token, count)) in entries.into_iter().enumerate() {
            index.insert(token.clone(), i);
            tokens.push(token);
            counts.push(count);
        }
        Ok(Vocabulary {
            tokens,
            counts,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index(&self, token: &EntityToken) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &EntityToken {
        &self.tokens[index]
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn tokens(&self) -> &[EntityToken] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Maps a sentence to indices, dropping out-of-vocabulary tokens while
    /// keeping the order of the survivors.
    pub fn encode(&self, sentence: &Sentence) -> Vec<usize> {
        sentence
            .tokens()
            .iter()
            .filter_map(|t| self.index(t))
            .collect()
    }

    /// Writes `token count` lines in index order.
    pub fn write<W: Write>(&self, mut sink: W) -> io::Result<()> {
        for (token, count) in self.tokens.iter().zip(&self.counts) {
            writeln!(sink, "{token} {count}")?;
        }
        sink.flush()
    }

    pub fn read<R: BufRead>(source: R) -> Result<Self> {
        let mut counts = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, line) in source.lines().enumerate() {
            let line_no = i as u64 + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (token, count) = line
                .rsplit_once(' ')
                .ok_or_else(|| Error::parse(line_no, "expected `token count`"))?;
            let token: EntityToken = token
                .parse()
                .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid count {count:?}")))?;
            if !seen.insert(token.clone()) {
                return Err(Error::DuplicateToken(token.to_string()));
            }
            counts.push((token, count));
        }
        Vocabulary::from_counts(counts, 1)
    }
}

/// Counts every token occurrence across `sentences` and keeps those seen at
/// least `min_count` times.
pub fn build_vocabulary(sentences: &[Sentence], min_count: u64) -> Result<Vocabulary> {
    let mut counts: HashMap<EntityToken, u64> = HashMap::new();
    for sentence in sentences {
        for token in sentence.tokens() {
            *counts.entry(token.clone()).or_default() += 1;
        }
    }
    Vocabulary::from_counts(counts, min_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sentence(tokens: &[&str]) -> Sentence {
        Sentence::new(tokens.iter().map(|t| t.parse().unwrap()).collect()).unwrap()
    }

    #[test]
    fn keeps_everything_at_min_count_one() {
        let vocab = build_vocabulary(&[sentence(&["u:1", "m:2"])], 1).unwrap();
        assert_eq!(vocab.len(), 2);
        assert!(vocab.index(&EntityToken::user("1")).is_some());
        assert!(vocab.index(&EntityToken::movie("2")).is_some());
    }

    #[test]
    fn threshold_drops_rare_tokens() {
        let s = [sentence(&["u:1", "m:2"]), sentence(&["u:1", "m:3"])];
        let vocab = build_vocabulary(&s, 2).unwrap();
        assert_eq!(vocab.len(), 1);
        assert!(vocab.index(&EntityToken::movie("2")).is_none());
        assert!(vocab.counts().iter().all(|&c| c >= 2));
    }

    #[test]
    fn empty_after_filtering() {
        let err = build_vocabulary(&[sentence(&["u:1", "m:2"])], 2).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary(2)));
    }

    #[test]
    fn descending_count_then_lexicographic() {
        // m:5 and u:1 both appear 3 times, t:x once; "m:5" < "u:1".
        let s = [
            sentence(&["u:1", "m:5", "t:x"]),
            sentence(&["u:1", "m:5"]),
            sentence(&["u:1", "m:5"]),
        ];
        let vocab = build_vocabulary(&s, 1).unwrap();
        assert_eq!(vocab.index(&EntityToken::movie("5")), Some(0));
        assert_eq!(vocab.index(&EntityToken::user("1")), Some(1));
        assert_eq!(vocab.index(&EntityToken::tag("x")), Some(2));
    }

    #[test]
    fn file_round_trip() {
        let s = [sentence(&["u:1", "m:5", "d:J.%20Doe"]), sentence(&["u:1", "m:5"])];
        let vocab = build_vocabulary(&s, 1).unwrap();
        let mut buf = Vec::new();
        vocab.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "m:5 2\nu:1 2\nd:J.%20Doe 1\n");
        assert_eq!(Vocabulary::read(buf.as_slice()).unwrap(), vocab);
    }

    fn corpus() -> impl Strategy<Value = Vec<Sentence>> {
        let sentence = (0u8..6, 0u8..6, prop::collection::vec(0u8..4, 0..3)).prop_map(|(u, m, tags)| {
            let mut tokens = vec![EntityToken::user(u.to_string()), EntityToken::movie(m.to_string())];
            let mut tags: Vec<_> = tags.into_iter().map(|t| format!("tag{t}")).collect();
            tags.sort();
            tags.dedup();
            tokens.extend(tags.into_iter().map(EntityToken::tag));
            Sentence::new(tokens).unwrap()
        });
        prop::collection::vec(sentence, 1..20)
    }

    proptest! {
        #[test]
        fn order_independent(mut sentences in corpus(), min_count in 1u64..3) {
            let forward = build_vocabulary(&sentences, min_count);
            sentences.reverse();
            let backward = build_vocabulary(&sentences, min_count);
            match (forward, backward) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "results disagree"),
            }
        }

        #[test]
        fn encoding_preserves_survivor_order(sentences in corpus()) {
            if let Ok(vocab) = build_vocabulary(&sentences, 2) {
                for s in &sentences {
                    let kept: Vec<&EntityToken> =
                        s.tokens().iter().filter(|t| vocab.index(t).is_some()).collect();
                    let encoded: Vec<&EntityToken> =
                        vocab.encode(s).into_iter().map(|i| vocab.token(i)).collect();
                    prop_assert_eq!(kept, encoded);
                }
            }
        }
    }
}
