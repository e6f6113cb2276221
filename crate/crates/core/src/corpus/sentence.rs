use std::collections::{BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use super::records::{ItemMetadata, RatingRecord, TagRecord};
use super::token::{EntityToken, Namespace};
use crate::error::{Error, Result};

/// Default cap on leading actors per sentence.
pub const DEFAULT_MAX_ACTORS: usize = 5;

/// One rating event as a token sequence:
/// `[user, movie, tags.., director?, actors..]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<EntityToken>,
}

fn rank(ns: Namespace) -> u8 {
    match ns {
        Namespace::User => 0,
        Namespace::Movie => 1,
        Namespace::Tag => 2,
        Namespace::Director => 3,
        Namespace::Actor => 4,
    }
}

impl Sentence {
    /// Validates the layout: a user, a movie, then tags, at most one
    /// director, then actors.
    pub fn new(tokens: Vec<EntityToken>) -> Result<Self> {
        let bad = |why: &str| {
            Error::Config(format!(
                "malformed sentence [{}]: {why}",
                tokens.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
            ))
        };
        if tokens.len() < 2 {
            return Err(bad("fewer than two tokens"));
        }
        if tokens[0].namespace() != Namespace::User || tokens[1].namespace() != Namespace::Movie {
            return Err(bad("must start with a user then a movie"));
        }
        let mut last = rank(Namespace::Movie);
        let mut directors = 0;
        for token in &tokens[2..] {
            let r = rank(token.namespace());
            if r < last || r <= rank(Namespace::Movie) {
                return Err(bad("tokens out of order"));
            }
            if token.namespace() == Namespace::Director {
                directors += 1;
            }
            last = r;
        }
        if directors > 1 {
            return Err(bad("more than one director"));
        }
        Ok(Sentence { tokens })
    }

    pub fn tokens(&self) -> &[EntityToken] {
        &self.tokens
    }

    pub fn user(&self) -> &EntityToken {
        &self.tokens[0]
    }

    pub fn movie(&self) -> &EntityToken {
        &self.tokens[1]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Emits exactly one sentence per rating record, in rating order. Tags are
/// those the rating's user applied to the rating's movie, deduplicated and
/// sorted; movies without metadata contribute only user, movie, and tags.
pub fn build_sentences(
    ratings: &[RatingRecord],
    tags: &[TagRecord],
    metadata: &[ItemMetadata],
    max_actors: usize,
) -> Vec<Sentence> {
    let mut tags_by_pair: HashMap<(&EntityToken, &EntityToken), BTreeSet<&str>> = HashMap::new();
    for tag in tags {
        tags_by_pair
            .entry((&tag.user, &tag.movie))
            .or_default()
            .insert(tag.tag.raw());
    }
    let meta_by_movie: HashMap<&EntityToken, &ItemMetadata> =
        metadata.iter().map(|m| (&m.movie, m)).collect();

    ratings
        .iter()
        .map(|rating| {
            let mut tokens = vec![rating.user.clone(), rating.movie.clone()];
            if let Some(pair_tags) = tags_by_pair.get(&(&rating.user, &rating.movie)) {
                tokens.extend(pair_tags.iter().map(|t| EntityToken::tag(*t)));
            }
            if let Some(meta) = meta_by_movie.get(&rating.movie) {
                tokens.extend(meta.director.iter().cloned());
                tokens.extend(meta.actors.iter().take(max_actors).cloned());
            }
            Sentence { tokens }
        })
        .collect()
}

/// Writes one sentence per line as space-separated canonical tokens.
pub fn write_sentences<W: Write>(sentences: &[Sentence], mut sink: W) -> io::Result<()> {
    for sentence in sentences {
        let mut first = true;
        for token in sentence.tokens() {
            if !first {
                sink.write_all(b" ")?;
            }
            first = false;
            write!(sink, "{token}")?;
        }
        sink.write_all(b"\n")?;
    }
    sink.flush()
}

pub fn read_sentences<R: BufRead>(source: R) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tokens = line
            .split(' ')
            .map(str::parse)
            .collect::<Result<Vec<EntityToken>>>()
            .map_err(|e| Error::parse(i as u64 + 1, e.to_string()))?;
        out.push(Sentence::new(tokens).map_err(|e| Error::parse(i as u64 + 1, e.to_string()))?);
    }
    Ok(out)
}
