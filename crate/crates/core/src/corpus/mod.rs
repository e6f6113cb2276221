//! Rating, tag, and metadata parsing; artificial sentence construction; the
//! shared token vocabulary.

mod parse;
mod records;
mod sentence;
mod token;
mod vocab;

pub use parse::{normalize_tag, parse_metadata, parse_ratings, parse_tags};
pub use records::{ItemMetadata, RatingRecord, RatingScale, TagRecord};
pub use sentence::{build_sentences, read_sentences, write_sentences, Sentence, DEFAULT_MAX_ACTORS};
pub use token::{EntityToken, Namespace};
pub use vocab::{build_vocabulary, Vocabulary};
