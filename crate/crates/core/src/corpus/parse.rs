use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};

use super::records::{ItemMetadata, RatingRecord, RatingScale, TagRecord};
use super::token::EntityToken;
use crate::error::{Error, Result};

fn csv_reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(source)
}

fn record_line(record: &csv::StringRecord, fallback: u64) -> u64 {
    record.position().map_or(fallback, |p| p.line())
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    Error::parse(line, err.to_string())
}

fn is_header(record: &csv::StringRecord, first: &str) -> bool {
    record
        .get(0)
        .is_some_and(|f| f.trim().trim_start_matches('\u{feff}') == first)
}

fn non_empty_id(field: Option<&str>, line: u64, what: &str) -> Result<String> {
    match field.map(str::trim) {
        Some(id) if !id.is_empty() => Ok(id.to_string()),
        _ => Err(Error::parse(line, format!("missing {what}"))),
    }
}

/// Parses `userId,movieId,rating[,timestamp]` lines. A first line starting
/// with `userId` is treated as a header.
pub fn parse_ratings<R: Read>(source: R, scale: RatingScale) -> Result<Vec<RatingRecord>> {
    let mut out = Vec::new();
    for (i, record) in csv_reader(source).records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record, i as u64 + 1);
        if i == 0 && is_header(&record, "userId") {
            continue;
        }
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if !(3..=4).contains(&record.len()) {
            return Err(Error::parse(
                line,
                format!("expected 3 or 4 fields, found {}", record.len()),
            ));
        }
        let user = non_empty_id(record.get(0), line, "userId")?;
        let movie = non_empty_id(record.get(1), line, "movieId")?;
        let rating: f64 = record[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid rating {:?}", &record[2])))?;
        if !rating.is_finite() || !scale.contains(rating) {
            return Err(Error::RatingOutOfScale {
                line,
                rating,
                min: scale.min,
                max: scale.max,
            });
        }
        let timestamp = match record.get(3).map(str::trim) {
            None | Some("") => None,
            Some(ts) => Some(
                ts.parse::<i64>()
                    .map_err(|_| Error::parse(line, format!("invalid timestamp {ts:?}")))?,
            ),
        };
        out.push(RatingRecord {
            user: EntityToken::user(user),
            movie: EntityToken::movie(movie),
            rating,
            timestamp,
        });
    }
    Ok(out)
}

/// Lowercases and trims free-form tag text.
pub fn normalize_tag(text: &str) -> String {
    text.trim().to_lowercase()
}

/// Parses `userId,movieId,tag[,timestamp]` lines. Duplicate triples are kept.
pub fn parse_tags<R: Read>(source: R) -> Result<Vec<TagRecord>> {
    let mut out = Vec::new();
    for (i, record) in csv_reader(source).records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record, i as u64 + 1);
        if i == 0 && is_header(&record, "userId") {
            continue;
        }
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if !(3..=4).contains(&record.len()) {
            return Err(Error::parse(
                line,
                format!("expected 3 or 4 fields, found {}", record.len()),
            ));
        }
        let user = non_empty_id(record.get(0), line, "userId")?;
        let movie = non_empty_id(record.get(1), line, "movieId")?;
        let tag = normalize_tag(&record[2]);
        if tag.is_empty() {
            return Err(Error::parse(line, "empty tag"));
        }
        out.push(TagRecord {
            user: EntityToken::user(user),
            movie: EntityToken::movie(movie),
            tag: EntityToken::tag(tag),
        });
    }
    Ok(out)
}

/// Parses `movieId<TAB>director<TAB>actor1|actor2|...` lines. Empty fields
/// mean no director or no actors; repeated actors keep their first position.
pub fn parse_metadata<R: Read>(source: R) -> Result<Vec<ItemMetadata>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let movie = non_empty_id(fields.next(), line_no, "movieId")?;
        let director = fields.next().map(str::trim).unwrap_or("");
        let actors = fields.next().unwrap_or("");
        if fields.next().is_some() {
            return Err(Error::parse(line_no, "expected at most 3 tab-separated fields"));
        }
        if !seen.insert(movie.clone()) {
            return Err(Error::DuplicateMetadata(movie));
        }
        let mut actor_tokens: Vec<EntityToken> = Vec::new();
        for name in actors.split('|').map(str::trim).filter(|a| !a.is_empty()) {
            let token = EntityToken::actor(name);
            if !actor_tokens.contains(&token) {
                actor_tokens.push(token);
            }
        }
        out.push(ItemMetadata {
            movie: EntityToken::movie(movie),
            director: (!director.is_empty()).then(|| EntityToken::director(director)),
            actors: actor_tokens,
        });
    }
    Ok(out)
}
