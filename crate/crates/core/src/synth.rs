//! Seeded synthetic fixture with planted clusters.
//!
//! Movies, directors, actors, and tags belong to clusters; each user
//! prefers one cluster, rates mostly its movies, and rates them higher.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::corpus::{EntityToken, ItemMetadata, RatingRecord, RatingScale, TagRecord};
use crate::error::{Error, Result};
use crate::seed::stage_rng;

pub const RATINGS_FILE: &str = "ratings.csv";
pub const TAGS_FILE: &str = "tags.csv";
pub const METADATA_FILE: &str = "metadata.tsv";
pub const CLUSTERS_FILE: &str = "clusters.tsv";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub users: usize,
    pub movies: usize,
    pub clusters: usize,
    pub seed: u64,
    pub min_ratings: usize,
    pub max_ratings: usize,
    /// Share of a user's ratings drawn from the preferred cluster.
    pub preferred_share: f64,
    /// Chance a movie's director, actors, and tags come from its own cluster.
    pub metadata_purity: f64,
    pub tag_probability: f64,
    pub directors_per_cluster: usize,
    pub actors_per_cluster: usize,
    pub tags_per_cluster: usize,
    pub actors_per_movie: usize,
    /// Rating offset for movies in (or out of) the preferred cluster.
    pub affinity: f64,
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 200,
            movies: 80,
            clusters: 4,
            seed: 1,
            min_ratings: 15,
            max_ratings: 40,
            preferred_share: 0.75,
            metadata_purity: 0.9,
            tag_probability: 0.15,
            directors_per_cluster: 3,
            actors_per_cluster: 8,
            tags_per_cluster: 5,
            actors_per_movie: 4,
            affinity: 0.9,
            noise: 0.5,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::Config("clusters must be positive".into()));
        }
        if self.min_ratings > self.max_ratings {
            return Err(Error::Config("min_ratings exceeds max_ratings".into()));
        }
        if self.directors_per_cluster == 0 || self.actors_per_cluster == 0 || self.tags_per_cluster == 0 {
            return Err(Error::Config("cluster pools must be non-empty".into()));
        }
        for (name, p) in [
            ("preferred_share", self.preferred_share),
            ("metadata_purity", self.metadata_purity),
            ("tag_probability", self.tag_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config("noise must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub ratings: Vec<RatingRecord>,
    pub tags: Vec<TagRecord>,
    pub metadata: Vec<ItemMetadata>,
    /// Cluster of movie `m` (token `m:{m+1}`).
    pub movie_clusters: Vec<usize>,
    /// Preferred cluster of user `u` (token `u:{u+1}`).
    pub user_clusters: Vec<usize>,
}

/// Movie `m` (zero-based) belongs to cluster `m % clusters`.
pub fn movie_cluster(movie: usize, clusters: usize) -> usize {
    movie % clusters
}

fn director(cluster: usize, j: usize) -> String {
    format!("Director {}-{}", cluster + 1, j + 1)
}

fn actor(cluster: usize, j: usize) -> String {
    format!("Actor {}-{}", cluster + 1, j + 1)
}

fn tag(cluster: usize, j: usize) -> String {
    format!("motif {}-{}", cluster + 1, j + 1)
}

pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let scale = RatingScale::MOVIELENS;
    let c = config.clusters;
    let mut rng = stage_rng(config.seed, "synth/items");
    let pick_cluster = |rng: &mut crate::seed::Rng, own: usize| {
        if rng.gen_bool(config.metadata_purity) {
            own
        } else {
            rng.gen_range(0..c)
        }
    };

    let movie_clusters: Vec<usize> = (0..config.movies).map(|m| movie_cluster(m, c)).collect();
    let quality = Normal::new(0.0, 0.3).expect("valid normal");
    let mut movie_quality = Vec::with_capacity(config.movies);
    let mut metadata = Vec::with_capacity(config.movies);
    for (m, &cluster) in movie_clusters.iter().enumerate() {
        movie_quality.push(quality.sample(&mut rng));
        let dc = pick_cluster(&mut rng, cluster);
        let director = EntityToken::director(director(dc, rng.gen_range(0..config.directors_per_cluster)));
        let mut actors: Vec<EntityToken> = Vec::new();
        let mut attempts = 0;
        while actors.len() < config.actors_per_movie && attempts < 10 * config.actors_per_movie {
            attempts += 1;
            let ac = pick_cluster(&mut rng, cluster);
            let token = EntityToken::actor(actor(ac, rng.gen_range(0..config.actors_per_cluster)));
            if !actors.contains(&token) {
                actors.push(token);
            }
        }
        metadata.push(ItemMetadata {
            movie: EntityToken::movie((m + 1).to_string()),
            director: Some(director),
            actors,
        });
    }

    let mut rng = stage_rng(config.seed, "synth/users");
    let bias = Normal::new(0.0, 0.3).expect("valid normal");
    let noise = Normal::new(0.0, config.noise).expect("valid normal");
    let mut ratings = Vec::new();
    let mut tags = Vec::new();
    let mut user_clusters = Vec::with_capacity(config.users);
    for u in 0..config.users {
        let preferred = rng.gen_range(0..c);
        user_clusters.push(preferred);
        let user_bias = bias.sample(&mut rng);
        let count = rng.gen_range(config.min_ratings..=config.max_ratings).min(config.movies);
        let (mut inside, mut outside): (Vec<usize>, Vec<usize>) =
            (0..config.movies).partition(|&m| movie_clusters[m] == preferred);
        inside.shuffle(&mut rng);
        outside.shuffle(&mut rng);
        let wanted_inside = ((count as f64 * config.preferred_share).round() as usize).min(inside.len());
        let wanted_inside = wanted_inside.max(count.saturating_sub(outside.len()));
        let mut chosen: Vec<usize> = inside[..wanted_inside].to_vec();
        chosen.extend_from_slice(&outside[..count - wanted_inside]);
        chosen.shuffle(&mut rng);
        let user = EntityToken::user((u + 1).to_string());
        for (t, &m) in chosen.iter().enumerate() {
            let affinity = if movie_clusters[m] == preferred {
                config.affinity
            } else {
                -config.affinity
            };
            let raw = 3.0 + affinity + movie_quality[m] + user_bias + noise.sample(&mut rng);
            let rating = scale.clamp((raw * 2.0).round() / 2.0);
            let movie = EntityToken::movie((m + 1).to_string());
            ratings.push(RatingRecord {
                user: user.clone(),
                movie: movie.clone(),
                rating,
                timestamp: Some(1_000_000_000 + (u * 1000 + t) as i64 * 60),
            });
            if rng.gen_bool(config.tag_probability) {
                let tc = pick_cluster(&mut rng, movie_clusters[m]);
                tags.push(TagRecord {
                    user: user.clone(),
                    movie,
                    tag: EntityToken::tag(tag(tc, rng.gen_range(0..config.tags_per_cluster))),
                });
            }
        }
    }
    Ok(SynthData {
        ratings,
        tags,
        metadata,
        movie_clusters,
        user_clusters,
    })
}

fn csv_error(err: csv::Error) -> io::Error {
    io::Error::other(err)
}

pub fn write_ratings<W: Write>(ratings: &[RatingRecord], sink: W) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["userId", "movieId", "rating", "timestamp"]).map_err(csv_error)?;
    for r in ratings {
        let timestamp = r.timestamp.map(|t| t.to_string()).unwrap_or_default();
        writer
            .write_record([r.user.raw(), r.movie.raw(), &r.rating.to_string(), &timestamp])
            .map_err(csv_error)?;
    }
    writer.flush()
}

pub fn write_tags<W: Write>(tags: &[TagRecord], sink: W) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["userId", "movieId", "tag"]).map_err(csv_error)?;
    for t in tags {
        writer
            .write_record([t.user.raw(), t.movie.raw(), t.tag.raw()])
            .map_err(csv_error)?;
    }
    writer.flush()
}

pub fn write_metadata<W: Write>(metadata: &[ItemMetadata], mut sink: W) -> io::Result<()> {
    for item in metadata {
        let actors: Vec<&str> = item.actors.iter().map(EntityToken::raw).collect();
        writeln!(
            sink,
            "{}\t{}\t{}",
            item.movie.raw(),
            item.director.as_ref().map_or("", EntityToken::raw),
            actors.join("|")
        )?;
    }
    sink.flush()
}

/// `kind<TAB>id<TAB>cluster` for every movie and user, clusters one-based.
pub fn write_clusters<W: Write>(data: &SynthData, mut sink: W) -> io::Result<()> {
    for (m, c) in data.movie_clusters.iter().enumerate() {
        writeln!(sink, "movie\t{}\t{}", m + 1, c + 1)?;
    }
    for (u, c) in data.user_clusters.iter().enumerate() {
        writeln!(sink, "user\t{}\t{}", u + 1, c + 1)?;
    }
    sink.flush()
}

/// Writes the four fixture files into `dir`, returning their paths.
pub fn write_fixture(data: &SynthData, dir: &Path) -> io::Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let paths: Vec<_> = [RATINGS_FILE, TAGS_FILE, METADATA_FILE, CLUSTERS_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    write_ratings(&data.ratings, BufWriter::new(File::create(&paths[0])?))?;
    write_tags(&data.tags, BufWriter::new(File::create(&paths[1])?))?;
    write_metadata(&data.metadata, BufWriter::new(File::create(&paths[2])?))?;
    write_clusters(data, BufWriter::new(File::create(&paths[3])?))?;
    Ok(paths)
}
