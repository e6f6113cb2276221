use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The kind of entity a token names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Namespace {
    User,
    Movie,
    Director,
    Actor,
    Tag,
}

impl Namespace {
    pub const ALL: [Namespace; 5] = [
        Namespace::User,
        Namespace::Movie,
        Namespace::Director,
        Namespace::Actor,
        Namespace::Tag,
    ];

    pub fn prefix(self) -> char {
        match self {
            Namespace::User => 'u',
            Namespace::Movie => 'm',
            Namespace::Director => 'd',
            Namespace::Actor => 'a',
            Namespace::Tag => 't',
        }
    }

    pub fn from_prefix(prefix: char) -> Option<Namespace> {
        Namespace::ALL.into_iter().find(|ns| ns.prefix() == prefix)
    }

    pub fn name(self) -> &'static str {
        match self {
            Namespace::User => "user",
            Namespace::Movie => "movie",
            Namespace::Director => "director",
            Namespace::Actor => "actor",
            Namespace::Tag => "tag",
        }
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Namespace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Namespace::ALL
            .into_iter()
            .find(|ns| ns.name() == lower || lower.len() == 1 && lower.starts_with(ns.prefix()))
            .ok_or_else(|| Error::Config(format!("unknown entity type {s:?}")))
    }
}

/// A namespaced identifier. Users, movies, directors, actors, and tags share
/// one vocabulary, so `t:tom hanks` and `a:Tom Hanks` are different tokens.
///
/// The canonical string is `<prefix>:<raw>` where `%` and whitespace inside
/// `raw` are percent-escaped, so canonical strings never contain whitespace
/// and can be written to space-separated files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityToken {
    namespace: Namespace,
    raw: String,
}

impl EntityToken {
    pub fn new(namespace: Namespace, raw: impl Into<String>) -> Self {
        EntityToken {
            namespace,
            raw: raw.into(),
        }
    }

    pub fn user(raw: impl Into<String>) -> Self {
        Self::new(Namespace::User, raw)
    }

    pub fn movie(raw: impl Into<String>) -> Self {
        Self::new(Namespace::Movie, raw)
    }

    pub fn director(raw: impl Into<String>) -> Self {
        Self::new(Namespace::Director, raw)
    }

    pub fn actor(raw: impl Into<String>) -> Self {
        Self::new(Namespace::Actor, raw)
    }

    pub fn tag(raw: impl Into<String>) -> Self {
        Self::new(Namespace::Tag, raw)
    }

    pub fn namespace(&self) -> Namespace {
        self.namespace
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for EntityToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.namespace.prefix())?;
        for c in self.raw.chars() {
            if c == '%' || c.is_whitespace() {
                let mut buf = [0u8; 4];
                for byte in c.encode_utf8(&mut buf).bytes() {
                    write!(f, "%{byte:02X}")?;
                }
            } else {
                write!(f, "{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for EntityToken {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = |why: &str| Error::InvalidToken(s.to_string(), why.to_string());
        let mut chars = s.chars();
        let namespace = chars
            .next()
            .and_then(Namespace::from_prefix)
            .ok_or_else(|| invalid("unknown namespace prefix"))?;
        if chars.next() != Some(':') {
            return Err(invalid("expected ':' after prefix"));
        }
        let escaped = chars.as_str().as_bytes();
        let mut bytes = Vec::with_capacity(escaped.len());
        let mut i = 0;
        while i < escaped.len() {
            if escaped[i] == b'%' {
                let code = escaped
                    .get(i + 1..i + 3)
                    .and_then(|hex| std::str::from_utf8(hex).ok())
                    .ok_or_else(|| invalid("truncated escape"))?;
                bytes.push(u8::from_str_radix(code, 16).map_err(|_| invalid("bad escape"))?);
                i += 3;
            } else {
                bytes.push(escaped[i]);
                i += 1;
            }
        }
        let raw = String::from_utf8(bytes).map_err(|_| invalid("escape is not UTF-8"))?;
        if s.contains(char::is_whitespace) {
            return Err(invalid("unescaped whitespace"));
        }
        Ok(EntityToken { namespace, raw })
    }
}
