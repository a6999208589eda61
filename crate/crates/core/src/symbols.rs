//! Symbol strings over `[q]` and the canonical string file format.
//!
//! The two top codes of `[q]` are the sentinels used by Hamming
//! instances: `STAR = q - 1` lives only in fixed strings (it mismatches
//! every stream symbol) and `DIAMOND = q - 2` lives only in stream strings
//! (it mismatches every fixed symbol).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u64;

#[inline]
pub fn star(q: u64) -> Symbol {
    q - 1
}

#[inline]
pub fn diamond(q: u64) -> Symbol {
    q - 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Fixed,
    Stream,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Fixed => "fixed",
            Role::Stream => "stream",
        }
    }
}

/// An immutable string over `[q]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "StringFile", try_from = "StringFile")]
pub struct SymbolString {
    q: u64,
    role: Role,
    data: Vec<Symbol>,
}

#[derive(Serialize, Deserialize)]
struct StringFile {
    n: usize,
    q: u64,
    role: Role,
    data: Vec<Symbol>,
}

impl From<SymbolString> for StringFile {
    fn from(s: SymbolString) -> Self {
        StringFile {
            n: s.data.len(),
            q: s.q,
            role: s.role,
            data: s.data,
        }
    }
}

impl TryFrom<StringFile> for SymbolString {
    type Error = Error;

    fn try_from(file: StringFile) -> Result<Self> {
        if file.n != file.data.len() {
            return Err(Error::Format(format!(
                "declared n = {} but data holds {} symbols",
                file.n,
                file.data.len()
            )));
        }
        Self::new(file.q, file.role, file.data)
    }
}

impl SymbolString {
    pub fn new(q: u64, role: Role, data: Vec<Symbol>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParam(format!("alphabet size {q} < 2")));
        }
        if let Some(&bad) = data.iter().find(|&&s| s >= q) {
            return Err(Error::SymbolOutOfRange { symbol: bad, q });
        }
        Ok(Self { q, role, data })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.data
    }

    pub fn get(&self, i: usize) -> Option<Symbol> {
        self.data.get(i).copied()
    }

    pub fn into_vec(self) -> Vec<Symbol> {
        self.data
    }

    /// Copy of `self[range]` with the same alphabet and role.
    pub fn sub(&self, start: usize, end: usize) -> SymbolString {
        SymbolString {
            q: self.q,
            role: self.role,
            data: self.data[start..end].to_vec(),
        }
    }

    /// Reserved-sentinel predicate: no STAR in a stream string, no DIAMOND
    /// in a fixed string.
    pub fn check_sentinels(&self) -> Result<()> {
        let forbidden = match self.role {
            Role::Fixed => diamond(self.q),
            Role::Stream => star(self.q),
        };
        match self.data.iter().position(|&s| s == forbidden) {
            Some(position) => Err(Error::SentinelMisuse {
                symbol: forbidden,
                role: self.role.as_str(),
                position,
            }),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (st, di) = (star(self.q), diamond(self.q));
        for (i, &s) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if s == st {
                write!(f, "*")?;
            } else if s == di {
                write!(f, "<>")?;
            } else {
                write!(f, "{s}")?;
            }
        }
        Ok(())
    }
}
