use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::is_unsafe_char;

pub const ALPHABET_SIZE: usize = 63;

/// The characters a filtered, lowercased query can contain: printable
/// ASCII minus uppercase letters and the printable unsafe characters.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
    index: [u8; 128],
}

const NOT_IN_ALPHABET: u8 = u8::MAX;

impl Alphabet {
    pub fn new() -> Self {
        let symbols: Vec<char> =
            ('!'..='~').filter(|c| !c.is_ascii_uppercase() && !is_unsafe_char(*c)).collect();
        Self::from_symbols(symbols).expect("derived alphabet has 63 symbols")
    }

    pub fn from_symbols(symbols: Vec<char>) -> Result<Self> {
        if symbols.len() != ALPHABET_SIZE {
            return Err(Error::Config(format!("alphabet must have {ALPHABET_SIZE} symbols, got {}", symbols.len())));
        }
        let mut index = [NOT_IN_ALPHABET; 128];
        for (i, &c) in symbols.iter().enumerate() {
            if !c.is_ascii() || c.is_ascii_uppercase() || is_unsafe_char(c) {
                return Err(Error::Config(format!("invalid alphabet symbol {c:?}")));
            }
            if index[c as usize] != NOT_IN_ALPHABET {
                return Err(Error::Config(format!("duplicate alphabet symbol {c:?}")));
            }
            index[c as usize] = i as u8;
        }
        Ok(Alphabet { symbols, index })
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        let code = c as usize;
        if code < 128 && self.index[code] != NOT_IN_ALPHABET {
            Some(self.index[code] as usize)
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn as_string(&self) -> String {
        self.symbols.iter().collect()
    }

    pub fn contains_all(&self, text: &str) -> bool {
        text.chars().all(|c| self.index_of(c).is_some())
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Alphabet").field(&self.as_string()).finish()
    }
}

impl Serialize for Alphabet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.as_string())
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Alphabet::from_symbols(s.chars().collect()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_alphabet_has_63_distinct_safe_symbols() {
        let a = Alphabet::new();
        assert_eq!(a.len(), 63);
        for c in ['"', '#', '%', '<', '>', ' ', 'A', 'Z'] {
            assert_eq!(a.index_of(c), None, "{c:?}");
        }
        for c in ['a', 'z', '0', '9', '=', '&', '/', '*', '\'', '\\', '~', '!'] {
            assert!(a.index_of(c).is_some(), "{c:?}");
        }
    }

    #[test]
    fn rejects_wrong_sizes_and_duplicates() {
        assert!(Alphabet::from_symbols(vec!['a'; 63]).is_err());
        assert!(Alphabet::from_symbols(vec!['a', 'b']).is_err());
        let mut syms = Alphabet::new().symbols().to_vec();
        syms[0] = 'A';
        assert!(Alphabet::from_symbols(syms).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let a = Alphabet::new();
        let s = serde_json::to_string(&a).unwrap();
        let b: Alphabet = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
