//! Symbol table: user letters plus allocated separators.

use thiserror::Error;

use crate::words::{Symbol, Word};

/// Characters with a meaning in the regex grammar or reserved for rendering.
const RESERVED: &[char] = &['#', '(', ')', '[', ']', '|', '*', '+', '?'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("alphabet is empty")]
    Empty,
    #[error("letter {0:?} is reserved")]
    Reserved(char),
    #[error("letter {0:?} is listed twice")]
    Duplicate(char),
    #[error("character {ch:?} at position {pos} is not in the alphabet")]
    UnknownLetter { ch: char, pos: usize },
}

/// Letters get ids in sorted character order; separators are numbered after
/// all letters, so they compare greater than every letter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<char>,
    separators: u32,
}

impl Alphabet {
    pub fn new(spec: &str) -> Result<Self, AlphabetError> {
        let mut letters: Vec<char> = Vec::new();
        for c in spec.chars() {
            if RESERVED.contains(&c) || c.is_whitespace() {
                return Err(AlphabetError::Reserved(c));
            }
            if letters.contains(&c) {
                return Err(AlphabetError::Duplicate(c));
            }
            letters.push(c);
        }
        if letters.is_empty() {
            return Err(AlphabetError::Empty);
        }
        letters.sort_unstable();
        Ok(Alphabet { letters, separators: 0 })
    }

    /// Number of user letters.
    pub fn base_size(&self) -> usize {
        self.letters.len()
    }

    /// Letters plus separators allocated so far.
    pub fn size(&self) -> usize {
        self.letters.len() + self.separators as usize
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn symbol(&self, c: char) -> Option<Symbol> {
        self.letters.binary_search(&c).ok().map(|i| i as Symbol)
    }

    pub fn letter(&self, s: Symbol) -> Option<char> {
        self.letters.get(s as usize).copied()
    }

    pub fn base_symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.letters.len() as Symbol
    }

    pub fn is_separator(&self, s: Symbol) -> bool {
        (s as usize) >= self.letters.len()
    }

    pub fn separator_count(&self) -> usize {
        self.separators as usize
    }

    pub fn add_separator(&mut self) -> Symbol {
        let id = self.size() as Symbol;
        self.separators += 1;
        id
    }

    pub fn encode(&self, text: &str) -> Result<Word, AlphabetError> {
        text.chars()
            .enumerate()
            .map(|(pos, ch)| self.symbol(ch).ok_or(AlphabetError::UnknownLetter { ch, pos }))
            .collect()
    }

    /// Letters render as themselves, separators as `#`.
    pub fn render(&self, w: &[Symbol]) -> String {
        w.iter().map(|&s| self.letter(s).unwrap_or('#')).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_follow_sorted_letters() {
        let a = Alphabet::new("cab").unwrap();
        assert_eq!(a.symbol('a'), Some(0));
        assert_eq!(a.symbol('c'), Some(2));
        assert_eq!(a.encode("cab").unwrap().as_slice(), &[2, 0, 1]);
    }

    #[test]
    fn rejects_reserved_and_duplicates() {
        assert_eq!(Alphabet::new("ab#"), Err(AlphabetError::Reserved('#')));
        assert_eq!(Alphabet::new("aba"), Err(AlphabetError::Duplicate('a')));
        assert_eq!(Alphabet::new(""), Err(AlphabetError::Empty));
        assert!(Alphabet::new("a b").is_err());
    }

    #[test]
    fn separators_sort_after_letters() {
        let mut a = Alphabet::new("ab").unwrap();
        let s = a.add_separator();
        assert_eq!(s, 2);
        assert!(a.is_separator(s));
        assert_eq!(a.add_separator(), 3);
        assert_eq!(a.render(&[0, 2, 1]), "a#b");
        assert!(matches!(a.encode("ax"), Err(AlphabetError::UnknownLetter { ch: 'x', pos: 1 })));
    }
}
