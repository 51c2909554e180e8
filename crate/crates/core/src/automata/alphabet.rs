use std::fmt;

use super::AutomatonError;

/// Index of a symbol inside its [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u16);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite, totally ordered set of printable tokens.
///
/// The declaration order is the canonical order used when enumerating words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self, AutomatonError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(AutomatonError::EmptyAlphabet);
        }
        if symbols.len() > u16::MAX as usize {
            return Err(AutomatonError::Config(format!(
                "alphabet has {} symbols, at most {} supported",
                symbols.len(),
                u16::MAX
            )));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c.is_control()) {
                return Err(AutomatonError::Config(format!(
                    "symbol {s:?} is not a printable token"
                )));
            }
            if symbols[..i].contains(s) {
                return Err(AutomatonError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// Alphabet whose symbols are the individual characters of `chars`.
    pub fn from_chars(chars: &str) -> Result<Self, AutomatonError> {
        Self::new(chars.chars().map(String::from))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.symbols.len()).map(|i| Symbol(i as u16))
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.symbols[s.index()]
    }

    pub fn lookup(&self, token: &str) -> Option<Symbol> {
        self.symbols
            .iter()
            .position(|s| s == token)
            .map(|i| Symbol(i as u16))
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s.index() < self.symbols.len()
    }

    /// Parses text into a word.
    ///
    /// Text containing whitespace is split into tokens; otherwise every
    /// character is one symbol, which requires a single-character alphabet.
    /// The empty string is ε.
    pub fn parse_word(&self, text: &str) -> Result<Word, AutomatonError> {
        let tokens: Vec<String> = if text.chars().any(char::is_whitespace) {
            text.split_whitespace().map(String::from).collect()
        } else {
            text.chars().map(String::from).collect()
        };
        tokens
            .iter()
            .map(|t| {
                self.lookup(t)
                    .ok_or_else(|| AutomatonError::UnknownSymbol(t.clone()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }

    /// Renders a word; symbols are concatenated when all are single characters.
    pub fn render(&self, word: &Word) -> String {
        let compact = self.symbols.iter().all(|s| s.chars().count() == 1);
        let parts = word.0.iter().map(|&s| self.name(s));
        if compact {
            parts.collect()
        } else {
            parts.collect::<Vec<_>>().join(" ")
        }
    }

    pub fn check_word(&self, word: &Word) -> Result<(), AutomatonError> {
        match word.0.iter().find(|s| !self.contains(**s)) {
            Some(s) => Err(AutomatonError::UnknownSymbol(format!("#{}", s.0))),
            None => Ok(()),
        }
    }

    /// All words of length `0..=max_len` in shortlex order.
    pub fn words_up_to(&self, max_len: usize) -> impl Iterator<Item = Word> + '_ {
        let k = self.len();
        (0..=max_len).flat_map(move |len| {
            let total = k
                .checked_pow(len as u32)
                .expect("word enumeration overflow");
            (0..total).map(move |mut code| {
                let mut syms = vec![Symbol(0); len];
                for slot in syms.iter_mut().rev() {
                    *slot = Symbol((code % k) as u16);
                    code /= k;
                }
                Word(syms)
            })
        })
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.symbols.join(","))
    }
}

/// A finite sequence of symbols. The empty word ε is `Word::empty()`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }
}

impl FromIterator<Symbol> for Word {
    fn from_iter<T: IntoIterator<Item = Symbol>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(matches!(
            Alphabet::new(Vec::<String>::new()),
            Err(AutomatonError::EmptyAlphabet)
        ));
        assert!(matches!(
            Alphabet::new(["a", "b", "a"]),
            Err(AutomatonError::DuplicateSymbol(_))
        ));
    }

    #[test]
    fn parse_and_render() {
        let ab = Alphabet::from_chars("ab").unwrap();
        let w = ab.parse_word("aab").unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(ab.render(&w), "aab");
        assert!(ab.parse_word("").unwrap().is_empty());
        assert!(matches!(ab.parse_word("abc"), Err(AutomatonError::UnknownSymbol(s)) if s == "c"));

        let multi = Alphabet::new(["on", "off"]).unwrap();
        let w = multi.parse_word("on off on").unwrap();
        assert_eq!(multi.render(&w), "on off on");
    }

    #[test]
    fn enumeration_counts() {
        let ab = Alphabet::from_chars("ab").unwrap();
        assert_eq!(ab.words_up_to(8).count(), (1 << 9) - 1);
        let first: Vec<String> = ab.words_up_to(2).map(|w| ab.render(&w)).collect();
        assert_eq!(first, ["", "a", "b", "aa", "ab", "ba", "bb"]);
    }
}
