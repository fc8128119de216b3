use rust_stemmers::{Algorithm, Stemmer};

/// Switches applied on top of lowercasing and alphanumeric splitting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub stopwords: bool,
    pub stem: bool,
}

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "if", "in", "into", "is", "it", "no", "not", "of",
    "on", "or", "such", "that", "the", "their", "then", "there", "these", "they", "this", "to", "was", "will", "with",
];

pub struct Tokenizer {
    config: TokenizerConfig,
    stemmer: Option<Stemmer>,
}

impl std::fmt::Debug for Tokenizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tokenizer").field("config", &self.config).finish()
    }
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::new(TokenizerConfig::default())
    }
}

impl Clone for Tokenizer {
    fn clone(&self) -> Self {
        Tokenizer::new(self.config)
    }
}

impl Tokenizer {
    pub fn new(config: TokenizerConfig) -> Self {
        Self {
            config,
            stemmer: config.stem.then(|| Stemmer::create(Algorithm::English)),
        }
    }

    pub fn config(&self) -> TokenizerConfig {
        self.config
    }

    /// Lowercases and splits on every non-alphanumeric codepoint.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| !(self.config.stopwords && STOPWORDS.contains(&t.as_str())))
            .map(|t| match &self.stemmer {
                Some(s) => s.stem(&t).into_owned(),
                None => t,
            })
            .collect()
    }
}

/// Tokenizes with the default configuration (no stemming, no stopwords).
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rules() {
        assert_eq!(tokenize("Solar-Panel efficiency!"), ["solar", "panel", "efficiency"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a1 b2"), ["a1", "b2"]);
        assert_eq!(tokenize("  --The  ÉCOLE__x "), ["the", "école", "x"]);
    }

    #[test]
    fn optional_filters() {
        let t = Tokenizer::new(TokenizerConfig {
            stopwords: true,
            stem: true,
        });
        assert_eq!(t.tokenize("The running panels"), ["run", "panel"]);
    }
}
