use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::BlockingError;
use crate::model::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Delimiters {
    /// Every character that is not alphanumeric splits tokens.
    NonAlphanumeric,
    /// Only the listed characters split tokens.
    Chars(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct TokenizerConfig {
    pub delimiters: Delimiters,
    pub case_fold: bool,
    /// Measured in characters; shorter tokens are dropped.
    pub min_token_length: usize,
    /// Whether resource (URI) values contribute tokens.
    pub tokenize_resource_values: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            delimiters: Delimiters::NonAlphanumeric,
            case_fold: true,
            min_token_length: 1,
            tokenize_resource_values: true,
        }
    }
}

impl TokenizerConfig {
    pub fn validate(&self) -> Result<(), BlockingError> {
        if self.min_token_length == 0 {
            return Err(BlockingError::InvalidConfig(
                "min-token-length must be at least 1",
            ));
        }
        Ok(())
    }

    /// Same configuration with resource values excluded.
    pub fn literals_only(&self) -> Self {
        Self {
            tokenize_resource_values: false,
            ..self.clone()
        }
    }

    fn is_delimiter(&self, c: char) -> bool {
        match &self.delimiters {
            Delimiters::NonAlphanumeric => !c.is_alphanumeric(),
            Delimiters::Chars(set) => set.contains(c),
        }
    }
}

fn strip_scheme(uri: &str) -> &str {
    for scheme in ["https://", "http://"] {
        if uri.len() >= scheme.len() && uri[..scheme.len()].eq_ignore_ascii_case(scheme) {
            return &uri[scheme.len()..];
        }
    }
    uri
}

/// Splits a value into tokens, in order of appearance (repeats kept).
pub fn tokenize(value: &Value, config: &TokenizerConfig) -> Vec<String> {
    let text = if value.is_resource() {
        if !config.tokenize_resource_values {
            return Vec::new();
        }
        strip_scheme(&value.text)
    } else {
        value.text.as_str()
    };
    text.split(|c| config.is_delimiter(c))
        .filter(|t| t.chars().count() >= config.min_token_length)
        .map(|t| {
            if config.case_fold {
                t.to_lowercase()
            } else {
                String::from(t)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lit(s: &str) -> Vec<String> {
        tokenize(&Value::literal(s), &TokenizerConfig::default())
    }

    #[test]
    fn splits_and_folds() {
        assert_eq!(lit("Eiffel Tower"), vec!["eiffel", "tower"]);
        assert_eq!(lit("Statue of Lib."), vec!["statue", "of", "lib"]);
        assert!(lit("").is_empty());
        assert!(lit(" .,; ").is_empty());
    }

    #[test]
    fn resources_lose_their_scheme() {
        let v = Value::resource("http://dbpedia.org/resource/Eiffel_Tower");
        let cfg = TokenizerConfig::default();
        assert_eq!(
            tokenize(&v, &cfg),
            vec!["dbpedia", "org", "resource", "eiffel", "tower"]
        );
        assert!(tokenize(&v, &cfg.literals_only()).is_empty());
    }

    #[test]
    fn honours_min_length_case_and_custom_delimiters() {
        let cfg = TokenizerConfig {
            delimiters: Delimiters::Chars(" ".into()),
            case_fold: false,
            min_token_length: 3,
            tokenize_resource_values: true,
        };
        assert_eq!(
            tokenize(&Value::literal("Statue of Lib."), &cfg),
            vec!["Statue", "Lib."]
        );
        let bad = TokenizerConfig {
            min_token_length: 0,
            ..TokenizerConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn unicode_letters_are_token_characters() {
        assert_eq!(lit("Zürich–Genève"), vec!["zürich", "genève"]);
    }
}
