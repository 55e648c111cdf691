use std::collections::HashSet;
use std::sync::OnceLock;

/// Shipped stop-word list, one lowercase word per line.
pub const STOP_WORDS: &str = include_str!("stopwords.txt");

const IRREGULAR: &[(&str, &str)] = &[
    ("children", "child"),
    ("feet", "foot"),
    ("geese", "goose"),
    ("knives", "knife"),
    ("men", "man"),
    ("mice", "mouse"),
    ("people", "person"),
    ("shelves", "shelf"),
    ("teeth", "tooth"),
    ("women", "woman"),
    ("clothes", "clothes"),
    ("glasses", "glasses"),
    ("stairs", "stairs"),
];

fn stop_words() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOP_WORDS
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .collect()
    })
}

pub fn is_stop_word(word: &str) -> bool {
    stop_words().contains(word)
}

/// Rule-based suffix stripping. Stop words are returned unchanged.
pub fn singularize(word: &str) -> String {
    if let Some(&(_, singular)) = IRREGULAR.iter().find(|(plural, _)| *plural == word) {
        return singular.to_string();
    }
    let n = word.len();
    if n <= 3
        || is_stop_word(word)
        || word.ends_with("ss")
        || word.ends_with("us")
        || word.ends_with("is")
    {
        return word.to_string();
    }
    if word.ends_with("ies") && n > 4 {
        return format!("{}y", &word[..n - 3]);
    }
    if ["ches", "shes", "xes", "zes", "sses"]
        .iter()
        .any(|suffix| word.ends_with(suffix))
    {
        return word[..n - 2].to_string();
    }
    match word.strip_suffix('s') {
        Some(stem) => stem.to_string(),
        None => word.to_string(),
    }
}

/// Sentence pipeline: drop characters other than ASCII letters, whitespace
/// and hyphens, split on hyphens and whitespace, lowercase, singularize,
/// drop stop words.
pub fn preprocess_sentence(text: &str) -> Vec<String> {
    let letters: String = text
        .chars()
        .filter(|c| c.is_ascii_alphabetic() || c.is_whitespace() || *c == '-')
        .collect();
    letters
        .split(|c: char| c == '-' || c.is_whitespace())
        .filter(|w| !w.is_empty())
        .map(|w| singularize(&w.to_ascii_lowercase()))
        .filter(|w| !is_stop_word(w))
        .collect()
}

/// Single-token mode: the label itself, lowercased, underscores preserved.
pub fn preprocess_token(text: &str) -> Vec<String> {
    let token = text.trim().to_lowercase();
    if token.is_empty() {
        Vec::new()
    } else {
        vec![token]
    }
}
