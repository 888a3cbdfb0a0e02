/// Splits on anything that is not alphanumeric and keeps tokens of at least
/// `min_len` characters. Case is preserved.
pub fn words(text: &str, min_len: usize) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(move |t| !t.is_empty() && t.chars().count() >= min_len)
}

/// Lowercased tokens.
pub fn tokenize(text: &str, min_len: usize) -> Vec<String> {
    words(text, min_len).map(str::to_lowercase).collect()
}

/// Word n-grams of every length in `min_n..=max_n`, joined by single spaces.
pub fn ngrams(tokens: &[String], min_n: usize, max_n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in min_n.max(1)..=max_n {
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}
