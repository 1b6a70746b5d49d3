//! Shared tokenization: lowercase, strip surrounding punctuation, split on
//! whitespace. No stemming.

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|w| {
            let t: String = w
                .trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase();
            if t.is_empty() {
                None
            } else {
                Some(t)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::tokenize;

    #[test]
    fn strips_punctuation_and_lowercases() {
        assert_eq!(
            tokenize("The boy, ran -- fast!"),
            vec!["the", "boy", "ran", "fast"]
        );
        assert_eq!(tokenize("  "), Vec::<String>::new());
    }

    #[test]
    fn keeps_inner_hyphens() {
        assert_eq!(tokenize("state-of-the-art."), vec!["state-of-the-art"]);
    }
}
