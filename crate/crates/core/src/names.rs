//! Person-name canonicalization to "FirstName LastName".

use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NameError {
    #[error("name is empty after trimming")]
    EmptyName,
}

/// Canonicalizes a person name.
///
/// Whitespace is collapsed, `"Last, First"` is reordered to `"First Last"`,
/// and every token is title-cased with interior capitals kept after an
/// apostrophe or hyphen (`d'angelo` becomes `D'Angelo`).
pub fn normalize_name(raw: &str) -> Result<String, NameError> {
    let nfc: String = raw.nfc().collect();
    let reordered = match nfc.split_once(',') {
        Some((last, first)) => {
            let first = first.replace(',', " ");
            format!("{} {}", first.trim(), last.trim())
        }
        None => nfc,
    };
    let tokens: Vec<String> = reordered.split_whitespace().map(title_case).collect();
    if tokens.is_empty() {
        return Err(NameError::EmptyName);
    }
    Ok(tokens.join(" ").nfc().collect())
}

fn title_case(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    let mut capitalize = true;
    for c in token.chars() {
        if capitalize {
            push_single_mapping(&mut out, c, c.to_uppercase());
        } else {
            push_single_mapping(&mut out, c, c.to_lowercase());
        }
        capitalize = matches!(c, '\'' | '\u{2019}' | '-');
    }
    out
}

// Multi-char case mappings (ß -> SS) would break idempotence; keep the char.
fn push_single_mapping(out: &mut String, original: char, mut mapped: impl Iterator<Item = char>) {
    match (mapped.next(), mapped.next()) {
        (Some(m), None) => out.push(m),
        _ => out.push(original),
    }
}
