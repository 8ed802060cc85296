//! Small helpers for line-oriented policy responses.

/// Strips a leading list marker: `1.`, `2)`, `-`, `*`, `•`, and `Step 3:`.
pub fn strip_list_marker(line: &str) -> &str {
    let mut s = line.trim();
    if let Some(rest) = s.strip_prefix("Step ").or_else(|| s.strip_prefix("step ")) {
        let digits = rest.chars().take_while(char::is_ascii_digit).count();
        if digits > 0 {
            s = rest[digits..].trim_start_matches([':', '.', ')']).trim_start();
            return s;
        }
    }
    for bullet in ["-", "*", "•"] {
        if let Some(rest) = s.strip_prefix(bullet) {
            return rest.trim_start();
        }
    }
    let digits = s.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &s[digits..];
        if let Some(r) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            return r.trim_start();
        }
    }
    s
}

/// Non-blank lines with list markers removed.
pub fn list_items(text: &str) -> Vec<String> {
    text.lines()
        .map(strip_list_marker)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}
