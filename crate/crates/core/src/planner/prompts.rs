//! Prompt templates, shipped as text assets keyed by request kind, and
//! `{placeholder}` rendering.

use super::policy::RequestKind;

pub fn template(kind: RequestKind) -> &'static str {
    match kind {
        RequestKind::SelectObjects => include_str!("../../templates/select_objects.txt"),
        RequestKind::MacroPlan => include_str!("../../templates/macro_plan.txt"),
        RequestKind::MacroConditions => include_str!("../../templates/macro_conditions.txt"),
        RequestKind::ExpandMacro => include_str!("../../templates/expand_macro.txt"),
        RequestKind::ExpandTask => include_str!("../../templates/expand_task.txt"),
        RequestKind::CorrectConditions => include_str!("../../templates/correct_conditions.txt"),
        RequestKind::CorrectBlock => include_str!("../../templates/correct_block.txt"),
        RequestKind::RefineConditions => include_str!("../../templates/refine_conditions.txt"),
    }
}

/// Replaces each `{key}` with its value. Unknown placeholders are left as
/// they are; values are inserted verbatim (never re-scanned).
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let key = &after[..close];
                match vars.iter().find(|(k, _)| *k == key) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        out.push('{');
                        out.push_str(key);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Renders the template for `kind`.
pub fn prompt(kind: RequestKind, vars: &[(&str, &str)]) -> String {
    render(template(kind), vars)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_known_placeholders_only() {
        assert_eq!(render("a {x} b {y} {", &[("x", "{y}")]), "a {y} b {y} {");
    }

    #[test]
    fn every_kind_has_a_template() {
        for k in RequestKind::ALL {
            assert!(template(k).contains('{'), "{k}");
        }
    }
}
