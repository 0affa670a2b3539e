use super::{Example, RuleId, TaskKind};
use crate::error::{Error, Result};

/// Renders the classifier question for an example.
///
/// Likert: `In the situation - <context>, how good/bad is it to do this action
/// morally - <focus>? (a) very-bad (b) bad (c) ok (d) good (e) very-good`.
/// Binary: `Is this <focus> <rule>? (a) yes (b) no` (no context clause).
pub fn render_prompt(example: &Example, task: TaskKind, rule: Option<&RuleId>) -> Result<String> {
    let focus = example.focus.trim();
    if focus.is_empty() {
        return Err(Error::Rendering(format!("example `{}` has no focus text", example.id)));
    }
    match task {
        TaskKind::Likert5 => {
            let context = example
                .context
                .as_deref()
                .map(str::trim)
                .filter(|c| !c.is_empty())
                .ok_or_else(|| {
                    Error::Rendering(format!("example `{}` has no context", example.id))
                })?;
            Ok(format!(
                "In the situation - {context}, how good/bad is it to do this action morally - {focus}? \
                 (a) very-bad (b) bad (c) ok (d) good (e) very-good"
            ))
        }
        TaskKind::BinaryPerRule => {
            let rule = rule.ok_or_else(|| Error::Rendering("binary prompt needs a rule".into()))?;
            Ok(format!("Is this {focus} {rule}? (a) yes (b) no"))
        }
    }
}

/// Text the surrogate classifier featurizes: the variable parts of the prompt.
/// For the binary task the rule name is included so one model serves all rules.
pub fn model_text(example: &Example, task: TaskKind, rule: Option<&RuleId>) -> String {
    match (task, rule) {
        (TaskKind::BinaryPerRule, Some(rule)) => format!("{} {}", example.focus, rule),
        _ => example.full_text(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ExampleId, Label, Likert};
    use std::collections::BTreeMap;

    fn example(context: Option<&str>, focus: &str) -> Example {
        Example {
            id: ExampleId("e".into()),
            context: context.map(str::to_string),
            focus: focus.into(),
            rule_tags: Default::default(),
            label: Label::Likert(Likert::Ok),
        }
    }

    #[test]
    fn likert_template() {
        let p = render_prompt(&example(Some("S"), "A"), TaskKind::Likert5, None).unwrap();
        assert_eq!(
            p,
            "In the situation - S, how good/bad is it to do this action morally - A? \
             (a) very-bad (b) bad (c) ok (d) good (e) very-good"
        );
    }

    #[test]
    fn binary_template_omits_context() {
        let mut ex = example(None, "C");
        ex.label = Label::Binary(BTreeMap::new());
        let toxic = RuleId::new("toxic").unwrap();
        let p = render_prompt(&ex, TaskKind::BinaryPerRule, Some(&toxic)).unwrap();
        assert_eq!(p, "Is this C toxic? (a) yes (b) no");
        assert!(render_prompt(&ex, TaskKind::BinaryPerRule, None).is_err());
    }

    #[test]
    fn missing_fields_fail_to_render() {
        assert!(render_prompt(&example(Some("S"), "  "), TaskKind::Likert5, None).is_err());
        assert!(render_prompt(&example(None, "A"), TaskKind::Likert5, None).is_err());
    }
}
