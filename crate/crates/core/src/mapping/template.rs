use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Text(String),
    Placeholder(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("unbalanced template braces")]
    Unbalanced,
    #[error("empty template placeholder")]
    EmptyPlaceholder,
}

/// Split an `rr:template` string into literal text and `{attr}` placeholders.
/// `\{`, `\}` and `\\` escape the corresponding characters.
pub fn parse_template(template: &str) -> Result<Vec<Segment>, TemplateError> {
    let mut segments = Vec::new();
    let mut text = String::new();
    let mut placeholder: Option<String> = None;
    let mut chars = template.chars();
    while let Some(c) = chars.next() {
        match (c, placeholder.as_mut()) {
            ('\\', _) => {
                let escaped = chars.next().ok_or(TemplateError::Unbalanced)?;
                match placeholder.as_mut() {
                    Some(name) => name.push(escaped),
                    None => text.push(escaped),
                }
            }
            ('{', None) => {
                if !text.is_empty() {
                    segments.push(Segment::Text(std::mem::take(&mut text)));
                }
                placeholder = Some(String::new());
            }
            ('{', Some(_)) => return Err(TemplateError::Unbalanced),
            ('}', None) => return Err(TemplateError::Unbalanced),
            ('}', Some(_)) => {
                let name = placeholder.take().unwrap_or_default();
                if name.is_empty() {
                    return Err(TemplateError::EmptyPlaceholder);
                }
                segments.push(Segment::Placeholder(name));
            }
            (c, Some(name)) => name.push(c),
            (c, None) => text.push(c),
        }
    }
    if placeholder.is_some() {
        return Err(TemplateError::Unbalanced);
    }
    if !text.is_empty() {
        segments.push(Segment::Text(text));
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_placeholders() {
        assert_eq!(
            parse_template("speed={speed}&time={time}").unwrap(),
            vec![
                Segment::Text("speed=".into()),
                Segment::Placeholder("speed".into()),
                Segment::Text("&time=".into()),
                Segment::Placeholder("time".into()),
            ]
        );
    }

    #[test]
    fn rejects_unbalanced_and_empty() {
        assert_eq!(parse_template("speed={speed"), Err(TemplateError::Unbalanced));
        assert_eq!(parse_template("speed}"), Err(TemplateError::Unbalanced));
        assert_eq!(parse_template("{a{b}}"), Err(TemplateError::Unbalanced));
        assert_eq!(parse_template("x={}"), Err(TemplateError::EmptyPlaceholder));
    }

    #[test]
    fn escapes() {
        assert_eq!(
            parse_template(r"\{lit\}{a}").unwrap(),
            vec![Segment::Text("{lit}".into()), Segment::Placeholder("a".into())]
        );
    }

    #[test]
    fn no_placeholders() {
        assert_eq!(
            parse_template("constant").unwrap(),
            vec![Segment::Text("constant".into())]
        );
    }
}
