//! Line-level structure shared by every rule file section: `[NAME]` headers,
//! `#` comments, and indented continuation lines.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section<'a> {
    pub name: String,
    pub header_line: usize,
    /// Non-blank lines with comments removed, paired with 1-based line numbers.
    pub lines: Vec<(usize, &'a str)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl LineError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        LineError { line, message: message.into() }
    }
}

/// Removes a trailing `#` comment, ignoring `#` inside double quotes.
pub fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

pub fn split_sections(text: &str) -> Result<Vec<Section<'_>>, LineError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw).trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let trimmed = line.trim();
        if trimmed.starts_with('[') && trimmed.ends_with(']') && !raw.starts_with(char::is_whitespace) {
            let name = trimmed[1..trimmed.len() - 1].trim().to_ascii_uppercase();
            if name.is_empty() {
                return Err(LineError::new(line_no, "empty section name"));
            }
            sections.push(Section { name, header_line: line_no, lines: Vec::new() });
            continue;
        }
        match sections.last_mut() {
            Some(s) => s.lines.push((line_no, line)),
            None => return Err(LineError::new(line_no, "text before the first section header")),
        }
    }
    Ok(sections)
}

/// Groups lines into statements: a statement starts on an unindented line and
/// continues over the indented lines that follow it.
pub fn statements(lines: &[(usize, &str)]) -> Vec<(usize, String)> {
    let mut out: Vec<(usize, String)> = Vec::new();
    for &(line_no, line) in lines {
        if line.starts_with(char::is_whitespace) {
            if let Some((_, stmt)) = out.last_mut() {
                stmt.push(' ');
                stmt.push_str(line.trim());
                continue;
            }
        }
        out.push((line_no, line.trim().to_string()));
    }
    out
}
