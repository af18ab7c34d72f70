//! Session logs: one frame per line, `> ` for frames the server received and
//! `< ` for frames it sent.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranscriptLine {
    Inbound(String),
    Outbound(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub lines: Vec<TranscriptLine>,
}

impl Transcript {
    pub fn push(&mut self, line: TranscriptLine) {
        self.lines.push(line);
    }

    pub fn inbound(&self) -> impl Iterator<Item = &str> {
        self.lines.iter().filter_map(|l| match l {
            TranscriptLine::Inbound(s) => Some(s.as_str()),
            TranscriptLine::Outbound(_) => None,
        })
    }

    pub fn outbound(&self) -> impl Iterator<Item = &str> {
        self.lines.iter().filter_map(|l| match l {
            TranscriptLine::Outbound(s) => Some(s.as_str()),
            TranscriptLine::Inbound(_) => None,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let (p, s) = match l {
                TranscriptLine::Inbound(s) => ("> ", s),
                TranscriptLine::Outbound(s) => ("< ", s),
            };
            out.push_str(p);
            out.push_str(s);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut t = Transcript::default();
        for (i, line) in text.lines().enumerate() {
            if let Some(s) = line.strip_prefix("> ") {
                t.push(TranscriptLine::Inbound(s.to_string()));
            } else if let Some(s) = line.strip_prefix("< ") {
                t.push(TranscriptLine::Outbound(s.to_string()));
            } else {
                return Err(format!("line {}: missing direction prefix", i + 1));
            }
        }
        Ok(t)
    }
}
