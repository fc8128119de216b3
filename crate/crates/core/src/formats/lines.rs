use std::io::BufRead;

use crate::error::{Error, Result};

/// Numbered UTF-8 lines of a stream. Strips `\n` / `\r\n`; invalid UTF-8 is
/// reported with its line number.
pub(crate) struct Lines<R> {
    reader: R,
    source: String,
    line: usize,
    buf: Vec<u8>,
    done: bool,
}

impl<R: BufRead> Lines<R> {
    pub(crate) fn new(reader: R, source: impl Into<String>) -> Self {
        Self {
            reader,
            source: source.into(),
            line: 0,
            buf: Vec::new(),
            done: false,
        }
    }

    pub(crate) fn source(&self) -> &str {
        &self.source
    }
}

impl<R: BufRead> Iterator for Lines<R> {
    /// Line number (1-based) and its text.
    type Item = Result<(usize, String)>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        self.buf.clear();
        match self.reader.read_until(b'\n', &mut self.buf) {
            Ok(0) => {
                self.done = true;
                None
            }
            Ok(_) => {
                self.line += 1;
                if self.buf.last() == Some(&b'\n') {
                    self.buf.pop();
                    if self.buf.last() == Some(&b'\r') {
                        self.buf.pop();
                    }
                }
                match std::str::from_utf8(&self.buf) {
                    Ok(s) => Some(Ok((self.line, s.to_string()))),
                    Err(e) => {
                        self.done = true;
                        Some(Err(Error::parse(
                            &self.source,
                            self.line,
                            format!("invalid UTF-8: {e}"),
                        )))
                    }
                }
            }
            Err(e) => {
                self.done = true;
                Some(Err(Error::parse(
                    &self.source,
                    self.line + 1,
                    format!("read failed: {e}"),
                )))
            }
        }
    }
}
