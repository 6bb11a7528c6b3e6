use crate::error::{Error, Result};
use std::str::FromStr;

/// Whitespace-separated tokens with their 1-based line numbers; `#` starts a
/// comment.
pub(crate) struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, line)| {
                let body = line.split('#').next().unwrap_or("");
                body.split_whitespace().map(move |t| (i + 1, t))
            })
            .collect();
        Tokens { items, pos: 0 }
    }

    pub(crate) fn len(&self) -> usize {
        self.items.len()
    }

    fn last_line(&self) -> usize {
        self.items.last().map_or(1, |&(l, _)| l)
    }

    pub(crate) fn next<T: FromStr>(&mut self, what: &str) -> Result<T> {
        let Some(&(line, tok)) = self.items.get(self.pos) else {
            return Err(Error::parse(self.last_line(), format!("unexpected end of input, expected {what}")));
        };
        self.pos += 1;
        tok.parse()
            .map_err(|_| Error::parse(line, format!("cannot read {what} from {tok:?}")))
    }

    pub(crate) fn line(&self) -> usize {
        self.items.get(self.pos).map_or(self.last_line(), |&(l, _)| l)
    }

    pub(crate) fn finish(&self) -> Result<()> {
        match self.items.get(self.pos) {
            None => Ok(()),
            Some(&(line, tok)) => Err(Error::parse(line, format!("unexpected trailing token {tok:?}"))),
        }
    }
}
