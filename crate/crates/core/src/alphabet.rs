//! Alphabets, unary symbol encodings and the network shape shared by the
//! controller, the stack and the extraction pipeline.

use std::fmt;

use crate::error::{parse_err, Error, Result};

/// Ordered set of symbols. Index order is declaration order and every tensor
/// in the crate indexes symbols by it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    end_symbol: Option<usize>,
}

impl Alphabet {
    /// Builds an alphabet. When `end_symbol` is given it must be the last
    /// symbol.
    pub fn new<S: AsRef<str>>(symbols: &[S], end_symbol: Option<&str>) -> Result<Self> {
        let symbols: Vec<String> = symbols.iter().map(|s| s.as_ref().to_string()).collect();
        if symbols.len() < 2 {
            return Err(Error::InvalidAlphabet(format!(
                "need at least 2 symbols, got {}",
                symbols.len()
            )));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c.is_control()) {
                return Err(Error::InvalidAlphabet(format!(
                    "symbol `{s}` is not a printable token"
                )));
            }
            if symbols[..i].contains(s) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol `{s}`")));
            }
        }
        let end_symbol = match end_symbol {
            None => None,
            Some(e) => {
                let idx = symbols.iter().position(|s| s == e).ok_or_else(|| {
                    Error::InvalidAlphabet(format!("end symbol `{e}` is not in the alphabet"))
                })?;
                if idx + 1 != symbols.len() {
                    return Err(Error::InvalidAlphabet(format!(
                        "end symbol `{e}` must be declared last"
                    )));
                }
                Some(idx)
            }
        };
        Ok(Alphabet {
            symbols,
            end_symbol,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == token)
    }

    pub fn end_symbol(&self) -> Option<usize> {
        self.end_symbol
    }

    /// Symbols that may appear inside a string (everything except the end
    /// symbol).
    pub fn string_symbols(&self) -> std::ops::Range<usize> {
        0..self.end_symbol.unwrap_or(self.symbols.len())
    }

    fn single_char_tokens(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    /// Splits text into symbol indices. Single-character alphabets split per
    /// character; otherwise tokens are whitespace separated.
    pub fn tokenize(&self, text: &str) -> Result<Vec<usize>> {
        let lookup = |tok: &str| {
            self.index_of(tok)
                .ok_or_else(|| Error::UnknownSymbol(tok.to_string()))
        };
        if self.single_char_tokens() {
            text.chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| lookup(c.encode_utf8(&mut [0u8; 4])))
                .collect()
        } else {
            text.split_whitespace().map(lookup).collect()
        }
    }

    /// Inverse of [`Alphabet::tokenize`].
    pub fn render(&self, tokens: &[usize]) -> String {
        let sep = if self.single_char_tokens() { "" } else { " " };
        tokens
            .iter()
            .map(|&t| self.symbols[t].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Parses the alphabet file format: one token per line, `#` comments,
    /// and an optional `end: <token>` line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut symbols = Vec::new();
        let mut end = None;
        for (n, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("end:") {
                let tok = rest.trim();
                if tok.is_empty() {
                    return Err(parse_err(n + 1, "empty end symbol"));
                }
                if end.replace(tok.to_string()).is_some() {
                    return Err(parse_err(n + 1, "end symbol declared twice"));
                }
                continue;
            }
            if line.split_whitespace().count() != 1 {
                return Err(parse_err(
                    n + 1,
                    format!("expected a single token, got `{line}`"),
                ));
            }
            symbols.push(line.to_string());
        }
        if let Some(e) = &end {
            if !symbols.contains(e) {
                symbols.push(e.clone());
            }
        }
        Alphabet::new(&symbols, end.as_deref())
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.symbols.iter().enumerate() {
            if Some(i) != self.end_symbol {
                out.push_str(s);
                out.push('\n');
            }
        }
        if let Some(e) = self.end_symbol {
            out.push_str("end: ");
            out.push_str(&self.symbols[e]);
            out.push('\n');
        }
        out
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// A vector over symbol positions: a one-hot input encoding or a stack
/// reading (per-symbol mass).
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolVector(pub Vec<f64>);

impl SymbolVector {
    pub fn zeros(n: usize) -> Self {
        SymbolVector(vec![0.0; n])
    }

    pub fn one_hot(n: usize, index: usize) -> Self {
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        SymbolVector(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Unary encoding of `symbol`.
pub fn encode_input(symbol: &str, alphabet: &Alphabet) -> Result<SymbolVector> {
    let idx = alphabet
        .index_of(symbol)
        .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))?;
    Ok(SymbolVector::one_hot(alphabet.len(), idx))
}

/// Maps each component to the nearest value of `levels`. Ties go to the
/// larger level.
pub fn decode_state_label(vector: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    if levels.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut grid = levels.to_vec();
    grid.sort_by(f64::total_cmp);
    vector
        .iter()
        .map(|&x| {
            if !x.is_finite() {
                return Err(Error::NonFinite(format!("state component {x}")));
            }
            Ok(nearest_level(x, &grid))
        })
        .collect()
}

pub(crate) fn nearest_level(x: f64, sorted_grid: &[f64]) -> f64 {
    let mut best = sorted_grid[0];
    let mut best_d = (x - best).abs();
    for &g in &sorted_grid[1..] {
        let d = (x - g).abs();
        // ascending grid: `<=` sends exact ties upward
        if d <= best_d {
            best = g;
            best_d = d;
        }
    }
    best
}

/// Neuron counts of the controller.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetworkShape {
    pub n_state: usize,
    pub n_input: usize,
    pub n_read: usize,
    pub n_action: usize,
}

impl NetworkShape {
    pub fn new(n_state: usize, n_input: usize, empty_stack_neuron: bool) -> Result<Self> {
        let shape = NetworkShape {
            n_state,
            n_input,
            n_read: n_input + usize::from(empty_stack_neuron),
            n_action: 1,
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_state == 0 || self.n_input < 2 {
            return Err(Error::Dimension(format!("degenerate shape {self}")));
        }
        if self.n_action != 1 {
            return Err(Error::Dimension(
                "exactly one action neuron is supported".into(),
            ));
        }
        if self.n_read != self.n_input && self.n_read != self.n_input + 1 {
            return Err(Error::Dimension(format!(
                "n_read must be n_input or n_input + 1, got {} for n_input {}",
                self.n_read, self.n_input
            )));
        }
        Ok(())
    }

    /// Whether the last reading neuron carries the unfilled depth of the read
    /// window.
    pub fn has_empty_stack_neuron(&self) -> bool {
        self.n_read == self.n_input + 1
    }
}

impl fmt::Display for NetworkShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N_S={} N_I={} N_R={} N_A={}",
            self.n_state, self.n_input, self.n_read, self.n_action
        )
    }
}
