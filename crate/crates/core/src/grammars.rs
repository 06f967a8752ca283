//! Membership oracles and training-set builders for the three example
//! languages: balanced parentheses, `1^n 0^n` and `w c reverse(w)`.

use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::Alphabet;
use crate::error::{parse_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Grammar {
    /// Balanced parentheses, `1` opens and `0` closes; end marker `e`.
    Paren,
    /// `1^n 0^n` with `n >= 1`; end marker `e`.
    Anbn,
    /// `w c reverse(w)` with `w` over `{a, b}`; no end marker.
    Palindrome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Legal,
    Illegal,
}

impl Label {
    pub fn is_legal(self) -> bool {
        self == Label::Legal
    }

    pub fn from_bool(legal: bool) -> Self {
        if legal {
            Label::Legal
        } else {
            Label::Illegal
        }
    }

    pub fn flag(self) -> char {
        match self {
            Label::Legal => 'y',
            Label::Illegal => 'n',
        }
    }
}

impl Grammar {
    pub fn name(self) -> &'static str {
        match self {
            Grammar::Paren => "paren",
            Grammar::Anbn => "anbn",
            Grammar::Palindrome => "palindrome",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "paren" => Ok(Grammar::Paren),
            "anbn" => Ok(Grammar::Anbn),
            "palindrome" => Ok(Grammar::Palindrome),
            _ => Err(Error::Config(format!("unknown grammar `{s}`"))),
        }
    }

    pub fn alphabet(self) -> Alphabet {
        match self {
            Grammar::Paren | Grammar::Anbn => Alphabet::new(&["1", "0", "e"], Some("e")),
            Grammar::Palindrome => Alphabet::new(&["a", "b", "c"], None),
        }
        .expect("built-in alphabets are valid")
    }

    /// Exact membership. Tokens index the grammar's alphabet.
    pub fn accepts(self, tokens: &[usize]) -> bool {
        match self {
            Grammar::Paren => {
                let mut depth: i64 = 0;
                for &t in tokens {
                    depth += if t == 0 { 1 } else { -1 };
                    if depth < 0 {
                        return false;
                    }
                }
                depth == 0
            }
            Grammar::Anbn => {
                let n = tokens.len();
                n >= 2
                    && n.is_multiple_of(2)
                    && tokens[..n / 2].iter().all(|&t| t == 0)
                    && tokens[n / 2..].iter().all(|&t| t == 1)
            }
            Grammar::Palindrome => {
                let centre = tokens.iter().position(|&t| t == 2);
                match centre {
                    Some(c) => {
                        let (w, rest) = (&tokens[..c], &tokens[c + 1..]);
                        !w.contains(&2) && w.len() == rest.len() && w.iter().rev().eq(rest.iter())
                    }
                    None => false,
                }
            }
        }
    }

    pub fn label(self, tokens: &[usize]) -> Label {
        Label::from_bool(self.accepts(tokens))
    }

    /// First position after which no continuation can be legal, if any.
    pub fn dead_prefix(self, tokens: &[usize]) -> Option<usize> {
        match self {
            Grammar::Paren => {
                let mut depth: i64 = 0;
                for (i, &t) in tokens.iter().enumerate() {
                    depth += if t == 0 { 1 } else { -1 };
                    if depth < 0 {
                        return Some(i);
                    }
                }
                None
            }
            Grammar::Anbn => {
                let (mut ones, mut zeros) = (0usize, 0usize);
                for (i, &t) in tokens.iter().enumerate() {
                    if t == 0 {
                        if zeros > 0 {
                            return Some(i);
                        }
                        ones += 1;
                    } else {
                        zeros += 1;
                        if zeros > ones {
                            return Some(i);
                        }
                    }
                }
                None
            }
            Grammar::Palindrome => {
                let mut centre: Option<usize> = None;
                for (i, &t) in tokens.iter().enumerate() {
                    match centre {
                        None => {
                            if t == 2 {
                                centre = Some(i);
                            }
                        }
                        Some(c) => {
                            let back = i - c;
                            if back > c || tokens[c - back] != t {
                                return Some(i);
                            }
                        }
                    }
                }
                None
            }
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Membership for a rendered string; foreign symbols are errors.
pub fn label(grammar: Grammar, text: &str) -> Result<Label> {
    let a = grammar.alphabet();
    let tokens = a.tokenize(text)?;
    if let Some(&bad) = tokens.iter().find(|t| !a.string_symbols().contains(t)) {
        return Err(Error::UnknownSymbol(a.symbol(bad).to_string()));
    }
    Ok(grammar.label(&tokens))
}

/// All strings over the alphabet's string symbols up to `max_len`, shortest
/// first and lexicographic (by symbol order) within a length. Includes the
/// empty string.
pub fn enumerate_strings(alphabet: &Alphabet, max_len: usize) -> impl Iterator<Item = Vec<usize>> {
    let k = alphabet.string_symbols().len();
    (0..=max_len).flat_map(move |len| {
        let total = k.checked_pow(len as u32).expect("string space too large");
        (0..total).map(move |mut idx| {
            let mut s = vec![0; len];
            for slot in s.iter_mut().rev() {
                *slot = idx % k;
                idx /= k;
            }
            s
        })
    })
}

/// Number of strings [`enumerate_strings`] yields.
pub fn count_strings(alphabet: &Alphabet, max_len: usize) -> usize {
    let k = alphabet.string_symbols().len();
    (0..=max_len).map(|l| k.pow(l as u32)).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub alphabet: Alphabet,
    pub entries: Vec<(Vec<usize>, Label)>,
}

impl LabeledDataset {
    pub fn new(alphabet: Alphabet) -> Self {
        LabeledDataset {
            alphabet,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.entries.iter().filter(|(_, l)| *l == label).count()
    }

    pub fn push(&mut self, tokens: Vec<usize>, label: Label) {
        self.entries.push((tokens, label));
    }

    /// One `y`/`n` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, l) in &self.entries {
            let _ = writeln!(out, "{}{}", l.flag(), self.alphabet.render(s));
        }
        out
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let mut ds = LabeledDataset::new(alphabet.clone());
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut chars = line.chars();
            let label = match chars.next() {
                Some('y') => Label::Legal,
                Some('n') => Label::Illegal,
                _ => return Err(parse_err(i + 1, "entry must start with `y` or `n`")),
            };
            let tokens = alphabet
                .tokenize(chars.as_str().trim())
                .map_err(|e| parse_err(i + 1, e.to_string()))?;
            if let Some(&t) = tokens
                .iter()
                .find(|t| !alphabet.string_symbols().contains(t))
            {
                return Err(parse_err(
                    i + 1,
                    format!("symbol `{}` not allowed in strings", alphabet.symbol(t)),
                ));
            }
            ds.push(tokens, label);
        }
        Ok(ds)
    }

    /// Checks every label against the grammar.
    pub fn verify(&self, grammar: Grammar) -> Result<()> {
        for (s, l) in &self.entries {
            if grammar.label(s) != *l {
                return Err(Error::Config(format!(
                    "`{}` is labelled {:?} but the {grammar} oracle says otherwise",
                    self.alphabet.render(s),
                    l
                )));
            }
        }
        Ok(())
    }
}

/// Recipe for a training set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetSpec {
    /// Every non-empty string up to this length.
    pub exhaustive_up_to: usize,
    /// Random strings with lengths in `random_len`, half legal and half
    /// illegal, distinct from each other and from the exhaustive part.
    pub random_count: usize,
    pub random_len: (usize, usize),
    /// Adds every legal string of exactly this length.
    pub legal_of_length: Option<usize>,
}

impl DatasetSpec {
    /// 30 exhaustive strings plus 20 random ones of length 5 to 8.
    pub fn paren() -> Self {
        DatasetSpec {
            exhaustive_up_to: 4,
            random_count: 20,
            random_len: (5, 8),
            legal_of_length: None,
        }
    }

    /// Stage one: 39 strings up to length 3 plus the 4 legal strings of length 5.
    /// Stage two: 363 strings up to length 5 plus the 8 legal strings of length 7.
    pub fn palindrome_stage(stage: usize) -> Self {
        let (n, extra) = if stage <= 1 { (3, 5) } else { (5, 7) };
        DatasetSpec {
            exhaustive_up_to: n,
            random_count: 0,
            random_len: (0, 0),
            legal_of_length: Some(extra),
        }
    }
}

/// The 27-string `1^n 0^n` starter set, duplicates included.
pub fn anbn_fixture() -> LabeledDataset {
    const ROWS: &str =
        "n1 n11 n1000 y1100 n1011 y10 y10 y1100 n110010 y10 n0 n100 n1111 y11110000 n1101 \
                        y10 y10 y1100 n110100 n00 n1001 n1110 y1111100000 y10 y1100 n101100 n1010";
    let a = Grammar::Anbn.alphabet();
    LabeledDataset::parse(&ROWS.split_whitespace().collect::<Vec<_>>().join("\n"), &a)
        .expect("fixture parses")
}

pub fn build_dataset(grammar: Grammar, spec: &DatasetSpec, seed: u64) -> Result<LabeledDataset> {
    let alphabet = grammar.alphabet();
    let mut ds = LabeledDataset::new(alphabet.clone());
    for s in enumerate_strings(&alphabet, spec.exhaustive_up_to).filter(|s| !s.is_empty()) {
        let l = grammar.label(&s);
        ds.push(s, l);
    }
    if spec.random_count > 0 {
        let (lo, hi) = spec.random_len;
        if lo > hi || hi <= spec.exhaustive_up_to {
            return Err(Error::Config(format!(
                "random lengths {lo}..={hi} must lie above the exhaustive part"
            )));
        }
        let k = alphabet.string_symbols().len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen: std::collections::HashSet<Vec<usize>> =
            ds.entries.iter().map(|(s, _)| s.clone()).collect();
        let want_legal = spec.random_count / 2;
        let mut extra = Vec::new();
        for (want, target) in [
            (want_legal, Label::Legal),
            (spec.random_count - want_legal, Label::Illegal),
        ] {
            let mut got = 0;
            let mut tries = 0usize;
            while got < want {
                tries += 1;
                if tries > 1_000_000 {
                    return Err(Error::Config(format!(
                        "could not sample {want} {target:?} strings"
                    )));
                }
                let len = rng.gen_range(lo..=hi);
                let s: Vec<usize> = (0..len).map(|_| rng.gen_range(0..k)).collect();
                if grammar.label(&s) == target && seen.insert(s.clone()) {
                    extra.push((s, target));
                    got += 1;
                }
            }
        }
        extra.shuffle(&mut rng);
        ds.entries.extend(extra);
    }
    if let Some(len) = spec.legal_of_length {
        for s in enumerate_strings(&alphabet, len).filter(|s| s.len() == len && grammar.accepts(s))
        {
            ds.push(s, Label::Legal);
        }
    }
    Ok(ds)
}
