//! Plain-text model container. Doubles are written with 17 significant
//! digits, which round-trips every finite value exactly.

use std::fmt::Write as _;

use crate::alphabet::{Alphabet, NetworkShape};
use crate::error::{parse_err, Error, Result};

use super::{ActionActivation, Order, WeightSet};

const MAGIC: &str = "nnpda-model 1";

fn write_values(out: &mut String, name: &str, dims: &[usize], values: &[f64]) {
    let dims_s: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "tensor {name} {}", dims_s.join(" "));
    let row = *dims.last().unwrap_or(&1);
    for chunk in values.chunks(row.max(1)) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

impl WeightSet {
    fn tensor_dims(&self) -> Vec<(&'static str, Vec<usize>)> {
        let (ns, nr, ni) = (self.shape.n_state, self.shape.n_read, self.shape.n_input);
        let mut v = vec![];
        match self.order {
            Order::Second => {
                v.push(("w_state", vec![ns, ns, nr + ni]));
                v.push(("theta_s", vec![ns]));
                v.push(("w_action", vec![ns, nr + ni]));
            }
            Order::Third => {
                v.push(("w_state", vec![ns, ns, nr, ni]));
                v.push(("theta_s", vec![ns]));
                v.push(("w_action", vec![ns, nr, ni]));
            }
            Order::FullOrderAction => {
                v.push(("w_state", vec![ns, ns, nr, ni]));
                v.push(("theta_s", vec![ns]));
                v.push(("w_action", vec![1 << ns, nr, ni]));
            }
        }
        if self.layout.theta_a.is_some() {
            v.push(("theta_a", vec![1]));
        }
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "order {}", self.order.name());
        let _ = writeln!(out, "action {}", self.action_activation.name());
        let _ = writeln!(
            out,
            "shape {} {} {}",
            self.shape.n_state, self.shape.n_input, self.shape.n_read
        );
        if let Some(a) = &self.alphabet {
            let _ = writeln!(out, "alphabet {}", a.symbols().join(" "));
            if let Some(e) = a.end_symbol() {
                let _ = writeln!(out, "end {}", a.symbol(e));
            }
        }
        let init: Vec<String> = self
            .initial_state
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect();
        let _ = writeln!(out, "initial {}", init.join(" "));
        let mut offset = 0;
        for (name, dims) in self.tensor_dims() {
            let len: usize = dims.iter().product();
            write_values(&mut out, name, &dims, &self.params[offset..offset + len]);
            offset += len;
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, MAGIC)) => {}
            Some((n, other)) => {
                return Err(parse_err(n, format!("expected `{MAGIC}`, found `{other}`")))
            }
            None => return Err(parse_err(0, "empty model file")),
        }
        let mut order = None;
        let mut activation = None;
        let mut shape = None;
        let mut symbols: Option<Vec<String>> = None;
        let mut end: Option<String> = None;
        let mut initial = None;
        let mut tensors: Vec<(usize, String, Vec<usize>, Vec<f64>)> = Vec::new();

        for (n, line) in lines {
            let mut words = line.split_whitespace();
            let key = words.next().unwrap_or_default();
            let rest: Vec<&str> = words.collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(n, format!("bad number `{s}`")))
            };
            let int = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(n, format!("bad integer `{s}`")))
            };
            match key {
                "order" => order = Some(Order::from_name(rest.first().copied().unwrap_or(""))?),
                "action" => {
                    activation = Some(ActionActivation::from_name(
                        rest.first().copied().unwrap_or(""),
                    )?)
                }
                "shape" => {
                    if rest.len() != 3 {
                        return Err(parse_err(n, "shape needs n_state n_input n_read"));
                    }
                    let (ns, ni, nr) = (int(rest[0])?, int(rest[1])?, int(rest[2])?);
                    shape = Some(NetworkShape {
                        n_state: ns,
                        n_input: ni,
                        n_read: nr,
                        n_action: 1,
                    });
                }
                "alphabet" => symbols = Some(rest.iter().map(|s| s.to_string()).collect()),
                "end" => end = rest.first().map(|s| s.to_string()),
                "initial" => {
                    initial = Some(rest.iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?)
                }
                "tensor" => {
                    let name = rest
                        .first()
                        .ok_or_else(|| parse_err(n, "tensor without name"))?;
                    let dims = rest[1..]
                        .iter()
                        .map(|s| int(s))
                        .collect::<Result<Vec<_>>>()?;
                    tensors.push((n, name.to_string(), dims, Vec::new()));
                }
                _ => {
                    let t = tensors
                        .last_mut()
                        .ok_or_else(|| parse_err(n, format!("unexpected `{key}`")))?;
                    for s in line.split_whitespace() {
                        t.3.push(num(s)?);
                    }
                }
            }
        }

        let order = order.ok_or_else(|| parse_err(0, "missing `order`"))?;
        let activation = activation.ok_or_else(|| parse_err(0, "missing `action`"))?;
        let shape = shape.ok_or_else(|| parse_err(0, "missing `shape`"))?;
        let mut w = WeightSet::zeros(order, activation, shape)?;
        if let Some(symbols) = symbols {
            w.set_alphabet(Alphabet::new(&symbols, end.as_deref())?)?;
        }
        if let Some(init) = initial {
            w.set_initial_state(init)?;
        }
        let expected = w.tensor_dims();
        if expected.len() != tensors.len() {
            return Err(Error::Dimension(format!(
                "expected {} tensors, found {}",
                expected.len(),
                tensors.len()
            )));
        }
        let mut offset = 0;
        for ((name, dims), (line, got_name, got_dims, values)) in expected.into_iter().zip(tensors)
        {
            if name != got_name || dims != got_dims {
                return Err(parse_err(
                    line,
                    format!("expected tensor {name} {dims:?}, found {got_name} {got_dims:?}"),
                ));
            }
            let len: usize = dims.iter().product();
            if values.len() != len {
                return Err(parse_err(
                    line,
                    format!("tensor {name} has {} values, expected {len}", values.len()),
                ));
            }
            w.params[offset..offset + len].copy_from_slice(&values);
            offset += len;
        }
        w.check_finite()?;
        Ok(w)
    }
}
