//! Plain-text gate-set description.
//!
//! ```text
//! # comment
//! connectivity all            # or: chain | edges 0-1 1-2
//! library CNOT CZ HI          # built-in names
//! gate MYGATE                 # followed by 16 lines "re im", row-major
//! channel DEPOL 2             # followed by 2 × 16 lines, one Kraus operator after another
//! ```

use super::apply::Mat4;
use super::library::named_gate;
use super::{Connectivity, Gate, GateSet, Operation};
use crate::error::{Error, Result};
use num_complex::Complex64;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_gate_set(text: &str) -> Result<GateSet> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut connectivity = Connectivity::AllToAll;
    let mut gates = Vec::new();
    let mut i = 0;
    let read_mat = |start: usize, lines: &[(usize, &str)]| -> Result<Mat4> {
        let mut m = [Complex64::new(0.0, 0.0); 16];
        for (k, slot) in m.iter_mut().enumerate() {
            let (ln, l) = *lines.get(start + k).ok_or_else(|| perr(0, "truncated matrix"))?;
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(perr(ln, "expected `re im`"));
            }
            let re: f64 = parts[0].parse().map_err(|_| perr(ln, "bad real part"))?;
            let im: f64 = parts[1].parse().map_err(|_| perr(ln, "bad imaginary part"))?;
            *slot = Complex64::new(re, im);
        }
        Ok(m)
    };
    while i < lines.len() {
        let (ln, l) = lines[i];
        let words: Vec<&str> = l.split_whitespace().collect();
        match words[0] {
            "connectivity" => {
                connectivity = match words.get(1).copied() {
                    Some("all") => Connectivity::AllToAll,
                    Some("chain") => Connectivity::Chain,
                    Some("edges") => {
                        let mut e = Vec::new();
                        for w in &words[2..] {
                            for pair in w.split(',').filter(|p| !p.is_empty()) {
                                let (a, b) = pair.split_once('-').ok_or_else(|| perr(ln, "edge must be a-b"))?;
                                let a = a.parse().map_err(|_| perr(ln, "bad edge"))?;
                                let b = b.parse().map_err(|_| perr(ln, "bad edge"))?;
                                e.push((a, b));
                            }
                        }
                        Connectivity::Edges(e)
                    }
                    _ => return Err(perr(ln, "connectivity must be all, chain or edges")),
                };
                i += 1;
            }
            "library" => {
                for name in &words[1..] {
                    let m = named_gate(name).ok_or_else(|| perr(ln, format!("unknown library gate {name}")))?;
                    gates.push(Gate::unitary(name, m));
                }
                i += 1;
            }
            "gate" => {
                let name = words.get(1).ok_or_else(|| perr(ln, "gate needs a name"))?;
                let m = read_mat(i + 1, &lines)?;
                gates.push(Gate::unitary(name, m));
                i += 17;
            }
            "channel" => {
                let name = words.get(1).ok_or_else(|| perr(ln, "channel needs a name"))?;
                let k: usize = words
                    .get(2)
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| perr(ln, "channel needs a Kraus count"))?;
                let mut ks = Vec::with_capacity(k);
                for j in 0..k {
                    ks.push(read_mat(i + 1 + 16 * j, &lines)?);
                }
                gates.push(Gate::new(name, Operation::Channel(ks)));
                i += 1 + 16 * k;
            }
            other => return Err(perr(ln, format!("unknown directive `{other}`"))),
        }
    }
    if gates.is_empty() {
        return Err(perr(0, "gate set declares no gates"));
    }
    GateSet::finite(gates, connectivity)
}
