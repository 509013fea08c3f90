//! Feature encodings per domain architecture. The committee form encodes
//! (neighbors, query) and predicts a distribution over outputs; the
//! anticipation form additionally encodes a candidate output and scores the
//! pair directly.

use serde::{Deserialize, Serialize};

use crate::core::Example;
use crate::domains::drawing::WindowCell;
use crate::error::{Error, Result};
use crate::predictor::nn::LayerWiring;

/// Network architecture and its input layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum Arch {
    /// Whole-subset relation grid (n x n cells, one-hot over
    /// defined-true / defined-false / undefined) plus a two-hot query pair;
    /// no neighborhood factorization.
    OrderingFc { n: usize, hidden: Vec<usize> },
    /// k neighbor strings, each one-hot over a padded alphabet plus a label
    /// bit, run through an encoder layer; the query string joins at the
    /// head layer.
    DfaFf { k: usize, max_len: usize, encoder: usize, head: usize },
    /// Tri-state pixel window around the query pixel, one dense hidden
    /// layer the size of the window kernel's output channels.
    DrawConv { window: u8, hidden: usize, width: u8, height: u8 },
}

impl Arch {
    pub fn ordering_default(n: usize) -> Self {
        Arch::OrderingFc { n, hidden: vec![256, 256] }
    }

    pub fn dfa_default() -> Self {
        Arch::DfaFf { k: 10, max_len: 10, encoder: 128, head: 128 }
    }

    pub fn draw_default(width: u8, height: u8) -> Self {
        Arch::DrawConv { window: 7, hidden: 20, width, height }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Arch::OrderingFc { .. } => "ordering_fc",
            Arch::DfaFf { .. } => "dfa_ff",
            Arch::DrawConv { .. } => "draw_conv",
        }
    }

    /// Input dimension for the committee form.
    pub fn committee_input_dim(&self) -> usize {
        match self {
            Arch::OrderingFc { n, .. } => 3 * n * n + 2 * n,
            Arch::DfaFf { k, max_len, .. } => k * (3 * max_len + 1) + 3 * max_len,
            Arch::DrawConv { window, .. } => {
                let w = *window as usize;
                3 * w * w
            }
        }
    }

    /// The anticipation form appends the candidate output bit.
    pub fn anticipation_input_dim(&self) -> usize {
        self.committee_input_dim() + 1
    }

    /// Layer wiring for the committee form (2-way softmax head).
    pub fn committee_wirings(&self) -> Vec<LayerWiring> {
        self.wirings(0)
    }

    /// Layer wiring for the anticipation form (sigmoid head); the output
    /// bit rides along with the query block.
    pub fn anticipation_wirings(&self) -> Vec<LayerWiring> {
        self.wirings(1)
    }

    fn wirings(&self, extra_query: usize) -> Vec<LayerWiring> {
        let out_dim = if extra_query == 0 { 2 } else { 1 };
        match self {
            Arch::OrderingFc { n, hidden } => {
                let input = 3 * n * n + 2 * n + extra_query;
                let mut w = Vec::new();
                let mut first = true;
                for &h in hidden {
                    if first {
                        w.push(LayerWiring::with_raw(h, 0..input));
                        first = false;
                    } else {
                        w.push(LayerWiring::from_prev(h));
                    }
                }
                if first {
                    w.push(LayerWiring::with_raw(out_dim, 0..input));
                } else {
                    w.push(LayerWiring::from_prev(out_dim));
                }
                w
            }
            Arch::DfaFf { k, max_len, encoder, head } => {
                let neigh = k * (3 * max_len + 1);
                let query = 3 * max_len + extra_query;
                vec![
                    LayerWiring::with_raw(*encoder, 0..neigh),
                    LayerWiring::with_raw(*head, neigh..neigh + query),
                    LayerWiring::from_prev(out_dim),
                ]
            }
            Arch::DrawConv { window, hidden, .. } => {
                let w = *window as usize;
                let input = 3 * w * w + extra_query;
                vec![LayerWiring::with_raw(*hidden, 0..input), LayerWiring::from_prev(out_dim)]
            }
        }
    }

    /// Features for an ordering query given the selected subset. `y: Some`
    /// selects the anticipation layout.
    pub fn encode_ordering(
        &self,
        neighbors: &[Example<(u8, u8), bool>],
        query: &(u8, u8),
        y: Option<bool>,
    ) -> Result<Vec<f64>> {
        let Arch::OrderingFc { n, .. } = self else {
            return Err(Error::ShapeMismatch(format!("{} cannot encode orderings", self.id())));
        };
        let n = *n;
        let mut v = vec![0.0; 3 * n * n + 2 * n + y.is_some() as usize];
        // Undefined until an example says otherwise.
        for cell in 0..n * n {
            v[cell * 3 + 2] = 1.0;
        }
        // A pair example decides its mirrored cell as well: (i,j)->true
        // defines both "i before j" and "not (j before i)".
        let mut mark = |i: u8, j: u8, before: bool| {
            let cell = i as usize * n + j as usize;
            let class = if before { 0 } else { 1 };
            v[cell * 3 + 2] = 0.0;
            v[cell * 3] = 0.0;
            v[cell * 3 + 1] = 0.0;
            v[cell * 3 + class] = 1.0;
        };
        for e in neighbors {
            let (i, j) = e.input;
            mark(i, j, e.output);
            mark(j, i, !e.output);
        }
        let base = 3 * n * n;
        v[base + query.0 as usize] = 1.0;
        v[base + n + query.1 as usize] = 1.0;
        if let Some(out) = y {
            v[base + 2 * n] = if out { 1.0 } else { 0.0 };
        }
        Ok(v)
    }

    /// Features for a DFA query given its top-k neighbors.
    pub fn encode_dfa(
        &self,
        neighbors: &[Example<String, bool>],
        query: &str,
        y: Option<bool>,
    ) -> Result<Vec<f64>> {
        let Arch::DfaFf { k, max_len, .. } = self else {
            return Err(Error::ShapeMismatch(format!("{} cannot encode strings", self.id())));
        };
        let (k, max_len) = (*k, *max_len);
        if neighbors.len() > k {
            return Err(Error::ShapeMismatch(format!("{} neighbors exceed k={k}", neighbors.len())));
        }
        let slot = 3 * max_len + 1;
        let mut v = vec![0.0; k * slot + 3 * max_len + y.is_some() as usize];
        for (si, e) in neighbors.iter().enumerate() {
            let off = si * slot;
            encode_string(&mut v[off..off + 3 * max_len], &e.input, max_len)?;
            v[off + 3 * max_len] = if e.output { 1.0 } else { 0.0 };
        }
        let qoff = k * slot;
        encode_string(&mut v[qoff..qoff + 3 * max_len], query, max_len)?;
        if let Some(out) = y {
            v[qoff + 3 * max_len] = if out { 1.0 } else { 0.0 };
        }
        Ok(v)
    }

    /// Features for a pixel query given its sampled window.
    pub fn encode_draw(&self, window: &[WindowCell], y: Option<bool>) -> Result<Vec<f64>> {
        let Arch::DrawConv { window: w, .. } = self else {
            return Err(Error::ShapeMismatch(format!("{} cannot encode windows", self.id())));
        };
        let cells = *w as usize * *w as usize;
        if window.len() != cells {
            return Err(Error::ShapeMismatch(format!(
                "window has {} cells, expected {cells}",
                window.len()
            )));
        }
        let mut v = vec![0.0; 3 * cells + y.is_some() as usize];
        for (i, cell) in window.iter().enumerate() {
            let class = match cell {
                WindowCell::White => 0,
                WindowCell::Black => 1,
                WindowCell::Unsampled => 2,
            };
            v[i * 3 + class] = 1.0;
        }
        if let Some(out) = y {
            v[3 * cells] = if out { 1.0 } else { 0.0 };
        }
        Ok(v)
    }
}

/// One-hot per position over {0, 1, padding}, padded to max_len.
fn encode_string(buf: &mut [f64], s: &str, max_len: usize) -> Result<()> {
    if s.len() > max_len {
        return Err(Error::ShapeMismatch(format!(
            "string of length {} exceeds encoder max {max_len}",
            s.len()
        )));
    }
    for (p, slot) in buf.chunks_mut(3).enumerate() {
        let class = match s.as_bytes().get(p) {
            Some(b'0') => 0,
            Some(b'1') => 1,
            Some(_) => return Err(Error::InvalidInput(format!("not a binary string: {s:?}"))),
            None => 2,
        };
        slot[class] = 1.0;
    }
    Ok(())
}
