//! Drawing programs: one loop over an optional square outline and an
//! optional line, each with per-iteration offsets and an optional `i % m == r`
//! guard. A program maps a (row, col) pixel to whether any shape paints it.

use std::borrow::Cow;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::core::{Constraint, DomainId, Example, Polarity, ProgramSpace, SearchOutcome};
use crate::error::{Error, Result};

/// Ranges of the drawing grammar. All bounds are inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarConfig {
    pub loop_counts: (u8, u8),
    pub offsets: (u8, u8),
    pub square_sizes: (u8, u8),
    pub line_lengths: (u8, u8),
    /// Guard moduli; each modulus m contributes guards `i % m == r` for
    /// every remainder r < m, besides the always-on no-guard option.
    pub guard_mods: Vec<u8>,
}

impl GrammarConfig {
    /// Around 10^6 programs on an 8x8 grid; small enough to enumerate, so
    /// the count oracle applies.
    pub fn small() -> Self {
        GrammarConfig {
            loop_counts: (1, 2),
            offsets: (0, 1),
            square_sizes: (2, 3),
            line_lengths: (1, 4),
            guard_mods: vec![],
        }
    }

    /// The 16x16 experiment grammar. Too large to count, searched with
    /// shape-level pruning.
    pub fn desk() -> Self {
        GrammarConfig {
            loop_counts: (1, 4),
            offsets: (0, 2),
            square_sizes: (2, 5),
            line_lengths: (1, 8),
            guard_mods: vec![2],
        }
    }

    /// Wider ranges for 32x32 runs.
    pub fn paper() -> Self {
        GrammarConfig {
            loop_counts: (1, 4),
            offsets: (0, 4),
            square_sizes: (2, 9),
            line_lengths: (1, 8),
            guard_mods: vec![2, 3],
        }
    }
}

impl Default for GrammarConfig {
    fn default() -> Self {
        GrammarConfig::desk()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guard {
    pub modulus: u8,
    pub remainder: u8,
}

impl Guard {
    fn passes(&self, i: u8) -> bool {
        i % self.modulus == self.remainder
    }
}

fn guard_passes(guard: &Option<Guard>, i: u8) -> bool {
    guard.map_or(true, |g| g.passes(i))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareSpec {
    pub row: u8,
    pub col: u8,
    pub d_row: u8,
    pub d_col: u8,
    pub size: u8,
    pub guard: Option<Guard>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineDir {
    Horizontal,
    Vertical,
    Diagonal,
}

const LINE_DIRS: [LineDir; 3] = [LineDir::Horizontal, LineDir::Vertical, LineDir::Diagonal];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSpec {
    pub row: u8,
    pub col: u8,
    pub d_row: u8,
    pub d_col: u8,
    pub dir: LineDir,
    pub len: u8,
    pub guard: Option<Guard>,
}

/// A full drawing program: loop count plus the optional shapes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawProgram {
    pub iters: u8,
    pub square: Option<SquareSpec>,
    pub line: Option<LineSpec>,
}

pub type DrawExample = Example<(u8, u8), bool>;

/// A width x height boolean pixel grid, bit-packed. Serializes as rows of
/// 0/1 values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    width: u8,
    height: u8,
    words: Vec<u64>,
}

impl Grid {
    pub fn new(width: u8, height: u8) -> Self {
        let bits = width as usize * height as usize;
        Grid { width, height, words: vec![0; bits.div_ceil(64)] }
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn height(&self) -> u8 {
        self.height
    }

    fn bit(&self, r: u8, c: u8) -> (usize, u64) {
        let idx = r as usize * self.width as usize + c as usize;
        (idx / 64, 1u64 << (idx % 64))
    }

    pub fn get(&self, r: u8, c: u8) -> bool {
        let (w, m) = self.bit(r, c);
        self.words[w] & m != 0
    }

    pub fn set(&mut self, r: u8, c: u8, v: bool) {
        let (w, m) = self.bit(r, c);
        if v {
            self.words[w] |= m;
        } else {
            self.words[w] &= !m;
        }
    }

    pub fn white_count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.height)
            .map(|r| (0..self.width).map(|c| self.get(r, c) as u8).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        if height == 0 || width == 0 || height > 255 || width > 255 {
            return Err(Error::InvalidInput("bad grid dimensions".into()));
        }
        let mut grid = Grid::new(width as u8, height as u8);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidInput("ragged grid rows".into()));
            }
            for (c, &v) in row.iter().enumerate() {
                grid.set(r as u8, c as u8, v != 0);
            }
        }
        Ok(grid)
    }

    fn intersects(&self, other: &Grid) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    fn union_covers(&self, with: &Grid, target: &Grid) -> bool {
        target
            .words
            .iter()
            .zip(self.words.iter().zip(&with.words))
            .all(|(t, (a, b))| t & !(a | b) == 0)
    }

    /// Lowest set bit not covered by `painted`, as a pixel index.
    fn first_uncovered(&self, painted: &Grid) -> Option<usize> {
        for (i, (t, p)) in self.words.iter().zip(&painted.words).enumerate() {
            let rem = t & !p;
            if rem != 0 {
                return Some(i * 64 + rem.trailing_zeros() as usize);
            }
        }
        None
    }
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(deserializer)?;
        Grid::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Per-loop-count painted masks for every shape spec, plus for each pixel
/// the lines that paint it. Built when the grammar is small enough; the
/// pruned search falls back to on-the-fly painting otherwise.
struct ShapeTables {
    sq_masks: Vec<Vec<Grid>>,
    ln_masks: Vec<Vec<Grid>>,
    ln_cover: Vec<Vec<Vec<u32>>>,
}

const TABLE_LIMIT: usize = 1 << 21;

pub struct DrawingSpace {
    width: u8,
    height: u8,
    grammar: GrammarConfig,
    sq_specs: Vec<SquareSpec>,
    ln_specs: Vec<LineSpec>,
    tables: Option<ShapeTables>,
}

impl std::fmt::Debug for DrawingSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DrawingSpace")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("grammar", &self.grammar)
            .finish()
    }
}

impl DrawingSpace {
    pub fn new(width: u8, height: u8, grammar: GrammarConfig) -> Result<Self> {
        if width == 0 || height == 0 || width > 64 || height > 64 {
            return Err(Error::InvalidParams(format!("grid {width}x{height} outside 1..=64")));
        }
        let (lo, hi) = grammar.loop_counts;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidParams("bad loop count range".into()));
        }
        let mut guards: Vec<Option<Guard>> = vec![None];
        for &m in &grammar.guard_mods {
            if m < 2 {
                return Err(Error::InvalidParams("guard modulus must be >= 2".into()));
            }
            for r in 0..m {
                guards.push(Some(Guard { modulus: m, remainder: r }));
            }
        }

        let mut sq_specs = Vec::new();
        for row in 0..height {
            for col in 0..width {
                for d_row in grammar.offsets.0..=grammar.offsets.1 {
                    for d_col in grammar.offsets.0..=grammar.offsets.1 {
                        for size in grammar.square_sizes.0..=grammar.square_sizes.1 {
                            for guard in &guards {
                                sq_specs.push(SquareSpec {
                                    row,
                                    col,
                                    d_row,
                                    d_col,
                                    size,
                                    guard: *guard,
                                });
                            }
                        }
                    }
                }
            }
        }
        let mut ln_specs = Vec::new();
        for row in 0..height {
            for col in 0..width {
                for d_row in grammar.offsets.0..=grammar.offsets.1 {
                    for d_col in grammar.offsets.0..=grammar.offsets.1 {
                        for dir in LINE_DIRS {
                            for len in grammar.line_lengths.0..=grammar.line_lengths.1 {
                                for guard in &guards {
                                    ln_specs.push(LineSpec {
                                        row,
                                        col,
                                        d_row,
                                        d_col,
                                        dir,
                                        len,
                                        guard: *guard,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }

        let mut space = DrawingSpace {
            width,
            height,
            grammar,
            sq_specs,
            ln_specs,
            tables: None,
        };
        let n_variants = (hi - lo + 1) as usize;
        if n_variants * (space.sq_specs.len() + space.ln_specs.len()) <= TABLE_LIMIT {
            space.tables = Some(space.build_tables());
        }
        Ok(space)
    }

    fn build_tables(&self) -> ShapeTables {
        let (lo, hi) = self.grammar.loop_counts;
        let pixels = self.width as usize * self.height as usize;
        let mut sq_masks = Vec::new();
        let mut ln_masks = Vec::new();
        let mut ln_cover = Vec::new();
        for iters in lo..=hi {
            let sq: Vec<Grid> = self.sq_specs.iter().map(|s| self.square_mask(s, iters)).collect();
            let ln: Vec<Grid> = self.ln_specs.iter().map(|s| self.line_mask(s, iters)).collect();
            let mut cover: Vec<Vec<u32>> = vec![Vec::new(); pixels];
            for (i, mask) in ln.iter().enumerate() {
                for p in 0..pixels {
                    if mask.words[p / 64] & (1u64 << (p % 64)) != 0 {
                        cover[p].push(i as u32);
                    }
                }
            }
            sq_masks.push(sq);
            ln_masks.push(ln);
            ln_cover.push(cover);
        }
        ShapeTables { sq_masks, ln_masks, ln_cover }
    }

    pub fn grammar(&self) -> &GrammarConfig {
        &self.grammar
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn height(&self) -> u8 {
        self.height
    }

    fn loop_variants(&self) -> u128 {
        (self.grammar.loop_counts.1 - self.grammar.loop_counts.0 + 1) as u128
    }

    fn in_grid(&self, r: i32, c: i32) -> bool {
        r >= 0 && c >= 0 && r < self.height as i32 && c < self.width as i32
    }

    fn square_mask(&self, spec: &SquareSpec, iters: u8) -> Grid {
        let mut g = Grid::new(self.width, self.height);
        for i in 0..iters {
            if !guard_passes(&spec.guard, i) {
                continue;
            }
            let br = spec.row as i32 + i as i32 * spec.d_row as i32;
            let bc = spec.col as i32 + i as i32 * spec.d_col as i32;
            let k = spec.size as i32;
            for r in br..br + k {
                for c in bc..bc + k {
                    let edge = r == br || r == br + k - 1 || c == bc || c == bc + k - 1;
                    if edge && self.in_grid(r, c) {
                        g.set(r as u8, c as u8, true);
                    }
                }
            }
        }
        g
    }

    fn line_mask(&self, spec: &LineSpec, iters: u8) -> Grid {
        let mut g = Grid::new(self.width, self.height);
        for i in 0..iters {
            if !guard_passes(&spec.guard, i) {
                continue;
            }
            let br = spec.row as i32 + i as i32 * spec.d_row as i32;
            let bc = spec.col as i32 + i as i32 * spec.d_col as i32;
            for t in 0..spec.len as i32 {
                let (r, c) = match spec.dir {
                    LineDir::Horizontal => (br, bc + t),
                    LineDir::Vertical => (br + t, bc),
                    LineDir::Diagonal => (br + t, bc + t),
                };
                if self.in_grid(r, c) {
                    g.set(r as u8, c as u8, true);
                }
            }
        }
        g
    }

    fn square_contains(&self, spec: &SquareSpec, iters: u8, r: i32, c: i32) -> bool {
        (0..iters).any(|i| {
            if !guard_passes(&spec.guard, i) {
                return false;
            }
            let br = spec.row as i32 + i as i32 * spec.d_row as i32;
            let bc = spec.col as i32 + i as i32 * spec.d_col as i32;
            let k = spec.size as i32;
            r >= br
                && r < br + k
                && c >= bc
                && c < bc + k
                && (r == br || r == br + k - 1 || c == bc || c == bc + k - 1)
        })
    }

    fn line_contains(&self, spec: &LineSpec, iters: u8, r: i32, c: i32) -> bool {
        (0..iters).any(|i| {
            if !guard_passes(&spec.guard, i) {
                return false;
            }
            let br = spec.row as i32 + i as i32 * spec.d_row as i32;
            let bc = spec.col as i32 + i as i32 * spec.d_col as i32;
            match spec.dir {
                LineDir::Horizontal => r == br && c >= bc && c < bc + spec.len as i32,
                LineDir::Vertical => c == bc && r >= br && r < br + spec.len as i32,
                LineDir::Diagonal => {
                    r - br == c - bc && r >= br && r < br + spec.len as i32
                }
            }
        })
    }

    /// Renders the full pixel grid of a program.
    pub fn render(&self, s: &DrawProgram) -> Grid {
        let mut g = Grid::new(self.width, self.height);
        if let Some(sq) = &s.square {
            let m = self.square_mask(sq, s.iters);
            for (w, mw) in g.words.iter_mut().zip(&m.words) {
                *w |= mw;
            }
        }
        if let Some(ln) = &s.line {
            let m = self.line_mask(ln, s.iters);
            for (w, mw) in g.words.iter_mut().zip(&m.words) {
                *w |= mw;
            }
        }
        g
    }

    /// Lowers pixel constraints to (must-paint, must-not-paint) masks.
    /// Returns None when a pixel is constrained both ways.
    fn lower(&self, constraints: &[Constraint<(u8, u8), bool>]) -> Option<(Grid, Grid)> {
        let mut white = Grid::new(self.width, self.height);
        let mut black = Grid::new(self.width, self.height);
        for c in constraints {
            let (r, col) = c.example.input;
            let painted = match c.polarity {
                Polarity::Positive => c.example.output,
                Polarity::Negated => !c.example.output,
            };
            let other = if painted { black.get(r, col) } else { white.get(r, col) };
            if other {
                return None;
            }
            if painted {
                white.set(r, col, true);
            } else {
                black.set(r, col, true);
            }
        }
        Some((white, black))
    }

    /// Shape-by-shape pruned search in enumeration order. Squares that paint
    /// a must-not-paint pixel are discarded outright; line candidates are
    /// restricted to those covering the first still-unpainted required pixel.
    fn search(
        &self,
        constraints: &[Constraint<(u8, u8), bool>],
        mode: DrawSearchMode,
        budget: u64,
    ) -> Result<(u64, Option<DrawProgram>, u64)> {
        let Some((white, black)) = self.lower(constraints) else {
            return Ok((0, None, 0));
        };
        let (lo, hi) = self.grammar.loop_counts;
        let empty = Grid::new(self.width, self.height);
        let mut nodes = 0u64;
        let mut total = 0u64;

        for iters in lo..=hi {
            let n_idx = (iters - lo) as usize;
            for sq_ord in 0..=self.sq_specs.len() {
                nodes += 1;
                if nodes > budget {
                    return Err(Error::BudgetExhausted { nodes });
                }
                let sq_mask: Cow<'_, Grid> = match sq_ord {
                    0 => Cow::Borrowed(&empty),
                    i => self.sq_mask_at(n_idx, i - 1, iters),
                };
                if sq_mask.intersects(&black) {
                    continue;
                }
                let first_missing = white.first_uncovered(&sq_mask);

                match first_missing {
                    Some(pixel) => {
                        // Any consistent line must paint this pixel.
                        for ln_idx in self.lines_covering(n_idx, pixel, iters) {
                            nodes += 1;
                            if nodes > budget {
                                return Err(Error::BudgetExhausted { nodes });
                            }
                            let ln_mask = self.ln_mask_at(n_idx, ln_idx, iters);
                            if ln_mask.intersects(&black)
                                || !sq_mask.union_covers(&ln_mask, &white)
                            {
                                continue;
                            }
                            match mode {
                                DrawSearchMode::Count => total += 1,
                                DrawSearchMode::First => {
                                    let program = DrawProgram {
                                        iters,
                                        square: (sq_ord > 0)
                                            .then(|| self.sq_specs[sq_ord - 1]),
                                        line: Some(self.ln_specs[ln_idx]),
                                    };
                                    return Ok((1, Some(program), nodes));
                                }
                            }
                        }
                    }
                    None => {
                        // Whites already covered: any line avoiding the
                        // must-not-paint pixels works, including no line.
                        for ln_ord in 0..=self.ln_specs.len() {
                            nodes += 1;
                            if nodes > budget {
                                return Err(Error::BudgetExhausted { nodes });
                            }
                            let ok = ln_ord == 0
                                || !self.ln_mask_at(n_idx, ln_ord - 1, iters).intersects(&black);
                            if !ok {
                                continue;
                            }
                            match mode {
                                DrawSearchMode::Count => total += 1,
                                DrawSearchMode::First => {
                                    let program = DrawProgram {
                                        iters,
                                        square: (sq_ord > 0)
                                            .then(|| self.sq_specs[sq_ord - 1]),
                                        line: (ln_ord > 0).then(|| self.ln_specs[ln_ord - 1]),
                                    };
                                    return Ok((1, Some(program), nodes));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok((total, None, nodes))
    }

    fn sq_mask_at(&self, n_idx: usize, spec_idx: usize, iters: u8) -> Cow<'_, Grid> {
        match &self.tables {
            Some(t) => Cow::Borrowed(&t.sq_masks[n_idx][spec_idx]),
            None => Cow::Owned(self.square_mask(&self.sq_specs[spec_idx], iters)),
        }
    }

    fn ln_mask_at(&self, n_idx: usize, spec_idx: usize, iters: u8) -> Cow<'_, Grid> {
        match &self.tables {
            Some(t) => Cow::Borrowed(&t.ln_masks[n_idx][spec_idx]),
            None => Cow::Owned(self.line_mask(&self.ln_specs[spec_idx], iters)),
        }
    }

    fn lines_covering(&self, n_idx: usize, pixel: usize, iters: u8) -> Vec<usize> {
        match &self.tables {
            Some(t) => t.ln_cover[n_idx][pixel].iter().map(|&i| i as usize).collect(),
            None => {
                let r = (pixel / self.width as usize) as i32;
                let c = (pixel % self.width as usize) as i32;
                (0..self.ln_specs.len())
                    .filter(|&i| self.line_contains(&self.ln_specs[i], iters, r, c))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum DrawSearchMode {
    Count,
    First,
}

impl ProgramSpace for DrawingSpace {
    type Params = DrawProgram;
    type Input = (u8, u8);
    type Output = bool;

    fn domain_id(&self) -> DomainId {
        DomainId::Drawing
    }

    fn space_size(&self) -> u128 {
        self.loop_variants()
            * (1 + self.sq_specs.len() as u128)
            * (1 + self.ln_specs.len() as u128)
    }

    fn params_from_ordinal(&self, ordinal: u128) -> DrawProgram {
        let sq_radix = 1 + self.sq_specs.len() as u128;
        let ln_radix = 1 + self.ln_specs.len() as u128;
        let ln_ord = (ordinal % ln_radix) as usize;
        let rest = ordinal / ln_radix;
        let sq_ord = (rest % sq_radix) as usize;
        let n_idx = (rest / sq_radix) as u8;
        DrawProgram {
            iters: self.grammar.loop_counts.0 + n_idx,
            square: (sq_ord > 0).then(|| self.sq_specs[sq_ord - 1]),
            line: (ln_ord > 0).then(|| self.ln_specs[ln_ord - 1]),
        }
    }

    fn validate_params(&self, s: &DrawProgram) -> Result<()> {
        let (lo, hi) = self.grammar.loop_counts;
        if s.iters < lo || s.iters > hi {
            return Err(Error::InvalidParams(format!("loop count {} outside range", s.iters)));
        }
        let g = &self.grammar;
        let off_ok = |d: u8| d >= g.offsets.0 && d <= g.offsets.1;
        let guard_ok = |guard: &Option<Guard>| match guard {
            None => true,
            Some(gd) => {
                g.guard_mods.contains(&gd.modulus) && gd.remainder < gd.modulus
            }
        };
        if let Some(sq) = &s.square {
            if sq.row >= self.height
                || sq.col >= self.width
                || !off_ok(sq.d_row)
                || !off_ok(sq.d_col)
                || sq.size < g.square_sizes.0
                || sq.size > g.square_sizes.1
                || !guard_ok(&sq.guard)
            {
                return Err(Error::InvalidParams(format!("square spec out of range: {sq:?}")));
            }
        }
        if let Some(ln) = &s.line {
            if ln.row >= self.height
                || ln.col >= self.width
                || !off_ok(ln.d_row)
                || !off_ok(ln.d_col)
                || ln.len < g.line_lengths.0
                || ln.len > g.line_lengths.1
                || !guard_ok(&ln.guard)
            {
                return Err(Error::InvalidParams(format!("line spec out of range: {ln:?}")));
            }
        }
        Ok(())
    }

    fn validate_input(&self, x: &(u8, u8)) -> Result<()> {
        if x.0 >= self.height || x.1 >= self.width {
            return Err(Error::OutOfBounds(format!(
                "pixel {x:?} outside {}x{}",
                self.height, self.width
            )));
        }
        Ok(())
    }

    fn evaluate(&self, s: &DrawProgram, x: &(u8, u8)) -> bool {
        let (r, c) = (x.0 as i32, x.1 as i32);
        s.square
            .as_ref()
            .is_some_and(|sq| self.square_contains(sq, s.iters, r, c))
            || s.line.as_ref().is_some_and(|ln| self.line_contains(ln, s.iters, r, c))
    }

    fn outputs(&self) -> Vec<bool> {
        vec![false, true]
    }

    fn count_constrained(&self, constraints: &[Constraint<(u8, u8), bool>]) -> u64 {
        let (count, _, _) = self
            .search(constraints, DrawSearchMode::Count, u64::MAX)
            .expect("unbounded budget");
        count
    }

    fn synthesize_constrained(
        &self,
        constraints: &[Constraint<(u8, u8), bool>],
        budget: u64,
    ) -> Result<SearchOutcome<DrawProgram>> {
        let (_, program, nodes) = self.search(constraints, DrawSearchMode::First, budget)?;
        Ok(SearchOutcome { program, nodes })
    }

    fn canonical_rank(&self, x: &(u8, u8)) -> Option<u64> {
        Some(x.0 as u64 * self.width as u64 + x.1 as u64)
    }
}

/// One cell of a sampled-pixel window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowCell {
    White,
    Black,
    Unsampled,
}

/// The window x window tri-state neighborhood of `x` over a partial grid of
/// sampled pixels, row-major. Off-grid positions read as unsampled.
pub fn nb_draw(
    sampled: &[DrawExample],
    width: u8,
    height: u8,
    x: &(u8, u8),
    window: u8,
) -> Result<Vec<WindowCell>> {
    if x.0 >= height || x.1 >= width {
        return Err(Error::OutOfBounds(format!("pixel {x:?} outside {height}x{width}")));
    }
    let lookup: HashMap<(u8, u8), bool> =
        sampled.iter().map(|e| (e.input, e.output)).collect();
    let half = window as i32 / 2;
    let mut cells = Vec::with_capacity(window as usize * window as usize);
    for dr in -half..=half {
        for dc in -half..=half {
            let r = x.0 as i32 + dr;
            let c = x.1 as i32 + dc;
            if r < 0 || c < 0 || r >= height as i32 || c >= width as i32 {
                cells.push(WindowCell::Unsampled);
                continue;
            }
            cells.push(match lookup.get(&(r as u8, c as u8)) {
                Some(true) => WindowCell::White,
                Some(false) => WindowCell::Black,
                None => WindowCell::Unsampled,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{consistent, count, Dataset};

    fn small_space() -> DrawingSpace {
        DrawingSpace::new(8, 8, GrammarConfig::small()).unwrap()
    }

    fn pos(r: u8, c: u8, out: bool) -> Constraint<(u8, u8), bool> {
        Constraint::positive(Example::new((r, c), out))
    }

    #[test]
    fn zero_shape_program_renders_black() {
        let space = small_space();
        let s = DrawProgram { iters: 1, square: None, line: None };
        assert!(!space.evaluate(&s, &(3, 4)));
        assert_eq!(space.render(&s).white_count(), 0);
    }

    #[test]
    fn square_outline_pixels() {
        let space = small_space();
        let s = DrawProgram {
            iters: 1,
            square: Some(SquareSpec { row: 2, col: 2, d_row: 0, d_col: 0, size: 3, guard: None }),
            line: None,
        };
        let grid = space.render(&s);
        assert_eq!(grid.white_count(), 8);
        let expected = [(2, 2), (2, 3), (2, 4), (3, 2), (3, 4), (4, 2), (4, 3), (4, 4)];
        for (r, c) in expected {
            assert!(grid.get(r, c), "({r},{c}) should be painted");
        }
        assert!(!grid.get(3, 3), "outline leaves the center unpainted");
    }

    #[test]
    fn white_count_bounded_by_grid() {
        let space = small_space();
        for ord in [0u128, 7, 1999, 31337] {
            let s = space.params_from_ordinal(ord % space.space_size());
            assert!(space.render(&s).white_count() <= 64);
        }
    }

    #[test]
    fn render_agrees_with_evaluate() {
        use rand::{Rng, SeedableRng};
        let space = small_space();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let ord = rng.gen_range(0..space.space_size());
            let s = space.params_from_ordinal(ord);
            let grid = space.render(&s);
            for r in 0..8 {
                for c in 0..8 {
                    assert_eq!(grid.get(r, c), space.evaluate(&s, &(r, c)), "{s:?} at ({r},{c})");
                }
            }
        }
    }

    #[test]
    fn ordinal_round_trip_is_unique() {
        let space = small_space();
        let a = space.params_from_ordinal(0);
        assert_eq!(a, DrawProgram { iters: 1, square: None, line: None });
        // Distinct ordinals decode to distinct programs at the boundaries of
        // each radix block.
        let sq_block = 1 + space.sq_specs.len() as u128;
        let ln_block = 1 + space.ln_specs.len() as u128;
        let probes = [1u128, ln_block - 1, ln_block, ln_block * sq_block - 1, ln_block * sq_block];
        let decoded: Vec<DrawProgram> =
            probes.iter().map(|&o| space.params_from_ordinal(o)).collect();
        for i in 0..decoded.len() {
            for j in i + 1..decoded.len() {
                assert_ne!(decoded[i], decoded[j]);
            }
        }
    }

    #[test]
    fn count_agrees_with_enumeration_on_tiny_grammar() {
        // A deliberately tiny grammar so the full scan stays cheap.
        let grammar = GrammarConfig {
            loop_counts: (1, 2),
            offsets: (0, 1),
            square_sizes: (2, 2),
            line_lengths: (1, 2),
            guard_mods: vec![],
        };
        let space = DrawingSpace::new(4, 4, grammar).unwrap();
        let sets = vec![
            vec![],
            vec![pos(0, 0, true)],
            vec![pos(1, 1, true), pos(0, 0, false)],
            vec![pos(3, 3, true), pos(3, 2, true), pos(0, 0, false), pos(1, 2, false)],
            vec![pos(0, 0, true), Constraint::negated(Example::new((0, 0), true))],
        ];
        for cs in &sets {
            let brute = space.enumerate().filter(|s| consistent(&space, s, cs)).count() as u64;
            let fast = count(&space, cs, u64::MAX).unwrap();
            assert_eq!(fast, brute, "constraints {cs:?}");
        }
    }

    #[test]
    fn synthesize_first_in_enumeration_order() {
        let grammar = GrammarConfig {
            loop_counts: (1, 2),
            offsets: (0, 1),
            square_sizes: (2, 2),
            line_lengths: (1, 2),
            guard_mods: vec![],
        };
        let space = DrawingSpace::new(4, 4, grammar).unwrap();
        let sets = vec![
            vec![],
            vec![pos(2, 2, true)],
            vec![pos(0, 0, true), pos(0, 1, true), pos(1, 1, false)],
        ];
        for cs in &sets {
            let scan = space.enumerate().find(|s| consistent(&space, s, cs));
            let got = space.synthesize_constrained(cs, u64::MAX).unwrap();
            assert_eq!(got.program, scan, "constraints {cs:?}");
        }
    }

    #[test]
    fn nb_draw_empty_subset_all_unsampled() {
        let sampled: Dataset<(u8, u8), bool> = Dataset::new();
        let cells = nb_draw(sampled.examples(), 16, 16, &(5, 5), 7).unwrap();
        assert_eq!(cells.len(), 49);
        assert!(cells.iter().all(|c| *c == WindowCell::Unsampled));
    }

    #[test]
    fn nb_draw_corner_off_grid_cells_read_unsampled() {
        // At (0,0) the centered 7x7 window spans offsets -3..=3; positions
        // with row < 0 or col < 0 number 3*7 + 4*3 = 33 and read unsampled
        // even when every in-grid pixel is sampled.
        let mut sampled: Dataset<(u8, u8), bool> = Dataset::new();
        for r in 0..16u8 {
            for c in 0..16u8 {
                sampled.push(Example::new((r, c), (r + c) % 2 == 0)).unwrap();
            }
        }
        let cells = nb_draw(sampled.examples(), 16, 16, &(0, 0), 7).unwrap();
        let unsampled = cells.iter().filter(|c| **c == WindowCell::Unsampled).count();
        assert_eq!(unsampled, 33);
    }

    #[test]
    fn nb_draw_center_cell() {
        let mut sampled: Dataset<(u8, u8), bool> = Dataset::new();
        sampled.push(Example::new((5, 5), true)).unwrap();
        let cells = nb_draw(sampled.examples(), 16, 16, &(5, 5), 7).unwrap();
        assert_eq!(cells[24], WindowCell::White);
        let out = nb_draw(sampled.examples(), 16, 16, &(16, 0), 7);
        assert!(matches!(out, Err(Error::OutOfBounds(_))));
    }

    #[test]
    fn grid_serializes_as_rows() {
        let mut g = Grid::new(2, 2);
        g.set(0, 1, true);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, "[[0,1],[0,0]]");
        let back: Grid = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }
}
