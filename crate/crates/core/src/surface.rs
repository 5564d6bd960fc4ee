//! Gluing patterns: polygons with signed-letter words whose paired sides
//! are identified, presenting a surface with a finite set of vertices.
//!
//! Words are read clockwise. The side carrying the letter at position `i`
//! runs from corner `i + 1` to corner `i` and has holonomy `κ(x)^ε`, so a
//! letter with exponent `+1` has source corner `i + 1` and target corner `i`.

use alloc::{
    collections::BTreeMap,
    format,
    string::{String, ToString},
    vec,
    vec::Vec,
};
use core::fmt::Write as _;

use crate::error::{Error, Result};

/// A letter occurrence: letter id plus exponent `−1` when `inverse`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedLetter {
    pub letter: usize,
    pub inverse: bool,
}

impl SignedLetter {
    pub fn new(letter: usize, inverse: bool) -> Self {
        SignedLetter { letter, inverse }
    }

    pub fn inv(self) -> Self {
        SignedLetter { letter: self.letter, inverse: !self.inverse }
    }

    pub fn exponent(self) -> i32 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// A word in the letters of a pattern.
pub type Word = Vec<SignedLetter>;

/// Inverse of a word.
pub fn invert_word(w: &[SignedLetter]) -> Word {
    w.iter().rev().map(|l| l.inv()).collect()
}

/// Free reduction: cancel adjacent `x x⁻¹` pairs.
pub fn reduce_word(w: &[SignedLetter]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// How a letter is glued.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gluing {
    /// Occurs once, unpaired: a boundary edge.
    Free,
    /// Occurs twice with opposite exponents.
    SelfPaired,
    /// Occurs once and is glued to the given other letter.
    PairedWith(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingPattern {
    names: Vec<String>,
    polygons: Vec<Word>,
    gluing: Vec<Gluing>,
    declared_free: bool,
    group: Option<String>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'' || c == '.')
}

impl GluingPattern {
    /// Build and validate a pattern.
    ///
    /// `pairs` lists gluings between distinct letters; letters occurring twice
    /// are paired with themselves. When `free` is given it must list exactly
    /// the letters that end up unpaired.
    pub fn new(
        names: Vec<String>,
        polygons: Vec<Word>,
        pairs: &[(usize, usize)],
        free: Option<&[usize]>,
        group: Option<String>,
    ) -> Result<Self> {
        if polygons.is_empty() {
            return Err(Error::InvalidPattern("no polygons".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if !valid_name(n) {
                return Err(Error::InvalidPattern(format!("bad letter name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidPattern(format!("duplicate letter name `{n}`")));
            }
        }
        let mut occ: Vec<Vec<SignedLetter>> = vec![Vec::new(); names.len()];
        for (p, poly) in polygons.iter().enumerate() {
            if poly.is_empty() {
                return Err(Error::InvalidPattern(format!("polygon {p} has no sides")));
            }
            for l in poly {
                if l.letter >= names.len() {
                    return Err(Error::InvalidPattern(format!("letter id {} out of range", l.letter)));
                }
                occ[l.letter].push(*l);
            }
        }
        let mut gluing = vec![Gluing::Free; names.len()];
        for (x, o) in occ.iter().enumerate() {
            match o.len() {
                0 => return Err(Error::InvalidPattern(format!("letter `{}` never occurs", names[x]))),
                1 => {}
                2 => {
                    if o[0].inverse == o[1].inverse {
                        return Err(Error::InvalidPattern(format!(
                            "paired letter `{}` has equal exponents at both occurrences",
                            names[x]
                        )));
                    }
                    gluing[x] = Gluing::SelfPaired;
                }
                _ => {
                    return Err(Error::InvalidPattern(format!(
                        "letter `{}` used {} times",
                        names[x],
                        o.len()
                    )))
                }
            }
        }
        for &(x, y) in pairs {
            if x >= names.len() || y >= names.len() {
                return Err(Error::InvalidPattern("pair refers to an unknown letter".into()));
            }
            if x == y {
                return Err(Error::InvalidPattern(format!("letter `{}` paired with itself", names[x])));
            }
            for z in [x, y] {
                if gluing[z] != Gluing::Free || occ[z].len() != 1 {
                    return Err(Error::InvalidPattern(format!(
                        "letter `{}` in a pair directive must occur once and be unpaired",
                        names[z]
                    )));
                }
            }
            if occ[x][0].inverse == occ[y][0].inverse {
                return Err(Error::InvalidPattern(format!(
                    "paired letters `{}` and `{}` have equal exponents",
                    names[x], names[y]
                )));
            }
            gluing[x] = Gluing::PairedWith(y);
            gluing[y] = Gluing::PairedWith(x);
        }
        if let Some(f) = free {
            let mut listed = vec![false; names.len()];
            for &x in f {
                if x >= names.len() {
                    return Err(Error::InvalidPattern("free directive refers to an unknown letter".into()));
                }
                if gluing[x] != Gluing::Free {
                    return Err(Error::InvalidPattern(format!(
                        "letter `{}` declared free but is paired",
                        names[x]
                    )));
                }
                listed[x] = true;
            }
            for x in 0..names.len() {
                if gluing[x] == Gluing::Free && !listed[x] {
                    return Err(Error::InvalidPattern(format!(
                        "letter `{}` occurs once but is neither free nor paired",
                        names[x]
                    )));
                }
            }
        }
        Ok(GluingPattern { names, polygons, gluing, declared_free: free.is_some(), group })
    }

    /// Pattern from polygon word strings, same-name pairing only.
    pub fn from_words(words: &[&str]) -> Result<Self> {
        let text: String = words.iter().map(|w| format!("{w}\n")).collect();
        parse_pattern(&text)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, letter: usize) -> &str {
        &self.names[letter]
    }

    pub fn letter_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn polygons(&self) -> &[Word] {
        &self.polygons
    }

    pub fn gluing(&self, letter: usize) -> Gluing {
        self.gluing[letter]
    }

    pub fn group(&self) -> Option<&str> {
        self.group.as_deref()
    }

    pub fn with_group(mut self, group: Option<String>) -> Self {
        self.group = group;
        self
    }

    pub fn num_letters(&self) -> usize {
        self.names.len()
    }

    /// Free letters in order of appearance.
    pub fn free_letters(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for poly in &self.polygons {
            for l in poly {
                if self.gluing[l.letter] == Gluing::Free {
                    out.push(l.letter);
                }
            }
        }
        out
    }

    /// Pairs between distinct letters, each listed once.
    pub fn explicit_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for poly in &self.polygons {
            for l in poly {
                if let Gluing::PairedWith(y) = self.gluing[l.letter] {
                    if !out.iter().any(|&(a, b)| a == y || b == y) {
                        out.push((l.letter, y));
                    }
                }
            }
        }
        out
    }

    /// Letter standing for the same arrow: `x` itself, or the first letter
    /// of its pair.
    pub fn representative(&self, letter: usize) -> usize {
        match self.gluing[letter] {
            Gluing::PairedWith(y) => {
                let first = self.explicit_pairs().into_iter().find(|&(a, b)| a == letter || b == letter);
                match first {
                    Some((a, _)) => a,
                    None => letter.min(y),
                }
            }
            _ => letter,
        }
    }

    /// Position `(polygon, index)` of every occurrence of a letter.
    pub fn occurrences(&self, letter: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (p, poly) in self.polygons.iter().enumerate() {
            for (i, l) in poly.iter().enumerate() {
                if l.letter == letter {
                    out.push((p, i));
                }
            }
        }
        out
    }

    /// Parse a space-separated word such as `"a b^-1"`.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.split_whitespace()
            .map(|tok| {
                let (name, inverse) = split_token(tok).ok_or_else(|| Error::UnknownLetter(tok.into()))?;
                let id = self.letter_id(name).ok_or_else(|| Error::UnknownLetter(name.into()))?;
                Ok(SignedLetter::new(id, inverse))
            })
            .collect()
    }

    pub fn format_word(&self, w: &[SignedLetter]) -> String {
        let mut s = String::new();
        for (i, l) in w.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&self.names[l.letter]);
            if l.inverse {
                s.push_str("^-1");
            }
        }
        s
    }

    /// A letter name not yet in use, derived from `stem`.
    pub fn fresh_name(&self, stem: &str) -> String {
        if self.letter_id(stem).is_none() {
            return stem.to_string();
        }
        (1..)
            .map(|k| format!("{stem}{k}"))
            .find(|n| self.letter_id(n).is_none())
            .expect("unbounded search")
    }
}

fn split_token(tok: &str) -> Option<(&str, bool)> {
    let (name, inverse) = match tok.strip_suffix("^-1") {
        Some(n) => (n, true),
        None => (tok, false),
    };
    if valid_name(name) {
        Some((name, inverse))
    } else {
        None
    }
}

/// Parse the pattern text format: one polygon per line (or several
/// separated by `|`), letters separated by spaces with an optional `^-1`
/// suffix, and optional `free:`, `pair:` and `group:` directive lines.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_pattern(text: &str) -> Result<GluingPattern> {
    let mut names: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut polygons = Vec::new();
    let mut pair_names: Vec<(usize, String, String)> = Vec::new();
    let mut free_names: Option<Vec<(usize, String)>> = None;
    let mut group = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("free:") {
            let list = free_names.get_or_insert_with(Vec::new);
            for tok in rest.split_whitespace() {
                if !valid_name(tok) {
                    return Err(Error::Parse { line: line_no, message: format!("bad letter `{tok}`") });
                }
                list.push((line_no, tok.to_string()));
            }
        } else if let Some(rest) = line.strip_prefix("pair:") {
            let mut rest = rest.trim();
            while !rest.is_empty() {
                let inner = rest
                    .strip_prefix('(')
                    .and_then(|r| r.split_once(')'))
                    .ok_or_else(|| Error::Parse { line: line_no, message: "expected `(x y)`".into() })?;
                let toks: Vec<&str> = inner.0.split_whitespace().collect();
                if toks.len() != 2 || !toks.iter().all(|t| valid_name(t)) {
                    return Err(Error::Parse { line: line_no, message: format!("bad pair `({})`", inner.0) });
                }
                pair_names.push((line_no, toks[0].into(), toks[1].into()));
                rest = inner.1.trim_start();
            }
        } else if let Some(rest) = line.strip_prefix("group:") {
            let g = rest.trim();
            if g.is_empty() || group.is_some() {
                return Err(Error::Parse { line: line_no, message: "bad group directive".into() });
            }
            group = Some(g.to_string());
        } else {
            for part in line.split('|') {
                let mut word = Vec::new();
                for tok in part.split_whitespace() {
                    let (name, inverse) = split_token(tok)
                        .ok_or_else(|| Error::Parse { line: line_no, message: format!("malformed letter `{tok}`") })?;
                    let id = *index.entry(name.to_string()).or_insert_with(|| {
                        names.push(name.to_string());
                        names.len() - 1
                    });
                    word.push(SignedLetter::new(id, inverse));
                }
                if word.is_empty() {
                    return Err(Error::Parse { line: line_no, message: "empty polygon".into() });
                }
                polygons.push(word);
            }
        }
    }
    let lookup = |line: usize, n: &str| {
        index.get(n).copied().ok_or_else(|| Error::Parse { line, message: format!("unknown letter `{n}`") })
    };
    let pairs = pair_names
        .iter()
        .map(|(l, a, b)| Ok((lookup(*l, a)?, lookup(*l, b)?)))
        .collect::<Result<Vec<_>>>()?;
    let free = match &free_names {
        Some(list) => Some(list.iter().map(|(l, n)| lookup(*l, n)).collect::<Result<Vec<_>>>()?),
        None => None,
    };
    GluingPattern::new(names, polygons, &pairs, free.as_deref(), group)
}

/// Canonical text of a pattern; `parse_pattern(print_pattern(p)) == p`.
pub fn print_pattern(p: &GluingPattern) -> String {
    let mut s = String::new();
    for poly in &p.polygons {
        s.push_str(&p.format_word(poly));
        s.push('\n');
    }
    if p.declared_free {
        s.push_str("free:");
        for x in p.free_letters() {
            let _ = write!(s, " {}", p.names[x]);
        }
        s.push('\n');
    }
    let pairs = p.explicit_pairs();
    if !pairs.is_empty() {
        s.push_str("pair:");
        for (a, b) in pairs {
            let _ = write!(s, " ({} {})", p.names[a], p.names[b]);
        }
        s.push('\n');
    }
    if let Some(g) = &p.group {
        let _ = writeln!(s, "group: {g}");
    }
    s
}

/// An oriented boundary segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    /// The free letter and its exponent in the word; the segment's holonomy
    /// is `κ(letter)^ε`.
    pub side: SignedLetter,
    pub source: usize,
    pub target: usize,
    pub polygon: usize,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceInfo {
    pub euler_characteristic: i64,
    pub num_vertices: usize,
    pub num_polygons: usize,
    pub num_edge_classes: usize,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub num_boundary_components: usize,
    /// Per vertex: lies on the boundary.
    pub vertex_on_boundary: Vec<bool>,
    /// Vertex id of every corner, indexed like the polygon words.
    pub corner_vertex: Vec<Vec<usize>>,
    /// Source and target vertex of every letter, viewed as an arrow.
    pub letter_ends: Vec<(usize, usize)>,
    pub num_components: usize,
    /// Every component has a free edge.
    pub a1: bool,
    /// Vertices meet every boundary component (always true for patterns).
    pub a2: bool,
    /// No interior vertices.
    pub a3: bool,
}

impl SurfaceInfo {
    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.num_vertices).filter(|&v| !self.vertex_on_boundary[v]).collect()
    }

    /// Number of distinct vertices met by walking the boundary edges.
    pub fn boundary_vertices_by_traversal(&self) -> usize {
        let mut seen = vec![false; self.num_vertices];
        let mut remaining: Vec<usize> = (0..self.boundary_edges.len()).collect();
        while let Some(start) = remaining.pop() {
            let mut e = start;
            loop {
                let edge = &self.boundary_edges[e];
                seen[edge.source] = true;
                seen[edge.target] = true;
                let next = remaining.iter().position(|&f| self.boundary_edges[f].target == edge.source);
                match next {
                    Some(i) => e = remaining.swap_remove(i),
                    None => break,
                }
            }
        }
        seen.iter().filter(|&&b| b).count()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Source and target corner (polygon-local) of the arrow of a letter
/// occurrence at position `i` in a polygon with `n` sides.
fn occurrence_ends(l: SignedLetter, i: usize, n: usize) -> (usize, usize) {
    let next = (i + 1) % n;
    if l.inverse {
        (i, next)
    } else {
        (next, i)
    }
}

/// Vertex classes, Euler characteristic, boundary edges and the (A1)–(A3)
/// flags of a pattern.
pub fn analyze(p: &GluingPattern) -> SurfaceInfo {
    let offsets: Vec<usize> = p
        .polygons
        .iter()
        .scan(0, |acc, poly| {
            let o = *acc;
            *acc += poly.len();
            Some(o)
        })
        .collect();
    let total: usize = p.polygons.iter().map(Vec::len).sum();
    let mut uf = UnionFind::new(total);
    // Arrow ends of each letter occurrence, as global corner ids.
    let mut ends: Vec<Vec<(usize, usize)>> = vec![Vec::new(); p.names.len()];
    for (pi, poly) in p.polygons.iter().enumerate() {
        for (i, l) in poly.iter().enumerate() {
            let (s, t) = occurrence_ends(*l, i, poly.len());
            ends[l.letter].push((offsets[pi] + s, offsets[pi] + t));
        }
    }
    for x in 0..p.names.len() {
        let partner = match p.gluing[x] {
            Gluing::Free => continue,
            Gluing::SelfPaired => x,
            Gluing::PairedWith(y) => y,
        };
        let all: Vec<(usize, usize)> = ends[x].iter().chain(ends[partner].iter()).copied().collect();
        for w in all.windows(2) {
            uf.union(w[0].0, w[1].0);
            uf.union(w[0].1, w[1].1);
        }
    }
    let mut vertex_of_root = BTreeMap::new();
    let mut corner_vertex = Vec::with_capacity(p.polygons.len());
    for (pi, poly) in p.polygons.iter().enumerate() {
        let mut row = Vec::with_capacity(poly.len());
        for c in 0..poly.len() {
            let r = uf.find(offsets[pi] + c);
            let next = vertex_of_root.len();
            row.push(*vertex_of_root.entry(r).or_insert(next));
        }
        corner_vertex.push(row);
    }
    let num_vertices = vertex_of_root.len();
    let mut letter_ends = vec![(0, 0); p.names.len()];
    let mut boundary_edges = Vec::new();
    for (pi, poly) in p.polygons.iter().enumerate() {
        for (i, l) in poly.iter().enumerate() {
            let (s, t) = occurrence_ends(*l, i, poly.len());
            letter_ends[l.letter] = (corner_vertex[pi][s], corner_vertex[pi][t]);
            if p.gluing[l.letter] == Gluing::Free {
                let n = poly.len();
                boundary_edges.push(BoundaryEdge {
                    side: *l,
                    source: corner_vertex[pi][(i + 1) % n],
                    target: corner_vertex[pi][i],
                    polygon: pi,
                    position: i,
                });
            }
        }
    }
    let mut vertex_on_boundary = vec![false; num_vertices];
    let mut buf = UnionFind::new(num_vertices);
    for e in &boundary_edges {
        vertex_on_boundary[e.source] = true;
        vertex_on_boundary[e.target] = true;
        buf.union(e.source, e.target);
    }
    let mut roots: Vec<usize> = boundary_edges.iter().map(|e| buf.find(e.source)).collect();
    roots.sort_unstable();
    roots.dedup();
    let num_boundary_components = roots.len();

    let mut puf = UnionFind::new(p.polygons.len());
    for x in 0..p.names.len() {
        let partner = match p.gluing[x] {
            Gluing::Free => continue,
            Gluing::SelfPaired => x,
            Gluing::PairedWith(y) => y,
        };
        let mut polys: Vec<usize> = p.occurrences(x).iter().map(|o| o.0).collect();
        polys.extend(p.occurrences(partner).iter().map(|o| o.0));
        for w in polys.windows(2) {
            puf.union(w[0], w[1]);
        }
    }
    let mut comp_has_free = BTreeMap::new();
    for pi in 0..p.polygons.len() {
        let r = puf.find(pi);
        let free = p.polygons[pi].iter().any(|l| p.gluing[l.letter] == Gluing::Free);
        let entry = comp_has_free.entry(r).or_insert(false);
        *entry |= free;
    }
    let num_components = comp_has_free.len();
    let a1 = comp_has_free.values().all(|&b| b);

    let num_edge_classes = p
        .names
        .iter()
        .enumerate()
        .filter(|(x, _)| match p.gluing[*x] {
            Gluing::PairedWith(y) => *x < y,
            _ => true,
        })
        .count();
    let euler = p.polygons.len() as i64 - num_edge_classes as i64 + num_vertices as i64;
    SurfaceInfo {
        euler_characteristic: euler,
        num_vertices,
        num_polygons: p.polygons.len(),
        num_edge_classes,
        boundary_edges,
        num_boundary_components,
        a3: vertex_on_boundary.iter().all(|&b| b),
        vertex_on_boundary,
        corner_vertex,
        letter_ends,
        num_components,
        a1,
        a2: true,
    }
}

/// Result of cutting a polygon along a diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutCorrespondence {
    /// Id of the new paired letter in the cut pattern.
    pub new_letter: usize,
    /// The new letter expressed in the original letters:
    /// `(g_i ⋯ g_{j−1})⁻¹`.
    pub word: Word,
}

/// Cut polygon `polygon` along the diagonal joining corners `i < j`
/// (corner `k` precedes the letter at position `k`).
///
/// The polygon `g_0 ⋯ g_{n−1}` becomes `g_i ⋯ g_{j−1} c` and
/// `c⁻¹ g_j ⋯ g_{n−1} g_0 ⋯ g_{i−1}`; letter ids of the original pattern are
/// kept.
pub fn cut_diagonal(
    p: &GluingPattern,
    polygon: usize,
    corner_i: usize,
    corner_j: usize,
) -> Result<(GluingPattern, CutCorrespondence)> {
    let poly = p
        .polygons
        .get(polygon)
        .ok_or_else(|| Error::InvalidArgument(format!("polygon index {polygon} out of range")))?;
    let n = poly.len();
    let (i, j) = (corner_i.min(corner_j), corner_i.max(corner_j));
    if j >= n {
        return Err(Error::InvalidArgument(format!("corner index {j} out of range for {n} sides")));
    }
    if j - i < 2 || i + n - j < 2 {
        return Err(Error::InvalidArgument(format!("corners {i} and {j} are adjacent")));
    }
    let mut names = p.names.clone();
    let c = names.len();
    names.push(p.fresh_name("x"));
    let mut first: Word = poly[i..j].to_vec();
    first.push(SignedLetter::new(c, false));
    let mut second: Word = vec![SignedLetter::new(c, true)];
    second.extend_from_slice(&poly[j..]);
    second.extend_from_slice(&poly[..i]);
    let mut polygons = p.polygons.clone();
    polygons[polygon] = first;
    polygons.insert(polygon + 1, second);
    let cut = rebuild(p, names, polygons)?;
    let word = invert_word(&poly[i..j]);
    Ok((cut, CutCorrespondence { new_letter: c, word }))
}

fn rebuild(p: &GluingPattern, names: Vec<String>, polygons: Vec<Word>) -> Result<GluingPattern> {
    let pairs: Vec<(usize, usize)> = p.explicit_pairs();
    let free: Option<Vec<usize>> = if p.declared_free { Some(p.free_letters()) } else { None };
    GluingPattern::new(names, polygons, &pairs, free.as_deref(), p.group.clone())
}

/// Remove a letter id, shifting higher ids down.
fn drop_letter(p: &GluingPattern, polygons: Vec<Word>, gone: &[usize]) -> Result<GluingPattern> {
    let remap = |x: usize| x - gone.iter().filter(|&&g| g < x).count();
    let names: Vec<String> =
        p.names.iter().enumerate().filter(|(x, _)| !gone.contains(x)).map(|(_, n)| n.clone()).collect();
    let polygons: Vec<Word> = polygons
        .into_iter()
        .map(|w| w.into_iter().map(|l| SignedLetter::new(remap(l.letter), l.inverse)).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = p
        .explicit_pairs()
        .into_iter()
        .filter(|(a, b)| !gone.contains(a) && !gone.contains(b))
        .map(|(a, b)| (remap(a), remap(b)))
        .collect();
    let free: Option<Vec<usize>> =
        if p.declared_free { Some(p.free_letters().into_iter().map(remap).collect()) } else { None };
    GluingPattern::new(names, polygons, &pairs, free.as_deref(), p.group.clone())
}

/// Glue two polygons along the paired letters `e` and `f` (pass the same
/// letter twice for a self-paired letter), removing the pair.
pub fn glue_edges(p: &GluingPattern, e: usize, f: usize) -> Result<GluingPattern> {
    let paired = match p.gluing.get(e) {
        Some(Gluing::SelfPaired) => e == f,
        Some(Gluing::PairedWith(y)) => *y == f,
        _ => false,
    };
    if !paired {
        return Err(Error::InvalidArgument("letters are not paired with each other".into()));
    }
    let mut occ = p.occurrences(e);
    if e != f {
        occ.extend(p.occurrences(f));
    }
    let ((pa, ia), (pb, ib)) = (occ[0], occ[1]);
    if pa == pb {
        return Err(Error::InvalidArgument("paired letters lie in the same polygon".into()));
    }
    let a = &p.polygons[pa];
    let b = &p.polygons[pb];
    // Rotate so the glued side is last in `a` and first in `b`.
    let mut merged: Word = Vec::with_capacity(a.len() + b.len() - 2);
    merged.extend(a[ia + 1..].iter().chain(a[..ia].iter()));
    merged.extend(b[ib + 1..].iter().chain(b[..ib].iter()));
    let mut polygons = p.polygons.clone();
    polygons[pa.min(pb)] = merged;
    polygons.remove(pa.max(pb));
    let mut gone = vec![e];
    if f != e {
        gone.push(f);
    }
    gone.sort_unstable();
    drop_letter(p, polygons, &gone)
}

/// Insert a new interior vertex joined by the spoke letter `spoke` to the
/// corner `corner` of polygon `polygon`: the word gains `x x⁻¹` before the
/// letter at position `corner`.
pub fn add_interior_vertex_cut(
    p: &GluingPattern,
    spoke: &str,
    polygon: usize,
    corner: usize,
) -> Result<(GluingPattern, usize)> {
    if p.letter_id(spoke).is_some() {
        return Err(Error::InvalidArgument(format!("vertex spoke `{spoke}` already present")));
    }
    let poly = p
        .polygons
        .get(polygon)
        .ok_or_else(|| Error::InvalidArgument(format!("polygon index {polygon} out of range")))?;
    if corner >= poly.len() {
        return Err(Error::InvalidArgument(format!("corner index {corner} out of range")));
    }
    let mut names = p.names.clone();
    let x = names.len();
    names.push(spoke.to_string());
    let mut word = poly.clone();
    word.insert(corner, SignedLetter::new(x, true));
    word.insert(corner, SignedLetter::new(x, false));
    let mut polygons = p.polygons.clone();
    polygons[polygon] = word;
    Ok((rebuild(p, names, polygons)?, x))
}

/// Undo [`add_interior_vertex_cut`]: remove an adjacent `x x⁻¹` spoke.
pub fn remove_interior_vertex(p: &GluingPattern, spoke: &str) -> Result<GluingPattern> {
    let x = p.letter_id(spoke).ok_or_else(|| Error::UnknownLetter(spoke.into()))?;
    let occ = p.occurrences(x);
    if occ.len() != 2 || occ[0].0 != occ[1].0 {
        return Err(Error::InvalidArgument(format!("`{spoke}` is not an interior spoke")));
    }
    let pi = occ[0].0;
    let poly = &p.polygons[pi];
    let n = poly.len();
    let (i, j) = (occ[0].1, occ[1].1);
    let adjacent = (j == i + 1 && poly[i] == SignedLetter::new(x, false))
        || (i == 0 && j == n - 1 && poly[j] == SignedLetter::new(x, false));
    if !adjacent {
        return Err(Error::InvalidArgument(format!("`{spoke}` is not an interior spoke")));
    }
    let mut polygons = p.polygons.clone();
    polygons[pi] = poly.iter().copied().filter(|l| l.letter != x).collect();
    if polygons[pi].is_empty() {
        return Err(Error::InvalidArgument("removing the spoke empties the polygon".into()));
    }
    drop_letter(p, polygons, &[x])
}

/// Stock patterns used across tests and the command line.
pub mod stock {
    use super::*;

    /// `n`-gon with all sides free: `e1 e2 ⋯ en`.
    pub fn ngon(n: usize) -> GluingPattern {
        let words: Vec<String> = (1..=n).map(|k| format!("e{k}")).collect();
        GluingPattern::from_words(&[&words.join(" ")]).expect("n-gon")
    }

    pub const CYLINDER: &str = "a c^-1 a' c";
    pub const TORUS_ONE_HOLE: &str = "a b a^-1 b^-1 c";
    pub const GENUS_TWO_ONE_HOLE: &str = "a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1 c";
    pub const HEXAGON_WITH_BOUNDARY: &str = "a b c a^-1 b^-1 c^-1 d";
    pub const SQUARE_TORUS: &str = "a b a^-1 b^-1";
    pub const HEXAGON_TORUS: &str = "a b c a^-1 b^-1 c^-1";
    pub const TWO_TRIANGLE_TORUS: [&str; 2] = ["a b c", "a^-1 b^-1 c^-1"];

    pub fn cylinder() -> GluingPattern {
        GluingPattern::from_words(&[CYLINDER]).expect("cylinder")
    }

    pub fn torus_one_hole() -> GluingPattern {
        GluingPattern::from_words(&[TORUS_ONE_HOLE]).expect("one-holed torus")
    }

    pub fn genus_two_one_hole() -> GluingPattern {
        GluingPattern::from_words(&[GENUS_TWO_ONE_HOLE]).expect("genus two")
    }

    pub fn hexagon_with_boundary() -> GluingPattern {
        GluingPattern::from_words(&[HEXAGON_WITH_BOUNDARY]).expect("hexagon")
    }

    /// Cylinder with `n` vertices on each boundary circle:
    /// `a1 ⋯ an c⁻¹ a1' ⋯ an' c`.
    pub fn cylinder_multi(n: usize) -> GluingPattern {
        let mut w: Vec<String> = (1..=n).map(|k| format!("a{k}")).collect();
        w.push("c^-1".into());
        w.extend((1..=n).map(|k| format!("a{k}'")));
        w.push("c".into());
        GluingPattern::from_words(&[&w.join(" ")]).expect("multi-vertex cylinder")
    }

    /// One-holed torus cut into a triangle and a quadrilateral.
    pub fn torus_one_hole_cut() -> GluingPattern {
        cut_diagonal(&torus_one_hole(), 0, 0, 2).expect("cut").0
    }

    /// The stock charts with (A1) used by the verification grid.
    pub fn grid() -> Vec<(String, GluingPattern)> {
        let mut v: Vec<(String, GluingPattern)> =
            (2..=5).map(|n| (format!("{n}-gon"), ngon(n))).collect();
        v.push(("cylinder".into(), cylinder()));
        v.push(("torus-one-hole".into(), torus_one_hole()));
        v.push(("genus-two-one-hole".into(), genus_two_one_hole()));
        v.push(("hexagon-with-boundary".into(), hexagon_with_boundary()));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_cancels_nested_pairs() {
        let a = SignedLetter::new(0, false);
        let b = SignedLetter::new(1, false);
        assert_eq!(reduce_word(&[a, b, b.inv(), a.inv(), a]), vec![a]);
    }

    #[test]
    fn explicit_pair_directive() {
        let p = parse_pattern("a b c\nd^-1 e f\npair: (a d)\n").unwrap();
        assert_eq!(p.gluing(0), Gluing::PairedWith(3));
        assert_eq!(p.free_letters().len(), 4);
        assert_eq!(print_pattern(&p), "a b c\nd^-1 e f\npair: (a d)\n");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_pattern("a a a^-1"), Err(Error::InvalidPattern(_))));
        assert!(matches!(parse_pattern("a b a"), Err(Error::InvalidPattern(_))));
        assert!(matches!(parse_pattern("a ^-1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_pattern("a b\nfree: a\n"), Err(Error::InvalidPattern(_))));
        assert!(matches!(parse_pattern("a b\npair: (a b)\n"), Err(Error::InvalidPattern(_))));
        assert!(matches!(parse_pattern(""), Err(Error::InvalidPattern(_))));
    }
}
