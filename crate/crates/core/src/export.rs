//! Writers for clustering results: indented text details, Newick, the
//! ultrametric matrix as TXT, and SVG drawings with fusion bands.
//!
//! All numbers are printed with the tree's precision as a fixed number of
//! decimals. Output uses `\n` line endings and is byte-stable for identical
//! input.

use std::collections::HashSet;
use std::fmt::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::dendro::{DetailsChild, NodeDetails, UltrametricMatrix};
use crate::proximity_io::SEPARATORS;
use crate::tree::{Multidendrogram, Node, NodeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExportError {
    #[error("invalid axis range [{min}, {max}] with tick separation {tick}")]
    InvalidAxisRange { min: f64, max: f64, tick: f64 },
}

/// Fixed-decimal rendering that never prints a negative zero.
pub fn format_value(value: f64, decimals: u32) -> String {
    let s = format!("{:.*}", decimals as usize, value);
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_owned(),
        _ => s,
    }
}

/// Replaces characters that would break Newick or the TXT layouts with `_`,
/// then makes the results unique by appending `_2`, `_3`, ...
pub fn sanitize_labels(labels: &[String]) -> Vec<String> {
    const UNSAFE: [char; 8] = ['(', ')', '[', ']', ':', '\'', '"', '#'];
    let cleaned: Vec<String> = labels
        .iter()
        .map(|l| {
            let s: String =
                l.chars().map(|c| if SEPARATORS.contains(&c) || UNSAFE.contains(&c) || c.is_control() { '_' } else { c }).collect();
            if s.is_empty() {
                "_".to_owned()
            } else {
                s
            }
        })
        .collect();

    // Unchanged labels keep their names; rewritten ones yield on collision.
    let mut taken: HashSet<String> = cleaned.iter().zip(labels).filter(|(c, l)| c == l).map(|(c, _)| c.clone()).collect();
    let mut out = Vec::with_capacity(cleaned.len());
    for (name, original) in cleaned.into_iter().zip(labels) {
        if &name == original {
            out.push(name);
            continue;
        }
        let mut candidate = name.clone();
        let mut suffix = 2;
        while taken.contains(&candidate) {
            candidate = format!("{name}_{suffix}");
            suffix += 1;
        }
        taken.insert(candidate.clone());
        out.push(candidate);
    }
    out
}

/// Indented rendering of the details view: one line per internal node with
/// its leaf count and band, children one level deeper.
pub fn to_text_details(details: &NodeDetails, precision: u32) -> String {
    let mut out = String::new();
    write_details(&mut out, details, precision, 0);
    out
}

fn write_details(out: &mut String, node: &NodeDetails, precision: u32, depth: usize) {
    let indent = "  ".repeat(depth);
    writeln!(
        out,
        "{indent}node: {} leaves, [{}, {}]",
        node.leaf_count,
        format_value(node.band_lower, precision),
        format_value(node.band_upper, precision)
    )
    .expect("write to string");
    for child in &node.children {
        match child {
            DetailsChild::Leaf(label) => writeln!(out, "{indent}  leaf: {label}").expect("write to string"),
            DetailsChild::Node(inner) => write_details(out, inner, precision, depth + 1),
        }
    }
}

/// Height at which leaves sit for Newick and drawing: zero, or lower if some
/// fusion value is negative (always the case for weights).
fn leaf_height(tree: &Multidendrogram) -> f64 {
    tree.clusters().map(|(_, c)| c.band_lower).fold(0.0, f64::min)
}

/// Newick serialization. Branch lengths are the parent's fusion value minus
/// the child's, with leaves at [`leaf_height`]; band upper ends are dropped.
pub fn to_newick(tree: &Multidendrogram, precision: u32) -> String {
    let labels = sanitize_labels(tree.labels());
    let base = leaf_height(tree);
    let mut out = String::new();
    write_newick(tree, &labels, tree.root(), None, base, precision, &mut out);
    out.push_str(";\n");
    out
}

fn write_newick(tree: &Multidendrogram, labels: &[String], id: NodeId, parent: Option<f64>, base: f64, precision: u32, out: &mut String) {
    let height = match tree.node(id) {
        Node::Leaf(i) => {
            out.push_str(&labels[*i]);
            base
        }
        Node::Internal(c) => {
            out.push('(');
            for (k, &child) in c.children.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_newick(tree, labels, child, Some(c.band_lower), base, precision, out);
            }
            out.push(')');
            c.band_lower
        }
    };
    if let Some(parent) = parent {
        out.push(':');
        out.push_str(&format_value(parent - height, precision));
    }
}

/// A parsed Newick node.
#[derive(Debug, Clone, PartialEq)]
pub struct NewickNode {
    pub label: Option<String>,
    pub length: Option<f64>,
    pub children: Vec<NewickNode>,
}

impl NewickNode {
    /// Height of every internal node above the leaves, summed along the path
    /// to its first leaf, listed in post-order.
    pub fn internal_heights(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_heights(&mut out);
        out
    }

    fn collect_heights(&self, out: &mut Vec<f64>) -> f64 {
        if self.children.is_empty() {
            return 0.0;
        }
        let mut height = 0.0;
        for (k, child) in self.children.iter().enumerate() {
            let h = child.collect_heights(out) + child.length.unwrap_or(0.0);
            if k == 0 {
                height = h;
            }
        }
        out.push(height);
        height
    }

    pub fn leaf_labels(&self) -> Vec<&str> {
        if self.children.is_empty() {
            return self.label.as_deref().into_iter().collect();
        }
        self.children.iter().flat_map(|c| c.leaf_labels()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("malformed Newick at byte {position}: {message}")]
pub struct NewickError {
    pub position: usize,
    pub message: String,
}

/// Parses a single Newick tree terminated by `;`.
pub fn parse_newick(text: &str) -> Result<NewickNode, NewickError> {
    let mut parser = NewickParser { bytes: text.as_bytes(), pos: 0 };
    let node = parser.subtree()?;
    parser.skip_ws();
    parser.expect(b';')?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.error("trailing input after ';'"));
    }
    Ok(node)
}

struct NewickParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl NewickParser<'_> {
    fn error(&self, message: &str) -> NewickError {
        NewickError { position: self.pos, message: message.to_owned() }
    }

    fn skip_ws(&mut self) {
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<(), NewickError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", b as char)))
        }
    }

    fn subtree(&mut self) -> Result<NewickNode, NewickError> {
        self.skip_ws();
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                children.push(self.subtree()?);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected ',' or ')'")),
                }
            }
        }
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|b| !b"(),:;".contains(&b) && !b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let label = std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| self.error("label is not UTF-8"))?;
        let label = (!label.is_empty()).then(|| label.to_owned());
        if children.is_empty() && label.is_none() {
            return Err(self.error("leaf without a label"));
        }
        self.skip_ws();
        let mut length = None;
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.peek().is_some_and(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) {
                self.pos += 1;
            }
            let token = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii");
            length = Some(token.parse::<f64>().map_err(|_| self.error("bad branch length"))?);
        }
        Ok(NewickNode { label, length, children })
    }
}

/// The ultrametric matrix as tab-separated text with a label row, readable
/// back with the matrix parser.
pub fn ultrametric_to_txt(ultra: &UltrametricMatrix) -> String {
    let n = ultra.len();
    let mut out = sanitize_labels(ultra.labels()).join("\t");
    out.push('\n');
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format_value(ultra.get(i, j), ultra.precision())).collect();
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

/// Where the root sits relative to the leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    North,
    South,
    East,
    West,
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "north" | "n" => Ok(Orientation::North),
            "south" | "s" => Ok(Orientation::South),
            "east" | "e" => Ok(Orientation::East),
            "west" | "w" => Ok(Orientation::West),
            other => Err(format!("unknown orientation {other:?}")),
        }
    }
}

/// Drawing settings. Axis values are in the data's units.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub orientation: Orientation,
    pub show_bands: bool,
    pub band_color: String,
    pub show_axis: bool,
    pub axis_min: f64,
    pub axis_max: f64,
    pub tick_separation: f64,
    pub label_decimals: u32,
    pub show_labels: bool,
}

impl RenderOptions {
    /// Defaults fitted to `tree`: the axis spans from zero (or the lowest
    /// fusion value) to the highest band end, with about ten ticks.
    pub fn for_tree(tree: &Multidendrogram) -> Self {
        let low = leaf_height(tree);
        let mut high = tree.clusters().map(|(_, c)| c.band_upper).fold(f64::NEG_INFINITY, f64::max);
        if high.is_nan() || high <= low {
            high = low + 1.0;
        }
        let (a, b) = (tree.reported(low), tree.reported(high));
        let (axis_min, axis_max) = (a.min(b), a.max(b));
        Self {
            orientation: Orientation::North,
            show_bands: true,
            band_color: "lightgray".to_owned(),
            show_axis: true,
            axis_min,
            axis_max,
            tick_separation: nice_step((axis_max - axis_min) / 10.0),
            label_decimals: tree.precision(),
            show_labels: true,
        }
    }
}

/// Closest value of the form `{1, 2, 5} × 10^k`.
fn nice_step(raw: f64) -> f64 {
    if !raw.is_finite() || raw <= 0.0 {
        return 1.0;
    }
    let magnitude = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * magnitude).min_by(|x, y| (x - raw).abs().total_cmp(&(y - raw).abs())).expect("non-empty")
}

const MARGIN: f64 = 20.0;
const AXIS_SPACE: f64 = 50.0;
const LEAF_GAP: f64 = 24.0;
const PLOT_EXTENT: f64 = 400.0;
const LABEL_SPACE: f64 = 60.0;
const MAX_TICKS: f64 = 10_000.0;

/// Abstract layout: `u` runs along the leaves, `v` from the root side
/// (small) to the leaves (large). Orientations map `(u, v)` to canvas
/// coordinates.
struct Layout {
    orientation: Orientation,
    u_extent: f64,
    v_extent: f64,
    engine_min: f64,
    engine_max: f64,
}

impl Layout {
    fn v(&self, engine_height: f64) -> f64 {
        MARGIN + (self.engine_max - engine_height) / (self.engine_max - self.engine_min) * PLOT_EXTENT
    }

    fn place(&self, u: f64, v: f64) -> (f64, f64) {
        match self.orientation {
            Orientation::North => (u, v),
            Orientation::South => (u, self.v_extent - v),
            Orientation::West => (v, u),
            Orientation::East => (self.v_extent - v, u),
        }
    }

    fn canvas(&self) -> (f64, f64) {
        match self.orientation {
            Orientation::North | Orientation::South => (self.u_extent, self.v_extent),
            Orientation::East | Orientation::West => (self.v_extent, self.u_extent),
        }
    }

    fn line(&self, out: &mut String, (u1, v1): (f64, f64), (u2, v2): (f64, f64)) {
        let (x1, y1) = self.place(u1, v1);
        let (x2, y2) = self.place(u2, v2);
        if format!("{x1:.2} {y1:.2}") == format!("{x2:.2} {y2:.2}") {
            return;
        }
        writeln!(out, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="black" stroke-width="1"/>"#)
            .expect("write to string");
    }

    fn text(&self, out: &mut String, (u, v): (f64, f64), anchor: &str, content: &str) {
        let (x, y) = self.place(u, v);
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="10" text-anchor="{anchor}" dominant-baseline="middle">{}</text>"#,
            xml_escape(content)
        )
        .expect("write to string");
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Draws `tree` as an SVG document.
///
/// Each internal node's junction is drawn at its fusion value. With
/// `show_bands`, nodes whose band has positive width also get a filled
/// rectangle over their children's extent spanning the band, and the
/// connector to the parent starts at the top of the band.
pub fn render_svg(tree: &Multidendrogram, options: &RenderOptions) -> Result<String, ExportError> {
    let (min, max, tick) = (options.axis_min, options.axis_max, options.tick_separation);
    let valid = min.is_finite() && max.is_finite() && tick.is_finite() && min < max && tick > 0.0 && (max - min) / tick <= MAX_TICKS;
    if !valid {
        return Err(ExportError::InvalidAxisRange { min, max, tick });
    }

    let sign = tree.measure().engine_sign();
    let (e1, e2) = (sign * min, sign * max);
    let n = tree.num_leaves();
    let layout = Layout {
        orientation: options.orientation,
        u_extent: 2.0 * MARGIN + AXIS_SPACE + (n.saturating_sub(1)) as f64 * LEAF_GAP,
        v_extent: 2.0 * MARGIN + PLOT_EXTENT + LABEL_SPACE,
        engine_min: e1.min(e2),
        engine_max: e1.max(e2),
    };
    let baseline = layout.v(layout.engine_min);

    // Horizontal position of every node.
    let mut u = vec![0.0; tree.nodes().len()];
    for (k, leaf) in tree.leaves_under(tree.root()).into_iter().enumerate() {
        u[leaf] = MARGIN + AXIS_SPACE + k as f64 * LEAF_GAP;
    }
    for (id, c) in tree.clusters() {
        u[id] = (u[c.children[0]] + u[*c.children.last().expect("children")]) / 2.0;
    }

    let (width, height) = layout.canvas();
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    )
    .expect("write to string");

    if options.show_bands {
        for (_, c) in tree.clusters().filter(|(_, c)| c.has_band()) {
            let first = u[c.children[0]];
            let last = u[*c.children.last().expect("children")];
            let (xa, ya) = layout.place(first, layout.v(c.band_upper));
            let (xb, yb) = layout.place(last, layout.v(c.band_lower));
            writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="none"/>"#,
                xa.min(xb),
                ya.min(yb),
                (xa - xb).abs(),
                (ya - yb).abs(),
                xml_escape(&options.band_color)
            )
            .expect("write to string");
        }
    }

    for (_, c) in tree.clusters() {
        let junction = layout.v(c.band_lower);
        for &child in &c.children {
            let start = match tree.cluster(child) {
                None => baseline,
                Some(inner) if options.show_bands => layout.v(inner.band_upper),
                Some(inner) => layout.v(inner.band_lower),
            };
            layout.line(&mut out, (u[child], start), (u[child], junction));
        }
        let first = u[c.children[0]];
        let last = u[*c.children.last().expect("children")];
        layout.line(&mut out, (first, junction), (last, junction));
    }

    if options.show_labels {
        for (leaf, label) in tree.labels().iter().enumerate() {
            layout.text(&mut out, (u[leaf], baseline + 12.0), "middle", label);
        }
    }

    if options.show_axis {
        let axis_u = MARGIN + AXIS_SPACE - 15.0;
        layout.line(&mut out, (axis_u, layout.v(layout.engine_min)), (axis_u, layout.v(layout.engine_max)));
        let first = (min / tick - 1e-9).ceil() as i64;
        let last = (max / tick + 1e-9).floor() as i64;
        for k in first..=last {
            let value = k as f64 * tick;
            let v = layout.v(sign * value);
            layout.line(&mut out, (axis_u - 4.0, v), (axis_u, v));
            layout.text(&mut out, (axis_u - 6.0, v), "end", &format_value(value, options.label_decimals));
        }
    }

    out.push_str("</svg>\n");
    Ok(out)
}
