//! DOT and SVG export of tracks.

use std::fmt::Write;

use super::{End, Side, TrainTrack, WeightSystem};
use crate::numerics::format_rational;

/// Graphviz rendering: one node per switch, one edge per branch labelled by
/// name and weight. Edge ports encode the side of the switch.
pub fn to_dot(track: &TrainTrack, w: &WeightSystem) -> String {
    let mut s = String::from("digraph track {\n  rankdir=LR;\n  node [shape=box, fontsize=10];\n");
    for (i, sw) in track.switches().iter().enumerate() {
        let style = if track.is_frontier(i) { ", style=dashed" } else { "" };
        let _ = writeln!(s, "  \"{}\" [label=\"{}\"{}];", sw.name, sw.name, style);
    }
    for (b, br) in track.branches().iter().enumerate() {
        let port = |end: End| match track.place(b, end).side {
            Side::Incoming => "w",
            Side::Outgoing => "e",
        };
        let _ = writeln!(
            s,
            "  \"{}\":{} -> \"{}\":{} [label=\"{} ({})\"];",
            track.switch(br.from).name,
            port(End::Tail),
            track.switch(br.to).name,
            port(End::Head),
            br.name,
            format_rational(w.get(b))
        );
    }
    s.push_str("}\n");
    s
}

/// A schematic SVG: switches on a grid in declaration order, each switch drawn
/// as a vertical bar with its incoming ends on the left and outgoing ends on
/// the right in list order, branches as cubic curves between end slots.
pub fn to_svg(track: &TrainTrack, w: &WeightSystem) -> String {
    let cols = (track.num_switches() as f64).sqrt().ceil().max(1.0) as usize;
    let (dx, dy) = (160.0, 120.0);
    let pos = |i: usize| (60.0 + dx * (i % cols) as f64, 60.0 + dy * (i / cols) as f64);
    let slot = |i: usize, side: Side, idx: usize, len: usize| {
        let (x, y) = pos(i);
        let off = if len <= 1 { 0.0 } else { -20.0 + 40.0 * idx as f64 / (len - 1) as f64 };
        match side {
            Side::Incoming => (x - 8.0, y + off),
            Side::Outgoing => (x + 8.0, y + off),
        }
    };
    let rows = track.num_switches().div_ceil(cols);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"9\">",
        dx * cols as f64 + 60.0,
        dy * rows as f64 + 60.0
    );
    for (b, br) in track.branches().iter().enumerate() {
        let pt = |end: End| {
            let p = track.place(b, end);
            let len = track.switch(p.switch).side(p.side).len();
            (slot(p.switch, p.side, p.index, len), p.side)
        };
        let ((x0, y0), s0) = pt(End::Tail);
        let ((x1, y1), s1) = pt(End::Head);
        let dir = |side: Side| if side == Side::Outgoing { 50.0 } else { -50.0 };
        let _ = writeln!(
            s,
            "  <path d=\"M{x0:.1},{y0:.1} C{:.1},{y0:.1} {:.1},{y1:.1} {x1:.1},{y1:.1}\" fill=\"none\" stroke=\"#335\"/>",
            x0 + dir(s0),
            x1 + dir(s1)
        );
        let _ = writeln!(s, "  <text x=\"{:.1}\" y=\"{:.1}\">{} {}</text>", (x0 + x1) / 2.0, (y0 + y1) / 2.0 - 3.0, br.name, format_rational(w.get(b)));
    }
    for (i, sw) in track.switches().iter().enumerate() {
        let (x, y) = pos(i);
        let color = if track.is_frontier(i) { "#aaa" } else { "#000" };
        let _ = writeln!(s, "  <rect x=\"{:.1}\" y=\"{:.1}\" width=\"4\" height=\"48\" fill=\"{color}\"/>", x - 2.0, y - 24.0);
        let _ = writeln!(s, "  <text x=\"{:.1}\" y=\"{:.1}\" fill=\"#a00\">{}</text>", x - 10.0, y + 36.0, sw.name);
    }
    s.push_str("</svg>\n");
    s
}
