//! DIMACS graphs, result tables as CSV, and an SVG scatter of ω against q.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::bitset::AdjacencyMatrix;
use crate::graphs::Graph;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: malformed line: {msg}")]
    MalformedLine { line: usize, msg: String },
    #[error("line {line}: vertex {index} outside 1..={n}")]
    EdgeIndexOutOfRange { line: usize, index: usize, n: usize },
    #[error("header announces {header} edges, file has {found}")]
    EdgeCountMismatch { header: usize, found: usize },
    #[error("no result rows")]
    EmptyRows,
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// DIMACS text: `c` comment lines, `p edge n m`, then `e u v` (1-based) for
/// each edge with u < v in lexicographic order.
pub fn format_dimacs(adj: &AdjacencyMatrix, comments: &[String]) -> String {
    let mut s = String::new();
    for c in comments {
        if c.is_empty() {
            s.push_str("c\n");
        } else {
            let _ = writeln!(s, "c {c}");
        }
    }
    let _ = writeln!(s, "p edge {} {}", adj.n(), adj.edge_count());
    for (u, v) in adj.edges() {
        let _ = writeln!(s, "e {} {}", u + 1, v + 1);
    }
    s
}

pub fn write_dimacs(
    adj: &AdjacencyMatrix,
    comments: &[String],
    path: &Path,
) -> Result<(), FormatError> {
    fs::write(path, format_dimacs(adj, comments)).map_err(io_err(path))
}

/// Comment block identifying a cone graph and its vertex labels
/// (`v <index> <log of representative>`).
pub fn graph_comments(graph: &Graph) -> Vec<String> {
    let modulus: Vec<String> = graph.modulus().iter().map(u64::to_string).collect();
    let mut out = vec![
        format!("{} graph q={}", graph.kind(), graph.q()),
        format!("modulus {}", modulus.join(" ")),
    ];
    out.extend(
        graph
            .labels()
            .iter()
            .enumerate()
            .map(|(i, p)| format!("v {} {}", i + 1, p.index())),
    );
    out
}

pub fn parse_dimacs(text: &str) -> Result<AdjacencyMatrix, FormatError> {
    let mut adj: Option<(AdjacencyMatrix, usize)> = None;
    let mut edges = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "p" => {
                if adj.is_some() {
                    return Err(FormatError::MalformedHeader {
                        line: lineno,
                        msg: "second problem line".into(),
                    });
                }
                let bad = |msg: &str| FormatError::MalformedHeader {
                    line: lineno,
                    msg: msg.into(),
                };
                if tokens.len() != 4 || (tokens[1] != "edge" && tokens[1] != "col") {
                    return Err(bad("expected `p edge <n> <m>`"));
                }
                let n = tokens[2]
                    .parse::<usize>()
                    .map_err(|_| bad("bad vertex count"))?;
                let m = tokens[3]
                    .parse::<usize>()
                    .map_err(|_| bad("bad edge count"))?;
                adj = Some((AdjacencyMatrix::new(n), m));
            }
            "e" => {
                let Some((g, _)) = adj.as_mut() else {
                    return Err(FormatError::MalformedHeader {
                        line: lineno,
                        msg: "edge before problem line".into(),
                    });
                };
                if tokens.len() != 3 {
                    return Err(FormatError::MalformedLine {
                        line: lineno,
                        msg: "expected `e <u> <v>`".into(),
                    });
                }
                let mut ends = [0usize; 2];
                for (k, t) in tokens[1..].iter().enumerate() {
                    let x = t.parse::<usize>().map_err(|_| FormatError::MalformedLine {
                        line: lineno,
                        msg: format!("`{t}` is not a vertex number"),
                    })?;
                    if x == 0 || x > g.n() {
                        return Err(FormatError::EdgeIndexOutOfRange {
                            line: lineno,
                            index: x,
                            n: g.n(),
                        });
                    }
                    ends[k] = x - 1;
                }
                if ends[0] == ends[1] {
                    return Err(FormatError::MalformedLine {
                        line: lineno,
                        msg: "self-loop".into(),
                    });
                }
                g.add_edge(ends[0], ends[1]);
                edges += 1;
            }
            other => {
                return Err(FormatError::MalformedLine {
                    line: lineno,
                    msg: format!("unknown line type `{other}`"),
                })
            }
        }
    }
    let (g, m) = adj.ok_or(FormatError::MalformedHeader {
        line: 0,
        msg: "missing problem line".into(),
    })?;
    if edges != m {
        return Err(FormatError::EdgeCountMismatch {
            header: m,
            found: edges,
        });
    }
    Ok(g)
}

pub fn read_dimacs(path: &Path) -> Result<AdjacencyMatrix, FormatError> {
    parse_dimacs(&fs::read_to_string(path).map_err(io_err(path))?)
}

/// One line of a clique-number table.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub q: u64,
    pub kind: String,
    pub n: usize,
    pub m: usize,
    /// ω when completed; otherwise the best clique size found.
    pub omega: usize,
    pub completed: bool,
    pub wall_time_s: f64,
    pub witness_path: Option<String>,
}

pub const CSV_HEADER: &str = "q,kind,n,m,omega,completed,wall_time_s";

fn csv_err(e: csv::Error) -> FormatError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    FormatError::MalformedLine {
        line,
        msg: e.to_string(),
    }
}

pub fn format_results_csv(rows: &[ResultRow]) -> Result<String, FormatError> {
    if rows.is_empty() {
        return Err(FormatError::EmptyRows);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.q.to_string(),
            r.kind.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.omega.to_string(),
            r.completed.to_string(),
            format!("{:.3}", r.wall_time_s),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().expect("in-memory writer");
    Ok(String::from_utf8(bytes).expect("ASCII output"))
}

pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<(), FormatError> {
    fs::write(path, format_results_csv(rows)?).map_err(io_err(path))
}

/// Reads a table produced by [`write_results_csv`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>, FormatError> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(csv_err)?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(FormatError::MalformedHeader {
            line: 1,
            msg: format!("expected `{CSV_HEADER}`"),
        });
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |field: &str| FormatError::MalformedLine {
            line,
            msg: format!("bad {field}"),
        };
        rows.push(ResultRow {
            q: rec[0].parse().map_err(|_| bad("q"))?,
            kind: rec[1].to_string(),
            n: rec[2].parse().map_err(|_| bad("n"))?,
            m: rec[3].parse().map_err(|_| bad("m"))?,
            omega: rec[4].parse().map_err(|_| bad("omega"))?,
            completed: rec[5].parse().map_err(|_| bad("completed"))?,
            wall_time_s: rec[6].parse().map_err(|_| bad("wall_time_s"))?,
            witness_path: None,
        });
    }
    Ok(rows)
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

fn nice_step(span: f64) -> f64 {
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

/// Scatter of ω against q with the line ω = (q+1)/2 dashed for reference.
/// Incomplete rows are drawn hollow.
pub fn format_figure_svg(rows: &[ResultRow]) -> Result<String, FormatError> {
    if rows.is_empty() {
        return Err(FormatError::EmptyRows);
    }
    let qmax = rows.iter().map(|r| r.q).max().unwrap() as f64;
    let wmax = rows.iter().map(|r| r.omega).max().unwrap() as f64;
    let (x0, x1) = (0.0, (qmax + 5.0).max(10.0));
    let (y0, y1) = (0.0, ((qmax + 1.0) / 2.0).max(wmax) + 2.0);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        px(x0),
        py(y0),
        px(x1),
        py(y0)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        px(x0),
        py(y0),
        px(x0),
        py(y1)
    );
    let xs = nice_step(x1 - x0);
    let mut t = xs;
    while t <= x1 {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="black"/><text x="{0:.1}" y="{3:.1}" text-anchor="middle">{4}</text>"#,
            px(t),
            py(y0),
            py(y0) + 5.0,
            py(y0) + 18.0,
            t
        );
        t += xs;
    }
    let ys = nice_step(y1 - y0);
    let mut t = ys;
    while t <= y1 {
        let _ = writeln!(
            s,
            r#"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="black"/><text x="{3:.1}" y="{4:.1}" text-anchor="end">{5}</text>"#,
            px(x0),
            py(t),
            px(x0) - 5.0,
            px(x0) - 8.0,
            py(t) + 4.0,
            t
        );
        t += ys;
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">q</text>"#,
        (px(x0) + px(x1)) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">ω(Γ_X)</text>"#,
        (py(y0) + py(y1)) / 2.0,
        (py(y0) + py(y1)) / 2.0
    );
    let _ = writeln!(
        s,
        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999" stroke-dasharray="4 4"/>"##,
        px(1.0),
        py(1.0),
        px(x1),
        py((x1 + 1.0) / 2.0)
    );
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| (a.q, &a.kind).cmp(&(b.q, &b.kind)));
    for r in sorted {
        let fill = if r.completed { "#1f4e9c" } else { "white" };
        let _ = writeln!(
            s,
            r##"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{fill}" stroke="#1f4e9c"><title>q={} ω={}</title></circle>"##,
            px(r.q as f64),
            py(r.omega as f64),
            r.q,
            r.omega
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_figure_svg(rows: &[ResultRow], path: &Path) -> Result<(), FormatError> {
    fs::write(path, format_figure_svg(rows)?).map_err(io_err(path))
}
