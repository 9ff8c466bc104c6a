//! Extended edge-list reading and writing.
//!
//! Records are whitespace-separated `layer src dst [weight]`, 1-indexed,
//! with `#` starting a comment line. A record is an edge when its weight is
//! absent or positive. Directed records are symmetrized by logical OR,
//! duplicates are idempotent and self-loops are dropped.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Adjacency, CommunityLabels, MultiLayerNetwork};

struct EdgeRecord {
    layer: usize,
    src: usize,
    dst: usize,
    present: bool,
}

fn parse_index(field: &str, what: &str) -> std::result::Result<usize, String> {
    let v: usize = field
        .parse()
        .map_err(|_| format!("{what} `{field}` is not a positive integer"))?;
    if v == 0 {
        return Err(format!("{what} must be 1-indexed, got 0"));
    }
    Ok(v)
}

fn parse_record(line: &str) -> std::result::Result<Option<EdgeRecord>, String> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = trimmed.split_whitespace().collect();
    if !(3..=4).contains(&fields.len()) {
        return Err(format!(
            "expected `layer src dst [weight]`, got {} fields",
            fields.len()
        ));
    }
    let layer = parse_index(fields[0], "layer")?;
    let src = parse_index(fields[1], "src")?;
    let dst = parse_index(fields[2], "dst")?;
    let present = match fields.get(3) {
        None => true,
        Some(w) => {
            let w: f64 = w
                .parse()
                .map_err(|_| format!("weight `{w}` is not a number"))?;
            if w.is_nan() {
                return Err("weight is NaN".into());
            }
            w > 0.0
        }
    };
    Ok(Some(EdgeRecord {
        layer,
        src,
        dst,
        present,
    }))
}

/// Read an edge list from `reader`. Missing `n` or `layers` are inferred from
/// the largest indices seen; `path` is used only in error messages.
pub fn read_multilayer_edgelist<R: BufRead>(
    reader: R,
    path: &Path,
    n: Option<usize>,
    layers: Option<usize>,
) -> Result<MultiLayerNetwork> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut records = Vec::new();
    let (mut max_node, mut max_layer) = (0, 0);
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let Some(rec) = parse_record(&line).map_err(|m| parse_err(line_no, m))? else {
            continue;
        };
        if let Some(l) = layers {
            if rec.layer > l {
                return Err(parse_err(
                    line_no,
                    format!("layer {} exceeds L = {l}", rec.layer),
                ));
            }
        }
        if let Some(n) = n {
            if rec.src.max(rec.dst) > n {
                return Err(parse_err(
                    line_no,
                    format!("node {} exceeds n = {n}", rec.src.max(rec.dst)),
                ));
            }
        }
        max_node = max_node.max(rec.src).max(rec.dst);
        max_layer = max_layer.max(rec.layer);
        records.push(rec);
    }

    let n = n.unwrap_or(max_node);
    let num_layers = layers.unwrap_or(max_layer);
    if n == 0 || num_layers == 0 {
        return Err(Error::InvalidArgument(format!(
            "{}: no records and no declared size",
            path.display()
        )));
    }
    let mut adjs = vec![Adjacency::empty(n); num_layers];
    for rec in records.iter().filter(|r| r.present && r.src != r.dst) {
        adjs[rec.layer - 1].set(rec.src - 1, rec.dst - 1, true);
    }
    MultiLayerNetwork::new(adjs)
}

pub fn load_multilayer_edgelist(
    path: impl AsRef<Path>,
    n: Option<usize>,
    layers: Option<usize>,
) -> Result<MultiLayerNetwork> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_multilayer_edgelist(BufReader::new(file), path, n, layers)
}

/// Write each undirected edge once as `layer src dst`, 1-indexed, ordered by
/// layer then `src < dst`. A header comment records `n` and `L`.
pub fn write_edgelist<W: Write>(net: &MultiLayerNetwork, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# n={} L={}", net.n(), net.num_layers())?;
    for (l, adj) in net.layers().iter().enumerate() {
        for (i, j) in adj.edges() {
            writeln!(out, "{} {} {}", l + 1, i + 1, j + 1)?;
        }
    }
    Ok(())
}

/// `node,label` rows, both 1-indexed.
pub fn write_labels<W: Write>(labels: &CommunityLabels, mut out: W) -> std::io::Result<()> {
    writeln!(out, "node,label")?;
    for (i, l) in labels.to_one_based().iter().enumerate() {
        writeln!(out, "{},{}", i + 1, l)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, n: Option<usize>, l: Option<usize>) -> Result<MultiLayerNetwork> {
        read_multilayer_edgelist(text.as_bytes(), Path::new("mem"), n, l)
    }

    #[test]
    fn duplicate_symmetric_record() {
        let net = read("1 1 2\n1 2 1\n", Some(2), Some(1)).unwrap();
        assert!(net.layer(0).has_edge(0, 1));
        assert!(net.layer(0).has_edge(1, 0));
        assert_eq!(net.layer(0).edge_count(), 1);
    }

    #[test]
    fn self_loop_dropped() {
        let net = read("2 3 3 5.0\n", Some(3), Some(2)).unwrap();
        assert_eq!(net.layer(1).edge_count(), 0);
        assert_eq!(net.layer(1).get(2, 2), 0);
    }

    #[test]
    fn nonpositive_weight_is_absent() {
        let net = read("1 1 2 0.0\n1 2 3 -1\n1 1 3 0.5\n", None, None).unwrap();
        assert_eq!(net.n(), 3);
        assert!(!net.layer(0).has_edge(0, 1));
        assert!(!net.layer(0).has_edge(1, 2));
        assert!(net.layer(0).has_edge(0, 2));
    }

    #[test]
    fn comments_blank_lines_and_inference() {
        let net = read("# header\n\n2 1 4\n  # indented comment\n", None, None).unwrap();
        assert_eq!(net.n(), 4);
        assert_eq!(net.num_layers(), 2);
        assert_eq!(net.layer(0).edge_count(), 0);
        assert!(net.layer(1).has_edge(0, 3));
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("1 1 2\n1 x 2\n", 2),
            ("1 1\n", 1),
            ("1 1 2\n\n0 1 2\n", 3),
            ("1 1 2 w\n", 1),
            ("1 1 2 3 4\n", 1),
        ] {
            match read(text, None, None) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn declared_bounds_are_enforced() {
        assert!(matches!(
            read("1 1 3\n", Some(2), None),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read("3 1 2\n", None, Some(2)),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(read("", None, None).is_err());
        let net = read("", Some(3), Some(2)).unwrap();
        assert_eq!((net.n(), net.num_layers()), (3, 2));
    }

    #[test]
    fn write_then_read_round_trips() {
        let net = read("1 1 2\n1 3 2\n2 4 1\n", Some(5), Some(3)).unwrap();
        let mut buf = Vec::new();
        write_edgelist(&net, &mut buf).unwrap();
        let back = read(std::str::from_utf8(&buf).unwrap(), Some(5), Some(3)).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn labels_output() {
        let labels = CommunityLabels::from_one_based(&[2, 1, 2], 2).unwrap();
        let mut buf = Vec::new();
        write_labels(&labels, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "node,label\n1,2\n2,1\n3,2\n"
        );
    }
}
