//! Export-only formats for visualization tools.

use std::fmt::Write as _;
use std::io::{self, Write};

use super::AttributedGraph;

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

/// Writes GraphML with one string data key per schema attribute.
pub fn write_graphml<W: Write>(g: &AttributedGraph, mut w: W) -> io::Result<()> {
    let attrs = g.schema().attributes();
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(w, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    for (i, a) in attrs.iter().enumerate() {
        writeln!(
            w,
            r#"  <key id="d{i}" for="node" attr.name="{}" attr.type="string"/>"#,
            xml_escape(&a.name)
        )?;
    }
    writeln!(w, r#"  <graph id="G" edgedefault="undirected">"#)?;
    for node in g.nodes() {
        writeln!(w, r#"    <node id="n{}">"#, node.id)?;
        for (i, (&v, a)) in node.values.iter().zip(attrs).enumerate() {
            writeln!(w, r#"      <data key="d{i}">{}</data>"#, xml_escape(&a.values[v]))?;
        }
        writeln!(w, "    </node>")?;
    }
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        writeln!(w, r#"    <edge id="e{e}" source="n{u}" target="n{v}"/>"#)?;
    }
    writeln!(w, "  </graph>")?;
    writeln!(w, "</graphml>")?;
    Ok(())
}

/// Renders an undirected DOT graph; node labels list the attribute values.
pub fn to_dot(g: &AttributedGraph) -> String {
    let attrs = g.schema().attributes();
    let mut out = String::from("graph ego {\n");
    for node in g.nodes() {
        let label: Vec<&str> = node
            .values
            .iter()
            .zip(attrs)
            .map(|(&v, a)| a.values[v].as_str())
            .collect();
        let _ = writeln!(
            out,
            "  {} [label=\"{}\\n{}\"];",
            node.id,
            node.id,
            label.join("/").replace('"', "\\\"")
        );
    }
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "  {u} -- {v};");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::graph;

    #[test]
    fn graphml_lists_every_node_and_edge() {
        let g = graph(
            &[("male", "Google", "York"), ("female", "Ikea", "Leeds")],
            &[(0, 1)],
        );
        let mut buf = Vec::new();
        write_graphml(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(r#"attr.name="workplace""#));
        assert!(text.contains(r#"<data key="d1">Ikea</data>"#));
        assert!(text.contains(r#"<edge id="e0" source="n0" target="n1"/>"#));
        assert_eq!(text.matches("<node ").count(), 2);
    }

    #[test]
    fn dot_output() {
        let g = graph(
            &[("male", "Google", "York"), ("female", "Ikea", "Leeds")],
            &[(0, 1)],
        );
        let dot = to_dot(&g);
        assert!(dot.starts_with("graph ego {"));
        assert!(dot.contains("0 -- 1;"));
        assert!(dot.contains("female/Ikea/Leeds"));
    }
}
