//! Minimal element tree over quick-xml plus the escaping used by the
//! canonical writers.

use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed XML at byte {position}: {message}")]
pub struct XmlError {
    pub position: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    /// Concatenated character data of direct text children.
    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t) => Some(t.as_str()),
                Node::Element(_) => None,
            })
            .collect()
    }

    /// Non-whitespace text directly under this element, if any.
    pub fn stray_text(&self) -> Option<&str> {
        self.children.iter().find_map(|n| match n {
            Node::Text(t) if !t.trim().is_empty() => Some(t.as_str()),
            _ => None,
        })
    }
}

fn element_from(e: &quick_xml::events::BytesStart<'_>, reader: &Reader<&[u8]>) -> Result<Element, XmlError> {
    let err = |message: String| XmlError { position: reader.buffer_position(), message };
    let name = String::from_utf8(e.name().as_ref().to_vec()).map_err(|e| err(e.to_string()))?;
    let mut attrs = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|e| err(e.to_string()))?;
        let key = String::from_utf8(attr.key.as_ref().to_vec()).map_err(|e| err(e.to_string()))?;
        let value = attr.unescape_value().map_err(|e| err(e.to_string()))?.into_owned();
        attrs.push((key, value));
    }
    Ok(Element { name, attrs, children: Vec::new() })
}

/// Parses a document and returns its root element.
pub fn parse(doc: &str) -> Result<Element, XmlError> {
    let mut reader = Reader::from_str(doc);
    reader.config_mut().trim_text(false);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let position = reader.buffer_position();
        let event = reader.read_event().map_err(|e| XmlError { position, message: e.to_string() })?;
        match event {
            Event::Start(e) => stack.push(element_from(&e, &reader)?),
            Event::Empty(e) => {
                let el = element_from(&e, &reader)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Element(el)),
                    None if root.is_none() => root = Some(el),
                    None => return Err(XmlError { position, message: "multiple root elements".into() }),
                }
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| XmlError { position, message: "unbalanced end tag".into() })?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Element(el)),
                    None if root.is_none() => root = Some(el),
                    None => return Err(XmlError { position, message: "multiple root elements".into() }),
                }
            }
            Event::Text(t) => {
                let text = t.unescape().map_err(|e| XmlError { position, message: e.to_string() })?.into_owned();
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Text(text)),
                    None if text.trim().is_empty() => {}
                    None => return Err(XmlError { position, message: "text outside the root element".into() }),
                }
            }
            Event::CData(t) => {
                let text = String::from_utf8(t.into_inner().into_owned())
                    .map_err(|e| XmlError { position, message: e.to_string() })?;
                if let Some(parent) = stack.last_mut() {
                    parent.children.push(Node::Text(text));
                }
            }
            Event::Eof => break,
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }
    if !stack.is_empty() {
        return Err(XmlError { position: reader.buffer_position(), message: "unclosed element".into() });
    }
    root.ok_or_else(|| XmlError { position: 0, message: "document has no root element".into() })
}

pub fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn escape_attr(s: &str) -> String {
    escape_text(s).replace('"', "&quot;")
}

/// Renders `name="value"` pairs in the given order.
pub fn attrs(pairs: &[(&str, &str)]) -> String {
    pairs.iter().map(|(k, v)| format!(" {k}=\"{}\"", escape_attr(v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_elements_and_text() {
        let root = parse("<?xml version=\"1.0\"?><a x=\"1 &amp; 2\"><b>hi</b><c/></a>").unwrap();
        assert_eq!(root.name, "a");
        assert_eq!(root.attr("x"), Some("1 & 2"));
        let kids: Vec<_> = root.elements().map(|e| e.name.as_str()).collect();
        assert_eq!(kids, ["b", "c"]);
        assert_eq!(root.elements().next().unwrap().text(), "hi");
    }

    #[test]
    fn rejects_broken_documents() {
        assert!(parse("<a><b></a>").is_err());
        assert!(parse("").is_err());
        assert!(parse("<a/><b/>").is_err());
    }

    #[test]
    fn escaping() {
        assert_eq!(escape_attr("a\"<&"), "a&quot;&lt;&amp;");
        assert_eq!(attrs(&[("id", "01"), ("FE", "Agent")]), " id=\"01\" FE=\"Agent\"");
    }
}
