//! The QNET text format.
//!
//! ```text
//! component cav {
//!   inputs = 1;
//!   modes = 1;
//!   S = [[1.0]];
//!   C = [[1.7320508075688772]];
//!   Omega = [[0.0]];
//! }
//!
//! network {
//!   use a: cav;
//!   use b: cav;
//!   connect a.out[0] -> b.in[0];
//!   external a.in[0] as drive;
//! }
//! ```
//!
//! Component fields may appear in any order but each exactly once. `[]` is
//! accepted for matrices with a zero dimension, and `[[], []]` for `n×0`.
//! Several `network` blocks are merged in order.

mod build;
mod lexer;
mod parser;
mod writer;

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::slh::LinearComponent;

pub use build::build_partitioned;
pub use parser::{parse, parse_matrix_assignments};
pub use writer::{format_complex, format_matrix, serialize, serialize_matrix_assignments};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub message: String,
    /// Source text of the offending token.
    pub snippet: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.snippet.is_empty() {
            write!(f, " (at `{}`)", self.snippet)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub instance: String,
    pub port: usize,
}

impl PortRef {
    pub fn new(instance: impl Into<String>, port: usize) -> Self {
        Self { instance: instance.into(), port }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: String,
    pub component: String,
}

/// A point-to-point channel from an output port to an input port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub from: PortRef,
    pub to: PortRef,
}

/// An input port left open and given a name in the reduced network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalPort {
    pub input: PortRef,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetDocument {
    /// Component definitions; each carries its name.
    pub components: Vec<LinearComponent>,
    pub instances: Vec<Instance>,
    pub connections: Vec<Connection>,
    pub externals: Vec<ExternalPort>,
}

impl NetDocument {
    /// A document holding one component definition and no network.
    pub fn from_component(comp: &LinearComponent) -> Self {
        let name = sanitize_name(comp.name());
        Self { components: vec![comp.clone().with_name(name)], ..Self::default() }
    }

    pub fn component(&self, name: &str) -> Option<&LinearComponent> {
        self.components.iter().find(|c| c.name() == name)
    }

    pub fn has_network(&self) -> bool {
        !self.instances.is_empty()
    }

    /// The first semantic problem, if any.
    pub fn check(&self) -> Result<(), String> {
        match semantic_issues(self).into_iter().next() {
            Some((_, msg)) => Err(msg),
            None => Ok(()),
        }
    }
}

/// Turns an arbitrary string into a valid NAME token.
pub fn sanitize_name(raw: &str) -> String {
    let mut out: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if !out.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') {
        out.insert(0, 'g');
    }
    out
}

/// Where in a document a semantic problem sits; the parser maps these back
/// to tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Site {
    Component(usize),
    InstanceName(usize),
    InstanceComponent(usize),
    ConnectFrom(usize),
    ConnectFromPort(usize),
    ConnectTo(usize),
    ConnectToPort(usize),
    ExternalInstance(usize),
    ExternalPort(usize),
    ExternalName(usize),
}

/// Every semantic problem in `doc`, grouped by kind of declaration.
pub(crate) fn semantic_issues(doc: &NetDocument) -> Vec<(Site, String)> {
    let mut issues = Vec::new();

    // the first definition wins for lookups
    let mut comp_index: HashMap<&str, &LinearComponent> = HashMap::new();
    for (i, comp) in doc.components.iter().enumerate() {
        if comp_index.contains_key(comp.name()) {
            issues.push((Site::Component(i), format!("component `{}` is defined twice", comp.name())));
        } else {
            comp_index.insert(comp.name(), comp);
        }
    }

    let mut ports_of: HashMap<&str, Option<usize>> = HashMap::new();
    for (i, inst) in doc.instances.iter().enumerate() {
        if ports_of.contains_key(inst.name.as_str()) {
            issues.push((Site::InstanceName(i), format!("instance `{}` is declared twice", inst.name)));
            continue;
        }
        let n = comp_index.get(inst.component.as_str()).map(|c| c.n_ports());
        if n.is_none() {
            issues.push((
                Site::InstanceComponent(i),
                format!("unknown component `{}`", inst.component),
            ));
        }
        ports_of.insert(&inst.name, n);
    }

    // Ok(true) if the port exists, Ok(false) if the instance's component is unknown
    let resolve = |p: &PortRef| -> Result<bool, String> {
        match ports_of.get(p.instance.as_str()) {
            None => Err(format!("unknown instance `{}`", p.instance)),
            Some(None) => Ok(false),
            Some(&Some(n)) if p.port >= n => Err(format!(
                "port {} out of range: `{}` has {} port{}",
                p.port,
                p.instance,
                n,
                if n == 1 { "" } else { "s" }
            )),
            Some(_) => Ok(true),
        }
    };

    let mut used_out: HashSet<&PortRef> = HashSet::new();
    let mut used_in: HashSet<&PortRef> = HashSet::new();
    for (i, conn) in doc.connections.iter().enumerate() {
        for (p, inst_site, port_site, dir) in [
            (&conn.from, Site::ConnectFrom(i), Site::ConnectFromPort(i), "output"),
            (&conn.to, Site::ConnectTo(i), Site::ConnectToPort(i), "input"),
        ] {
            match resolve(p) {
                Err(msg) if msg.starts_with("unknown") => issues.push((inst_site, msg)),
                Err(msg) => issues.push((port_site, msg)),
                Ok(false) => {}
                Ok(true) => {
                    let fresh = if dir == "output" { used_out.insert(p) } else { used_in.insert(p) };
                    if !fresh {
                        let what = if dir == "output" { "fan-out" } else { "fan-in" };
                        issues.push((
                            inst_site,
                            format!("{what}: {dir} {}[{}] is already connected", p.instance, p.port),
                        ));
                    }
                }
            }
        }
    }

    let mut ext_names: HashSet<&str> = HashSet::new();
    for (i, ext) in doc.externals.iter().enumerate() {
        match resolve(&ext.input) {
            Err(msg) if msg.starts_with("unknown") => issues.push((Site::ExternalInstance(i), msg)),
            Err(msg) => issues.push((Site::ExternalPort(i), msg)),
            Ok(false) => {}
            Ok(true) => {
                if !used_in.insert(&ext.input) {
                    issues.push((
                        Site::ExternalInstance(i),
                        format!(
                            "input {}[{}] is already connected or external",
                            ext.input.instance, ext.input.port
                        ),
                    ));
                }
            }
        }
        if !ext_names.insert(&ext.name) {
            issues.push((Site::ExternalName(i), format!("external port name `{}` is used twice", ext.name)));
        }
    }

    issues
}
