use std::fmt::Write;

use num_complex::Complex64;

use super::NetDocument;
use crate::matkit::ComplexMatrix;

/// 17 significant digits, so the text parses back to the same bits.
/// The imaginary part is dropped only when it is `+0.0`.
pub fn format_complex(z: Complex64) -> String {
    let re = format!("{:.16e}", z.re);
    if z.im == 0.0 && !z.im.is_sign_negative() {
        return re;
    }
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{re}{sign}{:.16e}i", z.im.abs())
}

pub fn format_matrix(m: &ComplexMatrix) -> String {
    if m.nrows() == 0 {
        return "[]".to_string();
    }
    let rows: Vec<String> = m
        .row_iter()
        .map(|row| {
            let entries: Vec<String> = row.iter().map(|&z| format_complex(z)).collect();
            format!("[{}]", entries.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Canonical text: components first with fields in a fixed order, then a
/// single network block listing instances, connections and externals.
pub fn serialize(doc: &NetDocument) -> String {
    let mut out = String::new();
    for (k, comp) in doc.components.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "component {} {{", comp.name());
        let _ = writeln!(out, "  inputs = {};", comp.n_ports());
        let _ = writeln!(out, "  modes = {};", comp.n_modes());
        let _ = writeln!(out, "  S = {};", format_matrix(comp.s()));
        let _ = writeln!(out, "  C = {};", format_matrix(comp.c()));
        let _ = writeln!(out, "  Omega = {};", format_matrix(comp.omega()));
        out.push_str("}\n");
    }
    if doc.instances.is_empty() && doc.connections.is_empty() && doc.externals.is_empty() {
        return out;
    }
    if !out.is_empty() {
        out.push('\n');
    }
    out.push_str("network {\n");
    for inst in &doc.instances {
        let _ = writeln!(out, "  use {}: {};", inst.name, inst.component);
    }
    for conn in &doc.connections {
        let _ = writeln!(
            out,
            "  connect {}.out[{}] -> {}.in[{}];",
            conn.from.instance, conn.from.port, conn.to.instance, conn.to.port
        );
    }
    for ext in &doc.externals {
        let _ = writeln!(out, "  external {}.in[{}] as {};", ext.input.instance, ext.input.port, ext.name);
    }
    out.push_str("}\n");
    out
}

pub fn serialize_matrix_assignments(entries: &[(&str, &ComplexMatrix)]) -> String {
    let mut out = String::new();
    for (name, m) in entries {
        let _ = writeln!(out, "{name} = {};", format_matrix(m));
    }
    out
}
