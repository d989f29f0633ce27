use std::collections::{HashMap, HashSet};

use super::{Instance, NetDocument};
use crate::error::{Error, Result};
use crate::network::PartitionedComponent;
use crate::slh::{concatenate, LinearComponent};

/// Concatenates the instances in declaration order and marks connected ports
/// internal.
///
/// Reduced inputs are the declared externals in order, followed by the
/// remaining open inputs in index order. Each reduced input is paired with
/// the output of the same port when that output is open; the other outputs
/// fill the remaining slots in index order.
///
/// A document without a network block is treated as one instance of every
/// component, named after it.
pub fn build_partitioned(doc: &NetDocument) -> Result<PartitionedComponent> {
    doc.check().map_err(Error::BadPartition)?;

    let implicit: Vec<Instance>;
    let instances = if doc.instances.is_empty() {
        implicit = doc
            .components
            .iter()
            .map(|c| Instance { name: c.name().to_string(), component: c.name().to_string() })
            .collect();
        &implicit
    } else {
        &doc.instances
    };

    let mut offset: HashMap<&str, usize> = HashMap::new();
    let mut whole: Option<LinearComponent> = None;
    for inst in instances {
        let proto = doc.component(&inst.component).expect("checked above");
        let ports = (0..proto.n_ports()).map(|k| format!("{}.{k}", inst.name)).collect();
        let modes = proto.mode_labels().iter().map(|l| format!("{}.{l}", inst.name)).collect();
        let part = proto
            .clone()
            .with_name(inst.name.clone())
            .with_port_labels(ports)?
            .with_mode_labels(modes)?;
        let base = whole.as_ref().map_or(0, LinearComponent::n_ports);
        offset.insert(&inst.name, base);
        whole = Some(match whole {
            None => part,
            Some(acc) => concatenate(&acc, &part),
        });
    }
    let whole = whole.unwrap_or_else(LinearComponent::empty);
    let n = whole.n_ports();
    let global = |p: &super::PortRef| offset[p.instance.as_str()] + p.port;

    let edges: Vec<(usize, usize)> = doc.connections.iter().map(|c| (global(&c.from), global(&c.to))).collect();
    let used_out: HashSet<usize> = edges.iter().map(|e| e.0).collect();
    let used_in: HashSet<usize> = edges.iter().map(|e| e.1).collect();

    let declared: Vec<usize> = doc.externals.iter().map(|e| global(&e.input)).collect();
    let declared_set: HashSet<usize> = declared.iter().copied().collect();
    let external_in: Vec<usize> = declared
        .iter()
        .copied()
        .chain((0..n).filter(|p| !used_in.contains(p) && !declared_set.contains(p)))
        .collect();

    let mut external_out: Vec<Option<usize>> = external_in
        .iter()
        .map(|&p| (!used_out.contains(&p)).then_some(p))
        .collect();
    let taken: HashSet<usize> = external_out.iter().flatten().copied().collect();
    let mut spare = (0..n).filter(|p| !used_out.contains(p) && !taken.contains(p));
    for slot in external_out.iter_mut().filter(|s| s.is_none()) {
        *slot = spare.next();
    }
    let external_out: Vec<usize> = external_out.into_iter().map(|p| p.expect("one open output per open input")).collect();

    let labels = doc.externals.iter().map(|e| e.name.clone()).chain(
        external_in[declared.len()..].iter().zip(&external_out[declared.len()..]).map(|(&i, &o)| {
            let pl = whole.port_labels();
            if i == o {
                pl[i].clone()
            } else {
                format!("{}->{}", pl[i], pl[o])
            }
        }),
    );
    let labels: Vec<String> = labels.collect();

    let edged = PartitionedComponent::from_edges(whole, &edges)?;
    PartitionedComponent::with_external_order(
        edged.comp,
        edged.internal_out,
        edged.internal_in,
        edged.eta,
        external_out,
        external_in,
    )?
    .with_external_labels(labels)
}
