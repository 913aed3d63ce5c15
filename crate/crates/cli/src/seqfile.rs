//! Sequence documents written by `generate`, `lift` and `spoil`.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use equidist::{
    Materialized, PartitionConfig, PointSource, Provenance, Sequence, SequenceDescriptor, TagIndex,
    TaggedSequence, UnitPoint,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::report::{object, Report};

#[derive(Serialize, Deserialize)]
struct Row {
    index: usize,
    x: String,
    decimal: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<u64>,
}

pub fn rows(seq: &Materialized) -> Result<Vec<Value>> {
    let tags = seq.tags();
    seq.points()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            Ok(serde_json::to_value(Row {
                index: i + 1,
                x: x.to_string(),
                decimal: x.value(),
                tag: tags.map(|t| t[i].get()),
            })?)
        })
        .collect()
}

pub fn summary(seq: &Materialized) -> Result<Value> {
    let mut pairs = vec![(
        "descriptor",
        serde_json::to_value(seq.sequence().descriptor())?,
    )];
    if let Some(t) = seq.as_tagged() {
        pairs.push(("partition", serde_json::to_value(t.partition())?));
        pairs.push(("provenance", serde_json::to_value(t.provenance())?));
    }
    Ok(object(pairs))
}

/// Loads a sequence document, trusting the exact point strings in its rows.
pub fn load(path: &Path) -> Result<Materialized> {
    let report = Report::read(path)?;
    if report.kind != "sequence" {
        return Err(anyhow!(
            "{} is a {:?} report, not a sequence",
            path.display(),
            report.kind
        ));
    }
    let descriptor: SequenceDescriptor =
        serde_json::from_value(report.summary["descriptor"].clone())
            .context("sequence document lacks a descriptor")?;
    let mut points = Vec::with_capacity(report.rows.len());
    let mut tags = Vec::with_capacity(report.rows.len());
    for (i, value) in report.rows.into_iter().enumerate() {
        let row: Row = serde_json::from_value(value).with_context(|| format!("row {}", i + 1))?;
        if row.index != i + 1 {
            return Err(anyhow!("row {} carries index {}", i + 1, row.index));
        }
        points.push(row.x.parse::<UnitPoint>()?);
        tags.push(row.tag);
    }
    let sequence = Sequence::with_descriptor(descriptor, points)?;
    let partition = &report.summary["partition"];
    if partition.is_null() {
        return Ok(Materialized::Plain(sequence));
    }
    let partition: PartitionConfig = serde_json::from_value(partition.clone())?;
    let provenance: Provenance = serde_json::from_value(report.summary["provenance"].clone())
        .context("tagged sequence lacks provenance")?;
    let tags = tags
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let t = t.ok_or_else(|| anyhow!("row {} has no tag", i + 1))?;
            Ok(TagIndex::new(t, &partition)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Materialized::Tagged(TaggedSequence::from_parts(
        sequence, tags, partition, provenance,
    )?))
}
