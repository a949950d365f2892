//! RFC 4180 CSV output: CRLF line ends, a header row, and fields quoted only
//! when they contain a comma, quote, CR, or LF. UTF-8 without BOM.

use crate::query::{GroupByResult, Selection};

fn push_field(out: &mut Vec<u8>, field: &str) {
    if field.contains([',', '"', '\r', '\n']) {
        out.push(b'"');
        for b in field.bytes() {
            if b == b'"' {
                out.push(b'"');
            }
            out.push(b);
        }
        out.push(b'"');
    } else {
        out.extend_from_slice(field.as_bytes());
    }
}

fn push_record<'a>(out: &mut Vec<u8>, fields: impl IntoIterator<Item = &'a str>) {
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(b',');
        }
        push_field(out, f);
    }
    out.extend_from_slice(b"\r\n");
}

pub fn write_csv<'a, R>(header: &[&str], rows: R) -> Vec<u8>
where
    R: IntoIterator,
    R::Item: IntoIterator<Item = &'a str>,
{
    let mut out = Vec::new();
    push_record(&mut out, header.iter().copied());
    for row in rows {
        push_record(&mut out, row);
    }
    out
}

/// All selected rows, sentinels exported as their display strings.
pub fn selection_csv(sel: &Selection<'_>) -> Vec<u8> {
    let header: Vec<&str> = sel.table.columns.iter().map(|c| c.name.as_str()).collect();
    write_csv(&header, sel.rows().map(|r| r.cells.iter().map(|c| c.display())))
}

pub fn group_by_csv(result: &GroupByResult) -> Vec<u8> {
    let counts: Vec<String> = result.groups.iter().map(|g| g.count.to_string()).collect();
    write_csv(
        &[result.column.as_str(), "count"],
        result
            .groups
            .iter()
            .zip(&counts)
            .map(|(g, c)| [g.label.as_str(), c.as_str()]),
    )
}
