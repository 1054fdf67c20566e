//! Output assembly.

use serde::Serialize;

/// CSV with a header row.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
}

pub fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn line(s: impl AsRef<str>) -> String {
    format!("{}\n", s.as_ref())
}

/// Shortest round-trip form, switching to exponent notation for tiny and huge values.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}
