//! Delimiter-separated text output.

use std::fmt::Display;

/// Builds delimited text in memory. Fields are quoted by the csv writer when
/// they contain the delimiter, quotes or newlines.
pub struct TableWriter {
    inner: csv::Writer<Vec<u8>>,
}

impl TableWriter {
    pub fn new(delimiter: char) -> Self {
        let delimiter = if delimiter.is_ascii() { delimiter as u8 } else { b',' };
        Self {
            inner: csv::WriterBuilder::new()
                .delimiter(delimiter)
                .flexible(true)
                .from_writer(Vec::new()),
        }
    }

    pub fn row<I, S>(&mut self, fields: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        // writes into a Vec cannot fail
        self.inner.write_record(fields).expect("in-memory write");
        self
    }

    pub fn finish(self) -> String {
        let bytes = self.inner.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("fields are UTF-8")
    }
}

/// Labeled matrix: a header of column labels behind `corner`, then one row
/// per row label.
pub fn format_matrix<V: Display>(
    delimiter: char,
    corner: &str,
    row_labels: &[String],
    col_labels: &[String],
    cell: impl Fn(usize, usize) -> V,
) -> String {
    let mut w = TableWriter::new(delimiter);
    w.row(std::iter::once(corner).chain(col_labels.iter().map(String::as_str)));
    for (i, label) in row_labels.iter().enumerate() {
        let cells: Vec<String> = (0..col_labels.len()).map(|j| cell(i, j).to_string()).collect();
        w.row(std::iter::once(label.as_str()).chain(cells.iter().map(String::as_str)));
    }
    w.finish()
}
