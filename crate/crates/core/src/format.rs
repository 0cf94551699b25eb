//! Number formatting shared by every file writer.

/// Fixed 17-significant-digit scientific notation; round-trips any `f64`.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Joins already formatted cells into one CSV line (no trailing newline).
pub fn csv_line<I, S>(cells: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut line = String::new();
    for (i, c) in cells.into_iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(c.as_ref());
    }
    line
}
