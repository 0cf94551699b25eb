//! Reader for the numeric CSV files the tool writes.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Location-tagged parse failure; rows are 1-based with the header as row 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TableError {
    pub row: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "row {}, column {}: {}", self.row, c, self.message),
            None => write!(f, "row {}: {}", self.row, self.message),
        }
    }
}

impl std::error::Error for TableError {}

impl Table {
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or(TableError {
            row: 1,
            column: None,
            message: "missing header".into(),
        })?;
        let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let row = i + 1;
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(TableError {
                    row,
                    column: None,
                    message: format!("expected {} columns, found {}", header.len(), cells.len()),
                });
            }
            let values = cells
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    cell.trim().parse::<f64>().map_err(|_| TableError {
                        row,
                        column: Some(c + 1),
                        message: format!("`{}` is not a number ({})", cell.trim(), header[c]),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(values);
        }
        if rows.is_empty() {
            return Err(TableError {
                row: 2,
                column: None,
                message: "no data rows".into(),
            });
        }
        Ok(Self { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[c]).collect()
    }
}
