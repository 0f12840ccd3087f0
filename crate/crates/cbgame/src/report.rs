//! Tabular reports shared by the CSV and JSON writers.

use cbgame_core::GameParams;

use crate::config::SCHEMA_VERSION;

/// Columns that open every table.
pub const PREFIX_COLUMNS: [&str; 6] = ["alpha", "beta", "n_investors", "phi1", "phi2", "alpha_tilde"];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// A table whose columns are the prefix columns, the table's own columns and
/// a trailing `schema_version`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        let columns = PREFIX_COLUMNS
            .iter()
            .chain(columns)
            .chain(["schema_version"].iter())
            .map(|c| c.to_string())
            .collect();
        Self {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, params: &GameParams, alpha_tilde: f64, cells: Vec<Cell>) {
        let mut row = vec![
            Cell::Num(params.alpha()),
            Cell::Num(params.beta()),
            Cell::Int(params.n_investors() as u64),
            Cell::Num(params.phi1()),
            Cell::Num(params.phi2()),
            Cell::Num(alpha_tilde),
        ];
        row.extend(cells);
        row.push(Cell::Int(SCHEMA_VERSION as u64));
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric value at `row`, `column`; `None` for text or unknown columns.
    pub fn num(&self, row: usize, column: &str) -> Option<f64> {
        match self.rows.get(row)?.get(self.column(column)?)? {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }

    pub fn text(&self, row: usize, column: &str) -> Option<&str> {
        match self.rows.get(row)?.get(self.column(column)?)? {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// Everything one command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSet {
    pub command: String,
    pub seed: Option<u64>,
    pub tables: Vec<Table>,
}

impl ReportSet {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            seed,
            tables: Vec::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}
