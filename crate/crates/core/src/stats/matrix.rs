//! Items x raters boolean rating matrix with explicit missing cells.

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingMatrix {
    pub items: Vec<String>,
    pub raters: Vec<String>,
    /// Row-major, one row per item.
    pub cells: Vec<Vec<Option<bool>>>,
}

impl RatingMatrix {
    pub fn new(items: Vec<String>, raters: Vec<String>) -> Self {
        let cells = vec![vec![None; raters.len()]; items.len()];
        RatingMatrix { items, raters, cells }
    }

    pub fn from_rows(items: Vec<String>, raters: Vec<String>, cells: Vec<Vec<Option<bool>>>) -> Result<Self, StatsError> {
        if cells.len() != items.len() || cells.iter().any(|r| r.len() != raters.len()) {
            return Err(StatsError::Shape(format!(
                "expected {} rows of {} cells",
                items.len(),
                raters.len()
            )));
        }
        Ok(RatingMatrix { items, raters, cells })
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_raters(&self) -> usize {
        self.raters.len()
    }

    pub fn rater_index(&self, rater: &str) -> Option<usize> {
        self.raters.iter().position(|r| r == rater)
    }

    pub fn item_index(&self, item: &str) -> Option<usize> {
        self.items.iter().position(|r| r == item)
    }

    pub fn set(&mut self, item: usize, rater: usize, value: Option<bool>) {
        self.cells[item][rater] = value;
    }

    pub fn column(&self, rater: usize) -> Vec<Option<bool>> {
        self.cells.iter().map(|row| row[rater]).collect()
    }

    pub fn missing_cells(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_none()).count()
    }

    /// Copy with rater column `rater` replaced by `values`.
    pub fn with_column(&self, rater: usize, values: &[Option<bool>]) -> RatingMatrix {
        let mut m = self.clone();
        for (row, v) in m.cells.iter_mut().zip(values) {
            row[rater] = *v;
        }
        m
    }

    /// Rows picked by index, repeats allowed (bootstrap resamples).
    pub fn select_rows(&self, rows: &[usize]) -> RatingMatrix {
        RatingMatrix {
            items: rows.iter().map(|&i| self.items[i].clone()).collect(),
            raters: self.raters.clone(),
            cells: rows.iter().map(|&i| self.cells[i].clone()).collect(),
        }
    }

    /// Drops items with no rating at all.
    pub fn retain_rated(&mut self) {
        let keep: Vec<bool> = self.cells.iter().map(|r| r.iter().any(Option::is_some)).collect();
        let mut k = keep.iter();
        self.items.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        self.cells.retain(|_| *k.next().unwrap());
    }

    /// CSV with an `item` header column; cells `Y`, `N` or empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["item".to_string()];
        header.extend(self.raters.iter().cloned());
        w.write_record(&header).unwrap();
        for (item, row) in self.items.iter().zip(&self.cells) {
            let mut rec = vec![item.clone()];
            rec.extend(row.iter().map(|c| match c {
                Some(true) => "Y".to_string(),
                Some(false) => "N".to_string(),
                None => String::new(),
            }));
            w.write_record(&rec).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn from_csv(text: &str) -> Result<Self, StatsError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| StatsError::Csv(e.to_string()))?.clone();
        if header.is_empty() {
            return Err(StatsError::Csv("missing header".into()));
        }
        let raters: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut items = Vec::new();
        let mut cells = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| StatsError::Csv(e.to_string()))?;
            items.push(rec.get(0).unwrap_or_default().to_string());
            let mut row = Vec::with_capacity(raters.len());
            for (j, v) in rec.iter().skip(1).enumerate() {
                row.push(match v.to_ascii_uppercase().as_str() {
                    "Y" | "YES" | "1" | "TRUE" => Some(true),
                    "N" | "NO" | "0" | "FALSE" => Some(false),
                    "" | "NA" => None,
                    _ => {
                        return Err(StatsError::Csv(format!("row {}, column {}: invalid cell {v:?}", i + 2, j + 2)))
                    }
                });
            }
            cells.push(row);
        }
        RatingMatrix::from_rows(items, raters, cells).map_err(|e| StatsError::Csv(e.to_string()))
    }
}
