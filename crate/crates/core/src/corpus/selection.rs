//! Sample-selection reconciliation: a start count followed by exclusion
//! steps, with the running total re-derived at each subtotal row.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Start,
    Exclusion,
    Subtotal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionRow {
    pub label: String,
    pub kind: RowKind,
    /// Count as printed: exclusions are positive numbers of removed filings.
    pub stated: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconciledRow {
    pub label: String,
    pub kind: RowKind,
    /// Signed effect on the sample: negative for exclusions.
    pub value: i64,
    /// Running total after this row.
    pub running_total: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSelection {
    rows: Vec<SelectionRow>,
}

impl SampleSelection {
    pub fn new(rows: Vec<SelectionRow>) -> Result<Self> {
        match rows.first() {
            Some(r) if r.kind == RowKind::Start => {}
            _ => return Err(Error::invalid("sample selection must begin with a start row")),
        }
        if rows[1..].iter().any(|r| r.kind == RowKind::Start) {
            return Err(Error::invalid("only the first row may be a start row"));
        }
        Ok(Self { rows })
    }

    /// The HC disclosure sample: 10-Ks filed from 2020-11-09 to 2021-11-08.
    pub fn published() -> Self {
        let row = |label: &str, kind, stated| SelectionRow {
            label: label.into(),
            kind,
            stated,
        };
        use RowKind::*;
        Self::new(vec![
            row("All 10-K forms filed 2020-11-09 to 2021-11-08", Start, 7_185),
            row("Filings from filers not covered by Compustat and CRSP", Exclusion, 3_219),
            row("10-Ks in the intersection of EDGAR, Compustat, and CRSP", Subtotal, 3_966),
            row("Filings for fiscal year 2019", Exclusion, 5),
            row("Filings from firms having no employees", Exclusion, 3),
            row("Filings that do not contain HC disclosures", Exclusion, 2),
            row("Duplicate filings from the same filer (first one kept)", Exclusion, 3),
            row("HC disclosures from the same number of unique firms", Subtotal, 3_953),
        ])
        .expect("published selection is well formed")
    }

    pub fn rows(&self) -> &[SelectionRow] {
        &self.rows
    }

    /// Recomputes every subtotal from the start count and the exclusions and
    /// fails on the first subtotal that disagrees with its stated value.
    pub fn reconcile(&self) -> Result<Vec<ReconciledRow>> {
        let mut total = 0i64;
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let stated = row.stated as i64;
            let value = match row.kind {
                RowKind::Start => {
                    total = stated;
                    stated
                }
                RowKind::Exclusion => {
                    total -= stated;
                    -stated
                }
                RowKind::Subtotal => {
                    if total != stated {
                        return Err(Error::invalid(format!(
                            "`{}`: stated {} but the steps above give {}",
                            row.label, stated, total
                        )));
                    }
                    total
                }
            };
            out.push(ReconciledRow {
                label: row.label.clone(),
                kind: row.kind,
                value,
                running_total: total,
            });
        }
        Ok(out)
    }

    pub fn final_count(&self) -> Result<i64> {
        Ok(self.reconcile()?.last().map_or(0, |r| r.running_total))
    }
}
