use std::cmp::Ordering;

use serde::{Serialize, Serializer};

use crate::config::ValueKind;

/// Display string of a field the record does not fill.
pub const MISSING_DISPLAY: &str = "None or unfilled";
/// Display string of a global column the row's source does not define.
pub const ABSENT_DISPLAY: &str = "n/a";

/// Calendar date with optional month and day (`YYYY`, `YYYY-MM`, `YYYY-MM-DD`).
///
/// Zero month/day mean "unspecified" and sort before any specified value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialDate {
    pub year: u16,
    pub month: u8,
    pub day: u8,
}

impl PartialDate {
    pub fn parse(text: &str) -> Option<Self> {
        let mut parts = text.split('-');
        let year = digits(parts.next()?, 4)?;
        let month = match parts.next() {
            Some(m) => digits(m, 2)?,
            None => 0,
        };
        let day = match parts.next() {
            Some(d) if month != 0 => digits(d, 2)?,
            Some(_) => return None,
            None => 0,
        };
        if parts.next().is_some() {
            return None;
        }
        if month > 12 || (text.len() > 4 && month == 0) {
            return None;
        }
        if day > days_in_month(year, month) || (text.len() > 7 && day == 0) {
            return None;
        }
        Some(Self { year: year as u16, month: month as u8, day: day as u8 })
    }
}

fn digits(s: &str, width: usize) -> Option<u32> {
    if s.len() != width || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn days_in_month(year: u32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        _ => 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TypedValue {
    Number(f64),
    Date(PartialDate),
}

impl TypedValue {
    /// Parses `text` under `kind`; text columns never carry a typed value.
    pub fn parse(text: &str, kind: ValueKind) -> Option<Self> {
        let t = text.trim();
        match kind {
            ValueKind::Text => None,
            ValueKind::Integer => t.parse::<i64>().ok().map(|i| TypedValue::Number(i as f64)),
            ValueKind::Decimal => t
                .parse::<f64>()
                .ok()
                .filter(|f| f.is_finite())
                .map(TypedValue::Number),
            ValueKind::Date => PartialDate::parse(t).map(TypedValue::Date),
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (TypedValue::Number(a), TypedValue::Number(b)) => a.total_cmp(b),
            (TypedValue::Date(a), TypedValue::Date(b)) => a.cmp(b),
            (TypedValue::Number(_), TypedValue::Date(_)) => Ordering::Less,
            (TypedValue::Date(_), TypedValue::Number(_)) => Ordering::Greater,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Present {
        display: String,
        typed: Option<TypedValue>,
    },
    MissingInRecord,
    ColumnAbsentInSource,
}

impl CellValue {
    pub fn present(display: impl Into<String>, kind: ValueKind) -> Self {
        let display = display.into();
        let typed = TypedValue::parse(&display, kind);
        CellValue::Present { display, typed }
    }

    pub fn display(&self) -> &str {
        match self {
            CellValue::Present { display, .. } => display,
            CellValue::MissingInRecord => MISSING_DISPLAY,
            CellValue::ColumnAbsentInSource => ABSENT_DISPLAY,
        }
    }

    pub fn typed(&self) -> Option<TypedValue> {
        match self {
            CellValue::Present { typed, .. } => *typed,
            _ => None,
        }
    }

    pub fn is_sentinel(&self) -> bool {
        !matches!(self, CellValue::Present { .. })
    }

    /// The same cell read under another column kind.
    pub fn retyped(&self, kind: ValueKind) -> CellValue {
        match self {
            CellValue::Present { display, .. } => CellValue::present(display.clone(), kind),
            other => other.clone(),
        }
    }

    /// Identity used when merging duplicate candidate rows.
    pub(crate) fn merge_key(&self) -> Option<&str> {
        match self {
            CellValue::Present { display, .. } => Some(display),
            _ => None,
        }
    }
}

impl Serialize for CellValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.display())
    }
}
