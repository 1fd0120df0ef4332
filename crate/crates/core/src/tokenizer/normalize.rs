//! Canonical forms for dates, clock times and currency amounts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

/// Month number (1-based) for a full or abbreviated English month name.
pub fn month_number(word: &str) -> Option<u8> {
    let w = word.trim_end_matches('.').to_ascii_lowercase();
    if w.len() < 3 {
        return None;
    }
    MONTHS.iter().position(|m| {
        let m = m.to_ascii_lowercase();
        m == w || (w.len() >= 3 && m.starts_with(&w) && (w.len() == 3 || w == "sept"))
    })
    .map(|i| i as u8 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CalendarDate {
    pub year: Option<i32>,
    pub month: Option<u8>,
    pub day: Option<u8>,
}

impl fmt::Display for CalendarDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(d) = self.day {
            parts.push(d.to_string());
        }
        if let Some(m) = self.month {
            parts.push(MONTHS[(m - 1) as usize].to_string());
        }
        if let Some(y) = self.year {
            parts.push(y.to_string());
        }
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}`")]
pub struct ParseValueError(pub String);

impl FromStr for CalendarDate {
    type Err = ParseValueError;

    /// Accepts the canonical `[day] Month [year]` form plus `Month day, year`
    /// and two-digit years (read as 19xx).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseValueError(s.to_string());
        let words: Vec<&str> = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|w| !w.is_empty())
            .collect();
        let mut date = CalendarDate { year: None, month: None, day: None };
        for w in words {
            if let Some(m) = month_number(w) {
                if date.month.is_some() {
                    return Err(err());
                }
                date.month = Some(m);
            } else if let Ok(n) = w.parse::<u32>() {
                if w.len() == 4 || (w.len() == 2 && date.month.is_some() && date.day.is_some()) {
                    date.year = Some(expand_year(w, n).ok_or_else(err)?);
                } else if (1..=31).contains(&n) && date.day.is_none() {
                    date.day = Some(n as u8);
                } else if w.len() == 2 && date.month.is_some() {
                    date.year = Some(expand_year(w, n).ok_or_else(err)?);
                } else {
                    return Err(err());
                }
            } else {
                return Err(err());
            }
        }
        if date.month.is_none() && date.year.is_none() {
            return Err(err());
        }
        Ok(date)
    }
}

fn expand_year(w: &str, n: u32) -> Option<i32> {
    match w.len() {
        4 => Some(n as i32),
        2 => Some(1900 + n as i32),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClockTime {
    pub hour: u8,
    pub minute: u8,
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.hour, self.minute)
    }
}

impl FromStr for ClockTime {
    type Err = ParseValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseValueError(s.to_string());
        let lower = s.trim().to_ascii_lowercase();
        let compact: String = lower.chars().filter(|c| !c.is_whitespace() && *c != '.').collect();
        let (clock, meridiem) = if let Some(c) = compact.strip_suffix("am") {
            (c.to_string(), Some(false))
        } else if let Some(c) = compact.strip_suffix("pm") {
            (c.to_string(), Some(true))
        } else {
            (compact, None)
        };
        let (h, m) = match clock.split_once(':') {
            Some((h, m)) => (h.parse::<u8>().map_err(|_| err())?, m.parse::<u8>().map_err(|_| err())?),
            None => (clock.parse::<u8>().map_err(|_| err())?, 0),
        };
        if m > 59 {
            return Err(err());
        }
        let hour = match meridiem {
            None if h < 24 => h,
            Some(pm) if (1..=12).contains(&h) => (h % 12) + if pm { 12 } else { 0 },
            _ => return Err(err()),
        };
        Ok(ClockTime { hour, minute: m })
    }
}

/// A currency amount: an exact decimal amount plus a currency code such as `NT$`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Money {
    /// Canonical decimal without grouping or trailing fractional zeros.
    pub amount: String,
    pub code: String,
}

impl Money {
    /// Builds an amount from a written number (`"20"`, `"1.5"`, `"20,000"`)
    /// scaled by a power of ten (`million` is 6).
    pub fn from_written(number: &str, scale_exp: u32, code: &str) -> Option<Money> {
        let digits: String = number.chars().filter(|c| *c != ',').collect();
        let (int, frac) = match digits.split_once('.') {
            Some((i, f)) => (i.to_string(), f.to_string()),
            None => (digits, String::new()),
        };
        if int.is_empty() && frac.is_empty()
            || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        {
            return None;
        }
        let mut frac = frac;
        let mut int = int;
        for _ in 0..scale_exp {
            if frac.is_empty() {
                int.push('0');
            } else {
                int.push(frac.remove(0));
            }
        }
        let int = int.trim_start_matches('0');
        let int = if int.is_empty() { "0" } else { int };
        let frac = frac.trim_end_matches('0');
        let amount = if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        };
        Some(Money { amount, code: code.to_string() })
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.code, self.amount)
    }
}

impl FromStr for Money {
    type Err = ParseValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let idx = s
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| ParseValueError(s.to_string()))?;
        let (code, number) = s.split_at(idx);
        if code.is_empty() {
            return Err(ParseValueError(s.to_string()));
        }
        Money::from_written(number, 0, code).ok_or_else(|| ParseValueError(s.to_string()))
    }
}
