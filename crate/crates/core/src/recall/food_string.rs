//! The `DESCRIPTOR (grams); DESCRIPTOR (grams)` serialization of a recall.

use thiserror::Error;

use super::{validate_descriptor, DescriptorError, DietaryRecall};
use crate::format_decimal;

/// Grammar errors. Offsets count characters from the start of the input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoodStringError {
    #[error("food string is empty")]
    Empty,
    #[error("item {index}: {source}")]
    Descriptor { index: usize, source: DescriptorError },
    #[error("empty item at offset {offset}")]
    EmptyItem { offset: usize },
    #[error("unbalanced parentheses: expected ')' at offset {offset}")]
    MissingCloseParen { offset: usize },
    #[error("unbalanced parentheses: unmatched ')' at offset {offset}")]
    UnmatchedCloseParen { offset: usize },
    #[error("item without a parenthesized amount at offset {offset}")]
    MissingAmount { offset: usize },
    #[error("empty descriptor at offset {offset}")]
    EmptyDescriptor { offset: usize },
    #[error("non-numeric grams {text:?} at offset {offset}")]
    NonNumericGrams { offset: usize, text: String },
}

/// Joins the recall's items as `DESCRIPTOR (grams)` separated by `"; "`,
/// with grams in minimal decimal form and no terminal period.
pub fn render_food_string(recall: &DietaryRecall) -> Result<String, FoodStringError> {
    if recall.items.is_empty() {
        return Err(FoodStringError::Empty);
    }
    let mut parts = Vec::with_capacity(recall.items.len());
    for (index, item) in recall.items.iter().enumerate() {
        validate_descriptor(&item.descriptor)
            .map_err(|source| FoodStringError::Descriptor { index, source })?;
        if !(item.grams.is_finite() && item.grams > 0.0) {
            return Err(FoodStringError::Descriptor { index, source: DescriptorError::Grams(item.grams) });
        }
        parts.push(format!("{} ({})", item.descriptor, format_decimal(item.grams)));
    }
    Ok(parts.join("; "))
}

/// Parses a food string back into `(descriptor, grams)` pairs.
///
/// The amount is the last parenthesized group of each item, so descriptors
/// may carry balanced parenthesized qualifiers. One terminal period after
/// the final item is tolerated.
pub fn parse_food_string(text: &str) -> Result<Vec<(String, f64)>, FoodStringError> {
    let chars: Vec<char> = text.chars().collect();
    let mut end = chars.len();
    while end > 0 && chars[end - 1].is_whitespace() {
        end -= 1;
    }
    if end == 0 {
        return Err(FoodStringError::Empty);
    }
    if end >= 2 && chars[end - 1] == '.' && chars[end - 2] == ')' {
        end -= 1;
    }

    let mut items = Vec::new();
    let mut start = 0;
    while start <= end {
        let stop = (start..end).find(|&i| chars[i] == ';').unwrap_or(end);
        items.push(parse_item(&chars, start, stop)?);
        start = stop + 1;
    }
    Ok(items)
}

fn parse_item(chars: &[char], start: usize, stop: usize) -> Result<(String, f64), FoodStringError> {
    let mut s = start;
    while s < stop && chars[s].is_whitespace() {
        s += 1;
    }
    let mut e = stop;
    while e > s && chars[e - 1].is_whitespace() {
        e -= 1;
    }
    if s == e {
        return Err(FoodStringError::EmptyItem { offset: s });
    }

    if chars[e - 1] != ')' {
        let mut depth = 0usize;
        for (i, &c) in chars.iter().enumerate().take(e).skip(s) {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth = depth
                        .checked_sub(1)
                        .ok_or(FoodStringError::UnmatchedCloseParen { offset: i })?
                }
                _ => {}
            }
        }
        return Err(if depth > 0 {
            FoodStringError::MissingCloseParen { offset: e }
        } else {
            FoodStringError::MissingAmount { offset: e }
        });
    }

    let close = e - 1;
    let mut depth = 0usize;
    let mut open = None;
    for i in (s..close).rev() {
        match chars[i] {
            ')' => depth += 1,
            '(' if depth == 0 => {
                open = Some(i);
                break;
            }
            '(' => depth -= 1,
            _ => {}
        }
    }
    let open = open.ok_or(FoodStringError::UnmatchedCloseParen { offset: close })?;

    let amount: String = chars[open + 1..close].iter().collect();
    let grams = parse_amount(amount.trim())
        .ok_or_else(|| FoodStringError::NonNumericGrams { offset: open + 1, text: amount.clone() })?;

    let mut d_end = open;
    while d_end > s && chars[d_end - 1].is_whitespace() {
        d_end -= 1;
    }
    if d_end == s {
        return Err(FoodStringError::EmptyDescriptor { offset: s });
    }
    let mut depth = 0usize;
    for (i, &c) in chars.iter().enumerate().take(d_end).skip(s) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or(FoodStringError::UnmatchedCloseParen { offset: i })?
            }
            _ => {}
        }
    }
    if depth > 0 {
        return Err(FoodStringError::MissingCloseParen { offset: d_end });
    }
    Ok((chars[s..d_end].iter().collect(), grams))
}

/// Unsigned decimal: digits with an optional fractional part.
fn parse_amount(text: &str) -> Option<f64> {
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (text, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(int) || frac.is_some_and(|f| !digits(f)) {
        return None;
    }
    text.parse::<f64>().ok().filter(|v| v.is_finite())
}
