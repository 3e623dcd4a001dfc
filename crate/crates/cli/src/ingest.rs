//! Reading count tables in the `simulate` CSV layout.

use std::io::Read;

use unclab::estimator::{CountTable, PreparedState, StatePreparationSet};
use unclab::measurement::Sign;

use crate::rows::SIMULATE_HEADER;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Line { line: u64, message: String },
    #[error("phi_deg = {phi_deg}: missing prepared state {state}")]
    MissingState { phi_deg: f64, state: PreparedState },
    #[error("phi_deg = {phi_deg}, prepared state {state}: missing cell ({m1}{m2})")]
    MissingCell {
        phi_deg: f64,
        state: PreparedState,
        m1: char,
        m2: char,
    },
    #[error("no data rows")]
    Empty,
}

/// One detuning setting read from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub phi_deg: f64,
    pub tables: StatePreparationSet<f64>,
    /// Every count cell held a whole number.
    pub integer_counts: bool,
}

#[derive(Default)]
struct Partial {
    cells: [[Option<f64>; 4]; 4],
}

fn line_error(line: u64, message: impl Into<String>) -> IngestError {
    IngestError::Line {
        line,
        message: message.into(),
    }
}

/// Groups rows by `phi_deg` in order of first appearance; within a setting,
/// rows may come in any order but every (state, m1, m2) must appear once.
pub fn read_settings<R: Read>(input: R) -> Result<Vec<Setting>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers().map_err(|e| line_error(1, e.to_string()))?.clone();
    let got: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if got != SIMULATE_HEADER {
        return Err(line_error(
            1,
            format!(
                "expected header `{}`, found `{}`",
                SIMULATE_HEADER.join(","),
                got.join(",")
            ),
        ));
    }

    let mut order: Vec<f64> = Vec::new();
    let mut partials: Vec<Partial> = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            line_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != SIMULATE_HEADER.len() {
            return Err(line_error(
                line,
                format!("expected {} fields, found {}", SIMULATE_HEADER.len(), record.len()),
            ));
        }
        let number = |i: usize| -> Result<f64, IngestError> {
            let text = &record[i];
            text.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| line_error(line, format!("{}: `{text}` is not a finite number", SIMULATE_HEADER[i])))
        };
        let phi_deg = number(0)?;
        let state: PreparedState = record[1]
            .parse()
            .map_err(|e: unclab::estimator::UnknownStateLabel| line_error(line, e.to_string()))?;
        let sign = |i: usize| {
            Sign::from_symbol(&record[i])
                .ok_or_else(|| line_error(line, format!("{}: `{}` is not + or -", SIMULATE_HEADER[i], &record[i])))
        };
        let (m1, m2) = (sign(2)?, sign(3)?);
        let count = number(4)?;
        if count < 0.0 {
            return Err(line_error(line, format!("count: {count} is negative")));
        }
        number(5)?;
        if !record[6].is_empty() {
            number(6)?;
        }

        let slot = match order.iter().position(|&p| p == phi_deg) {
            Some(i) => i,
            None => {
                order.push(phi_deg);
                partials.push(Partial::default());
                order.len() - 1
            }
        };
        let cell = &mut partials[slot].cells[state.index()][m1.index() * 2 + m2.index()];
        if cell.is_some() {
            return Err(line_error(
                line,
                format!(
                    "duplicate row for phi_deg = {phi_deg}, state {state}, cell ({}{})",
                    m1.symbol(),
                    m2.symbol()
                ),
            ));
        }
        *cell = Some(count);
    }
    if order.is_empty() {
        return Err(IngestError::Empty);
    }

    order
        .into_iter()
        .zip(partials)
        .map(|(phi_deg, partial)| {
            let mut integer_counts = true;
            let mut tables = [CountTable::new([0.0; 4]).expect("zero table"); 4];
            for state in PreparedState::ALL {
                let cells = partial.cells[state.index()];
                if cells.iter().all(Option::is_none) {
                    return Err(IngestError::MissingState { phi_deg, state });
                }
                let mut values = [0.0; 4];
                for (k, v) in cells.iter().enumerate() {
                    let Some(x) = *v else {
                        let (m1, m2) = unclab::measurement::CELLS[k];
                        return Err(IngestError::MissingCell {
                            phi_deg,
                            state,
                            m1: m1.symbol(),
                            m2: m2.symbol(),
                        });
                    };
                    integer_counts &= x.fract() == 0.0;
                    values[k] = x;
                }
                tables[state.index()] = CountTable::new(values).expect("validated cells");
            }
            Ok(Setting {
                phi_deg,
                tables: StatePreparationSet::from_tables(tables),
                integer_counts,
            })
        })
        .collect()
}
