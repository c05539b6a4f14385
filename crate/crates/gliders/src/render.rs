//! Space-time diagram rendering: ASCII art and binary PGM.
//!
//! A diagram is a sequence of configuration windows (one per time step,
//! earliest first, as produced by [`crate::ca::simulate`]). Rendered output
//! puts the *latest* configuration on the top row, so time flows upward,
//! and pads the cells outside a step's window - windows shrink as the
//! rule's radius eats into the boundary.

use crate::ca::ConfigurationWindow;
use crate::error::{Error, Result};

/// Character assignment for ASCII rendering.
#[derive(Clone, Debug)]
pub struct AsciiCharset {
    /// One character per state, indexed by the encoded state.
    pub cells: Vec<char>,
    /// Character for positions outside a window.
    pub pad: char,
}

impl AsciiCharset {
    /// Three-state signed default: `-` for -1, `.` for 0, `+` for +1.
    pub fn signed_default() -> AsciiCharset {
        AsciiCharset {
            cells: vec!['-', '.', '+'],
            pad: ' ',
        }
    }

    /// Digits `0`, `1`, ... for arbitrary alphabets up to 10 states.
    pub fn digits(alphabet_size: u8) -> Result<AsciiCharset> {
        if alphabet_size > 10 {
            return Err(Error::arg("digit charset covers at most 10 states"));
        }
        Ok(AsciiCharset {
            cells: (0..alphabet_size)
                .map(|s| char::from(b'0' + s))
                .collect(),
            pad: ' ',
        })
    }

    /// Signed mapping for three-state windows, digits otherwise.
    pub fn for_alphabet(alphabet_size: u8) -> Result<AsciiCharset> {
        if alphabet_size == 3 {
            Ok(AsciiCharset::signed_default())
        } else {
            AsciiCharset::digits(alphabet_size)
        }
    }
}

fn diagram_bounds(diagram: &[ConfigurationWindow]) -> Result<(i64, i64, u8)> {
    let first = diagram.first().ok_or(Error::EmptyWindow)?;
    let alphabet = first.alphabet_size();
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for w in diagram {
        if w.alphabet_size() != alphabet {
            return Err(Error::AlphabetMismatch {
                rule_alphabet: alphabet,
                window_alphabet: w.alphabet_size(),
            });
        }
        lo = lo.min(w.lo());
        hi = hi.max(w.hi());
    }
    Ok((lo, hi, alphabet))
}

/// Render a diagram as text, latest configuration on top.
pub fn render_ascii(diagram: &[ConfigurationWindow], charset: &AsciiCharset) -> Result<String> {
    let (lo, hi, alphabet) = diagram_bounds(diagram)?;
    if charset.cells.len() < alphabet as usize {
        return Err(Error::arg(format!(
            "charset covers {} states, diagram uses {}",
            charset.cells.len(),
            alphabet
        )));
    }
    let width = (hi - lo + 1) as usize;
    let mut out = String::with_capacity((width + 1) * diagram.len());
    for window in diagram.iter().rev() {
        for j in lo..=hi {
            match window.get(j) {
                Some(s) => out.push(charset.cells[s as usize]),
                None => out.push(charset.pad),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Gray level outside any window.
const PGM_PAD: u8 = 64;

/// Render a diagram as a binary (P5) PGM image, latest configuration on
/// the top row. Three-state diagrams use black / mid-gray / white for
/// -1 / 0 / +1; other alphabets spread states evenly over [0, 255].
pub fn render_pgm(diagram: &[ConfigurationWindow]) -> Result<Vec<u8>> {
    let (lo, hi, alphabet) = diagram_bounds(diagram)?;
    let width = (hi - lo + 1) as usize;
    let height = diagram.len();
    let levels: Vec<u8> = if alphabet == 3 {
        vec![0, 128, 255]
    } else if alphabet == 1 {
        vec![255]
    } else {
        (0..alphabet)
            .map(|s| ((s as u32 * 255) / (alphabet as u32 - 1)) as u8)
            .collect()
    };
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for window in diagram.iter().rev() {
        for j in lo..=hi {
            out.push(match window.get(j) {
                Some(s) => levels[s as usize],
                None => PGM_PAD,
            });
        }
    }
    Ok(out)
}
