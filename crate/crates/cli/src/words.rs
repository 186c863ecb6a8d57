//! Edge words: deck transformations and ball vertices named by walks in the
//! base complex.
//!
//! A word is a comma-separated list of signed 1-based base edge references:
//! `2,-1` traverses base edge 2 forward then base edge 1 backward. Walks
//! start at the developed ball's basepoint and follow ports, so a word is
//! valid exactly when its lift stays inside the window.

use mf_core::ball::{deck_search, Ball, Deck};
use mf_core::complex::CubeComplex;
use mf_core::ids::{EId, End, VId};

/// Follow a word from a ball vertex.
pub fn walk_word(ball: &Ball, base: &CubeComplex, from: VId, word: &str) -> Result<VId, String> {
    let mut cur = from;
    for tok in word.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            return Err("word has an empty letter".into());
        }
        let k: i64 = tok
            .parse()
            .map_err(|_| format!("word letter `{tok}` is not a signed edge reference"))?;
        if k == 0 {
            return Err("word letters are signed 1-based edge references; 0 is not one".into());
        }
        let idx = (k.unsigned_abs() - 1) as usize;
        if idx >= base.edge_count() {
            return Err(format!(
                "word letter `{tok}` references edge {} but the base has {} edges",
                k.unsigned_abs(),
                base.edge_count()
            ));
        }
        let end = End { e: EId(idx as u32), w: if k > 0 { 0 } else { 1 } };
        cur = ball.port(cur, end).ok_or_else(|| {
            format!(
                "word letter `{tok}` does not continue from `{}` \
                 (edge not incident there, or the walk left the window)",
                ball.complex().vname(cur)
            )
        })?;
    }
    Ok(cur)
}

/// Deck transformation sending the basepoint along a word.
pub fn word_deck(ball: &Ball, base: &CubeComplex, word: &str) -> Result<Deck, String> {
    let to = walk_word(ball, base, ball.basepoint(), word)?;
    if to == ball.basepoint() {
        return Err(format!("word `{word}` walks back to the basepoint; the deck is trivial"));
    }
    deck_search(ball, ball.basepoint(), to)
        .map_err(|e| format!("word `{word}` does not induce a deck transformation: {e}"))
}
