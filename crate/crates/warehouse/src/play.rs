//! Keyboard-driven terminal player.
//!
//! Keys: space 2D/3D, `q`/`e` rotate counter-clockwise/clockwise, `c`
//! colors, `h` hint, `1`-`9` answer, `n` next module, `x` quit.

use std::io::{self, BufRead, Read, Write};
use std::sync::Arc;

use warehouse_core::session::{LogRecord, SessionEvent};
use warehouse_core::{Bundle, Session, SessionError, ViewEvent};

use crate::render::{render_question, render_view};

pub const KEY_HELP: &str = "keys: space 2D/3D, q/e rotate, c colors, h hint, 1-9 answer, n next, x quit";

fn show<W: Write + ?Sized>(s: &Session, out: &mut W) -> io::Result<()> {
    match s.present() {
        Ok((view, q)) => {
            out.write_all(render_view(&view).as_bytes())?;
            if let Some(q) = q {
                out.write_all(render_question(&q).as_bytes())?;
                if let Some(a) = s.answer_for(s.cursor()) {
                    writeln!(out, "(answered: {})", a.position + 1)?;
                }
            }
        }
        Err(_) => writeln!(out, "End of bundle.")?,
    }
    Ok(())
}

pub fn score_line(s: &Session) -> String {
    let sc = s.score();
    format!("Score: {}/{}", sc.correct, sc.total)
}

/// Runs the key loop until `x`, end of input, or the last module is passed.
pub fn play<R: Read, W: Write>(bundle: Arc<Bundle>, seed: u64, input: R, out: &mut W) -> io::Result<Session> {
    let s = Session::start(bundle, seed).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    play_session(s, input, out)
}

/// Same loop, continuing an existing session.
pub fn play_session<R: Read, W: Write + ?Sized>(mut s: Session, input: R, out: &mut W) -> io::Result<Session> {
    writeln!(out, "{KEY_HELP}")?;
    show(&s, out)?;
    for byte in io::BufReader::new(input).bytes() {
        let key = byte? as char;
        let view = |e| SessionEvent::View { event: e };
        let event = match key {
            ' ' => view(ViewEvent::Toggle3d),
            'q' | 'Q' => view(ViewEvent::RotateCcw),
            'e' | 'E' => view(ViewEvent::RotateCw),
            'c' | 'C' => view(ViewEvent::ToggleColors),
            '1'..='9' => SessionEvent::Answer { position: key as usize - '1' as usize },
            'n' | 'N' => SessionEvent::Advance,
            'h' | 'H' => {
                let hint = s.present().ok().and_then(|(v, _)| v.hint);
                writeln!(out, "Hint: {}", hint.as_deref().unwrap_or("no hint for this module"))?;
                continue;
            }
            'x' | 'X' => break,
            c if c.is_whitespace() => continue,
            c => {
                writeln!(out, "unknown key {c:?}; {KEY_HELP}")?;
                continue;
            }
        };
        match s.apply(event) {
            Ok(Some(true)) => writeln!(out, "Correct! {}", score_line(&s))?,
            Ok(Some(false)) => writeln!(out, "Incorrect. {}", score_line(&s))?,
            Ok(None) => {
                show(&s, out)?;
                if s.is_finished() {
                    break;
                }
            }
            Err(e @ SessionError::Finished) => {
                writeln!(out, "{e}")?;
                break;
            }
            Err(e) => writeln!(out, "{e}")?,
        }
    }
    writeln!(out, "{}", score_line(&s))?;
    Ok(s)
}

pub fn write_log<W: Write>(log: &[LogRecord], out: &mut W) -> io::Result<()> {
    for rec in log {
        serde_json::to_writer(&mut *out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_log<R: BufRead>(input: R) -> io::Result<Vec<LogRecord>> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("log line {}: {e}", i + 1)))?;
        records.push(rec);
    }
    Ok(records)
}
